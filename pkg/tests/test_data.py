import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import any_overlap
from tts_emg.data import (
    Recording,
    SplitSpec,
    WindowingConfig,
    apply_signal_normalizer,
    class_weights,
    enforce_gaps,
    fit_signal_normalizer,
    load_recording,
    load_window_cache,
    prepare_windows,
    relabel_rest,
    repetition_boundaries,
    save_window_cache,
    segment,
    split_windows,
    standard_splits,
    write_recording,
)
from tts_emg.errors import DataFormatError


def make_recording(movement, repetition, rate=100.0, channels=2, seed=0):
    n = len(movement)
    emg = np.random.default_rng(seed).standard_normal((n, channels))
    return Recording(emg, np.asarray(movement), np.asarray(repetition), rate, "s1", 1)


def protocol_labels(blocks):
    """``blocks`` is a list of ``(movement, repetition, n_samples)``."""
    mv = np.concatenate([np.full(n, m) for m, _, n in blocks])
    rp = np.concatenate([np.full(n, r) for _, r, n in blocks])
    return mv, rp


class TestWindowingConfig:
    @pytest.mark.parametrize("rate, expected", [(100.0, (15, 1)), (2000.0, (300, 20))])
    def test_database_rates(self, rate, expected):
        assert WindowingConfig().samples(rate) == expected

    def test_too_small(self):
        with pytest.raises(ValueError):
            WindowingConfig(150, 1).samples(100.0)


class TestRecordingFormat:
    def test_roundtrip(self, tmp_path, rng):
        rec = Recording(rng.standard_normal((1000, 10)), np.zeros(1000, int), np.zeros(1000, int),
                        100.0, "7", 1)
        write_recording(tmp_path / "a.emg", rec)
        back = load_recording(tmp_path / "a.emg")
        assert back.emg.shape == (1000, 10)
        np.testing.assert_array_equal(back.emg, rec.emg)
        assert (back.subject_id, back.database_id, back.sample_rate_hz) == ("7", 1, 100.0)

    def test_header_exact(self, tmp_path):
        rec = Recording(np.zeros((1, 2)), [0], [0], 2000.0, "s3", 2)
        write_recording(tmp_path / "h.emg", rec)
        first = (tmp_path / "h.emg").read_text().splitlines()[0]
        assert first == "#emg-recording v1 rate=2000 channels=2 subject=s3 db=2"

    def test_concatenation(self, tmp_path, rng):
        paths = []
        for k, n in enumerate((40, 60)):
            rec = Recording(rng.standard_normal((n, 3)), np.full(n, k + 1), np.ones(n, int), 100.0, "1", 1)
            paths.append(tmp_path / f"e{k}.emg")
            write_recording(paths[-1], rec)
        rec = load_recording(paths)
        assert rec.n_samples == 100
        assert rec.movement[:40].tolist() == [1] * 40 and rec.movement[40:].tolist() == [2] * 60

    @pytest.mark.parametrize("body, line, fragment", [
        ("0.1\t0.2\t1\n", 2, "missing repetition column"),
        ("0.1\t0.2\t1\t1\n0.1\t1\t1\t2\t3\n", 3, "ragged row"),
        ("0.1\t0.2\t60\t1\n", 2, "invalid movement"),
        ("0.1\tabc\t1\t1\n", 2, "non-numeric"),
        ("0.1\tnan\t1\t1\n", 2, "non-finite"),
        ("0.1\t0.2\t1\t-1\n", 2, "invalid repetition"),
    ])
    def test_errors_carry_line(self, tmp_path, body, line, fragment):
        p = tmp_path / "bad.emg"
        p.write_text("#emg-recording v1 rate=100 channels=2 subject=1 db=1\n" + body)
        with pytest.raises(DataFormatError) as exc:
            load_recording(p)
        assert exc.value.line == line
        assert fragment in str(exc.value)

    @pytest.mark.parametrize("header", ["#emg v1 rate=100", "#emg-recording v1 rate=-5 channels=2 subject=1 db=1",
                                        "#emg-recording v1 rate=100 channels=2 subject=1 db=3"])
    def test_malformed_header(self, tmp_path, header):
        p = tmp_path / "bad.emg"
        p.write_text(header + "\n0\t0\t0\t0\n")
        with pytest.raises(DataFormatError):
            load_recording(p)

    def test_mismatched_exercise_headers(self, tmp_path):
        a = Recording(np.zeros((3, 2)), [0, 0, 0], [0, 0, 0], 100.0, "1", 1)
        b = Recording(np.zeros((3, 3)), [0, 0, 0], [0, 0, 0], 100.0, "1", 1)
        write_recording(tmp_path / "a.emg", a)
        write_recording(tmp_path / "b.emg", b)
        with pytest.raises(DataFormatError):
            load_recording([tmp_path / "a.emg", tmp_path / "b.emg"])

    def test_invariants(self):
        with pytest.raises(ValueError):
            Recording(np.zeros((3, 2)), [0, 0], [0, 0, 0], 100.0, "1", 1)
        with pytest.raises(ValueError):
            Recording(np.zeros((3, 2)), [0, 0, 0], [0, 0, 0], 0.0, "1", 1)


class TestRelabelRest:
    def test_six_second_block(self):
        mv, rp = protocol_labels([(1, 2, 50), (0, 0, 600), (1, 3, 50)])
        out = relabel_rest(make_recording(mv, rp)).repetition
        assert np.all(out[50:350] == 2) and np.all(out[350:650] == 3)
        np.testing.assert_array_equal(relabel_rest(make_recording(mv, rp)).movement, mv)

    def test_thirty_second_block_capped(self):
        mv, rp = protocol_labels([(1, 2, 50), (0, 0, 3000), (1, 3, 50)])
        out = relabel_rest(make_recording(mv, rp)).repetition
        assert np.all(out[50:1050] == 2)
        assert np.all(out[1050:2050] == 0)
        assert np.all(out[2050:3050] == 3)

    def test_leading_rest(self):
        mv, rp = protocol_labels([(0, 0, 400), (4, 1, 30)])
        out = relabel_rest(make_recording(mv, rp)).repetition
        assert np.all(out[:200] == 0) and np.all(out[200:400] == 1)

    def test_odd_block_extra_sample_goes_before(self):
        mv, rp = protocol_labels([(1, 1, 10), (0, 0, 7), (1, 2, 10)])
        out = relabel_rest(make_recording(mv, rp)).repetition
        assert out[10:14].tolist() == [1, 1, 1, 1] and out[14:17].tolist() == [2, 2, 2]

    def test_no_rest_unchanged(self):
        mv, rp = protocol_labels([(1, 1, 20), (2, 1, 20)])
        rec = make_recording(mv, rp)
        np.testing.assert_array_equal(relabel_rest(rec).repetition, rp)

    def test_fractional_cap(self):
        mv, rp = protocol_labels([(1, 1, 5), (0, 0, 100), (1, 2, 5)])
        out = relabel_rest(make_recording(mv, rp, rate=3.35)).repetition
        # floor(10 s * 3.35 Hz) = 33 samples per side
        assert np.sum(out[5:105] == 1) == 33 and np.sum(out[5:105] == 2) == 33

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.integers(1, 4), st.integers(1, 60), st.integers(0, 80)), min_size=1, max_size=6))
    def test_properties(self, spec):
        blocks = []
        for k, (m, n_move, n_rest) in enumerate(spec):
            blocks += [(0, 0, n_rest), (m, k + 1, n_move)]
        mv, rp = protocol_labels(blocks)
        rec = make_recording(mv, rp, rate=2.0)
        out = relabel_rest(rec, max_rest_seconds=10).repetition
        moving = mv != 0
        np.testing.assert_array_equal(out[moving], rp[moving])
        for r in range(1, len(spec) + 1):
            assert np.sum((out == r) & ~moving) <= 2 * 20


class TestGapsAndSegment:
    def test_boundary_exclusion(self):
        mv, rp = protocol_labels([(1, 1, 500), (1, 2, 500)])
        excl = enforce_gaps(make_recording(mv, rp), 15).excluded_starts
        assert np.flatnonzero(excl).tolist() == list(range(486, 500))

    def test_single_repetition_unchanged(self):
        mv, rp = protocol_labels([(1, 1, 100)])
        assert not enforce_gaps(make_recording(mv, rp), 15).excluded_starts.any()
        assert repetition_boundaries(rp).size == 0

    def test_window_count(self):
        mv, rp = protocol_labels([(1, 1, 100)])
        ws = segment(make_recording(mv, rp))
        assert len(ws) == 86
        assert ws.starts[0] == 0 and ws.starts[-1] == 85

    def test_single_long_window(self):
        mv, rp = protocol_labels([(1, 1, 300)])
        assert len(segment(make_recording(mv, rp, rate=2000.0))) == 1

    def test_last_sample_label(self):
        mv, rp = protocol_labels([(0, 0, 20), (3, 1, 20)])
        ws = segment(make_recording(mv, rp))
        # the first kept window is the first whose last sample (start + 14) reaches index 20
        assert ws.starts[0] == 6
        assert np.all(ws.y == 3)

    def test_repetition_zero_dropped(self):
        mv, rp = protocol_labels([(2, 1, 30), (0, 0, 30)])
        ws = segment(make_recording(mv, rp))
        assert np.all(ws.repetition == 1)
        assert ws.starts.max() + 15 <= 30

    def test_short_stream(self):
        mv, rp = protocol_labels([(1, 1, 10)])
        with pytest.raises(ValueError):
            segment(make_recording(mv, rp))

    def test_windows_view_signal(self):
        mv, rp = protocol_labels([(1, 1, 40)])
        rec = make_recording(mv, rp)
        ws = segment(rec)
        w = ws[5]
        np.testing.assert_array_equal(w.X, rec.emg[5:20])
        np.testing.assert_array_equal(np.asarray(ws.X)[5], w.X)
        assert ws.X.shape == (26, 15, 2)

    def test_no_window_spans_repetitions(self, small_recording):
        ws = prepare_windows(small_recording)
        rec = relabel_rest(small_recording)
        for s in ws.starts:
            assert np.unique(rec.repetition[s:s + ws.window_samples]).size == 1

    def test_deterministic(self, small_recording):
        a, b = prepare_windows(small_recording), prepare_windows(small_recording)
        np.testing.assert_array_equal(a.starts, b.starts)
        np.testing.assert_array_equal(a.y, b.y)


class TestSplits:
    def test_table_rows(self):
        db1, db2 = standard_splits(1), standard_splits(2)
        assert len(db1) == 10 and len(db2) == 6
        assert db1[0].test_reps == {2, 5, 7} and db1[0].train_reps == {1, 3, 4, 6, 8, 9, 10}
        assert db2[0].train_reps == {1, 3, 4, 6} and db2[0].test_reps == {2, 5}
        assert db2[4].train_reps == {2, 3, 4, 5} and db2[4].test_reps == {1, 6}

    @pytest.mark.parametrize("db, total, n_test", [(1, 10, 3), (2, 6, 2)])
    def test_partition(self, db, total, n_test):
        for s in standard_splits(db):
            assert len(s.test_reps) == n_test
            assert s.train_reps | s.test_reps == set(range(1, total + 1))

    def test_every_repetition_tested(self):
        tested = set().union(*(s.test_reps for s in standard_splits(1)))
        assert tested == set(range(1, 11))

    def test_invalid(self):
        with pytest.raises(ValueError):
            SplitSpec([1, 2], [2, 3])
        with pytest.raises(ValueError):
            SplitSpec([0, 1], [2])
        with pytest.raises(ValueError):
            standard_splits(3)

    def test_all_rep2_in_test(self):
        mv, rp = protocol_labels([(1, 2, 60)])
        train, test = split_windows(segment(make_recording(mv, rp)), standard_splits(1)[0])
        assert len(train) == 0 and len(test) == 46

    @pytest.mark.parametrize("db", [1, 2])
    def test_no_shared_samples(self, small_recording, db):
        ws = prepare_windows(small_recording)
        for split in standard_splits(db):
            train, test = split_windows(ws, split)
            tr = np.zeros(len(ws.signal), bool)
            te = np.zeros(len(ws.signal), bool)
            for a, b in train.sample_ranges():
                tr[a:b] = True
            for a, b in test.sample_ranges():
                te[a:b] = True
            assert not np.any(tr & te)
            assert set(np.unique(train.repetition)) <= split.train_reps
            assert set(np.unique(test.repetition)) <= split.test_reps

    def test_no_shared_samples_pairwise_oracle(self):
        blocks = []
        for r in range(1, 11):
            blocks += [(0, 0, 12), (1 + r % 3, r, 22)]
        mv, rp = protocol_labels(blocks + [(0, 0, 12)])
        ws = prepare_windows(make_recording(mv, rp))
        for split in standard_splits(1):
            train, test = split_windows(ws, split)
            assert not any_overlap([tuple(r) for r in train.sample_ranges()],
                                   [tuple(r) for r in test.sample_ranges()])


class TestNormalization:
    def test_standardises_training_windows(self, small_recording):
        ws = prepare_windows(small_recording)
        train, _ = split_windows(ws, standard_splits(1)[0])
        out = np.asarray(apply_signal_normalizer(fit_signal_normalizer(train), train).X)
        flat = out.reshape(-1, out.shape[-1])
        np.testing.assert_allclose(flat.mean(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(flat.std(axis=0), 1, atol=1e-9)

    def test_matches_stacked_windows(self, small_recording):
        ws = prepare_windows(small_recording).subset(np.arange(0, 400))
        norm = fit_signal_normalizer(ws)
        stacked = np.asarray(ws.X).reshape(-1, ws.n_channels)
        np.testing.assert_allclose(norm.mean, stacked.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(norm.std, stacked.std(axis=0), rtol=1e-12)

    def test_test_samples_do_not_leak(self, small_recording):
        ws = prepare_windows(small_recording)
        split = standard_splits(1)[3]
        train, test = split_windows(ws, split)
        norm = fit_signal_normalizer(train)
        cw = class_weights(train.y, 5)
        signal = ws.signal.copy()
        covered = np.zeros(len(signal), bool)
        for a, b in train.sample_ranges():
            covered[a:b] = True
        signal[~covered] = 1e6 * np.random.default_rng(1).standard_normal(signal[~covered].shape)
        train2, test2 = split_windows(ws.with_signal(signal), split)
        norm2 = fit_signal_normalizer(train2)
        assert norm.mean.tobytes() == norm2.mean.tobytes()
        assert norm.std.tobytes() == norm2.std.tobytes()
        assert cw.tobytes() == class_weights(train2.y, 5).tobytes()

    def test_zero_channel(self):
        mv, rp = protocol_labels([(1, 1, 40)])
        rec = make_recording(mv, rp)
        rec.emg[:, 1] = 0.0
        ws = segment(rec)
        norm = fit_signal_normalizer(ws)
        assert norm.degenerate == (1,)
        assert not np.asarray(apply_signal_normalizer(norm, ws).X)[..., 1].any()

    def test_empty(self, small_recording):
        ws = prepare_windows(small_recording)
        with pytest.raises(ValueError):
            fit_signal_normalizer(ws.subset(np.array([], dtype=int)))


class TestClassWeights:
    def test_balanced(self):
        np.testing.assert_array_equal(class_weights([0, 1, 2, 0, 1, 2], 3), [1.0, 1.0, 1.0])

    def test_analytic(self):
        labels = [0] * 8 + [1] * 2 + [2] * 4
        np.testing.assert_allclose(class_weights(labels, 3), [1.0, 3.0, 2.0])

    def test_absent_class(self):
        with pytest.raises(ValueError):
            class_weights([0, 0, 1], 3)


class TestCache:
    def test_roundtrip(self, tmp_path, small_recording):
        ws = prepare_windows(small_recording)
        save_window_cache(tmp_path / "s.win", ws)
        back = load_window_cache(tmp_path / "s.win")
        for name in ("starts", "y", "repetition", "signal"):
            np.testing.assert_array_equal(getattr(back, name), getattr(ws, name))
        assert (back.window_samples, back.subject_id, back.database_id) == (15, "1", 1)

    def test_bad_magic(self, tmp_path):
        (tmp_path / "x.win").write_bytes(b"garbage!" * 4)
        with pytest.raises(DataFormatError):
            load_window_cache(tmp_path / "x.win")

    def test_summary(self, small_recording):
        s = prepare_windows(small_recording).summary()
        assert s["windows"] == sum(s["classes"].values()) == sum(s["repetitions"].values())
        assert set(s["repetitions"]) == {str(r) for r in range(1, 11)}
