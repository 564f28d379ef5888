"""End-to-end acceptance checks; each test prints one PASS/FAIL line in the summary."""

import json
import math
import os
import time
import warnings

import numpy as np
import pytest

from oracles import (
    any_overlap,
    forman_oracle,
    friedman_oracle,
    holm_oracle,
    macro_oracle,
    mdwt_oracle,
    micro_oracle,
)
from test_models import TABLE_LAYER_PARAMS, TABLE_SHAPES, TABLE_TOTALS
from tts_emg import cli, pipeline
from tts_emg.data import (
    class_weights,
    fit_signal_normalizer,
    prepare_windows,
    relabel_rest,
    split_windows,
    standard_splits,
)
from tts_emg.evaluation import (
    ZeroSupportWarning,
    forman_macro,
    forman_micro,
    friedman_test,
    holm_procedure,
    macro_accuracy,
    micro_accuracy,
)
from tts_emg.evaluation.stats import stats as scipy_stats
from tts_emg.features import SYM4, mav, mdwt, wl
from tts_emg.models import (
    SPEC_BUILDERS,
    TrainConfig,
    build_network,
    build_tts_spec,
    count_parameters,
    load_checkpoint,
    train,
)
from tts_emg.nn import finite_difference_check
from tts_emg.nn.functional import cross_entropy_loss
from tts_emg.synthetic import synthetic_recording


@pytest.mark.criterion(1, "architecture parameter counts and layer output sizes")
def test_architecture_fidelity():
    t0 = time.perf_counter()
    for key in sorted(SPEC_BUILDERS):
        net = build_network(SPEC_BUILDERS[key](), seed=0)
        assert count_parameters(net) == TABLE_TOTALS[key], key
        summary = net.layer_summary()
        assert [shape for _, shape, _ in summary] == TABLE_SHAPES[key], key
        assert [n for _, _, n in summary if n] == TABLE_LAYER_PARAMS[key], key
    assert time.perf_counter() - t0 < 1.0


@pytest.mark.slow
@pytest.mark.criterion(2, "finite-difference gradients of a 1/8-width network")
def test_gradient_correctness():
    t0 = time.perf_counter()
    for seed in range(5):
        rng = np.random.default_rng(seed)
        net = build_network(build_tts_spec(15, 10, 53, width_divisor=8), seed=seed)
        x = rng.standard_normal((15, 10))
        err = finite_difference_check(net, x, int(rng.integers(53)), precision="high")
        assert err < 1e-5, (seed, err)
    assert time.perf_counter() - t0 < 60.0


@pytest.mark.criterion(3, "mDWT summation oracle and closed-form MAV/WL")
def test_feature_oracles():
    rng = np.random.default_rng(7)
    lo, hi = np.asarray(SYM4.lowpass), np.asarray(SYM4.highpass)
    for _ in range(100):
        n = int(rng.integers(8, 80))
        x = rng.standard_normal(n) * rng.uniform(0.1, 10)
        np.testing.assert_allclose(mdwt(x), mdwt_oracle(x, lo, hi, 3), rtol=0, atol=1e-10)
        assert mav(x) == np.abs(x).sum() / n
        assert wl(x) == np.abs(np.diff(x)).sum()


@pytest.mark.criterion(4, "metric and statistics oracles")
def test_metric_and_statistics_oracles():
    rng = np.random.default_rng(11)
    for _ in range(1000):
        M = int(rng.integers(2, 9))
        folds = [rng.integers(0, 15, size=(M, M)) for _ in range(int(rng.integers(1, 6)))]
        folds[0][0, 0] += 1
        micro, macro = forman_oracle(folds)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ZeroSupportWarning)
            assert abs(forman_micro(folds) - float(micro)) < 1e-12
            assert abs(forman_macro(folds) - float(macro)) < 1e-12
            assert abs(micro_accuracy(folds[0]) - float(micro_oracle(folds[0]))) < 1e-12
            assert abs(macro_accuracy(folds[0]) - float(macro_oracle(folds[0]))) < 1e-12
    for _ in range(100):
        perf = np.round(rng.random((int(rng.integers(2, 20)), int(rng.integers(2, 8)))), 2)
        res = friedman_test(perf)
        chi2, f, ranks = friedman_oracle(perf)
        assert math.isclose(res.chi2, chi2, rel_tol=1e-12, abs_tol=1e-12)
        np.testing.assert_allclose(res.avg_ranks, ranks, atol=1e-12)
        assert (res.iman_davenport is None) == (f is None)
        if f is not None:
            assert math.isclose(res.iman_davenport, f, rel_tol=1e-10)
    k, N = 5, 27
    se = math.sqrt(k * (k + 1) / (6 * N))
    pvals = [0.001, 0.01, 0.04, 0.5]
    ranks = [1.0] + [1.0 + scipy_stats.norm.isf(p / 2) * se for p in pvals]
    decisions = holm_procedure(ranks, N, k, control_index=0, alpha=0.02)
    assert [d.reject for d in decisions] == holm_oracle(pvals, 0.02) == [True, False, False, False]


@pytest.mark.criterion(5, "no leakage across repetitions, splits or normalisers")
def test_pipeline_leakage():
    for seed in (0, 1):
        rec = synthetic_recording(subject=seed + 1, movement_s=0.6, rest_s=0.5, seed=seed)
        ws = prepare_windows(rec)
        relabelled = relabel_rest(rec).repetition
        for (a, b), r in zip(ws.sample_ranges(), ws.repetition):
            assert r != 0 and np.all(relabelled[a:b] == r)
        for db in (1, 2):
            for split in standard_splits(db):
                train_ws, test_ws = split_windows(ws, split)
                assert not any_overlap([tuple(r) for r in train_ws.sample_ranges()],
                                       [tuple(r) for r in test_ws.sample_ranges()])
                norm = fit_signal_normalizer(train_ws)
                cw = class_weights(train_ws.y, 5)
                signal = ws.signal.copy()
                covered = np.zeros(len(signal), bool)
                for a, b in train_ws.sample_ranges():
                    covered[a:b] = True
                signal[~covered] = 1e3 * np.random.default_rng(db).standard_normal(signal[~covered].shape)
                train2, _ = split_windows(ws.with_signal(signal), split)
                norm2 = fit_signal_normalizer(train2)
                assert norm.mean.tobytes() == norm2.mean.tobytes()
                assert norm.std.tobytes() == norm2.std.tobytes()
                assert cw.tobytes() == class_weights(train2.y, 5).tobytes()


@pytest.mark.slow
@pytest.mark.criterion(6, "synthetic 5-class smoke benchmark reaches 90% macro accuracy")
def test_smoke_benchmark(tmp_path):
    t0 = time.perf_counter()
    data = tmp_path / "data"
    assert cli.main(["synth", "--out", str(data)]) == 0
    files = sorted(str(p) for p in data.glob("*.emg"))
    args = ["--subjects", *files, "--out", str(tmp_path / "run"), "--classes", "5"]
    assert cli.main(["prepare", *args]) == 0
    assert cli.main(["train", *args, "--width-divisor", "8", "--epochs", "10"]) == 0
    assert cli.main(["evaluate", *args, "--width-divisor", "8", "--epochs", "10"]) == 0
    rep = json.load(open(tmp_path / "run" / "report.json"))
    macro = rep["classifiers"]["tts"]["macro_mean"]
    elapsed = time.perf_counter() - t0
    print(f"smoke benchmark: macro {100 * macro:.1f}% in {elapsed:.0f}s")
    assert len(rep["classifiers"]["tts"]["per_subject"]) == 3
    assert macro >= 0.90
    assert elapsed < 300


@pytest.mark.slow
@pytest.mark.criterion(7, "full db1 protocol runs end to end and emits the benchmark report")
def test_db1_protocol(tmp_path):
    # Desk-scale stand-in for converted recordings: db1 geometry, reduced subjects and width.
    data = tmp_path / "data"
    assert cli.main(["synth", "--out", str(data), "--n-subjects", "2", "--classes", "53", "--channels", "10",
                     "--movement-seconds", "0.3", "--rest-seconds", "0.3"]) == 0
    files = sorted(str(p) for p in data.glob("*.emg"))
    out = tmp_path / "run"
    args = ["--subjects", *files, "--out", str(out), "--width-divisor", "16", "--epochs", "1"]
    assert cli.main(["prepare", *args]) == 0
    assert cli.main(["train", *args]) == 0
    assert cli.main(["evaluate", *args, "--exclude-rep1"]) == 0
    manifest = json.load(open(out / "manifest.json"))
    cells = manifest["classifiers"]["tts"]["cells"]
    assert len(cells) == 2 * 10 and all(c["status"] == "done" for c in cells.values())
    rep = json.load(open(out / "report.json"))
    assert set(rep["order"]) == {"tts", "tts*"}
    for row in rep["classifiers"].values():
        assert all(math.isfinite(row[k]) for k in ("macro_mean", "macro_std", "micro_mean", "micro_std"))
        assert set(row["per_subject"]) == {"1", "2"}
    text = open(out / "report.txt").read()
    assert "Per class acc. (%)" in text and "Per sample acc. (%)" in text
    net, _ = load_checkpoint(cells["1/1"]["checkpoint"])
    assert net.input_shape == (15, 10, 1) and net.n_classes == 53
    full = pipeline.architecture_spec(pipeline.RunConfig(), 15, 10)
    assert count_parameters(build_network(full)) == 754_933


@pytest.mark.criterion(8, "unit class weights and uniform-probability loss")
def test_class_weight_and_loss():
    rng = np.random.default_rng(3)
    n, M = 90, 3
    y = np.arange(n) % M
    X = rng.standard_normal((n, 15, 4))
    X[np.arange(n), :, y] += 1.0
    gamma = class_weights(y, M)
    assert np.all(gamma == 1.0)
    params = []
    for weights in (None, list(gamma)):
        net = build_network(build_tts_spec(15, 4, M, width_divisor=8), seed=2)
        train(net, (X, y), TrainConfig(epochs=2, batch_size=32, class_weights=weights, seed=5))
        params.append(b"".join(p.value.tobytes() for p in net.params))
    assert params[0] == params[1]
    for m in (2, 5, 41, 53):
        assert abs(cross_entropy_loss(np.full(m, 1.0 / m), 0) - math.log(m)) < 1e-12
