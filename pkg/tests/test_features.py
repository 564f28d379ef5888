import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from oracles import mdwt_oracle
from tts_emg.features import (
    SYM4,
    WaveletSpec,
    apply_normalizer,
    dwt_level,
    extract_feature_matrix,
    extract_features,
    feature_names,
    fit_normalizer,
    mav,
    mdwt,
    padded_length,
    quadrature_mirror,
    read_feature_matrix,
    wl,
    write_feature_matrix,
)

LO = np.asarray(SYM4.lowpass)
HI = np.asarray(SYM4.highpass)
finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestSym4Taps:
    def test_sum_is_sqrt2(self):
        assert LO.sum() == pytest.approx(math.sqrt(2), abs=1e-14)

    def test_orthonormal_shifts(self):
        for k in range(0, 4):
            dot = float(np.dot(LO[2 * k:], LO[: LO.size - 2 * k]))
            assert dot == pytest.approx(1.0 if k == 0 else 0.0, abs=1e-12)

    def test_quadrature_mirror(self):
        L = LO.size
        for k in range(L):
            assert HI[k] == (-1) ** (k + 1) * LO[L - 1 - k]
        # the reference taps are accurate to about 1e-12
        assert HI.sum() == pytest.approx(0.0, abs=2e-12)
        assert float(np.dot(LO, HI)) == pytest.approx(0.0, abs=1e-14)

    def test_highpass_vanishing_moments(self):
        n = np.arange(LO.size)
        for p in range(4):
            assert float(np.dot(HI, n**p)) == pytest.approx(0.0, abs=1e-9)

    def test_spec_validation(self):
        with pytest.raises(ValueError):
            WaveletSpec(lowpass=(1.0, 2.0, 3.0))
        with pytest.raises(ValueError):
            WaveletSpec(levels=0)


class TestDwtLevel:
    def test_zero(self):
        a, d = dwt_level(np.zeros(16))
        assert not a.any() and not d.any()

    def test_constant_detail_vanishes(self):
        a, d = dwt_level(np.full(32, 3.5))
        np.testing.assert_allclose(d, 0.0, atol=1e-11)
        np.testing.assert_allclose(a, 3.5 * math.sqrt(2), rtol=1e-11)

    def test_impulse_places_taps(self):
        x = np.zeros(16)
        x[0] = 1.0
        _, d = dwt_level(x)
        c = LO.size // 2
        expected = np.zeros(8)
        for k in range(8):
            j = (2 * k + c) % 16
            if j < HI.size:
                expected[k] = HI[j]
        np.testing.assert_array_equal(d, expected)

    def test_energy_preserved(self, rng):
        x = rng.standard_normal(64)
        a, d = dwt_level(x)
        assert np.sum(a**2) + np.sum(d**2) == pytest.approx(np.sum(x**2), rel=1e-11)

    def test_short_series_wraps(self):
        # a 4-sample stage with an 8-tap filter still preserves energy
        x = np.array([1.0, -2.0, 0.5, 3.0])
        a, d = dwt_level(x)
        assert np.sum(a**2) + np.sum(d**2) == pytest.approx(np.sum(x**2), rel=1e-11)

    @pytest.mark.parametrize("n", [0, 1, 7])
    def test_rejects_odd_or_tiny(self, n):
        with pytest.raises(ValueError):
            dwt_level(np.zeros(n))


class TestMdwt:
    def test_zero(self):
        np.testing.assert_array_equal(mdwt(np.zeros(15)), [0.0, 0.0, 0.0])

    def test_constant_dyadic(self):
        np.testing.assert_allclose(mdwt(np.full(64, -2.0)), 0.0, atol=1e-9)

    @pytest.mark.parametrize("n, size", [(15, 16), (16, 16), (5, 8), (300, 512), (2, 8)])
    def test_padded_length(self, n, size):
        assert padded_length(n, 3) == size

    def test_too_short(self):
        with pytest.raises(ValueError):
            mdwt(np.ones(7), levels=3)

    @pytest.mark.parametrize("n", [8, 15, 16, 40, 300])
    def test_matches_literal_sum(self, rng, n):
        x = rng.standard_normal(n)
        np.testing.assert_allclose(mdwt(x), mdwt_oracle(x, LO, HI, 3), rtol=0, atol=1e-10)

    @settings(max_examples=30, deadline=None)
    @given(x=arrays(np.float64, st.integers(8, 40), elements=finite), levels=st.integers(1, 3))
    def test_matches_literal_sum_property(self, x, levels):
        np.testing.assert_allclose(mdwt(x, levels=levels), mdwt_oracle(x, LO, HI, levels),
                                   rtol=1e-10, atol=1e-10)

    def test_scaling(self, rng):
        x = rng.standard_normal(16)
        np.testing.assert_allclose(mdwt(-3 * x), 3 * mdwt(x), rtol=1e-13)


class TestTimeDomain:
    def test_mav(self):
        assert mav(np.array([1.0, -1.0, 1.0, -1.0])) == 1.0
        assert mav(np.array([-2.0, 4.0])) == 3.0

    def test_wl(self):
        assert wl(np.array([0.0, 1.0, 0.0, 1.0])) == 3.0
        assert wl(np.array([5.0, 5.0, 5.0])) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, st.integers(2, 30), elements=finite))
    def test_nonnegative(self, x):
        assert mav(x) >= 0
        assert wl(x) >= 0
        assert (wl(x) == 0) == bool(np.all(x == x[0]))

    def test_wl_single_sample(self):
        with pytest.raises(ValueError):
            wl(np.array([1.0]))


class TestExtractFeatures:
    def test_length_and_layout(self, rng):
        w = rng.standard_normal((15, 10))
        f = extract_features(w)
        assert f.shape == (50,)
        for c in range(10):
            block = f[5 * c: 5 * c + 5]
            np.testing.assert_allclose(block[:3], mdwt(w[:, c]), rtol=1e-13)
            assert block[3] == pytest.approx(mav(w[:, c]))
            assert block[4] == pytest.approx(wl(w[:, c]))

    def test_zero_window(self):
        assert not extract_features(np.zeros((15, 10))).any()

    def test_channel_permutation(self, rng):
        w = rng.standard_normal((15, 4))
        perm = [2, 0, 3, 1]
        f = extract_features(w).reshape(4, 5)
        g = extract_features(w[:, perm]).reshape(4, 5)
        np.testing.assert_allclose(g, f[perm], rtol=1e-14, atol=0)

    def test_matrix_equals_rows(self, rng):
        X = rng.standard_normal((7, 15, 3))
        M = extract_feature_matrix(X, batch=3)
        for i in range(7):
            np.testing.assert_allclose(M[i], extract_features(X[i]), rtol=1e-13, atol=1e-15)

    def test_bad_shape(self):
        with pytest.raises(ValueError):
            extract_features(np.zeros(15))

    def test_names(self):
        names = feature_names(2)
        assert names == ["ch1_mdwt1", "ch1_mdwt2", "ch1_mdwt3", "ch1_mav", "ch1_wl",
                         "ch2_mdwt1", "ch2_mdwt2", "ch2_mdwt3", "ch2_mav", "ch2_wl"]


class TestNormalizer:
    def test_fit_apply_standardises(self, rng):
        F = rng.standard_normal((200, 6)) * [1, 2, 3, 4, 5, 6] + 10
        out = apply_normalizer(fit_normalizer(F), F)
        np.testing.assert_allclose(out.mean(axis=0), 0, atol=1e-9)
        np.testing.assert_allclose(out.std(axis=0), 1, atol=1e-9)

    def test_constant_column(self, rng):
        F = rng.standard_normal((10, 3))
        F[:, 1] = 4.0
        norm = fit_normalizer(F)
        assert norm.degenerate == (1,)
        assert not apply_normalizer(norm, F)[:, 1].any()

    def test_not_idempotent(self, rng):
        F = rng.standard_normal((20, 2)) * 3 + 1
        once = apply_normalizer(fit_normalizer(F), F)
        twice = apply_normalizer(fit_normalizer(F), once)
        assert not np.allclose(once, twice)

    @pytest.mark.parametrize("rows", [0, 1])
    def test_too_few_rows(self, rows):
        with pytest.raises(ValueError):
            fit_normalizer(np.zeros((rows, 3)))

    def test_test_data_does_not_move_fit(self, rng):
        train = rng.standard_normal((30, 4))
        test = rng.standard_normal((10, 4))
        norm = fit_normalizer(train)
        apply_normalizer(norm, test * 1e6)
        again = fit_normalizer(train)
        assert norm.mean.tobytes() == again.mean.tobytes()
        assert norm.std.tobytes() == again.std.tobytes()


class TestExport:
    def test_roundtrip(self, tmp_path, rng):
        F = rng.standard_normal((5, 10))
        path = tmp_path / "f.csv"
        write_feature_matrix(path, F, n_channels=2, labels=[0, 1, 2, 1, 0], repetitions=[1, 1, 2, 2, 3])
        header, data, extra = read_feature_matrix(path)
        assert header[:2] == ["ch1_mdwt1", "ch1_mdwt2"] and header[-2:] == ["movement", "repetition"]
        np.testing.assert_array_equal(data, F)
        assert extra["movement"].tolist() == [0, 1, 2, 1, 0]
        assert extra["repetition"].tolist() == [1, 1, 2, 2, 3]
