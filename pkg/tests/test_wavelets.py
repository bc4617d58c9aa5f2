import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from forlap.errors import ConfigurationError, IllConditionedError
from forlap.wavelets import (
    HAAR,
    AcWaveletTable,
    WaveletFamily,
    a_matrix,
    autocorrelation_wavelet,
    build_discrete_wavelets,
    default_levels,
    ndwt,
    padded_length,
    reflect_pad,
)

from oracles import (
    a_matrix_brute,
    ac_brute,
    haar_a_closed_form,
    haar_ac_closed_form,
    haar_psi,
    ndwt_brute,
)


class TestFamilies:
    def test_parse_names(self):
        assert WaveletFamily.parse("haar") == HAAR
        assert WaveletFamily.parse("db4").vanishing_moments == 4
        assert WaveletFamily.parse("DaubExPhase3").name == "db3"

    @pytest.mark.parametrize("bad", ["coif2", "db0", "db11", "dbx", ""])
    def test_parse_rejects(self, bad):
        with pytest.raises(ConfigurationError):
            WaveletFamily.parse(bad)

    def test_unsupported_count(self):
        with pytest.raises(ConfigurationError):
            WaveletFamily(11)

    @pytest.mark.parametrize("n", range(1, 11))
    def test_filters_orthonormal(self, n):
        h = WaveletFamily(n).lowpass
        assert len(h) == 2 * n
        assert h.sum() == pytest.approx(np.sqrt(2), abs=1e-12)
        for shift in range(0, len(h), 2):
            dot = h[: len(h) - shift] @ h[shift:]
            assert dot == pytest.approx(1.0 if shift == 0 else 0.0, abs=1e-12)

    @pytest.mark.parametrize("n", [2, 4])
    def test_highpass_kills_polynomials(self, n):
        g = WaveletFamily(n).highpass
        k = np.arange(len(g))
        for power in range(n):
            assert g @ k ** power == pytest.approx(0.0, abs=1e-9)


class TestDiscreteWavelets:
    @pytest.mark.parametrize("j", range(1, 7))
    def test_haar_matches_closed_form(self, j):
        np.testing.assert_allclose(build_discrete_wavelets(HAAR, 6)[j], haar_psi(j), atol=1e-12)

    def test_haar_scale_two(self):
        np.testing.assert_allclose(build_discrete_wavelets(HAAR, 2)[2], [0.5, 0.5, -0.5, -0.5])

    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_unit_norm_and_support(self, n):
        fam = WaveletFamily(n)
        ws = build_discrete_wavelets(fam, 5)
        for j in range(1, 6):
            assert len(ws[j]) == (2 ** j - 1) * (2 * n - 1) + 1
            assert np.linalg.norm(ws[j]) == pytest.approx(1.0, abs=1e-12)


class TestAutocorrelationWavelets:
    def test_haar_psi2_values(self):
        table = autocorrelation_wavelet(HAAR, 2)
        np.testing.assert_allclose(table(2, np.arange(-3, 4)),
                                   [-0.25, -0.5, 0.25, 1.0, 0.25, -0.5, -0.25], atol=1e-15)

    @pytest.mark.parametrize("j", range(1, 9))
    def test_haar_closed_form(self, j):
        table = autocorrelation_wavelet(HAAR, 8)
        for tau in range(-2 ** j - 2, 2 ** j + 3):
            assert table(j, tau) == pytest.approx(haar_ac_closed_form(j, tau), abs=1e-9)

    @pytest.mark.parametrize("n", [2, 3])
    def test_daubechies_brute(self, n):
        fam = WaveletFamily(n)
        ws = build_discrete_wavelets(fam, 4)
        table = autocorrelation_wavelet(fam, 4)
        for j in range(1, 5):
            for tau in range(-table.support(j) - 1, table.support(j) + 2):
                assert table(j, tau) == pytest.approx(ac_brute(ws[j], tau), abs=1e-9)

    def test_unit_at_zero_and_symmetric(self):
        table = autocorrelation_wavelet(WaveletFamily(4), 5)
        for j in range(1, 6):
            assert table(j, 0) == 1.0
            lags = np.arange(1, table.support(j) + 1)
            np.testing.assert_array_equal(table(j, lags), table(j, -lags))

    def test_matrix_layout(self):
        table = autocorrelation_wavelet(HAAR, 3)
        M = table.matrix([0, 1, 2])
        assert M.shape == (3, 3)
        assert M[1, 2] == pytest.approx(-0.5)


class TestAMatrix:
    @pytest.mark.parametrize("J", range(1, 7))
    def test_haar_entries_brute_and_closed_form(self, J):
        A = a_matrix(autocorrelation_wavelet(HAAR, J))
        brute = a_matrix_brute([haar_psi(j) for j in range(1, J + 1)])
        np.testing.assert_allclose(A.entries, brute, atol=1e-9)
        np.testing.assert_allclose(A.entries, haar_a_closed_form(J), atol=1e-9)

    def test_haar_a11(self):
        assert a_matrix(autocorrelation_wavelet(HAAR, 1)).entries[0, 0] == pytest.approx(1.5)

    def test_daubechies_brute(self):
        fam = WaveletFamily(2)
        A = a_matrix(autocorrelation_wavelet(fam, 4))
        brute = a_matrix_brute(list(build_discrete_wavelets(fam, 4).vectors))
        np.testing.assert_allclose(A.entries, brute, atol=1e-9)

    def test_inverse(self):
        A = a_matrix(autocorrelation_wavelet(HAAR, 8))
        np.testing.assert_allclose(A.entries @ A.inverse, np.eye(8), atol=1e-9)
        assert 1 < A.condition_number < 1e4

    def test_ill_conditioned_raises(self):
        vals = np.array([1.0, 1.0, 1.0])
        table = AcWaveletTable(HAAR, 2, (vals, vals * (1 + 1e-13)))
        with pytest.raises(IllConditionedError) as info:
            a_matrix(table)
        assert info.value.levels == 2 and info.value.stage == "a_matrix"


class TestNdwt:
    @pytest.mark.parametrize("T", [8, 16, 37, 64])
    def test_haar_mirror_brute(self, T):
        x = np.random.default_rng(T).standard_normal(T)
        J = default_levels(T)
        d = ndwt(x, HAAR, J)
        brute = ndwt_brute(x, [haar_psi(j) for j in range(1, J + 1)])
        np.testing.assert_allclose(d, brute, atol=1e-9)

    @pytest.mark.parametrize("T", [16, 64])
    def test_haar_periodic_brute(self, T):
        x = np.random.default_rng(1).standard_normal(T)
        J = default_levels(T)
        d = ndwt(x, HAAR, J, boundary="periodic")
        brute = ndwt_brute(x, [haar_psi(j) for j in range(1, J + 1)], "periodic")
        np.testing.assert_allclose(d, brute, atol=1e-9)

    def test_db2_brute(self):
        x = np.random.default_rng(3).standard_normal(64)
        fam = WaveletFamily(2)
        d = ndwt(x, fam, 3)
        brute = ndwt_brute(x, list(build_discrete_wavelets(fam, 3).vectors))
        np.testing.assert_allclose(d, brute, atol=1e-9)

    def test_constant_series_has_zero_details(self):
        np.testing.assert_allclose(ndwt(np.full(50, 3.0)), 0.0, atol=1e-12)

    def test_levels_too_large(self):
        with pytest.raises(ValueError):
            ndwt(np.zeros(16), HAAR, 5)

    def test_periodic_needs_dyadic(self):
        with pytest.raises(ValueError):
            ndwt(np.zeros(20), boundary="periodic")

    def test_unknown_boundary(self):
        with pytest.raises(ValueError):
            ndwt(np.zeros(16), boundary="zero")

    def test_reflect_pad(self):
        np.testing.assert_array_equal(reflect_pad(np.array([1.0, 2, 3]), 7), [1, 2, 3, 2, 1, 2, 3])
        assert padded_length(100) == 256

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=4, max_size=40), st.floats(-5, 5))
    def test_linearity(self, values, c):
        x = np.array(values)
        y = np.roll(x, 1)
        J = default_levels(len(x))
        np.testing.assert_allclose(ndwt(x + c * y, J=J), ndwt(x, J=J) + c * ndwt(y, J=J),
                                   atol=1e-7 * (1 + np.abs(x).max()))
