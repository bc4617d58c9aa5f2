import numpy as np
import pytest

from forlap.simulate import (
    BURN_IN,
    DEFAULT_LENGTHS,
    MODEL_IDS,
    ModelSpec,
    alpha_e,
    innovations,
    lsw_synthesize,
    make_rng,
    model_coefficients,
    simulate,
    spectrum_p3,
    spectrum_p4,
)
from forlap.wavelets import HAAR, build_discrete_wavelets


@pytest.mark.parametrize("model", MODEL_IDS)
def test_lengths_and_determinism(model):
    x = simulate(model, seed=7, replication=3)
    assert len(x) == DEFAULT_LENGTHS[model]
    np.testing.assert_array_equal(x, simulate(ModelSpec(model), 7, 3))
    assert not np.array_equal(x, simulate(model, 7, 4))
    assert np.all(np.isfinite(x))


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("Z")
    with pytest.raises(ValueError):
        ModelSpec("A", innovation="cauchy")
    assert ModelSpec("A", 256).length == 256


def test_rng_streams_independent():
    a = make_rng(1, 0).standard_normal(5)
    b = make_rng(1, 1).standard_normal(5)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, make_rng(1, 0).standard_normal(5))


def test_t4_unit_variance():
    z = innovations(make_rng(0), 400_000, "t4_unit_variance")
    assert z.var() == pytest.approx(1.0, abs=0.05)
    with pytest.raises(ValueError):
        innovations(make_rng(0), 3, "laplace")


def test_white_noise_is_the_innovations():
    rng = make_rng(5, 2)
    eps = rng.standard_normal(BURN_IN + 128)
    np.testing.assert_array_equal(simulate("A", 5, 2), eps[BURN_IN:])


def test_tvar_recursion_model_d():
    rng = make_rng(3, 0)
    eps = rng.standard_normal(BURN_IN + 128)
    x = simulate("D", 3, 0)
    t = np.arange(1, 129)
    a = 1.8 * t / 128 - 0.9
    # X_t = a(t/T) X_{t-1} + Z_t for every retained index past the first
    np.testing.assert_allclose(x[1:], a[1:] * x[:-1] + eps[BURN_IN + 1:], atol=1e-12)


def test_tvma_model_i():
    rng = make_rng(2, 0)
    eps = rng.standard_normal(BURN_IN + 128)
    x = simulate("I", 2, 0)
    b = 2 * np.arange(1, 129) / 128 - 1
    np.testing.assert_allclose(x, eps[BURN_IN:] + b * eps[BURN_IN - 1:-1], atol=1e-12)


def test_model_k_variance_profile():
    xs = np.array([simulate("K", 0, r) for r in range(400)])
    z = np.arange(1, 129) / 128
    v = xs.var(axis=0)
    expect = (9 * z + 1) ** 1.5
    assert np.mean(v[-20:]) / np.mean(expect[-20:]) == pytest.approx(1.0, abs=0.1)
    assert np.mean(v[:20]) / np.mean(expect[:20]) == pytest.approx(1.0, abs=0.15)


def test_coefficient_paths():
    c = model_coefficients("E", [0.0, 0.125, 0.5, 1.0])
    np.testing.assert_allclose(c["alpha"], [-0.9, -0.2, 0.8, -1.1])
    assert alpha_e(0.3) == pytest.approx(3.2 * 0.3 - 0.4)
    g = model_coefficients("G", [0.5])
    assert g["alpha12"][0] == pytest.approx(0.15)
    np.testing.assert_allclose(model_coefficients("H", [0.5, 0.95])["beta"], [1.0, -1.0])
    with pytest.raises(ValueError):
        model_coefficients("A", [0.5])


def test_spectra_shapes():
    p3, p4 = spectrum_p3(), spectrum_p4()
    z = np.linspace(0, 1, 9)
    assert p3(1, 0.5) == pytest.approx(0.25)
    assert p3(2, 0.0) == pytest.approx(0.25)
    np.testing.assert_array_equal(p3(3, z), 0)
    assert p4(1, 0.25) == pytest.approx(1.0)
    assert p4(3, 0.5) == pytest.approx(1.0)
    assert p4(4, 0.0) == pytest.approx(1.0)
    np.testing.assert_array_equal(p4(2, z), 0)


class TestLswSynthesis:
    def test_variance_matches_spectrum(self):
        # Var X_t = sum_j sum_k S_j(k/T) psi_{j,k}(t)^2
        sp = spectrum_p3()
        T = 64
        xs = np.array([lsw_synthesize(sp, T, rng=make_rng(9, r)) for r in range(3000)])
        ws = build_discrete_wavelets(HAAR, 2)
        z = np.arange(T) / T
        var = np.zeros(T)
        for j in (1, 2):
            psi = ws[j]
            S = sp(j, z)
            for k in range(T):
                for n, w in enumerate(psi):
                    var[(k + n) % T] += S[k] * w * w
        np.testing.assert_allclose(xs.var(axis=0), var, rtol=0.12, atol=0.01)

    def test_needs_dyadic_length(self):
        with pytest.raises(ValueError):
            lsw_synthesize(spectrum_p3(), 100)

    def test_model_m_is_truncated(self):
        x = simulate("M", 1, 0)
        assert len(x) == 350
        full = lsw_synthesize(spectrum_p4(), 512, rng=make_rng(1, 0))
        np.testing.assert_array_equal(x, full[:350])
