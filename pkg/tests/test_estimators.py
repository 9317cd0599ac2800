import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from evcopula.core import ParameterError, SymmetricLogistic
from evcopula.estimators import (
    EULER_GAMMA,
    METHODS,
    EmpiricalPickands,
    bdv_eta,
    bdv_g,
    empirical_pickands,
    estimate_bdv,
    estimate_bdv_mm,
    estimate_cfg,
    estimate_pickands,
)
from evcopula.pipeline import (
    BlockMaxima,
    Uniformized,
    reflect_transform,
    uniformize,
    use_rank_marginals,
    z_statistics,
)
from evcopula.sampling import sample_symmetric_logistic


def sl_uniformized(alpha, n, seed, d=2):
    """Exact logistic samples mapped through their true Frechet margins."""
    x = sample_symmetric_logistic(d, alpha, n, np.random.default_rng(seed))
    return Uniformized(u=np.exp(-1.0 / x))


# ---------------------------------------------------------------------------
# Kernel closed forms against quadrature
# ---------------------------------------------------------------------------

# The rank weights come from integrating h(y) = 1/log(y) pieces: with
# h*(y) = h(y) log(y)^2 = log(y) and B_h = int_0^1 h*(y) dy = -1, the two
# primitives reduce to g(x) = x and eta(x) = x - x log x.  The quadrature
# below re-derives both without using the closed forms.


def test_normalizer_integral_is_minus_one():
    bh, err = quad(lambda y: np.log(y), 0.0, 1.0)
    assert err < 1e-10
    assert bh == pytest.approx(-1.0, abs=1e-12)


def test_eta_matches_quadrature_at_100_points():
    xs = np.linspace(0.01, 1.0, 100)
    for x in xs:
        val = quad(lambda y: np.log(y), 0.0, x)[0] / (-1.0)
        assert abs(bdv_eta(x) - val) <= 1e-6 * abs(val)


def test_g_matches_quadrature_at_100_points():
    bh = quad(lambda y: np.log(y), 0.0, 1.0)[0]
    xs = np.linspace(0.01, 1.0, 100)
    for x in xs:
        # h*(y)/log(y) is the constant 1, so g(x) = -(1/B_h) * x = x
        val = -quad(lambda y: 1.0, 0.0, x)[0] / bh
        assert abs(bdv_g(x) - val) <= 1e-6 * abs(val)


def test_eta_endpoints_and_arrays():
    assert bdv_eta(0.0) == 0.0
    assert bdv_eta(1.0) == 1.0
    np.testing.assert_allclose(
        bdv_eta(np.array([0.0, 0.5, 1.0])), [0.0, 0.8465735902799727, 1.0]
    )
    np.testing.assert_allclose(bdv_g(np.array([0.2, 0.7])), [0.2, 0.7])


# ---------------------------------------------------------------------------
# Point estimators
# ---------------------------------------------------------------------------


def test_pickands_estimator_small_case():
    assert estimate_pickands([2.0, 0.5]) == pytest.approx(0.8, abs=1e-15)


def test_cfg_estimator_single_sample():
    assert estimate_cfg([1.0]) == pytest.approx(np.exp(-EULER_GAMMA), abs=1e-15)
    assert estimate_cfg([1.0]) == pytest.approx(0.5614594835668851, abs=1e-12)


def test_bdv_estimator_two_sample_value():
    # gamma = (1/e, 1/e); only i=2 contributes log(2) * 1/e
    assert estimate_bdv([1.0, 1.0]) == pytest.approx(0.25499459743395353, abs=1e-12)


def test_bdv_single_sample_is_zero():
    assert estimate_bdv([0.7]) == 0.0


def test_bdv_mm_single_sample_hand_value():
    # B=1, z=1, w_max=1/2: eta(1/e) + (1 - eta(1/e))/2 = 1/2 + 1/e
    got = estimate_bdv_mm([1.0], 0.5)
    assert got == pytest.approx(0.8678794, abs=1e-7)
    assert got == pytest.approx(0.5 + 0.5 * (2.0 / np.e), abs=1e-12)


def test_estimators_reject_bad_z():
    for bad in ([], [0.0], [-1.0], [np.nan], [[1.0, 2.0]]):
        for est in (estimate_pickands, estimate_cfg, estimate_bdv):
            with pytest.raises(ParameterError):
                est(bad)
    with pytest.raises(ParameterError):
        estimate_bdv_mm([1.0], 0.0)
    with pytest.raises(ParameterError):
        estimate_bdv_mm([1.0], 1.2)


@pytest.mark.parametrize("rate", [0.55, 0.8, 1.0])
def test_moment_estimators_recover_exponential_rate(rate):
    z = np.random.default_rng(30).exponential(1.0 / rate, size=50_000)
    assert estimate_pickands(z) == pytest.approx(rate, abs=0.02)
    assert estimate_cfg(z) == pytest.approx(rate, abs=0.02)


@settings(max_examples=40)
@given(
    seed=st.integers(0, 2**31),
    n=st.integers(1, 40),
    w_max=st.floats(0.5, 1.0),
)
def test_bdv_mm_lands_in_admissible_band(seed, n, w_max):
    z = np.random.default_rng(seed).exponential(size=n) + 1e-9
    got = estimate_bdv_mm(z, w_max)
    assert w_max - 1e-9 <= got <= 1.0 + 1e-9


def test_bdv_mm_matches_bdv_inside_the_band():
    # with plenty of data from a genuine EV copula the empirical diagonal
    # respects the envelope, so the squeeze rarely binds and the two
    # estimators nearly agree
    alpha, w = 0.5, np.array([0.5, 0.5])
    data = sl_uniformized(alpha, 20_000, seed=31)
    z = z_statistics(data.u, w)
    assert estimate_bdv_mm(z, 0.5) == pytest.approx(estimate_bdv(z), abs=5e-3)


# ---------------------------------------------------------------------------
# Estimator consistency on exact logistic samples
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("method", METHODS)
def test_estimators_consistent_at_center(method):
    data = sl_uniformized(0.5, 20_000, seed=32)
    est = empirical_pickands(data, method=method)
    # A(1/2, 1/2) = 2^{alpha - 1} = 0.70711
    assert est.at([0.5, 0.5]) == pytest.approx(0.7071067811865476, abs=0.02)


def test_estimators_consistent_in_three_dimensions():
    data = sl_uniformized(0.4, 20_000, seed=33, d=3)
    model = SymmetricLogistic(alpha=0.4, d=3)
    w = np.array([0.2, 0.3, 0.5])
    for method in ("pickands", "cfg-corrected", "bdv-mm"):
        est = empirical_pickands(data, method=method)
        assert est.at(w) == pytest.approx(model.at(w), abs=0.02)


def test_cfg_corrected_is_exact_at_vertices():
    data = sl_uniformized(0.5, 500, seed=34)
    est = empirical_pickands(data, method="cfg-corrected")
    assert est.raw_at([1.0, 0.0]) == pytest.approx(1.0, abs=1e-12)
    assert est.raw_at([0.0, 1.0]) == pytest.approx(1.0, abs=1e-12)


def test_cfg_corrected_reduces_vertex_bias():
    data = sl_uniformized(0.5, 2_000, seed=35)
    raw = empirical_pickands(data, method="cfg")
    corrected = empirical_pickands(data, method="cfg-corrected")
    vertex_bias_raw = abs(raw.raw_at([1.0, 0.0]) - 1.0)
    vertex_bias_corr = abs(corrected.raw_at([1.0, 0.0]) - 1.0)
    assert vertex_bias_corr <= vertex_bias_raw


# ---------------------------------------------------------------------------
# Model wrapper behaviour
# ---------------------------------------------------------------------------


def test_empirical_pickands_rejects_unknown_method():
    data = sl_uniformized(0.5, 100, seed=36)
    with pytest.raises(ParameterError):
        EmpiricalPickands(data=data, method="kaplan")


def test_clamping_applies_to_all_but_bdv_mm():
    data = sl_uniformized(0.5, 50, seed=37)
    pts = np.array([[0.5, 0.5], [0.9, 0.1]])
    for method in METHODS:
        est = empirical_pickands(data, method=method)
        vals = est.values(pts)
        assert np.all(vals <= 1.0) and np.all(vals >= pts.max(axis=1))


def test_bdv_mm_values_are_raw():
    data = sl_uniformized(0.3, 200, seed=38)
    est = empirical_pickands(data, method="bdv-mm")
    pts = np.array([[0.4, 0.6], [0.25, 0.75]])
    np.testing.assert_array_equal(est.values(pts), est.raw_values(pts))


def test_reflected_provenance_propagates_to_estimator():
    rng = np.random.default_rng(39)
    bm = use_rank_marginals(
        BlockMaxima(maxima=rng.standard_normal((60, 2)), block_size=1)
    )
    plain = empirical_pickands(uniformize(bm))
    flipped = empirical_pickands(uniformize(reflect_transform(bm)))
    assert not plain.trained_on_reflected
    assert flipped.trained_on_reflected


def test_estimator_handles_zero_weight_coordinates():
    data = sl_uniformized(0.5, 1_000, seed=40, d=3)
    est = empirical_pickands(data, method="pickands")
    # zero third weight queries the (1,2)-marginal copula, still near A=1
    # at a vertex of that margin
    assert est.at([1.0, 0.0, 0.0]) == 1.0


def test_estimator_is_deterministic():
    data = sl_uniformized(0.5, 400, seed=41)
    pts = np.array([[0.3, 0.7], [0.6, 0.4]])
    a = empirical_pickands(data, method="bdv").values(pts)
    b = empirical_pickands(data, method="bdv").values(pts)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("method", METHODS)
def test_batched_evaluation_matches_per_point_kernels(method):
    # raw_values may evaluate whole Z grids at once; it must agree with the
    # scalar kernels point by point
    data = sl_uniformized(0.5, 300, seed=42, d=3)
    rng = np.random.default_rng(7)
    pts = rng.dirichlet(np.ones(3), size=150)
    est = empirical_pickands(data, method=method)
    raw = np.array([est._raw_one(w) for w in pts])
    if method == "cfg-corrected":
        raw = np.exp(np.log(raw) - pts @ est._log_vertex_cfg)
    np.testing.assert_allclose(est.raw_values(pts), raw, rtol=1e-12)
