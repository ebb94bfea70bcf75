import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from adoe import acquisition as acq
from adoe import gp
from adoe.domain import DomainError
from adoe.stats import norm_cdf, norm_pdf


def test_ei_at_incumbent_mean():
    assert acq.ei_min(0.0, 1.0, 0.0) == pytest.approx(1 / np.sqrt(2 * np.pi), abs=1e-9)
    assert acq.ei_min(0.0, 1.0, 0.0) == pytest.approx(0.39894, abs=1e-5)


def test_ei_one_sd_above_incumbent():
    # oracle: (-1) * Phi(-1) + phi(-1), with Phi from numeric integration
    zs = np.linspace(-9.0, -1.0, 400001)
    phi_int = np.trapezoid(norm_pdf(zs), zs)
    want = -phi_int + norm_pdf(-1.0)
    assert want == pytest.approx(0.08332, abs=1e-5)
    assert acq.ei_min(1.0, 1.0, 0.0) == pytest.approx(want, abs=1e-7)


def test_ei_deterministic_when_sd_zero():
    assert acq.ei_min(0.5, 0.0, 0.0) == 0.0
    assert acq.ei_min(-0.5, 0.0, 0.0) == 0.5


def test_ei_nonnegative_grid():
    mus = np.linspace(-3, 3, 61)
    sds = np.linspace(0, 2, 21)
    M, S = np.meshgrid(mus, sds)
    vals = acq.ei_min(M.ravel(), S.ravel(), 0.0)
    assert np.all(vals >= 0)


def test_ei_monotone_in_sd_when_no_mean_improvement():
    sds = np.linspace(0.01, 3, 50)
    for mu in (0.0, 0.4, 1.5):
        vals = acq.ei_min(np.full_like(sds, mu), sds, 0.0)
        assert np.all(np.diff(vals) > 0)


def test_normal_cdf_against_numeric_integration():
    for z in range(-3, 4):
        zs = np.linspace(-10.0, float(z), 800001)
        integral = np.trapezoid(norm_pdf(zs), zs)
        assert abs(float(norm_cdf(z)) - integral) <= 1e-7


def test_ei_rejects_negative_sd():
    with pytest.raises(DomainError):
        acq.ei_min(0.0, -1.0, 0.0)


def test_scalarize_single_weight_reduction():
    # normalized rows are given directly by a two-point degenerate matrix
    F = np.array([[0.4, 0.9]])
    # craft data whose normalization is identity on [0, 1]
    data = np.array([[0.0, 0.0], [1.0, 1.0], [0.4, 0.9]])
    s = acq.scalarize_parego(data, [1.0, 0.0], rho=0.05)
    assert s[2] == pytest.approx(0.4 + 0.05 * 0.4)


def test_scalarize_equal_weights_max():
    data = np.array([[0.0, 0.0], [1.0, 1.0], [0.2, 0.8]])
    s = acq.scalarize_parego(data, [0.5, 0.5], rho=0.0)
    assert s[2] == pytest.approx(0.4)


def test_scalarize_degenerate_objective_range():
    data = np.array([[1.0, 5.0], [2.0, 5.0]])
    s = acq.scalarize_parego(data, [0.5, 0.5], rho=0.0)
    assert s == pytest.approx([0.0, 0.5])


@given(
    a1=st.floats(0.1, 10), b1=st.floats(-5, 5),
    a2=st.floats(0.1, 10), b2=st.floats(-5, 5),
)
def test_scalarized_order_invariant_to_affine_rescaling(a1, b1, a2, b2):
    rng = np.random.default_rng(0)
    F = rng.uniform(0, 1, size=(12, 2))
    w = np.array([0.3, 0.7])
    s = acq.scalarize_parego(F, w)
    G = F * np.array([a1, a2]) + np.array([b1, b2])
    s2 = acq.scalarize_parego(G, w)
    assert np.array_equal(np.argsort(s, kind="stable"), np.argsort(s2, kind="stable"))


def test_scalarize_validates_weights():
    F = np.zeros((3, 2))
    with pytest.raises(DomainError):
        acq.scalarize_parego(F, [0.5, 0.6])
    with pytest.raises(DomainError):
        acq.scalarize_parego(F, [1.0])


def _toy_context(seed=0):
    X = np.array([[0.0], [0.5], [1.0]])
    y = (X[:, 0] - 0.3) ** 2
    model = gp.fit_hyperparams(X, y, seed=1)
    return acq.AcquisitionContext(
        surrogate=model,
        incumbent=float(y.min()),
        lower=np.array([0.0]),
        upper=np.array([1.0]),
        seed=seed,
    ), model


def test_propose_1d_toy_beats_dense_grid():
    ctx, model = _toy_context()
    x_star = acq.propose(ctx)
    assert 0.1 <= x_star[0] <= 0.5
    grid = np.linspace(0, 1, 1001)[:, None]
    mean, var = gp.posterior_batch(model, grid)
    ei_grid = acq.ei_min(mean, np.sqrt(var), ctx.incumbent)
    mean_s, var_s = gp.posterior_batch(model, x_star[None, :])
    ei_star = acq.ei_min(mean_s, np.sqrt(var_s), ctx.incumbent)[0]
    assert ei_star >= ei_grid.max() - 1e-6


def test_propose_constant_targets():
    X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    model = gp.condition(X, np.array([2.0, 2.0, 2.0]),
                         gp.KernelSpec(2.5, 1.0, np.array([1.0, 1.0])), 1e-6)
    ctx = acq.AcquisitionContext(
        surrogate=model, incumbent=2.0,
        lower=np.zeros(2), upper=np.ones(2), seed=0,
    )
    x = acq.propose(ctx)
    assert np.all(np.isfinite(x))
    assert np.all(x >= 0) and np.all(x <= 1)


def test_propose_deterministic():
    ctx, _ = _toy_context(seed=123)
    assert np.array_equal(acq.propose(ctx), acq.propose(ctx))


def test_propose_always_inside_box():
    rng = np.random.default_rng(3)
    X = rng.uniform(-2, 2, size=(8, 3))
    y = (X**2).sum(axis=1)
    model = gp.fit_hyperparams(X, y, seed=0)
    for seed in range(5):
        ctx = acq.AcquisitionContext(
            surrogate=model, incumbent=float(y.min()),
            lower=-2 * np.ones(3), upper=2 * np.ones(3), seed=seed,
        )
        x = acq.propose(ctx)
        assert np.all(x >= -2) and np.all(x <= 2)


def test_batch_of_one_equals_propose():
    ctx, _ = _toy_context(seed=7)
    assert np.array_equal(acq.propose_batch(ctx, 1)[0], acq.propose(ctx))


def test_batch_points_distinct():
    ctx, _ = _toy_context(seed=5)
    batch = acq.propose_batch(ctx, 2)
    assert np.linalg.norm(batch[0] - batch[1]) >= acq.MIN_BATCH_SPACING


def test_fantasizing_changes_second_point():
    # a fixture with one dominant EI peak: without fantasizing the second
    # proposal would repeat the first
    ctx, _ = _toy_context(seed=11)
    batch = acq.propose_batch(ctx, 2)
    repeat = acq.propose(ctx)
    assert np.array_equal(batch[0], repeat)
    assert abs(batch[1][0] - repeat[0]) > 10 * acq.MIN_BATCH_SPACING


def test_parego_weights_cover_strata():
    rng = np.random.default_rng(0)
    w1 = [acq.parego_weights(9, k, 2, rng)[0] for k in range(5)]
    bands = sorted(int(v * 5) for v in w1)
    assert bands == [0, 1, 2, 3, 4]
    rng2 = np.random.default_rng(0)
    again = [acq.parego_weights(9, k, 2, rng2)[0] for k in range(5)]
    assert again == w1
    w = acq.parego_weights(9, 0, 3, rng)
    assert w.shape == (3,) and w.sum() == pytest.approx(1.0)


def test_chebyshev_scalarization_posterior():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(10, 2))
    F = np.column_stack([(X**2).sum(axis=1), 1.0 - X[:, 0]])
    models = [gp.fit_hyperparams(X, F[:, j], seed=j) for j in range(2)]
    w = np.array([0.5, 0.5])
    surr = acq.ChebyshevScalarization(models, F, w)
    assert surr.inputs is models[0].inputs
    mean, var = surr.posterior_batch(X)
    assert np.all(var >= 0)
    # at training points the scalarized mean tracks the true scalarization
    want = acq.scalarize_parego(F, w)
    assert np.abs(mean - want).max() < 0.05
