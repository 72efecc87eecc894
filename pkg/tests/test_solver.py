import numpy as np
import pytest

from conftest import dense_matrix
from panfuse.cube import HyperCube, PanImage
from panfuse.errors import DataError
from panfuse.operators import SensorModel, SplitVector, StackOperator, upsample_nearest
from panfuse.prox import project_ball, prox_levelline, prox_tv
from panfuse.sim import SimScenario, averaging_psf, degrade_hx, degrade_pan, synthetic_scene
from panfuse.solver import (
    SolverConfig,
    build_problem,
    initialize,
    iterate,
    objective_value,
    run,
    solve_u_fourier,
)


def make_inputs(seed=0, bands=2, size=8, q=2, sigma=1e-3):
    ref = synthetic_scene(seed, bands=bands, height=size, width=size, n_shapes=3)
    model = SensorModel(
        q=q, psf=averaging_psf(q), g=np.full(bands, 1.0 / bands), sigma_x=sigma, sigma_p=sigma
    )
    scenario = SimScenario(ref, model, seed=seed)
    return ref, model, degrade_hx(scenario), degrade_pan(scenario)


# -- initialization ---------------------------------------------------------

def test_initialize_q1_keeps_x():
    ref, model, x, p = make_inputs(q=1, size=8)
    state, _ = initialize(x, p, model, SolverConfig())
    assert np.array_equal(state.u, x.data)


def test_initialize_multipliers_zero():
    ref, model, x, p = make_inputs()
    state, _ = initialize(x, p, model, SolverConfig())
    for block in state.lam.blocks():
        assert np.all(block == 0)


def test_initialize_constant_x_zero_gradients():
    model = SensorModel(q=2, psf=averaging_psf(2), g=np.array([1.0]), sigma_x=0.0, sigma_p=0.0)
    x = HyperCube(np.full((1, 4, 4), 2.0))
    p = PanImage(np.full((8, 8), 2.0))
    state, _ = initialize(x, p, model, SolverConfig())
    assert np.all(state.y.grad1 == 0)
    assert np.all(state.y.grad2 == 0)


def test_initialize_dimension_mismatch():
    ref, model, x, p = make_inputs()
    bad_p = PanImage(np.zeros((6, 6)))
    with pytest.raises(DataError):
        initialize(x, bad_p, model, SolverConfig())


def test_default_init_zero_first_residual():
    ref, model, x, p = make_inputs()
    state, problem = initialize(x, p, model, SolverConfig())
    resid = state.y - problem.stack.apply(state.u)
    assert resid.norm() < 1e-12


# -- Fourier u-update -------------------------------------------------------

def test_solve_u_consistent_system(rng):
    ref, model, x, p = make_inputs()
    stack = StackOperator(model, p.height, p.width)
    ts = stack.transfer_set()
    u0 = rng.standard_normal((2, p.height, p.width))
    u = solve_u_fourier(stack.apply(u0), stack, ts)
    assert np.allclose(u, u0, atol=1e-10)


def test_solve_u_zero_rhs():
    ref, model, x, p = make_inputs()
    stack = StackOperator(model, p.height, p.width)
    zero = SplitVector.zeros(2, p.height, p.width)
    assert np.all(solve_u_fourier(zero, stack, stack.transfer_set()) == 0)


def test_solve_u_matches_dense_pinv(rng):
    bands, h, w = 2, 4, 4
    psf = rng.random((3, 3))
    psf /= psf.sum()
    model = SensorModel(q=2, psf=psf, g=rng.random(bands), sigma_x=0.0, sigma_p=0.0)
    stack = StackOperator(model, h, w)
    ts = stack.transfer_set()

    def flat_apply(u):
        sv = stack.apply(u.reshape(bands, h, w))
        return np.concatenate([b.ravel() for b in sv.blocks()])

    M = dense_matrix(lambda u: flat_apply(u.ravel()), (bands * h * w,))
    for _ in range(5):
        n = bands * h * w
        r = rng.standard_normal(M.shape[0])
        dense_u = np.linalg.pinv(M) @ r
        sizes = [bands * 2 * h * w, bands * 2 * h * w, bands * h * w, bands * h * w]
        parts = np.split(r, np.cumsum(sizes)[:-1])
        sv = SplitVector(
            parts[0].reshape(bands, 2, h, w),
            parts[1].reshape(bands, 2, h, w),
            parts[2].reshape(bands, h, w),
            parts[3].reshape(bands, h, w),
        )
        u = solve_u_fourier(sv, stack, ts)
        assert np.linalg.norm(u.ravel() - dense_u) <= 1e-8 * max(np.linalg.norm(dense_u), 1.0)


# -- one ADMM sweep ---------------------------------------------------------

def reference_sweep(state, problem):
    """Transliteration of one sweep, block by block, loops not batched."""
    cfg = problem.config
    beta = cfg.beta
    stack = problem.stack
    mu = stack.apply(state.u)
    L = mu.blur.shape[0]

    y1 = np.empty_like(mu.grad1)
    y2 = np.empty_like(mu.grad2)
    y3 = np.empty_like(mu.blur)
    for l in range(L):
        z1 = mu.grad1[l] - state.lam.grad1[l] / beta
        y1[l] = prox_tv(z1, cfg.tau_tv)
        z2 = mu.grad2[l] - state.lam.grad2[l] / beta
        y2[l] = prox_levelline(z2, problem.eta, cfg.tau_levelline)
        z3 = mu.blur[l] - state.lam.blur[l] / beta
        y3[l] = project_ball(z3, problem.hx_specs[l])
    z4 = mu.mix - state.lam.mix / beta
    y4 = project_ball(z4, problem.pan_spec)
    y = SplitVector(y1, y2, y3, y4)

    u = solve_u_fourier(y + (1.0 / beta) * state.lam, stack, problem.transfer)
    lam = state.lam + beta * (y - stack.apply(u))
    return u, y, lam


def test_iterate_matches_reference_sweep(rng):
    ref, model, x, p = make_inputs(seed=3, size=4, q=2, sigma=1e-4)
    state, problem = initialize(x, p, model, SolverConfig(gamma=0.2, beta=10.0))
    # perturb the state so the sweep is nontrivial
    state.lam = SplitVector(
        rng.standard_normal(state.lam.grad1.shape),
        rng.standard_normal(state.lam.grad2.shape),
        rng.standard_normal(state.lam.blur.shape),
        rng.standard_normal(state.lam.mix.shape),
    )
    want_u, want_y, want_lam = reference_sweep(state, problem)
    iterate(state, problem)
    assert np.allclose(state.u, want_u, atol=1e-12)
    for got, want in zip(state.y.blocks(), want_y.blocks()):
        assert np.allclose(got, want, atol=1e-12)
    for got, want in zip(state.lam.blocks(), want_lam.blocks()):
        assert np.allclose(got, want, atol=1e-12)


def test_primal_residual_bookkeeping(rng):
    ref, model, x, p = make_inputs(seed=4)
    state, problem = initialize(x, p, model, SolverConfig(beta=100.0))
    iterate(state, problem)
    mu = problem.stack.apply(state.u)
    recomputed = (state.y - mu).norm() / mu.norm()
    assert state.history[-1]["primal_residual"] == pytest.approx(recomputed, abs=1e-12)


def test_fixed_point_identity_proxes():
    ref, model, x, p = make_inputs(sigma=0.0)
    model_inf = SensorModel(q=model.q, psf=model.psf, g=model.g, sigma_x=np.inf, sigma_p=np.inf)
    config = SolverConfig(tv_threshold=0.0, levelline_threshold=0.0)
    state, problem = initialize(x, p, model_inf, config)
    u0 = state.u.copy()
    for _ in range(10):
        iterate(state, problem)
    rel = np.linalg.norm(state.u - u0) / np.linalg.norm(u0)
    assert rel < 1e-12


# -- full runs --------------------------------------------------------------

def test_run_zero_iters_returns_initialization():
    ref, model, x, p = make_inputs()
    config = SolverConfig(max_iters=0)
    est, history = run(x, p, model, config)
    assert history == []
    assert np.array_equal(est.data, upsample_nearest(x, model.q).data)


def test_run_accepts_reference_parameter_set():
    # the published configuration: q=4, beta=1000, gamma=0.01, sigma=1e-4
    ref = synthetic_scene(2, bands=3, height=16, width=16)
    model = SensorModel(q=4, psf=averaging_psf(4), g=np.full(3, 1 / 3), sigma_x=1e-4, sigma_p=1e-4)
    scenario = SimScenario(ref, model)
    x = degrade_hx(scenario)
    p = degrade_pan(scenario)
    config = SolverConfig(gamma=0.01, beta=1000.0, max_iters=5)
    est, history = run(x, p, model, config)
    assert est.data.shape == ref.data.shape
    assert len(history) == 5


def test_run_noiseless_constraints_satisfied():
    ref, model, x, p = make_inputs(seed=5, size=16, bands=3, q=2, sigma=1e-4)
    config = SolverConfig(gamma=0.01, beta=1e5, max_iters=500)
    est, history = run(x, p, model, config)
    last = history[-1]
    assert last["hx_slack_max"] <= 1e-4
    assert last["pan_slack"] <= 1e-4
    assert last["primal_residual"] <= 1e-3


@pytest.mark.parametrize("seed", [5, 6, 7, 8])
def test_objective_not_above_noisy_initialization(seed):
    # strong noise inflates the TV of the upsampled start; the solver
    # must end below it
    ref, model, x, p = make_inputs(seed=seed, size=16, bands=3, sigma=0.1)
    config = SolverConfig(gamma=0.01, beta=1000.0, max_iters=200)
    state, problem = initialize(x, p, model, config)
    start = objective_value(state.u, problem.eta, config.gamma)
    est, history = run(x, p, model, config)
    assert history[-1]["objective"] <= start


@pytest.mark.parametrize("seed", [5, 7, 13])
def test_residual_trend_settles(seed):
    # non-increasing within 1% between consecutive points over the last
    # 50 of 200 iterations, once above the numerical convergence floor
    ref, model, x, p = make_inputs(seed=seed, size=16, bands=3, sigma=1e-3)
    config = SolverConfig(gamma=0.01, beta=1e5, max_iters=200)
    est, history = run(x, p, model, config)
    tail = [h["primal_residual"] for h in history[-50:]]
    floor = 1e-6
    for prev, nxt in zip(tail, tail[1:]):
        assert nxt <= max(prev * 1.01, floor)


def test_primal_tol_stops_early():
    ref, model, x, p = make_inputs(seed=8, sigma=1e-3)
    config = SolverConfig(gamma=0.01, beta=1e5, max_iters=500, primal_tol=1e-6)
    est, history = run(x, p, model, config)
    assert len(history) < 500
    assert history[-1]["primal_residual"] < 1e-6


def test_history_csv_written(tmp_path):
    ref, model, x, p = make_inputs(seed=9)
    log = tmp_path / "conv.csv"
    config = SolverConfig(max_iters=3, log_path=str(log))
    run(x, p, model, config)
    lines = log.read_text().strip().splitlines()
    assert lines[0].startswith("iteration,")
    assert len(lines) == 4


def test_config_validation():
    with pytest.raises(DataError):
        SolverConfig(gamma=1.5)
    with pytest.raises(DataError):
        SolverConfig(beta=0.0)
