import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jdsde.errors import ContractError
from jdsde.errorlab import knot_error_mc, loglog_slope
from jdsde.meshdesign import equidistant_mesh
from jdsde.model import IntensityModel, MertonParams, merton, polynomial, pure_diffusion, pure_jump_additive
from jdsde.pathkit import RngStream, i_nn, i_ww, simulate_path
from jdsde.scheme import (Mesh, build_trajectory, continuous_milstein, dump_trajectory_csv, evaluate,
                          milstein_step, run_milstein, trajectory_from_increments)


def step(model, t0, t1, x, dw, dn):
    return milstein_step(model, t0, t1, x, dw, dn, i_ww(dw, t1 - t0), i_nn(dn))


def test_deterministic_euler_step():
    model = polynomial(a=(1, 0, 0))
    assert step(model, 0.0, 0.5, 0.0, 0.0, 0) == 0.5


def test_merton_step_by_hand():
    model, _ = merton(MertonParams(0.0, 1.0, 1.0))
    assert step(model, 0.0, 0.1, 1.0, 0.2, 1) == pytest.approx(2.37, abs=1e-15)


def test_noise_free_step_keeps_milstein_correction():
    model = polynomial(a=(0.3, 0.2, 0), b=(0, 0.5, 0))
    x, dt = 1.2, 0.25
    expected = x + (0.3 + 0.2 * x) * dt + (0.5 * x) * 0.5 * (-dt / 2)
    assert step(model, 0.0, dt, x, 0.0, 0) == pytest.approx(expected, rel=1e-15)


def test_step_rejects_reversed_interval():
    model = pure_diffusion()
    with pytest.raises(ValueError):
        step(model, 0.5, 0.5, 1.0, 0.0, 0)


# --- meshes -----------------------------------------------------------------------

def test_mesh_validation():
    with pytest.raises(ValueError):
        Mesh(np.array([0.1, 1.0]))
    with pytest.raises(ValueError):
        Mesh(np.array([0.0, 0.5, 0.5, 1.0]))
    with pytest.raises(ValueError):
        Mesh(np.array([0.0, 0.5, 0.5 + 1e-16, 1.0]))
    m = Mesh(np.array([0.0, 0.25, 1.0]))
    assert m.n == 2 and m.T == 1.0
    assert np.allclose(m.refine(2).knots, [0, 0.125, 0.25, 0.625, 1.0])


# --- run_milstein ---------------------------------------------------------------------

def merton_path(n=8, lam_rate=2.0, seed=0, points=64):
    model, lam = merton(MertonParams(0.1, 0.5, lam_rate))
    grid = np.linspace(0, 1, points + 1)
    return model, lam, simulate_path(grid, lam, RngStream(seed, 0))


def test_single_interval_reproduces_step():
    model, lam, path = merton_path()
    x = run_milstein(model, Mesh(np.array([0.0, 1.0])), path)
    assert x[0] == model.x0
    assert x[1] == step(model, 0.0, 1.0, model.x0, path.w[-1], path.n[-1])


def test_mesh_must_lie_on_path_grid():
    model, lam, path = merton_path()
    with pytest.raises(ValueError):
        run_milstein(model, Mesh(np.array([0.0, 0.3, 1.0])), path)


def test_refuses_noncommuting_model():
    model = polynomial(b=(0, 1, 0), c=(1, 0, 0))
    lam = IntensityModel.constant(1.0)
    path = simulate_path(np.linspace(0, 1, 5), lam, RngStream(0, 0))
    with pytest.raises(ContractError):
        run_milstein(model, equidistant_mesh(1.0, 4), path)
    # the override skips the check
    run_milstein(model, equidistant_mesh(1.0, 4), path, check=False)


def test_knot_values_use_standard_information_only():
    model, lam, path = merton_path(seed=3)
    mesh = equidistant_mesh(1.0, 16)
    a = run_milstein(model, mesh, path)
    b = run_milstein(model, mesh, path.without_jump_times())
    assert np.array_equal(a, b)
    ta = build_trajectory("conditional", model, mesh, path, lam)
    tb = build_trajectory("conditional", model, mesh, path.without_jump_times(), lam)
    t = np.linspace(0, 1, 101)
    assert np.array_equal(ta.eval(t), tb.eval(t))


def test_pure_diffusion_knot_error_is_first_order():
    model = pure_diffusion(r=0.05, sigma=0.5)
    lam = IntensityModel.constant(1.0)
    meshes = [equidistant_mesh(1.0, n) for n in (8, 16, 32, 64, 128)]
    res = knot_error_mc(model, lam, meshes, 2000, rng_master=1)
    slope = loglog_slope([r[0] for r in res], [r[1] for r in res])
    assert -1.15 <= slope <= -0.85


# --- trajectories ----------------------------------------------------------------------

@pytest.mark.parametrize("kind", ["conditional", "linear"])
def test_trajectory_hits_knots_exactly(kind):
    model, lam, path = merton_path(seed=5)
    mesh = equidistant_mesh(1.0, 8)
    traj = build_trajectory(kind, model, mesh, path, lam)
    x = run_milstein(model, mesh, path)
    assert np.array_equal(traj.eval(mesh.knots), x)
    assert evaluate(traj, 0.0) == model.x0
    assert evaluate(traj, 1.0) == x[-1]


def test_linear_kind_is_the_chord():
    model, lam, path = merton_path(seed=6)
    mesh = equidistant_mesh(1.0, 4)
    traj = build_trajectory("linear", model, mesh, path, lam)
    x = run_milstein(model, mesh, path)
    assert evaluate(traj, 0.375) == pytest.approx(0.5 * (x[1] + x[2]), rel=1e-14)


def test_conditional_midpoint_without_increments():
    model = polynomial(b=(0, 0.8, 0), c=(0, 0.5, 0))
    lam = IntensityModel.linear(1.0, 2.0, 1.0)
    mesh = Mesh(np.array([0.0, 0.5, 1.0]))
    traj = trajectory_from_increments("conditional", model, mesh, np.zeros(2), np.zeros(2), lam)
    x0 = model.x0
    # a == 0, I_WW = -dt/2 and the quadratic weight at the midpoint is 1/4
    expected = x0 + (0.8 * x0 * 0.8) * (-0.25) * 0.25
    assert evaluate(traj, 0.25) == pytest.approx(expected, rel=1e-15)


def test_conditional_uses_compensator_weights():
    model = pure_jump_additive(kappa=0.0, c0=1.0)
    lam = IntensityModel.linear(1.0, 2.0, 1.0)
    mesh = Mesh(np.array([0.0, 1.0]))
    traj = trajectory_from_increments("conditional", model, mesh, np.array([0.0]), np.array([3.0]), lam)
    t = 0.5
    ell = float(lam.m(t) / lam.m(1.0))
    assert evaluate(traj, t) == pytest.approx(model.x0 + 3.0 * ell, rel=1e-15)


def test_conditional_equals_linear_for_constant_rate_and_state_free_noise():
    model = pure_jump_additive(kappa=0.0, c0=0.7, c1=0.4)
    lam = IntensityModel.constant(3.0)
    mesh = equidistant_mesh(1.0, 16)
    grid = np.linspace(0, 1, 257)
    for r in range(10):
        path = simulate_path(grid, lam, RngStream(2, r))
        a = build_trajectory("conditional", model, mesh, path, lam).eval(grid)
        b = build_trajectory("linear", model, mesh, path, lam).eval(grid)
        assert np.max(np.abs(a - b)) <= 1e-12


def test_conditional_linear_gap_shrinks_like_one_over_n():
    # mean-square gap integrated over time; the pathwise sup decays only like
    # n^(-1/2) because a single interval with one jump contributes c' dN dW
    model, lam = merton(MertonParams(0.0, 0.5, 1.0))
    grid = np.linspace(0, 1, 1025)
    paths = [simulate_path(grid, lam, RngStream(9, r)) for r in range(400)]
    gaps = []
    for n in (8, 32, 128):
        mesh = equidistant_mesh(1.0, n)
        sq = np.zeros(grid.size)
        for path in paths:
            a = build_trajectory("conditional", model, mesh, path, lam, check=False).eval(grid)
            b = build_trajectory("linear", model, mesh, path, lam, check=False).eval(grid)
            sq += (a - b) ** 2
        gaps.append(np.sqrt(np.mean(sq / len(paths))))
    slope = loglog_slope([8, 32, 128], gaps)
    assert -1.2 < slope < -0.8


def test_eval_rejects_out_of_range():
    model, lam, path = merton_path()
    traj = build_trajectory("linear", model, equidistant_mesh(1.0, 4), path, lam)
    with pytest.raises(ValueError):
        traj.eval(np.array([1.2]))


def test_conditional_requires_intensity():
    model, lam, path = merton_path()
    with pytest.raises(ValueError):
        build_trajectory("conditional", model, equidistant_mesh(1.0, 4), path)
    with pytest.raises(ValueError):
        build_trajectory("spline", model, equidistant_mesh(1.0, 4), path, lam)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.0, 1.0))
def test_conditional_is_continuous(seed, frac):
    model, lam = merton(MertonParams(0.1, 0.4, 2.0))
    mesh = equidistant_mesh(1.0, 8)
    path = simulate_path(np.linspace(0, 1, 9), lam, RngStream(seed, 0))
    traj = build_trajectory("conditional", model, mesh, path, lam)
    t = np.clip(frac, 1e-9, 1 - 1e-9)
    a, b = traj.eval(np.array([t - 1e-9, t + 1e-9]))
    assert abs(a - b) < 1e-6 * (1 + abs(a))


def test_continuous_milstein_matches_scheme_at_knots():
    model, lam, path = merton_path(seed=2)
    mesh = equidistant_mesh(1.0, 8)
    idx = np.searchsorted(path.grid, mesh.knots)
    wk, nk = path.w[idx], path.n[idx]
    x = run_milstein(model, mesh, path)
    at = continuous_milstein(model, mesh.knots, x, wk, nk, mesh.knots[1:], wk[1:], nk[1:], left=True)
    assert np.allclose(at, x[1:], rtol=1e-14)


def test_trajectory_dump(tmp_path):
    model, lam, path = merton_path()
    traj = build_trajectory("linear", model, equidistant_mesh(1.0, 4), path, lam)
    f = tmp_path / "traj.csv"
    dump_trajectory_csv(traj, np.array([0.0, 1.0]), f)
    lines = f.read_text().splitlines()
    assert lines[0] == "t,x_hat" and len(lines) == 3
