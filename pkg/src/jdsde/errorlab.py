"""Monte-Carlo error laboratory.

Errors are mean-square over the whole trajectory,

    e_n = (E int_0^T |X(t) - Xbar_n(t)|^2 dt)^{1/2},

estimated by averaging a per-path trapezoid integral over replications.
The integrand jumps with X, so every eval interval containing jump times is
split there, using left limits on the left of each jump.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .meshdesign import (PilotEstimate, equidistant_mesh, merton_expected_y, merton_optimal_mesh,
                         mesh_from_density, pilot_expected_y)
from .pathkit import RngStream, simulate_path
from .plotting import render_convergence
from .scheme import (KINDS, Mesh, check_model, continuous_milstein, milstein_knots,
                     trajectory_from_increments)

CSV_COLUMNS = ("n", "cost_n", "e_hat", "stderr", "sqrt_n_e", "sqrt_cost_e", "predicted_limit")


@dataclass(frozen=True)
class ErrorEstimate:
    e_hat: float
    stderr: float
    M: int
    n: int
    eval_grid_size: int
    e2_hat: float = 0.0
    e2_stderr: float = 0.0


@dataclass(frozen=True)
class ReportRow:
    n: int
    cost_n: int
    e_hat: float
    stderr: float
    sqrt_n_e: float
    sqrt_cost_e: float
    predicted_limit: float


@dataclass
class ConvergenceReport:
    rows: list
    c_psi: float
    slope: float
    metadata: dict = field(default_factory=dict)


def cost_of(n, model):
    """Number of evaluations of N and W used by an n-point method."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return n * ((not model.b_zero) + (not model.c_zero))


# ---------------------------------------------------------------------------
# Reference solutions
# ---------------------------------------------------------------------------

def parse_reference(reference):
    """Normalize 'merton-exact', 'self', 'fine-milstein' or 'fine-milstein:F'."""
    if isinstance(reference, tuple):
        name, factor = reference
    elif ":" in str(reference):
        name, factor = str(reference).split(":", 1)
    else:
        name, factor = str(reference), 16
    factor = int(factor)
    if name not in ("merton-exact", "fine-milstein", "self"):
        raise ValueError(f"unknown reference {reference!r}")
    if name == "fine-milstein" and factor < 8:
        raise ValueError("fine-milstein refinement factor must be at least 8")
    return name, factor


def _stack_paths(grid, intensity, rng_master, reps, levels=None):
    paths = [simulate_path(grid, intensity, RngStream(rng_master, r), levels=levels) for r in reps]
    w = np.stack([p.w for p in paths])
    n = np.stack([p.n for p in paths])
    rows = np.concatenate([np.full(len(p.jumps), k) for k, p in enumerate(paths)]).astype(np.intp)
    tau = np.concatenate([p.jumps.times for p in paths])
    wj = np.concatenate([p.w_jumps for p in paths])
    rank = np.concatenate([np.arange(1, len(p.jumps) + 1) for p in paths])
    return w, n, rows, tau, wj, rank


def _index(grid, knots):
    return np.searchsorted(grid, knots)


def _trapezoid_with_jumps(grid, f, rows, tau, f_left, f_right):
    """Per-row trapezoid integral of ``f`` with pieces split at jumps."""
    h = np.diff(grid)
    total = 0.5 * (f[:, :-1] + f[:, 1:]) @ h
    if tau.size == 0:
        return total
    j = np.clip(np.searchsorted(grid, tau, side="right") - 1, 0, grid.size - 2)
    key = rows * grid.size + j
    first = np.ones(key.size, dtype=bool)
    first[1:] = key[1:] != key[:-1]
    last = np.ones(key.size, dtype=bool)
    last[:-1] = key[:-1] != key[1:]
    prev_t = np.where(first, grid[j], np.concatenate([[0.0], tau[:-1]]))
    prev_f = np.where(first, f[rows, j], np.concatenate([[0.0], f_right[:-1]]))
    piece = 0.5 * (tau - prev_t) * (prev_f + f_left)
    piece += np.where(last, 0.5 * (grid[j + 1] - tau) * (f_right + f[rows, j + 1]), 0.0)
    piece -= np.where(first, 0.5 * h[j] * (f[rows, j] + f[rows, j + 1]), 0.0)
    corr = np.zeros(f.shape[0])
    np.add.at(corr, rows, piece)
    return total + corr


def _chunk_integrals(ctx, reps):
    model, intensity = ctx["model"], ctx["intensity"]
    grid = ctx["grid"]
    w, n, rows, tau, wj, rank = _stack_paths(grid, intensity, ctx["rng_master"], reps, ctx["levels"])
    name = ctx["reference"]
    if name == "merton-exact":
        x_ref = model.exact(grid, w, n)
        ref_left = model.exact(tau, wj, rank - 1)
        ref_right = model.exact(tau, wj, rank)
    elif name == "fine-milstein":
        fine = ctx["fine"]
        idx = _index(grid, fine.knots)
        wk, nk = w[:, idx], n[:, idx]
        xf = milstein_knots(model, fine.knots, np.diff(wk, axis=1), np.diff(nk, axis=1).astype(float))
        x_ref = continuous_milstein(model, fine.knots, xf, wk, nk, grid, w, n)
        ref_left = continuous_milstein(model, fine.knots, xf, wk, nk, tau, wj, rank - 1, rows=rows, left=True)
        ref_right = continuous_milstein(model, fine.knots, xf, wk, nk, tau, wj, rank, rows=rows)
    out = []
    for kind, mesh in ctx["methods"]:
        idx = _index(grid, mesh.knots)
        traj = trajectory_from_increments(kind, model, mesh, np.diff(w[:, idx], axis=1),
                                          np.diff(n[:, idx], axis=1).astype(float), intensity)
        x_hat = traj.eval(grid)
        x_hat_j = traj.eval_rows(rows, tau)
        if name == "self":
            x_ref, ref_left, ref_right = x_hat, x_hat_j, x_hat_j
        f = (x_ref - x_hat) ** 2
        out.append(_trapezoid_with_jumps(grid, f, rows, tau, (ref_left - x_hat_j) ** 2,
                                         (ref_right - x_hat_j) ** 2))
    return np.stack(out)


def _eval_grid(T, size):
    return np.arange(size + 1) * T / size


def merge_grid(required, filler, T):
    """Sorted union of two point sets, dropping filler points within rounding
    distance of a required point (the required points are kept exactly)."""
    required = np.unique(required)
    filler = np.unique(filler)
    j = np.clip(np.searchsorted(required, filler), 1, required.size - 1)
    gap = np.minimum(np.abs(filler - required[j - 1]), np.abs(filler - required[j]))
    return np.union1d(required, filler[gap > 1e-12 * T])


def noise_levels(eval_grid_size):
    """Depth of the dyadic W grid: the first power of two >= eval_grid_size."""
    return max(int(eval_grid_size - 1).bit_length(), 0)


def l2_errors_shared(model, intensity, methods, M, eval_grid_size, reference="merton-exact",
                     rng_master=0, chunk=256, threads=1, mode="det", check=True):
    """Errors of several (kind, mesh) methods on the same simulated paths.

    Returns one :class:`ErrorEstimate` per method.  Replication r always uses
    ``RngStream(rng_master, r)``, with W built on a dyadic grid at least as
    fine as the eval grid, so refining the eval grid keeps the coarse noise.
    """
    name, factor = parse_reference(reference)
    if name == "merton-exact" and model.exact is None:
        raise ValueError("merton-exact reference needs a model with a closed-form solution")
    for kind, mesh in methods:
        if kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}")
        if abs(mesh.T - model.T) > 1e-12 * model.T:
            raise ValueError("mesh does not span [0, T]")
    if M < 2 or eval_grid_size < 1:
        raise ValueError("need M >= 2 and eval_grid_size >= 1")
    if check:
        check_model(model)
    required = np.unique(np.concatenate([m.knots for _, m in methods]))
    fine = None
    if name == "fine-milstein":
        fine = Mesh(required).refine(factor)
        required = fine.knots
    grid = merge_grid(required, _eval_grid(model.T, eval_grid_size), model.T)
    ctx = dict(model=model, intensity=intensity, grid=grid, methods=methods,
               reference=name, fine=fine, rng_master=rng_master,
               levels=noise_levels(eval_grid_size))
    starts = list(range(0, M, chunk))
    chunks = [range(s, min(s + chunk, M)) for s in starts]
    k = len(methods)
    if mode == "fast" and threads > 1:
        s1 = np.zeros(k)
        s2 = np.zeros(k)
        with ThreadPoolExecutor(threads) as pool:
            futures = [pool.submit(_chunk_integrals, ctx, c) for c in chunks]
            for fut in as_completed(futures):
                vals = fut.result()
                s1 += vals.sum(axis=1)
                s2 += (vals ** 2).sum(axis=1)
        mean = s1 / M
        var = np.maximum(s2 / M - mean ** 2, 0.0) * M / (M - 1)
    else:
        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(lambda c: _chunk_integrals(ctx, c), chunks))
        else:
            parts = [_chunk_integrals(ctx, c) for c in chunks]
        vals = np.concatenate(parts, axis=1)
        mean = vals.mean(axis=1)
        var = vals.var(axis=1, ddof=1)
    if not np.all(np.isfinite(mean)):
        raise NumericalError("non-finite error integrals")
    estimates = []
    for i, (_, mesh) in enumerate(methods):
        e2_se = math.sqrt(var[i] / M)
        e = math.sqrt(max(mean[i], 0.0))
        se = e2_se / (2.0 * e) if e > 0 else 0.0
        estimates.append(ErrorEstimate(e, se, M, mesh.n, eval_grid_size, float(mean[i]), e2_se))
    return estimates


def l2_error_mc(model, intensity, method_kind, mesh, M, eval_grid_size, reference="merton-exact",
                rng_master=0, **kwargs):
    """Monte-Carlo estimate of the global L2 error of one method."""
    return l2_errors_shared(model, intensity, [(method_kind, mesh)], M, eval_grid_size,
                            reference, rng_master, **kwargs)[0]


def knot_error_mc(model, intensity, meshes, M, rng_master=0, chunk=500, check=True):
    """sup over knots of the L2 distance between Milstein and the exact solution.

    All meshes are driven by the same paths.  Returns a list of
    (n, sup_error, stderr) with the stderr of the maximizing knot.
    """
    if model.exact is None:
        raise ValueError("knot errors need a model with a closed-form solution")
    if check:
        check_model(model)
    grid = np.unique(np.concatenate([m.knots for m in meshes]))
    sq = [np.zeros((0, m.n + 1)) for m in meshes]
    for s in range(0, M, chunk):
        w, n, *_ = _stack_paths(grid, intensity, rng_master, range(s, min(s + chunk, M)))
        for k, mesh in enumerate(meshes):
            idx = _index(grid, mesh.knots)
            x = milstein_knots(model, mesh.knots, np.diff(w[:, idx], axis=1),
                               np.diff(n[:, idx], axis=1).astype(float))
            err = (model.exact(mesh.knots, w[:, idx], n[:, idx]) - x) ** 2
            sq[k] = np.concatenate([sq[k], err])
    out = []
    for mesh, e2 in zip(meshes, sq):
        mean = e2.mean(axis=0)
        j = int(np.argmax(mean))
        e = math.sqrt(mean[j])
        se = e2[:, j].std(ddof=1) / math.sqrt(M) / (2 * e) if e > 0 else 0.0
        out.append((mesh.n, e, se))
    return out


# ---------------------------------------------------------------------------
# Asymptotic constants
# ---------------------------------------------------------------------------

def _tabulate(ey, t):
    if isinstance(ey, PilotEstimate):
        if t is not None and (len(t) != len(ey.grid) or np.any(np.asarray(t) != ey.grid)):
            raise ValueError("grid does not match the pilot estimate")
        return ey.grid, np.asarray(ey.ey_hat, dtype=float)
    if t is None:
        raise ValueError("a tabulation grid is required")
    t = np.asarray(t, dtype=float)
    values = ey(t) if callable(ey) else np.asarray(ey, dtype=float)
    if values.shape != t.shape:
        raise ValueError("E Y table and grid have different lengths")
    return t, values


def asymptotic_constant(ey, density="equidistant", t=None):
    """C_psi for a density, or C^eq / C^noneq for the two named regimes.

    ``ey`` is a :class:`PilotEstimate`, an array tabulated on ``t`` or a
    callable evaluated on ``t``.  Integrals use the composite trapezoid rule
    on the tabulation grid.
    """
    t, values = _tabulate(ey, t)
    if t[0] != 0.0 or np.any(np.diff(t) <= 0):
        raise ValueError("tabulation grid must increase from 0")
    if np.any(values < 0):
        raise ValueError("E Y must be nonnegative")
    T = float(t[-1])
    if isinstance(density, str):
        if density == "equidistant":
            return math.sqrt(T / 6.0) * math.sqrt(np.trapezoid(values, t))
        if density == "noneq-optimal":
            return float(np.trapezoid(np.sqrt(values), t)) / math.sqrt(6.0)
        raise ValueError(f"unknown density {density!r}")
    if abs(density.T - T) > 1e-12 * T:
        raise ValueError("density and tabulation grid cover different intervals")
    psi = density.pdf(t)
    if np.any(psi <= 0):
        raise ValueError("density must be positive on the tabulation grid")
    return math.sqrt(np.trapezoid(values / psi, t) / 6.0)


def constant_stderr(pilot, density="equidistant"):
    """Standard error of a constant induced by the pilot noise.

    First-order propagation with the pointwise errors taken as fully
    correlated (they come from the same paths), which bounds the
    uncorrelated case from above.  The density is held fixed.
    """
    t, ey, se = pilot.grid, np.asarray(pilot.ey_hat, dtype=float), np.asarray(pilot.stderr, dtype=float)
    w = np.zeros_like(t)
    h = np.diff(t)
    w[:-1] += 0.5 * h
    w[1:] += 0.5 * h
    T = float(t[-1])
    if isinstance(density, str) and density == "noneq-optimal":
        root = np.sqrt(np.maximum(ey, np.finfo(float).tiny))
        return float(np.sum(w * se / (2.0 * root)) / math.sqrt(6.0))
    c = asymptotic_constant(pilot, density)
    if c == 0:
        return 0.0
    if isinstance(density, str):
        return float(T * np.sum(w * se) / (12.0 * c))
    return float(np.sum(w * se / density.pdf(t)) / (12.0 * c))


# ---------------------------------------------------------------------------
# Convergence studies
# ---------------------------------------------------------------------------

def _mesh_for(mesh_kind, T, n, density=None, merton_params=None):
    if mesh_kind == "equidistant":
        return equidistant_mesh(T, n)
    if mesh_kind == "density":
        if density is None:
            raise ValueError("mesh_kind 'density' needs a density")
        return mesh_from_density(density, n)
    if mesh_kind == "merton-optimal":
        if merton_params is None:
            raise ValueError("mesh_kind 'merton-optimal' needs Merton parameters")
        return merton_optimal_mesh(merton_params, n)
    raise ValueError(f"unknown mesh kind {mesh_kind!r}")


def predicted_constant(mesh_kind, ey, T, density=None, table_size=4097):
    """C_psi for the density behind a mesh kind."""
    t = np.linspace(0.0, T, table_size)
    if isinstance(ey, PilotEstimate):
        t = ey.grid
    if mesh_kind == "equidistant":
        return asymptotic_constant(ey, "equidistant", None if isinstance(ey, PilotEstimate) else t)
    if mesh_kind == "merton-optimal":
        return asymptotic_constant(ey, "noneq-optimal", None if isinstance(ey, PilotEstimate) else t)
    return asymptotic_constant(ey, density, None if isinstance(ey, PilotEstimate) else t)


def loglog_slope(n, e):
    return float(np.polyfit(np.log(np.asarray(n, dtype=float)), np.log(np.asarray(e, dtype=float)), 1)[0])


def convergence_study(model, intensity, method_kind, mesh_kind, n_list, M, reference="merton-exact",
                      rng_master=0, density=None, merton_params=None, expected_y=None,
                      eval_factor=16, threads=1, mode="det", pilot_kwargs=None, eval_grid_size=None):
    """Error estimates across mesh sizes, with the predicted asymptotic constant.

    ``expected_y`` (callable or PilotEstimate) feeds the predicted limit; for
    Merton parameters the closed form is used, otherwise a pilot run.
    Every n reuses the same replication streams and one uniform eval grid
    (``eval_grid_size``, default ``eval_factor * max(n_list)``), so the
    driving noise is shared across n.
    """
    n_list = [int(n) for n in n_list]
    if any(n < 2 for n in n_list) or any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be increasing with entries >= 2")
    if expected_y is None:
        if merton_params is not None:
            expected_y = lambda t: merton_expected_y(merton_params, t)  # noqa: E731
        else:
            expected_y = pilot_expected_y(model, intensity, rng_master=rng_master, **(pilot_kwargs or {}))
    c_psi = predicted_constant(mesh_kind, expected_y, model.T, density)
    rows = []
    eval_size = int(eval_grid_size or eval_factor * max(n_list))
    for n in n_list:
        mesh = _mesh_for(mesh_kind, model.T, n, density, merton_params)
        est = l2_error_mc(model, intensity, method_kind, mesh, M, eval_size, reference,
                          rng_master, threads=threads, mode=mode)
        cost = cost_of(n, model)
        limit = c_psi * math.sqrt(cost / n)
        rows.append(ReportRow(n, cost, est.e_hat, est.stderr, math.sqrt(n) * est.e_hat,
                              math.sqrt(cost) * est.e_hat, limit))
    slope = loglog_slope([r.n for r in rows], [r.e_hat for r in rows]) if len(rows) > 1 else float("nan")
    meta = dict(model=model.name, method=method_kind, mesh=mesh_kind, M=M, reference=reference,
                rng_master=rng_master, eval_grid_size=eval_size)
    return ConvergenceReport(rows, c_psi, slope, meta)


def holder_ratio(model, intensity, t, h_list, M, reference="merton-exact", rng_master=0,
                 chunk=2000, check=True):
    """sqrt(E|X(t+h) - X(t)|^2 / h) for each h, with delta-method stderr."""
    h_list = np.asarray(h_list, dtype=float)
    if np.any(h_list <= 0) or t < 0 or t + h_list.max() > model.T:
        raise ValueError("need positive h with t + h <= T")
    name, factor = parse_reference(reference)
    if name == "self":
        raise ValueError("holder_ratio needs a true reference solution")
    if name == "merton-exact" and model.exact is None:
        raise ValueError("merton-exact reference needs a model with a closed-form solution")
    if check and name == "fine-milstein":
        check_model(model)
    points = np.concatenate([[t], t + h_list])
    grid = np.unique(np.concatenate([[0.0, model.T], points]))
    fine = None
    if name == "fine-milstein":
        steps = int(math.ceil(model.T * factor / h_list.min()))
        fine = Mesh(merge_grid(grid, _eval_grid(model.T, steps), model.T))
        grid = fine.knots
    idx = _index(grid, points)
    s1 = np.zeros(h_list.size)
    s2 = np.zeros(h_list.size)
    for s in range(0, M, chunk):
        w, n, *_ = _stack_paths(grid, intensity, rng_master, range(s, min(s + chunk, M)))
        if fine is None:
            x = model.exact(points, w[:, idx], n[:, idx])
        else:
            xf = milstein_knots(model, grid, np.diff(w, axis=1), np.diff(n, axis=1).astype(float))
            x = xf[:, idx]
        d2 = (x[:, 1:] - x[:, :1]) ** 2
        s1 += d2.sum(axis=0)
        s2 += (d2 ** 2).sum(axis=0)
    mean = s1 / M
    var = np.maximum(s2 / M - mean ** 2, 0.0) * M / (M - 1)
    out = []
    for h, m, v in zip(h_list, mean, var):
        ratio = math.sqrt(m / h)
        se = math.sqrt(v / M) / (2.0 * math.sqrt(m * h)) if m > 0 else 0.0
        out.append((float(h), ratio, se))
    return out


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------

def _fmt(v):
    return repr(float(v)) if not isinstance(v, (int, np.integer)) else str(int(v))


def report_csv_text(report, header=""):
    lines = [header.rstrip("\n")] if header else []
    lines.append(",".join(CSV_COLUMNS))
    for r in report.rows:
        lines.append(",".join(_fmt(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def emit_report(report, prefix, header="", figure=True):
    """Write ``prefix``.csv, a gnuplot data file ``prefix``.dat and a figure.

    The .dat file has two blocks: log n / log e_hat pairs, then n, the
    cost-scaled error and the predicted limit (a horizontal line).
    """
    prefix = str(prefix)
    files = [prefix + ".csv", prefix + ".dat"]
    with open(files[0], "w", newline="") as fh:
        fh.write(report_csv_text(report, header))
    with open(files[1], "w") as fh:
        if header:
            fh.write(header)
        fh.write("# log_n log_e_hat\n")
        for r in report.rows:
            fh.write(f"{math.log(r.n)!r} {math.log(r.e_hat) if r.e_hat > 0 else float('nan')!r}\n")
        fh.write("\n\n# n sqrt_cost_e predicted_limit\n")
        for r in report.rows:
            fh.write(f"{r.n} {r.sqrt_cost_e!r} {r.predicted_limit!r}\n")
    if figure:
        files.append(prefix + ".png")
        render_convergence(report, files[-1])
    return files

