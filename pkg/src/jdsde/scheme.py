"""Milstein scheme under jump commutativity and its global interpolants.

Arrays of knot values may carry leading batch dimensions (one row per
replication); every routine here is vectorized over them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError
from .model import check_commutativity
from .pathkit import i_nn, i_ww

KINDS = ("conditional", "linear")


@dataclass(frozen=True)
class Mesh:
    knots: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.knots, dtype=float)
        if k.ndim != 1 or k.size < 2 or k[0] != 0.0:
            raise ValueError("mesh needs at least two knots starting at 0")
        if np.any(np.diff(k) < 1e-14 * k[-1]):
            raise ValueError("mesh knots must be strictly increasing (degenerate interval)")
        k.setflags(write=False)
        object.__setattr__(self, "knots", k)

    @property
    def n(self):
        return self.knots.size - 1

    @property
    def T(self):
        return float(self.knots[-1])

    def refine(self, factor):
        """Split every interval into ``factor`` equal pieces."""
        k = self.knots
        frac = np.arange(factor) / factor
        fine = (k[:-1, None] + np.diff(k)[:, None] * frac[None, :]).ravel()
        return Mesh(np.concatenate([fine, k[-1:]]))


def coefficients(model, t, x):
    """Scheme coefficients at U_i = (t_i, x_i); ``t`` broadcasts against ``x``."""
    b = model.b(t, x)
    c = model.c(t, x)
    return {
        "a": model.a(t, x),
        "b": b,
        "c": c,
        "l1b": b * model.db_dy(t, x),
        "l1c": b * model.dc_dy(t, x),
        "lm1c": model.c(t, x + c) - c,
    }


def milstein_step(model, t_i, t_ip1, x_i, dw, dn, iww, inn):
    """One Milstein step; the cross integrals enter only through dn * dw."""
    if not np.all(np.asarray(t_ip1) > np.asarray(t_i)):
        raise ValueError("step needs t_i < t_ip1")
    dt = t_ip1 - t_i
    b = model.b(t_i, x_i)
    c = model.c(t_i, x_i)
    return (x_i + model.a(t_i, x_i) * dt + b * dw + c * dn
            + b * model.db_dy(t_i, x_i) * iww
            + (model.c(t_i, x_i + c) - c) * inn
            + b * model.dc_dy(t_i, x_i) * dn * dw)


def milstein_knots(model, knots, dw, dn):
    """Iterate the step over a mesh; ``dw``, ``dn`` have shape (..., n)."""
    knots = np.asarray(knots, dtype=float)
    dt = np.diff(knots)
    x = np.empty(dw.shape[:-1] + (knots.size,))
    x[..., 0] = model.x0
    for i in range(dt.size):
        x[..., i + 1] = milstein_step(model, knots[i], knots[i + 1], x[..., i], dw[..., i], dn[..., i],
                                      i_ww(dw[..., i], dt[i]), i_nn(dn[..., i]))
    return x


def _knot_index(mesh, grid):
    idx = np.searchsorted(grid, mesh.knots)
    idx = np.minimum(idx, grid.size - 1)
    if np.any(grid[idx] != mesh.knots):
        raise ValueError("mesh knots are not contained in the path grid")
    return idx


def _increments(mesh, path_grid, w, n):
    idx = _knot_index(mesh, path_grid)
    wk = w[..., idx]
    nk = n[..., idx]
    return np.diff(wk, axis=-1), np.diff(nk, axis=-1).astype(float)


def check_model(model, tol=1e-8):
    report = check_commutativity(model, tol=tol)
    if not report.passed:
        raise ContractError(f"jump commutativity violated (max gap {report.max_violation:.3g})")


def run_milstein(model, mesh, path, check=True):
    """Milstein knot values on ``mesh`` from the samples of ``path``.

    Only W and N at the mesh knots are read.
    """
    if check:
        check_model(model)
    dw, dn = _increments(mesh, path.grid, path.w, path.n)
    return milstein_knots(model, mesh.knots, dw, dn)


@dataclass(frozen=True)
class ApproxTrajectory:
    """Global approximation built from Milstein knot values.

    ``coef`` maps names to arrays of shape (..., n): the scheme coefficients
    at U_i together with dw, dn, iww, inn of each interval.  ``m_knots`` is
    the compensator at the knots (conditional kind only).
    """

    mesh: Mesh
    knot_values: np.ndarray
    kind: str
    coef: dict
    intensity: Optional[object] = None
    m_knots: Optional[np.ndarray] = None

    def _locate(self, t):
        k = self.mesh.knots
        t = np.asarray(t, dtype=float)
        if np.any(t < 0) or np.any(t > k[-1]):
            raise ValueError("evaluation time outside [0, T]")
        i = np.clip(np.searchsorted(k, t, side="right") - 1, 0, self.mesh.n - 1)
        return t, i

    def _weights(self, t, i):
        k = self.mesh.knots
        s = (t - k[i]) / (k[i + 1] - k[i])
        if self.kind == "linear" or self.intensity.is_constant:
            return s, s
        mt = self.intensity.m(t)
        ell = (mt - self.m_knots[i]) / (self.m_knots[i + 1] - self.m_knots[i])
        return s, ell

    def _combine(self, g, t, i, s, ell, x_i, x_ip1):
        if self.kind == "linear":
            val = x_i * (1.0 - s) + x_ip1 * s
        else:
            k = self.mesh.knots
            val = (x_i + g["a"] * (t - k[i]) + g["b"] * g["dw"] * s + g["c"] * g["dn"] * ell
                   + g["l1b"] * g["iww"] * s * s + g["l1c"] * g["dn"] * g["dw"] * ell * s
                   + g["lm1c"] * g["inn"] * ell * ell)
        # knots reproduce the scheme values exactly
        val = np.where(s == 0.0, x_i, val)
        return np.where(t == self.mesh.knots[-1], x_ip1, val)

    def eval(self, t):
        """Values at times ``t`` (1-d), shape (..., len(t))."""
        t, i = self._locate(np.atleast_1d(t))
        s, ell = self._weights(t, i)
        g = {name: arr[..., i] for name, arr in self.coef.items()} if self.kind == "conditional" else None
        return self._combine(g, t, i, s, ell, self.knot_values[..., i], self.knot_values[..., i + 1])

    def eval_rows(self, rows, t):
        """Values for batch rows ``rows`` at row-specific times ``t``."""
        t, i = self._locate(t)
        s, ell = self._weights(t, i)
        kv = self.knot_values.reshape(-1, self.knot_values.shape[-1])
        g = None
        if self.kind == "conditional":
            g = {name: arr.reshape(-1, arr.shape[-1])[rows, i] for name, arr in self.coef.items()}
        return self._combine(g, t, i, s, ell, kv[rows, i], kv[rows, i + 1])


def trajectory_from_increments(kind, model, mesh, dw, dn, intensity=None):
    """Build an :class:`ApproxTrajectory` from knot increments (batched)."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if kind == "conditional" and intensity is None:
        raise ValueError("the conditional kind needs the intensity")
    x = milstein_knots(model, mesh.knots, dw, dn)
    coef = coefficients(model, mesh.knots[:-1], x[..., :-1])
    coef.update(dw=dw, dn=dn, iww=i_ww(dw, np.diff(mesh.knots)), inn=i_nn(dn))
    m_knots = None
    if kind == "conditional":
        m_knots = intensity.m(mesh.knots)
        if np.any(np.diff(m_knots) <= 0):
            raise ContractError("compensator must increase strictly across each mesh interval")
    return ApproxTrajectory(mesh, x, kind, coef, intensity, m_knots)


def build_trajectory(kind, model, mesh, path, intensity=None, check=True):
    """Conditional-Milstein or piecewise-linear approximation along one path."""
    if check:
        check_model(model)
    dw, dn = _increments(mesh, path.grid, path.w, path.n)
    return trajectory_from_increments(kind, model, mesh, dw, dn, intensity)


def evaluate(traj, t):
    """Evaluate a trajectory at ``t``; scalar in, scalar out for a single path."""
    out = traj.eval(t)
    return out[..., 0] if np.ndim(t) == 0 else out


def continuous_milstein(model, knots, knot_values, w_knots, n_knots, t, w_t, n_t, rows=None, left=False):
    """Continuous Milstein process between knots, at arbitrary times.

    ``w_t``, ``n_t`` are the driving values at ``t``.  With ``left=True`` a
    time equal to a knot is assigned to the interval ending there, which is
    what a left limit N(t-) requires.  ``rows`` selects batch rows for
    row-specific times; otherwise ``t`` is shared by all rows.
    """
    knots = np.asarray(knots, dtype=float)
    t = np.asarray(t, dtype=float)
    n = knots.size - 1
    i = np.searchsorted(knots, t, side="left" if left else "right") - 1
    i = np.clip(i, 0, n - 1)
    if rows is None:
        x_i, w_i, n_i = knot_values[..., i], w_knots[..., i], n_knots[..., i]
    else:
        x_i, w_i, n_i = knot_values[rows, i], w_knots[rows, i], n_knots[rows, i]
    ti = knots[i]
    dt = t - ti
    dw = w_t - w_i
    dn = (n_t - n_i).astype(float)
    g = coefficients(model, ti, x_i)
    iww = 0.5 * (dw * dw - dt)
    return (x_i + g["a"] * dt + g["b"] * dw + g["c"] * dn + g["l1b"] * iww
            + g["lm1c"] * i_nn(dn) + g["l1c"] * dn * dw)


def dump_trajectory_csv(traj, times, filename):
    values = traj.eval(times)
    with open(filename, "w") as fh:
        fh.write("t,x_hat\n")
        for t, v in zip(times, values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")
