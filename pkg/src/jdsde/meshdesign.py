"""Sampling meshes generated by densities, and the optimal density.

A mesh of size n generated by a density psi on [0, T] has knots at the
quantiles i/n of psi.  The optimal density is proportional to the square
root of E|b(t, X(t))|^2 + lambda(t) E|c(t, X(t))|^2.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DensityError, NumericalError
from .model import MertonParams
from .pathkit import RngStream, simulate_path
from .scheme import Mesh, check_model, milstein_knots

PILOT_STREAM_OFFSET = 1 << 40

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _gauss_legendre(f, a, b):
    """16-point Gauss-Legendre integral of f over [a, b] (arrays)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    half = 0.5 * (b - a)
    x = (0.5 * (a + b))[..., None] + half[..., None] * _GL_NODES
    return half * (f(x) @ _GL_WEIGHTS)


def _check_values(values):
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise DensityError("density must be finite and nonnegative")
    if np.any((values[:-1] == 0) & (values[1:] == 0)):
        raise DensityError("density vanishes on a whole subinterval")
    return values


@dataclass(frozen=True)
class Density:
    """Probability density on [0, T], tabulated or backed by a callable.

    Tabulated densities are piecewise linear between ``grid`` points.  For a
    callable the table only brackets quantiles; values and integrals inside a
    panel come from the callable itself.
    """

    grid: np.ndarray
    values: np.ndarray
    cumulative: np.ndarray
    func: Optional[Callable] = None
    scale: float = 1.0
    stderr: Optional[np.ndarray] = None

    @property
    def T(self):
        return float(self.grid[-1])

    @classmethod
    def from_table(cls, grid, values, stderr=None):
        grid = np.asarray(grid, dtype=float)
        values = _check_values(values)
        if grid.shape != values.shape or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
            raise ValueError("density table needs a strictly increasing grid from 0")
        panels = 0.5 * np.diff(grid) * (values[:-1] + values[1:])
        total = panels.sum()
        if not total > 0:
            raise DensityError("density has zero mass")
        cum = np.concatenate([[0.0], np.cumsum(panels)]) / total
        cum[-1] = 1.0
        se = None if stderr is None else np.asarray(stderr, dtype=float) / total
        return cls(grid, values / total, cum, None, 1.0, se)

    @classmethod
    def from_function(cls, f, T, table_size=1025):
        grid = np.linspace(0.0, T, table_size)
        values = _check_values(f(grid))
        panels = _gauss_legendre(f, grid[:-1], grid[1:])
        total = panels.sum()
        if not total > 0:
            raise DensityError("density has zero mass")
        cum = np.concatenate([[0.0], np.cumsum(panels)]) / total
        cum[-1] = 1.0
        return cls(grid, values / total, cum, f, 1.0 / total, None)

    @classmethod
    def uniform(cls, T):
        return cls.from_table(np.array([0.0, T]), np.array([1.0, 1.0]))

    def _panel(self, t):
        return np.clip(np.searchsorted(self.grid, t, side="right") - 1, 0, self.grid.size - 2)

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        if self.func is not None:
            return self.scale * self.func(t)
        return np.interp(t, self.grid, self.values)

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        j = self._panel(t)
        g0 = self.grid[j]
        if self.func is not None:
            return self.cumulative[j] + self.scale * _gauss_legendre(self.func, g0, t)
        d = t - g0
        h = self.grid[j + 1] - g0
        v0, v1 = self.values[j], self.values[j + 1]
        return self.cumulative[j] + v0 * d + (v1 - v0) * d * d / (2.0 * h)

    def ppf(self, u, tol=1e-12, max_iter=100):
        """Quantiles by bracketing on the table, then safeguarded Newton."""
        u = np.asarray(u, dtype=float)
        cum = self.cumulative
        j = np.clip(np.searchsorted(cum, u, side="right") - 1, 0, cum.size - 2)
        lo, hi = self.grid[j].copy(), self.grid[j + 1].copy()
        width = cum[j + 1] - cum[j]
        frac = np.divide(u - cum[j], width, out=np.zeros_like(u), where=width > 0)
        x = lo + frac * (hi - lo)
        for _ in range(max_iter):
            F = self.cdf(x) - u
            if np.all(np.abs(F) <= 0.01 * tol):
                break
            lo = np.where(F < 0, x, lo)
            hi = np.where(F > 0, x, hi)
            p = self.pdf(x)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = x - F / p
            bad = ~np.isfinite(step) | (step <= lo) | (step >= hi)
            x = np.where(F == 0, x, np.where(bad, 0.5 * (lo + hi), step))
        return x

    def to_csv(self, filename, header=""):
        se = self.stderr if self.stderr is not None else np.zeros_like(self.values)
        _write_table(filename, self.grid, self.values, se, header)


def _write_table(filename, t, value, stderr, header=""):
    with open(filename, "w", newline="") as fh:
        if header:
            fh.write(header)
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value", "stderr"])
        for row in zip(t, value, stderr):
            writer.writerow([repr(float(v)) for v in row])


def _read_table(filename):
    with open(filename) as fh:
        rows = [line for line in fh if not line.startswith("#")]
    reader = csv.DictReader(rows)
    data = [(float(r["t"]), float(r["value"]), float(r["stderr"])) for r in reader]
    return tuple(np.array(col) for col in zip(*data))


# ---------------------------------------------------------------------------
# Meshes
# ---------------------------------------------------------------------------

def equidistant_mesh(T, n):
    if n < 1:
        raise ValueError("n must be at least 1")
    return Mesh(np.arange(n + 1) * T / n)


def mesh_from_density(density, n, tol=1e-12):
    """Knots t_i with int_0^{t_i} psi = i / n."""
    if n < 1:
        raise ValueError("n must be at least 1")
    u = np.arange(n + 1) / n
    knots = density.ppf(u, tol=tol)
    knots[0], knots[-1] = 0.0, density.T
    if np.max(np.abs(density.cdf(knots) - u)) > tol:
        raise NumericalError("quantile inversion did not reach the requested tolerance")
    return Mesh(knots)


# ---------------------------------------------------------------------------
# Pilot estimation of E Y(t)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PilotEstimate:
    grid: np.ndarray
    ey_hat: np.ndarray
    stderr: np.ndarray
    M_pilot: int

    def to_csv(self, filename, header=""):
        _write_table(filename, self.grid, self.ey_hat, self.stderr, header)

    @classmethod
    def from_csv(cls, filename, M_pilot=0):
        t, value, se = _read_table(filename)
        return cls(t, value, se, M_pilot)


def pilot_expected_y(model, intensity, pilot_grid_size=512, M_pilot=2000, rng_master=0, check=True):
    """Monte-Carlo estimate of E Y(t) from Milstein paths on a uniform grid."""
    if pilot_grid_size < 2 or M_pilot < 100:
        raise ValueError("pilot needs pilot_grid_size >= 2 and M_pilot >= 100")
    if check:
        check_model(model)
    grid = equidistant_mesh(model.T, pilot_grid_size).knots
    dw = np.empty((M_pilot, pilot_grid_size))
    dn = np.empty((M_pilot, pilot_grid_size))
    for r in range(M_pilot):
        path = simulate_path(grid, intensity, RngStream(rng_master, PILOT_STREAM_OFFSET + r))
        dw[r] = np.diff(path.w)
        dn[r] = np.diff(path.n)
    x = milstein_knots(model, grid, dw, dn)
    y = model.b(grid, x) ** 2 + intensity.lam(grid) * model.c(grid, x) ** 2
    ey = y.mean(axis=0)
    se = y.std(axis=0, ddof=1) / np.sqrt(M_pilot)
    ey[0] = float(model.b(0.0, model.x0) ** 2 + intensity.lam(np.array(0.0)) * model.c(0.0, model.x0) ** 2)
    se[0] = 0.0
    return PilotEstimate(grid, ey, se, M_pilot)


def optimal_density(pilot, floor_eps=1e-6):
    """Density proportional to sqrt(E Y(t)), floored at floor_eps * max E Y."""
    if floor_eps < 0:
        raise ValueError("floor_eps must be nonnegative")
    ey = np.asarray(pilot.ey_hat, dtype=float)
    top = float(np.max(ey)) if ey.size else 0.0
    if not top > 0:
        raise DensityError("expected local Hoelder process vanishes; no optimal density")
    floored = np.maximum(ey, floor_eps * top)
    root = np.sqrt(floored)
    se = np.asarray(pilot.stderr, dtype=float) / (2.0 * root)
    return Density.from_table(pilot.grid, root, stderr=se)


def density_from_expected_y(ey, T, table_size=1025):
    """Optimal density for an analytically known E Y(t)."""
    return Density.from_function(lambda t: np.sqrt(ey(t)), T, table_size)


# ---------------------------------------------------------------------------
# Merton closed forms
# ---------------------------------------------------------------------------

def merton_expected_y(params, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > params.T):
        raise ValueError("time outside [0, T]")
    return (params.sigma ** 2 + params.lam) * params.x0 ** 2 * np.exp(2.0 * params.gamma * t)


def merton_optimal_mesh(params: MertonParams, n):
    """Closed-form optimal knots; equidistant when gamma * T is negligible."""
    if n < 1:
        raise ValueError("n must be at least 1")
    g, T = params.gamma, params.T
    if abs(g) * T <= 1e-8:
        return equidistant_mesh(T, n)
    u = np.arange(n + 1) / n
    knots = np.log1p(u * np.expm1(g * T)) / g
    knots[0], knots[-1] = 0.0, T
    return Mesh(knots)
