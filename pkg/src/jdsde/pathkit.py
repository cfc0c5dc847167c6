"""Driving-noise simulation, iterated integrals and bridge moments."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ContractError


@dataclass(frozen=True)
class RngStream:
    """Replication-keyed random stream.

    The generator for ``(master_seed, stream_id)`` is a Philox counter-based
    generator keyed by hashing both integers through ``SeedSequence``, so any
    replication can be regenerated on its own, in any order.
    """

    master_seed: int
    stream_id: int = 0

    def generator(self):
        ss = np.random.SeedSequence(entropy=int(self.master_seed) & (2 ** 64 - 1),
                                    spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.Philox(ss))


def _as_generator(rng):
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


@dataclass(frozen=True)
class JumpTimes:
    times: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        if t.size and (np.any(np.diff(t) <= 0) or t[0] <= 0):
            raise ValueError("jump times must be strictly increasing and positive")
        object.__setattr__(self, "times", t)

    def __len__(self):
        return self.times.size

    def count(self, t, left=False):
        """N(t), or N(t-) with ``left=True``; a jump exactly at t counts in N(t)."""
        return np.searchsorted(self.times, t, side="left" if left else "right")


@dataclass(frozen=True)
class GridPath:
    """W and N sampled on ``grid``, with the exact jump times behind N.

    ``w_jumps[k]`` is W at ``jumps.times[k]``; it is simulated jointly with
    the grid values so the exact solution can be evaluated at jump instants.
    """

    grid: np.ndarray
    w: np.ndarray
    n: np.ndarray
    jumps: JumpTimes
    w_jumps: np.ndarray

    def without_jump_times(self):
        """Same grid samples with the jump information dropped."""
        return GridPath(self.grid, self.w, self.n, JumpTimes(np.empty(0)), np.empty(0))


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def poisson_jump_times(intensity, T, rng, method="thinning"):
    """Jump times of the Poisson process on (0, T].

    Thinning draws candidates at rate ``lambda_max`` and keeps each with
    probability lambda(t) / lambda_max.  ``method="inversion"`` maps a unit
    rate process through the inverse compensator and needs ``m_inv``.
    """
    gen = _as_generator(rng)
    if method == "inversion":
        if intensity.m_inv is None:
            raise ValueError("inversion needs an analytic inverse compensator")
        total = float(intensity.m(np.array(T)))
        k = gen.poisson(total)
        u = np.sort(total * (1.0 - gen.random(k)))
        return JumpTimes(np.unique(intensity.m_inv(u)))
    if method != "thinning":
        raise ValueError(f"unknown method {method!r}")
    lmax = float(intensity.lambda_max)
    k = gen.poisson(lmax * T)
    cand = np.sort(T * (1.0 - gen.random(k)))
    accept = gen.random(k)
    lam = intensity.lam(cand)
    if np.any(lam > lmax * (1.0 + 1e-12)):
        raise ContractError("lambda_max is below the intensity at a candidate time")
    return JumpTimes(np.unique(cand[accept * lmax < lam]))


def _check_grid(grid):
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] != 0.0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and start at 0")
    return grid


def wiener_on_grid(grid, rng):
    """W on a sorted grid starting at 0."""
    grid = _check_grid(grid)
    gen = _as_generator(rng)
    dw = gen.standard_normal(grid.size - 1) * np.sqrt(np.diff(grid))
    return np.concatenate([[0.0], np.cumsum(dw)])


def _bridge_fill(base, w_base, extra, z):
    """W at ``extra`` points given W on ``base``, sampled left to right per cell."""
    cell = np.searchsorted(base, extra, side="right") - 1
    first = np.ones(extra.size, dtype=bool)
    first[1:] = cell[1:] != cell[:-1]
    start = np.maximum.accumulate(np.where(first, np.arange(extra.size), 0))
    rank = np.arange(extra.size) - start
    w = np.empty(extra.size)
    rt, rw = base[cell + 1], w_base[cell + 1]
    for r in range(int(rank.max()) + 1 if extra.size else 0):
        sel = np.nonzero(rank == r)[0]
        if r == 0:
            lt, lw = base[cell[sel]], w_base[cell[sel]]
        else:
            lt, lw = extra[sel - 1], w[sel - 1]
        s = extra[sel]
        span = rt[sel] - lt
        mean = lw + (s - lt) / span * (rw[sel] - lw)
        w[sel] = mean + np.sqrt((s - lt) * (rt[sel] - s) / span) * z[sel]
    return w


def levy_wiener(T, levels, rng):
    """W on the dyadic grid k T / 2**levels by midpoint (Levy) construction.

    Normals are consumed level by level, so the values at the dyadic points
    of any coarser level do not depend on ``levels``.
    """
    if levels < 0:
        raise ValueError("levels must be nonnegative")
    gen = _as_generator(rng)
    size = 1 << levels
    z = gen.standard_normal(size)
    w = np.zeros(size + 1)
    w[-1] = np.sqrt(T) * z[0]
    k = 1
    for level in range(1, levels + 1):
        step = size >> level
        mids = np.arange(step, size, 2 * step)
        w[mids] = 0.5 * (w[mids - step] + w[mids + step]) + np.sqrt(0.5 * step * T / size) * z[k:k + mids.size]
        k += mids.size
    return w


def dyadic_grid(T, levels):
    size = 1 << levels
    return np.arange(size + 1) * T / size


def simulate_path(grid, intensity, rng, method="thinning", levels=None):
    """One replication of (W, N) on ``grid``.

    Jump times are drawn first.  W is then drawn on ``grid`` from its
    increments or, with ``levels``, on the dyadic grid of that depth by
    :func:`levy_wiener`; the remaining grid points and the jump times are
    filled in by Brownian-bridge sampling inside the dyadic cells.  With
    ``levels`` fixed or increased, W at shared dyadic points and the jump
    times stay the same whatever else is in ``grid``.
    """
    grid = _check_grid(grid)
    gen = _as_generator(rng)
    T = grid[-1]
    jumps = poisson_jump_times(intensity, T, gen, method=method)
    if levels is None:
        base, w_base = grid, wiener_on_grid(grid, gen)
    else:
        base, w_base = dyadic_grid(T, levels), levy_wiener(T, levels, gen)
    union = np.union1d(grid, jumps.times)
    extra = np.setdiff1d(union, base, assume_unique=True)
    w_extra = _bridge_fill(base, w_base, extra, gen.standard_normal(extra.size))
    times = np.concatenate([base, extra])
    order = np.argsort(times, kind="stable")
    times, w_all = times[order], np.concatenate([w_base, w_extra])[order]
    w = w_all[np.searchsorted(times, grid)]
    w_jumps = w_all[np.searchsorted(times, jumps.times)]
    return GridPath(grid, w, jumps.count(grid), jumps, w_jumps)


def dump_path_csv(path, filename):
    with open(filename, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t", "W", "N"])
        for t, w, n in zip(path.grid, path.w, path.n):
            writer.writerow([repr(float(t)), repr(float(w)), int(n)])


# ---------------------------------------------------------------------------
# Iterated integrals
# ---------------------------------------------------------------------------

def i_ww(delta_w, delta_t):
    """Double Wiener integral over an interval of length delta_t."""
    if np.any(np.asarray(delta_t) <= 0):
        raise ValueError("delta_t must be positive")
    return 0.5 * (delta_w * delta_w - delta_t)


def i_nn(delta_n):
    """Double Poisson integral: number of ordered pairs of distinct jumps."""
    if np.any(np.asarray(delta_n) < 0):
        raise ValueError("delta_n must be nonnegative")
    return (delta_n * delta_n - delta_n) / 2


def cross_sum(delta_n, delta_w):
    """I(N, W) + I(W, N) over an interval."""
    if np.any(np.asarray(delta_n) < 0):
        raise ValueError("delta_n must be nonnegative")
    return delta_n * delta_w


# ---------------------------------------------------------------------------
# Bridges
# ---------------------------------------------------------------------------

def _check_interval(t_i, t_ip1, t):
    if not t_i < t_ip1:
        raise ValueError("interval must have t_i < t_ip1")
    if np.any(np.asarray(t) < t_i) or np.any(np.asarray(t) > t_ip1):
        raise ValueError("t outside [t_i, t_ip1]")


def brownian_bridge_mean(w_i, w_ip1, t_i, t_ip1, t):
    _check_interval(t_i, t_ip1, t)
    return w_i + (w_ip1 - w_i) * (np.asarray(t) - t_i) / (t_ip1 - t_i)


def _bridge_weight(intensity, t_i, t_ip1, t):
    _check_interval(t_i, t_ip1, t)
    total = float(intensity.Lambda(t_ip1, t_i))
    if not total > 0:
        raise ContractError("compensator increment over the interval must be positive")
    return intensity.Lambda(np.asarray(t, dtype=float), t_i) / total


def poisson_bridge_mean(n_i, n_ip1, intensity, t_i, t_ip1, t):
    """E(N(t) | N(t_i), N(t_ip1))."""
    if np.any(np.asarray(n_ip1) < np.asarray(n_i)):
        raise ValueError("counts must be nondecreasing")
    p = _bridge_weight(intensity, t_i, t_ip1, t)
    return n_ip1 * p + n_i * (1.0 - p)


def poisson_bridge_var(n_i, n_ip1, intensity, t_i, t_ip1, t, conditional=True):
    """Variance of N(t) around its bridge mean.

    ``conditional=True`` gives the variance given the endpoint counts;
    otherwise the unconditional mean square of the bridge residual.
    """
    if conditional and np.any(np.asarray(n_ip1) < np.asarray(n_i)):
        raise ValueError("counts must be nondecreasing")
    p = _bridge_weight(intensity, t_i, t_ip1, t)
    if conditional:
        return (n_ip1 - n_i) * p * (1.0 - p)
    return float(intensity.Lambda(t_ip1, t_i)) * p * (1.0 - p)


def poisson_bridge_sample(n_i, n_ip1, intensity, t_i, t_ip1, t, rng):
    """Draw N(t) given the endpoint counts (binomial thinning of the increment)."""
    if np.any(np.asarray(n_ip1) < np.asarray(n_i)):
        raise ValueError("counts must be nondecreasing")
    p = np.clip(_bridge_weight(intensity, t_i, t_ip1, t), 0.0, 1.0)
    gen = _as_generator(rng)
    return n_i + gen.binomial(np.asarray(n_ip1) - np.asarray(n_i), p)
