"""SDE problem definition, coefficient operators and built-in models.

The equation is

    dX(t) = a(t, X(t)) dt + b(t, X(t)) dW(t) + c(t, X(t-)) dN(t),  X(0) = x0,

on [0, T], with W a Wiener process and N an independent Poisson process of
deterministic intensity lambda(t).  All coefficient callables take numpy
arrays and broadcast.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ContractError

Coefficient = Callable[[np.ndarray, np.ndarray], np.ndarray]


def _check_time(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0) or np.any(t > T):
        raise ValueError(f"time outside [0, {T}]: {t}")
    return t


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

def adaptive_simpson(f, a, b, tol=1e-10, max_depth=48):
    """Vectorized adaptive Simpson quadrature of ``f`` over ``[a, b]``.

    ``a`` and ``b`` broadcast against each other; each interval is refined
    independently until the Richardson estimate falls below its share of
    ``tol``.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    shape = a.shape
    lo = a.ravel().copy()
    hi = b.ravel().copy()
    out = np.zeros(lo.size)
    owner = np.arange(lo.size)
    mid = 0.5 * (lo + hi)
    flo, fmid, fhi = f(lo), f(mid), f(hi)
    whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi)
    tols = np.full(lo.size, float(tol))
    for depth in range(max_depth + 1):
        if owner.size == 0:
            break
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        err = left + right - whole
        done = np.abs(err) <= 15.0 * tols
        if depth == max_depth:
            done[:] = True
        np.add.at(out, owner[done], (left + right + err / 15.0)[done])
        keep = ~done
        owner = np.concatenate([owner[keep], owner[keep]])
        tols = np.concatenate([tols[keep], tols[keep]]) / 2.0
        lo, mid, hi = (np.concatenate([lo[keep], mid[keep]]),
                       np.concatenate([lm[keep], rm[keep]]),
                       np.concatenate([mid[keep], hi[keep]]))
        flo, fmid, fhi = (np.concatenate([flo[keep], fmid[keep]]),
                          np.concatenate([flm[keep], frm[keep]]),
                          np.concatenate([fmid[keep], fhi[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
    return out.reshape(shape)


# ---------------------------------------------------------------------------
# Intensity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntensityModel:
    """Deterministic jump intensity with its compensator m(t) = int_0^t lambda.

    Build instances with :meth:`constant`, :meth:`linear` or
    :meth:`from_function`; the latter tabulates m by adaptive Simpson
    quadrature.
    """

    lam: Callable[[np.ndarray], np.ndarray]
    m: Callable[[np.ndarray], np.ndarray]
    lambda_max: float
    m_mode: str = "analytic"
    m_inv: Optional[Callable[[np.ndarray], np.ndarray]] = None
    is_constant: bool = False
    description: str = ""

    def Lambda(self, t, s):
        """Compensator increment m(t) - m(s)."""
        return self.m(t) - self.m(s)

    @classmethod
    def constant(cls, rate):
        rate = float(rate)
        if rate <= 0:
            raise ContractError("intensity must be positive")
        return cls(
            lam=lambda t: np.full(np.shape(t), rate),
            m=lambda t: rate * np.asarray(t, dtype=float),
            lambda_max=rate,
            m_inv=lambda u: np.asarray(u, dtype=float) / rate,
            is_constant=True,
            description=f"constant({rate})",
        )

    @classmethod
    def linear(cls, rate0, slope, T):
        """lambda(t) = rate0 + slope * t on [0, T]."""
        rate0, slope = float(rate0), float(slope)
        if min(rate0, rate0 + slope * T) <= 0:
            raise ContractError("linear intensity must stay positive on [0, T]")

        def m_inv(u):
            u = np.asarray(u, dtype=float)
            if slope == 0.0:
                return u / rate0
            return 2.0 * u / (rate0 + np.sqrt(rate0 * rate0 + 2.0 * slope * u))

        return cls(
            lam=lambda t: rate0 + slope * np.asarray(t, dtype=float),
            m=lambda t: rate0 * np.asarray(t, dtype=float) + 0.5 * slope * np.asarray(t, dtype=float) ** 2,
            lambda_max=max(rate0, rate0 + slope * T),
            m_inv=m_inv,
            is_constant=slope == 0.0,
            description=f"linear({rate0}, {slope})",
        )

    @classmethod
    def from_function(cls, lam, T, lambda_max, m=None, table_size=1025, tol=1e-10,
                      description="custom"):
        """Wrap a pointwise intensity; without ``m`` the compensator is tabulated.

        Table entries are accumulated panel by panel; values between table
        points are completed by a local adaptive Simpson integral.
        """
        if m is not None:
            return cls(lam=lam, m=m, lambda_max=float(lambda_max), m_mode="analytic",
                       description=description)
        grid = np.linspace(0.0, T, table_size)
        panels = adaptive_simpson(lam, grid[:-1], grid[1:], tol=tol / table_size)
        table = np.concatenate([[0.0], np.cumsum(panels)])

        def m_quad(t):
            t = np.asarray(t, dtype=float)
            j = np.clip(np.searchsorted(grid, t, side="right") - 1, 0, table_size - 2)
            return table[j] + adaptive_simpson(lam, grid[j], t, tol=tol / table_size)

        return cls(lam=lam, m=m_quad, lambda_max=float(lambda_max), m_mode="quadrature",
                   description=description)

    def validate(self, T, n_points=257, tol=1e-8):
        """Spot-check positivity, the sup bound and the compensator."""
        t = np.linspace(0.0, T, n_points)
        lam = self.lam(t)
        if np.any(lam <= 0):
            raise ContractError("intensity must be positive on [0, T]")
        if np.any(lam > self.lambda_max * (1 + 1e-12)):
            raise ContractError("lambda_max is below sup lambda on [0, T]")
        m = self.m(t)
        if abs(float(self.m(np.array(0.0)))) > tol or np.any(np.diff(m) < -tol):
            raise ContractError("compensator must start at 0 and be nondecreasing")
        ref = np.concatenate([[0.0], np.cumsum(adaptive_simpson(self.lam, t[:-1], t[1:], tol=1e-12))])
        if np.max(np.abs(ref - m)) > tol * max(1.0, abs(ref[-1])):
            raise ContractError("compensator disagrees with the integral of lambda")


# ---------------------------------------------------------------------------
# SDE model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SdeModel:
    """Scalar jump-diffusion with explicit y-derivatives of b and c.

    ``b_zero``/``c_zero`` declare b == 0 or c == 0 (they drive the cost
    model; nothing is inferred).  ``exact`` optionally maps (t, W(t), N(t))
    to the true solution for models that have one.
    """

    a: Coefficient
    b: Coefficient
    c: Coefficient
    db_dy: Coefficient
    dc_dy: Coefficient
    x0: float
    T: float
    name: str = "custom"
    b_zero: bool = False
    c_zero: bool = False
    state_free_noise: bool = False
    exact: Optional[Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("horizon T must be positive")


def _select(model, which):
    if which == "b":
        return model.b, model.db_dy
    if which == "c":
        return model.c, model.dc_dy
    raise ValueError(f"coefficient selector must be 'b' or 'c', got {which!r}")


def l1_apply(model, which, t, y):
    """L_1 f = b * df/dy for f in {b, c}."""
    t = _check_time(t, model.T)
    _, df = _select(model, which)
    return model.b(t, y) * df(t, y)


def lm1_apply(model, which, t, y):
    """L_{-1} f = f(t, y + c(t, y)) - f(t, y) for f in {b, c}."""
    t = _check_time(t, model.T)
    f, _ = _select(model, which)
    return f(t, y + model.c(t, y)) - f(t, y)


@dataclass(frozen=True)
class CheckReport:
    max_violation: float
    passed: bool


def default_sample_grid(T, n_t=21, n_y=41, y_range=(-5.0, 5.0)):
    tt, yy = np.meshgrid(np.linspace(0.0, T, n_t), np.linspace(*y_range, n_y), indexing="ij")
    return np.column_stack([tt.ravel(), yy.ravel()])


def check_commutativity(model, sample_grid=None, tol=1e-8):
    """Largest |L_{-1} b - L_1 c| over sampled (t, y) points."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    grid = default_sample_grid(model.T) if sample_grid is None else np.asarray(sample_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("sample grid is empty")
    grid = grid.reshape(-1, 2)
    t, y = grid[:, 0], grid[:, 1]
    gap = np.abs(lm1_apply(model, "b", t, y) - l1_apply(model, "c", t, y))
    worst = float(np.max(gap))
    return CheckReport(worst, worst <= tol)


def check_derivatives(model, tol=1e-6, n_points=200, seed=0, y_range=(-5.0, 5.0)):
    """Compare db_dy, dc_dy with centered differences on a random grid.

    Passes when |derivative - difference quotient| <= tol * (1 + |y|).
    """
    rng = np.random.default_rng(seed)
    t = rng.uniform(0.0, model.T, n_points)
    y = rng.uniform(*y_range, n_points)
    h = 1e-5 * (1.0 + np.abs(y))
    worst = 0.0
    for f, df in ((model.b, model.db_dy), (model.c, model.dc_dy)):
        fd = (f(t, y + h) - f(t, y - h)) / (2 * h)
        worst = max(worst, float(np.max(np.abs(df(t, y) - fd) / (1.0 + np.abs(y)))))
    return CheckReport(worst, worst <= tol)


def local_y(model, intensity, t, x):
    """Local Hoelder process |b(t,x)|^2 + lambda(t) |c(t,x)|^2."""
    t = _check_time(t, model.T)
    return model.b(t, x) ** 2 + intensity.lam(t) * model.c(t, x) ** 2


# ---------------------------------------------------------------------------
# Merton model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MertonParams:
    """dX = r X dt + sigma X dW + X(t-) dN with constant intensity ``lam``."""

    r: float
    sigma: float
    lam: float
    x0: float = 1.0
    T: float = 1.0
    gamma: float = field(init=False)

    def __post_init__(self):
        if not (self.sigma > 0 and self.lam > 0 and self.x0 > 0 and self.T > 0):
            raise ValueError("Merton parameters need sigma, lam, x0, T > 0")
        object.__setattr__(self, "gamma", self.r + 0.5 * self.sigma ** 2 + 1.5 * self.lam)

    @classmethod
    def with_gamma(cls, gamma, sigma, lam, x0=1.0, T=1.0):
        """Pick the drift so that r + sigma^2/2 + 3 lam/2 equals ``gamma``."""
        return cls(r=gamma - 0.5 * sigma ** 2 - 1.5 * lam, sigma=sigma, lam=lam, x0=x0, T=T)


def merton_exact(params, w_t, n_t, t):
    """x0 exp((r - sigma^2/2) t + sigma W(t)) 2^N(t)."""
    t = _check_time(t, params.T)
    n_t = np.asarray(n_t)
    if np.any(n_t < 0):
        raise ValueError("jump count must be nonnegative")
    return (params.x0 * np.exp((params.r - 0.5 * params.sigma ** 2) * t + params.sigma * np.asarray(w_t))
            * np.exp2(n_t))


def _zero(t, y):
    return np.zeros(np.broadcast(np.asarray(t), np.asarray(y)).shape)


def merton(params):
    """Merton model and its constant intensity."""
    r, s = params.r, params.sigma
    model = SdeModel(
        a=lambda t, y: r * np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        b=lambda t, y: s * np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        c=lambda t, y: np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        db_dy=lambda t, y: np.full(np.broadcast(np.asarray(t), np.asarray(y)).shape, s),
        dc_dy=lambda t, y: np.ones(np.broadcast(np.asarray(t), np.asarray(y)).shape),
        x0=params.x0,
        T=params.T,
        name="merton",
        exact=lambda t, w, n: merton_exact(params, w, n, t),
        params={"r": r, "sigma": s, "lam": params.lam, "x0": params.x0, "T": params.T},
    )
    return model, IntensityModel.constant(params.lam)


def pure_diffusion(r=0.05, sigma=0.5, x0=1.0, T=1.0):
    """Geometric Brownian motion (c == 0); exact solution included."""
    model = SdeModel(
        a=lambda t, y: r * np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        b=lambda t, y: sigma * np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        c=_zero,
        db_dy=lambda t, y: np.full(np.broadcast(np.asarray(t), np.asarray(y)).shape, sigma),
        dc_dy=_zero,
        x0=x0,
        T=T,
        name="pure-diffusion",
        c_zero=True,
        exact=lambda t, w, n: x0 * np.exp((r - 0.5 * sigma ** 2) * np.asarray(t) + sigma * np.asarray(w)),
        params={"r": r, "sigma": sigma, "x0": x0, "T": T},
    )
    return model


def pure_jump_additive(kappa=1.0, c0=0.5, c1=0.0, x0=1.0, T=1.0):
    """dX = -kappa X dt + (c0 + c1 t) dN, so b == 0 and c = c(t)."""
    model = SdeModel(
        a=lambda t, y: -kappa * np.asarray(y, dtype=float) + 0.0 * np.asarray(t),
        b=_zero,
        c=lambda t, y: c0 + c1 * np.asarray(t, dtype=float) + 0.0 * np.asarray(y),
        db_dy=_zero,
        dc_dy=_zero,
        x0=x0,
        T=T,
        name="pure-jump-additive",
        b_zero=True,
        state_free_noise=True,
        params={"kappa": kappa, "c0": c0, "c1": c1, "x0": x0, "T": T},
    )
    return model


def polynomial(a=(0.0, 0.0, 0.0), b=(0.0, 0.0, 0.0), c=(0.0, 0.0, 0.0), x0=1.0, T=1.0):
    """Coefficients f(t, y) = f0 + f1 * y + f2 * t for f in {a, b, c}.

    Jump commutativity holds iff b1 c0 == c1 b0 and b1 c2 == c1 b2; use
    :func:`check_commutativity` rather than relying on it.
    """
    def lin(p):
        p0, p1, p2 = (float(v) for v in p)
        return lambda t, y: p0 + p1 * np.asarray(y, dtype=float) + p2 * np.asarray(t, dtype=float)

    def slope(p):
        return lambda t, y: np.full(np.broadcast(np.asarray(t), np.asarray(y)).shape, float(p[1]))

    b_zero = all(v == 0 for v in b)
    c_zero = all(v == 0 for v in c)
    return SdeModel(
        a=lin(a), b=lin(b), c=lin(c), db_dy=slope(b), dc_dy=slope(c),
        x0=x0, T=T, name="polynomial", b_zero=b_zero, c_zero=c_zero,
        state_free_noise=b[1] == 0 and c[1] == 0,
        params={"a": tuple(a), "b": tuple(b), "c": tuple(c), "x0": x0, "T": T},
    )
