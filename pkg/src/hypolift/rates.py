"""Explicit hypocoercive rate formulas.

Covers the abstract time-averaged rate ``2 P_v / (1 + (C_1T + C_0T sqrt(R P_v))^2)``,
its optimization over the averaging window, the Langevin-scaling constants, and
the fully explicit constants and rate bounds for adaptive Langevin dynamics.
All integer constants are used exactly as derived (no tightening).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import InvalidParameter, NonUnimodalWarning
from .model import _positive


@dataclass(frozen=True)
class RateInputs:
    P_v: float
    R: float
    C0T: float
    C1T: float
    T: float

    def __post_init__(self):
        for name in ("P_v", "R", "T"):
            _positive(name, getattr(self, name))
        for name in ("C0T", "C1T"):
            v = getattr(self, name)
            if not np.isfinite(v) or v < 0:
                raise InvalidParameter(f"{name} must be finite and >= 0, got {v!r}")


def theorem_rate(inputs: RateInputs, convention: str = "energy") -> tuple:
    """Rate ``lambda_T`` and prefactor ``C`` of the time-averaged energy argument.

    ``convention="energy"`` gives ``C = exp(T lambda)``, the prefactor of the
    squared-norm bound; ``"norm"`` gives the norm-level constant ``exp(T lambda / 2)`` obtained from
    ``||f_t||^2 <= exp(-lambda (t - T)) ||f_0||^2``.
    """
    p = inputs
    lam = 2 * p.P_v / (1 + (p.C1T + p.C0T * np.sqrt(p.R * p.P_v)) ** 2)
    if convention == "energy":
        C = np.exp(p.T * lam)
    elif convention == "norm":
        C = np.exp(p.T * lam / 2)
    else:
        raise InvalidParameter(f"unknown convention {convention!r}")
    return float(lam), float(C)


def langevin_remark_constants(T: float, P_x: float, C0: float = 1.0, C1: float = 1.0) -> tuple:
    """``(C_0 (T + P_x^{-1/2}), C_1 (1 + 1/(T sqrt(P_x))))`` for convex potentials.

    ``C0`` and ``C1`` are absolute constants not made explicit; supply your own.
    """
    r = 1.0 / np.sqrt(_positive("P_x", P_x))
    T = _positive("T", T)
    return C0 * (T + r), C1 * (1 + r / T)


_INVPHI = (np.sqrt(5.0) - 1) / 2


def _golden(f, a: float, b: float, rtol: float = 1e-8) -> float:
    """Golden-section minimizer of ``f`` on ``[a, b]``."""
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while abs(b - a) > rtol * max(1.0, abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def minimize_over_T(
    C0T_fn: Callable[[float], float],
    C1T_fn: Callable[[float], float],
    P_v: float,
    R: float,
    T_range: tuple = (1e-3, 1e3),
    n_grid: int = 200,
) -> tuple:
    """Minimize ``C1T(T) + C0T(T) sqrt(R P_v)`` over ``T``; returns ``(T_star, lambda_T_star)``.

    A log-spaced pre-scan picks the best grid point (warning on several local
    minima), then golden-section search refines it to relative tolerance 1e-8.
    A flat objective returns the midpoint of ``T_range``.
    """
    lo, hi = T_range
    if not 0 < lo < hi:
        raise InvalidParameter(f"bad T_range {T_range!r}")
    k = np.sqrt(R * P_v)

    def obj(T):
        return C1T_fn(T) + C0T_fn(T) * k

    grid = np.geomspace(lo, hi, n_grid)
    vals = np.array([obj(T) for T in grid])
    spread = vals.max() - vals.min()
    if spread <= 1e-12 * max(1.0, abs(vals.min())):
        T_star = 0.5 * (lo + hi)
    else:
        inner = (vals[1:-1] < vals[:-2]) & (vals[1:-1] <= vals[2:])
        if inner.sum() > 1:
            warnings.warn(f"{inner.sum()} local minima found in T pre-scan", NonUnimodalWarning)
        i = int(np.argmin(vals))
        lo_i, hi_i = max(i - 1, 0), min(i + 1, n_grid - 1)
        T_star = float(np.exp(_golden(lambda u: obj(np.exp(u)), np.log(grid[lo_i]), np.log(grid[hi_i]))))
    lam, _ = theorem_rate(RateInputs(P_v, R, C0T_fn(T_star), C1T_fn(T_star), T_star))
    return T_star, lam


# ---------------------------------------------------------------------------
# Adaptive Langevin
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ALDConfig:
    """Inputs of the adaptive Langevin rate: potential constants, ``eps``, ``gamma`` and window ``T``.

    ``T=None`` means the window is chosen as ``T^2 = pi^2 / P_x``.
    """

    P_q: float = 1.0
    d: int = 1
    eps: float = 1.0
    gamma: float = 1.0
    M: float = 0.0
    L: float = 1.0
    T: Optional[float] = None

    def __post_init__(self):
        for name in ("P_q", "d", "eps", "gamma", "L"):
            _positive(name, getattr(self, name))
        if not np.isfinite(self.M) or self.M < 0:
            raise InvalidParameter(f"M must be >= 0, got {self.M!r}")
        if self.T is not None:
            _positive("T", self.T)

    @property
    def P_x(self) -> float:
        return min(self.P_q, 2 * self.d / self.eps**2)

    def window(self) -> float:
        return self.T if self.T is not None else np.pi / np.sqrt(self.P_x)


@dataclass(frozen=True)
class ALDConstants:
    P_x: float
    c0: float
    c1: float
    C0T_sq: float
    C1T_sq: float
    T: float

    def rate_inputs(self, gamma: float) -> RateInputs:
        return RateInputs(gamma, gamma, np.sqrt(self.C0T_sq), np.sqrt(self.C1T_sq), self.T)


def ald_constants(cfg: ALDConfig) -> ALDConstants:
    """Divergence-equation constants ``c0, c1`` and the squared window constants."""
    P_x = cfg.P_x
    T = cfg.window()
    T2 = T * T
    c0 = 2 * T2 + 43 / P_x
    c1 = 290 + 991 / T2 / P_x + 43 * max(1 / P_x, T2 / np.pi**2) * cfg.M
    C0T_sq = 2 * c0
    C1T_sq = 314 * (c1 + (1 / cfg.eps**2 + cfg.L) * c0)
    return ALDConstants(P_x, c0, c1, C0T_sq, C1T_sq, T)


def ald_theorem_rate(cfg: ALDConfig) -> float:
    """Abstract rate evaluated with the adaptive Langevin constants (``R = P_v = gamma``)."""
    return theorem_rate(ald_constants(cfg).rate_inputs(cfg.gamma))[0]


def ald_rate_bound(cfg: ALDConfig) -> float:
    """Simplified adaptive Langevin rate with ``T^2 = pi^2 / P_x``, with integer constants.

    ``2 gamma / (61388 + (1/P_q + eps^2/(2d)) (378 gamma^2 + 6751 M + 9891 (1/eps^2 + L)))``

    The simplification goes through ``1 + (a + b)^2 <= 1 + 3a^2/2 + 3b^2``, but
    these integer constants multiply ``C_1T^2`` by ``1/2`` where the inequality
    requires ``3/2``. The value can therefore exceed :func:`ald_theorem_rate` (by up to
    about 2.3x); :func:`ald_rate_bound_rederived` is the version that is a true
    lower bound.
    """
    g, e2 = cfg.gamma, cfg.eps**2
    denom = 61388 + (1 / cfg.P_q + e2 / (2 * cfg.d)) * (378 * g * g + 6751 * cfg.M + 9891 * (1 / e2 + cfg.L))
    return 2 * g / denom


def ald_rate_bound_rederived(cfg: ALDConfig) -> float:
    """The same simplification carried out with the factor ``3/2`` on ``C_1T^2``.

    ``2 gamma / (184162 + (1/P_q + eps^2/(2d)) (378 gamma^2 + 20253 M + 29673 (1/eps^2 + L)))``,
    never larger than :func:`ald_theorem_rate` at ``T^2 = pi^2 / P_x``.
    """
    g, e2 = cfg.gamma, cfg.eps**2
    denom = 1 + 471 * 391 + (1 / cfg.P_q + e2 / (2 * cfg.d)) * (
        378 * g * g + 471 * 43 * cfg.M + 471 * 63 * (1 / e2 + cfg.L)
    )
    return 2 * g / denom


@dataclass(frozen=True)
class ALDOptimum:
    eps_sq: float
    gamma: float
    lambda_closed: float

    def config(self, P_q, d, M, L) -> ALDConfig:
        return ALDConfig(P_q=P_q, d=d, eps=np.sqrt(self.eps_sq), gamma=self.gamma, M=M, L=L)


def ald_optimal_params(P_q: float, d: int, M: float, L: float) -> ALDOptimum:
    """``gamma = sqrt(P_q + M + L)``, ``eps^2 = sqrt(d / (P_q (M + L + gamma^2)))``.

    The resulting dimension-free rate is ``P_q / (66334 sqrt(P_q + M + L))``.
    """
    _positive("P_q", P_q)
    gamma = np.sqrt(P_q + M + L)
    eps_sq = np.sqrt(d / (P_q * (M + L + gamma**2)))
    return ALDOptimum(float(eps_sq), float(gamma), float(P_q / (66334 * np.sqrt(P_q + M + L))))


def ald_sweep(base: ALDConfig, param: str, values) -> list:
    """Rate bound across ``values`` of one config field; rows of ``(param, value, lambda, T, C)``."""
    rows = []
    for v in values:
        cfg = replace(base, **{param: float(v)})
        lam = ald_rate_bound(cfg)
        T = cfg.window()
        rows.append((param, float(v), lam, T, float(np.exp(T * lam))))
    return rows
