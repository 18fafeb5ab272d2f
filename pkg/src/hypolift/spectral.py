"""Exact spectral and semigroup analysis for Gaussian targets.

For an Ornstein-Uhlenbeck process whose stationary covariance has been
normalized to the identity, the operator norm of the transition semigroup on
mean-zero L2 functions equals the largest singular value of ``exp(t A_tilde)``.
Everything here works on single coordinate blocks; ``d > 1`` tensorizes.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg, optimize

from .curves import DecayCurve
from .errors import BranchAmbiguity, InvalidParameter, NoCrossing
from .model import (
    DriftSystem,
    DynamicsKind,
    GaussianTarget,
    GLE,
    KineticLangevin,
    _positive,
    build_drift_systems,
)

_EPS = np.finfo(float).eps
SQRT2, SQRT3 = np.sqrt(2.0), np.sqrt(3.0)


# ---------------------------------------------------------------------------
# GLE closed-form spectrum
# ---------------------------------------------------------------------------


def gle_alpha_beta(a: float, b: float) -> tuple:
    """Auxiliary cubic coefficients for the GLE with coupling ``a sqrt(m)`` and friction ``b sqrt(m)``."""
    alpha = b / 2 + b**3 / 27 - b * (a**2 + 1) / 6
    beta = a**2 / 3 - b**2 / 9 + 1 / 3
    return alpha, beta


def _snap(value: float, *terms: float) -> float:
    # a coefficient below the rounding noise of its own terms is exactly zero
    scale = max(abs(x) for x in terms)
    return 0.0 if abs(value) <= 16 * _EPS * scale else value


def gle_eigenvalues_closed_form(m: float, a: float, b: float) -> np.ndarray:
    """The three GLE drift eigenvalues from Cardano's formula.

    The cube root of ``sqrt(alpha^2 + beta^3) - alpha`` is the real root for a
    non-negative radicand and the principal complex root otherwise. When that
    cube root vanishes while the roots are not a triple root, the conjugate
    Cardano branch is used instead (same multiset) and :class:`BranchAmbiguity`
    is emitted.
    """
    m = _positive("m", m)
    alpha, beta = gle_alpha_beta(a, b)
    alpha = _snap(alpha, b / 2, b**3 / 27, b * (a**2 + 1) / 6)
    beta = _snap(beta, a**2 / 3, b**2 / 9, 1 / 3)
    shift = -b / 3
    if alpha == 0.0 and beta == 0.0:
        return np.full(3, np.sqrt(m) * shift, dtype=complex)

    rad = alpha**2 + beta**3
    if rad >= 0:
        s = np.sqrt(rad)
        # s - alpha without cancellation when alpha > 0
        base = beta**3 / (s + alpha) if alpha > 0 else s - alpha
        w = complex(np.cbrt(base))
        if w == 0:
            warnings.warn("cube-root argument vanished; using the conjugate Cardano branch", BranchAmbiguity)
            w = complex(np.cbrt(-alpha - s))
            ratio = 0j
        else:
            ratio = beta / w
    else:
        w = complex(-alpha, np.sqrt(-rad)) ** (1.0 / 3.0)
        ratio = beta / w

    r3 = 1j * SQRT3
    mu1 = shift - ratio + w
    mu2 = shift + (1 - r3) * ratio / 2 - (1 + r3) * w / 2
    mu3 = shift + (1 + r3) * ratio / 2 - (1 - r3) * w / 2
    return np.sqrt(m) * np.array([mu1, mu2, mu3])


# ---------------------------------------------------------------------------
# Numeric spectrum
# ---------------------------------------------------------------------------


def _merge_radius(k: int, scale: float) -> float:
    # spread of a rounding-perturbed k-fold Jordan cluster is ~ (eps)^(1/k) * scale
    return 100.0 * _EPS ** (1.0 / k) * scale


def eigenvalues(A: np.ndarray) -> np.ndarray:
    """Eigenvalues of ``A`` with rounding-split defective clusters replaced by their mean.

    A k-fold Jordan block is split by rounding into k eigenvalues spread over
    ``eps^(1/k)``; their mean is accurate to ``eps``.
    """
    A = np.asarray(A, dtype=float)
    ev = linalg.eigvals(A)
    scale = max(np.linalg.norm(A, 2), 1e-300)
    out = ev.copy()
    free = list(range(len(ev)))
    for k in range(len(ev), 1, -1):
        r = _merge_radius(k, scale)
        found = True
        while found and len(free) >= k:
            found = False
            for combo in itertools.combinations(free, k):
                pts = ev[list(combo)]
                if np.max(np.abs(pts[:, None] - pts[None, :])) <= r:
                    out[list(combo)] = pts.mean()
                    free = [i for i in free if i not in combo]
                    found = True
                    break
    real = np.abs(out.imag) <= _merge_radius(2, scale)
    out[real] = out[real].real
    return out


def _gap_of(ev: np.ndarray) -> float:
    return float(max(0.0, np.min(-ev.real)))


def spectral_gap(sys) -> float:
    """``min(-Re lambda)`` over the drift spectrum; 0 for marginally stable drifts.

    For GLE systems the closed-form roots are computed as a cross-check and a
    disagreement above ``1e-6`` (relative) is reported with a warning; the
    numeric value is returned either way.
    """
    A = sys.A if isinstance(sys, (DriftSystem, NormalizedDrift)) else np.asarray(sys, dtype=float)
    gap = _gap_of(eigenvalues(A))
    kind = getattr(sys, "kind", None)
    if isinstance(kind, GLE):
        s = np.sqrt(sys.m)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", BranchAmbiguity)
            closed = _gap_of(gle_eigenvalues_closed_form(sys.m, kind.coupling / s, kind.gamma / s))
        if abs(closed - gap) > 1e-6 * max(1.0, gap):
            warnings.warn(
                f"closed-form GLE gap {closed!r} disagrees with eigensolver {gap!r}; using eigensolver",
                RuntimeWarning,
            )
    return gap


# ---------------------------------------------------------------------------
# Normalized drift and semigroup norms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalizedDrift:
    """Drift matrix after the change of variables ``x -> sqrt(m) x``.

    The stationary covariance of the normalized process is the identity, so
    ``||exp(t A_tilde)||_2`` is the L2 operator norm of the semigroup on
    mean-zero functions.
    """

    A_tilde: np.ndarray
    m: float = 1.0

    @property
    def A(self) -> np.ndarray:
        return self.A_tilde


def normalize_drift(sys: DriftSystem, m: Optional[float] = None) -> NormalizedDrift:
    m = sys.m if m is None else _positive("m", m)
    D = np.array([np.sqrt(m) if b == "x" else 1.0 for b in sys.blocks])
    return NormalizedDrift(D[:, None] * sys.A / D[None, :], m)


def semigroup_norm(nd, t: float) -> float:
    """Largest singular value of ``exp(t A_tilde)``."""
    if t < 0:
        raise InvalidParameter("t must be non-negative")
    A = nd.A_tilde if isinstance(nd, NormalizedDrift) else np.asarray(nd, dtype=float)
    return float(np.linalg.norm(linalg.expm(t * A), 2))


def norm_curve(nd, times) -> DecayCurve:
    times = np.asarray(times, dtype=float)
    return DecayCurve(times, np.array([semigroup_norm(nd, t) for t in times]))


def p_closed_form(s):
    """``1 + s^2 + s^4/8 + (2s + s^3/2) sqrt(s^2/16 + 1/2)``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise InvalidParameter("s must be non-negative")
    out = 1 + s**2 + s**4 / 8 + (2 * s + s**3 / 2) * np.sqrt(s**2 / 16 + 0.5)
    return float(out) if out.ndim == 0 else out


def jordan_block_norm(s: float, n: int = 3) -> float:
    """Largest singular value of ``exp(s N)`` for the nilpotent ``n x n`` shift ``N``.

    For ``n = 3`` its square is :func:`p_closed_form`. This is the norm of the
    Jordan factor alone, without the similarity transform that relates it to
    ``exp(t A_tilde)``.
    """
    N = np.eye(n, k=1)
    return float(np.linalg.norm(linalg.expm(s * N), 2))


def relaxation_time(
    norm_fn: Callable[[float], float],
    threshold: float = np.exp(-1.0),
    *,
    step: float = 0.01,
    horizon: float = 1e3,
    xtol: float = 1e-12,
) -> float:
    """First time ``norm_fn`` drops to ``threshold``.

    Forward scan with ``step`` (doubled every 1000 steps without a crossing),
    a 10x refined scan of the bracketing interval to catch an earlier dip, then
    bisection. The curve need not be monotone.
    """
    if norm_fn(0.0) <= threshold:
        return 0.0
    t, n = 0.0, 0
    while t < horizon:
        t_next = min(t + step, horizon)
        if norm_fn(t_next) <= threshold:
            lo, hi = t, t_next
            for s in np.linspace(t, t_next, 11)[1:-1]:
                if norm_fn(s) <= threshold:
                    hi = s
                    break
                lo = s
            return float(optimize.brentq(lambda s: norm_fn(s) - threshold, lo, hi, xtol=xtol))
        t = t_next
        n += 1
        if n % 1000 == 0:
            step *= 2
    raise NoCrossing(f"norm stayed above {threshold:.6g} up to t = {horizon}")


def operator_relaxation_time(nd: NormalizedDrift, **kwargs) -> float:
    """Relaxation time of ``exp(t A_tilde)``, scanning in steps of ``0.01 / gap``."""
    gap = spectral_gap(nd.A_tilde)
    if gap > 0:
        kwargs.setdefault("step", 0.01 / gap)
    return relaxation_time(lambda t: semigroup_norm(nd, t), **kwargs)


# ---------------------------------------------------------------------------
# Parameter optimizers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GLEOptimum:
    coupling: float
    gamma: float
    gap: float
    numeric_a: float = float("nan")
    numeric_b: float = float("nan")


def _gle_gap_scaled(a: float, b: float) -> float:
    A = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, a], [0.0, -a, -b]])
    return _gap_of(eigenvalues(A))


def optimal_gle_params(m: float, numeric: bool = True) -> GLEOptimum:
    """Gap-maximizing GLE parameters ``(2 sqrt(2m), 3 sqrt(3m))`` with gap ``sqrt(3m)``.

    With ``numeric=True`` the gap over the scaled parameters ``(a, b)`` is also
    maximized by Nelder-Mead from ``(1, 1)`` and the maximizer is reported.
    """
    m = _positive("m", m)
    s = np.sqrt(m)
    na = nb = float("nan")
    if numeric:
        res = optimize.minimize(
            lambda p: -_gle_gap_scaled(*p) if min(p) > 0 else 0.0,
            x0=[1.0, 1.0],
            method="Nelder-Mead",
            options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 4000},
        )
        na, nb = map(float, res.x)
    return GLEOptimum(2 * SQRT2 * s, 3 * SQRT3 * s, SQRT3 * s, na, nb)


def kinetic_relaxation_time(gamma: float, m: float = 1.0) -> float:
    sys = build_drift_systems(KineticLangevin(gamma), GaussianTarget(m))[0]
    return operator_relaxation_time(normalize_drift(sys))


def optimal_langevin_friction(m: float, criterion: str = "gap") -> tuple:
    """Friction for kinetic Langevin on ``N(0, 1/m)`` and the resulting relaxation time.

    ``criterion="gap"`` picks the spectral-gap maximizer, critical damping
    ``gamma = 2 sqrt(m)``. ``criterion="relaxation"`` minimizes the relaxation
    time itself over ``gamma``.
    """
    m = _positive("m", m)
    s = np.sqrt(m)
    if criterion == "gap":
        gamma = 2.0 * s
    elif criterion == "relaxation":
        res = optimize.minimize_scalar(
            lambda g: kinetic_relaxation_time(g * s, m), bounds=(0.5, 4.0), method="bounded",
            options={"xatol": 1e-7},
        )
        gamma = float(res.x) * s
    else:
        raise InvalidParameter(f"unknown criterion {criterion!r}")
    return gamma, kinetic_relaxation_time(gamma, m)


# ---------------------------------------------------------------------------
# Lift bounds
# ---------------------------------------------------------------------------


def lift_lower_bound_remark(P_x: float) -> float:
    """Relaxation-time lower bound ``P_x^{-1/2} / sqrt(2)`` valid for any second-order lift."""
    return 1.0 / (SQRT2 * np.sqrt(_positive("P_x", P_x)))


def gle_lower_bound_corollary(P_x: float) -> float:
    """GLE relaxation-time lower bound ``P_x^{-1/2} / 2``."""
    return 0.5 / np.sqrt(_positive("P_x", P_x))


def decay_rate_upper_bound(C: float, P_x: float) -> float:
    """Largest rate ``lambda`` compatible with ``||P_t|| <= C exp(-lambda t)`` for a lift."""
    if not C > 1:
        raise InvalidParameter(f"C must exceed 1, got {C!r}")
    return (1.0 + np.log(C)) * np.sqrt(_positive("P_x", P_x))


# ---------------------------------------------------------------------------
# Report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    gap: float
    t_rel: float
    lower_bound_remark: float
    lower_bound_corollary: float
    norm_curve: Optional[DecayCurve] = None

    def to_dict(self) -> dict:
        return {
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "gap": self.gap,
            "t_rel": self.t_rel,
            "lower_bound_remark": self.lower_bound_remark,
            "lower_bound_corollary": self.lower_bound_corollary,
        }


def spectral_report(kind: DynamicsKind, target: GaussianTarget, curve_times=None) -> SpectralReport:
    """Spectrum, gap, relaxation time and lift bounds for ``kind`` on ``target``.

    Anisotropic targets are handled per coordinate: the gap is the smallest and
    the relaxation time the largest over coordinates.
    """
    systems = build_drift_systems(kind, target)
    blocks = [normalize_drift(s) for s in systems]
    ev = np.concatenate([eigenvalues(s.A) for s in systems])
    gap = min(spectral_gap(s) for s in systems)
    t_rel = max(operator_relaxation_time(b) for b in blocks)
    P_x = target.P_x
    curve = None
    if curve_times is not None:
        times = np.asarray(curve_times, dtype=float)
        vals = np.max([norm_curve(b, times).values for b in blocks], axis=0)
        curve = DecayCurve(times, vals)
    return SpectralReport(ev, gap, t_rel, lift_lower_bound_remark(P_x), gle_lower_bound_corollary(P_x), curve)
