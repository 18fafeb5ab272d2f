"""Gaussian-law propagation, exact L2 decay curves and empirical estimators.

For a linear drift system started from a Gaussian law the density ratio to
the target stays Gaussian, so ``||f_t - 1||^2`` in ``L2(target)`` (the chi-square
divergence) has a closed form. Curves built here are exact up to the matrix
exponential and are the reference that simulated ensembles are checked against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy import linalg, stats
from scipy.integrate import cumulative_trapezoid

from .curves import DecayCurve, fit_exponential
from .dynamics.ensemble import Ensemble, run_ensemble
from .dynamics.ou import ou_transition
from .errors import InsufficientData, InvalidParameter, NotSquareIntegrable, WindowOutOfRange
from .model import (
    GLE,
    AdaptiveLangevin,
    DriftSystem,
    DynamicsKind,
    GaussianTarget,
    Overdamped,
)


@dataclass(frozen=True)
class GaussianLaw:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise InvalidParameter(f"cov shape {cov.shape} does not match mean of length {mean.size}")
        scale = max(1.0, float(np.abs(cov).max()))
        if np.abs(cov - cov.T).max() > 1e-12 * scale:
            raise InvalidParameter("cov must be symmetric")
        cov = 0.5 * (cov + cov.T)
        if np.linalg.eigvalsh(cov).min() < -1e-12 * scale:
            raise InvalidParameter("cov must be positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.size

    @classmethod
    def stationary(cls, sys: DriftSystem) -> "GaussianLaw":
        return cls(np.zeros(sys.n), sys.stationary_covariance())


def propagate_law(sys: DriftSystem, law0: GaussianLaw, t: float) -> GaussianLaw:
    """Law at time ``t``: mean ``F m0``, covariance ``F S0 F^T + Q_t`` with ``(F, Q_t)`` from Van Loan."""
    if t < 0:
        raise InvalidParameter("t must be >= 0")
    if t == 0:
        return law0
    F, Q, _ = ou_transition(sys.A, sys.diffusion, t)
    cov = F @ law0.cov @ F.T + Q
    return GaussianLaw(F @ law0.mean, 0.5 * (cov + cov.T))


def cross_covariance(sys: DriftSystem, law: GaussianLaw, s: float) -> np.ndarray:
    """``Cov(X_{t+s}, X_t) = exp(sA) Cov(X_t)`` when ``X_t`` has law ``law``."""
    return linalg.expm(s * sys.A) @ law.cov


# ---------------------------------------------------------------------------
# Chi-square divergence
# ---------------------------------------------------------------------------


def _chi_square_whitened(E: np.ndarray, nu: np.ndarray) -> float:
    """Chi-square of ``N(nu, I + E)`` against ``N(0, I)``.

    In the eigenbasis of ``E`` the integral of the squared ratio factorizes into
    ``prod (1 - e_k^2)^{-1/2} exp(nu_k^2 / (1 - e_k))``; using ``log1p``/``expm1``
    keeps small deviations accurate far into the tail of a decay curve.
    """
    e, U = np.linalg.eigh(0.5 * (E + E.T))
    if e.max() >= 1.0 or e.min() <= -1.0:
        raise NotSquareIntegrable(
            f"whitened covariance eigenvalues {1 + e.min():.6g}..{1 + e.max():.6g} must lie in (0, 2)"
        )
    w = U.T @ nu
    log_integral = np.sum(-0.5 * np.log1p(-e * e) + w * w / (1.0 - e))
    return float(np.expm1(log_integral))


def chi_square_norm(law: GaussianLaw, target: GaussianLaw) -> float:
    """``int (p/q)^2 dq - 1`` for Gaussian ``p = law`` and ``q = target``.

    Finite exactly when ``2 cov^{-1} - target_cov^{-1}`` is positive definite;
    otherwise :class:`NotSquareIntegrable` is raised.
    """
    if law.dim != target.dim:
        raise InvalidParameter("law and target dimensions differ")
    C = np.linalg.cholesky(target.cov)
    E = linalg.solve_triangular(C, linalg.solve_triangular(C, law.cov - target.cov, lower=True).T, lower=True)
    nu = linalg.solve_triangular(C, law.mean - target.mean, lower=True)
    return _chi_square_whitened(E, nu)


def _is_stationary(sys: DriftSystem, cov: np.ndarray) -> bool:
    resid = sys.A @ cov + cov @ sys.A.T + sys.Sigma @ sys.Sigma.T
    return np.abs(resid).max() <= 1e-10 * max(1.0, np.abs(cov).max())


def decay_curve(
    sys: DriftSystem,
    law0: GaussianLaw,
    target: Optional[GaussianLaw] = None,
    times=None,
    window: Optional[tuple] = None,
) -> DecayCurve:
    """``t -> ||f_t - 1||_{L2(target)}`` for the law started at ``law0``, with an exponential fit.

    ``target`` defaults to the invariant law. When the target is invariant the
    deviation ``S_t - S_inf = F (S_0 - S_inf) F^T`` is propagated directly, so
    values stay accurate down to ``~1e-150`` instead of bottoming out at
    rounding level.
    """
    S_inf = sys.stationary_covariance()
    if target is None:
        target = GaussianLaw(np.zeros(sys.n), S_inf)
    if times is None:
        times = np.linspace(0.0, 30.0, 601)
    times = np.asarray(times, dtype=float)
    exact_dev = np.allclose(target.mean, 0) and _is_stationary(sys, target.cov)
    C = np.linalg.cholesky(target.cov)
    whiten = lambda M: linalg.solve_triangular(C, M, lower=True)
    D0 = law0.cov - target.cov
    vals = np.empty(times.size)
    for i, t in enumerate(times):
        if exact_dev:
            F = linalg.expm(t * sys.A)
            E = whiten(whiten(F @ D0 @ F.T).T)
            nu = whiten(F @ law0.mean)
            vals[i] = _chi_square_whitened(E, nu)
        else:
            vals[i] = chi_square_norm(propagate_law(sys, law0, t), target)
    curve = DecayCurve(times, np.sqrt(np.maximum(vals, 0.0)))
    return fit_exponential(curve, window)


def worst_case_relaxation(
    sys: DriftSystem,
    n_laws: int = 100,
    seed: int = 0,
    times=None,
    shift: float = 1e-3,
) -> float:
    """Largest curve relaxation time over ``n_laws`` random small mean shifts of the invariant law.

    Shifts are uniform directions in whitened coordinates; small amplitude makes
    the curve track ``|exp(t A~)^T u|``, so the maximum approaches the
    operator-norm relaxation time from below.
    """
    rng = np.random.default_rng(seed)
    S_inf = sys.stationary_covariance()
    C = np.linalg.cholesky(S_inf)
    if times is None:
        times = np.linspace(0.0, 10.0, 2001)
    worst = 0.0
    for _ in range(n_laws):
        u = rng.standard_normal(sys.n)
        u *= shift / np.linalg.norm(u)
        law0 = GaussianLaw(C @ u, S_inf)
        curve = decay_curve(sys, law0, times=times)
        worst = max(worst, curve.relaxation_time())
    return worst


# ---------------------------------------------------------------------------
# Time-averaged energy
# ---------------------------------------------------------------------------


def time_averaged_energy(curve: DecayCurve, T: float) -> DecayCurve:
    """``H(t) = (1/T) int_t^{t+T} value(s)^2 ds`` at every grid time with ``t + T`` on the grid span.

    Uses the trapezoid rule on the curve's grid and linear interpolation of the
    running integral at ``t + T``.
    """
    t = curve.times
    if not T > 0:
        raise WindowOutOfRange("window T must be positive")
    if t[0] + T > t[-1] * (1 + 1e-12):
        raise WindowOutOfRange(f"window T={T} longer than the grid span [{t[0]}, {t[-1]}]")
    cum = cumulative_trapezoid(curve.values**2, t, initial=0.0)
    keep = t + T <= t[-1] * (1 + 1e-12) + 1e-12
    tk = t[keep]
    upper = np.interp(np.minimum(tk + T, t[-1]), t, cum)
    return DecayCurve(tk, (upper - cum[keep]) / T)


# ---------------------------------------------------------------------------
# Ensemble estimators
# ---------------------------------------------------------------------------


def _observable_values(ens: Ensemble, observable) -> np.ndarray:
    if callable(observable):
        g = observable(ens.states)
    elif np.isscalar(observable):
        g = ens.states[..., int(observable)]
    else:
        w = np.asarray(observable, dtype=float)
        g = np.einsum("ijk,k->ij", ens.states, w)
    g = np.asarray(g, dtype=float)
    if g.shape != ens.states.shape[:2]:
        raise InvalidParameter("observable must map states to one scalar per (trajectory, time)")
    return g


def empirical_autocov(
    ens: Ensemble,
    observable: Union[int, np.ndarray, Callable],
    lags,
    observable2=None,
    n_blocks: int = 20,
    window: Optional[tuple] = None,
) -> DecayCurve:
    """Stationary cross-covariance ``Cov(g(X_{t+s}), h(X_t))`` at each lag ``s``.

    Averages over trajectories and every time origin ``t`` on the grid. Standard
    errors use a delete-one-block jackknife over ``n_blocks`` groups of
    trajectories. ``observable`` may be a coordinate index, a weight vector or a
    callable on the state array; ``observable2`` defaults to ``observable``.
    Lags must be multiples of the (uniform) grid spacing.
    """
    t = ens.times
    dt = np.diff(t)
    if not np.allclose(dt, dt[0], rtol=1e-9):
        raise InvalidParameter("autocovariance needs a uniform time grid")
    lags = np.atleast_1d(np.asarray(lags, dtype=float))
    steps = np.rint(lags / dt[0]).astype(int)
    if np.any(np.abs(steps * dt[0] - lags) > 1e-9 * max(1.0, lags.max())) or np.any(steps < 0):
        raise InvalidParameter("lags must be non-negative multiples of the grid spacing")
    if np.any(np.diff(lags) <= 0):
        raise InvalidParameter("lags must be increasing")
    n_traj, n_t = ens.states.shape[:2]
    n_origins = n_t - steps.max()
    if n_origins < 1 or n_traj * n_origins < 100:
        raise InsufficientData(f"n_traj * n_origins = {n_traj * max(n_origins, 0)} < 100")
    n_blocks = min(n_blocks, n_traj)
    if n_blocks < 2:
        raise InsufficientData("need at least two trajectories for jackknife errors")
    g = _observable_values(ens, observable)
    h = g if observable2 is None else _observable_values(ens, observable2)
    groups = np.array_split(np.arange(n_traj), n_blocks)

    values = np.empty(lags.size)
    stderr = np.empty(lags.size)
    for j, s in enumerate(steps):
        a = g[:, s:s + n_origins]
        b = h[:, :n_origins]
        # per-block sums of products and marginals
        S = np.array([np.sum(a[idx] * b[idx]) for idx in groups])
        A = np.array([np.sum(a[idx]) for idx in groups])
        B = np.array([np.sum(b[idx]) for idx in groups])
        N = np.array([len(idx) * n_origins for idx in groups], dtype=float)
        cov = lambda s_, a_, b_, n_: s_ / n_ - (a_ / n_) * (b_ / n_)
        values[j] = cov(S.sum(), A.sum(), B.sum(), N.sum())
        loo = cov(S.sum() - S, A.sum() - A, B.sum() - B, N.sum() - N)
        stderr[j] = np.sqrt((n_blocks - 1) / n_blocks * np.sum((loo - loo.mean()) ** 2))
    curve = DecayCurve(lags, values, stderr)
    try:
        return fit_exponential(curve, window)
    except InvalidParameter:
        return curve


# ---------------------------------------------------------------------------
# Moment identities and stationarity
# ---------------------------------------------------------------------------

MOMENT_NAMES = (
    "v1^2",
    "v1^4",
    "v1^6",
    "v1^8",
    "(|v|^2-d)^2",
    "(|v|^2-d)^3",
    "(|v|^2-d)^4",
)


def gaussian_moments(d: int) -> dict:
    """Exact standard-Gaussian moments used by the adaptive Langevin constants."""
    if d < 1:
        raise InvalidParameter("d must be >= 1")
    return dict(zip(MOMENT_NAMES, (1.0, 3.0, 15.0, 105.0, 2.0 * d, 8.0 * d, 12.0 * d * d + 48.0 * d)))


def monte_carlo_moments(d: int, n: int, rng: np.random.Generator, batch: int = 250_000) -> dict:
    """Sample means and standard errors ``{name: (estimate, se)}`` from ``n`` draws of ``N(0, I_d)``."""
    sums = np.zeros(len(MOMENT_NAMES))
    sq = np.zeros(len(MOMENT_NAMES))
    done = 0
    while done < n:
        k = min(batch, n - done)
        v = rng.standard_normal((k, d))
        v1 = v[:, 0]
        r = np.sum(v * v, axis=1) - d
        f = np.stack([v1**2, v1**4, v1**6, v1**8, r**2, r**3, r**4])
        sums += f.sum(axis=1)
        sq += (f * f).sum(axis=1)
        done += k
    mean = sums / n
    var = (sq / n - mean**2) * n / (n - 1)
    return {name: (float(mu), float(np.sqrt(v / n))) for name, mu, v in zip(MOMENT_NAMES, mean, var)}


def verify_moments(d: int, n: int = 1_000_000, seed: int = 0, n_se: float = 5.0) -> list:
    """Rows ``{name, exact, estimate, se, z, passed}`` comparing Monte Carlo to the exact moments."""
    exact = gaussian_moments(d)
    est = monte_carlo_moments(d, n, np.random.default_rng(seed))
    rows = []
    for name in MOMENT_NAMES:
        mu, se = est[name]
        z = (mu - exact[name]) / se
        rows.append(dict(name=name, d=d, exact=exact[name], estimate=mu, se=se, z=float(z), passed=bool(abs(z) <= n_se)))
    return rows


def invariant_moments(kind: DynamicsKind, target: GaussianTarget) -> tuple:
    """Invariant means and second moments of each state coordinate for a Gaussian target."""
    d = target.d
    var_x = 1.0 / target.precisions
    if isinstance(kind, Overdamped):
        second = var_x
    elif isinstance(kind, AdaptiveLangevin):
        second = np.concatenate([var_x, np.ones(d + 1)])
    elif isinstance(kind, GLE):
        second = np.concatenate([var_x, np.ones(2 * d)])
    else:
        second = np.concatenate([var_x, np.ones(d)])
    return np.zeros(second.size), second


SPLITTING_BIAS = {"ald": 1.0, "baoab": 1.0, "gle_splitting": 1.0, "euler_maruyama": 10.0}


def stationarity_check(
    kind: DynamicsKind,
    target: GaussianTarget,
    n_traj: int = 10_000,
    T: float = 10.0,
    seed: int = 0,
    scheme=None,
    h: float = 0.01,
    n_se: float = 4.0,
    threads: int = 1,
) -> list:
    """Run from the invariant measure for time ``T`` and compare end moments to their invariant values.

    Each coordinate's mean and second moment must be within ``n_se`` standard
    errors plus, for discretized schemes, a bias allowance ``c h^2`` (``c`` from
    ``SPLITTING_BIAS``; Euler-Maruyama is first order and gets ``c h``).
    """
    from .dynamics.ensemble import DEFAULT_SCHEME, SchemeSpec

    name = scheme or DEFAULT_SCHEME[kind.name]
    spec = SchemeSpec(name, h)
    ens = run_ensemble(kind, spec, target, n_traj, np.array([0.0, T]), seed, threads=threads)
    y = ens.states[:, -1]
    mean0, second0 = invariant_moments(kind, target)
    if name == "euler_maruyama":
        allow = SPLITTING_BIAS[name] * h
    else:
        allow = SPLITTING_BIAS.get(name, 0.0) * h * h
    rows = []
    for c in range(y.shape[1]):
        for label, sample, exact in (("mean", y[:, c], mean0[c]), ("second", y[:, c] ** 2, second0[c])):
            est = float(sample.mean())
            se = float(sample.std(ddof=1) / np.sqrt(n_traj))
            err = abs(est - exact)
            ok = err <= n_se * se + allow * max(1.0, abs(exact)) + 1e-12
            rows.append(
                dict(kind=kind.name, scheme=name, coord=c, moment=label, exact=float(exact), estimate=est, se=se, passed=bool(ok))
            )
    return rows


def ks_exponential(samples, rate: float) -> float:
    """Kolmogorov-Smirnov p-value of ``samples`` against ``Exp(rate)``."""
    return float(stats.kstest(samples, "expon", args=(0, 1.0 / rate)).pvalue)
