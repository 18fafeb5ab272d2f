"""Event-driven simulation of randomized HMC and the Zig-Zag process.

Both simulators run one trajectory at a time with its own ``numpy`` Generator
and record the state at the requested times.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from ..errors import EnvelopeViolation, InvalidParameter


@dataclass
class PDMPTrajectory:
    times: np.ndarray
    states: np.ndarray  # (n_times, 2d): positions then velocities
    n_events: int = 0
    n_refresh: int = 0


def _record_times(times, t_end):
    if times is None:
        times = [0.0, t_end]
    times = np.asarray(times, dtype=float)
    if times[0] < 0 or np.any(np.diff(times) <= 0):
        raise InvalidParameter("recording times must be non-negative and increasing")
    return times


# ---------------------------------------------------------------------------
# Randomized HMC
# ---------------------------------------------------------------------------


def hamiltonian_flow(potential, x, v, tau, h=0.01):
    """Advance ``dx/dt = v, dv/dt = -grad U(x)`` by ``tau``.

    Exact rotation for a quadratic potential, leapfrog with step ``<= h`` otherwise.
    """
    if tau <= 0:
        return x, v
    prec = getattr(potential, "precision", None)
    if prec is not None:
        w = np.sqrt(prec)
        c, s = np.cos(w * tau), np.sin(w * tau)
        return x * c + v * s / w, -x * w * s + v * c
    n = max(1, math.ceil(tau / h - 1e-9))
    dt = tau / n
    v = v - 0.5 * dt * potential.gradient(x)
    for i in range(n):
        x = x + dt * v
        if i < n - 1:
            v = v - dt * potential.gradient(x)
    v = v - 0.5 * dt * potential.gradient(x)
    return x, v


def simulate_rhmc(potential, gamma: float, t_end: float, state, rng, times=None, h: float = 0.01):
    """Hamiltonian flow interrupted by full ``N(0, I)`` velocity refreshes at rate ``gamma``."""
    if gamma <= 0:
        raise InvalidParameter("gamma must be positive")
    times = _record_times(times, t_end)
    x, v = (np.array(s, dtype=float) for s in state)
    d = x.shape[-1]
    out = np.empty((len(times), 2 * d))
    t = 0.0
    next_refresh = rng.exponential(1.0 / gamma)
    n_ref = 0
    for k, tk in enumerate(times):
        while next_refresh <= tk:
            x, v = hamiltonian_flow(potential, x, v, next_refresh - t, h)
            t = next_refresh
            v = rng.standard_normal(d)
            n_ref += 1
            next_refresh += rng.exponential(1.0 / gamma)
        x, v = hamiltonian_flow(potential, x, v, tk - t, h)
        t = tk
        out[k, :d], out[k, d:] = x, v
    return PDMPTrajectory(times, out, n_ref, n_ref)


# ---------------------------------------------------------------------------
# Zig-Zag
# ---------------------------------------------------------------------------


def quadratic_flip_time(a: float, m: float, e: float) -> float:
    """First time ``s`` with ``int_0^s (a + m r)_+ dr = e`` (``m > 0``)."""
    return (-a + math.sqrt(max(a, 0.0) ** 2 + 2.0 * m * e)) / m


def _affine_time(a: float, b: float, e: float) -> float:
    # int_0^s (a + b r) dr = e with a, b >= 0
    if b > 0:
        return (-a + math.sqrt(a * a + 2.0 * b * e)) / b
    if a > 0:
        return e / a
    return math.inf


def lipschitz_envelope(potential, K: float) -> Callable:
    """Rate envelope for a potential with ``K``-Lipschitz gradient.

    Coordinate ``k``'s flip rate along ``x + v s`` is bounded by
    ``(v_k d_k U(x))_+ + K |v| s``.
    """

    def envelope(x, v):
        a = np.maximum(v * potential.gradient(x), 0.0)
        return a, np.full_like(a, K * float(np.linalg.norm(v)))

    return envelope


def simulate_zigzag(
    potential,
    gamma_refresh: float,
    t_end: float,
    state,
    rng,
    times=None,
    envelope: Optional[Callable] = None,
):
    """Zig-Zag with per-coordinate flips at rate ``(v_k d_k U)_+`` and full refreshes.

    Quadratic potentials use exact inversion of the linear-in-time rate;
    other potentials need ``envelope(x, v) -> (a, b)`` bounding each flip rate
    by ``a_k + b_k s`` along the current segment, and use Poisson thinning.
    """
    times = _record_times(times, t_end)
    x = np.array(state[0], dtype=float)
    v = np.array(state[1], dtype=float)
    if not np.all(np.abs(v) == 1):
        raise InvalidParameter("Zig-Zag velocities must be in {-1, +1}^d")
    d = x.shape[-1]
    prec = getattr(potential, "precision", None)
    if prec is None and envelope is None:
        raise InvalidParameter("a rate envelope is required for non-quadratic potentials")
    out = np.empty((len(times), 2 * d))
    t = 0.0
    n_flip = n_ref = 0
    k_rec = 0
    while k_rec < len(times):
        if prec is not None:
            a = v * prec * x
            e = rng.exponential(size=d)
            cand = np.array([quadratic_flip_time(a[k], prec[k], e[k]) for k in range(d)])
        else:
            a, b = envelope(x, v)
            e = rng.exponential(size=d)
            cand = np.array([_affine_time(a[k], b[k], e[k]) for k in range(d)])
        k = int(np.argmin(cand))
        tau = cand[k]
        tau_ref = rng.exponential(1.0 / gamma_refresh) if gamma_refresh > 0 else math.inf
        refresh = tau_ref < tau
        tau = min(tau, tau_ref)

        t_next = times[k_rec]
        if t + tau > t_next:
            # no event before the next recording time; memorylessness lets us redraw there
            x = x + v * (t_next - t)
            t = t_next
            out[k_rec, :d], out[k_rec, d:] = x, v
            k_rec += 1
            continue
        x = x + v * tau
        t += tau
        if refresh:
            v = rng.choice([-1.0, 1.0], size=d)
            n_ref += 1
        elif prec is not None:
            v[k] = -v[k]
            n_flip += 1
        else:
            rate = max(v[k] * potential.gradient(x)[k], 0.0)
            bound = a[k] + b[k] * tau
            if rate > bound * (1 + 1e-9) + 1e-12:
                raise EnvelopeViolation(f"flip rate {rate:.6g} exceeds envelope {bound:.6g} at t={t:.6g}")
            if bound > 0 and rng.random() * bound < rate:
                v[k] = -v[k]
                n_flip += 1
    return PDMPTrajectory(times, out, n_flip + n_ref, n_ref)
