"""Splitting integrators for Langevin-type SDEs with a general potential.

States are tuples of arrays whose last axis is the spatial dimension ``d``;
leading axes are trajectories. ``rng`` is anything with a numpy-style
``standard_normal(size)``.
"""

from __future__ import annotations

import numpy as np

from .ou import apply_rows, ou_transition


def _ou_velocity(v, friction, gamma, h, rng):
    """Exact solve of ``dv = -friction v dt + sqrt(2 gamma) dW`` with frozen ``friction``."""
    friction = np.asarray(friction, dtype=float)
    decay = np.exp(-friction * h)
    small = np.abs(friction * h) < 1e-8
    safe = np.where(small, 1.0, friction)
    var = np.where(small, 2 * gamma * h, -gamma * np.expm1(-2 * safe * h) / safe)
    return decay * v + np.sqrt(var) * rng.standard_normal(v.shape)


def step_euler_maruyama(potential, h: float, x: np.ndarray, rng) -> np.ndarray:
    """Overdamped Langevin, ``x - h grad U(x) + sqrt(2h) xi``."""
    return x - h * potential.gradient(x) + np.sqrt(2 * h) * rng.standard_normal(x.shape)


def step_kinetic_euler(potential, gamma: float, h: float, state, rng):
    x, v = state
    x_new = x + h * v
    v_new = v - h * potential.gradient(x) - gamma * h * v + np.sqrt(2 * gamma * h) * rng.standard_normal(v.shape)
    return x_new, v_new


def step_baoab(potential, gamma: float, h: float, state, rng):
    """One BAOAB step for kinetic Langevin: kick, drift, exact OU, drift, kick."""
    x, v = state
    v = v - 0.5 * h * potential.gradient(x)
    x = x + 0.5 * h * v
    c = np.exp(-gamma * h)
    v = c * v + np.sqrt(-np.expm1(-2 * gamma * h)) * rng.standard_normal(v.shape)
    x = x + 0.5 * h * v
    v = v - 0.5 * h * potential.gradient(x)
    return x, v


def step_ald(potential, eps: float, gamma: float, h: float, state, rng):
    """One symmetric splitting step of adaptive Langevin dynamics.

    Order: kick, drift, thermostat half-update ``z += h/2 (|v|^2 - d)/eps``,
    exact OU on ``v`` with total friction ``gamma + z/eps`` frozen, thermostat
    half-update, drift, kick. As ``eps -> inf`` this reduces to BAOAB.
    """
    q, v, z = state
    d = q.shape[-1]
    v = v - 0.5 * h * potential.gradient(q)
    q = q + 0.5 * h * v
    z = z + 0.5 * h * (np.sum(v * v, axis=-1) - d) / eps
    v = _ou_velocity(v, (gamma + z / eps)[..., None], gamma, h, rng)
    z = z + 0.5 * h * (np.sum(v * v, axis=-1) - d) / eps
    q = q + 0.5 * h * v
    v = v - 0.5 * h * potential.gradient(q)
    return q, v, z


def gle_linear_block(coupling: float, gamma: float) -> tuple:
    """Drift and diffusion of the force-free GLE in ``(x, v, z)``."""
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, coupling], [0.0, -coupling, -gamma]])
    W = np.zeros((3, 3))
    W[2, 2] = 2 * gamma
    return A, W


def step_gle_splitting(potential, coupling: float, gamma: float, h: float, state, rng):
    """Strang splitting for the GLE: half kick, exact linear ``(x, v, z)`` block, half kick."""
    x, v, z = state
    v = v - 0.5 * h * potential.gradient(x)
    F, _, L = ou_transition(*gle_linear_block(coupling, gamma), h)
    y = np.stack([x, v, z], axis=-1)
    y = apply_rows(F, y) + apply_rows(L, rng.standard_normal(y.shape))
    x, v, z = y[..., 0], y[..., 1], y[..., 2]
    v = v - 0.5 * h * potential.gradient(x)
    return x, v, z
