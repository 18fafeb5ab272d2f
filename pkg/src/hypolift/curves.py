"""Sampled decay curves and their exponential fits."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class DecayCurve:
    """Values of a decaying functional on a time grid, with an optional exponential fit.

    After :func:`fit_exponential`, ``values[i] ~ fitted_prefactor * exp(-fitted_rate * t_i) * values[0]``
    on ``fit_window``.
    """

    times: np.ndarray
    values: np.ndarray
    stderr: Optional[np.ndarray] = None
    fitted_rate: float = float("nan")
    fitted_prefactor: float = float("nan")
    fit_window: tuple = (float("nan"), float("nan"))

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or t.shape != v.shape:
            raise InvalidParameter("times and values must be 1-D arrays of equal length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise InvalidParameter("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if self.stderr is not None:
            object.__setattr__(self, "stderr", np.asarray(self.stderr, dtype=float))

    def relaxation_time(self, threshold: float = np.exp(-1.0)) -> float:
        """First grid crossing of ``values <= threshold * values[0]``, log-linearly interpolated."""
        target = threshold * self.values[0]
        below = np.nonzero(self.values <= target)[0]
        if below.size == 0:
            return float("inf")
        i = below[0]
        if i == 0:
            return float(self.times[0])
        t0, t1 = self.times[i - 1], self.times[i]
        y0, y1 = np.log(self.values[i - 1]), np.log(self.values[i])
        return float(t0 + (np.log(target) - y0) * (t1 - t0) / (y1 - y0))


def fit_exponential(curve: DecayCurve, window: Optional[tuple] = None) -> DecayCurve:
    """Least-squares fit of ``log(values)`` against time on ``window``.

    The default window is the last half of the grid, which suppresses polynomial
    transients from defective (Jordan) modes. Non-positive values are skipped.
    """
    t, v = curve.times, curve.values
    if window is None:
        window = (float(t[t.size // 2]), float(t[-1]))
    lo, hi = window
    if lo < t[0] or hi > t[-1] or lo >= hi:
        raise InvalidParameter(f"fit window {window} not inside [{t[0]}, {t[-1]}]")
    mask = (t >= lo) & (t <= hi) & (v > 0) & np.isfinite(v)
    if mask.sum() < 2:
        raise InvalidParameter("fewer than two positive values inside the fit window")
    slope, intercept = np.polyfit(t[mask], np.log(v[mask]), 1)
    return replace(
        curve,
        fitted_rate=float(-slope),
        fitted_prefactor=float(np.exp(intercept) / v[0]),
        fit_window=(float(lo), float(hi)),
    )
