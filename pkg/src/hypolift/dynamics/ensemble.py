"""Ensembles of independent trajectories on a common time grid."""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..errors import InvalidParameter
from ..model import (
    GLE,
    RHMC,
    AdaptiveLangevin,
    DynamicsKind,
    GaussianTarget,
    KineticLangevin,
    Overdamped,
    ZigZag,
    build_drift_systems,
)
from .ou import apply_rows, ou_transition
from .pdmp import simulate_rhmc, simulate_zigzag
from .splitting import (
    step_ald,
    step_baoab,
    step_euler_maruyama,
    step_gle_splitting,
    step_kinetic_euler,
)
from .streams import TrajectoryStreams, trajectory_generator

SCHEMES = {
    "exact_ou": (Overdamped, KineticLangevin, GLE),
    "euler_maruyama": (Overdamped, KineticLangevin),
    "baoab": (KineticLangevin,),
    "ald": (AdaptiveLangevin,),
    "gle_splitting": (GLE,),
    "rhmc": (RHMC,),
    "zigzag": (ZigZag,),
}

DEFAULT_SCHEME = {
    "overdamped": "exact_ou",
    "kinetic": "exact_ou",
    "gle": "exact_ou",
    "ald": "ald",
    "rhmc": "rhmc",
    "zigzag": "zigzag",
}


@dataclass(frozen=True)
class SchemeSpec:
    scheme: str
    h: float = 0.01

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise InvalidParameter(f"unknown scheme {self.scheme!r}; choose from {sorted(SCHEMES)}")
        if not self.h > 0:
            raise InvalidParameter("step h must be positive")

    def check(self, kind: DynamicsKind, potential) -> None:
        if not isinstance(kind, SCHEMES[self.scheme]):
            raise InvalidParameter(f"scheme {self.scheme!r} cannot simulate {kind.name}")
        if self.scheme == "exact_ou" and not isinstance(potential, GaussianTarget):
            raise InvalidParameter("exact_ou needs a Gaussian target")


@dataclass
class Ensemble:
    """Trajectories sampled on ``times``: ``states[i, k]`` is trajectory ``i`` at ``times[k]``."""

    times: np.ndarray
    states: np.ndarray
    kind: DynamicsKind
    scheme: str
    h: float
    master_seed: int

    @property
    def n_traj(self) -> int:
        return self.states.shape[0]

    @property
    def d(self) -> int:
        n = self.states.shape[2]
        if isinstance(self.kind, Overdamped):
            return n
        if isinstance(self.kind, AdaptiveLangevin):
            return (n - 1) // 2
        if isinstance(self.kind, GLE):
            return n // 3
        return n // 2

    def header(self) -> dict:
        return {
            "kind": self.kind.to_dict(),
            "scheme": self.scheme,
            "h": self.h,
            "n_traj": self.n_traj,
            "times": [float(t) for t in self.times],
            "seed": int(self.master_seed),
        }

    def save(self, path) -> tuple:
        """Write ``<path>.bin`` (little-endian float64, C order) and ``<path>.json``."""
        path = Path(path)
        bin_path, json_path = path.with_suffix(".bin"), path.with_suffix(".json")
        self.states.astype("<f8").tofile(bin_path)
        json_path.write_text(json.dumps(self.header(), indent=2, sort_keys=True) + "\n")
        return bin_path, json_path

    @classmethod
    def load(cls, path) -> "Ensemble":
        path = Path(path)
        header = json.loads(path.with_suffix(".json").read_text())
        times = np.asarray(header["times"], dtype=float)
        flat = np.fromfile(path.with_suffix(".bin"), dtype="<f8")
        n = header["n_traj"]
        states = flat.reshape(n, len(times), -1)
        return cls(times, states, DynamicsKind.from_dict(header["kind"]), header["scheme"], header["h"], header["seed"])

    def to_csv(self, path) -> None:
        """Long-format CSV ``traj,t,c0,c1,...`` for small runs."""
        n, nt, nc = self.states.shape
        idx = np.repeat(np.arange(n), nt)
        t = np.tile(self.times, n)
        table = np.column_stack([idx, t, self.states.reshape(n * nt, nc)])
        header = ",".join(["traj", "t"] + [f"c{j}" for j in range(nc)])
        np.savetxt(path, table, delimiter=",", header=header, comments="", fmt=["%d"] + ["%.17g"] * (nc + 1))


# ---------------------------------------------------------------------------
# Invariant-measure initialization
# ---------------------------------------------------------------------------


def sample_invariant(kind: DynamicsKind, target: GaussianTarget, rng: np.random.Generator) -> np.ndarray:
    """One draw from the invariant measure of ``kind`` on a Gaussian target, flattened."""
    d = target.d
    x = target.sample(rng, 1)[0]
    if isinstance(kind, Overdamped):
        return x
    if isinstance(kind, ZigZag):
        return np.concatenate([x, rng.choice([-1.0, 1.0], size=d)])
    v = rng.standard_normal(d)
    if isinstance(kind, AdaptiveLangevin):
        return np.concatenate([x, v, rng.standard_normal(1)])
    if isinstance(kind, GLE):
        return np.concatenate([x, v, rng.standard_normal(d)])
    return np.concatenate([x, v])


# ---------------------------------------------------------------------------
# Chunk simulation
# ---------------------------------------------------------------------------


def _substeps(dt: float, h: float) -> tuple:
    n = max(1, math.ceil(dt / h - 1e-9))
    return n, dt / n


def _simulate_exact(kind, potential, y0, times, streams):
    systems = build_drift_systems(kind, potential)
    d = potential.d
    nb = systems[0].n
    n = y0.shape[0]
    # (traj, blocks, d) -> (traj, d, blocks)
    y = y0.reshape(n, nb, d).transpose(0, 2, 1).copy()
    out = np.empty((n, len(times), nb * d))
    out[:, 0] = y0
    for k in range(1, len(times)):
        dt = times[k] - times[k - 1]
        xi = streams.standard_normal((n, d, nb))
        new = np.empty_like(y)
        for c, sys in enumerate(systems):
            F, _, L = ou_transition(sys.A, sys.diffusion, dt)
            new[:, c] = apply_rows(F, y[:, c]) + apply_rows(L, xi[:, c])
        y = new
        out[:, k] = y.transpose(0, 2, 1).reshape(n, nb * d)
    return out


def _simulate_steps(kind, scheme, potential, y0, times, streams, h):
    n = y0.shape[0]
    d = potential.d
    out = np.empty((n, len(times), y0.shape[1]))
    out[:, 0] = y0
    if isinstance(kind, Overdamped):
        state = (y0.copy(),)
    elif isinstance(kind, AdaptiveLangevin):
        state = (y0[:, :d].copy(), y0[:, d:2 * d].copy(), y0[:, 2 * d].copy())
    elif isinstance(kind, GLE):
        state = (y0[:, :d].copy(), y0[:, d:2 * d].copy(), y0[:, 2 * d:].copy())
    else:
        state = (y0[:, :d].copy(), y0[:, d:].copy())

    if scheme == "euler_maruyama" and isinstance(kind, Overdamped):
        step = lambda s, dt: (step_euler_maruyama(potential, dt, s[0], streams),)
    elif scheme == "euler_maruyama":
        step = lambda s, dt: step_kinetic_euler(potential, kind.gamma, dt, s, streams)
    elif scheme == "baoab":
        step = lambda s, dt: step_baoab(potential, kind.gamma, dt, s, streams)
    elif scheme == "ald":
        step = lambda s, dt: step_ald(potential, kind.eps, kind.gamma, dt, s, streams)
    else:
        step = lambda s, dt: step_gle_splitting(potential, kind.coupling, kind.gamma, dt, s, streams)

    for k in range(1, len(times)):
        nsub, dt = _substeps(times[k] - times[k - 1], h)
        for _ in range(nsub):
            state = step(state, dt)
        out[:, k] = np.column_stack([np.reshape(s, (n, -1)) for s in state])
    return out


def _simulate_chunk(kind, spec, potential, times, master_seed, indices, initial, envelope):
    gens = [trajectory_generator(master_seed, i) for i in indices]
    if initial is None:
        y0 = np.stack([sample_invariant(kind, potential, g) for g in gens])
    else:
        y0 = np.array(initial[indices[0]:indices[-1] + 1], dtype=float)
    if spec.scheme in ("rhmc", "zigzag"):
        d = potential.d
        out = np.empty((len(indices), len(times), 2 * d))
        for r, g in enumerate(gens):
            st = (y0[r, :d], y0[r, d:])
            if spec.scheme == "rhmc":
                tr = simulate_rhmc(potential, kind.gamma, times[-1], st, g, times=times, h=spec.h)
            else:
                tr = simulate_zigzag(potential, kind.gamma, times[-1], st, g, times=times, envelope=envelope)
            out[r] = tr.states
        return out
    streams = TrajectoryStreams(gens)
    if spec.scheme == "exact_ou":
        return _simulate_exact(kind, potential, y0, times, streams)
    return _simulate_steps(kind, spec.scheme, potential, y0, times, streams, spec.h)


def run_ensemble(
    kind: DynamicsKind,
    scheme,
    potential,
    n_traj: int,
    times,
    master_seed: int,
    *,
    initial: Optional[np.ndarray] = None,
    threads: int = 1,
    chunk_size: int = 512,
    envelope=None,
) -> Ensemble:
    """Simulate ``n_traj`` independent trajectories of ``kind`` and record them at ``times``.

    ``scheme`` is a :class:`SchemeSpec`, a scheme name, or ``None`` for the
    kind's default. Without ``initial`` each trajectory starts from the
    invariant measure (Gaussian targets only). Trajectory ``i`` uses the
    random stream keyed by ``(master_seed, i)``, so the output is
    bit-identical for any ``threads`` value.
    """
    if scheme is None:
        scheme = DEFAULT_SCHEME[kind.name]
    spec = scheme if isinstance(scheme, SchemeSpec) else SchemeSpec(scheme)
    spec.check(kind, potential)
    times = np.asarray(times, dtype=float)
    if times[0] != 0 or np.any(np.diff(times) <= 0):
        raise InvalidParameter("times must start at 0 and be strictly increasing")
    if initial is None and not isinstance(potential, GaussianTarget):
        raise InvalidParameter("initial states are required for non-Gaussian potentials")
    if initial is not None and len(initial) != n_traj:
        raise InvalidParameter("initial must have one row per trajectory")
    chunks = [range(s, min(s + chunk_size, n_traj)) for s in range(0, n_traj, chunk_size)]
    work = lambda idx: _simulate_chunk(kind, spec, potential, times, master_seed, idx, initial, envelope)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(c) for c in chunks]
    return Ensemble(times, np.concatenate(parts), kind, spec.scheme, spec.h, int(master_seed))
