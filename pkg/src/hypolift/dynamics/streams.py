"""Per-trajectory random streams.

Trajectory ``i`` of a run with master seed ``s`` draws from
``Generator(Philox(SeedSequence(s, spawn_key=(i,))))``. Philox is counter-based,
so every stream is independent of how trajectories are grouped into chunks or
distributed over workers.
"""

from __future__ import annotations

import numpy as np

BLOCK = 4096


def trajectory_generator(master_seed: int, index: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return np.random.Generator(np.random.Philox(seq))


class TrajectoryStreams:
    """Stacked normal draws for a contiguous group of trajectories.

    ``standard_normal((n, *shape))`` returns row ``r`` from trajectory
    ``r``'s own generator. Each generator is read in fixed blocks of
    ``BLOCK`` normals, so the sequence seen by a trajectory does not depend on
    the group it is simulated in.
    """

    def __init__(self, generators):
        self.generators = list(generators)
        self._buf = np.empty((len(self.generators), 0))
        self._pos = 0

    def __len__(self):
        return len(self.generators)

    def _refill(self, need: int):
        rest = self._buf[:, self._pos:]
        while rest.shape[1] < need:
            fresh = np.stack([g.standard_normal(BLOCK) for g in self.generators])
            rest = np.concatenate([rest, fresh], axis=1)
        self._buf, self._pos = rest, 0

    def standard_normal(self, size) -> np.ndarray:
        size = tuple(np.atleast_1d(size))
        n = len(self.generators)
        if size[0] != n:
            raise ValueError(f"leading size {size[0]} != number of trajectories {n}")
        k = int(np.prod(size[1:], dtype=int))
        if self._pos + k > self._buf.shape[1]:
            self._refill(k)
        out = self._buf[:, self._pos:self._pos + k]
        self._pos += k
        return out.reshape(size)
