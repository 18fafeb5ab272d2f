"""Domain types: targets, potentials, the catalog of dynamics and their linear drift systems.

All types are frozen after construction. Every dynamics in the catalog leaves the
product measure ``mu(dx) x N(0, I)`` invariant, where ``mu`` is the target.
For a Gaussian target ``N(0, m^{-1} I_d)`` the linear dynamics factorize over
coordinates, so drift systems are always built for a single coordinate block.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable, ClassVar, Optional, Union

import numpy as np
from scipy import linalg

from .errors import InvalidParameter, UnsupportedDynamics

ArrayLike = Union[float, np.ndarray]


def _positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidParameter(f"{name} must be positive and finite, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# Targets and potentials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianTarget:
    """Centred Gaussian ``N(0, diag(m)^{-1})`` on R^d.

    ``m`` is either one precision shared by all coordinates or a sequence of
    ``d`` per-coordinate precisions. Also usable as the quadratic potential
    ``U(x) = sum_k m_k x_k^2 / 2`` by the simulators.
    """

    m: Union[float, tuple] = 1.0
    d: int = 1

    def __post_init__(self):
        if isinstance(self.d, bool) or int(self.d) != self.d or self.d < 1:
            raise InvalidParameter(f"d must be a positive integer, got {self.d!r}")
        object.__setattr__(self, "d", int(self.d))
        if np.ndim(self.m) == 0:
            object.__setattr__(self, "m", _positive("m", self.m))
        else:
            ms = tuple(_positive("m", v) for v in np.ravel(self.m))
            if len(ms) != self.d:
                raise InvalidParameter(f"expected {self.d} precisions, got {len(ms)}")
            object.__setattr__(self, "m", ms)

    @property
    def isotropic(self) -> bool:
        return np.ndim(self.m) == 0

    @property
    def precisions(self) -> np.ndarray:
        return np.broadcast_to(np.asarray(self.m, dtype=float), (self.d,)).copy()

    @property
    def P_x(self) -> float:
        """Poincare constant of the target, the smallest precision."""
        return float(np.min(self.precisions))

    # quadratic-potential interface used by the simulators
    @property
    def precision(self) -> np.ndarray:
        return self.precisions

    def gradient(self, x: np.ndarray) -> np.ndarray:
        return self.precisions * x

    def value(self, x: np.ndarray) -> np.ndarray:
        return 0.5 * np.sum(self.precisions * x * x, axis=-1)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.standard_normal((n, self.d)) / np.sqrt(self.precisions)


@dataclass(frozen=True)
class GeneralPotential:
    """Potential ``U`` on R^d satisfying the structural bounds used by the adaptive Langevin rate.

    Attributes
    ----------
    gradient : callable
        Maps an array of shape ``(..., d)`` to ``grad U`` of the same shape.
    M : float
        Lower Hessian bound, ``Hess U >= -M``.
    L, a : float
        Laplacian growth, ``Lap U <= L d + a |grad U|^2`` with ``0 < a < 1/2``.
        ``a`` is validated and stored but enters no formula.
    P_q : float
        Spectral gap of ``grad_q^* grad_q`` in ``L2(exp(-U))``.
    value : callable, optional
        ``U`` itself; only needed for energy diagnostics.
    """

    gradient: Callable[[np.ndarray], np.ndarray]
    d: int = 1
    M: float = 0.0
    L: float = 1.0
    a: float = 0.25
    P_q: float = 1.0
    value: Optional[Callable[[np.ndarray], np.ndarray]] = None

    precision: ClassVar[None] = None

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidParameter(f"d must be a positive integer, got {self.d!r}")
        if not np.isfinite(self.M) or self.M < 0:
            raise InvalidParameter(f"M must be >= 0, got {self.M!r}")
        _positive("L", self.L)
        _positive("P_q", self.P_q)
        if not 0 < self.a < 0.5:
            raise InvalidParameter(f"a must lie in (0, 1/2), got {self.a!r}")


def quadratic_potential(m: float = 1.0, d: int = 1) -> GaussianTarget:
    return GaussianTarget(m=m, d=d)


# ---------------------------------------------------------------------------
# Dynamics catalog
# ---------------------------------------------------------------------------

_KINDS: dict = {}


def _register(cls):
    _KINDS[cls.name] = cls
    return cls


@dataclass(frozen=True)
class DynamicsKind:
    name: ClassVar[str] = ""
    linear: ClassVar[bool] = False

    def __post_init__(self):
        for f in fields(self):
            object.__setattr__(self, f.name, _positive(f.name, getattr(self, f.name)))

    def to_dict(self) -> dict:
        out = {"kind": self.name}
        out.update({f.name: getattr(self, f.name) for f in fields(self)})
        return out

    @staticmethod
    def from_dict(data: dict) -> "DynamicsKind":
        data = dict(data)
        try:
            cls = _KINDS[data.pop("kind")]
        except KeyError as exc:
            raise InvalidParameter(f"unknown or missing dynamics kind in {data!r}") from exc
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidParameter(f"unknown keys for {cls.name}: {sorted(unknown)}")
        return cls(**data)

    def state_dim(self, d: int) -> int:
        raise NotImplementedError


@_register
@dataclass(frozen=True)
class Overdamped(DynamicsKind):
    name: ClassVar[str] = "overdamped"
    linear: ClassVar[bool] = True

    def state_dim(self, d):
        return d


@_register
@dataclass(frozen=True)
class KineticLangevin(DynamicsKind):
    gamma: float = 1.0
    name: ClassVar[str] = "kinetic"
    linear: ClassVar[bool] = True

    def state_dim(self, d):
        return 2 * d


@_register
@dataclass(frozen=True)
class RHMC(DynamicsKind):
    """Hamiltonian flow with full velocity refreshment at rate ``gamma``."""

    gamma: float = 1.0
    name: ClassVar[str] = "rhmc"

    def state_dim(self, d):
        return 2 * d


@_register
@dataclass(frozen=True)
class ZigZag(DynamicsKind):
    """Zig-Zag process; ``gamma`` is the full-velocity refreshment rate."""

    gamma: float = 1.0
    name: ClassVar[str] = "zigzag"

    def state_dim(self, d):
        return 2 * d


@_register
@dataclass(frozen=True)
class AdaptiveLangevin(DynamicsKind):
    """Langevin dynamics with a Nose-Hoover friction correction ``z``; state ``(q, v, z)``."""

    eps: float = 1.0
    gamma: float = 1.0
    name: ClassVar[str] = "ald"

    def state_dim(self, d):
        return 2 * d + 1


@_register
@dataclass(frozen=True)
class GLE(DynamicsKind):
    """Quasi-Markovian generalised Langevin equation; ``coupling`` couples v and z."""

    coupling: float = 1.0
    gamma: float = 1.0
    name: ClassVar[str] = "gle"
    linear: ClassVar[bool] = True

    def state_dim(self, d):
        return 3 * d


KIND_NAMES = tuple(_KINDS)


# ---------------------------------------------------------------------------
# Linear drift systems
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftSystem:
    """Linear SDE ``dX = A X dt + Sigma dW`` for one coordinate block.

    ``blocks`` labels each coordinate (``"x"``, ``"v"`` or ``"z"``); ``m`` is the
    precision of the target in that coordinate.
    """

    A: np.ndarray
    Sigma: np.ndarray
    blocks: tuple
    m: float
    kind: Optional[DynamicsKind] = field(default=None, compare=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        S = np.array(self.Sigma, dtype=float).reshape(A.shape[0], -1)
        A.setflags(write=False)
        S.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "Sigma", S)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def diffusion(self) -> np.ndarray:
        return self.Sigma @ self.Sigma.T

    def stationary_covariance(self) -> np.ndarray:
        """Solve ``A S + S A^T + Sigma Sigma^T = 0``."""
        S = linalg.solve_continuous_lyapunov(self.A, -self.diffusion)
        return 0.5 * (S + S.T)

    def reference_covariance(self) -> np.ndarray:
        """Covariance of the invariant product measure, ``diag(1/m, 1[, 1])``."""
        return np.diag([1.0 / self.m if b == "x" else 1.0 for b in self.blocks])


def _drift_block(kind: DynamicsKind, m: float) -> DriftSystem:
    m = _positive("m", m)
    if isinstance(kind, Overdamped):
        return DriftSystem([[-m]], [[np.sqrt(2.0)]], ("x",), m, kind)
    if isinstance(kind, KineticLangevin):
        g = kind.gamma
        return DriftSystem([[0.0, 1.0], [-m, -g]], [[0.0], [np.sqrt(2 * g)]], ("x", "v"), m, kind)
    if isinstance(kind, GLE):
        lam, g = kind.coupling, kind.gamma
        A = [[0.0, 1.0, 0.0], [-m, 0.0, lam], [0.0, -lam, -g]]
        return DriftSystem(A, [[0.0], [0.0], [np.sqrt(2 * g)]], ("x", "v", "z"), m, kind)
    raise UnsupportedDynamics(
        f"{kind.name} has no linear drift representation (only overdamped, kinetic and gle do)"
    )


def build_drift_system(kind: DynamicsKind, target: GaussianTarget) -> DriftSystem:
    """Drift/noise matrices of ``kind`` for one coordinate of an isotropic Gaussian target."""
    if not target.isotropic:
        raise InvalidParameter("anisotropic target: use build_drift_systems for per-coordinate blocks")
    return _drift_block(kind, target.m)


def build_drift_systems(kind: DynamicsKind, target: GaussianTarget) -> list:
    """One drift system per coordinate of ``target``."""
    return [_drift_block(kind, m) for m in target.precisions]


def gle_kind_from_scaled(a: float, b: float, m: float) -> GLE:
    """GLE with coupling ``a sqrt(m)`` and friction ``b sqrt(m)``."""
    s = np.sqrt(_positive("m", m))
    return GLE(coupling=a * s, gamma=b * s)


# ---------------------------------------------------------------------------
# Structural constants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionConstants:
    """Coercivity constants of a kinetic dynamics.

    ``rate_formula_applicable`` is False when the abstract rate theorem does not
    apply (the GLE, whose dissipation acts on ``z`` only, and the overdamped
    diffusion, which is not a lift). ``P_x`` is always reported since the
    lift lower bounds only need it.
    """

    P_x: float
    P_v: Optional[float] = None
    R: Optional[float] = None
    rate_formula_applicable: bool = True
    note: str = ""


def validate_assumptions(kind: DynamicsKind, target) -> AssumptionConstants:
    """Constants ``(P_v, R, P_x)`` for ``kind`` on ``target``.

    ``target`` is a :class:`GaussianTarget` (``P_x`` = smallest precision) or a
    :class:`GeneralPotential` (``P_x`` = ``P_q`` for the position variable).
    """
    if isinstance(target, GaussianTarget):
        P_q, d = target.P_x, target.d
    else:
        P_q, d = target.P_q, target.d

    if isinstance(kind, (KineticLangevin, RHMC, ZigZag)):
        return AssumptionConstants(P_x=P_q, P_v=kind.gamma, R=kind.gamma)
    if isinstance(kind, AdaptiveLangevin):
        P_x = min(P_q, 2 * d / kind.eps**2)
        return AssumptionConstants(P_x=P_x, P_v=kind.gamma, R=kind.gamma)
    if isinstance(kind, GLE):
        return AssumptionConstants(
            P_x=P_q,
            rate_formula_applicable=False,
            note="rate-formula-inapplicable: dissipation acts on z only, so ker(L_v) != Im(Pi)",
        )
    return AssumptionConstants(
        P_x=P_q,
        rate_formula_applicable=False,
        note="rate-formula-inapplicable: overdamped diffusion is reversible, not a kinetic lift",
    )
