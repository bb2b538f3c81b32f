"""Finite state spaces: bases, pure states, Hermitian operators and unit systems.

Grid states store amplitudes already multiplied by ``sqrt(dx)`` (``sqrt(dx*dy)``
in 2D), so ``sum(abs(amp)**2)`` is the norm and ``vdot`` is the L2 inner product
everywhere in the package.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import BasisMismatch, DegenerateSuperposition

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-10


@dataclass(frozen=True)
class BasisDescriptor:
    """Label set of a finite basis.

    ``kind`` is one of ``"spectral"``, ``"grid1d"`` or ``"grid2d"``.  Spectral
    bases carry a tuple of unique labels (level indices, ``(nx, ny)`` pairs, sine
    mode numbers...).  Grid bases carry ``axes``: one ``(x_min, x_max, n)`` triple
    per dimension, with points at ``linspace(x_min, x_max, n)``.
    """

    kind: str
    labels: tuple = ()
    axes: tuple = ()

    def __post_init__(self):
        if self.kind == "spectral":
            if len(self.labels) < 2:
                raise ValueError("spectral basis needs dimension >= 2")
            if len(set(self.labels)) != len(self.labels):
                raise ValueError("spectral labels must be unique")
            try:
                sorted(self.labels)
            except TypeError as exc:
                raise ValueError("spectral labels must be totally ordered") from exc
        elif self.kind in ("grid1d", "grid2d"):
            ndim = 1 if self.kind == "grid1d" else 2
            if len(self.axes) != ndim:
                raise ValueError(f"{self.kind} needs {ndim} axis triple(s)")
            for lo, hi, n in self.axes:
                if int(n) < 8:
                    raise ValueError("grid point counts must be >= 8")
                if not hi > lo:
                    raise ValueError("grid spacing must be strictly positive")
        else:
            raise ValueError(f"unknown basis kind {self.kind!r}")

    @classmethod
    def spectral(cls, labels: Iterable) -> "BasisDescriptor":
        return cls("spectral", labels=tuple(labels))

    @classmethod
    def grid1d(cls, x_min: float, x_max: float, num_points: int) -> "BasisDescriptor":
        return cls("grid1d", axes=((float(x_min), float(x_max), int(num_points)),))

    @classmethod
    def grid2d(cls, x_axis: tuple, y_axis: tuple) -> "BasisDescriptor":
        axes = tuple((float(lo), float(hi), int(n)) for lo, hi, n in (x_axis, y_axis))
        return cls("grid2d", axes=axes)

    @property
    def dimension(self) -> int:
        if self.kind == "spectral":
            return len(self.labels)
        return int(np.prod([n for _, _, n in self.axes]))

    @property
    def spacings(self) -> tuple:
        return tuple((hi - lo) / (n - 1) for lo, hi, n in self.axes)

    @property
    def cell_volume(self) -> float:
        """Quadrature weight of one grid point (1 for spectral bases)."""
        if self.kind == "spectral":
            return 1.0
        return float(np.prod(self.spacings))

    def points(self) -> np.ndarray:
        """Grid coordinates; shape ``(n,)`` in 1D and ``(2, nx*ny)`` in 2D."""
        if self.kind == "spectral":
            raise TypeError("spectral bases have no coordinates")
        grids = [np.linspace(lo, hi, n) for lo, hi, n in self.axes]
        if len(grids) == 1:
            return grids[0]
        xx, yy = np.meshgrid(*grids, indexing="ij")
        return np.stack([xx.ravel(), yy.ravel()])

    def index(self, label) -> int:
        return self.labels.index(label)


def _frozen(arr) -> np.ndarray:
    out = np.array(arr, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: BasisDescriptor
    amplitudes: np.ndarray
    metadata: Mapping = field(default_factory=dict)

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size != self.basis.dimension:
            raise BasisMismatch(
                f"{amps.size} amplitudes for a basis of dimension {self.basis.dimension}"
            )
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "metadata", MappingProxyType(dict(self.metadata)))

    @classmethod
    def basis_state(cls, basis: BasisDescriptor, index: int) -> "StateVector":
        amps = np.zeros(basis.dimension, dtype=complex)
        amps[index] = 1.0
        return cls(basis, amps)

    @classmethod
    def from_wavefunction(cls, basis: BasisDescriptor, values) -> "StateVector":
        """Wrap point values of a wavefunction, applying the sqrt(cell) weight."""
        return cls(basis, np.asarray(values, dtype=complex) * np.sqrt(basis.cell_volume))

    def wavefunction(self) -> np.ndarray:
        """Point values with the quadrature weight removed."""
        return self.amplitudes / np.sqrt(self.basis.cell_volume)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalize(self) -> "StateVector":
        nrm = self.norm()
        if nrm == 0.0:
            raise DegenerateSuperposition("cannot normalize the zero vector")
        return StateVector(self.basis, self.amplitudes / nrm, self.metadata)

    def fix_gauge(self) -> "StateVector":
        """Rotate the global phase so the largest amplitude is real and positive."""
        k = int(np.argmax(np.abs(self.amplitudes)))
        a = self.amplitudes[k]
        if a == 0:
            return self
        return StateVector(self.basis, self.amplitudes * (abs(a) / a), self.metadata)

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_basis(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_basis(self.basis, other.basis)
        return StateVector(self.basis, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar) -> "StateVector":
        return StateVector(self.basis, self.amplitudes * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Dense Hermitian matrix on a basis.

    Construction checks Hermiticity to ``HERMITIAN_TOL`` (relative to the largest
    element) and then stores the exactly Hermitian part.
    """

    basis: BasisDescriptor
    elements: np.ndarray

    def __post_init__(self):
        m = np.array(self.elements, dtype=complex)
        n = self.basis.dimension
        if m.shape != (n, n):
            raise BasisMismatch(f"matrix of shape {m.shape} for dimension {n}")
        scale = max(1.0, float(np.max(np.abs(m))) if m.size else 1.0)
        if np.max(np.abs(m - m.conj().T)) > HERMITIAN_TOL * scale:
            raise ValueError("operator is not Hermitian")
        object.__setattr__(self, "elements", _frozen(0.5 * (m + m.conj().T)))

    @classmethod
    def identity(cls, basis: BasisDescriptor) -> "HermitianOperator":
        return cls(basis, np.eye(basis.dimension))

    @classmethod
    def diagonal(cls, basis: BasisDescriptor, values) -> "HermitianOperator":
        return cls(basis, np.diag(np.asarray(values, dtype=complex)))

    @classmethod
    def projector(cls, state: StateVector) -> "HermitianOperator":
        v = state.amplitudes
        return cls(state.basis, np.outer(v, v.conj()))

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        m = self.elements
        return bool(np.max(np.abs(m - m.conj().T)) <= tol)

    def expectation(self, state: StateVector) -> float:
        _check_basis(self.basis, state.basis)
        v = state.amplitudes
        return float(np.real(np.vdot(v, self.elements @ v)))

    def __matmul__(self, other):
        if isinstance(other, StateVector):
            return apply(self, other)
        return NotImplemented


@dataclass(frozen=True)
class UnitSystem:
    """Physical constants used to turn dimensionless model numbers into values.

    ``natural`` mode pins every constant to one.  ``si`` defaults follow the
    values quoted for the cross-system comparison plot (kg, J s, m/s).
    """

    hbar: float = 1.0
    c: float = 1.0
    planck_mass: float = 1.0
    probe_mass: float = 1.0
    mode: str = "natural"

    SI_HBAR = 1.054e-34
    SI_C = 2.99e8
    SI_PLANCK_MASS = 2.176e-8
    SI_PROBE_MASS = 1e-27

    def __post_init__(self):
        if self.mode == "natural":
            if (self.hbar, self.c, self.planck_mass, self.probe_mass) != (1.0, 1.0, 1.0, 1.0):
                raise ValueError("natural units force hbar = c = M_P = m = 1")
        elif self.mode == "si":
            for name in ("hbar", "c", "planck_mass", "probe_mass"):
                if not getattr(self, name) > 0:
                    raise ValueError(f"{name} must be positive")
        else:
            raise ValueError(f"unknown unit mode {self.mode!r}")

    @classmethod
    def natural(cls) -> "UnitSystem":
        return cls()

    @classmethod
    def si(cls, probe_mass: float = SI_PROBE_MASS, *, hbar: float = SI_HBAR,
           c: float = SI_C, planck_mass: float = SI_PLANCK_MASS) -> "UnitSystem":
        return cls(hbar=hbar, c=c, planck_mass=planck_mass, probe_mass=probe_mass, mode="si")

    @property
    def planck_momentum(self) -> float:
        """M_P c, the momentum scale of the gravity correction."""
        return self.planck_mass * self.c


def _check_basis(a: BasisDescriptor, b: BasisDescriptor) -> None:
    if a != b:
        raise BasisMismatch("operands live on different bases")


def inner(a: StateVector, b: StateVector) -> complex:
    """<a|b>, antilinear in the first argument."""
    _check_basis(a.basis, b.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def superpose(terms: Sequence[tuple]) -> StateVector:
    """Normalized linear combination of ``(coefficient, state)`` pairs."""
    if not terms:
        raise DegenerateSuperposition("empty superposition")
    basis = terms[0][1].basis
    total = np.zeros(basis.dimension, dtype=complex)
    for coef, state in terms:
        _check_basis(basis, state.basis)
        total = total + coef * state.amplitudes
    if not np.any(total):
        raise DegenerateSuperposition("all coefficients vanish")
    return StateVector(basis, total).normalize()


def evolve_diagonal(state: StateVector, energies, t: float, hbar: float = 1.0) -> StateVector:
    """Multiply amplitude n by exp(-i E_n t / hbar)."""
    energies = np.asarray(energies, dtype=float)
    if state.basis.kind != "spectral" or energies.shape != (state.basis.dimension,):
        raise BasisMismatch("energies must match a spectral basis")
    return StateVector(state.basis, state.amplitudes * np.exp(-1j * energies * t / hbar))


def apply(op: HermitianOperator, state: StateVector) -> StateVector:
    _check_basis(op.basis, state.basis)
    return StateVector(state.basis, op.elements @ state.amplitudes)
