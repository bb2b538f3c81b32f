"""First-order Rayleigh-Schroedinger perturbation theory on a spectral basis."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateCouplingError, NonPerturbativeWarning, NotDegenerateError
from .hilbert import BasisDescriptor, HermitianOperator, StateVector, UnitSystem

# relative to max |H1|; equals the absolute 1e-10 rule for O(1) natural-unit matrices
COUPLING_TOL = 1e-10
REGIME_LIMIT = 0.1


@dataclass(frozen=True, eq=False)
class PerturbationProblem:
    """Unperturbed spectrum plus the matrix of H1 in the unperturbed eigenbasis.

    ``rotation`` is the unitary whose columns express the current basis states in
    the original one; it is the identity unless :func:`degenerate_good_basis` has
    been applied.
    """

    unperturbed_energies: np.ndarray
    h1: HermitianOperator
    units: UnitSystem = field(default_factory=UnitSystem.natural)
    rotation: Optional[np.ndarray] = None

    def __post_init__(self):
        e = np.array(self.unperturbed_energies, dtype=float)
        if e.shape != (self.h1.basis.dimension,):
            raise ValueError("energy array length must equal the H1 dimension")
        if np.any(np.diff(e) < 0):
            raise ValueError("unperturbed energies must be sorted ascending")
        e.setflags(write=False)
        object.__setattr__(self, "unperturbed_energies", e)
        if self.h1.basis.kind != "spectral":
            raise ValueError("perturbation problems live on spectral bases")

    @property
    def basis(self) -> BasisDescriptor:
        return self.h1.basis

    @property
    def dimension(self) -> int:
        return self.basis.dimension

    def default_degeneracy_tol(self) -> float:
        e = self.unperturbed_energies
        return 1e-9 * max(float(e[-1] - e[0]), np.finfo(float).tiny)

    def degenerate_partners(self, n: int, degeneracy_tol: Optional[float] = None) -> tuple:
        tol = self.default_degeneracy_tol() if degeneracy_tol is None else degeneracy_tol
        e = self.unperturbed_energies
        return tuple(int(m) for m in np.flatnonzero(np.abs(e - e[n]) < tol) if m != n)


@dataclass(frozen=True, eq=False)
class PerturbedLevel:
    index: int
    e0: float
    e1: float
    ket_coefficients: np.ndarray
    degenerate_partners: tuple
    basis: BasisDescriptor

    @property
    def ket_norm_squared(self) -> float:
        return float(np.sum(np.abs(self.ket_coefficients) ** 2))

    def ket(self) -> StateVector:
        return StateVector(self.basis, self.ket_coefficients)


def _check_index(problem: PerturbationProblem, n: int) -> None:
    if not 0 <= n < problem.dimension:
        raise IndexError(f"level {n} outside a basis of dimension {problem.dimension}")


def first_order_energy(problem: PerturbationProblem, n: int) -> float:
    """E1_n = <n|H1|n>."""
    _check_index(problem, n)
    value = problem.h1.elements[n, n]
    assert abs(value.imag) < 1e-12 * max(1.0, abs(value.real))
    return float(value.real)


def perturbation_ket(problem: PerturbationProblem, n: int,
                     degeneracy_tol: Optional[float] = None) -> PerturbedLevel:
    """Coefficients c_m = <m|H1|n> / (E_n - E_m), excluding n and its degenerate partners."""
    _check_index(problem, n)
    h = problem.h1.elements
    e = problem.unperturbed_energies
    partners = problem.degenerate_partners(n, degeneracy_tol)
    scale = float(np.max(np.abs(h)))
    for m in partners:
        if abs(h[m, n]) > COUPLING_TOL * scale:
            raise DegenerateCouplingError(
                f"H1 couples level {n} to degenerate level {m} "
                f"(|<m|H1|n>| = {abs(h[m, n]):.3e}); run degenerate_good_basis first"
            )
    excluded = np.zeros(problem.dimension, dtype=bool)
    excluded[n] = True
    excluded[list(partners)] = True
    coeffs = np.zeros(problem.dimension, dtype=complex)
    keep = ~excluded
    coeffs[keep] = h[keep, n] / (e[n] - e[keep])
    coeffs.setflags(write=False)
    return PerturbedLevel(
        index=n,
        e0=float(e[n]),
        e1=first_order_energy(problem, n),
        ket_coefficients=coeffs,
        degenerate_partners=partners,
        basis=problem.basis,
    )


def perturbed_state(level: PerturbedLevel, gamma: float) -> StateVector:
    """Normalized |n> + gamma |n^(1)>.

    Leaving the first-order regime (``|gamma| * ||ket|| >= 0.1``) is not fatal:
    a :class:`NonPerturbativeWarning` is issued and recorded in the metadata.
    """
    amps = gamma * level.ket_coefficients.astype(complex)
    amps[level.index] += 1.0
    strength = abs(gamma) * np.sqrt(level.ket_norm_squared)
    meta = {"gamma": gamma, "regime_parameter": strength}
    if strength >= REGIME_LIMIT:
        warnings.warn(
            f"gamma*||ket|| = {strength:.3g} is outside the first-order regime",
            NonPerturbativeWarning,
            stacklevel=2,
        )
        meta["warning"] = "NonPerturbativeWarning"
    return StateVector(level.basis, amps / np.linalg.norm(amps), meta)


def perturbed_state_derivative(level: PerturbedLevel, gamma: float) -> StateVector:
    """d/dgamma of :func:`perturbed_state` (the ket is orthogonal to |n>)."""
    k = level.ket_coefficients.astype(complex)
    k2 = level.ket_norm_squared
    norm = np.sqrt(1.0 + gamma * gamma * k2)
    unnorm = gamma * k
    unnorm[level.index] += 1.0
    return StateVector(level.basis, k / norm - unnorm * gamma * k2 / norm**3)


def degenerate_good_basis(problem: PerturbationProblem, level_indices: Sequence[int],
                          degeneracy_tol: Optional[float] = None) -> PerturbationProblem:
    """Rotate a degenerate subspace so that H1 is diagonal on it.

    A block that is already diagonal (to ``COUPLING_TOL``) is left untouched, so
    the rotation is then exactly the identity.
    """
    idx = sorted(int(i) for i in level_indices)
    for i in idx:
        _check_index(problem, i)
    e = problem.unperturbed_energies
    tol = problem.default_degeneracy_tol() if degeneracy_tol is None else degeneracy_tol
    if np.ptp(e[idx]) >= tol:
        raise NotDegenerateError(f"levels {idx} do not share one unperturbed energy")
    h = problem.h1.elements
    block = h[np.ix_(idx, idx)]
    off = block - np.diag(np.diag(block))
    rotation = np.eye(problem.dimension, dtype=complex) if problem.rotation is None \
        else np.array(problem.rotation, dtype=complex)
    if len(idx) < 2 or np.max(np.abs(off)) <= COUPLING_TOL * float(np.max(np.abs(h))):
        return problem
    _, vecs = np.linalg.eigh(block)
    u = np.eye(problem.dimension, dtype=complex)
    u[np.ix_(idx, idx)] = vecs
    new_h = u.conj().T @ h @ u
    return PerturbationProblem(
        unperturbed_energies=e,
        h1=HermitianOperator(problem.basis, new_h),
        units=problem.units,
        rotation=rotation @ u,
    )


def degenerate_levels(problem: PerturbationProblem, n: int,
                      degeneracy_tol: Optional[float] = None) -> list:
    """Indices sharing level n's unperturbed energy, n included."""
    return sorted((n,) + problem.degenerate_partners(n, degeneracy_tol))
