"""Quantum and classical Fisher information for pure-state statistical models."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from .errors import (
    BasisMismatch,
    InvalidDistribution,
    NoInformationError,
    NumericalInconsistencyError,
    PhaseUndefinedError,
    SingularOutcomeError,
)
from .hilbert import (
    BasisDescriptor,
    HermitianOperator,
    StateVector,
    _check_basis,
    inner,
    superpose,
)
from .perturb import PerturbedLevel

DEFAULT_DGAMMA = 1e-6
PROB_FLOOR = 1e-14
DERIV_FLOOR = 1e-10


class Method(str, enum.Enum):
    CLOSED_FORM = "closed_form"
    PERTURBATIVE_KET = "perturbative_ket"
    FIDELITY_FD = "fidelity_fd"
    PROBABILITY_FD = "probability_fd"
    ANALYTIC_DERIVATIVE = "analytic_derivative"


@dataclass(frozen=True)
class QfiResult:
    value: float
    method: Method
    units: str = "1/gamma^2"
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise NumericalInconsistencyError(f"non-finite Fisher information {self.value}")
        if self.value < -1e-9:
            raise NumericalInconsistencyError(f"negative Fisher information {self.value}")
        object.__setattr__(self, "method", Method(self.method))

    def __float__(self) -> float:
        return float(self.value)


@dataclass(frozen=True)
class StateFamily:
    """A pure-state statistical model gamma -> |psi_gamma>.

    ``derivative`` is optional; when given it must return d|psi>/dgamma in the
    same gauge as ``evaluator``.  Both callables must be free of side effects.
    """

    evaluator: Callable[[float], StateVector]
    derivative: Optional[Callable[[float], StateVector]] = None

    def __call__(self, gamma: float) -> StateVector:
        return self.evaluator(gamma)


@dataclass(frozen=True, eq=False)
class Povm:
    effects: tuple

    def __post_init__(self):
        effects = tuple(self.effects)
        if not effects:
            raise ValueError("a POVM needs at least one effect")
        basis = effects[0].basis
        total = np.zeros((basis.dimension, basis.dimension), dtype=complex)
        for eff in effects:
            _check_basis(basis, eff.basis)
            if np.linalg.eigvalsh(eff.elements)[0] < -1e-10:
                raise ValueError("POVM effect is not positive semidefinite")
            total += eff.elements
        if np.max(np.abs(total - np.eye(basis.dimension))) > 1e-10:
            raise ValueError("POVM effects do not sum to the identity")
        object.__setattr__(self, "effects", effects)

    @property
    def basis(self) -> BasisDescriptor:
        return self.effects[0].basis

    @classmethod
    def computational(cls, basis: BasisDescriptor) -> "Povm":
        """Projective measurement onto the basis states (energy basis for spectral bases)."""
        return cls(tuple(HermitianOperator.projector(StateVector.basis_state(basis, k))
                         for k in range(basis.dimension)))

    @classmethod
    def binary(cls, state: StateVector) -> "Povm":
        proj = HermitianOperator.projector(state.normalize())
        rest = HermitianOperator(state.basis, np.eye(state.basis.dimension) - proj.elements)
        return cls((proj, rest))

    def probabilities(self, state: StateVector) -> np.ndarray:
        return np.array([e.expectation(state) for e in self.effects])


def qfi_pure(psi: StateVector, dpsi: StateVector) -> QfiResult:
    """4 [<dpsi|dpsi> - |<psi|dpsi>|^2] for a normalized pure state."""
    _check_basis(psi.basis, dpsi.basis)
    overlap = inner(psi, dpsi)
    value = 4.0 * (inner(dpsi, dpsi).real - abs(overlap) ** 2)
    return QfiResult(value, Method.ANALYTIC_DERIVATIVE)


def qfi_perturbative(level: PerturbedLevel, units: str = "1/gamma^2") -> QfiResult:
    """First-order QFI of a perturbed eigenstate, 4 ||ket||^2 (independent of gamma)."""
    return QfiResult(4.0 * level.ket_norm_squared, Method.PERTURBATIVE_KET, units,
                     {"level": level.index, "degenerate_partners": level.degenerate_partners})


def qfi_commuting_superposition(weights, e1, t: float, hbar: float = 1.0) -> QfiResult:
    """QFI of a superposition evolving under a perturbation that commutes with H0.

    Equals 4 (t/hbar)^2 times the variance of the first-order energy shifts under
    the populations ``weights``.
    """
    w = np.asarray(weights, dtype=float)
    e = np.asarray(e1, dtype=float)
    if w.shape != e.shape:
        raise ValueError("weights and energy corrections differ in length")
    if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
        raise InvalidDistribution("weights must be nonnegative and sum to one")
    mean = np.dot(w, e)
    var = np.dot(w, (e - mean) ** 2)
    return QfiResult(4.0 * (t / hbar) ** 2 * var, Method.CLOSED_FORM,
                     metadata={"t": t, "variance": var})


@dataclass(frozen=True)
class TwoLevelRecipe:
    """Equal-weight preparation (|low> + |high>)/sqrt(2) on level indices."""

    low: int
    high: int

    def state(self, basis: BasisDescriptor) -> StateVector:
        return superpose([(1.0, StateVector.basis_state(basis, self.low)),
                          (1.0, StateVector.basis_state(basis, self.high))])


def optimal_two_level_probe(e1) -> tuple:
    """Pair (argmin, argmax) of the energy corrections and its preparation recipe.

    Ties go to the lowest level index.
    """
    e = np.asarray(e1, dtype=float)
    if e.size < 2 or np.ptp(e) == 0.0:
        raise NoInformationError("all energy corrections coincide; every superposition has QFI 0")
    low, high = int(np.argmin(e)), int(np.argmax(e))
    return (low, high), TwoLevelRecipe(low, high)


def sld_pure(psi: StateVector, dpsi: StateVector) -> HermitianOperator:
    """Symmetric logarithmic derivative 2(|dpsi><psi| + |psi><dpsi|) of a pure state."""
    _check_basis(psi.basis, dpsi.basis)
    a, b = psi.amplitudes, dpsi.amplitudes
    return HermitianOperator(psi.basis, 2.0 * (np.outer(b, a.conj()) + np.outer(a, b.conj())))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|^2, the Uhlmann fidelity restricted to pure states."""
    return abs(inner(a, b)) ** 2


def bures_distance_squared(a: StateVector, b: StateVector) -> float:
    """2 - 2 sqrt(F), evaluated as ||a - e^{-i arg<a|b>} b||^2 to avoid cancellation."""
    ov = inner(a, b)
    phase = ov / abs(ov) if ov != 0 else 1.0
    return float(np.sum(np.abs(a.amplitudes - np.conj(phase) * b.amplitudes) ** 2))


def _fidelity_qfi_raw(family: StateFamily, gamma: float, h: float):
    a, b = family(gamma), family(gamma + h)
    f = fidelity(a, b)
    if f > 1.0 + 1e-12:
        raise NumericalInconsistencyError(f"fidelity {f!r} exceeds one")
    if 1.0 - f >= 1e-2:
        raise ValueError(f"step {h:g} too large: 1 - F = {1.0 - f:.3g}")
    return 4.0 * bures_distance_squared(a, b) / h ** 2


def qfi_from_fidelity(family: StateFamily, gamma: float,
                      dgamma: float = DEFAULT_DGAMMA) -> QfiResult:
    """QFI from the Bures metric g_B = F_q / 4 between gamma and gamma + dgamma.

    The forward-step estimate has an O(dgamma) bias, removed by Richardson
    extrapolation over steps dgamma and dgamma/2.
    """
    if not dgamma > 0:
        raise ValueError("dgamma must be positive")
    q_h = _fidelity_qfi_raw(family, gamma, dgamma)
    q_h2 = _fidelity_qfi_raw(family, gamma, dgamma / 2)
    value = 2.0 * q_h2 - q_h
    if -1e-9 <= value < 0.0:
        value = 0.0
    return QfiResult(value, Method.FIDELITY_FD,
                     metadata={"gamma": gamma, "dgamma": dgamma, "q_step": q_h, "q_half_step": q_h2})


def family_derivative(family: StateFamily, gamma: float, dgamma: float = DEFAULT_DGAMMA) -> StateVector:
    """Analytic derivative if the family has one, else a gauge-fixed central difference."""
    if family.derivative is not None:
        return family.derivative(gamma)
    plus = family(gamma + dgamma).fix_gauge()
    minus = family(gamma - dgamma).fix_gauge()
    return StateVector(plus.basis, (plus.amplitudes - minus.amplitudes) / (2 * dgamma))


def cfi(povm: Povm, family: StateFamily, gamma: float,
        dgamma: float = DEFAULT_DGAMMA) -> QfiResult:
    """Classical Fisher information sum_m (d p_m)^2 / p_m of a fixed measurement.

    Probability derivatives come from the family's analytic state derivative
    (d p_m = 2 Re <psi|E_m|dpsi>) when available, otherwise from central
    differences of p_m at gamma +- dgamma.
    """
    if not dgamma > 0:
        raise ValueError("dgamma must be positive")
    psi = family(gamma)
    if psi.basis != povm.basis:
        raise BasisMismatch("family and POVM live on different bases")
    p = povm.probabilities(psi)
    if family.derivative is not None:
        dpsi = family.derivative(gamma)
        v, dv = psi.amplitudes, dpsi.amplitudes
        dp = np.array([2.0 * np.real(np.vdot(v, e.elements @ dv)) for e in povm.effects])
        method = Method.ANALYTIC_DERIVATIVE
    else:
        dp = (povm.probabilities(family(gamma + dgamma))
              - povm.probabilities(family(gamma - dgamma))) / (2 * dgamma)
        method = Method.PROBABILITY_FD
    total = 0.0
    skipped = []
    for m, (pm, dpm) in enumerate(zip(p, dp)):
        if pm < PROB_FLOOR and abs(dpm) < DERIV_FLOOR:
            skipped.append(m)
            continue
        if pm <= 0.0:
            raise SingularOutcomeError(
                f"outcome {m} has probability {pm:.3g} but derivative {dpm:.3g}")
        total += dpm ** 2 / pm
    return QfiResult(total, method, metadata={"gamma": gamma, "dgamma": dgamma,
                                              "skipped_outcomes": skipped})


class PositionFisher(NamedTuple):
    """Amplitude/phase split of the QFI for a position measurement."""

    cfi_position: float
    phase_norm_term: float
    phase_mean_term: float
    radial_overlap: float

    @property
    def qfi(self) -> float:
        return self.cfi_position + self.phase_norm_term - self.phase_mean_term


def position_fisher_decomposition(family: StateFamily, gamma: float,
                                  dgamma: float = DEFAULT_DGAMMA,
                                  support_tol: float = 1e-10) -> PositionFisher:
    """Split psi = e^{i theta} r and return 4||dr||^2, 4||dtheta r||^2, 4(int dtheta r^2)^2.

    The first term is the Fisher information of a position measurement; the QFI
    is the first plus the second minus the third.  ``radial_overlap`` is
    int dr r dx, which vanishes for a normalized family.
    """
    psi = family(gamma)
    if psi.basis.kind != "grid1d":
        raise BasisMismatch("position decomposition needs a 1D grid family")
    dpsi = family_derivative(family, gamma, dgamma)
    v, dv = psi.amplitudes, dpsi.amplitudes
    r = np.abs(v)
    inside = r > support_tol
    support = np.flatnonzero(inside)
    if support.size == 0:
        raise PhaseUndefinedError("wavefunction vanishes everywhere")
    holes = ~inside[support[0]:support[-1] + 1]
    if np.any(holes):
        raise PhaseUndefinedError("wavefunction has interior zeros; the phase is undefined there")
    dr = np.zeros_like(r)
    dtheta = np.zeros_like(r)
    cross = np.conj(v[inside]) * dv[inside]
    dr[inside] = cross.real / r[inside]
    dtheta[inside] = cross.imag / r[inside] ** 2
    cfi_pos = 4.0 * float(np.sum(dr ** 2))
    phase_norm = 4.0 * float(np.sum((dtheta * r) ** 2))
    phase_mean = 4.0 * float(np.sum(dtheta * r ** 2)) ** 2
    return PositionFisher(cfi_pos, phase_norm, phase_mean, float(np.sum(dr * r)))
