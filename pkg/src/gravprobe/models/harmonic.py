"""Harmonic-oscillator probes in one and two dimensions.

The gravity correction is H1 = p^4 / (m (M_P c)^2).  With the dimensionless
momentum quadrature P = i(a^dag - a)/sqrt(2) we have p = sqrt(hbar m omega) P, so

    H1 = hbar*omega * kappa * P^4,    kappa = hbar m omega / (M_P c)^2,

and every first-order QFI is kappa^2 times a pure number.  kappa^2 is the unit
(hbar m omega)^2 / (M_P c)^4 used throughout the oscillator tables.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ..errors import TruncationError, UnsupportedProbe
from ..hilbert import BasisDescriptor, HermitianOperator, StateVector, UnitSystem, inner
from ..metrology import Method, QfiResult, qfi_commuting_superposition, qfi_pure, qfi_from_fidelity, StateFamily
from ..perturb import (
    PerturbationProblem,
    degenerate_good_basis,
    degenerate_levels,
    perturbation_ket,
    perturbed_state,
    perturbed_state_derivative,
)

QFI_UNIT = "(hbar*m*omega)^2/(M_P*c)^4"
SELECTION_MARGIN = 8


@dataclass(frozen=True)
class HarmonicProbe:
    omega: float = 1.0
    dims: int = 1
    truncation: int = 24
    units: UnitSystem = field(default_factory=UnitSystem.natural)

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.dims not in (1, 2):
            raise ValueError("oscillator probes are 1D or 2D")
        if self.truncation < SELECTION_MARGIN + 1:
            raise ValueError("truncation must leave the p^4 selection-rule margin")

    @property
    def kappa(self) -> float:
        u = self.units
        return u.hbar * u.probe_mass * self.omega / u.planck_momentum ** 2

    @property
    def energy_unit(self) -> float:
        return self.units.hbar * self.omega

    @property
    def qfi_unit(self) -> float:
        """(hbar m omega)^2 / (M_P c)^4 in the active unit system."""
        return self.kappa ** 2

    def require(self, n_max: int) -> None:
        if self.truncation < n_max + SELECTION_MARGIN:
            raise TruncationError(
                f"truncation {self.truncation} < {n_max} + {SELECTION_MARGIN} selection-rule margin")


def annihilation(size: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, size)), k=1)


def momentum_quadrature(size: int) -> np.ndarray:
    """P = i (a^dag - a) / sqrt(2), truncated to ``size`` levels."""
    a = annihilation(size)
    return 1j * (a.T - a) / np.sqrt(2.0)


@lru_cache(maxsize=32)
def _p_powers(size: int) -> tuple:
    # four extra levels make every kept element of P^2 and P^4 exact
    p = momentum_quadrature(size + 4)
    p2 = (p @ p).real
    p4 = p2 @ p2
    return p2[:size, :size].copy(), p4[:size, :size].copy()


def p2_matrix(size: int) -> np.ndarray:
    return _p_powers(size)[0]


def p4_matrix(size: int) -> np.ndarray:
    """<m|P^4|n> on the lowest ``size`` Fock states (exact, not truncated-then-multiplied)."""
    return _p_powers(size)[1]


def ho_first_order_energy(probe: HarmonicProbe, n: int) -> float:
    """E1_n = 3 m hbar^2 omega^2 (1 + 2n + 2n^2) / (4 (M_P c)^2)."""
    return probe.energy_unit * probe.kappa * 0.75 * (1 + 2 * n + 2 * n * n)


def ho_problem_1d(probe: HarmonicProbe) -> PerturbationProblem:
    n = probe.truncation
    basis = BasisDescriptor.spectral(range(n))
    energies = probe.energy_unit * (np.arange(n) + 0.5)
    h1 = HermitianOperator(basis, probe.energy_unit * probe.kappa * p4_matrix(n))
    return PerturbationProblem(energies, h1, probe.units)


def ho2d_labels(n_max: int) -> list:
    """Fock pairs (nx, ny) with nx + ny <= n_max, ordered by energy then ny."""
    pairs = [(nx, s - nx) for s in range(n_max + 1) for nx in range(s, -1, -1)]
    return pairs


def ho_problem_2d(probe: HarmonicProbe) -> PerturbationProblem:
    """Two-axis problem, H1 ∝ Px^4 + Py^4 + 2 Px^2 Py^2, on shells nx + ny < truncation."""
    n_max = probe.truncation - 1
    size = n_max + 1
    p2, p4 = p2_matrix(size), p4_matrix(size)
    eye = np.eye(size)
    full = np.kron(p4, eye) + np.kron(eye, p4) + 2.0 * np.kron(p2, p2)
    labels = ho2d_labels(n_max)
    flat = [nx * size + ny for nx, ny in labels]
    h1 = full[np.ix_(flat, flat)]
    basis = BasisDescriptor.spectral(labels)
    energies = probe.energy_unit * np.array([nx + ny + 1.0 for nx, ny in labels])
    return PerturbationProblem(energies, HermitianOperator(basis, probe.energy_unit * probe.kappa * h1),
                               probe.units)


def ho_eigenstate_polynomial(n: int) -> Fraction:
    """(65 n^4 + 130 n^3 + 487 n^2 + 422 n + 156) / 32."""
    return Fraction(65 * n**4 + 130 * n**3 + 487 * n**2 + 422 * n + 156, 32)


def ho_eigenstate_qfi(probe: HarmonicProbe, n: int) -> QfiResult:
    """QFI of the perturbed eigenstate |n>, cross-checked against the Fock-basis ket."""
    if probe.dims != 1:
        raise UnsupportedProbe("closed form holds for the 1D oscillator")
    probe.require(n)
    closed = float(ho_eigenstate_polynomial(n)) * probe.qfi_unit
    ket = 4.0 * perturbation_ket(ho_problem_1d(probe), n).ket_norm_squared
    rel = abs(ket - closed) / closed
    return QfiResult(closed, Method.CLOSED_FORM, QFI_UNIT,
                     {"n": n, "ket_value": ket, "ket_relative_deviation": rel,
                      "in_table_units": float(ho_eigenstate_polynomial(n))})


def ho_superposition_qfi(probe: HarmonicProbe, n: int, t: float) -> QfiResult:
    """QFI of (|0> + |n>)/sqrt(2) built from unperturbed eigenstates and evolved for time t."""
    if n < 0:
        raise ValueError("n must be a nonnegative level index")
    u = probe.units
    value = 9.0 * (t * probe.omega) ** 2 * n**2 * (1 + n) ** 2 / 4.0 * probe.qfi_unit
    check = qfi_commuting_superposition(
        [0.5, 0.5], [ho_first_order_energy(probe, 0), ho_first_order_energy(probe, n)], t, u.hbar)
    rel = abs(check.value - value) / value if value else abs(check.value)
    return QfiResult(value, Method.CLOSED_FORM, QFI_UNIT,
                     {"n": n, "t": t, "commuting_formula": check.value, "relative_deviation": rel})


def static_superposition_qfi(problem: PerturbationProblem, indices, weights=None) -> QfiResult:
    """QFI at gamma = 0 of sum_i w_i |psi^gamma_i> (normalized), via the pure-state formula.

    Degenerate subspaces touched by ``indices`` are rotated to the H1 good basis
    first; the rotation is the identity whenever H1 is already diagonal there.
    """
    indices = list(indices)
    w = np.ones(len(indices)) if weights is None else np.asarray(weights, dtype=complex)
    for i in indices:
        group = degenerate_levels(problem, i)
        if len(group) > 1:
            problem = degenerate_good_basis(problem, group)
    basis = problem.basis
    psi = np.zeros(basis.dimension, dtype=complex)
    dpsi = np.zeros(basis.dimension, dtype=complex)
    for wi, i in zip(w, indices):
        psi[i] += wi
        dpsi += wi * perturbation_ket(problem, i).ket_coefficients
    nrm = np.linalg.norm(psi)
    res = qfi_pure(StateVector(basis, psi / nrm), StateVector(basis, dpsi / nrm))
    return QfiResult(res.value, Method.PERTURBATIVE_KET, metadata={"indices": indices})


def ho_static_superposition_qfi(probe: HarmonicProbe, levels) -> QfiResult:
    """1D oscillator: first-order QFI of an equal superposition of perturbed eigenstates."""
    probe.require(max(levels))
    res = static_superposition_qfi(ho_problem_1d(probe), levels)
    return QfiResult(res.value, Method.PERTURBATIVE_KET, QFI_UNIT,
                     {"levels": tuple(levels), "in_table_units": res.value / probe.qfi_unit})


HO2D_STATES = {
    "00": ((0, 0),),
    "10": ((1, 0),),
    "00+01": ((0, 0), (0, 1)),
    "10+01": ((1, 0), (0, 1)),
}

# 1D analogues per Table row; "s01" is (|0> + |1>)/sqrt(2)
HO2D_PAIRING = {
    "00": ("0", "0"),
    "10": ("0", "1"),
    "00+01": ("0", "s01"),
    "10+01": ("s01", "s01"),
}

_ALIASES = {
    "|0,0>": "00", "|1,0>": "10",
    "(|0,0>+|0,1>)/sqrt2": "00+01", "(|1,0>+|0,1>)/sqrt2": "10+01",
}


def _state_key(state_spec: str) -> str:
    key = _ALIASES.get(state_spec.replace(" ", ""), state_spec)
    if key not in HO2D_STATES:
        raise UnsupportedProbe(f"unsupported 2D oscillator state {state_spec!r}; "
                               f"choose one of {sorted(HO2D_STATES)}")
    return key


def ho2d_qfi(probe: HarmonicProbe, state_spec: str) -> QfiResult:
    """First-order QFI of one of the four tabulated 2D oscillator probes."""
    key = _state_key(state_spec)
    if probe.dims != 2:
        raise UnsupportedProbe("ho2d_qfi needs a 2D probe")
    labels = HO2D_STATES[key]
    probe.require(max(nx + ny for nx, ny in labels))
    problem = ho_problem_2d(probe)
    indices = [problem.basis.index(lab) for lab in labels]
    res = static_superposition_qfi(problem, indices)
    return QfiResult(res.value, Method.PERTURBATIVE_KET, QFI_UNIT,
                     {"state": key, "in_table_units": res.value / probe.qfi_unit})


def ho1d_table_value(name: str, probe: HarmonicProbe) -> float:
    """1D comparison QFIs in table units: "0", "1" (eigenstates) or "s01" (superposition)."""
    if name == "s01":
        return ho_static_superposition_qfi(probe, (0, 1)).metadata["in_table_units"]
    return 4.0 * perturbation_ket(ho_problem_1d(probe), int(name)).ket_norm_squared / probe.qfi_unit


def ho2d_weighted_ratio(state_spec: str, probe: HarmonicProbe | None = None) -> float:
    """2D QFI divided by the summed QFIs of its paired 1D analogues."""
    key = _state_key(state_spec)
    p2d = probe or HarmonicProbe(dims=2, truncation=16)
    p1d = HarmonicProbe(omega=p2d.omega, dims=1, truncation=p2d.truncation, units=p2d.units)
    num = ho2d_qfi(p2d, key).metadata["in_table_units"]
    den = sum(ho1d_table_value(name, p1d) for name in HO2D_PAIRING[key])
    return num / den


def _superposition_family(probe: HarmonicProbe, pair, t: float):
    from ..oracle import discretize, evolution_derivative, evolve_exact

    n1, n2 = pair
    problem = ho_problem_1d(probe)
    levels = [perturbation_ket(problem, n) for n in (n1, n2)]
    ham = discretize(probe, representation="fock")
    basis = problem.basis

    def prepared(gamma):
        chi = sum(perturbed_state(lv, gamma).amplitudes for lv in levels)
        dchi = sum(perturbed_state_derivative(lv, gamma).amplitudes for lv in levels)
        nrm = np.linalg.norm(chi)
        psi0 = chi / nrm
        dpsi0 = dchi / nrm - psi0 * np.real(np.vdot(psi0, dchi)) / nrm
        return StateVector(basis, psi0), StateVector(basis, dpsi0)

    def evaluator(gamma):
        psi0, _ = prepared(gamma)
        out = evolve_exact(ham, gamma, psi0, t)
        if abs(out.amplitudes[-1]) ** 2 > 1e-10:
            raise TruncationError("evolved state populates the top Fock level")
        return out

    def derivative(gamma):
        psi0, dpsi0 = prepared(gamma)
        return evolution_derivative(ham, gamma, psi0, dpsi0, t)

    return StateFamily(evaluator, derivative)


def ho_perturbed_superposition_qfi(probe: HarmonicProbe, pair, t: float, gamma: float = 1e-6,
                                   method: str = "fidelity", dgamma: float = 1e-6) -> QfiResult:
    """QFI of (|psi^g_n1> + |psi^g_n2>)/sqrt(2) evolved exactly under H0 + gamma H1.

    ``method="fidelity"`` differentiates through the Bures metric; ``"analytic"``
    uses the exact eigenbasis derivative and stays accurate for very long times
    (omega t ~ 1e13 in SI runs), where finite differences of phases lose all
    precision.
    """
    n1, n2 = pair
    if n1 == n2:
        raise ValueError("pair must name two distinct levels")
    if probe.dims != 1:
        raise UnsupportedProbe("perturbed superpositions are built for the 1D oscillator")
    probe.require(max(pair))
    family = _superposition_family(probe, pair, t)
    if method == "fidelity":
        res = qfi_from_fidelity(family, gamma, dgamma)
    elif method == "analytic":
        psi = family(gamma)
        res = qfi_pure(psi, family.derivative(gamma))
        res = QfiResult(res.value, Method.ANALYTIC_DERIVATIVE, metadata={"gamma": gamma})
    else:
        raise ValueError(f"unknown method {method!r}")
    meta = dict(res.metadata, pair=(n1, n2), t=t, in_table_units=res.value / probe.qfi_unit)
    return QfiResult(res.value, res.method, QFI_UNIT, meta)


def superposition_overlap_term(problem: PerturbationProblem, i: int, j: int) -> complex:
    """<psi|dpsi> for (|i> + |j>)/sqrt(2) at gamma = 0; zero whenever parity separates i and j."""
    ki = perturbation_ket(problem, i).ket()
    kj = perturbation_ket(problem, j).ket()
    psi = StateVector.basis_state(problem.basis, i) + StateVector.basis_state(problem.basis, j)
    return inner(psi * (1 / np.sqrt(2)), (ki + kj) * (1 / np.sqrt(2)))
