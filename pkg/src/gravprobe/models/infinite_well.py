"""Infinite square well of width a in one or more dimensions.

Sine eigenfunctions diagonalize p^2 and therefore p^4, so H1 commutes with H0:
eigenstates carry no information and superpositions gain it through the
relative phase t * (E1_n - E1_m) / hbar.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from ..errors import NoInformationError, NumericalInconsistencyError
from ..hilbert import BasisDescriptor, HermitianOperator, UnitSystem
from ..metrology import Method, QfiResult, qfi_commuting_superposition
from ..perturb import PerturbationProblem

QFI_UNIT = "1/gamma^2"


@dataclass(frozen=True)
class InfiniteWellProbe:
    a: float = 1.0
    dims: int = 1
    units: UnitSystem = field(default_factory=UnitSystem.natural)
    quantum_numbers: tuple = ()

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("well width must be positive")
        if self.dims < 1:
            raise ValueError("dims must be >= 1")
        if self.quantum_numbers:
            _quantum_numbers(self, self.quantum_numbers)

    @property
    def energy_unit(self) -> float:
        """pi^2 hbar^2 / (2 m a^2): the 1D ground-state energy."""
        u = self.units
        return np.pi ** 2 * u.hbar ** 2 / (2 * u.probe_mass * self.a ** 2)

    @property
    def momentum_unit(self) -> float:
        return np.pi * self.units.hbar / self.a


def _quantum_numbers(probe: InfiniteWellProbe, ns) -> tuple:
    ns = (ns,) if np.isscalar(ns) else tuple(ns)
    if len(ns) != probe.dims or any(int(n) != n or n < 1 for n in ns):
        raise ValueError(f"need {probe.dims} positive integer quantum numbers, got {ns}")
    return tuple(int(n) for n in ns)


def isw_energy(probe: InfiniteWellProbe, ns) -> float:
    return probe.energy_unit * sum(n * n for n in _quantum_numbers(probe, ns))


def isw_first_order_energy(probe: InfiniteWellProbe, ns) -> float:
    """<p^4> / (m (M_P c)^2) with p^2 = (pi hbar / a)^2 sum n_i^2."""
    u = probe.units
    s = sum(n * n for n in _quantum_numbers(probe, ns))
    return (probe.momentum_unit ** 2 * s) ** 2 / (u.probe_mass * u.planck_momentum ** 2)


def isw_closed_forms(probe: InfiniteWellProbe, t: float, partner=None) -> QfiResult:
    """QFI of (|ground> + |partner>)/sqrt(2) after time t, with both closed forms.

    Level form: t^2 hbar^6 pi^8 (S^2 - d^2)^2 / (a^8 m^2 (M_P c)^4), S = sum n_i^2.
    Energy form: 256 t^2 m^2 E^4 (S^2 - d^2)^2 / (hbar^2 (M_P c)^4 (S + d)^4), with
    E the mean unperturbed energy.  Both are reported and must agree.  The
    partner defaults to the probe's ``quantum_numbers``.
    """
    u = probe.units
    d = probe.dims
    if partner is None:
        if not probe.quantum_numbers:
            raise ValueError("no partner given and the probe carries no quantum numbers")
        partner = probe.quantum_numbers
    ns = _quantum_numbers(probe, partner)
    s = sum(n * n for n in ns)
    lead = t * u.hbar ** 3 * np.pi ** 4 / (probe.a ** 4 * u.probe_mass * u.planck_momentum ** 2)
    level_form = lead ** 2 * (s * s - d * d) ** 2
    mean_e = probe.energy_unit * (d + s) / 2.0
    energy_lead = 16.0 * t * u.probe_mass * mean_e ** 2 / (u.hbar * u.planck_momentum ** 2)
    energy_form = energy_lead ** 2 * (s * s - d * d) ** 2 / float(s + d) ** 4
    check = qfi_commuting_superposition(
        [0.5, 0.5],
        [isw_first_order_energy(probe, (1,) * d), isw_first_order_energy(probe, ns)],
        t, u.hbar)
    scale = max(level_form, energy_form, check.value)
    if scale > 0 and max(abs(level_form - energy_form), abs(level_form - check.value)) > 1e-12 * scale:
        raise NumericalInconsistencyError("closed forms disagree")
    return QfiResult(level_form, Method.CLOSED_FORM, QFI_UNIT,
                     {"partner": ns, "t": t, "energy_form": energy_form, "mean_energy": mean_e,
                      "commuting_formula": check.value})


def isw_weighted_ratio(*ns) -> Fraction:
    """2D QFI over the sum of its 1D analogues' QFIs, for the (1,..,1) + (ns) probe.

    R = ((sum n_i^2)^2 - d^2)^2 / sum_i (n_i^4 - 1)^2, exact.
    """
    ns = tuple(int(n) for n in ns)
    if len(ns) < 2 or any(n < 1 for n in ns):
        raise ValueError("need at least two positive quantum numbers")
    d = len(ns)
    s = sum(n * n for n in ns)
    den = sum((n ** 4 - 1) ** 2 for n in ns)
    if den == 0:
        raise NoInformationError("the 1D analogues all carry zero information")
    return Fraction((s * s - d * d) ** 2, den)


def isw_ratio_surface(n_max: int) -> dict:
    """Weighted ratio over the 2D lattice 1..n_max (excluding the ground state)."""
    return {(nx, ny): isw_weighted_ratio(nx, ny)
            for nx, ny in product(range(1, n_max + 1), repeat=2) if (nx, ny) != (1, 1)}


def isw_p4_matrix(n_levels: int, quad_order: int | None = None) -> np.ndarray:
    """<m|p^4|n>/(pi hbar/a)^4 in the 1D sine basis, by Gauss-Legendre quadrature.

    Computed as int psi_m'' psi_n'' dx so the result does not presume diagonality;
    the diagonality check in :func:`isw_problem` is a genuine test.
    """
    order = quad_order or 4 * n_levels + 32
    x, w = np.polynomial.legendre.leggauss(order)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    k = np.arange(1, n_levels + 1)
    # psi_n = sqrt(2) sin(n pi x), psi_n'' = -(n pi)^2 psi_n; divide out pi^4
    d2 = -np.sqrt(2.0) * k[:, None] ** 2 * np.sin(np.pi * k[:, None] * x[None, :])
    return (d2 * w[None, :]) @ d2.T


def isw_problem(probe: InfiniteWellProbe, n_levels: int = 16) -> PerturbationProblem:
    """1D perturbation problem on the lowest ``n_levels`` sine states."""
    if probe.dims != 1:
        raise ValueError("isw_problem builds the 1D spectral problem")
    u = probe.units
    p4 = isw_p4_matrix(n_levels) * probe.momentum_unit ** 4 / (u.probe_mass * u.planck_momentum ** 2)
    off = p4 - np.diag(np.diag(p4))
    if np.max(np.abs(off)) > 1e-12 * np.max(np.abs(p4)):
        raise NumericalInconsistencyError("p^4 is not diagonal in the sine basis")
    basis = BasisDescriptor.spectral(range(1, n_levels + 1))
    energies = probe.energy_unit * np.arange(1, n_levels + 1) ** 2
    return PerturbationProblem(energies, HermitianOperator(basis, np.diag(np.diag(p4))), u)


def isw_min_correction_level(probe: InfiniteWellProbe, n_max: int = 10) -> tuple:
    """Quantum numbers minimizing E1 over the lattice 1..n_max per axis (exhaustive)."""
    lattice = product(range(1, n_max + 1), repeat=probe.dims)
    return min(lattice, key=lambda ns: (isw_first_order_energy(probe, ns), ns))
