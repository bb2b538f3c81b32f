"""Finite square well V(x) = 0 for |x| < a, V0 outside.

Everything is solved in reduced units (x in a, energies in hbar^2/(m a^2)), where
the only parameter is z0 = sqrt(2 m V0) a / hbar.  With u = k a and v = kappa a
the bound states satisfy u^2 + v^2 = z0^2 together with

    even parity:  v = u tan u        odd parity:  v = -u cot u,

and the n-th root lies in ((n-1) pi/2, n pi/2), alternating even/odd.

Only bound states enter the perturbative sums below.  The continuum is not
negligible for this probe; :mod:`gravprobe.oracle` provides a box-discretized
reference that includes it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import bisect

from ..errors import GridResolutionError
from ..hilbert import BasisDescriptor, HermitianOperator, StateVector, UnitSystem
from ..metrology import Method, QfiResult
from ..perturb import PerturbationProblem, perturbation_ket

ROOT_XTOL = 1e-12
QUAD_ORDER = 64
QUAD_RTOL = 1e-4


@dataclass(frozen=True)
class FiniteWellProbe:
    a: float = 1.0
    v0: float = 10.0
    units: UnitSystem = field(default_factory=UnitSystem.natural)
    grid: Optional[BasisDescriptor] = None

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("half-width a must be positive")
        if not self.v0 > 0:
            raise ValueError("well depth V0 must be positive")

    @property
    def energy_unit(self) -> float:
        u = self.units
        return u.hbar ** 2 / (u.probe_mass * self.a ** 2)

    @property
    def z0(self) -> float:
        return float(np.sqrt(2.0 * self.v0 / self.energy_unit))

    @property
    def bound_state_count(self) -> int:
        return int(np.ceil(2.0 * self.z0 / np.pi))

    def sampling_grid(self) -> BasisDescriptor:
        """The probe's grid, or 1025 points over [-6a, 6a]."""
        return self.grid or BasisDescriptor.grid1d(-6 * self.a, 6 * self.a, 1025)


@dataclass(frozen=True, eq=False)
class FswSpectrum:
    """Bound states in reduced units plus physical energies."""

    probe: FiniteWellProbe
    u: np.ndarray
    v: np.ndarray
    parity: tuple
    amplitude: np.ndarray

    @property
    def count(self) -> int:
        return len(self.u)

    @property
    def reduced_energies(self) -> np.ndarray:
        return 0.5 * self.u ** 2

    @property
    def energies(self) -> np.ndarray:
        return self.reduced_energies * self.probe.energy_unit

    def approximate_energies(self) -> np.ndarray:
        return np.array([fsw_approx_energy(self.probe, n + 1) for n in range(self.count)])

    def approximation_errors(self) -> np.ndarray:
        """Relative error of the closed-form approximation for each level."""
        exact = self.energies
        return np.abs(self.approximate_energies() - exact) / exact

    def reduced_wavefunction(self, n: int, x) -> np.ndarray:
        """psi_n at reduced positions x (norm 1 over reduced x)."""
        x = np.asarray(x, dtype=float)
        u, v, amp = self.u[n], self.v[n], self.amplitude[n]
        ax = np.abs(x)
        tail = np.exp(-v * (ax - 1.0))
        if self.parity[n] == "even":
            return amp * np.where(ax <= 1.0, np.cos(u * x), np.cos(u) * tail)
        return amp * np.where(ax <= 1.0, np.sin(u * x), np.sign(x) * np.sin(u) * tail)

    def reduced_second_derivative(self, n: int, x) -> np.ndarray:
        """psi_n'' = 2 (V - E) psi_n in reduced units: -u^2 psi inside, v^2 psi outside."""
        x = np.asarray(x, dtype=float)
        psi = self.reduced_wavefunction(n, x)
        return np.where(np.abs(x) <= 1.0, -self.u[n] ** 2, self.v[n] ** 2) * psi

    def wavefunctions(self) -> list:
        """Every bound state sampled on the probe's grid."""
        basis = self.probe.sampling_grid()
        return [self.state(n, basis) for n in range(self.count)]

    def state(self, n: int, basis: BasisDescriptor) -> StateVector:
        """Level n sampled on a physical-coordinate grid."""
        a = self.probe.a
        values = self.reduced_wavefunction(n, basis.points() / a) / np.sqrt(a)
        return StateVector.from_wavefunction(basis, values)


def _branch(z0: float, k: int):
    even = k % 2 == 1

    # multiplied through by cos u (sin u) so neither form has poles in its bracket
    def f(u):
        w = np.sqrt(max(z0 * z0 - u * u, 0.0))
        if even:
            return u * np.sin(u) - w * np.cos(u)
        return -u * np.cos(u) - w * np.sin(u)

    return f, ("even" if even else "odd")


def fsw_bound_states(probe: FiniteWellProbe) -> FswSpectrum:
    """All bound states, found by bisection within each branch of the quantization condition."""
    z0 = probe.z0
    us, parity = [], []
    for k in range(1, probe.bound_state_count + 1):
        lo, hi = (k - 1) * np.pi / 2, min(k * np.pi / 2, z0)
        f, par = _branch(z0, k)
        us.append(bisect(f, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps))
        parity.append(par)
    u = np.array(us)
    v = np.sqrt(np.maximum(z0 * z0 - u * u, 0.0))
    amp = np.empty_like(u)
    for i, (ui, vi, par) in enumerate(zip(u, v, parity)):
        s = np.sin(2 * ui) / (2 * ui)
        tail = (np.cos(ui) if par == "even" else np.sin(ui)) ** 2 / vi
        amp[i] = 1.0 / np.sqrt((1.0 + s if par == "even" else 1.0 - s) + tail)
    return FswSpectrum(probe, u, v, tuple(parity), amp)


def fsw_approx_energy(probe: FiniteWellProbe, n: int) -> float:
    """Closed-form estimate of level n (1-based).

    hbar^2 pi^2 / (128 m a^2 z0^2) [4 (n-1) z0 - pi + sqrt((4 z0 + pi)^2 - 8 pi n z0)]^2.
    It solves u = (n-1) pi/2 + (pi/2) sqrt(1 - u/z0), i.e. it replaces arccos(x)
    by (pi/2) sqrt(1 - x); expect errors of a few percent, not 1e-2.
    """
    z0 = probe.z0
    root = (4 * z0 + np.pi) ** 2 - 8 * np.pi * n * z0
    if root < 0:
        raise ValueError(f"level {n} lies beyond the approximation's range")
    bracket = 4 * (n - 1) * z0 - np.pi + np.sqrt(root)
    return probe.energy_unit * np.pi ** 2 * bracket ** 2 / (128 * z0 * z0)


def _p4_reduced(spec: FswSpectrum, order: int) -> np.ndarray:
    """int psi_m'' psi_n'' dx over all reduced x (symmetric form of <m|p^4|n>)."""
    n = spec.count
    x, w = np.polynomial.legendre.leggauss(order)
    d2 = np.array([spec.reduced_second_derivative(k, x) for k in range(n)])
    inside = (d2 * w) @ d2.T
    # exterior integrand is c_m c_n exp(-(v_m + v_n) s): Gauss-Laguerre is exact
    s, ws = np.polynomial.laguerre.laggauss(4)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            rate = spec.v[i] + spec.v[j]
            xs = 1.0 + s / rate
            right = np.sum(ws * spec.reduced_second_derivative(i, xs)
                           * spec.reduced_second_derivative(j, xs) * np.exp(s)) / rate
            left = np.sum(ws * spec.reduced_second_derivative(i, -xs)
                          * spec.reduced_second_derivative(j, -xs) * np.exp(s)) / rate
            out[i, j] = right + left
    return inside + out


def fsw_problem(probe: FiniteWellProbe, order: int | None = None) -> PerturbationProblem:
    """Perturbation problem restricted to the bound states (physical units).

    The interior quadrature order defaults to ``QUAD_ORDER`` or 4 points per
    bound state, whichever is larger.  It is repeated at twice the order;
    disagreement beyond 1e-4 relative raises :class:`GridResolutionError`.
    """
    spec = fsw_bound_states(probe)
    if spec.count < 2:
        raise ValueError("need at least two bound states for a perturbation problem")
    order = order or max(QUAD_ORDER, 4 * spec.count + 32)
    p4 = _p4_reduced(spec, order)
    p4_fine = _p4_reduced(spec, 2 * order)
    if np.max(np.abs(p4 - p4_fine)) > QUAD_RTOL * np.max(np.abs(p4_fine)):
        raise GridResolutionError("p^4 quadrature did not converge on doubling")
    # p^4 is even: opposite-parity elements vanish exactly, not to roundoff
    parity = np.array([par == "even" for par in spec.parity])
    p4_fine[parity[:, None] != parity[None, :]] = 0.0
    u = probe.units
    h1_unit = (u.hbar / probe.a) ** 4 / (u.probe_mass * u.planck_momentum ** 2)
    basis = BasisDescriptor.spectral(range(spec.count))
    return PerturbationProblem(spec.energies, HermitianOperator(basis, h1_unit * p4_fine), u)


def fsw_ground_qfi(probe: FiniteWellProbe) -> QfiResult:
    """First-order QFI of the perturbed ground state, summed over bound states only.

    Parity restricts the sum to even excited states, so it vanishes until a third
    bound state exists.  The continuum contribution is omitted (recorded in the
    metadata); see the oracle for its size.
    """
    n_s = probe.bound_state_count
    meta = {"bound_states": n_s, "continuum": "omitted"}
    if n_s < 2:
        return QfiResult(0.0, Method.PERTURBATIVE_KET, metadata=meta)
    problem = fsw_problem(probe)
    level = perturbation_ket(problem, 0)
    return QfiResult(4.0 * level.ket_norm_squared, Method.PERTURBATIVE_KET, metadata=meta)
