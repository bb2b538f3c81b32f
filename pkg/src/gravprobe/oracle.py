"""Brute-force references: exact diagonalization and exact evolution of H0 + gamma H1.

Each probe model gets a discretization in which p^2 and p^4 are built
spectrally, so p^4 is exactly (p^2)^2 in the chosen basis:

* infinite well: sine collocation on the interior grid (hard wall),
* oscillator: Fourier collocation on a periodic grid, or the truncated Fock basis,
* finite well: Galerkin sine modes in a hard-walled box with exact potential
  matrix elements (collocating the step potential converges far too slowly),
* free Gaussian: a momentum grid, where everything is diagonal.

All quantities are in the physical units of the probe's :class:`UnitSystem`;
validation runs use natural units.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate

from .errors import (
    BasisMismatch,
    GridResolutionError,
    NumericalInconsistencyError,
    UnsupportedDiscretization,
)
from .hilbert import BasisDescriptor, HermitianOperator, StateVector, _check_basis, superpose
from .metrology import StateFamily
from .models.finite_well import FiniteWellProbe, fsw_bound_states
from .models.free_particle import FreeGaussianProbe
from .models.harmonic import HarmonicProbe, ho_problem_1d, ho_problem_2d
from .models.infinite_well import InfiniteWellProbe

MIN_RESOLUTION = 2 ** 7
MAX_RESOLUTION = 2 ** 12
CONVERGENCE_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class DiscretizedHamiltonian:
    """H(gamma) = h0 + gamma * h1 on a finite basis.

    ``model``, ``resolution`` and ``representation`` let :func:`diagonalize`
    rebuild the operator at a coarser resolution for its convergence test.
    """

    basis: BasisDescriptor
    h0: HermitianOperator
    h1: HermitianOperator
    boundary: str
    model: object = None
    resolution: int = 0
    representation: str = ""
    box_half_width: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.boundary not in ("hard_wall", "periodic"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        _check_basis(self.basis, self.h0.basis)
        _check_basis(self.basis, self.h1.basis)

    @property
    def hbar(self) -> float:
        return self.model.units.hbar if self.model is not None else 1.0

    def matrix(self, gamma: float) -> np.ndarray:
        m = self.h0.elements + gamma * self.h1.elements
        if np.max(np.abs(m.imag)) <= 1e-14 * np.max(np.abs(m.real)):
            return np.ascontiguousarray(m.real)
        return m

    def eigh(self, gamma: float):
        """Full eigendecomposition, memoized per gamma."""
        key = float(gamma)
        if key not in self._cache:
            if len(self._cache) > 8:
                self._cache.clear()
            self._cache[key] = np.linalg.eigh(self.matrix(gamma))
        return self._cache[key]


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    eigenvalues: np.ndarray
    eigenvectors: tuple
    convergence: dict


def _check_resolution(resolution: int) -> None:
    r = int(resolution)
    if r != resolution or r < MIN_RESOLUTION or r > MAX_RESOLUTION or r & (r - 1):
        raise ValueError(f"resolution must be a power of two in [{MIN_RESOLUTION}, {MAX_RESOLUTION}]")


def dst_matrix(n: int) -> np.ndarray:
    """Orthogonal, symmetric DST-I matrix on n interior points."""
    j = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(j, j) / (n + 1))


def _isw(probe: InfiniteWellProbe, resolution: int) -> DiscretizedHamiltonian:
    u = probe.units
    if probe.dims == 1:
        n = resolution
        s = dst_matrix(n)
        p2 = (u.hbar * np.pi * np.arange(1, n + 1) / probe.a) ** 2
        spacing = probe.a / (n + 1)
        basis = BasisDescriptor.grid1d(spacing, probe.a - spacing, n)
    elif probe.dims == 2:
        n = int(round(np.sqrt(resolution)))
        if n * n != resolution:
            raise UnsupportedDiscretization("2D grids need a perfect-square resolution (256, 1024, 4096)")
        s1 = dst_matrix(n)
        s = np.kron(s1, s1)
        k2 = (u.hbar * np.pi * np.arange(1, n + 1) / probe.a) ** 2
        p2 = (k2[:, None] + k2[None, :]).ravel()
        spacing = probe.a / (n + 1)
        axis = (spacing, probe.a - spacing, n)
        basis = BasisDescriptor.grid2d(axis, axis)
    else:
        raise UnsupportedDiscretization("infinite well discretized in 1D or 2D only")
    h0 = (s * (p2 / (2 * u.probe_mass))) @ s
    h1 = (s * (p2 ** 2 / (u.probe_mass * u.planck_momentum ** 2))) @ s
    return DiscretizedHamiltonian(basis, HermitianOperator(basis, h0), HermitianOperator(basis, h1),
                                  "hard_wall", probe, resolution, "grid")


def _fourier_axis(n: int, length_scale: float):
    half = np.sqrt(np.pi * n / 2.0) * length_scale
    dx = 2.0 * half / n
    x = -half + dx * np.arange(n)
    k = 2.0 * np.pi * np.fft.fftfreq(n, dx)
    f = np.fft.fft(np.eye(n), axis=0, norm="ortho")
    return x, k, f, (-half, half - dx, n)


def _spectral_op(f: np.ndarray, values: np.ndarray) -> np.ndarray:
    op = (f.conj().T * values) @ f
    return op.real if np.max(np.abs(op.imag)) < 1e-12 * np.max(np.abs(op.real)) else op


def _ho_grid(probe: HarmonicProbe, resolution: int) -> DiscretizedHamiltonian:
    u = probe.units
    ell = np.sqrt(u.hbar / (u.probe_mass * probe.omega))
    h1_scale = 1.0 / (u.probe_mass * u.planck_momentum ** 2)
    if probe.dims == 1:
        x, k, f, axis = _fourier_axis(resolution, ell)
        p2 = (u.hbar * k) ** 2
        basis = BasisDescriptor.grid1d(*axis)
        pot = 0.5 * u.probe_mass * probe.omega ** 2 * x ** 2
    else:
        n = int(round(np.sqrt(resolution)))
        if n * n != resolution:
            raise UnsupportedDiscretization("2D grids need a perfect-square resolution (256, 1024, 4096)")
        x, k, f1, axis = _fourier_axis(n, ell)
        f = np.kron(f1, f1)
        kk = (u.hbar * k) ** 2
        p2 = (kk[:, None] + kk[None, :]).ravel()
        basis = BasisDescriptor.grid2d(axis, axis)
        pot = (0.5 * u.probe_mass * probe.omega ** 2 * (x[:, None] ** 2 + x[None, :] ** 2)).ravel()
    h0 = _spectral_op(f, p2 / (2 * u.probe_mass)) + np.diag(pot)
    h1 = _spectral_op(f, p2 ** 2 * h1_scale)
    return DiscretizedHamiltonian(basis, HermitianOperator(basis, h0), HermitianOperator(basis, h1),
                                  "periodic", probe, resolution, "grid")


def _ho_fock(probe: HarmonicProbe) -> DiscretizedHamiltonian:
    problem = ho_problem_1d(probe) if probe.dims == 1 else ho_problem_2d(probe)
    basis = problem.basis
    h0 = HermitianOperator.diagonal(basis, problem.unperturbed_energies)
    return DiscretizedHamiltonian(basis, h0, problem.h1, "hard_wall", probe, probe.truncation, "fock")


def fsw_box_half_width(probe: FiniteWellProbe) -> float:
    """Box half-width where the least-bound state has decayed by e^-12, capped at 25 a."""
    spec = fsw_bound_states(probe)
    return probe.a * min(1.0 + 12.0 / spec.v[-1], 25.0)


def _fsw_galerkin(probe: FiniteWellProbe, resolution: int, half_width: Optional[float]):
    u = probe.units
    a = probe.a
    big = fsw_box_half_width(probe) if half_width is None else float(half_width)
    if big <= a:
        raise ValueError("box must be wider than the well")
    modes = np.arange(1, resolution + 1)
    q = modes * np.pi / (2 * big)

    # int_{-a}^{a} cos(w (x + L)) dx for the product-to-sum form of sin * sin
    def overlap(w):
        out = np.full(w.shape, 2.0 * a)
        nz = np.abs(w) > 1e-14
        wz = w[nz]
        out[nz] = (np.sin(wz * (a + big)) - np.sin(wz * (big - a))) / wz
        return out

    inside = (overlap(q[:, None] - q[None, :]) - overlap(q[:, None] + q[None, :])) / (2 * big)
    potential = probe.v0 * (np.eye(resolution) - inside)
    p2 = (u.hbar * q) ** 2
    basis = BasisDescriptor.spectral(modes.tolist())
    h0 = np.diag(p2 / (2 * u.probe_mass)) + potential
    h1 = np.diag(p2 ** 2 / (u.probe_mass * u.planck_momentum ** 2))
    return DiscretizedHamiltonian(basis, HermitianOperator(basis, h0), HermitianOperator(basis, h1),
                                  "hard_wall", probe, resolution, "galerkin", big)


def _free_momentum(probe: FreeGaussianProbe, resolution: int) -> DiscretizedHamiltonian:
    u = probe.units
    lo, hi = probe.p0 - 12 * probe.sigma, probe.p0 + 12 * probe.sigma
    basis = BasisDescriptor.grid1d(lo, hi, resolution)
    p = basis.points()
    h0 = HermitianOperator.diagonal(basis, p ** 2 / (2 * u.probe_mass))
    h1 = HermitianOperator.diagonal(basis, p ** 4 / (u.probe_mass * u.planck_momentum ** 2))
    return DiscretizedHamiltonian(basis, h0, h1, "periodic", probe, resolution, "momentum")


def discretize(model, gamma: float = 0.0, resolution: int = 256,
               representation: Optional[str] = None,
               half_width: Optional[float] = None) -> DiscretizedHamiltonian:
    """Build h0 and h1 for a probe model.

    ``gamma`` is accepted for symmetry with the rest of the API; the operator
    stores h0 and h1 separately and every consumer supplies its own gamma.
    ``representation="fock"`` selects the truncated Fock basis for oscillators
    (``resolution`` is then ignored in favour of the probe's truncation).
    """
    del gamma
    if representation == "fock":
        if not isinstance(model, HarmonicProbe):
            raise UnsupportedDiscretization("the Fock representation exists only for oscillators")
        return _ho_fock(model)
    _check_resolution(resolution)
    if isinstance(model, InfiniteWellProbe):
        return _isw(model, resolution)
    if isinstance(model, HarmonicProbe):
        return _ho_grid(model, resolution)
    if isinstance(model, FiniteWellProbe):
        return _fsw_galerkin(model, resolution, half_width)
    if isinstance(model, FreeGaussianProbe):
        return _free_momentum(model, resolution)
    raise UnsupportedDiscretization(f"no discretization for {type(model).__name__}")


def _coarser(h: DiscretizedHamiltonian) -> Optional[DiscretizedHamiltonian]:
    if h.model is None:
        return None
    if h.representation == "fock":
        # fewer Fock levels plays the role of the coarser grid
        smaller = dataclasses.replace(h.model, truncation=h.model.truncation - 4)
        return _ho_fock(smaller)
    if h.representation == "momentum":
        return None
    half = h.resolution // 2
    if h.representation == "galerkin":
        return _fsw_galerkin(h.model, half, h.box_half_width)
    if isinstance(h.model, InfiniteWellProbe) and h.model.dims == 2:
        return None if round(np.sqrt(half)) ** 2 != half else _isw(h.model, half)
    if isinstance(h.model, HarmonicProbe) and h.model.dims == 2:
        return None if round(np.sqrt(half)) ** 2 != half else _ho_grid(h.model, half)
    builder = _isw if isinstance(h.model, InfiniteWellProbe) else _ho_grid
    return builder(h.model, half)


def diagonalize(h: DiscretizedHamiltonian, gamma: float, levels: int,
                check_convergence: bool = True, tol: float = CONVERGENCE_TOL) -> SpectrumResult:
    """Lowest ``levels`` eigenpairs of h0 + gamma h1.

    With ``check_convergence`` the problem is rebuilt at half resolution and the
    relative eigenvalue change per level is stored; any change above ``tol``
    raises :class:`GridResolutionError`.
    """
    if levels < 1 or levels > h.basis.dimension // 4:
        raise ValueError("levels must lie in [1, dimension/4]")
    vals, vecs = h.eigh(gamma)
    vals = vals[:levels]
    states = tuple(StateVector(h.basis, vecs[:, k]) for k in range(levels))
    convergence = {}
    if check_convergence:
        coarse = _coarser(h)
        if coarse is not None:
            cvals = np.linalg.eigvalsh(coarse.matrix(gamma))[:levels]
            scale = np.maximum(np.abs(vals), np.finfo(float).tiny)
            deltas = np.abs(vals - cvals) / scale
            convergence = {k: float(d) for k, d in enumerate(deltas)}
            bad = [k for k, d in convergence.items() if d > tol]
            if bad:
                raise GridResolutionError(
                    f"levels {bad} moved by up to {max(deltas):.2e} relative on halving the resolution")
    return SpectrumResult(np.array(vals), states, convergence)


def evolve_exact(h: DiscretizedHamiltonian, gamma: float, psi0: StateVector, t: float) -> StateVector:
    """exp(-i H t / hbar) psi0 by spectral decomposition, with norm and energy checks."""
    if psi0.basis != h.basis:
        raise BasisMismatch("initial state is not on the Hamiltonian's basis")
    vals, vecs = h.eigh(gamma)
    coeffs = vecs.conj().T @ psi0.amplitudes
    out = vecs @ (np.exp(-1j * vals * t / h.hbar) * coeffs)
    n0, n1 = np.linalg.norm(psi0.amplitudes), np.linalg.norm(out)
    if abs(n1 - n0) > 1e-10 * max(n0, 1e-300):
        raise NumericalInconsistencyError("evolution did not preserve the norm")
    pops = np.abs(coeffs) ** 2
    e_in = np.dot(pops, vals)
    e_out = np.dot(np.abs(vecs.conj().T @ out) ** 2, vals)
    if abs(e_out - e_in) > 1e-10 * max(np.dot(pops, np.abs(vals)), np.finfo(float).tiny):
        raise NumericalInconsistencyError("evolution did not conserve the energy")
    return StateVector(h.basis, out)


def evolution_derivative(h: DiscretizedHamiltonian, gamma: float, psi0: StateVector,
                         dpsi0: StateVector, t: float) -> StateVector:
    """d/dgamma of exp(-i H(gamma) t / hbar) psi0(gamma), from the exact eigenbasis.

    With H = U D U^dag, dD = diag(U^dag h1 U) and dU = U A where
    A_jk = (U^dag h1 U)_jk / (E_k - E_j) off the diagonal.  Exact degeneracies are
    allowed only if h1 does not couple the degenerate eigenvectors.
    """
    _check_basis(h.basis, psi0.basis)
    _check_basis(h.basis, dpsi0.basis)
    vals, vecs = h.eigh(gamma)
    w = vecs.conj().T @ h.h1.elements @ vecs
    gap = vals[None, :] - vals[:, None]
    tiny = 1e-12 * max(np.max(np.abs(vals)), np.finfo(float).tiny)
    degenerate = np.abs(gap) < tiny
    np.fill_diagonal(degenerate, False)
    if np.any(np.abs(w[degenerate]) > 1e-10 * np.max(np.abs(w))):
        raise NumericalInconsistencyError("h1 couples degenerate eigenvectors")
    safe = np.where(np.abs(gap) < tiny, 1.0, gap)
    amat = np.where(np.abs(gap) < tiny, 0.0, w / safe)
    phase = np.exp(-1j * vals * t / h.hbar)
    c = vecs.conj().T @ psi0.amplitudes
    dc = vecs.conj().T @ dpsi0.amplitudes
    # U [A e - (i t/hbar) dD e - e A] U^dag psi0 + U e U^dag dpsi0
    term = amat @ (phase * c) - 1j * t / h.hbar * np.real(np.diag(w)) * phase * c - phase * (amat @ c)
    return StateVector(h.basis, vecs @ (term + phase * dc))


@dataclass(frozen=True)
class Eigenstate:
    index: int


@dataclass(frozen=True)
class Superposition:
    """Equal-weight superposition of eigenstates of H(gamma), evolved for time t.

    With ``perturbed=False`` the eigenstates are taken at gamma = 0 instead.
    """

    levels: tuple
    t: float = 0.0
    perturbed: bool = True


def _aligned_eigenvectors(h: DiscretizedHamiltonian, gamma: float, indices) -> list:
    """Eigenvectors at gamma with phases aligned to their gamma = 0 counterparts."""
    _, ref = h.eigh(0.0)
    _, vecs = h.eigh(gamma)
    out = []
    for k in indices:
        v = vecs[:, k]
        ov = np.vdot(ref[:, k], v)
        out.append(StateVector(h.basis, v * (np.conj(ov) / abs(ov) if ov != 0 else 1.0)))
    return out


def oracle_state_family(model, recipe, resolution: int = 256,
                        representation: Optional[str] = None, **kwargs) -> StateFamily:
    """gamma -> exactly prepared (and evolved) state, for use with qfi_from_fidelity."""
    h = model if isinstance(model, DiscretizedHamiltonian) else \
        discretize(model, 0.0, resolution, representation, **kwargs)
    if isinstance(recipe, Eigenstate):
        if recipe.index >= h.basis.dimension // 4:
            raise ValueError("eigenstate index beyond the converged quarter of the spectrum")

        def evaluator(gamma):
            return _aligned_eigenvectors(h, gamma, [recipe.index])[0]

        return StateFamily(evaluator)
    if isinstance(recipe, Superposition):
        levels = tuple(recipe.levels)

        def evaluator(gamma):
            prep_gamma = gamma if recipe.perturbed else 0.0
            states = _aligned_eigenvectors(h, prep_gamma, levels)
            psi0 = superpose([(1.0, s) for s in states])
            return evolve_exact(h, gamma, psi0, recipe.t) if recipe.t else psi0

        return StateFamily(evaluator)
    raise TypeError(f"unknown preparation recipe {recipe!r}")


def gaussian_moment_qfi(probe: FreeGaussianProbe, t: float) -> float:
    """Free-particle QFI from numerically integrated moments of the momentum density."""
    u = probe.units
    s = probe.sigma
    r = probe.p0 / s

    def moment(k):
        f = lambda z: (r + z) ** k * np.exp(-0.5 * z * z) / np.sqrt(2 * np.pi)
        return integrate.quad(f, -np.inf, np.inf, epsabs=0, epsrel=1e-13, limit=200)[0]

    var = moment(8) - moment(4) ** 2
    lead = (t / u.hbar) * s ** 4 / (u.probe_mass * u.planck_momentum ** 2)
    return 4.0 * lead ** 2 * var


def hellmann_feynman(h: DiscretizedHamiltonian, level: int, dgamma: float = 1e-6):
    """(central-difference dE/dgamma at 0, <psi|h1|psi> at 0) for one level."""
    plus = h.eigh(dgamma)[0][level]
    minus = h.eigh(-dgamma)[0][level]
    vec = h.eigh(0.0)[1][:, level]
    expect = float(np.real(np.vdot(vec, h.h1.elements @ vec)))
    return (plus - minus) / (2 * dgamma), expect


def linear_residual_slope(h: DiscretizedHamiltonian, level: int, e1: float,
                          gammas=(1e-4, 3e-5, 1e-5, 3e-6, 1e-6)) -> float:
    """Log-log slope of |E(gamma) - E(0) - gamma e1| against gamma (2 for a correct e1)."""
    e0 = h.eigh(0.0)[0][level]
    gammas = np.asarray(gammas, dtype=float)
    resid = np.array([abs(h.eigh(g)[0][level] - e0 - g * e1) for g in gammas])
    return float(np.polyfit(np.log(gammas), np.log(resid), 1)[0])
