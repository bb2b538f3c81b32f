import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravprobe import oracle
from gravprobe.errors import DegenerateCouplingError, NonPerturbativeWarning, NotDegenerateError
from gravprobe.hilbert import BasisDescriptor, HermitianOperator, StateVector, inner
from gravprobe.models import (
    HarmonicProbe,
    InfiniteWellProbe,
    ho_problem_1d,
    ho_problem_2d,
    isw_first_order_energy,
    isw_problem,
)
from gravprobe.perturb import (
    PerturbationProblem,
    degenerate_good_basis,
    degenerate_levels,
    first_order_energy,
    perturbation_ket,
    perturbed_state,
    perturbed_state_derivative,
)


def two_level(v=0.3, energies=(0.0, 1.0)):
    basis = BasisDescriptor.spectral(range(2))
    return PerturbationProblem(np.array(energies), HermitianOperator(basis, [[0, v], [v, 0]]))


def test_first_order_energy_ho_ground():
    assert first_order_energy(ho_problem_1d(HarmonicProbe()), 0) == pytest.approx(0.75, rel=1e-14)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_first_order_energy_isw(n):
    probe = InfiniteWellProbe()
    value = first_order_energy(isw_problem(probe), n - 1)
    assert value == pytest.approx((n * np.pi) ** 4, rel=1e-12)
    assert value == pytest.approx(isw_first_order_energy(probe, n), rel=1e-12)


def test_first_order_energy_zero_operator():
    basis = BasisDescriptor.spectral(range(3))
    problem = PerturbationProblem(np.arange(3.0), HermitianOperator(basis, np.zeros((3, 3))))
    assert first_order_energy(problem, 1) == 0.0


def test_first_order_energy_index_error():
    with pytest.raises(IndexError):
        first_order_energy(two_level(), 2)


def test_ket_ho_ground_norm():
    level = perturbation_ket(ho_problem_1d(HarmonicProbe()), 0)
    assert level.ket_norm_squared == pytest.approx(39 / 32, rel=1e-12)
    assert level.ket_coefficients[0] == 0


def test_ket_diagonal_h1_vanishes():
    level = perturbation_ket(isw_problem(InfiniteWellProbe()), 3)
    assert level.ket_norm_squared == 0.0


def test_ket_two_level_substitution():
    level = perturbation_ket(two_level(0.3), 0)
    assert level.ket_coefficients[1] == pytest.approx(-0.3)


def test_ket_degenerate_coupling_error():
    problem = two_level(1.0, energies=(1.0, 1.0))
    with pytest.raises(DegenerateCouplingError, match="degenerate_good_basis"):
        perturbation_ket(problem, 0)


def test_ket_consistency_with_denominators():
    problem = ho_problem_1d(HarmonicProbe())
    e, h = problem.unperturbed_energies, problem.h1.elements
    for n in range(6):
        c = perturbation_ket(problem, n).ket_coefficients
        for m in range(problem.dimension):
            if m != n:
                assert abs(c[m] * (e[n] - e[m]) - h[m, n]) <= 1e-12 * max(1.0, abs(h[m, n]))


@pytest.mark.parametrize("n", [0, 3, 7])
def test_ket_truncation_converged(n):
    small = perturbation_ket(ho_problem_1d(HarmonicProbe(truncation=n + 9)), n)
    big = perturbation_ket(ho_problem_1d(HarmonicProbe(truncation=n + 17)), n)
    assert small.ket_norm_squared == pytest.approx(big.ket_norm_squared, rel=1e-12)


def test_perturbed_state_gamma_zero():
    level = perturbation_ket(ho_problem_1d(HarmonicProbe()), 1)
    np.testing.assert_array_equal(perturbed_state(level, 0.0).amplitudes,
                                  StateVector.basis_state(level.basis, 1).amplitudes)


def test_perturbed_state_overlap_real_and_tends_to_one():
    level = perturbation_ket(ho_problem_1d(HarmonicProbe()), 0)
    base = StateVector.basis_state(level.basis, 0)
    prev = 0.0
    for g in (1e-2, 1e-3, 1e-4):
        ov = inner(base, perturbed_state(level, g))
        assert abs(ov.imag) < 1e-15
        assert ov.real > prev
        prev = ov.real
    assert 1 - prev < 1e-7


def test_perturbed_state_matches_exact_diagonalization():
    probe = HarmonicProbe()
    gamma = 1e-6
    level = perturbation_ket(ho_problem_1d(probe), 0)
    h = oracle.discretize(probe, representation="fock")
    exact = oracle.diagonalize(h, gamma, 4, check_convergence=False).eigenvectors[0]
    assert abs(abs(exact.amplitudes[2]) - gamma * abs(level.ket_coefficients[2])) < 1e-8


def test_perturbed_state_warns_outside_regime():
    level = perturbation_ket(ho_problem_1d(HarmonicProbe()), 0)
    with pytest.warns(NonPerturbativeWarning):
        psi = perturbed_state(level, 0.5)
    assert psi.metadata["warning"] == "NonPerturbativeWarning"
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        perturbed_state(level, 1e-3)


def test_perturbed_state_derivative_matches_difference():
    level = perturbation_ket(ho_problem_1d(HarmonicProbe()), 1)
    g, h = 0.01, 1e-6
    fd = (perturbed_state(level, g + h).amplitudes - perturbed_state(level, g - h).amplitudes) / (2 * h)
    np.testing.assert_allclose(perturbed_state_derivative(level, g).amplitudes, fd, atol=1e-8)


def test_good_basis_2d_oscillator_level_one_is_identity():
    problem = ho_problem_2d(HarmonicProbe(dims=2, truncation=16))
    group = degenerate_levels(problem, problem.basis.index((1, 0)))
    assert len(group) == 2
    rotated = degenerate_good_basis(problem, group)
    assert rotated is problem
    block = problem.h1.elements[np.ix_(group, group)]
    assert abs(block[0, 1]) == 0.0


def test_good_basis_nondegenerate_problem_unchanged():
    problem = ho_problem_1d(HarmonicProbe())
    assert degenerate_good_basis(problem, [2]) is problem


def test_good_basis_symmetric_block():
    rotated = degenerate_good_basis(two_level(1.0, energies=(1.0, 1.0)), [0, 1])
    np.testing.assert_allclose(rotated.h1.elements, np.diag([-1.0, 1.0]), atol=1e-14)
    cols = rotated.rotation
    for k in range(2):
        v = cols[:, k] / cols[0, k] * abs(cols[0, k])
        np.testing.assert_allclose(np.abs(v), [2 ** -0.5, 2 ** -0.5], atol=1e-14)
    assert perturbation_ket(rotated, 0).ket_norm_squared == 0.0


def test_good_basis_not_degenerate():
    with pytest.raises(NotDegenerateError):
        degenerate_good_basis(two_level(), [0, 1])


def test_energies_must_be_sorted():
    with pytest.raises(ValueError):
        two_level(energies=(1.0, 0.0))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 3.0), min_size=4, max_size=4),
       st.integers(0, 3), st.integers(0, 2 ** 31 - 1))
def test_ket_orthogonal_and_consistent(gaps, n, seed):
    rng = np.random.default_rng(seed)
    energies = np.cumsum(gaps)
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    basis = BasisDescriptor.spectral(range(4))
    problem = PerturbationProblem(energies, HermitianOperator(basis, m + m.conj().T))
    level = perturbation_ket(problem, n)
    assert level.ket_coefficients[n] == 0
    h = problem.h1.elements
    for k in range(4):
        if k != n:
            assert level.ket_coefficients[k] * (energies[n] - energies[k]) == pytest.approx(h[k, n])
