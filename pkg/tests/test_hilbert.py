import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from gravprobe.errors import BasisMismatch, DegenerateSuperposition
from gravprobe.hilbert import (
    BasisDescriptor,
    HermitianOperator,
    StateVector,
    UnitSystem,
    apply,
    evolve_diagonal,
    inner,
    superpose,
)
from gravprobe.models import HarmonicProbe, ho_problem_1d

B4 = BasisDescriptor.spectral(range(4))


def e(k, basis=B4):
    return StateVector.basis_state(basis, k)


def test_inner_normalized_state_is_one():
    psi = superpose([(1.0, e(0)), (1j, e(2))])
    assert inner(psi, psi) == pytest.approx(1.0 + 0j, abs=1e-15)


def test_inner_orthogonal_basis_vectors():
    assert inner(e(0), e(1)) == 0


def test_inner_projection_of_equal_superposition():
    psi = superpose([(1, e(0)), (1, e(1))])
    assert inner(psi, e(0)) == pytest.approx(1 / np.sqrt(2), abs=1e-15)


def test_inner_is_antilinear_in_first_argument():
    a = StateVector(B4, [1j, 0, 0, 0])
    assert inner(a, e(0)) == pytest.approx(-1j)


def test_inner_basis_mismatch():
    other = BasisDescriptor.spectral(range(1, 5))
    with pytest.raises(BasisMismatch):
        inner(e(0), e(0, other))


def test_superpose_equal_pair():
    psi = superpose([(1, e(0)), (1, e(1))])
    np.testing.assert_allclose(psi.amplitudes, [2 ** -0.5, 2 ** -0.5, 0, 0], atol=1e-15)


def test_superpose_two_extreme_levels():
    psi = superpose([(1, e(0)), (1, e(3))])
    np.testing.assert_allclose(np.abs(psi.amplitudes) ** 2, [0.5, 0, 0, 0.5], atol=1e-15)


def test_superpose_renormalizes():
    np.testing.assert_array_equal(superpose([(2, e(0))]).amplitudes, e(0).amplitudes)


def test_superpose_all_zero():
    with pytest.raises(DegenerateSuperposition):
        superpose([(0, e(0)), (0, e(1))])


def test_evolve_t0_identity():
    psi = superpose([(1, e(0)), (1, e(2))])
    out = evolve_diagonal(psi, [0, 1, 2, 3], 0.0)
    np.testing.assert_array_equal(out.amplitudes, psi.amplitudes)


def test_evolve_eigenstate_global_phase():
    out = evolve_diagonal(e(2), [0.1, 1.3, 2.7, 4.0], 5.0)
    assert abs(inner(e(2), out)) == pytest.approx(1.0, abs=1e-15)


def test_evolve_relative_phase():
    psi = superpose([(1, e(0)), (1, e(1))])
    energies, t = [0.3, 1.7, 0, 0], 2.5
    out = evolve_diagonal(psi, energies, t)
    rel = out.amplitudes[1] / out.amplitudes[0]
    assert rel == pytest.approx(np.exp(-1j * (1.7 - 0.3) * t), abs=1e-14)


def test_evolve_length_mismatch():
    with pytest.raises(BasisMismatch):
        evolve_diagonal(e(0), [1.0, 2.0], 1.0)


def test_apply_identity():
    psi = superpose([(1, e(0)), (2j, e(3))])
    np.testing.assert_array_equal(apply(HermitianOperator.identity(B4), psi).amplitudes, psi.amplitudes)


def test_apply_diagonal_to_eigenvector():
    op = HermitianOperator.diagonal(B4, [1.0, 2.0, 3.0, 4.0])
    np.testing.assert_array_equal(apply(op, e(2)).amplitudes, 3.0 * e(2).amplitudes)


def test_apply_oscillator_h1_selection_rules():
    problem = ho_problem_1d(HarmonicProbe(truncation=16))
    out = apply(problem.h1, StateVector.basis_state(problem.basis, 0))
    support = set(np.flatnonzero(np.abs(out.amplitudes) > 1e-12))
    assert support == {0, 2, 4}


def test_hermitian_rejects_non_hermitian():
    with pytest.raises(ValueError):
        HermitianOperator(B4, np.triu(np.ones((4, 4))))


def test_grid_state_norm_carries_cell_weight():
    basis = BasisDescriptor.grid1d(-10, 10, 2001)
    x = basis.points()
    psi = StateVector.from_wavefunction(basis, np.pi ** -0.25 * np.exp(-x ** 2 / 2))
    assert psi.norm() == pytest.approx(1.0, rel=1e-10)
    np.testing.assert_allclose(psi.wavefunction(), np.pi ** -0.25 * np.exp(-x ** 2 / 2), atol=1e-14)


def test_basis_rejects_tiny_grid_and_short_spectral():
    with pytest.raises(ValueError):
        BasisDescriptor.grid1d(0, 1, 4)
    with pytest.raises(ValueError):
        BasisDescriptor.spectral([0])
    with pytest.raises(ValueError):
        BasisDescriptor.spectral([0, 0])


def test_state_vector_immutable():
    psi = e(0)
    with pytest.raises(ValueError):
        psi.amplitudes[0] = 2.0


def test_unit_system_modes():
    assert UnitSystem.natural().planck_momentum == 1.0
    si = UnitSystem.si()
    assert si.planck_momentum == pytest.approx(2.176e-8 * 2.99e8)
    with pytest.raises(ValueError):
        UnitSystem(hbar=2.0)


complex_vec = arrays(np.complex128, 6, elements=st.complex_numbers(max_magnitude=10, allow_nan=False,
                                                                     allow_infinity=False))


@settings(max_examples=50, deadline=None)
@given(complex_vec, complex_vec, arrays(np.float64, (6, 6), elements=st.floats(-5, 5)))
def test_self_adjointness(a, b, m):
    basis = BasisDescriptor.spectral(range(6))
    h = HermitianOperator(basis, m + m.T)
    sa, sb = StateVector(basis, a), StateVector(basis, b)
    lhs = inner(apply(h, sa), sb)
    rhs = inner(sa, apply(h, sb))
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@settings(max_examples=50, deadline=None)
@given(complex_vec, arrays(np.float64, 6, elements=st.floats(-100, 100)), st.floats(-50, 50))
def test_diagonal_evolution_preserves_moduli(a, energies, t):
    basis = BasisDescriptor.spectral(range(6))
    psi = StateVector(basis, a)
    out = evolve_diagonal(psi, energies, t)
    np.testing.assert_allclose(np.abs(out.amplitudes), np.abs(psi.amplitudes), rtol=1e-12, atol=1e-300)
