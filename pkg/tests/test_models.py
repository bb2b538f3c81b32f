from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gravprobe.errors import NoInformationError, TruncationError, UnsupportedProbe
from gravprobe.hilbert import BasisDescriptor, UnitSystem
from gravprobe.models import (
    FiniteWellProbe,
    FreeGaussianProbe,
    HarmonicProbe,
    InfiniteWellProbe,
    free_gaussian_qfi,
    free_qfi_monotonicity,
    fsw_approx_energy,
    fsw_bound_states,
    fsw_ground_qfi,
    fsw_problem,
    gaussian_p4_variance,
    ho2d_qfi,
    ho2d_weighted_ratio,
    ho_eigenstate_qfi,
    ho_first_order_energy,
    ho_perturbed_superposition_qfi,
    ho_problem_1d,
    ho_problem_2d,
    ho_static_superposition_qfi,
    ho_superposition_qfi,
    isw_closed_forms,
    isw_first_order_energy,
    isw_min_correction_level,
    isw_problem,
    isw_weighted_ratio,
)
from gravprobe.models.harmonic import ho1d_table_value

# free Gaussian ---------------------------------------------------------------


def test_free_unit_gaussian():
    assert free_gaussian_qfi(FreeGaussianProbe(0.0, 1.0, 1.0)).value == pytest.approx(384.0, rel=1e-14)


def test_free_unit_gaussian_moments():
    # <p^8> - <p^4>^2 = 105 - 9 for a unit Gaussian
    assert gaussian_p4_variance(0.0, 1.0) == pytest.approx(96.0)


def test_free_small_sigma_negligible():
    values = [free_gaussian_qfi(FreeGaussianProbe(1.0, s)).value for s in (1e-1, 1e-2, 1e-3)]
    assert values[0] > values[1] > values[2]
    assert values[2] < 1e-3


def test_free_t_scaling_and_default():
    probe = FreeGaussianProbe(0.5, 0.8, t=2.0)
    assert free_gaussian_qfi(probe).value == pytest.approx(4 * free_gaussian_qfi(probe, 1.0).value)


def test_free_monotonic_on_constrained_domain():
    assert free_qfi_monotonicity(np.linspace(0.1, 4.0, 25)) == {
        "nondecreasing_in_y": True, "nondecreasing_in_sigma": True}


def test_free_rejects_nonpositive_sigma():
    with pytest.raises(ValueError):
        FreeGaussianProbe(0.0, 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-5, 5), st.floats(0.01, 5))
def test_free_dual_forms_agree(p0, sigma):
    res = free_gaussian_qfi(FreeGaussianProbe(p0, sigma))
    assert res.metadata["h0_form"] == pytest.approx(res.value, rel=1e-12)


def test_free_si_values_finite():
    units = UnitSystem.si()
    p = 5.35e-22
    res = free_gaussian_qfi(FreeGaussianProbe(p, 10 * p, 1.0, units))
    assert np.isfinite(res.value) and res.value > 0


# infinite well ---------------------------------------------------------------


def test_isw_partner_one_is_zero():
    assert isw_closed_forms(InfiniteWellProbe(), 1.0, 1).value == 0.0


def test_isw_partner_two():
    res = isw_closed_forms(InfiniteWellProbe(), 1.0, 2)
    assert res.value == pytest.approx(np.pi ** 8 * 225, rel=1e-14)
    assert res.metadata["energy_form"] == pytest.approx(res.value, rel=1e-12)


def test_isw_2d_ground_partner_is_zero():
    assert isw_closed_forms(InfiniteWellProbe(dims=2), 1.0, (1, 1)).value == 0.0


def test_isw_partner_from_probe():
    probe = InfiniteWellProbe(quantum_numbers=(3,))
    assert isw_closed_forms(probe, 1.0).value == isw_closed_forms(probe, 1.0, 3).value
    with pytest.raises(ValueError):
        isw_closed_forms(InfiniteWellProbe(), 1.0)


@pytest.mark.parametrize("n", [2, 3, 7, 20])
def test_isw_ratio_diagonal_is_eight(n):
    assert isw_weighted_ratio(n, n) == 8


@pytest.mark.parametrize("n", [2, 5])
def test_isw_ratio_3d_diagonal_is_27(n):
    assert isw_weighted_ratio(n, n, n) == 27


def test_isw_ratio_off_diagonal():
    assert isw_weighted_ratio(2, 1) == Fraction(441, 225)
    assert isw_weighted_ratio(4, 1) < 8


def test_isw_ratio_all_ones():
    with pytest.raises(NoInformationError):
        isw_weighted_ratio(1, 1)


def test_isw_h1_diagonal():
    problem = isw_problem(InfiniteWellProbe(a=1.3), 24)
    off = problem.h1.elements - np.diag(np.diag(problem.h1.elements))
    assert np.max(np.abs(off)) == 0.0


def test_isw_2d_minimum_correction_at_ground():
    assert isw_min_correction_level(InfiniteWellProbe(dims=2), 10) == (1, 1)


def test_isw_first_order_energy_scaling():
    probe = InfiniteWellProbe(a=2.0)
    assert isw_first_order_energy(probe, 3) == pytest.approx((3 * np.pi / 2) ** 4)


# finite well -----------------------------------------------------------------


def test_fsw_bound_state_count():
    probe = FiniteWellProbe(1.0, 10.0)
    assert probe.z0 ** 2 == pytest.approx(20.0)
    spec = fsw_bound_states(probe)
    assert spec.count == 3 == probe.bound_state_count
    assert spec.parity == ("even", "odd", "even")


def test_fsw_shallow_well_binds_one_state():
    for v0 in (1.0, 0.1, 1e-3):
        assert fsw_bound_states(FiniteWellProbe(1.0, v0)).count == 1


def test_fsw_roots_satisfy_quantization():
    spec = fsw_bound_states(FiniteWellProbe(1.0, np.sqrt(250)))
    for u, v, par in zip(spec.u, spec.v, spec.parity):
        lhs = u * np.tan(u) if par == "even" else -u / np.tan(u)
        assert lhs == pytest.approx(v, rel=1e-9)


def test_fsw_wavefunctions_normalized():
    probe = FiniteWellProbe(1.0, 12.0, grid=BasisDescriptor.grid1d(-15, 15, 6001))
    for psi in fsw_bound_states(probe).wavefunctions():
        assert psi.norm() == pytest.approx(1.0, rel=1e-6)


def test_fsw_single_bound_state_zero_qfi():
    res = fsw_ground_qfi(FiniteWellProbe(1.0, 1.0))
    assert res.value == 0.0 and res.metadata["bound_states"] == 1


def test_fsw_qfi_metadata_records_omitted_continuum():
    assert fsw_ground_qfi(FiniteWellProbe(1.0, 10.0)).metadata["continuum"] == "omitted"


def test_fsw_problem_parity_selection():
    problem = fsw_problem(FiniteWellProbe(1.0, 40.0))
    h = problem.h1.elements
    assert h[0, 1] == 0 and h[1, 2] == 0 and h[0, 2] != 0


def test_fsw_qfi_decays_for_wide_wells():
    values = [fsw_ground_qfi(FiniteWellProbe(a, np.sqrt(75))).value for a in (2.0, 4.0, 6.0)]
    assert values[0] > values[1] > values[2]


def test_fsw_approximation_solves_its_defining_equation():
    # the closed form solves u = (n-1) pi/2 + (pi/2) sqrt(1 - u/z0), with E = u^2/2
    probe = FiniteWellProbe(1.3, 17.0)
    for n in range(1, probe.bound_state_count + 1):
        u = np.sqrt(2 * fsw_approx_energy(probe, n) / probe.energy_unit)
        rhs = (n - 1) * np.pi / 2 + np.pi / 2 * np.sqrt(1 - u / probe.z0)
        assert u == pytest.approx(rhs, rel=1e-12)


# harmonic oscillator ---------------------------------------------------------


@pytest.mark.parametrize("n,expected", [(0, Fraction(39, 8)), (1, Fraction(315, 8)), (2, Fraction(1257, 8))])
def test_ho_eigenstate_qfi(n, expected):
    res = ho_eigenstate_qfi(HarmonicProbe(), n)
    assert res.value == pytest.approx(float(expected), rel=1e-12)
    assert res.metadata["ket_relative_deviation"] < 1e-10


def test_ho_eigenstate_truncation_guard():
    with pytest.raises(TruncationError):
        ho_eigenstate_qfi(HarmonicProbe(truncation=12), 6)


def test_ho_first_order_energy():
    assert ho_first_order_energy(HarmonicProbe(omega=2.0), 1) == pytest.approx(0.75 * 4 * 5)


def test_ho_superposition_closed_form():
    probe = HarmonicProbe()
    assert ho_superposition_qfi(probe, 1, 1.0).value == pytest.approx(9.0)
    assert ho_superposition_qfi(probe, 0, 1.0).value == 0.0
    assert ho_superposition_qfi(probe, 3, 2.0).value == pytest.approx(4 * ho_superposition_qfi(probe, 3, 1.0).value)
    assert ho_superposition_qfi(probe, 3, 1.0).metadata["relative_deviation"] < 1e-12


def test_ho_selection_rules():
    h = ho_problem_1d(HarmonicProbe()).h1.elements
    m, n = np.indices(h.shape)
    forbidden = ~np.isin(np.abs(m - n), (0, 2, 4))
    assert np.all(h[forbidden] == 0)


def test_ho_h1_hermitian():
    for problem in (ho_problem_1d(HarmonicProbe()), ho_problem_2d(HarmonicProbe(dims=2, truncation=12))):
        h = problem.h1.elements
        np.testing.assert_array_equal(h, h.conj().T)


def test_ho_static_superposition_177_8():
    assert ho_static_superposition_qfi(HarmonicProbe(), (0, 1)).value == pytest.approx(177 / 8, rel=1e-12)


@pytest.mark.parametrize("spec,expected", [("00", 17), ("10", 75), ("00+01", 46), ("10+01", 75)])
def test_ho2d_table_values(spec, expected):
    res = ho2d_qfi(HarmonicProbe(dims=2, truncation=16), spec)
    assert res.value == pytest.approx(expected, rel=1e-9)


def test_ho2d_aliases_and_unsupported():
    probe = HarmonicProbe(dims=2, truncation=16)
    assert ho2d_qfi(probe, "|1,0>").value == ho2d_qfi(probe, "10").value
    with pytest.raises(UnsupportedProbe):
        ho2d_qfi(probe, "11")


def test_ho2d_entangled_equals_product():
    probe = HarmonicProbe(dims=2, truncation=16)
    assert ho2d_qfi(probe, "10+01").value == pytest.approx(ho2d_qfi(probe, "10").value, rel=1e-9)


@pytest.mark.parametrize("spec,expected", [("00", Fraction(68, 39)), ("10", Fraction(100, 59)),
                                           ("00+01", Fraction(46, 27)), ("10+01", Fraction(100, 59))])
def test_ho2d_weighted_ratio(spec, expected):
    assert ho2d_weighted_ratio(spec) == pytest.approx(float(expected), rel=1e-9)


def test_ho1d_table_values():
    probe = HarmonicProbe()
    assert ho1d_table_value("0", probe) == pytest.approx(39 / 8)
    assert ho1d_table_value("s01", probe) == pytest.approx(177 / 8)


def test_ho_perturbed_superposition_static_limit():
    probe = HarmonicProbe()
    for pair in ((0, 1), (0, 2), (1, 3)):
        static = ho_static_superposition_qfi(probe, pair).value
        assert ho_perturbed_superposition_qfi(probe, pair, 0.0).value == pytest.approx(static, rel=1e-4)
        analytic = ho_perturbed_superposition_qfi(probe, pair, 0.0, method="analytic").value
        assert analytic == pytest.approx(static, rel=1e-5)


def test_ho_perturbed_superposition_methods_agree():
    probe = HarmonicProbe()
    fd = ho_perturbed_superposition_qfi(probe, (0, 3), 1.0).value
    an = ho_perturbed_superposition_qfi(probe, (0, 3), 1.0, method="analytic").value
    assert fd == pytest.approx(an, rel=1e-4)


def test_ho_perturbed_superposition_rejects_equal_pair():
    with pytest.raises(ValueError):
        ho_perturbed_superposition_qfi(HarmonicProbe(), (2, 2), 1.0)


def test_ho_perturbed_superposition_long_time_phase_law():
    probe = HarmonicProbe()
    t = 200.0
    q = ho_perturbed_superposition_qfi(probe, (0, 2), t, method="analytic").value
    law = ho_superposition_qfi(probe, 2, t).value
    assert q == pytest.approx(law, rel=0.05)
