"""Probe models: closed forms and perturbation problems for each potential."""
from .free_particle import (
    FreeGaussianProbe,
    free_gaussian_qfi,
    free_gaussian_qfi_h0,
    free_qfi_monotonicity,
    gaussian_p4_variance,
)
from .infinite_well import (
    InfiniteWellProbe,
    isw_closed_forms,
    isw_energy,
    isw_first_order_energy,
    isw_min_correction_level,
    isw_problem,
    isw_ratio_surface,
    isw_weighted_ratio,
)
from .finite_well import (
    FiniteWellProbe,
    FswSpectrum,
    fsw_approx_energy,
    fsw_bound_states,
    fsw_ground_qfi,
    fsw_problem,
)
from .harmonic import (
    HarmonicProbe,
    ho2d_qfi,
    ho2d_weighted_ratio,
    ho_eigenstate_polynomial,
    ho_eigenstate_qfi,
    ho_first_order_energy,
    ho_perturbed_superposition_qfi,
    ho_problem_1d,
    ho_problem_2d,
    ho_static_superposition_qfi,
    ho_superposition_qfi,
)

__all__ = [name for name in dir() if not name.startswith("_")]
