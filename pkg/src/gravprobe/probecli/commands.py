"""One function per reproducible artifact.  Each returns (written paths, report)."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from ..hilbert import UnitSystem
from ..metrology import StateFamily, qfi_commuting_superposition, qfi_from_fidelity
from ..models import (
    FiniteWellProbe,
    FreeGaussianProbe,
    HarmonicProbe,
    InfiniteWellProbe,
    free_gaussian_qfi,
    free_qfi_monotonicity,
    fsw_bound_states,
    fsw_ground_qfi,
    ho2d_qfi,
    ho_eigenstate_qfi,
    ho_first_order_energy,
    ho_perturbed_superposition_qfi,
    ho_static_superposition_qfi,
    isw_closed_forms,
    isw_weighted_ratio,
)
from ..models.harmonic import HO2D_PAIRING, QFI_UNIT as HO_UNIT, ho1d_table_value
from ..metrology import position_fisher_decomposition, qfi_pure
from ..hilbert import BasisDescriptor, StateVector
from .. import oracle
from .config import MEV_PER_C, RunConfig
from .output import write_table
from .report import COLUMNS as REPORT_COLUMNS, ValidationReport

TABLE1_1D = {"0": Fraction(39, 8), "1": Fraction(315, 8), "s01": Fraction(177, 8)}
TABLE1_ROWS = (
    ("00", Fraction(17), Fraction(68, 39)),
    ("10", Fraction(75), Fraction(100, 59)),
    ("00+01", Fraction(46), Fraction(46, 27)),
    ("10+01", Fraction(75), Fraction(100, 59)),
)
HO_FIGURE_PAIRS = ((0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4))


def units_for(config: RunConfig) -> UnitSystem:
    if config.units == "si":
        return UnitSystem.si(config.probe_mass)
    return UnitSystem.natural()


def parallel_map(fn, items, workers: int) -> list:
    """Order-preserving map; results never depend on scheduling."""
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _write(config: RunConfig, command: str, name: str, columns, rows) -> Path:
    return write_table(config.out, name, columns, rows, command=command,
                       digest=config.digest(), fmt=config.format)


def _write_report(config: RunConfig, command: str, report: ValidationReport) -> Path:
    return _write(config, command, f"validation_{command}", REPORT_COLUMNS, report.rows())


def _new_report(config: RunConfig) -> ValidationReport:
    return ValidationReport(tolerance_override=config.validation_tolerance)


def _flag(report: ValidationReport, name: str, ok: bool) -> None:
    # boolean properties recorded as 1-vs-1 (pass) or 1-vs-0 (fail) at zero tolerance
    report.add(name, 1.0, 1.0 if ok else 0.0, 0.0)


# oscillator table -----------------------------------------------------------------

def table1_data(config: RunConfig):
    units = units_for(config)
    p1 = HarmonicProbe(config.omega, 1, config.ho_truncation, units)
    p2 = HarmonicProbe(config.omega, 2, config.ho_truncation, units)
    report = _new_report(config)
    values_1d = {name: ho1d_table_value(name, p1) for name in TABLE1_1D}
    for name, exact in TABLE1_1D.items():
        report.add(f"table1_1d_{name}", float(exact), values_1d[name], 1e-9)
    rows = []
    for i, (state, exact_2d, exact_ratio) in enumerate(TABLE1_ROWS, 1):
        q2 = ho2d_qfi(p2, state).metadata["in_table_units"]
        first, second = HO2D_PAIRING[state]
        ratio = q2 / (values_1d[first] + values_1d[second])
        report.add(f"table1_row{i}_2d", float(exact_2d), q2, 1e-9)
        report.add(f"table1_row{i}_ratio", float(exact_ratio), ratio, 1e-9)
        rows.append((i, state, first, values_1d[first], second, values_1d[second], q2, ratio,
                     HO_UNIT, "perturbative_ket"))
    return rows, report


def cmd_table1(config: RunConfig):
    rows, report = table1_data(config)
    columns = ("row", "state_2d", "analogue_1", "qfi_1d_1", "analogue_2", "qfi_1d_2",
               "qfi_2d", "weighted_ratio", "qfi_units", "method")
    paths = [_write(config, "table1", "table1", columns, rows),
             _write_report(config, "table1", report)]
    return paths, report


# finite-well figure ------------------------------------------------------------

def _fsw_point(args):
    a, v0 = args
    probe = FiniteWellProbe(a, v0)
    spec = fsw_bound_states(probe)
    return spec.count, float(spec.energies[0]), fsw_ground_qfi(probe).value


def interior_maxima(values) -> list:
    v = np.asarray(values, dtype=float)
    return [i for i in range(1, len(v) - 1) if v[i] > v[i - 1] and v[i] >= v[i + 1]]


def cmd_fsw_figure(config: RunConfig):
    """QFI of the finite-well ground state (always in natural units)."""
    report = _new_report(config)
    unit = "1/gamma^2"
    v0_grid = config.fsw_v0_sweep.values()
    a_grid = config.fsw_a_sweep.values()
    rows_v0, rows_a, rows_e = [], [], []
    peaks = {}
    for a in config.fsw_a_values:
        res = parallel_map(_fsw_point, [(a, v) for v in v0_grid], config.workers)
        qfi = [r[2] for r in res]
        maxima = interior_maxima(qfi)
        peaks[a] = [float(v0_grid[i]) for i in maxima]
        _flag(report, f"fsw_v0_curve_a={a!r}_single_interior_max", len(maxima) == 1)
        _flag(report, f"fsw_v0_curve_a={a!r}_zero_below_two_states",
              all(q == 0.0 for (n, _, q) in res if n < 2))
        rows_v0 += [(a, v, n, e, q, unit, "perturbative_ket") for v, (n, e, q) in zip(v0_grid, res)]
    locs = [peaks[a][0] for a in config.fsw_a_values if len(peaks[a]) == 1]
    if len(locs) == len(config.fsw_a_values):
        order = np.argsort(config.fsw_a_values)
        _flag(report, "fsw_peak_location_decreasing_in_a", bool(np.all(np.diff(np.array(locs)[order]) < 0)))
    for v0 in config.fsw_v0_values:
        res = parallel_map(_fsw_point, [(a, v0) for a in a_grid], config.workers)
        rows_a += [(v0, a, n, e, q, unit, "perturbative_ket") for a, (n, e, q) in zip(a_grid, res)]
        rows_e += sorted(((v0, e, n, q, unit, "perturbative_ket") for (n, e, q) in res),
                         key=lambda r: r[1])
        _flag(report, f"fsw_a_curve_v0={v0!r}_zero_below_two_states",
              all(q == 0.0 for (n, _, q) in res if n < 2))
    paths = [
        _write(config, "fsw-figure", "fsw_qfi_vs_v0",
               ("a", "v0", "bound_states", "ground_energy", "qfi", "qfi_units", "method"), rows_v0),
        _write(config, "fsw-figure", "fsw_qfi_vs_a",
               ("v0", "a", "bound_states", "ground_energy", "qfi", "qfi_units", "method"), rows_a),
        _write(config, "fsw-figure", "fsw_qfi_vs_energy",
               ("v0", "ground_energy", "bound_states", "qfi", "qfi_units", "method"), rows_e),
        _write_report(config, "fsw-figure", report),
    ]
    return paths, report


# oscillator figure -------------------------------------------------------------

def cmd_ho_figure(config: RunConfig):
    """QFI vs t for perturbed superpositions (|psi_j> + |psi_n>)/sqrt(2), natural units."""
    probe = HarmonicProbe(config.omega, 1, config.ho_truncation, UnitSystem.natural())
    times = config.ho_t_sweep.values()
    report = _new_report(config)
    rows = []
    at_one = {}
    for pair in HO_FIGURE_PAIRS:
        vals = parallel_map(
            lambda t: ho_perturbed_superposition_qfi(probe, pair, t, config.gamma).value,
            times, config.workers)
        rows += [(pair[0], pair[1], t, q, "1/gamma^2", "fidelity_fd") for t, q in zip(times, vals)]
        at_one[pair] = ho_perturbed_superposition_qfi(probe, pair, 1.0, config.gamma).value
        _flag(report, f"ho_pair_{pair[0]}_{pair[1]}_nonnegative", min(vals) >= 0.0)
    for n in (2, 3, 4):
        _flag(report, f"ho_hierarchy_n={n}", at_one[(1, n)] > at_one[(0, n)])
    paths = [_write(config, "ho-figure", "ho_qfi_vs_t",
                    ("j", "n", "t", "qfi", "qfi_units", "method"), rows),
             _write_report(config, "ho-figure", report)]
    return paths, report


# cross-system comparison ---------------------------------------------------------

def _in_range(x, bounds) -> bool:
    lo, hi = bounds
    return lo <= x <= hi


def cmd_comparison(config: RunConfig):
    """Free Gaussian, infinite well (|1>+|4>) and oscillator (|psi_1>+|psi_4>) in SI at time t."""
    units = UnitSystem.si(config.probe_mass)
    m, hbar, t = units.probe_mass, units.hbar, config.t
    rows = []
    p0 = config.free_p0_mev * MEV_PER_C
    for s_mev in config.free_sigma_sweep_mev.values():
        probe = FreeGaussianProbe(p0, s_mev * MEV_PER_C, t, units)
        res = free_gaussian_qfi(probe)
        rows.append(("free", "sigma_MeV/c", s_mev, probe.mean_energy, res.value, "1/gamma^2",
                     res.method.value, _in_range(s_mev, config.free_sigma_real_mev)))
    for a_nm in config.isw_a_sweep_nm.values():
        probe = InfiniteWellProbe(a_nm * 1e-9, 1, units)
        res = isw_closed_forms(probe, t, 4)
        rows.append(("isw", "a_nm", a_nm, res.metadata["mean_energy"], res.value, "1/gamma^2",
                     res.method.value, _in_range(a_nm, config.isw_a_real_nm)))

    def ho_point(omega):
        probe = HarmonicProbe(omega, 1, config.ho_truncation, units)
        return ho_perturbed_superposition_qfi(probe, (1, 4), t, gamma=0.0, method="analytic").value

    omegas = config.ho_omega_sweep.values()
    for omega, q in zip(omegas, parallel_map(ho_point, omegas, config.workers)):
        rows.append(("ho", "omega_1/s", omega, 3.0 * hbar * omega, q, "1/gamma^2",
                     "analytic_derivative", _in_range(omega, config.ho_omega_real)))
    report = _new_report(config)
    ho_real = [r[4] for r in rows if r[0] == "ho" and r[7]]
    isw_real = [r[4] for r in rows if r[0] == "isw" and r[7]]
    free_all = [r[4] for r in rows if r[0] == "free"]
    gap = float(np.log10(min(ho_real) / max(isw_real))) if ho_real and isw_real else float("nan")
    _flag(report, "comparison_ho_min_above_isw_max", bool(gap > 0))
    _flag(report, "comparison_free_vanishes_as_sigma_to_zero", free_all[0] < 1e-6 * max(free_all))
    summary = [("log10_ho_min_over_isw_max", gap),
               ("ho_min_real", min(ho_real) if ho_real else float("nan")),
               ("isw_max_real", max(isw_real) if isw_real else float("nan")),
               ("mass_kg", m), ("t_s", t)]
    # informational only: monotonicity of the free-particle QFI on sigma^2 <= 2 m h0
    mono = free_qfi_monotonicity(np.linspace(0.05, 5.0, 40))
    summary += [(f"free_qfi_{k}", float(v)) for k, v in mono.items()]
    cols = ("system", "parameter", "value", "energy_J", "qfi", "qfi_units", "method", "real_range")
    paths = [_write(config, "comparison", "comparison", cols, rows),
             _write(config, "comparison", "comparison_summary", ("quantity", "value"), summary),
             _write_report(config, "comparison", report)]
    return paths, report


# weighted ratio surface ---------------------------------------------------------

def cmd_ratio_surface(config: RunConfig):
    nmax = config.ratio_nmax
    rows = []
    best = Fraction(0)
    best_at = []
    for nx in range(1, nmax + 1):
        for ny in range(1, nmax + 1):
            if (nx, ny) == (1, 1):
                continue
            r = isw_weighted_ratio(nx, ny)
            rows.append((nx, ny, float(r), str(r)))
            if r > best:
                best, best_at = r, [(nx, ny)]
            elif r == best:
                best_at.append((nx, ny))
    report = _new_report(config)
    report.add("ratio_surface_max", 8.0, float(best), 1e-12)
    _flag(report, "ratio_max_on_diagonal", all(nx == ny for nx, ny in best_at))
    for n in range(2, min(nmax, 20) + 1):
        report.add(f"ratio_3d_diagonal_n={n}", 27.0, float(isw_weighted_ratio(n, n, n)), 1e-12)
    paths = [_write(config, "ratio-surface", "ratio_surface", ("nx", "ny", "ratio", "ratio_exact"), rows),
             _write_report(config, "ratio-surface", report)]
    return paths, report


# validation suite ----------------------------------------------------------------

def _checks_closed_forms(report: ValidationReport, config: RunConfig) -> None:
    rng = np.random.default_rng(config.seed)
    p1 = HarmonicProbe(truncation=max(config.ho_truncation, 20))
    for n in range(11):
        res = ho_eigenstate_qfi(p1, n)
        report.add(f"ho_polynomial_n={n}", res.value, res.metadata["ket_value"], 1e-10)
    report.add("ho_superposition_01", 177 / 8, ho_static_superposition_qfi(p1, (0, 1)).value, 1e-9)
    for n in range(2, 21):
        report.add(f"ratio_diagonal_n={n}", 8.0, float(isw_weighted_ratio(n, n)), 1e-12)
    report.add("ratio_3d_diagonal", 27.0, float(isw_weighted_ratio(2, 2, 2)), 1e-12)
    worst = 0.0
    for p0, sigma in zip(rng.uniform(-3, 3, 100), rng.uniform(0.05, 3, 100)):
        probe = FreeGaussianProbe(p0, sigma)
        res = free_gaussian_qfi(probe, 1.0)
        worst = max(worst, abs(res.metadata["h0_form"] - res.value) / res.value)
    report.add("free_h0_form_identity_worst", 1.0, 1.0 + worst, 1e-12)
    probe = FreeGaussianProbe(0.7, 1.3)
    report.add("free_vs_moment_quadrature", free_gaussian_qfi(probe, 1.0).value,
               oracle.gaussian_moment_qfi(probe, 1.0), 1e-8)
    for ns in (2, 3, 4):
        res = isw_closed_forms(InfiniteWellProbe(), 1.0, ns)
        report.add(f"isw_energy_form_n={ns}", res.value, res.metadata["energy_form"], 1e-12)
    for n in (2, 4):
        ho = ho_first_order_energy(p1, n) - ho_first_order_energy(p1, 0)
        direct = qfi_commuting_superposition([0.5, 0.5], [0.0, ho], 1.0).value
        report.add(f"ho_commuting_superposition_n={n}", 9 / 4 * n**2 * (1 + n) ** 2, direct, 1e-12)


def _checks_oracle(report: ValidationReport, config: RunConfig) -> None:
    g = config.gamma
    isw = oracle.discretize(InfiniteWellProbe(), 0.0, 256)
    spec = oracle.diagonalize(isw, 0.0, 10)
    for n in range(10):
        report.add(f"oracle_isw_level_{n + 1}", np.pi ** 2 * (n + 1) ** 2 / 2, spec.eigenvalues[n], 1e-8)
    fam = oracle.oracle_state_family(isw, oracle.Superposition((0, 1), 1.0, perturbed=False))
    report.add("oracle_isw_superposition_qfi", isw_closed_forms(InfiniteWellProbe(), 1.0, 2).value,
               qfi_from_fidelity(fam, g, g).value, 1e-4)
    fam = oracle.oracle_state_family(isw, oracle.Eigenstate(0))
    report.add("oracle_isw_eigenstate_qfi_zero", 0.0, qfi_from_fidelity(fam, g, g).value, 1e-6)

    ho = oracle.discretize(HarmonicProbe(), 0.0, 256)
    spec = oracle.diagonalize(ho, 0.0, 11)
    for n in range(11):
        report.add(f"oracle_ho_level_{n}", n + 0.5, spec.eigenvalues[n], 1e-8)
    for n in (0, 1):
        fam = oracle.oracle_state_family(ho, oracle.Eigenstate(n))
        report.add(f"oracle_ho_eigenstate_qfi_n={n}", float(TABLE1_1D[str(n)]),
                   qfi_from_fidelity(fam, g, g).value, 1e-3)
    slope, expect = oracle.hellmann_feynman(ho, 0)
    report.add("oracle_hellmann_feynman_ho0", expect, slope, 1e-6)
    report.add("oracle_ho0_first_order_energy", 0.75, expect, 1e-6)
    report.add("oracle_first_order_residual_slope", 2.0,
               oracle.linear_residual_slope(ho, 0, 0.75), 0.05)
    ho2 = HarmonicProbe(dims=2, truncation=16)
    fam = oracle.oracle_state_family(ho2, oracle.Eigenstate(0), representation="fock")
    report.add("oracle_ho2d_ground_qfi", 17.0, qfi_from_fidelity(fam, g, g).value, 1e-3)

    fsw = FiniteWellProbe(1.0, np.sqrt(250))
    roots = fsw_bound_states(fsw)
    spec = oracle.diagonalize(oracle.discretize(fsw, 0.0, 2048), 0.0, roots.count)
    for n in range(roots.count):
        report.add(f"oracle_fsw_level_{n}", roots.energies[n], spec.eigenvalues[n], 1e-6)


def position_test_families(basis: BasisDescriptor) -> dict:
    """A pure-phase family and a real-amplitude family with exact derivatives."""
    x = basis.points()
    base = np.exp(-x ** 2 / 2) * (1 + 0.3 * x)

    def phase_state(g):
        return StateVector.from_wavefunction(basis, base * np.exp(1j * g * x ** 3)).normalize()

    def phase_derivative(g):
        return StateVector(basis, 1j * x ** 3 * phase_state(g).amplitudes)

    def real_state(g):
        return StateVector.from_wavefunction(basis, base * np.exp(-g * x ** 2)).normalize()

    def real_derivative(g):
        v = real_state(g).amplitudes
        mean_x2 = np.sum(x ** 2 * np.abs(v) ** 2)
        return StateVector(basis, (mean_x2 - x ** 2) * v)

    return {"phase": StateFamily(phase_state, phase_derivative),
            "real": StateFamily(real_state, real_derivative)}


def _checks_position_identity(report: ValidationReport) -> None:
    families = position_test_families(BasisDescriptor.grid1d(-8, 8, 801))
    for name, fam in families.items():
        dec = position_fisher_decomposition(fam, 0.2)
        exact = qfi_pure(fam(0.2), fam.derivative(0.2)).value
        report.add(f"position_identity_{name}", exact, dec.qfi, 1e-6)
        if name == "real":
            report.add("position_cfi_equals_qfi_real", exact, dec.cfi_position, 1e-12)


def cmd_validate(config: RunConfig):
    """Closed-form identities and oracle cross-checks (bound-state-only FSW excluded)."""
    report = _new_report(config)
    if not config.validate:
        return [_write_report(config, "validate", report)], report
    _checks_closed_forms(report, config)
    _checks_oracle(report, config)
    _checks_position_identity(report)
    report.extend(table1_data(config)[1])
    paths = [_write_report(config, "validate", report)]
    return paths, report


COMMANDS = {
    "table1": cmd_table1,
    "fsw-figure": cmd_fsw_figure,
    "ho-figure": cmd_ho_figure,
    "comparison": cmd_comparison,
    "ratio-surface": cmd_ratio_surface,
    "validate": cmd_validate,
}
