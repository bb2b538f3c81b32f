"""Free particle prepared in a Gaussian momentum wavepacket.

H0 and H1 are both functions of p, so the momentum distribution never changes
and the information sits in the phase t * p^4 / (hbar m (M_P c)^2).  The QFI is
4 (t / hbar)^2 Var(p^4) / (m (M_P c)^2)^2.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..hilbert import UnitSystem
from ..metrology import Method, QfiResult


@dataclass(frozen=True)
class FreeGaussianProbe:
    """Momentum density proportional to exp(-(p - p0)^2 / (2 sigma^2))."""

    p0: float = 0.0
    sigma: float = 1.0
    t: float = 1.0
    units: UnitSystem = field(default_factory=UnitSystem.natural)

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        # sigma^2 <= p0^2 + sigma^2 = 2 m h0 holds identically; kept as a sanity check
        assert self.sigma <= np.sqrt(2 * self.units.probe_mass * self.mean_energy) * (1 + 1e-12)

    @property
    def mean_energy(self) -> float:
        """h0 = <p^2> / (2m) = (p0^2 + sigma^2) / (2m)."""
        return (self.p0 ** 2 + self.sigma ** 2) / (2 * self.units.probe_mass)


def gaussian_p4_variance(p0: float, sigma: float) -> float:
    """Var(p^4) for p ~ N(p0, sigma^2): 8 sigma^2 (2 p0^6 + 21 p0^4 s^2 + 48 p0^2 s^4 + 12 s^6)."""
    r2 = (p0 / sigma) ** 2
    return 8.0 * sigma ** 8 * (2 * r2 ** 3 + 21 * r2 ** 2 + 48 * r2 + 12)


def free_gaussian_qfi(probe: FreeGaussianProbe, t: float | None = None) -> QfiResult:
    """32 t^2 sigma^2 [2 p0^6 + 21 p0^4 s^2 + 48 p0^2 s^4 + 12 s^6] / (hbar^2 m^2 (M_P c)^4).

    The same number in terms of the mean energy h0 is stored as ``h0_form``.
    ``t`` defaults to the probe's own time.
    """
    t = probe.t if t is None else t
    u = probe.units
    scale = u.probe_mass * u.planck_momentum ** 2
    # Var(p^4) / scale^2 grouped so SI magnitudes never under- or overflow
    r2 = (probe.p0 / probe.sigma) ** 2
    lead = (t / u.hbar) * probe.sigma ** 4 / scale
    value = 32.0 * lead ** 2 * (2 * r2 ** 3 + 21 * r2 ** 2 + 48 * r2 + 12)
    return QfiResult(value, Method.CLOSED_FORM, metadata={
        "t": t, "h0_form": free_gaussian_qfi_h0(probe, t), "mean_energy": probe.mean_energy})


def free_gaussian_qfi_h0(probe: FreeGaussianProbe, t: float | None = None) -> float:
    """Closed form rewritten with y = h0 m = (p0^2 + sigma^2)/2.

    32 t^2 sigma^2 (16 y^3 + 60 y^2 s^2 + 24 y s^4 - 17 s^6) / (hbar^2 m^2 (M_P c)^4).
    Only meaningful for sigma <= sqrt(2 m h0), which holds by construction.
    """
    t = probe.t if t is None else t
    u = probe.units
    s2 = probe.sigma ** 2
    y = probe.mean_energy * u.probe_mass / s2
    lead = (t / u.hbar) * probe.sigma ** 4 / (u.probe_mass * u.planck_momentum ** 2)
    return 32.0 * lead ** 2 * (16 * y ** 3 + 60 * y ** 2 + 24 * y - 17)


def free_qfi_monotonicity(y_values, points: int = 200) -> dict:
    """Scan the h0-form on sigma^2 <= 2 y (natural units, t = 1) for monotonicity.

    Returns whether the QFI is non-decreasing in y at fixed sigma and in sigma at
    fixed y.  The sigma slope vanishes exactly on the boundary sigma^2 = 2 y, so
    comparisons allow relative roundoff.  Reported, never enforced.
    """
    y_values = np.sort(np.asarray(y_values, dtype=float))

    def f(y, s2):
        return s2 * (16 * y ** 3 + 60 * y ** 2 * s2 + 24 * y * s2 ** 2 - 17 * s2 ** 3)

    tol = 1e-12
    in_sigma = True
    for y in y_values:
        vals = f(y, np.linspace(0.0, 2 * y, points))
        in_sigma &= bool(np.all(np.diff(vals) >= -tol * np.abs(vals[1:])))
    in_y = True
    for s2 in np.linspace(0.0, 2 * y_values[-1], points)[1:]:
        ys = y_values[y_values >= s2 / 2]
        vals = f(ys, s2)
        in_y &= bool(np.all(np.diff(vals) >= -tol * np.abs(vals[1:])))
    return {"nondecreasing_in_y": in_y, "nondecreasing_in_sigma": in_sigma}
