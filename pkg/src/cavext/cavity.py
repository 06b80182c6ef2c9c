"""High-Q cavity model: decay rates and the extraction efficiency eta(t).

Times are elapsed times since the cavity state was prepared. The closed form
``eta_closed`` and the frequency-domain quadrature ``eta_numeric`` share no
code beyond the rate computation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "C_VACUUM",
    "CavityParams",
    "EfficiencyCurve",
    "QuadratureError",
    "QuadratureReport",
    "RegimeWarning",
    "decay_rates",
    "efficiency_curve",
    "eta_closed",
    "eta_numeric",
    "extraction_quality",
    "filter_kernel",
    "integrate_filter_kernel",
    "rate_ratio_for",
]

C_VACUUM = 299_792_458.0
HIGH_Q_LIMIT = 0.1
DEFAULT_NEAR_PERFECT_RATIO = 100.0


class RegimeWarning(UserWarning):
    """Mirror coefficients outside the high-Q regime the model assumes."""


class QuadratureError(ArithmeticError):
    """Successive refinements of the kernel quadrature disagree beyond tolerance."""


@dataclass(frozen=True)
class CavityParams:
    """One-dimensional cavity of length ``cavity_length`` closed by a leaky mirror.

    ``transmission_coeff`` and ``absorption_coeff`` are the complex amplitude
    coefficients T and A of the coupling mirror at the mode frequency.
    """

    cavity_length: float
    transmission_coeff: complex
    absorption_coeff: complex = 0.0
    mode_frequency: float = 0.0
    light_speed: float = C_VACUUM

    def __post_init__(self):
        if not self.cavity_length > 0:
            raise ValueError("cavity_length must be positive")
        if not self.light_speed > 0:
            raise ValueError("light_speed must be positive")
        if abs(self.transmission_coeff) == 0:
            raise ValueError("transmission coefficient must be nonzero; nothing would leave the cavity")
        for name, value in (("|T|", self.transmission_coeff), ("|A|", self.absorption_coeff)):
            if abs(value) > HIGH_Q_LIMIT:
                warnings.warn(
                    f"{name} = {abs(value):g} exceeds {HIGH_Q_LIMIT}; high-Q approximation degrades",
                    RegimeWarning, stacklevel=3,
                )

    @property
    def round_trip_rate(self) -> float:
        """c / 2l."""
        return self.light_speed / (2.0 * self.cavity_length)

    @property
    def gamma_rad(self) -> float:
        return self.round_trip_rate * abs(self.transmission_coeff) ** 2

    @property
    def gamma_abs(self) -> float:
        return self.round_trip_rate * abs(self.absorption_coeff) ** 2

    @property
    def mode_spacing(self) -> float:
        """Delta omega = pi c / l."""
        return math.pi * self.light_speed / self.cavity_length

    @classmethod
    def from_rates(cls, gamma_rad: float, gamma_abs: float, cavity_length: float = 1e-2,
                   mode_frequency: float = 0.0, light_speed: float = C_VACUUM) -> "CavityParams":
        """Real, positive T and A reproducing the given rates for a cavity of this length."""
        if not gamma_rad > 0 or gamma_abs < 0:
            raise ValueError("need gamma_rad > 0 and gamma_abs >= 0")
        rate = light_speed / (2.0 * cavity_length)
        return cls(cavity_length, math.sqrt(gamma_rad / rate), math.sqrt(gamma_abs / rate),
                   mode_frequency, light_speed)


def decay_rates(params: CavityParams) -> tuple[float, float]:
    """(gamma_rad, gamma_abs) = (c/2l)|T|^2, (c/2l)|A|^2 in 1/s."""
    return params.gamma_rad, params.gamma_abs


def eta_closed(gamma_rad: float, gamma_abs: float, elapsed):
    """gamma_rad/(gamma_rad + gamma_abs) * (1 - exp(-(gamma_rad + gamma_abs) t))."""
    if not gamma_rad > 0:
        raise ValueError("gamma_rad must be positive")
    if gamma_abs < 0:
        raise ValueError("gamma_abs must be nonnegative")
    t = np.asarray(elapsed, dtype=float)
    if np.any(t < 0):
        raise ValueError("elapsed time must be nonnegative")
    total = gamma_rad + gamma_abs
    value = gamma_rad / total * -np.expm1(-total * t)
    return float(value) if value.ndim == 0 else value


def rate_ratio_for(eta: float) -> float:
    """gamma_abs/gamma_rad whose long-time efficiency equals ``eta``."""
    if not 0 < eta <= 1:
        raise ValueError("efficiency must lie in (0, 1]")
    return (1.0 - eta) / eta


def extraction_quality(eta: float, threshold: float = DEFAULT_NEAR_PERFECT_RATIO) -> dict:
    """eta/(1 - eta) and whether it clears ``threshold``."""
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    ratio = math.inf if eta == 1 else eta / (1.0 - eta)
    return {"ratio": ratio, "near_perfect": ratio >= threshold, "threshold": threshold}


# ---------------------------------------------------------------------------
# Frequency-domain quadrature
# ---------------------------------------------------------------------------

def filter_kernel(params: CavityParams, omega, elapsed: float):
    """F(omega, t) connecting the initial cavity operator to the output field."""
    g = params.gamma_rad + params.gamma_abs
    omega = np.asarray(omega, dtype=float)
    z = (omega - params.mode_frequency) - 0.5j * g
    pref = 1j / math.sqrt(2.0 * math.pi) * math.sqrt(params.round_trip_rate) * np.conj(
        params.transmission_coeff)
    return pref * np.exp(1j * omega * elapsed) * np.expm1(-1j * z * elapsed) / z


def _kernel_sq(detuning, a, t):
    # |exp(-(i d + a) t) - 1|^2 / (d^2 + a^2), with gamma_rad/(2 pi) factored out
    num = np.abs(np.expm1(-(1j * detuning + a) * t)) ** 2
    return num / (detuning * detuning + a * a)


@dataclass
class QuadratureReport:
    """Result of integrating |F|^2.

    ``value`` is the integral over the whole frequency axis; ``in_band`` is
    the part over the physical interval of one mode spacing centred on the
    mode, and ``band_residual = value - in_band`` the part the single-mode
    description neglects.
    """

    value: float
    in_band: float
    band_residual: float
    refinement_error: float
    nodes: int
    spacing_ratio: float
    levels: list = field(default_factory=list)

    def discrepancy(self, reference: float) -> dict:
        """Relative deviations of the full-axis and in-band values from ``reference``."""
        return {
            "full": abs(self.value - reference) / reference,
            "in_band": abs(self.in_band - reference) / reference,
        }


def _gl(n):
    return np.polynomial.legendre.leggauss(n)


def _integrate_panels(edges, f, n):
    t, w = _gl(n)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    x = mid + half * t
    return float(np.sum(half * w * f(x))), x.size


def _core_edges(lo, hi, a, max_width):
    """Panel edges on [lo, hi] (lo >= 0): doubling away from the peak, capped at ``max_width``."""
    geo = [0.0]
    step = a
    while geo[-1] < hi:
        geo.append(geo[-1] + min(step, max_width))
        step *= 2.0
    edges = np.clip(np.array(geo), lo, hi)
    edges = np.unique(np.concatenate([[lo, hi], edges]))
    return edges[(edges >= lo) & (edges <= hi)]


def _bisect(edges):
    mids = 0.5 * (edges[:-1] + edges[1:])
    out = np.empty(edges.size + mids.size)
    out[0::2] = edges
    out[1::2] = mids
    return out


def _smooth_tail(lo, hi, a, n):
    """Int_lo^hi dd / (d^2 + a^2) via d = lo/u; ``hi`` may be inf."""
    u_lo = 0.0 if math.isinf(hi) else lo / hi
    t, w = _gl(n)
    u = 0.5 * (1.0 - u_lo) * t + 0.5 * (1.0 + u_lo)
    return float(0.5 * (1.0 - u_lo) * np.sum(w * lo / (lo * lo + a * a * u * u)))


def _oscillatory_tail(lo, hi, a, t, terms=6):
    """Int_lo^hi cos(d t) / (d^2 + a^2) dd by repeated integration by parts.

    Accurate when lo * t is large; ``hi`` may be inf.
    """

    def boundary(x):
        # sum_k (-1)^k e^{ixt} g^(k)(x) / (it)^(k+1), g = 1/(x^2 + a^2)
        total = 0j
        for k in range(terms):
            dk = (-1) ** k * math.factorial(k) * (
                1.0 / (x - 1j * a) ** (k + 1) - 1.0 / (x + 1j * a) ** (k + 1)) / (2j * a)
            total += (-1) ** k * dk / (1j * t) ** (k + 1)
        return (np.exp(1j * x * t) * total).real

    upper = 0.0 if math.isinf(hi) else boundary(hi)
    return upper - boundary(lo)


def integrate_filter_kernel(params: CavityParams, elapsed: float, quadrature_points: int = 64,
                            rtol: float = 1e-12, max_refinements: int = 6) -> QuadratureReport:
    """Integrate |F(omega, t)|^2 over frequency.

    The peak region |omega - omega_cav| <= X is covered by composite
    Gauss-Legendre panels that double in width away from the peak, capped at
    a few oscillation periods 2 pi / t; the panel set is bisected until two
    successive levels agree to ``rtol``. Beyond X the smooth part of the
    integrand is integrated after the substitution d -> X/d and the
    oscillating part by an integration-by-parts expansion.
    """
    if quadrature_points < 64:
        raise ValueError("quadrature_points must be at least 64")
    if elapsed < 0:
        raise ValueError("elapsed time must be nonnegative")
    g = params.gamma_rad + params.gamma_abs
    a = 0.5 * g
    band = 0.5 * params.mode_spacing
    spacing_ratio = g / params.mode_spacing
    if elapsed == 0:
        return QuadratureReport(0.0, 0.0, 0.0, 0.0, 0, spacing_ratio)
    t = float(elapsed)
    decay = math.exp(-a * t)
    oscillating = decay > 1e-18
    n = quadrature_points

    # X: past 40 linewidths and, if the cos(d t) term matters, a whole number
    # (>= 64) of oscillation periods so the expansion beyond X is accurate.
    x_cut = 40.0 * g
    if oscillating:
        period = 2.0 * math.pi / t
        x_cut = max(x_cut, 64.0 * period)
        x_cut = math.ceil(x_cut / period) * period
        max_width = 4.0 * period
    else:
        max_width = math.inf

    def f(d):
        return _kernel_sq(d, a, t)

    def far(lo, hi):
        smooth = (1.0 + decay * decay) * _smooth_tail(lo, hi, a, n)
        osc = -2.0 * decay * _oscillatory_tail(lo, hi, a, t) if oscillating else 0.0
        return smooth + osc

    inner_hi = min(x_cut, band)
    edges = _core_edges(0.0, inner_hi, a, max_width)
    outer_edges = _core_edges(band, x_cut, a, max_width) if band < x_cut else None

    levels = []
    prev = None
    err = math.inf
    for _ in range(max_refinements + 1):
        inner, nodes = _integrate_panels(edges, f, n)
        outer = 0.0
        if outer_edges is not None and outer_edges.size > 1:
            outer, extra = _integrate_panels(outer_edges, f, n)
            nodes += extra
        total = inner + outer
        levels.append(total)
        if prev is not None:
            err = abs(total - prev) / abs(total)
            if err <= rtol:
                break
        prev = total
        edges = _bisect(edges)
        if outer_edges is not None:
            outer_edges = _bisect(outer_edges)
    else:
        raise QuadratureError(
            f"kernel quadrature did not converge: successive levels differ by {err:.2e} "
            f"(rtol {rtol:.0e})"
        )

    if band > x_cut:
        in_half = inner + far(x_cut, band)
        out_half = far(band, math.inf)
    else:
        in_half = inner
        out_half = outer + far(x_cut, math.inf)

    scale = 2.0 * params.gamma_rad / (2.0 * math.pi)  # two symmetric halves
    value = scale * (in_half + out_half)
    in_band = scale * in_half
    return QuadratureReport(value, in_band, value - in_band, err, nodes, spacing_ratio,
                            [scale * lv for lv in levels])


def eta_numeric(params: CavityParams, elapsed: float, quadrature_points: int = 64,
                band: str = "full", rtol: float = 1e-12) -> float:
    """Efficiency from quadrature of |F|^2.

    ``band="full"`` integrates over the whole frequency axis, the limit in
    which the closed form holds; ``band="physical"`` keeps only the interval
    of one mode spacing around the mode.
    """
    report = integrate_filter_kernel(params, elapsed, quadrature_points, rtol)
    if band == "full":
        return report.value
    if band == "physical":
        return report.in_band
    raise ValueError(f"band must be 'full' or 'physical', got {band!r}")


@dataclass
class EfficiencyCurve:
    times: np.ndarray
    values: np.ndarray
    gamma_rad: float
    gamma_abs: float
    numeric: np.ndarray | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.times.shape != self.values.shape:
            raise ValueError("times and values must have equal length")
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be ascending")

    @property
    def asymptote(self) -> float:
        return self.gamma_rad / (self.gamma_rad + self.gamma_abs)


def efficiency_curve(gamma_rad: float, gamma_abs: float, times,
                     params: CavityParams | None = None, quadrature_points: int = 64) -> EfficiencyCurve:
    """eta(t) on ``times``; with ``params`` the quadrature column is added."""
    times = np.asarray(times, dtype=float)
    curve = EfficiencyCurve(times, eta_closed(gamma_rad, gamma_abs, times), gamma_rad, gamma_abs)
    if params is not None:
        curve.numeric = np.array([eta_numeric(params, float(t), quadrature_points) for t in times])
    return curve
