"""Analytic Fock and Schroedinger-cat Wigner functions before and after lossy extraction."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .phase_space import QuasiDistribution

__all__ = [
    "Cat",
    "Explicit",
    "Fock",
    "StateSpec",
    "cat_condition",
    "cat_fringe_damping",
    "cat_normalization",
    "cat_output_wigner",
    "cat_wigner",
    "fock_origin_value",
    "fock_output_wigner",
    "fock_threshold",
    "fock_wigner",
    "interference_amplitude",
    "laguerre",
    "output_wigner",
    "cavity_wigner",
    "parse_state",
    "single_photon_mixture_weights",
]

# Below this |2*eta - 1| the Fock output uses the expanded polynomial form.
SINGULAR_BAND = 1e-6
DEFAULT_CAT_MARGIN = 0.1


@dataclass(frozen=True)
class Fock:
    n: int

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 0:
            raise ValueError(f"photon number must be a nonnegative integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    def __str__(self):
        return f"fock:{self.n}"


@dataclass(frozen=True)
class Cat:
    alpha0: float

    def __post_init__(self):
        if isinstance(self.alpha0, complex) or not np.isfinite(self.alpha0) or self.alpha0 <= 0:
            raise ValueError(f"cat displacement must be real and positive, got {self.alpha0}")
        object.__setattr__(self, "alpha0", float(self.alpha0))

    def __str__(self):
        return f"cat:{self.alpha0:g}"


@dataclass(frozen=True)
class Explicit:
    """Arbitrary cavity state given as a truncated Fock-basis density matrix."""

    rho: np.ndarray
    name: str = "explicit"

    def __str__(self):
        return self.name


StateSpec = Union[Fock, Cat, Explicit]


def parse_state(text: str) -> StateSpec:
    """Parse ``"fock:<n>"`` or ``"cat:<alpha0>"``."""
    kind, _, arg = text.strip().partition(":")
    kind = kind.lower()
    try:
        if kind == "fock":
            value = float(arg)
            if not value.is_integer():
                raise ValueError(f"photon number must be an integer, got {arg!r}")
            return Fock(int(value))
        if kind == "cat":
            return Cat(float(arg))
    except ValueError as exc:
        raise ValueError(f"bad state descriptor {text!r}: {exc}") from None
    raise ValueError(f"bad state descriptor {text!r}: expected 'fock:<n>' or 'cat:<alpha0>'")


def laguerre(n: int, x):
    """Laguerre polynomial L_n(x) by the three-term recurrence."""
    if n < 0:
        raise ValueError("order must be nonnegative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 - x
    for k in range(1, n):
        prev, cur = cur, ((2 * k + 1 - x) * cur - k * prev) / (k + 1)
    return cur


def _scaled_laguerre(n: int, x, eps: float):
    """eps**n * L_n(x / eps), finite as eps -> 0."""
    if abs(eps) >= SINGULAR_BAND:
        return eps ** n * laguerre(n, np.asarray(x) / eps)
    x = np.asarray(x, dtype=float)
    total = np.zeros_like(x)
    for k in range(n + 1):
        total = total + math.comb(n, k) * eps ** (n - k) * (-x) ** k / math.factorial(k)
    return total


def _fock_radius(n: int) -> float:
    return math.sqrt(n) + 5.0


def fock_wigner(n: int) -> QuasiDistribution:
    """(2/pi) (-1)^n exp(-2|a|^2) L_n(4|a|^2)."""
    n = Fock(n).n
    sign = -1.0 if n % 2 else 1.0

    def func(alpha):
        r2 = np.abs(alpha) ** 2
        return (2.0 / np.pi) * sign * np.exp(-2.0 * r2) * laguerre(n, 4.0 * r2)

    return QuasiDistribution(0.0, func, f"cavity:fock({n})", _fock_radius(n))


def fock_output_wigner(n: int, eta: float) -> QuasiDistribution:
    """Wigner function of the pulse extracted from an n-photon cavity state."""
    n = Fock(n).n
    _check_eta(eta)
    if eta == 1.0:
        return fock_wigner(n)
    sign = -1.0 if n % 2 else 1.0
    eps = 2.0 * eta - 1.0

    def func(alpha):
        r2 = np.abs(alpha) ** 2
        return (2.0 / np.pi) * sign * np.exp(-2.0 * r2) * _scaled_laguerre(n, 4.0 * eta * r2, eps)

    return QuasiDistribution(0.0, func, f"output:fock({n})@eta={eta:g}", _fock_radius(n))


def fock_origin_value(n: int, eta: float) -> float:
    """W_out^(n)(0) = (2/pi) (1 - 2 eta)^n; vanishes only at eta = 1/2."""
    return float(fock_output_wigner(n, eta)(0.0))


def fock_threshold(n: int) -> float:
    """Minimal efficiency 1 - 1/(2n) for the n-photon component to prevail."""
    n = Fock(n).n
    if n == 0:
        raise ValueError("the vacuum has no extraction threshold")
    return 1.0 - 1.0 / (2 * n)


def single_photon_mixture_weights(eta: float, check: bool = True) -> dict:
    """Vacuum and one-photon weights of the pulse extracted from |1>.

    With ``check`` the mixture identity between the output Wigner function
    and the weighted vacuum/one-photon Wigner functions is verified on a
    small probe set.
    """
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    weights = {"vacuum_weight": 1.0 - eta, "one_photon_weight": eta}
    if check:
        probe = np.array([0.0, 0.3 + 0.1j, -0.7j, 1.2 - 0.4j, 2.5])
        lhs = fock_output_wigner(1, eta)(probe)
        rhs = (1.0 - eta) * fock_wigner(0)(probe) + eta * fock_wigner(1)(probe)
        residual = np.max(np.abs(lhs - rhs))
        if residual > 1e-14:
            raise ArithmeticError(f"mixture identity residual {residual:.2e}")
    return weights


def cat_normalization(alpha0: float) -> float:
    """N = [2(1 + exp(-2 alpha0^2))]^(-1/2), from <alpha0|-alpha0> = exp(-2 alpha0^2)."""
    alpha0 = Cat(alpha0).alpha0
    return (2.0 * (1.0 + math.exp(-2.0 * alpha0 ** 2))) ** -0.5


def _cat_radius(alpha0):
    return alpha0 + 5.0


def cat_wigner(alpha0: float) -> QuasiDistribution:
    """Wigner function of N(|alpha0> + |-alpha0>)."""
    return _cat(alpha0, 1.0, f"cavity:cat({alpha0:g})")


def cat_output_wigner(alpha0: float, eta: float) -> QuasiDistribution:
    """Extracted even cat: peaks at +-sqrt(eta) alpha0, fringes damped by exp(-2 alpha0^2 (1-eta))."""
    _check_eta(eta)
    return _cat(alpha0, eta, f"output:cat({alpha0:g})@eta={eta:g}")


def _cat(alpha0, eta, label):
    alpha0 = Cat(alpha0).alpha0
    pref = 2.0 * cat_normalization(alpha0) ** 2 / np.pi
    shift = math.sqrt(eta) * alpha0
    damping = math.exp(-2.0 * alpha0 ** 2 * (1.0 - eta))

    def func(alpha):
        alpha = np.asarray(alpha, dtype=complex)
        return pref * (
            np.exp(-2.0 * np.abs(alpha - shift) ** 2)
            + np.exp(-2.0 * np.abs(alpha + shift) ** 2)
            + 2.0 * np.exp(-2.0 * np.abs(alpha) ** 2) * np.cos(4.0 * shift * alpha.imag) * damping
        )

    return QuasiDistribution(0.0, func, label, _cat_radius(alpha0))


def cat_fringe_damping(alpha0: float, eta: float) -> float:
    return math.exp(-2.0 * alpha0 ** 2 * (1.0 - eta))


def interference_amplitude(y, values, shift: float) -> float:
    """Fringe amplitude of a cat-like Wigner function sampled on the imaginary axis.

    Along alpha = iy both Gaussian peaks at +-shift and the interference term
    share the envelope exp(-2 y^2); after removing it the samples are fitted
    by least squares to c0 + c1 cos(4 shift y) and ``c1`` is returned.
    """
    y = np.asarray(y, dtype=float)
    g = np.asarray(values, dtype=float) * np.exp(2.0 * y * y)
    design = np.column_stack([np.ones_like(y), np.cos(4.0 * shift * y)])
    coef, *_ = np.linalg.lstsq(design, g, rcond=None)
    return float(coef[1])


def cat_condition(alpha0: float, eta: float, threshold: float = DEFAULT_CAT_MARGIN) -> dict:
    """Margin (1 - eta) 2 alpha0^2 of the near-perfect extraction condition for cats."""
    alpha0 = Cat(alpha0).alpha0
    margin = (1.0 - eta) * 2.0 * alpha0 ** 2
    return {"margin": margin, "satisfied": margin < threshold, "threshold": threshold}


def _check_eta(eta):
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")


def cavity_wigner(spec: StateSpec, cutoff: Optional[int] = None) -> QuasiDistribution:
    """Analytic cavity Wigner function; explicit states go through the Fock-basis reconstruction."""
    if isinstance(spec, Fock):
        return fock_wigner(spec.n)
    if isinstance(spec, Cat):
        return cat_wigner(spec.alpha0)
    if isinstance(spec, Explicit):
        from .oracle import DensityMatrix, oracle_distribution

        return oracle_distribution(DensityMatrix(spec.rho), label=f"cavity:{spec.name}")
    raise TypeError(f"unsupported state {spec!r}")


def output_wigner(spec: StateSpec, eta: float) -> QuasiDistribution:
    """Closed-form output Wigner function for Fock and cat states."""
    if isinstance(spec, Fock):
        return fock_output_wigner(spec.n, eta)
    if isinstance(spec, Cat):
        return cat_output_wigner(spec.alpha0, eta)
    if isinstance(spec, Explicit):
        from .oracle import DensityMatrix, loss_channel, oracle_distribution

        rho = loss_channel(DensityMatrix(spec.rho), eta)
        return oracle_distribution(rho, label=f"output:{spec.name}@eta={eta:g}")
    raise TypeError(f"unsupported state {spec!r}")
