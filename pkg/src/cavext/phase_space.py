"""s-parametrized phase-space functions and the transforms between them.

A :class:`QuasiDistribution` wraps a vectorized evaluator ``alpha -> P(alpha; s)``.
Smoothing transforms (order lowering, the lossy-extraction convolution) are
evaluated by tensor-product Gauss-Legendre quadrature over the support of the
source distribution, with the Gaussian kernel applied as two separable matrices.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ConvolutionValidityError",
    "GridSpec",
    "PhaseGrid",
    "QuasiDistribution",
    "TailMassWarning",
    "convert_s_order",
    "extract_state",
    "extraction_order",
    "evaluate_on_grid",
    "gaussian_transform",
    "grid_integral",
    "wigner_convolution",
]

# Gauss-Legendre nodes per panel and the widest panel allowed; resolves cat
# fringes up to alpha0 ~ 4 to machine precision.
_PANEL_NODES = 12
_MAX_PANEL = 0.25
# Panel width in units of the kernel standard deviation.
_KERNEL_PANELS = 3.0
# Kernel tails are truncated beyond this many standard deviations (e^-32).
_KERNEL_REACH = 8.0


class ConvolutionValidityError(ValueError):
    """Requested (s0, s, eta) triple makes the Gaussian kernel width negative."""


class TailMassWarning(UserWarning):
    """Source distribution is not negligible at the edge of the integration window."""


@dataclass(frozen=True)
class QuasiDistribution:
    """Phase-space function of order ``order`` (0 Wigner, -1 Husimi, +1 Glauber).

    ``func`` maps a complex ndarray to a real ndarray of the same shape.
    ``grid_func(re, im)`` optionally evaluates on the tensor product
    ``re[:, None] + 1j * im[None, :]`` faster than pointwise evaluation.
    ``support_radius`` bounds |alpha| outside of which the function is
    negligible (below ~1e-14 relative); quadratures integrate over that disk's
    bounding square.
    """

    order: float
    func: Callable[[np.ndarray], np.ndarray]
    label: str = ""
    support_radius: float = 6.0
    grid_func: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self):
        if self.order > 1:
            raise ValueError(f"order must be <= 1, got {self.order}")
        if not self.support_radius > 0:
            raise ValueError("support_radius must be positive")

    def __call__(self, alpha):
        alpha = np.asarray(alpha, dtype=complex)
        return np.asarray(self.func(alpha), dtype=float)

    def on_grid(self, re, im) -> np.ndarray:
        """Values on the tensor grid, shape ``(len(re), len(im))``."""
        re = np.asarray(re, dtype=float)
        im = np.asarray(im, dtype=float)
        if self.grid_func is not None:
            return np.asarray(self.grid_func(re, im), dtype=float)
        return self(re[:, None] + 1j * im[None, :])


@dataclass(frozen=True)
class GridSpec:
    """Rectangular sampling of the alpha plane, ``n_re`` x ``n_im`` nodes including edges."""

    re_min: float = -5.0
    re_max: float = 5.0
    n_re: int = 161
    im_min: float = -5.0
    im_max: float = 5.0
    n_im: int = 161

    def __post_init__(self):
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("grid needs at least 2 nodes per axis")
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("grid bounds must be strictly ordered")

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``"remin:remax:n,immin:immax:n"``."""
        try:
            re_part, im_part = text.split(",")
            r0, r1, nr = re_part.split(":")
            i0, i1, ni = im_part.split(":")
            return cls(float(r0), float(r1), int(nr), float(i0), float(i1), int(ni))
        except ValueError as exc:
            raise ValueError(f"bad grid spec {text!r}: {exc}") from None

    @classmethod
    def square(cls, half_width: float, n: int) -> "GridSpec":
        return cls(-half_width, half_width, n, -half_width, half_width, n)

    @property
    def re(self) -> np.ndarray:
        return np.linspace(self.re_min, self.re_max, self.n_re)

    @property
    def im(self) -> np.ndarray:
        return np.linspace(self.im_min, self.im_max, self.n_im)

    def __str__(self):
        return (f"{self.re_min:g}:{self.re_max:g}:{self.n_re},"
                f"{self.im_min:g}:{self.im_max:g}:{self.n_im}")


@dataclass
class PhaseGrid:
    """Sampled phase-space function.

    ``values[i, j]`` is the value at ``re[i] + 1j * im[j]``; the flattened
    (row-major) order therefore runs over Im alpha fastest.
    """

    spec: GridSpec
    values: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.spec.n_re, self.spec.n_im):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.spec.n_re}, {self.spec.n_im})"
            )

    @property
    def re(self):
        return self.spec.re

    @property
    def im(self):
        return self.spec.im

    def value_at(self, alpha: complex) -> float:
        """Value at the node nearest to ``alpha``."""
        i = int(np.argmin(np.abs(self.re - alpha.real)))
        j = int(np.argmin(np.abs(self.im - alpha.imag)))
        return float(self.values[i, j])

    def integral(self) -> float:
        return grid_integral(self.values, self.re, self.im)


def grid_integral(values, re, im) -> float:
    """Trapezoidal integral over the grid rectangle (spectrally accurate for decaying functions)."""
    return float(np.trapezoid(np.trapezoid(values, im, axis=1), re))


def evaluate_on_grid(p: QuasiDistribution, spec: GridSpec, **metadata) -> PhaseGrid:
    meta = {"state": p.label, "s": p.order}
    meta.update(metadata)
    return PhaseGrid(spec, p.on_grid(spec.re, spec.im), meta)


# ---------------------------------------------------------------------------
# Gaussian transforms
# ---------------------------------------------------------------------------

def _panel_nodes(lo: float, hi: float, max_width: float):
    t, w = np.polynomial.legendre.leggauss(_PANEL_NODES)
    n_panels = max(1, int(np.ceil((hi - lo) / max_width)))
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * np.diff(edges)[:, None]
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    return (mid + half * t).ravel(), (half * w).ravel()


def _kernel_matrix(out, nodes, weights, scale, width):
    d = scale * nodes[None, :] - out[:, None]
    return np.exp(-2.0 * d * d / width) * weights[None, :]


def gaussian_transform(source: QuasiDistribution, scale: float, width: float,
                       order: float, label: str = "") -> QuasiDistribution:
    """Return ``alpha -> 2/(pi*width) * Int d^2b P(b) exp(-2|scale*b - alpha|^2 / width)``.

    This is the common form of order lowering (``scale = 1``,
    ``width = s_source - s_target``) and of lossy extraction
    (``scale = sqrt(eta)``). ``width`` must be positive.
    """
    if width <= 0:
        raise ValueError(f"kernel width must be positive, got {width}")
    if scale <= 0:
        raise ValueError(f"scale must be positive, got {scale}")
    radius = source.support_radius
    sigma = np.sqrt(width) / (2.0 * scale)  # kernel std in the source variable
    h = min(_MAX_PANEL, _KERNEL_PANELS * sigma)
    nodes, weights = _panel_nodes(-radius, radius, h)
    norm = 2.0 / (np.pi * width)
    cache = {}

    def source_values():
        # evaluated lazily, once; the matrix is reused for every output point
        if "v" not in cache:
            vals = source.on_grid(nodes, nodes)
            _check_tail(vals, source.label)
            cache["v"] = vals
        return cache["v"]

    def on_grid(re, im):
        kx = _kernel_matrix(re, nodes, weights, scale, width)
        ky = _kernel_matrix(im, nodes, weights, scale, width)
        return norm * (kx @ source_values() @ ky.T)

    def func(alpha):
        alpha = np.asarray(alpha, dtype=complex)
        ure, ire = np.unique(alpha.real, return_inverse=True)
        uim, iim = np.unique(alpha.imag, return_inverse=True)
        vals = on_grid(ure, uim)
        return vals[ire.reshape(alpha.shape), iim.reshape(alpha.shape)]

    new_radius = scale * radius + _KERNEL_REACH * np.sqrt(width) / 2.0
    return QuasiDistribution(order, func, label, new_radius, on_grid)


def _check_tail(vals, label):
    peak = np.max(np.abs(vals))
    edge = max(np.abs(vals[0]).max(), np.abs(vals[-1]).max(),
               np.abs(vals[:, 0]).max(), np.abs(vals[:, -1]).max())
    if peak > 0 and edge > 1e-12 * peak:
        warnings.warn(
            f"{label or 'source'}: relative magnitude {edge / peak:.1e} at the edge "
            "of the integration window; increase support_radius",
            TailMassWarning, stacklevel=3,
        )


def convert_s_order(p: QuasiDistribution, target_s: float) -> QuasiDistribution:
    """Gaussian-smooth ``p`` down to order ``target_s`` (identity if equal)."""
    width = p.order - target_s
    if width < 0:
        raise ValueError(
            f"cannot raise order from {p.order} to {target_s}: anti-smoothing is ill-posed"
        )
    if width == 0:
        return p
    return gaussian_transform(p, 1.0, width, target_s, label=p.label)


def extraction_order(eta: float, target_s: float) -> float:
    """Order the cavity function must have for the rescaling form: ``1 - (1 - s)/eta``."""
    return 1.0 - (1.0 - target_s) / eta


def _check_eta(eta):
    if not 0 < eta <= 1:
        raise ValueError(f"efficiency must lie in (0, 1], got {eta}")


def extract_state(cavity: QuasiDistribution, eta: float, target_s: Optional[float] = None,
                  mode: str = "rescale", label: Optional[str] = None) -> QuasiDistribution:
    """Phase-space function of the extracted pulse at efficiency ``eta``.

    ``mode="rescale"``: ``alpha -> P_cav(alpha/sqrt(eta); s')/eta`` with
    ``s' = 1 - (1 - target_s)/eta``; ``cavity.order`` must equal ``s'``.
    If ``target_s`` is omitted it is inferred from ``cavity.order``.

    ``mode="convolution"``: Gaussian convolution of ``cavity`` (any order
    ``s0``) with width ``1 - target_s - eta*(1 - s0)``, which must be >= 0.
    """
    _check_eta(eta)
    s0 = cavity.order
    if label is None:
        label = f"output:{cavity.label.split(':', 1)[-1]}@eta={eta:g}"
    if mode == "rescale":
        if target_s is None:
            target_s = 1.0 - eta * (1.0 - s0)
        s_prime = extraction_order(eta, target_s)
        if not np.isclose(s_prime, s0, rtol=0, atol=1e-12):
            raise ValueError(
                f"rescaling needs the cavity function at order {s_prime:g}, got {s0:g}; "
                "convert it first or use mode='convolution'"
            )
        if eta == 1.0:
            return replace(cavity, label=label)
        root = np.sqrt(eta)

        def func(alpha):
            return cavity(np.asarray(alpha) / root) / eta

        def on_grid(re, im):
            return cavity.on_grid(np.asarray(re) / root, np.asarray(im) / root) / eta

        return QuasiDistribution(target_s, func, label, cavity.support_radius * root, on_grid)
    if mode == "convolution":
        if target_s is None:
            target_s = s0
        width = 1.0 - target_s - eta * (1.0 - s0)
        if width < 0:
            raise ConvolutionValidityError(
                f"1 - s - eta(1 - s0) = {width:g} < 0 for s={target_s:g}, s0={s0:g}, eta={eta:g}"
            )
        if width == 0:
            return extract_state(cavity, eta, target_s, "rescale", label)
        return gaussian_transform(cavity, np.sqrt(eta), width, target_s, label)
    raise ValueError(f"unknown mode {mode!r}")


def wigner_convolution(cavity_wigner: QuasiDistribution, eta: float,
                       spec: Optional[GridSpec] = None):
    """Output Wigner function by direct convolution with the loss Gaussian.

    Returns a :class:`PhaseGrid` when ``spec`` is given, else the
    :class:`QuasiDistribution`. ``eta = 1`` is rejected; use
    :func:`extract_state`.
    """
    if cavity_wigner.order != 0:
        raise ValueError("wigner_convolution expects a Wigner function (order 0)")
    if not 0 < eta < 1:
        raise ValueError(f"efficiency must lie in (0, 1), got {eta}")
    out = extract_state(cavity_wigner, eta, 0.0, mode="convolution")
    if spec is None:
        return out
    return evaluate_on_grid(out, spec, eta=eta, path="convolution")
