"""Brute-force Fock-basis reference path.

States are truncated density matrices, extraction is the transmittance-eta
pure-loss channel in Kraus form, and phase-space functions are read off as
expectation values of displaced operators. Nothing here touches the
closed-form formulas in :mod:`cavext.states`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .phase_space import QuasiDistribution

__all__ = [
    "CutoffWarning",
    "DensityMatrix",
    "build_state",
    "cat_cutoff",
    "displacement_matrix",
    "loss_channel",
    "oracle_distribution",
    "quasi_from_density_matrix",
    "wigner_from_density_matrix",
]

_LOG_SPACE_ABOVE = 20
# Points evaluated per block; bounds memory at ~dim^2 * block complex numbers.
_BLOCK = 512


class CutoffWarning(UserWarning):
    """Phase-space point too far out for the truncated basis to be trusted."""


@dataclass(frozen=True)
class DensityMatrix:
    elements: np.ndarray

    def __post_init__(self):
        rho = np.array(self.elements, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if not np.allclose(rho, rho.conj().T, rtol=0, atol=1e-12):
            raise ValueError("density matrix is not Hermitian")
        tr = np.trace(rho).real
        if abs(tr - 1.0) > 1e-10:
            raise ValueError(f"trace {tr!r} differs from 1")
        if np.linalg.eigvalsh(rho).min() < -1e-10:
            raise ValueError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "elements", rho)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.elements @ self.elements)))


def cat_cutoff(alpha0: float) -> int:
    """Fock cutoff alpha0^2 + 10 alpha0 + 20, which keeps truncation below 1e-10 for alpha0 <= 3."""
    return int(math.ceil(alpha0 ** 2 + 10.0 * abs(alpha0) + 20.0))


def _log_factorial(k):
    return gammaln(np.asarray(k, dtype=float) + 1.0)


def _coherent_amplitudes(alpha0: float, dim: int) -> np.ndarray:
    k = np.arange(dim)
    if alpha0 == 0:
        return (k == 0).astype(float)
    # log |amp| = -a^2/2 + k log|a| - log(k!)/2
    logs = -0.5 * alpha0 ** 2 + k * math.log(abs(alpha0)) - 0.5 * _log_factorial(k)
    return np.sign(alpha0) ** k * np.exp(logs)


def build_state(spec, cutoff: int) -> DensityMatrix:
    """Truncated density matrix of a Fock, even-cat or explicit state."""
    from .states import Cat, Explicit, Fock

    if isinstance(spec, Explicit):
        rho = np.asarray(spec.rho, dtype=complex)
        if rho.shape[0] > cutoff:
            raise ValueError("explicit state is larger than the requested cutoff")
        padded = np.zeros((cutoff, cutoff), dtype=complex)
        padded[: rho.shape[0], : rho.shape[0]] = rho
        return DensityMatrix(padded)
    if isinstance(spec, Fock):
        if cutoff <= spec.n:
            raise ValueError(f"cutoff {cutoff} cannot hold |{spec.n}>")
        rho = np.zeros((cutoff, cutoff), dtype=complex)
        rho[spec.n, spec.n] = 1.0
        return DensityMatrix(rho)
    if isinstance(spec, Cat):
        a = spec.alpha0
        psi = _coherent_amplitudes(a, cutoff) + _coherent_amplitudes(-a, cutoff)
        norm2 = float(psi @ psi)
        # norm of the untruncated superposition is 2(1 + exp(-2 a^2))
        deficit = 1.0 - norm2 / (2.0 * (1.0 + math.exp(-2.0 * a * a)))
        if deficit > 1e-10:
            raise ValueError(
                f"cutoff {cutoff} too small for cat:{a:g} (norm deficit {deficit:.1e}); "
                f"use at least {cat_cutoff(a)}"
            )
        psi = psi / math.sqrt(norm2)
        return DensityMatrix(np.outer(psi, psi).astype(complex))
    raise TypeError(f"unsupported state {spec!r}")


def _kraus_amplitudes(dim: int, eta: float) -> np.ndarray:
    """amp[k, m] = <m-k|A_k|m> = sqrt(C(m, k)) eta^((m-k)/2) (1-eta)^(k/2)."""
    m = np.arange(dim)[None, :]
    k = np.arange(dim)[:, None]
    valid = k <= m
    mk = np.where(valid, m - k, 0)
    if dim > _LOG_SPACE_ABOVE:
        log_binom = _log_factorial(m) - _log_factorial(k) - _log_factorial(mk)
        binom = np.exp(log_binom)
    else:
        binom = np.vectorize(math.comb)(m + 0 * k, np.where(valid, k, 0)).astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        amp = np.sqrt(binom) * np.power(eta, mk / 2.0) * np.power(1.0 - eta, k / 2.0)
    return np.where(valid, amp, 0.0)


def loss_channel(rho: DensityMatrix, eta: float) -> DensityMatrix:
    """Pure loss of transmittance ``eta``: rho -> sum_k A_k rho A_k^dagger."""
    if not 0 <= eta <= 1:
        raise ValueError(f"efficiency must lie in [0, 1], got {eta}")
    r = rho.elements
    d = rho.dim
    amp = _kraus_amplitudes(d, eta)
    out = np.zeros_like(r)
    for k in range(d):
        # A_k maps |m> to amp[k, m] |m-k|, so (A_k rho A_k^+)[i, j] = a[i+k] r[i+k, j+k] a[j+k]
        a = amp[k, k:]
        out[: d - k, : d - k] += a[:, None] * r[k:, k:] * a[None, :]
    out = 0.5 * (out + out.conj().T)
    return DensityMatrix(out)


def displacement_matrix(beta, rows: int, cols: int) -> np.ndarray:
    """``D[m, n, ...] = <m|D(beta)|n>`` for ``m < rows``, ``n < cols``.

    Along each diagonal m - n = k the elements are
    (beta^k e^{-|beta|^2/2} / sqrt(k!)) * l_n^(k)(|beta|^2), where
    l_n^(k) = sqrt(n! k!/(n+k)!) L_n^(k) obeys the forward recurrence
    sqrt((n+1)(n+k+1)) l_{n+1} = (2n+k+1-x) l_n - sqrt(n(n+k)) l_{n-1}.
    Elements above the diagonal follow from D_{n,n+k}(beta) = conj(D_{n+k,n}(-beta)).
    """
    beta = np.asarray(beta, dtype=complex)
    x = np.abs(beta) ** 2
    size = max(rows, cols)
    out = np.zeros((rows, cols) + beta.shape, dtype=complex)
    lower = np.exp(-0.5 * x).astype(complex)  # beta^k e^{-x/2} / sqrt(k!)
    upper = lower.copy()  # (-conj(beta))^k e^{-x/2} / sqrt(k!)
    for k in range(size):
        if k:
            lower = lower * beta / math.sqrt(k)
            upper = upper * (-np.conj(beta)) / math.sqrt(k)
        prev = np.zeros_like(x)
        cur = np.ones_like(x)
        for n in range(size - k):
            if n:
                prev, cur = cur, ((2 * n + k - 1 - x) * cur
                                  - math.sqrt((n - 1) * (n - 1 + k)) * prev) / math.sqrt(n * (n + k))
            if n + k < rows and n < cols:
                out[n + k, n] = lower * cur
            if k and n < rows and n + k < cols:
                out[n, n + k] = upper * cur
    return out


def _warn_cutoff(alpha, dim):
    if np.any(np.abs(alpha) ** 2 > dim / 4.0):
        warnings.warn(
            f"|alpha|^2 exceeds dim/4 = {dim / 4:g} at some points; "
            "truncated-basis reconstruction may be unreliable there",
            CutoffWarning, stacklevel=3,
        )


def wigner_from_density_matrix(rho: DensityMatrix, alpha):
    """W(alpha) = (2/pi) Tr[rho D(2 alpha) Pi] via displaced-parity matrix elements."""
    return quasi_from_density_matrix(rho, alpha, 0.0)


def quasi_from_density_matrix(rho: DensityMatrix, alpha, s: float = 0.0):
    """s-ordered quasiprobability of ``rho`` for ``s <= 0``.

    s = 0 uses the displaced parity (2/pi) Tr[rho D(2a) Pi]. For s < 0,
    P(a; s) = 2/(pi(1-s)) sum_k r^k <k|D(a)^+ rho D(a)|k> with
    r = (s+1)/(s-1), |r| < 1; the sum is cut once |r|^k < 1e-17.
    """
    if s > 0:
        raise ValueError("only orders s <= 0 are representable from a truncated state")
    alpha = np.asarray(alpha, dtype=complex)
    r = rho.elements
    d = rho.dim
    _warn_cutoff(alpha, d)
    flat = alpha.reshape(-1)
    out = np.empty(flat.shape, dtype=float)
    for start in range(0, flat.size, _BLOCK):
        block = flat[start:start + _BLOCK]
        if s == 0:
            vals = _parity_block(r, block)
        else:
            vals = _ordered_block(r, block, s)
        out[start:start + _BLOCK] = vals
    return out.reshape(alpha.shape)


def _parity_block(r, alpha):
    d = r.shape[0]
    dmat = displacement_matrix(2.0 * alpha, d, d)
    # Tr[rho D Pi] = sum_{m,n} rho[n, m] (-1)^n D[m, n]
    signed = r * ((-1.0) ** np.arange(d))[:, None]
    acc = np.einsum("nm,mn...->...", signed, dmat)
    _check_real(acc)
    return (2.0 / np.pi) * acc.real


def _ordered_block(r, alpha, s):
    d = r.shape[0]
    ratio = (s + 1.0) / (s - 1.0)
    if ratio == 0:
        n_terms = 1
    else:
        n_terms = int(math.ceil(math.log(1e-17) / math.log(abs(ratio)))) + 1
    dmat = displacement_matrix(alpha, d, n_terms)
    weights = ratio ** np.arange(n_terms)
    # sum_k r^k <k|D^+ rho D|k> = sum_k r^k sum_{mn} conj(D[m,k]) rho[m,n] D[n,k]
    acc = np.einsum("k,mk...,mn,nk...->...", weights, dmat.conj(), r, dmat, optimize=True)
    _check_real(acc)
    return (2.0 / (np.pi * (1.0 - s))) * acc.real


def _check_real(acc):
    scale = max(1.0, float(np.max(np.abs(acc.real), initial=0.0)))
    resid = float(np.max(np.abs(acc.imag), initial=0.0))
    if resid > 1e-10 * scale:
        raise ArithmeticError(f"reconstructed quasiprobability has imaginary part {resid:.2e}")


def oracle_distribution(rho: DensityMatrix, s: float = 0.0, label: str = "") -> QuasiDistribution:
    """Wrap the reconstruction as a :class:`QuasiDistribution`."""

    def func(alpha):
        return quasi_from_density_matrix(rho, alpha, s)

    # mean photon number sets the reach of the state in phase space
    nbar = float(np.real(np.trace(rho.elements @ np.diag(np.arange(rho.dim)))))
    radius = math.sqrt(nbar) + 6.0 + math.sqrt(-s)
    return QuasiDistribution(s, func, label, radius)
