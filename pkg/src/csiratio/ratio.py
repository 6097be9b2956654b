"""CSI ratios, their packet differences (D-CSIR) and Taylor-series kernels.

All derivative helpers return the offset-free kernels ``h``, ``H`` and the
generalized k-th order kernel.  The true partial derivatives of the ratio
with respect to the dynamic terms carry an extra factor
``(exp(j2π m T_A f_O[m]) exp(-j2π g τ_O[m] / T))**k`` which is unknown at
estimation time; it is folded into the latent amplitudes, so callers never
need the offsets.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np

from ._validation import as_samples, check_pair, denominator_floor
from .exceptions import DegenerateDenominatorError
from .signal_model import (
    CsiTensor,
    OffsetTrace,
    PathSet,
    SystemConfig,
    synthesize_csi,
)


def _checked(den, floor, label="denominator"):
    if np.any(np.abs(den) < floor):
        raise DegenerateDenominatorError(
            f"|{label}| below floor {floor:.3g} at {np.count_nonzero(np.abs(den) < floor)} sample(s)"
        )
    return den


def _denominator(y, n, q, floor):
    return _checked(y[..., n - q], floor, f"y_{n - q}")


def csi_ratio(Y, n: int, q: int, m=slice(None), g=slice(None), *, rel_floor: float = 1e-12):
    """``ξ_{n,n-q}[m, g] = y_n[m, g] / y_{n-q}[m, g]``.

    ``m`` and ``g`` may be integers, slices or index arrays; the result has
    the corresponding broadcast shape.
    """
    y = as_samples(Y)
    check_pair(y.shape[2], n, q)
    floor = denominator_floor(y, rel_floor)
    if q == 0:
        sub = y[m, g, n]
        return np.ones_like(sub) if np.ndim(sub) else complex(1.0)
    ym = y[m, g]
    return ym[..., n] / _denominator(ym, n, q, floor)


def d_csir(Y, n: int, q: int, m, p: int, g=slice(None), *, rel_floor: float = 1e-12):
    """D-CSIR ``ψ_{n,q}[m, p, g] = ξ_{n,n-q}[m+p, g] - ξ_{n,n-q}[m, g]``."""
    y = as_samples(Y)
    m_arr = np.asarray(m)
    if np.any(m_arr + p > y.shape[0] - 1) or np.any(m_arr < 0) or p < 0:
        raise IndexError(f"packet index m + p must lie in [0, {y.shape[0] - 1}]")
    if q == 0 or p == 0:
        shape = np.shape(y[m, g, n])
        return np.zeros(shape, dtype=complex) if shape else complex(0.0)
    return (csi_ratio(y, n, q, m_arr + p, g, rel_floor=rel_floor)
            - csi_ratio(y, n, q, m, g, rel_floor=rel_floor))


def taylor_deriv_1(Y, n: int, q: int, m, g, phi, *, rel_floor: float = 1e-12):
    """First-order kernel ``h(φ) = (y_{n-q} - e^{-jqφ} y_n) / y_{n-q}^2``."""
    return taylor_deriv_k(Y, n, q, m, g, [phi], rel_floor=rel_floor)


def taylor_deriv_2(Y, n: int, q: int, m, g, phi1, phi2, *, rel_floor: float = 1e-12):
    """Second-order kernel.

    ``H(φ1, φ2) = 2 e^{-jqφ1} e^{-jqφ2} y_n / y_{n-q}^3 - (e^{-jqφ1} + e^{-jqφ2}) / y_{n-q}^2``
    """
    return taylor_deriv_k(Y, n, q, m, g, [phi1, phi2], rel_floor=rel_floor)


def taylor_deriv_k(Y, n: int, q: int, m, g, phis, *, rel_floor: float = 1e-12):
    """Generalized k-th order kernel for ``k = len(phis)``.

    (-1)^k [k! e^{-jqΣφ} y_n - (k-1)! Σ_i e^{-jq Σ_{h≠i} φ_h} y_{n-q}] / y_{n-q}^{k+1}
    """
    k = len(phis)
    if k < 1:
        raise ValueError("at least one spatial frequency is required")
    y = as_samples(Y)
    check_pair(y.shape[2], n, q)
    floor = denominator_floor(y, rel_floor)
    ym = y[m, g]
    yn = ym[..., n]
    yd = _denominator(ym, n, q, floor)
    phis = [np.asarray(p, dtype=float) for p in phis]
    total = sum(phis)
    leave_one_out = sum(np.exp(-1j * q * (total - p)) for p in phis)
    num = math.factorial(k) * np.exp(-1j * q * total) * yn - math.factorial(k - 1) * leave_one_out * yd
    return (-1) ** k * num / yd ** (k + 1)


def convergence_margin(Y, paths: PathSet, n: int, q: int, m, g) -> np.ndarray:
    """``|y_{n-q}[m, g]| - 2 L max_l |α_l|``; positive means the Taylor series converges."""
    y = as_samples(Y)
    check_pair(y.shape[2], n, q)
    L = paths.n_dynamic
    bound = 2 * L * max((abs(p.gain) for p in paths.dynamic), default=0.0)
    return np.abs(y[m, g, n - q]) - bound


@dataclass(frozen=True)
class TaylorDiagnostics:
    """Accuracy summary of the order-1+2 Taylor reconstruction of the D-CSIR."""

    error_proportion: float
    convergence_probability: float
    divergent_fraction: float

    def to_record(self, **extra) -> dict:
        return {**extra, **asdict(self)}


def taylor_reconstruction(Y, paths: PathSet, config: SystemConfig, offsets: OffsetTrace | None,
                          n: int | None, q: int, p: int) -> np.ndarray:
    """Order-1 plus diagonal order-2 Taylor prediction of ``ψ_{n,q}[m, p, g]``.

    Evaluated for every ``m in 0..M-p-1`` and every ``g`` with the true
    latent amplitudes (simulation only).  Returns an ``(M-p, G)`` array, or
    ``(M-p, G, K)`` over all ``K`` valid numerator antennas when ``n`` is
    None.
    """
    y = as_samples(Y)
    M, G, N = y.shape
    if offsets is None:
        offsets = OffsetTrace.zeros(M)
    ns = _numerators(N, q) if n is None else np.array([n])
    for k in ns:
        check_pair(N, int(k), q)
    floor = denominator_floor(y, 1e-12)
    yn = y[: M - p][:, :, ns]
    yd = _checked(y[: M - p][:, :, ns - q], floor) if q else yn
    mm = np.arange(M - p)[:, None, None]
    gg = np.arange(G)[None, :, None]
    off = offsets.factor(config)[: M - p]
    T, TA = config.symbol_duration, config.packet_interval
    out = np.zeros(yn.shape, dtype=complex)
    for path in paths.dynamic:
        phi = path.spatial_freq(config)
        zt = (path.gain * np.exp(1j * ns[None, None, :] * phi)
              * np.exp(2j * np.pi * mm * TA * path.doppler)
              * np.exp(-2j * np.pi * gg / T * path.delay)) * off
        step = zt * (np.exp(2j * np.pi * p * TA * path.doppler) - 1)
        rot = np.exp(-1j * q * phi)
        h = (yd - rot * yn) / yd ** 2
        H = 2 * rot ** 2 * yn / yd ** 3 - 2 * rot / yd ** 2
        out += h * step + 0.5 * H * step ** 2
    return out if n is None else out[..., 0]


def _numerators(n_antennas: int, q: int) -> np.ndarray:
    return np.array([n for n in range(n_antennas) if 0 <= n - q <= n_antennas - 1], dtype=int)


def error_proportion(Y, paths: PathSet, config: SystemConfig, offsets: OffsetTrace | None = None,
                     p: int = 2, q: int = 1) -> TaylorDiagnostics:
    """Normalized third-order remainder of the Taylor-expanded D-CSIR.

    The remainder is the true D-CSIR minus the order-1 and diagonal order-2
    terms (cross/harmonic second-order terms count as error).  Per sample
    the remainder magnitude is normalized by ``|ξ[m+p, g]|``; samples with a
    normalized error of 1 or more are divergent and excluded from the mean
    squared error.  All antenna pairs ``(n, n-q)`` inside the array are used.
    """
    y = as_samples(Y)
    M, G, N = y.shape
    if paths.n_dynamic == 0:
        return TaylorDiagnostics(0.0, 1.0, 0.0)
    ns = _numerators(N, q)
    if q == 0 or ns.size == 0:
        raise ValueError(f"no antenna pair with offset q={q} in a {N}-antenna array")
    floor = denominator_floor(y, 1e-12)
    xi = y[:, :, ns] / _checked(y[:, :, ns - q], floor)
    psi = xi[p:] - xi[: M - p]
    rem = psi - taylor_reconstruction(y, paths, config, offsets, None, q, p)
    err = (np.abs(rem) / np.abs(xi[p:])).ravel()
    ok = err < 1
    divergent = 1.0 - float(np.mean(ok))
    e_tay = float(np.mean(err[ok] ** 2)) if np.any(ok) else float("nan")
    return TaylorDiagnostics(e_tay, 1.0 - divergent, divergent)


def taylor_diagnostics_for(config: SystemConfig, paths: PathSet, offsets: OffsetTrace | None = None,
                           p: int = 2, q: int = 1) -> TaylorDiagnostics:
    """Synthesize a noiseless tensor for ``paths`` and evaluate :func:`error_proportion`."""
    clean = config.replace(snr_db=None)
    Y = synthesize_csi(clean, paths, offsets)
    return error_proportion(Y, paths, clean, offsets, p=p, q=q)


def antenna_pairs(n_antennas: int):
    """All ordered pairs ``(n, q)`` with ``q != 0`` and ``0 <= n - q < N``."""
    return [(n, n - r) for n, r in combinations(range(n_antennas), 2)] + \
        [(r, r - n) for n, r in combinations(range(n_antennas), 2)]
