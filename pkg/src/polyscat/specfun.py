"""Spherical Bessel/Hankel functions, Riccati-Bessel pairs and normalized
associated Legendre functions.

All evaluators take real positive arguments only.  j_n uses backward
recurrence (stable past n > t) normalized against the n = 0/1 closed forms;
y_n and h_n^(1) use upward recurrence, which is stable for the irregular
solution.  The *_log variants return log-magnitudes that stay finite far
beyond the float64 underflow/overflow range (needed by the indicator
weights 1/|u_n|, 1/|v_n| at large order).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DomainError, OrderCapExceeded

#: Hard cap on recurrence order; guards against silent loss of stability.
N_MAX_ORDER = 120

#: Wronskian psi_n * zeta_n' - psi_n' * zeta_n, fixed from the n=0 closed
#: forms psi_0 = sin t, zeta_0 = -i e^{it}.
RICCATI_WRONSKIAN = 1j


def _check_order(n):
    if n < 0 or int(n) != n:
        raise DomainError(f"order must be a nonnegative integer, got {n}")
    if n > N_MAX_ORDER:
        raise OrderCapExceeded(f"order {n} exceeds N_MAX_ORDER={N_MAX_ORDER}")


def _check_arg(t):
    if not (t > 0.0) or not math.isfinite(t):
        raise DomainError(f"argument must be positive real, got {t}")


@dataclass(frozen=True)
class RiccatiPair:
    """Riccati-Bessel values at a single (n, t)."""

    psi: float
    psi_prime: float
    zeta: complex
    zeta_prime: complex

    def wronskian(self) -> complex:
        return self.psi * self.zeta_prime - self.psi_prime * self.zeta


def sph_bessel_j_all(nmax: int, t: float) -> np.ndarray:
    """j_n(t) for n = 0..nmax (underflows to 0.0 beyond float64 range)."""
    _check_order(nmax)
    _check_arg(t)
    _, _, ln_j, sign_j = _kernels.jn_scaled(nmax, float(t))
    with np.errstate(under="ignore"):
        return sign_j * np.exp(ln_j)


def sph_bessel_y_all(nmax: int, t: float) -> np.ndarray:
    """y_n(t) for n = 0..nmax (overflows to +-inf beyond float64 range)."""
    _check_order(nmax)
    _check_arg(t)
    _, _, ln_y, sign_y = _kernels.yn_scaled(nmax, float(t))
    with np.errstate(over="ignore"):
        return sign_y * np.exp(ln_y)


def sph_bessel_j(n: int, t: float) -> float:
    return float(sph_bessel_j_all(n, t)[n])


def sph_bessel_y(n: int, t: float) -> float:
    return float(sph_bessel_y_all(n, t)[n])


def sph_hankel1(n: int, t: float) -> complex:
    """h_n^(1)(t) = j_n(t) + i y_n(t)."""
    return complex(sph_bessel_j(n, t), sph_bessel_y(n, t))


def riccati_all(nmax: int, t: float):
    """Arrays (psi, psi', zeta, zeta') for n = 0..nmax.

    psi_n = t j_n, zeta_n = t h_n^(1); derivatives via
    psi_n' = t j_{n-1} - n j_n (same combination for zeta).
    Entries underflow/overflow outside float64; use riccati_log_all when
    orders far beyond t are needed.
    """
    _check_order(nmax)
    _check_arg(t)
    t = float(t)
    j = sph_bessel_j_all(nmax, t)
    y = sph_bessel_y_all(nmax, t)
    h = j + 1j * y
    psi = t * j
    zeta = t * h
    psi_p = np.empty(nmax + 1)
    zeta_p = np.empty(nmax + 1, dtype=complex)
    psi_p[0] = math.cos(t)
    zeta_p[0] = np.exp(1j * t)
    if nmax >= 1:
        n = np.arange(1, nmax + 1)
        psi_p[1:] = t * j[:-1] - n * j[1:]
        zeta_p[1:] = t * h[:-1] - n * h[1:]
    return psi, psi_p, zeta, zeta_p


def riccati(n: int, t: float) -> RiccatiPair:
    psi, psi_p, zeta, zeta_p = riccati_all(n, t)
    return RiccatiPair(float(psi[n]), float(psi_p[n]), complex(zeta[n]), complex(zeta_p[n]))


def riccati_log_all(nmax: int, t: float):
    """Log-magnitudes (ln|psi|, ln|psi'|, ln|zeta|, ln|zeta'|) for n = 0..nmax.

    Stable for n far beyond t where psi underflows and zeta overflows.
    """
    _check_order(nmax)
    _check_arg(t)
    t = float(t)
    jm, ja, ln_j, _ = _kernels.jn_scaled(nmax, t)
    ym, ya, ln_y, _ = _kernels.yn_scaled(nmax, t)
    lnt = math.log(t)
    ln_psi = ln_j + lnt

    # |zeta_n| = t |h_n|;  |h_n|^2 = j_n^2 + y_n^2, dominated by y_n once huge
    ln_habs = np.empty(nmax + 1)
    for n in range(nmax + 1):
        a, b = ln_j[n], ln_y[n]
        hi = max(a, b)
        if hi == -math.inf:
            ln_habs[n] = -math.inf
        else:
            ln_habs[n] = hi + 0.5 * math.log1p(math.exp(2.0 * (min(a, b) - hi)))
    ln_zeta = ln_habs + lnt

    # psi_n' = t j_{n-1} - n j_n in the common mantissa scale
    ln_psi_p = np.empty(nmax + 1)
    ln_psi_p[0] = math.log(abs(math.cos(t))) if math.cos(t) != 0.0 else -math.inf
    for n in range(1, nmax + 1):
        s = max(ja[n - 1], ja[n])
        comb = t * jm[n - 1] * math.exp(ja[n - 1] - s) - n * jm[n] * math.exp(ja[n] - s)
        ln_psi_p[n] = (math.log(abs(comb)) + s) if comb != 0.0 else -math.inf

    # zeta_n' = t h_{n-1} - n h_n; use the y-part alone once it dominates
    ln_zeta_p = np.empty(nmax + 1)
    ln_zeta_p[0] = 0.0  # |e^{it}| = 1
    for n in range(1, nmax + 1):
        if ln_y[n] < 300.0:  # both orders exactly representable
            hm1 = complex(math.copysign(math.exp(ln_j[n - 1]), jm[n - 1]),
                          math.copysign(math.exp(ln_y[n - 1]), ym[n - 1]))
            hn = complex(math.copysign(math.exp(ln_j[n]), jm[n]),
                         math.copysign(math.exp(ln_y[n]), ym[n]))
            val = t * hm1 - n * hn
            ln_zeta_p[n] = math.log(abs(val)) if val != 0 else -math.inf
        else:
            s = max(ya[n - 1], ya[n])
            comb = t * ym[n - 1] * math.exp(ya[n - 1] - s) - n * ym[n] * math.exp(ya[n] - s)
            ln_zeta_p[n] = math.log(abs(comb)) + s
    return ln_psi, ln_psi_p, ln_zeta, ln_zeta_p


def assoc_legendre_normalized(n: int, m: int, x: float) -> float:
    """Fully normalized associated Legendre \\bar P_n^m(x), m >= 0 or m < 0.

    Normalized so that Y_n^m = \\bar P_n^{|m|} e^{imphi} (times (-1)^m for
    m < 0) is orthonormal on the unit sphere; Condon-Shortley phase included.
    """
    _check_order(n)
    if abs(m) > n:
        raise DomainError(f"|m| = {abs(m)} exceeds n = {n}")
    if not (-1.0 <= x <= 1.0):
        raise DomainError(f"x must lie in [-1, 1], got {x}")
    ma = abs(m)
    xs = np.array([float(x)])
    st = np.sqrt(np.maximum(1.0 - xs * xs, 1e-300))
    p, _ = _kernels.legendre_tables(n, xs, st)
    val = float(p[n * (n + 1) // 2 + ma, 0])
    if m < 0:
        val *= (-1) ** ma
    return val
