"""Scattering by test balls: far-field-operator spectra, far-field series,
near fields, and the spectral action of the far-field operator.

Spectrum conventions (fixed by requiring that the synthesized far field is
the true far field of the series solution satisfying the boundary condition;
verified against direct large-radius extraction and the MFS solver):

    PEC:        u_n = -psi_n'(kh)/zeta_n'(kh),   v_n = -psi_n(kh)/zeta_n(kh)
    impedance:  u_n = -(k psi_n - i lam psi_n')/(k zeta_n - i lam zeta_n')
                v_n = -(k psi_n' + i lam psi_n)/(k zeta_n' + i lam zeta_n)

with everything evaluated at t = kh.  The far field of a ball at z hit by
the incident wave E = ik (d x p) x d e^{ikx.d} is

    E_inf(xh) = e^{ikz.(d - xh)} 4 pi sum_{n,m} ( u_n [conj(U_n^m(d)).p] U_n^m(xh)
                                                + v_n [conj(V_n^m(d)).p] V_n^m(xh) )

so (4 pi u_n, 4 pi v_n) are the eigenvalues of the far-field operator on the
z-translated basis.  The impedance limit lam -> inf recovers the PEC values.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels, specfun
from .errors import DomainError, EvalInsideBall, InteriorEigenvalueNear
from .fields import FieldFn, PlaneWaveParams, multipole_q, section5_plane_wave
from .harmonics import (
    SphereQuadrature,
    TangentialCoeffs,
    TangentialField,
    analyze,
    mode_count,
    mode_index,
    synthesize,
    vsh_U,
    vsh_V,
)

_LN_HUGE = 300.0


@dataclass(frozen=True)
class TestBall:
    z: np.ndarray
    h: float

    def __post_init__(self):
        object.__setattr__(self, "z", np.asarray(self.z, dtype=float))
        if not self.h > 0:
            raise DomainError(f"ball radius must be positive, got {self.h}")


@dataclass
class GuardReport:
    """Zero-proximity scan for the interior-eigenvalue guard.

    prox_v[n] = |psi_n(kh) * chi_n'(kh)| vanishes exactly at the Dirichlet
    eigenvalues j_n(kh) = 0; prox_u[n] = |psi_n'(kh) * chi_n(kh)| vanishes
    where psi_n'(kh) = 0 (chi_n = -t y_n is the second Riccati solution, so
    the products are O(1) away from zeros for every order -- a raw
    |j_n| < tol test would spuriously flag all n >> kh).
    """

    k: float
    h: float
    N: int
    tol: float
    prox_u: np.ndarray
    prox_v: np.ndarray
    flagged: list = field(default_factory=list)

    def ok(self) -> bool:
        return not self.flagged


def eigenvalue_guard(k: float, h: float, N: int, tol: float = 1e-8) -> GuardReport:
    t = k * h
    jm, ja, _, _ = _kernels.jn_scaled(N, t)
    ym, ya, _, _ = _kernels.yn_scaled(N, t)
    prox_u = np.empty(N + 1)
    prox_v = np.empty(N + 1)
    prox_u[0] = prox_v[0] = np.nan
    for n in range(1, N + 1):
        # psi_n = t j_n ; psi_n' = t j_{n-1} - n j_n ; chi_n = -t y_n
        s = max(ja[n - 1], ja[n])
        psi_p_m = t * jm[n - 1] * math.exp(ja[n - 1] - s) - n * jm[n] * math.exp(ja[n] - s)
        sy = max(ya[n - 1], ya[n])
        chi_p_m = -(t * ym[n - 1] * math.exp(ya[n - 1] - sy) - n * ym[n] * math.exp(ya[n] - sy))
        ln_psi = _ln_abs(jm[n], ja[n]) + math.log(t)
        ln_chi = _ln_abs(ym[n], ya[n]) + math.log(t)
        ln_psi_p = _ln_abs(psi_p_m, s)
        ln_chi_p = _ln_abs(chi_p_m, sy)
        prox_v[n] = math.exp(min(ln_psi + ln_chi_p, 700.0))
        prox_u[n] = math.exp(min(ln_psi_p + ln_chi, 700.0))
    flagged = []
    for n in range(1, N + 1):
        if prox_v[n] < tol:
            flagged.append((n, "j_n(kh) near zero (Dirichlet eigenvalue)"))
        if prox_u[n] < tol:
            flagged.append((n, "psi_n'(kh) near zero"))
    return GuardReport(k=k, h=h, N=N, tol=tol, prox_u=prox_u, prox_v=prox_v, flagged=flagged)


def _ln_abs(mant: float, acc: float) -> float:
    if mant == 0.0:
        return -math.inf
    return math.log(abs(mant)) + acc


@dataclass
class BallSpectrum:
    """Far-field-operator eigenvalue sequences of a test ball.

    u, v are indexed by order (entry [0] unused); the log_abs arrays stay
    finite far beyond the float64 range of u, v themselves.
    """

    k: float
    h: float
    N: int
    kind: str  # "pec" | "impedance"
    lam: Optional[float]
    u: np.ndarray
    v: np.ndarray
    log_abs_u: np.ndarray
    log_abs_v: np.ndarray

    @property
    def t(self) -> float:
        return self.k * self.h


def pec_ball_spectrum(k: float, h: float, N: int, guard_tol: float = 1e-8) -> BallSpectrum:
    """u_n = -psi_n'/zeta_n', v_n = -psi_n/zeta_n at t = kh, n = 1..N."""
    if not (k > 0 and h > 0):
        raise DomainError("k and h must be positive")
    report = eigenvalue_guard(k, h, N, guard_tol)
    if not report.ok():
        raise InteriorEigenvalueNear(f"guard flags at kh={k*h}: {report.flagged}")
    t = k * h
    psi, psi_p, zeta, zeta_p = specfun.riccati_all(N, t)
    lp, lpp, lz, lzp = specfun.riccati_log_all(N, t)
    u = np.full(N + 1, np.nan, dtype=complex)
    v = np.full(N + 1, np.nan, dtype=complex)
    with np.errstate(invalid="ignore", over="ignore", under="ignore"):
        u[1:] = -psi_p[1:] / zeta_p[1:]
        v[1:] = -psi[1:] / zeta[1:]
    lau = np.full(N + 1, np.nan)
    lav = np.full(N + 1, np.nan)
    lau[1:] = lpp[1:] - lzp[1:]
    lav[1:] = lp[1:] - lz[1:]
    # patch entries that underflowed in the direct ratio
    bad = ~np.isfinite(u[1:]) | (u[1:] == 0)
    u[1:][bad] = np.exp(np.minimum(lau[1:][bad], 700.0))
    bad = ~np.isfinite(v[1:]) | (v[1:] == 0)
    v[1:][bad] = np.exp(np.minimum(lav[1:][bad], 700.0))
    return BallSpectrum(k=k, h=h, N=N, kind="pec", lam=None, u=u, v=v,
                        log_abs_u=lau, log_abs_v=lav)


def impedance_ball_spectrum(k: float, h: float, lam: float, N: int) -> BallSpectrum:
    """Eigenvalues for the impedance condition nu x curl E + i lam nu x (nu x E) = 0.

    Derived by imposing the boundary condition on the two vector multipole
    families; for a positive constant lam the denominators never vanish
    (k^2 is not an impedance eigenvalue), so no guard is needed.
    """
    if not (k > 0 and h > 0 and lam > 0):
        raise DomainError("k, h, lam must be positive")
    t = k * h
    psi, psi_p, zeta, zeta_p = specfun.riccati_all(N, t)
    lp, lpp, lz, lzp = specfun.riccati_log_all(N, t)
    jm, ja, _, _ = _kernels.jn_scaled(N, t)
    ym, ya, _, _ = _kernels.yn_scaled(N, t)
    u = np.full(N + 1, np.nan, dtype=complex)
    v = np.full(N + 1, np.nan, dtype=complex)
    lau = np.full(N + 1, np.nan)
    lav = np.full(N + 1, np.nan)
    lnk, lnl = math.log(k), math.log(lam)
    for n in range(1, N + 1):
        # numerators: k psi - i lam psi' and k psi' + i lam psi (psi real)
        ln_num_u = 0.5 * np.logaddexp(2 * (lnk + lp[n]), 2 * (lnl + lpp[n]))
        ln_num_v = 0.5 * np.logaddexp(2 * (lnk + lpp[n]), 2 * (lnl + lp[n]))
        if lz[n] < _LN_HUGE:
            den_u = k * zeta[n] - 1j * lam * zeta_p[n]
            den_v = k * zeta_p[n] + 1j * lam * zeta[n]
            u[n] = -(k * psi[n] - 1j * lam * psi_p[n]) / den_u
            v[n] = -(k * psi_p[n] + 1j * lam * psi[n]) / den_v
            lau[n] = ln_num_u - math.log(abs(den_u))
            lav[n] = ln_num_v - math.log(abs(den_v))
        else:
            # zeta ~ i t y_n, zeta' ~ i (t y_{n-1} - n y_n): split re/im parts
            sy = max(ya[n - 1], ya[n])
            zp_m = t * ym[n - 1] * math.exp(ya[n - 1] - sy) - n * ym[n] * math.exp(ya[n] - sy)
            ln_zp = _ln_abs(zp_m, sy)
            ln_z = _ln_abs(ym[n], ya[n]) + math.log(t)
            # |k zeta - i lam zeta'|^2 = (lam zeta'_im... both pure imaginary parts
            ln_den_u = 0.5 * np.logaddexp(2 * (lnk + ln_z), 2 * (lnl + ln_zp))
            ln_den_v = 0.5 * np.logaddexp(2 * (lnk + ln_zp), 2 * (lnl + ln_z))
            lau[n] = ln_num_u - ln_den_u
            lav[n] = ln_num_v - ln_den_v
            u[n] = math.exp(max(min(lau[n], 700.0), -700.0))
            v[n] = math.exp(max(min(lav[n], 700.0), -700.0))
    return BallSpectrum(k=k, h=h, N=N, kind="impedance", lam=lam, u=u, v=v,
                        log_abs_u=lau, log_abs_v=lav)


def wiscombe_order(kh: float, cap: int = specfun.N_MAX_ORDER) -> int:
    """Series truncation for forward evaluation (standard Mie practice)."""
    return min(cap, int(math.ceil(kh + 4.0 * kh ** (1.0 / 3.0) + 8.0)))


def _incident_coeffs(spectrum: BallSpectrum, d, p):
    """Scattered-series coefficients (a, b) in flat mode layout.

    The incident wave ik (d x p) x d e^{ikx.d} expands in regular vector
    wave functions M_n^m = curl{x j_n Y_n^m} and (1/k) curl M_n^m with

        alpha_n^m = -4 pi k i^{n+1} [conj(V_n^m(d)).p] / sqrt(n(n+1))
        beta_n^m  = +4 pi k i^{n}   [conj(U_n^m(d)).p] / sqrt(n(n+1))

    (identity verified numerically in the test suite); the boundary match
    then gives a = v_n alpha (V family), b = u_n beta (U family).
    """
    N = spectrum.N
    k = spectrum.k
    a = np.zeros(mode_count(N), dtype=complex)
    b = np.zeros(mode_count(N), dtype=complex)
    for n in range(1, N + 1):
        rt = math.sqrt(n * (n + 1))
        for m in range(-n, n + 1):
            cu = np.conj(vsh_U((n, m), d)) @ p
            cv = np.conj(vsh_V((n, m), d)) @ p
            alpha = -4.0 * np.pi * k * 1j ** (n + 1) * cv / rt
            beta = 4.0 * np.pi * k * 1j**n * cu / rt
            a[mode_index(n, m)] = spectrum.v[n] * alpha
            b[mode_index(n, m)] = spectrum.u[n] * beta
    return a, b


def far_field_ball(spectrum: BallSpectrum, z, pw: PlaneWaveParams,
                   rule: SphereQuadrature, normalization: str = "section5") -> TangentialField:
    """Sampled far field of the ball B_h(z) for the incident plane wave.

    Includes both translation phases e^{ikz.d} and e^{-ikz.xh}.  The
    "section1" normalization divides by ik (incident E = p e^{ikx.d}).
    """
    z = np.asarray(z, dtype=float)
    d, p = pw.d, pw.p
    k = spectrum.k
    N = spectrum.N
    cu = np.zeros(mode_count(N), dtype=complex)
    cv = np.zeros(mode_count(N), dtype=complex)
    phase_d = np.exp(1j * k * float(z @ d))
    for n in range(1, N + 1):
        un, vn = spectrum.u[n], spectrum.v[n]
        for m in range(-n, n + 1):
            cu[mode_index(n, m)] = 4.0 * np.pi * un * (np.conj(vsh_U((n, m), d)) @ p) * phase_d
            cv[mode_index(n, m)] = 4.0 * np.pi * vn * (np.conj(vsh_V((n, m), d)) @ p) * phase_d
    if normalization == "section1":
        cu /= 1j * k
        cv /= 1j * k
    elif normalization != "section5":
        raise DomainError(f"unknown normalization {normalization!r}")
    coeffs = TangentialCoeffs(center=z, k=k, N=N, cu=cu, cv=cv)
    return synthesize(coeffs, rule)


def far_field_pec_ball(ball: TestBall, pw: PlaneWaveParams, k: float,
                       rule: SphereQuadrature, N: Optional[int] = None) -> TangentialField:
    N = N or wiscombe_order(k * ball.h)
    spectrum = pec_ball_spectrum(k, ball.h, N)
    return far_field_ball(spectrum, ball.z, pw, rule)


def near_field_ball(spectrum: BallSpectrum, z, pw: PlaneWaveParams, x):
    """(E_sc, E_total) at exterior points x for the ball B_h(z)."""
    z = np.asarray(z, dtype=float)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    rel = x - z
    r = np.linalg.norm(rel, axis=1)
    if np.any(r < spectrum.h * (1.0 - 1e-12)):
        raise EvalInsideBall("evaluation point inside the test ball")
    k = spectrum.k
    # incident field referenced to the ball center: extra phase e^{ikz.d}
    phase_d = np.exp(1j * k * float(z @ pw.d))
    a, b = _incident_coeffs(spectrum, pw.d, pw.p)
    esc = np.zeros((x.shape[0], 3), dtype=complex)
    for n in range(1, spectrum.N + 1):
        for m in range(-n, n + 1):
            i = mode_index(n, m)
            if abs(a[i]) < 1e-300 and abs(b[i]) < 1e-300:
                continue
            q, cq = multipole_q((n, m), k, rel)
            esc += a[i] * q + (b[i] / k) * cq
    esc *= phase_d
    einc = section5_plane_wave(pw, k).E(x)
    return esc, esc + einc


def near_field_pec_ball(ball: TestBall, pw: PlaneWaveParams, k: float, x,
                        N: Optional[int] = None):
    N = N or wiscombe_order(k * ball.h)
    spectrum = pec_ball_spectrum(k, ball.h, N)
    return near_field_ball(spectrum, ball.z, pw, x)


def far_field_operator_apply(spectrum: BallSpectrum, z, g: TangentialField,
                             N: Optional[int] = None) -> TangentialField:
    """(F^{(z,h)} g)(xh), realized spectrally: analyze in the z-translated
    basis, multiply cU by 4 pi u_n and cV by 4 pi v_n, synthesize."""
    z = np.asarray(z, dtype=float)
    N = N or spectrum.N
    if N > spectrum.N:
        raise DomainError(f"operator order {N} exceeds spectrum order {spectrum.N}")
    c = analyze(g, z, spectrum.k, N)
    cu = c.cu.copy()
    cv = c.cv.copy()
    for n in range(1, N + 1):
        sl = slice(mode_index(n, -n), mode_index(n, n) + 1)
        cu[sl] *= 4.0 * np.pi * spectrum.u[n]
        cv[sl] *= 4.0 * np.pi * spectrum.v[n]
    return synthesize(TangentialCoeffs(center=z, k=spectrum.k, N=N, cu=cu, cv=cv), g.rule)
