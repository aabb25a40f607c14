"""Scalar and vector spherical harmonics, sphere quadrature, and modal
analysis/synthesis of sampled tangential fields.

Conventions (fixed because coefficients are exchanged through files):
complex exponential e^{i m phi} with Condon-Shortley phase;
U_n^m = Grad_{S^2} Y_n^m / sqrt(n(n+1)),  V_n^m = xhat x U_n^m;
translated basis Ut^{(z)} = e^{-i k z.xhat} U (same for V).

The transform is factored through the product grid: an FFT in phi followed
by a Gauss-Legendre sum in cos(theta) against precomputed associated
Legendre tables, so no dense (modes x nodes) vector tables are ever stored.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

import numpy as np

from . import _kernels
from .errors import DegreeTooLow, DomainError, RuleMismatch


class ModeIndex(NamedTuple):
    n: int
    m: int


def check_mode(n: int, m: int, min_n: int = 1) -> None:
    if n < min_n:
        raise DomainError(f"mode order n={n} below minimum {min_n}")
    if abs(m) > n:
        raise DomainError(f"|m|={abs(m)} exceeds n={n}")


def mode_count(nmax: int) -> int:
    """Number of (n, m) pairs with 1 <= n <= nmax, |m| <= n."""
    return (nmax + 1) ** 2 - 1


def mode_index(n: int, m: int) -> int:
    """Flat index of (n, m) in the packed coefficient layout."""
    return n * n - 1 + (m + n)


def mode_pairs(nmax: int) -> np.ndarray:
    """(count, 2) int array of all (n, m) in flat order."""
    out = np.empty((mode_count(nmax), 2), dtype=int)
    for n in range(1, nmax + 1):
        for m in range(-n, n + 1):
            out[mode_index(n, m)] = (n, m)
    return out


@dataclass(frozen=True)
class SphereQuadrature:
    """Gauss-Legendre (cos theta) x uniform trapezoid (phi) product rule."""

    n_theta: int
    n_phi: int
    theta: np.ndarray = field(repr=False)      # (n_theta,)
    w_theta: np.ndarray = field(repr=False)    # (n_theta,) GL weights, sum 2
    phi: np.ndarray = field(repr=False)        # (n_phi,)

    @property
    def n_nodes(self) -> int:
        return self.n_theta * self.n_phi

    @property
    def degree(self) -> int:
        """Largest spherical-polynomial degree integrated exactly (products
        of harmonics with total degree up to this are exact)."""
        return min(2 * self.n_theta - 1, self.n_phi - 1)

    def same_as(self, other: "SphereQuadrature") -> bool:
        return self.n_theta == other.n_theta and self.n_phi == other.n_phi

    @property
    def weights(self) -> np.ndarray:
        """Flat (n_nodes,) quadrature weights; sum = 4*pi."""
        return np.repeat(self.w_theta * (2.0 * np.pi / self.n_phi), self.n_phi)

    @property
    def nodes_theta_phi(self) -> np.ndarray:
        """(n_nodes, 2) array of (theta, phi), theta-major ordering."""
        th = np.repeat(self.theta, self.n_phi)
        ph = np.tile(self.phi, self.n_theta)
        return np.stack([th, ph], axis=1)

    @property
    def xhat(self) -> np.ndarray:
        th, ph = self.nodes_theta_phi.T
        st, ct = np.sin(th), np.cos(th)
        return np.stack([st * np.cos(ph), st * np.sin(ph), ct], axis=1)

    @property
    def theta_hat(self) -> np.ndarray:
        th, ph = self.nodes_theta_phi.T
        st, ct = np.sin(th), np.cos(th)
        return np.stack([ct * np.cos(ph), ct * np.sin(ph), -st], axis=1)

    @property
    def phi_hat(self) -> np.ndarray:
        ph = self.nodes_theta_phi[:, 1]
        return np.stack([-np.sin(ph), np.cos(ph), np.zeros_like(ph)], axis=1)


@lru_cache(maxsize=8)
def default_rule(n_theta: int = 48, n_phi: int | None = None) -> SphereQuadrature:
    """Build (and cache) a product quadrature rule."""
    if n_phi is None:
        n_phi = 2 * n_theta
    x, w = np.polynomial.legendre.leggauss(n_theta)
    # descending theta order (ascending cos theta is leggauss's order)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    return SphereQuadrature(n_theta, n_phi, theta, w, phi)


@dataclass
class TangentialField:
    """Complex 3-vector samples (Cartesian components) at the rule's nodes."""

    values: np.ndarray  # (n_nodes, 3) complex
    rule: SphereQuadrature

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.rule.n_nodes, 3):
            raise DomainError(
                f"values shape {self.values.shape} does not match rule nodes "
                f"({self.rule.n_nodes}, 3)"
            )

    def max_radial(self) -> float:
        """Largest |values . xhat| over nodes (tangency defect)."""
        return float(np.max(np.abs(np.einsum("qc,qc->q", self.values, self.rule.xhat))))

    def norm(self) -> float:
        """L2(S^2) norm."""
        return math.sqrt(abs(inner_product(self, self)))


@dataclass
class TangentialCoeffs:
    """Modal coefficients of a far-field pattern against the z-translated
    vector spherical harmonic basis; flat layout per mode_index."""

    center: np.ndarray
    k: float
    N: int
    cu: np.ndarray
    cv: np.ndarray

    def get_u(self, n: int, m: int) -> complex:
        check_mode(n, m)
        return complex(self.cu[mode_index(n, m)])

    def get_v(self, n: int, m: int) -> complex:
        check_mode(n, m)
        return complex(self.cv[mode_index(n, m)])


# ---------------------------------------------------------------------------
# single-point evaluation


def _theta_phi(direction):
    d = np.asarray(direction, dtype=float)
    nrm = np.linalg.norm(d)
    if abs(nrm - 1.0) > 1e-8:
        raise DomainError(f"direction must be a unit vector, |d| = {nrm}")
    d = d / nrm
    theta = math.acos(max(-1.0, min(1.0, d[2])))
    phi = math.atan2(d[1], d[0])
    # nudge away from the poles: the tangential-function tables divide by
    # sin(theta); the fields themselves are analytic so the relative error
    # of the nudge is O(eps^2)
    eps = 1e-7
    if theta < eps:
        theta = eps
    elif theta > math.pi - eps:
        theta = math.pi - eps
    return theta, phi


def _tables_at(n: int, theta: float):
    x = np.array([math.cos(theta)])
    st = np.array([math.sin(theta)])
    return _kernels.legendre_tables(n, x, st)


def _pbar_signed(p_tab, n: int, m: int):
    """Legendre factor of Y_n^m including the m<0 mirror sign."""
    val = p_tab[n * (n + 1) // 2 + abs(m), 0]
    return val * ((-1) ** m if m < 0 else 1.0)


def sph_harm(idx: ModeIndex | tuple, direction) -> complex:
    """Orthonormal scalar spherical harmonic Y_n^m(direction)."""
    n, m = idx
    check_mode(n, m, min_n=0)
    theta, phi = _theta_phi(direction)
    p, _ = _tables_at(n, theta)
    return _pbar_signed(p, n, m) * np.exp(1j * m * phi)


def _vsh_frame(n: int, m: int, theta: float):
    """(W, X) = (dPbar/dtheta, m Pbar/sin theta) with m<0 mirror signs."""
    p, dp = _tables_at(n, theta)
    ma = abs(m)
    i = n * (n + 1) // 2 + ma
    w = dp[i, 0]
    xfun = ma * p[i, 0] / math.sin(theta)
    if m < 0:
        s = (-1) ** ma
        w *= s
        xfun *= -s
    return w, xfun


def vsh_U(idx, direction) -> np.ndarray:
    """U_n^m = Grad_{S^2} Y_n^m / sqrt(n(n+1)) in Cartesian components."""
    n, m = idx
    check_mode(n, m)
    theta, phi = _theta_phi(direction)
    w, xf = _vsh_frame(n, m, theta)
    st, ct = math.sin(theta), math.cos(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    that = np.array([ct * cp, ct * sp, -st])
    phat = np.array([-sp, cp, 0.0])
    fac = np.exp(1j * m * phi) / math.sqrt(n * (n + 1))
    return fac * (w * that + 1j * xf * phat)


def vsh_V(idx, direction) -> np.ndarray:
    """V_n^m = xhat x U_n^m."""
    n, m = idx
    check_mode(n, m)
    theta, phi = _theta_phi(direction)
    w, xf = _vsh_frame(n, m, theta)
    st, ct = math.sin(theta), math.cos(theta)
    cp, sp = math.cos(phi), math.sin(phi)
    that = np.array([ct * cp, ct * sp, -st])
    phat = np.array([-sp, cp, 0.0])
    fac = np.exp(1j * m * phi) / math.sqrt(n * (n + 1))
    return fac * (-1j * xf * that + w * phat)


def translated_basis(idx, z, k: float, direction):
    """(Ut^{(z)}, Vt^{(z)}) at `direction`: the e^{-ikz.xhat} phase times U, V."""
    z = np.asarray(z, dtype=float)
    d = np.asarray(direction, dtype=float)
    phase = np.exp(-1j * k * float(z @ d))
    return phase * vsh_U(idx, direction), phase * vsh_V(idx, direction)


# ---------------------------------------------------------------------------
# quadrature, analysis, synthesis


def inner_product(f: TangentialField, g: TangentialField) -> complex:
    """<f, g> = sum_q w_q f(x_q) . conj(g(x_q)), compensated summation."""
    if not f.rule.same_as(g.rule):
        raise RuleMismatch("fields sampled on different quadrature rules")
    re, im = _kernels.kahan_dot(
        f.rule.weights,
        np.ascontiguousarray(f.values.real),
        np.ascontiguousarray(f.values.imag),
        np.ascontiguousarray(g.values.real),
        np.ascontiguousarray(g.values.imag),
    )
    return complex(re, im)


@lru_cache(maxsize=32)
def _theta_tables(n_theta: int, nmax: int):
    x, _ = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    st = np.sin(theta)
    p, dp = _kernels.legendre_tables(nmax, x, st)
    # X = m * Pbar / sin(theta) for m >= 0
    xt = np.zeros_like(p)
    for n in range(nmax + 1):
        for m in range(n + 1):
            xt[n * (n + 1) // 2 + m] = m * p[n * (n + 1) // 2 + m] / st
    return p, dp, xt


def _require_degree(rule: SphereQuadrature, N: int, k: float, z) -> None:
    margin = N + math.ceil(abs(k) * float(np.linalg.norm(z))) + 10
    if rule.n_theta < margin:
        raise DegreeTooLow(
            f"rule n_theta={rule.n_theta} below required {margin} "
            f"(N={N}, k|z|={abs(k) * float(np.linalg.norm(z)):.2f})"
        )
    if rule.n_phi < 2 * N + 2:
        raise DegreeTooLow(f"rule n_phi={rule.n_phi} below required {2 * N + 2}")


def _frame_components(f: TangentialField):
    """theta/phi components on the (n_theta, n_phi) grid."""
    v = f.values
    ft = np.einsum("qc,qc->q", v, f.rule.theta_hat)
    fp = np.einsum("qc,qc->q", v, f.rule.phi_hat)
    sh = (f.rule.n_theta, f.rule.n_phi)
    return ft.reshape(sh), fp.reshape(sh)


def analyze(f: TangentialField, z, k: float, N: int) -> TangentialCoeffs:
    """Modal coefficients cU[n][m] = <f, Ut^{(z)}_{m,n}>, cV likewise."""
    z = np.asarray(z, dtype=float)
    rule = f.rule
    _require_degree(rule, N, k, z)
    # translation: <f, e^{-ikz.x}U> = <e^{+ikz.x} f, U>
    if np.any(z != 0.0):
        phase = np.exp(1j * k * (rule.xhat @ z))
        g = TangentialField(f.values * phase[:, None], rule)
    else:
        g = f
    ft, fp = _frame_components(g)
    # phi transform: G_m(theta_i) = (2 pi / n_phi) sum_j f(i,j) e^{-i m phi_j}
    scale = 2.0 * np.pi / rule.n_phi
    Ft = np.fft.fft(ft, axis=1) * scale  # bin m at index m mod n_phi
    Fp = np.fft.fft(fp, axis=1) * scale
    p, dp, xt = _theta_tables(rule.n_theta, N)
    wth = rule.w_theta
    cu = np.zeros(mode_count(N), dtype=complex)
    cv = np.zeros(mode_count(N), dtype=complex)
    for n in range(1, N + 1):
        rt = 1.0 / math.sqrt(n * (n + 1))
        for m in range(-n, n + 1):
            ma = abs(m)
            i = n * (n + 1) // 2 + ma
            w_tab = dp[i]
            x_tab = xt[i]
            if m < 0 and ma % 2 == 1:
                w_tab = -w_tab
            if m < 0:
                x_tab = -x_tab if ma % 2 == 0 else x_tab
            gt = Ft[:, m % rule.n_phi]
            gp = Fp[:, m % rule.n_phi]
            # conj(U) = [W that - i X phat] e^{-im phi} / sqrt(n(n+1))
            cu[mode_index(n, m)] = rt * np.sum(wth * (gt * w_tab - 1j * gp * x_tab))
            # conj(V) = [ i X that + W phat] e^{-im phi} / sqrt(n(n+1))
            cv[mode_index(n, m)] = rt * np.sum(wth * (1j * gt * x_tab + gp * w_tab))
    return TangentialCoeffs(center=z, k=float(k), N=N, cu=cu, cv=cv)


def synthesize(c: TangentialCoeffs, rule: SphereQuadrature) -> TangentialField:
    """Inverse of analyze on band-limited fields."""
    N = c.N
    _require_degree(rule, N, c.k, c.center)
    p, dp, xt = _theta_tables(rule.n_theta, N)
    # accumulate theta-profiles per m, then inverse phi transform
    Gt = np.zeros((rule.n_theta, rule.n_phi), dtype=complex)
    Gp = np.zeros_like(Gt)
    for n in range(1, N + 1):
        rt = 1.0 / math.sqrt(n * (n + 1))
        for m in range(-n, n + 1):
            ma = abs(m)
            i = n * (n + 1) // 2 + ma
            w_tab = dp[i]
            x_tab = xt[i]
            if m < 0 and ma % 2 == 1:
                w_tab = -w_tab
            if m < 0:
                x_tab = -x_tab if ma % 2 == 0 else x_tab
            au = c.cu[mode_index(n, m)] * rt
            av = c.cv[mode_index(n, m)] * rt
            Gt[:, m % rule.n_phi] += au * w_tab + av * (-1j * x_tab)
            Gp[:, m % rule.n_phi] += au * (1j * x_tab) + av * w_tab
    ft = np.fft.ifft(Gt, axis=1) * rule.n_phi
    fp = np.fft.ifft(Gp, axis=1) * rule.n_phi
    vals = (
        ft.reshape(-1)[:, None] * rule.theta_hat
        + fp.reshape(-1)[:, None] * rule.phi_hat
    )
    z = np.asarray(c.center, dtype=float)
    if np.any(z != 0.0):
        phase = np.exp(-1j * c.k * (rule.xhat @ z))
        vals = vals * phase[:, None]
    return TangentialField(vals, rule)
