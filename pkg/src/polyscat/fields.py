"""Incident-field generators, the free-space Green tensor, and radiating
multipole fields.

Every generator returns a FieldFn whose E/H evaluators are vectorized over
(M, 3) point batches.  Derivatives of the fundamental solution Phi are
closed-form (never finite differences); the radial helper functions accept
complex coordinates, which the half-space reflection machinery uses to
evaluate ray integrals on a rotated contour.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError, EvalAtSource, InvalidPolarization, RuleMismatch
from .harmonics import TangentialField, check_mode, sph_harm, vsh_U, vsh_V
from . import specfun


@dataclass(frozen=True)
class WaveParams:
    k: float
    lam: float

    def __post_init__(self):
        if not self.k > 0:
            raise DomainError(f"wavenumber k must be positive, got {self.k}")
        if not self.lam > 0:
            raise DomainError(f"impedance coefficient must be positive, got {self.lam}")


@dataclass(frozen=True)
class PlaneWaveParams:
    d: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d", np.asarray(self.d, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))
        if abs(np.linalg.norm(self.d) - 1.0) > 1e-10:
            raise DomainError("incident direction must be a unit vector")


@dataclass(frozen=True)
class FieldFn:
    """Evaluatable Maxwell pair: x -> (E, H), vectorized over point batches."""

    e: Callable[[np.ndarray], np.ndarray]
    h: Callable[[np.ndarray], np.ndarray]
    #: description of where the pair solves Maxwell's equations
    domain: str = "R^3"
    #: optional analytic tangential gradient of E_3: points -> (M, 2)
    grad_e3: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def E(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points))
        return self.e(pts)

    def H(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points))
        return self.h(pts)


def plane_wave(pw: PlaneWaveParams, k: float) -> FieldFn:
    """E = p e^{ikx.d}, H = (d x p) e^{ikx.d} with p _|_ d, |p| = 1."""
    d, p = pw.d, pw.p
    if abs(float(d @ p)) > 1e-10:
        raise InvalidPolarization(f"p.d = {float(d @ p):.2e} is not zero")
    dxp = np.cross(d, p)

    def efun(x):
        ph = np.exp(1j * k * (x @ d))
        return ph[:, None] * p

    def hfun(x):
        ph = np.exp(1j * k * (x @ d))
        return ph[:, None] * dxp

    def g3(x):
        ph = np.exp(1j * k * (x @ d))
        return (1j * k * p[2] * ph)[:, None] * d[:2]

    return FieldFn(efun, hfun, grad_e3=g3)


def section5_plane_wave(pw: PlaneWaveParams, k: float) -> FieldFn:
    """E = ik (d x p) x d e^{ikx.d}; H = (1/ik) curl E = ik (d x p) e^{ikx.d}.

    The polarization vector may be any vector here (the projection
    (d x p) x d keeps only the part orthogonal to d).
    """
    d, p = pw.d, pw.p
    q = np.cross(np.cross(d, p), d)
    dxp = np.cross(d, p)

    def efun(x):
        ph = np.exp(1j * k * (x @ d))
        return (1j * k * ph)[:, None] * q

    def hfun(x):
        ph = np.exp(1j * k * (x @ d))
        return (1j * k * ph)[:, None] * dxp

    def g3(x):
        ph = np.exp(1j * k * (x @ d))
        return (1j * k * 1j * k * q[2] * ph)[:, None] * d[:2]

    return FieldFn(efun, hfun, grad_e3=g3)


# ---------------------------------------------------------------------------
# fundamental solution and derivatives (complex-coordinate safe)


def _rvec(x, y):
    return x - np.asarray(y)


def _rnorm(rv):
    """sqrt(sum r_i^2) with the principal branch; works for complex coords."""
    r2 = np.sum(rv * rv, axis=-1)
    return np.sqrt(r2 + 0j) if np.iscomplexobj(rv) else np.sqrt(r2)


def phi_fs(x, y, k):
    """Fundamental solution e^{ikr}/(4 pi r)."""
    r = _rnorm(_rvec(np.atleast_2d(x), y))
    return np.exp(1j * k * r) / (4.0 * np.pi * r)


def _radial_g(r, k):
    """g with grad_x Phi = g * (x - y)."""
    return np.exp(1j * k * r) * (1j * k * r - 1.0) / (4.0 * np.pi * r**3)


def _radial_gh(r, k):
    """ghat with Hess_x Phi = g I + ghat (x-y)(x-y)^T."""
    kr = k * r
    return np.exp(1j * k * r) * (3.0 - 3j * kr - kr**2) / (4.0 * np.pi * r**5)


def _radial_g2(r, k):
    """g2 with third derivatives: d_l d_i d_j Phi =
    (delta_ij r_l + delta_il r_j + delta_jl r_i) ghat + r_i r_j r_l g2."""
    kr = k * r
    return (
        np.exp(1j * k * r)
        * (-15.0 + 15j * kr + 6.0 * kr**2 - 1j * kr**3)
        / (4.0 * np.pi * r**7)
    )


def _check_not_source(rv, k, label="x"):
    r = np.abs(_rnorm(rv))
    eps = 1e-10 * (2.0 * np.pi / k)
    if np.any(r < eps):
        raise EvalAtSource(f"{label} within {eps:.2e} of the source point")


def green_tensor(x, y, k: float) -> np.ndarray:
    """Free-space Maxwell Green tensor G = Phi I + grad_y grad_y Phi / k^2.

    Vectorized: x of shape (M, 3) gives (M, 3, 3).  Accepts complex
    coordinates in x (analytic continuation for contour-rotated integrals).
    """
    x = np.atleast_2d(np.asarray(x))
    rv = _rvec(x, y)
    _check_not_source(rv, k)
    r = _rnorm(rv)
    phi = np.exp(1j * k * r) / (4.0 * np.pi * r)
    g = _radial_g(r, k)
    gh = _radial_gh(r, k)
    eye = np.eye(3)
    # grad_y grad_y Phi = grad_x grad_x Phi = g I + ghat rr^T
    out = (phi + g / k**2)[:, None, None] * eye + (gh / k**2)[:, None, None] * (
        rv[:, :, None] * rv[:, None, :]
    )
    return out


def green_tensor_dx(x, y, k: float) -> np.ndarray:
    """Gradient of the Green tensor columns: out[q, l, i, a] = d_{x_l} G_{ia}."""
    x = np.atleast_2d(np.asarray(x))
    rv = _rvec(x, y)
    _check_not_source(rv, k)
    r = _rnorm(rv)
    g = _radial_g(r, k)
    gh = _radial_gh(r, k)
    g2 = _radial_g2(r, k)
    eye = np.eye(3)
    # d_l Phi = g r_l ; d_l d_i d_j Phi per _radial_g2
    d3 = (
        gh[:, None, None, None]
        * (
            eye[None, :, :, None] * rv[:, None, None, :]
            + eye[None, :, None, :] * rv[:, None, :, None]
            + eye[None, None, :, :] * rv[:, :, None, None]
        )
        + g2[:, None, None, None] * rv[:, :, None, None] * rv[:, None, :, None] * rv[:, None, None, :]
    )  # d3[q, l, i, a] = d_l d_i d_a Phi
    dphi = g[:, None] * rv  # d_l Phi
    out = dphi[:, :, None, None] * eye[None, None, :, :] + d3 / k**2
    return out


def magnetic_dipole(y, a, k: float) -> FieldFn:
    """Point source of a magnetic dipole at y with moment a:
    E = curl(Phi(.,y) a) = grad Phi x a,  H = (1/ik) curl E."""
    y = np.asarray(y, dtype=float)
    a = np.asarray(a, dtype=float)
    if np.linalg.norm(a) == 0.0:
        raise DomainError("dipole moment must be nonzero")

    def efun(x):
        rv = _rvec(x, y)
        _check_not_source(rv, k)
        r = _rnorm(rv)
        grad = _radial_g(r, k)[:, None] * rv
        return np.cross(grad, a[None, :])

    def hfun(x):
        # H = (1/ik)[grad(a . grad Phi) + k^2 Phi a]
        rv = _rvec(x, y)
        _check_not_source(rv, k)
        r = _rnorm(rv)
        g = _radial_g(r, k)
        gh = _radial_gh(r, k)
        adotr = rv @ a
        grad_dir = g[:, None] * a[None, :] + (gh * adotr)[:, None] * rv
        phi = np.exp(1j * k * r) / (4.0 * np.pi * r)
        return (grad_dir + (k**2) * phi[:, None] * a[None, :]) / (1j * k)

    return FieldFn(efun, hfun, domain=f"R^3 minus source at {y}")


def herglotz(kernel: TangentialField, k: float) -> FieldFn:
    """Entire pair E(x) = int_{S^2} e^{ikx.d} a(d) ds(d) by quadrature
    superposition of plane waves; the curl superposes analytically."""
    if kernel.max_radial() > 1e-8:
        raise RuleMismatch("Herglotz kernel must be tangential")
    dirs = kernel.rule.xhat
    wts = kernel.rule.weights
    amps = wts[:, None] * kernel.values
    curl_amps = wts[:, None] * np.cross(dirs, kernel.values)

    def efun(x):
        ph = np.exp(1j * k * (x @ dirs.T))  # (M, nodes)
        return ph @ amps

    def hfun(x):
        ph = np.exp(1j * k * (x @ dirs.T))
        return ph @ curl_amps

    return FieldFn(efun, hfun)


def multipole_q(idx, k: float, x):
    """Radiating multipole q_n^m(x) = curl{x h_n^(1)(k|x|) Y_n^m(xhat)} and
    its curl; x vectorized (M, 3).  Returns (q, curl_q)."""
    n, m = idx
    check_mode(n, m)
    x = np.atleast_2d(np.asarray(x, dtype=float))
    r = np.linalg.norm(x, axis=1)
    eps = 1e-10 * (2.0 * np.pi / k)
    if np.any(r < eps):
        raise EvalAtSource("multipole evaluated at the origin")
    rt = math.sqrt(n * (n + 1))
    q = np.empty((x.shape[0], 3), dtype=complex)
    cq = np.empty_like(q)
    for i, (pt, ri) in enumerate(zip(x, r)):
        d = pt / ri
        t = k * ri
        _, _, zeta, zeta_p = specfun.riccati_all(n, t)
        h = zeta[n] / t
        Y = sph_harm((n, m), d)
        U = vsh_U((n, m), d)
        V = vsh_V((n, m), d)
        q[i] = -rt * h * V
        cq[i] = k * (n * (n + 1) * (h / t) * Y * d + (zeta_p[n] / t) * rt * U)
    return q, cq
