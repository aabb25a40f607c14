"""Reflection/extension machinery for Maxwell's equations with the impedance
condition nu x curl E + i lam nu x (nu x E) = 0 on the plane x3 = 0
(nu = e3, reflection R x = (x1, x2, -x3)).

The scalar extension (boundary condition d3 u + i lam u = 0) is

    u~(x) = u(x', -x3) + 2 i lam e^{-i lam x3} int_0^{-x3} e^{-i lam s} u(x', s) ds

and the Maxwell extension operator D, evaluated at w3 = -x3 > 0, is

    (DE)_3 = E_3(x', w3) + 2 i mu3 I(E_3; mu3),         mu3 = k^2/lam
    (DE)_j = E_j(x', w3) + 2 i lam I(E_j; lam)
             + (2 lam^2/(k^2 - lam^2)) I(d_j E_3; lam)
             - (2 k^2 /(k^2 - lam^2)) I(d_j E_3; mu3),  j = 1, 2

with I(f; mu) = int_0^{w3} e^{-i mu (s - w3)} f(x', s) ds.  (The coefficient
2 i mu3 equals the paper form -2k^2/(i lam).)

The impedance half-space Green tensor is assembled from the same operator
coefficients acting along the reflected ray: for a source at y3 > 0 the
correction field attaches ray transforms T_mu[g](x) = int_0^inf e^{i mu t}
g(R x - t e3) dt to the image field g(R x); contour rotation t -> i t makes
the integrals exponentially convergent, using the analytic continuation of
the free-space kernels to complex heights.
"""

import math

import numpy as np

from ._quad1d import ExtensionQuadrature, ray_integral, segment_integrals, segment_nodes
from .errors import DomainError, SingularParameterCombination
from .fields import FieldFn, green_tensor, green_tensor_dx
from . import numdiff

E3 = np.array([0.0, 0.0, 1.0])


def reflect_point(x):
    """R_Pi x = (x1, x2, -x3), vectorized."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = x.copy()
    out[:, 2] = -out[:, 2]
    return out


def _check_singular(k: float, lam: float, eps_sing: float = 1e-6):
    if abs(k * k - lam * lam) <= eps_sing * max(k * k, lam * lam):
        raise SingularParameterCombination(
            f"k^2 - lam^2 too small (k={k}, lam={lam}); the tangential "
            "extension formula is singular at k = lam")


# ---------------------------------------------------------------------------
# scalar Helmholtz extension


def helmholtz_extend(u, k: float, lam: float, x,
                     quad: ExtensionQuadrature | None = None) -> np.ndarray:
    """Extension of a scalar field satisfying d3 u + i lam u = 0 on x3 = 0
    to points with x3 < 0.  `u` maps (M, 3) points to (M,) values."""
    quad = quad or ExtensionQuadrature()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(x[:, 2] >= 0):
        raise DomainError("extension only evaluates at x3 < 0")
    T = -x[:, 2]
    s_nodes, layout = segment_nodes(T, k, quad)
    pts = np.repeat(x, [lay[1] * (quad.degree + 1) for lay in layout], axis=0)
    pts = pts.copy()
    pts[:, 2] = s_nodes
    fvals = np.asarray(u(pts))
    integ = segment_integrals(fvals, layout, T, lam, quad)
    mirror = np.asarray(u(reflect_point(x)))
    return mirror + 2j * lam * integ


# ---------------------------------------------------------------------------
# Maxwell extension operator


def maxwell_extend(E: FieldFn, k: float, lam: float, x,
                   quad: ExtensionQuadrature | None = None,
                   fd_step: float | None = None) -> np.ndarray:
    """Extended electric field E~(x) = DE(x', -x3) at points x3 < 0.

    E must satisfy the impedance condition on x3 = 0.  Tangential
    derivatives of E_3 come from E.grad_e3 when provided, otherwise from
    6th-order central differences with Richardson step control.
    """
    _check_singular(k, lam)
    quad = quad or ExtensionQuadrature()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if np.any(x[:, 2] >= 0):
        raise DomainError("extension only evaluates at x3 < 0")
    T = -x[:, 2]
    mu3 = k * k / lam
    s_nodes, layout = segment_nodes(T, k, quad)
    pts = np.repeat(x, [lay[1] * (quad.degree + 1) for lay in layout], axis=0)
    pts[:, 2] = s_nodes
    evals = E.E(pts)  # (n_nodes, 3)
    g3 = _grad_e3(E, pts, k, fd_step)  # (n_nodes, 2)

    I_Ej_lam = segment_integrals(evals[:, :2], layout, T, lam, quad)
    I_E3_mu3 = segment_integrals(evals[:, 2], layout, T, mu3, quad)
    I_g3_lam = segment_integrals(g3, layout, T, lam, quad)
    I_g3_mu3 = segment_integrals(g3, layout, T, mu3, quad)

    mirror = E.E(reflect_point(x))
    out = np.empty_like(mirror)
    c_lam = 2.0 * lam**2 / (k * k - lam * lam)
    c_k = 2.0 * k * k / (k * k - lam * lam)
    out[:, :2] = (mirror[:, :2] + 2j * lam * I_Ej_lam
                  + c_lam * I_g3_lam - c_k * I_g3_mu3)
    out[:, 2] = mirror[:, 2] + 2j * mu3 * I_E3_mu3
    return out


def _grad_e3(E: FieldFn, pts, k: float, fd_step: float | None):
    if E.grad_e3 is not None:
        return np.asarray(E.grad_e3(pts))
    h = fd_step or 1e-3 * (2.0 * math.pi / k)
    # 6th-order central differences in x1, x2 with one Richardson check
    out = np.empty((len(pts), 2), dtype=complex)
    for axis in range(2):
        d1 = _fd6(E, pts, axis, h)
        d2 = _fd6(E, pts, axis, h / 2.0)
        # Richardson on the 6th-order error term
        out[:, axis] = (64.0 * d2 - d1) / 63.0
    return out


_FD6_OFF = np.array([-3, -2, -1, 1, 2, 3])
_FD6_C = np.array([-1.0, 9.0, -45.0, 45.0, -9.0, 1.0]) / 60.0


def _fd6(E: FieldFn, pts, axis, h):
    stacked = np.repeat(pts, len(_FD6_OFF), axis=0)
    stacked[:, axis] += np.tile(_FD6_OFF * h, len(pts))
    vals = E.E(stacked)[:, 2].reshape(len(pts), len(_FD6_OFF))
    return vals @ _FD6_C / h


def extended_field(E: FieldFn, k: float, lam: float,
                   quad: ExtensionQuadrature | None = None) -> FieldFn:
    """FieldFn evaluating E above the plane and DE(R x) below it."""

    def efun(x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty((len(x), 3), dtype=complex)
        lo = x[:, 2] < 0
        if np.any(~lo):
            out[~lo] = E.E(x[~lo])
        if np.any(lo):
            out[lo] = maxwell_extend(E, k, lam, x[lo], quad)
        return out

    def hfun(x):
        raise NotImplementedError("extension defined for the electric field")

    return FieldFn(efun, hfun, domain="extension across x3=0")


def extension_residual_check(E: FieldFn, k: float, lam: float, box,
                             n_samples: int = 12, seed: int = 11,
                             fd_h: float = 1e-2) -> dict:
    """FD residuals of the vector Helmholtz equation and the divergence of
    the extended field over a sample box strictly inside x3 < 0."""
    lo, hi = np.asarray(box[0], float), np.asarray(box[1], float)
    if hi[2] >= 0 or lo[2] >= 0:
        raise DomainError("sample box must lie in x3 < 0")
    rng = np.random.default_rng(seed)
    pts = lo + (hi - lo) * rng.random((n_samples, 3))
    # keep FD stencils inside x3 < 0
    pts[:, 2] = np.minimum(pts[:, 2], -3.0 * fd_h)
    ext = extended_field(E, k, lam)
    scale = max(float(np.max(np.abs(ext.E(pts)))), 1e-30)
    lap = numdiff.laplacian(ext.E, pts, fd_h)
    vals = ext.E(pts).reshape(n_samples, -1)
    helm = float(np.max(np.abs(lap + k * k * vals))) / (k * k * scale)
    div = float(np.max(np.abs(numdiff.divergence(ext.E, pts, fd_h)))) / (k * scale)
    return {"helmholtz": helm, "divergence": div, "scale": scale}


# ---------------------------------------------------------------------------
# plane-wave oracle fields


def scalar_plane_oracle(k: float, lam: float, d) -> tuple:
    """Entire scalar field u = e^{ikx.d} + R e^{ikx.d'} with d' = R_Pi d and
    R = (k d3 + lam)/(k d3 - lam), satisfying d3 u + i lam u = 0 on x3 = 0.
    Returns (u, R); raises when k d3 = lam makes R singular."""
    d = np.asarray(d, dtype=float)
    dp = d.copy()
    dp[2] = -dp[2]
    den = k * d[2] - lam
    if abs(den) < 1e-12 * max(k, lam):
        raise SingularParameterCombination("k d3 = lam: reflection coefficient singular")
    R = (k * d[2] + lam) / den

    def u(x):
        x = np.atleast_2d(np.asarray(x))
        return np.exp(1j * k * (x @ d)) + R * np.exp(1j * k * (x @ dp))

    return u, R


def maxwell_plane_oracle(k: float, lam: float, d, p) -> tuple[FieldFn, np.ndarray]:
    """Entire Maxwell field E = p e^{ikx.d} + q e^{ikx.d'} with d' = R_Pi d,
    q解 solving the impedance condition on x3 = 0 (2x2 solve in the tangent
    frame of d').  Returns (FieldFn, q); the residual of the boundary
    condition is checked to 1e-12 before returning."""
    d = np.asarray(d, dtype=float)
    p = np.asarray(p, dtype=float)
    if abs(d @ p) > 1e-10:
        raise DomainError("oracle polarization must satisfy p.d = 0")
    if abs(d[2]) < 1e-8:
        raise DomainError("grazing incidence (d3 = 0) not supported")
    dp = d.copy()
    dp[2] = -dp[2]
    # tangent frame of d'
    a1 = np.cross(dp, np.array([1.0, 0.0, 0.0]))
    if np.linalg.norm(a1) < 0.3:
        a1 = np.cross(dp, np.array([0.0, 1.0, 0.0]))
    a1 /= np.linalg.norm(a1)
    a2 = np.cross(dp, a1)

    # F_j(E) = d_j E_3 - d_3 E_j - i lam E_j = 0 at x3 = 0, j = 1, 2;
    # for e^{ikx.d} terms the phases coincide on the plane
    def bc_row(j, pol, dvec):
        return (1j * k * dvec[j] * pol[2]
                - 1j * k * dvec[2] * pol[j]
                - 1j * lam * pol[j])

    A = np.empty((2, 2), dtype=complex)
    b = np.empty(2, dtype=complex)
    for j in range(2):
        A[j, 0] = bc_row(j, a1, dp)
        A[j, 1] = bc_row(j, a2, dp)
        b[j] = -bc_row(j, p, d)
    alpha = np.linalg.solve(A, b)
    q = alpha[0] * a1 + alpha[1] * a2

    # verify the boundary condition residual
    res = max(abs(bc_row(j, p, d) + bc_row(j, q, dp)) for j in range(2))
    if res > 1e-12 * max(k, lam):
        raise DomainError(f"oracle boundary residual {res:.2e} too large")

    dxp = np.cross(d, p)
    dxq = np.cross(dp, q)

    def efun(x):
        x = np.atleast_2d(np.asarray(x))
        return (np.exp(1j * k * (x @ d))[:, None] * p
                + np.exp(1j * k * (x @ dp))[:, None] * q)

    def hfun(x):
        x = np.atleast_2d(np.asarray(x))
        return (np.exp(1j * k * (x @ d))[:, None] * dxp
                + np.exp(1j * k * (x @ dp))[:, None] * dxq)

    def g3(x):
        x = np.atleast_2d(np.asarray(x))
        e1 = np.exp(1j * k * (x @ d))
        e2 = np.exp(1j * k * (x @ dp))
        return 1j * k * (p[2] * e1[:, None] * d[None, :2]
                         + q[2] * e2[:, None] * dp[None, :2])

    return FieldFn(efun, hfun, grad_e3=g3), q


# ---------------------------------------------------------------------------
# impedance half-space Green tensor


def impedance_halfspace_green(x, y, k: float, lam: float,
                              quad: ExtensionQuadrature | None = None) -> np.ndarray:
    """G_I(x, y) = G(x, y) + correction, columns satisfying Maxwell's
    equations in x3 > 0 and the impedance condition on x3 = 0.

    The correction applies the extension-operator coefficients along the
    reflected ray: with g the free-space tensor columns,

        V_3 = g_3(Rx) + 2 i mu3 T_{mu3}[g_3]
        V_j = g_j(Rx) + 2 i lam T_lam[g_j]
              + (2 lam^2/(k^2-lam^2)) d_j T_lam[g_3]
              - (2 k^2 /(k^2-lam^2)) d_j T_mu3[g_3]

    where T_mu[g](x) = int_0^inf e^{i mu t} g(Rx - t e3) dt, evaluated on
    the rotated contour t -> i t.
    """
    _check_singular(k, lam)
    quad = quad or ExtensionQuadrature()
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    if np.any(x[:, 2] < 0) or y[2] <= 0:
        raise DomainError("x and y must lie in the upper half-space")
    mu3 = k * k / lam
    out = green_tensor(x, y, k)
    xr = reflect_point(x)
    c_lam = 2.0 * lam**2 / (k * k - lam * lam)
    c_k = 2.0 * k * k / (k * k - lam * lam)
    for i, xi in enumerate(xr):
        mirror = green_tensor(xi[None, :], y, k)[0]

        def g_at(ts, xi=xi):
            pts = np.repeat(xi[None, :].astype(complex), len(ts), axis=0)
            pts[:, 2] = xi[2] - 1j * ts
            return green_tensor(pts, y, k)          # (n_t, 3, 3)

        def dg3_at(ts, xi=xi):
            pts = np.repeat(xi[None, :].astype(complex), len(ts), axis=0)
            pts[:, 2] = xi[2] - 1j * ts
            d = green_tensor_dx(pts, y, k)          # (n_t, l, i, a)
            return d[:, :2, 2, :]                   # d_j g_3a, j = 1,2

        # contour rotation: int_0^inf e^{i mu t} f(t) dt = i int e^{-mu t} f(it) dt
        T_lam = 1j * ray_integral(lambda ts: np.exp(-lam * ts)[:, None, None] * g_at(ts),
                                  lam + k, quad)
        T_mu3 = 1j * ray_integral(lambda ts: np.exp(-mu3 * ts)[:, None, None] * g_at(ts),
                                  mu3 + k, quad)
        dT_lam = 1j * ray_integral(lambda ts: np.exp(-lam * ts)[:, None, None] * dg3_at(ts),
                                   lam + k, quad)
        dT_mu3 = 1j * ray_integral(lambda ts: np.exp(-mu3 * ts)[:, None, None] * dg3_at(ts),
                                   mu3 + k, quad)
        V = np.empty((3, 3), dtype=complex)
        V[2, :] = mirror[2, :] + 2j * mu3 * T_mu3[2, :]
        V[:2, :] = (mirror[:2, :] + 2j * lam * T_lam[:2, :]
                    + c_lam * dT_lam - c_k * dT_mu3)
        out[i] += V
    return out


# ---------------------------------------------------------------------------
# admissible normals (plane-wave impedance analysis)


def admissible_normals(k: float, lam: float) -> list[np.ndarray]:
    """Unit normals nu solving ik nu x (d x p) + i lam nu x (nu x p) = 0 in
    the frame p = e1, d x p = e2 (d = e3): the case list

        nu = (0, 0, -1)                         if k = lam
        nu = (+-sqrt(1-(k/lam)^2), 0, -k/lam)   if k < lam
        nu = (0, +-sqrt(1-(lam/k)^2), -lam/k)   if k > lam
    """
    if not (k > 0 and lam > 0):
        raise DomainError("k and lam must be positive")
    if k == lam:
        return [np.array([0.0, 0.0, -1.0])]
    if k < lam:
        c = math.sqrt(1.0 - (k / lam) ** 2)
        return [np.array([+c, 0.0, -k / lam]), np.array([-c, 0.0, -k / lam])]
    c = math.sqrt(1.0 - (lam / k) ** 2)
    return [np.array([0.0, +c, -lam / k]), np.array([0.0, -c, -lam / k])]


def admissible_normal_residual(nu, k: float, lam: float) -> float:
    """|ik nu x (d x p) + i lam nu x (nu x p)| at d = e3, p = e1."""
    nu = np.asarray(nu, dtype=float)
    p = np.array([1.0, 0.0, 0.0])
    dxp = np.array([0.0, 1.0, 0.0])
    r = 1j * k * np.cross(nu, dxp) + 1j * lam * np.cross(nu, np.cross(nu, p))
    return float(np.max(np.abs(r)))
