"""Oscillatory 1D quadrature for the reflection operator's segment and ray
integrals.

Segment integrals have the form  int_0^T e^{-i mu (s - T)} f(s) ds  where f
is an entire field trace (bandwidth <= k along the segment) while mu may be
arbitrarily large (the Dirichlet-limit sweeps reach mu = 1e5).  Each panel
expands f in Legendre polynomials from Gauss-Legendre samples and integrates
P_j(u) e^{i theta u} exactly through the closed-form moments

    int_{-1}^{1} P_j(u) e^{i theta u} du = 2 i^j j_j(theta),

so the cost never grows with mu; the panel count follows the field bandwidth
only.  Accuracy is monitored through the tail of the Legendre coefficients.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import QuadratureFailure


@dataclass(frozen=True)
class ExtensionQuadrature:
    """Parameters of the adaptive panel rule for the extension integrals."""

    abs_tol: float = 1e-11
    degree: int = 20
    max_subdivisions: int = 12


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _gl_data(degree: int):
    """Nodes, weights, and the Legendre-coefficient matrix for a panel."""
    if degree not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(degree + 1)
        # coef[j, q] = (2j+1)/2 * w_q * P_j(x_q)
        pj = np.polynomial.legendre.legvander(x, degree).T  # (degree+1, q)
        coef = (np.arange(degree + 1)[:, None] + 0.5) * w[None, :] * pj
        _GL_CACHE[degree] = (x, w, coef)
    return _GL_CACHE[degree]


def legendre_exp_moments(theta: float, degree: int) -> np.ndarray:
    """m_j = int_{-1}^{1} P_j(u) e^{i theta u} du for j = 0..degree."""
    if theta == 0.0:
        out = np.zeros(degree + 1, dtype=complex)
        out[0] = 2.0
        return out
    a = abs(theta)
    j = specfun.sph_bessel_j_all(degree, a)
    phases = 2.0 * (1j ** np.arange(degree + 1))
    if theta < 0.0:
        phases = phases * ((-1.0) ** np.arange(degree + 1))
    return phases * j


def segment_nodes(T: np.ndarray, bandwidth: float, quad: ExtensionQuadrature):
    """Panel layout for the segments [0, T_i]: returns (s_nodes, layout)
    where layout[i] = (offset, n_panels, panel_edges)."""
    x, _, _ = _gl_data(quad.degree)
    max_len = 4.0 / max(bandwidth, 1e-30)
    nodes = []
    layout = []
    off = 0
    for Ti in np.atleast_1d(T):
        n_pan = max(1, int(math.ceil(abs(Ti) / max_len)))
        edges = np.linspace(0.0, Ti, n_pan + 1)
        s = (edges[:-1, None] + edges[1:, None]) / 2.0 + (
            (edges[1:, None] - edges[:-1, None]) / 2.0
        ) * x[None, :]
        nodes.append(s.reshape(-1))
        layout.append((off, n_pan, edges))
        off += s.size
    return np.concatenate(nodes) if nodes else np.empty(0), layout


def segment_integrals(f_at_nodes: np.ndarray, layout, T: np.ndarray,
                      mu: float, quad: ExtensionQuadrature) -> np.ndarray:
    """int_0^{T_i} e^{-i mu (s - T_i)} f(s) ds from precomputed node values.

    f_at_nodes has shape (n_nodes,) or (n_nodes, C); returns (n_T,) or
    (n_T, C).  Raises QuadratureFailure when the Legendre tail of any panel
    exceeds abs_tol (the panels were sized for the declared bandwidth).
    """
    f = np.asarray(f_at_nodes)
    scalar = f.ndim == 1
    if scalar:
        f = f[:, None]
    deg = quad.degree
    _, _, coef = _gl_data(deg)
    out = np.zeros((len(layout), f.shape[1]), dtype=complex)
    worst_tail = 0.0
    for i, (off, n_pan, edges) in enumerate(layout):
        Ti = T[i] if np.ndim(T) else T
        vals = f[off:off + n_pan * (deg + 1)].reshape(n_pan, deg + 1, -1)
        half = (edges[1:] - edges[:-1]) / 2.0
        mid = (edges[1:] + edges[:-1]) / 2.0
        ahat = np.einsum("jq,pqc->pjc", coef, vals)
        tail = np.max(np.sum(np.abs(ahat[:, -3:, :]), axis=1) * np.abs(half)[:, None])
        worst_tail = max(worst_tail, float(tail))
        for p in range(n_pan):
            theta = -mu * half[p]
            m = legendre_exp_moments(theta, deg)
            pref = half[p] * np.exp(-1j * mu * (mid[p] - Ti))
            out[i] += pref * (m @ ahat[p])
    if worst_tail > quad.abs_tol * 100.0:
        raise QuadratureFailure(
            f"Legendre tail {worst_tail:.2e} above tolerance; "
            "field bandwidth larger than declared")
    return out[:, 0] if scalar else out


def ray_integral(g, rate: float, quad: ExtensionQuadrature | None = None,
                 t_cut: float | None = None) -> np.ndarray:
    """int_0^inf g(t) dt for an integrand decaying like e^{-rate * t}.

    g maps a 1D array of t-values to (n_t, ...) complex values; geometric
    panels resolve the 1/rate inner scale and the integral is truncated
    where the exponential bound is negligible.
    """
    quad = quad or ExtensionQuadrature()
    if rate <= 0:
        raise QuadratureFailure("nonpositive decay rate in ray integral")
    if t_cut is None:
        t_cut = 60.0 / rate
    x, w, _ = _gl_data(quad.degree)
    t0 = 0.25 / rate
    edges = [0.0, t0]
    while edges[-1] < t_cut and len(edges) <= 64:
        edges.append(min(edges[-1] * 2.0, t_cut))
    edges = np.array(edges)
    half = (edges[1:] - edges[:-1]) / 2.0
    mid = (edges[1:] + edges[:-1]) / 2.0
    ts = (mid[:, None] + half[:, None] * x[None, :]).reshape(-1)
    vals = np.asarray(g(ts))
    vals = vals.reshape(len(half), len(x), *vals.shape[1:])
    wts = half[:, None] * w[None, :]
    wshape = (len(half), len(x)) + (1,) * (vals.ndim - 2)
    return np.sum(vals * wts.reshape(wshape), axis=(0, 1))
