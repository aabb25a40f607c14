"""Finite-difference residual checks for Maxwell/Helmholtz fields.

These stencils are a verification harness (and the reporting ops of the
reflection module); production operators never differentiate through them.
All derivatives are 4th-order central unless noted.
"""

import numpy as np

# 4th-order first and second derivative stencils
_C1 = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0
_O1 = np.array([-2, -1, 1, 2])
_C2 = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_O2 = np.array([-2, -1, 0, 1, 2])


def _stencil_points(x, axis, offsets, h):
    x = np.atleast_2d(x)
    pts = np.repeat(x[:, None, :], len(offsets), axis=1)
    pts[:, :, axis] += np.asarray(offsets) * h
    return pts.reshape(-1, 3)


def partial(f, x, axis, h):
    """4th-order d/dx_axis of a vectorized scalar/vector function."""
    x = np.atleast_2d(x)
    vals = f(_stencil_points(x, axis, _O1, h))
    vals = vals.reshape(x.shape[0], len(_O1), -1)
    return np.tensordot(vals, _C1, axes=(1, 0)) / h


def second_partial(f, x, axis, h):
    x = np.atleast_2d(x)
    vals = f(_stencil_points(x, axis, _O2, h))
    vals = vals.reshape(x.shape[0], len(_O2), -1)
    return np.tensordot(vals, _C2, axes=(1, 0)) / h**2


def curl(f, x, h):
    """FD curl of a vectorized vector field f: (M,3) -> (M,3)."""
    d = [partial(f, x, ax, h) for ax in range(3)]
    return np.stack(
        [
            d[1][:, 2] - d[2][:, 1],
            d[2][:, 0] - d[0][:, 2],
            d[0][:, 1] - d[1][:, 0],
        ],
        axis=1,
    )


def divergence(f, x, h):
    d = [partial(f, x, ax, h) for ax in range(3)]
    return d[0][:, 0] + d[1][:, 1] + d[2][:, 2]


def laplacian(f, x, h):
    return sum(second_partial(f, x, ax, h) for ax in range(3))


def maxwell_residual(field, x, k, h=1e-3):
    """max |curl E - ik H| and |curl H + ik E| over the batch, scaled by k|E|."""
    x = np.atleast_2d(x)
    cE = curl(field.E, x, h)
    cH = curl(field.H, x, h)
    E = field.E(x)
    Hf = field.H(x)
    scale = max(np.max(np.abs(E)), np.max(np.abs(Hf)), 1e-30) * k
    r1 = np.max(np.abs(cE - 1j * k * Hf)) / scale
    r2 = np.max(np.abs(cH + 1j * k * E)) / scale
    return max(r1, r2)


def divergence_residual(field, x, k, h=1e-3):
    x = np.atleast_2d(x)
    dE = divergence(field.E, x, h)
    dH = divergence(field.H, x, h)
    scale = max(np.max(np.abs(field.E(x))), 1e-30) * k
    return max(np.max(np.abs(dE)), np.max(np.abs(dH))) / scale


def helmholtz_residual(f, x, k, h=1e-3):
    """max |Laplacian u + k^2 u| / (k^2 max|u|) for scalar or vector u."""
    x = np.atleast_2d(x)
    lap = laplacian(f, x, h)
    u = np.asarray(f(x)).reshape(x.shape[0], -1)
    scale = k**2 * max(np.max(np.abs(u)), 1e-30)
    return np.max(np.abs(lap + k**2 * u)) / scale
