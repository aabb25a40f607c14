"""Hot numeric loops, numba-compiled when available.

Every kernel here is plain nopython-compatible numpy code.  With numba
enabled the module-level names are the jitted versions (the original
Python implementations stay reachable through ``.py_func`` for parity
tests); with ``POLYSCAT_NO_NUMBA=1`` they run as-is.
"""

import math

import numpy as np

from ._accel import maybe_njit

_LN_BIG = 250.0 * math.log(10.0)  # rescale threshold exponent
_BIG = 1e250
_INV_BIG = 1e-250


@maybe_njit
def jn_scaled(nmax, t):
    """Backward-recurrence spherical Bessel j_n, n = 0..nmax, scaled form.

    Returns (mant, acc, ln_j, sign_j) with j_n = sign_j[n]*exp(ln_j[n]) and
    j_n = mant[n]*exp(acc[n]) exactly.  The mantissa/exponent split lets
    callers form cancellation-free combinations of neighboring orders.
    """
    mant = np.zeros(nmax + 1)
    acc = np.zeros(nmax + 1)
    if t > nmax + 30:
        # oscillatory regime for every requested order: upward is stable
        jp = math.sin(t) / t
        mant[0] = jp
        jc = math.sin(t) / (t * t) - math.cos(t) / t
        if nmax >= 1:
            mant[1] = jc
        for m in range(1, nmax):
            jn = (2 * m + 1) / t * jc - jp
            jp = jc
            jc = jn
            mant[m + 1] = jc
        ln_j = np.empty(nmax + 1)
        sign_j = np.empty(nmax + 1)
        for n in range(nmax + 1):
            if mant[n] == 0.0:
                ln_j[n] = -math.inf
                sign_j[n] = 0.0
            else:
                ln_j[n] = math.log(abs(mant[n]))
                sign_j[n] = 1.0 if mant[n] > 0 else -1.0
        return mant, acc, ln_j, sign_j
    start = nmax + max(20, int(math.ceil(1.5 * t)))
    fp = 0.0
    fc = 1e-30
    cur = 0.0
    for m in range(start, 0, -1):
        fm = (2 * m + 1) / t * fc - fp
        fp = fc
        fc = fm
        if abs(fc) > _BIG:
            fc *= _INV_BIG
            fp *= _INV_BIG
            cur += _LN_BIG
        if m - 1 <= nmax:
            mant[m - 1] = fc
            acc[m - 1] = cur
    # normalize against whichever of j0, j1 is larger (their zeros interlace)
    j0 = math.sin(t) / t
    j1 = math.sin(t) / (t * t) - math.cos(t) / t
    if abs(j0) >= abs(j1) or nmax < 1:
        ref_true = j0
        ref_mant = mant[0]
        ref_acc = acc[0]
    else:
        ref_true = j1
        ref_mant = mant[1]
        ref_acc = acc[1]
    ln_norm = math.log(abs(ref_true) / abs(ref_mant)) - ref_acc
    s_norm = (1.0 if ref_true > 0 else -1.0) * (1.0 if ref_mant > 0 else -1.0)
    ln_j = np.empty(nmax + 1)
    sign_j = np.empty(nmax + 1)
    for n in range(nmax + 1):
        if mant[n] == 0.0:
            ln_j[n] = -math.inf
            sign_j[n] = 0.0
        else:
            ln_j[n] = math.log(abs(mant[n])) + acc[n] + ln_norm
            sign_j[n] = (1.0 if mant[n] > 0 else -1.0) * s_norm
        mant[n] *= s_norm
        acc[n] += ln_norm
    return mant, acc, ln_j, sign_j


@maybe_njit
def yn_scaled(nmax, t):
    """Upward-recurrence spherical Bessel y_n, n = 0..nmax, scaled form.

    Returns (mant, acc, ln_y, sign_y) with y_n = mant[n]*exp(acc[n]).
    """
    mant = np.zeros(nmax + 1)
    acc = np.zeros(nmax + 1)
    mant[0] = -math.cos(t) / t
    if nmax >= 1:
        mant[1] = -math.cos(t) / (t * t) - math.sin(t) / t
    cur = 0.0
    yp = mant[0]
    yc = mant[1] if nmax >= 1 else 0.0
    for m in range(1, nmax):
        yn = (2 * m + 1) / t * yc - yp
        yp = yc
        yc = yn
        if abs(yc) > _BIG:
            yc *= _INV_BIG
            yp *= _INV_BIG
            cur += _LN_BIG
        mant[m + 1] = yc
        acc[m + 1] = cur
    ln_y = np.empty(nmax + 1)
    sign_y = np.empty(nmax + 1)
    for n in range(nmax + 1):
        if mant[n] == 0.0:
            ln_y[n] = -math.inf
            sign_y[n] = 0.0
        else:
            ln_y[n] = math.log(abs(mant[n])) + acc[n]
            sign_y[n] = 1.0 if mant[n] > 0 else -1.0
    return mant, acc, ln_y, sign_y


@maybe_njit
def legendre_tables(nmax, x, sin_theta):
    """Fully normalized associated Legendre tables on a batch of nodes.

    Returns (p, dp) of shape (n_idx, len(x)) where n_idx packs (n, m),
    m >= 0, as idx = n*(n+1)//2 + m.  `p` holds \\bar P_n^m(x) normalized so
    Y_n^m = p * exp(i m phi) is orthonormal on the sphere (Condon-Shortley
    phase included); `dp` holds d\\bar P_n^m/dtheta.  Nodes must satisfy
    sin_theta > 0.
    """
    npts = x.shape[0]
    nidx = (nmax + 1) * (nmax + 2) // 2
    p = np.zeros((nidx, npts))
    dp = np.zeros((nidx, npts))
    inv_sqrt4pi = 1.0 / math.sqrt(4.0 * math.pi)
    for q in range(npts):
        p[0, q] = inv_sqrt4pi
    for m in range(0, nmax + 1):
        im = m * (m + 1) // 2 + m
        if m > 0:
            prev = (m - 1) * m // 2 + (m - 1)
            c = -math.sqrt((2.0 * m + 1.0) / (2.0 * m))
            for q in range(npts):
                p[im, q] = c * sin_theta[q] * p[prev, q]
        for q in range(npts):
            dp[im, q] = m * x[q] * p[im, q] / sin_theta[q]
        if m + 1 <= nmax:
            i1 = (m + 1) * (m + 2) // 2 + m
            c1 = math.sqrt(2.0 * m + 3.0)
            e1 = math.sqrt((2.0 * m + 1.0) * (2.0 * m + 3.0) / (2.0 * m + 1.0))
            for q in range(npts):
                p[i1, q] = c1 * x[q] * p[im, q]
                dp[i1, q] = ((m + 1) * x[q] * p[i1, q] - e1 * p[im, q]) / sin_theta[q]
        for n in range(m + 2, nmax + 1):
            inm = n * (n + 1) // 2 + m
            in1 = (n - 1) * n // 2 + m
            in2 = (n - 2) * (n - 1) // 2 + m
            a = math.sqrt((4.0 * n * n - 1.0) / (n * n - m * m))
            a1 = math.sqrt((4.0 * (n - 1.0) ** 2 - 1.0) / ((n - 1.0) ** 2 - m * m))
            e = math.sqrt((n * n - m * m) * (2.0 * n + 1.0) / (2.0 * n - 1.0))
            for q in range(npts):
                p[inm, q] = a * (x[q] * p[in1, q] - p[in2, q] / a1)
                dp[inm, q] = (n * x[q] * p[inm, q] - e * p[in1, q]) / sin_theta[q]
    return p, dp


@maybe_njit
def kahan_dot(w, fr, fi, gr, gi):
    """Compensated sum of w * (f . conj(g)) over nodes and components.

    f, g are (nodes, 3) split into real/imag parts; returns (re, im).
    Kahan compensation keeps the result independent of evaluation order
    to ~1e-15 relative.
    """
    sr = 0.0
    si = 0.0
    cr = 0.0
    ci = 0.0
    n = w.shape[0]
    for q in range(n):
        tr = 0.0
        ti = 0.0
        for c in range(3):
            a = fr[q, c]
            b = fi[q, c]
            cc = gr[q, c]
            d = gi[q, c]
            tr += a * cc + b * d
            ti += b * cc - a * d
        tr *= w[q]
        ti *= w[q]
        yr = tr - cr
        t2 = sr + yr
        cr = (t2 - sr) - yr
        sr = t2
        yi = ti - ci
        t3 = si + yi
        ci = (t3 - si) - yi
        si = t3
    return sr, si
