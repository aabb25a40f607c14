"""The test-ball indicator functional: eigenvalue-weighted modal energy of
a far-field pattern, its truncated partial sums, and the bounded/divergent
classification.

    I(z, h) = (1/4pi) sum_{n>=1} sum_m ( |<w, Ut^{(z)}_{m,n}>|^2 / |u_n^{(h)}|
                                       + |<w, Vt^{(z)}_{m,n}>|^2 / |v_n^{(h)}| )

The series starts at n = 1: the n = 0 vector basis is undefined
(Grad Y_0^0 = 0), matching the far-field expansion.  All sums are
accumulated in log space because 1/|u_n|, 1/|v_n| overflow float64 once
n is moderately beyond kh.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .harmonics import TangentialField, analyze, mode_index
from .mie import BallSpectrum, TestBall
from . import specfun

LOG_4PI = math.log(4.0 * math.pi)


@dataclass(frozen=True)
class TruncationPolicy:
    """Truncation and classification parameters.

    noise_floor is the relative data-noise level delta (the spectral cutoff
    keeps only orders with min(|u_n|, |v_n|) > delta^2); growth_threshold
    (tau) is the log-slope above which the trailing window is called
    Divergent, and slopes below tau/bounded_band qualify as Bounded.  The
    defaults keep the tau vs tau/4 band; calibrated profiles for desk-scale
    sweeps come from recommended_policy().
    """

    N_max: int = 60
    noise_floor: float = 0.0
    growth_threshold: float = 0.1
    window: int = 8
    bounded_band: float = 4.0
    snr_cap: float = 10.0

    def __post_init__(self):
        if self.N_max > specfun.N_MAX_ORDER:
            raise DomainError(f"N_max {self.N_max} exceeds cap {specfun.N_MAX_ORDER}")
        if self.window >= self.N_max:
            raise DomainError("window must be smaller than N_max")
        if self.bounded_band < 1.0:
            raise DomainError("bounded_band must be >= 1")


@dataclass
class IndicatorCurve:
    """Truncated indicator partial sums for one test ball."""

    ball: TestBall
    orders: np.ndarray        # 1..N
    log_partials: np.ndarray  # ln I_N (log space; -inf for exactly zero data)
    classification: str = "Undetermined"
    slope: float = float("nan")

    @property
    def partials(self) -> np.ndarray:
        """I_N as floats (inf where the log representation overflows)."""
        with np.errstate(over="ignore"):
            return np.exp(self.log_partials)


def select_truncation(k: float, h: float, noise_delta: float,
                      spectrum: BallSpectrum, cap: int | None = None) -> int:
    """Largest N with min(|u_N|, |v_N|) > noise_delta^2 (discrepancy-style
    cutoff), capped by the policy order."""
    if noise_delta < 0:
        raise DomainError("noise_delta must be nonnegative")
    nmax = spectrum.N if cap is None else min(cap, spectrum.N)
    if noise_delta == 0.0:
        return nmax
    log_cut = 2.0 * math.log(noise_delta)
    n_sel = 0
    for n in range(1, nmax + 1):
        if min(spectrum.log_abs_u[n], spectrum.log_abs_v[n]) > log_cut:
            n_sel = n
        else:
            break
    return max(n_sel, 1)


def _logsumexp(vals: np.ndarray) -> float:
    hi = np.max(vals)
    if not np.isfinite(hi):
        return -math.inf if hi == -math.inf else hi
    return float(hi + np.log(np.sum(np.exp(vals - hi))))


def order_energies(coeffs) -> np.ndarray:
    """Per-order modal energy E_n = sum_m (|cU_nm|^2 + |cV_nm|^2), n = 1..N."""
    out = np.empty(coeffs.N)
    for n in range(1, coeffs.N + 1):
        sl = slice(mode_index(n, -n), mode_index(n, n) + 1)
        out[n - 1] = float(np.sum(np.abs(coeffs.cu[sl]) ** 2)
                           + np.sum(np.abs(coeffs.cv[sl]) ** 2))
    return out


def data_order_cap(coeffs, snr: float = 10.0) -> int:
    """Largest order whose modal energy sits above the data's numerical
    noise plateau by snr^2 (regularization against the coefficient floor:
    orders at the floor would be amplified without bound by 1/|u_n|,
    1/|v_n| and corrupt the blow-up classification)."""
    e = order_energies(coeffs)
    n = len(e)
    if n < 6:
        return n
    # plateau detection: the trailing orders of noisy/rounded data flatten
    tail = e[-3:]
    if np.min(tail) <= 0.0:
        return n
    if np.max(e[-5:-2]) > 16.0 * np.max(tail):
        return n  # still decaying at the end: no visible floor
    floor = float(np.median(e[max(0, n - 5):]))
    above = np.nonzero(e > snr**2 * floor)[0]
    if len(above) == 0:
        return n
    return int(above[-1]) + 1


def indicator_partials(w_inf: TangentialField, ball: TestBall,
                       spectrum: BallSpectrum, policy: TruncationPolicy,
                       coeffs=None, order_cap: int | None = None) -> IndicatorCurve:
    """Partial sums I_1..I_N of the indicator at (z, h) plus classification.

    `coeffs` may carry a precomputed analysis at the ball center (reused
    across the h-sweep: the modal coefficients do not depend on h); when
    absent the data is analyzed here and truncated at its numerical rank
    (data_order_cap) so floor-level orders never enter the sums.
    """
    if abs(spectrum.h - ball.h) > 1e-12 * max(1.0, ball.h):
        raise DomainError("spectrum radius does not match the test ball")
    n_use = select_truncation(spectrum.k, ball.h, policy.noise_floor, spectrum,
                              cap=policy.N_max)
    # keep at least window+1 orders so the trailing slope is defined; this
    # only binds at kh small against every data scale, where any unexplained
    # modal energy diverges immediately
    n_use = min(max(n_use, policy.window + 1), policy.N_max, spectrum.N)
    if coeffs is None:
        coeffs = analyze(w_inf, ball.z, spectrum.k, min(policy.N_max, spectrum.N))
        order_cap = data_order_cap(coeffs, snr=policy.snr_cap)
    else:
        if np.linalg.norm(np.asarray(coeffs.center) - ball.z) > 1e-12:
            raise DomainError("precomputed coefficients centered elsewhere")
    if order_cap is not None:
        n_use = min(n_use, order_cap, coeffs.N)
    log_terms = np.empty(n_use)
    with np.errstate(divide="ignore"):
        for n in range(1, n_use + 1):
            sl = slice(mode_index(n, -n), mode_index(n, n) + 1)
            su = _log_abs2_sum(coeffs.cu[sl])
            sv = _log_abs2_sum(coeffs.cv[sl])
            a = su - spectrum.log_abs_u[n]
            b = sv - spectrum.log_abs_v[n]
            log_terms[n - 1] = np.logaddexp(a, b) - LOG_4PI
    log_partials = np.logaddexp.accumulate(log_terms)
    curve = IndicatorCurve(ball=ball, orders=np.arange(1, n_use + 1),
                           log_partials=log_partials)
    curve.classification = classify(curve, policy)
    return curve


def _log_abs2_sum(c: np.ndarray) -> float:
    a2 = np.abs(c)
    hi = np.max(a2)
    if hi == 0.0:
        return -math.inf
    return 2.0 * math.log(hi) + math.log(np.sum((a2 / hi) ** 2))


def classify(curve: IndicatorCurve, policy: TruncationPolicy) -> str:
    """Trailing log-slope dichotomy.

    Divergent if the least-squares slope of ln I_N over the trailing window
    exceeds tau; Bounded if the slope is below tau/4 and the trailing
    relative increment is below the noise-adjusted floor; else Undetermined.
    The window shrinks for curves truncated below 2*window orders.
    """
    if policy.N_max < 2 * policy.window:
        raise DomainError("policy requires N_max >= 2*window")
    logp = curve.log_partials
    n = len(logp)
    if not np.any(np.isfinite(logp)):
        curve.slope = 0.0
        return "Bounded"  # identically zero data
    w = min(policy.window, n - 1)
    if w < 1:
        return "Undetermined"
    tau = policy.growth_threshold
    tail = logp[n - w - 1:]
    xs = curve.orders[n - w - 1:].astype(float)
    if not np.all(np.isfinite(tail)):
        curve.slope = 0.0
        return "Bounded"
    slope = float(np.polyfit(xs, tail, 1)[0])
    curve.slope = slope
    if slope > tau:
        return "Divergent"
    # trailing relative increment: 1 - I_{N-w}/I_N; the floor is the
    # increment level consistent with a slope at the Bounded gate
    tau_b = tau / policy.bounded_band
    rel_inc = 1.0 - math.exp(logp[n - 1 - w] - logp[n - 1])
    inc_floor = 1.5 * tau_b * w
    if slope < tau_b and rel_inc < inc_floor:
        return "Bounded"
    return "Undetermined"
