"""Reconstruction pipeline: sampling grids on |z| = R, per-pair indicator
classification with per-center monotone cleanup, and the target as the
intersection of accepted test balls on a voxel grid."""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError
from .harmonics import TangentialField, analyze
from .indicator import (IndicatorCurve, TruncationPolicy, data_order_cap,
                        indicator_partials)
from .mie import (BallSpectrum, TestBall, eigenvalue_guard,
                  impedance_ball_spectrum, pec_ball_spectrum)


@dataclass(frozen=True)
class SamplingGrid:
    """Centers on the sphere |z| = R and a strictly increasing h grid."""

    R: float
    centers: np.ndarray  # (N_z, 3)
    radii: np.ndarray    # (N_h,)

    @property
    def h_step(self) -> float:
        return float(self.radii[1] - self.radii[0]) if len(self.radii) > 1 else float(self.radii[0])


def fibonacci_sphere(n: int) -> np.ndarray:
    """Deterministic quasi-uniform unit vectors (golden-angle lattice)."""
    if n == 1:
        return np.array([[0.0, 0.0, 1.0]])
    i = np.arange(n)
    zc = 1.0 - 2.0 * (i + 0.5) / n
    rad = np.sqrt(1.0 - zc**2)
    ga = math.pi * (3.0 - math.sqrt(5.0))
    return np.stack([rad * np.cos(ga * i), rad * np.sin(ga * i), zc], axis=1)


def make_grid(R: float, N_z: int, N_h: int) -> SamplingGrid:
    """Centers z_j on |z| = R (Fibonacci lattice), radii uniform in
    [R/N_h, 2R)."""
    if R <= 0:
        raise DomainError("enclosing radius must be positive")
    if N_z < 1 or N_h < 1:
        raise DomainError("N_z and N_h must be positive")
    centers = R * fibonacci_sphere(N_z)
    h_min = R / N_h
    radii = h_min + np.arange(N_h) * (2.0 * R - h_min) / N_h
    return SamplingGrid(R=R, centers=centers, radii=radii)


@dataclass
class ReconResult:
    grid: SamplingGrid
    k: float
    ball_kind: str
    accepted: list          # list of (TestBall, slope)
    critical_radius: np.ndarray   # per center; inf when nothing accepted
    occupancy: np.ndarray   # (res, res, res) bool over [-R, R]^3
    res: int
    skipped: list = field(default_factory=list)   # guard-flagged (z_idx, h)
    curves: dict = field(default_factory=dict)    # (z_idx, h_idx) -> IndicatorCurve
    flags: list = field(default_factory=list)

    def voxel_size(self) -> float:
        return 2.0 * self.grid.R / self.res

    def voxel_centers_axis(self) -> np.ndarray:
        R = self.grid.R
        return -R + (np.arange(self.res) + 0.5) * self.voxel_size()


def _spectrum_for(kind: str, k: float, h: float, lam, N: int) -> BallSpectrum:
    if kind == "pec":
        return pec_ball_spectrum(k, h, N)
    if kind == "impedance":
        return impedance_ball_spectrum(k, h, lam, N)
    raise DomainError(f"unknown ball kind {kind!r}")


def reconstruct(w_inf: TangentialField, k: float, grid: SamplingGrid,
                ball_kind: str = "pec", policy: TruncationPolicy | None = None,
                lam: float | None = None, res: int = 128,
                keep_curves: bool = False,
                accept_level: float | None = None) -> ReconResult:
    """Table-1 sweep: classify every (z_j, h_i), clean up monotonically per
    center, and intersect the accepted balls on a voxel grid.

    Guard-flagged (k, h) pairs are skipped (not perturbed) and recorded.
    The modal analysis is done once per center and shared across the
    h-sweep; the per-center truncation respects the data's numerical rank.

    `accept_level` refines the per-center transition: acceptance starts at
    the first h whose trailing slope falls below this level (the h-scan
    crossing of the blow-up transition), which locates the critical radius
    to sub-window accuracy; by construction it is never later than the
    first Bounded classification.  With None, acceptance starts at the
    first raw Bounded pair.
    """
    policy = policy or TruncationPolicy()
    # spectra and guard per h (shared across centers)
    spectra: dict[int, BallSpectrum] = {}
    skipped = []
    for ih, h in enumerate(grid.radii):
        if ball_kind == "pec" and not eigenvalue_guard(k, h, policy.N_max).ok():
            skipped.append(ih)
            continue
        spectra[ih] = _spectrum_for(ball_kind, k, h, lam, policy.N_max)

    n_z = len(grid.centers)
    critical = np.full(n_z, np.inf)
    accepted = []
    curves = {}
    skipped_pairs = []
    zero_data = not np.any(np.abs(w_inf.values) > 0)
    for iz, z in enumerate(grid.centers):
        coeffs = analyze(w_inf, z, k, policy.N_max)
        cap = data_order_cap(coeffs, snr=policy.snr_cap)
        state = []
        for ih, h in enumerate(grid.radii):
            if ih not in spectra:
                skipped_pairs.append((iz, ih))
                state.append(None)
                continue
            curve = indicator_partials(w_inf, TestBall(z=z, h=h), spectra[ih],
                                       policy, coeffs=coeffs, order_cap=cap)
            state.append(curve)
            if keep_curves:
                curves[(iz, ih)] = curve
        # monotone cleanup: once Bounded, everything above is Bounded
        first = next((j for j, c in enumerate(state)
                      if c is not None and c.classification == "Bounded"), None)
        if accept_level is not None:
            crossing = next((j for j, c in enumerate(state)
                             if c is not None and np.isfinite(c.slope)
                             and c.slope < accept_level), None)
            if crossing is not None and (first is None or crossing < first):
                first = crossing
        if first is not None:
            for j in range(first, len(state)):
                if state[j] is not None:
                    state[j].classification = "Bounded"
            critical[iz] = grid.radii[first]
            for j in range(first, len(state)):
                if state[j] is not None:
                    accepted.append((TestBall(z=z, h=float(grid.radii[j])),
                                     state[j].slope))
    if zero_data:
        flags = ["DegenerateData"]
    else:
        flags = []

    occupancy = _voxelize(grid, critical, res)
    return ReconResult(grid=grid, k=k, ball_kind=ball_kind, accepted=accepted,
                       critical_radius=critical, occupancy=occupancy, res=res,
                       skipped=skipped_pairs, curves=curves, flags=flags)


def _voxelize(grid: SamplingGrid, critical: np.ndarray, res: int) -> np.ndarray:
    """Pointwise AND over accepted balls; per center the intersection of the
    accepted (nested) balls is the smallest one."""
    R = grid.R
    ax = -R + (np.arange(res) + 0.5) * (2.0 * R / res)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    occ = np.ones((res, res, res), dtype=bool)
    any_accept = False
    for z, h in zip(grid.centers, critical):
        if not np.isfinite(h):
            continue
        any_accept = True
        d2 = (X - z[0]) ** 2 + (Y - z[1]) ** 2 + (Z - z[2]) ** 2
        occ &= d2 <= h * h
    if not any_accept:
        occ[:] = False
    return occ


def export_result(res: "ReconResult", path) -> None:
    """Write the JSON ball list + voxel grid (formats owned by fileio)."""
    from .fileio import write_recon_file

    write_recon_file(res, path)
