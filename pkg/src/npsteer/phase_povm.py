"""Phase-difference POVM densities, Monte-Carlo sampling, and estimators.

Densities live on K uniformly spaced angles in [-pi, pi). Because every
density here is a trigonometric polynomial of degree at most the cutoff,
the rectangle (= periodic trapezoidal) rule is exact once K exceeds the
Nyquist bound 2 * (cutoff + 1); constructors enforce that bound.

Sampling uses counter-based Philox streams: shot i consumes exactly the
four uniforms of counter block ``start_shot + i``, so parallel batches
split by ``start_shot`` reproduce the sequential stream exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .fock import PureTwoModeState, SectorMixture, SectorState, State

TWO_PI = 2.0 * math.pi
DENSITY_NORM_TOL = 1e-8
NEGATIVE_CLIP_TOL = -1e-14
MIN_GRID = 64
MIN_SAMPLING_GRID = 256
DEFAULT_BOOTSTRAP_RESAMPLES = 200


def nyquist_minimum(cutoff: int) -> int:
    """Smallest grid size that integrates degree-(cutoff+1) moments exactly."""
    return 2 * (cutoff + 1)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1)).bit_length()


def default_grid_size(cutoff: int, floor: int = MIN_GRID) -> int:
    return max(floor, _next_pow2(4 * (cutoff + 1)))


def _validate_grid(grid_size: int, cutoff: int, floor: int = MIN_GRID) -> int:
    k = int(grid_size)
    minimum = max(floor, nyquist_minimum(cutoff))
    if k < minimum or k % 2:
        raise ValueError(
            f"grid size {grid_size} invalid: need an even K >= {minimum} "
            f"(floor {floor}, Nyquist bound {nyquist_minimum(cutoff)} at cutoff {cutoff})"
        )
    return k


def phase_grid(grid_size: int) -> np.ndarray:
    return -math.pi + TWO_PI * np.arange(grid_size) / grid_size


def wrap_angle(x: np.ndarray | float):
    """Map angles into the principal interval [-pi, pi)."""
    return (x + math.pi) % TWO_PI - math.pi


@dataclass(frozen=True)
class PhaseDensity:
    """Probability density of one angle on the canonical uniform grid."""

    phis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if phis.ndim != 1 or phis.shape != values.shape or len(phis) < 2:
            raise ValueError("phis and values must be equal-length 1-d arrays")
        k = len(phis)
        if not np.allclose(phis, phase_grid(k), atol=1e-12, rtol=0):
            raise ValueError("phis must be the canonical uniform grid on [-pi, pi)")
        if float(values.min()) < NEGATIVE_CLIP_TOL:
            raise ValueError(f"density has negative values below {NEGATIVE_CLIP_TOL}")
        values = np.clip(values, 0.0, None)
        total = float(values.sum()) * (TWO_PI / k)
        if abs(total - 1.0) > DENSITY_NORM_TOL:
            raise ValueError(f"density integrates to {total!r}, not 1")
        phis = phis.copy()
        values = values.copy()
        phis.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return len(self.phis)

    @property
    def spacing(self) -> float:
        return TWO_PI / len(self.phis)

    def integrate(self) -> float:
        return float(self.values.sum()) * self.spacing

    def moment(self, order: int = 1) -> complex:
        """Trigonometric moment <e^{i order phi}> under the density."""
        return complex(np.sum(np.exp(1j * order * self.phis) * self.values) * self.spacing)


@dataclass(frozen=True)
class JointPhaseDensity:
    """Joint density of the two local angles on a K x K canonical grid."""

    phis: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        values = np.asarray(self.values, dtype=float)
        k = len(phis)
        if values.shape != (k, k):
            raise ValueError(f"values must be ({k}, {k}), got {values.shape}")
        if float(values.min()) < NEGATIVE_CLIP_TOL:
            raise ValueError("joint density has negative values")
        values = np.clip(values, 0.0, None)
        phis = phis.copy()
        values = values.copy()
        phis.flags.writeable = False
        values.flags.writeable = False
        object.__setattr__(self, "phis", phis)
        object.__setattr__(self, "values", values)

    @property
    def grid_size(self) -> int:
        return len(self.phis)

    @property
    def spacing(self) -> float:
        return TWO_PI / len(self.phis)

    def integrate(self) -> float:
        return float(self.values.sum()) * self.spacing**2


def _sector_profile(amps: np.ndarray, grid_size: int) -> np.ndarray:
    """|sum_m a_m e^{-i m phi}|^2 on the canonical grid, via FFT."""
    m = np.arange(len(amps))
    signed = amps * np.where(m % 2 == 0, 1.0, -1.0)
    z = np.fft.fft(signed, n=grid_size)
    return np.abs(z) ** 2


def relative_phase_density(state: State, grid_size: int | None = None) -> PhaseDensity:
    """Density of the phase difference under the number-resolved phase POVM.

    Built sector by sector: p(phi) = (1/2pi) sum_N |sum_m c_{m,N-m} e^{-i m phi}|^2.
    """
    cutoff = state.cutoff
    k = default_grid_size(cutoff) if grid_size is None else _validate_grid(grid_size, cutoff)
    acc = np.zeros(k)
    if isinstance(state, PureTwoModeState):
        for total in range(2 * cutoff + 1):
            amps = state.sector_amplitudes(total)
            if not np.any(amps):
                continue
            acc += _sector_profile(amps, k)
    else:
        for _, w, sector in state.iter_sectors():
            if w == 0.0:
                continue
            acc += w * _sector_profile(sector.amps, k)
    return PhaseDensity(phase_grid(k), acc / TWO_PI)


def joint_local_phase_density(
    state: PureTwoModeState, grid_size: int | None = None
) -> JointPhaseDensity:
    """Joint density of the two local phases for a pure grid state.

    p(phi1, phi2) = |sum_{m,n} c[m,n] e^{-i(m phi1 + n phi2)}|^2 / (2 pi)^2.
    """
    if not isinstance(state, PureTwoModeState):
        raise ValueError("joint local phase density is defined for pure grid states")
    cutoff = state.cutoff
    k = default_grid_size(cutoff) if grid_size is None else _validate_grid(grid_size, cutoff)
    m = np.arange(cutoff + 1)
    sign = np.where(m % 2 == 0, 1.0, -1.0)
    signed = state.coeffs * sign[:, None] * sign[None, :]
    amp = np.fft.fft2(signed, s=(k, k))
    return JointPhaseDensity(phase_grid(k), np.abs(amp) ** 2 / TWO_PI**2)


def relative_marginal_from_joint(joint: JointPhaseDensity) -> PhaseDensity:
    """Integrate the joint density along phi2 at fixed difference phi1 - phi2."""
    k = joint.grid_size
    j = np.arange(k)
    rows = (j[None, :] + j[:, None] - k // 2) % k  # rows[d, j] = index of phi1 = delta_d + phi_j
    values = joint.values[rows, j[None, :]].sum(axis=1) * joint.spacing
    return PhaseDensity(joint.phis, values)


class DispersionEstimate(NamedTuple):
    d2_hat: float
    std_error: float
    shots: int
    method: str
    resamples: int


@dataclass(frozen=True)
class SampleSet:
    """Angles measured in one mode, with the stream coordinates that made them."""

    phis: np.ndarray
    shots: int
    seed: int
    start_shot: int = 0

    def __post_init__(self):
        phis = np.asarray(self.phis, dtype=float)
        if phis.shape != (self.shots,):
            raise ValueError(f"expected {self.shots} angles, got shape {phis.shape}")
        if len(phis) and (phis.min() < -math.pi or phis.max() >= math.pi):
            raise ValueError("angles must lie in [-pi, pi)")
        phis = phis.copy()
        phis.flags.writeable = False
        object.__setattr__(self, "phis", phis)


def _shot_uniforms(seed: int, start_shot: int, shots: int) -> np.ndarray:
    """Uniforms for shots [start_shot, start_shot + shots), 4 per shot.

    Philox emits exactly four doubles per counter block, so block i is shot i
    regardless of how the run is batched.
    """
    bitgen = np.random.Philox(key=seed, counter=start_shot)
    return np.random.Generator(bitgen).random((shots, 4))


def _padded_cdf(masses: np.ndarray) -> np.ndarray:
    out = np.empty(len(masses) + 1)
    out[0] = 0.0
    np.cumsum(masses, out=out[1:])
    return out


def _invert_cells(cdf: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Cell index and intra-cell fraction for uniforms against a padded CDF."""
    idx = np.clip(np.searchsorted(cdf, u, side="right") - 1, 0, len(cdf) - 2)
    width = cdf[idx + 1] - cdf[idx]
    frac = np.where(width > 0, (u - cdf[idx]) / np.where(width > 0, width, 1.0), 0.5)
    return idx, np.clip(frac, 0.0, 1.0 - 1e-12)


def _cells_to_angles(phis: np.ndarray, spacing: float, idx: np.ndarray, frac: np.ndarray):
    return wrap_angle(phis[idx] + (frac - 0.5) * spacing)


def _sample_pure(state: PureTwoModeState, u1, u2, grid_size):
    joint = joint_local_phase_density(state, grid_size)
    k = joint.grid_size
    mass = joint.values * joint.spacing**2
    row_mass = mass.sum(axis=1)
    idx1, frac1 = _invert_cells(_padded_cdf(row_mass), u1)
    phi1 = _cells_to_angles(joint.phis, joint.spacing, idx1, frac1)
    phi2 = np.empty_like(phi1)
    order = np.argsort(idx1, kind="stable")
    sorted_rows = idx1[order]
    cuts = np.flatnonzero(np.diff(sorted_rows)) + 1
    for group in np.split(order, cuts):
        row = int(idx1[group[0]])
        col_cdf = _padded_cdf(mass[row] / row_mass[row])
        idx2, frac2 = _invert_cells(col_cdf, u2[group])
        phi2[group] = _cells_to_angles(joint.phis, joint.spacing, idx2, frac2)
    return phi1, phi2


def _sample_sector(sector: SectorState, u_delta, u_sum, grid_size):
    """Sample a fixed-total sector state.

    Within a sector the joint density depends on the angles only through
    their difference, p(phi1, phi2) = q(phi1 - phi2) / 2pi with q the
    relative density, so the difference is drawn by inverse CDF of q and
    the second angle independently uniform; (delta + phi2, phi2) then has
    exactly the sector's joint law.
    """
    k = (
        default_grid_size(sector.total, floor=MIN_SAMPLING_GRID)
        if grid_size is None
        else grid_size
    )
    profile = _sector_profile(sector.amps, k)
    masses = profile / profile.sum()
    phis = phase_grid(k)
    idx, frac = _invert_cells(_padded_cdf(masses), u_delta)
    delta = _cells_to_angles(phis, TWO_PI / k, idx, frac)
    phi2 = -math.pi + u_sum * TWO_PI
    return wrap_angle(delta + phi2), phi2


def sample_local_phases(
    state: State,
    shots: int,
    seed: int,
    grid_size: int | None = None,
    start_shot: int = 0,
) -> tuple[SampleSet, SampleSet]:
    """Draw (phi1, phi2) pairs from the joint local-phase density.

    Pure states are sampled by inverse CDF on the joint grid, marginal in
    phi1 then conditional in phi2; mixtures first draw a sector from the
    weights. Fixed seed gives identical output; batches taken with
    ``start_shot`` partition the sequential run exactly.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if seed < 0 or start_shot < 0:
        raise ValueError("seed and start_shot must be non-negative integers")
    if grid_size is not None:
        grid_size = _validate_grid(grid_size, state.cutoff, floor=MIN_SAMPLING_GRID)
    u = _shot_uniforms(seed, start_shot, shots)
    if isinstance(state, PureTwoModeState):
        k = grid_size if grid_size is not None else default_grid_size(
            state.cutoff, floor=MIN_SAMPLING_GRID
        )
        phi1, phi2 = _sample_pure(state, u[:, 0], u[:, 1], k)
    else:
        weight_cdf = _padded_cdf(state.weights())
        sector_idx = np.clip(
            np.searchsorted(weight_cdf, u[:, 0], side="right") - 1,
            0,
            len(state.sectors) - 1,
        )
        phi1 = np.empty(shots)
        phi2 = np.empty(shots)
        order = np.argsort(sector_idx, kind="stable")
        sorted_sectors = sector_idx[order]
        cuts = np.flatnonzero(np.diff(sorted_sectors)) + 1
        for group in np.split(order, cuts):
            sector = state.sectors[int(sector_idx[group[0]])][2]
            p1, p2 = _sample_sector(sector, u[group, 1], u[group, 2], grid_size)
            phi1[group] = p1
            phi2[group] = p2
    return (
        SampleSet(phi1, shots, seed, start_shot),
        SampleSet(phi2, shots, seed, start_shot),
    )


def estimate_relative_dispersion(
    samples1: SampleSet,
    samples2: SampleSet,
    method: str = "bootstrap",
    resamples: int = DEFAULT_BOOTSTRAP_RESAMPLES,
    seed: int | None = None,
) -> DispersionEstimate:
    """Plug-in estimate of the relative phase dispersion with a resampling error bar.

    d2_hat = 1 - |mean e^{i(phi1 - phi2)}|^2. The plug-in estimator carries a
    bias of about -d2/shots (so -1/shots for a flat density); the standard
    error comes from a nonparametric bootstrap (default) or the jackknife.
    The bootstrap stream is derived deterministically from the sample seeds
    unless an explicit seed is given.
    """
    if samples1.shots != samples2.shots:
        raise ValueError("sample sets must have equal shot counts")
    n = samples1.shots
    if n < 2:
        raise ValueError("need at least 2 shots to estimate a dispersion")
    z = np.exp(1j * (samples1.phis - samples2.phis))
    d2_hat = 1.0 - abs(complex(z.mean())) ** 2
    if method == "bootstrap":
        if resamples < 2:
            raise ValueError("bootstrap needs at least 2 resamples")
        if seed is None:
            ss = np.random.SeedSequence((samples1.seed, samples2.seed, n, 0xD157))
        else:
            ss = np.random.SeedSequence(seed)
        rng = np.random.Generator(np.random.PCG64(ss))
        vals = np.empty(resamples)
        for i in range(resamples):
            idx = rng.integers(0, n, n)
            vals[i] = 1.0 - abs(complex(z[idx].mean())) ** 2
        err = float(vals.std(ddof=1))
    elif method == "jackknife":
        total = complex(z.sum())
        loo = (total - z) / (n - 1)
        d2_loo = 1.0 - np.abs(loo) ** 2
        err = math.sqrt((n - 1) / n * float(np.sum((d2_loo - d2_loo.mean()) ** 2)))
        resamples = 0
    else:
        raise ValueError(f"unknown method {method!r}; use 'bootstrap' or 'jackknife'")
    return DispersionEstimate(float(d2_hat), err, n, method, resamples)


def linear_phase_variance(density: PhaseDensity) -> float:
    """Ordinary variance of the angle after re-centering at the circular mean.

    The deviation delta = wrap(phi - mu) is treated as a real variable on
    [-pi, pi); a flat density gives pi^2 / 3. The integrand is not
    band-limited, so this carries an O(h^2) grid error, unlike the
    trigonometric moments.
    """
    m1 = density.moment(1)
    mu = math.atan2(m1.imag, m1.real) if abs(m1) > 1e-15 else 0.0
    delta = wrap_angle(density.phis - mu)
    h = density.spacing
    mean = float(np.sum(delta * density.values)) * h
    second = float(np.sum(delta * delta * density.values)) * h
    return second - mean * mean


def write_samples_csv(path, samples1: SampleSet, samples2: SampleSet) -> None:
    """Write paired samples as CSV rows (shot_index, phi1, phi2)."""
    if samples1.shots != samples2.shots or samples1.start_shot != samples2.start_shot:
        raise ValueError("sample sets must be aligned")
    start = samples1.start_shot
    with open(path, "w", newline="") as fh:
        fh.write("shot_index,phi1,phi2\n")
        fh.writelines(
            f"{start + i},{a!r},{b!r}\n"
            for i, (a, b) in enumerate(zip(samples1.phis.tolist(), samples2.phis.tolist()))
        )


def write_density_csv(path, density: PhaseDensity) -> None:
    """Write a phase density as CSV rows (phi, p)."""
    with open(path, "w", newline="") as fh:
        fh.write("phi,p\n")
        fh.writelines(
            f"{phi!r},{val!r}\n"
            for phi, val in zip(density.phis.tolist(), density.values.tolist())
        )
