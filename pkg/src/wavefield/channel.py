"""Wireless channel simulation and synthetic-aperture AoA estimation.

A moving receiver samples the complex channel from a static transmitter
along its trajectory; matched-filter (Bartlett) beamforming over the
trajectory's displacements turns the trace into a 2-D angle-of-arrival
profile. The concentration of that profile against an ideal reconstruction
gives the AoA uncertainty kappa.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import Pose, direction_vector

DEFAULT_WAVELENGTH = 0.002  # meters
DEFAULT_AZIMUTH_BINS = 360
DEFAULT_ZENITH_BINS = 90
# half-width of the uncertainty crop window, radians (10 deg square)
CROP_HALF_WIDTH = np.radians(5.0)


@dataclass(frozen=True)
class ChannelTrace:
    """Complex channel samples h(t) along a receiver trajectory."""

    samples: np.ndarray
    timestamps: np.ndarray
    wavelength: float
    local_poses: tuple

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=complex)
        t = np.asarray(self.timestamps, dtype=float)
        if not (len(s) == len(t) == len(self.local_poses)):
            raise ValueError("samples, timestamps, poses must have equal length")
        if len(s) < 2:
            raise ValueError("a trace needs at least 2 samples")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "timestamps", t)
        object.__setattr__(self, "local_poses", tuple(self.local_poses))
        s.setflags(write=False)
        t.setflags(write=False)

    def positions(self) -> np.ndarray:
        return np.array([p.translation for p in self.local_poses])


@dataclass(frozen=True)
class AoaProfile:
    """Beamforming power over a (azimuth, zenith) grid."""

    grid: np.ndarray
    azimuth_axis: np.ndarray
    zenith_axis: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        az = np.asarray(self.azimuth_axis, dtype=float)
        zen = np.asarray(self.zenith_axis, dtype=float)
        if g.shape != (len(az), len(zen)):
            raise ValueError("grid shape must be (len(azimuth), len(zenith))")
        if (g < 0).any():
            raise ValueError("profile magnitudes must be non-negative")
        for axis in (az, zen):
            d = np.diff(axis)
            if (d <= 0).any() or np.abs(d - d[0]).max() > 1e-9:
                raise ValueError("axes must be strictly increasing and uniform")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "azimuth_axis", az)
        object.__setattr__(self, "zenith_axis", zen)
        g.setflags(write=False)
        az.setflags(write=False)
        zen.setflags(write=False)


@dataclass(frozen=True)
class AoaEstimate:
    azimuth: float
    zenith: float
    kappa: float

    def __post_init__(self):
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")


def profile_axes(azimuth_bins: int, zenith_bins: int):
    """Bin-center axes: azimuth covers [0, 2pi), zenith [0, pi).

    Zenith uses k*pi/n bins so 90 deg is an exact center for even n;
    offset bins would put the horizontal plane on a knife edge between
    two mirror bins and make argmax results float-tie unstable.
    """
    az = np.arange(azimuth_bins) * (2 * np.pi / azimuth_bins)
    zen = np.arange(zenith_bins) * (np.pi / zenith_bins)
    return az, zen


def projected_displacement(positions: np.ndarray, azimuth, zenith) -> np.ndarray:
    """Antenna displacement projected on the incoming-wave propagation axis.

    The wave from direction (azimuth, zenith) propagates along -u, so the
    extra path at position p relative to the first sample is
    -(p - p0) . u. Shapes: positions (n, 3), angles broadcastable;
    returns (n, ...) path lengths in meters.
    """
    u = direction_vector(azimuth, zenith)
    disp = positions - positions[0]
    return -(disp @ np.swapaxes(np.atleast_2d(u), -1, -2)).reshape(
        (len(positions),) + np.shape(azimuth)
    )


def simulate_channel(
    tx_position,
    rx_trajectory,
    wavelength: float = DEFAULT_WAVELENGTH,
    phase_noise_std: float = 0.0,
    seed: int = 0,
    timestamps=None,
) -> ChannelTrace:
    """Ideal 1/d path-loss channel with optional Gaussian phase noise."""
    if wavelength <= 0:
        raise ValueError("wavelength must be positive")
    if phase_noise_std < 0:
        raise ValueError("phase_noise_std must be >= 0")
    tx = np.asarray(tx_position, dtype=float).reshape(3)
    positions = np.array([p.translation for p in rx_trajectory])
    d = np.linalg.norm(tx - positions, axis=1)
    if (d <= 1e-12).any():
        raise ValueError("trajectory passes through the transmitter")
    phase = -2.0 * np.pi * d / wavelength
    if phase_noise_std > 0:
        rng = np.random.default_rng(seed)
        phase = phase + rng.normal(0.0, phase_noise_std, size=len(d))
    samples = (1.0 / d) * np.exp(1j * phase)
    if timestamps is None:
        timestamps = np.arange(len(d), dtype=float)
    return ChannelTrace(samples, timestamps, wavelength, tuple(rx_trajectory))


def _check_aperture(positions: np.ndarray):
    if np.abs(positions - positions[0]).max() < 1e-12:
        raise ValueError("degenerate aperture: trajectory never moves")


class SteeringCache:
    """Precomputed steering phases for one trajectory/grid combination.

    The phase table is poses x bins and costs O(n_samples * n_bins) to
    build; reusing it makes repeated profiles (sweeps, reconstructions on
    the same scan) a single matrix product instead of a rebuild.
    """

    def __init__(self, positions, wavelength, azimuth_bins, zenith_bins):
        positions = np.asarray(positions, dtype=float)
        _check_aperture(positions)
        self.positions = positions
        self.wavelength = wavelength
        self.azimuth_axis, self.zenith_axis = profile_axes(azimuth_bins, zenith_bins)
        a, z = np.meshgrid(self.azimuth_axis, self.zenith_axis, indexing="ij")
        f = projected_displacement(positions, a.ravel(), z.ravel())
        self.matrix = np.exp(1j * (2.0 * np.pi / wavelength) * f)
        self.shape = (azimuth_bins, zenith_bins)

    def profile(self, samples: np.ndarray) -> AoaProfile:
        grid = np.abs(samples @ self.matrix) ** 2
        return AoaProfile(grid.reshape(self.shape), self.azimuth_axis, self.zenith_axis)


_steering_cache: dict = {}


def _steering_for(positions, wavelength, azimuth_bins, zenith_bins) -> SteeringCache:
    key = (positions.tobytes(), wavelength, azimuth_bins, zenith_bins)
    cached = _steering_cache.get(key)
    if cached is None:
        cached = SteeringCache(positions, wavelength, azimuth_bins, zenith_bins)
        # keep the cache from growing without bound across many trajectories
        if len(_steering_cache) >= 8:
            _steering_cache.pop(next(iter(_steering_cache)))
        _steering_cache[key] = cached
    return cached


def compute_profile(
    trace: ChannelTrace,
    azimuth_bins: int = DEFAULT_AZIMUTH_BINS,
    zenith_bins: int = DEFAULT_ZENITH_BINS,
) -> AoaProfile:
    """Bartlett beamforming power over the full direction grid.

    grid[i, j] = |sum_t h(t) exp(2 pi i / lambda * f(t, az_i, zen_j))|^2
    with f the projected displacement along the incoming-wave axis.
    """
    if azimuth_bins < 8 or zenith_bins < 8:
        raise ValueError("need at least 8 bins per axis")
    cache = _steering_for(trace.positions(), trace.wavelength, azimuth_bins, zenith_bins)
    return cache.profile(trace.samples)


def peak(profile: AoaProfile):
    """Bin-center angles of the global maximum.

    Ties broken by the smallest zenith index, then the smallest azimuth
    index, so a flat profile reports bin (0, 0).
    """
    grid = profile.grid
    flat = np.argwhere(grid == grid.max())
    order = np.lexsort((flat[:, 0], flat[:, 1]))
    ai, zi = flat[order[0]]
    return float(profile.azimuth_axis[ai]), float(profile.zenith_axis[zi])


def reconstruct_channel(
    poses,
    azimuth: float,
    zenith: float,
    wavelength: float = DEFAULT_WAVELENGTH,
    tolerance_noise_std: float = 0.5,
    seed: int = 0,
    timestamps=None,
) -> ChannelTrace:
    """Unit-magnitude channel that an ideal source at (azimuth, zenith) yields.

    Phases follow the projected displacement along the given direction plus
    Gaussian tolerance noise; beamforming the result peaks back at the input
    direction when the profile uses the same grid.
    """
    if tolerance_noise_std < 0:
        raise ValueError("tolerance_noise_std must be >= 0")
    positions = np.array([p.translation for p in poses])
    _check_aperture(positions)
    f = projected_displacement(positions, azimuth, zenith)
    phase = -2.0 * np.pi * f / wavelength
    if tolerance_noise_std > 0:
        rng = np.random.default_rng(seed)
        phase = phase + rng.normal(0.0, tolerance_noise_std, size=len(poses))
    if timestamps is None:
        timestamps = np.arange(len(poses), dtype=float)
    return ChannelTrace(np.exp(1j * phase), timestamps, wavelength, tuple(poses))


def _crop(profile: AoaProfile, azimuth: float, zenith: float) -> np.ndarray:
    az = profile.azimuth_axis
    zen = profile.zenith_axis
    d_az = np.abs(np.angle(np.exp(1j * (az - azimuth))))
    mask_az = d_az <= CROP_HALF_WIDTH + 1e-12
    mask_zen = np.abs(zen - zenith) <= CROP_HALF_WIDTH + 1e-12
    return profile.grid[np.ix_(mask_az, mask_zen)]


def aoa_uncertainty(measured: AoaProfile, reconstructed: AoaProfile, peak_angles) -> float:
    """Uncertainty kappa = 1 / sum(measured_hat * reconstructed_hat) over the crop.

    Both profiles are cropped to a 10x10 degree window centered at the peak
    (azimuth wraps, zenith clamps) and normalized to unit sum, so kappa is 1
    for two coincident delta-like profiles and grows as the measured profile
    decorrelates from the ideal reconstruction.
    """
    if (
        measured.grid.shape != reconstructed.grid.shape
        or np.abs(measured.azimuth_axis - reconstructed.azimuth_axis).max() > 1e-12
        or np.abs(measured.zenith_axis - reconstructed.zenith_axis).max() > 1e-12
    ):
        raise ValueError("profiles must share axes")
    azimuth, zenith = peak_angles
    cm = _crop(measured, azimuth, zenith)
    cr = _crop(reconstructed, azimuth, zenith)
    sm, sr = cm.sum(), cr.sum()
    if sm <= 0 or sr <= 0:
        raise ValueError("cropped profile has no energy")
    overlap = float(((cm / sm) * (cr / sr)).sum())
    return 1.0 / overlap


def estimate_aoa(
    trace: ChannelTrace,
    azimuth_bins: int = DEFAULT_AZIMUTH_BINS,
    zenith_bins: int = DEFAULT_ZENITH_BINS,
    tolerance_noise_std: float = 0.5,
    seed: int = 0,
) -> AoaEstimate:
    """Full AoA pipeline: profile, peak, reconstruction, uncertainty."""
    measured = compute_profile(trace, azimuth_bins, zenith_bins)
    azimuth, zenith = peak(measured)
    recon_trace = reconstruct_channel(
        trace.local_poses, azimuth, zenith, trace.wavelength, tolerance_noise_std, seed
    )
    reconstructed = compute_profile(recon_trace, azimuth_bins, zenith_bins)
    kappa = aoa_uncertainty(measured, reconstructed, (azimuth, zenith))
    return AoaEstimate(azimuth, zenith, kappa)


def scan_trajectory(
    center=(0.0, 0.0, 0.0),
    n_samples: int = 128,
    scale: float = 1.0,
    heading: float = 0.0,
) -> tuple:
    """Default antenna scan: a 3-D filled spiral plus two rings.

    The inner spiral fills the aperture (clean main lobe), the rings add a
    graded ladder of near-in sidelobes so AoA errors degrade progressively
    with channel noise rather than jumping straight from one bin to a random
    direction; the z modulation breaks the planar mirror degeneracy. About
    84 mm across at scale 1.
    """
    n_ring1 = int(round(n_samples * 0.2))
    n_ring2 = int(round(n_samples * 0.3))
    n_spiral = n_samples - n_ring1 - n_ring2
    if n_spiral < 4:
        raise ValueError("scan needs at least 8 samples")
    z_amp = 0.02 * scale

    s = np.linspace(0.0, 1.0, n_spiral)
    r = (0.010 + 0.014 * s) * scale
    a = 2.0 * np.pi * 2.0 * s
    spiral = np.stack(
        [r * np.cos(a), r * np.sin(a), z_amp * np.sin(2.0 * np.pi * 3.0 * s)], axis=-1
    )
    b1 = np.linspace(0.0, 2.0 * np.pi, n_ring1, endpoint=False)
    ring1 = np.stack(
        [0.028 * scale * np.cos(b1), 0.028 * scale * np.sin(b1), z_amp * np.sin(3.0 * b1 + 1.0)],
        axis=-1,
    )
    b2 = np.linspace(0.0, 2.0 * np.pi, n_ring2, endpoint=False)
    ring2 = np.stack(
        [0.042 * scale * np.cos(b2), 0.042 * scale * np.sin(b2), z_amp * np.sin(3.0 * b2)],
        axis=-1,
    )
    from .geometry import rot_z

    rot = rot_z(heading)
    points = np.concatenate([spiral, ring1, ring2], axis=0)
    points = points @ rot.T + np.asarray(center, dtype=float)
    return tuple(Pose(rot, p) for p in points)
