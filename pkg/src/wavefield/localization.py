"""Range+AoA fusion into inter-robot extrinsics and loss weights.

A wireless measurement carries a UWB-style range (Gaussian, std sigma) and
an AoA estimate (azimuth/zenith with uncertainty kappa). Together they fix
the peer's position in the anchor frame; reciprocal AoA fixes the relative
yaw. The error ellipse of the implied position feeds a sigmoid loss weight
so badly-localized frames count less during radiance-field training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import i0e

from .channel import AoaEstimate
from .geometry import Pose, RigidTransform, compose, direction_vector, rot_z

DEFAULT_STALENESS_HORIZON = 30.0  # seconds


@dataclass(frozen=True)
class WirelessMeasurement:
    """One range+AoA observation of target_robot made by source_robot.

    Angles are bearings in each robot's body frame at measurement time:
    aoa.azimuth/zenith locate the target as seen by the source, and
    peer_azimuth is the reciprocal bearing (the target observing the
    source, in the target's body frame). The reciprocal bearing is what
    fixes the relative yaw, since range and one AoA only constrain
    translation.
    """

    range: float
    range_std: float
    aoa: AoaEstimate
    source_robot: str
    target_robot: str
    timestamp: float
    peer_azimuth: float = 0.0

    def __post_init__(self):
        if self.range <= 0:
            raise ValueError("range must be positive")
        if self.range_std <= 0:
            raise ValueError("range_std must be positive")


@dataclass(frozen=True)
class UncertaintyEllipse:
    semi_major: float
    semi_minor: float
    ci: float
    scale: float
    area: float

    def __post_init__(self):
        if not self.semi_major >= self.semi_minor > 0:
            raise ValueError("require a >= b > 0")


@dataclass(frozen=True)
class WeightedFrame:
    """A training image with its world pose, loss weight, and provenance."""

    image_id: str
    pose: Pose
    weight: float
    ellipse: Optional[UncertaintyEllipse] = None

    def __post_init__(self):
        if not 0.0 < self.weight < 1.0:
            raise ValueError("weight must lie in (0, 1)")


def ranging_pdf(d, m: WirelessMeasurement):
    """Gaussian density of a range reading, mean m.range, std m.range_std."""
    d = np.asarray(d, dtype=float)
    s = m.range_std
    return np.exp(-0.5 * ((d - m.range) / s) ** 2) / math.sqrt(2.0 * math.pi * s * s)


def aoa_pdf(phi, m: WirelessMeasurement):
    """Von Mises azimuth density, mean aoa.azimuth, concentration 1/kappa^2.

    Larger kappa means a less reliable AoA, hence a flatter density; the
    exponentially scaled Bessel normalizer keeps the evaluation stable for
    concentrations far beyond the overflow range of i0.
    """
    phi = np.asarray(phi, dtype=float)
    conc = 1.0 / (m.aoa.kappa**2)
    # i0(c) = i0e(c) * e^c, so the density is e^{c(cos(...) - 1)} / (2 pi i0e(c))
    return np.exp(conc * (np.cos(phi - m.aoa.azimuth) - 1.0)) / (
        2.0 * math.pi * i0e(conc)
    )


def relative_yaw(azimuth_ab: float, azimuth_ba: float) -> float:
    """Heading of frame b in frame a from reciprocal azimuth measurements.

    Robot a sees b at azimuth_ab (frame a); b sees a at azimuth_ba (frame
    b). The same line points both ways, so yaw = azimuth_ab - azimuth_ba
    - pi, wrapped to (-pi, pi].
    """
    yaw = azimuth_ab - (azimuth_ba + math.pi)
    return float(np.angle(np.exp(1j * yaw)))


def measurement_transform(m: WirelessMeasurement) -> RigidTransform:
    """Frame-change from the target robot's local frame into the anchor's."""
    translation = m.range * direction_vector(m.aoa.azimuth, m.aoa.zenith)
    return RigidTransform(rot_z(relative_yaw(m.aoa.azimuth, m.peer_azimuth)), translation)


def estimate_extrinsic(
    m: WirelessMeasurement,
    anchor_pose: Pose,
    peer_local_pose: Pose,
    peer_pose_timestamp: Optional[float] = None,
    staleness_horizon: float = DEFAULT_STALENESS_HORIZON,
) -> Pose:
    """Peer camera pose in the anchor's world, from one reciprocal measurement.

    anchor_pose is the measuring robot's world pose at measurement time.
    peer_local_pose is the peer camera's pose relative to the peer's body
    frame at the same instant (identity when camera = body and the poses
    are synchronized; motion-since-measurement when reusing a stale
    extrinsic). The wireless link fixes the body-to-body frame change at
    measurement time; composing through it maps peer-local poses into the
    world.
    """
    if peer_pose_timestamp is not None:
        if peer_pose_timestamp - m.timestamp > staleness_horizon:
            raise ValueError(
                f"measurement at t={m.timestamp:.3f} is stale for a pose at "
                f"t={peer_pose_timestamp:.3f} (horizon {staleness_horizon:.3f}s)"
            )
    return compose(anchor_pose, compose(measurement_transform(m), peer_local_pose))


def ellipse_scale(ci: float) -> float:
    """Chi-square scale k mapping std axes to a confidence-ci ellipse."""
    if not 0.0 < ci < 1.0:
        raise ValueError("confidence must lie in (0, 1)")
    return math.sqrt(-2.0 * math.log(1.0 - ci))


def error_ellipse(m: WirelessMeasurement, ci: float = 0.95) -> UncertaintyEllipse:
    """Planar position-uncertainty ellipse of the measured peer location.

    Axis lengths combine the range std and the angular uncertainty kappa
    scaled by range, rotated by the AoA azimuth; axes are reordered so
    semi_major >= semi_minor. Area = k^2 pi a b.
    """
    theta = m.aoa.azimuth
    t, sigma, kappa = m.range, m.range_std, m.aoa.kappa
    a2 = sigma**2 * math.cos(theta) ** 2 + t**2 * math.sin(theta) ** 2 * kappa**2
    b2 = sigma**2 * math.sin(theta) ** 2 + t**2 * math.cos(theta) ** 2 * kappa**2
    a, b = math.sqrt(a2), math.sqrt(b2)
    if b > a:
        a, b = b, a
    k = ellipse_scale(ci)
    return UncertaintyEllipse(a, b, ci, k, k**2 * math.pi * a * b)


def loss_weight(
    e: Optional[UncertaintyEllipse],
    mode: str = "down-weight",
    gamma_scale: float = 1.0,
) -> float:
    """Sigmoid loss weight from an ellipse area.

    down-weight (default): w = sigmoid(-area/gamma_scale), so more position
    uncertainty means less influence on the loss. paper-literal: the sign is
    flipped. A missing ellipse (anchor robot's own frames) weighs like a
    zero-area one: exactly 0.5.
    """
    if mode not in ("down-weight", "paper-literal"):
        raise ValueError(f"unknown weighting mode: {mode!r}")
    if gamma_scale <= 0:
        raise ValueError("gamma_scale must be positive")
    gamma = 0.0 if e is None else e.area
    x = gamma / gamma_scale
    if mode == "down-weight":
        x = -x
    return float(1.0 / (1.0 + np.exp(-x)))


def batch_gamma_scale(ellipses) -> float:
    """Median ellipse area of a measurement batch, the default sigmoid scale.

    Keeps the sigmoid responsive regardless of the metric units; raw areas
    in m^2 can sit many decades from 1. Falls back to 1 when the batch has
    no finite positive areas.
    """
    areas = [e.area for e in ellipses if e is not None and e.area > 0]
    if not areas:
        return 1.0
    return float(np.median(areas))
