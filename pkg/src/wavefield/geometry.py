"""Poses, rigid transforms, rays, and pinhole ray generation.

Conventions used throughout the package: right-handed world frame, camera
looks along +z in its own frame, image y points down. Rotations are stored
as 3x3 matrices; long composition chains are re-orthonormalized when drift
exceeds 1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHO_TOL = 1e-9
# drift level at which compose() re-orthonormalizes
DRIFT_TOL = 1e-12


def _check_rotation(rotation: np.ndarray) -> np.ndarray:
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (3, 3):
        raise ValueError("rotation must be 3x3")
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err > ORTHO_TOL or abs(np.linalg.det(rotation) - 1.0) > ORTHO_TOL:
        raise ValueError("rotation is not orthonormal with det +1")
    return rotation


def orthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3) via SVD."""
    u, _, vt = np.linalg.svd(rotation)
    r = u @ vt
    if np.linalg.det(r) < 0:
        u[:, -1] = -u[:, -1]
        r = u @ vt
    return r


@dataclass(frozen=True)
class Pose:
    """World pose: x_world = rotation @ x_local + translation."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rotation", _check_rotation(self.rotation))
        t = np.asarray(self.translation, dtype=float).reshape(3)
        object.__setattr__(self, "translation", t)
        self.rotation.setflags(write=False)
        self.translation.setflags(write=False)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Map local points (..., 3) into the parent frame."""
        pts = np.asarray(points, dtype=float)
        return pts @ self.rotation.T + self.translation

    def matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.rotation
        m[:3, 3] = self.translation
        return m


# A frame-change operator has the same algebra as a pose; the alias keeps
# call sites honest about intent.
RigidTransform = Pose


def compose(a: Pose, b: Pose) -> Pose:
    """Express b in a's target frame (a then b, i.e. a.apply(b.apply(x)))."""
    rotation = a.rotation @ b.rotation
    err = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if err > DRIFT_TOL:
        rotation = orthonormalize(rotation)
    return Pose(rotation, a.rotation @ b.translation + a.translation)


def invert(t: Pose) -> Pose:
    rt = t.rotation.T
    return Pose(rt, -rt @ t.translation)


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def direction_vector(azimuth, zenith) -> np.ndarray:
    """Unit vector(s) for spherical angles; azimuth in x-y from +x, zenith from +z."""
    azimuth = np.asarray(azimuth, dtype=float)
    zenith = np.asarray(zenith, dtype=float)
    return np.stack(
        [
            np.cos(azimuth) * np.sin(zenith),
            np.sin(azimuth) * np.sin(zenith),
            np.cos(zenith),
        ],
        axis=-1,
    )


def look_at(eye: np.ndarray, target: np.ndarray, up=(0.0, 0.0, 1.0)) -> Pose:
    """Camera pose at eye with +z toward target, image y down."""
    eye = np.asarray(eye, dtype=float)
    fwd = np.asarray(target, dtype=float) - eye
    n = np.linalg.norm(fwd)
    if n < 1e-12:
        raise ValueError("look_at target coincides with eye")
    fwd = fwd / n
    up = np.asarray(up, dtype=float)
    right = np.cross(fwd, up)
    rn = np.linalg.norm(right)
    if rn < 1e-12:
        # forward parallel to up: pick an arbitrary right
        right = np.cross(fwd, np.array([1.0, 0.0, 0.0]))
        rn = np.linalg.norm(right)
    right = right / rn
    down = np.cross(fwd, right)
    rotation = np.stack([right, down, fwd], axis=1)
    return Pose(orthonormalize(rotation), eye)


@dataclass(frozen=True)
class Ray:
    origin: np.ndarray
    direction: np.ndarray
    t_near: float
    t_far: float

    def __post_init__(self):
        o = np.asarray(self.origin, dtype=float).reshape(3)
        d = np.asarray(self.direction, dtype=float).reshape(3)
        n = np.linalg.norm(d)
        if abs(n - 1.0) > 1e-12:
            raise ValueError("ray direction must be unit norm")
        if not self.t_near < self.t_far:
            raise ValueError("require t_near < t_far")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "direction", d)
        o.setflags(write=False)
        d.setflags(write=False)


@dataclass(frozen=True)
class CameraModel:
    width: int
    height: int
    focal: float
    principal: tuple = field(default=None)

    def __post_init__(self):
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        pp = self.principal
        if pp is None:
            pp = ((self.width - 1) / 2.0, (self.height - 1) / 2.0)
        pp = (float(pp[0]), float(pp[1]))
        if not (0 <= pp[0] < self.width and 0 <= pp[1] < self.height):
            raise ValueError("principal point outside image")
        object.__setattr__(self, "principal", pp)


def pixel_directions(camera: CameraModel) -> np.ndarray:
    """Unit ray directions in the camera frame, shape (h, w, 3)."""
    xs = np.arange(camera.width, dtype=float)
    ys = np.arange(camera.height, dtype=float)
    u, v = np.meshgrid(xs, ys)
    cx, cy = camera.principal
    d = np.stack(
        [(u - cx) / camera.focal, (v - cy) / camera.focal, np.ones_like(u)], axis=-1
    )
    return d / np.linalg.norm(d, axis=-1, keepdims=True)


def pixel_rays(camera: CameraModel, pose: Pose, t_near: float = 0.1, t_far: float = 10.0):
    """Per-pixel world rays as (origins (h,w,3), directions (h,w,3))."""
    local = pixel_directions(camera)
    directions = local @ pose.rotation.T
    origins = np.broadcast_to(pose.translation, directions.shape).copy()
    return origins, directions


def poses_to_text(poses) -> str:
    """One pose per line: 9 row-major rotation numbers then 3 translation."""
    lines = []
    for p in poses:
        vals = np.concatenate([p.rotation.reshape(9), p.translation])
        lines.append(" ".join(f"{v:.17g}" for v in vals))
    return "\n".join(lines) + "\n"


def poses_from_text(text: str):
    poses = []
    for i, line in enumerate(text.strip().splitlines()):
        vals = [float(tok) for tok in line.split()]
        if len(vals) != 12:
            raise ValueError(f"pose line {i + 1}: expected 12 numbers, got {len(vals)}")
        r = np.array(vals[:9]).reshape(3, 3)
        poses.append(Pose(orthonormalize(r), np.array(vals[9:])))
    return poses
