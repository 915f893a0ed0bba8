"""Points, frames, rotations and caps on the unit sphere.

Conventions used throughout the package:

* a point is a unit 3-vector, optionally viewed through its latitude
  ``theta`` (angle from the north pole ``e3``, in ``[0, pi]``) and
  longitude ``phi`` in ``[0, 2*pi)``;
* rotations are proper orthogonal 3x3 matrices, optionally viewed through
  zyz Euler angles ``R = Rz(alpha) @ Ry(beta) @ Rz(gamma)``;
* a position/orientation pair ``(x, r)`` with ``r`` tangent at ``x``
  corresponds to the unique rotation sending ``e3 -> x`` and ``e1 -> r``;
* ``rotate_about(x, angle)`` turns counterclockwise when looking down the
  axis ``x`` from outside the sphere (right-hand rule).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

UNIT_TOL = 1e-12

E1 = np.array([1.0, 0.0, 0.0])
E2 = np.array([0.0, 1.0, 0.0])
E3 = np.array([0.0, 0.0, 1.0])


def sphere_point(theta, phi):
    """Unit vector with latitude ``theta`` and longitude ``phi``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    st = np.sin(theta)
    return np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(theta)], axis=-1)


def point_angles(x):
    """Inverse of :func:`sphere_point`: ``(theta, phi)`` with ``phi`` in [0, 2pi)."""
    x = np.asarray(x, dtype=float)
    theta = np.arccos(np.clip(x[..., 2], -1.0, 1.0))
    phi = np.mod(np.arctan2(x[..., 1], x[..., 0]), 2.0 * np.pi)
    return theta, phi


def normalize(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValidationError("cannot normalize a zero vector")
    return v / n


def check_unit(x, what="vector", tol=UNIT_TOL):
    x = np.asarray(x, dtype=float)
    if abs(np.linalg.norm(x) - 1.0) > tol:
        raise ValidationError(f"{what} is not a unit vector: |norm - 1| = "
                              f"{abs(np.linalg.norm(x) - 1.0):.3e}")
    return x


def geodesic_distance(x, y):
    """Great-circle distance, ``arccos`` of the clamped inner product.

    Supports broadcasting over leading axes; the last axis holds the
    3-vector components.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dot = np.clip(np.sum(x * y, axis=-1), -1.0, 1.0)
    return np.arccos(dot)


def latitude_circle_distance(theta, dlon):
    """Distance between two points of equal latitude ``theta`` whose
    longitudes differ by ``dlon``:  ``arccos(1 + (cos dlon - 1) sin^2 theta)``."""
    c = 1.0 + (np.cos(dlon) - 1.0) * np.sin(theta) ** 2
    return np.arccos(np.clip(c, -1.0, 1.0))


def rot_y(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle):
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rotate_about(axis, angle):
    """Rodrigues rotation matrix about a unit ``axis`` (right-hand rule)."""
    a = check_unit(axis, "rotation axis")
    kx = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(angle) * kx + (1.0 - np.cos(angle)) * (kx @ kx)


def euler_to_rotation(alpha, beta, gamma):
    """zyz composition ``Rz(alpha) @ Ry(beta) @ Rz(gamma)``."""
    return rot_z(alpha) @ rot_y(beta) @ rot_z(gamma)


def check_rotation(rotation, tol=UNIT_TOL):
    rotation = np.asarray(rotation, dtype=float)
    if rotation.shape != (3, 3):
        raise ValidationError("rotation must be a 3x3 matrix")
    if np.max(np.abs(rotation.T @ rotation - np.eye(3))) > 10 * tol:
        raise ValidationError("matrix is not orthogonal")
    if abs(np.linalg.det(rotation) - 1.0) > 10 * tol:
        raise ValidationError("matrix is not a proper rotation (det != 1)")
    return rotation


def euler_decompose(rotation):
    """zyz Euler angles ``(alpha, beta, gamma)`` of a rotation matrix.

    ``beta`` is the latitude and ``alpha`` the longitude of ``R @ e3``.  In
    the gimbal case ``sin(beta) ~ 0`` the split between ``alpha`` and
    ``gamma`` is free; we fix ``gamma = 0``.
    """
    rotation = check_rotation(rotation)
    beta = np.arccos(np.clip(rotation[2, 2], -1.0, 1.0))
    if np.sin(beta) < 1e-12:
        gamma = 0.0
        if rotation[2, 2] > 0.0:
            alpha = np.arctan2(rotation[1, 0], rotation[0, 0])
        else:
            alpha = np.arctan2(-rotation[0, 1], -rotation[0, 0])
    else:
        alpha = np.arctan2(rotation[1, 2], rotation[0, 2])
        gamma = np.arctan2(rotation[2, 1], -rotation[2, 0])
    return float(np.mod(alpha, 2.0 * np.pi)), float(beta), float(np.mod(gamma, 2.0 * np.pi))


@dataclass(frozen=True)
class TangentFrame:
    """Position ``x`` plus unit tangent ``r`` (an element of the unit
    tangent bundle); fixes both where a wavelet sits and where it points."""

    x: np.ndarray
    r: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", check_unit(self.x, "frame position"))
        object.__setattr__(self, "r", check_unit(self.r, "frame orientation"))
        if abs(float(np.dot(self.x, self.r))) > UNIT_TOL:
            raise ValidationError("orientation is not tangent to the sphere at x")


def frame_to_rotation(frame: TangentFrame):
    """The unique rotation with ``R @ e3 = x`` and ``R @ e1 = r``."""
    x, r = frame.x, frame.r
    return np.column_stack([r, np.cross(x, r), x])


def rotation_to_frame(rotation) -> TangentFrame:
    rotation = check_rotation(rotation)
    return TangentFrame(rotation[:, 2].copy(), rotation[:, 0].copy())


def frame_euler(frame: TangentFrame):
    """Euler angles of the rotation attached to a frame."""
    return euler_decompose(frame_to_rotation(frame))


def project_to_tangent(x, v):
    """Component of ``v`` tangent at ``x``, normalized to unit length."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    t = v - np.dot(x, v) * x
    n = np.linalg.norm(t)
    if n < 1e-14:
        raise ValidationError("vector has no tangential component at x")
    return t / n


def tangent_angle(x, r, s):
    """Angle ``a`` in [0, 2pi) with ``r = rotate_about(x, a) @ s``.

    Both ``r`` and ``s`` must be unit tangents at ``x``; the angle is
    counted counterclockwise around the outward axis ``x``.
    """
    x = check_unit(x, "base point")
    for v, name in ((r, "first tangent"), (s, "second tangent")):
        check_unit(v, name)
        if abs(float(np.dot(x, v))) > 1e-10:
            raise ValidationError(f"{name} is not tangent at x")
    cos_a = float(np.dot(r, s))
    sin_a = float(np.dot(r, np.cross(x, s)))
    return float(np.mod(np.arctan2(sin_a, cos_a), 2.0 * np.pi))


def angle_mod_pi(a, b):
    """Distance between two orientations that are only defined modulo pi."""
    d = np.mod(a - b, np.pi)
    return float(min(d, np.pi - d))


@dataclass(frozen=True)
class Cap:
    """Open geodesic disk ``{x : d(x, center) < radius}``."""

    center: np.ndarray
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", check_unit(self.center, "cap center"))
        if not 0.0 < self.radius < np.pi:
            raise ValidationError("cap opening angle must lie in (0, pi)")

    def contains(self, x):
        return geodesic_distance(x, self.center) < self.radius

    def area(self):
        return 2.0 * np.pi * (1.0 - np.cos(self.radius))
