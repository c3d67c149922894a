"""Constant-acceleration Kalman filtering over box corner coordinates.

A box is measured by two opposite corners: (left, top) / (right, bottom) in
the image, and the axis-aligned min/max corners of the cuboid in 3D (yaw is
carried alongside as the last observed value, so corner measurements stay
continuous when the heading changes). Each measured coordinate evolves
independently under the same scalar constant-acceleration model, which makes
the joint transition, measurement, and noise matrices block-diagonal; the
filter below stores one (position, velocity, acceleration) block per
coordinate and hand-expands the 3x3 algebra. The covariance of a block is
kept as its six unique entries, so it is symmetric by construction.

The time step is one frame. Process noise is white jerk with intensity q
entering through the acceleration: Q = q * g g^T with g = (1/6, 1/2, 1).
"""

from __future__ import annotations

from .geometry import Box2D, Box3D, _box2d_unchecked, _box3d_unchecked

_MIN_EXTENT = 1e-6

# Unique entries (00, 01, 02, 11, 12, 22) of g g^T for g = (1/6, 1/2, 1).
_JERK_SHAPE = (1.0 / 36.0, 1.0 / 12.0, 1.0 / 6.0, 0.25, 0.5, 1.0)


class CornerFilter:
    """Bank of independent scalar constant-acceleration filters.

    One filter per measured coordinate; measurements are position-only.
    """

    __slots__ = ("n", "r", "q", "mean", "cov")

    def __init__(self, measurement, *, measurement_noise: float,
                 process_noise: float, initial_variance: float):
        self.n = len(measurement)
        self.r = float(measurement_noise)
        self.q = tuple(process_noise * s for s in _JERK_SHAPE)
        # mean[i] = [position, velocity, acceleration] of coordinate i
        self.mean = [[float(z), 0.0, 0.0] for z in measurement]
        p0 = float(initial_variance)
        self.cov = [[self.r, 0.0, 0.0, p0, 0.0, p0] for _ in range(self.n)]

    @property
    def positions(self) -> tuple[float, ...]:
        return tuple(m[0] for m in self.mean)

    def predict(self) -> None:
        """Advance one frame: x <- F x, P <- F P F^T + Q."""
        q00, q01, q02, q11, q12, q22 = self.q
        for m, c in zip(self.mean, self.cov):
            p, v, a = m
            m[0] = p + v + 0.5 * a
            m[1] = v + a
            p00, p01, p02, p11, p12, p22 = c
            c[0] = p00 + 2.0 * p01 + p02 + p11 + p12 + 0.25 * p22 + q00
            c[1] = p01 + p02 + p11 + 1.5 * p12 + 0.5 * p22 + q01
            c[2] = p02 + p12 + 0.5 * p22 + q02
            c[3] = p11 + 2.0 * p12 + p22 + q11
            c[4] = p12 + p22 + q12
            c[5] = p22 + q22

    def update(self, measurement) -> None:
        """Correct with position measurements, one per coordinate."""
        if len(measurement) != self.n:
            raise ValueError(
                f"measurement has {len(measurement)} coordinates, state has {self.n}")
        r = self.r
        for m, c, z in zip(self.mean, self.cov, measurement):
            p00, p01, p02, p11, p12, p22 = c
            gain = 1.0 / (p00 + r)
            k0 = p00 * gain
            k1 = p01 * gain
            k2 = p02 * gain
            y = z - m[0]
            m[0] += k0 * y
            m[1] += k1 * y
            m[2] += k2 * y
            one_minus_k0 = 1.0 - k0
            c[0] = one_minus_k0 * p00
            c[1] = one_minus_k0 * p01
            c[2] = one_minus_k0 * p02
            c[3] = p11 - k1 * p01
            c[4] = p12 - k1 * p02
            c[5] = p22 - k2 * p02

    def update_predict(self, measurement) -> list[float]:
        """Fused correct-then-advance; returns the corrected positions.

        Exactly update() followed by predict(), kept in one pass because the
        pair runs once per matched track per frame.
        """
        if len(measurement) != self.n:
            raise ValueError(
                f"measurement has {len(measurement)} coordinates, state has {self.n}")
        r = self.r
        q00, q01, q02, q11, q12, q22 = self.q
        posterior = []
        append = posterior.append
        for m, c, z in zip(self.mean, self.cov, measurement):
            p00, p01, p02, p11, p12, p22 = c
            gain = 1.0 / (p00 + r)
            k0 = p00 * gain
            k1 = p01 * gain
            k2 = p02 * gain
            y = z - m[0]
            p = m[0] + k0 * y
            v = m[1] + k1 * y
            a = m[2] + k2 * y
            append(p)
            one_minus_k0 = 1.0 - k0
            u00 = one_minus_k0 * p00
            u01 = one_minus_k0 * p01
            u02 = one_minus_k0 * p02
            u11 = p11 - k1 * p01
            u12 = p12 - k1 * p02
            u22 = p22 - k2 * p02
            m[0] = p + v + 0.5 * a
            m[1] = v + a
            m[2] = a
            c[0] = u00 + 2.0 * u01 + u02 + u11 + u12 + 0.25 * u22 + q00
            c[1] = u01 + u02 + u11 + 1.5 * u12 + 0.5 * u22 + q01
            c[2] = u02 + u12 + 0.5 * u22 + q02
            c[3] = u11 + 2.0 * u12 + u22 + q11
            c[4] = u12 + u22 + q12
            c[5] = u22 + q22
        return posterior

    def covariance_blocks(self):
        """Per-coordinate 3x3 covariance blocks as nested lists."""
        blocks = []
        for p00, p01, p02, p11, p12, p22 in self.cov:
            blocks.append([[p00, p01, p02], [p01, p11, p12], [p02, p12, p22]])
        return blocks


class BoxState2D:
    """Kalman state of an image box, tracked by its two opposite corners."""

    __slots__ = ("filter",)

    def __init__(self, box: Box2D, *, measurement_noise: float,
                 process_noise: float, initial_variance: float):
        self.filter = CornerFilter(
            box.corners(), measurement_noise=measurement_noise,
            process_noise=process_noise, initial_variance=initial_variance)

    def predict(self) -> None:
        self.filter.predict()

    def update(self, box: Box2D) -> None:
        self.filter.update(box.corners())

    def absorb(self, box: Box2D) -> Box2D:
        """Fused update + predict; returns the corrected box for reporting."""
        posterior = self.filter.update_predict(box.corners())
        return _decode_box2d(posterior)

    @property
    def box(self) -> Box2D:
        """Decoded rectangle; corners re-ordered so the box stays valid."""
        mean = self.filter.mean
        return _decode_box2d((mean[0][0], mean[1][0], mean[2][0], mean[3][0]))


class BoxState3D:
    """Kalman state of a cuboid, tracked by its axis-aligned opposite corners."""

    __slots__ = ("filter", "yaw")

    def __init__(self, box: Box3D, *, measurement_noise: float,
                 process_noise: float, initial_variance: float):
        self.filter = CornerFilter(
            _encode_box3d(box), measurement_noise=measurement_noise,
            process_noise=process_noise, initial_variance=initial_variance)
        self.yaw = box.yaw

    def predict(self) -> None:
        self.filter.predict()

    def update(self, box: Box3D) -> None:
        self.filter.update(_encode_box3d(box))
        self.yaw = box.yaw

    def absorb(self, box: Box3D) -> Box3D:
        """Fused update + predict; returns the corrected box for reporting."""
        posterior = self.filter.update_predict(_encode_box3d(box))
        self.yaw = box.yaw
        return _decode_box3d(posterior, self.yaw)

    @property
    def box(self) -> Box3D:
        """Decoded cuboid with positive extents and the last observed yaw."""
        mean = self.filter.mean
        return _decode_box3d((mean[0][0], mean[1][0], mean[2][0],
                              mean[3][0], mean[4][0], mean[5][0]), self.yaw)


def _encode_box3d(box: Box3D) -> tuple[float, ...]:
    hx = 0.5 * box.length
    hy = 0.5 * box.height
    hz = 0.5 * box.width
    return (box.center_x - hx, box.center_y - hy, box.center_z - hz,
            box.center_x + hx, box.center_y + hy, box.center_z + hz)


def _decode_box2d(positions) -> Box2D:
    x1, y1, x2, y2 = positions
    left, right = (x1, x2) if x1 <= x2 else (x2, x1)
    top, bottom = (y1, y2) if y1 <= y2 else (y2, y1)
    if right - left < _MIN_EXTENT:
        right = left + _MIN_EXTENT
    if bottom - top < _MIN_EXTENT:
        bottom = top + _MIN_EXTENT
    return _box2d_unchecked(left, top, right, bottom)


def _decode_box3d(positions, yaw: float) -> Box3D:
    x1, y1, z1, x2, y2, z2 = positions
    length = x2 - x1 if x2 >= x1 else x1 - x2
    height = y2 - y1 if y2 >= y1 else y1 - y2
    width = z2 - z1 if z2 >= z1 else z1 - z2
    return _box3d_unchecked(
        0.5 * (x1 + x2), 0.5 * (y1 + y2), 0.5 * (z1 + z2),
        height if height > _MIN_EXTENT else _MIN_EXTENT,
        width if width > _MIN_EXTENT else _MIN_EXTENT,
        length if length > _MIN_EXTENT else _MIN_EXTENT,
        yaw)
