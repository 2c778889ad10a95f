"""Planar geometry primitives used by the contact model and the analysis tools.

All coordinates are millimeters.  Bodies that can be touched expose a signed
distance (positive outside, negative inside) together with the outward surface
normal, which doubles as the gradient of the distance with respect to the
query point.  Convex polygons use the support-plane distance (max over edge
half-planes); it agrees with the true signed distance inside and along edges
and bevels the region just outside corners, which keeps the contact energy
smooth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])


def rot(angle):
    """2x2 rotation matrix."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def polygon_area(vertices):
    """Signed area (positive for counter-clockwise winding)."""
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def ensure_ccw(vertices):
    v = np.asarray(vertices, dtype=float)
    if polygon_area(v) < 0:
        v = v[::-1].copy()
    return v


def polygon_centroid(vertices):
    v = ensure_ccw(vertices)
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = cross.sum() / 2.0
    cx = ((x + xn) * cross).sum() / (6.0 * a)
    cy = ((y + yn) * cross).sum() / (6.0 * a)
    return np.array([cx, cy])


def point_in_polygon(point, vertices):
    """Even-odd rule; boundary points count as inside (within 1e-12)."""
    x, y = point
    v = np.asarray(vertices, dtype=float)
    n = len(v)
    inside = False
    for i in range(n):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % n]
        ex, ey = x1 - x0, y1 - y0
        # on-edge check
        cross = ex * (y - y0) - ey * (x - x0)
        if abs(cross) < 1e-12 and min(x0, x1) - 1e-12 <= x <= max(x0, x1) + 1e-12 \
                and min(y0, y1) - 1e-12 <= y <= max(y0, y1) + 1e-12:
            return True
        if (y0 > y) != (y1 > y):
            t = (y - y0) / (y1 - y0)
            if x0 + t * (x1 - x0) > x:
                inside = not inside
    return inside


def convex_hull(points):
    """Andrew monotone chain, CCW output."""
    pts = sorted({(float(p[0]), float(p[1])) for p in np.asarray(points, dtype=float)})
    if len(pts) <= 2:
        return np.array(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and ((out[-1][0] - out[-2][0]) * (p[1] - out[-2][1])
                                     - (out[-1][1] - out[-2][1]) * (p[0] - out[-2][0])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return np.array(lower[:-1] + upper[:-1])


def min_area_rect(vertices):
    """Minimum-area bounding rectangle via rotating calipers.

    Returns (length, width, angle, center) with length >= width.
    """
    hull = convex_hull(vertices)
    if len(hull) == 1:
        return 0.0, 0.0, 0.0, hull[0]
    if len(hull) == 2:
        d = hull[1] - hull[0]
        return float(np.linalg.norm(d)), 0.0, math.atan2(d[1], d[0]), hull.mean(axis=0)
    best = None
    n = len(hull)
    for i in range(n):
        edge = hull[(i + 1) % n] - hull[i]
        ang = math.atan2(edge[1], edge[0])
        r = rot(-ang)
        proj = hull @ r.T
        lo, hi = proj.min(axis=0), proj.max(axis=0)
        dims = hi - lo
        area = dims[0] * dims[1]
        if best is None or area < best[0]:
            center_local = (lo + hi) / 2.0
            best = (area, dims, ang, rot(ang) @ center_local)
    _, dims, ang, center = best
    length, width = float(max(dims)), float(min(dims))
    if dims[0] < dims[1]:
        ang += math.pi / 2.0
    return length, width, ang, center


@dataclass(frozen=True)
class HalfPlane:
    """Region below/behind a plane: sd(p) = normal . (p - origin)."""

    origin: np.ndarray
    normal: np.ndarray  # unit, points out of the solid

    def signed_distance(self, p):
        return float(np.dot(self.normal, np.asarray(p) - self.origin)), self.normal.copy()


@dataclass(frozen=True)
class Circle:
    center: np.ndarray
    radius: float

    def signed_distance(self, p):
        d = np.asarray(p, dtype=float) - self.center
        r = float(np.linalg.norm(d))
        if r < 1e-12:
            return -self.radius, np.array([1.0, 0.0])
        return r - self.radius, d / r


class ConvexPolygon:
    """Convex polygon in body-local coordinates with a rigid planar pose.

    Pose is (x, y, phi); signed distance is the support-plane distance.
    Gradients with respect to the query point and the pose are analytic.
    """

    def __init__(self, local_vertices, pose=(0.0, 0.0, 0.0)):
        v = ensure_ccw(local_vertices)
        if len(v) < 3:
            raise ValueError("polygon needs at least 3 vertices")
        self.local_vertices = v
        edges = np.roll(v, -1, axis=0) - v
        lengths = np.linalg.norm(edges, axis=1)
        if np.any(lengths < 1e-12):
            raise ValueError("degenerate polygon edge")
        # outward normals for CCW winding
        self.local_normals = np.stack([edges[:, 1], -edges[:, 0]], axis=1) / lengths[:, None]
        self.set_pose(pose)

    def set_pose(self, pose):
        self.pose = np.asarray(pose, dtype=float)
        self._R = rot(self.pose[2])

    def world_vertices(self):
        return self.local_vertices @ self._R.T + self.pose[:2]

    def signed_distance(self, p):
        """Signed distance, world normal, and pose gradient.

        Outside the polygon this is the exact euclidean distance (edge or
        vertex feature, so corners keep their radial normals and can carry
        shelf/hook loads); inside it is the support-plane distance.  Returns
        (sd, n_world, dsd_dpose) with dsd_dpose the derivative with respect
        to the body pose (x, y, phi).
        """
        p = np.asarray(p, dtype=float)
        local = self._R.T @ (p - self.pose[:2])
        vals = np.einsum("ij,ij->i", self.local_normals,
                         local[None, :] - self.local_vertices)
        k = int(np.argmax(vals))
        if vals[k] <= 0.0:
            n_local = self.local_normals[k]
            n_world = self._R @ n_local
            dlocal_dphi = -(ROT90 @ local)
            dsd = np.array([-n_world[0], -n_world[1],
                            float(np.dot(n_local, dlocal_dphi))])
            return float(vals[k]), n_world, dsd, None
        # outside: closest feature over edges (clamped projection)
        best = None
        verts = self.local_vertices
        n = len(verts)
        for i in range(n):
            a = verts[i]
            b = verts[(i + 1) % n]
            e = b - a
            t = float(np.dot(local - a, e) / np.dot(e, e))
            t = min(1.0, max(0.0, t))
            q = a + t * e
            d2 = float(np.dot(local - q, local - q))
            if best is None or d2 < best[0]:
                best = (d2, q, i, t)
        d2, q_local, i, t = best
        dist = math.sqrt(max(d2, 1e-18))
        if 0.0 < t < 1.0:
            n_local = self.local_normals[i]
            n_world = self._R @ n_local
            dlocal_dphi = -(ROT90 @ local)
            dsd = np.array([-n_world[0], -n_world[1],
                            float(np.dot(n_local, dlocal_dphi))])
            return dist, n_world, dsd, None
        # vertex feature: radial normal from the corner
        r = max(dist, 1e-9)
        n_local = (local - q_local) / r
        n_world = self._R @ n_local
        w_world = self._R @ q_local + self.pose[:2]
        # sd = |p - w(pose)|: dsd/dt = -n, dsd/dphi = -n . (J (w - t))
        dw_dphi = ROT90 @ (w_world - self.pose[:2])
        dsd = np.array([-n_world[0], -n_world[1], float(-np.dot(n_world, dw_dphi))])
        return dist, n_world, dsd, w_world


def segment_points(a, b, fractions):
    """Points along segment a->b at the given fractions."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a[None, :] + np.asarray(fractions, dtype=float)[:, None] * (b - a)[None, :]
