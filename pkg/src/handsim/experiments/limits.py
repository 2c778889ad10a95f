"""Geometric feasibility limits for an open-loop grasp.

Pure geometry, independent of the statics solver: the area swept by the
finger and thumb links over the replayed (unloaded) grasp motion is projected
onto the table plane; placements whose center of mass would collide with the
fingertips at the start of the motion are carved out.  What remains is the
set of admissible object center placements.
"""

from __future__ import annotations

import numpy as np
from shapely.geometry import JOIN_STYLE, Polygon
from shapely.ops import unary_union

from ..hand import DIGITS, ActuatorCommand, link_segments, tendon_to_rest_pose
from ..waypoints import command_schedule

GRASP_ZONE_HEIGHT = 60.0  # links below this height (above the table) count


class FeasibilityRegion:
    """Admissible center-of-mass placements in the table plane (u, v)."""

    def __init__(self, swept, band, region):
        self.swept = swept
        self.band = band
        self.region = region

    @property
    def area(self):
        return float(self.region.area)

    def contains(self, point):
        from shapely.geometry import Point
        return bool(self.region.contains(Point(point)))

    def span(self, origin, direction):
        """Extent of the region from ``origin`` along +-direction (mm)."""
        from shapely.geometry import LineString, Point
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        far = 1000.0
        out = []
        for sign in (1.0, -1.0):
            ray = LineString([origin, origin + sign * far * d])
            hit = self.region.intersection(ray)
            if hit.is_empty:
                out.append(0.0)
            else:
                out.append(float(hit.length) if hit.geom_type != "Point" else 0.0)
        return tuple(out)

    def vertices(self):
        polys = []
        geom = self.region
        if geom.is_empty:
            return polys
        geoms = geom.geoms if hasattr(geom, "geoms") else [geom]
        for g in geoms:
            polys.append(np.asarray(g.exterior.coords))
        return polys


def _link_rect(seg, lateral, half_width, table_height, zone):
    (a, b) = seg
    if min(a[1], b[1]) > table_height + zone:
        return None
    u0, u1 = sorted((a[0], b[0]))
    return Polygon([(u0 - half_width, lateral - half_width),
                    (u1 + half_width, lateral - half_width),
                    (u1 + half_width, lateral + half_width),
                    (u0 - half_width, lateral + half_width)])


def estimate_geometric_limit(scene, trajectory, obj, dt=0.1,
                             zone=GRASP_ZONE_HEIGHT, digits=DIGITS):
    """FeasibilityRegion for placing ``obj`` under the given grasp motion.

    The motion is replayed kinematically (unloaded rest poses, commanded arm
    path); the swept area is the union of the projected link footprints, the
    collision band is the fingertip start positions dilated by the reflected
    object footprint.
    """
    spec = scene.hand.spec
    mount = scene.hand.mount
    table_h = scene.table_height() or 0.0
    schedule = command_schedule(trajectory, dt=dt)
    rects = []
    tip_points = None
    for kind, hand_cmd, arm_pose, preset in schedule:
        joints = tendon_to_rest_pose(spec, ActuatorCommand(np.minimum(
            np.maximum(hand_cmd, [a.travel[0] for a in spec.actuators]),
            [a.travel[1] for a in spec.actuators])))
        wrist_xy = (mount[0] + arm_pose[0], mount[1] + arm_pose[1])
        wrist_angle = mount[5] + arm_pose[3]
        tips = {}
        for d in digits:
            ds = spec.digits[d]
            skin = scene.hand.skin.thickness
            segs = link_segments(spec, joints, d, wrist_xy=wrist_xy,
                                 wrist_angle=wrist_angle)
            lateral = mount[2] + arm_pose[2] + ds.lateral_offset
            for seg in segs:
                r = _link_rect(seg, lateral, ds.link_half_width + skin, table_h, zone)
                if r is not None:
                    rects.append(r)
            tips[d] = (segs[-1][1][0], lateral)
        if tip_points is None:
            tip_points = tips
    swept = unary_union(rects) if rects else Polygon()

    # configuration-space obstacle: object center placements whose footprint
    # would cover a fingertip start position
    fp = np.asarray(obj.footprint, dtype=float)
    from ..geometry import polygon_centroid, rot
    centered = (fp - polygon_centroid(fp)) @ rot(obj.yaw).T
    reflected = -centered
    bands = []
    for d, p in (tip_points or {}).items():
        if np.asarray(reflected).std() < 1e-12:
            continue
        bands.append(Polygon(np.asarray(p) + reflected))
    band = unary_union(bands) if bands else Polygon()
    region = swept.difference(band)
    return FeasibilityRegion(swept, band, region)


def region_to_csv(region: FeasibilityRegion, path):
    """Polygon vertices of the admissible region, one ring per blank line."""
    lines = ["u_mm,v_mm"]
    for ring in region.vertices():
        for u, v in ring:
            lines.append(f"{u!r},{v!r}")
        lines.append("")
    from pathlib import Path
    Path(path).write_text("\n".join(lines).rstrip("\n") + "\n")
    return path
