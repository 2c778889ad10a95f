"""Parameterized environments and instrumented fixtures.

A scene lives in one interaction plane (x right, y up for side-view scenes;
gravity-free top view for the knob), with a lateral coordinate per body used
to decide which digit planes can touch it.  Fixtures are static (the knob may
rotate about its pivot); objects carry planar pose degrees of freedom solved
jointly with the hand.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .compliance import SkinModel, skin_for_variant
from .geometry import (ConvexPolygon, ensure_ccw, convex_hull, min_area_rect,
                       point_in_polygon, polygon_centroid, rot)
from .hand import DIGITS, HandSpec, load_hand_spec

GRAVITY_N_PER_G = 9.81e-3  # object masses are grams, forces newtons


class SceneError(ValueError):
    pass


@dataclass
class Table:
    """Horizontal support half-plane with its top surface at ``height``."""
    fixture_id: str = "table"
    height: float = 0.0
    friction: float = 1.0  # scale on the skin coefficient; material value for objects
    stiffness: float = 50.0  # N/mm per contact point
    tangential_stiffness: float = 3.0


@dataclass
class LoadcellPlate:
    """Instrumented plate reporting F_V (into the plate) and F_H (tangent)."""
    fixture_id: str = "plate"
    origin: tuple = (0.0, 0.0)
    angle: float = 0.0  # rad, tilt of the surface tangent
    length: float = 300.0  # rendering extent; contact treats it as a half-plane
    friction: float = 1.0
    digits: tuple = ()

    def normal(self):
        return np.array([-math.sin(self.angle), math.cos(self.angle)])

    def tangent(self):
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    def offset(self, dz, dtheta):
        """Pose offset between hand mount and plate: shift along the plate
        normal (positive = deeper into the hand) and tilt about the origin."""
        self.angle += dtheta
        self.origin = tuple(np.asarray(self.origin) + dz * self.normal())


@dataclass
class Knob:
    """Torque-loaded dial in a gravity-free top-view plane."""
    fixture_id: str = "knob"
    center: tuple = (0.0, 30.0)
    diameter: float = 45.0
    resisting_torque: float = 3.3  # N*mm dry-friction threshold
    friction: float = 1.0
    digits: tuple = ("thumb", "middle")
    turn_angle: float = 0.0  # rad, accumulated

    @property
    def radius(self):
        return self.diameter / 2.0


@dataclass
class SceneObject:
    """Extruded-footprint object with a planar (x, y, phi) pose in the scene.

    The side-view silhouette is the rectangle (extent along the grasp axis x
    extrusion height) centered on the center of mass.
    """
    name: str
    footprint: np.ndarray  # mm, in the table plane
    height: float
    mass_g: float
    friction: float = 0.8
    pose: np.ndarray = field(default_factory=lambda: np.zeros(3))  # x, y(mm), phi(rad)
    lateral_center: float = 0.0
    dof: tuple = (True, True, True)
    yaw: float = 0.0  # static footprint orientation on the table
    kind: str = "tabletop"  # tabletop | block

    def __post_init__(self):
        self.footprint = ensure_ccw(self.footprint)
        if self.height <= 0:
            raise SceneError(f"object '{self.name}': height must be > 0")
        centroid = polygon_centroid(self.footprint)
        if not point_in_polygon(centroid, self.footprint):
            raise SceneError(f"object '{self.name}': center of mass outside footprint")
        self.pose = np.asarray(self.pose, dtype=float)
        fp = (self.footprint - centroid) @ rot(self.yaw).T
        self.grasp_extent = float(fp[:, 0].max() - fp[:, 0].min())
        self.lateral_halfwidth = float(fp[:, 1].max() - fp[:, 1].min()) / 2.0
        hw = self.grasp_extent / 2.0
        hh = self.height / 2.0
        self.silhouette = ConvexPolygon(
            [(-hw, -hh), (hw, -hh), (hw, hh), (-hw, hh)], pose=self.pose)
        length, width, _, _ = min_area_rect(self.footprint)
        self.geometry_summary = {"length": length, "width": width, "height": self.height}

    @property
    def weight(self):
        return self.mass_g * GRAVITY_N_PER_G

    def corners(self):
        """World corner points of the side silhouette."""
        return self.silhouette.world_vertices()

    def set_pose(self, pose):
        self.pose = np.asarray(pose, dtype=float)
        self.silhouette.set_pose(self.pose)


@dataclass
class HandPlacement:
    spec: HandSpec
    skin: SkinModel
    skin_variant: str = "soft"
    finger_variant: str = "soft"
    mount: np.ndarray = field(default_factory=lambda: np.zeros(6))


class Scene:
    def __init__(self, name, plane, hand: HandPlacement, fixtures, objects,
                 defaults_applied=(), descriptor=None):
        self.name = name
        self.plane = plane  # "side" -> gravity -y; "top" -> no gravity
        self.hand = hand
        self.fixtures = list(fixtures)
        self.objects = list(objects)
        self.defaults_applied = list(defaults_applied)
        self.descriptor = descriptor
        self.nominal_placements = {o.name: (o.pose.copy(), o.lateral_center) for o in self.objects}
        names = [o.name for o in self.objects]
        if len(names) != len(set(names)):
            raise SceneError("duplicate object names")

    @property
    def gravity_on(self):
        return self.plane == "side"

    def fixture(self, fixture_id):
        for f in self.fixtures:
            if f.fixture_id == fixture_id:
                return f
        raise KeyError(fixture_id)

    def object(self, name):
        for o in self.objects:
            if o.name == name:
                return o
        raise KeyError(name)

    def table_height(self):
        for f in self.fixtures:
            if isinstance(f, Table):
                return f.height
        return None

    def measured_offset(self, name):
        """Current displacement of the object from its nominal placement
        (in-plane x, lateral)."""
        obj = self.object(name)
        pose0, lat0 = self.nominal_placements[name]
        return np.array([obj.pose[0] - pose0[0], obj.lateral_center - lat0])

    def clone(self):
        import copy
        return copy.deepcopy(self)


def apply_displacement(scene: Scene, object_id, delta_m):
    """Displace an object to exactly ``delta_m`` from its nominal placement.

    Mirrors the plate-shuffling protocol: the move applied is the commanded
    offset minus the already-measured one, so the result is idempotent.
    ``delta_m`` is (in-plane, lateral) mm.  Returns the applied move.
    """
    obj = scene.object(object_id)  # raises KeyError for unknown ids
    delta_m = np.asarray(delta_m, dtype=float)
    move = delta_m - scene.measured_offset(object_id)
    pose = obj.pose.copy()
    pose[0] += move[0]
    obj.set_pose(pose)
    obj.lateral_center += move[1]
    return move


# ---------------------------------------------------------------------------
# descriptor loading

_SCENE_KEYS = {"schema_version", "name", "plane", "hand", "fixtures", "objects"}
_HAND_KEYS = {"spec", "mount", "skin", "finger"}
_FIXTURE_KEYS = {
    "table": {"kind", "id", "height", "friction", "stiffness", "tangential_stiffness"},
    "plate": {"kind", "id", "origin", "angle", "length", "friction", "digits"},
    "knob": {"kind", "id", "center", "diameter", "resisting_torque", "friction", "digits"},
}
_OBJECT_KEYS = {"name", "footprint", "height", "mass_g", "friction", "pose",
                "lateral_center", "dof", "yaw", "kind"}


def _reject_unknown(mapping, allowed, where):
    unknown = set(mapping) - allowed
    if unknown:
        raise SceneError(f"{where}: unknown field(s) {sorted(unknown)}")


def build_scene(descriptor, base_dir=None):
    """Build a Scene from a descriptor file path or an already-parsed dict.

    Unknown fields are rejected; every defaulted field is listed in the
    returned scene's ``defaults_applied`` validation report.
    """
    if isinstance(descriptor, (str, Path)):
        path = Path(descriptor)
        base_dir = base_dir or path.parent
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise SceneError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None
        name_default = path.stem
    else:
        data = descriptor
        name_default = "scene"
    defaults = []
    _reject_unknown(data, _SCENE_KEYS, "scene")
    if data.get("schema_version") != 1:
        raise SceneError("scene: schema_version must be 1")
    plane = data.get("plane")
    if plane is None:
        plane = "side"
        defaults.append("plane=side")
    if plane not in ("side", "top"):
        raise SceneError(f"scene: unknown plane '{plane}'")
    name = data.get("name", name_default)

    hand_cfg = data.get("hand", {})
    _reject_unknown(hand_cfg, _HAND_KEYS, "hand")
    spec_ref = hand_cfg.get("spec", "default")
    if spec_ref == "default":
        spec = load_hand_spec()
        defaults.append("hand.spec=default")
    else:
        spec_path = Path(spec_ref)
        if not spec_path.is_absolute() and base_dir is not None:
            spec_path = Path(base_dir) / spec_path
        spec = load_hand_spec(spec_path)
    finger_variant = hand_cfg.get("finger", "soft")
    skin_variant = hand_cfg.get("skin", "soft")
    if "finger" not in hand_cfg:
        defaults.append("hand.finger=soft")
    if "skin" not in hand_cfg:
        defaults.append("hand.skin=soft")
    spec = spec.with_finger_variant(finger_variant)
    skin = skin_for_variant(skin_variant)
    mount = np.asarray(hand_cfg.get("mount", [0.0] * 6), dtype=float)
    if "mount" not in hand_cfg:
        defaults.append("hand.mount=origin")
    if mount.shape != (6,):
        raise SceneError("hand.mount must have 6 entries")
    placement = HandPlacement(spec=spec, skin=skin, skin_variant=skin_variant,
                              finger_variant=finger_variant, mount=mount)

    fixtures = []
    for i, f in enumerate(data.get("fixtures", [])):
        kind = f.get("kind")
        if kind not in _FIXTURE_KEYS:
            raise SceneError(f"fixtures[{i}]: unknown kind '{kind}'")
        _reject_unknown(f, _FIXTURE_KEYS[kind], f"fixtures[{i}]")
        if kind == "table":
            fixtures.append(Table(
                fixture_id=f.get("id", "table"), height=f.get("height", 0.0),
                friction=f.get("friction", 1.0), stiffness=f.get("stiffness", 50.0),
                tangential_stiffness=f.get("tangential_stiffness", 3.0)))
        elif kind == "plate":
            fixtures.append(LoadcellPlate(
                fixture_id=f.get("id", "plate"), origin=tuple(f.get("origin", (0.0, 0.0))),
                angle=f.get("angle", 0.0), length=f.get("length", 300.0),
                friction=f.get("friction", 1.0), digits=tuple(f.get("digits", ()))))
        elif kind == "knob":
            fixtures.append(Knob(
                fixture_id=f.get("id", "knob"), center=tuple(f.get("center", (0.0, 30.0))),
                diameter=f.get("diameter", 45.0),
                resisting_torque=f.get("resisting_torque", 3.3),
                friction=f.get("friction", 1.0),
                digits=tuple(f.get("digits", ("thumb", "middle")))))

    objects = []
    for i, o in enumerate(data.get("objects", [])):
        _reject_unknown(o, _OBJECT_KEYS, f"objects[{i}]")
        for req in ("name", "footprint", "height", "mass_g"):
            if req not in o:
                raise SceneError(f"objects[{i}]: missing required field '{req}'")
        if "pose" not in o:
            defaults.append(f"objects[{i}].pose=resting")
        obj = SceneObject(
            name=o["name"], footprint=np.asarray(o["footprint"], dtype=float),
            height=o["height"], mass_g=o["mass_g"], friction=o.get("friction", 0.8),
            pose=np.asarray(o.get("pose", [0.0, 0.0, 0.0]), dtype=float),
            lateral_center=o.get("lateral_center", 0.0),
            dof=tuple(o.get("dof", (True, True, True))),
            yaw=o.get("yaw", 0.0), kind=o.get("kind", "tabletop"))
        if "pose" not in o:
            th = next((x.height for x in fixtures if isinstance(x, Table)), 0.0)
            obj.set_pose([0.0, th + obj.height / 2.0, 0.0])
        objects.append(obj)

    return Scene(name, plane, placement, fixtures, objects,
                 defaults_applied=defaults, descriptor=data)


def load_object_catalog(path=None):
    """The shipped object catalog: reconstructed approximate bounding
    geometries, labeled as such, not measured data."""
    path = Path(path) if path else Path(__file__).parent / "data" / "objects" / "catalog.json"
    data = json.loads(Path(path).read_text())
    return data["objects"]


def object_from_catalog(entry, table_height=0.0):
    fp = np.asarray(entry["footprint"], dtype=float)
    obj = SceneObject(
        name=entry["name"], footprint=fp, height=entry["height"],
        mass_g=entry["mass_g"], friction=entry.get("friction", 0.8),
        pose=np.array([entry.get("x", 0.0), table_height + entry["height"] / 2.0, 0.0]),
        lateral_center=entry.get("lateral_center", 0.0),
        yaw=entry.get("yaw", 0.0))
    return obj
