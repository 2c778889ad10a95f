"""Quasi-static equilibrium by total-potential-energy minimization.

Unknowns are the hand's effective joint coordinates (MCP flexion, abduction
and the coupled PIP/DIP coordinate per digit), the 6-DoF wrist deflection and
the planar pose of every movable object.  The energy is the sum of

* series-elastic tendon terms (MCP spring, PIP/DIP flexor path, abduction),
* PIP/DIP extension return springs,
* regularized skin/contact penalties (normal curve integral plus a
  friction-capped tangential spring, C1 across the stick/slip boundary),
* the wrist spring, and
* object gravity referenced to the build pose.

Minimization is a projected quasi-Newton (L-BFGS-B) over box constraints from
the joint limits.  Friction anchors and the knob angle are updated between
steps only, so each solve minimizes a well-defined smooth energy; that is
what makes warm-started continuation deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .compliance import SkinModel, WristModel
from .geometry import ROT90, rot
from .hand import (DIGITS, ActuatorCommand, HandSpec, JointVector,
                   _digit_commands, tendon_to_rest_pose)
from .scene import Knob, LoadcellPlate, Scene, SceneObject, Table
from .waypoints import (ArmWaypoint, HandWaypoint, Segment, Trajectory,
                        interpolate, steps_for)

LINK_FRACTIONS = (0.35, 0.7, 1.0)


class SolverNumericError(RuntimeError):
    pass


@dataclass
class SystemConfiguration:
    joints: JointVector
    wrist_deflection: np.ndarray  # 6-dof small displacement
    object_poses: dict  # name -> (x, y, phi)

    def copy(self):
        return SystemConfiguration(
            self.joints.copy(), self.wrist_deflection.copy(),
            {k: v.copy() for k, v in self.object_poses.items()})


@dataclass
class ContactRecord:
    link_id: str
    body_id: str
    point: np.ndarray  # world, mm
    normal_dir: np.ndarray  # outward from the touched body
    normal: float  # N
    shear: float  # N, signed along the surface tangent
    slip: bool
    penetration: float  # mm
    key: str = ""  # anchor bookkeeping key (one per skin sample point)


@dataclass
class EnergyBreakdown:
    series: float = 0.0
    return_spring: float = 0.0
    contact: float = 0.0
    wrist: float = 0.0
    gravity: float = 0.0

    @property
    def total(self):
        return self.series + self.return_spring + self.contact + self.wrist + self.gravity

    def as_dict(self):
        return {"series": self.series, "return_spring": self.return_spring,
                "contact": self.contact, "wrist": self.wrist, "gravity": self.gravity}


@dataclass
class EquilibriumState:
    configuration: SystemConfiguration
    contacts: list
    tendon_tensions: dict
    energy: float
    breakdown: EnergyBreakdown
    converged: bool
    residual: float
    iterations: int = 0


class _Pair:
    """One potential contact: a point set on a moving part against a body."""

    __slots__ = ("key", "part", "body", "digit", "link", "fractions", "palm_points",
                 "corner", "corner_owner", "skin", "mu", "k_t", "k_n")

    def __init__(self, key, part, body, **kw):
        self.key = key
        self.part = part  # "digit" | "palm" | "corner"
        self.body = body
        self.digit = kw.get("digit")
        self.link = kw.get("link")
        self.fractions = kw.get("fractions")
        self.palm_points = kw.get("palm_points")
        self.corner = kw.get("corner")
        self.corner_owner = kw.get("corner_owner")
        self.skin = kw.get("skin")
        self.mu = kw["mu"]
        self.k_t = kw["k_t"]
        self.k_n = kw.get("k_n")


class StaticsSolver:
    """One solver instance per scene; strictly serialized, never reentrant."""

    def __init__(self, scene: Scene, tolerance=1e-6, max_iterations=600):
        self.scene = scene
        self.spec = scene.hand.spec
        self.skin = scene.hand.skin
        self.tolerance = tolerance
        self.max_iterations = max_iterations
        self.anchors = {}  # pair key -> anchor point in body-local coordinates
        self.caps = {}  # pair key -> frozen friction cap mu*N for the current step
        self.arm_command = np.zeros(4)  # x, y, z, yaw relative to the scene mount
        self.wrist = WristModel.preset("locked")
        self._object_index = {o.name: i for i, o in enumerate(scene.objects)}
        self._build_layout()
        self._pairs = None

    # -- state vector layout ------------------------------------------------

    def _build_layout(self):
        lo, hi = [], []
        for d in DIGITS:
            ds = self.spec.digits[d]
            lo.append(ds.joint_limits["mcp_flex"][0]); hi.append(ds.joint_limits["mcp_flex"][1])
            if ds.abduction_axis.present:
                lo.append(ds.abduction_axis.limits[0]); hi.append(ds.abduction_axis.limits[1])
            else:
                lo.append(0.0); hi.append(0.0)
            clo, chi = ds.coupled_pip_limits()
            lo.append(clo); hi.append(chi)
        lo += [0.0] * 6  # wrist bounds patched per solve from the wrist model
        hi += [0.0] * 6
        self._obj_slices = {}
        for o in self.scene.objects:
            start = len(lo)
            for k, free in enumerate(o.dof):
                if free:
                    if k == 0:
                        lo.append(o.pose[0] - 600); hi.append(o.pose[0] + 600)
                    elif k == 1:
                        lo.append(o.pose[1] - 400); hi.append(o.pose[1] + 600)
                    else:
                        lo.append(-math.pi); hi.append(math.pi)
            self._obj_slices[o.name] = (start, len(lo))
        self.lower = np.array(lo)
        self.upper = np.array(hi)
        self.n = len(lo)

    def pack(self, config: SystemConfiguration):
        x = np.zeros(self.n)
        for di, d in enumerate(DIGITS):
            q = config.joints.digit_angles(d)
            x[3 * di + 0] = q[0]
            x[3 * di + 1] = q[1]
            x[3 * di + 2] = q[2]
        x[15:21] = config.wrist_deflection
        for o in self.scene.objects:
            s, e = self._obj_slices[o.name]
            pose = config.object_poses.get(o.name, o.pose)
            vals = [pose[k] for k in range(3) if o.dof[k]]
            x[s:e] = vals
        return x

    def unpack(self, x) -> SystemConfiguration:
        joints = np.zeros(20)
        clamped = []
        for di, d in enumerate(DIGITS):
            ds = self.spec.digits[d]
            c = ds.pipdip_coupling_ratio
            mcp, abd, pipc = x[3 * di], x[3 * di + 1], x[3 * di + 2]
            joints[4 * di + 0] = mcp
            joints[4 * di + 1] = abd
            joints[4 * di + 2] = pipc
            joints[4 * di + 3] = c * pipc
            for k, name in ((0, "mcp_flex"), (1, "mcp_abduct"), (2, "pip")):
                i = 3 * di + k
                if abs(x[i] - self.lower[i]) < 1e-12 or abs(x[i] - self.upper[i]) < 1e-12:
                    if self.lower[i] != self.upper[i]:
                        clamped.append(f"{d}.{name}")
        poses = {}
        for o in self.scene.objects:
            s, _ = self._obj_slices[o.name]
            pose = o.pose.copy()
            j = s
            for k in range(3):
                if o.dof[k]:
                    pose[k] = x[j]
                    j += 1
            poses[o.name] = pose
        return SystemConfiguration(JointVector(joints, clamped), x[15:21].copy(), poses)

    def rest_configuration(self, cmd: ActuatorCommand) -> SystemConfiguration:
        joints = tendon_to_rest_pose(self.spec, cmd)
        return SystemConfiguration(joints, np.zeros(6),
                                   {o.name: o.pose.copy() for o in self.scene.objects})

    # -- hand kinematics ----------------------------------------------------

    def _hand_frame(self, x):
        mount = self.scene.hand.mount
        origin = mount[:2] + self.arm_command[:2] + x[15:17]
        angle = mount[5] + self.arm_command[3] + x[20]
        return origin, angle

    def _digit_joints_world(self, x, digit, origin, angle):
        ds = self.spec.digits[digit]
        base = origin + rot(angle) @ np.asarray(ds.base_offset)
        base_dir = angle + ds.base_angle
        sign = ds.curl_sign
        di = DIGITS.index(digit)
        mcp, pipc = x[3 * di], x[3 * di + 2]
        c = ds.pipdip_coupling_ratio
        cums = (mcp, mcp + pipc, mcp + pipc + c * pipc)
        joints = [base]
        p = base
        for L, cum in zip(ds.link_lengths, cums):
            th = base_dir + sign * cum
            p = p + L * np.array([math.cos(th), math.sin(th)])
            joints.append(p)
        return joints  # [base, j1, j2, tip]

    def digit_lateral(self, digit):
        return float(self.scene.hand.mount[2] + self.arm_command[2]
                     + self.spec.digits[digit].lateral_offset)

    # -- contact bodies -----------------------------------------------------

    def _bodies(self):
        out = []
        for f in self.scene.fixtures:
            out.append(f)
        for o in self.scene.objects:
            out.append(o)
        return out

    def _body_id(self, body):
        if isinstance(body, SceneObject):
            return f"object:{body.name}"
        return f"fixture:{body.fixture_id}"

    def _body_friction(self, body):
        if isinstance(body, SceneObject):
            return body.friction
        return body.friction if not isinstance(body, Table) else body.friction

    def _engaged_digits(self, body):
        allow = getattr(body, "digits", ())
        digits = list(DIGITS) + ["palm"]
        if allow:
            digits = [d for d in digits if d in allow]
        if isinstance(body, SceneObject):
            out = []
            for d in digits:
                if d == "palm":
                    lat = self.scene.hand.mount[2] + self.arm_command[2]
                    half = self.spec.palm_half_depth
                else:
                    lat = self.digit_lateral(d)
                    half = self.spec.digits[d].link_half_width
                if abs(lat - body.lateral_center) <= body.lateral_halfwidth + half:
                    out.append(d)
            return out
        return digits

    def _palm_local_points(self):
        poly = np.asarray(self.spec.palm_geometry, dtype=float)
        pts = [poly[i] for i in range(len(poly))]
        for i in range(len(poly)):
            pts.append(0.5 * (poly[i] + poly[(i + 1) % len(poly)]))
        return np.asarray(pts)

    def build_pairs(self):
        """Enumerate potential contacts for the current engagement state."""
        pairs = []
        skin = self.skin
        for body in self._bodies():
            bid = self._body_id(body)
            if isinstance(body, SceneObject):
                for f in self.scene.fixtures:
                    if isinstance(f, (Table, LoadcellPlate)):
                        mu = math.sqrt(body.friction * f.friction)
                        k_n = f.stiffness if isinstance(f, Table) else 50.0
                        k_t = f.tangential_stiffness if isinstance(f, Table) else 3.0
                        for ci in range(4):
                            pairs.append(_Pair(
                                f"{body.name}/corner{ci}|{self._body_id(f)}", "corner", f,
                                corner=ci, corner_owner=body, mu=mu, k_t=k_t, k_n=k_n))
            # for skin contacts the body's friction acts as a scale on the
            # skin's effective coefficient (surface preparation of the rig)
            mu_skin = skin.friction_coefficient * getattr(body, "friction", 1.0)
            for d in self._engaged_digits(body):
                if d == "palm":
                    pairs.append(_Pair(f"palm|{bid}", "palm", body,
                                       palm_points=self._palm_local_points(),
                                       skin=skin, mu=mu_skin,
                                       k_t=skin.tangential_stiffness))
                else:
                    for link in range(3):
                        pairs.append(_Pair(f"{d}/link{link}|{bid}", "digit", body,
                                           digit=d, link=link, fractions=LINK_FRACTIONS,
                                           skin=skin, mu=mu_skin,
                                           k_t=skin.tangential_stiffness))
        self._pairs = pairs
        self._pair_by_key = {p.key: p for p in pairs}
        return pairs

    # -- signed distance dispatch -------------------------------------------

    def _sd(self, body, p):
        """Signed distance, outward normal, d(sd)/d(object pose) or None, and
        the curvature center (vertex/knob center) when the normal rotates
        with the query point."""
        if isinstance(body, Table):
            return p[1] - body.height, np.array([0.0, 1.0]), None, None
        if isinstance(body, LoadcellPlate):
            n = body.normal()
            return float(n @ (p - np.asarray(body.origin))), n, None, None
        if isinstance(body, Knob):
            d = p - np.asarray(body.center)
            r = float(np.linalg.norm(d))
            if r < 1e-9:
                return -body.radius, np.array([1.0, 0.0]), None, None
            return r - body.radius, d / r, None, np.asarray(body.center, dtype=float)
        if isinstance(body, SceneObject):
            sd, n, dpose, vertex = body.silhouette.signed_distance(p)
            return sd, n, dpose, vertex
        raise TypeError(f"unknown body {body!r}")

    def _anchor_world(self, pair, a_loc):
        """World anchor position and its derivative w.r.t. object pose."""
        body = pair.body
        if isinstance(body, Knob):
            R = rot(body.turn_angle)
            return np.asarray(body.center) + R @ a_loc, None
        if isinstance(body, SceneObject):
            R = rot(body.pose[2])
            world = body.pose[:2] + R @ a_loc
            da_dphi = ROT90 @ (R @ a_loc)
            return world, da_dphi
        return np.asarray(a_loc, dtype=float), None

    def _to_body_local(self, pair, p):
        body = pair.body
        if isinstance(body, Knob):
            return rot(-body.turn_angle) @ (np.asarray(p) - np.asarray(body.center))
        if isinstance(body, SceneObject):
            return rot(-body.pose[2]) @ (np.asarray(p) - body.pose[:2])
        return np.asarray(p, dtype=float).copy()

    # -- energy -------------------------------------------------------------

    def energy(self, x, cmd: ActuatorCommand, grad=False, breakdown=False,
               contacts_out=None):
        spec = self.spec
        per_digit = _digit_commands(spec, cmd)
        bd = EnergyBreakdown()
        g = np.zeros(self.n) if grad else None

        # series + return springs
        k_mcp_base = spec.mcp_stiffness()
        k_tendon = spec.pipdip_tendon_stiffness
        for di, d in enumerate(DIGITS):
            ds = spec.digits[d]
            k_mcp = ds.mcp_stiffness_override or k_mcp_base
            mcp_disp, pip_disp, abd_cmd = per_digit[d]
            r = ds.mcp_moment_arm
            stretch = mcp_disp - r * x[3 * di]
            bd.series += 0.5 * k_mcp * stretch * stretch
            c = ds.pipdip_coupling_ratio
            reff = ds.pipdip_moment_arms[0] + c * ds.pipdip_moment_arms[1]
            pstretch = pip_disp - reff * x[3 * di + 2]
            bd.series += 0.5 * k_tendon * pstretch * pstretch
            kret = ds.return_spring_stiffness[0] + c * c * ds.return_spring_stiffness[1]
            bd.return_spring += 0.5 * kret * x[3 * di + 2] ** 2
            if ds.abduction_axis.present:
                ka = ds.abduction_axis.series_stiffness
                adev = x[3 * di + 1] - abd_cmd
                bd.series += 0.5 * ka * adev * adev
                if grad:
                    g[3 * di + 1] += ka * adev
            if grad:
                g[3 * di] += -k_mcp * stretch * r
                g[3 * di + 2] += -k_tendon * pstretch * reff + kret * x[3 * di + 2]

        # wrist spring
        defl = x[15:21]
        bd.wrist = self.wrist.energy(defl)
        if grad:
            kt = np.asarray(self.wrist.translational_stiffness)
            kr = np.asarray(self.wrist.rotational_stiffness)
            g[15:18] += kt * defl[:3]
            g[18:21] += kr * defl[3:]

        # gravity (objects only, side scenes)
        if self.scene.gravity_on:
            for o in self.scene.objects:
                s, _ = self._obj_slices[o.name]
                y = self._obj_pose(o, x)[1]
                y0 = self.scene.nominal_placements[o.name][0][1]
                bd.gravity += o.weight * (y - y0)
                if grad and o.dof[1]:
                    g[self._dof_index(o, 1)] += o.weight

        # contacts
        self._sync_objects(x)
        if self._pairs is None:
            self.build_pairs()
        origin, angle = self._hand_frame(x)
        joint_cache = {d: self._digit_joints_world(x, d, origin, angle) for d in DIGITS}
        for pair in self._pairs:
            e = self._pair_energy(pair, x, origin, angle, joint_cache, g, contacts_out)
            bd.contact += e

        total = bd.total
        if math.isnan(total):
            for term, val in bd.as_dict().items():
                if math.isnan(val):
                    raise SolverNumericError(f"energy term '{term}' is NaN")
            raise SolverNumericError("energy is NaN")
        if breakdown and grad:
            return total, g, bd
        if breakdown:
            return total, bd
        if grad:
            return total, g
        return total

    def _dof_index(self, obj, k):
        s, _ = self._obj_slices[obj.name]
        return s + sum(1 for j in range(k) if obj.dof[j])

    def _obj_pose(self, obj, x):
        s, _ = self._obj_slices[obj.name]
        pose = obj.pose.copy()
        j = s
        for k in range(3):
            if obj.dof[k]:
                pose[k] = x[j]
                j += 1
        return pose

    def _sync_objects(self, x):
        for o in self.scene.objects:
            o.set_pose(self._obj_pose(o, x))

    def _pair_points(self, pair, origin, angle, joint_cache):
        if pair.part == "corner":
            return [pair.corner_owner.corners()[pair.corner]], 0.0
        if pair.part == "palm":
            R = rot(angle)
            return [origin + R @ lp for lp in pair.palm_points], pair.skin.thickness
        joints = joint_cache[pair.digit]
        a, b = joints[pair.link], joints[pair.link + 1]
        return [(1 - f) * a + f * b for f in pair.fractions], pair.skin.thickness

    def _pair_energy(self, pair, x, origin, angle, joint_cache, g, contacts_out):
        """Distributed skin contact: every sample point carries its own
        normal-curve penalty and friction anchor.

        The friction term uses the incremental-variational form: the cap is
        frozen at the step-start normal and the term stays active for the
        whole step even if the point separates, so the energy remains C1 and
        sliding work cannot be dodged by micro-separation.  Anchors and caps
        of separated points are retired between steps.
        """
        pts, skin_r = self._pair_points(pair, origin, angle, joint_cache)
        total = 0.0
        for idx, p in enumerate(pts):
            key = f"{pair.key}#{idx}"
            a_entry = self.anchors.get(key)
            cap = self.caps.get(key, 0.0)
            has_friction = a_entry is not None and cap > 0.0

            sd, n, dpose, center = self._sd(pair.body, p)
            pen = skin_r - sd
            if pen <= 0.0 and not has_friction:
                continue

            N = 0.0
            e_n = 0.0
            if pen > 0.0:
                if pair.part == "corner":
                    N = pair.k_n * pen
                    e_n = 0.5 * pair.k_n * pen * pen
                else:
                    N = pair.skin.normal_force(pen)
                    e_n = pair.skin.normal_energy(pen)
            dpen_dp = -n

            e_t = 0.0
            s_val = 0.0
            slip = False
            t_hat = ROT90 @ n
            a_world = da_dphi = None
            dE_ds = 0.0
            if has_friction:
                a_world, da_dphi = self._anchor_world(pair, a_entry)
                s_val = float(t_hat @ (p - a_world))
                kt = pair.k_t
                if kt * abs(s_val) <= cap:
                    e_t = 0.5 * kt * s_val * s_val
                    dE_ds = kt * s_val
                else:
                    slip = True
                    e_t = cap * abs(s_val) - cap * cap / (2.0 * kt)
                    dE_ds = cap * math.copysign(1.0, s_val)
            total += e_n + e_t

            if contacts_out is not None and pen > 0.0:
                shear = (math.copysign(min(pair.k_t * abs(s_val), cap, pair.mu * N), s_val)
                         if has_friction else 0.0)
                contacts_out.append(ContactRecord(
                    link_id=pair.key.split("|")[0], body_id=self._body_id(pair.body),
                    point=p.copy(), normal_dir=n.copy(), normal=N, shear=shear,
                    slip=slip, penetration=pen, key=key))

            if g is not None:
                cols = self._point_jacobian(pair, idx, x, origin, angle, joint_cache)
                for dof, dp in cols:
                    if pen > 0.0:
                        g[dof] += N * float(dpen_dp @ dp)
                    if has_friction:
                        ds_dp = self._ds_dp(pair, p, n, t_hat, a_world, center)
                        g[dof] += dE_ds * float(ds_dp @ dp)
                if isinstance(pair.body, SceneObject) and dpose is not None:
                    obj = pair.body
                    for k in range(3):
                        if not obj.dof[k]:
                            continue
                        gi = self._dof_index(obj, k)
                        if pen > 0.0:
                            g[gi] += N * (-dpose[k])
                        if has_friction:
                            ds_dposek = self._ds_dpose(pair, p, n, t_hat, a_world,
                                                       da_dphi, k, vertex=center)
                            g[gi] += dE_ds * ds_dposek
        return total

    def _ds_dp(self, pair, p, n, t_hat, a_world, center=None):
        # at curved features (knob rim, polygon corner) the tangent rotates
        # with the query point; include the curvature term
        if center is not None:
            d = p - center
            r = max(float(np.linalg.norm(d)), 1e-9)
            nn = d / r
            M = (np.eye(2) - np.outer(nn, nn)) / r
            return M @ (ROT90.T @ (p - a_world)) + ROT90 @ nn
        return t_hat

    def _ds_dpose(self, pair, p, n, t_hat, a_world, da_dphi, k, vertex=None):
        # s = t_hat . (p - a_world); the tangent rotates with the object
        rel = p - a_world
        if vertex is not None:
            # corner contact: the normal tracks both the point and the moving
            # vertex w: n = (p - w)/r
            d = p - vertex
            r = max(float(np.linalg.norm(d)), 1e-9)
            nn = d / r
            M = (np.eye(2) - np.outer(nn, nn)) / r
            if k < 2:
                dn = -M[:, k]
            else:
                dw = ROT90 @ (vertex - pair.body.pose[:2])
                dn = -(M @ dw)
            term = float((ROT90 @ dn) @ rel)
            if k < 2:
                return term - float(t_hat[k])
            return term - float(t_hat @ da_dphi)
        if k < 2:
            # translation moves the anchor; the surface normal stays fixed
            return float(-t_hat[k])
        # rotation: t_hat = J n with dn/dphi = J n, so dt_hat/dphi = -n;
        # the anchor sweeps with the body
        return float(-(n @ rel) - t_hat @ da_dphi)

    def _point_jacobian(self, pair, idx, x, origin, angle, joint_cache):
        """Columns (dof index, dp/ddof) for the selected candidate point."""
        cols = []
        if pair.part == "corner":
            owner = pair.corner_owner
            p = owner.corners()[pair.corner]
            if owner.dof[0]:
                cols.append((self._dof_index(owner, 0), np.array([1.0, 0.0])))
            if owner.dof[1]:
                cols.append((self._dof_index(owner, 1), np.array([0.0, 1.0])))
            if owner.dof[2]:
                cols.append((self._dof_index(owner, 2), ROT90 @ (p - owner.pose[:2])))
            return cols
        if pair.part == "palm":
            R = rot(angle)
            p = origin + R @ pair.palm_points[idx]
            cols.append((15, np.array([1.0, 0.0])))
            cols.append((16, np.array([0.0, 1.0])))
            cols.append((20, ROT90 @ (p - origin)))
            return cols
        joints = joint_cache[pair.digit]
        a, b = joints[pair.link], joints[pair.link + 1]
        f = pair.fractions[idx]
        p = (1 - f) * a + f * b
        di = DIGITS.index(pair.digit)
        ds = self.spec.digits[pair.digit]
        sign = ds.curl_sign
        c = ds.pipdip_coupling_ratio
        cols.append((3 * di, sign * (ROT90 @ (p - joints[0]))))
        if pair.link >= 1:
            dpip = ROT90 @ (p - joints[1])
            ddip = ROT90 @ (p - joints[2]) if pair.link >= 2 else np.zeros(2)
            cols.append((3 * di + 2, sign * (dpip + c * ddip)))
        cols.append((15, np.array([1.0, 0.0])))
        cols.append((16, np.array([0.0, 1.0])))
        cols.append((20, ROT90 @ (p - origin)))
        return cols

    # -- solving ------------------------------------------------------------

    def solve(self, cmd: ActuatorCommand, wrist: WristModel = None,
              warm_start: SystemConfiguration = None, track_energies=None) -> EquilibriumState:
        cmd.validate(self.spec)
        if wrist is not None:
            self.wrist = wrist
        if warm_start is not None:
            x0 = self.pack(warm_start)
            if not np.all(np.isfinite(x0)):
                raise SolverNumericError("warm start is not finite")
        else:
            x0 = self.pack(self.rest_configuration(cmd))
        md = self.wrist.max_deflection
        rot_bound = 0.7 if md > 0 else 0.0
        self.lower[15:18] = -md; self.upper[15:18] = md
        self.lower[18:21] = -rot_bound; self.upper[18:21] = rot_bound
        x0 = np.clip(x0, self.lower, self.upper)
        self.build_pairs()
        self._preproject_anchors(x0, cmd)

        def fun(x):
            e, g = self.energy(x, cmd, grad=True)
            return e, g

        callback = None
        if track_energies is not None:
            callback = lambda xk: track_energies.append(self.energy(xk, cmd))

        bounds = list(zip(self.lower, self.upper))
        options = {"maxiter": self.max_iterations, "ftol": 1e-16,
                   "gtol": min(self.tolerance * 0.3, 1e-8), "maxcor": 14, "maxls": 50}
        # stiff contact onsets can stall the line search; restarting with a
        # cleared quasi-Newton memory recovers
        x = x0
        nit = 0
        for attempt in range(4):
            res = minimize(fun, x, jac=True, method="L-BFGS-B", bounds=bounds,
                           callback=callback, options=options)
            nit += res.nit
            x_new = np.clip(res.x, self.lower, self.upper)
            e, g = self.energy(x_new, cmd, grad=True)
            residual = self._projected_gradient_norm(x_new, g)
            moved = np.max(np.abs(x_new - x)) if attempt else np.inf
            x = x_new
            if residual <= max(self.tolerance, 1e-6) or (attempt and moved < 1e-14):
                break
        res_nit = nit
        contacts = []
        _, bd = self.energy(x, cmd, breakdown=True, contacts_out=contacts)
        config = self.unpack(x)
        self._sync_objects(x)
        return EquilibriumState(
            configuration=config, contacts=contacts,
            tendon_tensions=self._tensions(x, cmd),
            energy=e, breakdown=bd,
            converged=bool(residual <= max(self.tolerance, 1e-6)),
            residual=residual, iterations=res_nit)

    def _projected_gradient_norm(self, x, g):
        pg = g.copy()
        at_lo = np.abs(x - self.lower) < 1e-12
        at_hi = np.abs(x - self.upper) < 1e-12
        pg[at_lo & (pg > 0)] = 0.0
        pg[at_hi & (pg < 0)] = 0.0
        return float(np.max(np.abs(pg))) if len(pg) else 0.0

    def _tensions(self, x, cmd):
        per_digit = _digit_commands(self.spec, cmd)
        out = {}
        k_mcp_base = self.spec.mcp_stiffness()
        for a in self.spec.actuators:
            if a.joint_group == "mcp":
                di = DIGITS.index(a.digit)
                ds = self.spec.digits[a.digit]
                k_mcp = ds.mcp_stiffness_override or k_mcp_base
                out[a.actuator_id] = k_mcp * (per_digit[a.digit][0] - ds.mcp_moment_arm * x[3 * di])
            elif a.joint_group == "pipdip":
                di = DIGITS.index(a.digit)
                ds = self.spec.digits[a.digit]
                c = ds.pipdip_coupling_ratio
                reff = ds.pipdip_moment_arms[0] + c * ds.pipdip_moment_arms[1]
                out[a.actuator_id] = self.spec.pipdip_tendon_stiffness * (
                    per_digit[a.digit][1] - reff * x[3 * di + 2])
            elif a.joint_group == "abduction":
                t = 0.0
                for d2, share in self.spec.abduction_split.items():
                    ds = self.spec.digits[d2]
                    di = DIGITS.index(d2)
                    if ds.abduction_axis.present:
                        t += ds.abduction_axis.series_stiffness * (
                            per_digit[d2][2] - x[3 * di + 1]) / ds.abduction_axis.moment_arm
                out[a.actuator_id] = t
            else:  # cmc2
                ds = self.spec.digits[a.digit]
                di = DIGITS.index(a.digit)
                out[a.actuator_id] = ds.abduction_axis.series_stiffness * (
                    per_digit[a.digit][2] - x[3 * di + 1]) / ds.abduction_axis.moment_arm
        return out

    # -- between-step bookkeeping --------------------------------------------

    def _preproject_anchors(self, x0, cmd):
        """Begin-of-step friction bookkeeping.

        Anchor and cap lifecycle is owned by the converged states (see
        update_anchors); a large commanded step can momentarily separate every
        contact at the warm start, and friction state must survive that.  Here
        we only (a) seed static friction when no history exists yet, and
        (b) return-map stored stretches into the cone at the warm-start
        geometry so no spurious barrier blocks the step.
        """
        recs = []
        self.energy(x0, cmd, contacts_out=recs)
        if not self.anchors:
            for rec in recs:
                if rec.normal <= 0:
                    continue
                pair = self._pair_by_key.get(rec.key.rsplit("#", 1)[0])
                if pair is not None and pair.mu > 0:
                    self.anchors[rec.key] = self._to_body_local(pair, rec.point)
                    self.caps[rec.key] = pair.mu * rec.normal
            return
        by_key = {r.key: r for r in recs}
        for key in list(self.anchors):
            pair = self._pair_by_key.get(key.rsplit("#", 1)[0])
            if pair is None:
                self.anchors.pop(key, None)
                self.caps.pop(key, None)
                continue
            cap = self.caps.get(key, 0.0)
            rec = by_key.get(key)
            if rec is None or cap <= 0.0:
                continue
            a_world, _ = self._anchor_world(pair, self.anchors[key])
            t_hat = ROT90 @ rec.normal_dir
            s = float(t_hat @ (rec.point - a_world))
            s_cap = cap / pair.k_t
            if abs(s) > s_cap:
                target = rec.point - t_hat * math.copysign(s_cap, s)
                self.anchors[key] = self._to_body_local(pair, target)

    def update_anchors(self, state: EquilibriumState):
        """Incremental stick-slip at a converged state: create anchors for new
        contacts, re-anchor slipping ones, retire separated points, and freeze
        each point's friction cap at mu times the converged normal force for
        the next step."""
        active = {rec.key: rec for rec in state.contacts if rec.penetration > 0}
        for key in list(self.anchors):
            if key not in active:
                self.anchors.pop(key, None)
                self.caps.pop(key, None)
        for key, rec in active.items():
            pair = self._pair_by_key.get(key.rsplit("#", 1)[0])
            if pair is None or pair.mu <= 0:
                continue
            self.caps[key] = pair.mu * rec.normal
            p_loc = self._to_body_local(pair, rec.point)
            a_entry = self.anchors.get(key)
            if a_entry is None:
                self.anchors[key] = p_loc
                continue
            if rec.slip and rec.normal > 0:
                a_world, _ = self._anchor_world(pair, a_entry)
                t_hat = ROT90 @ rec.normal_dir
                s = float(t_hat @ (rec.point - a_world))
                s_cap = pair.mu * rec.normal / pair.k_t
                target = rec.point - t_hat * math.copysign(s_cap, s)
                target_loc = self._to_body_local(pair, target)
                step = target_loc - a_entry
                vmax = pair.skin.slip_regularization_velocity if pair.skin else 5.0
                norm = float(np.linalg.norm(step))
                if norm > vmax:
                    step = step * (vmax / norm)
                self.anchors[key] = a_entry + step

    def knob_torque(self, state: EquilibriumState, knob: Knob):
        """Net z-torque of the contact reactions about the knob pivot."""
        t = 0.0
        for rec in state.contacts:
            if rec.body_id != f"fixture:{knob.fixture_id}":
                continue
            f_on_knob = -rec.normal * rec.normal_dir + rec.shear * (ROT90 @ rec.normal_dir)
            r = rec.point - np.asarray(knob.center)
            t += r[0] * f_on_knob[1] - r[1] * f_on_knob[0]
        return t

    def settle_knob(self, knob: Knob, cmd, state, max_inner=80):
        """Rotate the knob while the contact torque exceeds its dry-friction
        threshold; anchors ride with the knob so rotation relaxes the drive.

        The torque-versus-angle slope is tracked with a secant estimate so the
        quasi-static complementarity (|T| settles onto tau) resolves in a few
        re-solves regardless of the contact stiffness."""
        tau = knob.resisting_torque
        if not math.isfinite(tau):
            return state
        band = max(1e-4, 2e-3 * tau)
        k_est = None
        prev = None  # (angle, torque)
        for _ in range(max_inner):
            T = self.knob_torque(state, knob)
            excess = abs(T) - tau
            if excess <= band:
                break
            if prev is not None and abs(knob.turn_angle - prev[0]) > 1e-9:
                slope = (abs(prev[1]) - abs(T)) / abs(knob.turn_angle - prev[0])
                if slope > 1e-6:
                    k_est = slope
            if k_est is None:
                k_est = sum(self.skin.tangential_stiffness * knob.radius ** 2
                            for rec in state.contacts
                            if rec.body_id == f"fixture:{knob.fixture_id}"
                            and rec.penetration > 0) or 1.0
            prev = (knob.turn_angle, T)
            dtheta = math.copysign(min(0.1, max(2e-4, 0.9 * excess / k_est)), T)
            knob.turn_angle += dtheta
            state = self.solve(cmd, warm_start=state.configuration)
        return state


# ---------------------------------------------------------------------------
# functional wrappers matching the operation contracts


def total_energy(scene, cmd, config: SystemConfiguration, wrist=None,
                 solver: StaticsSolver = None):
    s = solver or StaticsSolver(scene)
    if wrist is not None:
        s.wrist = wrist
    x = s.pack(config)
    if not np.all(np.isfinite(x)):
        raise SolverNumericError("configuration is not finite")
    s.build_pairs()
    e, bd = s.energy(x, cmd, breakdown=True)
    return e, bd


def solve_equilibrium(scene, cmd, wrist=None, warm_start=None) -> EquilibriumState:
    return StaticsSolver(scene).solve(cmd, wrist=wrist, warm_start=warm_start)


@dataclass
class TrajectoryStep:
    index: int
    segment: int
    kind: str
    command: ActuatorCommand
    arm_pose: np.ndarray
    state: EquilibriumState


@dataclass
class TrajectoryRun:
    steps: list
    solver: StaticsSolver

    @property
    def final(self):
        return self.steps[-1].state if self.steps else None


def run_trajectory(scene: Scene, trajectory: Trajectory, dt=0.05,
                   solver: StaticsSolver = None, on_step=None,
                   overdrive=None, tolerance=None) -> TrajectoryRun:
    """Replay a trajectory quasi-statically with warm-started continuation.

    Hand and arm segments execute strictly sequentially.  ``overdrive`` maps
    actuator ids to extra tendon displacement applied on top of every replayed
    hand command (the pseudo force-control knob).  The caller's scene is left
    untouched unless a solver is passed in; solver errors are re-raised with
    the step index.
    """
    s = solver if solver is not None else StaticsSolver(scene.clone())
    if tolerance is not None:
        s.tolerance = tolerance
    overdrive = dict(overdrive or {})
    hand_cmd = np.zeros(12)
    preset = "replay"
    state = None
    steps = []
    index = 0
    for si, seg in enumerate(trajectory.segments):
        # each segment interpolates from the current channel state into its
        # first waypoint, so a recorded snapshot is a complete instruction
        if seg.kind == "hand":
            virtual = HandWaypoint(tuple(hand_cmd), seg.waypoints[0].duration_s)
        else:
            yaw = s.arm_command[3]
            quat = (math.cos(yaw / 2), 0.0, 0.0, math.sin(yaw / 2))
            virtual = ArmWaypoint((s.arm_command[0], s.arm_command[1], s.arm_command[2]),
                                  quat, preset, seg.waypoints[0].duration_s)
        wps = [virtual] + list(seg.waypoints)
        per_transition = [steps_for(w.duration_s, dt) for w in wps[1:]]
        cmds = _segment_commands(Segment(seg.kind, wps), per_transition)[1:]
        for c in cmds:
            if seg.kind == "hand":
                hand_cmd = np.asarray(c, dtype=float)
            else:
                pos, quat, preset = c
                yaw = 2.0 * math.atan2(quat[3], quat[0])
                s.arm_command = np.array([pos[0], pos[1], pos[2], yaw])
                s.wrist = WristModel.preset(preset)
            state = _solve_step(s, hand_cmd, state, index, si, seg.kind, overdrive)
            steps.append(TrajectoryStep(index, si, seg.kind,
                                        ActuatorCommand(hand_cmd, overdrive),
                                        s.arm_command.copy(), state))
            if on_step:
                on_step(steps[-1])
            index += 1
    return TrajectoryRun(steps, s)


def _segment_commands(seg: Segment, per_transition):
    if len(seg.waypoints) == 1:
        return interpolate(seg, 1)
    out = []
    for i, (a, b) in enumerate(zip(seg.waypoints[:-1], seg.waypoints[1:])):
        sub = interpolate(Segment(seg.kind, [a, b]), per_transition[i])
        if out:
            sub = sub[1:]
        out.extend(sub)
    return out


def _solve_step(solver: StaticsSolver, hand_cmd, prev_state, index, segment, kind,
                overdrive=None):
    try:
        cmd = ActuatorCommand(hand_cmd, overdrive)
        warm = prev_state.configuration if prev_state is not None else None
        state = solver.solve(cmd, warm_start=warm)
        for f in solver.scene.fixtures:
            if isinstance(f, Knob):
                state = solver.settle_knob(f, cmd, state)
        solver.update_anchors(state)
        return state
    except SolverNumericError as e:
        raise SolverNumericError(f"step {index} (segment {segment}, {kind}): {e}") from e


def write_trace(steps, path):
    """State-trace CSV: one row per step, schema versioned in a comment line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    obj_names = sorted(steps[0].state.configuration.object_poses) if steps else []
    cols = ["step"] + [f"q{i}" for i in range(20)] + [f"w{i}" for i in range(6)]
    for name in obj_names:
        cols += [f"{name}_x", f"{name}_y", f"{name}_phi"]
    cols += ["energy", "contact_count"]
    lines = ["# handsim-trace schema=1", ",".join(cols)]
    for st in steps:
        cfg = st.state.configuration
        row = [str(st.index)]
        row += [repr(float(v)) for v in cfg.joints.values]
        row += [repr(float(v)) for v in cfg.wrist_deflection]
        for name in obj_names:
            row += [repr(float(v)) for v in cfg.object_poses[name]]
        row += [repr(float(st.state.energy)), str(len([c for c in st.state.contacts
                                                       if c.penetration > 0]))]
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n")
    return path
