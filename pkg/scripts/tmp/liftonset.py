import json, math, time
import numpy as np
from handsim.hand import data_path
from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.waypoints import ArmWaypoint, HandWaypoint, Segment, Trajectory

IDS = None
def hand_wp(vals, dur=1.0):
    d = np.zeros(12)
    for k, v in vals.items():
        d[IDS.index(k)] = v
    return HandWaypoint(tuple(d), dur)
def arm_wp(x, y, dur=1.0):
    return ArmWaypoint((x, y, 0.0), (1.0, 0.0, 0.0, 0.0), 'replay', dur)
def fingers(mcp, pip, tm, tp):
    v = {}
    for d in ('index','middle','ring','little'):
        v[f'{d}_mcp'] = mcp; v[f'{d}_pipdip'] = pip
    v['thumb_mcp'] = tm; v['thumb_pipdip'] = tp
    return v

h, w, xo, m = 40, 26, 147, 65
desc = json.loads(data_path('scenes', 'tabletop.json').read_text())
desc['objects'] = [{'name': 'obj', 'footprint': [[-w/2,-30],[w/2,-30],[w/2,30],[-w/2,30]],
                    'height': h, 'mass_g': m, 'friction': 1.0, 'pose': [xo, h/2, 0.0]}]
scene = build_scene(desc)
IDS = scene.hand.spec.actuator_ids
traj = Trajectory('g', [
    Segment('hand', [hand_wp(fingers(2.0, 0.0, 8.0, 0.0), 0.6)]),
    Segment('arm', [arm_wp(0, -88.0, 1.2)]),
    Segment('hand', [hand_wp(fingers(8.5, 7.0, 1.0, 1.0), 1.2)]),
    Segment('arm', [arm_wp(-11.0, -86.0, 1.4), arm_wp(-11.0, 40.0, 3.0)]),
])
run = run_trajectory(scene, traj, dt=0.1, tolerance=3e-5)
for st in run.steps:
    if st.index < 37: continue
    if st.index > 55: break
    op = st.state.configuration.object_poses['obj']
    det = []
    for c in st.state.contacts:
        if c.body_id == 'object:obj' and c.penetration > 0:
            d0 = c.link_id.split('/')[0][:2] + c.link_id.split('/')[1][-1] if '/' in c.link_id else c.link_id[:4]
            f = 'R' if c.normal_dir[0] > 0.5 else ('L' if c.normal_dir[0] < -0.5 else ('T' if c.normal_dir[1] > 0.5 else 'B'))
            det.append(f'{f}:{d0}={c.normal:.2f}@({c.point[0]:.0f},{c.point[1]:.0f})')
    print(f'{st.index:2d} arm=({st.arm_pose[0]:4.0f},{st.arm_pose[1]:4.0f}) obj=({op[0]:6.1f},{op[1]:5.1f},{np.degrees(op[2]):+4.0f})', ' '.join(det[:6]), flush=True)
final = run.final
print('final clear:', final.configuration.object_poses['obj'][1] - h/2)
