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

def grasp(h, w, x_obj, mass, hook, tight, press=-88.0, drag=(-11.0,-86.0), dt=0.1, trace=False):
    global IDS
    desc = json.loads(data_path('scenes', 'tabletop.json').read_text())
    desc['objects'] = [{'name': 'obj', 'footprint': [[-w/2,-30],[w/2,-30],[w/2,30],[-w/2,30]],
                        'height': h, 'mass_g': mass, 'friction': 1.0, 'pose': [x_obj, h/2, 0.0]}]
    scene = build_scene(desc)
    IDS = scene.hand.spec.actuator_ids
    traj = Trajectory('g', [
        Segment('hand', [hand_wp(fingers(2.0, 0.0, 8.0, 0.0), 0.6)]),
        Segment('arm', [arm_wp(0, press, 1.2)]),
        Segment('hand', [hand_wp(hook, 1.2)]),
        Segment('arm', [arm_wp(drag[0], drag[1], 1.4)]),
        Segment('hand', [hand_wp(tight, 1.0)]),
        Segment('arm', [arm_wp(drag[0], 40.0, 5.0)]),
    ])
    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5)
    if trace:
        for st in run.steps[40::4]:
            op = st.state.configuration.object_poses['obj']
            by = {}
            for c in st.state.contacts:
                if c.body_id == 'object:obj' and c.penetration > 0:
                    d0 = c.link_id.split('/')[0][:2]
                    by[d0] = round(by.get(d0, 0.0) + c.normal, 2)
            print(f'   {st.index:2d} {st.kind:4s} arm=({st.arm_pose[0]:4.0f},{st.arm_pose[1]:4.0f}) obj=({op[0]:6.1f},{op[1]:5.1f},{np.degrees(op[2]):+4.0f}) {by}', flush=True)
    final = run.final
    clear = final.configuration.object_poses['obj'][1] - h/2
    cons = sorted({c.link_id for c in final.contacts if c.body_id=='object:obj' and c.penetration>0})
    return clear, cons

HOOK = fingers(8.5, 7.0, 1.0, 1.0)
TIGHT = fingers(12.0, 9.0, -0.5, 1.5)
for h, w, xo, m in ((40, 26, 147, 65), (25, 22, 145, 45), (60, 30, 148, 85), (15, 18, 143, 30), (80, 40, 152, 100)):
    t0=time.time()
    clear, cons = grasp(h, w, xo, m, HOOK, TIGHT, trace=(h==40))
    print(f'h={h} w={w} m={m}: clear={clear:6.1f} held={clear>30 and len(cons)>=2} {cons} ({time.time()-t0:.0f}s)', flush=True)
