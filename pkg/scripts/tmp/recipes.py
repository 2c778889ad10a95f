import json, time
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

def grasp(h, w, x_obj, open_v, press, flexed, lift=40.0, mass=None, dt=0.1):
    global IDS
    desc = json.loads(data_path('scenes', 'tabletop.json').read_text())
    desc['objects'] = [{'name': 'obj', 'footprint': [[-w/2,-30],[w/2,-30],[w/2,30],[-w/2,30]],
                        'height': h, 'mass_g': mass if mass else min(150, 20 + h*w*0.04),
                        'friction': 1.0, 'pose': [x_obj, h/2, 0.0]}]
    scene = build_scene(desc)
    IDS = scene.hand.spec.actuator_ids
    traj = Trajectory('g', [
        Segment('hand', [hand_wp(open_v, 0.6)]),
        Segment('arm', [arm_wp(0, press, 1.2)]),
        Segment('hand', [hand_wp(flexed, 1.2)]),
        Segment('arm', [arm_wp(0, lift, 1.6)]),
    ])
    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5)
    final = run.final
    clear = final.configuration.object_poses['obj'][1] - h/2
    cons = sorted({c.link_id for c in final.contacts if c.body_id=='object:obj' and c.penetration>0})
    return clear, cons

OPEN = fingers(2.0, 0.0, 8.0, 0.0)
A = dict(open_v=OPEN, press=-84.0, flexed=fingers(8.0, 7.0, 1.0, 1.0))
B = dict(open_v=OPEN, press=-78.0, flexed=fingers(10.0, 7.0, 2.0, 1.0))

print('--- RECIPE A (low rake pinch): x_obj = 124 + w/2')
for h, w in ((20, 16), (30, 24), (38, 30), (12, 20)):
    t0=time.time()
    clear, cons = grasp(h, w, 124 + w/2, **A)
    print(f'  h={h} w={w}: clear={clear:6.1f} held={clear>30 and len(cons)>=2} {cons} ({time.time()-t0:.0f}s)', flush=True)
print('--- RECIPE B (wrap): x_obj = 158 - w/2')
for h, w in ((55, 30), (70, 30), (90, 34)):
    t0=time.time()
    clear, cons = grasp(h, w, 158 - w/2, **B)
    print(f'  h={h} w={w}: clear={clear:6.1f} held={clear>30 and len(cons)>=2} {cons} ({time.time()-t0:.0f}s)', flush=True)
