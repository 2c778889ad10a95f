import sys, time
sys.path.insert(0, '/root/pkg/scripts')
import numpy as np
from handsim.hand import data_path
from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim import waypoints
import json

def grasp(entry, family, dt=0.1):
    desc = json.loads(data_path('scenes', 'tabletop.json').read_text())
    desc['objects'] = [{
        'name': 'obj', 'footprint': entry['fp'], 'height': entry['h'],
        'mass_g': entry['m'], 'friction': 1.0,
        'pose': [entry['x'], entry['h']/2, 0.0]}]
    scene = build_scene(desc)
    traj = waypoints.load(data_path('trajectories', f'grasp_{family}.traj'))
    run = run_trajectory(scene, traj, dt=dt, tolerance=3e-5)
    final = run.final
    clear = final.configuration.object_poses['obj'][1] - entry['h']/2
    cons = sorted({c.link_id for c in final.contacts if c.body_id=='object:obj' and c.penetration>0})
    return clear, cons

def rect(w, depth=60):
    return [[-w/2,-depth/2],[w/2,-depth/2],[w/2,depth/2],[-w/2,depth/2]]

cases = [
    ('flat',  dict(fp=rect(16), h=10, m=25, x=130)),
    ('flat',  dict(fp=rect(24), h=14, m=40, x=133)),
    ('small', dict(fp=rect(26), h=32, m=60, x=147)),
    ('small', dict(fp=rect(30), h=40, m=70, x=145)),
    ('box',   dict(fp=rect(30), h=55, m=90, x=145)),
    ('tall',  dict(fp=rect(30), h=80, m=110, x=145)),
    ('tall',  dict(fp=rect(28), h=95, m=120, x=146)),
    ('wide',  dict(fp=rect(55), h=60, m=120, x=146)),
    ('wide',  dict(fp=rect(70), h=75, m=150, x=152)),
]
for family, e in cases:
    t0 = time.time()
    clear, cons = grasp(e, family)
    held = clear > 30 and len(cons) >= 2
    print(f'{family:6s} h={e["h"]:3.0f} w={e["fp"][1][0]*2:3.0f} x={e["x"]}: clear={clear:6.1f} held={held} {cons} ({time.time()-t0:.0f}s)', flush=True)
