import sys, json
import numpy as np
from handsim.hand import data_path
from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim import waypoints

desc = json.loads(data_path('scenes', 'tabletop.json').read_text())
desc['objects'] = [{'name': 'obj', 'footprint': [[-15,-30],[15,-30],[15,30],[-15,30]],
                    'height': 45, 'mass_g': 70, 'friction': 1.0, 'pose': [145, 22.5, 0.0]}]
scene = build_scene(desc)
traj = waypoints.load(data_path('trajectories', 'grasp_small.traj'))
run = run_trajectory(scene, traj, dt=0.1, tolerance=3e-5)
for st in run.steps:
    if st.index < 14: continue
    op = st.state.configuration.object_poses['obj']
    byface = {}
    for c in st.state.contacts:
        if c.body_id == 'object:obj' and c.penetration > 0:
            face = 'R' if c.normal_dir[0] > 0.5 else ('L' if c.normal_dir[0] < -0.5 else 'T')
            digit = c.link_id.split('/')[0][:2]
            key = f'{face}:{digit}'
            byface[key] = byface.get(key, 0.0) + c.normal
    print(f'{st.index:2d} {st.kind:4s} arm_y={st.arm_pose[1]:4.0f} obj=({op[0]:6.1f},{op[1]:5.1f},{np.degrees(op[2]):+4.0f}) ' +
          ' '.join(f'{k}={v:.2f}' for k,v in sorted(byface.items())), flush=True)
