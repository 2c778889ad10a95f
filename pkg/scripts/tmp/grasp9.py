import sys; sys.path.insert(0, '/root/pkg/scripts')
import time
import numpy as np
import calibrate_grasp as cg
from handsim.waypoints import ArmWaypoint, HandWaypoint, Segment, Trajectory
from handsim.scene import build_scene
from handsim.solver import run_trajectory
from handsim.probes import probe_finger
from handsim.compliance import plateau_metric, stiffness_ratio

soft = probe_finger('soft'); rigid = probe_finger('rigid')
r, _ = stiffness_ratio(rigid, soft)
print(f'probe: plateau={plateau_metric(soft):.3f} ratio={r:.1f}', flush=True)

def arm_rel(x, y, dur=1.0):
    return ArmWaypoint((x, y, 0.0), (1.0, 0.0, 0.0, 0.0), 'replay', dur)

def traj4(ids, fingers=(20.0, 7.0), thumb=(1.0, 1.5)):
    open_hand = np.zeros(12)
    for d in ("index", "middle", "ring", "little"):
        open_hand[ids.index(f"{d}_mcp")] = 2.0
    open_hand[ids.index("thumb_mcp")] = 8.0
    flexed = open_hand.copy()
    for d in ("index", "middle", "ring", "little"):
        flexed[ids.index(f"{d}_mcp")] = fingers[0]
        flexed[ids.index(f"{d}_pipdip")] = fingers[1]
    flexed[ids.index("thumb_mcp")] = thumb[0]
    flexed[ids.index("thumb_pipdip")] = thumb[1]
    return Trajectory("tabletop", [
        Segment("hand", [HandWaypoint(tuple(open_hand), 0.6)]),
        Segment("arm", [arm_rel(0, -84.0, 1.2)]),
        Segment("hand", [HandWaypoint(tuple(flexed), 1.2)]),
        Segment("arm", [arm_rel(0, 40.0, 1.6)]),
    ])

for h, w in ((10, 30), (30, 30), (50, 30), (50, 40), (80, 45)):
    t0 = time.time()
    x_obj = 124 + w/2
    scene = build_scene({**cg.tabletop_desc(width=w, height=h, x_obj=x_obj),
                         'hand': {'mount': [0, 150, 0, 0, 0, 0.0], 'skin': 'soft', 'finger': 'soft'}})
    ids = scene.hand.spec.actuator_ids
    run = run_trajectory(scene, traj4(ids), dt=0.1, tolerance=3e-5)
    final = run.final
    clearance = final.configuration.object_poses['obj'][1] - h/2
    cons = sorted({c.link_id for c in final.contacts if c.body_id=='object:obj' and c.penetration>0})
    held = clearance > 30 and len(cons) >= 2
    print(f'h={h:3d} w={w}: clear={clearance:6.1f} held={held} {cons} ({time.time()-t0:.0f}s)', flush=True)
print('DONE')
