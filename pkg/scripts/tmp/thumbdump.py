import numpy as np
from handsim.scene import build_scene
from handsim.solver import StaticsSolver
from handsim.hand import ActuatorCommand, link_segments
from handsim.compliance import WristModel

desc = {
  'schema_version': 1, 'plane': 'side',
  'hand': {'mount': [0, 66, 0, 0, 0, 0], 'skin': 'soft', 'finger': 'soft'},
  'fixtures': [{'kind': 'table', 'height': 0.0, 'friction': 0.8, 'stiffness': 60.0}],
  'objects': [{'name': 'obj', 'footprint': [[-14,-30],[14,-30],[14,30],[-14,30]],
               'height': 40, 'mass_g': 60, 'pose': [140, 20, 0.0]}],
}
scene = build_scene(desc)
solver = StaticsSolver(scene)
spec = scene.hand.spec
state = None
wrist = WristModel.preset('replay')
import numpy as np
for t in np.linspace(0, 1, 8):
    cmd = ActuatorCommand.from_dict(spec, {
        'index_mcp': 2 + t*8, 'index_pipdip': t*7,
        'middle_mcp': 2 + t*8, 'middle_pipdip': t*7,
        'ring_mcp': 2 + t*8, 'ring_pipdip': t*7,
        'little_mcp': 2 + t*8, 'little_pipdip': t*7,
        'thumb_mcp': 8 - t*7, 'thumb_pipdip': t*1.0})
    state = solver.solve(cmd, wrist=wrist, warm_start=state.configuration if state else None)
    solver.update_anchors(state)

x = solver.pack(state.configuration)
solver._sync_objects(x)
origin, angle = solver._hand_frame(x)
from handsim.hand import DIGITS
jc = {d: solver._digit_joints_world(x, d, origin, angle) for d in DIGITS}
print('hand origin:', np.round(origin,1), 'obj pose:', np.round(state.configuration.object_poses['obj'],2))
print('thumb joints:', {k: round(v,3) for k,v in state.configuration.joints.as_dict().items() if k.startswith('thumb')})
print('thumb chain:', [tuple(np.round(j,1)) for j in jc['thumb']])
for pair in solver._pairs:
    if pair.digit == 'thumb':
        pts, skin_r = solver._pair_points(pair, origin, angle, jc)
        for i, p in enumerate(pts):
            sd, n, dp = solver._sd(pair.body, p)
            pen = skin_r - sd
            if pen > -12:
                print(f'{pair.key} #{i} p=({p[0]:6.1f},{p[1]:6.1f}) sd={sd:6.2f} pen={pen:6.2f} n=({n[0]:+.2f},{n[1]:+.2f})')
