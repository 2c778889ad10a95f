import numpy as np
from handsim.scene import build_scene
from handsim.solver import StaticsSolver
from handsim.hand import ActuatorCommand
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
# approach gradually: ramp the finger commands so the pinch forms with warm starts
cmds = []
for t in np.linspace(0, 1, 8):
    cmds.append(ActuatorCommand.from_dict(spec, {
        'index_mcp': 2 + t*8, 'index_pipdip': t*7,
        'middle_mcp': 2 + t*8, 'middle_pipdip': t*7,
        'ring_mcp': 2 + t*8, 'ring_pipdip': t*7,
        'little_mcp': 2 + t*8, 'little_pipdip': t*7,
        'thumb_mcp': 8 - t*7, 'thumb_pipdip': t*1.0}))
state = None
wrist = WristModel.preset('replay')
for i, cmd in enumerate(cmds):
    state = solver.solve(cmd, wrist=wrist, warm_start=state.configuration if state else None)
    solver.update_anchors(state)
cmd = cmds[-1]
def faces(st):
    by = {}
    for c in st.contacts:
        if c.body_id == 'object:obj' and c.penetration > 0:
            f = 'R' if c.normal_dir[0] > 0.5 else ('L' if c.normal_dir[0] < -0.5 else 'T')
            by[f] = by.get(f, 0.0) + c.normal
    return by
print('after pinch ramp:', {k: round(v,2) for k,v in faces(state).items()},
      'obj:', np.round(state.configuration.object_poses['obj'],1), flush=True)
# now lift the arm in 3mm steps
for k in range(20):
    solver.arm_command = solver.arm_command + np.array([0, 3.0, 0, 0])
    state = solver.solve(cmd, wrist=wrist, warm_start=state.configuration)
    solver.update_anchors(state)
    op = state.configuration.object_poses['obj']
    if k % 3 == 0 or k == 19:
        print(f'lift {3*(k+1):3.0f}mm: obj=({op[0]:6.1f},{op[1]:5.1f},{np.degrees(op[2]):+4.0f}) faces=' +
              str({kk: round(vv,2) for kk,vv in faces(state).items()}), flush=True)
