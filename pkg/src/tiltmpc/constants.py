"""Frame conventions and numeric guards used throughout the package.

Axes follow NED (north-east-down): gravity points along +z, altitude gain
is negative z, and rotor lift acts along -z of the body frame.

State vector layout (12,): [x, y, z, roll, pitch, yaw, vx, vy, vz, p, q, r]
with inertial-frame position/velocity and body-frame angular rate.

Wrench layout (6,): [fx, fy, fz, tx, ty, tz], body-frame force and moment.

Actuator command layout (8,): [w1, w2, w3, w4, b1, b2, b3, b4], signed rotor
speeds in rpm followed by tilt angles in rad.

Rotors 1, 2 sit on the +y / -y arms and tilt about y (lateral force along x);
rotors 3, 4 sit on the +x / -x arms and tilt about x (lateral force along y).
Rotors 1, 2 spin positive, rotors 3, 4 negative; the spin sign only carries
the yaw drag-torque direction. At zero tilt every rotor lifts along -z.
"""

import numpy as np

RPM_TO_RAD = np.pi / 30.0
RAD_TO_RPM = 30.0 / np.pi

# Margin (rad) kept between |pitch| and pi/2 before the Euler-rate map blows up.
GIMBAL_GUARD_RAD = 1e-3

# Below this per-rotor thrust (N) the tilt angle is undefined; commands snap to zero.
THRUST_EPS_N = 1e-9

# Below this lift-component magnitude (N) the tilt sensitivity is frozen inside
# the controller linearization.
LIFT_EPS_N = 1e-6

ROTOR_SPIN_SIGNS = np.array([1.0, 1.0, -1.0, -1.0])

# Sign relating a rotor's stored lateral force component to +sin(beta)*thrust.
ROTOR_LATERAL_SIGNS = np.array([1.0, -1.0, 1.0, -1.0])

# Index of the body axis (0=x, 1=y) that each rotor's tilt pushes along.
ROTOR_LATERAL_AXIS = np.array([0, 0, 1, 1], dtype=np.int64)
