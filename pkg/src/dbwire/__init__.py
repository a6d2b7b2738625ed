"""Drive-by-wire stack for a small Ackermann vehicle.

Wire protocol and liveness, twist-to-Ackermann kinematics, steering
calibration and servo loop, layered safety interlocks, a simulated vehicle
plant with a synthetic depth scene, the RGB-D perception pipeline, and the
gateway service that ties them together over UDP (or an in-process twin).
"""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
