"""Convergence of the noise-regularization error in space and in time.

The gap between the exact mild solution and the cell-averaged-noise
solution is a Gaussian second moment with a closed form; no sampling.
Expect roughly order 1/2 in dx and order 1/4 in dt.
"""

import numpy as np

from stochheat import errors

print("space sweep (dt = 2^-16 fixed)")
dxs, errs = [], []
for e in range(3, 9):
    dx = 2.0 ** -e
    z = errors.modeling_error_exact(1.0, 2**16, 2**e, K=8192)
    print("  dx = %-12g Z(T) = %.6f" % (dx, z))
    dxs.append(dx)
    errs.append(z)
slope = np.polyfit(np.log(dxs), np.log(errs), 1)[0]
print("  fitted slope %.3f" % slope)

print("time sweep (dx = 2^-10 fixed)")
dts, errs = [], []
for e in range(4, 13):
    z = errors.modeling_error_exact(1.0, 2**e, 2**10, K=8192)
    print("  dt = %-12g Z(T) = %.6f" % (2.0**-e, z))
    dts.append(2.0**-e)
    errs.append(z)
slope = np.polyfit(np.log(dts[-4:]), np.log(errs[-4:]), 1)[0]
print("  fitted slope %.3f" % slope)
