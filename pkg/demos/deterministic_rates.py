"""Rates of the modified Crank-Nicolson scheme without noise.

Starting from the first sine mode: the time-discrete scheme converges
in the discrete L2(0,T; L2) norm, and the finite element version loses
nothing beyond O(h^2) relative to it (midpoint-average norm).
"""

import numpy as np

from stochheat import deterministic, fem
from stochheat.spectral import SpectralField

v0 = SpectralField(np.array([1.0]))

print("time refinement")
taus, errs = [], []
for e in range(4, 11):
    M = 2 ** e
    num = deterministic.modified_cn_spectral(v0, M, 1.0 / M)
    ref = deterministic.exact_trajectory(v0, M, 1.0 / M)
    err = deterministic.l2t_error(num, ref)
    print("  dtau = %-10g error = %.3e" % (1.0 / M, err))
    taus.append(1.0 / M)
    errs.append(err)
print("  fitted slope %.3f" % np.polyfit(np.log(taus), np.log(errs), 1)[0])

print("mesh refinement (dtau = 2^-12)")
M = 4096
ref = deterministic.modified_cn_spectral(v0, M, 1.0 / M)
hs, errs = [], []
for e in range(3, 8):
    system = fem.assemble(fem.Mesh(2 ** e))
    num = deterministic.modified_cn_fem(v0, system, M, 1.0 / M)
    err = deterministic.l2t_error(num, ref, "midpoint", system)
    print("  h = %-10g error = %.3e" % (2.0 ** -e, err))
    hs.append(2.0 ** -e)
    errs.append(err)
print("  fitted slope %.3f" % np.polyfit(np.log(hs), np.log(errs), 1)[0])
