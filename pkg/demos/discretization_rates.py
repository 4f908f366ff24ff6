"""Exact strong-error rates of the stochastic Crank-Nicolson schemes.

Time sweep: mode-wise CN against the regularized solution at the final
time (order ~1/4 in dtau).  Space sweep: finite elements against the
time-discrete scheme on a matching step (order ~1/2 in h).  Both errors
are exact Gaussian second moments.
"""

import math

import numpy as np

from stochheat import errors, fem, solvers

print("time discretization (noise grid 256 x 256)")
taus, errs = [], []
for e in range(2, 8):
    M = 2 ** e
    err = errors.tdr_error_exact(M, M, 256, 256, K=1024)
    print("  dtau = %-10g E = %.6f" % (1.0 / M, err))
    taus.append(1.0 / M)
    errs.append(err)
print("  fitted slope %.3f" % np.polyfit(np.log(taus), np.log(errs), 1)[0])

print("space discretization (dtau matched to the noise step)")
M = 1024
K = 1024
lam2 = (math.pi * np.arange(1, K + 1)) ** 2
a_spec = solvers.propagator_time_profile(lam2, M, 1.0 / M, 1024)
hs, errs = [], []
for e in range(3, 7):
    eig = fem.generalized_eigen(fem.assemble(fem.Mesh(2 ** e)))
    err = errors.sdr_error_exact(M, M, 1024, 256, eig, K=K,
                                 a_spectral=a_spec)
    print("  h = %-10g E = %.6f" % (2.0 ** -e, err))
    hs.append(2.0 ** -e)
    errs.append(err)
print("  fitted slope %.3f" % np.polyfit(np.log(hs), np.log(errs), 1)[0])
