"""Draw one noise grid and print snapshots of the three solvers.

The same Gaussian increments drive the exact regularized solution, the
mode-wise Crank-Nicolson scheme, and the finite element scheme, so the
three columns below should track each other closely.
"""

import numpy as np

from stochheat import fem, noise, solvers

grid = noise.sample(n_star=256, j_star=256, horizon=1.0, seed=20260826)
system = fem.assemble(fem.Mesh(64))
M = 256

u_hat = solvers.regularized_exact(grid, K=256, t=1.0)
spectral = solvers.cn_time_discrete(grid, K=256, M=M)
nodal = solvers.cn_fem_spde(grid, system, M=M)

x = np.linspace(0.1, 0.9, 9)
print("x      u_hat      cn-spectral  cn-fem")
for xi in x:
    a = float(u_hat.evaluate(np.array([xi]))[0])
    b = float(spectral.field(M).evaluate(np.array([xi]))[0])
    c = float(fem.evaluate_nodal(nodal.states[M], system.mesh,
                                 np.array([xi]))[0])
    print("%.2f  %9.5f  %9.5f    %9.5f" % (xi, a, b, c))
