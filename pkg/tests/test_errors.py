import math

import numpy as np
import pytest

from stochheat import errors, fem, noise, solvers


def test_modeling_error_zero_at_start():
    assert errors.modeling_error_exact(0.0, 4, 4, 10) == 0.0


def test_modeling_error_against_quadrature_oracle():
    a = errors.modeling_error_exact(1.0, 2, 2, 60, include_tail=False)
    b = errors.modeling_error_quadrature(1.0, 2, 2, 60)
    assert abs(a - b) <= 1e-8 * b


def test_modeling_error_tail_tiny_for_large_K():
    lo = errors.modeling_error_exact(1.0, 8, 8, 2000, include_tail=False)
    hi = errors.modeling_error_exact(1.0, 8, 8, 2000, include_tail=True)
    assert hi >= lo
    # tail of sum 1/(2 lam^2) beyond K=2000 is about 2.5e-5 in Z^2
    assert hi - lo < 1e-4
    # and including the tail approximates a much larger truncation
    ref = errors.modeling_error_exact(1.0, 8, 8, 200000, include_tail=False)
    assert abs(hi - ref) < 1e-6


def test_modeling_error_monotone_under_refinement():
    base = errors.modeling_error_exact(1.0, 8, 8, 4000)
    finer_x = errors.modeling_error_exact(1.0, 8, 32, 4000)
    finer_t = errors.modeling_error_exact(1.0, 64, 8, 4000)
    assert finer_x < base
    assert finer_t < base


def test_modeling_error_second_moment_identity():
    # E||u_hat(T)||^2 + Z(T)^2 = E||u(T)||^2 for the K-truncated pair,
    # because the regularized solution is the projection of the exact one
    n, j, K = 8, 8, 800
    m = solvers.map_regularized(n, j, 1.0, K, 1.0)
    lam2 = (math.pi * np.arange(1, K + 1)) ** 2
    exact2 = float((-np.expm1(-2.0 * lam2) / (2.0 * lam2)).sum())
    z = errors.modeling_error_exact(1.0, n, j, K, include_tail=False)
    assert abs(m.second_moment() + z**2 - exact2) < 1e-13


def test_tdr_against_monte_carlo():
    n = j = 16
    K, M = 64, 8
    exact = errors.tdr_error_exact(M, M, n, j, K=K)
    dmap = solvers.map_regularized(n, j, 1.0, K, 1.0).diff(
        solvers.map_cn_spectral(n, j, 1.0, K, M, M))

    def one(seed):
        d = dmap.reconstruct(noise.sample(n, j, 1.0, seed))
        return float(d @ d)

    mean, se = errors.mc_error(one, 500, base_seed=21)
    assert abs(mean - exact**2) < 3.5 * se


def test_tdr_decreases_with_steps():
    vals = [errors.tdr_error_exact(M, M, 64, 64, K=256)
            for M in (4, 8, 16, 32)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_sdr_decreases_with_mesh():
    out = []
    for n in (4, 8, 16):
        eig = fem.generalized_eigen(fem.assemble(fem.Mesh(n)))
        out.append(errors.sdr_error_exact(32, 32, 32, 32, eig, K=128))
    assert out[2] < out[1] < out[0]


def test_triangle_inequality_exact():
    # ||u - U_h|| <= ||u - U|| + ||U - U_h|| with everything on one grid
    n = j = 32
    K = 128
    for M in (8, 16):
        for mesh_n in (8, 16):
            eig = fem.generalized_eigen(fem.assemble(fem.Mesh(mesh_n)))
            tdr = errors.tdr_error_exact(M, M, n, j, K=K)
            sdr = errors.sdr_error_exact(M, M, n, j, eig, K=K)
            tot = errors.total_error_exact(M, M, n, j, eig, K=K)
            assert tot <= tdr + sdr + 1e-12 * (tdr + sdr)


def test_mc_error_unbiased_on_known_distribution():
    rng_mean, se = errors.mc_error(
        lambda seed: float(np.random.default_rng(seed).normal() ** 2), 2000)
    assert abs(rng_mean - 1.0) < 3.5 * se


def test_mc_error_needs_samples():
    with pytest.raises(ValueError):
        errors.mc_error(lambda s: 1.0, 1)


def test_fit_rate_recovers_slope():
    steps = np.array([0.1, 0.05, 0.025, 0.0125])
    errs = 3.0 * steps**0.5
    slope, intercept, resid = errors.fit_rate(steps, errs)
    assert abs(slope - 0.5) < 1e-12
    assert abs(math.exp(intercept) - 3.0) < 1e-12
    assert resid < 1e-12


def test_fit_rate_window_uses_finest():
    steps = [0.4, 0.2, 0.1, 0.05, 0.025]
    errs = [10.0, 1.0, 0.5 ** 0.5 * 1.0, 0.5, 0.5 ** 1.5]
    slope, _, _ = errors.fit_rate(steps, errs, window=4)
    assert abs(slope - 0.5) < 1e-12


def test_fit_rate_rejects_bad_input():
    with pytest.raises(ValueError):
        errors.fit_rate([0.1, -0.2], [1.0, 2.0])
    with pytest.raises(ValueError):
        errors.fit_rate([0.1, 0.2], [0.0, 2.0])
    with pytest.raises(ValueError):
        errors.fit_rate([0.1], [1.0])


def test_report_csv_layout():
    rep = errors.ErrorReport("tdr")
    rep.add_row(0, 0.5, 0.25, 0.125, math.nan, 16, 0.125)
    rep.fit("dtau", window=2) if len(rep.rows) > 1 else None
    text = rep.to_csv()
    lines = text.strip().split("\n")
    assert lines[0] == ("study,level,dt,dx,dtau,h,K,"
                        "error_exact,error_mc,stderr")
    assert lines[1].startswith("tdr,0,0.5,0.25,0.125,nan,16,0.125,nan,nan")
    assert lines[-1].startswith("slope,")
    assert not any(l.endswith(",") for l in lines)
