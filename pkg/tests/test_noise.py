
import math
import os

import numpy as np
import pytest

from stochheat import noise, quadrature


def test_sample_shape_and_determinism():
    g = noise.sample(16, 8, 1.0, seed=42)
    assert g.increments.shape == (16, 8)
    again = noise.sample(16, 8, 1.0, seed=42)
    assert np.array_equal(g.increments, again.increments)
    other = noise.sample(16, 8, 1.0, seed=43)
    assert not np.array_equal(g.increments, other.increments)


def test_increment_variance():
    # each cell increment is N(0, dt*dx); check the pooled variance
    g = noise.sample(400, 250, 1.0, seed=1)
    var = g.increments.var()
    expect = g.dt * g.dx
    assert abs(var - expect) < 0.05 * expect


def test_coarsen_sums_blocks():
    g = noise.sample(8, 8, 1.0, seed=5)
    c = noise.coarsen(g, time_factor=2, space_factor=4)
    assert (c.n_star, c.j_star) == (4, 2)
    manual = g.increments.reshape(4, 2, 2, 4).sum(axis=(1, 3))
    assert np.array_equal(c.increments, manual)


def test_coarsen_rejects_nondivisible():
    g = noise.sample(8, 8, 1.0, seed=5)
    with pytest.raises(ValueError):
        noise.coarsen(g, time_factor=3)


def test_w_eval_piecewise_constant():
    g = noise.sample(4, 4, 1.0, seed=9)
    t = np.array([0.1, 0.1])
    x = np.array([0.3, 0.26])
    vals = noise.w_eval(g, t, x)
    assert vals[0] == vals[1]  # same cell
    expect = g.increments[0, 1] / (g.dt * g.dx)
    assert vals[0] == expect


def test_mode_cell_integrals_match_quadrature():
    K, J = 7, 4
    B = noise.mode_cell_integrals(K, J)
    for k in (1, 3, 7):
        for j in range(J):
            val = quadrature.composite_gauss(
                lambda x: math.sqrt(2.0) * np.sin(k * math.pi * x),
                j / J, (j + 1) / J, nsub=64)
            assert abs(B[k - 1, j] - val) < 1e-13


def test_mode_cell_sq_sums_closed_form():
    J = 8
    B = noise.mode_cell_integrals(3 * J, J)
    direct = (B**2).sum(axis=1)
    closed = noise.mode_cell_sq_sums(np.arange(1, 3 * J + 1), J)
    assert np.allclose(direct, closed, rtol=1e-13, atol=1e-18)
    # k a multiple of 2J integrates to zero on every cell
    assert closed[2 * J - 1] == 0.0
    # k an odd multiple of J doubles the generic value
    assert closed[J - 1] > 0.0


def test_time_overlap_telescopes():
    # sum_n I_{k,n}(t) = (1 - e^{-lam^2 t}) / lam^2
    k, t, N = 3, 0.73, 16
    lam2 = (k * math.pi) ** 2
    vals = noise.time_overlaps(np.array([k]), t, N)
    assert abs(vals.sum() - (1.0 - math.exp(-lam2 * t)) / lam2) < 1e-18


def test_time_overlap_sq_sum_matches_direct():
    ks = np.array([1, 5, 40])
    t, N = 0.61, 32
    direct = (noise.time_overlaps(ks, t, N) ** 2).sum(axis=1)
    closed = noise.time_overlap_sq_sum(ks, t, N)
    assert np.allclose(direct, closed, rtol=1e-12, atol=1e-30)


def test_project_pi_reproduces_cell_averages():
    g = lambda t, x: np.sin(2.0 * t) * (x - x**2)
    P = noise.project_pi(g, 4, 4)
    # compare one cell against 2d quadrature
    ts, wt = quadrature.gauss_points(0.25, 0.5, nsub=16)
    xs, wx = quadrature.gauss_points(0.5, 0.75, nsub=16)
    avg = float(wt @ g(ts[:, None], xs[None, :]) @ wx) / (0.25 * 0.25)
    assert abs(P[1, 2] - avg) < 1e-12


def test_project_pi_is_contraction():
    # averaging cannot increase the L2 norm of the step function
    rng = np.random.default_rng(0)
    for _ in range(5):
        c = rng.normal(size=(8, 8))
        fine = noise.NoiseGrid(8, 8, 1.0, 0, c * (1.0 / 64.0))
        coarse = noise.coarsen(fine, 2, 2)
        norm2_fine = (fine.increments**2).sum() / (fine.dt * fine.dx)
        norm2_coarse = (coarse.increments**2).sum() / (coarse.dt * coarse.dx)
        assert norm2_coarse <= norm2_fine + 1e-12


def test_itq_isometry_monte_carlo():
    # E || W ||_{L2(strip)}^2 = total cells * cell variance / area = T * |D|
    total = 0.0
    n = 300
    for s in range(n):
        g = noise.sample(8, 8, 1.0, seed=1000 + s)
        total += (g.increments**2).sum() / (g.dt * g.dx)
    mean = total / n
    assert abs(mean - 64.0) < 3.0 * 64.0 * math.sqrt(2.0 / 64.0 / n)


def test_save_load_round_trip(tmp_path):
    g = noise.sample(8, 4, 0.5, seed=77)
    path = os.path.join(tmp_path, "grid.bin")
    noise.save_grid(g, path)
    back = noise.load_grid(path)
    assert (back.n_star, back.j_star) == (8, 4)
    assert back.horizon == 0.5
    assert back.seed == 77
    assert np.array_equal(back.increments, g.increments)


def test_header_layout(tmp_path):
    import struct
    g = noise.sample(2, 3, 0.5, seed=9)
    path = os.path.join(tmp_path, "g.bin")
    noise.save_grid(g, path)
    raw = open(path, "rb").read()
    assert len(raw) == 32 + 6 * 8
    n, j, horizon, seed = struct.unpack("<QQdQ", raw[:32])
    assert (n, j, horizon, seed) == (2, 3, 0.5, 9)
    body = np.frombuffer(raw[32:], dtype="<f8").reshape(2, 3)
    assert np.array_equal(body, g.increments)


def test_grid_immutable():
    g = noise.sample(2, 2, 1.0, seed=3)
    with pytest.raises(AttributeError):
        g.seed = 5
