import math

import numpy as np
import pytest

import ipfasst


def test_quadrature_m2():
    nodes, q, q_delta = ipfasst.quadrature(2)
    assert nodes == [0.0, 0.5, 1.0]
    np.testing.assert_allclose(q, [[0, 0, 0], [0, 0.75, -0.25], [0, 1, 0]], atol=1e-15)
    np.testing.assert_allclose(q_delta, [[0, 0, 0], [0, 0.5, 0], [0, 0.5, 0.5]], atol=1e-15)


def test_damping():
    assert ipfasst.damping_factor(1, -5.0) == 0.0
    # M=2, z=-1: the sweep contracts by 1/9
    assert ipfasst.damping_factor(2, -1.0) == pytest.approx(1 / 9, rel=1e-12)
    z, rho = ipfasst.damping_scan(2, 20)
    assert len(z) == len(rho) == 20
    assert all(0 <= r < 1 for r in rho)
    assert ipfasst.iteration_matrix(2, -1.0).shape == (3, 3)


def test_config_resolution_and_errors():
    cfg = ipfasst.resolve_config("weak-scaling", ["nx=64"])
    assert cfg["nx"] == "64"
    assert cfg["experiment"] == "weak-scaling"
    assert "strong-3d" in ipfasst.experiment_names()
    with pytest.raises(ValueError, match="levels"):
        ipfasst.resolve_config("weak-scaling", ["variant=IPFASST", "levels=1"])
    with pytest.raises(OSError):
        ipfasst.resolve_config("damping", config="/nonexistent/cfg.txt")


def test_single_run_backward_euler():
    rows, csv = ipfasst.run_experiment(
        "single-run",
        {"variant": "SDC", "levels": 1, "nodes": 1, "stencil": 2, "nx": 16, "nt": 1,
         "smoother": "gauss-seidel", "mg_tol": 1e-14, "tol": 1e-12},
    )
    assert len(rows) == 1 and rows[0]["status"] == "ok"
    d = -4 * 16**2 * math.sin(math.pi / 32) ** 2
    be = 1 / (1 - d)
    assert rows[0]["ode_error"] == pytest.approx(abs(be - math.exp(d)), rel=1e-9)
    assert csv.startswith("step,iterations,vcycles,residual,ode_error,pde_error,status\n")
    assert "# config experiment=single-run" in csv


def test_damping_experiment_table():
    rows, _ = ipfasst.run_experiment("damping", ["damping_points=4", "damping_nodes=2,4"])
    assert [r["nodes"] for r in rows] == [2] * 4 + [4] * 4
