import math

import numpy as np
import pytest

import fraclap


def test_bubble_center_value():
    u = fraclap.bubble(1, 0.4, 0.1, 0.25, points=256)
    assert u.shape == (256,)
    assert u[128] == pytest.approx(0.1 ** -0.2, rel=1e-12)


def test_integer_order_forms_agree():
    u = fraclap.bubble(1, 0.4, 0.5, 0.25)
    qd = fraclap.q_dirichlet(u, 1.0)
    qn = fraclap.q_navier(u, 1.0)
    assert qn == pytest.approx(qd, rel=1e-4)


def test_fractional_ordering():
    u = fraclap.bubble(1, 0.4, 0.5, 0.25)
    assert fraclap.q_dirichlet(u, 0.4) <= fraclap.q_navier(u, 0.4)
    assert fraclap.q_navier(u, 1.5) <= fraclap.q_dirichlet(u, 1.5)


def test_lambda1_closed_form():
    assert fraclap.lambda1(0.4, 0.0) == pytest.approx((math.pi / 2) ** 0.8, rel=1e-14)
    assert fraclap.lambda1_hardy(0.4, 0.3, points=128) > 0


def test_errors_are_translated():
    with pytest.raises(fraclap.FraclapError):
        fraclap.lambda1(0.4, 0.4)
    with pytest.raises(fraclap.FraclapError):
        fraclap.normalize_config('{"experiment": "bn-minimize", "parameters": {"m": 0.4, "s": 0.5}}')


def test_minimize_small_grid():
    r = fraclap.minimize(points=128)
    assert r["converged"]
    assert r["el_residual"] <= 1e-6
    assert len(r["coeffs"]) == 64


def test_run_gap_sweep(tmp_path):
    man = fraclap.run({"experiment": "gap-sweep"}, str(tmp_path))
    assert man["passed"]
    csv = (tmp_path / "gap.csv").read_text().splitlines()
    assert csv[0] == "m,n,r,R,omega,QD,QN,gap,bound_ratio"
    assert len(csv) == 5
    assert np.isfinite(float(csv[1].split(",")[5]))
