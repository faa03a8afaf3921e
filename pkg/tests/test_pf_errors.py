import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from pathfollow.exceptions import ProjectionSingularity
from pathfollow.frames import wrap_angle
from pathfollow.paths import PathPoint, make_circle_arc, make_lemniscate
from pathfollow.pf_errors import (body_error, body_error_rhs, pt_error, pt_error_rhs, uP_of,
                                  uP_projection)
from pathfollow.vehicle import ActuationInput, VehicleState, step_fully_actuated

floats = st.floats(-50, 50, allow_nan=False)


def _pt(pd=(0.0, 0.0), psi_P=0.0, kappa=0.0, sp=1.0, gamma=0.0):
    c, s = math.cos(psi_P), math.sin(psi_P)
    return PathPoint(gamma, pd, (sp * c, sp * s), (0.0, 0.0), psi_P, kappa, sp)


def test_on_path_aligned_is_zero():
    e = pt_error((3.0, 4.0), 0.7, _pt((3.0, 4.0), 0.7))
    assert (e.s1, e.y1, e.psi_e) == (0.0, 0.0, 0.0)


def test_identity_rotation_example():
    e = pt_error((2.0, 1.0), 0.0, _pt())
    assert (e.s1, e.y1) == pytest.approx((2.0, 1.0))


def test_quarter_turn_example():
    e = pt_error((0.0, 3.0), math.pi / 2, _pt(psi_P=math.pi / 2))
    assert (e.s1, e.y1) == pytest.approx((3.0, 0.0), abs=1e-15)


@given(floats, floats, st.floats(-10, 10), st.floats(-math.pi, math.pi))
def test_frame_preserves_norm(px, py, psi, psi_P):
    e = pt_error((px, py), psi, _pt((1.0, -2.0), psi_P))
    assert e.norm() == pytest.approx(math.hypot(px - 1.0, py + 2.0), rel=1e-12, abs=1e-12)
    assert abs(e.psi_e) <= math.pi + 1e-12


def test_heading_error_branch_follows_reference():
    e = pt_error((0, 0), 2 * math.pi + 0.1, _pt(psi_P=0.0))
    assert e.psi_e == pytest.approx(0.1)
    e = pt_error((0, 0), 0.1, _pt(psi_P=0.0), psi_P=2 * math.pi)
    assert e.psi_e == pytest.approx(0.1 - 2 * math.pi)


def test_rhs_equilibrium_and_straight_line():
    from pathfollow.pf_errors import PTError
    assert pt_error_rhs(PTError(0, 0, 0, 0), 0.5, 0.5, 0.0) == (0.0, 0.0, 0.0)
    e = PTError(0.0, 1.3, 0.4, 0.0)
    ds1, dy1, _ = pt_error_rhs(e, 0.5, 0.2, 0.0)
    assert dy1 == pytest.approx(0.5 * math.sin(0.4))


def _fd_pt(path, state, gamma, gdot, inp, h=1e-4):
    """Finite differences of the path-frame error along a short simulated arc."""
    out = []
    s = state
    for k in range(3):
        g = gamma + gdot * k * h
        pt = path.eval(g)
        ref = path.eval(gamma).psi_P
        psi_P = ref + wrap_angle(pt.psi_P - ref)
        e = pt_error(s.p, s.psi, pt, psi_P)
        out.append(np.array([e.s1, e.y1, e.psi_e]))
        s = step_fully_actuated(s, inp, h)
    return (-3 * out[0] + 4 * out[1] - out[2]) / (2 * h)


@pytest.mark.parametrize("path", [make_circle_arc(radius=8.0), make_lemniscate(20.0)],
                         ids=["circle", "lemniscate"])
def test_pt_rhs_matches_finite_differences(path):
    rng = np.random.default_rng(11)
    for _ in range(25):
        g = rng.uniform(0.3, 1.2)
        pt = path.eval(g)
        off = rng.uniform(-2, 2, 2)
        state = VehicleState(pt.pd[0] + off[0], pt.pd[1] + off[1], pt.psi_P + rng.uniform(-1, 1),
                             vc=tuple(rng.uniform(-0.2, 0.2, 2)))
        inp = ActuationInput(rng.uniform(0.2, 1.0), rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2))
        gdot = rng.uniform(0.0, 0.1)
        fd = _fd_pt(path, state, g, gdot, inp)
        e = pt_error(state.p, state.psi, pt, pt.psi_P)
        rhs = np.array(pt_error_rhs(e, inp.u, uP_of(pt, gdot), pt.kappa, inp.r, state.vc,
                                    pt.psi_P, inp.v))
        assert np.linalg.norm(fd - rhs) / max(np.linalg.norm(rhs), 1e-6) < 1e-3


def test_body_error_examples():
    be = body_error((0.0, 0.0), 0.0, (0.0, 0.0), (1.0, 0.0))
    assert be.eB == (-1.0, 0.0)
    psi, eps = 0.8, (1.0, 0.3)
    c, s = math.cos(psi), math.sin(psi)
    offset = (c * eps[0] - s * eps[1], s * eps[0] + c * eps[1])
    be = body_error((2.0 + offset[0], 1.0 + offset[1]), psi, (2.0, 1.0), eps)
    assert be.eB == pytest.approx((0.0, 0.0), abs=1e-15)


def test_body_rhs_matches_finite_differences():
    path = make_lemniscate(20.0)
    rng = np.random.default_rng(12)
    h = 1e-4
    for _ in range(25):
        g = rng.uniform(0, 6)
        gdot = rng.uniform(0.0, 0.05)
        pt = path.eval(g)
        eps = tuple(rng.uniform(-1.5, 1.5, 2))
        state = VehicleState(*(np.array(pt.pd) + rng.uniform(-3, 3, 2)), rng.uniform(-3, 3),
                             vc=tuple(rng.uniform(-0.2, 0.2, 2)))
        inp = ActuationInput(rng.uniform(-1, 1), rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3))
        vals, s = [], state
        for k in range(3):
            vals.append(np.array(body_error(s.p, s.psi, path.eval(g + gdot * k * h).pd, eps).eB))
            s = step_fully_actuated(s, inp, h)
        fd = (-3 * vals[0] + 4 * vals[1] - vals[2]) / (2 * h)
        be = body_error(state.p, state.psi, pt.pd, eps)
        rhs = np.array(body_error_rhs(be, inp.u, inp.r, state.psi, pt.pd_prime, gdot, inp.v,
                                      state.vc))
        assert np.linalg.norm(fd - rhs) / max(np.linalg.norm(rhs), 1e-6) < 1e-3


def test_body_rhs_delta_form():
    # with v = 0: -S(r) eB + Delta (u, r) - R pd' gamma_dot
    from pathfollow.guidance import delta_matrix
    be = body_error((1.0, 2.0), 0.4, (0.0, 0.0), (0.7, -0.2))
    u, r = 0.6, 0.3
    dx, dy = body_error_rhs(be, u, r, 0.4, (0.0, 0.0), 0.0)
    ex, ey = be.eB
    expect = np.array([r * ey, -r * ex]) + delta_matrix((0.7, -0.2)) @ np.array([u, r])
    assert (dx, dy) == pytest.approx(tuple(expect), abs=1e-14)


def test_uP_examples():
    assert uP_of(_pt(sp=1.0), 0.5) == 0.5
    assert uP_projection(0.5, 0.3, 0.0, 4.0) == pytest.approx(0.5 * math.cos(0.3))
    with pytest.raises(ProjectionSingularity):
        uP_projection(0.5, 0.0, 0.1, 10.0)
