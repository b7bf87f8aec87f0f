import numpy as np
import pytest

from nonherm.blockmat import EMINUS, EPLUS, F
from nonherm.characteristics import (CharState, Trajectory, flow_backward,
                                     flow_forward, flow_state_implicit,
                                     integral_identity_check,
                                     m12_evolution_check, t_star,
                                     trajectory_to_rows)
from nonherm.errors import CrossedZero, NoBracket

CASES = [
    (0.3 + 0.1j, 0.5, 0.25),
    (0.8 - 0.2j, 0.2, 0.05),
    (1.1 + 0.0j, 0.4, 0.1),
    (0.0 + 0.0j, 1.0, 0.3),
    (0.5 + 0.5j, -0.6, 0.2),   # lower half of the axis
]


def test_exact_relations_along_flow():
    for z0, eta0, T in CASES:
        traj = flow_forward(z0, eta0, T)
        s0 = traj.states[0]
        for st in traj.states:
            fac = np.exp(-(st.t - s0.t) / 2)
            assert abs(st.z - fac * s0.z) < 1e-12
            assert abs(st.m - s0.m / fac) < 1e-8
            # affine law of |eta|/rho
            target = np.exp(-st.t) * abs(s0.eta) / s0.rho \
                - np.pi * (1 - np.exp(-st.t))
            assert abs(abs(st.eta) / st.rho - target) < 1e-6


def test_implicit_matches_integrator():
    for z0, eta0, T in CASES:
        traj = flow_forward(z0, eta0, T)
        for st in traj.states[1::8]:
            imp = flow_state_implicit(z0, eta0, st.t)
            assert abs(imp.eta - st.eta) < 1e-8
            assert abs(imp.z - st.z) < 1e-12


def test_t_star_closed_form_and_crossing():
    for z0, eta0, _ in CASES:
        ts = t_star(z0, eta0)
        st = flow_state_implicit(z0, eta0, 0.0)
        closed = np.log1p(abs(eta0) / (np.pi * st.rho))
        assert abs(ts - closed) < 1e-12
        with pytest.raises(CrossedZero):
            flow_forward(z0, eta0, ts + 0.01)
        with pytest.raises(NoBracket):
            flow_state_implicit(z0, eta0, ts + 0.01)
    with pytest.raises(ValueError):
        t_star(0.3, 0.0)


def test_monotone_quantities():
    """|eta_t|, |eta_t|/rho_t and the affine target all strictly
    decrease along every trajectory."""
    for z0, eta0, T in CASES:
        traj = flow_forward(z0, eta0, T)
        etas = np.array([abs(st.eta) for st in traj.states])
        ratios = np.array([abs(st.eta) / st.rho for st in traj.states])
        rhos = np.array([st.rho for st in traj.states])
        assert np.all(np.diff(etas) < 0)
        assert np.all(np.diff(ratios) < 0)
        # eta * rho ~ local eigenvalue count also decreases
        assert np.all(np.diff(etas * rhos) < 0)


def test_backward_roundtrip():
    for z_T, eta_T, T in [(0.4 + 0.2j, 0.05, 0.3), (0.9, 0.01, 0.5),
                          (1.05, 0.02, 0.2), (0.2 - 0.3j, -0.04, 0.4)]:
        z0, eta0, dist = flow_backward(z_T, eta_T, T)
        assert abs(z0 - np.exp(T / 2) * z_T) < 1e-14
        st = flow_state_implicit(z0, eta0, T)
        assert abs(st.eta - eta_T) < 1e-7
        assert abs(st.z - z_T) < 1e-12
        assert dist >= abs(eta0) > 0
    z0, eta0, dist = flow_backward(0.3, 0.1, 0.0)
    assert (z0, eta0, dist) == (0.3, 0.1, 0.0)


def test_integral_identity():
    traj = flow_forward(0.3 + 0.1j, 0.5, 0.25)
    res, ratio = integral_identity_check(traj, 0.02, 0.22, alpha=2.0)
    assert res < 1e-6
    assert 0 < ratio < 64
    assert integral_identity_check(traj, 0.1, 0.1) == (0.0, 0.0)
    with pytest.raises(ValueError):
        integral_identity_check(traj, 0.2, 0.1)


def test_evolution_identities():
    rng = np.random.default_rng(5)
    traj1 = flow_forward(0.3 + 0.1j, 0.4, 0.2)
    traj2 = flow_forward(0.5 - 0.2j, -0.3, 0.2)
    for A1, A2 in [(EPLUS, EPLUS), (EMINUS, EPLUS), (F, EMINUS)]:
        res = m12_evolution_check(traj1, traj2, A1, A2, t=0.1, h=1e-4)
        assert res["avg"] < 1e-5
        assert res["iso_m12"] < 1e-5
        assert res["iso_m121"] < 1e-4
    # random block observables
    from nonherm.blockmat import BlockMatrix
    for _ in range(3):
        A1 = BlockMatrix(rng.standard_normal((2, 2))
                         + 1j * rng.standard_normal((2, 2)))
        A1 = A1 * (1.0 / A1.norm())
        res = m12_evolution_check(traj1, traj2, A1, EPLUS, t=0.1, h=1e-4)
        assert res["iso_m12"] < 1e-5
        assert res["iso_m121"] < 1e-4


def test_trajectory_rows_and_state_access():
    traj = flow_forward(0.3, 0.5, 0.2, samples=9)
    rows = trajectory_to_rows(traj)
    assert len(rows) == 9
    assert rows[0][0] == 0.0 and rows[0][3] == 0.5
    st = traj.state_at(0.1)
    assert isinstance(st, CharState)
    assert abs(st.t - 0.1) < 1e-15


def test_bad_inputs():
    with pytest.raises(ValueError):
        flow_forward(0.3, 0.0, 0.1)
    with pytest.raises(ValueError):
        flow_backward(0.3, 0.0, 0.1)
