import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonherm.blockmat import (E1, E2, EMINUS, EPLUS, F, FSTAR, BlockMatrix,
                              block)
from nonherm.errors import SingularStability
from nonherm.stability import (SolvedPoint, a_complement, b12_inverse,
                               control_params, hat_m12, lemma_beta_report,
                               m12, m121, s_operator, stability_apply,
                               stability_eigs, trace_formula_oracle)


def rand_point(rng, zmax=1.2, eta_lo=1e-3, eta_hi=2.0, disk=False):
    while True:
        z = rng.uniform(-zmax, zmax) + 1j * rng.uniform(-zmax, zmax)
        if not disk or abs(z) <= zmax:
            break
    eta = rng.uniform(eta_lo, eta_hi) * rng.choice([-1.0, 1.0])
    return SolvedPoint.from_params(z, eta)


def test_s_operator_special_values():
    assert s_operator(EPLUS).isclose(EPLUS)
    assert s_operator(EMINUS).isclose(-1 * EMINUS)
    assert s_operator(F).isclose(0 * F)
    assert s_operator(FSTAR).isclose(0 * F)
    # linearity and embedding consistency
    rng = np.random.default_rng(0)
    A = BlockMatrix(rng.standard_normal((2, 2))
                    + 1j * rng.standard_normal((2, 2)))
    n = 3
    full = s_operator(A.embed(n))
    assert full.isclose(s_operator(A))


def test_closed_form_small_eigenvalues():
    # coincident bulk points at vanishing eta: beta_minus degenerates
    p = SolvedPoint.from_params(0.6, 1e-9)
    bundle = stability_eigs(p, p)
    assert abs(bundle.beta_plus - 1.28) < 1e-6
    assert abs(bundle.beta_minus) < 1e-6
    # antipodal points: product equals squared distance
    p1 = SolvedPoint.from_params(0.6, 1e-9)
    p2 = SolvedPoint.from_params(-0.6, 1e-9)
    b = stability_eigs(p1, p2)
    assert abs(b.beta_plus - 2.0) < 1e-6
    assert abs(b.beta_minus - 0.72) < 1e-6
    assert abs(b.beta_plus * b.beta_minus - 0.36 * 4) < 1e-6


def test_eigen_relations_random():
    rng = np.random.default_rng(7)
    for _ in range(300):
        p1, p2 = rand_point(rng), rand_point(rng)
        b = stability_eigs(p1, p2)
        for beta, R in ((b.beta_plus, b.R_plus), (b.beta_minus, b.R_minus)):
            res = stability_apply(p1, p2, R) - beta * R
            assert np.abs(res.b).max() < 1e-10
        # left eigenvectors of the adjoint-type operator
        for beta, L in ((b.beta_plus, b.L_plus), (b.beta_minus, b.L_minus)):
            Ls = L.adjoint()
            applied = Ls - s_operator(p1.M.adjoint() @ Ls
                                      @ p2.M.adjoint())
            res = applied - np.conj(beta) * Ls
            assert np.abs(res.b).max() < 1e-10
        # F and F* are exactly fixed
        assert stability_apply(p1, p2, F).isclose(F, tol=1e-14)
        assert stability_apply(p1, p2, FSTAR).isclose(FSTAR, tol=1e-14)
        # sum and product closed forms
        u1u2 = p1.u * p2.u
        zz = p1.z * np.conj(p2.z)
        assert abs(b.beta_plus + b.beta_minus - (2 - 2 * u1u2 * zz.real)) \
            < 1e-12
        prod = (u1u2 * abs(p1.z - p2.z) ** 2
                - p1.m**2 * (p2.u / p1.u) * (1 - p1.u)
                - p2.m**2 * (p1.u / p2.u) * (1 - p2.u)
                + (1 - p1.u) * (1 - p2.u))
        assert abs(b.beta_plus * b.beta_minus - prod) < 1e-12


def test_b12_inverse_defining_equation():
    rng = np.random.default_rng(11)
    for _ in range(100):
        p1, p2 = rand_point(rng), rand_point(rng)
        K = BlockMatrix(rng.standard_normal((2, 2))
                        + 1j * rng.standard_normal((2, 2)))
        X = b12_inverse(p1, p2, K)
        assert stability_apply(p1, p2, X).isclose(K, tol=1e-10)


def test_m12_dense_operator_oracle():
    """The 2-unknown reduction equals inversion of the full linear
    operator on 2n x 2n matrices at n=3."""
    rng = np.random.default_rng(13)
    n = 3
    dim = (2 * n) ** 2
    for _ in range(200):
        p1, p2 = rand_point(rng), rand_point(rng)
        M1, M2 = p1.M.embed(n), p2.M.embed(n)
        op = np.zeros((dim, dim), dtype=complex)
        basis = np.eye(dim)
        for k in range(dim):
            A = basis[k].reshape(2 * n, 2 * n)
            img = A - M1 @ s_operator(A).embed(n) @ M2
            op[:, k] = img.ravel()
        A = BlockMatrix(rng.standard_normal((2, 2))
                        + 1j * rng.standard_normal((2, 2)))
        K = M1 @ A.embed(n) @ M2
        dense = np.linalg.solve(op, K.ravel()).reshape(2 * n, 2 * n)
        reduced = m12(p1, A, p2).embed(n)
        assert np.abs(dense - reduced).max() < 1e-10

        inner = (p1.M @ A @ m12(p1, EPLUS, p2)).embed(n) \
            + M1 @ s_operator(m12(p1, A, p2)).embed(n) \
            @ m12(p1, EPLUS, p2).embed(n)
        # three-factor approximation solves the same operator at (p1,p1)
        op11 = np.zeros((dim, dim), dtype=complex)
        for k in range(dim):
            B = basis[k].reshape(2 * n, 2 * n)
            op11[:, k] = (B - M1 @ s_operator(B).embed(n) @ M1).ravel()
        K121 = (p1.M @ A @ m12(p2, EPLUS, p1)
                + p1.M @ s_operator(m12(p1, A, p2)) @ m12(p2, EPLUS, p1))
        dense121 = np.linalg.solve(op11, K121.embed(n).ravel())
        red121 = m121(p1, A, p2, EPLUS).embed(n)
        assert np.abs(dense121.reshape(2 * n, 2 * n) - red121).max() < 1e-10


def test_trace_formula_oracle_matches_reduction():
    rng = np.random.default_rng(17)
    for _ in range(200):
        p1, p2 = rand_point(rng), rand_point(rng)
        for s1 in (1, -1):
            for s2 in (1, -1):
                want = trace_formula_oracle(p1, p2, (s1, s2))
                A = EPLUS if s1 > 0 else EMINUS
                B = EPLUS if s2 > 0 else EMINUS
                got = (m12(p1, A, p2) @ B).trace_avg()
                assert abs(want - got) < 1e-10


def test_singular_stability_raised():
    p = SolvedPoint.from_params(0.6, 1e-15)
    with pytest.raises(SingularStability):
        m12(p, EPLUS, p)


def test_hat_m12_symmetry_and_bounds():
    rng = np.random.default_rng(19)
    for _ in range(100):
        p1 = rand_point(rng, eta_lo=1e-3, eta_hi=1.0, disk=True)
        p2 = rand_point(rng, eta_lo=1e-3, eta_hi=1.0, disk=True)
        # cross-direction averages vanish
        for A, B in ((EPLUS, EMINUS), (EMINUS, EPLUS)):
            val = (hat_m12(p1, A, p2) @ B).trace_avg()
            assert abs(val) < 1e-12
        # averaged-size bound in the |Im m| calibration of the density
        r1, r2 = np.pi * p1.rho, np.pi * p2.rho
        dz = abs(p1.z - p2.z)
        ghat = (dz ** 2 + r1 * abs(p1.eta) + r2 * abs(p2.eta)
                + (p1.eta / r1) ** 2 + (p2.eta / r2) ** 2)
        val = abs((hat_m12(p1, EPLUS, p2) @ EPLUS).trace_avg())
        assert val <= 16 * r1 * r2 / ghat


def test_m12_norm_bound():
    rng = np.random.default_rng(23)
    for _ in range(200):
        p1, p2 = rand_point(rng), rand_point(rng)
        ctrl = control_params(p1, p2)
        for A in (EPLUS, EMINUS, F, E1):
            assert m12(p1, A, p2).norm() <= 16 / ctrl.gamma


def test_comparability_report():
    rng = np.random.default_rng(29)
    for _ in range(500):
        p1 = rand_point(rng, eta_lo=1e-4, eta_hi=1.0)
        p2 = rand_point(rng, eta_lo=1e-4, eta_hi=1.0)
        rep = lemma_beta_report(p1, p2)
        assert abs(rep["diff_dichotomy"]) < 1e-12
        for key in ("prod_ratio", "sum_ratio", "bb_ratio"):
            assert 1 / 64 <= rep[key] <= 64, (key, rep[key])
        assert rep["diff_re_over_rho"] <= 64
        assert rep["diff_im_over_dz"] <= 64
        assert rep["min_beta_over_gamma"] >= 1 / 64


def test_a_complement():
    rng = np.random.default_rng(31)
    A = BlockMatrix(rng.standard_normal((2, 2)))
    Ac = a_complement(A)
    assert abs((Ac @ EPLUS).trace_avg()) < 1e-14
    assert abs((Ac @ EMINUS).trace_avg()) < 1e-14
    assert a_complement(F).isclose(F)
