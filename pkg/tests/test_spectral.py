import numpy as np
import pytest

from nonherm.ensemble import EnsembleSpec, hermitize, sample
from nonherm.errors import EigenSolverFailure, IndexOutOfRange
from nonherm.spectral import (biortho_residual, chiral_vectors, eigensystem,
                              nearest_eigenvalue_index, overlap,
                              overlap_decay_statistic, singular_overlap,
                              singular_system, verify_chiral)


def test_hand_2x2_oracle():
    """Jordan-like upper-triangular 2x2 with known overlaps.

    X = [[0, a], [0, d]]: r_1 = e_1, r_2 = (a, d)/|.|, l_1 = (1, -a/d),
    l_2 = (0, 1/d) up to scale; O_12 = <l_1,l_2><r_1,r_2> = -a^2/d^2 ...
    with a = d = 1: O_11 = O_22 = 2, O_12 = O_21 = -1.
    """
    X = np.array([[0.0, 1.0], [0.0, 1.0]])
    E = eigensystem(X)
    order = np.argsort(E.sigma.real)  # sigma = 0, 1
    i0, i1 = order
    assert abs(overlap(E, i0, i0).O_ij - 2.0) < 1e-12
    assert abs(overlap(E, i1, i1).O_ij - 2.0) < 1e-12
    assert abs(overlap(E, i0, i1).O_ij - (-1.0)) < 1e-12
    assert abs(overlap(E, i1, i0).O_ij - (-1.0)) < 1e-12
    # normal matrix: all off-diagonal overlaps vanish, O_ii = 1
    D = np.diag([1.0 + 0j, -0.5j])
    En = eigensystem(D)
    assert abs(overlap(En, 0, 0).O_ij - 1.0) < 1e-14
    assert abs(overlap(En, 0, 1).O_ij) < 1e-14


def test_biorthogonality_and_reconstruction():
    spec = EnsembleSpec(n=64, seed=21)
    X = sample(spec)
    E = eigensystem(X)
    assert not E.discarded
    assert biortho_residual(E) < 1e-8
    # spectral reconstruction X = sum sigma_i r_i l_i^T
    R, L = E.right_vectors, E.left_vectors
    rec = (R * E.sigma[None, :]) @ L.T
    assert np.abs(rec - X.entries).max() < 1e-9


def test_overlap_properties():
    X = sample(EnsembleSpec(n=32, seed=5))
    E = eigensystem(X)
    for i in range(0, 32, 7):
        rep = overlap(E, i, i)
        # O_ii is real and >= 1 (squared condition number)
        assert abs(rep.O_ij.imag) < 1e-10
        assert rep.O_ij.real >= 1.0 - 1e-10
        assert rep.cos2_r == pytest.approx(1.0)
        assert rep.cos2_l == pytest.approx(1.0)
    rep = overlap(E, 0, 1)
    assert 0 <= rep.cos2_r <= 1 and 0 <= rep.cos2_l <= 1
    with pytest.raises(IndexOutOfRange):
        overlap(E, 0, 32)
    # the vectorized sup matches a direct loop
    stat = overlap_decay_statistic(E)
    direct = max(overlap(E, i, j).decay_statistic
                 for i in range(32) for j in range(32) if i != j)
    assert stat == pytest.approx(direct)


def test_discarded_defective_system():
    X = np.array([[1.0, 1.0], [0.0, 1.0]])  # Jordan block, defective
    E = eigensystem(X)
    assert E.discarded
    assert np.isinf(biortho_residual(E))
    with pytest.raises(EigenSolverFailure):
        overlap(E, 0, 1)
    with pytest.raises(EigenSolverFailure):
        overlap_decay_statistic(E)


def test_singular_system_and_chiral():
    spec = EnsembleSpec(n=24, seed=9)
    X = sample(spec)
    z = 0.3 - 0.4j
    S = singular_system(X, z)
    assert np.all(np.diff(S.lam) >= 0)
    # half-norm convention
    assert np.allclose(np.sum(np.abs(S.U) ** 2, axis=0), 0.5)
    assert np.allclose(np.sum(np.abs(S.V) ** 2, axis=0), 0.5)
    Wp, Wm = chiral_vectors(S)
    W = np.hstack([Wp, Wm])
    assert np.abs(W.conj().T @ W - np.eye(48)).max() < 1e-12
    assert verify_chiral(X, z, S) < 1e-12
    # Hermitization eigenvalues are +/- lam
    lam_h = np.linalg.eigvalsh(hermitize(X, z).H)
    assert np.allclose(np.sort(np.abs(lam_h))[::2], S.lam, atol=1e-12)


def test_singular_overlap_normalization():
    X = sample(EnsembleSpec(n=16, seed=2))
    S = singular_system(X, 0.2)
    assert singular_overlap(S, S, 0, 0) == pytest.approx(2.0)
    assert 0.0 <= singular_overlap(S, S, 0, 5) <= 2.0 + 1e-12
    S2 = singular_system(X, 0.9)
    v = singular_overlap(S, S2, 0, 0)
    assert 0.0 <= v <= 2.0 + 1e-12
    with pytest.raises(IndexOutOfRange):
        singular_overlap(S, S2, 0, 16)


def test_singular_vectors_match_kernel_at_eigenvalue():
    """At z = sigma_k the smallest singular value of X - z vanishes and
    the corresponding right singular vector spans the kernel."""
    X = sample(EnsembleSpec(n=12, seed=33))
    E = eigensystem(X)
    k = 0
    z = E.sigma[k]
    S = singular_system(X, z)
    assert S.lam[0] < 1e-12
    v = S.V[:, 0] * np.sqrt(2.0)
    r = E.right_vectors[:, k]
    c = np.vdot(v, r)
    assert np.abs(np.abs(c) - np.linalg.norm(r)) < 1e-8


def test_nearest_eigenvalue_index():
    X = sample(EnsembleSpec(n=64, seed=4))
    E = eigensystem(X)
    k = 10
    assert nearest_eigenvalue_index(E, E.sigma[k]) == k
    assert nearest_eigenvalue_index(E, 100.0 + 0j) is None
    assert nearest_eigenvalue_index(E, E.sigma[k] + 1e-3,
                                    tolerance=1e-2) == k
