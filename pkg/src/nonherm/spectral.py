"""Bi-orthogonal eigen-systems, singular systems, and overlap quantities.

For a non-normal X the right eigenvectors r_i and the left eigenvectors
l_i (rows of the inverse of the right-vector matrix) satisfy
l_j^T r_i = delta_ij without any conjugation.  The scale- and
phase-invariant overlap is O_ij = <l_i, l_j><r_i, r_j> with the
conjugate-linear-in-the-first-slot inner product <x, y> = sum conj(x) y.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import IidMatrix, hermitize
from .errors import EigenSolverFailure, IndexOutOfRange, SvdFailure

CONDITION_LIMIT = 1e12
BIORTHO_TOL = 1e-8


@dataclass(frozen=True)
class EigenSystem:
    sigma: np.ndarray
    right_vectors: np.ndarray = field(repr=False)   # columns r_i
    left_vectors: np.ndarray = field(repr=False)    # columns l_i
    vec_condition: float
    discarded: bool

    @property
    def n(self) -> int:
        return self.sigma.size


def eigensystem(X: IidMatrix | np.ndarray) -> EigenSystem:
    """Dense bi-orthogonal eigen-system of X.

    Left vectors come from inverting the right-vector matrix (columns of
    R^{-T}), which enforces l_j^T r_i = delta_ij structurally.  Systems
    with right-vector condition number above 1e12 are flagged discarded
    (near-defective) rather than aborted.
    """
    A = X.entries if isinstance(X, IidMatrix) else np.asarray(X, dtype=complex)
    try:
        sigma, R = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverFailure(str(exc)) from exc
    cond = float(np.linalg.cond(R))
    discarded = not np.isfinite(cond) or cond > CONDITION_LIMIT
    if discarded:
        L = np.full_like(R, np.nan)
    else:
        L = np.linalg.inv(R).T  # columns l_i; l_j^T r_i = delta_ij
    return EigenSystem(sigma=sigma, right_vectors=R, left_vectors=L,
                       vec_condition=cond, discarded=discarded)


@dataclass(frozen=True)
class OverlapReport:
    i: int
    j: int
    O_ij: complex
    cos2_r: float
    cos2_l: float
    decay_statistic: float


def _check_index(E: EigenSystem, i: int) -> None:
    if not 0 <= i < E.n:
        raise IndexOutOfRange(f"index {i} outside 0..{E.n - 1}")


def overlap(E: EigenSystem, i: int, j: int) -> OverlapReport:
    """Overlap O_ij = <l_i,l_j><r_i,r_j>, the normalized squared cosines
    of the vector pairs, and the pair decay statistic
    (n|sigma_i - sigma_j|^2 + 1) (cos^2_r + cos^2_l)."""
    if E.discarded:
        raise EigenSolverFailure("eigen-system was discarded (near-defective)")
    _check_index(E, i)
    _check_index(E, j)
    li, lj = E.left_vectors[:, i], E.left_vectors[:, j]
    ri, rj = E.right_vectors[:, i], E.right_vectors[:, j]
    ip_l = np.vdot(li, lj)
    ip_r = np.vdot(ri, rj)
    o_ij = complex(ip_l * ip_r)
    cos2_r = float(np.abs(ip_r) ** 2
                   / (np.vdot(ri, ri).real * np.vdot(rj, rj).real))
    cos2_l = float(np.abs(ip_l) ** 2
                   / (np.vdot(li, li).real * np.vdot(lj, lj).real))
    gap2 = np.abs(E.sigma[i] - E.sigma[j]) ** 2
    stat = (E.n * gap2 + 1.0) * (cos2_r + cos2_l)
    return OverlapReport(i=i, j=j, O_ij=o_ij, cos2_r=cos2_r, cos2_l=cos2_l,
                         decay_statistic=float(stat))


def overlap_decay_statistic(E: EigenSystem) -> float:
    """sup over pairs i != j of (n|sigma_i-sigma_j|^2 + 1)(cos^2_r + cos^2_l),
    vectorized over all pairs via Gram matrices."""
    if E.discarded:
        raise EigenSolverFailure("eigen-system was discarded (near-defective)")
    R, L, sigma = E.right_vectors, E.left_vectors, E.sigma
    gram_r = R.conj().T @ R
    gram_l = L.conj().T @ L
    nr = np.real(np.diag(gram_r))
    nl = np.real(np.diag(gram_l))
    cos2_r = np.abs(gram_r) ** 2 / np.outer(nr, nr)
    cos2_l = np.abs(gram_l) ** 2 / np.outer(nl, nl)
    gap2 = np.abs(sigma[:, None] - sigma[None, :]) ** 2
    stat = (E.n * gap2 + 1.0) * (cos2_r + cos2_l)
    np.fill_diagonal(stat, -np.inf)
    return float(stat.max())


@dataclass(frozen=True)
class SingularSystem:
    z: complex
    lam: np.ndarray                       # singular values, ascending
    U: np.ndarray = field(repr=False)     # columns u_i, half-norm
    V: np.ndarray = field(repr=False)     # columns v_i, half-norm

    @property
    def n(self) -> int:
        return self.lam.size


def singular_system(X: IidMatrix | np.ndarray, z: complex) -> SingularSystem:
    """Singular system of X - z, values ascending, vectors rescaled to
    ||u_i||^2 = ||v_i||^2 = 1/2 so that w_{+-i} = (u_i; +-v_i) are
    orthonormal chiral eigenvectors of the Hermitization with
    eigenvalues +-lambda_i."""
    A = X.entries if isinstance(X, IidMatrix) else np.asarray(X, dtype=complex)
    n = A.shape[0]
    try:
        U, s, Vh = np.linalg.svd(A - complex(z) * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise SvdFailure(str(exc)) from exc
    order = np.argsort(s)
    scale = 1.0 / np.sqrt(2.0)
    return SingularSystem(z=complex(z), lam=s[order],
                          U=U[:, order] * scale,
                          V=Vh.conj().T[:, order] * scale)


def chiral_vectors(S: SingularSystem) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal eigenvector matrices (W_plus, W_minus) of the
    Hermitization: columns (u_i; v_i) resp. (u_i; -v_i)."""
    Wp = np.vstack([S.U, S.V])
    Wm = np.vstack([S.U, -S.V])
    return Wp, Wm


def verify_chiral(X: IidMatrix, z: complex, S: SingularSystem) -> float:
    """Max residual of H^z w_{+i} = lambda_i w_{+i}."""
    H = hermitize(X, z).H
    Wp, _ = chiral_vectors(S)
    return float(np.abs(H @ Wp - Wp * S.lam[None, :]).max())


def singular_overlap(S1: SingularSystem, S2: SingularSystem,
                     i: int, j: int) -> float:
    """|<u_i^{z1}, u_j^{z2}>|^2 + |<v_i^{z1}, v_j^{z2}>|^2 with the
    vectors rescaled to unit norm (so the self-overlap at z1 = z2 is 2)."""
    for S, k in ((S1, i), (S2, j)):
        if not 0 <= k < S.n:
            raise IndexOutOfRange(f"index {k} outside 0..{S.n - 1}")
    u1 = S1.U[:, i] * np.sqrt(2.0)
    u2 = S2.U[:, j] * np.sqrt(2.0)
    v1 = S1.V[:, i] * np.sqrt(2.0)
    v2 = S2.V[:, j] * np.sqrt(2.0)
    return float(np.abs(np.vdot(u1, u2)) ** 2 + np.abs(np.vdot(v1, v2)) ** 2)


def nearest_eigenvalue_index(E: EigenSystem, z: complex,
                             tolerance: float | None = None) -> int | None:
    """Index of the eigenvalue closest to z, or None if the closest one
    is farther than the tolerance (default n^{-1/2+0.1})."""
    if tolerance is None:
        tolerance = E.n ** (-0.5 + 0.1)
    k = int(np.argmin(np.abs(E.sigma - z)))
    return k if abs(E.sigma[k] - z) <= tolerance else None


def biortho_residual(E: EigenSystem) -> float:
    """max |L^T R - I|, exact bi-orthogonality audit."""
    if E.discarded:
        return float("inf")
    P = E.left_vectors.T @ E.right_vectors
    return float(np.abs(P - np.eye(E.n)).max())
