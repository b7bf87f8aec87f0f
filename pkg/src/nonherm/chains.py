"""Resolvent chains of the Hermitization via spectral calculus.

A ``ResolventFactory`` stores one chiral eigendecomposition of
H^z = [[0, X-z], [(X-z)*, 0]] and evaluates every one-, two-, and
three-resolvent chain as diagonal-kernel contractions of precomputed
Gram matrices: one O(n^3) eigh per (X, z), O(n^2) per chain thereafter.

Kernels on the eigenvalues lambda:
    G(i eta)      ->  1 / (lambda - i eta)
    Im G(i eta)   ->  |eta| / (lambda^2 + eta^2)
    |G(i eta)|    ->  (lambda^2 + eta^2)^{-1/2}
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ensemble import IidMatrix, hermitize
from .errors import EigenSolverFailure, MismatchedSource, ZeroEta


@dataclass(frozen=True)
class ResolventFactory:
    source_id: int
    z: complex
    eigenvalues: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)     # orthonormal eigenvectors, columns

    @property
    def two_n(self) -> int:
        return self.eigenvalues.size

    @classmethod
    def build(cls, X: IidMatrix, z: complex) -> "ResolventFactory":
        H = hermitize(X, z)
        try:
            lam, W = np.linalg.eigh(H.H)
        except np.linalg.LinAlgError as exc:
            raise EigenSolverFailure(str(exc)) from exc
        return cls(source_id=id(X), z=complex(z), eigenvalues=lam, W=W)

    # -- kernels ---------------------------------------------------------

    def kernel(self, eta: float, kind: str = "g") -> np.ndarray:
        if eta == 0.0:
            raise ZeroEta("eta must be nonzero")
        lam = self.eigenvalues
        if kind == "g":
            return 1.0 / (lam - 1j * eta)
        if kind == "im":
            return abs(eta) / (lam**2 + eta**2)
        if kind == "abs":
            return 1.0 / np.sqrt(lam**2 + eta**2)
        raise ValueError(f"unknown kernel kind {kind!r}")

    def dense(self, eta: float, kind: str = "g") -> np.ndarray:
        """Materialize G(i eta) (or ImG/|G|) as a 2n x 2n array."""
        k = self.kernel(eta, kind)
        return (self.W * k[None, :]) @ self.W.conj().T


def _as_dense(A, two_n: int) -> np.ndarray:
    from .blockmat import BlockMatrix

    if isinstance(A, BlockMatrix):
        return A.embed(two_n // 2)
    return np.asarray(A, dtype=complex)


def _check_same_source(F1: ResolventFactory, F2: ResolventFactory) -> None:
    if F1.source_id != F2.source_id:
        raise MismatchedSource("factories built from different matrices")


def resolvent_trace(F: ResolventFactory, eta: float, A=None,
                    kind: str = "g") -> complex:
    """<G(i eta) A> with the normalized trace (2n)^{-1} Tr."""
    k = F.kernel(eta, kind)
    if A is None:
        return complex(k.mean())
    Ad = _as_dense(A, F.two_n)
    # <G A> = (2n)^{-1} sum_i k_i (W* A W)_ii
    diag = np.einsum("ji,jk,ki->i", F.W.conj(), Ad, F.W, optimize=True)
    return complex((k * diag).sum() / F.two_n)


def isotropic(F: ResolventFactory, eta: float, x, y,
              kind: str = "g") -> complex:
    """<x, G(i eta) y> (conjugate-linear in x)."""
    k = F.kernel(eta, kind)
    xw = F.W.conj().T @ np.asarray(x, dtype=complex)
    yw = F.W.conj().T @ np.asarray(y, dtype=complex)
    return complex(np.sum(xw.conj() * k * yw))


def two_chain_avg(F1: ResolventFactory, eta1: float, A1,
                  F2: ResolventFactory, eta2: float, A2,
                  im_flags: tuple[bool, bool] = (False, False)) -> complex:
    """<G_1 A_1 G_2 A_2> (Im G in flagged slots) via cross Gram matrices."""
    _check_same_source(F1, F2)
    k1 = F1.kernel(eta1, "im" if im_flags[0] else "g")
    k2 = F2.kernel(eta2, "im" if im_flags[1] else "g")
    A1d = _as_dense(A1, F1.two_n)
    A2d = _as_dense(A2, F1.two_n)
    G12 = F1.W.conj().T @ A1d @ F2.W     # <w_i^{(1)}, A1 w_j^{(2)}>
    G21 = F2.W.conj().T @ A2d @ F1.W
    return complex(np.einsum("i,ij,j,ji->", k1, G12, k2, G21,
                             optimize=True) / F1.two_n)


def three_chain_iso(F1: ResolventFactory, eta1: float, A1,
                    F2: ResolventFactory, eta2: float, A2, x, y,
                    im_flags: tuple[bool, bool, bool] = (False, False, False),
                    ) -> complex:
    """(G_1 A_1 G_2 A_2 G_1)_{xy}; O(n^2) once the two Grams are built."""
    _check_same_source(F1, F2)
    k1a = F1.kernel(eta1, "im" if im_flags[0] else "g")
    k2 = F2.kernel(eta2, "im" if im_flags[1] else "g")
    k1b = F1.kernel(eta1, "im" if im_flags[2] else "g")
    A1d = _as_dense(A1, F1.two_n)
    A2d = _as_dense(A2, F1.two_n)
    xw = F1.W.conj().T @ np.asarray(x, dtype=complex)
    yw = F1.W.conj().T @ np.asarray(y, dtype=complex)
    G12 = F1.W.conj().T @ A1d @ F2.W
    G21 = F2.W.conj().T @ A2d @ F1.W
    left = (xw.conj() * k1a) @ G12           # length 2n in basis 2
    right = G21 @ (k1b * yw)
    return complex(np.sum(left * k2 * right))


def ward_residual(F: ResolventFactory, eta: float) -> float:
    """| <G* G> - <Im G>/eta |, the Ward identity."""
    k = F.kernel(eta, "g")
    lhs = np.mean(np.abs(k) ** 2)
    rhs = np.mean(F.kernel(eta, "im")) / abs(eta)
    return float(abs(lhs - rhs))


def reduction_check(F1: ResolventFactory, eta1: float,
                    F2: ResolventFactory, eta2: float,
                    Q1, Q2, Q3, R1, R2, x: int,
                    slack: float = 8.0) -> tuple[bool, bool]:
    """Numerical audit of the two chain-reduction inequalities, with a
    constant-factor slack:

      |(Q1 G1 Q2 G2 Q3)_xx| <= slack sqrt(2n)
            (Q1|G1|Q1*)_xx^{1/2} (Q3*|G2|Q3)_xx^{1/2}
            <|G1| Q2 |G2| Q2*>^{1/2},

      <|G1| R1 G2 R2 |G1| R2* G2* R1*> <=
            slack 2n <|G1| R1 |G2| R1*> <|G1| R2* |G2| R2>.
    """
    _check_same_source(F1, F2)
    two_n = F1.two_n
    G1 = F1.dense(eta1, "g")
    G2 = F2.dense(eta2, "g")
    aG1 = F1.dense(eta1, "abs")
    aG2 = F2.dense(eta2, "abs")
    Q1d, Q2d, Q3d = (_as_dense(Q, two_n) for Q in (Q1, Q2, Q3))
    R1d, R2d = (_as_dense(R, two_n) for R in (R1, R2))

    lhs1 = abs((Q1d @ G1 @ Q2d @ G2 @ Q3d)[x, x])
    d1 = (Q1d @ aG1 @ Q1d.conj().T)[x, x].real
    d2 = (Q3d.conj().T @ aG2 @ Q3d)[x, x].real
    mid = np.trace(aG1 @ Q2d @ aG2 @ Q2d.conj().T).real / two_n
    rhs1 = slack * np.sqrt(2 * two_n) * np.sqrt(max(d1, 0.0)) \
        * np.sqrt(max(d2, 0.0)) * np.sqrt(max(mid, 0.0))

    chain = aG1 @ R1d @ G2 @ R2d @ aG1 @ R2d.conj().T @ G2.conj().T \
        @ R1d.conj().T
    lhs2 = np.trace(chain).real / two_n
    t1 = np.trace(aG1 @ R1d @ aG2 @ R1d.conj().T).real / two_n
    t2 = np.trace(aG1 @ R2d.conj().T @ aG2 @ R2d).real / two_n
    rhs2 = slack * two_n * t1 * t2
    return bool(lhs1 <= rhs1 + 1e-12), bool(lhs2 <= rhs2 + 1e-12)
