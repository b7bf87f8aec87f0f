"""2x2 block-constant matrix algebra.

A ``BlockMatrix`` holds a 2x2 complex array ``b`` and stands for the
2n x 2n matrix whose (j,k) block is ``b[j,k] * identity(n)``.  All the
special matrices used by the stability operator (E1, E2, E+, E-, F, F*)
and the deterministic resolvent approximation M live in this class, so
the entire deterministic calculus is n-independent.  ``embed`` maps to a
concrete 2n x 2n array only at test boundaries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class BlockMatrix:
    b: np.ndarray  # 2x2 complex

    def __post_init__(self):
        arr = np.asarray(self.b, dtype=complex)
        if arr.shape != (2, 2):
            raise ValueError(f"BlockMatrix needs a 2x2 array, got shape {arr.shape}")
        object.__setattr__(self, "b", arr)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other):
        return BlockMatrix(self.b + _coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return BlockMatrix(self.b - _coerce(other))

    def __rsub__(self, other):
        return BlockMatrix(_coerce(other) - self.b)

    def __mul__(self, scalar):
        return BlockMatrix(self.b * complex(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return BlockMatrix(-self.b)

    def __matmul__(self, other):
        return BlockMatrix(self.b @ _coerce(other))

    def adjoint(self) -> "BlockMatrix":
        return BlockMatrix(self.b.conj().T)

    def conj(self) -> "BlockMatrix":
        return BlockMatrix(self.b.conj())

    def inv(self) -> "BlockMatrix":
        det = self.b[0, 0] * self.b[1, 1] - self.b[0, 1] * self.b[1, 0]
        if abs(det) < 1e-300:
            from .errors import SingularM

            raise SingularM("block matrix not invertible")
        adj = np.array([[self.b[1, 1], -self.b[0, 1]],
                        [-self.b[1, 0], self.b[0, 0]]], dtype=complex)
        return BlockMatrix(adj / det)

    # -- functionals -----------------------------------------------------

    def trace_avg(self) -> complex:
        """Normalized trace of the embedding: <emb(b)> = (b11 + b22)/2."""
        return (self.b[0, 0] + self.b[1, 1]) / 2.0

    def norm(self) -> float:
        """Operator norm (equals the operator norm of any embedding)."""
        return float(np.linalg.norm(self.b, 2))

    def embed(self, n: int) -> np.ndarray:
        """The concrete 2n x 2n matrix with blocks b[j,k]*identity(n)."""
        return np.kron(self.b, np.eye(n))

    def isclose(self, other, tol=1e-12) -> bool:
        return bool(np.all(np.abs(self.b - _coerce(other)) <= tol))


def _coerce(x) -> np.ndarray:
    if isinstance(x, BlockMatrix):
        return x.b
    return np.asarray(x, dtype=complex)


def block(b00, b01, b10, b11) -> BlockMatrix:
    return BlockMatrix(np.array([[b00, b01], [b10, b11]], dtype=complex))


# Special matrices: E1 = diag(1,0), E2 = diag(0,1), E+/- = E1 +/- E2,
# F has a single upper-right block, F* its adjoint.
E1 = block(1, 0, 0, 0)
E2 = block(0, 0, 0, 1)
EPLUS = block(1, 0, 0, 1)
EMINUS = block(1, 0, 0, -1)
F = block(0, 1, 0, 0)
FSTAR = block(0, 0, 1, 0)
IDENTITY = EPLUS


def block_traces(A, n: int | None = None) -> tuple[complex, complex]:
    """Normalized traces (<A E1>, <A E2>) of a 2n x 2n array or BlockMatrix.

    For a full array these are the only functionals of A the covariance
    operator ever consumes.
    """
    if isinstance(A, BlockMatrix):
        return A.b[0, 0] / 2.0, A.b[1, 1] / 2.0
    A = np.asarray(A)
    two_n = A.shape[0]
    if A.shape != (two_n, two_n) or two_n % 2:
        raise ValueError("expected a square 2n x 2n array")
    half = two_n // 2
    t1 = np.trace(A[:half, :half]) / two_n
    t2 = np.trace(A[half:, half:]) / two_n
    return complex(t1), complex(t2)
