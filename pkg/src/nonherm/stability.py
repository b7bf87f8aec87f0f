"""Two-body stability operator and deterministic multi-resolvent approximations.

The covariance operator acts through block traces,

    S[A] = 2 <A E1> E2 + 2 <A E2> E1,

and the stability operator for a pair of spectral parameters is
B12[A] = A - M1 S[A] M2.  On the imaginary axis B12 has exactly two
non-trivial eigenvalues beta+/- with closed-form eigenvectors; everything
else (including the off-diagonal directions F, F*) is fixed.  The
deterministic approximations

    M12^A  = B12^{-1}[M1 A M2]
    Mhat12 = fourfold eta-sign combination of M12 (Im G applied twice)
    M121   = B11^{-1}[M1 A1 M21^{A2} + M1 S[M12^{A1}] M21^{A2}]

are computed by a 2-unknown reduction: only the block traces of the
input enter S, so inverting B12 amounts to solving a 2x2 linear system
whose determinant is proportional to beta+ beta-.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .blockmat import (E1, E2, EMINUS, EPLUS, BlockMatrix, block,
                       block_traces)
from .dyson import SpectralPoint, solve_m
from .errors import DegenerateEigenvectors, SingularStability

DEGENERACY_TOL = 1e-13
DET_TOL = 1e-14


@dataclass(frozen=True)
class SolvedPoint:
    """A spectral parameter (z, i*eta) on the imaginary axis together with
    its Dyson solution."""

    z: complex
    eta: float
    m: complex
    u: complex
    rho: float

    @classmethod
    def from_params(cls, z: complex, eta: float) -> "SolvedPoint":
        if eta == 0.0:
            raise ValueError("eta must be nonzero")
        sol = solve_m(SpectralPoint(z=z, w=complex(0.0, eta)))
        return cls(z=complex(z), eta=float(eta), m=sol.m, u=sol.u, rho=sol.rho)

    def flip_eta(self) -> "SolvedPoint":
        # exact axis symmetry: m(-i eta) = -m(i eta), u(-i eta) = u(i eta)
        return SolvedPoint(z=self.z, eta=-self.eta, m=-self.m, u=self.u,
                           rho=self.rho)

    @property
    def M(self) -> BlockMatrix:
        return block(self.m, -self.z * self.u,
                     -np.conj(self.z) * self.u, self.m)


# -- covariance operator -------------------------------------------------

def s_operator(A) -> BlockMatrix:
    """S[A] = 2<AE1>E2 + 2<AE2>E1 (always diagonal block-constant)."""
    t1, t2 = block_traces(A)
    return block(2 * t2, 0, 0, 2 * t1)


def stability_apply(p1: SolvedPoint, p2: SolvedPoint, A):
    """B12[A] = A - M1 S[A] M2, for a BlockMatrix or a full 2n x 2n array."""
    corr = p1.M @ s_operator(A) @ p2.M
    if isinstance(A, BlockMatrix):
        return A - corr
    A = np.asarray(A, dtype=complex)
    return A - corr.embed(A.shape[0] // 2)


# -- closed-form spectrum ------------------------------------------------

def _sqrt_cut(s: complex) -> complex:
    """Principal square root on C \\ (-inf, 0]; negative reals resolved
    from the +i0 side."""
    if s.imag == 0.0 and s.real < 0.0:
        return 1j * np.sqrt(-s.real)
    return complex(np.sqrt(s))


@dataclass(frozen=True)
class ControlParams:
    gamma: float
    hat_gamma: float
    ell: float
    eta_star: float
    rho_star: float


def control_params(p1: SolvedPoint, p2: SolvedPoint) -> ControlParams:
    dz = abs(p1.z - p2.z)
    hat_gamma = (dz ** 2 + p1.rho * abs(p1.eta) + p2.rho * abs(p2.eta)
                 + (p1.eta / p1.rho) ** 2 + (p2.eta / p2.rho) ** 2)
    denom = (dz + p1.rho ** 2 + p2.rho ** 2
             + abs(p1.eta) / p1.rho + abs(p2.eta) / p2.rho)
    return ControlParams(
        gamma=hat_gamma / denom,
        hat_gamma=hat_gamma,
        ell=min(p1.rho * abs(p1.eta), p2.rho * abs(p2.eta)),
        eta_star=min(abs(p1.eta), abs(p2.eta)),
        rho_star=max(p1.rho, p2.rho),
    )


@dataclass(frozen=True)
class StabilityBundle:
    beta_plus: complex
    beta_minus: complex
    s: complex
    R_plus: BlockMatrix
    R_minus: BlockMatrix
    L_plus: BlockMatrix
    L_minus: BlockMatrix
    degenerate: bool = False


def _numeric_bundle(p1, p2, beta_plus, beta_minus, s):
    """4x4 eigensolve fallback for degenerate closed-form denominators."""
    basis = [block(1, 0, 0, 0), block(0, 1, 0, 0),
             block(0, 0, 1, 0), block(0, 0, 0, 1)]
    op = np.zeros((4, 4), dtype=complex)
    for j, e in enumerate(basis):
        op[:, j] = stability_apply(p1, p2, e).b.ravel()
    vals, vecs = np.linalg.eig(op)
    # the two non-unit eigenvalues; match to beta+/- by proximity
    order = np.argsort(np.abs(vals - 1.0))[::-1]
    picks = order[:2]
    if abs(vals[picks[0]] - beta_plus) + abs(vals[picks[1]] - beta_minus) > \
       abs(vals[picks[0]] - beta_minus) + abs(vals[picks[1]] - beta_plus):
        picks = picks[::-1]
    Rp = BlockMatrix(vecs[:, picks[0]].reshape(2, 2))
    Rm = BlockMatrix(vecs[:, picks[1]].reshape(2, 2))
    lvals, lvecs = np.linalg.eig(op.conj().T)
    lorder = np.argsort(np.abs(lvals - np.conj(beta_plus)))
    Lp = BlockMatrix(lvecs[:, lorder[0]].reshape(2, 2)).adjoint()
    lorder = np.argsort(np.abs(lvals - np.conj(beta_minus)))
    Lm = BlockMatrix(lvecs[:, lorder[0]].reshape(2, 2)).adjoint()
    return StabilityBundle(beta_plus=beta_plus, beta_minus=beta_minus, s=s,
                           R_plus=_unit(Rp), R_minus=_unit(Rm),
                           L_plus=Lp, L_minus=Lm, degenerate=True)


def _unit(B: BlockMatrix) -> BlockMatrix:
    return B * (1.0 / np.linalg.norm(B.b))


def stability_eigs(p1: SolvedPoint, p2: SolvedPoint,
                   allow_fallback: bool = True) -> StabilityBundle:
    m1, m2, u1, u2 = p1.m, p2.m, p1.u, p2.u
    zz = p1.z * np.conj(p2.z)
    s = m1 ** 2 * m2 ** 2 - u1 ** 2 * u2 ** 2 * zz.imag ** 2
    sq = _sqrt_cut(s)
    beta_plus = 1 - u1 * u2 * zz.real + sq
    beta_minus = 1 - u1 * u2 * zz.real - sq

    def right(sign):
        den = 1j * u1 * u2 * zz.imag - sign * sq
        if abs(den) < DEGENERACY_TOL:
            raise DegenerateEigenvectors("eigenvector denominator vanished")
        head = -u1 * u2 * zz.real + sign * sq
        return block(
            head,
            p1.z * u1 * m2 + m1 ** 2 * p2.z * u2 * m2 / den,
            np.conj(p2.z) * u2 * m1 + m2 ** 2 * np.conj(p1.z) * u1 * m1 / den,
            m1 * m2 * head / den,
        )

    def left(sign):
        return block((1j * u1 * u2 * zz.imag - sign * sq) / (m1 * m2),
                     0, 0, 1)

    try:
        return StabilityBundle(
            beta_plus=beta_plus, beta_minus=beta_minus, s=s,
            R_plus=_unit(right(+1)), R_minus=_unit(right(-1)),
            L_plus=left(+1), L_minus=left(-1),
        )
    except DegenerateEigenvectors:
        if not allow_fallback:
            raise
        return _numeric_bundle(p1, p2, beta_plus, beta_minus, s)


# -- inversion of the stability operator ---------------------------------

def _reduction_coeffs(p1: SolvedPoint, p2: SolvedPoint):
    M1, M2 = p1.M, p2.M
    me2m = M1 @ E2 @ M2
    me1m = M1 @ E1 @ M2
    a = (me1m @ E1).trace_avg()
    b = (me1m @ E2).trace_avg()
    c = (me2m @ E1).trace_avg()
    d = (me2m @ E2).trace_avg()
    sys = np.array([[1 - 2 * c, -2 * a],
                    [-2 * d, 1 - 2 * b]], dtype=complex)
    return sys, me2m, me1m


def b12_inverse(p1: SolvedPoint, p2: SolvedPoint, K):
    """Solve B12[X] = K.  Only the block traces of K feed back through S,
    so the correction lives in span{M1 E1 M2, M1 E2 M2}."""
    sys, me2m, me1m = _reduction_coeffs(p1, p2)
    det = sys[0, 0] * sys[1, 1] - sys[0, 1] * sys[1, 0]
    if abs(det) < DET_TOL:
        raise SingularStability(f"reduction determinant {det} below tolerance")
    k1, k2 = block_traces(K)
    t1, t2 = np.linalg.solve(sys, np.array([k1, k2], dtype=complex))
    corr = 2 * t1 * me2m + 2 * t2 * me1m
    if isinstance(K, BlockMatrix):
        return K + corr
    K = np.asarray(K, dtype=complex)
    return K + corr.embed(K.shape[0] // 2)


def _sandwich(p1: SolvedPoint, A, p2: SolvedPoint):
    """M1 A M2 for BlockMatrix or full array A."""
    if isinstance(A, BlockMatrix):
        return p1.M @ A @ p2.M
    A = np.asarray(A, dtype=complex)
    n = A.shape[0] // 2
    return p1.M.embed(n) @ A @ p2.M.embed(n)


def m12(p1: SolvedPoint, A, p2: SolvedPoint):
    """Deterministic two-resolvent approximation M12^A = B12^{-1}[M1 A M2]."""
    return b12_inverse(p1, p2, _sandwich(p1, A, p2))


def hat_m12(p1: SolvedPoint, A, p2: SolvedPoint):
    """Deterministic approximation of Im G1 A Im G2: the fourfold
    combination -(1/4) sum_{s1,s2} s1 s2 M12^A(s1*i*eta1, s2*i*eta2)."""
    q1, q2 = p1.flip_eta(), p2.flip_eta()
    return (-0.25) * (m12(p1, A, p2) - m12(p1, A, q2)
                      - m12(q1, A, p2) + m12(q1, A, q2))


def m121(p1: SolvedPoint, A1, p2: SolvedPoint, A2):
    """Three-resolvent approximation
    M121 = B11^{-1}[M1 A1 M21^{A2} + M1 S[M12^{A1}] M21^{A2}]."""
    m21_a2 = m12(p2, A2, p1)
    m12_a1 = m12(p1, A1, p2)
    s_mid = s_operator(m12_a1)
    if isinstance(m21_a2, BlockMatrix):
        inner = (p1.M @ A1 @ m21_a2) + (p1.M @ s_mid @ m21_a2)
    else:
        n = m21_a2.shape[0] // 2
        M1e = p1.M.embed(n)
        A1e = A1.embed(n) if isinstance(A1, BlockMatrix) else np.asarray(A1, dtype=complex)
        inner = M1e @ A1e @ m21_a2 + M1e @ s_mid.embed(n) @ m21_a2
    return b12_inverse(p1, p1, inner)


# -- Appendix oracles ----------------------------------------------------

def trace_formula_oracle(p1: SolvedPoint, p2: SolvedPoint,
                         signs: tuple[int, int]) -> complex:
    """Closed forms for <B12^{-1}[M1 E_{s1} M2] E_{s2}>, an independent
    oracle against the 2-unknown reduction."""
    s1, s2 = signs
    if s1 not in (1, -1) or s2 not in (1, -1):
        raise ValueError("signs must be +/-1")
    m1, m2, u1, u2 = p1.m, p2.m, p1.u, p2.u
    zz = p1.z * np.conj(p2.z)
    bundle = stability_eigs(p1, p2)
    bb = bundle.beta_plus * bundle.beta_minus
    if abs(bb) < DET_TOL:
        raise SingularStability("beta product below tolerance")
    if s1 == s2:
        sgn = float(s1)
        num = (m1 ** 2 * m2 ** 2 + sgn * m1 * m2 + zz.real * u1 * u2
               - abs(p1.z) ** 2 * abs(p2.z) ** 2 * u1 ** 2 * u2 ** 2)
        return sgn * num / bb
    if (s1, s2) == (-1, 1):
        return -1j * zz.imag * u1 * u2 / bb
    return 1j * zz.imag * u1 * u2 / bb


def a_complement(A):
    """Remove the E+/- components: A_c = A - <AE+>E+ - <AE->E-."""
    t1, t2 = block_traces(A)
    cp = t1 + t2          # <A E+>
    cm = t1 - t2          # <A E->
    if isinstance(A, BlockMatrix):
        return A - cp * EPLUS - cm * EMINUS
    A = np.asarray(A, dtype=complex)
    n = A.shape[0] // 2
    return A - (cp * EPLUS + cm * EMINUS).embed(n)


# -- comparability report ------------------------------------------------

def lemma_beta_report(p1: SolvedPoint, p2: SolvedPoint) -> dict:
    """Both sides of the product/sum/difference comparability relations for
    beta+/-, plus the exact algebraic identities, for one parameter pair.

    Calibration convention: the comparability scales are built with the
    unnormalized density |Im m| (= pi * rho).  The relations hold only up
    to constants anyway, and this choice keeps all two-sided ratios inside
    the documented window [1/64, 64] over the calibration sweep; with the
    pi-normalized rho the (eta/rho)^2 term alone drifts out by ~pi^2.
    The difference relation is a one-sided upper bound (plus positivity)
    and the min-|beta| relation a one-sided lower bound.
    """
    bundle = stability_eigs(p1, p2)
    bp, bm = bundle.beta_plus, bundle.beta_minus
    m1, m2, u1, u2 = p1.m, p2.m, p1.u, p2.u
    im1, im2 = abs(m1.imag), abs(m2.imag)
    dz = abs(p1.z - p2.z)
    prod_expansion = (u1 * u2 * dz ** 2
                      - m1 ** 2 * (u2 / u1) * (1 - u1)
                      - m2 ** 2 * (u1 / u2) * (1 - u2)
                      + (1 - u1) * (1 - u2))
    sum_closed = 2 - 2 * u1 * u2 * (p1.z * np.conj(p2.z)).real
    hat_scale = (dz ** 2 + im1 * abs(p1.eta) + im2 * abs(p2.eta)
                 + (p1.eta / im1) ** 2 + (p2.eta / im2) ** 2)
    denom_scale = (dz + im1 ** 2 + im2 ** 2
                   + abs(p1.eta) / im1 + abs(p2.eta) / im2)
    sum_scale = dz ** 2 + denom_scale - dz
    bb_scale = denom_scale - dz
    gamma_scale = hat_scale / denom_scale
    diff = bp - bm
    return {
        "beta_plus": bp,
        "beta_minus": bm,
        "prod": bp * bm,
        "prod_expansion_residual": abs(bp * bm - prod_expansion),
        "prod_ratio": (bp * bm).real / hat_scale,
        "sum": bp + bm,
        "sum_closed_residual": abs(bp + bm - sum_closed),
        "sum_ratio": (bp + bm).real / sum_scale,
        "bb": bp + bm - bp * bm,
        "bb_ratio": (bp + bm - bp * bm).real / bb_scale,
        "diff": diff,
        "diff_dichotomy": min(abs(diff.real), abs(diff.imag)),
        "diff_re_over_rho": diff.real / (im1 * im2),
        "diff_im_over_dz": diff.imag / dz if dz > 0 else 0.0,
        "min_beta_over_gamma": min(abs(bp), abs(bm)) / gamma_scale,
    }
