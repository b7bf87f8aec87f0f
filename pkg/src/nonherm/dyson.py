"""Scalar cubic Dyson equation and one-body deterministic objects.

The self-consistent scalar m = m^z(w) solves

    -1/m = w + m - |z|^2 / (w + m),        Im m * Im w > 0,

equivalently the monic cubic

    m^3 + 2 w m^2 + (w^2 + 1 - |z|^2) m + w = 0.

Everything downstream (density, support gap, quantiles, fluctuation
scale, and the 2x2 deterministic matrix M) derives from this root.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .blockmat import BlockMatrix, block
from .errors import DivergedContinuation, NoValidRoot, QuadratureFailure, SingularM

CUBIC_TOL = 1e-12
BOUNDARY_EPS = 1e-9        # offset for E + i0+ limits
RHO_THRESHOLD = 1e-8       # density level defining the numerical support
BISECT_TOL = 1e-10         # edge bisection tolerance in E


@dataclass(frozen=True)
class SpectralPoint:
    """Parameters (z, w); set boundary=True for the limit w = E + i0+."""

    z: complex
    w: complex
    boundary: bool = False

    def __post_init__(self):
        if abs(self.z) > 10:
            raise ValueError("|z| <= 10 required")
        if not self.boundary and self.w.imag == 0.0:
            raise ValueError("Im w != 0 unless the boundary limit is requested")


@dataclass(frozen=True)
class DysonSolution:
    m: complex
    u: complex
    rho: float


def cubic_residual(m, z, w):
    z2 = abs(z) ** 2
    return abs(m**3 + 2 * w * m**2 + (w * w + 1 - z2) * m + w)


def _cubic_roots(z2: float, w: complex) -> np.ndarray:
    return np.roots([1.0, 2 * w, w * w + 1 - z2, w])


def _solve_axis(z2: float, eta: float) -> complex:
    """Fast path on the imaginary axis: m = i*mu with mu solving the real cubic

        mu^3 + 2 eta mu^2 - (1 - |z|^2 - eta^2) mu - eta = 0,

    unique root with sign(mu) = sign(eta) and |mu| <= 1.
    """
    roots = np.roots([1.0, 2 * eta, -(1 - z2 - eta * eta), -eta])
    real = roots[np.abs(roots.imag) < 1e-9 * (1 + np.abs(roots.real))].real
    good = [mu for mu in real if mu * eta > 0 and abs(mu) <= 1 + 1e-9]
    if len(good) != 1:
        # fall through to the generic complex path (should not happen: the
        # sign pattern of the real cubic forces a unique such root)
        return _solve_interior(z2, complex(0.0, eta))
    return 1j * float(good[0])


def _solve_interior(z2: float, w: complex) -> complex:
    """Generic complex solve: companion-matrix roots + sign-condition
    selection, homotopy continuation from m ~ -1/w when ambiguous."""
    roots = _cubic_roots(z2, w)
    sw = np.sign(w.imag)
    good = [m for m in roots if m.imag * sw > 0]
    if len(good) == 1:
        return complex(good[0])
    # near branch points several roots may satisfy the sign condition (or,
    # at exact degeneracy, none strictly); continue from the asymptotic
    # regime where the selection is unambiguous.
    r_hi = max(50.0, 2 * abs(w))
    scales = np.geomspace(r_hi / abs(w), 1.0, 120)
    m_prev = -1.0 / (w * scales[0])
    for s in scales:
        wk = w * s
        rk = _cubic_roots(z2, wk)
        m_prev = rk[np.argmin(np.abs(rk - m_prev))]
    if m_prev.imag * sw <= 0:
        if abs(m_prev.imag) < 1e-13:
            # grazing the real axis (inside a spectral gap at tiny eta)
            return complex(m_prev.real, 1e-300 * sw)
        raise DivergedContinuation(f"continuation ended off-branch at w={w}")
    if cubic_residual(m_prev, np.sqrt(z2), w) > 1e-9:
        raise NoValidRoot(f"no root with Im m * Im w > 0 at z2={z2}, w={w}")
    return complex(m_prev)


def _solve_boundary(z2: float, energy: float) -> complex:
    """Limit w = E + i0+: probe at eps and eps/2, Richardson-extrapolate,
    then snap to the nearest exact root of the cubic at real w = E."""
    m1 = _solve_interior(z2, complex(energy, BOUNDARY_EPS))
    m2 = _solve_interior(z2, complex(energy, BOUNDARY_EPS / 2))
    m_extrap = 2 * m2 - m1
    roots = _cubic_roots(z2, complex(energy))
    m = complex(roots[np.argmin(np.abs(roots - m_extrap))])
    if m.imag < 0:
        m = m.conjugate() if abs(m.imag) > 1e-13 else complex(m.real, 0.0)
    return m


def solve_m(point: SpectralPoint) -> DysonSolution:
    z2 = abs(point.z) ** 2
    w = complex(point.w)
    if point.boundary and w.imag == 0.0:
        m = _solve_boundary(z2, w.real)
    elif w.real == 0.0:
        m = _solve_axis(z2, w.imag)
    else:
        m = _solve_interior(z2, w)
    den = w + m
    if abs(den) < 1e-14:
        # boundary point E=0 with m -> 0 (gap center for |z| > 1, or the
        # cusp at |z| = 1); use the analytic limit of m/(w+m)
        u = 1.0 / z2 if z2 > 1 else 1.0
    else:
        u = m / den
    rho = abs(m.imag) / np.pi
    return DysonSolution(m=m, u=u, rho=rho)


def solve_m_batch(z: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Vectorized interior solve for parameter sweeps.

    Builds all companion matrices at once; entries whose sign-condition
    selection is ambiguous fall back to the scalar continuation path.
    """
    z = np.asarray(z, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    z2 = np.abs(z) ** 2
    k = w.size
    comp = np.zeros((k, 3, 3), dtype=complex)
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    comp[:, 0, 0] = -2 * w
    comp[:, 0, 1] = -(w * w + 1 - z2)
    comp[:, 0, 2] = -w
    roots = np.linalg.eigvals(comp)  # (k, 3)
    sw = np.sign(w.imag)[:, None]
    valid = roots.imag * sw > 0
    # among valid roots prefer the smallest |m| (the Stieltjes branch obeys
    # |m| <= 1; spurious roots are large)
    score = np.where(valid, np.abs(roots), np.inf)
    pick = np.argmin(score, axis=1)
    m = roots[np.arange(k), pick]
    ambiguous = valid.sum(axis=1) != 1
    for idx in np.nonzero(ambiguous)[0]:
        m[idx] = _solve_interior(z2[idx], complex(w[idx]))
    return m


def m_matrix(point: SpectralPoint) -> BlockMatrix:
    """Deterministic resolvent approximation M^z(w) = [[m, -z u], [-conj(z) u, m]]."""
    sol = solve_m(point)
    z = complex(point.z)
    return block(sol.m, -z * sol.u, -np.conj(z) * sol.u, sol.m)


def verify_mde(M: BlockMatrix, point: SpectralPoint) -> float:
    """Residual ||M^{-1} + w + Z + S[M]|| of the matrix Dyson equation
    in the 2x2 representation, with Z = [[0, z], [conj(z), 0]]."""
    from .stability import s_operator

    try:
        Minv = M.inv()
    except SingularM:
        raise
    z = complex(point.z)
    w = complex(point.w)
    Zmat = block(0, z, np.conj(z), 0)
    res = Minv + w * block(1, 0, 0, 1) + Zmat + s_operator(M)
    return res.norm()


def check_side_condition(M: BlockMatrix, point: SpectralPoint) -> bool:
    """Sign condition Im<M> * Im w > 0 (boundary limits: Im<M> >= 0)."""
    im_m = M.trace_avg().imag
    if point.boundary and point.w.imag == 0.0:
        return im_m >= -1e-12
    return im_m * point.w.imag > 0


def density(z: complex, energy: float) -> float:
    """Self-consistent density rho^z(E) = pi^{-1} Im m(E + i0+)."""
    if abs(energy) > 10:
        raise ValueError("|E| <= 10 required")
    sol = solve_m(SpectralPoint(z=z, w=complex(energy), boundary=True))
    return max(sol.m.imag, 0.0) / np.pi


@dataclass(frozen=True)
class SupportInfo:
    gap_delta: float
    right_edge: float


@dataclass(frozen=True)
class DensityProfile:
    z: complex
    energies: np.ndarray
    rho_values: np.ndarray


def _bisect_level(f, lo, hi, tol=BISECT_TOL):
    """Last crossing of f through RHO_THRESHOLD between lo (above) and hi (below)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) > RHO_THRESHOLD:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@lru_cache(maxsize=512)
def _support_cached(z_abs: float) -> SupportInfo:
    rho = lambda E: density(z_abs, E)
    hi = z_abs + 2.5
    grid = np.linspace(0.0, hi, 200)
    vals = np.array([rho(E) for E in grid])
    peak = float(grid[np.argmax(vals)])
    right = _bisect_level(rho, peak, hi)
    if z_abs <= 1.0:
        gap = 0.0
    else:
        # inner edge: rho vanishes on [0, delta/2] when |z| > 1
        inner = _bisect_level(lambda E: rho(peak - E), 0.0, peak)
        gap = 2.0 * (peak - inner)
    return SupportInfo(gap_delta=gap, right_edge=right)


def support_gap(z: complex) -> SupportInfo:
    return _support_cached(abs(complex(z)))


def density_profile(z: complex, num: int = 401) -> DensityProfile:
    info = support_gap(z)
    edge = info.right_edge
    energies = np.linspace(-edge - 0.05, edge + 0.05, num)
    rho_values = np.array([density(z, E) for E in energies])
    return DensityProfile(z=complex(z), energies=energies, rho_values=rho_values)


def cumulative_density(z: complex, x: float) -> float:
    """Mass integral F(x) = int_0^x rho^z, with quadrature split at the
    support edges where rho has root-type singularities."""
    if x == 0.0:
        return 0.0
    sign = 1.0 if x > 0 else -1.0
    x = abs(x)
    info = support_gap(z)
    pts = [p for p in (info.gap_delta / 2, info.right_edge) if 0 < p < x]
    val, _ = quad(lambda E: density(z, E), 0.0, x, points=pts or None,
                  limit=200, epsabs=1e-11, epsrel=1e-10)
    return sign * val


def quantiles(z: complex, n: int, indices) -> list[float]:
    """Quantiles gamma_i with int_0^{gamma_i} rho^z = i/(2n); gamma_{-i} = -gamma_i."""
    if n < 2:
        raise ValueError("n >= 2 required")
    info = support_gap(z)
    edge = info.right_edge
    total = cumulative_density(z, edge)
    out = []
    for i in indices:
        if i == 0 or abs(i) > n:
            raise ValueError(f"index {i} outside 1..{n}")
        target = abs(i) / (2.0 * n)
        if target > total + 1e-7:
            raise QuadratureFailure(
                f"mass {target} unreachable below the right edge (total {total})")
        if target >= total:
            gamma = edge
        else:
            gamma = brentq(lambda x: cumulative_density(z, x) - target,
                           0.0, edge, xtol=1e-12)
        out.append(float(np.sign(i)) * gamma)
    return out


def fluctuation_scale(z: complex, n: int) -> float:
    """eta_f with int_{-eta_f}^{eta_f} rho^z = 1/n (expected one eigenvalue)."""
    if n < 2:
        raise ValueError("n >= 2 required")
    info = support_gap(z)
    target = 1.0 / (2.0 * n)
    total = cumulative_density(z, info.right_edge)
    if target > total:
        raise QuadratureFailure("1/(2n) exceeds the half mass")
    return brentq(lambda x: cumulative_density(z, x) - target,
                  0.0, info.right_edge, xtol=1e-14)
