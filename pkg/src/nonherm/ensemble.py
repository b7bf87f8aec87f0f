"""Sampling of i.i.d. random matrices, Hermitizations, and the
Ornstein--Uhlenbeck interpolation towards the Ginibre ensemble.

Randomness contract: every matrix is a pure function of
(master seed, trial index) via a counter-based Philox generator, so
parallel trials reproduce bit-identically regardless of scheduling.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

DISTRIBUTIONS = ("gaussian", "rademacher", "uniform")
FIELDS = ("real", "complex")
_MAGIC = b"IIDM"
_SQRT3 = np.sqrt(3.0)


@dataclass(frozen=True)
class EnsembleSpec:
    """Entry law for an n x n i.i.d. matrix with E chi = 0, E|chi|^2 = 1
    (and E chi^2 = 0 in the complex case)."""

    n: int
    field: str = "complex"
    distribution: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n >= 2 required")
        if self.field not in FIELDS:
            raise ValueError(f"field must be one of {FIELDS}")
        if self.distribution not in DISTRIBUTIONS:
            raise ValueError(f"distribution must be one of {DISTRIBUTIONS}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class IidMatrix:
    entries: np.ndarray
    provenance: EnsembleSpec
    trial: int = 0

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _rng(spec: EnsembleSpec, trial: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(spec.seed),
                                spawn_key=(int(trial),))
    return np.random.Generator(np.random.Philox(ss))


def _draw_real(rng: np.random.Generator, distribution: str,
               shape) -> np.ndarray:
    """Unit-variance, mean-zero, symmetric real entries."""
    if distribution == "gaussian":
        return rng.standard_normal(shape)
    if distribution == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    return rng.uniform(-_SQRT3, _SQRT3, size=shape)


def sample(spec: EnsembleSpec, trial: int = 0) -> IidMatrix:
    """Draw X with i.i.d. entries of variance 1/n.

    Complex entries are (a + i b)/sqrt(2) with independent symmetric
    real a, b, so E chi^2 = 0 automatically.
    """
    rng = _rng(spec, trial)
    shape = (spec.n, spec.n)
    if spec.field == "complex":
        a = _draw_real(rng, spec.distribution, shape)
        b = _draw_real(rng, spec.distribution, shape)
        x = (a + 1j * b) / np.sqrt(2.0)
    else:
        x = _draw_real(rng, spec.distribution, shape).astype(complex)
    return IidMatrix(entries=x / np.sqrt(spec.n), provenance=spec,
                     trial=trial)


@dataclass(frozen=True)
class HermitizedMatrix:
    z: complex
    H: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.H.shape[0] // 2


def hermitize(X: IidMatrix, z: complex) -> HermitizedMatrix:
    """H^z = [[0, X - z], [(X - z)*, 0]], Hermitian with chiral symmetry."""
    n = X.n
    Y = X.entries - complex(z) * np.eye(n)
    H = np.zeros((2 * n, 2 * n), dtype=complex)
    H[:n, n:] = Y
    H[n:, :n] = Y.conj().T
    return HermitizedMatrix(z=complex(z), H=H)


def gaussian_divisible(X: IidMatrix, t: float, seed: int) -> IidMatrix:
    """Ornstein--Uhlenbeck interpolation e^{-t/2} X + sqrt(1-e^{-t}) G
    with G an independent Ginibre of the same symmetry class; entry
    variance stays exactly 1/n.  t=0 returns X unchanged."""
    if t < 0:
        raise ValueError("t >= 0 required")
    if t == 0.0:
        return X
    spec = X.provenance
    noise_spec = EnsembleSpec(n=spec.n, field=spec.field,
                              distribution="gaussian", seed=seed)
    G = sample(noise_spec, trial=X.trial)
    mixed = np.exp(-t / 2) * X.entries + np.sqrt(-np.expm1(-t)) * G.entries
    return IidMatrix(entries=mixed, provenance=spec, trial=X.trial)


def ou_step(X: IidMatrix, dt: float, seed: int, step: int) -> IidMatrix:
    """One increment of the OU flow: e^{-dt/2} X + sqrt(1-e^{-dt}) G_step,
    with the step noise keyed by (seed, step) so a path is reproducible."""
    if dt < 0:
        raise ValueError("dt >= 0 required")
    if dt == 0.0:
        return X
    spec = X.provenance
    noise_spec = EnsembleSpec(n=spec.n, field=spec.field,
                              distribution="gaussian", seed=seed)
    G = sample(noise_spec, trial=(X.trial << 20) + step + 1)
    mixed = np.exp(-dt / 2) * X.entries + np.sqrt(-np.expm1(-dt)) * G.entries
    return IidMatrix(entries=mixed, provenance=spec, trial=X.trial)


def moment_audit(spec: EnsembleSpec, trial: int = 0, max_order: int = 6):
    """Empirical moments E|sqrt(n) x|^p, p = 1..max_order."""
    X = sample(spec, trial)
    scaled = np.abs(np.sqrt(X.n) * X.entries).ravel()
    return {p: float(np.mean(scaled**p)) for p in range(1, max_order + 1)}


# -- binary container ------------------------------------------------------

def save_matrix(X: IidMatrix, path) -> None:
    """Binary container: magic, n, field flag, row-major little-endian
    float64 payload (real part, then imaginary part for complex)."""
    is_complex = X.provenance.field == "complex"
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IB", X.n, 1 if is_complex else 0))
        fh.write(np.ascontiguousarray(X.entries.real,
                                      dtype="<f8").tobytes())
        if is_complex:
            fh.write(np.ascontiguousarray(X.entries.imag,
                                          dtype="<f8").tobytes())


def load_matrix(path, provenance: EnsembleSpec | None = None) -> IidMatrix:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError("not a matrix container")
        n, flag = struct.unpack("<IB", fh.read(5))
        count = n * n
        real = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(n, n)
        if flag:
            imag = np.frombuffer(fh.read(8 * count),
                                 dtype="<f8").reshape(n, n)
            entries = real + 1j * imag
        else:
            entries = real.astype(complex)
    if provenance is None:
        provenance = EnsembleSpec(n=n, field="complex" if flag else "real")
    return IidMatrix(entries=entries, provenance=provenance)
