"""Dense hermitian operator algebra: inner products, spectra, PSD tests."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import (DimensionMismatchError, NumericError, ParameterError,
                     StructureError)

HERMITICITY_TOL = 1e-12
PSD_TOL = 1e-10
CLUSTER_TOL = 1e-8
RECONSTRUCTION_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """A dense complex d x d hermitian matrix, d >= 2.

    The input is checked entrywise against its conjugate transpose at
    HERMITICITY_TOL and then replaced by (a + a^dagger)/2, so eigensolvers
    downstream always see an exactly hermitian array.  The stored array is
    read-only.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.entries, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise StructureError(f"expected a square matrix, got shape {arr.shape}")
        if arr.shape[0] < 2:
            raise StructureError("operator dimension must be at least 2")
        deviation = float(np.max(np.abs(arr - arr.conj().T)))
        if deviation > HERMITICITY_TOL:
            raise StructureError(
                f"matrix is not hermitian: max |a - a^dagger| = {deviation:.3e} "
                f"exceeds {HERMITICITY_TOL:.0e}")
        arr = (arr + arr.conj().T) / 2
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def hs_norm(self) -> float:
        """Hilbert-Schmidt (Frobenius) norm."""
        return float(np.linalg.norm(self.entries))

    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted descending, grouped into multiplicity clusters.

    ``eigenvalues[i]`` is the representative (cluster mean) of a group that
    occurs ``multiplicities[i]`` times.
    """

    eigenvalues: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        if len(self.eigenvalues) != len(self.multiplicities):
            raise StructureError("eigenvalues and multiplicities must align")
        if any(m < 1 for m in self.multiplicities):
            raise StructureError("multiplicities must be positive")

    @property
    def dim(self) -> int:
        return sum(self.multiplicities)

    def expand(self) -> np.ndarray:
        """Full descending eigenvalue list with every repetition spelled out."""
        return np.repeat(self.eigenvalues, self.multiplicities)

    def matches(self, other: "Spectrum", tol: float) -> bool:
        """Same multiplicity pattern and group values within ``tol``."""
        if self.multiplicities != other.multiplicities:
            return False
        return all(abs(a - b) <= tol
                   for a, b in zip(self.eigenvalues, other.eigenvalues))


class PsdCheck(NamedTuple):
    """Outcome of a positive-semidefiniteness test with its witness."""

    ok: bool
    min_eigenvalue: float
    threshold: float


def hs_inner(a: HermitianOperator, b: HermitianOperator) -> float:
    """Hilbert-Schmidt scalar product Tr{a b}; real for hermitian arguments."""
    if a.dim != b.dim:
        raise DimensionMismatchError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.einsum("ij,ji->", a.entries, b.entries).real)


def _cluster(values_desc: np.ndarray, cluster_tol: float) -> Spectrum:
    groups: list[list[float]] = [[float(values_desc[0])]]
    for v in values_desc[1:]:
        if groups[-1][-1] - float(v) < cluster_tol:
            groups[-1].append(float(v))
        else:
            groups.append([float(v)])
    return Spectrum(tuple(float(np.mean(g)) for g in groups),
                    tuple(len(g) for g in groups))


def eig_spectrum(a: HermitianOperator, cluster_tol: float = CLUSTER_TOL) -> Spectrum:
    """Clustered spectrum of ``a``.

    Eigenvalues closer than ``cluster_tol`` to their neighbour are merged
    into one multiplicity group.  The eigendecomposition is checked against
    the input at RECONSTRUCTION_TOL relative accuracy.
    """
    if cluster_tol <= 0:
        raise ParameterError(f"cluster tolerance must be positive, got {cluster_tol}")
    try:
        w, v = np.linalg.eigh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed to converge: {exc}") from exc
    residual = float(np.linalg.norm((v * w) @ v.conj().T - a.entries))
    if residual > RECONSTRUCTION_TOL * a.hs_norm:
        raise NumericError("eigendecomposition does not reconstruct the input",
                           residual=residual)
    return _cluster(w[::-1], cluster_tol)


def is_psd(a: HermitianOperator, tol: float = PSD_TOL) -> PsdCheck:
    """Positive-semidefiniteness test scaled by max(1, HS norm).

    Accepts iff the minimal eigenvalue is >= -tol * max(1, ||a||_HS); the
    witness carries the offending eigenvalue otherwise.
    """
    if tol < 0:
        raise ParameterError(f"PSD tolerance must be non-negative, got {tol}")
    try:
        w = np.linalg.eigvalsh(a.entries)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed to converge: {exc}") from exc
    threshold = -tol * max(1.0, a.hs_norm)
    lo = float(w[0])
    return PsdCheck(lo >= threshold, lo, threshold)


def matrix_to_json(a) -> list:
    """Encode a complex matrix as nested lists of [re, im] pairs."""
    arr = a.entries if isinstance(a, HermitianOperator) else np.asarray(a, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in arr]


def matrix_from_json(rows) -> np.ndarray:
    """Decode the [re, im]-pair encoding back into a complex array."""
    try:
        arr = np.asarray(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise StructureError(f"malformed matrix encoding: {exc}") from exc
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] != arr.shape[1]:
        raise StructureError(
            f"matrix encoding must be d rows of d [re, im] pairs, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]
