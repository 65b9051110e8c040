"""Orthonormal hermitian operator bases and traceless-index partitions.

Every basis produced here has d^2 elements, the first being the normalized
identity and the remaining d^2 - 1 traceless.  Indices are 1-based
throughout (index 1 is the identity element), matching the on-disk
partition format.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .errors import ParameterError, PartitionError, StructureError
from .herm_core import HermitianOperator, matrix_from_json, matrix_to_json

PAULI = (
    np.array([[1, 0], [0, 1]], dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True)
class OperatorBasis:
    """d^2 hermitian operators intended as an orthonormal basis.

    Only structural properties (element count, dimensions) are enforced at
    construction; numerical orthonormality is the job of verify_basis so
    that defective candidates can still be represented and diagnosed.
    """

    dim: int
    elements: tuple[HermitianOperator, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if len(self.elements) != self.dim * self.dim:
            raise StructureError(
                f"basis for dimension {self.dim} needs {self.dim**2} elements, "
                f"got {len(self.elements)}")
        if any(e.dim != self.dim for e in self.elements):
            raise StructureError("all basis elements must share the basis dimension")

    def element(self, index: int) -> HermitianOperator:
        """Element by 1-based index; index 1 is the identity element."""
        if not 1 <= index <= len(self.elements):
            raise ParameterError(f"basis index {index} out of range 1..{len(self.elements)}")
        return self.elements[index - 1]

    def stacked(self) -> np.ndarray:
        """All elements as one (d^2, d, d) array."""
        return np.array([e.entries for e in self.elements])

    def traceless_stacked(self) -> np.ndarray:
        """Elements 2..d^2 as one (d^2 - 1, d, d) array."""
        return np.array([e.entries for e in self.elements[1:]])


@dataclass(frozen=True)
class BasisReport:
    """Residuals from verify_basis; passes iff all residuals are within tol."""

    orthonormality_residual: float
    trace_residual: float
    identity_residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return (self.orthonormality_residual <= self.tol
                and self.trace_residual <= self.tol
                and self.identity_residual <= self.tol)

    def to_dict(self) -> dict:
        return {
            "orthonormality_residual": self.orthonormality_residual,
            "trace_residual": self.trace_residual,
            "identity_residual": self.identity_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def gell_mann_basis(d: int) -> OperatorBasis:
    """Generalized Gell-Mann basis for dimension d.

    Order: identity/sqrt(d), then the (d^2-d)/2 symmetric pair operators
    (j < k, lexicographic), the (d^2-d)/2 antisymmetric pair operators in
    the same pair order, and finally the d-1 diagonal operators.  Every
    element is HS-normalized.
    """
    if d < 2:
        raise ParameterError(f"dimension must be at least 2, got {d}")
    elements = [HermitianOperator(np.eye(d) / np.sqrt(d))]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1 / np.sqrt(2)
            elements.append(HermitianOperator(m))
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / np.sqrt(2)
            m[k, j] = 1j / np.sqrt(2)
            elements.append(HermitianOperator(m))
    for level in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[np.arange(level), np.arange(level)] = 1
        m[level, level] = -level
        elements.append(HermitianOperator(m / np.sqrt(level * (level + 1))))
    return OperatorBasis(d, tuple(elements))


def pauli_product(indices) -> np.ndarray:
    """Unnormalized k-fold tensor product of Pauli matrices by index tuple."""
    out = np.array([[1.0 + 0j]])
    for i in indices:
        out = np.kron(out, PAULI[i])
    return out


def pauli_tensor_basis(k: int) -> OperatorBasis:
    """Normalized Pauli tensor-product basis for d = 2^k.

    The 4^k index tuples are enumerated lexicographically with the identity
    tuple (0, ..., 0) first; each operator is divided by sqrt(2^k).
    """
    if k < 1:
        raise ParameterError(f"qubit count must be at least 1, got {k}")
    d = 2 ** k
    scale = 1 / np.sqrt(d)
    elements = tuple(HermitianOperator(scale * pauli_product(idx))
                     for idx in product(range(4), repeat=k))
    return OperatorBasis(d, elements)


def verify_basis(basis: OperatorBasis, tol: float = 1e-10) -> BasisReport:
    """Check orthonormality, tracelessness and the identity element.

    Returns the maximum absolute deviation of the Gram matrix from the
    identity, of the traces of elements 2..d^2 from zero, and of the first
    element from 1_d/sqrt(d).
    """
    d = basis.dim
    stack = basis.stacked()
    gram = np.einsum("aij,bji->ab", stack, stack).real
    ortho = float(np.max(np.abs(gram - np.eye(d * d))))
    traces = np.einsum("aii->a", stack[1:]).real
    trace_res = float(np.max(np.abs(traces))) if len(traces) else 0.0
    identity_res = float(np.max(np.abs(stack[0] - np.eye(d) / np.sqrt(d))))
    return BasisReport(ortho, trace_res, identity_res, tol)


def rotate_traceless(basis: OperatorBasis, ortho: np.ndarray,
                     tol: float = 1e-10) -> OperatorBasis:
    """New basis with the traceless part mixed by an orthogonal matrix.

    ``ortho`` must be (d^2-1) x (d^2-1) real orthogonal; the identity
    element is kept in place, element 1+i becomes sum_j ortho[i, j] * G_{1+j}.
    """
    n = basis.dim ** 2 - 1
    ortho = np.asarray(ortho, dtype=float)
    if ortho.shape != (n, n):
        raise ParameterError(f"rotation must be {n}x{n}, got {ortho.shape}")
    if np.max(np.abs(ortho @ ortho.T - np.eye(n))) > tol:
        raise ParameterError("rotation matrix is not orthogonal")
    mixed = np.einsum("ij,jkl->ikl", ortho, basis.traceless_stacked())
    elements = (basis.elements[0],) + tuple(HermitianOperator(m) for m in mixed)
    return OperatorBasis(basis.dim, elements)


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed n x n orthogonal matrix (QR with sign fixing)."""
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


@dataclass(frozen=True)
class Partition:
    """N disjoint equal-size blocks of traceless basis indices.

    Indices are 1-based into the owning basis and must lie in 2..d^2; block
    order and the order inside each block are significant (they fix which
    basis element carries which expansion coordinate).
    """

    dim: int
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "blocks",
                           tuple(tuple(int(i) for i in b) for b in self.blocks))
        if not self.blocks:
            raise PartitionError("partition needs at least one block")
        size = len(self.blocks[0])
        if size < 1:
            raise PartitionError("blocks must be non-empty")
        if any(len(b) != size for b in self.blocks):
            raise PartitionError("all blocks must have equal size")
        flat = [i for b in self.blocks for i in b]
        if len(set(flat)) != len(flat):
            raise PartitionError("blocks must be pairwise disjoint")
        bad = [i for i in flat if not 2 <= i <= self.dim ** 2]
        if bad:
            raise PartitionError(
                f"indices {bad} outside the traceless range 2..{self.dim**2}")

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_size(self) -> int:
        return len(self.blocks[0])


def make_partition(d: int, n: int, m: int, assignment=None) -> Partition:
    """Partition for an (n, m) construction in dimension d.

    The default assignment packs consecutive indices starting at 2 into
    blocks of size m - 1; an explicit ``assignment`` (iterable of index
    blocks) is validated for block count, size, disjointness and range.
    """
    if d < 2 or n < 1 or m < 2:
        raise ParameterError(f"require d >= 2, n >= 1, m >= 2, got ({d}, {n}, {m})")
    if n * (m - 1) > d * d - 1:
        raise PartitionError(
            f"cannot place {n} blocks of size {m - 1} into {d*d - 1} traceless indices")
    if assignment is None:
        assignment = [tuple(range(2 + a * (m - 1), 2 + (a + 1) * (m - 1)))
                      for a in range(n)]
    blocks = tuple(tuple(b) for b in assignment)
    if len(blocks) != n:
        raise PartitionError(f"expected {n} blocks, got {len(blocks)}")
    if any(len(b) != m - 1 for b in blocks):
        raise PartitionError(f"every block must have size {m - 1}")
    return Partition(d, blocks)


# The d=3 four-block partition used for the maximal mutually unbiased
# measurement, expressed in the index order of gell_mann_basis(3).
FIG1_BLOCKS = ((2, 9), (8, 3), (5, 6), (4, 7))

PARTITION_PRESETS = {
    "fig1": (3, FIG1_BLOCKS),
}


def preset_partition(name: str) -> Partition:
    """Named partition preset; currently only "fig1" (d=3, four 2-blocks)."""
    try:
        d, blocks = PARTITION_PRESETS[name]
    except KeyError:
        raise ParameterError(
            f"unknown partition preset {name!r}; available: {sorted(PARTITION_PRESETS)}")
    return Partition(d, blocks)


def basis_to_dict(basis: OperatorBasis) -> dict:
    return {"d": basis.dim, "elements": [matrix_to_json(e) for e in basis.elements]}


def basis_from_dict(data: dict) -> OperatorBasis:
    try:
        d = int(data["d"])
        raw = data["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed basis document: {exc}") from exc
    return OperatorBasis(d, tuple(HermitianOperator(matrix_from_json(m)) for m in raw))


def save_basis(basis: OperatorBasis, path) -> None:
    with open(path, "w") as fh:
        json.dump(basis_to_dict(basis), fh)


def load_basis(path) -> OperatorBasis:
    with open(path) as fh:
        return basis_from_dict(json.load(fh))


def partition_to_dict(p: Partition) -> dict:
    return {"d": p.dim, "blocks": [list(b) for b in p.blocks]}


def partition_from_dict(data: dict) -> Partition:
    try:
        d = int(data["d"])
        blocks = data["blocks"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed partition document: {exc}") from exc
    return Partition(d, tuple(tuple(int(i) for i in b) for b in blocks))


def save_partition(p: Partition, path) -> None:
    with open(path, "w") as fh:
        json.dump(partition_to_dict(p), fh)


def load_partition(path) -> Partition:
    with open(path) as fh:
        return partition_from_dict(json.load(fh))
