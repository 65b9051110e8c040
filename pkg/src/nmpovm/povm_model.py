"""The (N,M)-POVM data model, its validator and Born-rule evaluation.

An (N,M)-POVM is a family of N M-outcome POVMs on a d-dimensional system
whose elements share a constant trace d/M, a common self-overlap x, a
constant intra-family cross overlap and a constant inter-family overlap.
Elements are stored flat, ordered by the coordinate map
i(alpha, a) = (alpha - 1) * M + a with 1-based alpha and a.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (DimensionMismatchError, ParameterError, StateError,
                     StructureError)
from .herm_core import (PSD_TOL, HermitianOperator, is_psd, matrix_from_json,
                        matrix_to_json)

OPTIMALITY_TOL = 1e-12


def element_index(alpha: int, a: int, m: int) -> int:
    """1-based flat index of outcome ``a`` of POVM ``alpha``."""
    return (alpha - 1) * m + a


@dataclass(frozen=True)
class PovmParams:
    """Parameter tuple (d, N, M, x) with its derived map eigenvalues.

    x is the common self-overlap Tr{Pi_i^2}.  Its admissible range is the
    half-open interval (d/M^2, min(d^2/M^2, d/M)]; the upper endpoint is
    the optimal case.
    """

    d: int
    n: int
    m: int
    x: float

    def __post_init__(self):
        if self.d < 2 or self.n < 1 or self.m < 2:
            raise ParameterError(
                f"require d >= 2, N >= 1, M >= 2, got ({self.d}, {self.n}, {self.m})")
        if self.x <= self.x_lower:
            raise ParameterError(
                f"x = {self.x} violates the strict lower bound x > d/M^2 = {self.x_lower}")
        if self.x > self.x_upper + OPTIMALITY_TOL * max(1.0, self.x_upper):
            raise ParameterError(
                f"x = {self.x} exceeds the upper bound min(d^2/M^2, d/M) = {self.x_upper}")

    @property
    def x_lower(self) -> float:
        return self.d / self.m ** 2

    @property
    def x_upper(self) -> float:
        return min(self.d ** 2 / self.m ** 2, self.d / self.m)

    @property
    def identity_eigenvalue(self) -> float:
        """Stretch applied to the identity component of the expansion map."""
        return self.d * self.n / self.m

    @property
    def traceless_eigenvalue(self) -> float:
        """Degenerate stretch applied to every traceless component."""
        return (self.x * self.m ** 2 - self.d) / (self.m * (self.m - 1))

    @property
    def is_optimal(self) -> bool:
        return abs(self.x - self.x_upper) <= OPTIMALITY_TOL * max(1.0, self.x_upper)

    def to_dict(self) -> dict:
        return {"d": self.d, "N": self.n, "M": self.m, "x": self.x}


def povm_params(d: int, n: int, m: int, x: float) -> PovmParams:
    """Validated parameter tuple; raises ParameterError outside the x range."""
    return PovmParams(int(d), int(n), int(m), float(x))


@dataclass(frozen=True, eq=False)
class NMPovm:
    """Parameters plus the N*M hermitian elements, flat in i(alpha, a) order.

    Construction checks only the structural layout; the numerical defining
    relations are checked by validate_povm.
    """

    params: PovmParams
    elements: tuple[HermitianOperator, ...]

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        expected = self.params.n * self.params.m
        if len(self.elements) != expected:
            raise StructureError(
                f"expected {expected} elements for (N, M) = "
                f"({self.params.n}, {self.params.m}), got {len(self.elements)}")
        if any(e.dim != self.params.d for e in self.elements):
            raise StructureError("element dimension differs from params.d")

    def element(self, alpha: int, a: int) -> HermitianOperator:
        m = self.params.m
        if not (1 <= alpha <= self.params.n and 1 <= a <= m):
            raise ParameterError(f"(alpha, a) = ({alpha}, {a}) out of range")
        return self.elements[element_index(alpha, a, m) - 1]

    def stacked(self) -> np.ndarray:
        """All elements as one (N*M, d, d) array."""
        return np.array([e.entries for e in self.elements])


@dataclass(frozen=True)
class ValidationReport:
    """Per-condition maximum residuals for the defining relations.

    x_measured is the mean of the self-overlaps Tr{Pi_i^2}, reported so
    that drift between the stored x and the elements is visible.
    """

    d: int
    n: int
    m: int
    x_stored: float
    x_measured: float
    trace_residual: float
    self_overlap_residual: float
    intra_overlap_residual: float
    cross_overlap_residual: float
    completeness_residual: float
    min_eigenvalue: float
    tol: float

    @property
    def psd_residual(self) -> float:
        return max(0.0, -self.min_eigenvalue)

    @property
    def passed(self) -> bool:
        residuals = (self.trace_residual, self.self_overlap_residual,
                     self.intra_overlap_residual, self.cross_overlap_residual,
                     self.completeness_residual, self.psd_residual)
        return all(r <= self.tol for r in residuals)

    def to_dict(self) -> dict:
        return {
            "d": self.d, "N": self.n, "M": self.m,
            "x_stored": self.x_stored,
            "x_measured": self.x_measured,
            "trace_residual": self.trace_residual,
            "self_overlap_residual": self.self_overlap_residual,
            "intra_overlap_residual": self.intra_overlap_residual,
            "cross_overlap_residual": self.cross_overlap_residual,
            "completeness_residual": self.completeness_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "psd_residual": self.psd_residual,
            "tol": self.tol,
            "passed": self.passed,
        }


def validate_povm(povm: NMPovm, tol: float = 1e-10) -> ValidationReport:
    """Check every defining relation of an (N,M)-POVM against ``tol``.

    Reports the worst residual for: the element traces (d/M), the
    self-overlaps (the stored x), the intra-POVM cross overlaps
    ((d - Mx)/(M(M-1))), the inter-POVM overlaps (d/M^2), per-POVM
    completeness, and the most negative element eigenvalue.
    """
    p = povm.params
    d, n, m, x = p.d, p.n, p.m, p.x
    stack = povm.stacked()

    traces = np.einsum("aii->a", stack).real
    trace_residual = float(np.max(np.abs(traces - d / m)))

    gram = np.einsum("aij,bji->ab", stack, stack).real
    group = np.repeat(np.arange(n), m)
    same_group = group[:, None] == group[None, :]
    eye = np.eye(n * m, dtype=bool)

    self_res = float(np.max(np.abs(np.diag(gram) - x)))
    intra_target = (d - m * x) / (m * (m - 1))
    intra_mask = same_group & ~eye
    intra_res = float(np.max(np.abs(gram[intra_mask] - intra_target))) if intra_mask.any() else 0.0
    cross_res = float(np.max(np.abs(gram[~same_group] - d / m ** 2))) if (~same_group).any() else 0.0

    sums = stack.reshape(n, m, d, d).sum(axis=1)
    completeness_res = float(np.max(np.abs(sums - np.eye(d))))

    min_eig = float(min(np.linalg.eigvalsh(stack).min(axis=1)))
    x_measured = float(np.mean(np.diag(gram)))

    return ValidationReport(d, n, m, x, x_measured, trace_residual, self_res,
                            intra_res, cross_res, completeness_res, min_eig, tol)


def born_probabilities(povm: NMPovm, rho: HermitianOperator,
                       state_tol: float = 1e-10) -> np.ndarray:
    """Outcome probabilities Tr{rho Pi_i} for a density operator rho.

    rho must be positive semidefinite with unit trace (checked at
    ``state_tol`` for the trace and the default PSD tolerance for
    positivity).  Returns the N*M probabilities in element order.
    """
    if rho.dim != povm.params.d:
        raise DimensionMismatchError(
            f"state dimension {rho.dim} differs from POVM dimension {povm.params.d}")
    if abs(rho.trace() - 1.0) > state_tol:
        raise StateError(f"state trace {rho.trace()} differs from 1")
    check = is_psd(rho, PSD_TOL)
    if not check.ok:
        raise StateError(f"state has negative eigenvalue {check.min_eigenvalue:.3e}")
    return np.einsum("aij,ji->a", povm.stacked(), rho.entries).real


def is_informationally_complete(povm: NMPovm, tol: float = 1e-10) -> bool:
    """True iff (M-1)N + 1 = d^2 and the elements span the full operator space.

    The span test takes the rank of the HS Gram matrix, counting singular
    values above ``tol`` times the largest one.
    """
    p = povm.params
    if (p.m - 1) * p.n + 1 != p.d ** 2:
        return False
    stack = povm.stacked()
    gram = np.einsum("aij,bji->ab", stack, stack).real
    svals = np.abs(np.linalg.eigvalsh(gram))
    rank = int(np.sum(svals > tol * svals.max()))
    return rank == p.d ** 2


def povm_to_dict(povm: NMPovm) -> dict:
    doc = povm.params.to_dict()
    doc["elements"] = [matrix_to_json(e) for e in povm.elements]
    return doc


def povm_from_dict(data: dict) -> NMPovm:
    try:
        params = povm_params(data["d"], data["N"], data["M"], data["x"])
        raw = data["elements"]
    except (KeyError, TypeError, ValueError) as exc:
        raise StructureError(f"malformed POVM document: {exc}") from exc
    elements = tuple(HermitianOperator(matrix_from_json(m)) for m in raw)
    return NMPovm(params, elements)


def save_povm(povm: NMPovm, path) -> None:
    with open(path, "w") as fh:
        json.dump(povm_to_dict(povm), fh)


def load_povm(path) -> NMPovm:
    with open(path) as fh:
        return povm_from_dict(json.load(fh))
