"""Existence conditions for (N,M)-POVMs.

Sufficient side: any x within the squared inradius of the eigenvalue
simplex above its minimum admits a construction for every basis choice.
Necessary side, for optimal families: rank-one elements with prescribed
overlaps and an isospectral orthonormal extraction when M >= d; equal-rank
projectors when M < d; and for M = 2 the full if-and-only-if criterion in
terms of normalized traceless difference operators.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RegimeError
from .herm_core import HermitianOperator, Spectrum, eig_spectrum
from .povm_model import NMPovm, PovmParams


@dataclass(frozen=True)
class RadiiReport:
    """Inner/outer radius squared of the admissible-overlap region.

    r_in_sq bounds the x-range guaranteed constructible for any basis;
    r_out_sq bounds the x-range allowed at all.  ratio = r_in_sq/r_out_sq.
    """

    d: int
    m: int
    r_in_sq: float
    r_out_sq: float
    ratio: float

    @property
    def sufficient_x_max(self) -> float:
        return self.d / self.m ** 2 + self.r_in_sq

    def to_dict(self) -> dict:
        return {"d": self.d, "M": self.m, "r_in_sq": self.r_in_sq,
                "r_out_sq": self.r_out_sq, "ratio": self.ratio,
                "sufficient_x_max": self.sufficient_x_max}


def radii(d: int, m: int) -> RadiiReport:
    """Simplex inradius, outer constraint radius and their squared ratio.

    r_in_sq = d/(M^2 (d-1)); r_out_sq = min(d(M-1), d(d-1))/M^2.  The ratio
    is evaluated both as the quotient and through its closed two-branch
    form (1/(d-1)^2 for M >= d, 1/((M-1)(d-1)) otherwise); the two must
    agree to near machine precision.
    """
    if d < 2 or m < 2:
        raise ParameterError(f"require d >= 2 and M >= 2, got ({d}, {m})")
    r_in_sq = d / (m ** 2 * (d - 1))
    r_out_sq = min(d * (m - 1), d * (d - 1)) / m ** 2
    if m >= d:
        ratio = 1 / (d - 1) ** 2
    else:
        ratio = 1 / ((m - 1) * (d - 1))
    quotient = r_in_sq / r_out_sq
    assert abs(ratio - quotient) <= 1e-14 * max(1.0, ratio), (ratio, quotient)
    return RadiiReport(d, m, r_in_sq, r_out_sq, ratio)


def check_sufficient(params: PovmParams) -> bool:
    """True iff x is within the basis-independent guaranteed range."""
    report = radii(params.d, params.m)
    return params.x <= report.sufficient_x_max + 1e-12


def predicted_iso_spectrum(d: int, m: int) -> Spectrum:
    """Common spectrum forced on the extracted orthonormal operators, M >= d.

    Each extracted operator is a normalized combination of the identity and
    a rank-two update, so its spectrum has at most three distinct values:
    two simple eigenvalues from the quadratic factor of the characteristic
    polynomial and one (d-2)-fold value from the untouched subspace.
    """
    if d < 2 or m < d:
        raise RegimeError(f"spectrum prediction requires M >= d >= 2, got ({d}, {m})")
    root_m = np.sqrt(m)
    pref = np.sqrt(m - 1) / ((root_m + 1) * np.sqrt(d * d - d))
    disc = np.sqrt(d * d + 4 * (d * d - d) / (root_m - 1))
    lam_plus = (-d + disc) / 2
    lam_minus = (-d - disc) / 2
    values = [pref * (1 + lam_plus), pref, pref * (1 + lam_minus)]
    mults = [1, d - 2, 1]
    if d == 2:
        values = [values[0], values[2]]
        mults = [1, 1]
    spectrum = Spectrum(tuple(float(v) for v in values), tuple(mults))
    expanded = spectrum.expand()
    assert abs(expanded.sum()) <= 1e-12, "predicted spectrum must be traceless"
    assert abs((expanded ** 2).sum() - 1) <= 1e-12, "predicted spectrum must be unit norm"
    return spectrum


@dataclass(frozen=True)
class CheckItem:
    """One named verification with its worst residual."""

    name: str
    passed: bool
    residual: float | None = None
    tolerance: float | None = None
    detail: str | None = None

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.residual is not None:
            out["residual"] = self.residual
        if self.tolerance is not None:
            out["tolerance"] = self.tolerance
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class NecessaryReport:
    """Verdict of a necessary-condition check with per-item diagnostics."""

    regime: str
    passed: bool
    checks: tuple[CheckItem, ...]
    extracted_operators: tuple[HermitianOperator, ...] | None = None

    def to_dict(self) -> dict:
        return {
            "regime": self.regime,
            "passed": self.passed,
            "checks": [c.to_dict() for c in self.checks],
            "extracted_count": (len(self.extracted_operators)
                                if self.extracted_operators is not None else 0),
        }


def _require_optimal(povm: NMPovm) -> PovmParams:
    p = povm.params
    if not p.is_optimal:
        raise RegimeError(
            f"check applies to optimal families only; x = {p.x} is below "
            f"the endpoint {p.x_upper}")
    return p


def check_optimal_m_ge_d(povm: NMPovm, tol: float = 1e-9) -> NecessaryReport:
    """Necessary conditions for an optimal family with M >= d.

    Verifies that every element is rank one with eigenvalue d/M, that the
    eigenvector overlap magnitudes take the two prescribed values, and that
    the orthonormal operators extracted from each POVM (anchored on its
    last element) are traceless, mutually orthonormal and share the
    predicted spectrum.  The extracted operators are returned.
    """
    p = _require_optimal(povm)
    d, n, m = p.d, p.n, p.m
    if m < d:
        raise RegimeError(f"this check requires M >= d, got M = {m} < d = {d}")
    checks: list[CheckItem] = []

    stack = povm.stacked()
    eigvals, eigvecs = np.linalg.eigh(stack)
    peak = d / m
    top_res = float(np.max(np.abs(eigvals[:, -1] - peak)))
    rest_res = float(np.max(np.abs(eigvals[:, :-1]))) if d > 1 else 0.0
    checks.append(CheckItem("rank_one_top_eigenvalue", top_res <= tol, top_res, tol))
    checks.append(CheckItem("rank_one_null_eigenvalues",
                            rest_res <= tol * peak, rest_res, tol * peak))

    vecs = eigvecs[:, :, -1]
    overlap = np.abs(vecs.conj() @ vecs.T)
    group = np.repeat(np.arange(n), m)
    same = group[:, None] == group[None, :]
    eye = np.eye(n * m, dtype=bool)
    intra_target = np.sqrt((m / d - 1) / (m - 1))
    intra_mask = same & ~eye
    intra_res = float(np.max(np.abs(overlap[intra_mask] - intra_target))) \
        if intra_mask.any() else 0.0
    cross_res = float(np.max(np.abs(overlap[~same] - np.sqrt(1 / d)))) \
        if (~same).any() else 0.0
    checks.append(CheckItem("intra_overlap_magnitude", intra_res <= tol,
                            intra_res, tol))
    checks.append(CheckItem("cross_overlap_magnitude", cross_res <= tol,
                            cross_res, tol))

    root_m = np.sqrt(m)
    pref = np.sqrt(m - 1) / ((root_m + 1) * np.sqrt(d * d - d))
    extracted = []
    for alpha in range(n):
        anchor = stack[alpha * m + m - 1]
        for a in range(m - 1):
            update = root_m * anchor - root_m * (root_m + 1) * stack[alpha * m + a]
            extracted.append(pref * (np.eye(d) + update))
    ext = np.array(extracted)

    trace_res = float(np.max(np.abs(np.einsum("aii->a", ext).real)))
    checks.append(CheckItem("extracted_traceless", trace_res <= tol, trace_res, tol))
    gram = np.einsum("aij,bji->ab", ext, ext).real
    gram_res = float(np.max(np.abs(gram - np.eye(len(ext)))))
    checks.append(CheckItem("extracted_orthonormal", gram_res <= tol, gram_res, tol))

    predicted = predicted_iso_spectrum(d, m)
    operators = tuple(HermitianOperator(g) for g in ext)
    spec_ok = True
    worst = 0.0
    for op in operators:
        spectrum = eig_spectrum(op)
        if not spectrum.matches(predicted, tol):
            spec_ok = False
        worst = max(worst, float(np.max(np.abs(
            spectrum.expand() - predicted.expand()))) if spectrum.dim == predicted.dim
            else np.inf)
    checks.append(CheckItem("extracted_isospectral", spec_ok and worst <= tol,
                            worst, tol))

    passed = all(c.passed for c in checks)
    return NecessaryReport("M_ge_d", passed, tuple(checks), operators)


def check_optimal_m_between(povm: NMPovm, tol: float = 1e-9) -> NecessaryReport:
    """Necessary conditions for an optimal family with 2 <= M < d.

    All elements must be projection operators of rank d/M; when d/M is not
    an integer the verdict is an immediate fail with an arithmetic witness.
    """
    p = _require_optimal(povm)
    d, m = p.d, p.m
    if not 2 <= m < d:
        raise RegimeError(f"this check requires 2 <= M < d, got M = {m}, d = {d}")
    checks: list[CheckItem] = []

    if d % m != 0:
        checks.append(CheckItem("rank_integrality", False,
                                detail=f"d/M = {d}/{m} is not an integer"))
        return NecessaryReport("M_between", False, tuple(checks))
    rank = d // m
    checks.append(CheckItem("rank_integrality", True, detail=f"d/M = {rank}"))

    stack = povm.stacked()
    eigvals = np.linalg.eigvalsh(stack)
    binary_res = float(np.max(np.minimum(np.abs(eigvals), np.abs(eigvals - 1))))
    checks.append(CheckItem("eigenvalues_binary", binary_res <= tol, binary_res, tol))

    ranks = (eigvals > 0.5).sum(axis=1)
    rank_ok = bool(np.all(ranks == rank))
    checks.append(CheckItem("projector_rank", rank_ok,
                            detail=f"ranks observed: {sorted(set(ranks.tolist()))}, "
                                   f"required: {rank}"))

    idem = np.einsum("aij,ajk->aik", stack, stack) - stack
    idem_res = float(np.max(np.linalg.norm(idem, axis=(1, 2))))
    checks.append(CheckItem("idempotence", idem_res <= tol, idem_res, tol))

    passed = all(c.passed for c in checks)
    return NecessaryReport("M_between", passed, tuple(checks))


def check_optimal_m2(povm: NMPovm, tol: float = 1e-9,
                     ortho_tol: float = 1e-10) -> NecessaryReport:
    """The two-outcome criterion for optimal (N,2) families.

    Builds K_i = (Pi_i - 1/2)/sqrt(d/4) for every element and verifies the
    half/half spectrum {+1/sqrt(d), -1/sqrt(d)}, pairwise orthogonality of
    the first-outcome operators across the N POVMs, and the exact
    antisymmetry between the two outcomes of each POVM.  Odd dimension is
    an immediate fail.  The first-outcome operators are returned.
    """
    p = _require_optimal(povm)
    d, n, m = p.d, p.n, p.m
    if m != 2:
        raise RegimeError(f"this check requires M = 2, got M = {m}")
    if n > d * d - 1:
        raise RegimeError(f"N = {n} exceeds the operator-space capacity {d*d - 1}")
    checks: list[CheckItem] = []

    if d % 2 != 0:
        checks.append(CheckItem("even_dimension", False,
                                detail=f"d = {d} is odd"))
        return NecessaryReport("M_eq_2", False, tuple(checks))
    checks.append(CheckItem("even_dimension", True, detail=f"d = {d}"))

    stack = povm.stacked()
    k_ops = (stack - np.eye(d) / 2) / np.sqrt(d / 4)
    target = np.concatenate([np.full(d // 2, -1 / np.sqrt(d)),
                             np.full(d // 2, 1 / np.sqrt(d))])
    eigvals = np.linalg.eigvalsh(k_ops)
    spec_res = float(np.max(np.abs(eigvals - target)))
    checks.append(CheckItem("half_half_spectrum", spec_res <= tol, spec_res, tol))

    first = k_ops[0::2]
    gram = np.einsum("aij,bji->ab", first, first).real
    off = gram - np.diag(np.diag(gram))
    ortho_res = float(np.max(np.abs(off))) if n > 1 else 0.0
    checks.append(CheckItem("pairwise_orthogonality", ortho_res <= ortho_tol,
                            ortho_res, ortho_tol))

    anti_res = float(np.max(np.abs(k_ops[0::2] + k_ops[1::2])))
    checks.append(CheckItem("outcome_antisymmetry", anti_res <= 1e-12,
                            anti_res, 1e-12))

    passed = all(c.passed for c in checks)
    operators = tuple(HermitianOperator(k) for k in first)
    return NecessaryReport("M_eq_2", passed, tuple(checks), operators)


def regime_of(d: int, m: int) -> str:
    """Which necessary-condition regime the parameters fall into."""
    if m >= d:
        return "M_ge_d"
    if m == 2:
        return "M_eq_2"
    return "M_between"


def feasibility_screen(d: int, n: int, m: int) -> dict:
    """Parameter-only screening of an optimal (N,M) family in dimension d.

    Reports the optimal overlap value, informational completeness, the
    applicable regime, and every necessary condition decidable from the
    parameters alone (operator-space capacity, rank integrality for M < d,
    parity for M = 2).  A passing screen never asserts existence, only that
    the parameters are not excluded.
    """
    if d < 2 or n < 1 or m < 2:
        raise ParameterError(f"require d >= 2, N >= 1, M >= 2, got ({d}, {n}, {m})")
    x_opt = min(d * d / m ** 2, d / m)
    gamma = (x_opt * m ** 2 - d) / (m * (m - 1))
    regime = regime_of(d, m)
    complete = (m - 1) * n + 1 == d * d

    checks: list[CheckItem] = []
    reasons: list[str] = []

    capacity_ok = n * (m - 1) <= d * d - 1
    checks.append(CheckItem(
        "operator_space_capacity", capacity_ok,
        detail=f"N(M-1) = {n * (m - 1)} vs d^2 - 1 = {d*d - 1}"))
    if not capacity_ok:
        reasons.append("more independent traceless directions required than exist")

    if m < d:
        integral = d % m == 0
        checks.append(CheckItem(
            "rank_integrality", integral,
            detail=(f"element rank d/M = {d // m}" if integral
                    else f"d/M = {d}/{m} is not an integer")))
        if not integral:
            reasons.append("optimal elements would need non-integer rank d/M")

    if m == 2:
        even = d % 2 == 0
        checks.append(CheckItem("even_dimension", even, detail=f"d = {d}"))
        if not even:
            reasons.append("d odd: the half/half spectrum cannot exist")

    excluded = bool(reasons)
    return {
        "d": d, "N": n, "M": m,
        "regime": regime,
        "x_optimal": x_opt,
        "traceless_eigenvalue": gamma,
        "informationally_complete": complete,
        "checks": [c.to_dict() for c in checks],
        "excluded": excluded,
        "reasons": reasons,
        "verdict": "excluded" if excluded else "not excluded",
    }
