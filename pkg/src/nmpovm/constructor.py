"""Builders for (N,M)-POVMs.

The generic route expands each element as 1/M plus a scaled combination of
traceless basis operators, with the combination coefficients laid out as a
real (N*M) x d^2 matrix whose per-POVM blocks are regular-simplex vertex
coordinates.  On top of that sit: a construction guaranteed positive under
the inradius bound, the Pauli-tensor family of optimal two-outcome POVMs,
the maximal four-triangle measurement in dimension 3, and small reference
fixtures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConstructionError, NumericError, ParameterError,
                     StructureError)
from .herm_core import HermitianOperator, is_psd
from .operator_bases import (OperatorBasis, Partition, gell_mann_basis,
                             make_partition, pauli_product, preset_partition)
from .povm_model import NMPovm, PovmParams, povm_params, validate_povm

_STRUCTURAL_TOL = 1e-10


def simplex_vertices(m: int) -> np.ndarray:
    """Vertex coordinates of a regular (m-1)-simplex centred at the origin.

    Returns an (m, m-1) array whose rows v_a satisfy
    v_a . v_b = delta_ab - 1/m, so they sum to zero, have squared norm
    (m-1)/m, and their coordinate columns are orthonormal.
    """
    if m < 2:
        raise ParameterError(f"simplex needs at least 2 vertices, got {m}")
    cols = []
    for j in range(1, m):
        c = np.zeros(m)
        c[:j] = 1.0
        c[j] = -j
        cols.append(c / np.sqrt(j * (j + 1)))
    return np.column_stack(cols)


def planar_rotation(angle: float) -> np.ndarray:
    """2x2 rotation matrix."""
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s], [s, c]])


@dataclass(frozen=True, eq=False)
class XMatrix:
    """Real (N*M) x d^2 expansion-coefficient matrix with block structure.

    Column 1 is constant 1/sqrt(NM); each partition block owns M-1 columns
    that are nonzero only on its own M rows.  Columns of basis indices not
    covered by the partition are identically zero (that can only happen
    when N(M-1) < d^2 - 1, i.e. for informationally incomplete layouts).
    """

    values: np.ndarray
    d: int
    n: int
    m: int
    partition: Partition

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.n * self.m, self.d ** 2):
            raise StructureError(
                f"expected shape {(self.n * self.m, self.d ** 2)}, got {v.shape}")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def covered_columns(self) -> tuple[int, ...]:
        """Sorted 1-based column indices carrying data (identity plus blocks)."""
        return tuple(sorted({1} | {i for b in self.partition.blocks for i in b}))

    def verify(self, tol: float = _STRUCTURAL_TOL) -> dict:
        """Residuals for the defining relations of the coefficient matrix."""
        v = self.values
        nm = self.n * self.m
        cov = [c - 1 for c in self.covered_columns]
        gram = v[:, cov].T @ v[:, cov]
        ortho = float(np.max(np.abs(gram - np.eye(len(cov)))))
        uncovered = sorted(set(range(self.d ** 2)) - set(cov))
        zero_res = float(np.max(np.abs(v[:, uncovered]))) if uncovered else 0.0
        first = float(np.max(np.abs(v[:, 0] - 1 / np.sqrt(nm))))
        sums = v[:, 1:].reshape(self.n, self.m, -1).sum(axis=1)
        outcome_sum = float(np.max(np.abs(sums)))
        row_norms = np.sum(v[:, 1:] ** 2, axis=1)
        row_norm = float(np.max(np.abs(row_norms - (self.m - 1) / self.m)))
        residuals = {
            "column_orthonormality": ortho,
            "uncovered_columns_zero": zero_res,
            "first_column": first,
            "per_povm_row_sum": outcome_sum,
            "row_norm": row_norm,
        }
        residuals["passed"] = all(r <= tol for r in list(residuals.values()))
        return residuals


def simplex_x_matrix(d: int, n: int, m: int, partition: Partition,
                     block_rotations=None) -> XMatrix:
    """Block-structured coefficient matrix from regular-simplex vertices.

    For block alpha the M rows carry the vertices of a regular
    (M-1)-simplex in the block's columns, optionally rotated by an
    orthogonal (M-1) x (M-1) matrix from ``block_rotations`` (one entry per
    block, None meaning no rotation).
    """
    if partition.dim != d:
        raise StructureError(
            f"partition dimension {partition.dim} differs from d = {d}")
    if partition.n_blocks != n or partition.block_size != m - 1:
        raise StructureError(
            f"partition has {partition.n_blocks} blocks of size "
            f"{partition.block_size}, need {n} of size {m - 1}")
    if block_rotations is None:
        block_rotations = [None] * n
    if len(block_rotations) != n:
        raise ParameterError(f"need {n} block rotations, got {len(block_rotations)}")

    base = simplex_vertices(m)
    x = np.zeros((n * m, d * d))
    x[:, 0] = 1 / np.sqrt(n * m)
    for alpha, (block, rot) in enumerate(zip(partition.blocks, block_rotations)):
        verts = base
        if rot is not None:
            rot = np.asarray(rot, dtype=float)
            if rot.shape != (m - 1, m - 1):
                raise ParameterError(
                    f"block rotation must be {(m - 1, m - 1)}, got {rot.shape}")
            if np.max(np.abs(rot @ rot.T - np.eye(m - 1))) > 1e-10:
                raise ParameterError(f"block {alpha + 1} rotation is not orthogonal")
            verts = base @ rot.T
        cols = [i - 1 for i in block]
        x[alpha * m:(alpha + 1) * m, cols] = verts
    return XMatrix(x, d, n, m, partition)


def from_expansion(basis: OperatorBasis, xmat: XMatrix, params: PovmParams,
                   require_psd: bool = True) -> NMPovm:
    """Assemble POVM elements 1/M + sqrt(gamma) * sum_mu X[i, mu] G_mu.

    The trace, overlap and completeness relations hold algebraically for
    any coefficient matrix produced by simplex_x_matrix; they are
    re-checked here as a guard.  Positive semidefiniteness does not hold in
    general: with ``require_psd`` a violating element raises
    ConstructionError carrying the most negative eigenvalue, otherwise the
    caller is expected to inspect the result (see psd_witnesses).
    """
    d = params.d
    if basis.dim != d:
        raise StructureError(f"basis dimension {basis.dim} differs from d = {d}")
    if (xmat.d, xmat.n, xmat.m) != (d, params.n, params.m):
        raise StructureError("coefficient matrix does not match the parameters")
    scale = np.sqrt(params.traceless_eigenvalue)
    arrays = np.eye(d) / params.m + scale * np.einsum(
        "im,mkl->ikl", xmat.values[:, 1:], basis.traceless_stacked())
    povm = NMPovm(params, tuple(HermitianOperator(a) for a in arrays))

    report = validate_povm(povm, tol=_STRUCTURAL_TOL)
    structural = max(report.trace_residual, report.self_overlap_residual,
                     report.intra_overlap_residual, report.cross_overlap_residual,
                     report.completeness_residual)
    if structural > _STRUCTURAL_TOL:
        raise NumericError("expansion violated the defining relations",
                           residual=structural)
    if require_psd:
        witnesses = psd_witnesses(povm)
        if witnesses:
            idx, eig = min(witnesses, key=lambda w: w[1])
            raise ConstructionError(
                f"element {idx} is not positive semidefinite "
                f"(min eigenvalue {eig:.6e})",
                element_index=idx, min_eigenvalue=eig)
    return povm


def psd_witnesses(povm: NMPovm, tol: float = 1e-10) -> list[tuple[int, float]]:
    """(1-based index, min eigenvalue) for every element failing the PSD test."""
    out = []
    for i, el in enumerate(povm.elements, start=1):
        check = is_psd(el, tol)
        if not check.ok:
            out.append((i, check.min_eigenvalue))
    return out


def sufficient_x_bound(d: int, m: int) -> float:
    """Largest x for which the simplex construction is positive for any basis."""
    return d / m ** 2 + d / (m ** 2 * (d - 1))


def sufficient_construct(d: int, n: int, m: int, x: float,
                         basis: OperatorBasis | None = None,
                         partition: Partition | None = None) -> NMPovm:
    """Build an (N,M)-POVM guaranteed positive for any orthonormal basis.

    Valid whenever x - d/M^2 is at most the squared inradius of the
    eigenvalue simplex, d/(M^2 (d-1)): then every element stays inside the
    positive cone no matter how the traceless basis is oriented.
    """
    bound = sufficient_x_bound(d, m)
    if x > bound + 1e-12:
        raise ParameterError(
            f"x = {x} exceeds the guaranteed-positivity bound "
            f"d/M^2 + d/(M^2(d-1)) = {bound}")
    params = povm_params(d, n, m, x)
    if basis is None:
        basis = gell_mann_basis(d)
    if partition is None:
        partition = make_partition(d, n, m)
    xmat = simplex_x_matrix(d, n, m, partition)
    return from_expansion(basis, xmat, params, require_psd=True)


def optimal_n2_pauli(k: int, n: int) -> NMPovm:
    """Optimal (N,2)-POVM in dimension 2^k from Pauli tensor products.

    The first ``n`` non-identity Pauli index tuples P (lexicographic order)
    yield element pairs (1 + P)/2 and (1 - P)/2; the resulting family
    attains the maximal self-overlap x = d/2.
    """
    if k < 1:
        raise ParameterError(f"qubit count must be at least 1, got {k}")
    d = 2 ** k
    if not 1 <= n <= d * d - 1:
        raise ParameterError(f"N must lie in 1..{d*d - 1} for d = {d}, got {n}")
    params = povm_params(d, n, 2, d / 2)
    eye = np.eye(d)
    elements = []
    count = 0
    for idx in np.ndindex(*([4] * k)):
        if not any(idx):
            continue
        p = pauli_product(idx)
        elements.append(HermitianOperator((eye + p) / 2))
        elements.append(HermitianOperator((eye - p) / 2))
        count += 1
        if count == n:
            break
    return NMPovm(params, tuple(elements))


# --- maximal mutually unbiased measurement in dimension 3 ----------------

MUM3_X = 5.0 / 9.0
_MUM3_ANGLE_PERIOD = 2 * np.pi / 3  # triangle symmetry of each block


@dataclass(frozen=True)
class BlockRotationReport:
    """Feasible rotation angles of one block's triangle at the maximal size.

    classification is "all" (every angle keeps the block positive),
    "interval" (finitely many angle windows) or "point" (isolated angles
    only).  Angles are radians in [0, 2*pi/3); the fundamental domain is
    the triangle's own symmetry.
    """

    block: int
    classification: str
    selected_angle: float
    feasible_fraction: float
    intervals: tuple[tuple[float, float], ...] = ()
    points: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "block": self.block,
            "classification": self.classification,
            "selected_angle": self.selected_angle,
            "feasible_fraction": self.feasible_fraction,
            "intervals": [list(iv) for iv in self.intervals],
            "points": list(self.points),
        }


def _block_min_eig_fn(basis: OperatorBasis, block, gamma: float, m: int):
    """Min eigenvalue over a block's M elements as a function of the angle."""
    d = basis.dim
    g = np.array([basis.element(i).entries for i in block])
    base = np.eye(d) / m
    verts = simplex_vertices(m)
    scale = np.sqrt(gamma)

    def f(angle: float) -> float:
        coords = verts @ planar_rotation(angle).T
        ops = base + scale * np.einsum("aj,jkl->akl", coords, g)
        return float(np.linalg.eigvalsh(ops).min())

    def f_grid(angles: np.ndarray) -> np.ndarray:
        c, s = np.cos(angles), np.sin(angles)
        coords = np.empty((len(angles), m, 2))
        coords[:, :, 0] = np.outer(c, verts[:, 0]) - np.outer(s, verts[:, 1])
        coords[:, :, 1] = np.outer(s, verts[:, 0]) + np.outer(c, verts[:, 1])
        ops = base + scale * np.einsum("paj,jkl->pakl", coords, g)
        return (np.linalg.eigvalsh(ops.reshape(-1, d, d)).min(axis=1)
                .reshape(len(angles), m).min(axis=1))

    return f, f_grid


def _refine_peak(f, lo: float, hi: float, width: float = 1e-12) -> float:
    """Golden-section maximum search for a unimodal bracket."""
    invphi = (np.sqrt(5) - 1) / 2
    a, b = lo, hi
    c = b - invphi * (b - a)
    e = a + invphi * (b - a)
    fc, fe = f(c), f(e)
    while b - a > width:
        if fc >= fe:
            b, e, fe = e, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, e, fe
            e = a + invphi * (b - a)
            fe = f(e)
    return (a + b) / 2


def _bisect_edge(f, feasible_angle: float, infeasible_angle: float,
                 feas_tol: float, width: float = 1e-9) -> float:
    """Angle where the min eigenvalue crosses -feas_tol, bracketed on a grid."""
    lo, hi = feasible_angle, infeasible_angle
    while abs(hi - lo) > width:
        mid = (lo + hi) / 2
        if f(mid) >= -feas_tol:
            lo = mid
        else:
            hi = mid
    return lo


def _classify_block(alpha: int, f, f_grid, angle_step: float, feas_tol: float,
                    point_width: float) -> BlockRotationReport:
    angles = np.arange(0.0, _MUM3_ANGLE_PERIOD, angle_step)
    values = f_grid(angles)
    feasible = values >= -feas_tol
    fraction = float(np.mean(feasible))

    if np.all(feasible):
        return BlockRotationReport(alpha, "all", 0.0, fraction)

    # Rotate the circular grid so it starts on an infeasible angle; runs
    # then never wrap.  Positions k in the rotated order correspond to the
    # unwrapped angle angles[start] + k * angle_step, which keeps widths of
    # runs crossing zero meaningful.
    npts = len(angles)
    start = int(np.argmin(feasible))
    order = (start + np.arange(npts)) % npts
    unwrapped = angles[start] + np.arange(npts) * angle_step

    intervals: list[tuple[float, float]] = []
    points: list[float] = []
    k = 0
    while k < npts:
        if not feasible[order[k]]:
            k += 1
            continue
        k_lo = k
        while k + 1 < npts and feasible[order[k + 1]]:
            k += 1
        lo_edge = _bisect_edge(f, unwrapped[k_lo], unwrapped[k_lo] - angle_step,
                               feas_tol)
        hi_edge = _bisect_edge(f, unwrapped[k], unwrapped[k] + angle_step,
                               feas_tol)
        width = max(hi_edge - lo_edge, 0.0)
        if width <= point_width:
            peak = _refine_peak(f, lo_edge - angle_step, hi_edge + angle_step)
            points.append(peak % _MUM3_ANGLE_PERIOD)
        else:
            intervals.append((lo_edge % _MUM3_ANGLE_PERIOD,
                              hi_edge % _MUM3_ANGLE_PERIOD))
        k += 1

    # The grid can also step right over an isolated touching angle without
    # any feasible sample: refine strictly-infeasible local maxima that
    # come close to zero and keep those that reach the tolerance.
    for i in range(npts):
        if feasible[i]:
            continue
        if values[i] >= values[i - 1] and values[i] >= values[(i + 1) % npts] \
                and values[i] > -1e-3:
            peak = _refine_peak(f, angles[i] - angle_step, angles[i] + angle_step)
            if f(peak) >= -feas_tol:
                peak %= _MUM3_ANGLE_PERIOD
                if not any(abs(peak - q) <= 2 * angle_step for q in points):
                    points.append(peak)

    points.sort()
    intervals.sort()
    if intervals:
        classification = "interval"
        selected = float(angles[np.argmax(feasible)])
    elif points:
        classification = "point"
        selected = float(points[0])
    else:
        raise NumericError("no feasible rotation found for a block "
                           "of the maximal d=3 measurement")
    return BlockRotationReport(alpha, classification, selected, fraction,
                               tuple(intervals), tuple(points))


def mum3_optimal_partition(angle_step: float = 1e-4,
                           feas_tol: float = 1e-9,
                           point_width: float = 1e-3):
    """The informationally complete (4,3)-POVM in d=3 at the maximal x = 5/9.

    Uses the four-block pairing of the d=3 basis in which two blocks have a
    rotationally symmetric positivity disk of exactly the required triangle
    circumradius, one block admits angle windows and one admits a single
    isolated orientation.  Per block, the triangle rotation angle is
    scanned over [0, 2*pi/3) at ``angle_step`` resolution, run edges and
    isolated touching angles are refined by bisection / golden-section
    search, and the smallest feasible angle is selected.

    Returns the POVM together with a report carrying x and one
    BlockRotationReport per block.
    """
    d, n, m = 3, 4, 3
    params = povm_params(d, n, m, MUM3_X)
    basis = gell_mann_basis(3)
    partition = preset_partition("fig1")
    gamma = params.traceless_eigenvalue

    blocks = []
    rotations = []
    for alpha, block in enumerate(partition.blocks, start=1):
        f, f_grid = _block_min_eig_fn(basis, block, gamma, m)
        rep = _classify_block(alpha, f, f_grid, angle_step, feas_tol, point_width)
        blocks.append(rep)
        rotations.append(planar_rotation(rep.selected_angle))

    xmat = simplex_x_matrix(d, n, m, partition, block_rotations=rotations)
    povm = from_expansion(basis, xmat, params, require_psd=True)
    report = {
        "x": MUM3_X,
        "angle_step": angle_step,
        "feasibility_tolerance": feas_tol,
        "blocks": [b.to_dict() for b in blocks],
    }
    return povm, report


# --- reference fixtures ---------------------------------------------------

FIXTURE_NAMES = ("sic_qubit", "mub_d2", "mub_d3")


def _sic_qubit() -> NMPovm:
    # Tetrahedron directions on the Bloch sphere.
    dirs = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]]) / np.sqrt(3)
    params = povm_params(2, 1, 4, 0.25)
    elements = tuple(
        HermitianOperator((np.eye(2) + sum(c * pauli_product((i + 1,))
                                           for i, c in enumerate(v))) / 4)
        for v in dirs)
    return NMPovm(params, elements)


def _mub_d3() -> NMPovm:
    # Computational basis plus the three quadratic-phase Fourier bases.
    omega = np.exp(2j * np.pi / 3)
    bases = [np.eye(3, dtype=complex)]
    for t in range(3):
        cols = np.array([[omega ** ((t * k * k + j * k) % 3) for j in range(3)]
                         for k in range(3)]) / np.sqrt(3)
        bases.append(cols)
    params = povm_params(3, 4, 3, 1.0)
    elements = []
    for b in bases:
        for j in range(3):
            v = b[:, j]
            elements.append(HermitianOperator(np.outer(v, v.conj())))
    return NMPovm(params, tuple(elements))


def fixture_povm(name: str) -> NMPovm:
    """Reference POVMs: the qubit tetrahedron, the qubit Pauli pair family,
    and the four-basis projective family in dimension 3.

    Each fixture is validated before being returned rather than trusted.
    """
    if name == "sic_qubit":
        povm = _sic_qubit()
    elif name == "mub_d2":
        povm = optimal_n2_pauli(1, 3)
    elif name == "mub_d3":
        povm = _mub_d3()
    else:
        raise ParameterError(f"unknown fixture {name!r}; available: {FIXTURE_NAMES}")
    report = validate_povm(povm)
    if not report.passed:
        raise NumericError(f"fixture {name} failed validation",
                           residual=max(report.trace_residual,
                                        report.completeness_residual))
    return povm
