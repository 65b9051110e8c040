"""Geometric pictures behind the existence conditions, as plain data.

Positivity regions of two-parameter operator slices, the eigenvalue
simplex with its inradius, and the dimensional decay of the guaranteed
fraction of the admissible overlap range.  Output is arrays/CSV; no
plotting here.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .conditions import radii
from .errors import NumericError, ParameterError
from .operator_bases import OperatorBasis

_BATCH_ROWS = 64  # grid rows diagonalized per eigvalsh call


@dataclass(frozen=True, eq=False)
class RegionScan:
    """Minimum-eigenvalue landscape of 1/M + u G_mu + v G_nu over a square grid.

    ``min_eig[i, j]`` belongs to the point (u_values[i], v_values[j]);
    ``psd_mask`` marks points whose minimum eigenvalue is above -tol.
    ``overlays`` carries reference radii (and optionally triangle vertex
    sets) for downstream plotting.
    """

    d: int
    m: int
    mu: int
    nu: int
    r: float
    n: int
    tol: float
    u_values: np.ndarray
    v_values: np.ndarray
    min_eig: np.ndarray
    psd_mask: np.ndarray
    overlays: dict

    def to_csv(self, fh) -> None:
        """Rows ``u,v,min_eig,psd`` in row-major grid order."""
        writer = csv.writer(fh)
        writer.writerow(["u", "v", "min_eig", "psd"])
        for i, u in enumerate(self.u_values):
            for j, v in enumerate(self.v_values):
                writer.writerow([repr(float(u)), repr(float(v)),
                                 repr(float(self.min_eig[i, j])),
                                 int(self.psd_mask[i, j])])


def _plane_operators(basis: OperatorBasis, mu: int, nu: int, m: int):
    d = basis.dim
    if not (2 <= mu <= d * d and 2 <= nu <= d * d) or mu == nu:
        raise ParameterError(
            f"plane indices must be distinct and in 2..{d*d}, got ({mu}, {nu})")
    if m < 2:
        raise ParameterError(f"M must be at least 2, got {m}")
    g_mu = basis.element(mu).entries
    g_nu = basis.element(nu).entries
    return np.eye(d) / m, g_mu, g_nu


def region_scan(basis: OperatorBasis, mu: int, nu: int, m: int,
                n: int = 512, r: float | None = None,
                tol: float = 1e-10) -> RegionScan:
    """Scan the positivity region of the (mu, nu) basis plane.

    The grid covers [-r, r]^2 with n points per axis; r defaults to 1.1
    times the outer constraint radius so the full admissible disk is
    visible.  Returns the minimum eigenvalue at every grid point and the
    mask of points positive at tolerance ``tol``.
    """
    if n < 16:
        raise ParameterError(f"grid resolution must be at least 16, got {n}")
    d = basis.dim
    base, g_mu, g_nu = _plane_operators(basis, mu, nu, m)
    rad = radii(d, m)
    if r is None:
        r = 1.1 * np.sqrt(rad.r_out_sq)
    if r <= 0:
        raise ParameterError(f"scan half-width must be positive, got {r}")

    us = np.linspace(-r, r, n)
    vs = np.linspace(-r, r, n)
    min_eig = np.empty((n, n))
    for lo in range(0, n, _BATCH_ROWS):
        hi = min(lo + _BATCH_ROWS, n)
        block = (base
                 + us[lo:hi, None, None, None] * g_mu
                 + vs[None, :, None, None] * g_nu)
        min_eig[lo:hi] = np.linalg.eigvalsh(block).min(axis=-1)
    mask = min_eig >= -tol

    origin = (np.abs(us).argmin(), np.abs(vs).argmin())
    if not mask[origin]:
        raise NumericError("the grid cell at the origin is not positive; "
                           "the basis plane or M is inconsistent")
    overlays = {"r_in": float(np.sqrt(rad.r_in_sq)),
                "r_out": float(np.sqrt(rad.r_out_sq))}
    return RegionScan(d, m, mu, nu, float(r), n, tol, us, vs, min_eig, mask,
                      overlays)


def boundary_radius(basis: OperatorBasis, mu: int, nu: int, m: int,
                    angle: float, tol: float = 1e-9) -> float:
    """Distance from the origin to the positivity boundary along a direction.

    Bisects the minimum eigenvalue of 1/M + t (cos(angle) G_mu +
    sin(angle) G_nu) in t; the minimum eigenvalue is concave along the ray,
    so the first sign change is the boundary.  Resolved to within ``tol``.
    """
    d = basis.dim
    base, g_mu, g_nu = _plane_operators(basis, mu, nu, m)
    direction = np.cos(angle) * g_mu + np.sin(angle) * g_nu

    def min_eig(t: float) -> float:
        return float(np.linalg.eigvalsh(base + t * direction)[0])

    # Any positive point at fixed trace lies within sqrt(d(d-1))/M of the
    # centre, so a bracket slightly beyond that is always negative.
    hi = 1.05 * np.sqrt(d * (d - 1)) / m
    tries = 0
    while min_eig(hi) >= 0:
        hi *= 2
        tries += 1
        if tries > 8:
            raise NumericError("failed to bracket the positivity boundary")
    lo = 0.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if min_eig(mid) >= 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2


def simplex_radii(d: int, m: int) -> dict:
    """Centroid and inradius of the fixed-trace eigenvalue simplex.

    Evaluates the centroid-to-face-centroid distance explicitly from the
    eigenvalue coordinates (trace p = d/M split over d or d-1 slots) and
    compares it with the closed form d/(M^2 (d-1)); the two must agree to
    1e-14.
    """
    if d < 2 or m < 2:
        raise ParameterError(f"require d >= 2 and M >= 2, got ({d}, {m})")
    p = d / m
    explicit = p ** 2 * ((d - 1) * (1 / d - 1 / (d - 1)) ** 2 + 1 / d ** 2)
    closed = d / (m ** 2 * (d - 1))
    agreement = abs(explicit - closed)
    if agreement > 1e-14 * max(1.0, closed):
        raise NumericError("explicit and closed-form inradius disagree",
                           residual=agreement)
    return {
        "d": d, "M": m,
        "trace": p,
        "centroid_coordinate": p / d,
        "r_in_sq_explicit": explicit,
        "r_in_sq_closed": closed,
        "agreement_residual": agreement,
    }


RATIO_BRANCHES = ("M_ge_d", "M_eq_2")


def ratio_curve(d_max: int, branch: str) -> list[tuple[int, float]]:
    """Guaranteed-to-admissible squared-radius ratio for d = 2..d_max.

    branch "M_ge_d" uses the many-outcome form 1/(d-1)^2; branch "M_eq_2"
    uses M = 2, which coincides with the first form at d = 2 and equals
    1/(d-1) beyond.
    """
    if d_max < 2:
        raise ParameterError(f"d_max must be at least 2, got {d_max}")
    if branch not in RATIO_BRANCHES:
        raise ParameterError(f"branch must be one of {RATIO_BRANCHES}, got {branch!r}")
    rows = []
    for d in range(2, d_max + 1):
        if branch == "M_ge_d":
            value = radii(d, d).ratio
        else:
            value = radii(d, 2).ratio
        rows.append((d, float(value)))
    return rows


def curve_to_csv(rows, fh) -> None:
    """Rows ``d,R`` for a ratio curve."""
    writer = csv.writer(fh)
    writer.writerow(["d", "R"])
    for d, value in rows:
        writer.writerow([d, repr(float(value))])
