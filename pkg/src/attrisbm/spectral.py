"""Edge-type branching machinery and detectability thresholds.

Edges are typed by the attribute categories at their two ends: type (a, b)
has near-end (toward the root) category a and far-end category b, giving R^2
types with flat index a * R + b (0-based). A type-(a, b) parent edge induces
type-(b, w) children, and the expected child count depends only on the child
type, which yields the R^2 x R^2 expected-children matrix C. Crossing a
type-(a, b) edge moves the community through the row-stochastic K x K
transition matrix sigma_ab.

Detectability is governed by the spectral radius of M1 (C with each row
scaled by the squared second eigenvalue of its type's transition matrix);
M2 replaces the second eigenvalue by the spectral radius of the transfer
matrix T_ab[k1, k2] = q[k1, a] * (K * sigma_ab[k1, k2] - 1) and marks where
the uninformative fixed point of message passing turns unstable.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConstraintViolation, DegenerateInput, EqualDegreeViolation
from .model import ModelParams, SymmetricSpec, aggregated_degrees, check_equal_degree, resolve_abc


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class EdgeTypeSystem:
    """Aggregated degrees, expected-children matrix and per-type transitions."""

    K: int
    R: int
    cab: np.ndarray    # (R, R) aggregated degrees
    C: np.ndarray      # (R^2, R^2) expected children counts
    sigma: np.ndarray  # (R, R, K, K) row-stochastic transition matrices

    def __post_init__(self):
        object.__setattr__(self, "cab", _frozen(np.asarray(self.cab, dtype=np.float64)))
        object.__setattr__(self, "C", _frozen(np.asarray(self.C, dtype=np.float64)))
        object.__setattr__(self, "sigma", _frozen(np.asarray(self.sigma, dtype=np.float64)))

    def type_index(self, a: int, b: int) -> int:
        return a * self.R + b

    def type_ends(self, t: int) -> tuple[int, int]:
        return t // self.R, t % self.R


def build_edge_type_system(params: ModelParams, tol: float = 1e-9) -> EdgeTypeSystem:
    """Aggregate the affinity matrix into the edge-type branching system.

    Requires the equal-degree property; otherwise aggregated degrees depend on
    the community and the edge-type process is ill-defined.
    """
    if not check_equal_degree(params, tol):
        raise EqualDegreeViolation(
            "affinity violates the equal-average-degree property; aggregated "
            "degrees would depend on the community"
        )
    K, R = params.K, params.R
    aff4 = params.affinity_4d()
    cab = aggregated_degrees(params)

    # weights[a, b, k1, k2] = (n_b / (n K)) * c[(k1,a),(k2,b)]; rows normalize to
    # cab within tol, so normalizing per row keeps sigma exactly stochastic.
    weights = (
        np.transpose(aff4, (1, 3, 0, 2))
        * (params.group_sizes[None, :, None, None] / (params.n * params.K))
    )
    sigma = np.empty((R, R, K, K))
    for a in range(R):
        for b in range(R):
            rows = weights[a, b]
            sums = rows.sum(axis=1)
            if cab[a, b] <= 0.0:
                if sums.max(initial=0.0) > tol:
                    raise DegenerateInput(
                        f"edge type ({a + 1},{b + 1}) has zero aggregated degree "
                        "but nonzero transition weight"
                    )
                sigma[a, b] = 1.0 / K  # type never occurs; harmless placeholder
            else:
                sigma[a, b] = rows / sums[:, None]

    C = np.zeros((R * R, R * R))
    for x in range(R):
        for y in range(R):
            i = x * R + y
            for z in range(R):
                for w in range(R):
                    if w == x:  # child's near end must be the parent's far end
                        C[i, z * R + w] = cab[x, y]
    return EdgeTypeSystem(K=K, R=R, cab=cab, C=C, sigma=sigma)


def shifted_decoding_mismatches(R: int) -> list[tuple[int, int]]:
    """Type-index pairs (1-based) where the shifted floor-division decoding of
    the child/parent compatibility test disagrees with near/far-end matching.

    The shifted rule compares x = floor((i-1)/R) + 1 against z = j - floor((j-1)/R);
    the matching rule compares the near-end attribute of child type i against the
    far-end attribute of parent type j. Disagreements are reported so the
    discrepancy is visible rather than silently patched; the matching rule is
    what build_edge_type_system uses.
    """
    out = []
    for i in range(1, R * R + 1):
        near_i = (i - 1) // R + 1
        for j in range(1, R * R + 1):
            far_j = (j - 1) % R + 1
            x = (i - 1) // R + 1
            z = j - (j - 1) // R
            if (x != z) != (near_i != far_j):
                out.append((i, j))
    return out


def second_eigenvalue(matrix: np.ndarray) -> float:
    """Eigenvalue of second-largest modulus; signed if real, modulus if complex."""
    mat = np.asarray(matrix, dtype=np.float64)
    ev = np.linalg.eigvals(mat)
    order = np.argsort(-np.abs(ev))
    lam = ev[order[1]]
    if abs(lam.imag) <= 1e-12 * max(1.0, abs(lam)):
        return float(lam.real)
    return float(abs(lam))


def spectral_radius_dense(matrix: np.ndarray) -> float:
    return float(np.abs(np.linalg.eigvals(np.asarray(matrix, dtype=np.float64))).max())


def spectral_radius_power(
    matrix: np.ndarray, max_iter: int = 1000, tol: float = 1e-12
) -> tuple[float, bool]:
    """Power iteration with a deterministic all-ones start.

    Returns (estimate, converged). Suited to the nonnegative matrices built
    here; reducible or periodic structure may fail to converge, in which case
    callers fall back to the dense solver.
    """
    mat = np.asarray(matrix, dtype=np.float64)
    x = np.ones(mat.shape[0])
    est = 0.0
    for _ in range(max_iter):
        y = mat @ x
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            return 0.0, True
        new_est = norm / float(np.linalg.norm(x))
        x = y / norm
        if abs(new_est - est) <= tol * max(1.0, new_est):
            return new_est, True
        est = new_est
    return est, False


def spectral_radius(matrix: np.ndarray) -> float:
    """Spectral radius via power iteration, dense eigensolver as fallback."""
    est, converged = spectral_radius_power(matrix)
    if converged:
        return est
    return spectral_radius_dense(matrix)


def transition_second_eigenvalues(sys: EdgeTypeSystem) -> np.ndarray:
    """R x R matrix of second eigenvalues of the per-type transition matrices."""
    lam = np.empty((sys.R, sys.R))
    for a in range(sys.R):
        for b in range(sys.R):
            lam[a, b] = second_eigenvalue(sys.sigma[a, b])
    return lam


def build_m1(sys: EdgeTypeSystem, lam: np.ndarray | None = None) -> np.ndarray:
    """Row-scale C by the squared second eigenvalue of each row type."""
    if lam is None:
        lam = transition_second_eigenvalues(sys)
    lam_flat = np.asarray(lam).reshape(sys.R * sys.R)
    return sys.C * lam_flat[:, None] ** 2


def transfer_spectral_radii(sys: EdgeTypeSystem, prior: np.ndarray) -> np.ndarray:
    """R x R matrix of spectral radii of the transfer matrices T_ab."""
    prior = np.asarray(prior, dtype=np.float64)
    ups = np.empty((sys.R, sys.R))
    for a in range(sys.R):
        for b in range(sys.R):
            T = prior[:, a][:, None] * (sys.K * sys.sigma[a, b] - 1.0)
            ups[a, b] = spectral_radius_dense(T)
    return ups


def build_m2(
    sys: EdgeTypeSystem, prior: np.ndarray, ups: np.ndarray | None = None
) -> np.ndarray:
    """Row-scale C by the squared transfer-matrix spectral radius of each row type."""
    if ups is None:
        ups = transfer_spectral_radii(sys, prior)
    ups_flat = np.asarray(ups).reshape(sys.R * sys.R)
    return sys.C * ups_flat[:, None] ** 2


class XiCriteria(NamedTuple):
    xi1: float
    xi2: float
    detectable_with_attrs: bool
    detectable_without: bool


def _xi_values(a: float, b: float, c: float, K: int, R: int) -> tuple[float, float]:
    denom_a = a + (K - 1) * c
    if denom_a <= 0:
        raise DegenerateInput(f"zero denominator a + (K-1)c with a={a}, c={c}")
    xi1 = (a - c) ** 2 / denom_a
    if R > 1:
        denom_b = b + (K - 1) * c
        if denom_b <= 0:
            raise DegenerateInput(f"zero denominator b + (K-1)c with b={b}, c={c}")
        xi1 += (R - 1) * (b - c) ** 2 / denom_b
    denom_2 = a + (R - 1) * b + (K - 1) * R * c
    if denom_2 <= 0:
        raise DegenerateInput("zero denominator in the merged-attribute criterion")
    xi2 = (a + (R - 1) * b - R * c) ** 2 / denom_2
    return float(xi1), float(xi2)


def xi_criteria(spec: SymmetricSpec) -> XiCriteria:
    """Closed-form detectability criteria for the symmetric model.

    xi1 uses attribute information, xi2 merges attributes away; each flags
    detectability when it exceeds K*R.
    """
    xi1, xi2 = _xi_values(spec.a, spec.b, spec.c, spec.K, spec.R)
    kr = spec.K * spec.R
    return XiCriteria(xi1, xi2, bool(xi1 > kr), bool(xi2 > kr))


class CriticalEpsilon(NamedTuple):
    epsilon: float | None
    status: str  # "threshold" | "always-detectable" | "never-detectable"


def critical_epsilon(
    eta: float, K: int, R: int, avg_degree: float, tol: float = 1e-10
) -> CriticalEpsilon:
    """Largest epsilon in [0, 1] where the attribute-aware criterion crosses K*R.

    The (a, b, c) triple follows eta and epsilon at fixed average degree. If
    the criterion stays above K*R on the whole interval the model is
    detectable everywhere ("always-detectable"); if it never reaches K*R it
    is "never-detectable". Bisection refines the crossing to ``tol``.
    """
    if eta < 1:
        raise ConstraintViolation(f"eta must be >= 1, got {eta}")
    if avg_degree <= 0:
        raise ConstraintViolation(f"average degree must be positive, got {avg_degree}")

    def gap(eps: float) -> float:
        a, b, c = resolve_abc(eta, eps, avg_degree, K, R)
        return _xi_values(a, b, c, K, R)[0] - K * R

    grid = np.linspace(0.0, 1.0, 1025)
    values = np.array([gap(e) for e in grid])
    crossings = np.flatnonzero(np.sign(values[:-1]) != np.sign(values[1:]))
    if crossings.size == 0:
        exact = np.flatnonzero(values == 0.0)
        if exact.size:
            return CriticalEpsilon(float(grid[exact[-1]]), "threshold")
        status = "always-detectable" if values.min() > 0 else "never-detectable"
        return CriticalEpsilon(None, status)

    idx = crossings[-1]
    lo, hi = float(grid[idx]), float(grid[idx + 1])
    glo = values[idx]
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        gmid = gap(mid)
        if gmid == 0.0:
            return CriticalEpsilon(mid, "threshold")
        if np.sign(gmid) == np.sign(glo):
            lo, glo = mid, gmid
        else:
            hi = mid
    return CriticalEpsilon(0.5 * (lo + hi), "threshold")


@dataclass(frozen=True)
class ThresholdReport:
    """Spectral radii, closed-form criteria and the detectability verdict."""

    rho_m1: float
    rho_m2: float
    detectable: bool
    lambda_mat: np.ndarray
    upsilon_mat: np.ndarray
    xi1: float | None = None
    xi2: float | None = None

    def to_dict(self) -> dict:
        doc = {
            "rho_m1": self.rho_m1,
            "rho_m2": self.rho_m2,
            "detectable": self.detectable,
            "lambda": np.asarray(self.lambda_mat).tolist(),
            "upsilon": np.asarray(self.upsilon_mat).tolist(),
        }
        if self.xi1 is not None:
            doc["xi1"] = self.xi1
        if self.xi2 is not None:
            doc["xi2"] = self.xi2
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def threshold_report(
    params: ModelParams, symmetric: SymmetricSpec | None = None, tol: float = 1e-9
) -> ThresholdReport:
    """Full detectability report for a model; xi fields only for symmetric specs."""
    sys = build_edge_type_system(params, tol)
    lam = transition_second_eigenvalues(sys)
    ups = transfer_spectral_radii(sys, params.prior)
    rho1 = spectral_radius(build_m1(sys, lam))
    rho2 = spectral_radius(build_m2(sys, params.prior, ups))
    xi1 = xi2 = None
    if symmetric is not None:
        crit = xi_criteria(symmetric)
        xi1, xi2 = crit.xi1, crit.xi2
    return ThresholdReport(
        rho_m1=rho1,
        rho_m2=rho2,
        detectable=bool(rho1 > 1.0),
        lambda_mat=lam,
        upsilon_mat=ups,
        xi1=xi1,
        xi2=xi2,
    )
