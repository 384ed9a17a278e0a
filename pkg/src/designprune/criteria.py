"""The phi_p criterion family and its first-order calculus.

For a design with information matrix M (m x m, positive definite) and
exponent p > -1, the criterion value is

    phi_p(M) = [tr(M^-p) / m]^(-1/p)        (p != 0)
    phi_0(M) = det(M)^(1/m)                 (log-det branch)

Larger is better.  p = 0 is D-optimality, p = 1 is A-optimality.  The
criterion extends continuously to singular M by 0 when p >= 0; for
p in (-1, 0) it is undefined on singular matrices and treated as an
error.  The gradient is [phi_p(M) / tr(M^-p)] * M^-(p+1), which yields
the variance function d(x) = x^T M^-(p+1) x, the directional derivative
toward a one-point design, and the optimality gap epsilon used both for
the efficiency certificate and for the deletion bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .symmat import (
    SingularityError,
    SpectralDecomp,
    pd_threshold,
    sym_eig,
    symmetrize,
)
from .designspace import CandidateSet, validate_weights

__all__ = [
    "CriterionConfig",
    "CriterionState",
    "info_matrix",
    "phi_p",
    "phi_p_gradient",
    "make_state",
    "variance_function",
    "dir_derivative",
    "epsilon",
    "efficiency_bounds",
    "equivalence_check",
    "resolve_t_star",
]


@dataclass(frozen=True)
class CriterionConfig:
    """Criterion exponent p in (-1, inf), plus an optional known value of
    tr(M^-p) at the optimum (t_star).  For p = 0 that trace equals m
    identically, so t_star is inferred automatically downstream."""

    p: float = 0.0
    t_star: float | None = None

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p <= -1.0:
            raise ValueError(f"p must be a finite real > -1, got {self.p}")
        if self.t_star is not None and not self.t_star > 0:
            raise ValueError(f"t_star must be positive, got {self.t_star}")


def resolve_t_star(cfg: CriterionConfig, m: int) -> float | None:
    """The known-optimal-trace regime engages automatically at p = 0
    (every nonsingular optimum has tr(M^0) = m); otherwise only when the
    caller supplied t_star."""
    if cfg.t_star is not None:
        return float(cfg.t_star)
    if cfg.p == 0.0:
        return float(m)
    return None


@dataclass(frozen=True)
class CriterionState:
    """Everything the per-iteration scans need, computed once per M:
    the spectral decomposition, t = tr(M^-p), phi = phi_p(M), and the
    cached power A = M^-(p+1) behind the variance function."""

    M: np.ndarray
    decomp: SpectralDecomp
    p: float
    t: float
    phi: float
    Minv_p1: np.ndarray

    @property
    def m(self) -> int:
        return self.M.shape[0]

    def min_eig_neg_p(self) -> float:
        """Smallest eigenvalue of M^-p: attained at lam_max(M) for p > 0
        and at lam_min(M) for p < 0; equal to 1 at p = 0."""
        lam = self.decomp.eigenvalues
        if self.p > 0:
            return float(lam[-1] ** -self.p)
        if self.p < 0:
            return float(lam[0] ** -self.p)
        return 1.0


def info_matrix(cands: CandidateSet, weights: np.ndarray) -> np.ndarray:
    """Weighted second-moment matrix M = sum_i w_i x_i x_i^T."""
    w = validate_weights(cands, weights)
    idx = cands.active_indices()
    X = cands.points[idx]
    wa = w[idx]
    return symmetrize(X.T @ (X * wa[:, None]))


def _phi_from_eigenvalues(lam: np.ndarray, p: float) -> float:
    m = lam.shape[0]
    if p == 0.0:
        return float(np.exp(np.mean(np.log(lam))))
    t = float(np.sum(lam**-p))
    return float((t / m) ** (-1.0 / p))


def phi_p(M: np.ndarray, cfg: CriterionConfig) -> float:
    """Criterion value of a symmetric non-negative definite matrix.

    Returns 0 exactly for singular M when p >= 0 (continuous extension);
    raises SingularityError for singular M with p in (-1, 0), where no
    continuous extension exists.
    """
    lam = sym_eig(M).eigenvalues
    if lam[0] <= pd_threshold(lam):
        if cfg.p >= 0:
            return 0.0
        raise SingularityError(
            f"phi_p undefined on singular matrix for p = {cfg.p}",
            eigenvalue=float(lam[0]),
        )
    return _phi_from_eigenvalues(lam, cfg.p)


def make_state(M: np.ndarray, cfg: CriterionConfig) -> CriterionState:
    """Decompose M once and cache t, phi, and M^-(p+1).

    Raises SingularityError when M is not safely positive definite; state
    construction is only meaningful for nonsingular designs.
    """
    dec = sym_eig(M)
    lam = dec.eigenvalues
    if lam[0] <= pd_threshold(lam):
        raise SingularityError(
            "design is singular: smallest information-matrix eigenvalue "
            f"{lam[0]:.6e}",
            eigenvalue=float(lam[0]),
        )
    p = cfg.p
    t = float(np.sum(lam**-p))
    phi = _phi_from_eigenvalues(lam, p)
    V = dec.eigenvectors
    Minv_p1 = symmetrize((V * lam ** -(p + 1.0)) @ V.T)
    return CriterionState(M=M, decomp=dec, p=p, t=t, phi=phi, Minv_p1=Minv_p1)


def phi_p_gradient(M: np.ndarray, cfg: CriterionConfig) -> np.ndarray:
    """Gradient [phi_p(M) / tr(M^-p)] * M^-(p+1); positive definite, and
    tr(M * gradient) = phi_p(M) by positive homogeneity of degree one."""
    state = make_state(M, cfg)
    return (state.phi / state.t) * state.Minv_p1


def variance_function(
    state: CriterionState, points: np.ndarray, threads: int = 1
) -> np.ndarray:
    """d(x) = x^T M^-(p+1) x rowwise over points, the quantity the
    equivalence theorem compares against t = tr(M^-p)."""
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if threads <= 1 or X.shape[0] < 4 * threads:
        return np.einsum("ij,jk,ik->i", X, state.Minv_p1, X)
    # Deterministic data parallelism: fixed contiguous chunks, results
    # written into a preallocated buffer, so thread scheduling cannot
    # change the output.
    from concurrent.futures import ThreadPoolExecutor

    out = np.empty(X.shape[0])
    bounds = np.linspace(0, X.shape[0], threads + 1).astype(int)

    def work(lo: int, hi: int) -> None:
        out[lo:hi] = np.einsum("ij,jk,ik->i", X[lo:hi], state.Minv_p1, X[lo:hi])

    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [
            pool.submit(work, lo, hi)
            for lo, hi in zip(bounds[:-1], bounds[1:])
            if hi > lo
        ]
        for f in futures:
            f.result()
    return out


def dir_derivative(state: CriterionState, x: np.ndarray) -> float:
    """Directional derivative of phi_p at the design toward the one-point
    design at x: phi * (d(x)/t - 1).  Zero when d(x) = t; nonpositive for
    every candidate exactly at an optimum."""
    d = float(variance_function(state, np.asarray(x, dtype=float))[0])
    return state.phi * (d / state.t - 1.0)


def epsilon(
    cands: CandidateSet, state: CriterionState, threads: int = 1
) -> tuple[float, int]:
    """Optimality gap: max over active candidates of d(x) - t.

    Non-negative whenever the design's support is among the active
    candidates (the d-values average to t under the design weights).
    Returns the gap and the smallest candidate index attaining the max.
    """
    idx = cands.active_indices()
    if idx.size == 0:
        raise ValueError("no active candidates")
    d = variance_function(state, cands.points[idx], threads=threads)
    j = int(np.argmax(d))  # first occurrence = smallest index, idx is sorted
    return float(d[j] - state.t), int(idx[j])


def efficiency_bounds(
    state: CriterionState, eps: float
) -> tuple[float, float]:
    """Certificate sandwich: the optimal value lies in
    [phi, phi * (1 + eps/t)] by concavity of the criterion."""
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    return state.phi, state.phi * (1.0 + eps / state.t)


def equivalence_check(
    cands: CandidateSet,
    weights: np.ndarray,
    cfg: CriterionConfig,
    tol: float = 1e-6,
    weight_floor: float = 1e-8,
) -> tuple[bool, dict]:
    """Optimality test: the design is phi_p-optimal on the candidate set
    iff d(x) <= t for every candidate, with equality on its support.

    Returns (verdict, report); the report carries t, the maximal d and
    its index, indices violating d <= t*(1+tol), and the equality
    residuals d_i - t at the support points.
    """
    w = validate_weights(cands, weights)
    state = make_state(info_matrix(cands, w), cfg)
    idx = cands.active_indices()
    d = variance_function(state, cands.points[idx])
    j = int(np.argmax(d))
    limit = state.t * (1.0 + tol)
    violations = idx[d > limit]
    support = [i for i in np.flatnonzero(w > weight_floor)]
    pos = {int(g): k for k, g in enumerate(idx)}
    residuals = {
        int(i): float(d[pos[int(i)]] - state.t)
        for i in support
        if int(i) in pos
    }
    ok = bool(d[j] <= limit)
    report = {
        "t": state.t,
        "phi": state.phi,
        "max_d": float(d[j]),
        "argmax_index": int(idx[j]),
        "tol": tol,
        "violations": [int(v) for v in violations],
        "support_residuals": residuals,
    }
    return ok, report
