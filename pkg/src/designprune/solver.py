"""Multiplicative-weight solver with certified candidate deletion.

The iteration is the classical fixed-point scheme

    w_i  <-  w_i * d_i^a / sum_j w_j * d_j^a,

where d_i is the variance function of the current design and a > 0 a
step exponent (a = 1/(p+1) by default; a = 1 at p = 0 and a = 1/2 at
p = 1 are the monotone choices).  Iteration stops once the certificate
gap eps/t falls below eff_tol, at which point the optimal criterion
value is bracketed in [phi, phi * (1 + eps/t)].

Every prune_period iterations the deletion threshold C is computed and
candidates with d < C are removed for good: no phi_p-optimal design
supports them, so the deletion is loss-free.  Their weight mass is
redistributed proportionally across the survivors, which scales the
information matrix up and never decreases phi.  The active-set sizes
recorded in the trace are therefore non-increasing, and later scans run
over shrinking arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bound import BoundReport, deletion_bound
from .criteria import (
    CriterionConfig,
    CriterionState,
    info_matrix,
    make_state,
    variance_function,
)
from .designspace import CandidateSet, format_float, uniform_weights, validate_weights

__all__ = [
    "SolveConfig",
    "TraceRow",
    "SolveResult",
    "multiplicative_step",
    "reallocate_after_prune",
    "solve",
    "support_of",
    "write_trace_csv",
    "TRACE_HEADER",
]

TRACE_HEADER = "k,phi,eps,n_active,C,pruned"

# Surviving mass below this after a deletion round means the design
# degenerated; no valid run gets anywhere near it.
_MIN_SURVIVING_MASS = 1e-12


@dataclass(frozen=True)
class SolveConfig:
    """Solver settings.

    a is the step exponent; None picks 1/(p+1).  prune_period = 0
    disables deletion entirely.  t_star, when known, sharpens the
    deletion threshold (it is resolved automatically at p = 0).
    trace_every thins the trace; prune events and the final iteration
    are always recorded.
    """

    p: float
    a: float | None = None
    max_iters: int = 100_000
    eff_tol: float = 1e-6
    prune_period: int = 10
    t_star: float | None = None
    trace_every: int = 1
    threads: int = 1

    def __post_init__(self):
        if not np.isfinite(self.p) or self.p <= -1.0:
            raise ValueError(f"p must be a finite number > -1, got {self.p}")
        if self.a is not None and not self.a > 0.0:
            raise ValueError(f"step exponent a must be positive, got {self.a}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not self.eff_tol > 0.0:
            raise ValueError(f"eff_tol must be positive, got {self.eff_tol}")
        if self.prune_period < 0:
            raise ValueError(f"prune_period must be >= 0, got {self.prune_period}")
        if self.trace_every < 1:
            raise ValueError(f"trace_every must be >= 1, got {self.trace_every}")
        if self.threads < 1:
            raise ValueError(f"threads must be >= 1, got {self.threads}")

    @property
    def step_exponent(self) -> float:
        return self.a if self.a is not None else 1.0 / (self.p + 1.0)

    def criterion_config(self) -> CriterionConfig:
        return CriterionConfig(p=self.p, t_star=self.t_star)


@dataclass(frozen=True)
class TraceRow:
    """One recorded iteration.  C is the deletion threshold when one was
    computed that iteration (prune events and the final row), else None.
    t and realloc_mass stay in memory for audits; the CSV holds the six
    leading fields only."""

    k: int
    phi: float
    eps: float
    n_active: int
    C: float | None
    pruned: bool
    t: float
    realloc_mass: float | None = None


@dataclass
class SolveResult:
    """weights and active are full-length over the original candidate
    set; deleted points hold weight 0 and active False."""

    weights: np.ndarray
    active: np.ndarray
    trace: list[TraceRow]
    report: BoundReport
    converged: bool
    n_iters: int
    state: CriterionState = field(repr=False)

    @property
    def phi(self) -> float:
        return self.state.phi

    @property
    def certificate(self) -> tuple[float, float]:
        return self.state.phi, self.state.phi * (1.0 + self.report.eps / self.state.t)


def multiplicative_step(weights: np.ndarray, d: np.ndarray, a: float) -> np.ndarray:
    """One update w_i <- w_i d_i^a / sum_j w_j d_j^a.  The weighted
    denominator keeps the total mass at exactly 1 (at a = 1 it equals t
    by the identity sum_i w_i d_i = t)."""
    if weights.shape != d.shape:
        raise ValueError(
            f"weights and d-values must align, got {weights.shape} vs {d.shape}"
        )
    num = weights * d**a
    total = num.sum()
    if not np.isfinite(total) or total <= 0.0:
        raise ArithmeticError(f"degenerate step normalizer {total}")
    return num / total


def reallocate_after_prune(weights: np.ndarray, keep: np.ndarray) -> np.ndarray:
    """Zero the deleted entries and rescale survivors to unit mass."""
    if weights.shape != keep.shape:
        raise ValueError(
            f"weights and keep mask must align, got {weights.shape} vs {keep.shape}"
        )
    mass = float(weights[keep].sum())
    if mass < _MIN_SURVIVING_MASS:
        raise ArithmeticError(
            f"surviving weight mass {mass:.3e} after deletion; "
            "the design degenerated"
        )
    out = np.zeros_like(weights)
    out[keep] = weights[keep] / mass
    return out


def support_of(weights: np.ndarray, weight_floor: float = 1e-8) -> np.ndarray:
    """Indices carrying more than weight_floor of mass."""
    return np.flatnonzero(np.asarray(weights) > weight_floor)


def _evaluate(cands, w, ccfg, threads):
    """State, active-slice d-values, clamped gap, and local argmax for
    the current weights."""
    state = make_state(info_matrix(cands, w), ccfg)
    idx = cands.active_indices()
    d = variance_function(state, cands.points[idx], threads=threads)
    j = int(np.argmax(d))
    eps = max(float(d[j] - state.t), 0.0)
    return state, idx, d, j, eps


def solve(
    cands: CandidateSet,
    cfg: SolveConfig,
    weights: np.ndarray | None = None,
) -> SolveResult:
    """Run the multiplicative algorithm until eps/t <= eff_tol or
    max_iters steps, deleting certified-useless candidates on the way.

    The input candidate set is not modified.  Raises SingularityError if
    the starting design (or a later iterate) has a singular information
    matrix at negative p, and RootBracketError if a user-supplied t_star
    is inconsistent with what the iterates prove about the optimum.
    """
    work = cands.copy()
    if weights is None:
        w = uniform_weights(work)
    else:
        w = np.array(weights, dtype=float)
        validate_weights(work, w)
    ccfg = cfg.criterion_config()
    a = cfg.step_exponent
    trace: list[TraceRow] = []

    k = 0
    while True:
        state, idx, d, j, eps = _evaluate(work, w, ccfg, cfg.threads)
        if eps <= cfg.eff_tol * state.t:
            report = deletion_bound(state, eps, ccfg)
            trace.append(
                TraceRow(k, state.phi, eps, idx.size, report.C, False, state.t)
            )
            return SolveResult(w, work.active, trace, report, True, k, state)
        if k >= cfg.max_iters:
            report = deletion_bound(state, eps, ccfg)
            trace.append(
                TraceRow(k, state.phi, eps, idx.size, report.C, False, state.t)
            )
            return SolveResult(w, work.active, trace, report, False, k, state)

        pruned = False
        C_val: float | None = None
        mass: float | None = None
        if cfg.prune_period and k > 0 and k % cfg.prune_period == 0:
            report = deletion_bound(state, eps, ccfg)
            C_val = report.C
            keep_local = d >= report.C
            keep_local[j] = True
            if not keep_local.all():
                keep = np.zeros(work.n, dtype=bool)
                keep[idx[keep_local]] = True
                mass = float(w[keep].sum())
                w = reallocate_after_prune(w, keep)
                work.active[:] = keep
                pruned = True
                # Rescaled mass changed M; refresh before stepping.
                state, idx, d, j, eps = _evaluate(work, w, ccfg, cfg.threads)

        if pruned or k % cfg.trace_every == 0:
            trace.append(
                TraceRow(k, state.phi, eps, idx.size, C_val, pruned, state.t, mass)
            )
        w_next = multiplicative_step(w[idx], d, a)
        w = np.zeros(work.n)
        w[idx] = w_next
        k += 1


def write_trace_csv(path, trace: list[TraceRow]) -> None:
    """Fixed-header CSV, floats at full precision, C blank when no
    threshold was computed that iteration."""
    with open(path, "w") as fh:
        fh.write(TRACE_HEADER + "\n")
        for row in trace:
            c = format_float(row.C) if row.C is not None else ""
            fh.write(
                f"{row.k},{format_float(row.phi)},{format_float(row.eps)},"
                f"{row.n_active},{c},{int(row.pruned)}\n"
            )
