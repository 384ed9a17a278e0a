"""Certified candidate deletion for phi_p design problems.

A candidate x cannot support any phi_p-optimal design once its variance
function d(x) = x^T M^-(p+1) x falls below a threshold C computed from
the current design alone.  With t = tr(M^-p), eps the optimality gap,
alpha = lam_min(M^-p)/t and beta = eps/t, the threshold is

    C = omega1^(p+1) * B,

where omega1 is the unique root of

    F(tau) = alpha/tau^(p+1) + (1-alpha)^(p+2)/(1+beta-alpha*tau)^(p+1)
             - gamma

inside ((alpha/gamma)^(1/(p+1)), (1/gamma)^(1/(p+1))].  The pair
(gamma, B) depends on whether the trace of M^-p at the optimum (t_star)
is known: gamma = t_star/t and B = t_star when it is, else the
worst-case substitution gamma = max(1, (1+beta)^-p) and
B = t * min(1, (1+beta)^-p).  At beta = 0 the root collides with the
right endpoint and C equals t: only points achieving the equivalence-
theorem equality survive.  As beta grows with t_star known, C falls to
lam_min(M^-p), the one-dimensional bound; with t_star unknown and p > 0
it collapses toward 0 and deletes nothing.

Everything the computation produced is returned in a BoundReport so runs
can be audited after the fact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .criteria import CriterionConfig, CriterionState, epsilon, resolve_t_star, variance_function
from .designspace import CandidateSet

__all__ = [
    "RootBracketError",
    "BoundReport",
    "bound_equation",
    "root_F",
    "root_F_p0",
    "deletion_bound",
    "support_bound",
    "prune_mask",
    "h_p_threshold",
    "BETA_ZERO_THRESHOLD",
]

# Below this the confluent-root case is returned analytically: the
# bracket degenerates as the optimality gap vanishes.
BETA_ZERO_THRESHOLD = 1e-14

_WIDTH_RTOL = 1e-12  # bisection stop: interval width relative to hi
_MAX_BISECT = 300


class RootBracketError(ArithmeticError):
    """The deletion-threshold equation had no usable sign change.

    Signals inconsistent inputs, typically a wrong user-supplied t_star.
    Carries the probe evaluations that failed on .probes as a list of
    (tau, F(tau)) pairs.
    """

    def __init__(self, message: str, probes: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.probes = probes or []


def bound_equation(
    tau: float, alpha: float, beta: float, gamma: float, p: float
) -> float:
    """F(tau), the scalar equation whose root fixes the threshold."""
    return (
        alpha / tau ** (p + 1.0)
        + (1.0 - alpha) ** (p + 2.0) / (1.0 + beta - alpha * tau) ** (p + 1.0)
        - gamma
    )


def _validate_root_inputs(alpha: float, beta: float, gamma: float, p: float):
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if beta < 0.0:
        raise ValueError(f"beta must be >= 0, got {beta}")
    if gamma <= 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if p <= -1.0:
        raise ValueError(f"p must be > -1, got {p}")


def root_F(
    alpha: float, beta: float, gamma: float, p: float, tol: float = 1e-12
) -> float:
    """Solve F(tau) = 0 on ((alpha/gamma)^(1/(p+1)), (1/gamma)^(1/(p+1))].

    Bisection on the bracketed sign change; no derivative needed, valid
    for every real p > -1.  F is positive just right of the left
    endpoint L (where the first term alone equals gamma) and nonpositive
    at the right endpoint R, so a probe at L*(1+1e-12) splits two cases:
    positive probe brackets [probe, R]; nonpositive probe means the root
    sits inside (L, probe] (the large-beta regime, where it collides
    with L) and that sliver is bisected instead.  Returns the right
    endpoint exactly when beta <= BETA_ZERO_THRESHOLD.

    The residual of the returned root satisfies |F| <= tol * max(1, gamma)
    or a RootBracketError is raised.
    """
    _validate_root_inputs(alpha, beta, gamma, p)
    e = 1.0 / (p + 1.0)
    R = (1.0 / gamma) ** e
    if beta <= BETA_ZERO_THRESHOLD:
        return R
    L = (alpha / gamma) ** e
    # For consistent inputs R stays left of the second term's pole.
    if not R < (1.0 + beta) / alpha:
        raise RootBracketError(
            f"inconsistent inputs: interval end {R:.6e} reaches the pole "
            f"{(1.0 + beta) / alpha:.6e}; check t_star against the design",
            probes=[],
        )

    def f(tau: float) -> float:
        return bound_equation(tau, alpha, beta, gamma, p)

    f_R = f(R)
    if f_R > 0.0:
        raise RootBracketError(
            "no sign change on the root interval; check t_star against "
            "the design",
            probes=[(R, f_R)],
        )
    probe = L * (1.0 + 1e-12)
    f_probe = f(probe)
    if f_probe > 0.0:
        lo, hi = probe, R
    else:
        # Root within a relative 1e-12 of L; F(L) > 0 analytically but can
        # round to <= 0 when the second term is tiny, in which case L is
        # already the root to within the residual target.
        f_L = f(L)
        if f_L <= 0.0:
            if abs(f_L) <= tol * max(1.0, gamma):
                return L
            raise RootBracketError(
                "no sign change on the root interval; check t_star "
                "against the design",
                probes=[(L, f_L), (probe, f_probe), (R, f_R)],
            )
        lo, hi = L, probe

    resid_cap = tol * max(1.0, gamma)
    mid = 0.5 * (lo + hi)
    for _ in range(_MAX_BISECT):
        f_mid = f(mid)
        if (hi - lo) <= _WIDTH_RTOL * hi and abs(f_mid) <= resid_cap:
            return mid
        if f_mid > 0.0:
            lo = mid
        else:
            hi = mid
        new_mid = 0.5 * (lo + hi)
        if new_mid == mid and abs(f_mid) <= resid_cap:
            return mid  # interval at float resolution
        mid = new_mid
    f_mid = f(mid)
    if abs(f_mid) <= resid_cap:
        return mid
    raise RootBracketError(
        f"bisection stalled with residual {f_mid:.3e}",
        probes=[(mid, f_mid)],
    )


def root_F_p0(alpha: float, beta: float, gamma: float) -> float:
    """Closed form for p = 0: clearing denominators in
    alpha/tau + (1-alpha)^2/(1+beta-alpha*tau) = gamma leaves the
    quadratic

        gamma*alpha*tau^2 + [1 - 2*alpha - gamma*(1+beta)]*tau
        + alpha*(1+beta) = 0,

    whose root inside (alpha/gamma, 1/gamma] is returned.  Kept as an
    independent oracle for root_F rather than a production path.
    """
    _validate_root_inputs(alpha, beta, gamma, 0.0)
    a2 = gamma * alpha
    a1 = 1.0 - 2.0 * alpha - gamma * (1.0 + beta)
    a0 = alpha * (1.0 + beta)
    disc = a1 * a1 - 4.0 * a2 * a0
    if disc < 0.0:
        raise RootBracketError(
            f"negative discriminant {disc:.6e}: inconsistent inputs"
        )
    sq = float(np.sqrt(disc))
    # Numerically stable pair: q avoids cancellation in -a1 -+ sq.
    q = -0.5 * (a1 + sq) if a1 >= 0 else -0.5 * (a1 - sq)
    roots = [r for r in (q / a2, a0 / q if q != 0.0 else np.inf)]
    lo, hi = alpha / gamma, 1.0 / gamma
    inside = [
        r
        for r in roots
        if lo * (1.0 - 1e-9) < r <= hi * (1.0 + 1e-9)
    ]
    if not inside:
        raise RootBracketError(
            f"no quadratic root inside ({lo:.6e}, {hi:.6e}]; "
            f"roots were {roots}"
        )
    return float(min(inside))


@dataclass(frozen=True)
class BoundReport:
    """Audit record of one threshold computation.

    t, eps are the trace and optimality gap the bound was built from;
    beta = eps/t, alpha = lam_min(M^-p)/t; gamma and B are the regime
    constants (t_star known vs not); omega1 the root; C the deletion
    threshold; h_p the equivalent floor on the directional derivative
    (a candidate is deleted exactly when its directional derivative
    falls below h_p, and h_p <= 0 always).
    """

    t: float
    eps: float
    beta: float
    alpha: float
    gamma: float
    omega1: float
    B: float
    C: float
    h_p: float
    t_star_known: bool

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "eps": self.eps,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "omega1": self.omega1,
            "B": self.B,
            "C": self.C,
            "h_p": self.h_p,
            "t_star_known": self.t_star_known,
        }


def deletion_bound(
    state: CriterionState, eps: float, cfg: CriterionConfig
) -> BoundReport:
    """Threshold C for a given optimality gap (eps does not have to come
    from a candidate scan; any valid upper bound works).

    m = 1 is special: every nonsingular one-dimensional design has the
    whole space as potential support and C = t cannot be improved.
    """
    if eps < 0.0:
        eps = 0.0
    p = state.p
    t = state.t
    m = state.m
    beta = eps / t
    t_star = resolve_t_star(cfg, m)
    known = t_star is not None
    if known:
        # The optimum minimizes tr(M^-p) when p > 0 and maximizes it when
        # p < 0, so a t_star claim on the wrong side of the design value is
        # contradictory input.  Slack covers roundoff at the optimum itself.
        if p > 0.0 and t_star > t * (1.0 + 1e-9):
            raise ValueError(
                f"t_star = {t_star} exceeds the design value tr(M^-p) = {t}"
            )
        if p < 0.0 and t_star < t * (1.0 - 1e-9):
            raise ValueError(
                f"t_star = {t_star} is below the design value tr(M^-p) = {t}"
            )
        gamma = t_star / t
        B = t_star
    else:
        gamma = max(1.0, (1.0 + beta) ** -p)
        B = t * min(1.0, (1.0 + beta) ** -p)

    if m == 1:
        # alpha = 1 degenerates the equation; the bound is t itself.
        return BoundReport(
            t=t,
            eps=eps,
            beta=beta,
            alpha=1.0,
            gamma=gamma,
            omega1=(1.0 / gamma) ** (1.0 / (p + 1.0)),
            B=B,
            C=t,
            h_p=0.0,
            t_star_known=known,
        )

    alpha = state.min_eig_neg_p() / t
    if beta <= BETA_ZERO_THRESHOLD:
        # Confluent case: omega1^(p+1) * B equals t exactly in both
        # regimes; write C = t directly rather than through pow().
        return BoundReport(
            t=t,
            eps=eps,
            beta=beta,
            alpha=alpha,
            gamma=gamma,
            omega1=(1.0 / gamma) ** (1.0 / (p + 1.0)),
            B=B,
            C=t,
            h_p=0.0,
            t_star_known=known,
        )
    omega1 = root_F(alpha, beta, gamma, p)
    C = omega1 ** (p + 1.0) * B
    h_p = state.phi * (C / t - 1.0)
    return BoundReport(
        t=t,
        eps=eps,
        beta=beta,
        alpha=alpha,
        gamma=gamma,
        omega1=omega1,
        B=B,
        C=C,
        h_p=h_p,
        t_star_known=known,
    )


def support_bound(
    cands: CandidateSet,
    state: CriterionState,
    cfg: CriterionConfig,
    threads: int = 1,
) -> BoundReport:
    """Scan the active candidates for the optimality gap, then build the
    deletion threshold from it."""
    eps, _ = epsilon(cands, state, threads=threads)
    return deletion_bound(state, eps, cfg)


def prune_mask(
    cands: CandidateSet,
    state: CriterionState,
    report: BoundReport,
    threads: int = 1,
) -> np.ndarray:
    """Keep mask over all N candidates: True iff the point stays.

    Active points with d(x) >= C survive; inactive points stay False.
    The scan's argmax is always kept, guarding the most informative
    candidate against floating-point edge equality.
    """
    idx = cands.active_indices()
    mask = np.zeros(cands.n, dtype=bool)
    if idx.size == 0:
        return mask
    d = variance_function(state, cands.points[idx], threads=threads)
    keep = d >= report.C
    keep[int(np.argmax(d))] = True
    mask[idx[keep]] = True
    return mask


def h_p_threshold(
    state: CriterionState, delta: float, cfg: CriterionConfig
) -> float:
    """Floor on the directional derivative below which a candidate is
    deletable, parameterized by the criterion gap delta = phi* - phi
    rather than by eps (they differ by the factor t/phi).  Zero at
    delta = 0, nonpositive always, decreasing as the gap grows."""
    if delta < 0.0:
        raise ValueError(f"delta must be >= 0, got {delta}")
    eps = delta * state.t / state.phi
    return deletion_bound(state, eps, cfg).h_p
