"""Benchmark and curve-data helpers for the two worked examples.

The cubic-regression family xi_tau (mass tau at +-1, 1-2tau at 0) has a
one-parameter information matrix, so its optimal designs can be found
by golden-section search over tau; together with the two-factor product
grid it drives the timing comparison between pruned and unpruned solver
runs.  Everything here returns plain row dicts so the CLI can dump them
as CSV and render figures from the same data.
"""

from __future__ import annotations

import time

import numpy as np

from .bound import deletion_bound
from .criteria import CriterionConfig, epsilon, make_state, phi_p
from .designspace import CandidateSet, ModelSpec, grid_candidates
from .solver import SolveConfig, solve

__all__ = [
    "golden_section_max",
    "phi_of_tau",
    "tau_star",
    "eps_of_tau",
    "tau_for_epsilon",
    "bound_sweep",
    "tau_star_scan",
    "bound_vs_p",
    "timing_table",
    "example2_candidates",
]

_INV_PHI = (np.sqrt(5.0) - 1.0) / 2.0  # 0.618..., interval shrink factor


def golden_section_max(f, lo: float, hi: float, tol: float = 1e-10, max_iters: int = 200):
    """Maximize a unimodal scalar function on [lo, hi].

    Returns (x, f(x)).  The interval shrinks by the golden ratio each
    step, so ~60 iterations reach 1e-10 on unit-length intervals;
    max_iters is a safety stop, not a tuning knob.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got [{lo}, {hi}]")
    a, b = lo, hi
    x1 = b - _INV_PHI * (b - a)
    x2 = a + _INV_PHI * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iters):
        if (b - a) <= tol:
            break
        if f1 < f2:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INV_PHI * (b - a)
            f2 = f(x2)
        else:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INV_PHI * (b - a)
            f1 = f(x1)
    x = 0.5 * (a + b)
    return x, f(x)


def _example1_matrix(tau: float) -> np.ndarray:
    # Moments of xi_tau under features (1, s, s^2): closed form avoids
    # rebuilding the candidate set per evaluation.
    return np.array(
        [
            [1.0, 0.0, 2.0 * tau],
            [0.0, 2.0 * tau, 0.0],
            [2.0 * tau, 0.0, 2.0 * tau],
        ]
    )


def phi_of_tau(tau: float, p: float) -> float:
    return phi_p(_example1_matrix(tau), CriterionConfig(p=p))


def tau_star(p: float, tol: float = 1e-10) -> tuple[float, float]:
    """Best xi_tau for the given criterion: argmax and value of
    phi_p(M(xi_tau)) over tau in (0, 1/2).  The endpoints are singular,
    so the search stays epsilon inside."""
    return golden_section_max(lambda t: phi_of_tau(t, p), 1e-6, 0.5 - 1e-6, tol=tol)


def _fine_grid(step: float) -> CandidateSet:
    return grid_candidates(
        ModelSpec(degrees=(2,), ranges=((-1.0, 1.0),), steps=(step,))
    )


def example2_candidates(step: float = 0.1) -> CandidateSet:
    """Two-factor tensor-product grid; 441 points at step 0.1, 40401 at
    the full-scale 0.01."""
    return grid_candidates(
        ModelSpec(
            degrees=(2, 2),
            ranges=((-1.0, 1.0), (-1.0, 1.0)),
            steps=(step, step),
        )
    )


def _state_and_eps(tau: float, p: float, grid: CandidateSet):
    cfg = CriterionConfig(p=p)
    state = make_state(_example1_matrix(tau), cfg)
    eps, _ = epsilon(grid, state)
    return state, max(eps, 0.0)


def eps_of_tau(tau: float, p: float, grid: CandidateSet) -> float:
    """Optimality gap of xi_tau scanned over the grid."""
    return _state_and_eps(tau, p, grid)[1]


def tau_for_epsilon(
    p: float,
    eps_target: float,
    grid: CandidateSet,
    hi: float = 0.49,
    tol: float = 1e-10,
) -> float:
    """The tau > tau*(p) whose design has optimality gap eps_target.

    The gap is 0 at tau* and grows toward the singular right edge, so a
    sign change is guaranteed whenever the target is reachable; raises
    ValueError otherwise.
    """
    if eps_target <= 0.0:
        raise ValueError(f"eps_target must be positive, got {eps_target}")
    lo, _ = tau_star(p)
    g_hi = eps_of_tau(hi, p, grid) - eps_target
    if g_hi < 0.0:
        raise ValueError(
            f"eps_target {eps_target} not reachable by tau <= {hi} at p = {p}"
        )
    a, b = lo, hi
    for _ in range(200):
        mid = 0.5 * (a + b)
        if (b - a) <= tol:
            return mid
        if eps_of_tau(mid, p, grid) - eps_target < 0.0:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)


def bound_sweep(
    taus,
    p: float = 1.0,
    t_star: float | None = 8.0,
    grid_step: float = 0.01,
) -> list[dict]:
    """Deletion threshold along the xi_tau family, in both t_star
    regimes, plus the spectral floor lam_min(M^-p) each C must respect.

    Row keys: tau, t, eps, beta, C_known, C_unknown, lam_min.  The
    known-regime column is omitted (None) when t_star is None.
    """
    grid = _fine_grid(grid_step)
    cfg_known = CriterionConfig(p=p, t_star=t_star)
    cfg_unknown = CriterionConfig(p=p)
    rows = []
    for tau in taus:
        state, eps = _state_and_eps(float(tau), p, grid)
        C_known = (
            deletion_bound(state, eps, cfg_known).C if t_star is not None else None
        )
        C_unknown = deletion_bound(state, eps, cfg_unknown).C
        rows.append(
            {
                "tau": float(tau),
                "t": state.t,
                "eps": eps,
                "beta": eps / state.t,
                "C_known": C_known,
                "C_unknown": C_unknown,
                "lam_min": state.min_eig_neg_p(),
            }
        )
    return rows


def tau_star_scan(ps) -> list[dict]:
    """tau*(p) and the criterion value along a p-grid."""
    rows = []
    for p in ps:
        tau, phi = tau_star(float(p))
        rows.append({"p": float(p), "tau_star": tau, "phi": phi})
    return rows


def bound_vs_p(
    ps,
    eps_target: float = 0.5,
    grid_step: float = 0.01,
) -> list[dict]:
    """Deletion threshold across criteria at comparable distance from
    optimality: for each p, the design xi_tau(p, eps) with gap
    eps_target (clamped per p to what the family can reach), with the
    known regime using t_star = t(tau*(p)).

    Row keys: p, tau, eps, t, C_known, C_unknown.
    """
    grid = _fine_grid(grid_step)
    rows = []
    for p in ps:
        p = float(p)
        reach = eps_of_tau(0.49, p, grid)
        target = min(eps_target, 0.9 * reach)
        tau = tau_for_epsilon(p, target, grid)
        t_at_star = make_state(
            _example1_matrix(tau_star(p)[0]), CriterionConfig(p=p)
        ).t
        state, eps = _state_and_eps(tau, p, grid)
        C_known = deletion_bound(state, eps, CriterionConfig(p=p, t_star=t_at_star)).C
        C_unknown = deletion_bound(state, eps, CriterionConfig(p=p)).C
        rows.append(
            {
                "p": p,
                "tau": tau,
                "eps": eps,
                "t": state.t,
                "C_known": C_known,
                "C_unknown": C_unknown,
            }
        )
    return rows


def timing_table(
    p_values=(0.0, 1.0),
    periods=(1, 10, 0),
    grid_step: float = 0.1,
    eff_tol: float = 1e-6,
    max_iters: int = 100_000,
    t_stars: dict | None = None,
) -> list[dict]:
    """Pruned-vs-unpruned comparison on the two-factor grid.

    One solver run per (p, prune_period) cell; ratios are wall time
    relative to the first cell (p_values[0], periods[0]).  A cell that
    raises is recorded with an 'error' entry instead of aborting the
    table.  Row keys: p, prune_period, iterations, phi, n_final,
    seconds, time_ratio, converged [, error].
    """
    if t_stars is None:
        t_stars = {0.0: None, 1.0: 64.0}  # p = 0 resolves itself to m
    cands = example2_candidates(grid_step)
    rows = []
    base_seconds = None
    for p in p_values:
        for period in periods:
            row = {"p": float(p), "prune_period": int(period)}
            try:
                cfg = SolveConfig(
                    p=float(p),
                    eff_tol=eff_tol,
                    max_iters=max_iters,
                    prune_period=int(period),
                    t_star=t_stars.get(float(p)),
                )
                start = time.perf_counter()
                res = solve(cands, cfg)
                elapsed = time.perf_counter() - start
                row.update(
                    iterations=res.n_iters,
                    phi=res.phi,
                    n_final=int(res.active.sum()),
                    seconds=elapsed,
                    converged=res.converged,
                )
                if base_seconds is None:
                    base_seconds = elapsed
                row["time_ratio"] = elapsed / base_seconds
            except Exception as exc:  # noqa: BLE001 - cell isolation is the contract
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows
