"""Candidate sets, design measures, and the polynomial model builders.

A candidate set is a finite list of regression vectors in R^m plus an
active mask; a design measure is a dense weight vector aligned with it.
Weights stay dense across deletions (deleted points keep weight 0 and an
inactive flag) so candidate indices remain stable in traces and reports.

Grids are generated lexicographically, factor 0 slowest, with grid values
computed as range_min + k*step from integer k to avoid accumulation drift.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import reduce
from pathlib import Path

import numpy as np

__all__ = [
    "CandidateSet",
    "ModelSpec",
    "poly_features",
    "tensor_product",
    "grid_candidates",
    "example1_design",
    "uniform_weights",
    "validate_weights",
    "save_candidates_csv",
    "load_candidates_csv",
    "save_design_json",
    "load_design_json",
    "format_float",
]


def format_float(x: float) -> str:
    """17 significant digits: enough for bit-exact float64 round trips."""
    return format(float(x), ".17g")


@dataclass
class CandidateSet:
    """Finite design space: N points in R^m with an activity mask.

    labels optionally carries the generating coordinates (one row per
    point), e.g. the scalar s-grid values behind each regression vector.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    active: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim != 2 or self.points.shape[0] < 1:
            raise ValueError("points must be a non-empty (N, m) array")
        if not np.all(np.isfinite(self.points)):
            raise ValueError("candidate points must be finite")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=float)
            if self.labels.shape[0] != self.points.shape[0]:
                raise ValueError("labels must align with points")
        if self.active is None:
            self.active = np.ones(self.points.shape[0], dtype=bool)
        else:
            self.active = np.asarray(self.active, dtype=bool)
            if self.active.shape != (self.points.shape[0],):
                raise ValueError("active mask must align with points")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def m(self) -> int:
        return self.points.shape[1]

    @property
    def n_active(self) -> int:
        return int(self.active.sum())

    def active_indices(self) -> np.ndarray:
        return np.flatnonzero(self.active)

    def copy(self) -> "CandidateSet":
        return CandidateSet(
            self.points.copy(),
            None if self.labels is None else self.labels.copy(),
            self.active.copy(),
        )


@dataclass(frozen=True)
class ModelSpec:
    """Per-factor polynomial model description for grid generation.

    One factor gives a plain polynomial model (1, s, ..., s^degree); two
    or more factors give the complete product-type interaction model,
    i.e. the tensor product of the per-factor feature vectors.
    """

    degrees: tuple[int, ...]
    ranges: tuple[tuple[float, float], ...]
    steps: tuple[float, ...]

    def __post_init__(self):
        if not (len(self.degrees) == len(self.ranges) == len(self.steps)):
            raise ValueError("degrees, ranges, steps must have equal length")
        if len(self.degrees) == 0:
            raise ValueError("at least one factor required")
        if any(d < 0 for d in self.degrees):
            raise ValueError("degrees must be >= 0")
        if any(s <= 0 for s in self.steps):
            raise ValueError("steps must be > 0")
        if any(hi <= lo for lo, hi in self.ranges):
            raise ValueError("ranges must be non-degenerate")

    @property
    def m(self) -> int:
        out = 1
        for d in self.degrees:
            out *= d + 1
        return out


def poly_features(s: float, degree: int) -> np.ndarray:
    """Monomial feature vector (1, s, s^2, ..., s^degree)."""
    if degree < 0:
        raise ValueError("degree must be >= 0")
    return float(s) ** np.arange(degree + 1)


def tensor_product(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """Kronecker product ordered (x1[0]*x2, x1[1]*x2, ...)."""
    return np.kron(np.asarray(x1, dtype=float), np.asarray(x2, dtype=float))


def _factor_grid(lo: float, hi: float, step: float) -> np.ndarray:
    if step > hi - lo:
        raise ValueError(f"step {step} larger than range [{lo}, {hi}]")
    # Tolerate a hair of float noise in (hi-lo)/step before flooring.
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def grid_candidates(spec: ModelSpec) -> CandidateSet:
    """All grid combinations mapped through the model.

    Point count is the product of per-factor grid sizes; each emitted
    vector is the tensor product of its factors' poly_features.  Row
    order is lexicographic with factor 0 slowest, grid values ascending.
    """
    grids = [
        _factor_grid(lo, hi, st)
        for (lo, hi), st in zip(spec.ranges, spec.steps)
    ]
    feats = [
        np.column_stack([g**k for k in range(d + 1)])
        for g, d in zip(grids, spec.degrees)
    ]
    # np.kron on the stacked feature matrices realizes both orderings at
    # once: row (i, j) of kron(F0, F1) is tensor_product(F0[i], F1[j]).
    points = reduce(np.kron, feats)
    counts = [len(g) for g in grids]
    total = int(np.prod(counts))
    labels = np.empty((total, len(grids)))
    for f, g in enumerate(grids):
        inner = int(np.prod(counts[f + 1 :])) if f + 1 < len(counts) else 1
        outer = total // (len(g) * inner)
        labels[:, f] = np.tile(np.repeat(g, inner), outer)
    return CandidateSet(points, labels=labels)


def example1_design(tau: float) -> tuple[CandidateSet, np.ndarray]:
    """Three-point quadratic-regression design family.

    Support s in {-1, 0, 1} under the model (1, s, s^2), with weights
    (tau, 1-2*tau, tau).  tau = 0 concentrates all mass at s = 0, which
    makes the moment matrix rank one.
    """
    if not 0.0 <= tau <= 0.5:
        raise ValueError(f"tau must lie in [0, 1/2], got {tau}")
    spec = ModelSpec(degrees=(2,), ranges=((-1.0, 1.0),), steps=(1.0,))
    cands = grid_candidates(spec)
    weights = np.array([tau, 1.0 - 2.0 * tau, tau])
    return cands, weights


def uniform_weights(cands: CandidateSet) -> np.ndarray:
    """Uniform measure over the active points; zeros elsewhere."""
    idx = cands.active_indices()
    if idx.size == 0:
        raise ValueError("no active candidates")
    w = np.zeros(cands.n)
    w[idx] = 1.0 / idx.size
    return w


def validate_weights(
    cands: CandidateSet, weights: np.ndarray, tol: float = 1e-9
) -> np.ndarray:
    """Check alignment, non-negativity, normalization, and that inactive
    points carry no mass.  Returns the weights as a float array."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (cands.n,):
        raise ValueError(
            f"weights length {w.shape} does not match {cands.n} candidates"
        )
    if not np.all(np.isfinite(w)):
        raise ValueError("weights must be finite")
    if np.any(w < -1e-15):
        raise ValueError(f"negative weight: min is {w.min()}")
    s = float(w.sum())
    if abs(s - 1.0) > tol:
        raise ValueError(f"weights sum to {s}, expected 1")
    if np.any(w[~cands.active] != 0.0):
        raise ValueError("inactive candidates must carry zero weight")
    return w


# ---------------------------------------------------------------------------
# File formats.  Candidate CSV: header row, m numeric columns x0..x{m-1},
# optional label columns prefixed s_.  Design JSON: {"weights", "active"}.
# ---------------------------------------------------------------------------


def save_candidates_csv(path: str | Path, cands: CandidateSet) -> None:
    cols = [f"x{j}" for j in range(cands.m)]
    if cands.labels is not None:
        cols += [f"s_{j}" for j in range(cands.labels.shape[1])]
    lines = [",".join(cols)]
    for i in range(cands.n):
        vals = [format_float(v) for v in cands.points[i]]
        if cands.labels is not None:
            vals += [format_float(v) for v in cands.labels[i]]
        lines.append(",".join(vals))
    Path(path).write_text("\n".join(lines) + "\n")


def load_candidates_csv(path: str | Path) -> CandidateSet:
    """Parse a candidate CSV.  Label columns are those whose header starts
    with `s_`; every other column is a coordinate.  Parse failures name
    the offending line."""
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty candidate file")
    header = [h.strip() for h in lines[0].split(",")]
    label_cols = [i for i, h in enumerate(header) if h.startswith("s_")]
    coord_cols = [i for i, h in enumerate(header) if not h.startswith("s_")]
    if not coord_cols:
        raise ValueError(f"{path}: no coordinate columns in header")
    points, labels = [], []
    for ln_no, ln in enumerate(lines[1:], start=2):
        cells = ln.split(",")
        if len(cells) != len(header):
            raise ValueError(
                f"{path}: line {ln_no}: expected {len(header)} cells, "
                f"got {len(cells)}"
            )
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise ValueError(f"{path}: line {ln_no}: {exc}") from None
        points.append([row[i] for i in coord_cols])
        if label_cols:
            labels.append([row[i] for i in label_cols])
    return CandidateSet(
        np.array(points, dtype=float),
        labels=np.array(labels, dtype=float) if label_cols else None,
    )


def save_design_json(
    path: str | Path, weights: np.ndarray, active: np.ndarray
) -> None:
    w_txt = ", ".join(format_float(v) for v in np.asarray(weights, float))
    a_txt = ", ".join(
        "true" if bool(a) else "false" for a in np.asarray(active)
    )
    Path(path).write_text(
        '{\n  "weights": [%s],\n  "active": [%s]\n}\n' % (w_txt, a_txt)
    )


def load_design_json(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(doc, dict) or "weights" not in doc:
        raise ValueError(f"{path}: expected an object with a 'weights' key")
    weights = np.asarray(doc["weights"], dtype=float)
    if "active" in doc:
        active = np.asarray(doc["active"], dtype=bool)
        if active.shape != weights.shape:
            raise ValueError(f"{path}: 'active' does not align with 'weights'")
    else:
        active = np.ones(weights.shape, dtype=bool)
    return weights, active
