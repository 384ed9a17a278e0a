"""Dense symmetric-matrix kernel.

Eigendecomposition by cyclic Jacobi rotations, real matrix powers M^q
through the spectral factorization, quadratic forms, and the handful of
scalar summaries (trace, extreme eigenvalues) the design criteria need.
Matrices are plain float ndarrays kept exactly symmetric; dimensions here
are small (a design criterion rarely needs more than a few dozen
regression functions), so an O(m^3)-per-sweep method is perfectly
adequate and keeps the whole kernel dependency-free and deterministic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularityError",
    "SpectralDecomp",
    "symmetrize",
    "sym_eig",
    "frac_power",
    "quad_form",
    "trace",
    "min_eig",
    "max_eig",
    "pd_threshold",
]

# Sweep convergence: off-diagonal Frobenius mass relative to ||M||_F.
_OFF_DIAG_TOL = 1e-13
# Rotations are skipped once a pivot is this small relative to ||M||_F;
# m*(m-1)/2 skipped entries still satisfy the sweep tolerance above.
_SKIP_TOL = 1e-15
_MAX_SWEEPS = 100


class SingularityError(ArithmeticError):
    """A matrix power or criterion value needed eigenvalues that are not
    safely positive.  Carries the offending eigenvalue when known."""

    def __init__(self, message: str, eigenvalue: float | None = None):
        super().__init__(message)
        self.eigenvalue = eigenvalue


@dataclass(frozen=True)
class SpectralDecomp:
    """Spectral factorization M = V diag(w) V^T.

    eigenvalues : (m,) array, sorted ascending.
    eigenvectors : (m, m) array with orthonormal columns; column i pairs
        with eigenvalues[i].
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]


def pd_threshold(eigenvalues: np.ndarray) -> float:
    """Positive-definiteness cutoff: eigenvalues at or below
    1e-10 * max(lam_max, 1) classify the matrix as singular for negative
    or fractional powers."""
    return 1e-10 * max(float(eigenvalues[-1]), 1.0)


def symmetrize(M: np.ndarray) -> np.ndarray:
    """Mirror the upper triangle onto the lower one.

    Products like X^T diag(w) X are symmetric in exact arithmetic but not
    always bitwise so; every constructor routes through here so that
    downstream code may rely on entries[i, j] == entries[j, i] exactly.
    """
    M = np.asarray(M, dtype=float)
    upper = np.triu(M)
    return upper + np.triu(M, 1).T


def _validate_square_symmetric(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if not np.array_equal(M, M.T):
        raise ValueError("matrix is not exactly symmetric; see symmetrize()")
    return M


def sym_eig(M: np.ndarray) -> SpectralDecomp:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps the strict upper triangle in a fixed row-major order, each
    rotation annihilating one pivot, until the off-diagonal Frobenius norm
    falls below 1e-13 * ||M||_F.  The accumulated rotation product gives
    the eigenvectors.  Deterministic: identical input bits give identical
    output bits.

    Parameters
    ----------
    M : (m, m) ndarray
        Exactly symmetric with finite entries.

    Returns
    -------
    SpectralDecomp
        Eigenvalues ascending, paired orthonormal eigenvector columns.
    """
    M = _validate_square_symmetric(M)
    m = M.shape[0]
    fro = float(np.linalg.norm(M))
    if fro == 0.0 or m == 1:
        w = np.diag(M).copy()
        order = np.argsort(w, kind="stable")
        return SpectralDecomp(w[order], np.eye(m)[:, order])

    # Python lists beat ndarray indexing for the tiny matrices living here;
    # each rotation touches only rows/columns p and q.
    A = [list(map(float, row)) for row in M]
    V = [[1.0 if i == j else 0.0 for j in range(m)] for i in range(m)]
    skip = _SKIP_TOL * fro
    target_sq = (_OFF_DIAG_TOL * fro) ** 2
    rng_m = range(m)
    converged = False
    for _ in range(_MAX_SWEEPS):
        off_sq = 2.0 * sum(
            A[i][j] ** 2 for i in range(m - 1) for j in range(i + 1, m)
        )
        if off_sq <= target_sq:
            converged = True
            break
        for p in range(m - 1):
            row_p = A[p]
            for q in range(p + 1, m):
                apq = row_p[q]
                if abs(apq) <= skip:
                    continue
                # Stable symmetric Schur 2x2: smaller-root tangent choice.
                theta = 0.5 * (A[q][q] - row_p[p]) / apq
                t = (1.0 if theta >= 0 else -1.0) / (
                    abs(theta) + math.sqrt(1.0 + theta * theta)
                )
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                row_q = A[q]
                for i in rng_m:  # right-multiply columns p, q
                    aip = A[i][p]
                    aiq = A[i][q]
                    A[i][p] = c * aip - s * aiq
                    A[i][q] = s * aip + c * aiq
                for i in rng_m:  # left-multiply rows p, q
                    api = row_p[i]
                    aqi = row_q[i]
                    row_p[i] = c * api - s * aqi
                    row_q[i] = s * api + c * aqi
                row_p[q] = 0.0  # annihilated analytically by the rotation
                row_q[p] = 0.0
                for row in V:
                    vip = row[p]
                    viq = row[q]
                    row[p] = c * vip - s * viq
                    row[q] = s * vip + c * viq
    if not converged:
        off_sq = 2.0 * sum(
            A[i][j] ** 2 for i in range(m - 1) for j in range(i + 1, m)
        )
        if off_sq > target_sq:
            raise ArithmeticError(
                f"Jacobi sweeps stalled: off-diagonal norm "
                f"{math.sqrt(off_sq):.3e} above target "
                f"{math.sqrt(target_sq):.3e} after {_MAX_SWEEPS} sweeps"
            )

    w = np.array([A[i][i] for i in rng_m])
    order = np.argsort(w, kind="stable")
    return SpectralDecomp(w[order], np.array(V)[:, order])


def _is_integer(q: float) -> bool:
    return float(q) == round(q)


def frac_power(M: np.ndarray, q: float) -> np.ndarray:
    """Real matrix power M^q = V diag(w^q) V^T.

    Negative and non-integer exponents require all eigenvalues above the
    positive-definiteness cutoff; non-negative integer powers are defined
    for any symmetric input.

    Raises
    ------
    SingularityError
        If an eigenvalue at or below pd_threshold blocks the requested
        power.  The offending eigenvalue rides on the exception.
    """
    dec = sym_eig(M)
    w = dec.eigenvalues
    if q < 0 or not _is_integer(q):
        thr = pd_threshold(w)
        if w[0] <= thr:
            raise SingularityError(
                f"eigenvalue {w[0]:.6e} at or below cutoff {thr:.6e} "
                f"for power {q}",
                eigenvalue=float(w[0]),
            )
    powered = w**q
    V = dec.eigenvectors
    return symmetrize((V * powered) @ V.T)


def quad_form(M: np.ndarray, x: np.ndarray) -> float:
    """x^T M x.  Non-negative whenever M is non-negative definite."""
    M = np.asarray(M, dtype=float)
    x = np.asarray(x, dtype=float).ravel()
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if x.shape[0] != M.shape[0]:
        raise ValueError(
            f"dimension mismatch: matrix is {M.shape[0]}x{M.shape[0]}, "
            f"vector has length {x.shape[0]}"
        )
    return float(x @ M @ x)


def trace(M: np.ndarray) -> float:
    """Sum of the diagonal (exact, no spectral detour)."""
    M = np.asarray(M, dtype=float)
    return float(np.trace(M))


def min_eig(M: np.ndarray) -> float:
    """Smallest eigenvalue, via sym_eig."""
    return float(sym_eig(M).eigenvalues[0])


def max_eig(M: np.ndarray) -> float:
    """Largest eigenvalue, via sym_eig."""
    return float(sym_eig(M).eigenvalues[-1])
