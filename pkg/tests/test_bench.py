"""Bench-helper tests: golden-section search against known optima of
the cubic-regression family, curve data shapes, and the timing table's
bookkeeping (not its wall-clock values).
"""

import math

import numpy as np
import pytest

from designprune.bench import (
    bound_sweep,
    bound_vs_p,
    eps_of_tau,
    example2_candidates,
    golden_section_max,
    phi_of_tau,
    tau_for_epsilon,
    tau_star,
    tau_star_scan,
    timing_table,
)
from designprune.designspace import ModelSpec, grid_candidates


def fine_grid():
    return grid_candidates(
        ModelSpec(degrees=(2,), ranges=((-1.0, 1.0),), steps=(0.01,))
    )


class TestGoldenSection:
    def test_parabola(self):
        x, fx = golden_section_max(lambda x: -((x - 1.7) ** 2), 0.0, 3.0)
        assert x == pytest.approx(1.7, abs=1e-9)
        assert fx == pytest.approx(0.0, abs=1e-15)

    def test_asymmetric_peak(self):
        # Flat-top localization is sqrt(eps)-limited regardless of the
        # interval tolerance.
        x, _ = golden_section_max(lambda x: math.sin(x), 0.0, 3.0)
        assert x == pytest.approx(math.pi / 2, abs=1e-7)

    def test_bad_interval(self):
        with pytest.raises(ValueError):
            golden_section_max(lambda x: x, 2.0, 1.0)


class TestTauStar:
    def test_determinant_criterion(self):
        tau, phi = tau_star(0.0)
        assert tau == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert phi == pytest.approx((4.0 / 27.0) ** (1.0 / 3.0), rel=1e-10)

    def test_average_variance_criterion(self):
        tau, phi = tau_star(1.0)
        assert tau == pytest.approx(0.25, abs=1e-6)
        assert phi == pytest.approx(3.0 / 8.0, rel=1e-10)

    def test_negative_half(self):
        tau, _ = tau_star(-0.5)
        assert tau == pytest.approx(0.45, abs=5e-3)

    def test_phi_of_tau_closed_form(self):
        # det M = 4 tau^2 (1 - 2 tau) gives phi_0 directly.
        for tau in (0.2, 1.0 / 3.0, 0.4):
            det = 4.0 * tau**2 * (1.0 - 2.0 * tau)
            assert phi_of_tau(tau, 0.0) == pytest.approx(det ** (1.0 / 3.0), rel=1e-12)
        assert phi_of_tau(0.25, 1.0) == pytest.approx(3.0 / 8.0, rel=1e-12)


class TestTauForEpsilon:
    def test_hits_target(self):
        grid = fine_grid()
        tau = tau_for_epsilon(1.0, 0.5, grid)
        assert tau > 0.25
        assert eps_of_tau(tau, 1.0, grid) == pytest.approx(0.5, abs=1e-7)

    def test_unreachable_target(self):
        with pytest.raises(ValueError, match="not reachable"):
            tau_for_epsilon(1.0, 1e9, fine_grid())

    def test_nonpositive_target(self):
        with pytest.raises(ValueError):
            tau_for_epsilon(1.0, 0.0, fine_grid())


class TestBoundSweep:
    def test_row_shape_and_regime_order(self):
        taus = [3.0 / 16.0, 7.0 / 32.0, 0.25, 9.0 / 32.0, 5.0 / 16.0]
        rows = bound_sweep(taus, p=1.0, t_star=8.0)
        assert [r["tau"] for r in rows] == taus
        for r in rows:
            assert r["C_known"] >= r["C_unknown"]
            assert r["C_known"] <= r["t"] * (1 + 1e-12)
            assert r["C_unknown"] >= r["lam_min"] * 0.0  # positive
        # At tau = 1/4 the gap is zero (beta = 0 collapses both to t).
        mid = rows[2]
        assert mid["beta"] <= 1e-14
        assert mid["C_known"] == mid["t"] == mid["C_unknown"]

    def test_unknown_only_when_t_star_none(self):
        rows = bound_sweep([0.3], p=1.0, t_star=None)
        assert rows[0]["C_known"] is None
        assert rows[0]["C_unknown"] > 0.0


class TestTauStarScan:
    def test_scan_matches_single_calls(self):
        rows = tau_star_scan([0.0, 1.0])
        assert rows[0]["tau_star"] == pytest.approx(1.0 / 3.0, abs=1e-6)
        assert rows[1]["tau_star"] == pytest.approx(0.25, abs=1e-6)

    def test_tau_star_decreases_with_p(self):
        # Heavier p pushes mass toward the endpoints for this family.
        rows = tau_star_scan(np.linspace(-0.5, 2.0, 6))
        ts = [r["tau_star"] for r in rows]
        assert all(b < a for a, b in zip(ts, ts[1:]))


class TestBoundVsP:
    def test_rows_cover_requested_ps(self):
        rows = bound_vs_p([0.0, 0.5, 1.0], eps_target=0.5)
        assert [r["p"] for r in rows] == [0.0, 0.5, 1.0]
        for r in rows:
            assert r["C_known"] >= r["C_unknown"] - 1e-12
            assert 0.0 < r["C_unknown"] < r["t"]
            assert r["tau"] > 0.25 - 1e-6


class TestTimingTable:
    def test_cells_and_ratios(self):
        # Loose tolerance keeps this a bookkeeping test, not a benchmark.
        rows = timing_table(
            p_values=(0.0, 1.0), periods=(1, 10, 0), eff_tol=1e-3
        )
        assert len(rows) == 6
        assert rows[0]["time_ratio"] == 1.0
        for row in rows:
            assert "error" not in row
            assert row["converged"]
            assert row["n_final"] <= 441
            assert row["time_ratio"] > 0.0
        by_key = {(r["p"], r["prune_period"]): r for r in rows}
        # Pruned cells end with fewer candidates than the never-pruned ones.
        assert by_key[(1.0, 1)]["n_final"] < by_key[(1.0, 0)]["n_final"]
        assert by_key[(0.0, 1)]["n_final"] < by_key[(0.0, 0)]["n_final"]

    def test_cell_error_isolated(self):
        # An unreachable t_star poisons only its own cells.
        rows = timing_table(
            p_values=(1.0,),
            periods=(1, 0),
            eff_tol=1e-3,
            t_stars={1.0: 1e-9},
        )
        assert any("error" in r for r in rows)
        assert len(rows) == 2
