import math
from fractions import Fraction

import pytest

from halfplane.traps import (
    build_trap,
    interval_confinement_dp,
    trap_confinement_dp,
    trap_stay_level_one_dp,
    trap_survival_dp,
)


class TestBuildTrap:
    def test_order_one(self):
        t = build_trap(1)
        assert len(t.level) == 6
        for v in t.entry:
            assert t.graph.weight(v) == 4

    def test_vertex_count_and_degrees(self):
        t = build_trap(8)
        assert len(t.level) == 3 * 9
        for v, k in t.level.items():
            d = t.graph.weight(v)
            if 0 < k < 8:
                assert d == 6
            elif k == 8:
                assert d == 4

    def test_lumpability_adjacency_counts(self):
        for n in range(1, 17):
            assert build_trap(n).level_counts_ok(), n

    def test_is_valid_three_gon_triangulation(self):
        t = build_trap(3)
        rep = t.hemap.check_integrity()
        assert rep.ok, str(rep)
        v, e, f, holes = t.hemap.counts()
        assert v == 12 and f == 6 * 3 + 1 and holes == 0
        assert len(t.hemap.contour_half_edges()) == 3

    def test_glues_as_r2_fill(self):
        import numpy as np

        from halfplane.peeling import LazyHalfPlane, make_step_law

        lazy = LazyHalfPlane(make_step_law(0.8), np.random.default_rng(7))
        handle = lazy.map.attach_connect_triangle(lazy.map.root, "R", 2)
        lazy.map.glue_fill(handle, build_trap(2).hemap)
        assert lazy.map.check_integrity().ok

    def test_order_zero_rejected(self):
        with pytest.raises(ValueError):
            build_trap(0)


class TestTrapDP:
    def test_t_zero(self):
        assert trap_confinement_dp(3, 0) == 1.0
        assert trap_survival_dp(3, 0) == 1.0

    def test_single_step_enumeration(self):
        # from a degree-6 level-1 vertex: 2 edges go to level 0 (killed),
        # 2 stay on triangle 1, 2 climb to triangle 2
        assert abs(trap_survival_dp(2, 1) - 4 / 6) <= 1e-15
        assert abs(trap_confinement_dp(2, 1) - 2 / 6) <= 1e-15

    def test_lumped_stay_probability(self):
        for t in range(0, 12):
            assert abs(trap_stay_level_one_dp(1, t) - 0.5**t) <= 1e-12

    def test_delay_shape(self):
        # -n^2 log(P) / t settles into a narrow window at t = n^3,
        # confirming the exp(-c t / n^2) shape
        cs = []
        for n in (4, 6, 8):
            t = n**3
            p = trap_confinement_dp(n, t)
            cs.append(-n * n * math.log(p) / t)
        assert all(c > 0 for c in cs)
        assert max(cs) / min(cs) < 1.25


class TestIntervalDP:
    def test_exact_two_state(self):
        assert interval_confinement_dp(2, 4, exact=True) == Fraction(8, 81)

    def test_single_state(self):
        assert interval_confinement_dp(1, 1, exact=True) == Fraction(1, 3)

    def test_float_matches_exact(self):
        for n, t in ((2, 4), (3, 7), (5, 11)):
            exact = float(interval_confinement_dp(n, t, exact=True))
            assert abs(interval_confinement_dp(n, t) - exact) < 1e-14

    def test_log_subadditive_in_t(self):
        n = 6
        vals = {t: interval_confinement_dp(n, t) for t in range(0, 61)}
        for s in (5, 12, 20):
            for t in (7, 15, 30):
                assert vals[s + t] >= vals[s] * vals[t] - 1e-15

    def test_confinement_cost_shape(self):
        # -n^2 log(P) / t is bounded uniformly at t = n^3 (limit pi^2/3)
        cs = []
        for n in (5, 10, 20):
            t = n**3
            p = interval_confinement_dp(n, t)
            cs.append(-n * n * math.log(p) / t)
        assert all(0 < c < 4.0 for c in cs)

    def test_validation(self):
        with pytest.raises(ValueError):
            interval_confinement_dp(0, 3)
        with pytest.raises(ValueError):
            interval_confinement_dp(3, -1)
