import math

import numpy as np
import pytest
from scipy import stats

from halfplane.boltzmann import partition_Z
from halfplane.map_core import MapError
from halfplane.peeling import (
    HullReport,
    LazyHalfPlane,
    PeelEvent,
    event_probability,
    make_step_law,
)


def fresh(alpha=0.8, seed=0, **kw):
    law = make_step_law(alpha)
    return LazyHalfPlane(law, np.random.default_rng(seed), **kw)


class TestStepLaw:
    def test_beta_q_at_08(self):
        law = make_step_law(0.8)
        assert abs(law.beta - 0.08) <= 1e-15
        assert abs(law.q - 0.064) <= 1e-15

    def test_normalization_on_grid(self):
        for alpha in (0.70, 0.75, 0.80, 0.90):
            law = make_step_law(alpha)
            assert abs(law.normalization_defect()) <= 1e-12
            assert 0 <= law.tail_mass <= law.tail_tol

    def test_p1_k0_term_is_beta(self):
        # p_{1,0} = phi(0,2) * beta = beta, so p_1 > beta and
        # p_1 = beta * Z_2(q)
        law = make_step_law(0.8)
        assert abs(law.p[0] - law.beta * partition_Z(2, law.q)) <= 1e-15

    def test_tail_slope_matches_asymptotics(self):
        # log p_i / i -> log(2/alpha - 2); the i^{-3/2} factor makes the
        # approach slow, so probe a deep truncation
        law = make_step_law(0.8, tail_tol=1e-130)
        i = law.I_max
        slope = law.log_p(i) / i
        target = math.log(2 / 0.8 - 2)
        assert abs(slope / target - 1) <= 0.05

    def test_alpha_range(self):
        with pytest.raises(ValueError):
            make_step_law(1.2)
        with pytest.raises(ValueError):
            make_step_law(0.5)
        with pytest.warns(UserWarning):
            make_step_law(0.6, explore=True, tail_tol=1e-6)

    def test_tail_tol_cap(self):
        with pytest.raises(ValueError):
            make_step_law(0.7, tail_tol=1e-300, i_cap=50)


class TestPeelEdge:
    def test_event_frequencies(self):
        # alpha fraction, and P((R,1) with empty 2-gon) = beta, at alpha=0.8
        n = 30000
        alpha = 0.8
        law = make_step_law(alpha)
        rng = np.random.default_rng(11)
        n_alpha = 0
        n_r1_empty = 0
        for _ in range(n):
            lazy = LazyHalfPlane(law, rng)
            ev = lazy.peel_root()
            if ev.kind == "alpha":
                n_alpha += 1
            elif ev.side == "R" and ev.i == 1 and ev.fill_stats.internal_vertex_count == 0:
                n_r1_empty += 1
        se_a = math.sqrt(alpha * (1 - alpha) / n)
        assert abs(n_alpha / n - alpha) <= 3 * se_a
        beta = law.beta
        se_b = math.sqrt(beta * (1 - beta) / n)
        assert abs(n_r1_empty / n - beta) <= 3 * se_b

    def test_edges_added_exponential_tail(self):
        lazy = fresh(seed=12)
        added = []
        for _ in range(20000):
            contour = lazy.map.contour_half_edges()
            ev = lazy.peel_edge(contour[len(contour) // 2])
            added.append(ev.edges_added)
            assert ev.edges_added >= 1
        added = np.asarray(added)
        ks = np.arange(1, 15)
        tail = np.array([(added > k).mean() for k in ks])
        keep = tail > 10.0 / len(added)
        slope = np.polyfit(ks[keep], np.log(tail[keep]), 1)[0]
        assert slope < 0

    def test_integrity_after_peeling(self):
        lazy = fresh(seed=13)
        for k in range(200):
            contour = lazy.map.contour_half_edges()
            lazy.peel_edge(contour[k % len(contour)])
        rep = lazy.map.check_integrity()
        assert rep.ok, str(rep)

    def test_connect_extends_window(self):
        # peeling at the rightmost exposed edge forces (R,i) steps to walk
        # past the window end, which must auto-extend it
        lazy = fresh(seed=14)
        hi = lazy.map.b_hi
        for _ in range(200):
            lazy.peel_edge(lazy.map.contour_half_edges()[-1])
        assert lazy.window_extensions > 0
        assert lazy.map.b_hi > hi
        assert lazy.map.check_integrity().ok

    def test_non_contour_edge_rejected(self):
        lazy = fresh(seed=15)
        with pytest.raises(MapError):
            lazy.peel_edge(lazy.map.he_twin[lazy.map.root])


class TestDomainMarkov:
    def test_first_event_law_after_prefix(self):
        # peel a fixed-size prefix with an unrevealed-blind rule, then compare
        # the next event's kind distribution to the step law by chi-square
        n = 30000
        alpha = 0.8
        law = make_step_law(alpha)
        rng = np.random.default_rng(16)
        buckets = {"alpha": 0, "i1": 0, "i2": 0, "i3+": 0}
        for _ in range(n):
            lazy = LazyHalfPlane(law, rng)
            for _ in range(3):
                contour = lazy.map.contour_half_edges()
                lazy.peel_edge(contour[len(contour) // 2])
            contour = lazy.map.contour_half_edges()
            ev = lazy.peel_edge(contour[len(contour) // 3])
            if ev.kind == "alpha":
                buckets["alpha"] += 1
            elif ev.i == 1:
                buckets["i1"] += 1
            elif ev.i == 2:
                buckets["i2"] += 1
            else:
                buckets["i3+"] += 1
        p1, p2 = law.p[0], law.p[1]
        probs = {
            "alpha": alpha,
            "i1": 2 * p1,
            "i2": 2 * p2,
            "i3+": 1 - alpha - 2 * p1 - 2 * p2,
        }
        observed = [buckets[k] for k in probs]
        expected = [probs[k] * n for k in probs]
        chi2, pval = stats.chisquare(observed, expected)
        assert pval > 0.01, (observed, expected, pval)


class TestRevealHull:
    def test_r0_noop(self):
        lazy = fresh(seed=17)
        rep = lazy.reveal_hull([lazy.map.root_vertex()], 0)
        assert rep.peels == 0 and rep.ball_sizes == []

    def test_interior_criterion(self):
        lazy = fresh(seed=18)
        rho = lazy.map.root_vertex()
        rep = lazy.reveal_hull([rho], 2)
        # no exposed vertex within distance < 2
        for v, d in rep.distances.items():
            if d < 2:
                assert not lazy.is_exposed(v), (v, d)
        assert lazy.map.check_integrity().ok

    def test_ball_sizes_stable_under_deeper_reveal(self):
        lazy = fresh(seed=19)
        rho = lazy.map.root_vertex()
        rep2 = lazy.reveal_hull([rho], 2)
        rep3 = lazy.reveal_hull([rho], 3)
        assert rep3.ball_sizes[:2] == rep2.ball_sizes
        assert rep3.ball_sizes[2] >= rep3.ball_sizes[1]

    def test_b1_tail_exponential(self):
        law = make_step_law(0.8)
        rng = np.random.default_rng(20)
        sizes = []
        for _ in range(3000):
            lazy = LazyHalfPlane(law, rng)
            rep = lazy.reveal_hull([lazy.map.root_vertex()], 1)
            sizes.append(rep.ball_sizes[0])
        sizes = np.asarray(sizes)
        ks = np.arange(3, 15)
        tail = np.array([(sizes > k).mean() for k in ks])
        keep = tail > 10.0 / len(sizes)
        slope = np.polyfit(ks[keep], np.log(tail[keep]), 1)[0]
        assert slope < 0

    def test_budget_exhaustion_flag(self):
        lazy = fresh(seed=21)
        rep = lazy.reveal_hull([lazy.map.root_vertex()], 6, max_peels=5)
        assert rep.exhausted
        assert rep.peels <= 5
        assert lazy.map.check_integrity().ok


class TestRevealWalkNeighborhood:
    def test_interior_already_noop(self):
        lazy = fresh(seed=22)
        rho = lazy.map.root_vertex()
        lazy.reveal_walk_neighborhood(rho)
        assert lazy.reveal_walk_neighborhood(rho) == 0

    def test_postcondition_neighbors_revealed(self):
        lazy = fresh(seed=23)
        rho = lazy.map.root_vertex()
        lazy.reveal_walk_neighborhood(rho)
        assert not lazy.is_exposed(rho)
        # every incident edge has a revealed triangle on at least one side
        # (boundary edges keep the outer face below them forever)
        m = lazy.map
        for h in m.out_half_edges(rho):
            assert m.he_face[h] >= 0 or m.he_face[m.he_twin[h]] >= 0

    def test_peel_cost_tail(self):
        law = make_step_law(0.8)
        rng = np.random.default_rng(24)
        costs = []
        for _ in range(2000):
            lazy = LazyHalfPlane(law, rng)
            costs.append(lazy.reveal_walk_neighborhood(lazy.map.root_vertex()))
        costs = np.asarray(costs)
        ks = np.arange(1, 12)
        tail = np.array([(costs > k).mean() for k in ks])
        keep = tail > 10.0 / len(costs)
        slope = np.polyfit(ks[keep], np.log(tail[keep]), 1)[0]
        assert slope < 0


class TestEventProbability:
    def test_alpha_triangle(self):
        assert abs(event_probability(0.8, 1, 1) - 0.8) <= 1e-15

    def test_beta_configuration(self):
        assert abs(event_probability(0.8, 0, 1) - 0.08) <= 1e-15

    def test_two_face_monte_carlo(self):
        # Q = (R,2) with a bare-triangle fill: V=0, F=2, P = beta^2
        n = 30000
        alpha = 0.8
        law = make_step_law(alpha)
        rng = np.random.default_rng(25)
        hits = 0
        for _ in range(n):
            lazy = LazyHalfPlane(law, rng)
            ev = lazy.peel_root()
            if (
                ev.kind == "connect"
                and ev.side == "R"
                and ev.i == 2
                and ev.fill_stats.internal_vertex_count == 0
            ):
                hits += 1
        p = event_probability(alpha, 0, 2)
        assert abs(p - law.beta**2) <= 1e-15
        se = math.sqrt(p * (1 - p) / n)
        assert abs(hits / n - p) <= 3 * se

    def test_validation(self):
        with pytest.raises(ValueError):
            event_probability(1.5, 0, 1)
        with pytest.raises(ValueError):
            event_probability(0.8, 2, 1)
