import itertools
import math

import numpy as np
import pytest
from scipy import stats

from halfplane.boltzmann import (
    Q_MAX,
    BoltzmannParams,
    FreeSampleStats,
    partition_Z,
    phi_count,
    sample_free,
    solve_theta,
)

Q_GRID = [0.01, 0.02, 0.03, 0.04, 0.05, 0.06, 0.064, 0.07, Q_MAX]


def count_polygon_triangulations(m):
    """Independent oracle for phi(0, m): brute force over non-crossing diagonals."""
    if m == 2:
        return 1  # the closed 2-gon
    if m == 3:
        return 1
    diagonals = [
        (i, j)
        for i in range(m)
        for j in range(i + 2, m)
        if not (i == 0 and j == m - 1)
    ]

    def crosses(d1, d2):
        (a, b), (c, d) = d1, d2
        return (a < c < b < d) or (c < a < d < b)

    count = 0
    for combo in itertools.combinations(diagonals, m - 3):
        if all(not crosses(x, y) for x, y in itertools.combinations(combo, 2)):
            count += 1
    return count


class TestSolveTheta:
    def test_endpoints(self):
        assert solve_theta(0.0) == 0.0
        assert abs(solve_theta(Q_MAX) - 1.0 / 6.0) <= 1e-14

    def test_forward_map_self_check(self):
        for q in Q_GRID:
            t = solve_theta(q)
            assert abs(t * (1 - 2 * t) ** 2 - q) <= 1e-14
            assert 0 <= t <= 1 / 6

    def test_alpha_08_case(self):
        t = solve_theta(0.064)
        assert abs(t - 0.1) <= 1e-14  # q = alpha^2(1-alpha)/2 at alpha = 0.8

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            solve_theta(-0.01)
        with pytest.raises(ValueError):
            solve_theta(0.08)


class TestPartitionZ:
    def test_known_values(self):
        assert abs(partition_Z(2, 0.0) - 1.0) <= 1e-12
        assert abs(partition_Z(3, 0.0) - 1.0) <= 1e-12
        assert abs(partition_Z(2, Q_MAX) - 9.0 / 8.0) <= 1e-12

    def test_catalan_at_q_zero(self):
        # phi(0, m) = Catalan(m-2)
        cat = [1, 1, 2, 5, 14, 42]
        for k, m in enumerate(range(2, 8)):
            assert abs(partition_Z(m, 0.0) - cat[k]) <= 1e-9

    def test_two_three_identity(self):
        for q in Q_GRID:
            z2 = partition_Z(2, q)
            z3 = partition_Z(3, q)
            assert abs(z2 - (1 + q * z3)) <= 1e-12

    def test_one_step_recursion(self):
        # Z_p = q Z_{p+1} + sum_j Z_{j+1} Z_{p-j}; probabilities sum to 1
        for q in [0.02, 0.064, 0.07]:
            params = BoltzmannParams(q)
            for p in range(2, 31):
                p_int, connect = params.step_probabilities(p)
                total = p_int + sum(connect) + (params.close_probability() if p == 2 else 0)
                assert abs(total - 1.0) <= 1e-12, (q, p, total)

    def test_errors(self):
        with pytest.raises(ValueError):
            partition_Z(1, 0.01)
        with pytest.raises(ValueError):
            partition_Z(4, 0.2)

    def test_large_m_log_space(self):
        from halfplane.boltzmann import log_partition_Z

        # log-space evaluation stays finite far beyond float range for Z itself
        assert math.isfinite(log_partition_Z(500, 0.05))
        assert math.isfinite(log_partition_Z(5000, 0.064))
        assert partition_Z(5000, 0.064) == math.inf


class TestPhiCount:
    def test_trivial_triangle(self):
        assert phi_count(0, 3) == 1

    def test_square_against_diagonal_bruteforce(self):
        assert phi_count(0, 4) == 2
        assert phi_count(0, 4) == count_polygon_triangulations(4)

    def test_zero_column_matches_diagonal_bruteforce(self):
        for m in range(2, 8):
            assert phi_count(0, m) == count_polygon_triangulations(m)

    def test_series_converges_to_Z_from_below(self):
        q = 0.01
        for m in (2, 3, 4):
            z = partition_Z(m, q)
            partials = []
            for n_max in range(0, 8):
                s = sum(phi_count(n, m, cap=16) * q**n for n in range(n_max + 1))
                partials.append(s)
                assert s <= z + 1e-12
            assert all(a <= b + 1e-15 for a, b in zip(partials, partials[1:]))
            assert abs(partials[-1] - z) < 1e-6

    def test_cap(self):
        with pytest.raises(ValueError):
            phi_count(8, 8)


class TestSampler:
    def test_q_zero_two_gon_closes(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            m, st = sample_free(2, 0.0, rng)
            assert st.internal_vertex_count == 0
            assert st.face_count == 0
            assert m.n_edges == 1

    def test_euler_and_integrity(self):
        rng = np.random.default_rng(2)
        params = BoltzmannParams(0.064)
        for m_gon in (2, 3, 4, 7):
            for _ in range(40):
                m, st = sample_free(m_gon, 0.064, rng, params=params)
                assert st.euler_consistent(), st
                assert not m.open_holes
                rep = m.check_integrity()
                assert rep.ok, str(rep)
                assert len(m.contour_half_edges()) == m_gon
                assert st.draws >= 1

    def test_empty_probability_m3(self):
        q = 0.01
        rng = np.random.default_rng(3)
        n_samples = 20000
        hits = 0
        params = BoltzmannParams(q)
        for _ in range(n_samples):
            _, st = sample_free(3, q, rng, params=params)
            hits += st.internal_vertex_count == 0
        p0 = 1.0 / partition_Z(3, q)
        se = math.sqrt(p0 * (1 - p0) / n_samples)
        assert abs(hits / n_samples - p0) <= 3 * se

    def test_marginals_chi_square_m3(self):
        q = 0.06
        rng = np.random.default_rng(4)
        n_samples = 20000
        params = BoltzmannParams(q)
        counts = {}
        for _ in range(n_samples):
            _, st = sample_free(3, q, rng, params=params)
            counts[st.internal_vertex_count] = counts.get(st.internal_vertex_count, 0) + 1
        z = partition_Z(3, q)
        probs = [phi_count(n, 3, cap=16) * q**n / z for n in range(4)]
        probs.append(1.0 - sum(probs))
        observed = [counts.get(n, 0) for n in range(4)]
        observed.append(n_samples - sum(observed))
        expected = [p * n_samples for p in probs]
        chi2, pval = stats.chisquare(observed, expected)
        assert pval > 0.01, (chi2, pval, observed, expected)

    def test_internal_count_tail_log_slope_negative(self):
        q = 0.064
        rng = np.random.default_rng(5)
        params = BoltzmannParams(q)
        ns = []
        for _ in range(10000):
            _, st = sample_free(2, q, rng, params=params)
            ns.append(st.internal_vertex_count)
        ns = np.asarray(ns)
        ks = np.arange(0, max(5, ns.max() // 2))
        tail = np.array([(ns > k).mean() for k in ks])
        keep = tail > 5.0 / len(ns)
        slope = np.polyfit(ks[keep], np.log(tail[keep]), 1)[0]
        assert slope < 0

    def test_param_validation(self):
        rng = np.random.default_rng(6)
        with pytest.raises(ValueError):
            sample_free(1, 0.05, rng)
        with pytest.raises(ValueError):
            BoltzmannParams(0.5)
        with pytest.raises(ValueError):
            sample_free(3, 0.05, rng, params=BoltzmannParams(0.06))


class TestStats:
    def test_euler_flag(self):
        assert FreeSampleStats(3, 2 * 3 + 4 - 2, 4).euler_consistent()
        assert not FreeSampleStats(3, 5, 4).euler_consistent()
