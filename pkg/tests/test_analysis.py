import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import stats

from rrobin.analysis import (
    DomainError,
    LogProb,
    SweepRule,
    log_upper_tail,
    logsumexp,
    pr_ae,
    pr_afs,
    pr_alv,
    pr_bfs,
    pr_blv,
    quorum_sweep,
    recommend,
    sweep_csv,
    throughput,
)

# 50-digit reference values from an independent arbitrary-precision summation
REF_BFS = 8.3338846283694928e-4
REF_ALV = 6.2285089155997217e-2
REF_BLV = 6.9635511473421394e-33
REF_AFS_12 = 1.3569675438607920e-13
REF_BFS_CUBED = 5.7881856443455990e-10
REF_AE_1E4 = 3.2479370785019616e-59
REF_AE_1E5 = 1.5050198506957622e-06
REF_ALV_5 = 9.3739029358492006e-07


def enumerate_tail(n: int, k: int, p: float) -> float:
    """Probability that at least ``k`` of ``n`` independent slots go bad, by listing every outcome vector."""
    total = 0.0
    for outcome in itertools.product((0, 1), repeat=n):
        bad = sum(outcome)
        if bad >= k:
            total += p**bad * (1 - p) ** (n - bad)
    return total


def rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


class TestClosedForms:
    def test_values_match_high_precision_reference(self):
        assert rel(pr_bfs(100, 54, 0.33, 0.05).value, REF_BFS) < 1e-12
        assert rel(pr_alv(100, 54, 0.33, 0.05).value, REF_ALV) < 1e-12
        assert rel(pr_blv(100, 54, 0.05).value, REF_BLV) < 1e-11
        assert rel(pr_afs(100, 54, 0.33, 0.05, 12, 80).value, REF_AFS_12) < 1e-11
        assert rel(pr_afs(100, 54, 0.33, 0.05, 3, 0).value, REF_BFS_CUBED) < 1e-11
        assert rel(pr_ae(100, 10_000, 20_000, 0.33).value, REF_AE_1E4) < 1e-9
        assert rel(pr_ae(100, 100_000, 20_000, 0.33).value, REF_AE_1E5) < 1e-9
        assert rel((pr_alv(100, 54, 0.33, 0.05) ** 5).value, REF_ALV_5) < 1e-11

    def test_trivial_edges(self):
        assert pr_bfs(100, 0, 0.33, 0.05).value == 1.0
        assert pr_blv(100, 54, 0.0).value == 0.0
        assert pr_alv(100, 54, 0.5, 0.5).value == pytest.approx(1.0)
        assert pr_afs(100, 54, 0.33, 0.05, 1, 0) == pr_bfs(100, 54, 0.33, 0.05)
        assert pr_ae(9, 10, 1, 0.0).value == pytest.approx(0.1, rel=1e-12)

    @pytest.mark.parametrize(
        "call",
        [
            lambda: pr_bfs(100, 101, 0.3, 0.05),
            lambda: pr_bfs(100, 54, 0.6, 0.5),
            lambda: pr_ae(100, 100, 10, 0.3),
            lambda: pr_afs(100, 54, 0.3, 0.05, 0),
            lambda: throughput(0, 100, 1),
        ],
    )
    def test_out_of_domain_inputs_raise(self, call):
        with pytest.raises(DomainError):
            call()

    @pytest.mark.parametrize("n", [1, 5, 10, 15])
    def test_tails_equal_exhaustive_enumeration(self, n):
        rng = random.Random(n)
        for _ in range(3):
            q = rng.randint(1, n)
            a, b = rng.uniform(0, 0.45), rng.uniform(0, 0.1)
            assert abs(pr_bfs(n, q, a, b).value - enumerate_tail(n, q, a + b)) < 1e-12
            assert abs(pr_alv(n, q, a, b).value - enumerate_tail(n, n - q, a + b)) < 1e-12
            assert abs(pr_blv(n, q, b).value - enumerate_tail(n, n - q, b)) < 1e-12

    @given(n=st.integers(1, 400), data=st.data())
    def test_log_tail_agrees_with_scipy(self, n, data):
        k = data.draw(st.integers(0, n))
        p = data.draw(st.floats(0.001, 0.999))
        ours = log_upper_tail(n, k, p)
        ref = stats.binom.logsf(k - 1, n, p)
        if ref > -700:
            assert math.isclose(ours, ref, rel_tol=1e-9, abs_tol=1e-12)

    def test_alv_matches_monte_carlo(self):
        rng = np.random.default_rng(1)
        draws = rng.binomial(100, 0.38, size=1_000_000)
        freq = float(np.mean(draws >= 46))
        p = pr_alv(100, 54, 0.33, 0.05).value
        sigma = math.sqrt(p * (1 - p) / 1_000_000)
        assert abs(freq - p) < 3 * sigma

    @given(n=st.integers(5, 200), a=st.floats(0.0, 0.45), b=st.floats(0.0, 0.05))
    def test_monotone_in_quorum(self, n, a, b):
        bfs = [pr_bfs(n, q, a, b).log for q in range(1, n + 1)]
        afs = [pr_afs(n, q, a, b, 6, 20).log for q in range(1, n + 1)]
        alv = [pr_alv(n, q, a, b).log for q in range(1, n + 1)]
        blv = [pr_blv(n, q, b).log for q in range(1, n + 1)]
        tol = 1e-9
        assert all(x >= y - tol for x, y in zip(bfs, bfs[1:]))
        assert all(x >= y - tol for x, y in zip(afs, afs[1:]))
        assert all(x <= y + tol for x, y in zip(alv, alv[1:]))
        assert all(x <= y + tol for x, y in zip(blv, blv[1:]))

    def test_activity_exclusion_decreases_with_population(self):
        vals = [pr_ae(100, na, 20_000, 0.33).log for na in (1_000, 10_000, 100_000, 1_000_000)]
        assert vals == sorted(vals)


class TestLogProb:
    def test_tiny_values_print_without_underflow(self):
        p = LogProb(-2000.0)
        assert p.value == 0.0
        assert p.sci(4).endswith("e-869")

    def test_logsumexp_matches_direct_sum(self):
        xs = [math.log(v) for v in (0.1, 0.2, 0.3)]
        assert math.isclose(math.exp(logsumexp(xs)), 0.6, rel_tol=1e-14)
        assert logsumexp([]) == float("-inf")

    def test_rejects_non_probabilities(self):
        with pytest.raises(ValueError):
            LogProb(0.5)
        with pytest.raises(ValueError):
            LogProb.of(1.5)


class TestThroughput:
    def test_reference_block(self):
        tp = throughput(5, 2_000_000, 100)
        assert tp.tps == pytest.approx((2_000_000 - 280 - 41_600) / 5 / 250)

    def test_no_room_gives_zero(self):
        assert throughput(5, 280 + 100 * 416, 100).tps == 0.0

    def test_doubling_block_slightly_more_than_doubles(self):
        a, b = throughput(5, 2_000_000, 100).tps, throughput(5, 4_000_000, 100).tps
        assert b > 2 * a
        assert b - 2 * a == pytest.approx((280 + 41_600) / 5 / 250)

    def test_enrollment_bytes_are_charged(self):
        a = throughput(5, 2_000_000, 100, n_enroll=4, enroll_bytes=1000)
        assert a.tx_bytes == 2_000_000 - 280 - 41_600 - 4000


class TestSweep:
    def test_rows_cover_range_and_are_monotone(self):
        rows = quorum_sweep(100, 0.33, 0.05, 12, 5, range(40, 71))
        assert [r.q for r in rows] == list(range(40, 71))
        assert all(a.afs.log >= b.afs.log for a, b in zip(rows, rows[1:]))
        assert all(a.alv_s.log <= b.alv_s.log for a, b in zip(rows, rows[1:]))
        assert sum(r.recommended for r in rows) == 1

    def test_recommendation_respects_rule(self):
        rows = quorum_sweep(100, 0.33, 0.05, 12, 5)
        strict = SweepRule(afs_max=1e-12, alv_max=1e-6, pick="largest")
        assert recommend(rows, strict) == 54
        q = recommend(rows)
        row = next(r for r in rows if r.q == q)
        assert row.afs.value <= 1e-8 and row.alv_s.value <= 1e-5
        prev = next(r for r in rows if r.q == q - 1)
        assert prev.afs.value > 1e-8 or prev.alv_s.value > 1e-5

    def test_empty_range_is_an_error(self):
        with pytest.raises(DomainError):
            quorum_sweep(100, 0.33, 0.05, 12, 5, [])

    def test_csv_has_one_row_per_quorum(self):
        text = sweep_csv(quorum_sweep(50, 0.3, 0.05, 6, 5))
        lines = text.strip().split("\n")
        assert lines[0].startswith("n_e,alpha,beta,d,s,q,pr_afs,pr_alv_s,recommended")
        assert len(lines) == 51
        assert "e" in lines[10].split(",")[6]
