import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import make_table
from watson.errors import LengthMismatch, NotAPermutation, TooLarge, WrongArity
from watson.freqtable import ProportionMatrix, proportions
from watson.seriation import (
    TIE_TOL,
    l1,
    order_by_count,
    path_cost,
    seriate_exact,
    seriate_heuristic,
)


def pm(rows, variable="v") -> ProportionMatrix:
    rows = np.asarray(rows, dtype=np.float64)
    n, m = rows.shape
    return ProportionMatrix(
        bar_labels=tuple(f"b{i}" for i in range(n)),
        color_labels=tuple(f"c{j}" for j in range(m)),
        rows=rows,
        bar_totals=tuple([1] * n),
        bar_variable=variable,
    )


def brute_force_best(rows, tol=TIE_TOL):
    """Independent oracle: enumerate every permutation, apply the three
    criteria (min cost, max endpoint separation, lexicographic)."""
    rows = [list(map(float, r)) for r in rows]
    n = len(rows)
    dist = [
        [sum(abs(a - b) for a, b in zip(rows[i], rows[j])) for j in range(n)]
        for i in range(n)
    ]

    def cost(perm):
        c = 0.0
        for a, b in zip(perm, perm[1:]):
            c += dist[a][b]
        return c

    perms = list(itertools.permutations(range(n)))
    costs = [cost(p) for p in perms]
    cmin = min(costs)
    tie = [p for p, c in zip(perms, costs) if c <= cmin + tol]
    smax = max(dist[p[0]][p[-1]] for p in tie)
    tie = [p for p in tie if dist[p[0]][p[-1]] >= smax - tol]
    return min(tie), cmin, smax


class TestL1:
    def test_identity(self):
        assert l1([0.5, 0.5], [0.5, 0.5]) == 0.0

    def test_disjoint(self):
        assert l1([1, 0], [0, 1]) == 2.0

    def test_forced_arithmetic(self):
        assert l1([0.2, 0.8], [0.5, 0.5]) == pytest.approx(0.6, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            l1([1.0], [1.0, 2.0])

    @given(st.lists(st.floats(0, 1), min_size=1, max_size=6))
    def test_symmetric_nonnegative(self, u):
        v = list(reversed(u))
        assert l1(u, v) == l1(v, u) >= 0.0


class TestPathCost:
    def test_single_row(self):
        assert path_cost(pm([[1.0, 0.0]]), (0,)) == 0.0

    def test_forced_arithmetic(self):
        m = pm([[1, 0], [0, 1], [0.5, 0.5]])
        assert path_cost(m, (0, 2, 1)) == pytest.approx(2.0, abs=1e-12)
        assert path_cost(m, (0, 1, 2)) == pytest.approx(3.0, abs=1e-12)

    def test_not_a_permutation(self):
        with pytest.raises(NotAPermutation):
            path_cost(pm([[1, 0], [0, 1]]), (0, 0))

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_reversal_invariance(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 7))
        rows = rng.random((n, 3))
        perm = list(range(n))
        rng.shuffle(perm)
        m = pm(rows)
        assert path_cost(m, perm) == pytest.approx(
            path_cost(m, perm[::-1]), abs=1e-12
        )


class TestSeriateExact:
    def test_single_bar(self):
        o = seriate_exact(pm([[1.0]]))
        assert (o.perm, o.cost, o.endpoint_separation) == ((0,), 0.0, 0.0)
        assert o.exact

    def test_three_bar_example(self):
        o = seriate_exact(pm([[1, 0], [0, 1], [0.5, 0.5]]))
        assert o.perm == (0, 2, 1)
        assert o.cost == pytest.approx(2.0, abs=1e-12)
        assert o.endpoint_separation == pytest.approx(2.0, abs=1e-12)

    def test_too_large(self):
        rows = np.eye(11)
        with pytest.raises(TooLarge):
            seriate_exact(pm(rows))

    def test_matches_exhaustive_oracle_7x3(self):
        rng = np.random.default_rng(29)
        for _ in range(20):
            rows = rng.random((7, 3))
            rows /= rows.sum(axis=1, keepdims=True)
            o = seriate_exact(pm(rows))
            want_perm, want_cost, want_sep = brute_force_best(rows)
            assert o.perm == want_perm
            assert o.cost == pytest.approx(want_cost, abs=1e-12)
            assert o.endpoint_separation == pytest.approx(want_sep, abs=1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(31)
        rows = rng.random((6, 4))
        assert seriate_exact(pm(rows)) == seriate_exact(pm(rows))

    def test_cost_matches_recomputation(self):
        rng = np.random.default_rng(37)
        rows = rng.random((8, 3))
        m = pm(rows)
        o = seriate_exact(m)
        assert o.cost == pytest.approx(path_cost(m, o.perm), abs=1e-12)

    def test_duplicate_rows_tie_break(self):
        o = seriate_exact(pm([[0.5, 0.5], [0.5, 0.5], [0.5, 0.5]]))
        assert o.perm == (0, 1, 2)
        assert o.cost == 0.0


class TestSeriateHeuristic:
    def test_two_bars(self):
        o = seriate_heuristic(pm([[1, 0], [0, 1]]))
        assert o.perm == (0, 1)
        assert not o.exact

    def test_identical_rows(self):
        o = seriate_heuristic(pm([[0.25, 0.75]] * 5))
        assert o.perm == (0, 1, 2, 3, 4)
        assert o.cost == 0.0

    def test_never_beats_exact_and_close(self):
        rng = np.random.default_rng(41)
        for _ in range(25):
            rows = rng.random((8, 4))
            rows /= rows.sum(axis=1, keepdims=True)
            m = pm(rows)
            h = seriate_heuristic(m)
            e = seriate_exact(m)
            assert h.cost >= e.cost - 1e-12
            assert h.cost <= 1.15 * e.cost + 1e-12

    def test_deterministic(self):
        rng = np.random.default_rng(43)
        rows = rng.random((15, 4))
        assert seriate_heuristic(pm(rows)) == seriate_heuristic(pm(rows))

    def test_cost_matches_recomputation(self):
        rng = np.random.default_rng(47)
        rows = rng.random((12, 3))
        m = pm(rows)
        o = seriate_heuristic(m)
        assert o.cost == pytest.approx(path_cost(m, o.perm), abs=1e-12)


class TestOrderByCount:
    def test_forced_sort(self):
        t = make_table({"V": ["a", "b", "c"]}, [1, 5, 3])
        assert order_by_count(t).perm == (1, 2, 0)

    def test_ties_keep_original_order(self):
        t = make_table({"V": ["a", "b", "c"]}, [2, 2, 2])
        assert order_by_count(t).perm == (0, 1, 2)

    def test_wrong_arity(self):
        t = make_table({"A": ["a"], "B": ["b"]}, [[1]])
        with pytest.raises(WrongArity):
            order_by_count(t)

    @given(st.lists(st.integers(0, 50), min_size=1, max_size=10))
    def test_counts_non_increasing(self, counts):
        t = make_table({"V": [f"c{i}" for i in range(len(counts))]}, counts)
        perm = order_by_count(t).perm
        ordered = [counts[i] for i in perm]
        assert all(a >= b for a, b in zip(ordered, ordered[1:]))


def test_scale_invariance_of_argmin():
    rng = np.random.default_rng(53)
    counts = rng.integers(1, 30, size=(6, 3))
    t1 = make_table(
        {"A": [f"a{i}" for i in range(6)], "B": [f"b{j}" for j in range(3)]},
        counts,
    )
    t2 = make_table(
        {"A": [f"a{i}" for i in range(6)], "B": [f"b{j}" for j in range(3)]},
        counts * 17,
    )
    o1 = seriate_exact(proportions(t1, "A"))
    o2 = seriate_exact(proportions(t2, "A"))
    assert o1.perm == o2.perm
