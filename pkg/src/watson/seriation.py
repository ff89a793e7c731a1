"""Category ordering by minimum-cost open path over bar compositions.

Bars are feature vectors (within-bar proportion rows); the ordering minimizes
the total Manhattan distance between successive bars, secondarily maximizes
the distance from the first to the last bar, and finally breaks remaining
ties by lexicographically smallest index sequence so output is stable.

Two solvers: exact dynamic programming over subsets with tracked endpoints
for small n, and deterministic nearest-neighbor + 2-opt above that.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, NotAPermutation, TooLarge, WrongArity
from .freqtable import FreqTable, ProportionMatrix

N_EXACT = 10
TIE_TOL = 1e-12
INF = float("inf")


@dataclass(frozen=True)
class Ordering:
    """A permutation of one variable's categories plus its objective values."""

    variable: str
    perm: tuple[int, ...]
    cost: float
    endpoint_separation: float
    exact: bool


def l1(u: Sequence[float], v: Sequence[float]) -> float:
    """Manhattan distance: sum of absolute coordinate differences."""
    if len(u) != len(v):
        raise LengthMismatch(f"vector lengths differ: {len(u)} vs {len(v)}")
    total = 0.0
    for a, b in zip(u, v):
        total += abs(a - b)
    return total


def _rows(m: ProportionMatrix | np.ndarray) -> list[list[float]]:
    rows = m.rows if isinstance(m, ProportionMatrix) else m
    return [[float(x) for x in row] for row in np.asarray(rows, dtype=np.float64)]


def _distance_matrix(rows: list[list[float]]) -> list[list[float]]:
    n = len(rows)
    D = [[0.0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d = l1(rows[i], rows[j])
            D[i][j] = d
            D[j][i] = d
    return D


def _check_perm(perm: Sequence[int], n: int) -> None:
    if sorted(perm) != list(range(n)):
        raise NotAPermutation(f"{list(perm)!r} is not a permutation of 0..{n - 1}")


def path_cost(m: ProportionMatrix | np.ndarray, perm: Sequence[int]) -> float:
    """Sum of Manhattan distances between successive bars along ``perm``."""
    rows = _rows(m)
    _check_perm(perm, len(rows))
    total = 0.0
    for a, b in zip(perm, perm[1:]):
        total += l1(rows[a], rows[b])
    return total


def _held_karp_tables(D: list[list[float]], n: int) -> list[list[list[float]]]:
    """dp[s][mask][last] = min cost of a path from s over exactly mask, ending at last."""
    full = 1 << n
    tables = []
    for s in range(n):
        dp: list[list[float] | None] = [None] * full
        start = [INF] * n
        start[s] = 0.0
        dp[1 << s] = start
        for mask in range(full):
            row = dp[mask]
            if row is None:
                continue
            for last in range(n):
                c = row[last]
                if c == INF:
                    continue
                dl = D[last]
                for nxt in range(n):
                    if mask & (1 << nxt):
                        continue
                    nm = mask | (1 << nxt)
                    nrow = dp[nm]
                    if nrow is None:
                        nrow = [INF] * n
                        dp[nm] = nrow
                    cand = c + dl[nxt]
                    if cand < nrow[nxt]:
                        nrow[nxt] = cand
        tables.append([r if r is not None else [INF] * n for r in dp])
    return tables


def seriate_exact(m: ProportionMatrix, n_exact: int = N_EXACT) -> Ordering:
    """Optimal ordering by subset dynamic programming with tracked endpoints.

    Among all permutations: minimum path cost, then maximum first-to-last
    separation, then lexicographically smallest index sequence.  Ties are
    compared at TIE_TOL.
    """
    rows = _rows(m)
    n = len(rows)
    variable = m.bar_variable if isinstance(m, ProportionMatrix) else ""
    if n > n_exact:
        raise TooLarge(f"{n} bars exceeds the exact-solver limit {n_exact}", n=n)
    if n == 1:
        return Ordering(variable, (0,), 0.0, 0.0, True)

    D = _distance_matrix(rows)
    dp = _held_karp_tables(D, n)
    full = (1 << n) - 1

    best_cost = INF
    for s in range(n):
        row = dp[s][full]
        for e in range(n):
            if e != s and row[e] < best_cost:
                best_cost = row[e]
    tied = [
        (s, e)
        for s in range(n)
        for e in range(n)
        if e != s and dp[s][full][e] <= best_cost + TIE_TOL
    ]
    best_sep = max(D[s][e] for s, e in tied)
    tied = [(s, e) for s, e in tied if D[s][e] >= best_sep - TIE_TOL]

    start = min(s for s, _ in tied)
    ends = {e for s, e in tied if s == start}

    # Greedy lexicographic reconstruction: take the smallest feasible next
    # node, where feasible means some completion still meets both bounds.
    perm = [start]
    mask = 1 << start
    cur = start
    prefix = 0.0
    while mask != full:
        for nxt in range(n):
            if mask & (1 << nxt):
                continue
            rem = full ^ mask
            cost_to_nxt = prefix + D[cur][nxt]
            table = dp[nxt]
            feasible = False
            if rem == 1 << nxt:
                feasible = cost_to_nxt <= best_cost + TIE_TOL and nxt in ends
            else:
                row = table[rem]
                for e in range(n):
                    if e == nxt or not (rem & (1 << e)):
                        continue
                    if (
                        cost_to_nxt + row[e] <= best_cost + TIE_TOL
                        and D[start][e] >= best_sep - TIE_TOL
                    ):
                        feasible = True
                        break
            if feasible:
                perm.append(nxt)
                mask |= 1 << nxt
                prefix = cost_to_nxt
                cur = nxt
                break
        else:
            raise AssertionError("no feasible continuation; DP tables inconsistent")

    perm_t = tuple(perm)
    return Ordering(
        variable=variable,
        perm=perm_t,
        cost=path_cost(m, perm_t),
        endpoint_separation=D[perm_t[0]][perm_t[-1]],
        exact=True,
    )


def _nearest_neighbor_path(D: list[list[float]], n: int, start: int) -> list[int]:
    perm = [start]
    visited = [False] * n
    visited[start] = True
    cur = start
    for _ in range(n - 1):
        best, best_d = -1, INF
        for u in range(n):
            if not visited[u] and D[cur][u] < best_d:
                best, best_d = u, D[cur][u]
        perm.append(best)
        visited[best] = True
        cur = best
    return perm


def _two_opt(D: list[list[float]], perm: list[int]) -> list[int]:
    """First-improvement segment reversal until locally optimal on path cost."""
    n = len(perm)
    improved = True
    while improved:
        improved = False
        for i in range(n - 1):
            for j in range(i + 1, n):
                delta = 0.0
                if i > 0:
                    delta += D[perm[i - 1]][perm[j]] - D[perm[i - 1]][perm[i]]
                if j < n - 1:
                    delta += D[perm[i]][perm[j + 1]] - D[perm[j]][perm[j + 1]]
                if delta < -TIE_TOL:
                    perm[i : j + 1] = reversed(perm[i : j + 1])
                    improved = True
    return perm


def seriate_heuristic(m: ProportionMatrix) -> Ordering:
    """Best-of-n-starts nearest-neighbor construction plus 2-opt improvement.

    Deterministic: among the per-start local optima, prefers lower cost, then
    larger endpoint separation, then the lexicographically smaller sequence
    (a path and its reverse count as the same candidate).
    """
    rows = _rows(m)
    n = len(rows)
    variable = m.bar_variable if isinstance(m, ProportionMatrix) else ""
    if n == 1:
        return Ordering(variable, (0,), 0.0, 0.0, False)

    D = _distance_matrix(rows)
    best: tuple[float, float, tuple[int, ...]] | None = None
    for start in range(n):
        perm = _two_opt(D, _nearest_neighbor_path(D, n, start))
        rev = list(reversed(perm))
        if rev < perm:
            perm = rev
        cost = 0.0
        for a, b in zip(perm, perm[1:]):
            cost += D[a][b]
        sep = D[perm[0]][perm[-1]]
        if best is None:
            best = (cost, sep, tuple(perm))
            continue
        b_cost, b_sep, b_perm = best
        if cost < b_cost - TIE_TOL:
            best = (cost, sep, tuple(perm))
        elif abs(cost - b_cost) <= TIE_TOL:
            if sep > b_sep + TIE_TOL or (
                abs(sep - b_sep) <= TIE_TOL and tuple(perm) < b_perm
            ):
                best = (cost, sep, tuple(perm))

    cost, sep, perm_t = best
    return Ordering(
        variable=variable,
        perm=perm_t,
        cost=path_cost(m, perm_t),
        endpoint_separation=sep,
        exact=False,
    )


def seriate_auto(m: ProportionMatrix, n_exact: int = N_EXACT) -> Ordering:
    """Exact solver when it is cheap, heuristic otherwise."""
    if m.n_bars <= n_exact:
        return seriate_exact(m, n_exact)
    return seriate_heuristic(m)


def order_by_count(t: FreqTable) -> Ordering:
    """Decreasing-count order for 1-variable tables; ties keep original order."""
    if t.ndim != 1:
        raise WrongArity(f"order_by_count needs a 1-variable table, got {t.ndim}")
    counts = t.counts
    perm = tuple(sorted(range(len(counts)), key=lambda i: (-int(counts[i]), i)))
    return Ordering(
        variable=t.schema.variables[0].name,
        perm=perm,
        cost=0.0,
        endpoint_separation=0.0,
        exact=True,
    )
