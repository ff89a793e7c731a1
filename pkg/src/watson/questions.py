"""Templated leading questions computed from a 2-variable table.

Each question is backed by a statistic the engine already computes, ranked
in a fixed template order, and carries its evidence (cells, categories,
numeric values) so a client can highlight what the question points at.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import WrongArity
from .freqtable import FreqTable, proportions
from .plots import pearson_residuals
from .seriation import l1, seriate_auto

TREND_TAU_THRESHOLD = 0.7
SMALL_EXPECTED_THRESHOLD = 5.0
_EPS = 1e-9


@dataclass(frozen=True)
class Question:
    text: str
    kind: str  # largest_deviation | dominant_category | order_trend | small_cell | compare_bars
    evidence: dict

    def to_json(self) -> dict:
        return {"text": self.text, "kind": self.kind, "evidence": self.evidence}


def kendall_tau(xs: list[float], ys: list[float]) -> float:
    """Kendall tau-b via the direct pair scan (ties in either list handled)."""
    n = len(xs)
    if n != len(ys):
        raise ValueError("length mismatch")
    s = 0
    ties_x = 0
    ties_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (xs[j] > xs[i]) - (xs[j] < xs[i])
            dy = (ys[j] > ys[i]) - (ys[j] < ys[i])
            if dx == 0:
                ties_x += 1
            if dy == 0:
                ties_y += 1
            s += dx * dy
    n0 = n * (n - 1) // 2
    denom = np.sqrt(float(n0 - ties_x) * float(n0 - ties_y))
    if denom == 0:
        return 0.0
    return float(s / denom)


def generate_questions(
    t: FreqTable,
    bar_var: str,
    max_q: int = 5,
    trend_threshold: float = TREND_TAU_THRESHOLD,
    small_expected: float = SMALL_EXPECTED_THRESHOLD,
) -> list[Question]:
    """Deterministic ranked question list for a 2-variable table."""
    if t.ndim != 2:
        raise WrongArity(f"generate_questions needs a 2-variable table, got {t.ndim}")
    if max_q < 1:
        raise ValueError("max_q must be >= 1")
    if t.total == 0:
        return []

    ax = t.axis(bar_var)
    m = proportions(t, bar_var)
    counts = t.counts if ax == 0 else t.counts.T
    resid = pearson_residuals(t)
    if ax != 0:
        resid = resid.T
    bars, colors = m.bar_labels, m.color_labels
    row_tot = counts.sum(axis=1).astype(np.float64)
    col_tot = counts.sum(axis=0).astype(np.float64)
    expected = np.outer(row_tot, col_tot) / t.total
    ordering = seriate_auto(m)
    questions: list[Question] = []

    # 1. cell with the largest standardized deviation
    flat = int(np.abs(resid).argmax())
    bi, cj = np.unravel_index(flat, resid.shape)
    r = float(resid[bi, cj])
    if abs(r) > _EPS:
        direction = "more" if r > 0 else "less"
        questions.append(
            Question(
                text=(
                    f'Why does "{bars[bi]}" / "{colors[cj]}" occur {direction} often '
                    f"than expected ({int(counts[bi, cj])} observed vs "
                    f"{expected[bi, cj]:.1f} expected)?"
                ),
                kind="largest_deviation",
                evidence={
                    "bar": bars[bi],
                    "color": colors[cj],
                    "residual": r,
                    "observed": int(counts[bi, cj]),
                    "expected": float(expected[bi, cj]),
                },
            )
        )

    # 2. bar whose composition is farthest from the overall composition,
    #    or a generic composition question when nothing stands out
    overall = col_tot / t.total
    distances = [
        l1(m.rows[i], overall) if m.bar_totals[i] > 0 else -1.0
        for i in range(len(bars))
    ]
    far = int(np.argmax(distances))
    if distances[far] > _EPS:
        questions.append(
            Question(
                text=(
                    f'What makes "{bars[far]}" different? Its composition is the '
                    f"farthest from the overall pattern "
                    f"(distance {distances[far]:.3f})."
                ),
                kind="dominant_category",
                evidence={"bar": bars[far], "l1_to_overall": float(distances[far])},
            )
        )
    else:
        top = int(np.argmax(col_tot))
        share = float(col_tot[top] / t.total)
        questions.append(
            Question(
                text=(
                    f"Every {bar_var} category shows a similar mix; overall, "
                    f'"{colors[top]}" is the most common at {100 * share:.1f}%. '
                    f"Is that uniformity expected?"
                ),
                kind="dominant_category",
                evidence={"color": colors[top], "share": share},
            )
        )

    # 3. monotone trend of a color share along the seriated order
    if len(bars) >= 3:
        positions = list(range(len(ordering.perm)))
        best_tau, best_color = 0.0, -1
        for j in range(len(colors)):
            shares = [float(m.rows[i][j]) for i in ordering.perm]
            tau = kendall_tau(positions, shares)
            if abs(tau) > abs(best_tau):
                best_tau, best_color = tau, j
        if best_color >= 0 and abs(best_tau) >= trend_threshold:
            verb = "increase" if best_tau > 0 else "decrease"
            ordered_bars = [bars[i] for i in ordering.perm]
            questions.append(
                Question(
                    text=(
                        f'Does the share of "{colors[best_color]}" {verb} '
                        f"systematically across the ordered {bar_var} categories "
                        f"(trend strength {best_tau:.2f})?"
                    ),
                    kind="order_trend",
                    evidence={
                        "color": colors[best_color],
                        "kendall_tau": float(best_tau),
                        "order": ordered_bars,
                    },
                )
            )

    # 4. caution about thin cells
    small = [
        (bars[i], colors[j], float(expected[i, j]))
        for i in range(len(bars))
        for j in range(len(colors))
        if row_tot[i] > 0 and col_tot[j] > 0 and expected[i, j] < small_expected
    ]
    if small:
        small.sort(key=lambda x: x[2])
        sb, sc, se = small[0]
        questions.append(
            Question(
                text=(
                    f'{len(small)} combination(s) (e.g. "{sb}" / "{sc}") have '
                    f"expected counts below {small_expected:g}; differences there "
                    f"may be noise. Could small samples explain what you see?"
                ),
                kind="small_cell",
                evidence={
                    "cells": [[b, c] for b, c, _ in small],
                    "min_expected": se,
                },
            )
        )

    # 5. widest gap between adjacent bars in the seriated order
    if len(bars) >= 2:
        gaps = [
            (l1(m.rows[a], m.rows[b]), bars[a], bars[b])
            for a, b in zip(ordering.perm, ordering.perm[1:])
        ]
        gap, ga, gb = max(gaps, key=lambda x: x[0])
        if gap > _EPS:
            questions.append(
                Question(
                    text=(
                        f'What separates "{ga}" from "{gb}"? They sit side by side '
                        f"in the ordering yet differ the most (gap {gap:.3f})."
                    ),
                    kind="compare_bars",
                    evidence={"bars": [ga, gb], "gap": float(gap)},
                )
            )

    return questions[:max_q]
