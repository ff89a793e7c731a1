"""Self-contained SVG plots: 1-variable bars, the 2-variable three-panel
display (percentage bars + box plot + residual grid), and 3-variable
multi-panel displays.

Rendering is deterministic: identical (table, spec) input yields
byte-identical SVG.  Every element a client may want to address carries a
``class`` and ``data-*`` attributes, so both tests and the web UI can locate
bars, segments and cells structurally.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyTable, LengthMismatch, UnknownVariable, WrongArity, ZeroMass
from .freqtable import FreqTable, marginalize, proportions
from .seriation import Ordering, order_by_count, seriate_auto

PALETTE12 = (
    "#4477aa", "#ee6677", "#228833", "#ccbb44", "#66ccee", "#aa3377",
    "#332288", "#ddcc77", "#117733", "#cc3311", "#44aa99", "#bbbbbb",
)
RESID_CLIP = 4.0
_BLUE = (33, 102, 172)
_RED = (178, 24, 43)

_TICK_STEP = 0.05  # fine scale every 5% -> 19 interior ticks per bar


@dataclass(frozen=True)
class PlotOptions:
    width_px: int = 900
    height_px: int = 480
    palette: str = "default"
    show_scales: bool = True
    title: str = ""


@dataclass(frozen=True)
class PlotSpec:
    """One entry of the plot library: what to draw and how."""

    kind: str  # bar1 | panel2 | multipanel3
    dataset: str = ""
    variables: tuple[str, ...] = ()
    ordering: Ordering | None = None
    options: PlotOptions = field(default_factory=PlotOptions)


@dataclass(frozen=True)
class SVGDoc:
    xml: str
    width_px: int
    height_px: int


@dataclass(frozen=True)
class BoxStats:
    min: float
    q1: float
    median: float
    q3: float
    max: float
    n: int

    def __post_init__(self):
        if not (self.min <= self.q1 <= self.median <= self.q3 <= self.max):
            raise ValueError("box statistics out of order")
        if self.n <= 0:
            raise ValueError("box statistics need n > 0")


def pearson_residuals(t: FreqTable) -> np.ndarray:
    """Standardized residuals (O - E)/sqrt(E) under row/column independence."""
    if t.ndim != 2:
        raise WrongArity(f"pearson_residuals needs a 2-variable table, got {t.ndim}")
    if t.total == 0:
        raise EmptyTable("cannot compute residuals for an all-zero table")
    observed = t.counts.astype(np.float64)
    row_tot = observed.sum(axis=1)
    col_tot = observed.sum(axis=0)
    expected = np.outer(row_tot, col_tot) / t.total
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (observed - expected) / np.sqrt(expected)
    return np.where(expected > 0, r, 0.0)


def weighted_quantiles(
    scores: Sequence[float],
    weights: Sequence[int],
    qs: Sequence[float],
) -> list[float]:
    """Quantiles of the discrete distribution putting mass w_i/sum(w) on score_i.

    Uses the lower-cumulative rule: the q-th quantile is the smallest score
    whose cumulative mass reaches q.
    """
    if len(scores) != len(weights):
        raise LengthMismatch(
            f"{len(scores)} scores vs {len(weights)} weights"
        )
    pairs = sorted(
        (float(s), int(w)) for s, w in zip(scores, weights) if w > 0
    )
    total = sum(w for _, w in pairs)
    if total <= 0:
        raise ZeroMass("all weights are zero")
    out = []
    for q in qs:
        threshold = q * total
        cum = 0
        value = pairs[-1][0]
        for s, w in pairs:
            cum += w
            if cum >= threshold:
                value = s
                break
        out.append(value)
    return out


def box_stats(scores: Sequence[float], weights: Sequence[int]) -> BoxStats:
    lo, q1, med, q3, hi = weighted_quantiles(scores, weights, (0.0, 0.25, 0.5, 0.75, 1.0))
    return BoxStats(min=lo, q1=q1, median=med, q3=q3, max=hi, n=sum(int(w) for w in weights))


def residual_color(r: float) -> str:
    """Diverging blue-white-red fill, clipped at |r| = RESID_CLIP."""
    t = max(-1.0, min(1.0, r / RESID_CLIP))
    target = _RED if t >= 0 else _BLUE
    a = abs(t)
    rgb = tuple(round(255 + (c - 255) * a) for c in target)
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _f(x: float) -> str:
    return f"{x:.2f}"


def _attr_escape(value: str) -> str:
    return escape(str(value), {'"': "&quot;"})


class _Svg:
    """Minimal deterministic SVG document builder."""

    def __init__(self, width: int, height: int):
        self.width = int(width)
        self.height = int(height)
        self.parts: list[str] = []

    def elem(self, tag: str, text: str | None = None, **attrs) -> None:
        pieces = [f"<{tag}"]
        for key, value in attrs.items():
            name = "class" if key == "cls" else key.replace("_", "-")
            if isinstance(value, float):
                value = _f(value)
            pieces.append(f' {name}="{_attr_escape(value)}"')
        if text is None:
            pieces.append("/>")
        else:
            pieces.append(f">{escape(text)}</{tag}>")
        self.parts.append("".join(pieces))

    def open_group(self, **attrs) -> None:
        pieces = ["<g"]
        for key, value in attrs.items():
            name = "class" if key == "cls" else key.replace("_", "-")
            pieces.append(f' {name}="{_attr_escape(value)}"')
        pieces.append(">")
        self.parts.append("".join(pieces))

    def close_group(self) -> None:
        self.parts.append("</g>")

    def render(self) -> str:
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.width}" '
            f'height="{self.height}" viewBox="0 0 {self.width} {self.height}">'
        )
        style = (
            "<style>"
            "text{font-family:sans-serif;fill:#222222}"
            ".title{font-size:15px;font-weight:bold}"
            ".label,.axlabel,.value,.panellabel,.collabel,.scalelabel,.barnote"
            "{font-size:11px}"
            ".note{font-size:12px;fill:#666666}"
            ".axis{stroke:#444444;stroke-width:1}"
            ".grid{stroke:#dddddd;stroke-width:1}"
            ".tick{stroke:#ffffff;stroke-width:1;stroke-opacity:0.65}"
            ".bar{fill:none;stroke:#888888;stroke-width:0.5}"
            ".whisker,.whiskercap{stroke:#444444;stroke-width:1}"
            ".median{stroke:#000000;stroke-width:2}"
            "</style>"
        )
        return head + style + "".join(self.parts) + "</svg>"


def _doc(svg: _Svg) -> SVGDoc:
    return SVGDoc(xml=svg.render(), width_px=svg.width, height_px=svg.height)


def _no_data(width: int, height: int, title: str) -> SVGDoc:
    svg = _Svg(width, height)
    if title:
        svg.elem("text", text=title, x=12.0, y=22.0, cls="title")
    svg.elem(
        "text", text="no data", x=width / 2.0, y=height / 2.0,
        cls="note", text_anchor="middle",
    )
    return _doc(svg)


def _nice_step(span: float) -> float:
    if span <= 0:
        return 1.0
    raw = span / 4
    mag = 10 ** np.floor(np.log10(raw))
    for mult in (1, 2, 5, 10):
        if mult * mag >= raw:
            return float(mult * mag)
    return float(10 * mag)


def render_bar1(t: FreqTable, spec: PlotSpec | None = None) -> SVGDoc:
    """Vertical bar chart, categories in decreasing-count order."""
    if t.ndim != 1:
        raise WrongArity(f"render_bar1 needs a 1-variable table, got {t.ndim}")
    opts = spec.options if spec else PlotOptions()
    var = t.schema.variables[0]
    title = opts.title or var.name
    width, height = opts.width_px, opts.height_px
    if t.total == 0:
        return _no_data(width, height, title)

    ordering = order_by_count(t)
    counts = [int(t.counts[i]) for i in ordering.perm]
    labels = [var.categories[i] for i in ordering.perm]
    n = len(counts)

    left, right, top, bottom = 64, 20, 44, 74
    plot_w = width - left - right
    plot_h = height - top - bottom
    cmax = max(counts)
    step = _nice_step(cmax)
    ymax = step * np.ceil(cmax / step) if cmax > 0 else 1.0

    svg = _Svg(width, height)
    svg.elem("text", text=title, x=12.0, y=24.0, cls="title")

    # gridlines + y labels
    level = 0.0
    while level <= ymax + 1e-9:
        y = top + plot_h * (1 - level / ymax)
        svg.elem("line", x1=float(left), y1=y, x2=float(left + plot_w), y2=y, cls="grid")
        svg.elem(
            "text", text=f"{level:g}", x=left - 6.0, y=y + 4.0,
            cls="axlabel", text_anchor="end",
        )
        level += step
    svg.elem(
        "line", x1=float(left), y1=float(top), x2=float(left), y2=float(top + plot_h),
        cls="axis",
    )
    svg.elem(
        "line", x1=float(left), y1=float(top + plot_h), x2=float(left + plot_w),
        y2=float(top + plot_h), cls="axis",
    )

    slot = plot_w / n
    bw = slot * 0.72
    for i, (label, count) in enumerate(zip(labels, counts)):
        x = left + i * slot + (slot - bw) / 2
        h = plot_h * (count / ymax)
        y = top + plot_h - h
        svg.elem(
            "rect", x=x, y=y, width=bw, height=h, fill=PALETTE12[0],
            cls="bar", data_cat=label, data_count=str(count),
        )
        pct = 100.0 * count / t.total
        svg.elem(
            "text", text=f"{count} ({pct:.1f}%)", x=x + bw / 2, y=y - 4.0,
            cls="value", text_anchor="middle",
        )
        lx = left + i * slot + slot / 2
        ly = top + plot_h + 12.0
        svg.elem(
            "text", text=label, x=lx, y=ly, cls="label", text_anchor="end",
            transform=f"rotate(-35 {_f(lx)} {_f(ly)})",
        )
    return _doc(svg)


# geometry shared by the stacked-percentage panels
_LBL_W = 150
_BAR_L = 320
_ROW_P = 26
_BAR_H = 18
_GAP = 34


def _legend_rows(colors: Sequence[str], x0: float, max_x: float) -> int:
    """Number of rows the wrapped legend needs."""
    rows, x = 1, x0
    for label in colors:
        advance = 14 + 7 * max(4, len(label)) + 14
        if x > x0 and x + advance > max_x:
            rows += 1
            x = x0
        x += advance
    return rows


def _legend(
    svg: _Svg, colors: Sequence[str], x0: float, y: float, max_x: float
) -> None:
    x = x0
    for j, label in enumerate(colors):
        advance = 14 + 7 * max(4, len(label)) + 14
        if x > x0 and x + advance > max_x:
            x = x0
            y += 16.0
        svg.elem(
            "rect", x=x, y=y - 9.0, width=10.0, height=10.0,
            fill=PALETTE12[j % len(PALETTE12)], cls="legendswatch",
        )
        svg.elem("text", text=label, x=x + 14.0, y=y, cls="label")
        x += advance


def _stacked_row(
    svg: _Svg,
    x0: float,
    y: float,
    bar_label: str,
    row: Sequence[float],
    colors: Sequence[str],
    bar_total: int,
    show_scales: bool,
) -> None:
    """One horizontal 100%-stacked bar with its fine percentage scale."""
    svg.elem(
        "text", text=bar_label, x=x0 - 8.0, y=y + _BAR_H - 5.0,
        cls="label", text_anchor="end",
    )
    cum = 0.0
    for j, share in enumerate(row):
        seg_x = x0 + cum * _BAR_L
        cum += float(share)
        seg_w = (x0 + cum * _BAR_L) - seg_x
        svg.elem(
            "rect", x=seg_x, y=y, width=seg_w, height=float(_BAR_H),
            fill=PALETTE12[j % len(PALETTE12)], cls="seg",
            data_bar=bar_label, data_color=colors[j],
            data_share=f"{float(share):.6f}",
        )
    svg.elem(
        "rect", x=x0, y=y, width=float(_BAR_L), height=float(_BAR_H),
        cls="bar", data_bar=bar_label, data_total=str(bar_total),
    )
    if bar_total == 0:
        svg.elem(
            "text", text="n=0", x=x0 + 4.0, y=y + _BAR_H - 5.0, cls="barnote"
        )
    if show_scales:
        for k in range(1, 20):
            tx = x0 + _BAR_L * k * _TICK_STEP
            svg.elem(
                "line", x1=tx, y1=y + 1.0, x2=tx, y2=y + _BAR_H - 1.0, cls="tick"
            )


def _percent_axis(svg: _Svg, x0: float, y: float) -> None:
    svg.elem("line", x1=x0, y1=y, x2=x0 + _BAR_L, y2=y, cls="axis")
    for frac, lab in ((0.0, "0%"), (0.25, "25%"), (0.5, "50%"), (0.75, "75%"), (1.0, "100%")):
        x = x0 + frac * _BAR_L
        svg.elem("line", x1=x, y1=y, x2=x, y2=y - 4.0, cls="axis")
        svg.elem("text", text=lab, x=x, y=y - 7.0, cls="axlabel", text_anchor="middle")


def render_panel2(
    t: FreqTable, bar_var: str, spec: PlotSpec | None = None
) -> SVGDoc:
    """Three aligned panels: percentage bars, box plot, residual grid.

    All panels share one seriation ordering.  The box panel is drawn only
    when the color variable carries ordinal scores; otherwise a note
    explains its absence.
    """
    if t.ndim != 2:
        raise WrongArity(f"render_panel2 needs a 2-variable table, got {t.ndim}")
    ax = t.axis(bar_var)
    opts = spec.options if spec else PlotOptions()
    color_v = t.schema.variables[1 - ax]
    title = opts.title or f"{bar_var} vs {color_v.name}"
    if t.total == 0:
        return _no_data(opts.width_px, opts.height_px, title)

    m = proportions(t, bar_var)
    ordering = spec.ordering if spec and spec.ordering else seriate_auto(m)
    perm = ordering.perm
    n, ncol = len(m.bar_labels), len(m.color_labels)
    has_scores = color_v.scores is not None

    counts = t.counts if ax == 0 else t.counts.T
    resid = pearson_residuals(t) if ax == 0 else pearson_residuals(t).T

    box_w = 220 if has_scores else 0
    cell_w = 26
    x_bars = float(_LBL_W)
    x_box = x_bars + _BAR_L + _GAP
    x_grid = x_box + (box_w + _GAP if has_scores else 0)
    width = int(x_grid + ncol * cell_w + 40)
    legend_rows = _legend_rows(m.color_labels, float(_LBL_W), width - 16.0)
    top = 96 + 16 * (legend_rows - 1)
    height = int(top + n * _ROW_P + 56)

    svg = _Svg(width, height)
    svg.elem("text", text=title, x=12.0, y=24.0, cls="title")
    _legend(svg, m.color_labels, float(_LBL_W), 48.0, width - 16.0)
    _percent_axis(svg, x_bars, top - 8.0)

    # panel headers
    svg.open_group(cls="panel", id="panel-bars")
    for r, idx in enumerate(perm):
        y = top + r * _ROW_P
        _stacked_row(
            svg, x_bars, float(y), m.bar_labels[idx], m.rows[idx],
            m.color_labels, m.bar_totals[idx], opts.show_scales,
        )
    svg.close_group()

    if has_scores:
        scores = color_v.scores
        smin, smax = min(scores), max(scores)
        span = smax - smin

        def sx(value: float) -> float:
            if span == 0:
                return x_box + box_w / 2
            return x_box + (value - smin) / span * box_w

        svg.open_group(cls="panel", id="panel-box")
        svg.elem(
            "text", text=f"{color_v.name} score", x=x_box, y=top - 12.0, cls="axlabel"
        )
        for s in sorted(set(scores)):
            svg.elem(
                "line", x1=sx(s), y1=float(top - 4), x2=sx(s),
                y2=float(top + n * _ROW_P), cls="grid",
            )
            svg.elem(
                "text", text=f"{s:g}", x=sx(s), y=float(top + n * _ROW_P + 14),
                cls="axlabel", text_anchor="middle",
            )
        for r, idx in enumerate(perm):
            if m.bar_totals[idx] == 0:
                continue
            y = top + r * _ROW_P
            st = box_stats(scores, [int(c) for c in counts[idx]])
            mid = y + _BAR_H / 2.0
            svg.elem(
                "line", x1=sx(st.min), y1=mid, x2=sx(st.max), y2=mid, cls="whisker"
            )
            for v in (st.min, st.max):
                svg.elem(
                    "line", x1=sx(v), y1=mid - 4.0, x2=sx(v), y2=mid + 4.0,
                    cls="whiskercap",
                )
            svg.elem(
                "rect", x=sx(st.q1), y=float(y + 2), width=max(sx(st.q3) - sx(st.q1), 0.0),
                height=float(_BAR_H - 4), fill="#dddddd", stroke="#444444",
                stroke_width="1", cls="box", data_bar=m.bar_labels[idx],
            )
            svg.elem(
                "line", x1=sx(st.median), y1=float(y + 2), x2=sx(st.median),
                y2=float(y + _BAR_H - 2), cls="median",
            )
        svg.close_group()
    else:
        svg.elem(
            "text",
            text=f"box panel omitted: {color_v.name} has no ordinal scores",
            x=x_box, y=float(top - 12), cls="note",
        )

    svg.open_group(cls="panel", id="panel-residuals")
    for j, label in enumerate(m.color_labels):
        cx = x_grid + j * cell_w + cell_w / 2.0
        svg.elem(
            "text", text=label[:12], x=cx, y=top - 10.0, cls="collabel",
            text_anchor="start", transform=f"rotate(-40 {_f(cx)} {_f(top - 10.0)})",
        )
    for r, idx in enumerate(perm):
        y = top + r * _ROW_P
        for j in range(ncol):
            rr = float(resid[idx, j])
            svg.elem(
                "rect", x=x_grid + j * cell_w, y=float(y), width=float(cell_w),
                height=float(_BAR_H), fill=residual_color(rr), stroke="#cccccc",
                stroke_width="0.5", cls="cell",
                data_bar=m.bar_labels[idx], data_color=m.color_labels[j],
                data_residual=f"{rr:.4f}",
            )
    # diverging scale key
    key_y = float(top + n * _ROW_P + 18)
    for i in range(9):
        rv = -RESID_CLIP + i * RESID_CLIP / 4.0
        svg.elem(
            "rect", x=x_grid + i * 12.0, y=key_y, width=12.0, height=8.0,
            fill=residual_color(rv), cls="scaleswatch",
        )
    svg.elem("text", text=f"-{RESID_CLIP:g}", x=x_grid, y=key_y + 20.0, cls="scalelabel")
    svg.elem(
        "text", text=f"+{RESID_CLIP:g}", x=x_grid + 108.0, y=key_y + 20.0,
        cls="scalelabel", text_anchor="end",
    )
    svg.close_group()
    return _doc(svg)


def render_multipanel3(
    t: FreqTable,
    bar_var: str,
    color_var: str,
    panel_var: str,
    spec: PlotSpec | None = None,
) -> SVGDoc:
    """One stacked-percentage sub-panel per panel category, sharing a single
    bar ordering computed on the table marginalized over the panel variable."""
    if t.ndim != 3:
        raise WrongArity(f"render_multipanel3 needs a 3-variable table, got {t.ndim}")
    names = (bar_var, color_var, panel_var)
    for name in names:
        if name not in t.schema:
            raise UnknownVariable(f"unknown variable {name!r}", variable=name)
    if len(set(names)) != 3:
        raise WrongArity("bar, color and panel variables must be distinct")

    opts = spec.options if spec else PlotOptions()
    title = opts.title or f"{bar_var} vs {color_var} by {panel_var}"
    if t.total == 0:
        return _no_data(opts.width_px, opts.height_px, title)

    pooled = marginalize(t, [bar_var, color_var])
    pooled_m = proportions(pooled, bar_var)
    ordering = spec.ordering if spec and spec.ordering else seriate_auto(pooled_m)
    perm = ordering.perm

    panel_v = t.schema.variable(panel_var)
    panel_ax = t.axis(panel_var)
    n_bars = len(pooled_m.bar_labels)
    panel_h = 30 + n_bars * _ROW_P
    width = int(_LBL_W + _BAR_L + 60)
    legend_rows = _legend_rows(pooled_m.color_labels, float(_LBL_W), width - 16.0)
    top = 64 + 16 * (legend_rows - 1)
    height = int(top + len(panel_v.categories) * (panel_h + 18) + 20)

    svg = _Svg(width, height)
    svg.elem("text", text=title, x=12.0, y=24.0, cls="title")
    _legend(svg, pooled_m.color_labels, float(_LBL_W), 48.0, width - 16.0)

    y0 = float(top)
    for p, pcat in enumerate(panel_v.categories):
        sub = t.counts.take(p, axis=panel_ax)
        # axes of sub follow t's order with panel axis removed
        rest = [v.name for i, v in enumerate(t.schema.variables) if i != panel_ax]
        sub2 = sub if rest == [bar_var, color_var] else sub.T
        totals = sub2.sum(axis=1)
        sub_total = int(sub2.sum())

        svg.open_group(cls="panel", data_panel=pcat)
        svg.elem(
            "text", text=f"{panel_var} = {pcat} (n={sub_total})",
            x=float(_LBL_W), y=y0 + 14.0, cls="panellabel",
        )
        if sub_total == 0:
            svg.elem("text", text="no data", x=float(_LBL_W), y=y0 + 34.0, cls="note")
            svg.close_group()
            y0 += panel_h + 18
            continue
        _percent_axis(svg, float(_LBL_W), y0 + 26.0)
        for r, idx in enumerate(perm):
            y = y0 + 32 + r * _ROW_P
            tot = int(totals[idx])
            row = (
                sub2[idx] / tot if tot > 0 else np.zeros(sub2.shape[1])
            )
            _stacked_row(
                svg, float(_LBL_W), float(y), pooled_m.bar_labels[idx], row,
                pooled_m.color_labels, tot, opts.show_scales,
            )
        svg.close_group()
        y0 += panel_h + 18
    return _doc(svg)
