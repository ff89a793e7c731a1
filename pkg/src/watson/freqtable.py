"""The k-dimensional frequency table and its algebra.

All record-level work happens once, in :func:`build_table`; every later
operation (marginalize, permute, merge, remove, add) acts on the compact
count tensor and is persistent: tables are immutable, operations return new
tables.  Counts stay exact integers throughout; proportions are the only
real-valued derived quantity.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    DuplicateLabel,
    EmptyKeepList,
    LastCategory,
    NotAPermutation,
    UnknownCategory,
    UnknownVariable,
    WrongArity,
)
from .ingest import RecordSet, Schema, Variable, category_label


@dataclass(frozen=True)
class FreqTable:
    """Dense count tensor; axis i is indexed by schema.variables[i].categories."""

    schema: Schema
    counts: np.ndarray
    total: int

    def __post_init__(self):
        shape = tuple(v.n_categories for v in self.schema.variables)
        if self.counts.shape != shape:
            raise ValueError(f"tensor shape {self.counts.shape} != schema shape {shape}")
        if (self.counts < 0).any():
            raise ValueError("negative count in tensor")
        if int(self.counts.sum()) != self.total:
            raise ValueError("cached total does not match tensor sum")

    @property
    def ndim(self) -> int:
        return self.counts.ndim

    def names(self) -> tuple[str, ...]:
        return self.schema.names()

    def variable(self, name: str) -> Variable:
        return self.schema.variable(name)

    def axis(self, name: str) -> int:
        try:
            return self.schema.index(name)
        except KeyError:
            raise UnknownVariable(f"unknown variable {name!r}", variable=name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FreqTable):
            return NotImplemented
        return self.schema == other.schema and np.array_equal(self.counts, other.counts)

    def to_json(self) -> dict:
        variables = []
        for v in self.schema.variables:
            entry: dict = {"name": v.name, "categories": list(v.categories)}
            if v.scores is not None:
                entry["scores"] = list(v.scores)
            variables.append(entry)
        return {
            "variables": variables,
            "counts": [int(c) for c in self.counts.ravel(order="C")],
        }

    @classmethod
    def from_json(cls, obj: Mapping | str) -> "FreqTable":
        if isinstance(obj, str):
            obj = json.loads(obj)
        variables = tuple(
            Variable(
                name=v["name"],
                categories=tuple(v["categories"]),
                scores=tuple(v["scores"]) if v.get("scores") is not None else None,
            )
            for v in obj["variables"]
        )
        schema = Schema(variables=variables)
        shape = tuple(v.n_categories for v in variables)
        counts = np.asarray(obj["counts"], dtype=np.int64).reshape(shape, order="C")
        return _make(schema, counts)


@dataclass(frozen=True)
class ProportionMatrix:
    """Within-bar composition rows: rows[i][j] = share of color j in bar i."""

    bar_labels: tuple[str, ...]
    color_labels: tuple[str, ...]
    rows: np.ndarray
    bar_totals: tuple[int, ...]
    bar_variable: str = ""

    @property
    def n_bars(self) -> int:
        return len(self.bar_labels)


def _make(schema: Schema, counts: np.ndarray) -> FreqTable:
    counts = np.ascontiguousarray(counts, dtype=np.int64)
    counts.setflags(write=False)
    return FreqTable(schema=schema, counts=counts, total=int(counts.sum()))


def build_table(rs: RecordSet, schema: Schema) -> FreqTable:
    """Tally records into the count tensor spanned by the schema's variables."""
    col_index = {name: i for i, name in enumerate(rs.column_names)}
    axes_codes = []
    shape = []
    for v in schema.variables:
        if v.name not in col_index:
            raise UnknownVariable(
                f"schema variable {v.name!r} is not a column of the record set",
                variable=v.name,
            )
        col = col_index[v.name]
        lookup = {cat: i for i, cat in enumerate(v.categories)}
        codes = np.empty(rs.n_rows, dtype=np.int64)
        for r, row in enumerate(rs.rows):
            label = category_label(row[col])
            code = lookup.get(label)
            if code is None:
                raise UnknownCategory(
                    f"value {label!r} in row {r} is not a category of {v.name!r}",
                    variable=v.name,
                    value=label,
                    row=r,
                )
            codes[r] = code
        axes_codes.append(codes)
        shape.append(v.n_categories)

    size = int(np.prod(shape, dtype=np.int64))
    if rs.n_rows == 0:
        counts = np.zeros(shape, dtype=np.int64)
    else:
        flat = np.ravel_multi_index(axes_codes, shape)
        counts = np.bincount(flat, minlength=size).reshape(shape)
    return _make(schema, counts)


def marginalize(t: FreqTable, keep: Sequence[str]) -> FreqTable:
    """Sum over all axes not named in ``keep`` (result keeps t's axis order)."""
    if len(keep) == 0:
        raise EmptyKeepList("keep list is empty")
    keep_set = set(keep)
    for name in keep_set:
        if name not in t.schema:
            raise UnknownVariable(f"unknown variable {name!r}", variable=name)
    kept_axes = [i for i, v in enumerate(t.schema.variables) if v.name in keep_set]
    dropped = tuple(i for i in range(t.ndim) if i not in kept_axes)
    counts = t.counts.sum(axis=dropped) if dropped else t.counts
    schema = Schema(variables=tuple(t.schema.variables[i] for i in kept_axes))
    return _make(schema, counts)


def permute_axes(t: FreqTable, order: Sequence[str]) -> FreqTable:
    """Reorder axes by variable name; cell values are preserved."""
    if sorted(order) != sorted(t.names()):
        raise NotAPermutation(
            f"{list(order)!r} is not a permutation of {list(t.names())!r}"
        )
    axes = [t.schema.index(name) for name in order]
    counts = np.transpose(t.counts, axes)
    schema = Schema(variables=tuple(t.schema.variables[i] for i in axes))
    return _make(schema, counts)


def merge_categories(
    t: FreqTable, var: str, cats: Sequence[str], new_label: str
) -> FreqTable:
    """Sum the slices for ``cats`` into one slice labeled ``new_label``.

    The merged slice sits at the position of the first merged category.  The
    variable's ordinal scores, if any, are dropped: a merged category has no
    well-defined score.
    """
    ax = t.axis(var)
    v = t.schema.variables[ax]
    cats = list(dict.fromkeys(cats))
    if len(cats) < 2:
        raise ValueError("merge needs at least 2 distinct categories")
    for c in cats:
        if c not in v.categories:
            raise UnknownCategory(
                f"{c!r} is not a category of {var!r}", variable=var, value=c
            )
    if new_label in v.categories and new_label not in cats:
        raise DuplicateLabel(
            f"label {new_label!r} already exists on {var!r}", variable=var
        )

    merged = set(cats)
    first_pos = min(v.categories.index(c) for c in cats)
    new_cats: list[str] = []
    target: list[int] = []
    for i, cat in enumerate(v.categories):
        if cat in merged:
            if i == first_pos:
                new_cats.append(new_label)
            target.append(-1)
        else:
            target.append(len(new_cats))
            new_cats.append(cat)
    new_pos = new_cats.index(new_label)
    target = [new_pos if x < 0 else x for x in target]

    moved = np.moveaxis(t.counts, ax, 0)
    out = np.zeros((len(new_cats),) + moved.shape[1:], dtype=np.int64)
    np.add.at(out, np.asarray(target), moved)
    counts = np.moveaxis(out, 0, ax)

    new_var = Variable(name=var, categories=tuple(new_cats), scores=None)
    variables = list(t.schema.variables)
    variables[ax] = new_var
    return _make(Schema(variables=tuple(variables)), counts)


def remove_category(t: FreqTable, var: str, cat: str) -> FreqTable:
    """Drop one category's slice; total decreases by the slice sum."""
    ax = t.axis(var)
    v = t.schema.variables[ax]
    if cat not in v.categories:
        raise UnknownCategory(
            f"{cat!r} is not a category of {var!r}", variable=var, value=cat
        )
    if v.n_categories < 2:
        raise LastCategory(
            f"cannot remove the last category of {var!r}", variable=var
        )
    pos = v.categories.index(cat)
    counts = np.delete(t.counts, pos, axis=ax)
    new_cats = v.categories[:pos] + v.categories[pos + 1 :]
    scores = None
    if v.scores is not None:
        scores = v.scores[:pos] + v.scores[pos + 1 :]
    variables = list(t.schema.variables)
    variables[ax] = Variable(name=var, categories=new_cats, scores=scores)
    return _make(Schema(variables=tuple(variables)), counts)


def add_category(t: FreqTable, var: str, label: str) -> FreqTable:
    """Append an empty (zero-count) category; useful for aligning plots.

    Ordinal scores on the variable are dropped since the new category has
    none.
    """
    ax = t.axis(var)
    v = t.schema.variables[ax]
    if label in v.categories:
        raise DuplicateLabel(
            f"label {label!r} already exists on {var!r}", variable=var
        )
    pad = [(0, 0)] * t.ndim
    pad[ax] = (0, 1)
    counts = np.pad(t.counts, pad, mode="constant")
    variables = list(t.schema.variables)
    variables[ax] = Variable(name=var, categories=v.categories + (label,), scores=None)
    return _make(Schema(variables=tuple(variables)), counts)


def proportions(t: FreqTable, bar_var: str) -> ProportionMatrix:
    """Within-bar composition of a 2-variable table; zero bars give zero rows."""
    if t.ndim != 2:
        raise WrongArity(f"proportions needs a 2-variable table, got {t.ndim}")
    ax = t.axis(bar_var)
    counts = t.counts if ax == 0 else t.counts.T
    bar = t.schema.variables[ax]
    color = t.schema.variables[1 - ax]
    totals = counts.sum(axis=1)
    safe = np.where(totals == 0, 1, totals).astype(np.float64)
    rows = counts.astype(np.float64) / safe[:, None]
    rows[totals == 0] = 0.0
    rows.setflags(write=False)
    return ProportionMatrix(
        bar_labels=bar.categories,
        color_labels=color.categories,
        rows=rows,
        bar_totals=tuple(int(x) for x in totals),
        bar_variable=bar.name,
    )
