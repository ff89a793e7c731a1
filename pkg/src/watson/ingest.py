"""CSV ingestion and categorical schema inference.

A parsed file becomes an immutable :class:`RecordSet`; :func:`infer_schema`
turns it into a :class:`Schema` of categorical variables.  Empty cells are
surfaced as an explicit ``(missing)`` category so nonresponse stays visible
instead of silently vanishing from plots.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import IO, Mapping

from .errors import (
    CodebookMismatch,
    EmptyInput,
    EncodingError,
    RaggedRow,
    TooManyCategories,
)

MISSING = "(missing)"

DEFAULT_MAX_CATEGORIES = 64


def category_label(cell: str) -> str:
    """Map a raw cell to its category label (empty string -> ``(missing)``)."""
    return cell if cell != "" else MISSING


@dataclass(frozen=True)
class RecordSet:
    """Raw parsed records: one tuple of string cells per row."""

    column_names: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        width = len(self.column_names)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise RaggedRow(
                    f"row {i} has {len(row)} cells, expected {width}", row=i
                )

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        idx = self.column_names.index(name)
        return [row[idx] for row in self.rows]


@dataclass(frozen=True)
class Variable:
    """One categorical variable: ordered labels plus optional ordinal scores."""

    name: str
    categories: tuple[str, ...]
    scores: tuple[float, ...] | None = None

    def __post_init__(self):
        if len(set(self.categories)) != len(self.categories):
            raise CodebookMismatch(
                f"duplicate category labels in variable {self.name!r}",
                variable=self.name,
            )
        if self.scores is not None:
            if len(self.scores) != len(self.categories):
                raise CodebookMismatch(
                    f"variable {self.name!r}: {len(self.scores)} scores for "
                    f"{len(self.categories)} categories",
                    variable=self.name,
                )
            if not all(math.isfinite(s) for s in self.scores):
                raise CodebookMismatch(
                    f"variable {self.name!r}: scores must be finite",
                    variable=self.name,
                )

    @property
    def n_categories(self) -> int:
        return len(self.categories)


@dataclass(frozen=True)
class Schema:
    """Ordered list of categorical variables."""

    variables: tuple[Variable, ...]

    def __post_init__(self):
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise CodebookMismatch("duplicate variable names in schema")

    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def index(self, name: str) -> int:
        for i, v in enumerate(self.variables):
            if v.name == name:
                return i
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(v.name == name for v in self.variables)


def parse_csv(
    data: bytes | str | IO[bytes],
    delimiter: str = ",",
    has_header: bool = True,
) -> RecordSet:
    """Parse delimited text (RFC-4180-style quoting) into a RecordSet.

    Raises EmptyInput for zero-column input, RaggedRow on width mismatch
    (reports the offending data-row index) and EncodingError on bad UTF-8.
    """
    if isinstance(data, bytes):
        raw = data
    elif isinstance(data, str):
        raw = data.encode("utf-8")
    else:
        raw = data.read()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(f"input is not valid UTF-8: {exc}") from exc

    reader = csv.reader(io.StringIO(text, newline=""), delimiter=delimiter)
    records = [tuple(row) for row in reader if row]
    if not records:
        raise EmptyInput("no columns found in input")

    if has_header:
        column_names = tuple(records[0])
        body = records[1:]
    else:
        column_names = tuple(f"col{i + 1}" for i in range(len(records[0])))
        body = records
    if len(column_names) == 0:
        raise EmptyInput("no columns found in input")

    width = len(column_names)
    for i, row in enumerate(body):
        if len(row) != width:
            raise RaggedRow(
                f"row {i} has {len(row)} cells, expected {width}", row=i
            )
    return RecordSet(column_names=column_names, rows=tuple(body))


def serialize_csv(rs: RecordSet, delimiter: str = ",") -> str:
    """Inverse of parse_csv up to quoting normalization.

    Cells are always quoted so that even a lone empty cell survives the
    round trip (an unquoted empty single-column row is indistinguishable
    from a blank line).
    """
    buf = io.StringIO()
    writer = csv.writer(
        buf, delimiter=delimiter, lineterminator="\n", quoting=csv.QUOTE_ALL
    )
    writer.writerow(rs.column_names)
    writer.writerows(rs.rows)
    return buf.getvalue()


def infer_schema(rs: RecordSet, max_categories: int = DEFAULT_MAX_CATEGORIES) -> Schema:
    """One variable per column; categories are distinct values in first-appearance order."""
    if rs.n_rows == 0:
        raise EmptyInput("cannot infer a schema from zero rows")
    if max_categories < 2:
        raise ValueError("max_categories must be >= 2")
    variables = []
    for col, name in enumerate(rs.column_names):
        seen: dict[str, None] = {}
        for row in rs.rows:
            seen.setdefault(category_label(row[col]), None)
        if len(seen) > max_categories:
            raise TooManyCategories(
                f"column {name!r} has {len(seen)} distinct values "
                f"(max {max_categories}); drop or bin it",
                variable=name,
                count=len(seen),
                max=max_categories,
            )
        variables.append(Variable(name=name, categories=tuple(seen)))
    return Schema(variables=tuple(variables))


def load_codebook(source: str | bytes | Mapping) -> dict:
    """Read a codebook mapping ``variable -> {order?: [...], scores?: [...]}``."""
    if isinstance(source, Mapping):
        obj = dict(source)
    else:
        obj = json.loads(source)
    if not isinstance(obj, dict):
        raise CodebookMismatch("codebook must be a JSON object")
    return obj


def apply_codebook(schema: Schema, codebook: Mapping) -> Schema:
    """Override category order and attach ordinal scores per the codebook.

    ``order`` must be a permutation of the inferred categories; ``scores``
    align with the (possibly reordered) categories.
    """
    known = set(schema.names())
    for name in codebook:
        if name not in known:
            raise CodebookMismatch(
                f"codebook names unknown variable {name!r}", variable=name
            )
    variables = []
    for v in schema.variables:
        entry = codebook.get(v.name)
        if entry is None:
            variables.append(v)
            continue
        categories = v.categories
        order = entry.get("order")
        if order is not None:
            if sorted(order) != sorted(categories):
                raise CodebookMismatch(
                    f"codebook order for {v.name!r} is not a permutation of "
                    f"its categories",
                    variable=v.name,
                )
            categories = tuple(order)
        scores = entry.get("scores")
        if scores is not None:
            scores = tuple(float(s) for s in scores)
        variables.append(Variable(name=v.name, categories=categories, scores=scores))
    return Schema(variables=tuple(variables))
