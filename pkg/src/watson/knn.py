"""Per-therapy k-nearest-neighbor outcome prediction and recommendation.

Patients are points in a mixed numeric/categorical feature space under a
range-normalized weighted Gower dissimilarity; each therapy's predicted
outcome is an inverse-distance-weighted average over that therapy's k
closest recipients, and the best therapy optimizes the predicted outcome.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import (
    DegenerateRange,
    EmptyNeighborList,
    NoEligibleTherapy,
    SchemaMismatch,
    UnknownTherapy,
)
from .ingest import RecordSet

EPSILON = 1e-6
DEFAULT_K = 30
DEFAULT_K_MIN = 5

NUMERIC = "numeric"
CATEGORICAL = "categorical"


@dataclass(frozen=True)
class FeatureSpec:
    name: str
    kind: str  # numeric | categorical
    weight: float = 1.0
    observed_range: tuple[float, float] | None = None

    def __post_init__(self):
        if self.kind not in (NUMERIC, CATEGORICAL):
            raise SchemaMismatch(
                f"feature {self.name!r}: unknown kind {self.kind!r}", feature=self.name
            )
        if not (self.weight > 0):
            raise SchemaMismatch(
                f"feature {self.name!r}: weight must be > 0", feature=self.name
            )
        if self.observed_range is not None:
            lo, hi = self.observed_range
            if not (hi > lo):
                raise DegenerateRange(
                    f"feature {self.name!r}: range [{lo}, {hi}] has max <= min",
                    feature=self.name,
                )


@dataclass(frozen=True)
class FeatureSchema:
    features: tuple[FeatureSpec, ...]

    def __post_init__(self):
        names = [f.name for f in self.features]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate feature names")

    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.features)


@dataclass(frozen=True)
class PatientRecord:
    id: str
    features: tuple
    therapy: str
    outcome: float

    def __post_init__(self):
        if not math.isfinite(self.outcome):
            raise SchemaMismatch(f"patient {self.id!r}: outcome must be finite")


@dataclass(frozen=True)
class Cohort:
    schema: FeatureSchema
    patients: tuple[PatientRecord, ...]
    therapies: tuple[str, ...]

    def __post_init__(self):
        known = set(self.therapies)
        for p in self.patients:
            if p.therapy not in known:
                raise SchemaMismatch(
                    f"patient {p.id!r} has unlisted therapy {p.therapy!r}"
                )


@dataclass(frozen=True)
class TherapyPrediction:
    predicted_outcome: float
    support: int
    used_k: int


@dataclass(frozen=True)
class Recommendation:
    per_therapy: dict[str, TherapyPrediction]
    best: str
    direction: str  # lower | higher

    def to_json(self) -> dict:
        return {
            "per_therapy": {
                tid: {
                    "predicted_outcome": p.predicted_outcome,
                    "support": p.support,
                    "used_k": p.used_k,
                }
                for tid, p in self.per_therapy.items()
            },
            "best": self.best,
            "direction": self.direction,
        }


def _check_conforms(p: PatientRecord, schema: FeatureSchema) -> None:
    if len(p.features) != len(schema.features):
        raise SchemaMismatch(
            f"patient {p.id!r}: {len(p.features)} features, schema has "
            f"{len(schema.features)}"
        )


def distance(p: PatientRecord, q: PatientRecord, schema: FeatureSchema) -> float:
    """Weighted Gower dissimilarity in [0, 1].

    Numeric features contribute |p - q| / range (clipped to 1); categorical
    features contribute 0 on match, 1 otherwise.
    """
    _check_conforms(p, schema)
    _check_conforms(q, schema)
    num = 0.0
    wsum = 0.0
    for spec, pv, qv in zip(schema.features, p.features, q.features):
        if spec.kind == NUMERIC:
            if spec.observed_range is None:
                raise DegenerateRange(
                    f"feature {spec.name!r} has no observed range", feature=spec.name
                )
            lo, hi = spec.observed_range
            try:
                d = abs(float(pv) - float(qv)) / (hi - lo)
            except (TypeError, ValueError) as exc:
                raise SchemaMismatch(
                    f"feature {spec.name!r}: non-numeric value", feature=spec.name
                ) from exc
            d = min(d, 1.0)
        else:
            d = 0.0 if pv == qv else 1.0
        num += spec.weight * d
        wsum += spec.weight
    return num / wsum


def nearest_for_therapy(
    c: Cohort, therapy: str, patient: PatientRecord, k: int
) -> list[tuple[PatientRecord, float]]:
    """The k recipients of ``therapy`` closest to ``patient`` (exhaustive scan).

    Distance ties break by cohort order, so results are deterministic.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if therapy not in c.therapies:
        raise UnknownTherapy(f"unknown therapy {therapy!r}", therapy=therapy)
    scored = [
        (distance(patient, q, c.schema), i, q)
        for i, q in enumerate(c.patients)
        if q.therapy == therapy
    ]
    scored.sort(key=lambda x: (x[0], x[1]))
    return [(q, d) for d, _, q in scored[:k]]


def predict_outcome(
    neighbors: Sequence[tuple[PatientRecord, float]],
    epsilon: float = EPSILON,
    uniform: bool = False,
) -> float:
    """Inverse-distance-weighted average of neighbor outcomes.

    ``uniform=True`` switches to the plain mean for sensitivity checks.
    """
    if not neighbors:
        raise EmptyNeighborList("no neighbors to average")
    wsum = 0.0
    acc = 0.0
    for patient, d in neighbors:
        w = 1.0 if uniform else 1.0 / (d + epsilon)
        wsum += w
        acc += w * patient.outcome
    return acc / wsum


def recommend(
    c: Cohort,
    patient: PatientRecord,
    k: int = DEFAULT_K,
    k_min: int = DEFAULT_K_MIN,
    direction: str = "lower",
    uniform: bool = False,
) -> Recommendation:
    """Predicted outcome per eligible therapy plus the best pick.

    Therapies with fewer than ``k_min`` recipients are excluded; ties on the
    predicted outcome break toward the larger neighborhood, then by therapy
    id.
    """
    if not (k >= k_min >= 1):
        raise ValueError("need k >= k_min >= 1")
    if direction not in ("lower", "higher"):
        raise ValueError("direction must be 'lower' or 'higher'")
    per_therapy: dict[str, TherapyPrediction] = {}
    for tid in sorted(c.therapies):
        support = sum(1 for q in c.patients if q.therapy == tid)
        if support < k_min:
            continue
        neighbors = nearest_for_therapy(c, tid, patient, k)
        per_therapy[tid] = TherapyPrediction(
            predicted_outcome=predict_outcome(neighbors, uniform=uniform),
            support=support,
            used_k=len(neighbors),
        )
    if not per_therapy:
        raise NoEligibleTherapy(
            f"no therapy has at least {k_min} recipients", k_min=k_min
        )
    sign = 1.0 if direction == "lower" else -1.0
    best = min(
        per_therapy.items(),
        key=lambda kv: (sign * kv[1].predicted_outcome, -kv[1].used_k, kv[0]),
    )[0]
    return Recommendation(per_therapy=per_therapy, best=best, direction=direction)


# --- cohort I/O -------------------------------------------------------------

def parse_feature_schema(obj: Mapping | str) -> tuple[FeatureSchema, str]:
    """Read the sidecar JSON: feature specs plus the outcome direction."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    features = []
    for entry in obj["features"]:
        rng = entry.get("range")
        features.append(
            FeatureSpec(
                name=entry["name"],
                kind=entry["kind"],
                weight=float(entry.get("weight", 1.0)),
                observed_range=(float(rng[0]), float(rng[1])) if rng else None,
            )
        )
    direction = obj.get("direction", "lower")
    if direction not in ("lower", "higher"):
        raise SchemaMismatch(f"unknown direction {direction!r}")
    return FeatureSchema(features=tuple(features)), direction


def patient_from_json(obj: Mapping | str, schema: FeatureSchema) -> PatientRecord:
    """Build a query patient from ``{"features": {name: value} | [values]}``."""
    if isinstance(obj, str):
        obj = json.loads(obj)
    feats = obj.get("features", obj)
    if isinstance(feats, Mapping):
        values = []
        for spec in schema.features:
            if spec.name not in feats:
                raise SchemaMismatch(
                    f"patient is missing feature {spec.name!r}", feature=spec.name
                )
            values.append(feats[spec.name])
    else:
        if len(feats) != len(schema.features):
            raise SchemaMismatch(
                f"{len(feats)} feature values, schema has {len(schema.features)}"
            )
        values = list(feats)
    coerced = []
    for spec, v in zip(schema.features, values):
        if spec.kind == NUMERIC:
            try:
                coerced.append(float(v))
            except (TypeError, ValueError) as exc:
                raise SchemaMismatch(
                    f"feature {spec.name!r}: non-numeric value {v!r}",
                    feature=spec.name,
                ) from exc
        else:
            coerced.append(str(v))
    pid = str(obj.get("id", "query")) if isinstance(obj, Mapping) else "query"
    return PatientRecord(id=pid, features=tuple(coerced), therapy="", outcome=0.0)


def feature_schema_to_json(schema: FeatureSchema, direction: str = "lower") -> dict:
    features = []
    for f in schema.features:
        entry: dict = {"name": f.name, "kind": f.kind, "weight": f.weight}
        if f.observed_range is not None:
            entry["range"] = list(f.observed_range)
        features.append(entry)
    return {"features": features, "direction": direction}


def cohort_to_json(c: Cohort, direction: str = "lower") -> dict:
    return {
        "schema": feature_schema_to_json(c.schema, direction),
        "patients": [
            {
                "id": p.id,
                "features": list(p.features),
                "therapy": p.therapy,
                "outcome": p.outcome,
            }
            for p in c.patients
        ],
        "therapies": list(c.therapies),
    }


def cohort_from_json(obj: Mapping) -> tuple[Cohort, str]:
    schema, direction = parse_feature_schema(obj["schema"])
    patients = tuple(
        PatientRecord(
            id=p["id"],
            features=tuple(p["features"]),
            therapy=p["therapy"],
            outcome=float(p["outcome"]),
        )
        for p in obj["patients"]
    )
    cohort = Cohort(
        schema=schema, patients=patients, therapies=tuple(obj["therapies"])
    )
    return cohort, direction


def load_cohort(rs: RecordSet, schema: FeatureSchema) -> Cohort:
    """Build a cohort from parsed CSV rows (feature columns + therapy + outcome).

    Numeric features without a declared range get the observed data range.
    """
    cols = {name: i for i, name in enumerate(rs.column_names)}
    for required in ("therapy", "outcome"):
        if required not in cols:
            raise SchemaMismatch(f"cohort CSV lacks a {required!r} column")
    for spec in schema.features:
        if spec.name not in cols:
            raise SchemaMismatch(
                f"cohort CSV lacks feature column {spec.name!r}", feature=spec.name
            )
    known = set(schema.names()) | {"therapy", "outcome", "id"}
    for name in rs.column_names:
        if name not in known:
            raise SchemaMismatch(f"unexpected cohort column {name!r}", feature=name)

    patients = []
    for r, row in enumerate(rs.rows):
        values = []
        for spec in schema.features:
            raw = row[cols[spec.name]]
            if spec.kind == NUMERIC:
                try:
                    values.append(float(raw))
                except ValueError as exc:
                    raise SchemaMismatch(
                        f"row {r}: feature {spec.name!r} value {raw!r} is not numeric",
                        feature=spec.name,
                    ) from exc
            else:
                values.append(raw)
        try:
            outcome = float(row[cols["outcome"]])
        except ValueError as exc:
            raise SchemaMismatch(f"row {r}: outcome is not numeric") from exc
        patients.append(
            PatientRecord(
                id=row[cols["id"]] if "id" in cols else f"p{r}",
                features=tuple(values),
                therapy=row[cols["therapy"]],
                outcome=outcome,
            )
        )

    # fill missing numeric ranges from the data
    filled = []
    for fi, spec in enumerate(schema.features):
        if spec.kind == NUMERIC and spec.observed_range is None:
            values = [float(p.features[fi]) for p in patients]
            lo, hi = min(values), max(values)
            if not (hi > lo):
                raise DegenerateRange(
                    f"feature {spec.name!r} is constant in the data; drop it "
                    f"or declare a range",
                    feature=spec.name,
                )
            spec = FeatureSpec(
                name=spec.name, kind=spec.kind, weight=spec.weight,
                observed_range=(lo, hi),
            )
        filled.append(spec)

    therapies = tuple(sorted({p.therapy for p in patients}))
    return Cohort(
        schema=FeatureSchema(features=tuple(filled)),
        patients=tuple(patients),
        therapies=therapies,
    )
