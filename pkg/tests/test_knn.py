import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from watson import synth
from watson.errors import (
    DegenerateRange,
    EmptyNeighborList,
    NoEligibleTherapy,
    SchemaMismatch,
    UnknownTherapy,
)
from watson.ingest import parse_csv
from watson.knn import (
    Cohort,
    FeatureSchema,
    FeatureSpec,
    PatientRecord,
    cohort_from_json,
    cohort_to_json,
    distance,
    load_cohort,
    nearest_for_therapy,
    parse_feature_schema,
    patient_from_json,
    predict_outcome,
    recommend,
)

SCHEMA = FeatureSchema(
    features=(
        FeatureSpec("age", "numeric", 1.0, (20.0, 80.0)),
        FeatureSpec("sex", "categorical", 1.0),
    )
)


def patient(age, sex, therapy="T1", outcome=7.0, pid="p"):
    return PatientRecord(id=pid, features=(age, sex), therapy=therapy, outcome=outcome)


class TestDistance:
    def test_identical_is_zero(self):
        p = patient(50.0, "M")
        assert distance(p, p, SCHEMA) == 0.0

    def test_maximally_different_is_one(self):
        assert distance(patient(20.0, "M"), patient(80.0, "F"), SCHEMA) == 1.0

    def test_hand_evaluated_example(self):
        # (|50-65|/60 + 1) / 2 = 0.625
        assert distance(patient(50.0, "M"), patient(65.0, "F"), SCHEMA) == 0.625

    def test_numeric_clipped_to_one(self):
        schema = FeatureSchema(features=(FeatureSpec("x", "numeric", 1.0, (0.0, 1.0)),))
        a = PatientRecord("a", (0.0,), "t", 0.0)
        b = PatientRecord("b", (50.0,), "t", 0.0)
        assert distance(a, b, schema) == 1.0

    def test_weights(self):
        schema = FeatureSchema(
            features=(
                FeatureSpec("age", "numeric", 3.0, (0.0, 10.0)),
                FeatureSpec("sex", "categorical", 1.0),
            )
        )
        a = PatientRecord("a", (0.0, "M"), "t", 0.0)
        b = PatientRecord("b", (5.0, "F"), "t", 0.0)
        assert distance(a, b, schema) == pytest.approx((3 * 0.5 + 1 * 1) / 4)

    def test_schema_mismatch(self):
        bad = PatientRecord("b", (50.0,), "t", 0.0)
        with pytest.raises(SchemaMismatch):
            distance(patient(50.0, "M"), bad, SCHEMA)

    def test_degenerate_range_rejected(self):
        with pytest.raises(DegenerateRange):
            FeatureSpec("x", "numeric", 1.0, (1.0, 1.0))

    @given(
        st.floats(20, 80), st.floats(20, 80),
        st.sampled_from(["M", "F"]), st.sampled_from(["M", "F"]),
    )
    @settings(max_examples=60)
    def test_symmetric_bounded(self, a1, a2, s1, s2):
        p, q = patient(a1, s1), patient(a2, s2)
        d = distance(p, q, SCHEMA)
        assert d == distance(q, p, SCHEMA)
        assert 0.0 <= d <= 1.0

    def test_triangle_inequality_on_random_triples(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            ps = [
                patient(float(rng.uniform(20, 80)), rng.choice(["M", "F"]))
                for _ in range(3)
            ]
            d01 = distance(ps[0], ps[1], SCHEMA)
            d12 = distance(ps[1], ps[2], SCHEMA)
            d02 = distance(ps[0], ps[2], SCHEMA)
            assert d02 <= d01 + d12 + 1e-12


def small_cohort():
    patients = tuple(
        patient(age, sex, therapy, outcome, pid=f"p{i}")
        for i, (age, sex, therapy, outcome) in enumerate(
            [
                (30.0, "M", "T1", 6.0),
                (40.0, "F", "T1", 7.0),
                (52.0, "M", "T1", 8.0),
                (33.0, "M", "T2", 7.5),
                (61.0, "F", "T2", 6.5),
            ]
        )
    )
    return Cohort(schema=SCHEMA, patients=patients, therapies=("T1", "T2"))


class TestNearest:
    def test_single_recipient(self):
        c = small_cohort()
        got = nearest_for_therapy(c, "T2", patient(33.0, "M"), k=1)
        assert [p.id for p, _ in got] == ["p3"]

    def test_matches_full_sort(self):
        rng = np.random.default_rng(5)
        patients = tuple(
            patient(float(rng.uniform(20, 80)), str(rng.choice(["M", "F"])),
                    "T1", float(rng.normal(7, 1)), pid=f"p{i}")
            for i in range(10)
        )
        c = Cohort(schema=SCHEMA, patients=patients, therapies=("T1",))
        q = patient(47.0, "M")
        got = nearest_for_therapy(c, "T1", q, k=3)
        want = sorted(
            ((distance(q, p, SCHEMA), i) for i, p in enumerate(patients)),
        )[:3]
        assert [(d, c.patients.index(p)) for p, d in got] == [(d, i) for d, i in want]
        assert [d for _, d in got] == sorted(d for _, d in got)

    def test_k_larger_than_support(self):
        c = small_cohort()
        got = nearest_for_therapy(c, "T2", patient(40.0, "M"), k=10)
        assert len(got) == 2

    def test_distance_ties_break_by_cohort_order(self):
        patients = (
            patient(30.0, "M", "T1", 1.0, "first"),
            patient(30.0, "M", "T1", 2.0, "second"),
        )
        c = Cohort(schema=SCHEMA, patients=patients, therapies=("T1",))
        got = nearest_for_therapy(c, "T1", patient(30.0, "M"), k=1)
        assert got[0][0].id == "first"

    def test_unknown_therapy(self):
        with pytest.raises(UnknownTherapy):
            nearest_for_therapy(small_cohort(), "T9", patient(30.0, "M"), k=1)


class TestPredictOutcome:
    def test_single_neighbor_exact(self):
        assert predict_outcome([(patient(1, "M", outcome=7.25), 0.4)]) == 7.25

    def test_equal_distances_average(self):
        ns = [(patient(1, "M", outcome=6.0), 0.3), (patient(2, "M", outcome=8.0), 0.3)]
        assert predict_outcome(ns) == pytest.approx(7.0)

    def test_inverse_distance_weighting(self):
        ns = [(patient(1, "M", outcome=6.0), 0.0), (patient(2, "M", outcome=8.0), 1.0)]
        got = predict_outcome(ns)
        w0, w1 = 1 / 1e-6, 1 / (1 + 1e-6)
        want = (w0 * 6.0 + w1 * 8.0) / (w0 + w1)
        assert got == want
        assert got == pytest.approx(6.000002, abs=1e-6)

    def test_uniform_option(self):
        ns = [(patient(1, "M", outcome=6.0), 0.0), (patient(2, "M", outcome=8.0), 1.0)]
        assert predict_outcome(ns, uniform=True) == pytest.approx(7.0)

    def test_empty_errors(self):
        with pytest.raises(EmptyNeighborList):
            predict_outcome([])

    @given(st.lists(st.tuples(st.floats(4, 10), st.floats(0, 1)), min_size=1, max_size=8))
    @settings(max_examples=50)
    def test_convex_combination(self, pairs):
        ns = [(patient(1, "M", outcome=o), d) for o, d in pairs]
        got = predict_outcome(ns)
        outs = [o for o, _ in pairs]
        assert min(outs) - 1e-9 <= got <= max(outs) + 1e-9


class TestRecommend:
    def test_dominant_therapy_wins(self):
        patients = tuple(
            [patient(30.0 + i, "M", "T1", 5.0, f"a{i}") for i in range(5)]
            + [patient(30.0 + i, "M", "T2", 9.0, f"b{i}") for i in range(5)]
        )
        c = Cohort(schema=SCHEMA, patients=patients, therapies=("T1", "T2"))
        rec = recommend(c, patient(32.0, "M"), k=5, k_min=5, direction="lower")
        assert rec.best == "T1"
        rec_hi = recommend(c, patient(32.0, "M"), k=5, k_min=5, direction="higher")
        assert rec_hi.best == "T2"

    def test_thin_therapy_excluded(self):
        c = small_cohort()  # T2 has 2 recipients
        rec = recommend(c, patient(40.0, "M"), k=5, k_min=3, direction="lower")
        assert "T2" not in rec.per_therapy
        assert rec.best == "T1"

    def test_no_eligible_therapy(self):
        c = small_cohort()
        with pytest.raises(NoEligibleTherapy):
            recommend(c, patient(40.0, "M"), k=30, k_min=10)

    def test_used_k_and_support_reported(self):
        c = small_cohort()
        rec = recommend(c, patient(40.0, "M"), k=2, k_min=2)
        assert rec.per_therapy["T1"].support == 3
        assert rec.per_therapy["T1"].used_k == 2
        assert rec.per_therapy["T2"].used_k == 2

    def test_k1_with_exact_duplicates(self):
        base = small_cohort()
        q = patient(45.0, "F")
        dup_patients = base.patients + (
            PatientRecord("dup1", q.features, "T1", 6.125),
            PatientRecord("dup2", q.features, "T2", 5.5),
        )
        c = Cohort(schema=SCHEMA, patients=dup_patients, therapies=base.therapies)
        rec = recommend(c, q, k=1, k_min=1, direction="lower")
        assert rec.per_therapy["T1"].predicted_outcome == 6.125
        assert rec.per_therapy["T2"].predicted_outcome == 5.5
        assert rec.best == "T2"

    def test_feature_scale_invariance(self):
        rng = np.random.default_rng(7)
        schema1 = FeatureSchema(
            features=(
                FeatureSpec("x", "numeric", 1.0, (0.0, 10.0)),
                FeatureSpec("sex", "categorical", 1.0),
            )
        )
        schema100 = FeatureSchema(
            features=(
                FeatureSpec("x", "numeric", 1.0, (0.0, 1000.0)),
                FeatureSpec("sex", "categorical", 1.0),
            )
        )
        raws = [
            (float(rng.uniform(0, 10)), str(rng.choice(["M", "F"])),
             str(rng.choice(["T1", "T2"])), float(rng.normal(7, 1)))
            for _ in range(40)
        ]
        p1 = tuple(PatientRecord(f"p{i}", (x, s), t, o) for i, (x, s, t, o) in enumerate(raws))
        p100 = tuple(
            PatientRecord(f"p{i}", (x * 100, s), t, o) for i, (x, s, t, o) in enumerate(raws)
        )
        c1 = Cohort(schema=schema1, patients=p1, therapies=("T1", "T2"))
        c100 = Cohort(schema=schema100, patients=p100, therapies=("T1", "T2"))
        q1 = PatientRecord("q", (4.2, "M"), "", 0.0)
        q100 = PatientRecord("q", (420.0, "M"), "", 0.0)
        r1 = recommend(c1, q1, k=5, k_min=5)
        r100 = recommend(c100, q100, k=5, k_min=5)
        assert r1.best == r100.best
        for tid in r1.per_therapy:
            assert r1.per_therapy[tid].predicted_outcome == pytest.approx(
                r100.per_therapy[tid].predicted_outcome, abs=1e-9
            )


class TestCohortIO:
    def test_load_and_roundtrip(self):
        csv_text, schema_obj, _ = synth.synth_cohort(50, 3)
        schema, direction = parse_feature_schema(schema_obj)
        cohort = load_cohort(parse_csv(csv_text), schema)
        assert direction == "lower"
        assert len(cohort.patients) == 50
        again, direction2 = cohort_from_json(cohort_to_json(cohort, direction))
        assert again == cohort
        assert direction2 == "lower"

    def test_missing_feature_column(self):
        schema, _ = parse_feature_schema(synth.cohort_feature_schema())
        with pytest.raises(SchemaMismatch):
            load_cohort(parse_csv("age,therapy,outcome\n30,T1,7"), schema)

    def test_unexpected_column(self):
        schema = FeatureSchema(features=(FeatureSpec("age", "numeric", 1.0, (0.0, 99.0)),))
        with pytest.raises(SchemaMismatch):
            load_cohort(parse_csv("age,rogue,therapy,outcome\n30,x,T1,7"), schema)

    def test_range_filled_from_data(self):
        schema = FeatureSchema(features=(FeatureSpec("age", "numeric"),))
        cohort = load_cohort(
            parse_csv("age,therapy,outcome\n30,T1,7\n40,T1,6"), schema
        )
        assert cohort.schema.features[0].observed_range == (30.0, 40.0)

    def test_constant_feature_rejected(self):
        schema = FeatureSchema(features=(FeatureSpec("age", "numeric"),))
        with pytest.raises(DegenerateRange):
            load_cohort(parse_csv("age,therapy,outcome\n30,T1,7\n30,T1,6"), schema)

    def test_patient_from_json_missing_feature(self):
        schema, _ = parse_feature_schema(synth.cohort_feature_schema())
        with pytest.raises(SchemaMismatch) as err:
            patient_from_json({"features": {"age": 40}}, schema)
        assert "feature" in err.value.detail


def test_planted_recovery_small():
    csv_text, schema_obj, _ = synth.synth_cohort(600, 11)
    schema, direction = parse_feature_schema(schema_obj)
    cohort = load_cohort(parse_csv(csv_text), schema)
    queries = synth.sample_query_patients(60, 99)
    hits = 0
    for qd in queries:
        p = patient_from_json({"features": qd}, cohort.schema)
        rec = recommend(cohort, p, k=30, k_min=5, direction=direction)
        if rec.best == synth.true_best_therapy(qd["age"], qd["bmi"]):
            hits += 1
    assert hits >= 0.9 * len(queries)
