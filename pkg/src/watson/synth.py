"""Seeded synthetic data with planted, documented structure.

Two generators: a survey (categorical records with a planted composition
gradient across departments plus demographic associations) and a treatment
cohort (mixed features, four therapies, a known best-therapy rule).  Both
are deterministic given (size, seed) so tests and benchmarks can pin
byte-identical fixtures, and both return a truth object describing what was
planted.
"""

from __future__ import annotations

import io

import numpy as np

SURVEY_COLUMNS = (
    "state", "sex", "age_group", "residence", "education", "department",
    "choice_rank",
)

_STATES = (
    "Lagos", "Kano", "Rivers", "Kaduna", "Oyo", "Enugu",
    "Delta", "Benue", "Ogun", "Imo", "Cross River", "Abuja",
)
_STATE_W = (0.16, 0.14, 0.12, 0.11, 0.10, 0.09, 0.08, 0.07, 0.05, 0.04, 0.025, 0.015)

_AGE_GROUPS = ("15-19", "20-24", "25-29", "30-34", "35-44")
_AGE_W = (0.22, 0.30, 0.21, 0.15, 0.12)

_EDUCATION = ("None", "Primary", "Secondary", "Tertiary")

_DEPARTMENTS = (
    "Agriculture", "Arts", "Education", "Engineering",
    "Law", "Medicine", "Science", "Social Science",
)
# hidden selectivity drives the planted rank-composition gradient
_SELECTIVITY = {
    "Education": 0.05,
    "Agriculture": 0.18,
    "Arts": 0.31,
    "Social Science": 0.44,
    "Science": 0.57,
    "Engineering": 0.70,
    "Law": 0.83,
    "Medicine": 0.96,
}
_DEPT_W = (0.10, 0.13, 0.16, 0.12, 0.09, 0.08, 0.18, 0.14)

_RANKS = ("first", "second", "third", "higher")
_RANK_SCORES = {"first": 1.0, "second": 2.0, "third": 3.0, "higher": 4.0}

_MISSING_EDUCATION_RATE = 0.01


def _rank_probs(selectivity: float) -> np.ndarray:
    p_first = 0.70 - 0.55 * selectivity
    p_higher = 0.05 + 0.45 * selectivity
    rem = 1.0 - p_first - p_higher
    return np.array([p_first, 0.6 * rem, 0.4 * rem, p_higher])


def synth_survey(size: int = 30000, seed: int = 7) -> tuple[str, dict, dict]:
    """Generate (csv_text, codebook, truth) for the survey fixture."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(seed)

    state_idx = rng.choice(len(_STATES), size=size, p=_STATE_W)
    sex_idx = rng.choice(2, size=size, p=(0.52, 0.48))
    age_idx = rng.choice(len(_AGE_GROUPS), size=size, p=_AGE_W)

    # urban share varies by state so state x residence carries association
    urban_share = np.linspace(0.75, 0.25, len(_STATES))
    residence_idx = (rng.random(size) < urban_share[state_idx]).astype(int)  # 1=Urban

    # education depends on residence (urban skews higher)
    edu_urban = np.array([0.04, 0.16, 0.45, 0.35])
    edu_rural = np.array([0.15, 0.33, 0.40, 0.12])
    edu_cum = np.vstack([np.cumsum(edu_rural), np.cumsum(edu_urban)])
    edu_idx = (rng.random(size)[:, None] > edu_cum[residence_idx]).sum(axis=1)

    dept_idx = rng.choice(len(_DEPARTMENTS), size=size, p=_DEPT_W)
    rank_cum = np.vstack(
        [np.cumsum(_rank_probs(_SELECTIVITY[d])) for d in _DEPARTMENTS]
    )
    rank_idx = (rng.random(size)[:, None] > rank_cum[dept_idx]).sum(axis=1)

    edu_missing = rng.random(size) < _MISSING_EDUCATION_RATE

    buf = io.StringIO()
    buf.write(",".join(SURVEY_COLUMNS) + "\n")
    for i in range(size):
        edu = "" if edu_missing[i] else _EDUCATION[edu_idx[i]]
        buf.write(
            f"{_STATES[state_idx[i]]},{'Female' if sex_idx[i] == 0 else 'Male'},"
            f"{_AGE_GROUPS[age_idx[i]]},{'Urban' if residence_idx[i] else 'Rural'},"
            f"{edu},{_DEPARTMENTS[dept_idx[i]]},{_RANKS[rank_idx[i]]}\n"
        )

    codebook = _survey_codebook(
        observed_ranks=[_RANKS[i] for i in sorted(set(rank_idx.tolist()))],
        observed_ages=[_AGE_GROUPS[i] for i in sorted(set(age_idx.tolist()))],
    )
    truth = {
        "kind": "survey",
        "size": size,
        "seed": seed,
        "gradient": {
            "bar_var": "department",
            "color_var": "choice_rank",
            "hidden_order": sorted(_DEPARTMENTS, key=lambda d: _SELECTIVITY[d]),
            "selectivity": dict(sorted(_SELECTIVITY.items(), key=lambda kv: kv[1])),
        },
        "associations": [
            "urban share decreases linearly across states",
            "education skews higher in urban residences",
            "choice_rank composition shifts monotonically with department selectivity",
        ],
    }
    return buf.getvalue(), codebook, truth


def _survey_codebook(observed_ranks: list[str], observed_ages: list[str]) -> dict:
    ranks = [r for r in _RANKS if r in observed_ranks]
    codebook: dict = {}
    if ranks:
        codebook["choice_rank"] = {
            "order": ranks,
            "scores": [_RANK_SCORES[r] for r in ranks],
        }
    ages = [a for a in _AGE_GROUPS if a in observed_ages]
    if ages:
        codebook["age_group"] = {"order": ages}
    return codebook


# --- cohort -----------------------------------------------------------------

COHORT_THERAPIES = ("T1", "T2", "T3", "T4")
COHORT_FEATURES = ("age", "bmi", "sex", "smoker", "sys_bp")
_AGE_RANGE = (20.0, 80.0)
_BMI_RANGE = (16.0, 40.0)
_BP_RANGE = (100.0, 180.0)
_AGE_SPLIT = 50.0
_BMI_SPLIT = 28.0
_WRONG_THERAPY_PENALTY = 2.0
_OUTCOME_NOISE = 0.2


def true_best_therapy(age: float, bmi: float) -> str:
    """The planted best-therapy rule (quadrants in the age x bmi plane)."""
    if age < _AGE_SPLIT:
        return "T1" if bmi < _BMI_SPLIT else "T2"
    return "T3" if bmi < _BMI_SPLIT else "T4"


def cohort_feature_schema() -> dict:
    return {
        "features": [
            {"name": "age", "kind": "numeric", "weight": 3.0, "range": list(_AGE_RANGE)},
            {"name": "bmi", "kind": "numeric", "weight": 3.0, "range": list(_BMI_RANGE)},
            {"name": "sex", "kind": "categorical", "weight": 0.5},
            {"name": "smoker", "kind": "categorical", "weight": 0.5},
            {"name": "sys_bp", "kind": "numeric", "weight": 1.0, "range": list(_BP_RANGE)},
        ],
        "direction": "lower",
    }


def _draw_features(rng: np.random.Generator, n: int) -> dict[str, np.ndarray]:
    return {
        "age": rng.uniform(*_AGE_RANGE, size=n),
        "bmi": rng.uniform(*_BMI_RANGE, size=n),
        "sex": rng.choice(("F", "M"), size=n),
        "smoker": rng.choice(("no", "yes"), size=n, p=(0.7, 0.3)),
        "sys_bp": rng.uniform(*_BP_RANGE, size=n),
    }


def synth_cohort(size: int = 1000, seed: int = 11) -> tuple[str, dict, dict]:
    """Generate (csv_text, feature_schema, truth) for the cohort fixture."""
    if size < 1:
        raise ValueError("size must be >= 1")
    rng = np.random.default_rng(seed)
    f = _draw_features(rng, size)
    assigned = rng.choice(COHORT_THERAPIES, size=size)
    noise = rng.normal(0.0, _OUTCOME_NOISE, size=size)

    buf = io.StringIO()
    buf.write("id," + ",".join(COHORT_FEATURES) + ",therapy,outcome\n")
    for i in range(size):
        best = true_best_therapy(f["age"][i], f["bmi"][i])
        base = (
            6.0
            + 0.004 * (f["age"][i] - _AGE_RANGE[0])
            + (0.2 if f["smoker"][i] == "yes" else 0.0)
        )
        outcome = base + (_WRONG_THERAPY_PENALTY if assigned[i] != best else 0.0) + noise[i]
        buf.write(
            f"p{i:05d},{f['age'][i]:.3f},{f['bmi'][i]:.3f},{f['sex'][i]},"
            f"{f['smoker'][i]},{f['sys_bp'][i]:.3f},{assigned[i]},{outcome:.4f}\n"
        )

    truth = {
        "kind": "cohort",
        "size": size,
        "seed": seed,
        "therapies": list(COHORT_THERAPIES),
        "rule": {
            "age_split": _AGE_SPLIT,
            "bmi_split": _BMI_SPLIT,
            "map": {
                "age<50,bmi<28": "T1",
                "age<50,bmi>=28": "T2",
                "age>=50,bmi<28": "T3",
                "age>=50,bmi>=28": "T4",
            },
        },
        "outcome_model": {
            "base": "6.0 + 0.004*(age-20) + 0.2*[smoker]",
            "wrong_therapy_penalty": _WRONG_THERAPY_PENALTY,
            "noise_sd": _OUTCOME_NOISE,
            "direction": "lower",
        },
        "query_margin": {
            "age": _QUERY_AGE_MARGIN,
            "bmi": _QUERY_BMI_MARGIN,
            "note": "held-out query patients avoid a thin band around the "
                    "splits where the true argmin is ill-defined",
        },
    }
    return buf.getvalue(), cohort_feature_schema(), truth


_QUERY_AGE_MARGIN = 2.5
_QUERY_BMI_MARGIN = 1.2


def sample_query_patients(n: int, seed: int) -> list[dict]:
    """Held-out query patients drawn from the cohort feature distributions.

    Patients landing inside a thin band around the planted decision splits
    are rejected and redrawn: on the split itself the true best therapy is
    ill-defined, so recovery there would measure coin flips, not the method.
    """
    rng = np.random.default_rng(seed)
    out: list[dict] = []
    while len(out) < n:
        f = _draw_features(rng, 1)
        age, bmi = float(f["age"][0]), float(f["bmi"][0])
        if abs(age - _AGE_SPLIT) < _QUERY_AGE_MARGIN:
            continue
        if abs(bmi - _BMI_SPLIT) < _QUERY_BMI_MARGIN:
            continue
        out.append(
            {
                "age": age,
                "bmi": bmi,
                "sex": str(f["sex"][0]),
                "smoker": str(f["smoker"][0]),
                "sys_bp": float(f["sys_bp"][0]),
            }
        )
    return out
