import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conndecode import features, ingest
from conndecode.features import FeatureSelection, ThresholdSpec

from conftest import random_corr


def make_cohort(rng, n_subj=6, n_nodes=5, sheet_cols=None):
    ids = tuple(f"s{i}" for i in range(n_subj))
    ds = ingest.ConnectivityDataset(ids, tuple("ABCDE"[:n_nodes]),
                                    tuple(random_corr(rng, n_nodes) for _ in ids))
    cols = {"age": ingest.Column("age", "continuous", tuple(float(20 + i) for i in range(n_subj))),
            "iq": ingest.Column("iq", "continuous", tuple(float(100 + 3 * i) for i in range(n_subj))),
            "sex": ingest.Column("sex", "binary", tuple("mf"[i % 2] for i in range(n_subj)),
                                 ("m", "f"))}
    cols.update(sheet_cols or {})
    sheet = ingest.VariableSheet(ids, cols)
    return ingest.AlignedCohort(ids, ds, sheet, "age")


def test_edges_only(rng):
    dm = features.assemble_design_matrix(make_cohort(rng), FeatureSelection(edges=True))
    assert dm.p == 10
    assert dm.feature_names[0] == "edge_A_B" and dm.feature_names[-1] == "edge_D_E"
    assert set(dm.feature_kind) == {"edge"}
    c = make_cohort(rng)
    dm = features.assemble_design_matrix(c, FeatureSelection(edges=True))
    m = c.data.matrices[2]
    assert dm.X[2, 1] == m[0, 2]  # row-major upper triangle


def test_degree_plus_age(rng):
    dm = features.assemble_design_matrix(make_cohort(rng),
                                         FeatureSelection(graph_measures=("degree",),
                                                          additional=("age",)),
                                         ThresholdSpec("proportional", 0.5))
    assert dm.p == 6
    assert dm.feature_names[:2] == ("degree_A", "degree_B")
    assert dm.feature_kind[-1] == "additional"


def test_all_sources_with_nuisance(rng):
    sel = FeatureSelection(edges=True, graph_measures=("degree",), additional=("age", "iq"))
    dm = features.assemble_design_matrix(make_cohort(rng), sel, ThresholdSpec("proportional", 0.3),
                                         nuisance=("sex",))
    assert dm.p == 10 + 5 + 2 + 1
    assert dm.feature_kind[-1] == "nuisance"
    assert dm.columns(("nuisance",)) == [dm.p - 1]
    assert len(set(dm.feature_names)) == dm.p
    assert np.all(np.isfinite(dm.X))
    assert dm.meta["encodings"]["sex"] == {"m": -1, "f": 1}


def test_global_measures_named(rng):
    sel = FeatureSelection(graph_measures=("clustering", "global_efficiency"))
    dm = features.assemble_design_matrix(make_cohort(rng), sel, ThresholdSpec("proportional", 0.6))
    assert dm.feature_names[-1] == "global_efficiency"
    assert dm.p == 5 + 1


def test_missing_values_drop_subjects(rng):
    extra = {"bmi": ingest.Column("bmi", "continuous", (1.0, float("nan"), 3.0, 4.0, 5.0, 6.0))}
    dm = features.assemble_design_matrix(make_cohort(rng, sheet_cols=extra),
                                         FeatureSelection(edges=True, additional=("bmi",)))
    assert dm.subjects == ("s0", "s2", "s3", "s4", "s5")
    assert dm.dropped[0][0] == "s1"


def test_all_dropped(rng):
    extra = {"bmi": ingest.Column("bmi", "continuous", (float("nan"),) * 6)}
    with pytest.raises(ValueError, match="all subjects"):
        features.assemble_design_matrix(make_cohort(rng, sheet_cols=extra),
                                        FeatureSelection(additional=("bmi",)))


def test_empty_selection():
    with pytest.raises(ValueError):
        FeatureSelection()


def test_outcome_vector_encodings(rng):
    c = make_cohort(rng)
    y, enc = features.outcome_vector(c.sheet, "sex", c.subjects, "classification")
    np.testing.assert_array_equal(y, [-1, 1, -1, 1, -1, 1])
    assert enc == {"m": -1, "f": 1}
    with pytest.raises(ValueError, match="continuous"):
        features.outcome_vector(c.sheet, "age", c.subjects, "classification")
    with pytest.raises(ValueError, match="categorical"):
        features.outcome_vector(c.sheet, "sex", c.subjects, "regression")


def test_scaler_basic():
    s = features.fit_scaler(np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))
    assert s.means[0] == 2 and s.stds[0] == 1
    assert s.constant_mask.tolist() == [False, True]
    out = features.apply_scaler(s, np.array([[4.0, 17.0]]))
    assert out.tolist() == [[2.0, 0.0]]


def test_scaler_columns_independent():
    X = np.array([[1.0, 10.0], [2.0, 30.0], [3.0, 50.0]])
    s = features.fit_scaler(X)
    np.testing.assert_allclose(features.apply_scaler(s, X), [[-1, -1], [0, 0], [1, 1]])


def test_scaler_errors():
    with pytest.raises(ValueError):
        features.fit_scaler(np.ones((1, 3)))
    s = features.fit_scaler(np.random.default_rng(0).random((4, 3)))
    with pytest.raises(ValueError, match="columns"):
        features.apply_scaler(s, np.ones((2, 2)))


def test_scaled_training_moments(rng):
    X = rng.normal(3, 7, size=(25, 6))
    Z = features.apply_scaler(features.fit_scaler(X), X)
    assert np.all(np.abs(Z.mean(axis=0)) < 1e-10)
    assert np.all(np.abs(Z.std(axis=0, ddof=1) - 1) < 1e-10)


def test_scaling_uses_only_training_rows(rng):
    X = rng.random((20, 4))
    train, test = X[:15], X[15:]
    s = features.fit_scaler(train)
    out = features.apply_scaler(s, test)
    perm = [3, 1, 4, 0, 2]
    np.testing.assert_array_equal(features.apply_scaler(s, test[perm]), out[perm])
    dup = np.vstack([test, test])
    np.testing.assert_array_equal(features.apply_scaler(s, dup)[:5], out)


def test_rank_features_cases(rng):
    y = np.where(rng.random(200) > 0.5, 1.0, -1.0)
    X = np.column_stack([rng.standard_normal(200), y, -y, np.ones(200)])
    r = features.rank_features(X, y)
    assert r.scores[1] == pytest.approx(1.0) and r.scores[2] == pytest.approx(1.0)
    assert r.order[0] == 1 and r.order[1] == 2  # tie broken by index
    assert r.scores[0] < 0.2
    assert r.scores[3] == 0.0
    assert sorted(r.order) == list(range(4))
    with pytest.raises(ValueError, match="constant"):
        features.rank_features(X, np.ones(200))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 100), st.floats(-50, 50))
def test_rank_affine_invariance(seed, scale, shift):
    r = np.random.default_rng(seed)
    X = r.standard_normal((30, 6))
    y = r.standard_normal(30)
    base = features.rank_features(X, y, "regression")
    X2 = X.copy()
    X2[:, 2] = scale * X2[:, 2] + shift
    other = features.rank_features(X2, y, "regression")
    np.testing.assert_allclose(other.scores, base.scores, atol=1e-12)
    gaps = np.diff(np.sort(base.scores))
    if gaps.min() > 1e-9:
        np.testing.assert_array_equal(other.order, base.order)


def _ranking(p):
    return features.FeatureRanking(np.linspace(1, 0, p), np.arange(p))


@pytest.mark.parametrize("p, t, k", [(10, 0.3, 3), (10, 1.0, 10), (7, 0.5, 4)])
def test_select_top_fraction(p, t, k):
    assert len(features.select_top_fraction(_ranking(p), t)) == k


def test_select_fraction_bounds():
    for t in (0.0, 1.2, -1):
        with pytest.raises(ValueError):
            features.select_top_fraction(_ranking(5), t)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.floats(0.01, 1.0), st.floats(0.01, 1.0))
def test_select_nested(p, t1, t2):
    t1, t2 = sorted((t1, t2))
    r = features.FeatureRanking(np.zeros(p), np.random.default_rng(p).permutation(p))
    assert set(features.select_top_fraction(r, t1)) <= set(features.select_top_fraction(r, t2))
