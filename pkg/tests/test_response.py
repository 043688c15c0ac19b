import numpy as np
import pandas as pd
import pytest
from scipy.special import expit

from credit_pricer.exceptions import ValidationError
from credit_pricer.features import BASE_TERMS
from credit_pricer.market import MarketConfig, simulate_market
from credit_pricer.response import (
    LogisticResponse,
    NeuralResponse,
    auc,
    auc_score,
    diagnostics,
    load_model,
    mcfadden_pseudo_r2,
    save_model,
)


def test_sign_of_single_feature():
    x = np.linspace(-2, 2, 200).reshape(-1, 1)
    y = (x[:, 0] > 0).astype(int)
    m = LogisticResponse(l2=0.1).fit(x, y)
    assert m.coef_[0] > 0


def test_intercept_only_closed_form():
    y = np.array([1] * 30 + [0] * 70)
    m = LogisticResponse().fit(np.zeros((100, 0)), y)
    assert m.intercept_ == pytest.approx(np.log(0.3 / 0.7), abs=1e-8)


def test_score_equations_at_convergence():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(2000, 3))
    y = (rng.random(2000) < expit(X @ [1.0, -0.5, 0.2])).astype(int)
    for lam in (0.0, 1.0):
        m = LogisticResponse(l2=lam).fit(X, y)
        p = m.predict_proba(X)[:, 1]
        Z = np.hstack([np.ones((2000, 1)), X])
        beta = np.concatenate([[m.intercept_], m.coef_])
        pen = np.full(4, lam)
        pen[0] = 0
        assert np.max(np.abs(Z.T @ (y - p) - pen * beta)) < 1e-6
        assert m.converged_


def test_l2_zero_equals_unpenalised():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(1000, 2))
    y = (rng.random(1000) < expit(X @ [0.5, -1.0])).astype(int)
    a = LogisticResponse().fit(X, y)
    b = LogisticResponse(l2=0.0, tol=1e-10).fit(X, y)
    np.testing.assert_allclose(a.coef_, b.coef_, atol=1e-6)


def test_ridge_shrinks():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(300, 2))
    y = (rng.random(300) < expit(X @ [2.0, -2.0])).astype(int)
    assert np.linalg.norm(LogisticResponse(l2=10).fit(X, y).coef_) < np.linalg.norm(LogisticResponse().fit(X, y).coef_)


def test_rank_deficient_and_bad_labels():
    X = np.ones((10, 1))
    y = np.array([0, 1] * 5)
    with pytest.raises(ValidationError):
        LogisticResponse().fit(X, y)
    with pytest.raises(ValidationError):
        LogisticResponse().fit(np.random.default_rng(0).normal(size=(10, 1)), np.zeros(10))


def _unit_model(rate=0.0, intercept=0.0, interactions=None):
    return LogisticResponse.from_coefficients(intercept, rate, {}, interactions)


def test_zero_coefficients_predict_half(small_data):
    p = _unit_model().accept_probability(small_data.head(20), 7.0)
    np.testing.assert_array_equal(p, 0.5)


def test_odds_ratio_per_rate_point(small_data):
    m = _unit_model(rate=-0.6599, intercept=0.3)
    apps = small_data.head(5)
    p5, p6 = m.accept_probability(apps, 5.0), m.accept_probability(apps, 6.0)
    ratio = (p6 / (1 - p6)) / (p5 / (1 - p5))
    np.testing.assert_allclose(ratio, np.exp(-0.6599), rtol=1e-12)
    assert np.exp(-0.6599) == pytest.approx(0.517, abs=5e-4)


def test_fdpe_zero_interactions_is_plain(small_data):
    base = {t: 0.1 * k for k, t in enumerate(BASE_TERMS)}
    plain = LogisticResponse.from_coefficients(-1.0, -0.66, base)
    fdpe = LogisticResponse.from_coefficients(-1.0, -0.66, base, {t: 0.0 for t in BASE_TERMS})
    rates = np.linspace(3, 12, len(small_data))
    np.testing.assert_allclose(plain.accept_probability(small_data, rates),
                               fdpe.accept_probability(small_data, rates), atol=1e-15)
    grid = np.tile(np.linspace(3, 12, 7), (len(small_data), 1))
    np.testing.assert_allclose(plain.accept_probability(small_data, grid),
                               fdpe.accept_probability(small_data, grid), atol=1e-15)


def test_fitted_model_decreasing_in_rate(small_data):
    m = LogisticResponse().fit(small_data[small_data.split == "train"])
    assert m.coef_[0] < 0
    p = m.accept_probability(small_data, np.tile(np.linspace(2.5, 12.5, 21), (len(small_data), 1)))
    assert np.all(np.diff(p, axis=1) < 0)


def test_frame_fit_records_splits(small_data):
    m = LogisticResponse().fit(small_data[small_data.split == "train"])
    assert m.fit_splits_ == ("train",)
    assert m.term_names_[0] == "rate"
    coefs = m.coefficients()
    assert set(coefs) == {"intercept", "rate", *BASE_TERMS}


def test_coefficient_recovery():
    data, truth = simulate_market(MarketConfig(n_applications=50_000, seed=333))
    m = LogisticResponse().fit(data)
    p = truth.params
    expected = np.array([p["intercept"] + truth.shift, p["rate"], *[p["base"][t] for t in BASE_TERMS]])
    got = np.array([m.intercept_, *m.coef_])
    assert np.max(np.abs(got - expected)) <= 0.05


def test_fdpe_fit_runs(small_data):
    m = LogisticResponse(variant="fdpe", l2=0.1).fit(small_data)
    assert len(m.coef_) == 1 + 2 * len(BASE_TERMS)
    assert m.name == "logistic-fdpe-l2-0.1"


def test_auc_examples():
    assert auc_score([0, 0, 1, 1], [0.1, 0.2, 0.8, 0.9]) == 1.0
    assert auc_score([0, 1, 0, 1], [0.3, 0.3, 0.3, 0.3]) == 0.5
    assert auc_score([0, 0, 1, 1], [0.1, 0.4, 0.35, 0.8]) == 0.75
    with pytest.raises(ValidationError):
        auc_score([1, 1], [0.2, 0.3])


def test_auc_matches_pair_enumeration():
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, 60)
    s = np.round(rng.random(60), 1)
    pos, neg = s[y == 1], s[y == 0]
    pairs = [(1.0 if a > b else 0.5 if a == b else 0.0) for a in pos for b in neg]
    assert auc_score(y, s) == pytest.approx(np.mean(pairs), abs=1e-12)


def test_pseudo_r2_limits():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(500, 1))
    y = rng.integers(0, 2, 500)
    null = LogisticResponse().fit(np.zeros((500, 0)), y)
    assert mcfadden_pseudo_r2(null, np.zeros((500, 0)), y) == pytest.approx(0.0, abs=1e-10)

    class Oracle:
        def __init__(self, eps):
            self.eps = eps

        def predict_proba(self, X):
            p = np.where(y == 1, 1 - self.eps, self.eps)
            return np.column_stack([1 - p, p])

    r2 = [mcfadden_pseudo_r2(Oracle(e), X, y) for e in (1e-2, 1e-4, 1e-8)]
    assert r2[0] < r2[1] < r2[2] and r2[2] > 0.99


def test_pseudo_r2_stable_across_seeds():
    values = []
    for seed in (333, 42, 3):
        data, _ = simulate_market(MarketConfig(seed=seed))
        train = data[data.split == "train"]
        values.append(mcfadden_pseudo_r2(LogisticResponse().fit(train), train))
    assert max(values) - min(values) < 0.02


def test_serialisation_round_trip(tmp_path, small_data):
    m = LogisticResponse(variant="fdpe", l2=1.0).fit(small_data[small_data.split == "train"])
    save_model(tmp_path / "m.json", m, {"train": diagnostics(m, small_data)})
    back = load_model(tmp_path / "m.json")
    np.testing.assert_array_equal(back.accept_probability(small_data, 8.0), m.accept_probability(small_data, 8.0))
    assert back.fit_splits_ == ("train",)


def test_neural_separable_toy():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(3000, 2))
    X = X[np.abs(X.sum(axis=1)) > 0.2]
    y = (X[:, 0] + X[:, 1] > 0).astype(int)
    m = NeuralResponse(hidden=(16,), epochs=200, learning_rate=1e-2, patience=20, random_state=0).fit(X, y)
    assert np.mean(m.predict(X) == y) >= 0.99


def test_neural_reproducible(small_data):
    a = NeuralResponse(hidden=(8,), epochs=3, random_state=5).fit(small_data)
    b = NeuralResponse(hidden=(8,), epochs=3, random_state=5).fit(small_data)
    np.testing.assert_array_equal(a.predict_proba(small_data), b.predict_proba(small_data))


def test_neural_round_trip_and_grid(tmp_path, small_data):
    m = NeuralResponse(hidden=(8,), epochs=2, random_state=1).fit(small_data)
    save_model(tmp_path / "n.json", m)
    back = load_model(tmp_path / "n.json")
    grid = np.tile([4.0, 8.0], (len(small_data), 1))
    out = back.accept_probability(small_data, grid)
    assert out.shape == (len(small_data), 2)
    np.testing.assert_array_equal(out[:, 1], m.accept_probability(small_data, np.full(len(small_data), 8.0)))


def test_neural_competitive_on_neural_market():
    data, _ = simulate_market(MarketConfig(demand_family="neural-net", seed=333))
    train, val = data[data.split == "train"], data[data.split != "train"]
    nn_auc = auc(NeuralResponse(random_state=0).fit(train), val)
    lr_auc = auc(LogisticResponse().fit(train), val)
    assert nn_auc >= lr_auc - 0.05


def test_unknown_kind(tmp_path):
    (tmp_path / "x.json").write_text('{"kind": "tree"}')
    with pytest.raises(ValidationError):
        load_model(tmp_path / "x.json")
    with pytest.raises(ValidationError):
        LogisticResponse(variant="fdpe").fit(np.ones((4, 1)), np.array([0, 1, 0, 1]))
    with pytest.raises(ValidationError):
        LogisticResponse(variant="bogus").fit(pd.DataFrame())
