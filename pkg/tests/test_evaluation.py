import numpy as np
import pandas as pd
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credit_pricer.baselines import behavioral_policy, optimize_price
from credit_pricer.cql import CqlConfig
from credit_pricer.evaluation import (
    alpha_ablation,
    evaluate,
    mapd,
    optimal_prices,
    percent_of_optimal,
    reports_frame,
    sensitivity_sweep,
    summary_markdown,
    sweep_summary,
    write_reports_csv,
)
from credit_pricer.exceptions import ValidationError
from credit_pricer.response import LogisticResponse
from oracles import amortized_total


class ConstantResponse:
    def __init__(self, p):
        self.p = p

    def accept_probability(self, apps, rates):
        return np.full(np.shape(rates), self.p, dtype=float)


@pytest.fixture(scope="module")
def test_rows(small_data):
    return small_data[small_data.split == "test"]


# -- mapd -----------------------------------------------------------------------


def test_mapd_examples():
    assert mapd([5.0, 6.0], [4.0, 8.0]) == pytest.approx(0.25)
    assert mapd([3.0, 7.0], [3.0, 7.0]) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(2.5, 12.5), st.floats(2.5, 12.5)), min_size=1, max_size=30),
       st.randoms())
def test_mapd_row_order_invariant(pairs, rnd):
    a, b = map(np.array, zip(*pairs))
    perm = list(range(len(a)))
    rnd.shuffle(perm)
    assert mapd(a[perm], b[perm]) == pytest.approx(mapd(a, b), rel=1e-12)
    assert mapd(a, b) >= 0


def test_mapd_validation():
    with pytest.raises(ValidationError):
        mapd([1.0], [1.0, 2.0])
    with pytest.raises(ValidationError):
        mapd([1.0], [0.0])


# -- evaluate -------------------------------------------------------------------


def test_behavioral_under_truth_matches_closed_form(test_rows, small_truth):
    rep = evaluate(behavioral_policy(), test_rows, small_truth)
    profit = []
    for row in test_rows.itertuples():
        paid, _ = amortized_total(row.Amount, row.offered_rate, row.Term)
        cost, _ = amortized_total(row.Amount, row.PrimeRate, row.Term)
        profit.append((1 - row.PD) * (paid - cost) - row.PD * 0.5 * cost)
    expected = test_rows["_truth_p_accept"].to_numpy() * profit
    np.testing.assert_allclose(rep.per_row, expected, rtol=1e-9)
    assert rep.uplift == 0.0 and rep.mapd == 0.0


def test_zero_probability_evaluator(test_rows):
    rep = evaluate(np.full(len(test_rows), 9.0), test_rows, ConstantResponse(0.0))
    assert rep.cumulative_reward == 0.0


def test_cumulative_curve_is_prefix_sum(test_rows, small_truth):
    rep = evaluate(np.full(len(test_rows), 8.0), test_rows, small_truth)
    curve = rep.cumulative_curve
    running = 0.0
    for k, v in enumerate(rep.per_row):
        running += v
        assert curve[k] == pytest.approx(running, rel=1e-12)


def test_evaluation_is_pure(test_rows, small_truth, tmp_path):
    prices = np.linspace(3, 12, len(test_rows))
    for name in ("a", "b"):
        write_reports_csv([evaluate(prices, test_rows, small_truth, true_model=small_truth)], tmp_path / name)
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_wrong_length_prices_rejected(test_rows, small_truth):
    with pytest.raises(ValidationError):
        evaluate(np.ones(3), test_rows, small_truth)


# -- % of optimal ------------------------------------------------------------------


def test_optimal_policy_scores_one(test_rows, small_truth):
    best = optimize_price(test_rows, small_truth)
    assert percent_of_optimal(best, test_rows, small_truth) == pytest.approx(1.0, abs=1e-12)


def test_behavioral_between_zero_and_one(test_rows, small_truth):
    value = percent_of_optimal(behavioral_policy(), test_rows, small_truth)
    assert 0.0 < value < 1.0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_no_policy_beats_optimal(small_data, small_truth, seed):
    rows = small_data[small_data.split == "test"]
    prices = np.random.default_rng(seed).uniform(2.5, 12.5, len(rows))
    assert percent_of_optimal(prices, rows, small_truth) <= 1.0 + 1e-9


def test_dominance_spot_check(test_rows, small_truth):
    best = optimal_prices(test_rows, small_truth)
    one_off = best.copy()
    one_off[0] += 1.0
    more_off = one_off.copy()
    more_off[1:6] -= 1.0
    a = percent_of_optimal(one_off, test_rows, small_truth)
    b = percent_of_optimal(more_off, test_rows, small_truth)
    assert 1.0 >= a >= b


# -- sweep --------------------------------------------------------------------------


def test_sweep_of_one_equals_evaluate(test_rows, small_data):
    model = LogisticResponse().fit(small_data)
    prices = np.full(len(test_rows), 8.0)
    (swept,) = sensitivity_sweep(prices, test_rows, {"logistic": model})
    single = evaluate(prices, test_rows, model)
    np.testing.assert_array_equal(swept.per_row, single.per_row)
    assert swept.uplift == single.uplift


def test_duplicate_evaluator_keeps_extremes(test_rows, small_data, small_truth):
    models = {"logistic": LogisticResponse().fit(small_data), "truth": small_truth}
    prices = np.full(len(test_rows), 8.0)
    base = sweep_summary(sensitivity_sweep(prices, test_rows, models))
    dup = sweep_summary(sensitivity_sweep(prices, test_rows, {**models, "truth-again": small_truth}))
    assert dup["min_uplift"] == base["min_uplift"] and dup["max_uplift"] == base["max_uplift"]


def test_empty_sweep_rejected(test_rows):
    with pytest.raises(ValidationError):
        sensitivity_sweep(np.full(len(test_rows), 8.0), test_rows, {})


def test_report_outputs(test_rows, small_truth):
    reports = [evaluate(behavioral_policy(), test_rows, small_truth, true_model=small_truth, seed=s)
               for s in (1, 2)]
    frame = reports_frame(reports)
    assert len(frame) == 2 and (frame["mapd"] >= 0).all()
    text = summary_markdown(reports)
    assert "% of optimal" in text and "1,2" in text


# -- ablation ------------------------------------------------------------------------


def test_ablation_shape(small_data, small_truth):
    data = pd.concat([small_data[small_data.split == "train"].head(700),
                      small_data[small_data.split == "test"].head(100)])
    cfg = CqlConfig(hidden=(8, 8), batch_size=64, n_epochs=2)
    table, trace = alpha_ablation(data, [0.0, 1.0, 5.0], cfg, small_truth, seeds=(1, 2), n_rows=50)
    assert len(table) == 3 * 2
    assert len(trace) == 3 * 2 * 2
    assert list(table.columns) == ["alpha", "seed", "cumulative_reward", "mapd", "uplift"]
    assert set(table["alpha"]) == {0.0, 1.0, 5.0}


def test_ablation_rejects_negative_alpha(small_data, small_truth):
    with pytest.raises(ValidationError):
        alpha_ablation(small_data, [-1.0], CqlConfig(), small_truth)
