"""Model-based offline policy evaluation.

A policy is scored on held-out rows by pricing each application and taking
the evaluator's ``p(accept)`` times the per-loan profit.  The evaluator is
either the generator's ground truth or a fitted response model; the spread of
results across several fitted evaluators is the sensitivity sweep.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from .baselines import expected_reward_curve, optimize_price
from .cql import CqlConfig, CQLPricer
from .exceptions import ValidationError
from .reward import RewardParams
from .response import LogisticResponse, NeuralResponse

__all__ = [
    "EvalReport",
    "alpha_ablation",
    "default_evaluators",
    "evaluate",
    "mapd",
    "optimal_prices",
    "percent_of_optimal",
    "reports_frame",
    "sensitivity_sweep",
    "summary_markdown",
    "sweep_summary",
    "write_reports_csv",
]

REPORT_COLUMNS = ("policy", "evaluator", "seed", "n_rows", "cumulative_reward", "mean_price",
                  "mapd", "uplift", "percent_of_optimal")


@dataclass
class EvalReport:
    """Result of scoring one policy under one evaluator."""

    policy: str
    evaluator: str
    prices: np.ndarray
    per_row: np.ndarray
    mapd: float
    uplift: float
    percent_of_optimal: float | None = None
    seed: int | None = None

    @property
    def cumulative_reward(self) -> float:
        return float(self.per_row.sum())

    @property
    def cumulative_curve(self) -> np.ndarray:
        return np.cumsum(self.per_row)

    @property
    def mean_price(self) -> float:
        return float(self.prices.mean())

    def row(self) -> dict:
        return {
            "policy": self.policy,
            "evaluator": self.evaluator,
            "seed": "" if self.seed is None else self.seed,
            "n_rows": len(self.per_row),
            "cumulative_reward": self.cumulative_reward,
            "mean_price": self.mean_price,
            "mapd": self.mapd,
            "uplift": self.uplift,
            "percent_of_optimal": "" if self.percent_of_optimal is None else self.percent_of_optimal,
        }


def _name(obj, fallback: str) -> str:
    return str(getattr(obj, "name", None) or getattr(obj, "kind", None) or fallback)


def _prices(policy, rows: pd.DataFrame) -> np.ndarray:
    prices = policy.predict(rows) if hasattr(policy, "predict") else np.asarray(policy, dtype=float)
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (len(rows),):
        raise ValidationError("policy must return one price per row")
    return prices


def mapd(prices, behavioral) -> float:
    """Mean absolute percentage deviation ``mean(|a - a_beta| / a_beta)``."""
    prices = np.asarray(prices, dtype=float)
    behavioral = np.asarray(behavioral, dtype=float)
    if prices.shape != behavioral.shape or prices.ndim != 1 or len(prices) == 0:
        raise ValidationError("price vectors must be 1-D, non-empty and equally long")
    if np.any(behavioral <= 0):
        raise ValidationError("behavioral prices must be positive")
    return float(np.mean(np.abs(prices - behavioral) / behavioral))


# optimal prices keyed by (model identity, row content); the model object is
# stored alongside so a recycled id() can never return stale prices
_OPTIMAL_CACHE: dict = {}
_CACHE_SIZE = 16


def _rows_key(rows: pd.DataFrame) -> str:
    digest = hashlib.sha256(pd.util.hash_pandas_object(rows, index=True).to_numpy().tobytes())
    return digest.hexdigest()


def optimal_prices(rows: pd.DataFrame, true_model, reward_params: RewardParams = RewardParams(),
                   n_jobs: int = 1) -> np.ndarray:
    """Per-row optimiser output under ``true_model``; cached."""
    key = (id(true_model), _rows_key(rows), reward_params)
    hit = _OPTIMAL_CACHE.get(key)
    if hit is not None and hit[0] is true_model:
        return hit[1].copy()
    prices = optimize_price(rows, true_model, reward_params, n_jobs=n_jobs)
    if len(_OPTIMAL_CACHE) >= _CACHE_SIZE:
        _OPTIMAL_CACHE.pop(next(iter(_OPTIMAL_CACHE)))
    _OPTIMAL_CACHE[key] = (true_model, prices)
    return prices.copy()


def evaluate(policy, rows: pd.DataFrame, evaluator, reward_params: RewardParams = RewardParams(),
             true_model=None, policy_id: str | None = None, evaluator_id: str | None = None,
             seed: int | None = None) -> EvalReport:
    """Score ``policy`` on ``rows`` under ``evaluator``.

    ``policy`` is anything with ``predict(rows)`` or an array of prices.
    Uplift and MAPD are measured against the logged ``offered_rate``.  When
    ``true_model`` is given the report also carries % of optimal return
    (always computed under ``true_model``, whatever the evaluator).
    """
    if "offered_rate" not in rows:
        raise ValidationError("evaluation rows need the logged 'offered_rate'")
    prices = _prices(policy, rows)
    behavioral = rows["offered_rate"].to_numpy(dtype=float)
    per_row = expected_reward_curve(rows, evaluator, prices, reward_params)
    base = float(expected_reward_curve(rows, evaluator, behavioral, reward_params).sum())
    uplift = (float(per_row.sum()) - base) / base if base != 0 else float("nan")
    pct = None
    if true_model is not None:
        pct = percent_of_optimal(prices, rows, true_model, reward_params)
    return EvalReport(
        policy=policy_id or _name(policy, "policy"),
        evaluator=evaluator_id or _name(evaluator, "evaluator"),
        prices=prices,
        per_row=per_row,
        mapd=mapd(prices, behavioral),
        uplift=uplift,
        percent_of_optimal=pct,
        seed=seed,
    )


def percent_of_optimal(policy, rows: pd.DataFrame, true_model,
                       reward_params: RewardParams = RewardParams(), n_jobs: int = 1) -> float:
    """Policy return over the optimiser's return, both under ``true_model``."""
    prices = _prices(policy, rows)
    best = optimal_prices(rows, true_model, reward_params, n_jobs)
    num = expected_reward_curve(rows, true_model, prices, reward_params).sum()
    den = expected_reward_curve(rows, true_model, best, reward_params).sum()
    if den <= 0:
        raise ValidationError("optimal return is not positive; % of optimal is undefined")
    return float(num / den)


# ---------------------------------------------------------------------------
# sensitivity sweep
# ---------------------------------------------------------------------------


def default_evaluators(data: pd.DataFrame, seed: int = 0) -> dict:
    """The five alternative evaluators, each fitted on every row of ``data``."""
    return {
        "logistic": LogisticResponse().fit(data),
        "logistic-l2-0.1": LogisticResponse(l2=0.1).fit(data),
        "logistic-l2-1": LogisticResponse(l2=1.0).fit(data),
        "logistic-fdpe": LogisticResponse(variant="fdpe").fit(data),
        "neural": NeuralResponse(random_state=seed).fit(data),
    }


def sensitivity_sweep(policy, rows: pd.DataFrame, evaluators: dict,
                      reward_params: RewardParams = RewardParams(), policy_id: str | None = None,
                      seed: int | None = None) -> list[EvalReport]:
    """One report per evaluator, in the mapping's order."""
    if not evaluators:
        raise ValidationError("need at least one evaluator")
    prices = _prices(policy, rows)
    pid = policy_id or _name(policy, "policy")
    return [evaluate(prices, rows, model, reward_params, policy_id=pid, evaluator_id=name, seed=seed)
            for name, model in evaluators.items()]


def sweep_summary(reports: list[EvalReport]) -> dict:
    uplifts = np.array([r.uplift for r in reports])
    return {"min_uplift": float(uplifts.min()), "mean_uplift": float(uplifts.mean()),
            "max_uplift": float(uplifts.max()), "range": float(uplifts.max() - uplifts.min())}


# ---------------------------------------------------------------------------
# alpha ablation
# ---------------------------------------------------------------------------


def alpha_ablation(dataset: pd.DataFrame, alphas, config: CqlConfig, eval_model,
                   seeds=(333, 42, 3), n_rows: int = 10_000,
                   reward_params: RewardParams = RewardParams()):
    """Train one agent per ``(alpha, seed)`` with alpha held fixed.

    Agents train on the ``train`` rows and are scored after every epoch on
    the first ``n_rows`` test rows under ``eval_model``.

    Returns
    -------
    table : DataFrame
        One row per ``(alpha, seed)`` with the final cumulative reward, MAPD
        and uplift.
    trace : DataFrame
        The same metrics after every epoch.
    """
    alphas = [float(a) for a in alphas]
    if not alphas or min(alphas) < 0:
        raise ValidationError("alphas must be a non-empty list of non-negative values")
    train = dataset[dataset["split"] == "train"]
    test = dataset[dataset["split"] == "test"].iloc[:n_rows]
    if train.empty or test.empty:
        raise ValidationError("dataset needs non-empty train and test splits")
    trace = []

    for alpha in alphas:
        for seed in seeds:
            def record(epoch, pricer, alpha=alpha, seed=seed):
                rep = evaluate(pricer, test, eval_model, reward_params)
                trace.append({"alpha": alpha, "seed": seed, "epoch": epoch,
                              "cumulative_reward": rep.cumulative_reward, "mapd": rep.mapd,
                              "uplift": rep.uplift})

            cfg = replace(config, fixed_alpha=alpha, seed=int(seed))
            CQLPricer(cfg).fit(train, epoch_callback=record)
    trace = pd.DataFrame(trace, columns=["alpha", "seed", "epoch", "cumulative_reward", "mapd", "uplift"])
    last = trace.groupby(["alpha", "seed"], sort=False).tail(1)
    table = last.drop(columns="epoch").reset_index(drop=True)
    return table, trace.reset_index(drop=True)


# ---------------------------------------------------------------------------
# report output
# ---------------------------------------------------------------------------


def reports_frame(reports: list[EvalReport]) -> pd.DataFrame:
    return pd.DataFrame([r.row() for r in reports], columns=list(REPORT_COLUMNS))


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) else str(value)


def write_reports_csv(reports: list[EvalReport], path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for r in reports:
        row = r.row()
        writer.writerow([_fmt(row[c]) for c in REPORT_COLUMNS])
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())


def summary_markdown(reports: list[EvalReport], title: str = "Policy evaluation") -> str:
    """Markdown table: one line per (policy, evaluator), averaged over seeds."""
    frame = reports_frame(reports)
    frame["seed"] = frame["seed"].astype(str)
    frame["percent_of_optimal"] = pd.to_numeric(frame["percent_of_optimal"], errors="coerce")
    lines = [f"# {title}", "",
             "| Policy | Evaluator | Seeds | Cumulative reward | Uplift | MAPD | % of optimal |",
             "|---|---|---|---:|---:|---:|---:|"]
    for (policy, evaluator), g in frame.groupby(["policy", "evaluator"], sort=False):
        seeds = ",".join(s for s in g["seed"] if s) or "-"
        pct = g["percent_of_optimal"].mean()
        pct_s = "-" if np.isnan(pct) else f"{100 * pct:.1f}%"
        lines.append(
            f"| {policy} | {evaluator} | {seeds} | {g['cumulative_reward'].mean():,.0f} | "
            f"{100 * g['uplift'].mean():.1f}% | {100 * g['mapd'].mean():.1f}% | {pct_s} |"
        )
    return "\n".join(lines) + "\n"
