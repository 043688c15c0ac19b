"""Comparison pricing policies: profit-based optimisation and behavioural replay.

Every policy exposes ``kind`` and ``predict(apps) -> APR``, so the evaluation
harness can treat the agent, the optimiser and the historical prices alike.
A response model is anything with ``accept_probability(apps, rates)``; that
covers the fitted estimators in :mod:`credit_pricer.response` and the
ground-truth :class:`~credit_pricer.market.TrueDemand`.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pandas as pd

from .exceptions import ValidationError
from .market import PRICE_BOUNDS
from .reward import RewardParams, profit_for_frame

__all__ = [
    "BehavioralPolicy",
    "OptPolicy",
    "behavioral_policy",
    "expected_reward_curve",
    "opt_policy",
    "optimize_price",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_CHUNK = 2048


def expected_reward_curve(apps: pd.DataFrame, model, rates, reward_params: RewardParams = RewardParams()):
    """``p(accept) * per-loan profit`` at ``rates`` of shape ``(n,)`` or ``(n, k)``."""
    return model.accept_probability(apps, rates) * profit_for_frame(apps, rates, reward_params)


def _optimize_block(apps, model, reward_params, lo, hi, step, golden_iter):
    n_grid = int(round((hi - lo) / step)) + 1
    grid = np.linspace(lo, hi, n_grid)
    values = expected_reward_curve(apps, model, np.broadcast_to(grid, (len(apps), n_grid)), reward_params)
    best_idx = np.argmax(values, axis=1)  # first maximum, i.e. the lowest rate on ties
    best = grid[best_idx]
    best_val = values[np.arange(len(apps)), best_idx]

    # golden-section search on the cell around the grid optimum
    a = np.maximum(best - step, lo)
    b = np.minimum(best + step, hi)
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = expected_reward_curve(apps, model, c, reward_params)
    fd = expected_reward_curve(apps, model, d, reward_params)
    for _ in range(golden_iter):
        left = fc >= fd  # ties keep the lower sub-interval
        a_new = np.where(left, a, c)
        b_new = np.where(left, d, b)
        fresh = np.where(left, b_new - _INV_PHI * (b_new - a_new), a_new + _INV_PHI * (b_new - a_new))
        f_fresh = expected_reward_curve(apps, model, fresh, reward_params)
        c, d, fc, fd = (
            np.where(left, fresh, d), np.where(left, c, fresh),
            np.where(left, f_fresh, fd), np.where(left, fc, f_fresh),
        )
        a, b = a_new, b_new
    refined = 0.5 * (a + b)
    refined_val = expected_reward_curve(apps, model, refined, reward_params)
    return np.where(refined_val > best_val, refined, best)


def optimize_price(apps, response_model, reward_params: RewardParams = RewardParams(),
                   bounds=PRICE_BOUNDS, step: float = 0.01, golden_iter: int = 40,
                   n_jobs: int = 1) -> np.ndarray:
    """Greedy expected-reward-maximising APR for each application.

    A dense grid with spacing ``step`` locates the global optimum cell; golden
    section then refines within one grid step either side, and the refined
    rate is kept only when strictly better.  Ties resolve to the lower rate.

    Parameters
    ----------
    apps : DataFrame or LoanApplication
    response_model : object with ``accept_probability(apps, rates)``
    bounds : (float, float)
        APR range searched, inclusive.
    n_jobs : int
        Threads used over row chunks; results do not depend on it.

    Returns
    -------
    ndarray of shape (n,), or a float for a single application.
    """
    from .market import LoanApplication

    single = isinstance(apps, LoanApplication)
    frame = apps.to_frame() if single else apps
    lo, hi = (float(b) for b in bounds)
    if not lo < hi:
        raise ValidationError("bounds must satisfy lower < upper")
    if step <= 0 or step > hi - lo:
        raise ValidationError("step must lie in (0, upper - lower]")
    if n_jobs < 1:
        raise ValidationError("n_jobs must be >= 1")
    starts = range(0, len(frame), _CHUNK)

    def run(start):
        block = frame.iloc[start : start + _CHUNK]
        return _optimize_block(block, response_model, reward_params, lo, hi, step, golden_iter)

    if n_jobs == 1 or len(starts) == 1:
        parts = [run(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            parts = list(pool.map(run, starts))
    prices = np.concatenate(parts) if parts else np.empty(0)
    return float(prices[0]) if single else prices


class OptPolicy:
    """Profit-based optimisation against a price-response model.

    ``kind`` is ``"opt-fdpe"`` when the model carries price interactions and
    ``"opt"`` otherwise.  Prices are cached for the last frame seen so repeated
    evaluation of the same test rows does not re-run the optimiser.
    """

    def __init__(self, response_model, reward_params: RewardParams = RewardParams(),
                 bounds=PRICE_BOUNDS, n_jobs: int = 1):
        self.response_model = response_model
        self.reward_params = reward_params
        self.bounds = tuple(bounds)
        self.n_jobs = n_jobs
        self._cache: dict = {}

    @property
    def kind(self) -> str:
        return "opt-fdpe" if getattr(self.response_model, "variant", None) == "fdpe" else "opt"

    def predict(self, apps: pd.DataFrame) -> np.ndarray:
        # the cached frame is kept alive, so an identity match cannot be stale
        if self._cache.get("frame") is not apps:
            prices = optimize_price(apps, self.response_model, self.reward_params, self.bounds,
                                    n_jobs=self.n_jobs)
            self._cache = {"frame": apps, "prices": prices}
        return self._cache["prices"].copy()

    def to_dict(self) -> dict:
        model = self.response_model
        return {"kind": self.kind, "bounds": list(self.bounds),
                "response_model": model.to_dict() if hasattr(model, "to_dict") else repr(model)}


class BehavioralPolicy:
    """Replays the logged ``offered_rate`` of each row."""

    kind = "behavioral"

    def predict(self, apps: pd.DataFrame) -> np.ndarray:
        if "offered_rate" not in apps:
            raise ValidationError("behavioral replay needs an 'offered_rate' column")
        return apps["offered_rate"].to_numpy(dtype=float).copy()

    def to_dict(self) -> dict:
        return {"kind": self.kind}


def _check_train_only(model) -> None:
    splits = getattr(model, "fit_splits_", ())
    if splits and tuple(splits) != ("train",):
        raise ValidationError(
            f"response model was fitted on splits {list(splits)}; the optimisation baseline "
            "must use a model fitted on the training split only"
        )


def opt_policy(dataset: pd.DataFrame, response_model, reward_params: RewardParams = RewardParams(),
               bounds=PRICE_BOUNDS, n_jobs: int = 1) -> OptPolicy:
    """Optimisation policy; rejects models fitted on anything but training rows.

    ``dataset`` is only inspected for its split tags: a fitted model must not
    have seen any of the rows being priced.
    """
    _check_train_only(response_model)
    if "split" in dataset and getattr(response_model, "fit_splits_", ()):
        priced = set(dataset["split"].unique())
        if priced & set(response_model.fit_splits_):
            raise ValidationError("response model was fitted on the rows it is asked to price")
    return OptPolicy(response_model, reward_params, bounds, n_jobs)


def behavioral_policy(dataset: pd.DataFrame | None = None) -> BehavioralPolicy:
    if dataset is not None and "offered_rate" not in dataset:
        raise ValidationError("behavioral replay needs an 'offered_rate' column")
    return BehavioralPolicy()
