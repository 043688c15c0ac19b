"""Expected-profit reward for a quoted loan rate.

Rates are annual percentages (``6.0`` means 6% APR) and amounts are dollars
at every public entry point.  All functions broadcast over numpy arrays, so a
column of applications can be priced against a grid of candidate rates with
``rates[:, None]``-style shapes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pandas as pd

from ._validation import check_finite
from .exceptions import ValidationError

__all__ = [
    "RewardParams",
    "capital_cost",
    "expected_reward",
    "per_loan_profit",
    "profit_for_frame",
    "realized_reward",
    "total_payment",
]


@dataclass(frozen=True)
class RewardParams:
    lgd: float = 0.5
    payment_frequency: int = 12

    def __post_init__(self):
        if not 0.0 <= self.lgd <= 1.0:
            raise ValidationError("lgd must lie in [0, 1]")
        if int(self.payment_frequency) != self.payment_frequency or self.payment_frequency < 1:
            raise ValidationError("payment_frequency must be an integer >= 1")


def total_payment(amount, apr, term, freq: int = 12):
    """Undiscounted sum of the level payments of a fully amortising loan.

    ``term`` counts payment periods; the periodic rate is ``apr / 100 / freq``.
    A zero rate returns the principal exactly.
    """
    amount = check_finite(amount, "amount")
    apr = check_finite(apr, "apr")
    term = check_finite(term, "term")
    if np.any(amount <= 0) or np.any(term < 1) or np.any(apr < 0):
        raise ValidationError("need amount > 0, term >= 1 and apr >= 0")
    r = apr / 100.0 / freq
    safe_r = np.where(r > 0, r, 1.0)
    # 1 - (1 + r)^-n without cancellation for small r
    annuity = -np.expm1(-term * np.log1p(safe_r))
    payment = np.where(r > 0, amount * safe_r / annuity, amount / term)
    out = payment * term
    return out if out.ndim else float(out)


def capital_cost(amount, prime_rate, term, freq: int = 12):
    """Same annuity sum as :func:`total_payment`, funded at the prime rate."""
    return total_payment(amount, prime_rate, term, freq)


def per_loan_profit(amount, term, pd_, prime_rate, apr, params: RewardParams = RewardParams()):
    """Expected profit of a booked loan, before the acceptance probability.

    ``(1 - PD) * (TotalPayment - CapitalCost) - PD * LGD * CapitalCost``
    """
    pd_ = check_finite(pd_, "pd")
    if np.any((pd_ < 0) | (pd_ > 1)):
        raise ValidationError("pd must lie in [0, 1]")
    freq = params.payment_frequency
    paid = total_payment(amount, apr, term, freq)
    cost = capital_cost(amount, prime_rate, term, freq)
    out = (1.0 - pd_) * (paid - cost) - pd_ * params.lgd * cost
    return out if np.ndim(out) else float(out)


def expected_reward(profit, p_accept):
    """Acceptance-weighted profit; ``profit`` comes from :func:`per_loan_profit`."""
    p = check_finite(p_accept, "p_accept")
    if np.any((p < 0) | (p > 1)):
        raise ValidationError("p_accept must lie in [0, 1]")
    out = p * np.asarray(profit, dtype=float)
    return out if np.ndim(out) else float(out)


def realized_reward(profit, accept):
    accept = np.asarray(accept)
    if np.any((accept != 0) & (accept != 1)):
        raise ValidationError("accept flags must be 0 or 1")
    out = np.where(accept == 1, np.asarray(profit, dtype=float), 0.0)
    return out if out.ndim else float(out)


def profit_for_frame(apps: pd.DataFrame, rates, params: RewardParams = RewardParams()) -> np.ndarray:
    """:func:`per_loan_profit` for every row of an application frame.

    ``rates`` has shape ``(n,)`` or ``(n, k)``; application fields broadcast
    along the second axis.
    """
    rates = np.asarray(rates, dtype=float)
    cols = [apps[c].to_numpy(dtype=float) for c in ("Amount", "Term", "PD", "PrimeRate")]
    if rates.ndim == 2:
        cols = [c[:, None] for c in cols]
    amount, term, pd_, prime = cols
    return per_loan_profit(amount, term, pd_, prime, rates, params)
