"""Feature encodings shared by the generator, the response models and the agent.

Response-model terms
--------------------
Every term is a fixed affine transform of an application column, so the
generator's ground-truth coefficients and a fitted model's coefficients live
in the same units.  Apart from ``rate``, each term is standardised with
constants frozen from a large sample of the default generator; they are
documented here and never refit.

==================  ==============================================  =======  ======
term                definition                                      center   scale
==================  ==============================================  =======  ======
rate                offered APR (%)                                 7.0      1.0
prime_rate          PrimeRate (%)                                   5.5      0.30
competition_rate    CompetitionRate - PrimeRate                     1.5      0.6
previous_rate       PreviousRate - 9 for refinances, else 0         0        1.3
log_amount          log(Amount)                                     10.15    0.39
log_fico            log(FICO)                                       6.57     0.077
term                Term (months)                                   56.4     11.4
car_type_U          CarType == "U"                                  0.40     0.49
car_type_R          CarType == "R"                                  0.20     0.40
partner_bin_2       PartnerBin == 2                                 0.20     0.40
partner_bin_3       PartnerBin == 3                                 0.30     0.458
tier_2              Tier == 2                                       0.226    0.419
tier_3              Tier == 3                                       0.169    0.375
tier_7              Tier == 7                                       0.135    0.342
==================  ==============================================  =======  ======

A unit change in ``rate`` is one APR point, so its coefficient reads directly
as a log-odds change per percentage point; every other coefficient is a
log-odds change per standard deviation.  ``competition_rate`` is the spread
over prime and ``previous_rate`` is centred inside the refinance group, which
keeps both from duplicating another term.

Agent state encoding
--------------------
Numeric columns in :data:`STATE_NUMERIC` followed by one-hot blocks for
:data:`STATE_CATEGORICAL` in the listed category order, then min-max scaled
to ``[0, 1]`` on the training rows.
"""

from __future__ import annotations

import numpy as np
import pandas as pd
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_columns
from .nn import MinMaxScaler

__all__ = [
    "BASE_TERMS",
    "CATEGORIES",
    "RATE_CENTER",
    "STATE_CATEGORICAL",
    "STATE_NUMERIC",
    "StateEncoder",
    "base_design",
    "rate_feature",
]

CATEGORIES = {
    "Tier": (1, 2, 3, 7),
    "Type": ("Finance", "Refinance"),
    "CarType": ("N", "U", "R"),
    "PartnerBin": (1, 2, 3),
    "State": ("CA", "TX", "FL", "NY", "IL", "GA"),
}

RATE_CENTER = 7.0
RATE_SCALE = 1.0

_TERMS = {
    # name: (column, transform, center, scale)
    "prime_rate": ("PrimeRate", None, 5.5, 0.30),
    "competition_rate": ("CompetitionRate", "spread", 1.5, 0.6),
    "previous_rate": ("PreviousRate", "refi", 0.0, 1.3),
    "log_amount": ("Amount", "log", 10.15, 0.39),
    "log_fico": ("FICO", "log", 6.57, 0.077),
    "term": ("Term", None, 56.4, 11.4),
    "car_type_U": ("CarType", ("U",), 0.40, 0.49),
    "car_type_R": ("CarType", ("R",), 0.20, 0.40),
    "partner_bin_2": ("PartnerBin", (2,), 0.20, 0.40),
    "partner_bin_3": ("PartnerBin", (3,), 0.30, 0.458),
    "tier_2": ("Tier", (2,), 0.226, 0.419),
    "tier_3": ("Tier", (3,), 0.169, 0.375),
    "tier_7": ("Tier", (7,), 0.135, 0.342),
}
BASE_TERMS = tuple(_TERMS)
_REFI_CENTER = 9.0

RESPONSE_COLUMNS = ("PrimeRate", "CompetitionRate", "PreviousRate", "Amount", "FICO", "Term",
                    "CarType", "PartnerBin", "Tier")


def rate_feature(rates) -> np.ndarray:
    return (np.asarray(rates, dtype=float) - RATE_CENTER) / RATE_SCALE


def base_design(apps: pd.DataFrame) -> np.ndarray:
    """Rate-independent response terms, shape ``(n, len(BASE_TERMS))``."""
    check_columns(apps, RESPONSE_COLUMNS, "application frame")
    cols = []
    for column, transform, center, scale in _TERMS.values():
        if isinstance(transform, tuple):
            x = (apps[column].to_numpy() == transform[0]).astype(float)
        else:
            x = apps[column].to_numpy(dtype=float)
            if transform == "log":
                x = np.log(x)
            elif transform == "refi":
                x = np.where(x > 0, x - _REFI_CENTER, 0.0)
            elif transform == "spread":
                x = x - apps["PrimeRate"].to_numpy(dtype=float)
        cols.append((x - center) / scale)
    return np.column_stack(cols)


STATE_NUMERIC = (
    "Term", "Amount", "FICO", "PD", "PreviousRate", "CompetitionRate", "PrimeRate",
    "Months", "DayOfWeek", "MonthOfYear", "DaysSinceApp",
)
STATE_CATEGORICAL = ("Tier", "Type", "CarType", "PartnerBin", "State")


def _raw_state(apps: pd.DataFrame) -> np.ndarray:
    check_columns(apps, STATE_NUMERIC + STATE_CATEGORICAL, "application frame")
    blocks = [apps[list(STATE_NUMERIC)].to_numpy(dtype=float)]
    for col in STATE_CATEGORICAL:
        values = apps[col].to_numpy()
        blocks.append(np.column_stack([(values == c).astype(float) for c in CATEGORIES[col]]))
    return np.hstack(blocks)


def state_feature_names() -> list[str]:
    names = list(STATE_NUMERIC)
    for col in STATE_CATEGORICAL:
        names.extend(f"{col}={c}" for c in CATEGORIES[col])
    return names


class StateEncoder(TransformerMixin, BaseEstimator):
    """One-hot + min-max encoding of application rows into agent states."""

    def __init__(self, feature_range=(0.0, 1.0)):
        self.feature_range = feature_range

    def fit(self, X: pd.DataFrame, y=None):
        self.scaler_ = MinMaxScaler(self.feature_range).fit(_raw_state(X))
        self.n_features_out_ = self.scaler_.n_features_in_
        return self

    def transform(self, X: pd.DataFrame) -> np.ndarray:
        check_is_fitted(self, "scaler_")
        return self.scaler_.transform(_raw_state(X))

    def to_dict(self) -> dict:
        return {"feature_names": state_feature_names(), "scaler": self.scaler_.to_dict()}

    @classmethod
    def from_dict(cls, data: dict) -> "StateEncoder":
        scaler = MinMaxScaler.from_dict(data["scaler"])
        enc = cls(scaler.feature_range)
        enc.scaler_ = scaler
        enc.n_features_out_ = scaler.n_features_in_
        return enc
