"""Synthetic auto-loan market with known ground-truth demand.

The generator produces a chronological stream of applications, prices them
with a noisy risk-based rule (the historical policy), samples accept decisions
from one of five ground-truth price-response families and attaches realised
profits.  Everything is driven by ``MarketConfig.seed``.

Generator details that are not load-bearing for the experiments:

* applications are spread evenly over 2002-07-01 .. 2004-08-31;
* ``PrimeRate`` is a slow mean-reverting monthly path around 5.5% on a
  quarter-point grid;
* ``PD = sigmoid(-1.0986 - 0.0099965 * (FICO - 500))`` so PD is 25% at FICO
  500 and 1% at FICO 850;
* ``Tier`` bands a noisy copy of FICO (>=720: 1, >=680: 2, >=640: 3, else 7);
* ``DaysSinceApp`` is geometric, ``PartnerBin`` and ``State`` categorical.
"""

from __future__ import annotations

import csv
import datetime as dt
import logging
from collections import namedtuple
from dataclasses import asdict, dataclass, field, replace

import numpy as np
import pandas as pd
from scipy.special import expit, logit

from ._validation import check_choice, check_columns, check_probability
from .exceptions import CalibrationError, ValidationError
from .features import BASE_TERMS, CATEGORIES, StateEncoder, base_design, rate_feature
from .nn import Network
from .reward import RewardParams, profit_for_frame, realized_reward

__all__ = [
    "APPLICATION_COLUMNS",
    "BehavioralRule",
    "DEMAND_FAMILIES",
    "LoanApplication",
    "MarketConfig",
    "PRICE_BOUNDS",
    "TrueDemand",
    "Transitions",
    "behavioral_price",
    "build_dataset",
    "generate_applications",
    "make_demand",
    "read_dataset_csv",
    "simulate_market",
    "split_dataset",
    "to_transitions",
    "write_dataset_csv",
]

log = logging.getLogger(__name__)

PRICE_BOUNDS = (2.5, 12.5)
DEMAND_FAMILIES = ("logistic", "logistic-fdpe", "segmented", "time-varying", "neural-net")
DEFAULT_FRACTIONS = (0.86, 0.03, 0.11)
SPLITS = ("train", "val", "test")

APPLICATION_COLUMNS = [
    "AppIndex", "Term", "Amount", "FICO", "PD", "PreviousRate", "CompetitionRate",
    "PrimeRate", "Tier", "Type", "CarType", "PartnerBin", "State", "Months",
    "DayOfWeek", "MonthOfYear", "DaysSinceApp",
]
DATASET_COLUMNS = APPLICATION_COLUMNS + [
    "offered_rate", "accept", "realized_reward", "split", "_truth_segment", "_truth_p_accept",
]

_START_DATE = dt.date(2002, 7, 1)
_N_DAYS = (dt.date(2004, 8, 31) - _START_DATE).days + 1
_PD_INTERCEPT = float(logit(0.25))
_PD_SLOPE = (float(logit(0.01)) - _PD_INTERCEPT) / 350.0


@dataclass(frozen=True)
class LoanApplication:
    """One applicant, i.e. one row of an application frame."""

    app_index: int
    term: int
    amount: float
    fico: int
    pd: float
    previous_rate: float
    competition_rate: float
    prime_rate: float
    tier: int
    loan_type: str
    car_type: str
    partner_bin: int
    state_code: str
    months_since_start: int
    day_of_week: int
    month_of_year: int
    days_since_app: int
    latent_segment: int = 0

    _COLUMNS = dict(
        app_index="AppIndex", term="Term", amount="Amount", fico="FICO", pd="PD",
        previous_rate="PreviousRate", competition_rate="CompetitionRate",
        prime_rate="PrimeRate", tier="Tier", loan_type="Type", car_type="CarType",
        partner_bin="PartnerBin", state_code="State", months_since_start="Months",
        day_of_week="DayOfWeek", month_of_year="MonthOfYear", days_since_app="DaysSinceApp",
        latent_segment="_truth_segment",
    )

    def __post_init__(self):
        if not 0.0 < self.pd < 1.0:
            raise ValidationError("pd must lie in (0, 1)")
        if self.amount < 5000:
            raise ValidationError("amount must be at least 5000")
        if min(self.previous_rate, self.competition_rate, self.prime_rate) < 0:
            raise ValidationError("rates must be non-negative")
        refi = self.loan_type == "Refinance"
        if refi != (self.car_type == "R") or refi != (self.previous_rate > 0):
            raise ValidationError("car_type R, loan_type Refinance and previous_rate > 0 must coincide")

    @classmethod
    def from_row(cls, row) -> "LoanApplication":
        values = {}
        for name, col in cls._COLUMNS.items():
            v = row[col] if col in row else 0
            values[name] = v.item() if hasattr(v, "item") else v
        return cls(**values)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([{col: getattr(self, name) for name, col in self._COLUMNS.items()}])


def iter_applications(frame: pd.DataFrame):
    for _, row in frame.iterrows():
        yield LoanApplication.from_row(row)


@dataclass(frozen=True)
class MarketConfig:
    n_applications: int = 30_000
    demand_family: str = "logistic"
    n_segments: int = 3
    drift_magnitude: float = 1.0
    behavioral_noise_sd: float = 1.2
    target_accept_rate: float = 0.21
    seed: int = 333

    def __post_init__(self):
        if int(self.n_applications) != self.n_applications or self.n_applications <= 0:
            raise ValidationError("n_applications must be a positive integer")
        check_choice(self.demand_family, DEMAND_FAMILIES, "demand_family")
        if self.n_segments < 1:
            raise ValidationError("n_segments must be >= 1")
        if self.behavioral_noise_sd < 0:
            raise ValidationError("behavioral_noise_sd must be >= 0")
        if self.drift_magnitude < 0:
            raise ValidationError("drift_magnitude must be >= 0")
        if not 0.0 < self.target_accept_rate < 1.0:
            raise ValidationError("target_accept_rate must lie in (0, 1)")

    def streams(self):
        """Independent generators for applications, prices, truth and accepts."""
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(4)]


def pd_from_fico(fico) -> np.ndarray:
    return expit(_PD_INTERCEPT + _PD_SLOPE * (np.asarray(fico, dtype=float) - 500.0))


def _segment_features(apps: pd.DataFrame) -> np.ndarray:
    z = base_design(apps)[:, [BASE_TERMS.index(t) for t in
                              ("log_fico", "log_amount", "term", "car_type_U", "car_type_R",
                               "partner_bin_2", "partner_bin_3")]]
    sd = z.std(axis=0)
    return (z - z.mean(axis=0)) / np.where(sd > 0, sd, 1.0)


def generate_applications(config: MarketConfig) -> pd.DataFrame:
    """Chronological application stream; deterministic given ``config.seed``."""
    rng = config.streams()[0]
    n = config.n_applications
    idx = np.arange(n)

    days = (idx * _N_DAYS) // n
    dates = [_START_DATE + dt.timedelta(days=int(d)) for d in days]
    months = np.array([(d.year - _START_DATE.year) * 12 + d.month - _START_DATE.month for d in dates])
    n_months = int(months.max()) + 1
    # mean-reverting prime path on a quarter-point grid
    latent = np.empty(n_months)
    latent[0] = rng.normal(0.0, 0.3)
    for m in range(1, n_months):
        latent[m] = 0.85 * latent[m - 1] + rng.normal(0.0, 0.16)
    prime_path = np.clip(5.5 + 0.25 * np.rint(latent / 0.25), 4.25, 7.75)
    prime = prime_path[months]

    fico = np.clip(np.rint(rng.normal(715.0, 55.0, n)), 500, 850).astype(int)
    noisy_fico = fico + rng.normal(0.0, 40.0, n)
    tier = np.select([noisy_fico >= 720, noisy_fico >= 680, noisy_fico >= 640], [1, 2, 3], 7)
    refi = rng.random(n) < 0.2
    car_type = np.where(refi, "R", np.where(rng.random(n) < 0.5, "N", "U"))
    previous_rate = np.where(refi, np.round(rng.uniform(4.0, 14.0, n), 2), 0.0)
    term = rng.choice([36, 48, 60, 72], size=n, p=[0.15, 0.2, 0.45, 0.2])
    amount = np.round(np.minimum(5000.0 + np.exp(rng.normal(np.log(20000.0), 0.5, n)), 100_000.0), 2)
    competition = np.round(np.maximum(prime + 1.5 + rng.normal(0.0, 0.6, n), 0.5), 2)

    frame = pd.DataFrame(
        {
            "AppIndex": idx,
            "Term": term,
            "Amount": amount,
            "FICO": fico,
            "PD": pd_from_fico(fico),
            "PreviousRate": previous_rate,
            "CompetitionRate": competition,
            "PrimeRate": prime,
            "Tier": tier,
            "Type": np.where(refi, "Refinance", "Finance"),
            "CarType": car_type,
            "PartnerBin": rng.choice([1, 2, 3], size=n, p=[0.5, 0.2, 0.3]),
            "State": rng.choice(CATEGORIES["State"], size=n, p=[0.4, 0.15, 0.15, 0.1, 0.1, 0.1]),
            "Months": months,
            "DayOfWeek": [d.weekday() for d in dates],
            "MonthOfYear": [d.month for d in dates],
            "DaysSinceApp": rng.geometric(0.4, size=n) - 1,
        }
    )

    # latent segments: a sharp softmax of a random projection of observable
    # features, so segment membership is learnable from the state
    k = config.n_segments
    if k > 1:
        proj = rng.normal(0.0, 1.0, size=(7, k))
        scores = 2.5 * _segment_features(frame) @ proj
        probs = np.exp(scores - scores.max(axis=1, keepdims=True))
        probs /= probs.sum(axis=1, keepdims=True)
        u = rng.random(n)[:, None]
        frame["_truth_segment"] = (u > np.cumsum(probs, axis=1)).sum(axis=1)
    else:
        frame["_truth_segment"] = 0
    return frame


@dataclass(frozen=True)
class BehavioralRule:
    """Risk-based pricing: prime + margin + tier and PD loadings + noise."""

    base_margin: float = 2.75
    tier_loading: dict = field(default_factory=lambda: {1: 0.0, 2: 0.5, 3: 1.0, 7: 1.75})
    pd_loading: float = 10.0


def behavioral_price(apps, rng=None, noise_sd: float = 1.0, rule: BehavioralRule = BehavioralRule()):
    """Historical APR for each application, clamped to :data:`PRICE_BOUNDS`.

    ``apps`` is an application frame or a single :class:`LoanApplication`.
    """
    single = isinstance(apps, LoanApplication)
    frame = apps.to_frame() if single else apps
    check_columns(frame, ("PrimeRate", "Tier", "PD"), "application frame")
    tier_load = frame["Tier"].map(rule.tier_loading).to_numpy(dtype=float)
    if np.any(np.isnan(tier_load)):
        raise ValidationError("unknown tier in application frame")
    price = frame["PrimeRate"].to_numpy(dtype=float) + rule.base_margin + tier_load
    price = price + rule.pd_loading * frame["PD"].to_numpy(dtype=float)
    if noise_sd > 0:
        if rng is None:
            raise ValidationError("noisy behavioral prices need an rng")
        price = price + rng.normal(0.0, noise_sd, size=price.shape)
    price = np.clip(price, *PRICE_BOUNDS)
    return float(price[0]) if single else price


# ---------------------------------------------------------------------------
# ground-truth demand
# ---------------------------------------------------------------------------

# Signs follow a typical auto-loan logit: price and loan size hurt take-up,
# a higher prime or competitor rate helps.  Units are those of features.py.
DEFAULT_LOGIT = {
    "intercept": -1.0,
    "rate": -0.66,
    "base": {
        "prime_rate": 0.25, "competition_rate": 0.10, "previous_rate": 0.15,
        "log_amount": -0.50, "log_fico": -0.25, "term": 0.40,
        "car_type_U": 0.55, "car_type_R": 0.12, "partner_bin_2": -0.35,
        "partner_bin_3": -0.15, "tier_2": -0.06, "tier_3": -0.02, "tier_7": 0.10,
    },
}
DEFAULT_INTERACTIONS = {
    "prime_rate": 0.0, "competition_rate": 0.04, "previous_rate": 0.04,
    "log_amount": -0.08, "log_fico": -0.08, "term": 0.05,
    "car_type_U": -0.10, "car_type_R": 0.03, "partner_bin_2": 0.08,
    "partner_bin_3": 0.03, "tier_2": 0.03, "tier_3": 0.05, "tier_7": 0.08,
}


def _vec(coefs: dict) -> np.ndarray:
    unknown = set(coefs) - set(BASE_TERMS)
    if unknown:
        raise ValidationError(f"unknown response terms: {sorted(unknown)}")
    return np.array([float(coefs.get(t, 0.0)) for t in BASE_TERMS])


def _linear_logit(block: dict, design: np.ndarray, rate_z: np.ndarray) -> np.ndarray:
    a = block["intercept"] + design @ _vec(block["base"])
    slope = np.full(design.shape[0], float(block["rate"]))
    if "interactions" in block:
        slope = slope + design @ _vec(block["interactions"])
        if block["rate"] < 0:
            # keep the effective price effect negative for every applicant
            slope = np.minimum(slope, 0.25 * block["rate"])
    if rate_z.ndim == 2:
        return a[:, None] + slope[:, None] * rate_z
    return a + slope * rate_z


@dataclass
class TrueDemand:
    """Ground-truth ``p(accept | application, rate)`` for one demand family.

    ``params`` layout by family::

        logistic       {"intercept", "rate", "base": {term: coef}}
        logistic-fdpe  logistic block + "interactions": {term: coef}
        segmented      {"segments": [logistic block, ...]}   keyed by _truth_segment
        time-varying   {"start": block, "end": block}        interpolated on AppIndex
        neural-net     {"linear": block, "network": Network dict, "scale": float}

    ``shift`` is the calibrated intercept offset added to every logit.
    """

    family: str
    params: dict
    n_applications: int
    shift: float = 0.0

    def __post_init__(self):
        check_choice(self.family, DEMAND_FAMILIES, "demand family")
        if self.family == "neural-net":
            self._net = Network.from_dict(self.params["network"])

    @property
    def name(self) -> str:
        return f"true-{self.family}"

    def logit(self, apps: pd.DataFrame, rates) -> np.ndarray:
        """Log-odds of acceptance; ``rates`` is a scalar, ``(n,)`` or ``(n, k)``."""
        rates = np.asarray(rates, dtype=float)
        if rates.ndim == 0:
            rates = np.full(len(apps), float(rates))
        if rates.shape[0] != len(apps) or rates.ndim > 2:
            raise ValidationError("rates must have one row per application")
        design = base_design(apps)
        rate_z = rate_feature(rates)
        fam, p = self.family, self.params
        if fam in ("logistic", "logistic-fdpe"):
            out = _linear_logit(p, design, rate_z)
        elif fam == "segmented":
            seg = apps["_truth_segment"].to_numpy(dtype=int)
            if seg.min() < 0 or seg.max() >= len(p["segments"]):
                raise ValidationError("segment label outside the truth's segment list")
            out = np.empty(rate_z.shape)
            for k, block in enumerate(p["segments"]):
                rows = seg == k
                if rows.any():
                    out[rows] = _linear_logit(block, design[rows], rate_z[rows])
        elif fam == "time-varying":
            w = apps["AppIndex"].to_numpy(dtype=float) / max(self.n_applications - 1, 1)
            if rate_z.ndim == 2:
                w = w[:, None]
            start = _linear_logit(p["start"], design, rate_z)
            end = _linear_logit(p["end"], design, rate_z)
            out = (1.0 - w) * start + w * end
        else:
            out = _linear_logit(p["linear"], design, rate_z)
            if rate_z.ndim == 2:
                n, k = rate_z.shape
                x = np.hstack([np.repeat(design, k, axis=0), rate_z.reshape(-1, 1)])
                nn_part = self._net.forward(x)[:, 0].reshape(n, k)
            else:
                nn_part = self._net.forward(np.hstack([design, rate_z[:, None]]))[:, 0]
            out = out + p["scale"] * nn_part
        return out + self.shift

    def accept_probability(self, apps: pd.DataFrame, rates) -> np.ndarray:
        return expit(self.logit(apps, rates))

    def with_shift(self, shift: float) -> "TrueDemand":
        return replace(self, shift=float(shift))

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "params": self.params,
            "n_applications": self.n_applications,
            "shift": self.shift,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TrueDemand":
        return cls(data["family"], data["params"], int(data["n_applications"]), float(data["shift"]))


def _perturbed(block: dict, rng, sd: float, rate_mult: float = 1.0, intercept_sd: float = 0.0) -> dict:
    return {
        "intercept": block["intercept"] + (rng.normal(0.0, intercept_sd) if intercept_sd else 0.0),
        "rate": block["rate"] * rate_mult,
        "base": {t: c + rng.normal(0.0, sd) for t, c in block["base"].items()},
    }


def make_demand(config: MarketConfig) -> TrueDemand:
    """Uncalibrated ground truth for ``config.demand_family``."""
    rng = config.streams()[2]
    base = {"intercept": DEFAULT_LOGIT["intercept"], "rate": DEFAULT_LOGIT["rate"],
            "base": dict(DEFAULT_LOGIT["base"])}
    fam = config.demand_family
    if fam == "logistic":
        params = base
    elif fam == "logistic-fdpe":
        params = dict(base, interactions=dict(DEFAULT_INTERACTIONS))
    elif fam == "segmented":
        k = config.n_segments
        mults = 0.35 * (2.0 / 0.35) ** (np.arange(k) / max(k - 1, 1)) if k > 1 else np.ones(1)
        params = {"segments": [_perturbed(base, rng, 0.4, float(m), 0.5) for m in mults]}
    elif fam == "time-varying":
        drift = config.drift_magnitude
        end = _perturbed(base, rng, 0.25 * drift, 1.0 - 0.4 * drift if drift < 2.5 else 0.0, 0.3 * drift)
        if end["rate"] >= 0:
            raise ValidationError("drift_magnitude too large: test-regime price effect is not negative")
        params = {"start": base, "end": end}
    else:
        net = Network.build([len(BASE_TERMS) + 1, 32, 32, 1], activation="tanh", rng=rng)
        params = {"linear": base, "network": net.to_dict(), "scale": 1.5}
    return TrueDemand(fam, params, config.n_applications)


def calibrate_shift(demand: TrueDemand, apps: pd.DataFrame, prices, target: float,
                    max_iter: int = 200) -> float:
    """Intercept offset making the mean true accept probability hit ``target``."""
    base = demand.with_shift(0.0).logit(apps, prices)

    def excess(s):
        return expit(base + s).mean() - target

    lo, hi = -40.0, 40.0
    if excess(lo) > 0 or excess(hi) < 0:
        raise CalibrationError(f"cannot bracket accept rate {target} with an intercept shift")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-12:
            break
    else:
        raise CalibrationError("intercept bisection did not converge")
    return 0.5 * (lo + hi)


def build_dataset(apps: pd.DataFrame, prices, demand: TrueDemand, reward_params: RewardParams = RewardParams(),
                  seed=None, target_accept_rate: float | None = None):
    """Sample accept decisions at ``prices`` and attach realised profits.

    When ``target_accept_rate`` is given the demand intercept is recalibrated
    first.  Returns ``(dataset, demand)`` with the demand actually used.
    """
    prices = np.asarray(prices, dtype=float)
    if prices.shape != (len(apps),):
        raise ValidationError("need one price per application")
    if target_accept_rate is not None:
        demand = demand.with_shift(calibrate_shift(demand, apps, prices, target_accept_rate))
    rng = np.random.default_rng(seed)
    p_true = check_probability(demand.accept_probability(apps, prices), "true accept probability")
    accept = (rng.random(len(apps)) < p_true).astype(int)

    data = apps.copy()
    data["offered_rate"] = prices
    data["accept"] = accept
    data["realized_reward"] = realized_reward(profit_for_frame(apps, prices, reward_params), accept)
    data["split"] = "train"
    data["_truth_p_accept"] = p_true
    if target_accept_rate is not None and len(data) >= 10_000:
        gap = abs(accept.mean() - target_accept_rate)
        if gap > 0.02:
            log.warning("empirical accept rate %.4f is %.4f from target", accept.mean(), gap)
    return data[DATASET_COLUMNS], demand


def split_dataset(data: pd.DataFrame, fractions=DEFAULT_FRACTIONS) -> pd.DataFrame:
    """Tag contiguous chronological train/val/test blocks."""
    fractions = np.asarray(fractions, dtype=float)
    if fractions.shape != (3,) or np.any(fractions < 0) or not np.isclose(fractions.sum(), 1.0):
        raise ValidationError("fractions must be three non-negative numbers summing to 1")
    data = data.sort_values("AppIndex", kind="stable").reset_index(drop=True)
    n = len(data)
    bounds = np.rint(np.cumsum(fractions) * n).astype(int)
    bounds[-1] = n
    sizes = np.diff(np.concatenate([[0], bounds]))
    if np.any((fractions > 0) & (sizes == 0)):
        raise ValidationError("a split with a positive fraction ended up empty")
    data["split"] = np.repeat(SPLITS, sizes)
    return data


def simulate_market(config: MarketConfig = MarketConfig(), reward_params: RewardParams = RewardParams(),
                    fractions=DEFAULT_FRACTIONS):
    """Full generator pass: applications, historical prices, accepts, splits."""
    _, price_rng, _, accept_rng = config.streams()
    apps = generate_applications(config)
    prices = behavioral_price(apps, price_rng, config.behavioral_noise_sd)
    demand = make_demand(config)
    data, demand = build_dataset(apps, prices, demand, reward_params, accept_rng, config.target_accept_rate)
    return split_dataset(data, fractions), demand


# ---------------------------------------------------------------------------
# transitions for the agent
# ---------------------------------------------------------------------------

Transition = namedtuple("Transition", "state action reward next_state exclude_bootstrap")


@dataclass
class Transitions:
    """Columnar ``(s, a, r, s')`` store; ``action`` in APR %, ``reward`` in dollars."""

    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    exclude_bootstrap: np.ndarray

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, i):
        return Transition(self.states[i], self.actions[i], self.rewards[i],
                          self.next_states[i], self.exclude_bootstrap[i])


def to_transitions(data: pd.DataFrame, encoder: StateEncoder | None = None) -> Transitions:
    """Pair each application with the chronologically next one.

    The final row is paired with itself and flagged ``exclude_bootstrap``;
    the problem is continuing, so there are no terminal states.
    """
    if len(data) < 2:
        raise ValidationError("need at least two rows to build transitions")
    idx = data["AppIndex"].to_numpy()
    if np.any(np.diff(idx) <= 0):
        raise ValidationError("rows must be in increasing AppIndex order")
    encoder = encoder if encoder is not None else StateEncoder().fit(data)
    states = encoder.transform(data)
    next_states = np.vstack([states[1:], states[-1:]])
    exclude = np.zeros(len(data), dtype=bool)
    exclude[-1] = True
    return Transitions(
        states=states,
        actions=data["offered_rate"].to_numpy(dtype=float),
        rewards=data["realized_reward"].to_numpy(dtype=float),
        next_states=next_states,
        exclude_bootstrap=exclude,
    )


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------

_DTYPES = {
    "AppIndex": "int64", "Term": "int64", "Amount": "float64", "FICO": "int64", "PD": "float64",
    "PreviousRate": "float64", "CompetitionRate": "float64", "PrimeRate": "float64",
    "Tier": "int64", "Type": "object", "CarType": "object", "PartnerBin": "int64",
    "State": "object", "Months": "int64", "DayOfWeek": "int64", "MonthOfYear": "int64",
    "DaysSinceApp": "int64", "offered_rate": "float64", "accept": "int64",
    "realized_reward": "float64", "split": "object", "_truth_segment": "int64",
    "_truth_p_accept": "float64",
}


def write_dataset_csv(data: pd.DataFrame, path) -> None:
    check_columns(data, DATASET_COLUMNS, "dataset")
    data[DATASET_COLUMNS].to_csv(path, index=False, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")


def read_dataset_csv(path) -> pd.DataFrame:
    data = pd.read_csv(path, dtype=_DTYPES, keep_default_na=False, float_precision="round_trip")
    check_columns(data, DATASET_COLUMNS, f"dataset {path}")
    return data[DATASET_COLUMNS]


def config_dict(config: MarketConfig) -> dict:
    return asdict(config)
