"""Offline conservative Q-learning for consumer-credit pricing.

The package generates synthetic auto-loan markets with known demand, trains a
CQL pricing agent on the logged data alone, compares it with the historical
rule and with profit-maximising optimisation over a fitted response model, and
scores every policy with model-based offline evaluation.
"""

__version__ = "0.1.0"

from .baselines import BehavioralPolicy, OptPolicy, behavioral_policy, opt_policy, optimize_price
from .config import RunConfig, load_config
from .cql import CqlConfig, CQLPricer
from .evaluation import EvalReport, alpha_ablation, evaluate, mapd, percent_of_optimal
from .exceptions import CalibrationError, NotFittedError, NumericalError, SeparationError, ValidationError
from .market import LoanApplication, MarketConfig, TrueDemand, behavioral_price, simulate_market
from .response import LogisticResponse, NeuralResponse
from .reward import RewardParams, expected_reward, per_loan_profit

__all__ = [
    "BehavioralPolicy",
    "CQLPricer",
    "CalibrationError",
    "CqlConfig",
    "EvalReport",
    "LoanApplication",
    "LogisticResponse",
    "MarketConfig",
    "NeuralResponse",
    "NotFittedError",
    "NumericalError",
    "OptPolicy",
    "RewardParams",
    "RunConfig",
    "SeparationError",
    "TrueDemand",
    "ValidationError",
    "alpha_ablation",
    "behavioral_policy",
    "behavioral_price",
    "evaluate",
    "expected_reward",
    "load_config",
    "mapd",
    "opt_policy",
    "optimize_price",
    "per_loan_profit",
    "percent_of_optimal",
    "simulate_market",
]
