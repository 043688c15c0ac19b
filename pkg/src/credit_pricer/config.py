"""Run configuration: one JSON document drives every pipeline stage.

Unknown keys anywhere are errors.  Every section is optional and falls back
to the defaults below; the resolved document is echoed into each manifest.

Example::

    {
      "market": {"n_applications": 30000, "demand_family": "logistic"},
      "agent": {"hidden": [64, 64], "n_epochs": 20},
      "seeds": [333, 42, 3],
      "jobs": 2
    }
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from ._validation import check_choice, check_strict_keys
from .cql import CqlConfig
from .exceptions import ValidationError
from .market import MarketConfig
from .reward import RewardParams

__all__ = ["EVALUATOR_NAMES", "ResponseOptions", "RunConfig", "load_config"]

EVALUATOR_NAMES = ("logistic", "logistic-l2-0.1", "logistic-l2-1", "logistic-fdpe", "neural")


@dataclass(frozen=True)
class ResponseOptions:
    """Options for the response models behind the optimisation baselines."""

    l2: float = 0.0
    max_iter: int = 100
    tol: float = 1e-8

    def __post_init__(self):
        if self.l2 < 0 or self.max_iter < 1 or self.tol <= 0:
            raise ValidationError("response options need l2 >= 0, max_iter >= 1, tol > 0")


def _section(cls, data, where):
    if data is None:
        return cls()
    check_strict_keys(data, {f.name for f in fields(cls)}, where)
    try:
        return cls(**data)
    except TypeError as exc:
        raise ValidationError(f"{where}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    market: MarketConfig = field(default_factory=MarketConfig)
    reward: RewardParams = field(default_factory=RewardParams)
    response: ResponseOptions = field(default_factory=ResponseOptions)
    agent: CqlConfig = field(default_factory=lambda: CqlConfig(hidden=(64, 64)))
    evaluators: tuple = EVALUATOR_NAMES
    seeds: tuple = (333, 42, 3)
    ablation_alphas: tuple = (0.001, 0.1, 1.0, 10.0)
    ablation_rows: int = 10_000
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "evaluators", tuple(self.evaluators))
        object.__setattr__(self, "seeds", tuple(int(s) for s in self.seeds))
        object.__setattr__(self, "ablation_alphas", tuple(float(a) for a in self.ablation_alphas))
        for name in self.evaluators:
            check_choice(name, EVALUATOR_NAMES, "evaluator")
        if not self.evaluators:
            raise ValidationError("evaluators must not be empty")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ValidationError("seeds must be a non-empty list of distinct integers")
        if any(a < 0 for a in self.ablation_alphas):
            raise ValidationError("ablation alphas must be >= 0")
        if self.ablation_rows < 1 or self.jobs < 1:
            raise ValidationError("ablation_rows and jobs must be >= 1")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        check_strict_keys(data, {f.name for f in fields(cls)}, "run config")
        agent = data.get("agent")
        agent_cfg = CqlConfig(hidden=(64, 64)) if agent is None else CqlConfig.from_dict(
            {"hidden": [64, 64], **agent})
        kwargs = {k: v for k, v in data.items() if k not in ("market", "reward", "response", "agent")}
        try:
            return cls(
                market=_section(MarketConfig, data.get("market"), "market"),
                reward=_section(RewardParams, data.get("reward"), "reward"),
                response=_section(ResponseOptions, data.get("response"), "response"),
                agent=agent_cfg,
                **kwargs,
            )
        except TypeError as exc:
            raise ValidationError(f"run config: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "market": asdict(self.market),
            "reward": asdict(self.reward),
            "response": asdict(self.response),
            "agent": self.agent.to_dict(),
            "evaluators": list(self.evaluators),
            "seeds": list(self.seeds),
            "ablation_alphas": list(self.ablation_alphas),
            "ablation_rows": self.ablation_rows,
            "jobs": self.jobs,
        }

    def market_for(self, seed: int) -> MarketConfig:
        return replace(self.market, seed=int(seed))

    def agent_for(self, seed: int, fixed_alpha: float | None = None) -> CqlConfig:
        cfg = replace(self.agent, seed=int(seed))
        return replace(cfg, fixed_alpha=fixed_alpha) if fixed_alpha is not None else cfg

    def with_overrides(self, seed=None, family=None, jobs=None, alpha=None) -> "RunConfig":
        cfg = self
        if seed is not None:
            cfg = replace(cfg, seeds=(int(seed),))
        if family is not None:
            cfg = replace(cfg, market=replace(cfg.market, demand_family=family))
        if jobs is not None:
            cfg = replace(cfg, jobs=int(jobs))
        if alpha is not None:
            cfg = replace(cfg, ablation_alphas=(float(alpha),))
        return cfg


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc
    return RunConfig.from_dict(data)
