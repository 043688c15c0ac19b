"""Conservative Q-learning pricing agent (soft actor-critic variant).

Components
----------
* actor: MLP from a scaled state to the mean and log-std of a Gaussian in an
  unbounded space; samples are squashed with ``tanh`` into ``[-1, 1]`` and
  mapped affinely onto the APR range ``[2.5, 12.5]``.
* critics: two MLPs ``Q(s, a)`` on (scaled state, scaled action) plus target
  copies that only move by Polyak averaging.  Dropout is applied to the
  critics only; targets are always evaluated in inference mode.
* temperature: SAC entropy coefficient tuned towards a target entropy.
* alpha: Lagrange multiplier on the conservative penalty, tuned so that the
  penalty stays near ``alpha_threshold``.

All densities (policy log-probabilities, the uniform proposal) live in the
scaled action space ``[-1, 1]``.  Rewards are min-max scaled to ``[0, 1]`` on
the training rows, so Q-values are in scaled reward units.

One training step performs, in order: critic update, actor update,
temperature update, alpha update, target sync.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Callable

import numpy as np
import pandas as pd
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_strict_keys
from .exceptions import NumericalError, ValidationError
from .features import StateEncoder
from .market import PRICE_BOUNDS, to_transitions
from .nn import AdamState, MinMaxScaler, Network, adam_step

__all__ = [
    "CQLAgent",
    "CQLPricer",
    "CqlConfig",
    "actor_sample",
    "alpha_update",
    "cql_logsumexp",
    "cql_penalty",
    "critic_target",
    "train_step",
]

log = logging.getLogger(__name__)

LOG_STD_BOUNDS = (-20.0, 2.0)
MIN_POLICY_DENSITY = 1e-10
UNIFORM_LOG_DENSITY = math.log(0.5)  # uniform on [-1, 1]
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
METRIC_COLUMNS = ("step", "epoch", "critic_loss", "td_loss", "actor_loss", "penalty", "alpha",
                  "temperature", "action_gap", "clamped_densities")


@dataclass
class CqlConfig:
    gamma: float = 0.999
    batch_size: int = 256
    n_epochs: int = 20
    hidden: tuple = (64, 64, 64, 64)
    n_action_samples: int = 10
    alpha_threshold: float = 10.0
    conservative_weight: float = 5.0
    initial_alpha: float = 1.0
    initial_temperature: float = 1.0
    actor_lr: float = 1e-4
    critic_lr: float = 3e-4
    temp_lr: float = 1e-4
    alpha_lr: float = 1e-4
    dropout: float = 0.2
    weight_decay: float = 1e-4
    n_critics: int = 2
    polyak_tau: float = 0.005
    target_entropy: float = -1.0
    fixed_alpha: float | None = None
    action_bounds: tuple = PRICE_BOUNDS
    seed: int = 333

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        self.action_bounds = tuple(float(b) for b in self.action_bounds)
        if not 0.0 <= self.gamma < 1.0:
            raise ValidationError("gamma must lie in [0, 1)")
        if self.n_action_samples < 1:
            raise ValidationError("n_action_samples must be >= 1")
        for name in ("actor_lr", "critic_lr", "temp_lr", "alpha_lr"):
            if not getattr(self, name) > 0:
                raise ValidationError(f"{name} must be > 0")
        if self.batch_size < 1 or self.n_epochs < 0:
            raise ValidationError("batch_size must be >= 1 and n_epochs >= 0")
        if not self.hidden or min(self.hidden) < 1:
            raise ValidationError("hidden must list at least one positive width")
        if self.n_critics < 1:
            raise ValidationError("n_critics must be >= 1")
        if not 0.0 <= self.dropout < 1.0:
            raise ValidationError("dropout must lie in [0, 1)")
        if not 0.0 < self.polyak_tau <= 1.0:
            raise ValidationError("polyak_tau must lie in (0, 1]")
        if self.initial_alpha <= 0 or self.initial_temperature <= 0:
            raise ValidationError("initial_alpha and initial_temperature must be > 0")
        if self.fixed_alpha is not None and self.fixed_alpha < 0:
            raise ValidationError("fixed_alpha must be >= 0")
        lo, hi = self.action_bounds
        if not lo < hi:
            raise ValidationError("action_bounds must satisfy lower < upper")

    def to_dict(self) -> dict:
        out = asdict(self)
        out["hidden"] = list(self.hidden)
        out["action_bounds"] = list(self.action_bounds)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "CqlConfig":
        check_strict_keys(data, {f.name for f in fields(cls)}, "agent config")
        return cls(**data)


# ---------------------------------------------------------------------------
# actor
# ---------------------------------------------------------------------------


def _tanh_log_jacobian(u: np.ndarray) -> np.ndarray:
    """``log(1 - tanh(u)^2)`` without cancellation for large ``|u|``."""
    return 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))


class Actor:
    """Squashed-Gaussian policy head over a :class:`Network` with two outputs."""

    def __init__(self, network: Network, action_bounds=PRICE_BOUNDS):
        if network.out_dim != 2:
            raise ValidationError("actor network must output (mean, log-std)")
        self.network = network
        lo, hi = action_bounds
        self.mid, self.half = 0.5 * (lo + hi), 0.5 * (hi - lo)

    def to_apr(self, a_scaled):
        return self.mid + self.half * np.asarray(a_scaled, dtype=float)

    def to_scaled(self, apr):
        return (np.asarray(apr, dtype=float) - self.mid) / self.half

    def distribution(self, states):
        out = self.network.forward(states)
        if not np.all(np.isfinite(out)):
            raise NumericalError("actor produced non-finite outputs")
        raw = out[:, 1]
        log_std = np.clip(raw, *LOG_STD_BOUNDS)
        return out[:, 0], log_std, (raw > LOG_STD_BOUNDS[0]) & (raw < LOG_STD_BOUNDS[1])

    def sample_scaled(self, states, rng):
        """Reparameterised draw; returns everything the actor gradient needs."""
        mu, log_std, free = self.distribution(states)
        std = np.exp(log_std)
        eps = rng.standard_normal(mu.shape)
        u = mu + std * eps
        a = np.tanh(u)
        log_prob = -0.5 * eps**2 - log_std - _HALF_LOG_2PI - _tanh_log_jacobian(u)
        return {"mu": mu, "log_std": log_std, "std": std, "free": free, "eps": eps,
                "u": u, "action": a, "log_prob": log_prob}

    def deterministic(self, states) -> np.ndarray:
        mu, _, _ = self.distribution(states)
        return self.to_apr(np.tanh(mu))


def actor_sample(actor: Actor, states, rng):
    """Sample APRs from the policy with their log-densities in APR units.

    The log-density includes the ``tanh`` Jacobian and the ``log`` of the
    affine half-width, so it integrates to one over the APR interval.
    """
    states = np.atleast_2d(np.asarray(states, dtype=float))
    draw = actor.sample_scaled(states, rng)
    return actor.to_apr(draw["action"]), draw["log_prob"] - math.log(actor.half)


# ---------------------------------------------------------------------------
# critics, targets and the conservative penalty
# ---------------------------------------------------------------------------


def _critic_input(states: np.ndarray, actions_scaled: np.ndarray) -> np.ndarray:
    return np.hstack([states, np.reshape(actions_scaled, (-1, 1))])


def critic_target(batch: dict, actor: Actor, targets, temp: float, gamma: float, rng) -> np.ndarray:
    """Soft Bellman target ``r + gamma * (min Q_target(s', a') - temp * log pi(a'|s'))``.

    ``batch`` holds scaled ``rewards``, ``next_states`` and the boolean
    ``exclude_bootstrap``; flagged rows get ``y = r``.
    """
    rewards = np.asarray(batch["rewards"], dtype=float)
    keep = ~np.asarray(batch["exclude_bootstrap"], dtype=bool)
    if gamma == 0.0 or not keep.any():
        return rewards.copy()
    draw = actor.sample_scaled(batch["next_states"], rng)
    x = _critic_input(batch["next_states"], draw["action"])
    q_next = np.min([t.forward(x)[:, 0] for t in targets], axis=0)
    bootstrap = np.where(keep, q_next - temp * draw["log_prob"], 0.0)
    return rewards + gamma * bootstrap


def cql_logsumexp(q_uniform, q_policy, policy_log_density,
                  uniform_log_density: float = UNIFORM_LOG_DENSITY):
    """Importance-sampled estimate of ``log integral exp Q(s, a) da`` per state.

    ``log[(1/2N) sum_unif exp(Q)/p_unif + (1/2N) sum_pi exp(Q)/p_pi]`` with
    the max subtracted inside the log.  Policy densities are floored at
    ``1e-10``.

    Returns
    -------
    estimate : ndarray (B,)
    weights : ndarray (B, 2N)
        Softmax weights of the uniform then policy terms; these are the
        derivatives of ``estimate`` w.r.t. the sampled Q-values.
    n_clamped : int
        Number of policy densities raised to the floor.
    """
    q_uniform = np.atleast_2d(q_uniform)
    q_policy = np.atleast_2d(q_policy)
    log_density = np.atleast_2d(policy_log_density)
    floor = math.log(MIN_POLICY_DENSITY)
    n_clamped = int(np.sum(log_density < floor))
    terms = np.hstack([q_uniform - uniform_log_density, q_policy - np.maximum(log_density, floor)])
    lse = logsumexp(terms, axis=1, keepdims=True)
    weights = np.exp(terms - lse)
    return lse[:, 0] - math.log(terms.shape[1]), weights, n_clamped


def _penalty_inputs(states, actor: Actor, rng, n_samples: int):
    """Uniform and policy proposal actions, each of shape (B, N), scaled space."""
    b = states.shape[0]
    uniform = rng.uniform(-1.0, 1.0, size=(b, n_samples))
    rep = np.repeat(states, n_samples, axis=0)
    draw = actor.sample_scaled(rep, rng)
    return uniform, draw["action"].reshape(b, n_samples), draw["log_prob"].reshape(b, n_samples)


def cql_penalty(critic: Network, states, actions, actor: Actor, rng, n_samples: int = 10) -> float:
    """``mean_s logsumexp_a Q(s, a) - mean_(s,a)~D Q(s, a)`` for one critic.

    ``actions`` are dataset APRs.  The critic is evaluated in inference mode.
    """
    if n_samples < 1:
        raise ValidationError("n_samples must be >= 1")
    states = np.atleast_2d(np.asarray(states, dtype=float))
    uniform, policy, log_density = _penalty_inputs(states, actor, rng, n_samples)
    rep = np.repeat(states, n_samples, axis=0)
    q_u = critic.forward(_critic_input(rep, uniform.ravel()))[:, 0].reshape(uniform.shape)
    q_p = critic.forward(_critic_input(rep, policy.ravel()))[:, 0].reshape(policy.shape)
    q_data = critic.forward(_critic_input(states, actor.to_scaled(actions)))[:, 0]
    estimate, _, n_clamped = cql_logsumexp(q_u, q_p, log_density)
    if n_clamped:
        log.debug("clamped %d policy densities in the penalty estimate", n_clamped)
    return float(estimate.mean() - q_data.mean())


def alpha_update(log_alpha: float, penalty: float, kappa: float, alpha_lr: float) -> float:
    """One dual-ascent step on ``alpha * (penalty - kappa)`` in log-space."""
    return float(log_alpha + alpha_lr * math.exp(log_alpha) * (penalty - kappa))


# ---------------------------------------------------------------------------
# agent state and the training step
# ---------------------------------------------------------------------------


class CQLAgent:
    """Mutable training state: networks, optimisers, temperature and alpha."""

    def __init__(self, config: CqlConfig, actor: Actor, critics, targets, optimizers: dict,
                 log_temp: float, log_alpha: float, step: int = 0):
        if len(critics) != len(targets):
            raise ValidationError("each critic needs a target network")
        self.config = config
        self.actor = actor
        self.critics = list(critics)
        self.targets = list(targets)
        self.optimizers = optimizers
        self.log_temp = np.array([float(log_temp)])
        self.log_alpha = float(log_alpha)
        self.step = step

    @classmethod
    def create(cls, config: CqlConfig, state_dim: int, rng) -> "CQLAgent":
        hidden = list(config.hidden)
        actor = Actor(Network.build([state_dim, *hidden, 2], rng=rng), config.action_bounds)
        critics = [Network.build([state_dim + 1, *hidden, 1], dropout=config.dropout, rng=rng)
                   for _ in range(config.n_critics)]
        targets = [c.copy() for c in critics]
        wd = config.weight_decay
        optimizers = {
            "actor": AdamState.for_parameters(actor.network.parameters(), config.actor_lr, weight_decay=wd),
            "critics": [AdamState.for_parameters(c.parameters(), config.critic_lr, weight_decay=wd)
                        for c in critics],
        }
        log_temp = math.log(config.initial_temperature)
        optimizers["temperature"] = AdamState.for_parameters([np.zeros(1)], config.temp_lr)
        alpha0 = config.fixed_alpha if config.fixed_alpha is not None else config.initial_alpha
        log_alpha = math.log(alpha0) if alpha0 > 0 else -math.inf
        return cls(config, actor, critics, targets, optimizers, log_temp, log_alpha)

    @property
    def alpha(self) -> float:
        return math.exp(self.log_alpha)

    @property
    def temperature(self) -> float:
        return float(np.exp(self.log_temp[0]))


def _update_critics(agent: CQLAgent, batch: dict, y: np.ndarray, rng) -> dict:
    cfg = agent.config
    states = batch["states"]
    b, n = states.shape[0], cfg.n_action_samples
    uniform, policy, log_density = _penalty_inputs(states, agent.actor, rng, n)
    rep = np.repeat(states, n, axis=0)
    x = np.vstack([
        _critic_input(states, batch["actions"]),
        _critic_input(rep, uniform.ravel()),
        _critic_input(rep, policy.ravel()),
    ])
    scale = cfg.conservative_weight * agent.alpha
    td, totals, penalties, clamped = [], [], [], 0
    for critic, opt in zip(agent.critics, agent.optimizers["critics"]):
        q = critic.forward(x, training=True, rng=rng)[:, 0]
        q_data = q[:b]
        q_u = q[b : b + b * n].reshape(b, n)
        q_p = q[b + b * n :].reshape(b, n)
        estimate, weights, n_clamped = cql_logsumexp(q_u, q_p, log_density)
        clamped += n_clamped
        penalty = float(estimate.mean() - q_data.mean())
        mse = float(np.mean((q_data - y) ** 2))
        grad = np.empty_like(q)
        grad[:b] = 2.0 * (q_data - y) / b - scale / b
        grad[b : b + b * n] = (scale / b) * weights[:, :n].ravel()
        grad[b + b * n :] = (scale / b) * weights[:, n:].ravel()
        adam_step(critic, critic.backward(grad[:, None]), opt)
        td.append(mse)
        penalties.append(penalty)
        totals.append(mse + scale * (penalty - cfg.alpha_threshold))
    return {"td_loss": float(np.mean(td)), "critic_loss": float(np.mean(totals)),
            "penalty": float(np.mean(penalties)), "clamped_densities": clamped}


def _update_actor(agent: CQLAgent, batch: dict, rng) -> tuple[float, np.ndarray]:
    states = batch["states"]
    b = states.shape[0]
    temp = agent.temperature
    draw = agent.actor.sample_scaled(states, rng)
    x = _critic_input(states, draw["action"])
    qs = np.array([c.forward(x)[:, 0] for c in agent.critics])
    chosen = np.argmin(qs, axis=0)
    q_min = qs[chosen, np.arange(b)]
    loss = float(np.mean(temp * draw["log_prob"] - q_min))

    dq_da = np.zeros(b)
    for i, critic in enumerate(agent.critics):
        mask = (chosen == i).astype(float)
        if not mask.any():
            continue
        critic.backward(mask[:, None])  # reuses the forward pass above
        dq_da += critic.input_grad[:, -1]
    a, u = draw["action"], draw["u"]
    # d loss / d u with eps held fixed; d log pi / d u = 2 tanh(u)
    d_u = (temp * 2.0 * np.tanh(u) - dq_da * (1.0 - a**2)) / b
    d_mu = d_u
    d_log_std = (d_u * draw["std"] * draw["eps"] - temp / b) * draw["free"]
    grads = agent.actor.network.backward(np.column_stack([d_mu, d_log_std]))
    adam_step(agent.actor.network, grads, agent.optimizers["actor"])
    return loss, draw["log_prob"]


def _polyak(agent: CQLAgent) -> None:
    tau = agent.config.polyak_tau
    for critic, target in zip(agent.critics, agent.targets):
        for p, tp in zip(critic.parameters(), target.parameters()):
            tp *= 1.0 - tau
            tp += tau * p


def train_step(agent: CQLAgent, batch: dict, rng) -> dict:
    """One full update; mutates ``agent`` and returns the step's metrics.

    ``batch`` carries scaled ``states``, ``actions``, ``rewards``,
    ``next_states`` and boolean ``exclude_bootstrap``.
    """
    cfg = agent.config
    data_apr = agent.actor.to_apr(batch["actions"])
    gap = float(np.mean(np.abs(agent.actor.deterministic(batch["states"]) - data_apr)))

    y = critic_target(batch, agent.actor, agent.targets, agent.temperature, cfg.gamma, rng)
    metrics = _update_critics(agent, batch, y, rng)
    actor_loss, log_prob = _update_actor(agent, batch, rng)

    temp_grad = -agent.temperature * float(np.mean(log_prob + cfg.target_entropy))
    adam_step([agent.log_temp], [np.array([temp_grad])], agent.optimizers["temperature"])

    if cfg.fixed_alpha is None:
        agent.log_alpha = alpha_update(agent.log_alpha, metrics["penalty"], cfg.alpha_threshold,
                                       cfg.alpha_lr)
    _polyak(agent)
    agent.step += 1

    metrics.update(step=agent.step, actor_loss=actor_loss, alpha=agent.alpha,
                   temperature=agent.temperature, action_gap=gap)
    bad = [k for k in ("critic_loss", "td_loss", "actor_loss", "penalty") if not math.isfinite(metrics[k])]
    if bad or (cfg.fixed_alpha is None and not math.isfinite(agent.log_alpha)):
        raise NumericalError(f"non-finite training metrics at step {agent.step}: {metrics}")
    return metrics


# ---------------------------------------------------------------------------
# estimator
# ---------------------------------------------------------------------------


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, sort_keys=True))


class CQLPricer(BaseEstimator):
    """Offline conservative Q-learning pricing policy.

    ``fit`` takes the training rows of a logged dataset (application columns,
    ``offered_rate``, ``realized_reward``) in chronological order.
    ``predict`` returns the deterministic price ``affine(tanh(mean))``.

    Parameters
    ----------
    config : CqlConfig or dict, optional
        Hyper-parameters; defaults to ``CqlConfig()``.
    checkpoint_dir : path, optional
        When set, every epoch writes ``epoch_NNN/`` with all networks and the
        agent scalars, and ``manifest.json`` plus ``metrics.csv`` are kept up
        to date.
    """

    kind = "cql"

    def __init__(self, config=None, checkpoint_dir=None):
        self.config = config
        self.checkpoint_dir = checkpoint_dir

    def _config(self) -> CqlConfig:
        if self.config is None:
            return CqlConfig()
        if isinstance(self.config, dict):
            return CqlConfig.from_dict(self.config)
        return self.config

    def fit(self, X: pd.DataFrame, y=None, epoch_callback: Callable | None = None):
        """Train on logged rows.

        ``epoch_callback(epoch, pricer)`` runs after each epoch, once the
        checkpoint (if any) is written.
        """
        cfg = self._config()
        self.config_ = cfg
        self.encoder_ = StateEncoder().fit(X)
        trans = to_transitions(X, self.encoder_)
        self.reward_scaler_ = MinMaxScaler().fit(trans.rewards[:, None])
        init_rng, batch_rng, noise_rng = (np.random.default_rng(s) for s in
                                          np.random.SeedSequence(cfg.seed).spawn(3))
        self.agent_ = CQLAgent.create(cfg, trans.states.shape[1], init_rng)
        self.n_features_in_ = trans.states.shape[1]
        data = {
            "states": trans.states,
            "actions": self.agent_.actor.to_scaled(trans.actions),
            "rewards": self.reward_scaler_.transform(trans.rewards[:, None])[:, 0],
            "next_states": trans.next_states,
            "exclude_bootstrap": trans.exclude_bootstrap,
        }
        n = len(trans)
        steps_per_epoch = max(n // cfg.batch_size, 1)
        self.metrics_ = []
        self.epoch_metrics_ = []
        if self.checkpoint_dir is not None:
            Path(self.checkpoint_dir).mkdir(parents=True, exist_ok=True)
        for epoch in range(1, cfg.n_epochs + 1):
            order = batch_rng.permutation(n)
            for k in range(steps_per_epoch):
                rows = order[k * cfg.batch_size : (k + 1) * cfg.batch_size]
                batch = {key: value[rows] for key, value in data.items()}
                m = train_step(self.agent_, batch, noise_rng)
                m["epoch"] = epoch
                self.metrics_.append(m)
            recent = self.metrics_[-steps_per_epoch:]
            summary = {"epoch": epoch, "step": self.agent_.step}
            for key in ("critic_loss", "td_loss", "actor_loss", "penalty", "action_gap"):
                summary[key] = float(np.mean([r[key] for r in recent]))
            summary["alpha"], summary["temperature"] = self.agent_.alpha, self.agent_.temperature
            self.epoch_metrics_.append(summary)
            log.info("epoch %d: critic %.4f actor %.4f penalty %.3f alpha %.4f temp %.4f",
                     epoch, summary["critic_loss"], summary["actor_loss"], summary["penalty"],
                     summary["alpha"], summary["temperature"])
            if self.checkpoint_dir is not None:
                self._checkpoint(epoch)
            if epoch_callback is not None:
                epoch_callback(epoch, self)
        return self

    # -- inference -------------------------------------------------------------
    def predict(self, X: pd.DataFrame) -> np.ndarray:
        check_is_fitted(self, "agent_")
        lo, hi = self.agent_.config.action_bounds
        return np.clip(self.agent_.actor.deterministic(self.encoder_.transform(X)), lo, hi)

    def q_values(self, X: pd.DataFrame, rates) -> np.ndarray:
        """Critic values at ``(state, rate)``, shape ``(n_critics, n)``, scaled reward units."""
        check_is_fitted(self, "agent_")
        x = _critic_input(self.encoder_.transform(X), self.agent_.actor.to_scaled(rates))
        return np.array([c.forward(x)[:, 0] for c in self.agent_.critics])

    def conservative_gap(self, X: pd.DataFrame, seed: int = 0) -> float:
        """``E[Q(s, a ~ pi)] - E[Q(s, a_data)]``, averaged over the critics."""
        check_is_fitted(self, "agent_")
        states = self.encoder_.transform(X)
        draw = self.agent_.actor.sample_scaled(states, np.random.default_rng(seed))
        q_pi = self.q_values(X, self.agent_.actor.to_apr(draw["action"]))
        q_data = self.q_values(X, X["offered_rate"].to_numpy(dtype=float))
        return float(q_pi.mean() - q_data.mean())

    def metrics_frame(self) -> pd.DataFrame:
        check_is_fitted(self, "metrics_")
        return pd.DataFrame(self.metrics_, columns=list(METRIC_COLUMNS))

    # -- persistence -------------------------------------------------------------
    def _state_doc(self) -> dict:
        agent = self.agent_
        return {
            "config": agent.config.to_dict(),
            "step": agent.step,
            "log_alpha": agent.log_alpha,
            "log_temp": float(agent.log_temp[0]),
            "encoder": self.encoder_.to_dict(),
            "reward_scaler": self.reward_scaler_.to_dict(),
            "dropout_placement": "critics",
        }

    def save(self, directory) -> None:
        """Write networks, optimiser states and scalars to ``directory``."""
        check_is_fitted(self, "agent_")
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        agent = self.agent_
        doc = self._state_doc()
        doc["actor"] = {"network": agent.actor.network.to_dict(),
                        "optimizer": agent.optimizers["actor"].to_dict()}
        doc["critics"] = [{"network": c.to_dict(), "optimizer": o.to_dict(), "target": t.to_dict()}
                          for c, o, t in zip(agent.critics, agent.optimizers["critics"], agent.targets)]
        doc["temperature_optimizer"] = agent.optimizers["temperature"].to_dict()
        _write_json(d / "agent.json", doc)

    @classmethod
    def load(cls, directory) -> "CQLPricer":
        doc = json.loads((Path(directory) / "agent.json").read_text())
        cfg = CqlConfig.from_dict(doc["config"])
        actor = Actor(Network.from_dict(doc["actor"]["network"]), cfg.action_bounds)
        critics = [Network.from_dict(c["network"]) for c in doc["critics"]]
        targets = [Network.from_dict(c["target"]) for c in doc["critics"]]
        optimizers = {
            "actor": AdamState.from_dict(doc["actor"]["optimizer"]),
            "critics": [AdamState.from_dict(c["optimizer"]) for c in doc["critics"]],
            "temperature": AdamState.from_dict(doc["temperature_optimizer"]),
        }
        pricer = cls(config=cfg)
        pricer.config_ = cfg
        pricer.agent_ = CQLAgent(cfg, actor, critics, targets, optimizers,
                                 doc["log_temp"], doc["log_alpha"], doc["step"])
        pricer.encoder_ = StateEncoder.from_dict(doc["encoder"])
        pricer.reward_scaler_ = MinMaxScaler.from_dict(doc["reward_scaler"])
        pricer.n_features_in_ = pricer.encoder_.n_features_out_
        return pricer

    def _checkpoint(self, epoch: int) -> None:
        root = Path(self.checkpoint_dir)
        self.save(root / f"epoch_{epoch:03d}")
        manifest = {
            "config": self.config_.to_dict(),
            "seed": self.config_.seed,
            "dropout_placement": "critics",
            "epochs_completed": epoch,
            "checkpoints": [f"epoch_{e:03d}" for e in range(1, epoch + 1)],
            "metrics": "metrics.csv",
        }
        _write_json(root / "manifest.json", manifest)
        with open(root / "metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(METRIC_COLUMNS)
            for m in self.metrics_:
                writer.writerow([repr(m[c]) if isinstance(m[c], float) else m[c] for c in METRIC_COLUMNS])

    def to_dict(self) -> dict:
        return {"kind": self.kind, **self._state_doc()}
