"""Price-response models ``p(accept | application, rate)``.

Two estimators with the scikit-learn interface:

* :class:`LogisticResponse` -- maximum likelihood by Newton-Raphson (IRLS),
  optionally L2-penalised, optionally with a price interaction for every
  feature (``variant="fdpe"``).
* :class:`NeuralResponse` -- a small MLP classifier trained with Adam and
  early stopping on a held-out tail of the training rows.

Both accept either an application frame (with an ``offered_rate`` column and
the response terms of :mod:`credit_pricer.features`) or a plain numeric
matrix.  Both expose ``accept_probability(apps, rates)`` so a price grid can
be scored without rebuilding frames.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from scipy.special import expit, log_expit
from scipy.stats import rankdata
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_choice, check_finite
from .exceptions import NumericalError, SeparationError, ValidationError
from .features import BASE_TERMS, base_design, rate_feature
from .nn import AdamState, MinMaxScaler, Network, adam_step

__all__ = [
    "LogisticResponse",
    "NeuralResponse",
    "auc",
    "auc_score",
    "load_model",
    "mcfadden_pseudo_r2",
]

log = logging.getLogger(__name__)


def _labels(X, y) -> np.ndarray:
    if y is None:
        if not isinstance(X, pd.DataFrame) or "accept" not in X:
            raise ValidationError("labels missing: pass y or a frame with an 'accept' column")
        y = X["accept"]
    y = np.asarray(y, dtype=float)
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("labels must be 0/1")
    return y


def _rates_of(X: pd.DataFrame) -> np.ndarray:
    if "offered_rate" not in X:
        raise ValidationError("application frame needs an 'offered_rate' column")
    return X["offered_rate"].to_numpy(dtype=float)


def _broadcast_rates(apps: pd.DataFrame, rates) -> np.ndarray:
    rates = np.asarray(rates, dtype=float)
    if rates.ndim == 0:
        rates = np.full(len(apps), float(rates))
    if rates.shape[0] != len(apps) or rates.ndim > 2:
        raise ValidationError("rates must have one row per application")
    return rates


def _fit_splits(X) -> tuple:
    """Split tags seen during fitting; ``("unknown",)`` for untagged data."""
    if isinstance(X, pd.DataFrame) and "split" in X:
        return tuple(sorted(X["split"].unique()))
    return ("unknown",)


def _bernoulli_loglik(y: np.ndarray, logits: np.ndarray) -> float:
    return float(np.sum(y * log_expit(logits) + (1.0 - y) * log_expit(-logits)))


class LogisticResponse(ClassifierMixin, BaseEstimator):
    """Logistic price-response model fitted by IRLS.

    Parameters
    ----------
    variant : {"plain", "fdpe"}
        ``"fdpe"`` adds a ``rate x feature`` interaction for every base term.
    l2 : float
        Ridge penalty ``l2 / 2 * ||beta||^2``; the intercept is never penalised.
    max_iter : int
        Newton iteration cap.
    tol : float
        Convergence threshold on the sup-norm of the penalised score.

    Attributes
    ----------
    intercept_ : float
    coef_ : ndarray
        Coefficients aligned with ``term_names_``.
    n_iter_, converged_, log_likelihood_ : fit diagnostics.
    """

    def __init__(self, variant="plain", l2=0.0, max_iter=100, tol=1e-8):
        self.variant = variant
        self.l2 = l2
        self.max_iter = max_iter
        self.tol = tol

    # -- design --------------------------------------------------------------
    def _term_names(self, X) -> list[str]:
        if isinstance(X, pd.DataFrame):
            names = ["rate", *BASE_TERMS]
            if self.variant == "fdpe":
                names += [f"rate:{t}" for t in BASE_TERMS]
            return names
        if self.variant != "plain":
            raise ValidationError("the fdpe variant needs an application frame")
        return [f"x{j}" for j in range(np.asarray(X).shape[1])]

    def _design(self, X) -> np.ndarray:
        if isinstance(X, pd.DataFrame):
            base = base_design(X)
            rz = rate_feature(_rates_of(X))[:, None]
            blocks = [rz, base]
            if self.variant == "fdpe":
                blocks.append(rz * base)
            return np.hstack(blocks)
        X = check_finite(X, "X")
        if X.ndim != 2:
            raise ValidationError("X must be two-dimensional")
        return X

    # -- fitting -------------------------------------------------------------
    def fit(self, X, y=None):
        check_choice(self.variant, ("plain", "fdpe"), "variant")
        if self.l2 < 0:
            raise ValidationError("l2 must be >= 0")
        y = _labels(X, y)
        if y.min() == y.max():
            raise ValidationError("need at least one positive and one negative label")
        Z = np.hstack([np.ones((len(y), 1)), self._design(X)])
        n, p = Z.shape
        if self.l2 == 0 and np.linalg.matrix_rank(Z) < p:
            raise ValidationError("design matrix is rank deficient; drop a term or set l2 > 0")
        penalty = np.full(p, float(self.l2))
        penalty[0] = 0.0

        beta = np.zeros(p)
        beta[0] = np.log(y.mean() / (1.0 - y.mean()))

        def objective(b):
            return _bernoulli_loglik(y, Z @ b) - 0.5 * np.sum(penalty * b * b)

        current = objective(beta)
        converged = False
        for it in range(1, self.max_iter + 1):
            prob = expit(Z @ beta)
            score = Z.T @ (y - prob) - penalty * beta
            if np.max(np.abs(score)) < self.tol:
                converged = True
                it -= 1
                break
            w = prob * (1.0 - prob)
            hess = (Z * w[:, None]).T @ Z + np.diag(penalty)
            try:
                step = np.linalg.solve(hess, score)
            except np.linalg.LinAlgError as exc:
                raise SeparationError("singular Hessian; the classes may be separable, try l2 > 0") from exc
            # step halving keeps the penalised likelihood monotone
            t = 1.0
            while t > 1e-10:
                trial = objective(beta + t * step)
                if trial >= current - 1e-12 * abs(current):
                    break
                t *= 0.5
            beta = beta + t * step
            current = objective(beta)
            if not np.all(np.isfinite(beta)) or np.max(np.abs(beta)) > 1e4:
                raise SeparationError("coefficients diverged; the classes may be separable, try l2 > 0")
        if not converged:
            prob = expit(Z @ beta)
            score = Z.T @ (y - prob) - penalty * beta
            converged = bool(np.max(np.abs(score)) < self.tol)
            if not converged:
                log.warning("IRLS stopped after %d iterations (|score| = %.2e)",
                            self.max_iter, np.max(np.abs(score)))
        self.intercept_ = float(beta[0])
        self.coef_ = beta[1:]
        self.term_names_ = self._term_names(X)
        self.n_iter_ = it
        self.fit_splits_ = _fit_splits(X)
        self.converged_ = converged
        self.log_likelihood_ = _bernoulli_loglik(y, Z @ beta)
        self.n_features_in_ = Z.shape[1] - 1
        self.classes_ = np.array([0, 1])
        return self

    @classmethod
    def from_coefficients(cls, intercept: float, rate: float, base: dict,
                          interactions: dict | None = None) -> "LogisticResponse":
        """Model with fixed coefficients over the application feature terms."""
        model = cls(variant="fdpe" if interactions is not None else "plain")
        coef = [rate] + [float(base.get(t, 0.0)) for t in BASE_TERMS]
        if interactions is not None:
            coef += [float(interactions.get(t, 0.0)) for t in BASE_TERMS]
        model.intercept_ = float(intercept)
        model.coef_ = np.array(coef, dtype=float)
        model.term_names_ = ["rate", *BASE_TERMS] + (
            [f"rate:{t}" for t in BASE_TERMS] if interactions is not None else []
        )
        model.n_iter_, model.converged_, model.log_likelihood_ = 0, True, float("nan")
        model.fit_splits_ = ()
        model.n_features_in_ = len(coef)
        model.classes_ = np.array([0, 1])
        return model

    # -- prediction ----------------------------------------------------------
    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "coef_")
        return self.intercept_ + self._design(X) @ self.coef_

    def predict_proba(self, X) -> np.ndarray:
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def accept_probability(self, apps: pd.DataFrame, rates) -> np.ndarray:
        """``p(accept)`` at arbitrary ``rates`` of shape ``(n,)`` or ``(n, k)``."""
        check_is_fitted(self, "coef_")
        rates = _broadcast_rates(apps, rates)
        base = base_design(apps)
        k = len(BASE_TERMS)
        level = self.intercept_ + base @ self.coef_[1 : 1 + k]
        slope = np.full(len(apps), self.coef_[0])
        if self.variant == "fdpe":
            slope = slope + base @ self.coef_[1 + k :]
        rz = rate_feature(rates)
        if rz.ndim == 2:
            level, slope = level[:, None], slope[:, None]
        return expit(level + slope * rz)

    @property
    def name(self) -> str:
        tag = "logistic" if self.variant == "plain" else "logistic-fdpe"
        return f"{tag}-l2-{self.l2:g}" if self.l2 else tag

    def coefficients(self) -> dict:
        check_is_fitted(self, "coef_")
        return {"intercept": self.intercept_, **dict(zip(self.term_names_, self.coef_.tolist()))}

    def to_dict(self) -> dict:
        check_is_fitted(self, "coef_")
        return {
            "kind": "logistic",
            "params": self.get_params(),
            "terms": self.term_names_,
            "intercept": self.intercept_,
            "coef": self.coef_.tolist(),
            "fit_splits": list(getattr(self, "fit_splits_", ())),
            "diagnostics": {
                "log_likelihood": self.log_likelihood_,
                "iterations": self.n_iter_,
                "converged": self.converged_,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "LogisticResponse":
        model = cls(**data["params"])
        model.intercept_ = float(data["intercept"])
        model.coef_ = np.array(data["coef"], dtype=float)
        model.term_names_ = list(data["terms"])
        diag = data.get("diagnostics", {})
        model.log_likelihood_ = diag.get("log_likelihood", float("nan"))
        model.n_iter_ = diag.get("iterations", 0)
        model.converged_ = diag.get("converged", True)
        model.n_features_in_ = len(model.coef_)
        model.classes_ = np.array([0, 1])
        model.fit_splits_ = tuple(data.get("fit_splits", ()))
        return model


class NeuralResponse(ClassifierMixin, BaseEstimator):
    """MLP classifier for ``p(accept)`` with a sigmoid output.

    Inputs are the base response terms plus the centred rate, min-max scaled.
    Training minimises binary cross-entropy with Adam and stops early when the
    validation loss has not improved for ``patience`` epochs; the best epoch's
    weights are kept.  Without an explicit validation set the chronologically
    last ``validation_fraction`` of the rows is held out.
    """

    def __init__(self, hidden=(32, 32), epochs=40, batch_size=256, learning_rate=1e-3,
                 weight_decay=1e-4, patience=5, validation_fraction=0.1, random_state=0):
        self.hidden = hidden
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.patience = patience
        self.validation_fraction = validation_fraction
        self.random_state = random_state

    def _raw_inputs(self, X) -> np.ndarray:
        if isinstance(X, pd.DataFrame):
            return np.hstack([base_design(X), rate_feature(_rates_of(X))[:, None]])
        X = check_finite(X, "X")
        if X.ndim != 2:
            raise ValidationError("X must be two-dimensional")
        return X

    def _loss(self, U, y) -> float:
        z = self.network_.forward(U)[:, 0]
        return -_bernoulli_loglik(y, z) / len(y)

    def fit(self, X, y=None, X_val=None, y_val=None):
        y = _labels(X, y)
        raw = self._raw_inputs(X)
        if X_val is None:
            n_val = int(round(self.validation_fraction * len(y)))
            if n_val < 1 or n_val >= len(y):
                raise ValidationError("validation_fraction leaves an empty train or validation set")
            raw, raw_val, y, y_val = raw[:-n_val], raw[-n_val:], y[:-n_val], y[-n_val:]
        else:
            raw_val, y_val = self._raw_inputs(X_val), _labels(X_val, y_val)

        rng = np.random.default_rng(self.random_state)
        self.scaler_ = MinMaxScaler().fit(raw)
        U, U_val = self.scaler_.transform(raw), self.scaler_.transform(raw_val)
        self.network_ = Network.build([U.shape[1], *self.hidden, 1], rng=rng)
        opt = AdamState.for_parameters(self.network_.parameters(), self.learning_rate,
                                       weight_decay=self.weight_decay)

        best = (self._loss(U_val, y_val), self.network_.copy(), 0)
        stale = 0
        self.loss_curve_, self.validation_curve_ = [], []
        for epoch in range(1, self.epochs + 1):
            order = rng.permutation(len(y))
            total = 0.0
            for start in range(0, len(y), self.batch_size):
                rows = order[start : start + self.batch_size]
                z = self.network_.forward(U[rows], training=True, rng=rng)[:, 0]
                yb = y[rows]
                total -= _bernoulli_loglik(yb, z)
                grad = ((expit(z) - yb) / len(rows))[:, None]
                adam_step(self.network_, self.network_.backward(grad), opt)
            train_loss = total / len(y)
            val_loss = self._loss(U_val, y_val)
            if not np.isfinite(train_loss) or not np.isfinite(val_loss):
                raise NumericalError("non-finite loss while training the neural response model")
            self.loss_curve_.append(train_loss)
            self.validation_curve_.append(val_loss)
            if val_loss < best[0] - 1e-7:
                best, stale = (val_loss, self.network_.copy(), epoch), 0
            else:
                stale += 1
                if stale >= self.patience:
                    break
        self.best_validation_loss_, self.network_, self.best_epoch_ = best
        self.n_epochs_ = len(self.loss_curve_)
        self.fit_splits_ = _fit_splits(X)
        self.n_features_in_ = U.shape[1]
        self.classes_ = np.array([0, 1])
        return self

    def decision_function(self, X) -> np.ndarray:
        check_is_fitted(self, "network_")
        return self.network_.forward(self.scaler_.transform(self._raw_inputs(X)))[:, 0]

    def predict_proba(self, X) -> np.ndarray:
        p = expit(self.decision_function(X))
        return np.column_stack([1.0 - p, p])

    def predict(self, X) -> np.ndarray:
        return (self.decision_function(X) > 0).astype(int)

    def accept_probability(self, apps: pd.DataFrame, rates) -> np.ndarray:
        check_is_fitted(self, "network_")
        rates = _broadcast_rates(apps, rates)
        base = base_design(apps)
        if rates.ndim == 1:
            raw = np.hstack([base, rate_feature(rates)[:, None]])
            return expit(self.network_.forward(self.scaler_.transform(raw))[:, 0])
        n, k = rates.shape
        raw = np.hstack([np.repeat(base, k, axis=0), rate_feature(rates).reshape(-1, 1)])
        return expit(self.network_.forward(self.scaler_.transform(raw))[:, 0]).reshape(n, k)

    @property
    def name(self) -> str:
        return "neural"

    def to_dict(self) -> dict:
        check_is_fitted(self, "network_")
        params = self.get_params()
        params["hidden"] = list(params["hidden"])
        return {
            "kind": "neural",
            "params": params,
            "scaler": self.scaler_.to_dict(),
            "network": self.network_.to_dict(),
            "fit_splits": list(getattr(self, "fit_splits_", ())),
            "diagnostics": {
                "best_validation_loss": self.best_validation_loss_,
                "best_epoch": self.best_epoch_,
                "epochs_run": self.n_epochs_,
            },
        }

    @classmethod
    def from_dict(cls, data: dict) -> "NeuralResponse":
        params = dict(data["params"])
        params["hidden"] = tuple(params["hidden"])
        model = cls(**params)
        model.scaler_ = MinMaxScaler.from_dict(data["scaler"])
        model.network_ = Network.from_dict(data["network"])
        diag = data.get("diagnostics", {})
        model.best_validation_loss_ = diag.get("best_validation_loss")
        model.best_epoch_ = diag.get("best_epoch")
        model.n_epochs_ = diag.get("epochs_run")
        model.n_features_in_ = model.scaler_.n_features_in_
        model.classes_ = np.array([0, 1])
        model.fit_splits_ = tuple(data.get("fit_splits", ()))
        return model


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------


def auc_score(y_true, scores) -> float:
    """Mann-Whitney AUC; tied scores count one half."""
    y = np.asarray(y_true, dtype=float)
    s = np.asarray(scores, dtype=float)
    n_pos = int(y.sum())
    n_neg = len(y) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("AUC needs both classes")
    ranks = rankdata(s)
    return float((ranks[y == 1].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def auc(model, X, y=None) -> float:
    return auc_score(_labels(X, y), model.predict_proba(X)[:, 1])


def mcfadden_pseudo_r2(model, X, y=None) -> float:
    """``1 - LL_model / LL_null`` with the intercept-only null on the same rows."""
    y = _labels(X, y)
    p = np.clip(model.predict_proba(X)[:, 1], 1e-300, 1.0 - 1e-16)
    ll_model = float(np.sum(y * np.log(p) + (1 - y) * np.log1p(-p)))
    rate = y.mean()
    ll_null = len(y) * (rate * np.log(rate) + (1 - rate) * np.log1p(-rate))
    return 1.0 - ll_model / ll_null


def diagnostics(model, X, y=None) -> dict:
    y = _labels(X, y)
    p = np.clip(model.predict_proba(X)[:, 1], 1e-300, 1.0 - 1e-16)
    return {
        "n_rows": int(len(y)),
        "log_likelihood": float(np.sum(y * np.log(p) + (1 - y) * np.log1p(-p))),
        "auc": auc_score(y, p),
        "pseudo_r2": mcfadden_pseudo_r2(model, X, y),
    }


def save_model(path, model, extra: dict | None = None) -> None:
    doc = model.to_dict()
    if extra:
        doc["diagnostics"] = {**doc.get("diagnostics", {}), **extra}
    Path(path).write_text(json.dumps(doc, indent=2))


def load_model(path):
    doc = json.loads(Path(path).read_text())
    kind = doc.get("kind")
    if kind == "logistic":
        return LogisticResponse.from_dict(doc)
    if kind == "neural":
        return NeuralResponse.from_dict(doc)
    raise ValidationError(f"{path}: unknown model kind {kind!r}")
