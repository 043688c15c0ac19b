"""Independent reference computations used by the unit and acceptance tests.

Nothing here imports the code under test except for plain data containers;
each oracle recomputes its quantity the slow, obvious way.
"""

from __future__ import annotations

import numpy as np


def mlp_forward(layers, x):
    """Straight-line forward pass over ``[(W, b, activation), ...]``."""
    h = np.asarray(x, dtype=float)
    for W, b, act in layers:
        z = np.array([[sum(W[i, j] * row[j] for j in range(W.shape[1])) + b[i]
                       for i in range(W.shape[0])] for row in h])
        if act == "relu":
            z = np.maximum(z, 0.0)
        elif act == "tanh":
            z = np.tanh(z)
        h = z
    return h


def finite_difference_gradients(net, x, upstream, h=1e-5):
    """Central differences of ``L = sum(upstream * net(x))`` for every parameter."""
    grads = []
    for p in net.parameters():
        g = np.zeros_like(p)
        it = np.nditer(p, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            old = p[idx]
            p[idx] = old + h
            up = float(np.sum(upstream * net.forward(x)))
            p[idx] = old - h
            down = float(np.sum(upstream * net.forward(x)))
            p[idx] = old
            g[idx] = (up - down) / (2 * h)
        grads.append(g)
    return grads


def amortized_total(amount, apr, term, freq=12):
    """Month-by-month balance simulation; returns (sum of payments, final balance)."""
    r = apr / 100.0 / freq
    if r == 0:
        payment = amount / term
    else:
        payment = amount * r / (1 - (1 + r) ** -term)
    balance, paid = float(amount), 0.0
    for _ in range(int(term)):
        interest = balance * r
        balance = balance + interest - payment
        paid += payment
    return paid, balance


def brute_force_argmax(objective, lo=2.5, hi=12.5, n=1_000_001):
    """Argmax and max of ``objective(grid)`` over an ``n``-point grid; first max wins."""
    grid = np.linspace(lo, hi, n)
    values = objective(grid)
    k = int(np.argmax(values))
    return grid[k], values[k]


def log_integral_exp(f, lo=-1.0, hi=1.0, n=200_001):
    """``log int_lo^hi exp f(a) da`` by the trapezoid rule on a dense grid."""
    a = np.linspace(lo, hi, n)
    v = f(a)
    m = v.max()
    return m + np.log(np.trapezoid(np.exp(v - m), a))


def histogram_log_density(samples, probes, width):
    """Log of the fraction of samples within ``width / 2`` of each probe, per unit length."""
    samples = np.sort(np.asarray(samples))
    lo = np.searchsorted(samples, np.asarray(probes) - width / 2)
    hi = np.searchsorted(samples, np.asarray(probes) + width / 2)
    return np.log((hi - lo) / (len(samples) * width))


def logistic_objective(amount, term, pd_, prime, level, slope, lgd=0.5, freq=12):
    """Expected reward ``p(r) * profit(r)`` for ``p = sigmoid(level + slope * (r - 7))``.

    Written out from the annuity formula so it shares no code with the
    package's reward or response modules.
    """

    def annuity_total(rate):
        i = np.asarray(rate, dtype=float) / 100.0 / freq
        return np.where(i > 0, amount * i / (1.0 - (1.0 + np.where(i > 0, i, 1.0)) ** -term) * term, amount)

    cost = float(annuity_total(prime))

    def f(rate):
        profit = (1 - pd_) * (annuity_total(rate) - cost) - pd_ * lgd * cost
        p = 1.0 / (1.0 + np.exp(-(level + slope * (np.asarray(rate) - 7.0))))
        return p * profit

    return f
