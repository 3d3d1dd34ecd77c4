"""Bernoulli measures on the code space and their column statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from types import MappingProxyType

import numpy as np

from .carpet import Carpet, hausdorff_dim
from .errors import BadWeights

SUM_TOL = 1e-9


@dataclass(frozen=True)
class BernoulliMeasure:
    """Strictly positive digit weights on a carpet.

    ``weights`` is aligned with ``carpet.digits``; ``projected`` maps each
    occupied column to its total weight.
    """

    carpet: Carpet
    weights: tuple[float, ...]
    projected: MappingProxyType = field(init=False, repr=False)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (self.carpet.n_digits,):
            raise BadWeights(
                f"expected {self.carpet.n_digits} weights, got shape {w.shape}"
            )
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise BadWeights("weights must be finite and strictly positive")
        total = math.fsum(w)
        if abs(total - 1.0) > SUM_TOL:
            raise BadWeights(f"weights sum to {total!r}, not 1")
        w = w / total
        proj: dict[int, float] = {}
        for (i, _), p in zip(self.carpet.digits, w):
            proj[i] = proj.get(i, 0.0) + float(p)
        object.__setattr__(self, "weights", tuple(float(p) for p in w))
        object.__setattr__(self, "projected", MappingProxyType(proj))

    def weight(self, d) -> float:
        return self.weights[self.carpet.digit_index(d)]

    def column_distribution(self):
        """``(log C_i, p_i)`` arrays over occupied columns, in column order."""
        cols = self.carpet.columns
        logc = np.array([math.log(self.carpet.column_counts[i]) for i in cols])
        p = np.array([self.projected[i] for i in cols])
        return logc, p

    def value_distribution(self):
        """Column distribution merged over equal counts: ``(log C values, masses)``.

        Values are ascending and distinct.
        """
        masses: dict[int, float] = {}
        for i in self.carpet.columns:
            ci = self.carpet.column_counts[i]
            masses[ci] = masses.get(ci, 0.0) + self.projected[i]
        counts = sorted(masses)
        return (
            np.array([math.log(ci) for ci in counts]),
            np.array([masses[ci] for ci in counts]),
        )


def bernoulli(c: Carpet, weights) -> BernoulliMeasure:
    """Measure from a ``{digit: weight}`` mapping keyed exactly by ``c.digits``."""
    if not hasattr(weights, "keys"):
        return BernoulliMeasure(c, tuple(weights))
    keys = {tuple(k) for k in weights}
    if keys != set(c.digits):
        missing = sorted(set(c.digits) - keys)
        extra = sorted(keys - set(c.digits))
        raise BadWeights(f"weight keys do not match digits (missing={missing}, extra={extra})")
    table = {tuple(k): v for k, v in weights.items()}
    return BernoulliMeasure(c, tuple(float(table[d]) for d in c.digits))


def max_entropy(c: Carpet) -> BernoulliMeasure:
    return BernoulliMeasure(c, (1.0 / c.n_digits,) * c.n_digits)


def mcmullen(c: Carpet) -> BernoulliMeasure:
    """Weights C_{pi(d)}^(log m/log n - 1) / m^s with s the Hausdorff dimension."""
    s = hausdorff_dim(c)
    e = math.log(c.m) / math.log(c.n) - 1.0
    w = [c.column_counts[i] ** e / c.m**s for i, _ in c.digits]
    return BernoulliMeasure(c, tuple(w))


def column_uniform(c: Carpet) -> BernoulliMeasure:
    k = c.n_columns
    return BernoulliMeasure(c, tuple(1.0 / (k * c.column_counts[i]) for i, _ in c.digits))


def fibre_moments(mu: BernoulliMeasure) -> tuple[float, float]:
    """Mean and variance of log C_i under the projected column weights."""
    logc, p = mu.column_distribution()
    mean = math.fsum(p * logc)
    var = math.fsum(p * (logc - mean) ** 2)
    return mean, var


def alpha_mean(mu: BernoulliMeasure) -> float:
    c = mu.carpet
    mean, _ = fibre_moments(mu)
    return math.log(c.n_columns) / math.log(c.m) + mean / math.log(c.n)


def cumulant(mu: BernoulliMeasure, theta: float) -> float:
    """log sum_i p_i C_i^theta, shifted by the dominant term to avoid overflow."""
    logc, p = mu.column_distribution()
    x = theta * logc
    top = x.max()
    return float(top + math.log(np.sum(p * np.exp(x - top))))


def cumulant_derivatives(mu: BernoulliMeasure, theta: float) -> tuple[float, float]:
    """First and second derivative of the cumulant at ``theta``.

    These are the mean and variance of log C_i under the exponentially tilted
    column distribution.
    """
    logc, p = mu.column_distribution()
    x = theta * logc
    q = p * np.exp(x - x.max())
    q /= q.sum()
    d1 = float(np.dot(q, logc))
    d2 = float(np.dot(q, (logc - d1) ** 2))
    return d1, d2
