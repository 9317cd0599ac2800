"""Joint survival probabilities of componentwise maxima.

For a random vector M with extreme-value dependence, the joint survival
``P[M_1 > g_1, ..., M_d > g_d]`` is not directly a copula value.  The trick
is the reflection ``G_k(x) = F_k^{-1}(1 - F_k(x))``: it preserves each
marginal while reversing its order, so

    P[ all M_k > g_k ] = P[ all G_k(M_k) < G_k(g_k) ]
                       = C_reflected( 1 - F_1(g_1), ..., 1 - F_d(g_d) )

where ``C_reflected`` is the extreme-value copula of the reflected vector.
A Pickands model used here must therefore have been estimated from
reflect-transformed data; :func:`survival_probability` enforces that through
the model's provenance flag.

In two dimensions inclusion-exclusion gives an exact reference,
``P[M_1 > g_1, M_2 > g_2] = 1 - u_1 - u_2 + C(u_1, u_2)`` with
``u_k = F_k(g_k)`` and ``C`` the copula of the original (unreflected)
vector; it anchors the accuracy benchmarks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import DomainError, ParameterError, PickandsModel, copula_from_pickands
from .pipeline import BlockMaxima


class ProvenanceError(RuntimeError):
    """A survival query was made with a model not trained on reflected data."""


@dataclass(frozen=True)
class ThresholdVector:
    """One joint threshold, in data units and in marginal probabilities.

    ``values[k]`` is the level for coordinate k; ``probs[k] = F_k(values[k])``
    its marginal probability.  Survival evaluation only needs the
    probabilities; empirical exceedance counting needs the values.
    """

    values: np.ndarray | None
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.ndim != 1 or probs.size < 2:
            raise ParameterError("probs must be a vector of dimension >= 2")
        if np.any(probs <= 0) or np.any(probs >= 1):
            raise DomainError("threshold probabilities must lie strictly in (0, 1)")
        object.__setattr__(self, "probs", probs)
        if self.values is not None:
            values = np.asarray(self.values, dtype=float)
            if values.shape != probs.shape:
                raise ParameterError("values and probs must have matching shapes")
            object.__setattr__(self, "values", values)


def survival_probability(model: PickandsModel, marginal_probs) -> float:
    """``P[ all M_k > g_k ]`` from a reflected-data Pickands model.

    ``marginal_probs[k]`` is ``F_k(g_k)`` under the original marginals.
    Refuses models whose ``trained_on_reflected`` flag is unset: evaluating
    the formula with the dependence of the unreflected data is a silent
    correctness bug, not an approximation.
    """
    if not model.trained_on_reflected:
        raise ProvenanceError(
            "survival_probability requires a model trained on reflection-"
            "transformed data; this one is not flagged as such"
        )
    p = np.asarray(marginal_probs, dtype=float)
    if p.ndim != 1 or p.size != model.d:
        raise ParameterError(f"need {model.d} marginal probabilities")
    if np.any(p <= 0) or np.any(p >= 1):
        raise DomainError("marginal probabilities must lie strictly in (0, 1)")
    return copula_from_pickands(1.0 - p, model)


def exact_survival_bivariate(model: PickandsModel, u1: float, u2: float) -> float:
    """Inclusion-exclusion survival ``1 - u1 - u2 + C(u1, u2)`` for d == 2.

    ``model`` is the dependence of the original (unreflected) pair.  Exact
    for analytic families, which makes it the reference in benchmarks.
    """
    if model.d != 2:
        raise ParameterError("exact inclusion-exclusion reference is bivariate only")
    for u in (u1, u2):
        if not (0.0 < u < 1.0):
            raise DomainError(f"marginal probabilities must lie in (0, 1), got {u!r}")
    return 1.0 - u1 - u2 + copula_from_pickands(np.array([u1, u2]), model)


def threshold_grid(
    bm: BlockMaxima,
    count: int,
    floor: float,
    rng: np.random.Generator,
) -> list[ThresholdVector]:
    """Random joint thresholds in the upper tail of each margin.

    Marginal probabilities are drawn uniformly on ``[floor, B/(B+1)]`` per
    coordinate and mapped to data units through the empirical quantiles of
    the block maxima, so thresholds stay inside the observed range.
    """
    if count < 1:
        raise ParameterError("need count >= 1")
    b = bm.n_blocks
    hi = b / (b + 1.0)
    if not (0.0 < floor < hi):
        raise ParameterError(
            f"floor must lie in (0, {hi:.6f}) for B={b} blocks, got {floor!r}"
        )
    probs = rng.uniform(floor, hi, size=(count, bm.d))
    values = np.empty_like(probs)
    for k in range(bm.d):
        values[:, k] = np.quantile(bm.maxima[:, k], probs[:, k])
    return [ThresholdVector(values=values[i], probs=probs[i]) for i in range(count)]


def empirical_accuracy(
    bm: BlockMaxima,
    survival_fn: Callable[[ThresholdVector], float],
    thresholds: list[ThresholdVector],
) -> float:
    """Mean squared gap between empirical and model joint survival.

    ``(1/|Q|) sum_t ( (1/B) sum_b 1{M_b >= t} - survival_fn(t) )^2`` where
    the indicator requires every coordinate to meet its threshold.
    """
    if not thresholds:
        raise ParameterError("need at least one threshold")
    gaps = np.empty(len(thresholds))
    for i, t in enumerate(thresholds):
        if t.values is None:
            raise ParameterError("empirical accuracy needs thresholds in data units")
        freq = float(np.mean(np.all(bm.maxima >= t.values, axis=1)))
        gaps[i] = freq - float(survival_fn(t))
    return float(np.mean(gaps**2))
