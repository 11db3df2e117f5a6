"""Rent sharing among MNOs: max-demand game, exact Shapley value, airport algorithm."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .errors import ParameterError

MAX_EXACT_K = 20


@dataclass(frozen=True)
class RentProblem:
    omega_star: float
    demands: tuple  # lam_k S_k per MNO
    labels: tuple = ()

    def __post_init__(self):
        demands = tuple(float(x) for x in self.demands)
        if not demands:
            raise ParameterError("rent problem needs at least one MNO")
        if any(not x >= 0 for x in demands):
            raise ParameterError("demands must be non-negative")
        if not self.omega_star >= 0:
            raise ParameterError(f"price must be non-negative, got {self.omega_star}")
        object.__setattr__(self, "demands", demands)
        labels = tuple(self.labels) or tuple(f"mno{k + 1}" for k in range(len(demands)))
        if len(labels) != len(demands):
            raise ParameterError("labels and demands differ in length")
        object.__setattr__(self, "labels", labels)

    @property
    def k(self) -> int:
        return len(self.demands)


@dataclass(frozen=True)
class CostAllocation:
    psi: tuple
    total: float
    updates: int = 0  # share updates performed (airport form only)
    meta: dict = field(default_factory=dict)


def char_fn(coalition: Iterable[int], prob: RentProblem) -> float:
    members = list(coalition)
    if not members:
        return 0.0
    return prob.omega_star * max(prob.demands[i] for i in members)


def shapley_value(v: Callable[[frozenset], float], k: int) -> tuple:
    """Exact Shapley value of a k-player game by enumerating coalitions.

    Uses ψ_i = sum over C containing i of (|C|-1)!(k-|C|)!/k! [v(C) - v(C minus i)].
    """
    if k < 1:
        raise ParameterError("need at least one player")
    if k > MAX_EXACT_K:
        raise ParameterError(f"exact enumeration limited to K <= {MAX_EXACT_K}; use airport_share")
    kf = math.factorial(k)
    weight = [math.factorial(s - 1) * math.factorial(k - s) / kf for s in range(1, k + 1)]
    values = {}
    for mask in range(1 << k):
        values[mask] = v(frozenset(i for i in range(k) if mask >> i & 1))
    terms = [[] for _ in range(k)]
    for mask in range(1, 1 << k):
        size = bin(mask).count("1")
        w = weight[size - 1]
        for i in range(k):
            if mask >> i & 1:
                terms[i].append(w * (values[mask] - values[mask & ~(1 << i)]))
    # 2^(k-1) terms per player; fsum keeps the enumeration at rounding level
    return tuple(math.fsum(t) for t in terms)


def shapley_exact(prob: RentProblem) -> CostAllocation:
    psi = shapley_value(lambda c: char_fn(c, prob), prob.k)
    return CostAllocation(psi, char_fn(range(prob.k), prob))


def airport_share(prob: RentProblem) -> CostAllocation:
    """Runway split: each increment of the sorted demands is shared equally by
    every MNO whose demand reaches it. O(K^2) share updates in the worst case."""
    k = prob.k
    order = sorted(range(k), key=lambda i: (prob.demands[i], i))
    psi = [0.0] * k
    prev = 0.0
    updates = 0
    for pos, idx in enumerate(order):
        inc = prob.omega_star * (prob.demands[idx] - prev)
        prev = prob.demands[idx]
        if inc == 0:
            continue
        share = inc / (k - pos)
        for j in order[pos:]:
            psi[j] += share
            updates += 1
    return CostAllocation(tuple(psi), char_fn(range(k), prob), updates)
