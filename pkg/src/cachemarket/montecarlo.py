"""Stochastic oracles: PPP SINR coverage, Zipf request sampling, G/G/m queue.

Every simulator splits its work into batches, and each batch draws from its
own SeedSequence child of the master seed. Results are reproducible for a
given (seed, trials, batch_count), and the batch estimates are returned
alongside the pooled one.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .caching import CatalogParams, harmonic_exact
from .delay import QueueParams
from .errors import InfeasibleError, NumericalError, ParameterError
from .geometry import NetworkParams

CONFIDENCE = 0.99
# truncating the PPP at radius R drops interference ~ (r_nn / R)^(alpha-2);
# R = c / sqrt(lam) with c below keeps that under 1e-3 and R >= 20 mean NN distances
TRUNCATION_SHARE = 1e-3


@dataclass(frozen=True)
class SimConfig:
    seed: int = 42
    trials: int = 100_000
    region_radius: float | None = None  # metres; None -> automatic
    warmup: int = 10_000
    batch_count: int = 20

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ParameterError(f"trials must be a positive integer, got {self.trials}")
        if self.batch_count < 1 or self.batch_count > self.trials:
            raise ParameterError("batch_count must lie in [1, trials]")
        if self.warmup < 0:
            raise ParameterError("warmup must be non-negative")

    def streams(self):
        return [np.random.default_rng(s) for s in np.random.SeedSequence(self.seed).spawn(self.batch_count)]

    def batch_sizes(self, n=None):
        n = self.trials if n is None else n
        base, extra = divmod(n, self.batch_count)
        return [base + (1 if i < extra else 0) for i in range(self.batch_count)]


@dataclass(frozen=True)
class SimEstimate:
    estimate: float
    ci_low: float
    ci_high: float
    n: int
    batch_estimates: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.ci_high - self.ci_low)

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


def _wilson(hits: int, n: int, conf: float = CONFIDENCE) -> tuple[float, float]:
    z = stats.norm.ppf(0.5 + conf / 2)
    p = hits / n
    den = 1 + z * z / n
    mid = (p + z * z / (2 * n)) / den
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / den
    return max(0.0, mid - half), min(1.0, mid + half)


def default_radius(net: NetworkParams) -> float:
    c = max(10.0, 0.5 * TRUNCATION_SHARE ** (-1.0 / (net.alpha - 2.0)))
    return c / math.sqrt(net.lam)


def ppp_counts(lam: float, radius: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """BS counts of n independent PPP(lam) realisations in a disc of the given radius."""
    return rng.poisson(lam * math.pi * radius**2, size=n)


def _coverage_batch(net, n, radius, rng):
    counts = ppp_counts(net.lam, radius, n, rng)
    empty = 0
    while True:
        bad = counts == 0
        if not bad.any():
            break
        empty += int(bad.sum())
        counts[bad] = ppp_counts(net.lam, radius, int(bad.sum()), rng)
    total = int(counts.sum())
    # uniform in the disc: only distances matter for isotropic path loss
    r = radius * np.sqrt(rng.random(total))
    fade = rng.exponential(size=total)
    keep = rng.random(total) < 1.0 / net.subchannels
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    seg = np.repeat(np.arange(n), counts)
    r0 = np.minimum.reduceat(r, starts)
    # first index of the minimum in each segment is the serving BS
    is_min = r == r0[seg]
    first = np.zeros(total, dtype=bool)
    idx = np.flatnonzero(is_min)
    _, first_pos = np.unique(seg[idx], return_index=True)
    first[idx[first_pos]] = True
    rx = net.p * fade * r ** (-net.alpha)
    signal = rx[first]
    interf = np.bincount(seg, weights=np.where(keep & ~first, rx, 0.0), minlength=n)
    sinr = signal / (interf + net.sigma2)
    return int(np.count_nonzero(sinr > net.t_bar)), empty


def simulate_coverage(net: NetworkParams, sim: SimConfig) -> SimEstimate:
    """Empirical Pr(SINR > t_bar) for the typical UE at the origin."""
    radius = sim.region_radius or default_radius(net)
    if radius * 2 * math.sqrt(net.lam) < 20:
        raise ParameterError("region radius below 20 mean nearest-neighbour distances")
    hits = empties = 0
    batch = []
    for n, rng in zip(sim.batch_sizes(), sim.streams()):
        h, e = _coverage_batch(net, n, radius, rng)
        hits += h
        empties += e
        batch.append(h / n)
    lo, hi = _wilson(hits, sim.trials)
    return SimEstimate(hits / sim.trials, lo, hi, sim.trials, tuple(batch),
                       {"radius": radius, "resampled_empty": empties})


def simulate_hit_rate(cat: CatalogParams, sim: SimConfig) -> SimEstimate:
    """Draw Zipf ranks by inverse-CDF search and count ranks <= S."""
    s = int(math.floor(cat.S))
    ranks = np.arange(1, cat.F + 1, dtype=np.float64)
    cdf = np.cumsum(ranks ** (-cat.nu)) / harmonic_exact(cat.F, cat.nu)
    hits = 0
    batch = []
    for n, rng in zip(sim.batch_sizes(), sim.streams()):
        u = rng.random(n)
        rank = np.minimum(np.searchsorted(cdf, u, side="right") + 1, cat.F)
        h = int(np.count_nonzero(rank <= s))
        hits += h
        batch.append(h / n)
    lo, hi = _wilson(hits, sim.trials)
    return SimEstimate(hits / sim.trials, lo, hi, sim.trials, tuple(batch))


def sample_with_cv(mean: float, cv: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Positive samples with the given mean and coefficient of variation.

    cv = 1: exponential. cv > 1: two-phase hyperexponential with balanced
    means. cv < 1: Erlang-k with k = round(1/cv^2), so cv is matched only
    when 1/cv^2 is an integer.
    """
    if math.isclose(cv, 1.0):
        return rng.exponential(mean, size=n)
    if cv > 1:
        c2 = cv * cv
        p1 = 0.5 * (1 + math.sqrt((c2 - 1) / (c2 + 1)))
        mu1, mu2 = 2 * p1 / mean, 2 * (1 - p1) / mean
        pick = rng.random(n) < p1
        return np.where(pick, rng.exponential(1 / mu1, size=n), rng.exponential(1 / mu2, size=n))
    k = max(1, round(1 / (cv * cv)))
    return rng.gamma(k, mean / k, size=n)


def _fcfs_sojourn(arr, svc, m, max_backlog):
    out = np.empty(len(arr))
    free = [0.0] * m
    for i in range(len(arr)):
        t_free = heapq.heappop(free)
        start = t_free if t_free > arr[i] else arr[i]
        if start - arr[i] > max_backlog:
            raise NumericalError(f"queue diverging: wait exceeded {max_backlog:.3g} s at customer {i}")
        done = start + svc[i]
        heapq.heappush(free, done)
        out[i] = done - arr[i]
    return out


def simulate_queue(q: QueueParams, sim: SimConfig, max_backlog_factor: float = 1e6) -> SimEstimate:
    """Batch-means mean sojourn of a FCFS G/G/m queue (trials = measured departures)."""
    if q.m > 8:
        raise ParameterError("queue simulator supports m <= 8")
    if not q.phi > 0:
        raise ParameterError("arrival rate must be positive to simulate")
    if q.rho >= 1:
        raise InfeasibleError(f"unstable queue: rho = {q.rho:.6g} >= 1")
    n = sim.warmup + sim.trials
    rng = sim.streams()[0]
    # one stream keeps the customer sequence contiguous; batches are cut from it
    arr = np.cumsum(sample_with_cv(1.0 / q.phi, q.c_a, n, rng))
    svc = sample_with_cv(q.tau, q.c_s, n, rng)
    soj = _fcfs_sojourn(arr, svc, q.m, max_backlog_factor * q.tau)[sim.warmup:]
    means = np.array([b.mean() for b in np.array_split(soj, sim.batch_count)])
    est = float(soj.mean())
    if sim.batch_count > 1:
        se = means.std(ddof=1) / math.sqrt(sim.batch_count)
        t = stats.t.ppf(0.5 + CONFIDENCE / 2, sim.batch_count - 1)
    else:
        se, t = float("nan"), float("nan")
    return SimEstimate(est, est - t * se, est + t * se, sim.trials, tuple(means.tolist()))
