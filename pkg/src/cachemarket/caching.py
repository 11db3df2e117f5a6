"""Zipf popularity, cache-hit probability and its zeta-function asymptotics.

Cache policy: every BS stores the S most popular of F equal-size files, so
the hit probability is the Zipf CDF at S.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .errors import ParameterError


@dataclass(frozen=True)
class CatalogParams:
    """F files of x_f bits each, Zipf exponent nu, cache of S files per BS."""

    F: int = 100_000
    nu: float = 2.0
    S: float = 0
    x_f: float = 1e9

    def __post_init__(self):
        if int(self.F) != self.F or self.F < 1:
            raise ParameterError(f"catalog size must be an integer >= 1, got {self.F}")
        if not self.nu > 0:
            raise ParameterError(f"Zipf exponent must be positive, got {self.nu}")
        if self.nu == 1:
            raise ParameterError("Zipf exponent nu = 1 is a pole of zeta(nu); use nu != 1")
        if not 0 <= self.S <= self.F:
            raise ParameterError(f"cache size must satisfy 0 <= S <= F, got S={self.S}, F={self.F}")
        if not self.x_f > 0:
            raise ParameterError(f"file size must be positive, got {self.x_f}")
        object.__setattr__(self, "F", int(self.F))

    def with_(self, **changes) -> "CatalogParams":
        return replace(self, **changes)


@lru_cache(maxsize=256)
def harmonic_exact(n: int, nu: float) -> float:
    """Generalised harmonic number H_{n,nu} = sum_{k=1}^n k^-nu."""
    n = int(n)
    if n < 0:
        raise ParameterError(f"n must be non-negative, got {n}")
    if n == 0:
        return 0.0
    # smallest terms first; numpy's pairwise summation keeps the error O(log n) ulp
    k = np.arange(n, 0, -1, dtype=np.float64)
    return float(np.sum(k ** (-float(nu))))


def zipf_pmf(d, cat: CatalogParams):
    """Request probability of the rank-d file. Accepts scalars or arrays."""
    d_arr = np.asarray(d)
    if np.any(d_arr < 1) or np.any(d_arr > cat.F):
        raise ParameterError(f"rank must lie in [1, {cat.F}]")
    out = d_arr.astype(np.float64) ** (-cat.nu) / harmonic_exact(cat.F, cat.nu)
    return float(out) if out.ndim == 0 else out


def hit_prob_exact(cat: CatalogParams) -> float:
    """P_hit = H_{S,nu} / H_{F,nu}. Non-integer S is rounded down (whole files only)."""
    s = int(math.floor(cat.S))
    if s >= cat.F:
        return 1.0
    return harmonic_exact(s, cat.nu) / harmonic_exact(cat.F, cat.nu)


# Borwein's acceleration of the alternating eta series; 3/(3+sqrt 8)^n < 1e-31 at n=40
_ETA_TERMS = 40


@lru_cache(maxsize=None)
def _borwein_d(n: int) -> tuple:
    d = []
    acc = 0.0
    for i in range(n + 1):
        acc += n * math.factorial(n + i - 1) * 4**i / (math.factorial(n - i) * math.factorial(2 * i))
        d.append(acc)
    return tuple(d)


def zeta_riemann(nu: float) -> float:
    """Riemann zeta for real nu > 0, nu != 1, via zeta = eta / (1 - 2^(1-nu))."""
    if not nu > 0:
        raise ParameterError(f"zeta is only provided for nu > 0, got {nu}")
    if nu == 1:
        raise ParameterError("zeta(nu) has a pole at nu = 1")
    if nu > 60:
        # 2^-nu below double precision
        return 1.0 + 2.0**-nu + 3.0**-nu
    n = _ETA_TERMS
    d = _borwein_d(n)
    s = 0.0
    for k in range(n):
        s += (-1) ** k * (d[k] - d[n]) / (k + 1) ** nu
    eta = -s / d[n]
    return eta / (1.0 - 2.0 ** (1.0 - nu))


def harmonic_asymptotic(n: float, nu: float) -> float:
    """First-order approximation H_{n,nu} ~ zeta(nu) - (n+1)^(1-nu) / (nu-1)."""
    if nu == 1:
        raise ParameterError("asymptotic harmonic number undefined at nu = 1")
    return zeta_riemann(nu) - (n + 1.0) ** (1.0 - nu) / (nu - 1.0)


def hit_prob_asymptotic(cat: CatalogParams) -> float:
    """Large-S hit probability with an exact normaliser H_{F,nu}.

    Unclamped: for tiny S the value can leave [0, 1]. See
    hit_prob_asymptotic_clamped.
    """
    if cat.S < 1:
        raise ParameterError("asymptotic hit probability needs S >= 1")
    return harmonic_asymptotic(cat.S, cat.nu) / harmonic_exact(cat.F, cat.nu)


def hit_prob_asymptotic_clamped(cat: CatalogParams) -> float:
    return min(1.0, max(0.0, hit_prob_asymptotic(cat)))


def hit_prob_asymptotic_ratio(cat: CatalogParams) -> float:
    """Both numerator and denominator asymptotic; exactly 1 at S = F."""
    return harmonic_asymptotic(cat.S, cat.nu) / harmonic_asymptotic(cat.F, cat.nu)


def hit_prob_fraction_limit(s: float, nu: float) -> float:
    """Hit probability when a fixed fraction s = (S+1)/(F+1) is cached, F -> inf."""
    if not 0 < nu < 1:
        raise ParameterError(
            f"fraction limit needs 0 < nu < 1 (for nu > 1 the hit probability tends to 1), got {nu}"
        )
    if not 0 < s <= 1:
        raise ParameterError(f"cached fraction must lie in (0, 1], got {s}")
    return s ** (1.0 - nu)


def fraction_for_hit_prob(p_hit: float, nu: float) -> float:
    """Inverse of hit_prob_fraction_limit: s ~ P_hit^(1/(1-nu))."""
    if not 0 < nu < 1:
        raise ParameterError(f"fraction limit needs 0 < nu < 1, got {nu}")
    if not 0 <= p_hit <= 1:
        raise ParameterError(f"hit probability must lie in [0, 1], got {p_hit}")
    return p_hit ** (1.0 / (1.0 - nu))
