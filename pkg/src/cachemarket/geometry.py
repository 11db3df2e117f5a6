"""Downlink SINR coverage and per-UE throughput for a PPP cellular layout.

The typical UE sits at the origin and attaches to its nearest BS. Interferers
are the remaining BSs on the same subchannel, an independent thinning with
retention 1/L, so lambda_I = lambda / L. All fading is Rayleigh (unit-mean
exponential power gains). Everything here is linear scale; dB conversion
lives in the scenario loader.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy import integrate, optimize, special

from .errors import NumericalError, ParameterError

QUAD_EPSABS = 1e-9
# exact-coverage integrand is cut where it drops below this fraction of its peak
TRUNCATION_RATIO = 1e-14


@dataclass(frozen=True)
class NetworkParams:
    """Radio and deployment constants for one MNO.

    Units: p [W], sigma2 [W], lam [BS/m^2], bandwidth [Hz], xi [UE/m^2].
    t_bar is the linear SINR threshold.
    """

    p: float = 1.0
    sigma2: float = 1e-18
    alpha: float = 5.0
    t_bar: float = 10.0
    lam: float = 1e-4
    subchannels: int = 6
    bandwidth: float = 1e9
    xi: float = 60 / (math.pi * 500**2)
    eta: float = 0.014

    def __post_init__(self):
        if not self.alpha > 2:
            raise ParameterError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if not self.lam > 0:
            raise ParameterError(f"BS intensity must be positive, got {self.lam}")
        if int(self.subchannels) != self.subchannels or self.subchannels < 1:
            raise ParameterError(f"subchannels must be an integer >= 1, got {self.subchannels}")
        if not self.t_bar > 0:
            raise ParameterError(f"SINR threshold must be positive, got {self.t_bar}")
        if not 0 < self.eta < 1:
            raise ParameterError(f"UE activity must lie in (0, 1), got {self.eta}")
        if not self.bandwidth > 0:
            raise ParameterError(f"bandwidth must be positive, got {self.bandwidth}")
        if not self.p > 0:
            raise ParameterError(f"transmit power must be positive, got {self.p}")
        if self.sigma2 < 0 or self.xi < 0:
            raise ParameterError("noise power and UE intensity must be non-negative")
        object.__setattr__(self, "subchannels", int(self.subchannels))

    @property
    def lambda_a(self) -> float:
        return self.lam

    @property
    def lambda_i(self) -> float:
        return self.lam / self.subchannels

    def with_(self, **changes) -> "NetworkParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class CoverageResult:
    p_c: float
    beta: float
    method: str  # "exact_integral" | "closed_form" | "interference_limited"


def _beta_integrand(g, t_bar, alpha):
    # Gamma(-d, x) - Gamma(-d) = (lower_gamma(1-d, x) + x^-d e^-x) / d with d = 2/alpha.
    # Multiplied by g^d and the 2 t^d / alpha prefactor this collapses to the form below.
    d = 2.0 / alpha
    x = t_bar * g
    lower = special.gammainc(1.0 - d, x) * special.gamma(1.0 - d)
    return math.exp(-g) * (t_bar**d * g**d * lower + math.exp(-x))


def compute_beta(params: NetworkParams) -> float:
    """Interference coefficient beta (>= 1 for any threshold).

    beta - 1 is the mean interference-to-nearest-distance factor of the
    thinned interferer field. Both Gamma terms sit inside the fading
    expectation. The fading of the desired link is normalised by p, so beta
    depends on t_bar and alpha only.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(
                _beta_integrand, 0.0, np.inf, args=(params.t_bar, params.alpha),
                epsabs=QUAD_EPSABS, epsrel=1e-11, limit=200,
            )
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"beta quadrature did not converge: {exc}") from exc
    if not np.isfinite(val) or err > 1e-6:
        raise NumericalError("beta quadrature did not converge", residual=err)
    return float(val)


def interference_limited(params: NetworkParams, beta: float | None = None) -> CoverageResult:
    b = compute_beta(params) if beta is None else beta
    L = params.subchannels
    return CoverageResult(L / (b + L - 1), b, "interference_limited")


def coverage_exact(params: NetworkParams, beta: float | None = None) -> CoverageResult:
    """P_c = pi lam_A * int_0^inf exp(-(A z + B z^(alpha/2))) dz, by quadrature."""
    b = compute_beta(params) if beta is None else beta
    a_bar = math.pi * (params.lambda_i * (b - 1.0) + params.lambda_a)
    b_bar = params.t_bar * params.sigma2 / params.p
    half = params.alpha / 2.0

    def expo(z):
        return a_bar * z + b_bar * z**half

    # integrand is exp(-expo); peak is 1 at z = 0
    target = -math.log(TRUNCATION_RATIO)
    z_hi = target / a_bar
    if b_bar > 0:
        z_hi = min(z_hi, (target / b_bar) ** (1.0 / half))
    z_max = optimize.brentq(lambda z: expo(z) - target, 0.0, z_hi * (1 + 1e-12) + 1e-300)

    # substitute z = u / a_bar so the integrand is O(1) over u in [0, a_bar z_max]
    def f(u):
        return math.exp(-(u + b_bar * (u / a_bar) ** half))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, 0.0, a_bar * z_max, epsabs=1e-13, epsrel=1e-12, limit=200)
        except integrate.IntegrationWarning as exc:
            raise NumericalError(f"coverage quadrature did not converge: {exc}") from exc
    p_c = math.pi * params.lambda_a * val / a_bar
    return CoverageResult(min(max(p_c, 0.0), 1.0), b, "exact_integral")


def coverage_closed_form(params: NetworkParams, beta: float | None = None) -> CoverageResult:
    b = compute_beta(params) if beta is None else beta
    a = params.alpha
    noise = (a / (2 * math.pi * params.lam * math.gamma(2 / a))) * (
        params.t_bar * params.sigma2 / params.p
    ) ** (2 / a)
    p_c = 1.0 / (1.0 + (b - 1.0) / params.subchannels + noise)
    return CoverageResult(p_c, b, "closed_form")


def throughput(params: NetworkParams, p_c: float) -> float:
    """Per-UE throughput G = p_c (W / L) log2(1 + t_bar), in bit/s."""
    if not 0.0 <= p_c <= 1.0:
        raise ParameterError(f"coverage probability must lie in [0, 1], got {p_c}")
    return p_c * params.bandwidth / params.subchannels * math.log2(1.0 + params.t_bar)


def coverage(params: NetworkParams, method: str = "closed_form") -> CoverageResult:
    fns = {
        "closed_form": coverage_closed_form,
        "exact_integral": coverage_exact,
        "interference_limited": interference_limited,
    }
    try:
        return fns[method](params)
    except KeyError:
        raise ParameterError(f"unknown coverage method {method!r}") from None
