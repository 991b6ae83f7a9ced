"""Quadrature ground truth for the closed forms in :mod:`tsallisexp.estimators`.

Nothing here calls the closed-form gamma ratios being checked; every value is
an integral of a density evaluated with ``scipy.integrate.quad``. Gamma-type
integrals are split at 1/rate: the piece next to 0 uses an algebraic-weight rule
that absorbs the endpoint power exactly, the tail is integrated on a finite
window around the mode and then to infinity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .expmodel import EntropicConfig
from .estimators import BoxBound, IGPrior, c0, c1, d_r0

__all__ = [
    "QuadratureSpec",
    "DEFAULT_SPEC",
    "moment_T",
    "moment_T_with_error",
    "c0_oracle",
    "c1_oracle",
    "d_r0_oracle",
    "bayes_factor_oracle",
    "posterior_mass",
    "baee_risk_oracle",
    "constant_rule_risk",
    "single_population_risk",
    "stein_kink",
    "oracle_grid",
    "CheckRow",
    "run_checks",
]


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 2000

    def __post_init__(self) -> None:
        if not (self.abs_tol > 0 and self.rel_tol > 0 and self.max_subdivisions > 0):
            raise DomainError("quadrature tolerances must be positive")


DEFAULT_SPEC = QuadratureSpec()


def _quad(f, a, b, spec: QuadratureSpec, **kw) -> tuple[float, float]:
    val, err = integrate.quad(
        f, a, b, epsabs=spec.abs_tol, epsrel=spec.rel_tol, limit=spec.max_subdivisions, **kw
    )
    return val, err


def _gamma_kernel_integral(
    power: float,
    log_norm: float,
    g: Callable[[float], float] | None = None,
    rate: float = 1.0,
    spec: QuadratureSpec = DEFAULT_SPEC,
) -> tuple[float, float]:
    """∫_0^∞ t^{power−1} e^{−rate·t} g(t) dt · e^{−log_norm}, with error estimate.

    ``log_norm`` is the log normaliser of the density being integrated; it
    only keeps the integrand near unit scale.
    """
    if power <= 0.0:
        raise DomainError(f"integral diverges at 0 for power {power}")
    g = g or (lambda t: 1.0)

    def head(t):
        return math.exp(-rate * t - log_norm) * g(t)

    def tail(t):
        return math.exp((power - 1.0) * math.log(t) - rate * t - log_norm) * g(t)

    edge = 1.0 / rate
    split = max(2.0, 2.0 * power + 10.0) / rate
    mode = (power - 1.0) / rate
    v0, e0 = _quad(head, 0.0, edge, spec, weight="alg", wvar=(power - 1.0, 0.0))
    pts = [mode] if edge < mode < split else None
    v1, e1 = _quad(tail, edge, split, spec, points=pts)
    v2, e2 = _quad(tail, split, np.inf, spec)
    return v0 + v1 + v2, e0 + e1 + e2


def _moment_T(cfg: EntropicConfig, a: float, spec: QuadratureSpec) -> tuple[float, float]:
    base = cfg.shape
    if base + a <= 0.0:
        raise DomainError(f"E[T^{a}] diverges: need k(n−1)+a > 0")
    # t^a times the Gamma(k(n−1), 1) density
    return _gamma_kernel_integral(base + a, special.gammaln(base), spec=spec)


def moment_T(cfg: EntropicConfig, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E[T^a] at σ = 1 by quadrature of the Gamma(k(n−1)) density of T."""
    return _moment_T(cfg, a, spec)[0]


def moment_T_with_error(cfg: EntropicConfig, a: float, spec: QuadratureSpec = DEFAULT_SPEC) -> tuple[float, float]:
    return _moment_T(cfg, a, spec)


def c0_oracle(cfg: EntropicConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """E[T^{k(1−q)}] / E[T^{2k(1−q)}] by quadrature."""
    return moment_T(cfg, cfg.power, spec) / moment_T(cfg, 2.0 * cfg.power, spec)


def c1_oracle(cfg: EntropicConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Same ratio for S ~ Gamma(kn), the pooled statistic with known locations."""
    kn = float(cfg.k * cfg.n)

    def raw(a):
        return _gamma_kernel_integral(kn + a, special.gammaln(kn), spec=spec)[0]

    return raw(cfg.power) / raw(2.0 * cfg.power)


def _box_weight(n: int, r: tuple[float, ...]) -> Callable[[float], float]:
    def g(t: float) -> float:
        out = 1.0
        for ri in r:
            out *= -math.expm1(-n * ri * t)
        return out

    return g


def d_r0_oracle(
    cfg: EntropicConfig, r: BoxBound | tuple[float, ...], spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """Conditional moment ratio on the box B_r at μ̄ = 0̄ by quadrature.

    The conditional density of T given W̄ ∈ B_r is proportional to
    t^{k(n−1)−1} e^{−t} ∏(1 − e^{−n r_i t}).
    """
    if not isinstance(r, BoxBound):
        r = BoxBound(tuple(r))
    if len(r.r) != cfg.k:
        raise DomainError(f"box bound has {len(r.r)} entries but k={cfg.k}")
    g = _box_weight(cfg.n, r.r)
    s1 = cfg.shape + cfg.power
    s2 = cfg.shape + 2.0 * cfg.power
    log_norm = special.gammaln(cfg.shape)
    num, _ = _gamma_kernel_integral(s1, log_norm, g, spec=spec)
    den, _ = _gamma_kernel_integral(s2, log_norm, g, spec=spec)
    return num / den


def _posterior_shape(cfg: EntropicConfig, prior: IGPrior) -> float:
    return cfg.shape + prior.beta


def bayes_factor_oracle(
    cfg: EntropicConfig, prior: IGPrior, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """Bayes estimate E[Θ^{-1} | T=t] / E[Θ^{-2} | T=t] by quadrature.

    The posterior of σ is ∝ σ^{−(k(n−1)+β+1)} e^{−(t+α)/σ}. Each moment is
    integrated in the precision λ = 1/σ, whose posterior density is
    λ^{s−1} e^{−(t+α)λ} (t+α)^s / Γ(s) with s = k(n−1)+β.
    """
    if not t > 0.0:
        raise DomainError("t must be positive")
    s = _posterior_shape(cfg, prior)
    rate = t + prior.alpha
    a = cfg.power

    log_norm = special.gammaln(s) - s * math.log(rate)

    def moment(b: float) -> float:
        if s + b <= 0.0:
            raise DomainError("posterior moment diverges")
        return _gamma_kernel_integral(s + b, log_norm, rate=rate, spec=spec)[0]

    # Θ = σ^{a} so Θ^{-1} = λ^{a}, Θ^{-2} = λ^{2a}
    return moment(a) / moment(2.0 * a)


def posterior_mass(
    cfg: EntropicConfig, prior: IGPrior, t: float, spec: QuadratureSpec = DEFAULT_SPEC
) -> float:
    """∫ h(σ | t) dσ computed directly in σ (should be 1)."""
    s = _posterior_shape(cfg, prior)
    c = t + prior.alpha
    log_norm = s * math.log(c) - special.gammaln(s)

    def h(sig: float) -> float:
        return math.exp(log_norm - (s + 1.0) * math.log(sig) - c / sig)

    mode = c / (s + 1.0)
    v1, _ = _quad(h, 0.0, mode, spec)
    v2, _ = _quad(h, mode, 50.0 * mode, spec)
    v3, _ = _quad(h, 50.0 * mode, np.inf, spec)
    return v1 + v2 + v3


def constant_rule_risk(cfg: EntropicConfig, c: float, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    """Risk c² E[T^{2k(1−q)}] − 2c E[T^{k(1−q)}] + 1 of the rule c·T^{k(1−q)}."""
    m1 = moment_T(cfg, cfg.power, spec)
    m2 = moment_T(cfg, 2.0 * cfg.power, spec)
    return c * c * m2 - 2.0 * c * m1 + 1.0


def baee_risk_oracle(cfg: EntropicConfig, spec: QuadratureSpec = DEFAULT_SPEC) -> float:
    return constant_rule_risk(cfg, c0_oracle(cfg, spec), spec)


def stein_kink(cfg: EntropicConfig) -> float:
    """Ratio w at which the two branches of the Stein multiplier meet (k = 1)."""
    return ((c0(cfg) / c1(cfg)) ** (1.0 / cfg.power) - 1.0) / (cfg.n * cfg.k)


def single_population_risk(
    cfg: EntropicConfig,
    u: float,
    multiplier: Callable[[float], float],
    spec: QuadratureSpec = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11),
    breakpoints: tuple[float, ...] = (),
) -> float:
    """Exact quadratic risk of ``multiplier(W) · T^{1−q}`` for k = 1, σ = 1, location u ≥ 0.

    Uses the joint density of (T, W),
    n e^{nu} t^{n−1} e^{−t(1+nw)} / Γ(n−1) on t ≥ u/w, and integrates the
    t-direction in closed form with the upper incomplete gamma function. The
    remaining w-integral is done by quadrature.
    """
    if cfg.k != 1:
        raise DomainError("single_population_risk needs k = 1")
    if u < 0.0:
        raise DomainError("single_population_risk needs u >= 0")
    n = cfg.n
    a = cfg.power
    log_front = math.log(n) + n * u - special.gammaln(n - 1)

    def partial(s: float, lam: float, lower: float) -> float:
        # ∫_lower^∞ t^{s−1} e^{−λt} dt · e^{log_front}
        q = special.gammaincc(s, lam * lower) if lower > 0.0 else 1.0
        if q == 0.0:
            return 0.0
        return q * math.exp(log_front + special.gammaln(s) - s * math.log(lam))

    def integrand(w: float) -> float:
        if w <= 0.0:
            return 0.0
        phi = multiplier(w)
        lam = 1.0 + n * w
        lower = u / w
        return (
            phi * phi * partial(n + 2.0 * a, lam, lower)
            - 2.0 * phi * partial(n + a, lam, lower)
            + partial(float(n), lam, lower)
        )

    cuts = sorted({p for p in breakpoints if p > 0.0} | {1.0 / n, 1.0, 10.0})
    total = 0.0
    lo = 0.0
    for hi in cuts:
        total += _quad(integrand, lo, hi, spec)[0]
        lo = hi
    total += _quad(integrand, lo, np.inf, spec)[0]
    return total


# -- pre-registered comparison grid ------------------------------------------

GRID_K = (1, 2, 3)
GRID_N = (2, 4, 8)
GRID_Q = (0.2, 0.5, 0.8, 1.2, 1.4)
GRID_R = (0.05, 0.5, 3.0)
GRID_PRIORS = ((1.0, 1.0), (0.5, 2.0))
GRID_T = (0.5, 3.0)


def oracle_grid() -> Iterator[EntropicConfig]:
    """Valid configurations of k ∈ {1,2,3} × n ∈ {2,4,8} × q ∈ {0.2,0.5,0.8,1.2,1.4}."""
    for k in GRID_K:
        for n in GRID_N:
            for q in GRID_Q:
                if q < (n + 1) / 2.0:
                    yield EntropicConfig(k, n, q)


@dataclass(frozen=True)
class CheckRow:
    quantity: str
    k: int
    n: int
    q: float
    detail: str
    closed_form: float
    oracle: float
    tolerance: float

    @property
    def abs_gap(self) -> float:
        return abs(self.closed_form - self.oracle)

    @property
    def rel_gap(self) -> float:
        return self.abs_gap / abs(self.oracle)

    @property
    def passed(self) -> bool:
        return self.rel_gap <= self.tolerance


def _box_grid(k: int) -> Iterator[tuple[float, ...]]:
    for r in GRID_R:
        yield (r,) * k
    if k > 1:
        yield tuple(GRID_R[i % len(GRID_R)] for i in range(k))


def run_checks(tolerance: float = 1e-8, spec: QuadratureSpec = DEFAULT_SPEC) -> list[CheckRow]:
    """Compare every closed form with its oracle over the pre-registered grid."""
    # Imported here to keep the dependency one-way at module import time.
    from .estimators import _bayes_factor, baee_risk_closed_form

    rows: list[CheckRow] = []
    for cfg in oracle_grid():
        key = (cfg.k, cfg.n, cfg.q)
        rows.append(CheckRow("c0", *key, "", c0(cfg), c0_oracle(cfg, spec), tolerance))
        rows.append(CheckRow("c1", *key, "", c1(cfg), c1_oracle(cfg, spec), tolerance))
        rows.append(
            CheckRow("baee_risk", *key, "", baee_risk_closed_form(cfg), baee_risk_oracle(cfg, spec), tolerance)
        )
        for r in _box_grid(cfg.k):
            detail = "r=" + ";".join(f"{v:g}" for v in r)
            rows.append(CheckRow("d_r0", *key, detail, d_r0(cfg, r), d_r0_oracle(cfg, r, spec), tolerance))
        for alpha, beta in GRID_PRIORS:
            prior = IGPrior(alpha, beta)
            for t in GRID_T:
                closed = _bayes_factor(cfg, prior) * (t + alpha) ** cfg.power
                detail = f"alpha={alpha:g};beta={beta:g};t={t:g}"
                rows.append(
                    CheckRow("bayes", *key, detail, closed, bayes_factor_oracle(cfg, prior, t, spec), tolerance)
                )
    return rows
