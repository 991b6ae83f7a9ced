"""Estimators of Θ(σ) = σ^{k(1−q)}, the BAEE risk and the pivotal confidence interval.

Every estimator has the form ``multiplier × T^{k(1−q)}``; the Bayes rule
replaces ``T`` by ``T + α``. The ``*_multiplier`` functions are vectorised
over the trailing ``k`` axis of ``w`` and are what the Monte-Carlo engine
calls. The scalar functions wrap them into :class:`Estimate` records.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CapacityError, DegenerateSampleError, DomainError
from .expmodel import BatchStats, EntropicConfig, SummaryStats
from .numerics import chi_square_quantile, log_gamma_ratio

__all__ = [
    "EstimatorKind",
    "Estimate",
    "BoxBound",
    "IGPrior",
    "c0",
    "c1",
    "d_r0",
    "mle_plugin",
    "baee",
    "stein",
    "bz_finite",
    "bz_smooth",
    "bayes",
    "baee_risk_closed_form",
    "confidence_interval",
    "interval_bounds",
    "stein_multiplier",
    "bz_smooth_multiplier",
    "bz_finite_multiplier",
    "d_r0_array",
    "batch_estimates",
    "MAX_SUBSET_K",
]

MAX_SUBSET_K = 20


class EstimatorKind(str, enum.Enum):
    MLE = "mle"
    BAEE = "baee"
    STEIN = "stein"
    BZ_FINITE = "bz-finite"
    BZ_SMOOTH = "bz-smooth"
    BAYES = "bayes"


@dataclass(frozen=True)
class Estimate:
    value: float
    kind: EstimatorKind
    constants: dict = field(default_factory=dict)

    @property
    def multiplier(self) -> float:
        return self.constants["multiplier"]


@dataclass(frozen=True)
class BoxBound:
    r: tuple[float, ...]

    def __post_init__(self) -> None:
        r = tuple(float(v) for v in np.atleast_1d(self.r))
        if not r or not all(math.isfinite(v) and v > 0.0 for v in r):
            raise DomainError(f"box bounds must be positive and finite (got {self.r})")
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class IGPrior:
    """Inverse-gamma prior IG(alpha, beta) on σ; ``alpha`` is the scale, ``beta`` the shape."""

    alpha: float
    beta: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(f"prior {name} must be positive (got {v})")


# -- constants ---------------------------------------------------------------


def _shapes(cfg: EntropicConfig) -> tuple[float, float]:
    a1 = cfg.shape + cfg.power
    a2 = cfg.shape + 2.0 * cfg.power
    if a2 <= 0.0:
        raise DomainError("q must satisfy 0<q<(n+1)/2, q≠1")
    return a1, a2


def c0(cfg: EntropicConfig) -> float:
    """Γ(k(n−1)+k(1−q)) / Γ(k(n−1)+2k(1−q)), the BAEE multiplier."""
    a1, a2 = _shapes(cfg)
    return math.exp(log_gamma_ratio(a1, a2))


def c1(cfg: EntropicConfig) -> float:
    """Γ(kn+k(1−q)) / Γ(kn+2k(1−q)), the multiplier when locations are known."""
    kn = float(cfg.k * cfg.n)
    return math.exp(log_gamma_ratio(kn + cfg.power, kn + 2.0 * cfg.power))


def baee_risk_closed_form(cfg: EntropicConfig) -> float:
    """Constant quadratic risk of the BAEE: 1 − Γ(A1)² / (Γ(A2) Γ(k(n−1)))."""
    a1, a2 = _shapes(cfg)
    log_ratio = 2.0 * math.lgamma(a1) - math.lgamma(a2) - math.lgamma(cfg.shape)
    return -math.expm1(log_ratio)


# -- Brewster-Zidek box constant ----------------------------------------------


def _alternating_sum(a: float, n: int, r: np.ndarray) -> np.ndarray:
    """Σ_{S⊆{1..k}} (−1)^{|S|} (1 + n R_S)^{−a} for rows of ``r`` with shape (..., k).

    The first coordinate's difference is taken analytically through
    ``expm1``/``log1p`` so the k=1 case is free of cancellation.
    """
    k = r.shape[-1]
    r_first = r[..., 0]
    rest = r[..., 1:]
    total = np.zeros(r.shape[:-1])
    for mask in range(1 << (k - 1)):
        base = np.zeros(r.shape[:-1])
        sign = 1.0
        for j in range(k - 1):
            if mask >> j & 1:
                base = base + rest[..., j]
                sign = -sign
        lead = np.exp(-a * np.log1p(n * base))
        diff = -np.expm1(-a * np.log1p(n * r_first / (1.0 + n * base)))
        total = total + sign * lead * diff
    return total


# Coordinates with n·r below this are integrated by the midpoint rule; the
# relative error is O((n r)^2), far below the cancellation it avoids.
_TINY_NR = 1e-5


def d_r0_array(cfg: EntropicConfig, r: np.ndarray) -> np.ndarray:
    """Vectorised :func:`d_r0`; ``r`` has shape ``(..., k)`` with positive entries.

    The alternating sums are k-th order differences of (1+nx)^{−A}. Tiny
    coordinates are removed through the exact box-integral form
    Δ_{r_j} f(x) = ∫_0^{r_j} −f'(x+s) ds ≈ r_j · n A (1+n(x+r_j/2))^{−A−1}, which
    keeps the ratio finite when some W_i is vanishingly small.
    """
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != cfg.k:
        raise DomainError(f"box bound has {r.shape[-1]} entries but k={cfg.k}")
    if cfg.k > MAX_SUBSET_K:
        raise CapacityError(f"k={cfg.k} exceeds subset-enumeration limit {MAX_SUBSET_K}")
    a1, a2 = _shapes(cfg)
    n = cfg.n
    lead = r.shape[:-1]
    flat = np.sort(r.reshape(-1, cfg.k), axis=-1)
    tiny = n * flat <= _TINY_NR
    m_row = tiny.sum(axis=-1)
    ratio = np.empty(flat.shape[0])
    for m in np.unique(m_row):
        rows = m_row == m
        block = flat[rows]
        # midpoint offset of the collapsed coordinates, then rescale the rest
        scale = 1.0 + n * 0.5 * block[:, :m].sum(axis=-1)
        reg = block[:, m:] / scale[:, None]
        log_front = log_gamma_ratio(a1 + m, a1) - log_gamma_ratio(a2 + m, a2) + (a2 - a1) * np.log(scale)
        if reg.shape[-1]:
            part = _alternating_sum(a1 + m, n, reg) / _alternating_sum(a2 + m, n, reg)
        else:
            part = 1.0
        ratio[rows] = np.exp(log_front) * part
    return (c0(cfg) * ratio).reshape(lead)


def d_r0(cfg: EntropicConfig, r: BoxBound | Sequence[float]) -> float:
    """Risk-minimising multiplier d(r, 0̄) on the box ×(0, r_i] at zero locations.

    Equals E[T^{k(1−q)} | W̄ ∈ B_r] / E[T^{2k(1−q)} | W̄ ∈ B_r] under μ̄ = 0̄,
    which after expanding ∏(1 − e^{−n r_i t}) is

        c0 · Σ_S (−1)^{|S|} (1+nR_S)^{−A1} / Σ_S (−1)^{|S|} (1+nR_S)^{−A2}

    with A1 = k(n−1)+k(1−q), A2 = k(n−1)+2k(1−q), R_S = Σ_{i∈S} r_i.
    Tends to c0 as every r_i → ∞.
    """
    if not isinstance(r, BoxBound):
        r = BoxBound(tuple(r))
    if cfg.k > MAX_SUBSET_K:
        raise CapacityError(f"k={cfg.k} exceeds subset-enumeration limit {MAX_SUBSET_K}")
    return float(d_r0_array(cfg, np.asarray(r.r)))


# -- vectorised multipliers -----------------------------------------------------


def _positive_rows(w: np.ndarray) -> np.ndarray:
    return np.all(w > 0.0, axis=-1)


def stein_multiplier(cfg: EntropicConfig, w: np.ndarray) -> np.ndarray:
    """Stein-type clipped multiplier ψ*(w̄).

    min{c0, c1 (1 + nΣw)^{k(1−q)}} for q < 1, max{...} for q > 1, and c0 when
    some w_i ≤ 0.
    """
    w = np.asarray(w, dtype=float)
    base = c0(cfg)
    ok = _positive_rows(w)
    total = np.where(ok, w.sum(axis=-1), 0.0)
    candidate = c1(cfg) * (1.0 + cfg.n * total) ** cfg.power
    clip = np.minimum if cfg.q < 1.0 else np.maximum
    return np.where(ok, clip(base, candidate), base)


def bz_smooth_multiplier(cfg: EntropicConfig, w: np.ndarray) -> np.ndarray:
    """Φ*(w̄) = d(w̄, 0̄) when every w_i > 0, else c0."""
    w = np.asarray(w, dtype=float)
    ok = _positive_rows(w)
    safe = np.where(ok[..., None], w, 1.0)
    return np.where(ok, d_r0_array(cfg, safe), c0(cfg))


def bz_finite_multiplier(cfg: EntropicConfig, w: np.ndarray, r: BoxBound) -> np.ndarray:
    """d(r, 0̄) when 0 < w_i ≤ r_i for all i, else c0."""
    w = np.asarray(w, dtype=float)
    bound = np.asarray(r.r)
    if bound.shape[0] != cfg.k:
        raise DomainError(f"box bound has {bound.shape[0]} entries but k={cfg.k}")
    inside = np.all((w > 0.0) & (w <= bound), axis=-1)
    return np.where(inside, d_r0(cfg, r), c0(cfg))


def _partition_multiplier(cfg: EntropicConfig, w: np.ndarray, edges: Sequence[np.ndarray]) -> np.ndarray:
    # Piecewise-constant φ_j: d(r_upper, 0̄) on each grid cell, c0 outside the grid.
    # Converges to Φ* as the mesh shrinks; used only in tests.
    w = np.asarray(w, dtype=float)
    uppers = []
    inside = np.all(w > 0.0, axis=-1)
    for i, e in enumerate(edges):
        e = np.asarray(e, dtype=float)
        idx = np.searchsorted(e, w[..., i], side="left")
        inside &= idx < len(e)
        uppers.append(e[np.minimum(idx, len(e) - 1)])
    upper = np.stack(uppers, axis=-1)
    return np.where(inside, d_r0_array(cfg, upper), c0(cfg))


# -- scalar estimators --------------------------------------------------------


def _check_stats(stats: SummaryStats, cfg: EntropicConfig) -> None:
    if stats.k != cfg.k or stats.n != cfg.n:
        raise DomainError(
            f"statistics are for k={stats.k}, n={stats.n} but config has k={cfg.k}, n={cfg.n}"
        )
    if not stats.t > 0.0:
        raise DegenerateSampleError("T must be positive")


def _scaled(stats: SummaryStats, cfg: EntropicConfig, kind: EstimatorKind, mult: float, **extra) -> Estimate:
    value = mult * stats.t ** cfg.power
    return Estimate(value=float(value), kind=kind, constants={"multiplier": float(mult), **extra})


def mle_plugin(stats: SummaryStats, cfg: EntropicConfig) -> Estimate:
    """Θ evaluated at the MLE σ̂ = T/(kn)."""
    _check_stats(stats, cfg)
    mult = float(cfg.k * cfg.n) ** (-cfg.power)
    return _scaled(stats, cfg, EstimatorKind.MLE, mult)


def baee(stats: SummaryStats, cfg: EntropicConfig) -> Estimate:
    _check_stats(stats, cfg)
    return _scaled(stats, cfg, EstimatorKind.BAEE, c0(cfg), c0=c0(cfg))


def stein(stats: SummaryStats, cfg: EntropicConfig) -> Estimate:
    _check_stats(stats, cfg)
    mult = float(stein_multiplier(cfg, np.asarray(stats.w)))
    return _scaled(stats, cfg, EstimatorKind.STEIN, mult, c0=c0(cfg), c1=c1(cfg))


def bz_finite(stats: SummaryStats, cfg: EntropicConfig, r: BoxBound | Sequence[float]) -> Estimate:
    _check_stats(stats, cfg)
    if not isinstance(r, BoxBound):
        r = BoxBound(tuple(r))
    mult = float(bz_finite_multiplier(cfg, np.asarray(stats.w), r))
    return _scaled(stats, cfg, EstimatorKind.BZ_FINITE, mult, c0=c0(cfg), r=list(r.r))


def bz_smooth(stats: SummaryStats, cfg: EntropicConfig) -> Estimate:
    _check_stats(stats, cfg)
    mult = float(bz_smooth_multiplier(cfg, np.asarray(stats.w)))
    return _scaled(stats, cfg, EstimatorKind.BZ_SMOOTH, mult, c0=c0(cfg))


def _bayes_factor(cfg: EntropicConfig, prior: IGPrior) -> float:
    b1 = cfg.shape + cfg.power + prior.beta
    b2 = cfg.shape + 2.0 * cfg.power + prior.beta
    if b1 <= 0.0 or b2 <= 0.0:
        raise DomainError("k(n−1)+2k(1−q)+beta must be positive")
    return math.exp(log_gamma_ratio(b1, b2))


def bayes(stats: SummaryStats, cfg: EntropicConfig, prior: IGPrior) -> Estimate:
    """Posterior-risk minimiser under an IG(α, β) prior on σ.

    (T+α)^{k(1−q)} Γ(k(n−1)+k(1−q)+β) / Γ(k(n−1)+2k(1−q)+β); recovers the
    BAEE as α, β → 0.
    """
    _check_stats(stats, cfg)
    factor = _bayes_factor(cfg, prior)
    value = factor * (stats.t + prior.alpha) ** cfg.power
    return Estimate(
        value=float(value),
        kind=EstimatorKind.BAYES,
        constants={"multiplier": factor, "alpha": prior.alpha, "beta": prior.beta},
    )


def batch_estimates(
    kind: EstimatorKind | str,
    cfg: EntropicConfig,
    stats: BatchStats,
    *,
    r: BoxBound | None = None,
    prior: IGPrior | None = None,
    multiplier: float | None = None,
) -> np.ndarray:
    """Estimates for every replication in ``stats``.

    ``multiplier`` overrides the BAEE constant (used to probe the risk of
    other equivariant rules ``c · T^{k(1−q)}``).
    """
    kind = EstimatorKind(kind)
    tp = stats.t ** cfg.power
    if kind is EstimatorKind.BAEE:
        return (c0(cfg) if multiplier is None else multiplier) * tp
    if kind is EstimatorKind.MLE:
        return float(cfg.k * cfg.n) ** (-cfg.power) * tp
    if kind is EstimatorKind.STEIN:
        return stein_multiplier(cfg, stats.w) * tp
    if kind is EstimatorKind.BZ_SMOOTH:
        return bz_smooth_multiplier(cfg, stats.w) * tp
    if kind is EstimatorKind.BZ_FINITE:
        if r is None:
            raise DomainError("bz-finite requires a box bound r")
        return bz_finite_multiplier(cfg, stats.w, r) * tp
    if prior is None:
        raise DomainError("bayes requires an IG(alpha, beta) prior")
    return _bayes_factor(cfg, prior) * (stats.t + prior.alpha) ** cfg.power


# -- interval -------------------------------------------------------------------


def interval_bounds(t: np.ndarray | float, cfg: EntropicConfig, alpha_level: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised endpoints of :func:`confidence_interval` over values of T."""
    if not 0.0 < alpha_level < 1.0:
        raise DomainError(f"alpha level must lie in (0, 1) (got {alpha_level})")
    dof = 2.0 * cfg.shape
    q_lo = chi_square_quantile(dof, alpha_level / 2.0)
    q_hi = chi_square_quantile(dof, 1.0 - alpha_level / 2.0)
    pivot = (2.0 * np.asarray(t, dtype=float)) ** cfg.power
    first = pivot / q_hi ** cfg.power
    second = pivot / q_lo ** cfg.power
    return np.minimum(first, second), np.maximum(first, second)


def confidence_interval(stats: SummaryStats, cfg: EntropicConfig, alpha_level: float) -> tuple[float, float]:
    """Equal-tailed 1−α interval for σ^{k(1−q)} from the pivot 2T/σ ~ χ²_{2k(n−1)}.

    Endpoints are (2T)^{k(1−q)} / χ²_p^{k(1−q)} at p = α/2 and 1−α/2,
    returned in ascending order (they swap when q > 1).
    """
    _check_stats(stats, cfg)
    lo, hi = interval_bounds(stats.t, cfg, alpha_level)
    return float(lo), float(hi)
