"""Shifted-exponential populations with a common scale, and their Tsallis entropy."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import streams
from .errors import DegenerateSampleError, DomainError, InconsistentLocationError

__all__ = [
    "EntropicConfig",
    "PopulationParams",
    "SummaryStats",
    "KnownLocationStat",
    "BatchStats",
    "check_entropic_index",
    "pdf",
    "sample",
    "sample_batch",
    "summarize",
    "summarize_batch",
    "summarize_known_location",
    "tsallis_single",
    "tsallis_joint",
    "theta",
    "read_sample_csv",
    "write_sample_csv",
]


def check_entropic_index(q: float) -> float:
    q = float(q)
    if not math.isfinite(q) or q <= 0.0 or q == 1.0:
        raise DomainError(f"q must satisfy q>0, q≠1 (got {q})")
    return q


@dataclass(frozen=True)
class EntropicConfig:
    """Problem size and entropic index.

    ``k`` populations of ``n`` observations each. The estimators need
    ``0 < q < (n+1)/2`` and ``q != 1``; both are enforced here.
    """

    k: int
    n: int
    q: float

    def __post_init__(self) -> None:
        if int(self.k) != self.k or self.k < 1:
            raise DomainError(f"k must be a positive integer (got {self.k})")
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"n must be an integer >= 2 (got {self.n})")
        q = float(self.q)
        if not (math.isfinite(q) and 0.0 < q < (self.n + 1) / 2.0 and q != 1.0):
            raise DomainError(
                f"q must satisfy 0<q<(n+1)/2, q≠1 (got q={self.q}, n={self.n})"
            )
        object.__setattr__(self, "k", int(self.k))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "q", q)

    @property
    def power(self) -> float:
        """Exponent k(1−q) carried by T in every estimator."""
        return self.k * (1.0 - self.q)

    @property
    def shape(self) -> float:
        """Gamma shape k(n−1) of the pooled statistic T (σ = 1)."""
        return float(self.k * (self.n - 1))


@dataclass(frozen=True)
class PopulationParams:
    u: tuple[float, ...]
    sigma: float

    def __post_init__(self) -> None:
        u = tuple(float(v) for v in np.atleast_1d(self.u))
        if not u or not all(math.isfinite(v) for v in u):
            raise DomainError("u must be a non-empty vector of finite reals")
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise DomainError(f"sigma must be positive (got {self.sigma})")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "sigma", float(self.sigma))

    def check(self, cfg: EntropicConfig) -> None:
        if len(self.u) != cfg.k:
            raise DomainError(f"u has {len(self.u)} entries but k={cfg.k}")


@dataclass(frozen=True)
class SummaryStats:
    """Sufficient statistics of one k×n sample."""

    x_min: tuple[float, ...]
    t: float
    w: tuple[float, ...]
    k: int
    n: int


@dataclass(frozen=True)
class KnownLocationStat:
    s: float


@dataclass(frozen=True)
class BatchStats:
    """Sufficient statistics of M replications stacked along axis 0."""

    x_min: np.ndarray  # (M, k)
    t: np.ndarray  # (M,)
    w: np.ndarray  # (M, k)
    k: int
    n: int


def pdf(x: float, u: float, sigma: float) -> float:
    """Density of the exponential distribution shifted to ``u``, closed at ``x = u``."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive (got {sigma})")
    if x < u:
        return 0.0
    return math.exp(-(x - u) / sigma) / sigma


def sample_batch(
    cfg: EntropicConfig, params: PopulationParams, seeds: np.ndarray
) -> np.ndarray:
    """Draw one k×n sample per stream seed; returns shape ``(len(seeds), k, n)``.

    Observation ``(i, j)`` uses draw ``i*n + j`` of its stream and is
    ``u_i − σ·ln U`` with ``U`` on (0, 1].
    """
    params.check(cfg)
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    unif = streams.uniforms(seeds, cfg.k * cfg.n).reshape(len(seeds), cfg.k, cfg.n)
    u = np.asarray(params.u)[None, :, None]
    return u - params.sigma * np.log(unif)


def sample(cfg: EntropicConfig, params: PopulationParams, seed: int) -> np.ndarray:
    """Deterministic k×n sample for a 64-bit ``seed``."""
    return sample_batch(cfg, params, np.array([seed & streams.MASK64], dtype=np.uint64))[0]


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise DomainError("sample must be a k×n matrix")
    if arr.shape[1] < 2:
        raise DomainError(f"n must be an integer >= 2 (got {arr.shape[1]})")
    if not np.all(np.isfinite(arr)):
        raise DomainError("sample contains non-finite values")
    return arr


def summarize(data) -> SummaryStats:
    """Per-population minima, pooled deviation T and ratios W = X_min / T.

    Raises:
        DegenerateSampleError: if T == 0.
    """
    arr = _as_matrix(data)
    x_min = arr.min(axis=1)
    t = float((arr - x_min[:, None]).sum())
    if not t > 0.0:
        raise DegenerateSampleError("T = 0: every population is constant")
    return SummaryStats(
        x_min=tuple(x_min.tolist()),
        t=t,
        w=tuple((x_min / t).tolist()),
        k=arr.shape[0],
        n=arr.shape[1],
    )


def summarize_batch(data: np.ndarray) -> BatchStats:
    """Vectorised :func:`summarize` over a ``(M, k, n)`` stack."""
    x_min = data.min(axis=2)
    t = (data - x_min[:, :, None]).sum(axis=(1, 2))
    bad = np.flatnonzero(~(t > 0.0))
    if bad.size:
        raise DegenerateSampleError(f"T = 0 in replication {int(bad[0])}")
    return BatchStats(x_min=x_min, t=t, w=x_min / t[:, None], k=data.shape[1], n=data.shape[2])


def summarize_known_location(data, u: Sequence[float]) -> KnownLocationStat:
    arr = _as_matrix(data)
    loc = np.asarray(u, dtype=float).reshape(-1)
    if loc.shape[0] != arr.shape[0]:
        raise DomainError(f"u has {loc.shape[0]} entries but data has {arr.shape[0]} rows")
    dev = arr - loc[:, None]
    if np.any(dev < 0.0):
        raise InconsistentLocationError("observation below its location parameter")
    s = float(dev.sum())
    if not s > 0.0:
        raise DegenerateSampleError("S = 0: every observation equals its location")
    return KnownLocationStat(s=s)


def tsallis_single(q: float, sigma: float) -> float:
    """Tsallis entropy (1/(q−1))(1 − 1/(q σ^{q−1})) of one population."""
    q = check_entropic_index(q)
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive (got {sigma})")
    return (1.0 - 1.0 / (q * sigma ** (q - 1.0))) / (q - 1.0)


def tsallis_joint(k: int, q: float, sigma: float) -> float:
    """Joint Tsallis entropy of ``k`` independent populations sharing ``sigma``.

    Location parameters do not enter. With Δ = 1/(q σ^{q−1}) the value is
    (1 − Δ^k)/(q − 1).
    """
    if int(k) != k or k < 1:
        raise DomainError(f"k must be a positive integer (got {k})")
    q = check_entropic_index(q)
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive (got {sigma})")
    log_delta = -math.log(q) - (q - 1.0) * math.log(sigma)
    return -math.expm1(k * log_delta) / (q - 1.0)


def theta(cfg: EntropicConfig, sigma: float) -> float:
    """Estimand σ^{−k(q−1)}."""
    if not sigma > 0.0:
        raise DomainError(f"sigma must be positive (got {sigma})")
    return sigma ** cfg.power


def read_sample_csv(path: str | Path) -> np.ndarray:
    """Read a k×n sample: one population per row, no header, ragged rows rejected."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            cells = [c.strip() for c in row if c.strip() != ""]
            if not cells:
                continue
            try:
                rows.append([float(c) for c in cells])
            except ValueError as exc:
                raise DomainError(f"malformed CSV at line {lineno}: {exc}") from None
    if not rows:
        raise DomainError("CSV sample is empty")
    widths = {len(r) for r in rows}
    if len(widths) != 1:
        raise DomainError(f"ragged CSV sample: row lengths {sorted(widths)}")
    return _as_matrix(rows)


def write_sample_csv(data: np.ndarray, path: str | Path) -> None:
    arr = _as_matrix(data)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in arr:
            writer.writerow([repr(float(v)) for v in row])
