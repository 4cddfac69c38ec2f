"""Exact fractional Gaussian noise and drifted (f)Bm log-level paths.

Increments are drawn by circulant embedding of the fGn autocovariance
(Davies-Harte); the Durbin-Levinson recursion (Hosking's method) is kept as a
fallback and as an independent generator for cross-checks.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path as FsPath
from typing import Iterator, Literal

import numpy as np

from .errors import ParameterDomainError

__all__ = [
    "TRADING_DAYS_PER_YEAR",
    "SimConfig",
    "Path",
    "FgnSpec",
    "fgn_covariance",
    "generate_fgn",
    "replicate_rng",
    "generate_path",
    "iter_ensemble",
    "generate_ensemble",
    "write_ensemble_csv",
    "read_ensemble_csv",
]

log = logging.getLogger(__name__)

TRADING_DAYS_PER_YEAR = 256
EIGEN_TOL = 1e-10

SigmaScaling = Literal["step", "horizon"]


def _check_hurst(hurst: float) -> None:
    if not (0.0 < hurst < 1.0):
        raise ParameterDomainError(f"hurst must lie in (0, 1), got {hurst!r}")


@dataclass(frozen=True)
class SimConfig:
    """Parameters of a synthetic experiment, in annual units.

    ``sigma_scaling`` selects how the annual volatility maps to a grid step:

    * ``"step"`` (default): every step has deviation ``sigma * sqrt(dt)``, i.e.
      the daily volatility is ``sigma / sqrt(256)`` whatever ``hurst`` is.
    * ``"horizon"``: step deviation ``sigma * dt**hurst`` so that the
      one-year spread equals ``sigma`` for every ``hurst``.

    Both coincide for ``hurst == 0.5``.
    """

    hurst: float = 0.5
    mu_annual: float = 0.05
    sigma_annual: float = 0.05
    years: float = 1.0
    steps_per_year: int = TRADING_DAYS_PER_YEAR
    replicates: int = 1000
    seed: int = 0
    sigma_scaling: SigmaScaling = "step"

    def __post_init__(self) -> None:
        _check_hurst(self.hurst)
        if not self.sigma_annual >= 0.0:
            raise ParameterDomainError(f"sigma_annual must be >= 0, got {self.sigma_annual!r}")
        if not self.years > 0.0:
            raise ParameterDomainError(f"years must be > 0, got {self.years!r}")
        if int(self.steps_per_year) != self.steps_per_year or self.steps_per_year < 1:
            raise ParameterDomainError(f"steps_per_year must be a positive integer, got {self.steps_per_year!r}")
        if int(self.replicates) != self.replicates or self.replicates < 1:
            raise ParameterDomainError(f"replicates must be a positive integer, got {self.replicates!r}")
        if not (0 <= int(self.seed) < 2**64):
            raise ParameterDomainError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.sigma_scaling not in ("step", "horizon"):
            raise ParameterDomainError(f"unknown sigma_scaling {self.sigma_scaling!r}")
        if self.n_steps < 1:
            raise ParameterDomainError("years * steps_per_year must round to at least one step")

    @property
    def n_steps(self) -> int:
        return int(round(self.years * self.steps_per_year))

    @property
    def dt_years(self) -> float:
        return 1.0 / self.steps_per_year

    @property
    def dt_days(self) -> float:
        return TRADING_DAYS_PER_YEAR / self.steps_per_year

    @property
    def step_sigma(self) -> float:
        exponent = 0.5 if self.sigma_scaling == "step" else self.hurst
        return self.sigma_annual * self.dt_years**exponent

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SimConfig":
        return cls(**data)

    def replace(self, **changes) -> "SimConfig":
        return SimConfig(**{**self.to_dict(), **changes})


@dataclass(frozen=True)
class Path:
    """Log-level trajectory ``X(t_i)`` on the grid ``t_i = i * dt_days``."""

    dt_days: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 1:
            raise ParameterDomainError("path values must be a non-empty 1-d array")
        if values[0] != 0.0:
            raise ParameterDomainError("path must start at the origin of the log scale")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_steps(self) -> int:
        return self.values.size - 1

    @property
    def times_days(self) -> np.ndarray:
        return np.arange(self.values.size) * self.dt_days


@dataclass(frozen=True)
class FgnSpec:
    n: int
    hurst: float

    def __post_init__(self) -> None:
        _check_hurst(self.hurst)
        if int(self.n) != self.n or self.n < 1:
            raise ParameterDomainError(f"n must be a positive integer, got {self.n!r}")


def fgn_covariance(lag, hurst: float):
    """Autocovariance of unit fractional Gaussian noise at integer ``lag``.

    Accepts a scalar or an array of lags; ``gamma(0) == 1``.
    """
    _check_hurst(hurst)
    k = np.abs(np.asarray(lag, dtype=float))
    two_h = 2.0 * hurst
    gamma = 0.5 * (np.abs(k - 1.0) ** two_h - 2.0 * k**two_h + (k + 1.0) ** two_h)
    return float(gamma) if gamma.ndim == 0 else gamma


@lru_cache(maxsize=64)
def _circulant_sqrt_eigs(n: int, hurst: float) -> np.ndarray | None:
    """Square roots of ``eig / M`` for the size ``M = 2n`` embedding, or None."""
    gamma = fgn_covariance(np.arange(n + 1), hurst)
    row = np.concatenate([gamma, gamma[-2:0:-1]])
    eigs = np.fft.fft(row).real
    if eigs.min() < -EIGEN_TOL:
        return None
    out = np.sqrt(np.clip(eigs, 0.0, None) / row.size)
    out.setflags(write=False)
    return out


def _fgn_circulant(n: int, sqrt_eigs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    m = sqrt_eigs.size
    z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    return np.fft.fft(sqrt_eigs * z).real[:n]


def _fgn_hosking(n: int, hurst: float, rng: np.random.Generator) -> np.ndarray:
    gamma = fgn_covariance(np.arange(n), hurst)
    z = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = z[0]
    phi = np.empty(0)
    var = 1.0
    for t in range(1, n):
        k = (gamma[t] - phi @ gamma[t - 1 : 0 : -1]) / var
        phi = np.append(phi - k * phi[::-1], k)
        var *= 1.0 - k * k
        x[t] = phi @ x[t - 1 :: -1] + np.sqrt(var) * z[t]
    return x


def generate_fgn(
    spec: FgnSpec,
    rng: np.random.Generator,
    method: Literal["auto", "circulant", "hosking"] = "auto",
) -> np.ndarray:
    """Draw ``spec.n`` stationary unit-variance fGn increments.

    ``"auto"`` uses circulant embedding and silently falls back to the
    recursive method when the embedding has a genuinely negative eigenvalue.
    """
    n, hurst = spec.n, spec.hurst
    if method == "hosking":
        return _fgn_hosking(n, hurst, rng)
    if hurst == 0.5:
        return rng.standard_normal(n)
    sqrt_eigs = _circulant_sqrt_eigs(n, hurst)
    if sqrt_eigs is None:
        if method == "circulant":
            raise ParameterDomainError(f"circulant embedding not nonnegative for n={n}, H={hurst}")
        log.warning("circulant embedding failed for n=%d, H=%g; using recursive sampler", n, hurst)
        return _fgn_hosking(n, hurst, rng)
    return _fgn_circulant(n, sqrt_eigs, rng)


def replicate_rng(seed: int, replicate_index: int) -> np.random.Generator:
    """Independent stream for one replicate, a pure function of its arguments."""
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(replicate_index),)))


def generate_path(config: SimConfig, replicate_index: int) -> Path:
    if not (0 <= replicate_index < config.replicates):
        raise ParameterDomainError(
            f"replicate_index {replicate_index} outside [0, {config.replicates})"
        )
    n = config.n_steps
    values = config.mu_annual * config.dt_years * np.arange(n + 1)
    if config.sigma_annual > 0.0:
        rng = replicate_rng(config.seed, replicate_index)
        noise = generate_fgn(FgnSpec(n, config.hurst), rng)
        values[1:] += config.step_sigma * np.cumsum(noise)
    return Path(config.dt_days, values)


def iter_ensemble(config: SimConfig, workers: int = 1) -> Iterator[Path]:
    """Yield the replicates in index order; output is independent of ``workers``."""
    indices = range(config.replicates)
    if workers <= 1:
        for i in indices:
            yield generate_path(config, i)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(lambda i: generate_path(config, i), indices)


def generate_ensemble(config: SimConfig, workers: int = 1) -> list[Path]:
    return list(iter_ensemble(config, workers))


def write_ensemble_csv(paths: list[Path], config: SimConfig, out: str | FsPath) -> tuple[FsPath, FsPath]:
    """Write one row per path (columns ``t_0..t_n``) plus a JSON config header."""
    out = FsPath(out)
    n = paths[0].n_steps
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"t_{i}" for i in range(n + 1)])
        for p in paths:
            writer.writerow([repr(float(v)) for v in p.values])
    header = out.with_suffix(".json")
    header.write_text(json.dumps({"config": config.to_dict(), "dt_days": config.dt_days}, indent=2))
    return out, header


def read_ensemble_csv(path: str | FsPath) -> tuple[list[Path], SimConfig]:
    path = FsPath(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    config = SimConfig.from_dict(meta["config"])
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))[1:]
    return [Path(meta["dt_days"], np.array([float(v) for v in r])) for r in rows], config
