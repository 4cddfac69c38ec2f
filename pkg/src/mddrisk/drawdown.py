"""Maximum drawdown of a trajectory and Monte Carlo estimates of E(MDD)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .errors import InputError
from .fbm_sim import SimConfig, iter_ensemble

__all__ = [
    "DrawdownReport",
    "EmddCurve",
    "max_drawdown",
    "checkpoint_indices",
    "mdd_checkpoints",
    "estimate_emdd",
    "write_emdd_csv",
    "read_emdd_csv",
]


@dataclass(frozen=True)
class DrawdownReport:
    mdd: float
    peak_index: int
    trough_index: int
    checkpoints: tuple[tuple[float, float], ...] = ()


@dataclass(frozen=True)
class EmddCurve:
    """Ensemble mean of prefix MDD at each checkpoint, with its standard error."""

    hurst: float
    points: tuple[tuple[float, float, float], ...]
    replicates: int

    @property
    def t_days(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def mean(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])

    @property
    def std(self) -> np.ndarray:
        """Ensemble standard deviation (spread of a single trajectory)."""
        return self.stderr * np.sqrt(self.replicates)


def _as_series(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    if x.ndim != 1 or x.size == 0:
        raise InputError("series must be a non-empty 1-d sequence")
    return x


def _drawdown(x: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(x) - x


def max_drawdown(series, k: int | None = None, dt_days: float = 1.0) -> DrawdownReport:
    """Largest fall from a running peak; earliest peak, then earliest trough, on ties.

    With ``k`` the report also carries the ``k`` prefix checkpoints.
    """
    x = _as_series(series)
    dd = _drawdown(x)
    trough = int(np.argmax(dd))
    peak = int(np.argmax(x[: trough + 1]))
    checkpoints = tuple(mdd_checkpoints(x, k, dt_days)) if k else ()
    return DrawdownReport(float(dd[trough]), peak, trough, checkpoints)


def checkpoint_indices(length: int, k: int) -> np.ndarray:
    """Last grid index of each of the ``k`` equally spaced prefixes."""
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if k > length:
        raise InputError(f"k={k} exceeds series length {length}")
    i = np.arange(1, k + 1)
    return np.minimum(i * length // k, length - 1)


def _prefix_mdd(x: np.ndarray, idx: np.ndarray) -> np.ndarray:
    return np.maximum.accumulate(_drawdown(x))[idx]


def mdd_checkpoints(series, k: int = 6, dt_days: float = 1.0) -> list[tuple[float, float]]:
    """MDD of the prefixes ending at ``k`` equally spaced cut points.

    Returns ``(t_days, mdd)`` pairs; values are non-decreasing in ``t``.
    """
    x = _as_series(series)
    idx = checkpoint_indices(x.size, k)
    mdd = _prefix_mdd(x, idx)
    return [(float(i * dt_days), float(m)) for i, m in zip(idx, mdd)]


def estimate_emdd(config: SimConfig, k: int = 6, workers: int = 1) -> EmddCurve:
    n_points = config.n_steps + 1
    idx = checkpoint_indices(n_points, k)
    # Welford running moments keep memory flat for large ensembles.
    count = 0
    mean = np.zeros(idx.size)
    m2 = np.zeros(idx.size)
    for path in iter_ensemble(config, workers):
        value = _prefix_mdd(path.values, idx)
        count += 1
        delta = value - mean
        mean += delta / count
        m2 += delta * (value - mean)
    if count > 1:
        stderr = np.sqrt(m2 / (count - 1) / count)
    else:
        stderr = np.zeros(idx.size)
    points = tuple(
        (float(i * config.dt_days), float(m), float(s)) for i, m, s in zip(idx, mean, stderr)
    )
    return EmddCurve(config.hurst, points, count)


def write_emdd_csv(curves: list[EmddCurve] | EmddCurve, out: str | FsPath) -> FsPath:
    if isinstance(curves, EmddCurve):
        curves = [curves]
    out = FsPath(out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["hurst", "t_days", "emdd", "stderr", "replicates"])
        for curve in curves:
            for t, m, s in curve.points:
                writer.writerow([curve.hurst, t, repr(m), repr(s), curve.replicates])
    return out


def read_emdd_csv(path: str | FsPath) -> list[EmddCurve]:
    grouped: dict[float, list] = {}
    reps: dict[float, int] = {}
    with FsPath(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            h = float(row["hurst"])
            grouped.setdefault(h, []).append((float(row["t_days"]), float(row["emdd"]), float(row["stderr"])))
            reps[h] = int(row["replicates"])
    return [EmddCurve(h, tuple(pts), reps[h]) for h, pts in grouped.items()]
