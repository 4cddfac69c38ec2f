"""E(MDD) of drifted Brownian motion: closed form, asymptotes and Q tables.

For ``dX = mu dt + sigma dW`` the expected maximum drawdown over ``[0, T]``
depends on the drift only through ``x = mu**2 T / (2 sigma**2)``::

    mu > 0:  E = 2 sigma**2 / mu * Q_p(x)
    mu = 0:  E = sqrt(pi / 2) * sigma * sqrt(T)
    mu < 0:  E = 2 sigma**2 / |mu| * Q_n(x)

``Q_p`` and ``Q_n`` have no closed form; they are tabulated by Monte Carlo
(``calibrate_qtable``) and interpolated monotonically.  Outside the table
the known limits take over: ``Q(x) ~ sqrt(pi x) / 2`` as ``x -> 0``,
``Q_p(x) ~ log(x) / 4 + 0.49088`` and ``Q_n(x) ~ x + 1/2`` as ``x -> inf``.
"""

from __future__ import annotations

import csv
import datetime as _dt
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path as FsPath
from typing import Literal

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import BranchError, ParameterDomainError, RangeError

__all__ = [
    "ZERO_DRIFT_CONSTANT",
    "QTable",
    "EmddEstimate",
    "q_small_x",
    "q_large_x",
    "calibrate_qtable",
    "default_qtable",
    "emdd_bm",
    "emdd_bm_asymptotic",
    "emdd_bm_limit",
]

Kind = Literal["positive", "negative"]

ZERO_DRIFT_CONSTANT = math.sqrt(math.pi / 2)  # 1.2533...
Q_P_OFFSET = 0.49088
# 2 * Q_P_OFFSET - log(2) / 2: the constant of the large-T limit in (mu, sigma, T) form
LIMIT_CONSTANT = 2 * Q_P_OFFSET - 0.5 * math.log(2.0)
PRINTED_LIMIT_CONSTANT = 0.63

DEFAULT_X_GRID = tuple(float(v) for v in np.logspace(-4, 2, 25))


def _check_kind(kind: str) -> None:
    if kind not in ("positive", "negative"):
        raise ParameterDomainError(f"kind must be 'positive' or 'negative', got {kind!r}")


def q_small_x(x):
    """Common small-argument limit of Q_p and Q_n (the zero-drift branch)."""
    return 0.5 * np.sqrt(np.pi * np.asarray(x, dtype=float))


def q_large_x(kind: Kind, x):
    _check_kind(kind)
    x = np.asarray(x, dtype=float)
    if kind == "positive":
        return 0.25 * np.log(x) + Q_P_OFFSET
    return x + 0.5


@dataclass(frozen=True)
class QTable:
    """Monotone interpolant of ``Q(x)`` through Monte Carlo knots.

    Interpolation is PCHIP in ``(log x, log Q)``, which keeps monotone data
    monotone.
    """

    kind: Kind
    x: np.ndarray
    q: np.ndarray
    stderr: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        _check_kind(self.kind)
        x = np.array(self.x, dtype=float)
        q = np.array(self.q, dtype=float)
        se = np.array(self.stderr, dtype=float)
        if x.ndim != 1 or x.size < 2 or q.shape != x.shape or se.shape != x.shape:
            raise ParameterDomainError("QTable needs at least two knots with matching q and stderr")
        if np.any(x <= 0) or np.any(np.diff(x) <= 0):
            raise ParameterDomainError("QTable knots must be positive and strictly increasing")
        if np.any(q <= 0):
            raise ParameterDomainError("QTable values must be positive")
        for a in (x, q, se):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "stderr", se)
        object.__setattr__(self, "_interp", PchipInterpolator(np.log(x), np.log(q), extrapolate=False))

    @property
    def x_min(self) -> float:
        return float(self.x[0])

    @property
    def x_max(self) -> float:
        return float(self.x[-1])

    @property
    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.q) > 0))

    def __call__(self, x, extrapolate: bool = True):
        """Evaluate Q; outside the knots use the analytic limits unless disabled."""
        xa = np.asarray(x, dtype=float)
        if np.any(xa <= 0):
            raise ParameterDomainError("Q is defined for x > 0")
        lo, hi = xa < self.x_min, xa > self.x_max
        if not extrapolate and (lo.any() or hi.any()):
            raise RangeError(f"x outside calibrated range [{self.x_min:g}, {self.x_max:g}]")
        inside = ~(lo | hi)
        out = np.empty_like(xa)
        out[inside] = np.exp(self._interp(np.log(xa[inside])))
        # the edge mismatch fades out so Q stays continuous and monotone
        if lo.any():
            rel = self.q[0] / q_small_x(self.x_min) - 1.0
            out[lo] = q_small_x(xa[lo]) * (1.0 + rel * xa[lo] / self.x_min)
        if hi.any():
            gap = self.q[-1] - q_large_x(self.kind, self.x_max)
            out[hi] = q_large_x(self.kind, xa[hi]) + gap * self.x_max / xa[hi]
        return float(out) if out.ndim == 0 else out

    def in_range(self, x: float) -> bool:
        return self.x_min <= x <= self.x_max

    def save(self, stem: str | FsPath) -> tuple[FsPath, FsPath]:
        """Write ``<stem>.csv`` (x, Q, stderr) and ``<stem>.json`` metadata."""
        stem = FsPath(stem)
        csv_path, meta_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
        with csv_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "Q", "stderr"])
            for row in zip(self.x, self.q, self.stderr):
                writer.writerow([repr(float(v)) for v in row])
        meta_path.write_text(json.dumps({"kind": self.kind, **self.metadata}, indent=2))
        return csv_path, meta_path

    @classmethod
    def load(cls, stem: str | FsPath) -> "QTable":
        stem = FsPath(stem)
        meta = json.loads(stem.with_suffix(".json").read_text())
        with stem.with_suffix(".csv").open(newline="") as fh:
            rows = list(csv.DictReader(fh))
        kind = meta.pop("kind")
        return cls(
            kind,
            np.array([float(r["x"]) for r in rows]),
            np.array([float(r["Q"]) for r in rows]),
            np.array([float(r["stderr"]) for r in rows]),
            meta,
        )


def _knot_steps(x: float, min_steps: int, max_steps: int) -> int:
    # resolve the drawdown scale sigma**2 / mu**2 = T / (2x) with ~64 points
    want = max(min_steps, 128.0 * x)
    return int(min(max_steps, 2 ** math.ceil(math.log2(want))))


def _richardson_mdd(
    drift: float, n: int, replicates: int, rng: np.random.Generator, batch: int
) -> np.ndarray:
    """Per-path MDD of unit-volatility Bm on [0, 1], extrapolated to continuous time.

    The discrete-monitoring bias is proportional to sqrt(dt); combining the
    fine grid with the same path read every 4th point cancels it.
    """
    dt = 1.0 / n
    out = np.empty(replicates)
    done = 0
    while done < replicates:
        m = min(batch, replicates - done)
        x = np.zeros((m, n + 1))
        np.cumsum(rng.standard_normal((m, n)) * math.sqrt(dt) + drift * dt, axis=1, out=x[:, 1:])
        fine = np.max(np.maximum.accumulate(x, axis=1) - x, axis=1)
        xc = x[:, ::4]
        coarse = np.max(np.maximum.accumulate(xc, axis=1) - xc, axis=1)
        out[done : done + m] = 2.0 * fine - coarse
        done += m
    return out


def calibrate_qtable(
    kind: Kind,
    x_grid=DEFAULT_X_GRID,
    replicates: int = 10_000,
    seed: int = 0,
    min_steps: int = 4096,
    max_steps: int = 2**16,
    target_rel_se: float = 0.01,
) -> QTable:
    """Tabulate Q_p or Q_n by simulating Bm with parameters that realize each x.

    Each knot uses ``sigma = 1``, ``T = 1`` and ``|mu| = sqrt(2 x)``, so that
    ``Q(x) = E(MDD) |mu| / 2``.
    """
    _check_kind(kind)
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size < 2 or np.any(xs <= 0) or np.any(np.diff(xs) <= 0):
        raise ParameterDomainError("x_grid must be positive and strictly increasing")
    if replicates < 2:
        raise ParameterDomainError("calibration needs at least two replicates")
    sign = 1.0 if kind == "positive" else -1.0
    q, se, steps, warnings = [], [], [], []
    for i, x in enumerate(xs):
        speed = math.sqrt(2.0 * x)
        n = _knot_steps(x, min_steps, max_steps)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(i,)))
        batch = max(1, min(replicates, 2_000_000 // n))
        mdd = _richardson_mdd(sign * speed, n, replicates, rng, batch)
        qi = mdd.mean() * speed / 2.0
        si = mdd.std(ddof=1) / math.sqrt(replicates) * speed / 2.0
        q.append(qi)
        se.append(si)
        steps.append(n)
        if si > target_rel_se * qi:
            warnings.append(f"knot x={x:g}: relative stderr {si / qi:.3%} above target {target_rel_se:.1%}")
    metadata = {
        "replicates": replicates,
        "seed": int(seed),
        "date": _dt.date.today().isoformat(),
        "method": "Monte Carlo Bm, sqrt(dt) Richardson extrapolation (grid n and n/4)",
        "steps": steps,
        "warnings": warnings,
    }
    table = QTable(kind, xs, np.array(q), np.array(se), metadata)
    if not table.is_monotone:
        table.metadata["warnings"].append("knot values not strictly increasing; add replicates")
    return table


@lru_cache(maxsize=2)
def default_qtable(kind: Kind) -> QTable:
    """Table shipped with the package (regenerate with ``mddrisk qtable``)."""
    _check_kind(kind)
    base = resources.files("mddrisk") / "data"
    with resources.as_file(base / f"qtable_{kind}.csv") as csv_path:
        return QTable.load(csv_path.with_suffix(""))


@dataclass(frozen=True)
class EmddEstimate:
    value: float
    branch: Literal["positive-drift", "zero-drift", "negative-drift"]
    method: Literal["table", "asymptotic", "exact"]


def _check_sigma_t(sigma: float, years: float) -> None:
    if not sigma > 0:
        raise ParameterDomainError(f"sigma must be > 0, got {sigma!r}")
    if not years > 0:
        raise ParameterDomainError(f"T must be > 0, got {years!r}")


def emdd_bm(
    mu: float,
    sigma: float,
    years: float,
    qtable: QTable | None = None,
) -> EmddEstimate:
    """Expected MDD of Bm with drift ``mu`` and volatility ``sigma`` over ``years``.

    Units only need to be consistent (annual ``mu``, ``sigma`` with ``years``
    in years, or daily with days).
    """
    _check_sigma_t(sigma, years)
    if mu == 0:
        return EmddEstimate(ZERO_DRIFT_CONSTANT * sigma * math.sqrt(years), "zero-drift", "exact")
    kind: Kind = "positive" if mu > 0 else "negative"
    table = qtable if qtable is not None else default_qtable(kind)
    if table.kind != kind:
        raise BranchError(f"{table.kind}-drift table given for mu={mu!r}")
    x = mu * mu * years / (2.0 * sigma * sigma)
    value = 2.0 * sigma * sigma / abs(mu) * table(x)
    method = "table" if table.in_range(x) else "asymptotic"
    branch = "positive-drift" if mu > 0 else "negative-drift"
    return EmddEstimate(float(value), branch, method)


def emdd_bm_asymptotic(mu: float, sigma: float, years: float) -> float:
    """Large-T expressions exactly as commonly printed.

    ``mu > 0``: ``2 sigma**2 / mu * (0.63 + 0.5 log T + log(mu / sigma))``.
    ``mu < 0``: ``-mu T - sigma**2 / mu``.

    The positive-drift form carries twice the prefactor implied by
    ``Q_p(x) ~ log(x) / 4 + 0.49088``; see ``emdd_bm_limit``.
    """
    _check_sigma_t(sigma, years)
    if mu == 0:
        raise BranchError("no large-T drift asymptote for mu == 0; use emdd_bm")
    if mu > 0:
        return 2.0 * sigma**2 / mu * (PRINTED_LIMIT_CONSTANT + 0.5 * math.log(years) + math.log(mu / sigma))
    return -mu * years - sigma**2 / mu


def emdd_bm_limit(mu: float, sigma: float, years: float) -> float:
    """Large-T limit consistent with the Q asymptotes.

    ``mu > 0``: ``sigma**2 / mu * (0.63519 + 0.5 log T + log(mu / sigma))``.
    """
    _check_sigma_t(sigma, years)
    if mu == 0:
        raise BranchError("no large-T drift asymptote for mu == 0; use emdd_bm")
    if mu > 0:
        return sigma**2 / mu * (LIMIT_CONSTANT + 0.5 * math.log(years) + math.log(mu / sigma))
    return -mu * years - sigma**2 / mu
