"""Gaussianity testing on sliding windows and DFA Hurst estimation."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path as FsPath

import numpy as np
from scipy import stats as sps

from .errors import DegenerateSampleError, InputError

__all__ = [
    "ACCEPT",
    "REJECT",
    "EMPTY",
    "JBGrid",
    "DfaResult",
    "log_returns",
    "jb_statistic",
    "jarque_bera",
    "jb_scan",
    "dfa_hurst",
    "write_jb_grid_csv",
    "write_dfa",
]

ACCEPT, REJECT, EMPTY = 0, 1, -1
MIN_JB_LENGTH = 8
MIN_DFA_LENGTH = 256


def log_returns(prices) -> np.ndarray:
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise InputError("prices must be a non-empty 1-d sequence")
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise InputError(f"non-positive price at position {int(bad[0])}")
    return np.diff(np.log(p))


def jb_statistic(n: int, skew: float, kurtosis: float) -> float:
    """``n/6 * (S**2 + (K - 3)**2 / 4)`` with raw (non-excess) kurtosis ``K``."""
    return n / 6.0 * (skew * skew + 0.25 * (kurtosis - 3.0) ** 2)


def _jb_from_sums(n, s1, s2, s3, s4):
    # central moments from power sums of a pre-shifted sample
    d = s1 / n
    m2 = s2 / n - d * d
    m3 = s3 / n - 3.0 * d * s2 / n + 2.0 * d**3
    m4 = s4 / n - 4.0 * d * s3 / n + 6.0 * d * d * s2 / n - 3.0 * d**4
    with np.errstate(divide="ignore", invalid="ignore"):
        skew = m3 / m2**1.5
        kurt = m4 / (m2 * m2)
    return m2, jb_statistic(n, skew, kurt)


def jarque_bera(sample) -> tuple[float, float]:
    """Jarque-Bera statistic and its asymptotic chi-square(2) p-value."""
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1 or x.size < MIN_JB_LENGTH:
        raise InputError(f"Jarque-Bera needs at least {MIN_JB_LENGTH} observations")
    y = x - x.mean()
    m2 = np.mean(y * y)
    if not m2 > 1e-300 or np.ptp(x) == 0:
        raise DegenerateSampleError("zero-variance sample")
    skew = np.mean(y**3) / m2**1.5
    kurt = np.mean(y**4) / m2**2
    stat = float(jb_statistic(x.size, skew, kurt))
    return stat, float(sps.chi2.sf(stat, 2))


@dataclass(frozen=True)
class JBGrid:
    """Test outcome per window; ``cells[w, s]`` is for ``widths[w]`` and ``starts[s]``."""

    min_width: int
    significance: float
    n: int
    starts: np.ndarray
    widths: np.ndarray
    cells: np.ndarray = field(repr=False)
    p_values: np.ndarray = field(repr=False)

    def outcome(self, k: int, j: int) -> int:
        s = int(np.searchsorted(self.starts, k))
        w = int(np.searchsorted(self.widths, j))
        if s >= self.starts.size or self.starts[s] != k or w >= self.widths.size or self.widths[w] != j:
            raise KeyError((k, j))
        return int(self.cells[w, s])

    def acceptance_rate(self) -> float:
        filled = self.cells != EMPTY
        return float(np.mean(self.cells[filled] == ACCEPT))

    def triplets(self):
        for w, j in enumerate(self.widths):
            for s, k in enumerate(self.starts):
                yield int(k), int(j), int(self.cells[w, s])


def jb_scan(series, min_width: int = 256, significance: float = 0.05, step: int = 1) -> JBGrid:
    """Jarque-Bera outcome for every window ``series[k : k + j]`` with ``j >= min_width``.

    Windows running past the end of the series are marked ``EMPTY``.  Each
    cell is computed from its own window only.
    """
    r = np.asarray(series, dtype=float)
    n = r.size
    if r.ndim != 1:
        raise InputError("series must be 1-d")
    if min_width < MIN_JB_LENGTH:
        raise InputError(f"min_width must be >= {MIN_JB_LENGTH}")
    if n <= min_width:
        raise InputError(f"series of length {n} too short for min_width {min_width}")
    if not 0 < significance < 1:
        raise InputError("significance must lie in (0, 1)")
    starts = np.arange(0, n - min_width + 1, step)
    widths = np.arange(min_width, n + 1, step)
    cells = np.full((widths.size, starts.size), EMPTY, dtype=np.int8)
    pvals = np.full((widths.size, starts.size), np.nan)
    for s, k in enumerate(starts):
        ok = widths <= n - k
        jw = widths[ok]
        y = r[k : k + jw[-1]] - r[k : k + min_width].mean()
        idx = jw - 1
        sums = [np.cumsum(y**p)[idx] for p in (1, 2, 3, 4)]
        m2, stat = _jb_from_sums(jw.astype(float), *sums)
        p = np.where(m2 > 0, sps.chi2.sf(stat, 2), 0.0)
        pvals[ok, s] = p
        cells[ok, s] = np.where(p < significance, REJECT, ACCEPT)
    return JBGrid(min_width, significance, n, starts, widths, cells, pvals)


@dataclass(frozen=True)
class DfaResult:
    hurst_estimate: float
    box_sizes: np.ndarray
    fluctuations: np.ndarray
    fit_r2: float
    detrend_order: int = 1
    degenerate: bool = False

    @property
    def flagged(self) -> bool:
        """True when the estimate is degenerate or falls outside (0, 1)."""
        return self.degenerate or not (0.0 < self.hurst_estimate < 1.0)


def _box_sizes(n: int, box_range, n_sizes: int, order: int) -> np.ndarray:
    lo, hi = box_range if box_range is not None else (8, n // 4)
    if lo < order + 2 or hi > n // 2 or lo >= hi:
        raise InputError(f"box range {(lo, hi)} infeasible for length {n} and order {order}")
    sizes = np.unique(np.round(np.geomspace(lo, hi, n_sizes)).astype(int))
    if sizes.size < 3:
        raise InputError("box range yields fewer than three distinct sizes")
    return sizes


def _fluctuation(profile: np.ndarray, s: int, order: int) -> float:
    n = profile.size
    nseg = n // s
    segs = np.vstack(
        [profile[: nseg * s].reshape(nseg, s), profile[n - nseg * s :].reshape(nseg, s)]
    )
    t = np.linspace(-1.0, 1.0, s)
    vander = np.vander(t, order + 1)
    coef, *_ = np.linalg.lstsq(vander, segs.T, rcond=None)
    resid = segs - (vander @ coef).T
    return float(np.sqrt(np.mean(resid * resid)))


def dfa_hurst(returns, box_range: tuple[int, int] | None = None, detrend_order: int = 1, n_sizes: int = 20) -> DfaResult:
    """Hurst exponent of a return series by detrended fluctuation analysis.

    Boxes are laid from both ends of the profile; the exponent is the
    least-squares slope of log F(s) against log s.
    """
    r = np.asarray(returns, dtype=float)
    if r.ndim != 1 or r.size < MIN_DFA_LENGTH:
        raise InputError(f"DFA needs at least {MIN_DFA_LENGTH} returns, got {r.size}")
    if detrend_order < 0:
        raise InputError("detrend_order must be >= 0")
    sizes = _box_sizes(r.size, box_range, n_sizes, detrend_order)
    profile = np.cumsum(r - r.mean())
    fluct = np.array([_fluctuation(profile, int(s), detrend_order) for s in sizes])
    scale = max(float(np.max(np.abs(r))), np.finfo(float).tiny)
    if np.any(fluct <= 1e-10 * scale):
        return DfaResult(float("nan"), sizes, fluct, float("nan"), detrend_order, degenerate=True)
    logs, logf = np.log(sizes), np.log(fluct)
    slope, _ = np.polyfit(logs, logf, 1)
    r2 = float(np.corrcoef(logs, logf)[0, 1] ** 2)
    return DfaResult(float(slope), sizes, fluct, r2, detrend_order)


def write_jb_grid_csv(grid: JBGrid, out: str | FsPath) -> FsPath:
    """Triplets ``(k, j, outcome)`` with 0 = accept, 1 = reject, -1 = empty."""
    out = FsPath(out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["k", "j", "outcome"])
        writer.writerows(grid.triplets())
    return out


def write_dfa(result: DfaResult, stem: str | FsPath) -> tuple[FsPath, FsPath]:
    stem = FsPath(stem)
    csv_path, json_path = stem.with_suffix(".csv"), stem.with_suffix(".json")
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["box_size", "fluctuation"])
        writer.writerows(zip(result.box_sizes.tolist(), result.fluctuations.tolist()))
    summary = {
        "hurst_estimate": result.hurst_estimate,
        "fit_r2": result.fit_r2,
        "detrend_order": result.detrend_order,
        "degenerate": result.degenerate,
        "flagged": result.flagged,
    }
    json_path.write_text(json.dumps(summary, indent=2))
    return csv_path, json_path
