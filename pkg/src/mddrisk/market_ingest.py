"""Price-series ingestion, per-series bubble statistics and real-vs-synthetic MDD.

Everything here is in daily units: ``mu`` and ``sigma`` are the mean and
sample deviation of daily log returns, horizons are counted in trading days.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
from dataclasses import dataclass
from pathlib import Path as FsPath

import numpy as np

from .drawdown import EmddCurve, estimate_emdd, max_drawdown, mdd_checkpoints
from .errors import InputError, ParseError
from .fbm_sim import TRADING_DAYS_PER_YEAR, SimConfig, generate_path
from .stats import MIN_DFA_LENGTH, dfa_hurst, log_returns

__all__ = [
    "PublishedRow",
    "BUBBLE_ROWS",
    "PriceSeries",
    "BubbleReport",
    "ComparisonCurve",
    "load_csv",
    "write_csv",
    "daily_config",
    "make_fixture",
    "bubble_report",
    "compare_real_vs_synthetic",
    "write_report_csv",
    "write_comparison_csv",
    "REPORT_COLUMNS",
]


@dataclass(frozen=True)
class PublishedRow:
    name: str
    year: int
    mu: float
    sigma: float
    sharpe: float
    hurst: float
    mdd: float
    calmar: float


# Rising phase of speculative bubbles: daily log-return statistics as published.
BUBBLE_ROWS: tuple[PublishedRow, ...] = (
    PublishedRow("Arg Burcap", 1997, 0.0012, 0.0157, 0.08, 0.51, 0.24, 3.44),
    PublishedRow("Arg Merval", 1997, 0.0015, 0.0173, 0.08, 0.47, 0.25, 3.70),
    PublishedRow("Brazil Bovespa", 1997, 0.0029, 0.0136, 0.21, 0.65, 0.12, 8.46),
    PublishedRow("DAX 40", 1998, 0.0018, 0.0124, 0.14, 0.63, 0.20, 4.43),
    PublishedRow("FTSE 100", 1987, 0.0012, 0.0082, 0.15, 0.60, 0.12, 5.64),
    PublishedRow("FTSE 100", 1997, 0.0008, 0.0066, 0.12, 0.59, 0.06, 8.70),
    PublishedRow("FTSE 100", 1998, 0.0008, 0.0076, 0.11, 0.61, 0.12, 5.71),
    PublishedRow("Hang Seng", 1994, 0.0018, 0.0133, 0.14, 0.55, 0.26, 4.31),
    PublishedRow("Hang Seng", 1997, 0.0010, 0.0115, 0.09, 0.57, 0.16, 4.35),
    PublishedRow("Kuala Lumpur SE Emas", 1994, 0.0027, 0.0095, 0.28, 0.75, 0.10, 10.06),
    PublishedRow("Mexico Ipc", 1997, 0.0017, 0.0124, 0.14, 0.52, 0.14, 5.74),
    PublishedRow("Nasdaq 100", 1987, 0.0012, 0.0096, 0.13, 0.58, 0.20, 3.17),
    PublishedRow("Nasdaq 100", 1998, 0.0014, 0.0149, 0.09, 0.56, 0.20, 6.40),
    PublishedRow("Nasdaq 100", 2000, 0.0023, 0.0205, 0.11, 0.53, 0.26, 6.80),
    PublishedRow("Venezuela SE Gen", 1997, 0.0041, 0.0161, 0.26, 0.73, 0.13, 17.31),
)


@dataclass(frozen=True)
class PriceSeries:
    name: str
    dates: tuple[_dt.date, ...]
    closes: np.ndarray

    def __post_init__(self) -> None:
        closes = np.array(self.closes, dtype=float)
        if closes.ndim != 1 or closes.size != len(self.dates):
            raise InputError("dates and closes must have the same length")
        if closes.size == 0:
            raise InputError("empty price series")
        if np.any(~(closes > 0)):
            raise InputError("closes must be positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise InputError("dates must be strictly increasing")
        closes.setflags(write=False)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "closes", closes)

    def __len__(self) -> int:
        return self.closes.size

    @property
    def log_level(self) -> np.ndarray:
        """``log(p_t / p_0)``, the log series started at zero."""
        y = np.log(self.closes)
        return y - y[0]


def load_csv(path: str | FsPath, name: str | None = None) -> PriceSeries:
    """Read a ``date,close`` file; errors name the 1-based data row."""
    path = FsPath(path)
    dates: list[_dt.date] = []
    closes: list[float] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip().lower() for h in next(reader, [])]
        if header[:2] != ["date", "close"]:
            raise ParseError(f"{path}: expected header 'date,close', got {','.join(header)!r}", 0)
        for row_no, row in enumerate(reader, start=1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) < 2 or not row[1].strip():
                raise ParseError(f"{path}: row {row_no}: missing close", row_no)
            try:
                day = _dt.date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"{path}: row {row_no}: malformed date {row[0]!r}", row_no) from None
            try:
                close = float(row[1])
            except ValueError:
                raise ParseError(f"{path}: row {row_no}: malformed close {row[1]!r}", row_no) from None
            if not close > 0 or not math.isfinite(close):
                raise ParseError(f"{path}: row {row_no}: non-positive close {close!r}", row_no)
            if dates and day <= dates[-1]:
                raise ParseError(f"{path}: row {row_no}: date {day} not after {dates[-1]}", row_no)
            dates.append(day)
            closes.append(close)
    if not dates:
        raise ParseError(f"{path}: no data rows", None)
    return PriceSeries(name or path.stem, tuple(dates), np.array(closes))


def write_csv(series: PriceSeries, path: str | FsPath) -> FsPath:
    path = FsPath(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "close"])
        for day, close in zip(series.dates, series.closes):
            writer.writerow([day.isoformat(), repr(float(close))])
    return path


def daily_config(mu: float, sigma: float, n_days: int, hurst: float = 0.5, replicates: int = 1000, seed: int = 0) -> SimConfig:
    """SimConfig whose grid step is one trading day with drift ``mu`` and deviation ``sigma``."""
    return SimConfig(
        hurst=hurst,
        mu_annual=mu * TRADING_DAYS_PER_YEAR,
        sigma_annual=sigma * math.sqrt(TRADING_DAYS_PER_YEAR),
        years=n_days / TRADING_DAYS_PER_YEAR,
        steps_per_year=TRADING_DAYS_PER_YEAR,
        replicates=replicates,
        seed=seed,
        sigma_scaling="step",
    )


def _business_days(start: _dt.date, count: int) -> tuple[_dt.date, ...]:
    days = np.busday_offset(np.datetime64(start, "D"), np.arange(count), roll="forward")
    return tuple(d.astype(_dt.date) for d in days)


def make_fixture(
    name: str,
    mu: float,
    sigma: float,
    n_days: int,
    hurst: float = 0.5,
    seed: int = 0,
    start: _dt.date = _dt.date(2000, 1, 3),
    first_close: float = 100.0,
) -> PriceSeries:
    """Synthetic price series whose daily log returns are drifted fGn."""
    path = generate_path(daily_config(mu, sigma, n_days, hurst, 1, seed), 0)
    return PriceSeries(name, _business_days(start, n_days + 1), first_close * np.exp(path.values))


REPORT_COLUMNS = ["index", "year", "mu", "sigma", "sharpe", "hurst", "mdd", "calmar", "n_days"]


@dataclass(frozen=True)
class BubbleReport:
    name: str
    year: int
    n_days: int
    mu_daily: float
    sigma_daily: float
    sharpe: float | None
    hurst_dfa: float | None
    mdd: float
    calmar: float | None

    def row(self) -> list:
        def fmt(v):
            return "undefined" if v is None else repr(v)

        return [self.name, self.year, fmt(self.mu_daily), fmt(self.sigma_daily), fmt(self.sharpe),
                fmt(self.hurst_dfa), fmt(self.mdd), fmt(self.calmar), self.n_days]


def bubble_report(series: PriceSeries, box_range: tuple[int, int] | None = None, detrend_order: int = 1) -> BubbleReport:
    if len(series) < MIN_DFA_LENGTH + 1:
        raise InputError(
            f"{series.name}: {len(series)} prices, need at least {MIN_DFA_LENGTH + 1} (one trading year of returns)"
        )
    r = log_returns(series.closes)
    n_days = r.size
    mu = float(r.mean())
    sigma = float(r.std(ddof=1))
    dfa = dfa_hurst(r, box_range, detrend_order)
    mdd = max_drawdown(series.log_level).mdd
    return BubbleReport(
        name=series.name,
        year=series.dates[-1].year,
        n_days=n_days,
        mu_daily=mu,
        sigma_daily=sigma,
        sharpe=mu / sigma if sigma > 0 else None,
        hurst_dfa=None if dfa.degenerate else dfa.hurst_estimate,
        mdd=mdd,
        calmar=mu * n_days / mdd if mdd > 0 else None,
    )


@dataclass(frozen=True)
class ComparisonCurve:
    """Checkpointed MDD of one real trajectory against matched Bm and fBm ensembles."""

    name: str
    hurst_fbm: float
    real: tuple[tuple[float, float], ...]
    bm: EmddCurve
    fbm: EmddCurve

    @property
    def checkpoints(self) -> list[tuple[float, float, float, float, float, float]]:
        """Rows ``(t_days, real_mdd, emdd_bm, emdd_fbm, stderr_bm, stderr_fbm)``."""
        return [
            (t, m, b[1], f[1], b[2], f[2])
            for (t, m), b, f in zip(self.real, self.bm.points, self.fbm.points)
        ]

    @property
    def real_mdd(self) -> np.ndarray:
        return np.array([m for _, m in self.real])

    def within_band(self, model: str = "bm", n_sd: float = 3.0) -> np.ndarray:
        curve = self.bm if model == "bm" else self.fbm
        return np.abs(self.real_mdd - curve.mean) <= n_sd * curve.std

    def aggregate_deviation(self, model: str = "bm") -> float:
        curve = self.bm if model == "bm" else self.fbm
        return float(np.sum(np.abs(self.real_mdd - curve.mean)))


def compare_real_vs_synthetic(
    series: PriceSeries,
    replicates: int = 1000,
    seed: int = 0,
    k: int = 6,
    hurst: float | None = None,
    workers: int = 1,
) -> ComparisonCurve:
    """Six-checkpoint MDD of ``series`` next to E(MDD) of matched synthetic ensembles.

    Both ensembles share the series' daily mean, deviation and length; the
    fBm one uses ``hurst`` or, by default, the DFA estimate of the series.
    """
    report = bubble_report(series)
    if hurst is None:
        if report.hurst_dfa is None or not 0 < report.hurst_dfa < 1:
            raise InputError(f"{series.name}: DFA Hurst estimate {report.hurst_dfa} unusable for fBm")
        hurst = report.hurst_dfa
    real = tuple(mdd_checkpoints(series.log_level, k))
    base = daily_config(report.mu_daily, report.sigma_daily, report.n_days, 0.5, replicates, seed)
    bm = estimate_emdd(base, k, workers)
    fbm = estimate_emdd(base.replace(hurst=hurst, seed=(seed + 1) % 2**64), k, workers)
    return ComparisonCurve(series.name, float(hurst), real, bm, fbm)


def write_report_csv(reports: list[BubbleReport], out: str | FsPath, append: bool = False) -> FsPath:
    out = FsPath(out)
    fresh = not (append and out.exists())
    with out.open("a" if not fresh else "w", newline="") as fh:
        writer = csv.writer(fh)
        if fresh:
            writer.writerow(REPORT_COLUMNS)
        for rep in reports:
            writer.writerow(rep.row())
    return out


def write_comparison_csv(curves: list[ComparisonCurve] | ComparisonCurve, out: str | FsPath) -> FsPath:
    if isinstance(curves, ComparisonCurve):
        curves = [curves]
    out = FsPath(out)
    with out.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["name", "t_days", "real_mdd", "emdd_bm", "stderr_bm", "emdd_fbm", "stderr_fbm"])
        for c in curves:
            for t, m, eb, ef, sb, sf in c.checkpoints:
                writer.writerow([c.name, t, repr(m), repr(eb), repr(sb), repr(ef), repr(sf)])
    return out
