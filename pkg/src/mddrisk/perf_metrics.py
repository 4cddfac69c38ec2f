"""Sharpe and Calmar ratios and the Bm relation between them.

No risk-free rate is subtracted anywhere.  ``mu``, ``sigma`` and the horizon
must share a time unit; ``MetricInputs`` carries the unit explicitly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ParameterDomainError, UndefinedRatioError
from .theory import PRINTED_LIMIT_CONSTANT, QTable, default_qtable

__all__ = [
    "MetricInputs",
    "sharpe",
    "calmar",
    "calmar_from_sharpe",
    "calmar_asymptotic",
    "emdd_over_sigma",
]


@dataclass(frozen=True)
class MetricInputs:
    mu: float
    sigma: float
    horizon: float
    mdd: float
    unit: Literal["daily", "annual"] = "daily"

    def __post_init__(self) -> None:
        if not self.sigma > 0:
            raise ParameterDomainError("sigma must be > 0")
        if not self.horizon > 0:
            raise ParameterDomainError("horizon must be > 0")
        if not self.mdd >= 0:
            raise ParameterDomainError("mdd must be >= 0")
        if self.unit not in ("daily", "annual"):
            raise ParameterDomainError(f"unknown unit {self.unit!r}")

    @property
    def sharpe(self) -> float:
        return sharpe(self.mu, self.sigma)

    @property
    def calmar(self) -> float:
        return calmar(self.mu, self.horizon, self.mdd)


def sharpe(mu: float, sigma: float) -> float:
    if not sigma > 0:
        raise ParameterDomainError(f"sigma must be > 0, got {sigma!r}")
    return mu / sigma


def calmar(mu: float, horizon: float, mdd: float) -> float:
    """``mu * horizon / mdd``; raises ``UndefinedRatioError`` when ``mdd == 0``."""
    if not horizon > 0:
        raise ParameterDomainError(f"horizon must be > 0, got {horizon!r}")
    if mdd < 0:
        raise ParameterDomainError(f"mdd must be >= 0, got {mdd!r}")
    if mdd == 0:
        raise UndefinedRatioError("Calmar ratio undefined for zero drawdown")
    return mu * horizon / mdd


def _q_argument(shrp: float, years: float) -> float:
    if not shrp > 0:
        raise ParameterDomainError(f"Sharpe ratio must be > 0, got {shrp!r}")
    if not years > 0:
        raise ParameterDomainError(f"T must be > 0, got {years!r}")
    return 0.5 * years * shrp * shrp


def calmar_from_sharpe(
    shrp: float, years: float, qtable: QTable | None = None, extrapolate: bool = True
) -> float:
    """Bm Calmar ratio ``x / Q_p(x)`` with ``x = T * Shrp**2 / 2``."""
    x = _q_argument(shrp, years)
    table = qtable if qtable is not None else default_qtable("positive")
    return x / table(x, extrapolate=extrapolate)


def emdd_over_sigma(
    shrp: float, years: float, qtable: QTable | None = None, extrapolate: bool = True
) -> float:
    """Bm expected MDD per unit volatility, ``2 Q_p(T Shrp**2 / 2) / Shrp``."""
    x = _q_argument(shrp, years)
    table = qtable if qtable is not None else default_qtable("positive")
    return 2.0 * table(x, extrapolate=extrapolate) / shrp


def calmar_asymptotic(shrp: float, years: float) -> float:
    """Large-T Calmar ratio ``T Shrp**2 / (0.63 + 0.5 log T + log Shrp)``."""
    _q_argument(shrp, years)
    denom = PRINTED_LIMIT_CONSTANT + 0.5 * math.log(years) + math.log(shrp)
    if denom <= 0:
        raise ParameterDomainError(
            f"asymptote undefined: denominator {denom:.4g} <= 0 for Shrp={shrp}, T={years}"
        )
    return years * shrp * shrp / denom
