"""Power-law exponents by least squares in log2-log2 coordinates."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

__all__ = ["Verdict", "ScalingFit", "LogLogRegressor", "fit_loglog", "verdict"]


class Verdict(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"


@dataclass(frozen=True)
class ScalingFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    target_slope: float
    tolerance: float
    verdict: Verdict
    residual_max: float

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.PASS


def _validate(n, values, min_points):
    n = np.asarray(n, dtype=float).ravel()
    values = np.asarray(values, dtype=float).ravel()
    if n.shape != values.shape:
        raise ValueError("N and values must have the same length")
    if len(n) < min_points:
        raise ValueError(f"need at least {min_points} points, got {len(n)}")
    if np.any(~np.isfinite(values)) or np.any(values <= 0):
        raise ValueError("all values must be finite and positive")
    if np.any(n <= 0):
        raise ValueError("abscissae must be positive")
    if len(np.unique(n)) != len(n):
        raise ValueError("abscissae must be distinct")
    order = np.argsort(n, kind="stable")
    return n[order], values[order]


class LogLogRegressor(RegressorMixin, BaseEstimator):
    """Fit ``value ~ 2**intercept * N**slope`` by OLS on ``(log2 N, log2 value)``.

    Parameters
    ----------
    min_points : int
        Smallest number of distinct abscissae accepted by :meth:`fit`.
    """

    def __init__(self, min_points: int = 3):
        self.min_points = min_points

    def fit(self, X, y):
        n, values = _validate(X, y, self.min_points)
        x, v = np.log2(n), np.log2(values)
        xm = x.mean()
        slope = float(np.dot(x - xm, v - v.mean()) / np.dot(x - xm, x - xm))
        intercept = float(v.mean() - slope * xm)
        self.slope_ = slope
        self.intercept_ = intercept
        self.residual_max_ = float(np.max(np.abs(v - (intercept + slope * x))))
        self.points_ = tuple(zip(x.tolist(), v.tolist()))
        return self

    def predict(self, X):
        check_is_fitted(self, "slope_")
        n = np.asarray(X, dtype=float).ravel()
        return np.exp2(self.intercept_ + self.slope_ * np.log2(n))

    def score(self, X, y, sample_weight=None):
        """R^2 in log2 coordinates."""
        check_is_fitted(self, "slope_")
        v = np.log2(np.asarray(y, dtype=float).ravel())
        pred = np.log2(self.predict(X))
        ss_res = float(np.sum((v - pred) ** 2))
        ss_tot = float(np.sum((v - v.mean()) ** 2))
        return 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot


def fit_loglog(values: Mapping[float, float], min_points: int = 3) -> tuple[float, float, float]:
    """Return ``(slope, intercept, residual_max)`` for ``{N: value}``."""
    est = LogLogRegressor(min_points=min_points).fit(list(values.keys()), list(values.values()))
    return est.slope_, est.intercept_, est.residual_max_


def verdict(values: "Mapping[float, float] | LogLogRegressor", target_slope: float, tolerance: float,
            min_points: int = 3) -> ScalingFit:
    """Fit (unless given a fitted regressor) and grade against ``target_slope``."""
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    est = values if isinstance(values, LogLogRegressor) else \
        LogLogRegressor(min_points=min_points).fit(list(values.keys()), list(values.values()))
    check_is_fitted(est, "slope_")
    ok = abs(est.slope_ - float(target_slope)) <= tolerance
    return ScalingFit(
        points=est.points_,
        slope=est.slope_,
        intercept=est.intercept_,
        target_slope=float(target_slope),
        tolerance=float(tolerance),
        verdict=Verdict.PASS if ok else Verdict.FAIL,
        residual_max=est.residual_max_,
    )

