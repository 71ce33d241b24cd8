"""Descriptive statistics, fixed-range histograms and simple OLS regression."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateX, EmptySample, ValueOutOfRange


@dataclass(frozen=True)
class Summary:
    mean: float
    variance: float
    std: float


@dataclass(frozen=True, eq=False)
class Histogram:
    bin_edges: np.ndarray
    counts: np.ndarray

    def rows(self):
        """(lower edge, upper edge, count) per bin, for CSV output."""
        return [(float(lo), float(hi), int(c)) for lo, hi, c
                in zip(self.bin_edges[:-1], self.bin_edges[1:], self.counts)]


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r: float
    r_squared: float
    n: int


def summarize(sample) -> Summary:
    """Mean, population variance and population standard deviation."""
    x = np.asarray(sample, dtype=float)
    if x.size == 0:
        raise EmptySample("cannot summarize an empty sample")
    mean = float(x.mean())
    var = float(np.mean((x - mean) ** 2))
    return Summary(mean, var, float(np.sqrt(var)))


def histogram(sample, bins=20) -> Histogram:
    """Equal-width bins on [0, 1]; only the last bin includes its right edge."""
    x = np.asarray(sample, dtype=float)
    if x.size and (np.any(~np.isfinite(x)) or x.min() < 0.0 or x.max() > 1.0):
        raise ValueOutOfRange("histogram values must lie in [0, 1]")
    edges = np.linspace(0.0, 1.0, bins + 1)
    idx = np.minimum(np.floor(x * bins).astype(int), bins - 1)
    counts = np.bincount(idx, minlength=bins)
    return Histogram(edges, counts)


def linear_regression(x, y) -> RegressionResult:
    """Ordinary least squares fit of y on x.

    A constant ``y`` gives slope 0 and r = r^2 = 0. A constant ``x``
    raises :class:`DegenerateX`.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-d and of equal length")
    n = x.size
    if n < 2:
        raise EmptySample("regression needs at least two points")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    if sxx == 0.0:
        raise DegenerateX("x is constant; slope undefined")
    syy = float(dy @ dy)
    sxy = float(dx @ dy)
    slope = sxy / sxx
    intercept = float(y.mean() - slope * x.mean())
    r = 0.0 if syy == 0.0 else sxy / np.sqrt(sxx * syy)
    r = float(np.clip(r, -1.0, 1.0))
    return RegressionResult(slope, intercept, r, r * r, n)
