"""Distribution summaries, variance-stabilizing transforms, and correlations.

The analysis mirrors a fixed recipe: summarize the size distribution, pick
the y-axis transform that makes binned variance most consistent, pick the
x-axis transform that best restores linearity, and report Pearson
coefficients before and after, plus grouped medians and a count-weighted
mean grid over (steps, total_cases).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DomainError, InsufficientData, LengthMismatch, ZeroVariance

TRANSFORM_KINDS = ("log", "sqrt", "reciprocal")


def summarize(values):
    """(count, max, median, sample stddev). Median uses the midpoint rule."""
    vals = [float(v) for v in values]
    if len(vals) < 2:
        raise InsufficientData("need at least 2 values for a summary")
    arr = np.asarray(vals)
    return (
        len(vals),
        float(arr.max()),
        float(np.median(arr)),
        float(arr.std(ddof=1)),
    )


def pearson(xs, ys) -> float:
    if len(xs) != len(ys):
        raise LengthMismatch(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise InsufficientData("need at least 2 points for a correlation")
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sx = float(np.sqrt((dx * dx).sum()))
    sy = float(np.sqrt((dy * dy).sum()))
    if sx == 0.0 or sy == 0.0:
        raise ZeroVariance("one of the series has zero variance")
    r = float((dx * dy).sum() / (sx * sy))
    return max(-1.0, min(1.0, r))


def transform(values, kind: str):
    """Elementwise log / sqrt / reciprocal with domain checking."""
    if kind not in TRANSFORM_KINDS:
        raise ValueError(f"unknown transform {kind!r}")
    out = []
    for i, v in enumerate(values):
        v = float(v)
        if kind == "log":
            if v <= 0:
                raise DomainError(f"log requires positive values, got {v} ", index=i)
            out.append(math.log(v))
        elif kind == "sqrt":
            if v < 0:
                raise DomainError(f"sqrt requires nonnegative values, got {v}", index=i)
            out.append(math.sqrt(v))
        else:
            if v == 0:
                raise DomainError("reciprocal requires nonzero values", index=i)
            out.append(1.0 / v)
    return out


def variance_consistency(xs, ys, bins: int = 10) -> float:
    """Max/min ratio of per-bin y-variance over equal-count x-bins.

    Bins with fewer than 5 points are merged into their left neighbor; at
    least two bins must survive.  Lower scores mean more homoscedastic.
    """
    if len(xs) != len(ys):
        raise LengthMismatch(f"length mismatch: {len(xs)} vs {len(ys)}")
    n = len(xs)
    order = np.argsort(np.asarray(xs, dtype=float), kind="stable")
    y_sorted = np.asarray(ys, dtype=float)[order]
    groups = [g for g in np.array_split(y_sorted, bins) if len(g)]
    merged = []
    for g in groups:
        if merged and len(merged[-1]) < 5:
            merged[-1] = np.concatenate([merged[-1], g])
        else:
            merged.append(g)
    if len(merged) >= 2 and len(merged[-1]) < 5:
        merged[-2] = np.concatenate([merged[-2], merged.pop()])
    if len(merged) < 2:
        raise InsufficientData(
            f"{n} points are too few for {bins} bins of at least 5"
        )
    variances = [float(g.var(ddof=1)) for g in merged]
    hi, lo = max(variances), min(variances)
    if hi == 0.0:
        return 1.0
    if lo == 0.0:
        return math.inf
    return hi / lo


def select_transforms(xs, ys, bins: int = 10):
    """Pick the y-transform with the most consistent variance, then the
    x-transform maximizing |pearson| against the transformed y.

    Returns (y_kind, x_kind, transformed_pearson, scores) where scores maps
    each y-transform to its variance-consistency score (None when the
    transform's domain is violated).
    """
    scores = {}
    transformed_y = {}
    for kind in TRANSFORM_KINDS:
        try:
            ty = transform(ys, kind)
        except DomainError:
            scores[kind] = None
            continue
        transformed_y[kind] = ty
        scores[kind] = variance_consistency(xs, ty, bins)
    applicable = [k for k in TRANSFORM_KINDS if scores[k] is not None]
    if not applicable:
        raise DomainError("no y-transform is applicable to this data")
    y_kind = min(applicable, key=lambda k: scores[k])  # ties keep trial order
    ty = transformed_y[y_kind]

    best_x = None
    best_r = None
    for kind in TRANSFORM_KINDS:
        try:
            tx = transform(xs, kind)
        except DomainError:
            continue
        r = pearson(tx, ty)
        if best_r is None or abs(r) > abs(best_r):
            best_x, best_r = kind, r
    if best_x is None:
        raise DomainError("no x-transform is applicable to this data")
    return y_kind, best_x, best_r, scores


def grouped_median(records, key: str = "steps"):
    """Median size_bytes per group; key is 'steps' or 'steps,total_cases'."""
    if not records:
        return {}
    groups = {}
    for r in records:
        if key == "steps":
            k = r.steps
        elif key in ("steps,total_cases", "(steps,total_cases)"):
            k = (r.steps, r.total_cases)
        else:
            raise ValueError(f"unknown grouping key {key!r}")
        groups.setdefault(k, []).append(r.size_bytes)
    return {k: float(np.median(v)) for k, v in sorted(groups.items())}


def weighted_mean_grid(records):
    """Mean size_bytes per (steps, total_cases) cell."""
    groups = {}
    for r in records:
        groups.setdefault((r.steps, r.total_cases), []).append(r.size_bytes)
    return {k: float(np.mean(v)) for k, v in sorted(groups.items())}


@dataclass(frozen=True)
class PairAnalysis:
    pearson_raw: float
    y_transform: str
    x_transform: str
    pearson_transformed: float
    variance_scores: dict

    def to_dict(self):
        return {
            "pearson_raw": self.pearson_raw,
            "y_transform": self.y_transform,
            "x_transform": self.x_transform,
            "pearson_transformed": self.pearson_transformed,
            "variance_scores": {
                k: (v if v is None or math.isfinite(v) else "inf")
                for k, v in self.variance_scores.items()
            },
        }


@dataclass(frozen=True)
class AnalysisReport:
    count: int
    max_size: float
    median_size: float
    stddev_size: float
    size_vs_cases: PairAnalysis
    size_vs_steps: PairAnalysis
    grouped_medians: dict
    grid: dict

    def to_dict(self):
        return {
            "counts": self.count,
            "summary": {
                "count": self.count,
                "max_size": self.max_size,
                "median_size": self.median_size,
                "stddev_size": self.stddev_size,
            },
            "pairs": {
                "size_vs_cases": self.size_vs_cases.to_dict(),
                "size_vs_steps": self.size_vs_steps.to_dict(),
            },
            "grouped_medians": {
                f"{k[0]},{k[1]}": v for k, v in self.grouped_medians.items()
            },
            "grid": {f"{k[0]},{k[1]}": v for k, v in self.grid.items()},
        }

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)


def _analyze_pair(xs, sizes, bins: int = 10) -> PairAnalysis:
    raw = pearson(xs, sizes)
    y_kind, x_kind, r_t, scores = select_transforms(xs, sizes, bins)
    return PairAnalysis(
        pearson_raw=raw,
        y_transform=y_kind,
        x_transform=x_kind,
        pearson_transformed=r_t,
        variance_scores=scores,
    )


def analyze_records(records, bins: int = 10) -> AnalysisReport:
    """Full analysis over StudyRecord-like rows."""
    if len(records) < 2:
        raise InsufficientData("need at least 2 records to analyze")
    sizes = [r.size_bytes for r in records]
    cases = [r.total_cases for r in records]
    steps = [r.steps for r in records]
    count, max_size, median_size, stddev_size = summarize(sizes)
    return AnalysisReport(
        count=count,
        max_size=max_size,
        median_size=median_size,
        stddev_size=stddev_size,
        size_vs_cases=_analyze_pair(cases, sizes, bins),
        size_vs_steps=_analyze_pair(steps, sizes, bins),
        grouped_medians=grouped_median(records, "steps,total_cases"),
        grid=weighted_mean_grid(records),
    )
