"""Binned analyses, least-squares fits, correlation tests, and OLS diagnostics.

Everything here is deterministic pure numerics: no RNG, thread-safe.
Significance tests default to two-sided; callers can request one-sided and
outputs carry the convention.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import IO, Mapping, Sequence

import numpy as np
from scipy import stats as _sps


class StatsError(ValueError):
    """Invalid input for a statistical routine."""


# --------------------------------------------------------------------------
# binning
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class BinSeries:
    """Per-bin contributor counts, response means, and cumulative fractions."""

    bin_edges: tuple[float, ...]          # strictly increasing, len = bins + 1
    bin_counts: tuple[int, ...]
    bin_means: tuple[float | None, ...]   # None for empty bins
    cumulative_fraction: tuple[float, ...]


def exponential_bins(values: Sequence[float], base: float,
                     ) -> tuple[list[int], tuple[float, ...]]:
    """Assign values in (0, 1] to bins with edges base**(-j), top edge 1.0.

    The topmost bin is closed at 1.0; all others are half-open [low, high).
    Returns ascending bin indices aligned with `values` and the ascending
    edge list.
    """
    if base <= 1.0:
        raise StatsError("base must be > 1")
    if not values:
        raise StatsError("no values to bin")
    log_base = math.log(base)
    raw: list[int] = []
    for v in values:
        if not 0.0 < v <= 1.0:
            raise StatsError(f"value {v!r} outside (0, 1]")
        j = int(math.floor(-math.log(v) / log_base))
        # repair float drift at edges: bin j is [base**-(j+1), base**-j)
        while j > 0 and v >= base ** (-j):
            j -= 1
        while v < base ** (-j - 1):
            j += 1
        raw.append(j)
    deepest = max(raw)
    edges = tuple(base ** (-j) for j in range(deepest + 1, -1, -1))
    assignments = [deepest - j for j in raw]
    return assignments, edges


def constant_bins(values: Sequence[float], width: float,
                  ) -> tuple[list[int], tuple[float, ...]]:
    """Assign values in [0, 1] to bins [i*width, (i+1)*width); 1.0 joins the last."""
    if not 0.0 < width <= 1.0:
        raise StatsError("width must be in (0, 1]")
    n_bins = round(1.0 / width)
    if abs(n_bins * width - 1.0) > 1e-9:
        raise StatsError(f"width {width!r} does not divide 1")
    if not values:
        raise StatsError("no values to bin")
    assignments: list[int] = []
    for v in values:
        if not 0.0 <= v <= 1.0:
            raise StatsError(f"value {v!r} outside [0, 1]")
        i = min(int(v / width), n_bins - 1)
        while i > 0 and v < i * width:
            i -= 1
        while i < n_bins - 1 and v >= (i + 1) * width:
            i += 1
        assignments.append(i)
    edges = tuple(i * width for i in range(n_bins)) + (1.0,)
    return assignments, edges


def bin_response(assignments: Sequence[int], responses: Sequence[float | None],
                 edges: Sequence[float]) -> BinSeries:
    """Group responses by bin; undefined (None) responses are skipped."""
    if len(assignments) != len(responses):
        raise StatsError("assignments and responses must align")
    n_bins = len(edges) - 1
    counts = [0] * n_bins
    sums = [0.0] * n_bins
    for idx, resp in zip(assignments, responses):
        if resp is None:
            continue
        if not 0 <= idx < n_bins:
            raise StatsError(f"bin index {idx} out of range")
        counts[idx] += 1
        sums[idx] += resp
    total = sum(counts)
    if total == 0:
        raise StatsError("no bin has a defined response")
    means = tuple(sums[i] / counts[i] if counts[i] else None for i in range(n_bins))
    running = 0
    cumulative = []
    for c in counts:
        running += c
        cumulative.append(running / total)
    return BinSeries(tuple(edges), tuple(counts), means, tuple(cumulative))


def write_bins_csv(series: BinSeries, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bin_low", "bin_high", "count", "mean_rd_km",
                     "cumulative_fraction"])
    for i, count in enumerate(series.bin_counts):
        mean = series.bin_means[i]
        writer.writerow([
            format(series.bin_edges[i], ".6g"),
            format(series.bin_edges[i + 1], ".6g"),
            count,
            "" if mean is None else format(mean, ".6g"),
            format(series.cumulative_fraction[i], ".6g"),
        ])


# --------------------------------------------------------------------------
# fits and correlation
# --------------------------------------------------------------------------

class FitKind(Enum):
    LINEAR = "linear"
    LOG_X = "log_x"


@dataclass(frozen=True)
class FitResult:
    kind: FitKind
    slope: float
    intercept: float
    r_squared: float
    n: int


def fit(x: Sequence[float], y: Sequence[float],
        kind: FitKind = FitKind.LINEAR) -> FitResult:
    """Least squares of y on x (LINEAR) or on ln x (LOG_X)."""
    kind = FitKind(kind)
    if len(x) != len(y):
        raise StatsError("x and y must align")
    n = len(x)
    if n < 3:
        raise StatsError(f"fit needs n >= 3, got {n}")
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    if kind is FitKind.LOG_X:
        if (xv <= 0).any():
            raise StatsError("LOG_X fit requires positive x")
        xv = np.log(xv)
    sxx = float(((xv - xv.mean()) ** 2).sum())
    if sxx == 0.0:
        raise StatsError("x has zero variance")
    sxy = float(((xv - xv.mean()) * (yv - yv.mean())).sum())
    slope = sxy / sxx
    intercept = float(yv.mean()) - slope * float(xv.mean())
    fitted = intercept + slope * xv
    syy = float(((yv - yv.mean()) ** 2).sum())
    if syy == 0.0:
        r_squared = 1.0
    else:
        resid = float(((yv - fitted) ** 2).sum())
        r_squared = min(max(1.0 - resid / syy, 0.0), 1.0)
    return FitResult(kind, slope, intercept, r_squared, n)


@dataclass(frozen=True)
class PearsonResult:
    r: float
    p_value: float
    significant: bool
    n: int
    alpha: float
    tail: str  # "two-sided" | "one-sided"


def pearson_test(x: Sequence[float], y: Sequence[float], alpha: float = 0.1,
                 tail: str = "two-sided") -> PearsonResult:
    """Pearson r with a Student-t significance test on n-2 df."""
    if tail not in ("two-sided", "one-sided"):
        raise StatsError(f"unknown tail {tail!r}")
    if len(x) != len(y):
        raise StatsError("x and y must align")
    n = len(x)
    if n < 3:
        raise StatsError(f"pearson test needs n >= 3, got {n}")
    xv = np.asarray(x, dtype=np.float64)
    yv = np.asarray(y, dtype=np.float64)
    dx = xv - xv.mean()
    dy = yv - yv.mean()
    sxx = float((dx * dx).sum())
    syy = float((dy * dy).sum())
    if sxx == 0.0 or syy == 0.0:
        raise StatsError("constant input has no defined correlation")
    r = float((dx * dy).sum()) / math.sqrt(sxx * syy)
    r = min(max(r, -1.0), 1.0)
    df = n - 2
    if abs(r) == 1.0:
        p = 0.0
    else:
        t = abs(r) * math.sqrt(df / (1.0 - r * r))
        p = 2.0 * float(_sps.t.sf(t, df))
    if tail == "one-sided":
        p = p / 2.0
    return PearsonResult(r, p, p < alpha, n, alpha, tail)


@dataclass(frozen=True)
class CorrelationMatrix:
    labels: tuple[str, ...]
    r: tuple[tuple[float, ...], ...]
    significant: tuple[tuple[bool, ...], ...]
    n: tuple[tuple[int, ...], ...]
    alpha: float
    tail: str


def correlation_matrix(rows: Mapping[str, Mapping[str, float | None]],
                       indicators: Sequence[str],
                       exclude: frozenset[str] | set[str] = frozenset(),
                       alpha: float = 0.1,
                       tail: str = "two-sided") -> CorrelationMatrix:
    """Pairwise Pearson tests across technologies (rows), with exclusions.

    Rows missing a value for either indicator of a pair drop out of that
    pair only.
    """
    kept = [key for key in rows if key not in exclude]
    if len(kept) < 3:
        raise StatsError(f"need >= 3 technologies after exclusion, got {len(kept)}")
    m = len(indicators)
    r_mat = [[1.0] * m for _ in range(m)]
    sig = [[True] * m for _ in range(m)]
    n_mat = [[len(kept)] * m for _ in range(m)]
    for i in range(m):
        for j in range(i + 1, m):
            xs, ys = [], []
            for key in kept:
                xv = rows[key].get(indicators[i])
                yv = rows[key].get(indicators[j])
                if xv is None or yv is None:
                    continue
                xs.append(xv)
                ys.append(yv)
            result = pearson_test(xs, ys, alpha=alpha, tail=tail)
            r_mat[i][j] = r_mat[j][i] = result.r
            sig[i][j] = sig[j][i] = result.significant
            n_mat[i][j] = n_mat[j][i] = result.n
    return CorrelationMatrix(
        labels=tuple(indicators),
        r=tuple(tuple(row) for row in r_mat),
        significant=tuple(tuple(row) for row in sig),
        n=tuple(tuple(row) for row in n_mat),
        alpha=alpha,
        tail=tail,
    )


def write_correlation_csv(matrix: CorrelationMatrix, out: IO[str]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["indicator_a", "indicator_b", "r", "n", "significant",
                     "alpha", "tail"])
    labels = matrix.labels
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            writer.writerow([
                labels[i], labels[j], format(matrix.r[i][j], ".6g"),
                matrix.n[i][j], str(matrix.significant[i][j]).lower(),
                format(matrix.alpha, ".6g"), matrix.tail,
            ])


# --------------------------------------------------------------------------
# OLS regression
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionResult:
    """Classical OLS with intercept; names order predictors then the constant."""

    names: tuple[str, ...]
    coefficients: tuple[float, ...]
    std_errors: tuple[float, ...]
    p_values: tuple[float, ...]
    r_squared: float
    adjusted_r_squared: float
    residual_std_error: float
    df_resid: int
    f_statistic: float
    f_p_value: float
    n: int

    @property
    def k(self) -> int:
        return len(self.names) - 1


def _stars(p: float) -> str:
    if p < 0.01:
        return "***"
    if p < 0.05:
        return "**"
    if p < 0.1:
        return "*"
    return ""


def regress(y: Sequence[float], columns: Sequence[Sequence[float]],
            names: Sequence[str]) -> RegressionResult:
    """OLS of y on the predictor columns plus an intercept.

    `names` labels the predictor columns; the constant is appended
    automatically. Classical (homoskedastic) standard errors.
    """
    if len(columns) != len(names):
        raise StatsError("one name per predictor column required")
    k = len(columns)
    if k == 0:
        raise StatsError("at least one predictor required")
    n = len(y)
    if any(len(c) != n for c in columns):
        raise StatsError("predictor columns must align with y")
    df = n - k - 1
    if df <= 0:
        raise StatsError(f"insufficient observations: n={n}, predictors={k}")
    yv = np.asarray(y, dtype=np.float64)
    design = np.column_stack([np.asarray(c, dtype=np.float64) for c in columns]
                             + [np.ones(n)])
    if np.linalg.matrix_rank(design) < k + 1:
        raise StatsError("design matrix is rank deficient")
    beta, _, _, _ = np.linalg.lstsq(design, yv, rcond=None)
    fitted = design @ beta
    resid = yv - fitted
    rss = float(resid @ resid)
    tss = float(((yv - yv.mean()) ** 2).sum())
    sigma_sq = rss / df
    cov = sigma_sq * np.linalg.inv(design.T @ design)
    std_errors = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(std_errors > 0, np.abs(beta) / std_errors, np.inf)
    p_values = tuple(2.0 * float(_sps.t.sf(t, df)) for t in t_stats)
    r_squared = 1.0 if tss == 0.0 else 1.0 - rss / tss
    adjusted = 1.0 - (1.0 - r_squared) * (n - 1) / df
    if rss == 0.0:
        f_stat, f_p = math.inf, 0.0
    else:
        f_stat = ((tss - rss) / k) / sigma_sq
        f_p = float(_sps.f.sf(f_stat, k, df))
    return RegressionResult(
        names=tuple(names) + ("Constant",),
        coefficients=tuple(float(b) for b in beta),
        std_errors=tuple(float(s) for s in std_errors),
        p_values=p_values,
        r_squared=float(r_squared),
        adjusted_r_squared=float(adjusted),
        residual_std_error=math.sqrt(sigma_sq),
        df_resid=df,
        f_statistic=float(f_stat),
        f_p_value=f_p,
        n=n,
    )


def format_regression_text(result: RegressionResult, dependent: str) -> str:
    """Plain-text summary: coefficient block then the diagnostics block."""
    width = max(len(name) for name in result.names) + 2
    lines = [
        "=" * 50,
        f"Dependent variable: {dependent}",
        "-" * 50,
    ]
    for name, coef, se, p in zip(result.names, result.coefficients,
                                 result.std_errors, result.p_values):
        lines.append(f"{name:<{width}}{format(coef, '.6g')}{_stars(p)}")
        lines.append(f"{'':<{width}}({format(se, '.6g')})")
    lines += [
        "-" * 50,
        f"{'Observations':<22}{result.n}",
        f"{'R2':<22}{format(result.r_squared, '.6g')}",
        f"{'Adjusted R2':<22}{format(result.adjusted_r_squared, '.6g')}",
        f"{'Residual Std. Error':<22}{format(result.residual_std_error, '.6g')}"
        f" (df = {result.df_resid})",
        f"{'F Statistic':<22}{format(result.f_statistic, '.6g')}"
        f"{_stars(result.f_p_value)} (df = {result.k}; {result.df_resid})",
        "=" * 50,
        "Note: *p<0.1; **p<0.05; ***p<0.01",
    ]
    return "\n".join(lines) + "\n"


def regression_json_dict(result: RegressionResult, dependent: str) -> dict:
    return {
        "dependent": dependent,
        "coefficients": [
            {"name": name, "coefficient": coef, "std_error": se, "p_value": p,
             "stars": _stars(p)}
            for name, coef, se, p in zip(result.names, result.coefficients,
                                         result.std_errors, result.p_values)
        ],
        "n": result.n,
        "r_squared": result.r_squared,
        "adjusted_r_squared": result.adjusted_r_squared,
        "residual_std_error": result.residual_std_error,
        "df_resid": result.df_resid,
        "f_statistic": result.f_statistic,
        "f_df": [result.k, result.df_resid],
        "f_p_value": result.f_p_value,
        "note": "*p<0.1; **p<0.05; ***p<0.01",
    }


def write_regression_json(result: RegressionResult, dependent: str,
                          out: IO[str]) -> None:
    json.dump(regression_json_dict(result, dependent), out, indent=2)
    out.write("\n")
