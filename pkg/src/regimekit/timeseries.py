"""Quarterly series, growth-rate transforms, descriptive statistics and lag alignment.

Series are immutable: values are stored as read-only float arrays and every
transform returns a new object.
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from functools import total_ordering
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from regimekit.exceptions import (
    AlignmentError,
    DegenerateRegressionError,
    DomainError,
    LoadError,
)

__all__ = [
    "ADF_CRITICAL_VALUES",
    "Dataset",
    "Period",
    "Series",
    "SummaryStats",
    "adf_test",
    "align",
    "growth_rate",
    "load_csv",
    "summarize",
    "write_csv",
]

_PERIOD_RE = re.compile(r"^\s*(\d{4})Q(\d+)\s*$")

# Constant-only asymptotic ADF critical values, most to least stringent.
ADF_CRITICAL_VALUES = (("1%", -3.44), ("5%", -2.88), ("10%", -2.57))

MIN_OVERLAP = 20


@total_ordering
@dataclass(frozen=True)
class Period:
    """A calendar quarter."""

    year: int
    quarter: int

    def __post_init__(self):
        if self.quarter not in (1, 2, 3, 4):
            raise ValueError(f"invalid quarter {self.quarter} (must be 1..4)")

    @classmethod
    def parse(cls, label: str) -> "Period":
        m = _PERIOD_RE.match(label)
        if m is None:
            raise ValueError(f"malformed period label {label!r} (expected YYYYQn)")
        year, quarter = int(m.group(1)), int(m.group(2))
        if quarter not in (1, 2, 3, 4):
            raise ValueError(f"invalid quarter in {label.strip()!r}")
        return cls(year, quarter)

    @property
    def ordinal(self) -> int:
        return self.year * 4 + (self.quarter - 1)

    @classmethod
    def from_ordinal(cls, n: int) -> "Period":
        return cls(n // 4, n % 4 + 1)

    def __add__(self, k: int) -> "Period":
        if not isinstance(k, (int, np.integer)):
            return NotImplemented
        return Period.from_ordinal(self.ordinal + int(k))

    def __sub__(self, other):
        if isinstance(other, Period):
            return self.ordinal - other.ordinal
        if isinstance(other, (int, np.integer)):
            return Period.from_ordinal(self.ordinal - int(other))
        return NotImplemented

    def __lt__(self, other: "Period") -> bool:
        if not isinstance(other, Period):
            return NotImplemented
        return self.ordinal < other.ordinal

    def __str__(self) -> str:
        return f"{self.year}Q{self.quarter}"


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Series:
    """A named, gap-free quarterly series starting at ``start``."""

    name: str
    start: Period
    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError(f"series {self.name!r} must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"series {self.name!r} contains missing or non-finite values")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size

    @property
    def end(self) -> Period:
        return self.start + (len(self) - 1)

    @property
    def periods(self) -> list[Period]:
        return [self.start + i for i in range(len(self))]

    def value_at(self, p: Period) -> float:
        i = p - self.start
        if i < 0 or i >= len(self):
            raise KeyError(str(p))
        return float(self.values[i])


@dataclass(frozen=True)
class Dataset:
    """Lag-aligned estimation sample.

    ``regressors`` holds ``(name, lag, column)`` triples; row ``t`` of a
    column with lag ``l`` is the source series at period ``periods[t] - l``.
    """

    dep: np.ndarray
    regressors: tuple = ()
    tp_covariate: Optional[tuple] = None
    periods: tuple = ()
    dep_name: str = "dep"

    def __post_init__(self):
        dep = _frozen_array(self.dep)
        n = dep.size
        regs = tuple((str(nm), int(lag), _frozen_array(col)) for nm, lag, col in self.regressors)
        cov = None
        if self.tp_covariate is not None:
            nm, lag, col = self.tp_covariate
            cov = (str(nm), int(lag), _frozen_array(col))
        periods = tuple(self.periods)
        for nm, _, col in regs + ((cov,) if cov else ()):
            if col.size != n:
                raise ValueError(f"column {nm!r} has length {col.size}, expected {n}")
        if len(periods) != n:
            raise ValueError(f"periods has length {len(periods)}, expected {n}")
        object.__setattr__(self, "dep", dep)
        object.__setattr__(self, "regressors", regs)
        object.__setattr__(self, "tp_covariate", cov)
        object.__setattr__(self, "periods", periods)

    @property
    def n_obs(self) -> int:
        return self.dep.size

    @property
    def X(self) -> np.ndarray:
        """Regressor matrix, shape (n_obs, K); K may be zero."""
        if not self.regressors:
            return np.empty((self.n_obs, 0))
        return np.column_stack([col for _, _, col in self.regressors])

    @property
    def z(self) -> Optional[np.ndarray]:
        return None if self.tp_covariate is None else self.tp_covariate[2]

    @property
    def regressor_names(self) -> list[str]:
        return [nm for nm, _, _ in self.regressors]

    def with_column_scaled(self, name: str, factor: float) -> "Dataset":
        regs = [(nm, lag, col * factor if nm == name else col) for nm, lag, col in self.regressors]
        return Dataset(self.dep, regs, self.tp_covariate, self.periods, self.dep_name)


@dataclass(frozen=True)
class SummaryStats:
    mean: float
    sd: float
    max: float
    min: float
    n_obs: int
    adf_tstat: float = math.nan
    adf_reject_level: str = "none"

    def adf_stars(self) -> str:
        return {"1%": "***", "5%": "**", "10%": "*"}.get(self.adf_reject_level, "")


def load_csv(
    path,
    date_column: str = "period",
    value_columns: Optional[Sequence[str]] = None,
) -> list[Series]:
    """Read quarterly series from a comma-separated file.

    When ``value_columns`` is empty or None every column except the date
    column is loaded. A column may start later or end earlier than the file
    (blank leading/trailing cells); a blank cell between values is an error.
    Errors name the offending data row (1-based, header excluded) and column.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise LoadError(f"{path}: empty file") from None
        rows = [r for r in reader if any(cell.strip() for cell in r)]

    if date_column not in header:
        raise LoadError(f"{path}: date column {date_column!r} not found in header")
    if not value_columns:
        value_columns = [h for h in header if h != date_column]
    missing = [c for c in value_columns if c not in header]
    if missing:
        raise LoadError(f"{path}: unknown column(s) {', '.join(missing)}")
    if not rows:
        raise LoadError(f"{path}: no data rows")

    di = header.index(date_column)
    idx = [header.index(c) for c in value_columns]
    periods: list[Period] = []
    for r, row in enumerate(rows, start=1):
        if len(row) != len(header):
            raise LoadError(f"row {r}: expected {len(header)} fields, found {len(row)}")
        try:
            p = Period.parse(row[di])
        except ValueError as exc:
            raise LoadError(f"row {r}, column {date_column!r}: {exc}") from None
        if periods:
            expected = periods[-1] + 1
            if p == periods[-1] or p < expected:
                raise LoadError(f"row {r}, column {date_column!r}: duplicate or out-of-order period {p}")
            if p != expected:
                raise LoadError(f"row {r}, column {date_column!r}: gap at {expected}")
        periods.append(p)

    out = []
    for name, j in zip(value_columns, idx):
        cells = [row[j].strip() for row in rows]
        filled = [r for r, c in enumerate(cells) if c]
        if not filled:
            raise LoadError(f"column {name!r}: no values")
        # Blank cells are allowed only before the first and after the last value.
        first, last = filled[0], filled[-1]
        vals = []
        for r in range(first, last + 1):
            cell = cells[r]
            if not cell:
                raise LoadError(f"row {r + 1}, column {name!r}: missing value inside the series")
            try:
                v = float(cell)
            except ValueError:
                raise LoadError(f"row {r + 1}, column {name!r}: non-numeric value {cell!r}") from None
            if not math.isfinite(v):
                raise LoadError(f"row {r + 1}, column {name!r}: missing value {cell!r}")
            vals.append(v)
        out.append(Series(name, periods[first], vals))
    return out


def write_csv(path, series: Sequence[Series], date_column: str = "period") -> None:
    """Write series in the dialect read by :func:`load_csv` (union of spans)."""
    first = min(s.start for s in series)
    last = max(s.end for s in series)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([date_column] + [s.name for s in series])
        for k in range(last - first + 1):
            p = first + k
            row = [str(p)]
            for s in series:
                if s.start <= p <= s.end:
                    row.append(repr(s.value_at(p)))
                else:
                    row.append("")
            w.writerow(row)


def growth_rate(s: Series) -> Series:
    """Log-difference growth rate in percent: ``100 * ln(s_t / s_{t-1})``."""
    if np.any(s.values <= 0):
        i = int(np.argmax(s.values <= 0))
        raise DomainError(f"{s.name}: non-positive level {s.values[i]} at {s.start + i}")
    if len(s) < 2:
        raise DomainError(f"{s.name}: need at least two observations for a growth rate")
    return Series(s.name, s.start + 1, 100.0 * np.diff(np.log(s.values)))


def summarize(s: Series, adf_max_lag: Optional[int] = None) -> SummaryStats:
    """Mean, sample SD (n-1 divisor), extremes and count.

    The ADF fields are filled only when ``adf_max_lag`` is given.
    """
    x = s.values
    if x.size < 2:
        raise ValueError(f"{s.name}: summarize needs n >= 2, got {x.size}")
    stats = dict(
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)),
        max=float(x.max()),
        min=float(x.min()),
        n_obs=int(x.size),
    )
    if adf_max_lag is not None:
        t, level = adf_test(s, adf_max_lag)
        stats.update(adf_tstat=t, adf_reject_level=level)
    return SummaryStats(**stats)


def _ols(y, X):
    """Least squares returning (coef, se, ssr); raises on rank deficiency."""
    n, k = X.shape
    if np.linalg.matrix_rank(X) < k:
        raise DegenerateRegressionError("design matrix is rank deficient")
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    if n <= k:
        raise DegenerateRegressionError("not enough observations for the regression")
    sigma2 = ssr / (n - k)
    cov = sigma2 * np.linalg.inv(X.T @ X)
    return coef, np.sqrt(np.diag(cov)), ssr


def _adf_design(x: np.ndarray, p: int, nobs: int):
    dx = np.diff(x)
    # Keep the last ``nobs`` usable rows.
    y = dx[-nobs:]
    cols = [np.ones(nobs), x[-nobs - 1:-1]]
    for i in range(1, p + 1):
        cols.append(dx[-nobs - i:-i])
    return y, np.column_stack(cols)


def adf_test(s: Series, max_lag: int = 4) -> tuple[float, str]:
    """Augmented Dickey-Fuller test with a constant.

    The augmentation order is chosen by AIC over ``0..max_lag`` on a common
    sample; the chosen order is then re-estimated on every usable row.

    Returns
    -------
    tstat : float
        t-ratio on the lagged level.
    reject_level : str
        Most stringent of ``"1%"``, ``"5%"``, ``"10%"`` at which the unit-root
        null is rejected, or ``"none"``.
    """
    x = np.asarray(s.values if isinstance(s, Series) else s, dtype=float)
    n = x.size
    if max_lag < 0:
        raise ValueError("max_lag must be >= 0")
    if n < max_lag + 10:
        raise ValueError(f"adf_test needs n >= max_lag + 10 ({max_lag + 10}), got {n}")
    if np.ptp(x) == 0:
        raise DegenerateRegressionError("zero-variance series: lagged level is collinear with the constant")

    common = n - 1 - max_lag
    best_p, best_aic = 0, math.inf
    for p in range(max_lag + 1):
        y, X = _adf_design(x, p, common)
        _, _, ssr = _ols(y, X)
        aic = common * math.log(ssr / common) + 2 * X.shape[1]
        if aic < best_aic - 1e-12:
            best_p, best_aic = p, aic

    y, X = _adf_design(x, best_p, n - 1 - best_p)
    coef, se, _ = _ols(y, X)
    tstat = float(coef[1] / se[1])
    level = "none"
    for name, cv in ADF_CRITICAL_VALUES:
        if tstat < cv:
            level = name
            break
    return tstat, level


def align(
    dep: Series,
    regressors: Sequence[tuple[Series, int]] = (),
    tp_cov: Optional[tuple[Series, int]] = None,
    min_overlap: int = MIN_OVERLAP,
    first_period: Optional[Period] = None,
) -> Dataset:
    """Build a lag-aligned :class:`Dataset`.

    Rows are the periods at which the dependent value and every lagged
    regressor (and covariate) value exist. ``first_period`` optionally
    trims the sample further so that nested lag searches share one sample.
    """
    terms = [(s, int(lag)) for s, lag in regressors]
    if tp_cov is not None:
        terms.append((tp_cov[0], int(tp_cov[1])))
    for s, lag in terms:
        if lag < 0:
            raise AlignmentError(f"negative lag {lag} for {s.name!r}")

    lo, hi = dep.start, dep.end
    for s, lag in terms:
        lo = max(lo, s.start + lag)
        hi = min(hi, s.end + lag)
    if first_period is not None:
        lo = max(lo, first_period)
    n = hi - lo + 1
    if n < min_overlap:
        raise AlignmentError(
            f"insufficient overlap: {max(n, 0)} usable periods starting at {lo} "
            f"(need at least {min_overlap})"
        )

    def column(s, lag):
        i0 = (lo - lag) - s.start
        return s.values[i0:i0 + n]

    periods = tuple(lo + i for i in range(n))
    regs = [(s.name, lag, column(s, lag)) for s, lag in regressors]
    cov = None
    if tp_cov is not None:
        cov = (tp_cov[0].name, int(tp_cov[1]), column(*tp_cov))
    return Dataset(column(dep, 0), regs, cov, periods, dep.name)
