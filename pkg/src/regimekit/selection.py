"""Lag selection: smallest significant lag, and AIC-minimizing lag.

All candidates of one search are fitted on a common sample, the one usable
at the largest candidate lag, so their likelihoods are comparable.
"""

from __future__ import annotations

import csv
import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from regimekit.estimate import FitResult, fit, stars
from regimekit.exceptions import EstimationError, RegimeKitError
from regimekit.model import TVTP, ModelSpec, Term
from regimekit.timeseries import Dataset, Period, Series, align

logger = logging.getLogger(__name__)

LEVELS = {"10%": 1.645, "5%": 1.960, "1%": 2.576}
_STAR_RANK = {"": 0, "*": 1, "**": 2, "***": 3}
_LEVEL_RANK = {"10%": 1, "5%": 2, "1%": 3}


def _level(level) -> str:
    s = str(level).strip().rstrip("%") + "%"
    if s not in LEVELS:
        raise ValueError(f"level must be one of 10, 5, 1 (percent), got {level!r}")
    return s


class DatasetBuilder:
    """Turns a model specification into an aligned :class:`Dataset`."""

    def __init__(self, series: Union[Mapping[str, Series], Sequence[Series]], dep: str):
        if not isinstance(series, Mapping):
            series = {s.name: s for s in series}
        self.series = dict(series)
        if dep not in self.series:
            raise KeyError(f"dependent series {dep!r} not available")
        self.dep = dep

    def _get(self, name):
        try:
            return self.series[name]
        except KeyError:
            raise KeyError(f"series {name!r} not available") from None

    def first_period(self, spec: ModelSpec) -> Period:
        lo = self._get(self.dep).start
        for t in spec.regressors:
            lo = max(lo, self._get(t.name).start + t.lag)
        if spec.tp_covariate is not None:
            lo = max(lo, self._get(spec.tp_covariate.name).start + spec.tp_covariate.lag)
        return lo

    def build(self, spec: ModelSpec, first_period: Optional[Period] = None) -> Dataset:
        cov = None
        if spec.tp_covariate is not None:
            cov = (self._get(spec.tp_covariate.name), spec.tp_covariate.lag)
        return align(
            self._get(self.dep),
            [(self._get(t.name), t.lag) for t in spec.regressors],
            cov,
            first_period=first_period,
        )

    __call__ = build


@dataclass
class Candidate:
    lags: tuple
    loglik: float = math.nan
    aic: float = math.nan
    coefficients: tuple = ()  # (coef, se or None, stars) per regime / per reported parameter
    status: str = "ok"


@dataclass
class LagSearchResult:
    variable: str
    rule: str
    chosen: Optional[Union[int, tuple]]
    candidates: list = field(default_factory=list)

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lag", "regime", "loglik", "aic", "coefficient", "se", "stars", "status"])
            for c in self.candidates:
                lag = "/".join(str(l) for l in c.lags)
                if not c.coefficients:
                    w.writerow([lag, "", "", "", "", "", "", c.status])
                for regime, (coef, se, st) in enumerate(c.coefficients, start=1):
                    w.writerow([
                        lag, regime, repr(c.loglik), repr(c.aic), repr(coef),
                        "" if se is None else repr(se), st, c.status,
                    ])


def _coef(fr: FitResult, name: str) -> tuple:
    idx = {n: i for i, n in enumerate(fr.spec.param_names())}
    out = []
    for key in name:
        i = idx[key]
        se = fr.std_errors[i]
        se = None if not np.isfinite(se) else float(se)
        out.append((float(fr.theta[i]), se, stars(fr.theta[i], se)))
    return tuple(out)


def _common_start(builder: DatasetBuilder, specs: Sequence[ModelSpec]) -> Period:
    return max(builder.first_period(s) for s in specs)


def min_significant_lag(
    builder: DatasetBuilder,
    spec_base: ModelSpec,
    var: str,
    max_lag: int = 4,
    level="10%",
    rule: str = "either",
    **fit_options,
) -> LagSearchResult:
    """Smallest lag of ``var`` whose coefficient is significant at ``level``.

    ``rule`` is ``"either"`` (significant in at least one regime) or
    ``"both"``. Candidates whose fit fails are skipped with a warning.
    """
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    if rule not in ("either", "both"):
        raise ValueError("rule must be 'either' or 'both'")
    lvl = _level(level)
    specs = [spec_base.with_regressor_lag(var, l) for l in range(1, max_lag + 1)]
    start = _common_start(builder, specs)
    result = LagSearchResult(var, f"min_significant({lvl},{rule})", None)
    for l, spec in zip(range(1, max_lag + 1), specs):
        cand = Candidate((l,))
        result.candidates.append(cand)
        try:
            fr = fit(builder.build(spec, start), spec, **fit_options)
        except (RegimeKitError, ValueError, np.linalg.LinAlgError) as exc:
            cand.status = f"failed: {exc}"
            warnings.warn(f"lag {l} of {var}: fit failed ({exc}); skipped", RuntimeWarning, stacklevel=2)
            continue
        cand.loglik, cand.aic = fr.loglik, fr.aic
        cand.coefficients = _coef(fr, [f"{var}_L{l}_1", f"{var}_L{l}_2"])
        sig = [_STAR_RANK[st] >= _LEVEL_RANK[lvl] for _, _, st in cand.coefficients]
        if (any(sig) if rule == "either" else all(sig)) and result.chosen is None:
            result.chosen = l
            break
    return result


def _argmin_aic(cands: Sequence[Candidate], atol: float = 1e-12) -> Candidate:
    """Lowest AIC; among ties (within ``atol``) the earliest, i.e. the smallest lag."""
    ok = [c for c in cands if c.status == "ok" and np.isfinite(c.aic)]
    if not ok:
        raise EstimationError("all lag candidates failed")
    best = ok[0]
    for c in ok[1:]:
        if c.aic < best.aic - atol:
            best = c
    return best


def aic_lag_search(
    builder: DatasetBuilder,
    spec_base: ModelSpec,
    var: str,
    where: str = "regression",
    max_lag: int = 4,
    **fit_options,
) -> LagSearchResult:
    """Fit every candidate lag of ``var`` and return the AIC minimizer.

    ``where`` is ``"regression"`` (lag of ``var`` as a regressor),
    ``"transition"`` (lag of ``var`` as the TVTP covariate) or ``"both"``
    (all pairs, reported as ``(regression_lag, transition_lag)``).
    """
    if max_lag < 1:
        raise ValueError("max_lag must be >= 1")
    lags = range(1, max_lag + 1)
    if where == "regression":
        grid = [((l,), spec_base.with_regressor_lag(var, l)) for l in lags]
    elif where == "transition":
        grid = [((l,), spec_base.replace(transition_mode=TVTP, tp_covariate=(var, l))) for l in lags]
    elif where == "both":
        grid = [
            ((l5, l0), spec_base.with_regressor_lag(var, l5).replace(transition_mode=TVTP, tp_covariate=(var, l0)))
            for l5, l0 in itertools.product(lags, lags)
        ]
    else:
        raise ValueError("where must be 'regression', 'transition' or 'both'")
    start = _common_start(builder, [s for _, s in grid])
    result = LagSearchResult(var, f"aic({where})", None)
    for lag_key, spec in grid:
        cand = Candidate(lag_key)
        result.candidates.append(cand)
        try:
            fr = fit(builder.build(spec, start), spec, **fit_options)
        except (RegimeKitError, ValueError, np.linalg.LinAlgError) as exc:
            cand.status = f"failed: {exc}"
            logger.warning("lag %s of %s: fit failed (%s)", lag_key, var, exc)
            continue
        cand.loglik, cand.aic = fr.loglik, fr.aic
        if where == "transition":
            keys = ["alpha1_1", "alpha1_2"]
        else:
            keys = [f"{var}_L{lag_key[0]}_1", f"{var}_L{lag_key[0]}_2"]
        cand.coefficients = _coef(fr, keys)
    best = _argmin_aic(result.candidates)
    result.chosen = best.lags[0] if len(best.lags) == 1 else best.lags
    return result
