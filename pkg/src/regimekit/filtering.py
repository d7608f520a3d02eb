"""Hamilton filter, Kim smoother, regime dating and durations.

The forward recursion normalizes each step in the log domain: the largest
regime log-density is subtracted before exponentiating, and the log of the
normalizing constant is accumulated into the likelihood.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np
from numba import njit
from scipy.special import logsumexp

from regimekit.exceptions import NonFiniteDensityError
from regimekit.model import (
    ModelSpec,
    Params,
    TransitionMatrix,
    pack,
    stay_probabilities,
    steady_state,
    transition_matrix_at,
    unpack,
)
from regimekit.timeseries import Dataset, Period

SURGE, STEADY = 1, 2
THRESHOLD = 0.5
# Largest standardized squared residual accepted by the strict density check.
DENSITY_CAP = 700.0

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class FilterOutput:
    loglik: float
    predicted: np.ndarray
    filtered: np.ndarray
    per_obs_loglik: np.ndarray


@dataclass(frozen=True)
class SmoothOutput:
    smoothed: np.ndarray


@dataclass(frozen=True)
class Classification:
    periods: tuple
    regimes: tuple  # SURGE / STEADY per period
    episodes: tuple  # (start Period, end Period) surge runs

    def labels(self) -> list[str]:
        return ["surge" if r == SURGE else "steady" for r in self.regimes]

    def format_episodes(self) -> str:
        return ", ".join(f"{a}-{b}" for a, b in self.episodes)


@njit(cache=True)
def _forward(logf, p11, p22, init):
    n = logf.shape[0]
    predicted = np.empty((n, 2))
    filtered = np.empty((n, 2))
    ll = np.empty(n)
    a, b = init[0], init[1]
    for t in range(n):
        if t > 0:
            f1, f2 = filtered[t - 1, 0], filtered[t - 1, 1]
            a = f1 * p11[t] + f2 * (1.0 - p22[t])
            b = f1 * (1.0 - p11[t]) + f2 * p22[t]
            s = a + b
            a, b = a / s, b / s
        predicted[t, 0] = a
        predicted[t, 1] = b
        m = max(logf[t, 0], logf[t, 1])
        w1 = a * math.exp(logf[t, 0] - m)
        w2 = b * math.exp(logf[t, 1] - m)
        c = w1 + w2
        filtered[t, 0] = w1 / c
        filtered[t, 1] = w2 / c
        ll[t] = m + math.log(c)
    return predicted, filtered, ll


@njit(cache=True)
def _forward_loglik(logf, p11, p22, init):
    n = logf.shape[0]
    a, b = init[0], init[1]
    total = 0.0
    f1 = f2 = 0.0
    for t in range(n):
        if t > 0:
            a = f1 * p11[t] + f2 * (1.0 - p22[t])
            b = f1 * (1.0 - p11[t]) + f2 * p22[t]
        m = max(logf[t, 0], logf[t, 1])
        w1 = a * math.exp(logf[t, 0] - m)
        w2 = b * math.exp(logf[t, 1] - m)
        c = w1 + w2
        f1 = w1 / c
        f2 = w2 / c
        total += m + math.log(c)
    return total


@njit(cache=True)
def _backward(predicted, filtered, p11, p22):
    n = filtered.shape[0]
    sm = np.empty((n, 2))
    sm[n - 1, 0] = filtered[n - 1, 0]
    sm[n - 1, 1] = filtered[n - 1, 1]
    for t in range(n - 2, -1, -1):
        r1 = sm[t + 1, 0] / predicted[t + 1, 0]
        r2 = sm[t + 1, 1] / predicted[t + 1, 1]
        q11, q22 = p11[t + 1], p22[t + 1]
        s1 = filtered[t, 0] * (q11 * r1 + (1.0 - q11) * r2)
        s2 = filtered[t, 1] * ((1.0 - q22) * r1 + q22 * r2)
        s = s1 + s2
        sm[t, 0] = s1 / s
        sm[t, 1] = s2 / s
    return sm


def regime_log_densities(ds: Dataset, spec: ModelSpec, theta: np.ndarray) -> np.ndarray:
    """Gaussian log-density of each observation under each regime, shape (n, 2)."""
    k = spec.k
    X = ds.X
    out = np.empty((ds.n_obs, 2))
    for s in range(2):
        block = theta[s * (2 + k):(s + 1) * (2 + k)]
        resid = ds.dep - block[0]
        if k:
            resid = resid - X @ block[1:1 + k]
        lv = block[-1]
        out[:, s] = -0.5 * (_LOG_2PI + lv + resid * resid * math.exp(-lv))
    return out


def _initial(p11: float, p22: float, init) -> np.ndarray:
    if isinstance(init, str):
        if init == "ergodic":
            return np.array(steady_state(TransitionMatrix(p11, p22)))
        if init == "uniform":
            return np.array([0.5, 0.5])
        raise ValueError(f"unknown initial distribution {init!r}")
    arr = np.asarray(init, dtype=float)
    if arr.shape != (2,) or np.any(arr < 0) or not np.isclose(arr.sum(), 1.0):
        raise ValueError("initial distribution must be two non-negative weights summing to 1")
    return arr


def _as_vector(p: Union[Params, np.ndarray], spec: ModelSpec) -> np.ndarray:
    return pack(p) if isinstance(p, Params) else np.asarray(p, dtype=float)


def _check_columns(ds: Dataset, spec: ModelSpec):
    if ds.regressor_names != spec.names:
        raise ValueError(f"dataset regressors {ds.regressor_names} do not match model {spec.names}")
    if spec.tvtp and ds.z is None:
        raise ValueError("TVTP model needs a dataset with a transition covariate")


def loglik_vector(theta: np.ndarray, ds: Dataset, spec: ModelSpec, init="ergodic") -> float:
    """Fast log-likelihood of a flat parameter vector (no density checks)."""
    logf = regime_log_densities(ds, spec, theta)
    p11, p22 = stay_probabilities(spec, theta, ds.z, ds.n_obs)
    return float(_forward_loglik(logf, p11, p22, _initial(p11[0], p22[0], init)))


def loglikelihood(
    ds: Dataset,
    spec: ModelSpec,
    p: Union[Params, np.ndarray],
    init="ergodic",
) -> FilterOutput:
    """Run the Hamilton filter.

    ``init`` selects the distribution of the first regime: ``"ergodic"``
    (steady state of the first-row transition matrix), ``"uniform"``, or an
    explicit pair of probabilities.

    Raises
    ------
    NonFiniteDensityError
        If some observation lies beyond ``DENSITY_CAP`` standardized squared
        units from the regression line in both regimes.
    """
    _check_columns(ds, spec)
    theta = _as_vector(p, spec)
    unpack(theta, spec)  # layout check
    logf = regime_log_densities(ds, spec, theta)
    lv = np.array([theta[1 + spec.k], theta[2 * (2 + spec.k) - 1]])
    z2 = -2.0 * logf - _LOG_2PI - lv  # resid^2 / variance
    bad = ~np.isfinite(z2).all(axis=1) | (z2.min(axis=1) > DENSITY_CAP)
    if bad.any():
        raise NonFiniteDensityError(int(np.argmax(bad)))
    p11, p22 = stay_probabilities(spec, theta, ds.z, ds.n_obs)
    predicted, filtered, ll = _forward(logf, p11, p22, _initial(p11[0], p22[0], init))
    return FilterOutput(float(ll.sum()), predicted, filtered, ll)


def smooth(
    fo: FilterOutput,
    ds: Dataset,
    spec: ModelSpec,
    p: Union[Params, np.ndarray],
) -> SmoothOutput:
    """Kim backward recursion on the output of :func:`loglikelihood`."""
    theta = _as_vector(p, spec)
    p11, p22 = stay_probabilities(spec, theta, ds.z, ds.n_obs)
    if np.any(fo.predicted[1:] <= 0.0):
        raise ZeroDivisionError("zero predicted probability in the smoother")
    return SmoothOutput(_backward(fo.predicted, fo.filtered, p11, p22))


def enumerate_paths(
    ds: Dataset,
    spec: ModelSpec,
    p: Union[Params, np.ndarray],
    init="ergodic",
) -> tuple[float, np.ndarray]:
    """Exact likelihood and smoothed marginals by summing over all 2**T paths.

    Independent of the recursions above: every path's joint log-probability
    is built directly from the initial distribution, the per-period
    transition matrices and the Gaussian densities. Only practical for T <= ~16.
    """
    theta = _as_vector(p, spec)
    params = unpack(theta, spec)
    n = ds.n_obs
    X = ds.X
    z = ds.z
    dens = np.empty((n, 2))
    for s, r in enumerate(params.regime):
        var = math.exp(r.log_var)
        for t in range(n):
            mean = r.mu + sum(b * X[t, j] for j, b in enumerate(r.betas))
            e = ds.dep[t] - mean
            dens[t, s] = -0.5 * math.log(2 * math.pi * var) - e * e / (2 * var)
    mats = [
        transition_matrix_at(params.transition, None if z is None else float(z[t])).as_array()
        for t in range(n)
    ]
    first = mats[0]
    pi0 = _initial(first[0, 0], first[1, 1], init)

    paths = np.array(list(itertools.product((0, 1), repeat=n)))
    logp = np.log(pi0[paths[:, 0]]) + dens[0, paths[:, 0]]
    for t in range(1, n):
        logp = logp + np.log(mats[t][paths[:, t - 1], paths[:, t]]) + dens[t, paths[:, t]]
    total = logsumexp(logp)
    w = np.exp(logp - total)
    post = np.empty((n, 2))
    for t in range(n):
        post[t, 1] = w[paths[:, t] == 1].sum()
        post[t, 0] = 1.0 - post[t, 1]
    return float(total), post


def classify(sm: Union[SmoothOutput, np.ndarray], periods: Sequence[Period]) -> Classification:
    """Surge iff the surge probability is strictly above 0.5; ties go to steady."""
    probs = sm.smoothed[:, 0] if isinstance(sm, SmoothOutput) else np.asarray(sm, dtype=float)
    periods = tuple(periods)
    if len(periods) != probs.size:
        raise ValueError("periods and probabilities differ in length")
    regimes = tuple(SURGE if q > THRESHOLD else STEADY for q in probs)
    return Classification(periods, regimes, tuple(_runs(regimes, periods, SURGE)))


def _runs(regimes, periods, which):
    out = []
    start = None
    for i, r in enumerate(regimes):
        if r == which and start is None:
            start = i
        if r != which and start is not None:
            out.append((periods[start], periods[i - 1]))
            start = None
    if start is not None:
        out.append((periods[start], periods[len(regimes) - 1]))
    return out


def model_durations(tm: TransitionMatrix) -> tuple[float, float]:
    """Expected sojourn lengths ``1 / (1 - p_ii)`` of a time-homogeneous chain."""
    return 1.0 / (1.0 - tm.p11), 1.0 / (1.0 - tm.p22)


def empirical_durations(regimes: Sequence[int]) -> tuple[Optional[float], Optional[float]]:
    """Quarters classified in each regime divided by its number of runs.

    A regime with no runs has no defined duration and is reported as None.
    """
    out = []
    for which in (SURGE, STEADY):
        count = sum(1 for r in regimes if r == which)
        runs = sum(
            1 for i, r in enumerate(regimes) if r == which and (i == 0 or regimes[i - 1] != which)
        )
        out.append(count / runs if runs else None)
    return tuple(out)


def durations(
    tm: Optional[TransitionMatrix] = None,
    classification: Optional[Classification] = None,
):
    """Model-implied and empirical durations; either part is None when its input is."""
    implied = model_durations(tm) if tm is not None else None
    empirical = empirical_durations(classification.regimes) if classification is not None else None
    return implied, empirical


def write_probabilities_csv(path, periods, sm: SmoothOutput) -> None:
    """Export smoothed probabilities: period, p_surge, p_steady, regime_label."""
    cls = classify(sm, periods)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "p_surge", "p_steady", "regime_label"])
        for p, row, lab in zip(periods, sm.smoothed, cls.labels()):
            w.writerow([str(p), repr(float(row[0])), repr(float(row[1])), lab])
