"""Sampling from two-regime FTP/TVTP data-generating processes."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from regimekit.model import (
    ModelSpec,
    Params,
    RegimeParams,
    TransitionParams,
    pack,
    steady_state,
    transition_matrix_at,
    unpack,
)
from regimekit.timeseries import Dataset, Period, Series, align

DEFAULT_START = Period(2000, 1)


@dataclass(frozen=True)
class DGPConfig:
    """Generating process: a model, its true parameters and regressor laws.

    ``regressor_generators`` maps a series name to ``(mean, sd)`` of an i.i.d.
    Gaussian stream; unnamed streams default to standard normal. The
    transition covariate is one of these streams, so it may coincide with a
    regressor. ``initial_state`` (1 or 2) pins the first regime instead of
    drawing it from the steady state of the first transition matrix.
    """

    spec: ModelSpec
    params: Params
    T: int
    regressor_generators: dict = field(default_factory=dict)
    seed: int = 0
    initial_state: Optional[int] = None
    start: Period = DEFAULT_START
    dep_name: str = "dep"

    def __post_init__(self):
        if self.T < 1:
            raise ValueError("T must be >= 1")
        pack(self.params)  # shape check below
        unpack(pack(self.params), self.spec)
        if self.initial_state not in (None, 1, 2):
            raise ValueError("initial_state must be 1, 2 or None")
        for r in self.params.regime:
            if not -10.0 <= r.log_var <= 10.0:
                raise ValueError("log_var outside [-10, 10]")

    def with_seed(self, seed: int) -> "DGPConfig":
        return DGPConfig(self.spec, self.params, self.T, dict(self.regressor_generators), seed,
                         self.initial_state, self.start, self.dep_name)

    def stream_names(self) -> list[str]:
        names = list(self.spec.names)
        if self.spec.tp_covariate is not None and self.spec.tp_covariate.name not in names:
            names.append(self.spec.tp_covariate.name)
        return names

    def to_dict(self) -> dict:
        p = self.params
        d = {
            "spec": self.spec.to_dict(),
            "params": {
                "surge": {"mu": p.regime[0].mu, "betas": list(p.regime[0].betas), "log_var": p.regime[0].log_var},
                "steady": {"mu": p.regime[1].mu, "betas": list(p.regime[1].betas), "log_var": p.regime[1].log_var},
                "alpha0": list(p.transition.alpha0),
            },
            "T": self.T,
            "regressors": {k: {"mean": v[0], "sd": v[1]} for k, v in self.regressor_generators.items()},
            "seed": self.seed,
            "start": str(self.start),
        }
        if p.transition.alpha1 is not None:
            d["params"]["alpha1"] = list(p.transition.alpha1)
        if self.initial_state is not None:
            d["initial_state"] = self.initial_state
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DGPConfig":
        spec = ModelSpec.from_dict(d["spec"])
        pr = d["params"]

        def regime(r):
            lv = r["log_var"] if "log_var" in r else math.log(r["variance"])
            return RegimeParams(float(r["mu"]), tuple(float(b) for b in r.get("betas", [])), float(lv))

        a1 = pr.get("alpha1")
        params = Params(
            (regime(pr["surge"]), regime(pr["steady"])),
            TransitionParams(tuple(float(a) for a in pr["alpha0"]), None if a1 is None else tuple(map(float, a1))),
        )
        gens = {k: (float(v["mean"]), float(v["sd"])) for k, v in d.get("regressors", {}).items()}
        return cls(spec, params, int(d["T"]), gens, int(d.get("seed", 0)), d.get("initial_state"),
                   Period.parse(d.get("start", str(DEFAULT_START))), d.get("dep_name", "dep"))

    @classmethod
    def load(cls, path) -> "DGPConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass(frozen=True)
class Simulation:
    dataset: Dataset
    states: np.ndarray  # 1 = surge, 2 = steady
    series: tuple  # raw Series: dependent first, then generated streams


def simulate_full(cfg: DGPConfig) -> Simulation:
    spec, p = cfg.spec, cfg.params
    rng = np.random.default_rng(cfg.seed)
    L = spec.max_lag
    streams = {}
    for name in cfg.stream_names():
        mean, sd = cfg.regressor_generators.get(name, (0.0, 1.0))
        streams[name] = mean + sd * rng.standard_normal(cfg.T + L)
    u = rng.random(cfg.T)
    eps = rng.standard_normal(cfg.T)

    def lagged(name, lag):
        return streams[name][L - lag:L - lag + cfg.T]

    X = np.column_stack([lagged(t.name, t.lag) for t in spec.regressors]) if spec.k else np.empty((cfg.T, 0))
    z = lagged(*spec.tp_covariate) if spec.tvtp else None

    def matrix(t):
        return transition_matrix_at(p.transition, None if z is None else float(z[t]))

    states = np.empty(cfg.T, dtype=int)
    if cfg.initial_state is not None:
        states[0] = cfg.initial_state
    else:
        pi1, _ = steady_state(matrix(0))
        states[0] = 1 if u[0] < pi1 else 2
    for t in range(1, cfg.T):
        tm = matrix(t)
        stay = tm.p11 if states[t - 1] == 1 else tm.p22
        states[t] = states[t - 1] if u[t] < stay else 3 - states[t - 1]

    dep = np.empty(cfg.T)
    for t in range(cfg.T):
        r = p.regime[states[t] - 1]
        mean = r.mu + (X[t] @ np.asarray(r.betas) if spec.k else 0.0)
        dep[t] = mean + math.sqrt(math.exp(r.log_var)) * eps[t]

    dep_series = Series(cfg.dep_name, cfg.start, dep)
    raw = {name: Series(name, cfg.start - L, vals) for name, vals in streams.items()}
    ds = align(
        dep_series,
        [(raw[t.name], t.lag) for t in spec.regressors],
        (raw[spec.tp_covariate.name], spec.tp_covariate.lag) if spec.tvtp else None,
        min_overlap=1,
    )
    return Simulation(ds, states, (dep_series, *raw.values()))


def simulate(cfg: DGPConfig) -> tuple[Dataset, np.ndarray]:
    """Draw one dataset and its true regime path (1 = surge, 2 = steady)."""
    sim = simulate_full(cfg)
    return sim.dataset, sim.states


def write_states_csv(path, periods, states) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["period", "state"])
        for p, s in zip(periods, states):
            w.writerow([str(p), int(s)])


# ---------------------------------------------------------------------------
# Monte Carlo recovery


@dataclass
class Replication:
    index: int
    seed: int
    status: str
    estimates: Optional[np.ndarray] = None
    std_errors: Optional[np.ndarray] = None
    loglik: float = math.nan
    accuracy: float = math.nan
    convergence: str = ""
    seconds: float = 0.0


@dataclass
class RecoveryReport:
    config: DGPConfig
    replications: list

    @property
    def truth(self) -> np.ndarray:
        return pack(self.config.params)

    @property
    def names(self) -> list[str]:
        return self.config.spec.param_names()

    def _ok(self):
        return [r for r in self.replications if r.status == "ok"]

    def estimates(self) -> np.ndarray:
        return np.array([r.estimates for r in self._ok()])

    def std_errors(self) -> np.ndarray:
        return np.array([r.std_errors for r in self._ok()])

    def coverage(self, z: float = 1.959963984540054) -> np.ndarray:
        """Share of replications whose 95% Wald interval covers the true value.

        A replication without a standard error for a parameter counts as a miss.
        """
        est, se = self.estimates(), self.std_errors()
        with np.errstate(invalid="ignore"):
            hit = np.abs(est - self.truth) <= z * se
        return np.where(np.isnan(se), False, hit).mean(axis=0)

    def accuracy(self) -> np.ndarray:
        return np.array([r.accuracy for r in self._ok()])

    def stay_probabilities(self) -> tuple[np.ndarray, np.ndarray]:
        """Estimated (p11, p22) per replication at the intercepts only (alpha1 ignored)."""
        from regimekit.model import logistic

        off = 2 * (2 + self.config.spec.k)
        est = self.estimates()
        return logistic(est[:, off]), logistic(est[:, off + 1])

    def summary_rows(self) -> list[dict]:
        est = self.estimates()
        truth = self.truth
        cov = self.coverage()
        rows = []
        for j, name in enumerate(self.names):
            err = est[:, j] - truth[j]
            rows.append({
                "parameter": name,
                "true": truth[j],
                "mean_estimate": float(est[:, j].mean()),
                "bias": float(err.mean()),
                "median_abs_bias": float(np.median(np.abs(err))),
                "rmse": float(np.sqrt(np.mean(err ** 2))),
                "coverage": float(cov[j]),
                "n": int(est.shape[0]),
            })
        from regimekit.model import logistic

        off = 2 * (2 + self.config.spec.k)
        p11, p22 = self.stay_probabilities()
        for name, vals, a in (("p11", p11, truth[off]), ("p22", p22, truth[off + 1])):
            t = float(logistic(a))
            err = vals - t
            rows.append({
                "parameter": name, "true": t, "mean_estimate": float(vals.mean()),
                "bias": float(err.mean()), "median_abs_bias": float(np.median(np.abs(err))),
                "rmse": float(np.sqrt(np.mean(err ** 2))), "coverage": "", "n": int(vals.size),
            })
        acc = self.accuracy()
        rows.append({
            "parameter": "classification_accuracy", "true": 1.0, "mean_estimate": float(acc.mean()),
            "bias": "", "median_abs_bias": float(np.median(acc)), "rmse": "", "coverage": "",
            "n": int(acc.size),
        })
        return rows

    def write_csv(self, path) -> None:
        cols = ["parameter", "true", "mean_estimate", "bias", "median_abs_bias", "rmse", "coverage", "n"]
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(cols)
            for row in self.summary_rows():
                w.writerow([repr(row[c]) if isinstance(row[c], float) else row[c] for c in cols])

    def write_replications_csv(self, path) -> None:
        names = self.names
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["replication", "seed", "status", "convergence", "loglik", "accuracy"]
                       + names + [f"se_{n}" for n in names])
            for r in self.replications:
                est = [""] * len(names) if r.estimates is None else [repr(float(v)) for v in r.estimates]
                se = [""] * len(names) if r.std_errors is None else [
                    "" if not np.isfinite(v) else repr(float(v)) for v in r.std_errors
                ]
                w.writerow([r.index, r.seed, r.status, r.convergence,
                            "" if not np.isfinite(r.loglik) else repr(r.loglik),
                            "" if not np.isfinite(r.accuracy) else repr(r.accuracy)] + est + se)


def _replicate(args) -> Replication:
    import time

    from regimekit.estimate import fit
    from regimekit.exceptions import RegimeKitError

    cfg, index, seed, fit_options = args
    t0 = time.perf_counter()
    try:
        ds, states = simulate(cfg.with_seed(seed))
        fr = fit(ds, cfg.spec, seed=seed, **fit_options)
    except (RegimeKitError, ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return Replication(index, seed, f"failed: {exc}", seconds=time.perf_counter() - t0)
    acc = float(np.mean(np.asarray(fr.classification.regimes) == states))
    return Replication(index, seed, "ok", fr.theta, fr.std_errors, fr.loglik, acc, fr.convergence,
                       time.perf_counter() - t0)


def run_recovery(cfg: DGPConfig, replications: int, seed: int = 0, jobs: int = 1, **fit_options) -> RecoveryReport:
    """Simulate and refit ``replications`` times; replication ``i`` uses seed ``seed + i``.

    A failed replication is recorded, never raised. Output does not depend on ``jobs``.
    """
    if replications < 1:
        raise ValueError("replications must be >= 1")
    tasks = [(cfg, i, seed + i, fit_options) for i in range(replications)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reps = list(pool.map(_replicate, tasks, chunksize=max(1, replications // (4 * jobs))))
    else:
        reps = [_replicate(t) for t in tasks]
    return RecoveryReport(cfg, sorted(reps, key=lambda r: r.index))
