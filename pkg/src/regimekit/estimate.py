"""Maximum-likelihood fitting of two-regime switching regressions.

The log-likelihood from the Hamilton filter is maximized over the bounded
flat parameter vector with L-BFGS-B from several starting points. The best
local optimum is refined with a few safeguarded Newton steps on a
central-difference Hessian, then relabeled so that regime 1 (surge) has the
larger intercept.
"""

from __future__ import annotations

import json
import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.optimize import minimize

from regimekit import __version__
from regimekit.exceptions import EstimationError, NonFiniteDensityError, SpecError
from regimekit.filtering import (
    Classification,
    FilterOutput,
    SmoothOutput,
    classify,
    empirical_durations,
    loglik_vector,
    loglikelihood,
    model_durations,
    smooth,
)
from regimekit.model import (
    ModelSpec,
    Params,
    TransitionMatrix,
    clip_to_bounds,
    pack,
    swap_labels,
    transition_matrix_at,
    unpack,
)
from regimekit.timeseries import Dataset, Period

logger = logging.getLogger(__name__)

Z_STARS = ((2.576, "***"), (1.960, "**"), (1.645, "*"))
STARVED_MASS = 3.0
_PENALTY = 1e12


def aic(loglik: float, n_params: int, n_obs: int) -> float:
    """Per-observation Akaike criterion ``(-2 LL + 2 k) / n``."""
    return (-2.0 * loglik + 2.0 * n_params) / n_obs


def stars(coef: float, se: Optional[float]) -> str:
    """Significance marker from a two-sided normal test on ``coef / se``.

    Returns ``""`` when the standard error is absent or non-positive.
    """
    if se is None or not np.isfinite(se) or se <= 0:
        return ""
    z = abs(coef / se)
    for cut, mark in Z_STARS:
        if z > cut:
            return mark
    return ""


# ---------------------------------------------------------------------------
# numerical derivatives


def _steps(theta: np.ndarray, rel: float) -> np.ndarray:
    return np.maximum(rel, rel * np.abs(theta))


def numerical_gradient(f: Callable, theta: np.ndarray, rel: float = 1e-6) -> np.ndarray:
    h = _steps(theta, rel)
    g = np.empty_like(theta)
    for i in range(theta.size):
        e = np.zeros_like(theta)
        e[i] = h[i]
        g[i] = (f(theta + e) - f(theta - e)) / (2 * h[i])
    return g


def numerical_hessian(f: Callable, theta: np.ndarray, rel: float = 1e-4) -> np.ndarray:
    """Central-difference Hessian with steps ``max(rel, rel * |theta_i|)``."""
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    h = _steps(theta, rel)
    f0 = f(theta)
    H = np.empty((n, n))
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h[i]
        H[i, i] = (f(theta + ei) - 2 * f0 + f(theta - ei)) / h[i] ** 2
        for j in range(i + 1, n):
            ej = np.zeros(n)
            ej[j] = h[j]
            H[i, j] = H[j, i] = (
                f(theta + ei + ej) - f(theta + ei - ej) - f(theta - ei + ej) + f(theta - ei - ej)
            ) / (4 * h[i] * h[j])
    return H


def hessian_standard_errors(H: np.ndarray) -> tuple[np.ndarray, bool]:
    """Square roots of the inverse-Hessian diagonal; NaN where undefined.

    The second return value is False when the Hessian could not be inverted.
    """
    n = H.shape[0]
    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        return np.full(n, np.nan), False
    if not np.all(np.isfinite(cov)):
        return np.full(n, np.nan), False
    d = np.diag(cov)
    with np.errstate(invalid="ignore"):
        se = np.where(d > 0, np.sqrt(np.where(d > 0, d, 1.0)), np.nan)
    return se, True


# ---------------------------------------------------------------------------
# objective over free coordinates


class _Objective:
    """Negative log-likelihood of the free coordinates, picklable for worker pools."""

    def __init__(self, ds: Dataset, spec: ModelSpec, fixed: Mapping[int, float], init):
        self.ds = ds
        self.spec = spec
        self.init = init
        self.fixed_idx = np.array(sorted(fixed), dtype=int)
        self.fixed_val = np.array([fixed[i] for i in sorted(fixed)], dtype=float)
        self.free_idx = np.array([i for i in range(spec.n_params) if i not in fixed], dtype=int)
        b = spec.bounds()
        self.bounds = [b[i] for i in self.free_idx]

    def full(self, x: np.ndarray) -> np.ndarray:
        theta = np.empty(self.spec.n_params)
        theta[self.free_idx] = x
        theta[self.fixed_idx] = self.fixed_val
        return theta

    def __call__(self, x: np.ndarray) -> float:
        val = -loglik_vector(self.full(x), self.ds, self.spec, self.init)
        return val if math.isfinite(val) else _PENALTY

    def at_bound(self, x: np.ndarray, atol: float = 1e-8) -> np.ndarray:
        out = np.zeros(x.size, dtype=bool)
        for i, (lo, hi) in enumerate(self.bounds):
            if lo is not None and x[i] <= lo + atol:
                out[i] = True
            if hi is not None and x[i] >= hi - atol:
                out[i] = True
        return out


def _resolve_fixed(fixed, spec: ModelSpec) -> dict[int, float]:
    if not fixed:
        return {}
    names = spec.param_names()
    out = {}
    for key, val in dict(fixed).items():
        if isinstance(key, str):
            if key not in names:
                raise SpecError(f"unknown parameter {key!r}; expected one of {names}")
            key = names.index(key)
        out[int(key)] = float(val)
    return out


# ---------------------------------------------------------------------------
# starting values


def _two_means_split(u: np.ndarray, iters: int = 100) -> tuple[np.ndarray, np.ndarray]:
    # Median split refined by 1-D two-means; unbalanced regimes pull the
    # plain median far from the smaller regime's centre.
    cut = np.median(u)
    for _ in range(iters):
        hi, lo = u[u > cut], u[u <= cut]
        if hi.size < 2 or lo.size < 2:
            break
        new = 0.5 * (hi.mean() + lo.mean())
        if new == cut:
            break
        cut = new
    else:
        cut = np.median(u)
    hi, lo = u[u > cut], u[u <= cut]
    if hi.size >= 2 and lo.size >= 2:
        return hi, lo
    med = np.median(u)
    hi, lo = u[u > med], u[u <= med]
    return (hi if hi.size >= 2 else u), (lo if lo.size >= 2 else u)


def initial_points(ds: Dataset, spec: ModelSpec, seed: int = 0, count: int = 20) -> list[np.ndarray]:
    """Data-driven starting vector followed by ``count - 1`` seeded jitters.

    Slopes come from full-sample least squares. The slope-adjusted dependent
    variable is split in two, starting at its median and refined by two-means
    iterations; each part supplies one regime's intercept and log variance,
    the upper part becoming regime 1.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    y = ds.dep
    X = ds.X
    k = spec.k
    beta = np.zeros(k)
    if k:
        A = np.column_stack([np.ones(ds.n_obs), X])
        beta = np.linalg.lstsq(A, y, rcond=None)[0][1:]
    u = y - X @ beta if k else y.copy()
    hi, lo = _two_means_split(u)

    def block(part):
        v = max(np.var(part, ddof=1) if part.size > 1 else 1.0, 1e-4)
        return [float(part.mean()), *beta, math.log(v)]

    first = block(hi) + block(lo) + [2.0, 2.0] + ([0.0, 0.0] if spec.tvtp else [])
    first = clip_to_bounds(np.array(first), spec)
    rng = np.random.default_rng(seed)
    pts = [first]
    for _ in range(count - 1):
        pts.append(clip_to_bounds(first + rng.normal(scale=0.5, size=first.size), spec))
    return pts


# ---------------------------------------------------------------------------
# results


@dataclass
class FitResult:
    spec: ModelSpec
    params: Params
    std_errors: np.ndarray  # flat layout, NaN where absent
    loglik: float
    aic: float
    n_obs: int
    n_params: int
    filter: FilterOutput
    smoothed: SmoothOutput
    classification: Classification
    durations_model: Optional[tuple]
    durations_empirical: Optional[tuple]
    duration_note: str = ""
    convergence: str = "converged"
    warnings: list = field(default_factory=list)
    restarts: list = field(default_factory=list)
    gradient_max: float = math.nan
    fixed: dict = field(default_factory=dict)
    dep_name: str = "dep"
    dep: Optional[np.ndarray] = None

    @property
    def theta(self) -> np.ndarray:
        return pack(self.params)

    @property
    def periods(self) -> tuple:
        return self.classification.periods

    @property
    def episodes(self) -> tuple:
        return self.classification.episodes

    def std_error_params(self) -> Params:
        """Standard errors in the structured layout (NaN where absent)."""
        return unpack(self.std_errors, self.spec)

    def coefficient_table(self) -> list[tuple]:
        """Rows of ``(name, estimate, se, stars)`` in flat-vector order."""
        rows = []
        for name, c, s in zip(self.spec.param_names(), self.theta, self.std_errors):
            se = None if not np.isfinite(s) else float(s)
            rows.append((name, float(c), se, stars(c, se)))
        return rows

    # serialization -------------------------------------------------------

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not np.isfinite(x) else float(x)

        return {
            "version": __version__,
            "spec": self.spec.to_dict(),
            "param_names": self.spec.param_names(),
            "params": [float(v) for v in self.theta],
            "std_errors": [num(v) for v in self.std_errors],
            "loglik": float(self.loglik),
            "aic": float(self.aic),
            "n_obs": int(self.n_obs),
            "n_params": int(self.n_params),
            "dep_name": self.dep_name,
            "dep": None if self.dep is None else [float(v) for v in self.dep],
            "periods": [str(p) for p in self.periods],
            "predicted": self.filter.predicted.tolist(),
            "filtered": self.filter.filtered.tolist(),
            "per_obs_loglik": self.filter.per_obs_loglik.tolist(),
            "smoothed": self.smoothed.smoothed.tolist(),
            "regimes": list(self.classification.regimes),
            "episodes": [[str(a), str(b)] for a, b in self.episodes],
            "durations_model": None if self.durations_model is None else [num(v) for v in self.durations_model],
            "durations_empirical": None
            if self.durations_empirical is None
            else [num(v) for v in self.durations_empirical],
            "duration_note": self.duration_note,
            "convergence": self.convergence,
            "warnings": list(self.warnings),
            "gradient_max": num(self.gradient_max),
            "fixed": {str(k): float(v) for k, v in self.fixed.items()},
            "restarts": self.restarts,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        spec = ModelSpec.from_dict(d["spec"])
        theta = np.array(d["params"], dtype=float)
        se = np.array([np.nan if v is None else v for v in d["std_errors"]], dtype=float)
        if theta.size != spec.n_params or se.size != spec.n_params:
            raise SpecError("parameter vector length does not match the stored model")
        periods = tuple(Period.parse(p) for p in d["periods"])
        smoothed = np.array(d["smoothed"], dtype=float)
        if smoothed.shape != (len(periods), 2):
            raise SpecError("smoothed probabilities do not match the stored periods")
        cls_ = classify(smoothed[:, 0], periods)

        def tup(v):
            return None if v is None else tuple(None if x is None else float(x) for x in v)

        return cls(
            spec=spec,
            params=unpack(theta, spec),
            std_errors=se,
            loglik=float(d["loglik"]),
            aic=float(d["aic"]),
            n_obs=int(d["n_obs"]),
            n_params=int(d["n_params"]),
            filter=FilterOutput(
                float(d["loglik"]),
                np.array(d["predicted"], dtype=float),
                np.array(d["filtered"], dtype=float),
                np.array(d["per_obs_loglik"], dtype=float),
            ),
            smoothed=SmoothOutput(smoothed),
            classification=cls_,
            durations_model=tup(d.get("durations_model")),
            durations_empirical=tup(d.get("durations_empirical")),
            duration_note=d.get("duration_note", ""),
            convergence=d.get("convergence", "converged"),
            warnings=list(d.get("warnings", [])),
            restarts=list(d.get("restarts", [])),
            gradient_max=math.nan if d.get("gradient_max") is None else float(d["gradient_max"]),
            fixed={int(k): float(v) for k, v in d.get("fixed", {}).items()},
            dep_name=d.get("dep_name", "dep"),
            dep=None if d.get("dep") is None else np.array(d["dep"], dtype=float),
        )

    @classmethod
    def from_json(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))

    def to_markdown(self, title: Optional[str] = None) -> str:
        return format_table([self], [title or self.spec.name or "Model"])


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _cell(c: float, se: Optional[float]) -> str:
    if se is None or not np.isfinite(se):
        return f"{_fmt(c)} (n/a)"
    return f"{_fmt(c)}{stars(c, se)} ({_fmt(se)})"


def format_table(fits: Sequence[FitResult], titles: Sequence[str]) -> str:
    """Markdown table in the layout of a regime-switching results table.

    One column per fit; coefficient cells read ``estimate<stars> (se)``.
    The ``log(sigma^s)`` rows hold the log-variance parameter and the
    ``sigma^2 s`` rows its exponential, the residual variance.
    """
    row_keys: list[tuple[str, str]] = []
    cells: list[dict] = []
    for fr in fits:
        spec = fr.spec
        c: dict = {}
        th, se = fr.theta, fr.std_errors
        k = spec.k
        for s in (0, 1):
            off = s * (2 + k)
            c[("mu", s)] = _cell(th[off], se[off])
            c[("logvar", s)] = _cell(th[off + 1 + k], se[off + 1 + k])
            c[("var", s)] = _fmt(math.exp(th[off + 1 + k]))
            for j, t in enumerate(spec.regressors):
                c[(f"{t.name}_{{t-{t.lag}}}" if t.lag else f"{t.name}_{{t}}", s)] = _cell(
                    th[off + 1 + j], se[off + 1 + j]
                )
        off = 2 * (2 + k)
        c[("alpha0", 0)] = _cell(th[off], se[off])
        c[("alpha0", 1)] = _cell(th[off + 1], se[off + 1])
        if spec.tvtp:
            c[("alpha1", 0)] = _cell(th[off + 2], se[off + 2])
            c[("alpha1", 1)] = _cell(th[off + 3], se[off + 3])
            c[("fin", -1)] = f"{spec.tp_covariate.name}_{{t-{spec.tp_covariate.lag}}}"
        cells.append(c)

    reg_names: list[str] = []
    for c in cells:
        for key, s in c:
            if key not in ("mu", "logvar", "var", "alpha0", "alpha1", "fin") and key not in reg_names:
                reg_names.append(key)

    lines = ["| | " + " | ".join(titles) + " |", "|---|" + "---|" * len(titles)]

    def row(label, key):
        vals = [c.get(key, "") for c in cells]
        if any(vals):
            lines.append(f"| {label} | " + " | ".join(vals) + " |")

    row("fin_{t-l0}", ("fin", -1))
    for s, header in ((0, "*Surge regime*"), (1, "*Steady regime*")):
        lines.append(f"| {header} |" + " |" * len(titles))
        row(f"mu^{s + 1}", ("mu", s))
        row(f"log(sigma^{s + 1})", ("logvar", s))
        row(f"sigma^2 {s + 1} = exp(log)", ("var", s))
        for r in reg_names:
            row(f"{r}^{s + 1}", (r, s))
    lines.append("| *Transition probability* |" + " |" * len(titles))
    row("alpha_0^1", ("alpha0", 0))
    row("alpha_1^1", ("alpha1", 0))
    row("alpha_0^2", ("alpha0", 1))
    row("alpha_1^2", ("alpha1", 1))
    lines.append("| AIC | " + " | ".join(_fmt(f.aic) for f in fits) + " |")
    lines.append("| Loglikelihood | " + " | ".join(_fmt(f.loglik) for f in fits) + " |")
    lines.append("| Number of observations | " + " | ".join(str(f.n_obs) for f in fits) + " |")
    lines.append("")
    lines.append("Standard errors in parentheses. *, ** and *** mark significance at 10%, 5% and 1%.")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# estimation


def normalize_labels(theta: np.ndarray, spec: ModelSpec) -> np.ndarray:
    """Swap regimes (and their transition parameters) so that ``mu1 >= mu2``."""
    p = unpack(theta, spec)
    if p.regime[0].mu < p.regime[1].mu:
        return swap_labels(theta, spec)
    return np.array(theta, dtype=float)


def _local_fit(obj: _Objective, x0: np.ndarray, tol: float, max_iter: int):
    x0 = np.asarray(x0, dtype=float)
    f0 = obj(x0)
    if not math.isfinite(f0) or f0 >= _PENALTY:
        return x0, math.inf, "failed", 0
    res = minimize(
        obj,
        x0,
        jac=lambda x: numerical_gradient(obj, x),
        method="L-BFGS-B",
        bounds=obj.bounds,
        options={"maxiter": max_iter, "ftol": tol, "gtol": 1e-7, "maxcor": 20},
    )
    fx = float(res.fun)
    if not math.isfinite(fx) or fx >= _PENALTY:
        return res.x, math.inf, "failed", int(res.nit)
    status = "converged" if res.success else ("max_iter" if res.nit >= max_iter else "failed")
    return res.x, fx, status, int(res.nit)


def _restart_task(args):
    obj, i, x0, tol, max_iter = args
    x, fx, status, nit = _local_fit(obj, x0, tol, max_iter)
    return i, x, fx, status, nit


def _newton_polish(obj: _Objective, x: np.ndarray, iters: int = 20) -> np.ndarray:
    """Safeguarded Newton refinement on interior coordinates."""
    fx = obj(x)
    for _ in range(iters):
        free = ~obj.at_bound(x)
        if not free.any():
            break
        sub = np.flatnonzero(free)

        def fsub(v, x=x):
            full = x.copy()
            full[sub] = v
            return obj(full)

        g = numerical_gradient(fsub, x[sub], rel=1e-6)
        if np.max(np.abs(g)) < 1e-9:
            break
        H = numerical_hessian(fsub, x[sub], rel=1e-5)
        try:
            np.linalg.cholesky(H)
            step = np.linalg.solve(H, g)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        improved = False
        while t > 1e-6:
            cand = x.copy()
            cand[sub] = x[sub] - t * step
            cand = np.clip(cand, [b[0] if b[0] is not None else -np.inf for b in obj.bounds],
                           [b[1] if b[1] is not None else np.inf for b in obj.bounds])
            fc = obj(cand)
            if fc <= fx:
                improved = fc < fx or np.allclose(cand, x)
                x, fx = cand, fc
                break
            t *= 0.5
        if not improved:
            break
    return x


def standard_errors(
    ds: Dataset,
    spec: ModelSpec,
    p_hat: Union[Params, np.ndarray],
    fixed=None,
    init="ergodic",
) -> tuple[np.ndarray, list[str]]:
    """Inverse-Hessian standard errors of the negative log-likelihood.

    Returns the flat SE vector (NaN for fixed or undefined entries) and a
    list of warning tags.
    """
    theta = pack(p_hat) if isinstance(p_hat, Params) else np.asarray(p_hat, dtype=float)
    fx = _resolve_fixed(fixed, spec)
    fx = {i: theta[i] for i in fx}
    obj = _Objective(ds, spec, fx, init)
    x = theta[obj.free_idx]
    H = numerical_hessian(obj, x)
    se_free, ok = hessian_standard_errors(H)
    se = np.full(spec.n_params, np.nan)
    se[obj.free_idx] = se_free
    tags = []
    if not ok:
        tags.append("hessian_not_invertible")
    elif np.isnan(se_free).any():
        tags.append("standard_errors_absent")
    return se, tags


def _durations(spec: ModelSpec, theta: np.ndarray, ds: Dataset, classification: Classification):
    p = unpack(theta, spec)
    note = ""
    if spec.tvtp:
        zbar = float(np.mean(ds.z))
        tm = transition_matrix_at(p.transition, zbar)
        note = f"time-varying: evaluated at covariate mean ({zbar:.3f})"
    else:
        tm = transition_matrix_at(p.transition)
    return model_durations(tm), empirical_durations(classification.regimes), note


def fit(
    ds: Dataset,
    spec: ModelSpec,
    restarts: int = 20,
    seed: int = 0,
    tol: float = 1e-10,
    max_iter: int = 1000,
    jobs: int = 1,
    init="ergodic",
    fixed=None,
    extra_starts: Sequence[np.ndarray] = (),
    compute_se: bool = True,
    polish: bool = True,
) -> FitResult:
    """Multi-start maximum likelihood.

    Parameters
    ----------
    restarts : int
        Number of generated starting points (the data-driven point plus
        jittered copies); ``extra_starts`` are tried in addition.
    fixed : mapping, optional
        Parameter name or flat index -> value held fixed during the search.
    jobs : int
        Worker processes for the restarts. Results do not depend on it.

    Raises
    ------
    EstimationError
        If no restart yields a finite log-likelihood.
    """
    if ds.regressor_names != spec.names:
        raise SpecError(f"dataset regressors {ds.regressor_names} do not match model {spec.names}")
    if spec.tvtp and ds.z is None:
        raise SpecError("TVTP model needs a dataset with a transition covariate")
    if ds.n_obs <= spec.n_params + 10:
        raise SpecError(f"need more than {spec.n_params + 10} observations, have {ds.n_obs}")
    fixed_map = _resolve_fixed(fixed, spec)
    obj = _Objective(ds, spec, fixed_map, init)

    starts = initial_points(ds, spec, seed, max(restarts, 1)) + [np.asarray(s, float) for s in extra_starts]
    tasks = [(obj, i, s[obj.free_idx], tol, max_iter) for i, s in enumerate(starts)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_restart_task, tasks))
    else:
        results = [_restart_task(t) for t in tasks]

    diagnostics = [
        {"restart": i, "loglik": (-fx if math.isfinite(fx) else None), "status": st, "iterations": nit}
        for i, _, fx, st, nit in results
    ]
    finite = [r for r in results if math.isfinite(r[2])]
    if not finite:
        raise EstimationError("all restarts failed to produce a finite log-likelihood", diagnostics)
    best = min(finite, key=lambda r: (r[2], r[0]))
    x = best[1]
    if polish:
        x = _newton_polish(obj, x)

    raw = obj.full(x)
    theta = normalize_labels(raw, spec)
    if fixed_map and not np.array_equal(theta, raw):
        perm = swap_labels(np.arange(spec.n_params, dtype=float), spec).astype(int)
        fixed_map = {int(np.flatnonzero(perm == j)[0]): v for j, v in fixed_map.items()}
    fixed_norm = {i: theta[i] for i in fixed_map}
    obj = _Objective(ds, spec, fixed_norm, init)
    x = theta[obj.free_idx]

    fo = loglikelihood(ds, spec, theta, init=init)
    sm = smooth(fo, ds, spec, theta)
    cls_ = classify(sm, ds.periods)
    dm, de, note = _durations(spec, theta, ds, cls_)

    tags: list[str] = []
    g = numerical_gradient(obj, x)
    interior = ~obj.at_bound(x)
    gmax = float(np.max(np.abs(g[interior]))) if interior.any() else 0.0
    if gmax < 1e-3 * (1 + abs(fo.loglik)):
        status = "converged"
    else:
        status = "max_iter" if best[3] == "max_iter" else "failed"
        tags.append("gradient_not_small")
    if obj.at_bound(x).any():
        tags.append("parameter_at_bound")

    if compute_se:
        se, se_tags = standard_errors(ds, spec, theta, fixed=fixed_norm, init=init)
        tags += se_tags
    else:
        se = np.full(spec.n_params, np.nan)
    mass = sm.smoothed.sum(axis=0)
    if mass.min() < STARVED_MASS:
        tags.append("regime_starved")
    for t in tags:
        logger.info("fit %s: %s", spec.name or "model", t)

    return FitResult(
        spec=spec,
        params=unpack(theta, spec),
        std_errors=se,
        loglik=fo.loglik,
        aic=aic(fo.loglik, spec.n_params, ds.n_obs),
        n_obs=ds.n_obs,
        n_params=spec.n_params,
        filter=fo,
        smoothed=sm,
        classification=cls_,
        durations_model=dm,
        durations_empirical=de,
        duration_note=note,
        convergence=status,
        warnings=tags,
        restarts=diagnostics,
        gradient_max=gmax,
        fixed=fixed_norm,
        dep_name=ds.dep_name,
        dep=np.array(ds.dep),
    )
