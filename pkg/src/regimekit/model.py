"""Model specifications, parameter layout and transition probabilities.

Flat parameter vector layout::

    [mu1, beta1..., log_var1, mu2, beta2..., log_var2, a0_1, a0_2, (a1_1, a1_2)]

Regime 1 is the surge regime, regime 2 the steady regime. ``log_var`` is the
log of the residual variance, so ``exp(log_var)`` is the variance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.special import expit

from regimekit.exceptions import SpecError

FTP = "ftp"
TVTP = "tvtp"

LOG_VAR_BOUNDS = (-10.0, 10.0)
ALPHA_BOUNDS = (-50.0, 50.0)
# Logistic argument clip: keeps p11, p22 strictly inside (0, 1) in float64.
LOGIT_CLIP = 30.0


class Term(NamedTuple):
    name: str
    lag: int


@dataclass(frozen=True)
class ModelSpec:
    """Two-regime switching regression: shared regressor list, FTP or TVTP transitions."""

    regressors: tuple = ()
    transition_mode: str = FTP
    tp_covariate: Optional[Term] = None
    name: str = ""
    n_regimes: int = 2

    def __post_init__(self):
        regs = tuple(Term(str(n), int(l)) for n, l in self.regressors)
        mode = str(self.transition_mode).lower()
        cov = None if self.tp_covariate is None else Term(str(self.tp_covariate[0]), int(self.tp_covariate[1]))
        if mode not in (FTP, TVTP):
            raise SpecError(f"transition_mode must be 'ftp' or 'tvtp', got {self.transition_mode!r}")
        if mode == FTP and cov is not None:
            raise SpecError("covariate requires tvtp")
        if mode == TVTP and cov is None:
            raise SpecError("tvtp requires a transition covariate")
        names = [t.name for t in regs]
        if len(set(names)) != len(names):
            raise SpecError(f"regressor names must be unique, got {names}")
        if any(t.lag < 0 for t in regs) or (cov is not None and cov.lag < 0):
            raise SpecError("lags must be non-negative")
        if self.n_regimes != 2:
            raise SpecError("only two regimes are supported")
        object.__setattr__(self, "regressors", regs)
        object.__setattr__(self, "transition_mode", mode)
        object.__setattr__(self, "tp_covariate", cov)

    @property
    def k(self) -> int:
        return len(self.regressors)

    @property
    def tvtp(self) -> bool:
        return self.transition_mode == TVTP

    @property
    def n_params(self) -> int:
        return 2 * (2 + self.k) + (4 if self.tvtp else 2)

    @property
    def max_lag(self) -> int:
        lags = [t.lag for t in self.regressors]
        if self.tp_covariate is not None:
            lags.append(self.tp_covariate.lag)
        return max(lags, default=0)

    def replace(self, **changes) -> "ModelSpec":
        d = dict(
            regressors=self.regressors,
            transition_mode=self.transition_mode,
            tp_covariate=self.tp_covariate,
            name=self.name,
        )
        d.update(changes)
        return ModelSpec(**d)

    def with_regressor_lag(self, name: str, lag: int) -> "ModelSpec":
        """Set the lag of ``name``, appending it if absent."""
        regs = list(self.regressors)
        if name in self.names:
            regs[self.names.index(name)] = Term(name, lag)
        else:
            regs.append(Term(name, lag))
        return self.replace(regressors=regs)

    @property
    def names(self) -> list[str]:
        return [t.name for t in self.regressors]

    def param_names(self) -> list[str]:
        out = []
        for s in (1, 2):
            out.append(f"mu{s}")
            out += [f"{t.name}_L{t.lag}_{s}" for t in self.regressors]
            out.append(f"log_var{s}")
        out += ["alpha0_1", "alpha0_2"]
        if self.tvtp:
            out += ["alpha1_1", "alpha1_2"]
        return out

    def bounds(self) -> list[tuple[Optional[float], Optional[float]]]:
        regime = [(None, None)] * (1 + self.k) + [LOG_VAR_BOUNDS]
        return regime * 2 + [ALPHA_BOUNDS] * (4 if self.tvtp else 2)

    def to_dict(self) -> dict:
        d = {
            "regressors": [{"name": t.name, "lag": t.lag} for t in self.regressors],
            "transition_mode": self.transition_mode.upper(),
        }
        if self.tp_covariate is not None:
            d["tp_covariate"] = {"name": self.tp_covariate.name, "lag": self.tp_covariate.lag}
        if self.name:
            d["name"] = self.name
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ModelSpec":
        try:
            regs = [(r["name"], r["lag"]) for r in d.get("regressors", [])]
            cov = d.get("tp_covariate")
            cov = None if cov is None else (cov["name"], cov["lag"])
            mode = d.get("transition_mode", TVTP if cov is not None else FTP)
        except (KeyError, TypeError) as exc:
            raise SpecError(f"malformed model specification: {exc}") from None
        return cls(regs, mode, cov, d.get("name", ""))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid JSON: {exc}") from None

    @classmethod
    def load(cls, path) -> "ModelSpec":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class RegimeParams:
    mu: float
    betas: tuple = ()
    log_var: float = 0.0

    @property
    def variance(self) -> float:
        return float(np.exp(self.log_var))


@dataclass(frozen=True)
class TransitionParams:
    alpha0: tuple = (0.0, 0.0)
    alpha1: Optional[tuple] = None

    @property
    def tvtp(self) -> bool:
        return self.alpha1 is not None

    def swapped(self) -> "TransitionParams":
        a1 = None if self.alpha1 is None else (self.alpha1[1], self.alpha1[0])
        return TransitionParams((self.alpha0[1], self.alpha0[0]), a1)


@dataclass(frozen=True)
class Params:
    regime: tuple  # (surge, steady) RegimeParams
    transition: TransitionParams = field(default_factory=TransitionParams)

    def swapped(self) -> "Params":
        return Params((self.regime[1], self.regime[0]), self.transition.swapped())


class TransitionMatrix(NamedTuple):
    p11: float
    p22: float

    @property
    def p12(self) -> float:
        return 1.0 - self.p11

    @property
    def p21(self) -> float:
        return 1.0 - self.p22

    def as_array(self) -> np.ndarray:
        """Row-stochastic matrix, ``P[i, j] = P(s_t = j | s_{t-1} = i)``."""
        return np.array([[self.p11, self.p12], [self.p21, self.p22]])


def logistic(x):
    return expit(np.clip(x, -LOGIT_CLIP, LOGIT_CLIP))


def transition_matrix_at(tp: TransitionParams, z: Optional[float] = None) -> TransitionMatrix:
    """Evaluate the stay probabilities, at covariate value ``z`` in TVTP mode."""
    if tp.alpha1 is None:
        return TransitionMatrix(float(logistic(tp.alpha0[0])), float(logistic(tp.alpha0[1])))
    if z is None:
        raise SpecError("TVTP transition probabilities require a covariate value z")
    return TransitionMatrix(
        float(logistic(tp.alpha0[0] + tp.alpha1[0] * z)),
        float(logistic(tp.alpha0[1] + tp.alpha1[1] * z)),
    )


def stay_probabilities(spec: ModelSpec, theta: np.ndarray, z: Optional[np.ndarray], n: int):
    """Vectorized ``(p11, p22)`` arrays of length ``n`` for a flat vector."""
    off = 2 * (2 + spec.k)
    a0 = theta[off:off + 2]
    if spec.tvtp:
        if z is None:
            raise SpecError("TVTP model requires a transition covariate column")
        a1 = theta[off + 2:off + 4]
        return logistic(a0[0] + a1[0] * z), logistic(a0[1] + a1[1] * z)
    return np.full(n, logistic(a0[0])), np.full(n, logistic(a0[1]))


def steady_state(tm: TransitionMatrix) -> tuple[float, float]:
    """Ergodic distribution of a two-state chain."""
    denom = 2.0 - tm.p11 - tm.p22
    if denom <= 0.0:
        raise ValueError("steady state undefined for p11 + p22 = 2")
    pi1 = (1.0 - tm.p22) / denom
    return pi1, 1.0 - pi1


def pack(p: Params) -> np.ndarray:
    out = []
    for r in p.regime:
        out.append(r.mu)
        out.extend(r.betas)
        out.append(r.log_var)
    out.extend(p.transition.alpha0)
    if p.transition.alpha1 is not None:
        out.extend(p.transition.alpha1)
    return np.array(out, dtype=float)


def unpack(v: Sequence[float], spec: ModelSpec) -> Params:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != spec.n_params:
        raise SpecError(f"parameter vector has length {v.size}, expected {spec.n_params}")
    k = spec.k
    regimes = []
    for s in range(2):
        block = v[s * (2 + k):(s + 1) * (2 + k)]
        regimes.append(RegimeParams(float(block[0]), tuple(float(b) for b in block[1:1 + k]), float(block[-1])))
    off = 2 * (2 + k)
    a0 = (float(v[off]), float(v[off + 1]))
    a1 = (float(v[off + 2]), float(v[off + 3])) if spec.tvtp else None
    return Params(tuple(regimes), TransitionParams(a0, a1))


def swap_labels(theta: np.ndarray, spec: ModelSpec) -> np.ndarray:
    return pack(unpack(theta, spec).swapped())


def clip_to_bounds(theta: np.ndarray, spec: ModelSpec) -> np.ndarray:
    lo = np.array([-np.inf if b[0] is None else b[0] for b in spec.bounds()])
    hi = np.array([np.inf if b[1] is None else b[1] for b in spec.bounds()])
    return np.clip(theta, lo, hi)


_MODELS_DIR = Path(__file__).with_name("models")


def builtin_model(name: str) -> ModelSpec:
    """Load one of the shipped specifications ``m1`` .. ``m14``."""
    path = _MODELS_DIR / f"{name.lower()}.json"
    if not path.exists():
        raise SpecError(f"no built-in model named {name!r}")
    return ModelSpec.load(path)


def builtin_model_names() -> list[str]:
    return sorted((p.stem for p in _MODELS_DIR.glob("m*.json")), key=lambda s: int(s[1:]))
