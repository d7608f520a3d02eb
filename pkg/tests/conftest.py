import math

import numpy as np
import pytest
from scipy.special import logit

from regimekit.model import ModelSpec, Params, RegimeParams, TransitionParams
from regimekit.simulate import DGPConfig
from regimekit.timeseries import Dataset, Period

P11, P22 = 0.7584, 0.9433


def random_problem(rng, n, k=1, tvtp=False):
    """Small random dataset plus a random parameter vector of matching layout."""
    spec = ModelSpec(
        [(f"x{j}", 1) for j in range(k)],
        "tvtp" if tvtp else "ftp",
        ("c", 1) if tvtp else None,
    )
    X = rng.normal(size=(n, k))
    regs = [(f"x{j}", 1, X[:, j]) for j in range(k)]
    cov = ("c", 1, rng.normal(size=n)) if tvtp else None
    ds = Dataset(rng.normal(1.0, 2.0, size=n), regs, cov, [Period(2000, 1) + i for i in range(n)])
    theta = np.concatenate([
        [rng.normal(3, 1)], rng.normal(size=k), [rng.uniform(-1, 1)],
        [rng.normal(0, 1)], rng.normal(size=k), [rng.uniform(-1, 1)],
        rng.normal(1.0, 1.0, size=4 if tvtp else 2),
    ])
    return ds, spec, theta


def recovery_params(alpha1=None):
    a0 = (float(logit(P11)), float(logit(P22)))
    return Params(
        (RegimeParams(6.0, (), math.log(1.2)), RegimeParams(1.0, (), math.log(0.6))),
        TransitionParams(a0, alpha1),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ftp_dgp():
    return DGPConfig(ModelSpec(), recovery_params(), 400, seed=0)


@pytest.fixture
def ftp_dataset(ftp_dgp):
    from regimekit.simulate import simulate

    return simulate(ftp_dgp)
