import math

import numpy as np
import pytest
from scipy.stats import norm

from conftest import random_problem
from regimekit.exceptions import NonFiniteDensityError
from regimekit.filtering import (
    SmoothOutput,
    classify,
    durations,
    empirical_durations,
    enumerate_paths,
    loglikelihood,
    model_durations,
    smooth,
    write_probabilities_csv,
)
from regimekit.model import ModelSpec, TransitionMatrix, steady_state, swap_labels
from regimekit.timeseries import Dataset, Period


def run(ds, spec, theta, init="ergodic"):
    fo = loglikelihood(ds, spec, theta, init)
    return fo, smooth(fo, ds, spec, theta)


def periods(n):
    return [Period(2000, 1) + i for i in range(n)]


class TestOracle:
    @pytest.mark.parametrize("tvtp", [False, True])
    def test_t8_matches_enumeration(self, tvtp):
        rng = np.random.default_rng(8)
        ds, spec, theta = random_problem(rng, 8, k=2, tvtp=tvtp)
        fo, sm = run(ds, spec, theta)
        ll, post = enumerate_paths(ds, spec, theta)
        assert fo.loglik == pytest.approx(ll, abs=1e-10)
        np.testing.assert_allclose(sm.smoothed, post, atol=1e-10)

    def test_randomized_problems(self):
        rng = np.random.default_rng(2024)
        for i in range(50):
            n = int(rng.integers(1, 13))
            ds, spec, theta = random_problem(rng, n, k=int(rng.integers(0, 3)), tvtp=bool(i % 2))
            init = ("ergodic", "uniform", (0.3, 0.7))[i % 3]
            fo, sm = run(ds, spec, theta, init)
            ll, post = enumerate_paths(ds, spec, theta, init)
            assert abs(fo.loglik - ll) < 1e-9
            assert np.max(np.abs(sm.smoothed - post)) < 1e-10

    def test_matches_statsmodels_markov_regression(self, rng):
        from statsmodels.tsa.regime_switching.markov_regression import MarkovRegression

        spec = ModelSpec()
        y = np.concatenate([rng.normal(5, 1.1, 30), rng.normal(1, 0.7, 50), rng.normal(5, 1.1, 20)])
        ds = Dataset(y, [], None, periods(len(y)))
        theta = np.array([5.0, math.log(1.2), 1.0, math.log(0.5), 1.1, 2.8])
        fo = loglikelihood(ds, spec, theta)
        p11, p22 = 1 / (1 + math.exp(-1.1)), 1 / (1 + math.exp(-2.8))
        mod = MarkovRegression(y, k_regimes=2, switching_variance=True)
        ref = mod.loglike(np.array([p11, 1 - p22, 5.0, 1.0, 1.2, 0.5]))
        assert fo.loglik == pytest.approx(ref, abs=1e-8)


class TestStructure:
    def test_rows_are_probability_vectors(self):
        rng = np.random.default_rng(5)
        for i in range(20):
            ds, spec, theta = random_problem(rng, 60, k=1, tvtp=bool(i % 2))
            fo, sm = run(ds, spec, theta)
            for m in (fo.predicted, fo.filtered, sm.smoothed):
                assert np.all(m >= 0) and np.all(m <= 1)
                np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-12)
            assert fo.loglik == pytest.approx(fo.per_obs_loglik.sum(), abs=1e-12)
            # smoother boundary identity holds exactly
            assert np.array_equal(sm.smoothed[-1], fo.filtered[-1])

    def test_label_swap_symmetry(self):
        rng = np.random.default_rng(6)
        for i in range(20):
            ds, spec, theta = random_problem(rng, 40, k=2, tvtp=bool(i % 2))
            a = loglikelihood(ds, spec, theta).loglik
            b = loglikelihood(ds, spec, swap_labels(theta, spec)).loglik
            assert a == pytest.approx(b, abs=1e-10)

    def test_single_observation(self):
        rng = np.random.default_rng(1)
        ds, spec, theta = random_problem(rng, 1)
        fo, sm = run(ds, spec, theta)
        assert np.array_equal(sm.smoothed, fo.filtered)

    def test_absorbing_chain_reduces_to_single_regime(self):
        rng = np.random.default_rng(9)
        n = 50
        x = rng.normal(size=n)
        y = 2.0 + 0.5 * x + rng.normal(0, 1.3, n)
        ds = Dataset(y, [("x", 1, x)], None, periods(n))
        spec = ModelSpec([("x", 1)])
        theta = np.array([2.0, 0.5, math.log(1.69), -1.0, 0.2, math.log(0.4), 50.0, 50.0])
        fo = loglikelihood(ds, spec, theta, init=(1.0, 0.0))
        np.testing.assert_allclose(fo.filtered[:, 0], 1.0, atol=1e-12)
        oracle = norm.logpdf(y, 2.0 + 0.5 * x, 1.3).sum()
        assert fo.loglik == pytest.approx(oracle, abs=1e-6)

    def test_identical_regimes_carry_no_information(self):
        rng = np.random.default_rng(10)
        n = 30
        ds, spec, _ = random_problem(rng, n, k=1)
        theta = np.array([1.0, 0.3, 0.2, 1.0, 0.3, 0.2, 0.8, 2.1])
        fo, sm = run(ds, spec, theta)
        np.testing.assert_allclose(fo.filtered, fo.predicted, atol=1e-12)
        tm = TransitionMatrix(1 / (1 + math.exp(-0.8)), 1 / (1 + math.exp(-2.1)))
        pi = np.array(steady_state(tm))
        np.testing.assert_allclose(sm.smoothed, np.tile(pi, (n, 1)), atol=1e-10)

    def test_identical_regimes_tvtp_chain_marginals(self):
        rng = np.random.default_rng(11)
        n = 25
        ds, spec, _ = random_problem(rng, n, k=0, tvtp=True)
        theta = np.array([0.5, 0.1, 0.5, 0.1, 0.4, 1.5, 0.7, -0.6])
        fo, sm = run(ds, spec, theta)
        # unconditional chain marginals, propagated directly
        z = ds.z
        lg = lambda v: 1 / (1 + math.exp(-v))
        tm0 = TransitionMatrix(lg(0.4 + 0.7 * z[0]), lg(1.5 - 0.6 * z[0]))
        m = np.array(steady_state(tm0))
        marg = [m]
        for t in range(1, n):
            P = TransitionMatrix(lg(0.4 + 0.7 * z[t]), lg(1.5 - 0.6 * z[t])).as_array()
            m = m @ P
            marg.append(m)
        np.testing.assert_allclose(sm.smoothed, np.array(marg), atol=1e-10)

    def test_non_finite_density_reports_t(self):
        spec = ModelSpec()
        y = np.array([0.0, 0.1, 1e6, 0.2])
        ds = Dataset(y, [], None, periods(4))
        with pytest.raises(NonFiniteDensityError) as ei:
            loglikelihood(ds, spec, np.array([0.0, 0.0, 1.0, 0.0, 1.0, 1.0]))
        assert ei.value.t == 2

    def test_mismatched_columns(self):
        rng = np.random.default_rng(0)
        ds, _, theta = random_problem(rng, 10, k=1)
        with pytest.raises(ValueError):
            loglikelihood(ds, ModelSpec([("other", 1)]), theta)


class TestClassify:
    def test_threshold_rule(self):
        c = classify(np.array([0.9, 0.6, 0.4, 0.7]), periods(4))
        assert c.labels() == ["surge", "surge", "steady", "surge"]
        assert len(c.episodes) == 2

    def test_ties_go_to_steady(self):
        c = classify(np.full(5, 0.5), periods(5))
        assert set(c.labels()) == {"steady"} and c.episodes == ()

    def test_episode_format(self):
        ps = [Period(2006, 4) + i for i in range(17)]
        probs = np.zeros(17)
        probs[1:5] = 0.9   # 2007Q1-2007Q4
        probs[9:13] = 0.8  # 2009Q1-2009Q4
        c = classify(probs, ps)
        assert c.format_episodes() == "2007Q1-2007Q4, 2009Q1-2009Q4"

    def test_probabilities_csv(self, tmp_path):
        sm = SmoothOutput(np.array([[0.9, 0.1], [0.5, 0.5]]))
        write_probabilities_csv(tmp_path / "p.csv", periods(2), sm)
        lines = (tmp_path / "p.csv").read_text().splitlines()
        assert lines[0] == "period,p_surge,p_steady,regime_label"
        assert lines[1].startswith("2000Q1,0.9,0.1,surge")
        assert lines[2].endswith("steady")


class TestDurations:
    def test_geometric_mean(self):
        assert model_durations(TransitionMatrix(0.5, 0.5))[0] == 2.0

    def test_reported_durations(self):
        d1, d2 = model_durations(TransitionMatrix(0.7584, 0.9433))
        assert d1 == pytest.approx(4.139, abs=1e-3)
        # inversion: 17.625 quarters is p22 = 0.94326, which rounds to 0.9433
        assert round(1 - 1 / 17.625, 4) == 0.9433
        assert d2 == pytest.approx(1 / 0.0567, abs=1e-9)

    def test_empirical_counting(self):
        s, t = 1, 2
        assert empirical_durations([s, s, t, t, t, s])[0] == 1.5
        assert empirical_durations([s, s, t, t, t, s])[1] == 3.0

    def test_no_episodes_is_absent(self):
        assert empirical_durations([2, 2, 2]) == (None, 3.0)

    def test_combined(self):
        c = classify(np.array([0.9, 0.9, 0.1]), periods(3))
        implied, emp = durations(TransitionMatrix(0.5, 0.75), c)
        assert implied == (2.0, 4.0) and emp == (2.0, 1.0)
