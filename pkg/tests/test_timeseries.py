import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from regimekit.exceptions import AlignmentError, DegenerateRegressionError, DomainError, LoadError
from regimekit.timeseries import (
    Period,
    Series,
    adf_test,
    align,
    growth_rate,
    load_csv,
    summarize,
    write_csv,
)


def write(tmp_path, text):
    p = tmp_path / "data.csv"
    p.write_text(text, encoding="utf-8")
    return p


class TestPeriod:
    def test_successor_wraps_year(self):
        assert Period(1998, 4) + 1 == Period(1999, 1)

    def test_ordering(self):
        assert Period(1998, 4) < Period(1999, 1) < Period(1999, 2)
        assert Period(2000, 3) - Period(1999, 1) == 6

    @pytest.mark.parametrize("q", [0, 5])
    def test_invalid_quarter(self, q):
        with pytest.raises(ValueError, match="invalid quarter"):
            Period(2000, q)

    def test_parse_roundtrip(self):
        assert str(Period.parse("2023Q2")) == "2023Q2"


class TestLoadCsv:
    def test_three_rows(self, tmp_path):
        p = write(tmp_path, "period,pd\n1998Q1,1.0\n1998Q2,2.0\n1998Q3,3.5\n")
        (s,) = load_csv(p, "period", ["pd"])
        assert s.name == "pd"
        assert s.start == Period(1998, 1)
        assert list(s.values) == [1.0, 2.0, 3.5]

    def test_invalid_quarter(self, tmp_path):
        p = write(tmp_path, "period,pd\n1998Q4,1.0\n1998Q5,2.0\n")
        with pytest.raises(LoadError, match="invalid quarter"):
            load_csv(p, "period", ["pd"])

    def test_gap(self, tmp_path):
        p = write(tmp_path, "period,pd\n1998Q1,1.0\n1998Q3,2.0\n")
        with pytest.raises(LoadError, match="gap at 1998Q2"):
            load_csv(p, "period", ["pd"])

    def test_duplicate(self, tmp_path):
        p = write(tmp_path, "period,pd\n1998Q1,1.0\n1998Q1,2.0\n")
        with pytest.raises(LoadError, match="row 2.*duplicate"):
            load_csv(p, "period", ["pd"])

    def test_non_numeric_names_row_and_column(self, tmp_path):
        p = write(tmp_path, "period,pd,y\n1998Q1,1.0,2\n1998Q2,abc,3\n")
        with pytest.raises(LoadError, match="row 2, column 'pd'"):
            load_csv(p, "period", ["pd", "y"])

    def test_interior_blank_is_error(self, tmp_path):
        p = write(tmp_path, "period,pd\n1998Q1,1.0\n1998Q2,\n1998Q3,2.0\n")
        with pytest.raises(LoadError, match="missing"):
            load_csv(p, "period", ["pd"])

    def test_ragged_edges_trim_span(self, tmp_path):
        p = write(tmp_path, "period,pd,y\n1998Q1,,1\n1998Q2,2.0,2\n1998Q3,3.0,\n")
        pd_, y = load_csv(p, "period", ["pd", "y"])
        assert pd_.start == Period(1998, 2) and len(pd_) == 2
        assert y.start == Period(1998, 1) and len(y) == 2

    def test_all_columns_by_default(self, tmp_path):
        p = write(tmp_path, "period,a,b\n2000Q1,1,2\n")
        assert [s.name for s in load_csv(p)] == ["a", "b"]

    def test_write_then_load(self, tmp_path):
        a = Series("a", Period(2000, 1), [1.0, 2.0, 3.0])
        b = Series("b", Period(2000, 2), [0.1, 0.2])
        write_csv(tmp_path / "out.csv", [a, b])
        a2, b2 = load_csv(tmp_path / "out.csv")
        assert a2.start == a.start and np.array_equal(a2.values, a.values)
        assert b2.start == b.start and np.array_equal(b2.values, b.values)


class TestGrowthRate:
    def test_ten_percent_level_jump(self):
        g = growth_rate(Series("x", Period(2000, 1), [100, 110]))
        assert g.values[0] == pytest.approx(100 * math.log(1.1))
        assert round(g.values[0], 3) == 9.531
        assert g.start == Period(2000, 2)

    def test_constant(self):
        g = growth_rate(Series("x", Period(2000, 1), [5, 5, 5]))
        assert list(g.values) == [0.0, 0.0]

    def test_exp_inverse(self):
        g = growth_rate(Series("x", Period(2000, 1), [100, 100 * math.exp(0.02)]))
        assert g.values[0] == pytest.approx(2.0, abs=1e-12)

    def test_non_positive(self):
        with pytest.raises(DomainError):
            growth_rate(Series("x", Period(2000, 1), [1.0, 0.0, 2.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-20, 20), min_size=1, max_size=60), st.floats(0.1, 1e4))
    def test_inverts_cumulative_exponentiation(self, rates, base):
        levels = base * np.exp(np.concatenate([[0.0], np.cumsum(rates)]) / 100.0)
        g = growth_rate(Series("x", Period(2000, 1), levels))
        np.testing.assert_allclose(g.values, rates, atol=1e-10)


class TestSummarize:
    def test_two_points(self):
        s = summarize(Series("x", Period(2000, 1), [1, 3]))
        assert (s.mean, s.max, s.min, s.n_obs) == (2.0, 3.0, 1.0, 2)
        assert s.sd == pytest.approx(math.sqrt(2))

    def test_constant_sd_zero(self):
        assert summarize(Series("x", Period(2000, 1), [4, 4, 4])).sd == 0.0

    def test_too_short(self):
        with pytest.raises(ValueError):
            summarize(Series("x", Period(2000, 1), [1.0]))

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=50))
    def test_variance_matches_brute_force(self, xs):
        s = summarize(Series("x", Period(2000, 1), xs))
        mean = sum(xs) / len(xs)
        brute = sum((x - mean) ** 2 for x in xs) / (len(xs) - 1)
        assert s.sd ** 2 == pytest.approx(brute, rel=1e-12, abs=1e-12)
        assert s.min <= s.mean + 1e-9 and s.mean <= s.max + 1e-9


class TestAdf:
    def test_matches_statsmodels(self, rng):
        from statsmodels.tsa.stattools import adfuller

        for _ in range(5):
            x = np.cumsum(rng.normal(size=150)) * 0.5 + rng.normal(size=150)
            t, _ = adf_test(Series("x", Period(2000, 1), x), 4)
            ref = adfuller(x, maxlag=4, regression="c", autolag="AIC")[0]
            assert t == pytest.approx(ref, rel=1e-8)

    def test_offset_invariance(self, rng):
        x = np.cumsum(rng.normal(size=120))
        t1, _ = adf_test(Series("x", Period(2000, 1), x), 4)
        t2, _ = adf_test(Series("x", Period(2000, 1), x + 37.5), 4)
        assert t1 == pytest.approx(t2, abs=1e-8)

    def test_constant_series_is_degenerate(self):
        with pytest.raises(DegenerateRegressionError):
            adf_test(Series("x", Period(2000, 1), np.ones(50)), 2)

    def test_too_short(self):
        with pytest.raises(ValueError):
            adf_test(Series("x", Period(2000, 1), np.arange(12.0)), 4)

    def test_reject_level_brackets(self, rng):
        t, level = adf_test(Series("x", Period(2000, 1), rng.normal(size=200)), 4)
        assert t < -3.44 and level == "1%"


class TestAlign:
    def test_one_lag_drops_one_row(self):
        dep = Series("pd", Period(1998, 1), np.arange(102.0))
        y = Series("y", Period(1998, 1), np.arange(102.0) + 1000)
        ds = align(dep, [(y, 1)])
        assert ds.n_obs == 101
        assert ds.periods[0] == Period(1998, 2)
        # row t holds y at t-1
        assert ds.regressors[0][2][0] == 1000.0 and ds.dep[0] == 1.0

    def test_zero_lags_full_length(self):
        dep = Series("pd", Period(1998, 1), np.arange(40.0))
        ds = align(dep, [(Series("y", Period(1998, 1), np.arange(40.0)), 0)])
        assert ds.n_obs == 40

    def test_max_lag_rule(self):
        span = 60
        dep = Series("pd", Period(1998, 1), np.arange(span, dtype=float))
        x = Series("x", Period(1998, 1), np.arange(span, dtype=float) * 2)
        c = Series("c", Period(1998, 1), np.arange(span, dtype=float) * 3)
        ds = align(dep, [(x, 4)], (c, 2))
        # hand enumeration: first row needs x at t-4 -> t = 1999Q1 (index 4)
        assert ds.n_obs == span - 4
        assert ds.periods[0] == Period(1999, 1)
        assert ds.regressors[0][2][0] == x.values[0]
        assert ds.tp_covariate[2][0] == c.values[2]

    def test_insufficient_overlap_reports_first_period(self):
        dep = Series("pd", Period(2000, 1), np.arange(25.0))
        x = Series("x", Period(2000, 1), np.arange(25.0))
        with pytest.raises(AlignmentError, match="2001Q3"):
            align(dep, [(x, 6)])

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 5), st.integers(0, 5), st.integers(-3, 3), st.integers(-3, 3))
    def test_never_fabricates(self, l1, l2, o1, o2):
        rng = np.random.default_rng(l1 * 7 + l2)
        dep = Series("pd", Period(2000, 1), rng.normal(size=40))
        x = Series("x", Period(2000, 1) + o1, rng.normal(size=40))
        c = Series("c", Period(2000, 1) + o2, rng.normal(size=40))
        ds = align(dep, [(x, l1)], (c, l2))
        for t, p in enumerate(ds.periods):
            assert ds.dep[t] == dep.value_at(p)
            assert ds.regressors[0][2][t] == x.value_at(p - l1)
            assert ds.tp_covariate[2][t] == c.value_at(p - l2)
