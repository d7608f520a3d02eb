import json
import re

import pytest

from regimekit.cli import main
from regimekit.estimate import FitResult

DGP = {
    "spec": {
        "name": "M5",
        "regressors": [
            {"name": "y", "lag": 1}, {"name": "ca", "lag": 1}, {"name": "r", "lag": 1}, {"name": "oil", "lag": 2},
        ],
        "transition_mode": "FTP",
    },
    "params": {
        "surge": {"mu": 7.2, "betas": [-0.16, 0.05, -1.0, -0.016], "log_var": 0.191},
        "steady": {"mu": 2.7, "betas": [-0.28, -0.27, -0.15, 0.005], "log_var": -0.455},
        "alpha0": [1.1439, 2.8116],
    },
    "T": 101,
    "start": "1998Q2",
    "dep_name": "pd",
    "regressors": {
        "y": {"mean": 2.5, "sd": 2.7}, "ca": {"mean": 3.1, "sd": 2.7},
        "r": {"mean": 3.3, "sd": 1.2}, "oil": {"mean": 3.6, "sd": 20.3},
    },
    "seed": 11,
}

SMALL_DGP = {
    "spec": {"regressors": [], "transition_mode": "FTP"},
    "params": {"surge": {"mu": 6.0, "variance": 1.2}, "steady": {"mu": 1.0, "variance": 0.6},
               "alpha0": [1.1439, 2.8116]},
    "T": 150,
}


@pytest.fixture(autouse=True)
def no_env(monkeypatch):
    monkeypatch.delenv("REGIMEKIT_OUT", raising=False)


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("data")
    (d / "dgp.json").write_text(json.dumps(DGP))
    assert main(["simulate", "--dgp", str(d / "dgp.json"), "--out-dir", str(d)]) == 0
    return d


@pytest.fixture(scope="module")
def fitted(data, tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    code = main(["fit", "--csv", str(data / "simulated.csv"), "--spec", "M5", "--restarts", "6", "--out-dir", str(out)])
    return code, out


def test_simulate_writes_csv_and_states(data):
    header = (data / "simulated.csv").read_text().splitlines()[0]
    assert header == "period,pd,y,ca,r,oil"
    assert len((data / "states.csv").read_text().splitlines()) == 102


def test_describe_two_vars(data, tmp_path, capsys):
    assert main(["describe", "--csv", str(data / "simulated.csv"), "--vars", "pd,y", "--out-dir", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    lines = out.splitlines()
    assert re.split(r"\s+", lines[0].strip()) == ["Variable", "Mean", "SD", "Max", "Min", "ADF", "N"]
    assert lines[2].startswith("pd") and lines[3].startswith("y")
    assert len((tmp_path / "describe.csv").read_text().splitlines()) == 3


def test_describe_defaults_to_all_columns(data, tmp_path):
    assert main(["describe", "--csv", str(data / "simulated.csv"), "--out-dir", str(tmp_path)]) == 0
    assert len((tmp_path / "describe.csv").read_text().splitlines()) == 6


def test_describe_unknown_variable(data, tmp_path, capsys):
    assert main(["describe", "--csv", str(data / "simulated.csv"), "--vars", "nope", "--out-dir", str(tmp_path)]) == 2
    assert "nope" in capsys.readouterr().err


def test_fit_artifacts(fitted):
    code, out = fitted
    assert code in (0, 3)
    for name in ("fit.json", "table.md", "probs.csv", "probs.svg"):
        assert (out / name).exists()
    # 102 quarters of pd with a lag-2 regressor generated two quarters earlier: 101 rows
    assert len((out / "probs.csv").read_text().splitlines()) == 1 + 101
    md = (out / "table.md").read_text()
    assert "Number of observations" in md and "| 101" in md.replace("  ", " ")


def test_svg_self_contained(fitted):
    svg = (fitted[1] / "probs.svg").read_text()
    assert svg.startswith("<svg") and 'width="900" height="360"' in svg
    assert "href" not in svg and "url(" not in svg and "<script" not in svg
    assert "stroke-dasharray" in svg and "polyline" in svg


def test_fit_is_byte_identical(data, fitted, tmp_path):
    _, first = fitted
    main(["fit", "--csv", str(data / "simulated.csv"), "--spec", "M5", "--restarts", "6", "--out-dir", str(tmp_path)])
    for name in ("fit.json", "table.md", "probs.csv", "probs.svg"):
        assert (tmp_path / name).read_bytes() == (first / name).read_bytes()


def test_env_overrides_out_dir(data, tmp_path, monkeypatch):
    env_dir = tmp_path / "env"
    monkeypatch.setenv("REGIMEKIT_OUT", str(env_dir))
    main(["describe", "--csv", str(data / "simulated.csv"), "--out-dir", str(tmp_path / "flag")])
    assert (env_dir / "describe.csv").exists() and not (tmp_path / "flag" / "describe.csv").exists()


def test_mode_ftp_with_covariate(data, tmp_path, capsys):
    code = main(["fit", "--csv", str(data / "simulated.csv"), "--spec", "M9", "--mode", "ftp", "--out-dir", str(tmp_path)])
    assert code == 2
    assert "covariate requires tvtp" in capsys.readouterr().err


def test_spec_data_mismatch(data, tmp_path):
    assert main(["fit", "--csv", str(data / "simulated.csv"), "--spec", "M6", "--out-dir", str(tmp_path)]) == 2


def test_regimes(fitted, capsys):
    _, out = fitted
    capsys.readouterr()
    assert main(["regimes", "--fit", str(out / "fit.json")]) == 0
    text = capsys.readouterr().out
    fr = FitResult.from_json((out / "fit.json").read_text())
    assert f"Surge episodes: {fr.classification.format_episodes() or 'none'}" in text
    assert re.search(r"model-implied 1/\(1-p\): surge \d+\.\d{3} quarters", text)
    assert "empirical" in text


def test_regimes_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["regimes", "--fit", str(bad)]) == 2


def test_regimes_tvtp_note(tmp_path, capsys):
    dgp = {
        "spec": {"regressors": [], "transition_mode": "TVTP", "tp_covariate": {"name": "fin", "lag": 1}},
        "params": {"surge": {"mu": 6.0, "variance": 1.2}, "steady": {"mu": 1.0, "variance": 0.6},
                   "alpha0": [1.1439, 2.4], "alpha1": [0.0, 0.4]},
        "T": 150, "dep_name": "pd", "regressors": {"fin": {"mean": 1.0, "sd": 2.0}},
    }
    (tmp_path / "dgp.json").write_text(json.dumps(dgp))
    (tmp_path / "m.json").write_text(json.dumps(dgp["spec"]))
    main(["simulate", "--dgp", str(tmp_path / "dgp.json"), "--out-dir", str(tmp_path)])
    main(["fit", "--csv", str(tmp_path / "simulated.csv"), "--spec", str(tmp_path / "m.json"),
          "--restarts", "4", "--out-dir", str(tmp_path)])
    capsys.readouterr()
    assert main(["regimes", "--fit", str(tmp_path / "fit.json")]) == 0
    assert "time-varying: evaluated at covariate mean" in capsys.readouterr().out


class TestRecover:
    def test_zero_reps(self, tmp_path):
        (tmp_path / "dgp.json").write_text(json.dumps(SMALL_DGP))
        assert main(["recover", "--dgp", str(tmp_path / "dgp.json"), "--reps", "0", "--out-dir", str(tmp_path)]) == 2

    def test_deterministic_report(self, tmp_path):
        (tmp_path / "dgp.json").write_text(json.dumps(SMALL_DGP))
        for sub in ("a", "b"):
            assert main(["recover", "--dgp", str(tmp_path / "dgp.json"), "--reps", "4", "--seed", "7",
                         "--restarts", "4", "--out-dir", str(tmp_path / sub)]) == 0
        for name in ("recovery.csv", "replications.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        assert "coverage" in (tmp_path / "a" / "recovery.csv").read_text().splitlines()[0]


def test_lagsearch(data, tmp_path, capsys):
    code = main(["lagsearch", "--csv", str(data / "simulated.csv"), "--spec", "M1", "--var", "y",
                 "--rule", "aic", "--max-lag", "2", "--restarts", "3", "--out-dir", str(tmp_path)])
    assert code == 0
    assert re.search(r"y: chosen lag [12]", capsys.readouterr().out)
    assert (tmp_path / "candidates.csv").read_text().startswith("lag,regime,loglik,aic")


def test_unknown_builtin_model(data, tmp_path):
    assert main(["fit", "--csv", str(data / "simulated.csv"), "--spec", "M99", "--out-dir", str(tmp_path)]) == 2
