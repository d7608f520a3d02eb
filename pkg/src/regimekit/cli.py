"""Command-line front end: ``regimekit <command> ...``.

Exit codes: 0 success, 2 usage or validation error, 3 fitted with warnings,
4 estimation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from regimekit import __version__
from regimekit.estimate import FitResult, fit
from regimekit.exceptions import EstimationError, RegimeKitError
from regimekit.filtering import write_probabilities_csv
from regimekit.model import FTP, TVTP, ModelSpec, builtin_model
from regimekit.report import describe_table, probabilities_svg
from regimekit.selection import DatasetBuilder, aic_lag_search, min_significant_lag
from regimekit.simulate import DGPConfig, run_recovery, simulate_full, write_states_csv
from regimekit.timeseries import growth_rate, load_csv, summarize, write_csv

EXIT_OK, EXIT_USAGE, EXIT_WARN, EXIT_FAIL = 0, 2, 3, 4

logger = logging.getLogger("regimekit")


class UsageError(Exception):
    pass


def _out_dir(args) -> Path:
    out = Path(os.environ.get("REGIMEKIT_OUT") or args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _csv_list(s):
    return [v.strip() for v in s.split(",") if v.strip()] if s else []


def _load_series(args, needed=None):
    series = load_csv(args.csv, args.date_column, needed)
    growth = set(_csv_list(getattr(args, "growth", "")))
    unknown = growth - {s.name for s in series}
    if unknown:
        raise UsageError(f"--growth names unknown column(s): {', '.join(sorted(unknown))}")
    return [growth_rate(s) if s.name in growth else s for s in series]


def _load_spec(args) -> ModelSpec:
    src = args.spec
    spec = ModelSpec.load(src) if Path(src).exists() else builtin_model(src)
    if args.mode:
        mode = args.mode.lower()
        if mode == FTP and spec.tp_covariate is not None:
            raise UsageError("covariate requires tvtp")
        if mode == TVTP and spec.tp_covariate is None:
            raise UsageError("tvtp requires a tp_covariate in the model file")
        spec = spec.replace(transition_mode=mode)
    return spec


def _needed(spec: ModelSpec, dep: str) -> list[str]:
    names = [dep] + spec.names
    if spec.tp_covariate is not None:
        names.append(spec.tp_covariate.name)
    return list(dict.fromkeys(names))


def _header(path, date_column):
    with open(path, newline="", encoding="utf-8") as fh:
        return [h.strip() for h in next(csv.reader(fh))]


def _check_columns(args, names):
    header = _header(args.csv, args.date_column)
    missing = [n for n in names if n not in header]
    if missing:
        raise UsageError(f"unknown variable(s): {', '.join(missing)}")


# ---------------------------------------------------------------------------
# commands


def cmd_describe(args) -> int:
    names = _csv_list(args.vars)
    if names:
        _check_columns(args, names)
    series = _load_series(args, names or None)
    rows = []
    for s in series:
        rows.append((s.name, summarize(s, adf_max_lag=args.max_lag)))
    sys.stdout.write(describe_table(rows))
    out = _out_dir(args)
    with (out / "describe.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variable", "mean", "sd", "max", "min", "adf_tstat", "adf_reject_level", "n"])
        for name, st in rows:
            w.writerow([name, repr(st.mean), repr(st.sd), repr(st.max), repr(st.min),
                        repr(st.adf_tstat), st.adf_reject_level, st.n_obs])
    return EXIT_OK


def cmd_fit(args) -> int:
    spec = _load_spec(args)
    needed = _needed(spec, args.dep)
    _check_columns(args, needed)
    builder = DatasetBuilder(_load_series(args, needed), args.dep)
    ds = builder.build(spec)
    try:
        fr = fit(ds, spec, restarts=args.restarts, seed=args.seed, jobs=args.jobs, init=args.init)
    except EstimationError as exc:
        print(f"estimation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = _out_dir(args)
    (out / "fit.json").write_text(fr.to_json() + "\n", encoding="utf-8")
    (out / "table.md").write_text(fr.to_markdown(spec.name or None), encoding="utf-8")
    write_probabilities_csv(out / "probs.csv", ds.periods, fr.smoothed)
    (out / "probs.svg").write_text(
        probabilities_svg(ds.periods, fr.smoothed.smoothed[:, 0], ds.dep, fr.episodes,
                          title=f"{spec.name or 'model'}: smoothed surge probability", dep_name=args.dep),
        encoding="utf-8",
    )
    sys.stdout.write(fr.to_markdown(spec.name or None))
    if fr.convergence != "converged" or fr.warnings:
        print(f"warning: convergence={fr.convergence}; {', '.join(fr.warnings) or 'no flags'}",
              file=sys.stderr)
        return EXIT_WARN
    return EXIT_OK


def _fmt_pair(pair, unit="quarters"):
    return ", ".join(
        f"{lab} {'n/a' if v is None else f'{v:.3f}'} {unit}" for lab, v in zip(("surge", "steady"), pair)
    )


def cmd_regimes(args) -> int:
    try:
        fr = FitResult.from_json(Path(args.fit).read_text(encoding="utf-8"))
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed fit artifact {args.fit}: {exc}") from None
    print(f"Surge episodes: {fr.classification.format_episodes() or 'none'}")
    print("Episode  start    end      quarters")
    for i, (a, b) in enumerate(fr.episodes, start=1):
        print(f"{i:<8} {str(a):<8} {str(b):<8} {b - a + 1}")
    if fr.durations_model is not None:
        note = f" ({fr.duration_note})" if fr.duration_note else ""
        print(f"Average duration, model-implied 1/(1-p): {_fmt_pair(fr.durations_model)}{note}")
    if fr.durations_empirical is not None:
        print(f"Average duration, empirical (classified quarters / episodes): {_fmt_pair(fr.durations_empirical)}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = DGPConfig.load(args.dgp)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    sim = simulate_full(cfg)
    out = _out_dir(args)
    write_csv(out / "simulated.csv", sim.series, args.date_column)
    write_states_csv(out / "states.csv", sim.dataset.periods, sim.states)
    print(f"wrote {sim.dataset.n_obs} observations to {out / 'simulated.csv'}")
    return EXIT_OK


def cmd_recover(args) -> int:
    if args.reps < 1:
        raise UsageError("--reps must be >= 1")
    cfg = DGPConfig.load(args.dgp)
    t0 = time.perf_counter()
    rep = run_recovery(cfg, args.reps, seed=args.seed, jobs=args.jobs, restarts=args.restarts)
    wall = time.perf_counter() - t0
    out = _out_dir(args)
    rep.write_csv(out / "recovery.csv")
    rep.write_replications_csv(out / "replications.csv")
    for row in rep.summary_rows():
        cov = row["coverage"]
        cov = f"{cov:.3f}" if isinstance(cov, float) else "-"
        bias = row["bias"]
        bias = f"{bias:+.4f}" if isinstance(bias, float) else "-"
        print(f"{row['parameter']:<24} true {row['true']:>9.4f}  mean {row['mean_estimate']:>9.4f}  "
              f"bias {bias:>8}  coverage {cov}")
    secs = np.array([r.seconds for r in rep.replications])
    failed = sum(r.status != "ok" for r in rep.replications)
    print(f"wall-clock: total {wall:.1f}s, per replication median {np.median(secs):.2f}s, "
          f"max {secs.max():.2f}s; failed replications: {failed}", file=sys.stderr)
    return EXIT_OK


def cmd_lagsearch(args) -> int:
    spec = _load_spec(args)
    needed = _needed(spec, args.dep) + [args.var]
    _check_columns(args, list(dict.fromkeys(needed)))
    builder = DatasetBuilder(_load_series(args, list(dict.fromkeys(needed))), args.dep)
    opts = dict(restarts=args.restarts, seed=args.seed)
    if args.rule == "minsig":
        res = min_significant_lag(builder, spec, args.var, args.max_lag, level=args.level, **opts)
    else:
        res = aic_lag_search(builder, spec, args.var, where=args.where, max_lag=args.max_lag, **opts)
    out = _out_dir(args)
    res.to_csv(out / "candidates.csv")
    print(f"{args.var}: chosen lag {res.chosen if res.chosen is not None else 'none'} ({res.rule})")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="regimekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"regimekit {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, data=True):
        if data:
            sp.add_argument("--csv", required=True, help="quarterly CSV input")
            sp.add_argument("--date-column", default="period")
            sp.add_argument("--growth", default="", help="comma-separated columns to convert to 100*dlog")
        sp.add_argument("--out-dir", default=".", help="artifact directory (env REGIMEKIT_OUT overrides)")

    def estimation(sp):
        sp.add_argument("--spec", required=True, help="model JSON file or built-in name (M1..M14)")
        sp.add_argument("--dep", default="pd", help="dependent variable column")
        sp.add_argument("--mode", choices=["ftp", "tvtp"])
        sp.add_argument("--restarts", type=int, default=20)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("describe", help="descriptive statistics and ADF tests")
    common(sp)
    sp.add_argument("--vars", default="", help="comma-separated columns (default: all)")
    sp.add_argument("--max-lag", type=int, default=4)
    sp.set_defaults(func=cmd_describe)

    sp = sub.add_parser("fit", help="estimate a model and write fit.json, table.md, probs.csv, probs.svg")
    common(sp)
    estimation(sp)
    sp.add_argument("--init", choices=["ergodic", "uniform"], default="ergodic")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("regimes", help="surge episodes and durations from a fit artifact")
    sp.add_argument("--fit", required=True)
    sp.set_defaults(func=cmd_regimes)

    sp = sub.add_parser("simulate", help="draw a dataset from a DGP file")
    common(sp, data=False)
    sp.add_argument("--dgp", required=True)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--date-column", default="period")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("recover", help="Monte Carlo parameter recovery")
    common(sp, data=False)
    sp.add_argument("--dgp", required=True)
    sp.add_argument("--reps", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--jobs", type=int, default=1)
    sp.add_argument("--restarts", type=int, default=20)
    sp.set_defaults(func=cmd_recover)

    sp = sub.add_parser("lagsearch", help="lag selection for one variable")
    common(sp)
    estimation(sp)
    sp.add_argument("--var", required=True)
    sp.add_argument("--rule", choices=["minsig", "aic"], default="aic")
    sp.add_argument("--where", choices=["regression", "transition", "both"], default="regression")
    sp.add_argument("--max-lag", type=int, default=4)
    sp.add_argument("--level", choices=["10", "5", "1"], default="10")
    sp.set_defaults(func=cmd_lagsearch)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, RegimeKitError, KeyError, FileNotFoundError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"regimekit {args.command}: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
