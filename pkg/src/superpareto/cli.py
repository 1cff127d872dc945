"""Command-line interface: ``superpareto <subcommand> ...``."""
import argparse
import logging
import sys
import warnings

import numpy as np

from . import __version__
from .exceptions import SuperParetoError
from .gb2 import Gb2Params
from .pipeline import analyze, emit_plotdata, fit_level, format_report, write_report
from .records import LEVELS, aggregate_weighted, ingest_csv, write_csv
from .superstat import infer_delta, predict_mu_w
from .synth import SynthConfig, synth_generate
from .tail_fit import CutPolicy, apply_cuts


def _year_panel(panel, year):
    years = panel.years()
    if year is None:
        if len(years) != 1:
            raise SystemExit(f"error: the file holds years {years}; pick one with --year")
        year = years[0]
    sub = panel.for_year(year)
    if not len(sub):
        raise SystemExit(f"error: no records for year {year}")
    return sub.canonical()


def cmd_fit(args):
    panel = ingest_csv(args.csv)
    sub = apply_cuts(_year_panel(panel, args.year), CutPolicy.parse(args.cut))
    values, weights = aggregate_weighted(sub, args.level)
    fit = fit_level(args.level, values, weights if args.level == "worker" else None)
    for key in ("level", "n_values", "n_obs", "mu", "se_mu", "nu", "q", "c1",
                "log_likelihood", "hill", "hill_k", "converged", "message"):
        v = getattr(fit, key)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = f"{v:.6g}"
        print(f"{key} = {v}")
    return 0 if fit.converged else 1


def cmd_analyze(args):
    panel = ingest_csv(args.csv)
    reports = analyze(panel, CutPolicy.parse(args.cut), truncated=args.truncated_fit)
    if args.out:
        write_report(reports, args.out)
    else:
        sys.stdout.write(format_report(reports))
    return 0


def cmd_synth(args):
    cfg = SynthConfig(
        K=args.firms, N=args.workers,
        firm_params=Gb2Params(mu=args.mu, nu=args.nu, q=args.q, c1=args.c1),
        delta=args.delta, periods=args.periods, seed=args.seed,
        n_sectors=args.sectors, year=args.year, stratified=not args.iid,
    )
    panel = synth_generate(cfg)
    write_csv(panel, args.out)
    print(f"wrote {len(panel)} records to {args.out}")
    return 0


def cmd_plotdata(args):
    panel = ingest_csv(args.csv)
    sub = apply_cuts(_year_panel(panel, args.year), CutPolicy.parse(args.cut))
    values, weights = aggregate_weighted(sub, args.level)
    emit_plotdata(values, args.out, weights,
                  comment=f"level={args.level} year={int(sub.year[0])} cut={args.cut}")
    return 0


def cmd_predict(args):
    print(f"mu_w = {predict_mu_w(args.mu_f, args.delta):.6g}")
    return 0


def cmd_infer_delta(args):
    print(f"delta = {infer_delta(args.mu_f, args.mu_w):.6g}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="superpareto", description="Pareto-index analysis of productivity panels.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log diagnostics to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit one aggregation level of one year")
    f.add_argument("csv")
    f.add_argument("--year", type=int)
    f.add_argument("--level", choices=LEVELS, default="firm")
    f.add_argument("--cut", default="top10", help="top<k>, threshold=<c_max> or none")
    f.set_defaults(func=cmd_fit)

    a = sub.add_parser("analyze", help="per-year report at all three levels")
    a.add_argument("csv")
    a.add_argument("--out", help="report path; a .json suffix selects JSON")
    a.add_argument("--cut", default="top10")
    a.add_argument("--truncated-fit", action="store_true",
                   help="fit the GB2 truncated at the cut point instead of the plain cut sample")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="generate a synthetic panel CSV")
    s.add_argument("--firms", type=int, default=10_000)
    s.add_argument("--workers", type=int, default=1_000_000)
    s.add_argument("--mu", type=float, default=1.8)
    s.add_argument("--nu", type=float, default=1.0)
    s.add_argument("--q", type=float, default=1.5)
    s.add_argument("--c1", type=float, default=5.0e7)
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--periods", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--sectors", type=int, default=20)
    s.add_argument("--year", type=int, default=2000)
    s.add_argument("--iid", action="store_true", help="plain i.i.d. draws instead of stratified ones")
    s.add_argument("--out", default="panel.csv")
    s.set_defaults(func=cmd_synth)

    d = sub.add_parser("plotdata", help="rank-size data for one level and year")
    d.add_argument("csv")
    d.add_argument("--level", choices=LEVELS, required=True)
    d.add_argument("--year", type=int)
    d.add_argument("--cut", default="top10")
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_plotdata)

    r = sub.add_parser("predict", help="worker index from firm index and delta")
    r.add_argument("--mu-f", type=float, required=True)
    r.add_argument("--delta", type=float, required=True)
    r.set_defaults(func=cmd_predict)

    i = sub.add_parser("infer-delta", help="delta from firm and worker indices")
    i.add_argument("--mu-f", type=float, required=True)
    i.add_argument("--mu-w", type=float, required=True)
    i.set_defaults(func=cmd_infer_delta)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    warnings.simplefilter("default")
    np.seterr(all="ignore")
    try:
        return args.func(args)
    except (SuperParetoError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
