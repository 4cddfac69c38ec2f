"""Command-line entry point: ``mddrisk <subcommand> [options]``.

Every run writes ``<subcommand>_manifest.json`` into the output directory
before producing data; the manifest's ``config`` block can be fed back with
``--config`` to repeat the run.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path as FsPath

from . import __version__
from .drawdown import estimate_emdd, write_emdd_csv
from .errors import MddRiskError
from .fbm_sim import TRADING_DAYS_PER_YEAR, SimConfig
from .market_ingest import (
    BUBBLE_ROWS,
    bubble_report,
    compare_real_vs_synthetic,
    load_csv,
    make_fixture,
    write_comparison_csv,
    write_csv,
    write_report_csv,
)
from .perf_metrics import calmar, calmar_from_sharpe, emdd_over_sigma
from .stats import dfa_hurst, jb_scan, log_returns, write_dfa, write_jb_grid_csv
from .theory import QTable, calibrate_qtable, default_qtable

log = logging.getLogger("mddrisk")

OUT_DIR_ENV = "MDDRISK_OUT_DIR"
HURST_GRID = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9]
PANELS = {"a": 0.05, "b": 0.0, "c": -0.05}


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    inputs: list[str]
    outputs: list[str] = field(default_factory=list)
    seed: int = 0
    version: str = __version__
    status: str = "running"
    error: str | None = None

    def write(self, out_dir: FsPath) -> FsPath:
        path = out_dir / f"{self.subcommand}_manifest.json"
        path.write_text(json.dumps(asdict(self), indent=2))
        return path


class UsageError(MddRiskError):
    pass


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _load_qtable(path: str | None) -> QTable:
    if path is None:
        return default_qtable("positive")
    stem = FsPath(path)
    if stem.is_dir():
        stem = stem / "qtable_positive"
    if not stem.with_suffix(".csv").exists():
        raise UsageError(f"no Q table at {stem}.csv; create one with `mddrisk qtable --out-dir {stem.parent}`")
    return QTable.load(stem)


def cmd_emdd(args, out_dir: FsPath) -> list[FsPath]:
    if args.mu is not None:
        panels = {"custom": args.mu}
    elif args.panel == "all":
        panels = PANELS
    else:
        panels = {args.panel: PANELS[args.panel]}
    # validate every configuration before simulating anything
    configs = {
        (label, h): SimConfig(
            hurst=h, mu_annual=mu, sigma_annual=args.sigma, years=args.years,
            steps_per_year=args.steps_per_year, replicates=args.replicates, seed=args.seed,
            sigma_scaling=args.sigma_scaling,
        )
        for label, mu in panels.items()
        for h in args.hurst
    }
    outputs = []
    for (label, h), cfg in configs.items():
        k = min(args.points, cfg.n_steps + 1)
        curve = estimate_emdd(cfg, k, args.threads)
        outputs.append(write_emdd_csv(curve, out_dir / f"emdd_{label}_H{h:.2f}.csv"))
        log.info("panel %s H=%.2f: E(MDD)(T)=%.4f", label, h, curve.mean[-1])
    return outputs


def _ratio_configs(args) -> dict:
    def cfg(h, shrp):
        return SimConfig(h, shrp * args.sigma, args.sigma, args.years, args.steps_per_year, args.replicates,
                         args.seed, args.sigma_scaling)

    return {
        h: ([(shrp, cfg(h, shrp)) for shrp in args.sharpe], cfg(h, args.calmar_sharpe))
        for h in args.hurst
    }


def _ratio_rows(args, table: QTable, configs: dict):
    sigma, years = args.sigma, args.years
    emdd_rows, cvs_rows, cvt_rows = [], [], []
    for h, (by_sharpe, time_cfg) in configs.items():
        for shrp, cfg in by_sharpe:
            curve = estimate_emdd(cfg, 1, args.threads)
            m, se = curve.mean[-1], curve.stderr[-1]
            emdd_rows.append([h, shrp, m / sigma, se / sigma, emdd_over_sigma(shrp, years, table)])
            cvs_rows.append([h, shrp, calmar(shrp * sigma, years, m), calmar_from_sharpe(shrp, years, table)])
        mu = time_cfg.mu_annual
        curve = estimate_emdd(time_cfg, min(args.points, time_cfg.n_steps + 1), args.threads)
        for t_days, m, _ in curve.points:
            t = t_days / TRADING_DAYS_PER_YEAR
            if t > 0 and m > 0:
                cvt_rows.append([h, t, calmar(mu, t, m), calmar_from_sharpe(args.calmar_sharpe, t, table)])
    return emdd_rows, cvs_rows, cvt_rows


def _write_rows(path: FsPath, header: list[str], rows) -> FsPath:
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def cmd_ratios(args, out_dir: FsPath) -> list[FsPath]:
    if any(s <= 0 for s in args.sharpe) or args.calmar_sharpe <= 0:
        raise UsageError("ratio study covers profitable portfolios only: every Sharpe value must be > 0")
    configs = _ratio_configs(args)
    table = _load_qtable(args.qtable)
    emdd_rows, cvs_rows, cvt_rows = _ratio_rows(args, table, configs)
    return [
        _write_rows(out_dir / "ratios_emdd_over_sigma.csv",
                    ["hurst", "sharpe", "emdd_over_sigma", "stderr", "bm_analytic"], emdd_rows),
        _write_rows(out_dir / "ratios_calmar_vs_sharpe.csv",
                    ["hurst", "sharpe", "calmar", "bm_analytic"], cvs_rows),
        _write_rows(out_dir / "ratios_calmar_vs_time.csv",
                    ["hurst", "t_years", "calmar", "bm_analytic"], cvt_rows),
    ]


def cmd_qtable(args, out_dir: FsPath) -> list[FsPath]:
    import numpy as np

    grid = np.geomspace(args.x_min, args.x_max, args.knots)
    kinds = ["positive", "negative"] if args.kind == "both" else [args.kind]
    outputs = []
    for i, kind in enumerate(kinds):
        table = calibrate_qtable(kind, grid, args.replicates, (args.seed + i) % 2**64)
        for w in table.metadata["warnings"]:
            log.warning("%s table: %s", kind, w)
        outputs.extend(table.save(out_dir / f"qtable_{kind}"))
    return outputs


def cmd_jb_scan(args, out_dir: FsPath) -> list[FsPath]:
    outputs = []
    for path in args.inputs:
        series = load_csv(path)
        grid = jb_scan(log_returns(series.closes), args.min_width, args.alpha, args.step)
        outputs.append(write_jb_grid_csv(grid, out_dir / f"{series.name}_jbgrid.csv"))
        log.info("%s: %.1f%% of windows Gaussian", series.name, 100 * grid.acceptance_rate())
    return outputs


def cmd_dfa(args, out_dir: FsPath) -> list[FsPath]:
    box = (args.box_min, args.box_max) if args.box_max else None
    outputs = []
    for path in args.inputs:
        series = load_csv(path)
        result = dfa_hurst(log_returns(series.closes), box, args.order)
        outputs.extend(write_dfa(result, out_dir / f"{series.name}_dfa"))
    return outputs


def cmd_report(args, out_dir: FsPath) -> list[FsPath]:
    reports = [bubble_report(load_csv(p)) for p in args.inputs]
    return [write_report_csv(reports, out_dir / args.report_name, append=args.append)]


def cmd_compare(args, out_dir: FsPath) -> list[FsPath]:
    outputs = []
    for path in args.inputs:
        series = load_csv(path)
        curve = compare_real_vs_synthetic(series, args.replicates, args.seed, args.checkpoints,
                                          args.hurst, args.threads)
        outputs.append(write_comparison_csv(curve, out_dir / f"{series.name}_compare.csv"))
    return outputs


def cmd_fixture(args, out_dir: FsPath) -> list[FsPath]:
    if args.published:
        specs = [(f"{r.name.replace(' ', '_')}_{r.year}", r.mu, r.sigma, r.hurst) for r in BUBBLE_ROWS]
    else:
        specs = [(args.name, args.mu, args.sigma, args.hurst)]
    outputs = []
    for i, (name, mu, sigma, hurst) in enumerate(specs):
        series = make_fixture(name, mu, sigma, args.days, hurst, (args.seed + i) % 2**64)
        outputs.append(write_csv(series, out_dir / f"{name}.csv"))
    return outputs


COMMANDS = {
    "emdd": cmd_emdd,
    "ratios": cmd_ratios,
    "qtable": cmd_qtable,
    "jb-scan": cmd_jb_scan,
    "dfa": cmd_dfa,
    "report": cmd_report,
    "compare": cmd_compare,
    "fixture": cmd_fixture,
}


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(prog="mddrisk", description="Drawdown-based performance measures under (f)Bm.")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default=os.environ.get(OUT_DIR_ENV, "out"))
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--config", help="JSON file of option defaults (or a run manifest)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    subs = {}

    def sim_options(p, years):
        p.add_argument("--hurst", type=_float_list, default=HURST_GRID)
        p.add_argument("--sigma", type=float, default=0.05)
        p.add_argument("--years", type=float, default=years)
        p.add_argument("--replicates", type=int, default=1000)
        p.add_argument("--steps-per-year", type=int, default=TRADING_DAYS_PER_YEAR)
        p.add_argument("--sigma-scaling", choices=["step", "horizon"], default="step")
        p.add_argument("--points", type=int, default=128, help="checkpoints per curve")

    p = subs["emdd"] = sub.add_parser("emdd", help="E(MDD) vs time for a grid of Hurst exponents")
    sim_options(p, 10.0)
    p.add_argument("--panel", choices=["a", "b", "c", "all"], default="all",
                   help="a: Shrp=1, b: Shrp=0, c: Shrp=-1 (mu=+-5%%/yr, sigma=5%%/yr)")
    p.add_argument("--mu", type=float, default=None, help="annual drift; overrides --panel")

    p = subs["ratios"] = sub.add_parser("ratios", help="E(MDD)/sigma and Calmar vs Sharpe and time")
    sim_options(p, 5.0)
    p.add_argument("--sharpe", type=_float_list, default=[0.2, 0.4, 0.6, 0.8, 1.0, 1.2, 1.4, 1.6, 1.8, 2.0])
    p.add_argument("--calmar-sharpe", type=float, default=1.0, help="Sharpe ratio of the Calmar-vs-time study")
    p.add_argument("--qtable", default=None, help="directory or stem of a positive-drift Q table")

    p = subs["qtable"] = sub.add_parser("qtable", help="calibrate Q_p / Q_n by Monte Carlo")
    p.add_argument("--kind", choices=["positive", "negative", "both"], default="both")
    p.add_argument("--replicates", type=int, default=10_000)
    p.add_argument("--x-min", type=float, default=1e-4)
    p.add_argument("--x-max", type=float, default=100.0)
    p.add_argument("--knots", type=int, default=25)

    p = subs["jb-scan"] = sub.add_parser("jb-scan", help="windowed Jarque-Bera scan of a price file")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--min-width", type=int, default=256)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--step", type=int, default=1)

    p = subs["dfa"] = sub.add_parser("dfa", help="DFA Hurst exponent of log returns")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--box-min", type=int, default=8)
    p.add_argument("--box-max", type=int, default=None)
    p.add_argument("--order", type=int, default=1)

    p = subs["report"] = sub.add_parser("report", help="per-series statistics table")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--report-name", default="report.csv")
    p.add_argument("--append", action="store_true")

    p = subs["compare"] = sub.add_parser("compare", help="real MDD vs synthetic Bm / fBm E(MDD)")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--replicates", type=int, default=1000)
    p.add_argument("--checkpoints", type=int, default=6)
    p.add_argument("--hurst", type=float, default=None, help="fBm Hurst exponent (default: DFA estimate)")

    p = subs["fixture"] = sub.add_parser("fixture", help="write synthetic price series")
    p.add_argument("--name", default="fixture")
    p.add_argument("--mu", type=float, default=0.0012)
    p.add_argument("--sigma", type=float, default=0.0157)
    p.add_argument("--hurst", type=float, default=0.5)
    p.add_argument("--days", type=int, default=700)
    p.add_argument("--published", action="store_true", help="one fixture per published index row")
    return parser, subs


def _apply_config(parser, subs, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    data = json.loads(FsPath(args.config).read_text())
    if "subcommand" in data and "config" in data:
        data = data["config"]
    data = {k.replace("-", "_"): v for k, v in data.items() if k not in ("subcommand", "config")}
    # subparser defaults would shadow global flags given on the command line
    shared = ("seed", "out_dir", "threads", "verbose")
    parser.set_defaults(**{k: v for k, v in data.items() if k in shared})
    subs[args.subcommand].set_defaults(**{k: v for k, v in data.items() if k not in shared})
    return parser.parse_args(argv)


def main(argv: list[str] | None = None) -> int:
    parser, subs = build_parser()
    args = _apply_config(parser, subs, argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out_dir = FsPath(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config = {k: v for k, v in vars(args).items() if k != "config"}
    manifest = RunManifest(args.subcommand, config, [str(p) for p in getattr(args, "inputs", [])], seed=args.seed)
    manifest.write(out_dir)
    try:
        outputs = COMMANDS[args.subcommand](args, out_dir)
    except (MddRiskError, OSError) as exc:
        manifest.status, manifest.error = "failed", str(exc)
        manifest.write(out_dir)
        print(f"mddrisk {args.subcommand}: error: {exc}", file=sys.stderr)
        return 2
    manifest.outputs = [str(p) for p in outputs]
    manifest.status = "ok"
    manifest.write(out_dir)
    return 0


if __name__ == "__main__":
    sys.exit(main())
