"""Command-line front end: ``glptest {test,chart,export,power,calibrate}``."""

from __future__ import annotations

import argparse
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import report
from .data import load_csv
from .errors import ConfigError, GLPError
from .glp import (
    DEFAULT_ALPHA,
    DEFAULT_MAX_COMPONENT,
    DEFAULT_SEED,
    export_lp_features,
    glp_chart,
    glp_test,
)
from .kernel import DEFAULT_C, KERNEL_SCALES, write_kernel_csv
from .sim import (
    TestConfig,
    calibrate_null,
    load_scenario,
    power_curve,
    resolve_threads,
    write_calibration_csv,
    write_power_csv,
)
from .spectral import write_embedding_csv

EXIT_OK, EXIT_DATA, EXIT_CONFIG = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _add_common(p):
    p.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default 42)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker cap; defaults to $GLP_THREADS or 1")
    p.add_argument("--format", choices=("table", "json", "csv"), default="table")
    p.add_argument("--output", "-o", help="write json/csv results to this path")
    p.add_argument("--figures", metavar="DIR", help="render PNG figures into DIR")


def _add_input(p):
    p.add_argument("--input", "-i", required=True, help="CSV file")
    p.add_argument("--label", default="0", help="label column name or 0-based index")
    p.add_argument("--no-header", action="store_true", help="file has no header row")


def _add_kernel(p):
    p.add_argument("--c", type=float, default=DEFAULT_C, help="kernel offset (default 0.5)")
    p.add_argument("--kernel-scale", choices=KERNEL_SCALES, default="mean")
    p.add_argument("--permutations", "-B", type=int, default=0,
                   help="permutation count; 0 = asymptotic only")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="glptest", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("test", help="GLP test at one LP order (or fused orders)")
    _add_input(p)
    p.add_argument("--order", type=_int_list, default=[1], help="order, or comma list to fuse")
    _add_kernel(p)
    p.add_argument("--dump-kernel", metavar="PATH")
    p.add_argument("--dump-embedding", metavar="PATH")
    _add_common(p)

    p = sub.add_parser("chart", help="per-component GLP chart with fused overall test")
    _add_input(p)
    p.add_argument("--components", type=int, default=DEFAULT_MAX_COMPONENT)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    _add_kernel(p)
    _add_common(p)

    p = sub.add_parser("export", help="write the LP feature matrix [T1|T2|...] as CSV")
    _add_input(p)
    p.add_argument("--orders", type=_int_list, default=[1, 2])
    _add_common(p)

    p = sub.add_parser("power", help="Monte Carlo power of a scenario")
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA)
    p.add_argument("--order", type=_int_list, default=[1])
    p.add_argument("--chart", action="store_true", help="use the fused chart overall p-value")
    p.add_argument("--components", type=int, default=DEFAULT_MAX_COMPONENT)
    p.add_argument("--dims", type=_int_list, help="override the scenario dimensions")
    _add_kernel(p)
    _add_common(p)

    p = sub.add_parser("calibrate", help="asymptotic vs permutation p-values under the null")
    p.add_argument("--d", type=_int_list, default=[10])
    p.add_argument("--n1", type=int, default=100)
    p.add_argument("--n2", type=int, default=100)
    p.add_argument("--reps", type=int, default=100)
    p.add_argument("--permutations", "-B", type=int, default=1000)
    p.add_argument("--order", type=int, default=1)
    p.add_argument("--c", type=float, default=DEFAULT_C)
    p.add_argument("--kernel-scale", choices=KERNEL_SCALES, default="mean")
    _add_common(p)
    return parser


def _validate(args):
    checks = [
        ("c", getattr(args, "c", 0.0) >= 0, "must be >= 0"),
        ("alpha", 0 < getattr(args, "alpha", 0.5) < 1, "must be in (0, 1)"),
        ("permutations", getattr(args, "permutations", 0) >= 0, "must be >= 0"),
        ("components", getattr(args, "components", 1) >= 1, "must be >= 1"),
        ("reps", getattr(args, "reps", 1) >= 1, "must be >= 1"),
        ("threads", args.threads is None or args.threads >= 1, "must be >= 1"),
    ]
    for name in ("order", "orders", "d", "dims"):
        values = getattr(args, name, None)
        if values is not None:
            vals = values if isinstance(values, list) else [values]
            checks.append((name, all(v >= 1 for v in vals), "must be >= 1"))
    for name in ("n1", "n2"):
        if hasattr(args, name):
            checks.append((name, getattr(args, name) >= 2, "must be >= 2"))
    for name, ok, msg in checks:
        if not ok:
            raise ConfigError(f"--{name.replace('_', '-')}: {msg}")
    if args.format == "table" and args.output and args.command != "export":
        args.format_file = "json"
    else:
        args.format_file = args.format


def resolved_config(args) -> dict:
    skip = {"format_file"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, table, payload, csv_text):
    config = resolved_config(args)
    if args.format == "json":
        sys.stdout.write(report.dumps(payload))
    elif args.format == "csv":
        sys.stderr.write(f"# config: {json.dumps(config)}\n")
        sys.stdout.write(csv_text)
    else:
        sys.stdout.write(f"# config: {json.dumps(config)}\n")
        sys.stdout.write(table)
    if args.output:
        text = csv_text if args.format_file == "csv" else report.dumps(payload)
        Path(args.output).write_text(text, encoding="utf-8")


def _warn(messages):
    for msg in messages:
        print(f"warning: {msg}", file=sys.stderr)


def _load(args):
    label = args.label
    data = load_csv(args.input, label, header=not args.no_header)
    notes = []
    if data.dropped_rows:
        notes.append(f"{data.dropped_rows} row(s) with missing cells dropped")
    return data, notes


def cmd_test(args):
    data, notes = _load(args)
    order = args.order[0] if len(args.order) == 1 else args.order
    res = glp_test(data, order, args.c, args.seed, args.permutations or None,
                   scale=args.kernel_scale)
    res.warnings[:0] = notes
    _warn(res.warnings)
    if args.dump_kernel:
        write_kernel_csv(res.kernel, args.dump_kernel)
    if args.dump_embedding:
        write_embedding_csv(res.embedding, args.dump_embedding)
    if args.figures:
        from . import plotting

        plotting.kernel_heatmap(res.kernel.w, data.y, Path(args.figures) / "kernel.png")
        plotting.spectrum_plot(res.embedding, data.y, Path(args.figures) / "spectrum.png")
    payload = {"command": "test", "config": resolved_config(args)}
    payload.update(report.result_to_dict(res))
    _emit(args, report.result_table(res), payload, report.result_csv(res))


def cmd_chart(args):
    data, notes = _load(args)
    chart = glp_chart(data, args.components, args.c, args.seed, args.alpha,
                      permutations=args.permutations or None, scale=args.kernel_scale)
    chart.warnings[:0] = notes
    _warn(chart.warnings)
    if args.figures:
        from . import plotting

        plotting.chart_plot(chart, Path(args.figures) / "chart.png")
    payload = {"command": "chart", "config": resolved_config(args)}
    payload.update(report.chart_to_dict(chart))
    _emit(args, report.chart_table(chart), payload, report.chart_csv(chart))


def cmd_export(args):
    data, notes = _load(args)
    _warn(notes)
    matrix, names = export_lp_features(data, args.orders)
    buf = io.StringIO()
    buf.write("label," + ",".join(names) + "\n")
    for lab, row in zip(data.y, matrix):
        cells = ",".join(repr(float(v)) for v in row)
        buf.write(f"{data.label_names[lab - 1]},{cells}\n")
    text = buf.getvalue()
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
        print(f"# config: {json.dumps(resolved_config(args))}", file=sys.stderr)
        print(f"wrote {matrix.shape[0]} x {matrix.shape[1]} LP feature matrix to {args.output}")
    else:
        sys.stdout.write(text)


def cmd_power(args):
    spec, dims = load_scenario(args.scenario)
    if args.dims:
        dims = args.dims
    config = TestConfig(
        order=args.order[0] if len(args.order) == 1 else args.order,
        chart=args.chart, max_component=args.components, c=args.c, alpha=args.alpha,
        permutations=args.permutations or None, seed=args.seed, scale=args.kernel_scale,
    )
    threads = resolve_threads(args.threads)
    reports = power_curve(spec, dims, config, args.reps, args.alpha, threads)
    if args.figures:
        from . import plotting

        plotting.power_plot(reports, Path(args.figures) / f"power_{spec.name}.png")
    buf = io.StringIO()
    write_power_csv(reports, buf)
    rows = [
        {"d": r.scenario.d, "power": r.power, "stderr": r.mc_stderr,
         "replications": r.replications, "alpha": r.alpha, "test": r.order_or_chart}
        for r in reports
    ]
    payload = {
        "command": "power", "config": resolved_config(args),
        "scenario": {"name": spec.name, "n_per_group": spec.n_per_group,
                     "params": spec.params, "seed": spec.seed},
        "rows": rows,
    }
    table = "".join(
        f"{spec.name:<24} d={r['d']:<6} power={r['power']:.3f}  se={r['stderr']:.3f}\n"
        for r in rows
    )
    _emit(args, table, payload, buf.getvalue())


def cmd_calibrate(args):
    threads = resolve_threads(args.threads)
    results = [
        calibrate_null(d, args.n1, args.n2, args.reps, args.permutations, args.seed,
                       args.order, args.c, threads, scale=args.kernel_scale)
        for d in args.d
    ]
    if args.figures:
        from . import plotting

        plotting.calibration_plot(results, Path(args.figures) / "calibration.png")
    buf = io.StringIO()
    write_calibration_csv(results, buf)
    payload = {
        "command": "calibrate", "config": resolved_config(args),
        "rows": [{k: (float(v) if isinstance(v, (float, np.floating)) else v)
                  for k, v in r.summary().items()} for r in results],
    }
    _emit(args, buf.getvalue(), payload, buf.getvalue())


COMMANDS = {
    "test": cmd_test,
    "chart": cmd_chart,
    "export": cmd_export,
    "power": cmd_power,
    "calibrate": cmd_calibrate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args)
        COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GLPError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
