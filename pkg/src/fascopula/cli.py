"""Command-line front end.

SNRs are given in dB and DOR inputs in Kbits / MHz / ms; everything is
converted to linear SI units before reaching the library.
"""

import argparse
import csv
import datetime
import io
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, fas, montecarlo
from .copula import empirical_kendall, empirical_spearman, kendall_from_eta, spearman_from_eta
from .copula import sample_copula
from .mvn import MvnOptions

TABLE_WIDTHS = (0.05, 0.1, 0.5, 1.0, 2.0, 4.0, 6.0)


class UsageError(Exception):
    pass


# --- argument types ------------------------------------------------------------

def grid(text):
    """``from:to:step`` (inclusive) or a single number."""
    parts = text.split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or from:to:step grid: {text!r}")
    if any(not math.isfinite(v) for v in nums):
        raise argparse.ArgumentTypeError("grid values must be finite")
    if len(nums) == 1:
        return np.array(nums)
    if len(nums) != 3:
        raise argparse.ArgumentTypeError("grid must be from:to:step")
    lo, hi, step = nums
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError("grid needs step > 0 and to >= from")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(count)


def width_list(text):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad width list {text!r}")
    if any(not (v > 0 and math.isfinite(v)) for v in values):
        raise argparse.ArgumentTypeError("widths must be positive")
    return values


def positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def positive_float(text):
    v = float(text)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError("must be positive")
    return v


# --- output --------------------------------------------------------------------

def _plain(v):
    if isinstance(v, np.ndarray):
        return [_plain(x) for x in v.tolist()]
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    return v


def build_manifest(command, args, notes=None):
    skip = {"func", "out", "timestamp", "command"}
    params = {k: _plain(v) for k, v in sorted(vars(args).items()) if k not in skip}
    manifest = {
        "command": command,
        "params": params,
        "seed": args.seed,
        "version": __version__,
        "timestamp": (datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
                      if args.timestamp else None),
    }
    if notes:
        manifest["notes"] = notes
    return manifest


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _json_cell(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def render(manifest, columns, rows, fmt):
    if fmt == "json":
        body = {"manifest": manifest, "columns": columns,
                "rows": [[_json_cell(v) for v in row] for row in rows]}
        return json.dumps(body, indent=2) + "\n"
    buf = io.StringIO()
    for key, value in manifest.items():
        buf.write(f"# {key}: {json.dumps(value, sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


def emit(text, path):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _has_nan(rows):
    return any(isinstance(v, float) and math.isnan(v) for row in rows for v in row)


def _map_grid(fn, points, workers):
    # evaluate grid points concurrently, keep grid order
    def safe(x):
        try:
            return fn(x)
        except (ArithmeticError, ValueError):
            return None
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(safe, points))
    return [safe(x) for x in points]


# --- shared model setup ----------------------------------------------------------

def _model(args):
    try:
        config = fas.FasConfig(args.ports, args.width)
        marginal = fas.NakagamiMarginal(args.m, args.mu)
    except ValueError as exc:
        raise UsageError(str(exc))
    options = MvnOptions(abs_tol=args.mvn_tol, seed=args.seed)
    return config, marginal, options


def _repair_note(args):
    # near-singular Jakes matrices are repaired; say so rather than hide it
    return {"corr_repaired": bool(fas.jakes_repaired(fas.FasConfig(args.ports, args.width)))}


def _mc_samplers(args, config, marginal):
    """Best-port samples from the copula and, for half-integer m, Jakes."""
    if args.mc_samples <= 0:
        return None, None
    if args.mc_samples < 100:
        raise UsageError("--mc-samples must be 0 or at least 100")
    _, cop = montecarlo.sample_fas_gains(config, marginal, args.mc_samples, args.seed,
                                         workers=args.workers)
    jakes = None
    if marginal.half_integer:
        jakes = montecarlo.sample_jakes_direct(config, args.m, args.mu, args.mc_samples,
                                               args.seed, workers=args.workers)
    return cop, jakes


def _curve(args, command, x_name, xs, thresholds, value_name):
    """Shared body of op-curve and dor-curve: one row per (x, threshold)."""
    config, marginal, options = _model(args)
    cop, jakes = _mc_samplers(args, config, marginal)

    def point(t):
        return fas.fas_cdf(t, config, marginal, options)

    analytic = _map_grid(point, list(thresholds), args.workers)
    columns = [x_name, f"{value_name}_analytic", f"{value_name}_siso"]
    if cop is not None:
        columns += [f"{value_name}_copula_mc", f"{value_name}_copula_stderr"]
    if jakes is not None:
        columns += [f"{value_name}_jakes_mc", f"{value_name}_jakes_stderr"]
    cop_est = montecarlo.exceedance_curve(cop, thresholds) if cop is not None else None
    jakes_est = montecarlo.exceedance_curve(jakes, thresholds) if jakes is not None else None
    rows = []
    for i, (x, t) in enumerate(zip(xs, thresholds)):
        a = analytic[i]
        row = [float(x), math.nan if a is None else float(a), float(marginal.cdf(t))]
        if cop_est is not None:
            row += [cop_est[i].value, cop_est[i].std_err]
        if jakes_est is not None:
            row += [jakes_est[i].value, jakes_est[i].std_err]
        rows.append(row)
    return columns, rows


# --- subcommands -----------------------------------------------------------------

def cmd_op_curve(args):
    gth = fas.db_to_linear(args.gamma_th_db)
    xs = args.gamma_bar_db
    thresholds = [fas.SnrParams(fas.db_to_linear(g), gth).threshold for g in xs]
    columns, rows = _curve(args, "op-curve", "gamma_bar_db", xs, thresholds, "op")
    return build_manifest("op-curve", args, _repair_note(args)), columns, rows


def cmd_dor_curve(args):
    sweep = args.sweep
    data, bw, gb = args.data_kbits, args.bandwidth_mhz, args.gamma_bar_db
    swept = {"snr": gb, "data": data, "bandwidth": bw}[sweep]
    for name, values in (("--gamma-bar-db", gb), ("--data-kbits", data),
                         ("--bandwidth-mhz", bw)):
        if values is not swept and values.size != 1:
            raise UsageError(f"{name} must be a single value unless it is swept")
    if np.any(data <= 0) or np.any(bw <= 0):
        raise UsageError("data size and bandwidth must be positive")
    thresholds = []
    for x in swept:
        d = x if sweep == "data" else data[0]
        b = x if sweep == "bandwidth" else bw[0]
        g = x if sweep == "snr" else gb[0]
        dor = fas.DorParams(d * 1e3, b * 1e6, args.deadline_ms * 1e-3)
        thresholds.append(dor.threshold(fas.db_to_linear(g)))
    x_name = {"snr": "gamma_bar_db", "data": "data_kbits", "bandwidth": "bandwidth_mhz"}[sweep]
    columns, rows = _curve(args, "dor-curve", x_name, swept, thresholds, "dor")
    return build_manifest("dor-curve", args, _repair_note(args)), columns, rows


def cmd_dist(args):
    config, marginal, options = _model(args)
    rs = [float(r) for r in args.r]
    if any(r < 0 for r in rs):
        raise UsageError("--r values must be non-negative")

    def point(r):
        cdf = fas.fas_cdf(r, config, marginal, options)
        F = marginal.cdf(r)
        interior = r > 0 and 0.0 < F < 1.0
        pdf = fas.fas_pdf(r, config, marginal, options) if interior else None
        prod = None
        if args.product_pdf and interior:
            prod = fas.fas_pdf_product(r, config, marginal)
        return cdf, pdf, prod

    results = _map_grid(point, rs, args.workers)
    columns = ["r", "cdf", "pdf"] + (["pdf_product"] if args.product_pdf else [])
    rows = []
    for r, res in zip(rs, results):
        if res is None:
            row = [r, math.nan, math.nan] + ([math.nan] if args.product_pdf else [])
        else:
            cdf, pdf, prod = res
            row = [r, float(cdf), None if pdf is None else float(pdf)]
            if args.product_pdf:
                row.append(None if prod is None else float(prod))
        rows.append(row)
    return build_manifest("dist", args, _repair_note(args)), columns, rows


def cmd_rank_table(args):
    columns = ["W", "eta", "rho_s", "tau_k"]
    if args.mc_samples > 0:
        columns += ["rho_s_mc", "tau_k_mc"]
    rows, negative = [], []
    for W in args.widths:
        R = fas.jakes_correlation(fas.FasConfig(2, W))
        eta = float(R[0, 1])
        row = [W, eta, spearman_from_eta(eta), kendall_from_eta(eta)]
        if args.mc_samples > 0:
            if args.mc_samples < 100:
                raise UsageError("--mc-samples must be 0 or at least 100")
            batch = sample_copula(R, args.mc_samples, args.seed, workers=args.workers)
            row += [empirical_spearman(batch), empirical_kendall(batch)]
        if eta < 0:
            negative.append(W)
        rows.append(row)
    notes = None
    if negative:
        notes = {"negative_eta_widths": negative,
                 "comment": "J0 is negative at these widths; tables that list only "
                            "magnitudes will show |eta|"}
    return build_manifest("rank-table", args, notes), columns, rows


def cmd_sample(args):
    config, marginal, _ = _model(args)
    if config.num_ports != 2:
        raise UsageError("sample emits port pairs and needs --ports 2")
    if args.source == "copula-uniform":
        values = sample_copula(fas.jakes_correlation(config), args.n, args.seed,
                               workers=args.workers).values
    elif args.source == "copula-nakagami":
        values = montecarlo.scatter_pairs(config, args.n, args.seed, source="copula",
                                          marginal=marginal, workers=args.workers)
    else:
        if not marginal.half_integer:
            raise UsageError("jakes-direct needs 2m to be an integer")
        values = montecarlo.scatter_pairs(config, args.n, args.seed, source="jakes_direct",
                                          marginal=marginal, workers=args.workers)
    rows = [[float(x), float(y)] for x, y in values]
    return build_manifest("sample", args), ["x", "y"], rows


def cmd_validate(args):
    from .validation import run_suite
    report = run_suite(seed=args.seed, quick=args.quick, mvn_tol=args.mvn_tol,
                       workers=args.workers)
    sys.stdout.write(report.to_json() if args.format == "json" and args.out is None
                     else report.to_text())
    if args.out is not None:
        emit(report.to_json(), args.out)
    return 0 if report.passed else 1


# --- parser ----------------------------------------------------------------------

def _common(sampling=True):
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--ports", type=positive_int, default=2, help="number of ports K")
    p.add_argument("--width", type=positive_float, default=1.0, help="aperture in wavelengths")
    p.add_argument("--m", type=float, default=1.0, help="Nakagami shape")
    p.add_argument("--mu", type=positive_float, default=1.0, help="Nakagami spread")
    p.add_argument("--seed", type=nonneg_int, default=0)
    p.add_argument("--out", default=None, help="output path (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--mvn-tol", type=positive_float, default=1e-6,
                   help="absolute tolerance of the MVN integration")
    if sampling:
        p.add_argument("--mc-samples", type=nonneg_int, default=0,
                       help="Monte Carlo sample size (0 disables)")
    p.add_argument("--workers", type=positive_int, default=1, help="worker threads")
    p.add_argument("--timestamp", action="store_true",
                   help="record wall-clock time in the manifest (breaks byte-identity)")
    return p


def build_parser():
    parser = argparse.ArgumentParser(prog="fascopula",
                                     description="Fluid antenna outage analysis via Gaussian copulas")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()

    p = sub.add_parser("op-curve", parents=[common], help="outage probability vs SNR")
    p.add_argument("--gamma-th-db", type=float, default=0.0)
    p.add_argument("--gamma-bar-db", type=grid, default=grid("0:25:5"))
    p.set_defaults(func=cmd_op_curve)

    p = sub.add_parser("dor-curve", parents=[common], help="delay outage rate sweeps")
    p.add_argument("--sweep", choices=("snr", "data", "bandwidth"), default="snr")
    p.add_argument("--gamma-bar-db", type=grid, default=grid("0:25:5"))
    p.add_argument("--data-kbits", type=grid, default=grid("5"))
    p.add_argument("--bandwidth-mhz", type=grid, default=grid("2"))
    p.add_argument("--deadline-ms", type=positive_float, default=3.0)
    p.set_defaults(func=cmd_dor_curve)

    p = sub.add_parser("dist", parents=[common], help="CDF and PDF of the best port")
    p.add_argument("--r", type=grid, default=grid("0:3:0.05"))
    p.add_argument("--product-pdf", action="store_true",
                   help="also emit the diagonal joint density")
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("rank-table", parents=[common],
                       help="eta, Spearman and Kendall against aperture width")
    p.add_argument("--widths", type=width_list, default=TABLE_WIDTHS)
    p.set_defaults(func=cmd_rank_table)

    p = sub.add_parser("sample", parents=[common], help="dump port-pair samples")
    p.add_argument("--source", choices=("copula-uniform", "copula-nakagami", "jakes-direct"),
                   default="copula-uniform")
    p.add_argument("--n", type=positive_int, default=1000)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("validate", parents=[_common(sampling=False)],
                       help="run the consistency suite")
    p.add_argument("--quick", action="store_true", help="reduced sample sizes")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "validate":
            return args.func(args)
        manifest, columns, rows = args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    emit(render(manifest, columns, rows, args.format), args.out)
    if _has_nan(rows):
        print("fascopula: some grid points failed (NaN rows)", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
