"""Command-line front end: ``baht <command> [options]``.

Every data command writes CSV (or JSON) into ``--out`` together with a
``<stem>.manifest.json`` recording the command, parameters, seed, tool
version and a timestamp. Payload files never contain the timestamp, so
identical commands produce byte-identical payloads.

Exit codes:
  0  success
  1  echo-verify ran but some sequences did not vanish
  2  usage error (bad arguments, malformed sequence file)
  3  numerical error (branch cut, linearity check, work budget)

The environment variable BAHT_THREADS caps the number of worker threads.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import __version__
from .coupling import alpha_aht1, alpha_sweep
from .echo import verification_run
from .errors import BudgetError, NumericalError, SequenceParseError, UsageError
from .linalg import plus_state, spin_operators
from .magnus import (
    DEFAULT_BUDGET,
    convergence_margin,
    delta_t_threshold,
    norm_scaling_sweep,
    work_estimate,
)
from .output import RunManifest, write_csv, write_json, write_svg
from .propagation import PerturbationModel, fidelity_sweep, power_spectrum, stroboscopic_series
from .seqfile import load_sequence_file
from .sequences import BUILTIN_NAMES, builtin, toggling_frames

log = logging.getLogger("baht")

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3
NS, US = 1e-9, 1e-6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _thread_cap(requested):
    env = os.environ.get("BAHT_THREADS")
    n = requested if requested is not None else 1
    if env:
        try:
            n = min(n, int(env)) if requested is not None else int(env)
        except ValueError:
            raise UsageError(f"BAHT_THREADS must be an integer, got {env!r}") from None
    return max(1, n)


def _sequence(args, tau_s=None):
    """Built-in name or sequence file; ``tau_s`` overrides the base interval."""
    if args.seq_file:
        seq = load_sequence_file(args.seq_file)
        return seq.with_tau(tau_s) if tau_s else seq
    if args.seq not in BUILTIN_NAMES:
        raise UsageError(f"unknown sequence {args.seq!r}; choose from {', '.join(BUILTIN_NAMES)}")
    return builtin(args.seq, tau_s or 50 * NS, args.repetitions)


def _h0(args, dim):
    if not args.delta_hz > 0:
        raise UsageError("--delta-hz must be positive")
    return args.delta_hz * spin_operators(dim).z


def _log_grid(lo, hi, points):
    if not 0 < lo < hi or points < 2:
        raise UsageError("grid needs 0 < min < max and at least 2 points")
    return np.geomspace(lo, hi, int(points))


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"expected a comma-separated list of integers, got {text!r}") from None


def _params(args):
    skip = {"func", "out", "svg", "verbose"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _finish(args, stem, outputs, extra=None, seq=None):
    params = _params(args)
    if seq is not None:
        params["sequence"] = seq.name
    if extra:
        params.update(extra)
    manifest = RunManifest(args.command, params, int(getattr(args, "seed", 0)), __version__,
                           outputs=[os.path.basename(p) for p in outputs])
    manifest.write(args.out, stem)


def _path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_timeseries(args):
    seq = _sequence(args, args.tau_ns * NS if args.tau_ns else None)
    h0 = _h0(args, seq.dim)
    psi0 = plus_state(args.psi0, seq.dim)
    obs = 2 * spin_operators(seq.dim).x
    series = stroboscopic_series(seq, h0, psi0, obs, args.periods, args.samples_per_period,
                                 args.prop, label="2Sx")
    spec = power_spectrum(series, args.window)
    ts_path, sp_path = _path(args, "timeseries.csv"), _path(args, "spectrum.csv")
    write_csv(ts_path, ["t_seconds", "expectation"], zip(series.times.tolist(), series.values.tolist()))
    write_csv(sp_path, ["freq_hz", "power"], zip(spec.freqs.tolist(), spec.power.tolist()))
    outputs = [ts_path, sp_path]
    if args.svg:
        svg = _path(args, "spectrum.svg")
        write_svg(svg, {args.prop: (spec.freqs / args.delta_hz, spec.power)},
                  title=f"{seq.name} power spectrum", xlabel="f / Delta", ylabel="power")
        outputs.append(svg)
    peak = spec.peak_frequency()
    _finish(args, "timeseries", outputs,
            {"period_s": seq.period, "bin_width_hz": spec.bin_width, "peak_hz": peak}, seq)
    print(f"peak {peak:.6g} Hz = {peak / args.delta_hz:.5f} Delta "
          f"(bin {spec.bin_width:.4g} Hz, 1/sqrt(3) = {1 / np.sqrt(3):.5f})")
    return EXIT_OK


def _t_grid(args, default_lo_dt, default_hi_dt, default_points):
    lo = args.t_min_us * US if args.t_min_us else default_lo_dt / args.delta_hz
    hi = args.t_max_us * US if args.t_max_us else default_hi_dt / args.delta_hz
    return _log_grid(lo, hi, args.points or default_points)


def cmd_fidelity(args):
    seq = _sequence(args)
    h0 = _h0(args, seq.dim)
    grid = _t_grid(args, 1e-3, 0.34, 60)
    rows = fidelity_sweep(seq, h0, _ints(args.orders), grid, plus_state(args.psi0, seq.dim))
    path = _path(args, "fidelity.csv")
    write_csv(path, ["t_seconds", "m", "fidelity"], [(r.t_seconds, r.m, r.fidelity) for r in rows])
    outputs = [path]
    if args.svg:
        svg = _path(args, "fidelity.svg")
        curves = {}
        for r in rows:
            xs, ys = curves.setdefault(f"m={r.m}", ([], []))
            xs.append(r.t_seconds * args.delta_hz)
            ys.append(max(1 - r.fidelity, 1e-17))
        write_svg(svg, curves, title="1 - fidelity", xlabel="Delta t", ylabel="1 - F",
                  logx=True, logy=True)
        outputs.append(svg)
    _finish(args, "fidelity", outputs, seq=seq)
    return EXIT_OK


def cmd_norms(args):
    seq = _sequence(args)
    h0 = _h0(args, seq.dim)
    orders = _ints(args.orders)
    grid = _t_grid(args, 1e-2, 0.3, 12)
    n = sum(seq.units)
    work = max((work_estimate(n, m) for m in orders if m > 2), default=0)
    if work > args.budget:
        raise BudgetError(work, args.budget)
    slow = work > 1e6
    rows = []
    for i, t in enumerate(grid, 1):
        rows.extend(norm_scaling_sweep(seq, h0, orders, [t], args.budget))
        if slow:
            print(f"\r[{i}/{len(grid)}] t = {t:.4g} s", end="", file=sys.stderr, flush=True)
    if slow:
        print(file=sys.stderr)
    path = _path(args, "norms.csv")
    write_csv(path, ["t_seconds", "delta_t", "order", "spectral_norm_hz"],
              [(r.t_seconds, r.t_seconds * args.delta_hz, r.order, r.spectral_norm_hz)
               for r in rows])
    outputs = [path]
    if args.svg:
        svg = _path(args, "norms.svg")
        curves = {}
        for r in rows:
            xs, ys = curves.setdefault(f"m={r.order}", ([], []))
            xs.append(r.t_seconds * args.delta_hz)
            ys.append(r.spectral_norm_hz)
        write_svg(svg, curves, title="Magnus term norms", xlabel="Delta t", ylabel="|Hbar_m| (Hz)",
                  logx=True, logy=True)
        outputs.append(svg)
    _finish(args, "norms", outputs, seq=seq)
    return EXIT_OK


def _perturbation(args, dim):
    axis = {"x": spin_operators(dim).x, "y": spin_operators(dim).y, "z": spin_operators(dim).z}
    op = axis[args.axis]
    if args.pert == "dc":
        return PerturbationModel.dc(0.0, op)
    return PerturbationModel.ac_square(0.0, op)


def cmd_alpha(args):
    seq = _sequence(args)
    h0 = _h0(args, seq.dim)
    pert = _perturbation(args, seq.dim)
    t_max = args.t_max_us * US
    t_min = args.t_min_us * US if args.t_min_us else t_max / args.points
    if not 0 < t_min < t_max or args.points < 2:
        raise UsageError("need 0 < t-min < t-max and at least 2 points")
    grid = np.linspace(t_min, t_max, args.points)
    results = alpha_sweep(seq, h0, pert, grid, threads=_thread_cap(args.threads))
    first = alpha_aht1(seq, pert).alpha
    path = _path(args, "alpha.csv")
    write_csv(path, ["t_seconds", "alpha", "a_x", "a_y", "a_z", "epsilon_hz", "method"],
              [(r.t, r.alpha, *[float(c) for c in r.components], r.epsilon_used, r.method)
               for r in results])
    outputs = [path]
    if args.svg:
        svg = _path(args, "alpha.svg")
        write_svg(svg, {"exact": ([r.t * args.delta_hz for r in results],
                                  [r.alpha for r in results]),
                        "AHT-1": ([grid[0] * args.delta_hz, grid[-1] * args.delta_hz],
                                  [first, first])},
                  title=f"{seq.name} {args.pert} coupling factor", xlabel="Delta t",
                  ylabel="alpha")
        outputs.append(svg)
    alphas = [r.alpha for r in results]
    _finish(args, "alpha", outputs, {"alpha_aht1": first, "epsilon_hz": "auto"}, seq)
    print(f"alpha_aht1 = {first:.10f}; exact alpha in [{min(alphas):.6f}, {max(alphas):.6f}]")
    return EXIT_OK


def cmd_echo_verify(args):
    report = verification_run(args.count, args.M, args.m_max, args.seed,
                              threads=_thread_cap(args.threads), budget=args.budget)
    path = _path(args, "echo_verify.json")
    write_json(path, report)
    _finish(args, "echo_verify", [path])
    status = "all vanish" if not report["failures"] else f"{len(report['failures'])} failures"
    print(f"{report['count']} sequences, n={report['n']}, m<={report['m_max']}: "
          f"max norm {report['max_norm_overall']:.3g} Hz ({status})")
    return EXIT_OK if not report["failures"] else EXIT_VERIFY


def cmd_check_convergence(args):
    seq = _sequence(args)
    h0 = _h0(args, seq.dim)
    t = args.t_us * US
    if not t > 0:
        raise UsageError("--t-us must be positive")
    margin = convergence_margin(toggling_frames(seq.with_period(t), 2 * np.pi * h0))
    bound = delta_t_threshold()
    value = margin.delta_t_equivalent
    if margin.converged_guaranteed:
        print(f"guaranteed ({value:.3f} < {bound:.3f})")
    else:
        print(f"not guaranteed ({value:.3f} >= {bound:.3f})")
    return EXIT_OK


def _add_sequence_args(p, delta=True):
    group = p.add_mutually_exclusive_group()
    group.add_argument("--seq", default="wahuha",
                       help=f"built-in sequence ({', '.join(BUILTIN_NAMES)}); default wahuha")
    group.add_argument("--seq-file", help="YAML sequence file")
    p.add_argument("--repetitions", type=int, default=1, help="periods per built-in sequence")
    if delta:
        p.add_argument("--delta-hz", type=float, default=1e6,
                       help="static field: H0 = delta * S_z, in Hz (default 1e6)")


def _add_output_args(p):
    p.add_argument("--out", default=".", help="output directory (default .)")
    p.add_argument("--svg", action="store_true", help="also write a quick-look SVG plot")


def _add_grid_args(p, points_default=None):
    p.add_argument("--t-min-us", type=float, help="shortest sequence duration, microseconds")
    p.add_argument("--t-max-us", type=float, help="longest sequence duration, microseconds")
    p.add_argument("--points", type=int, default=points_default, help="grid points")


def build_parser():
    parser = _Parser(
        prog="baht",
        description="Average-Hamiltonian versus exact evolution for pulsed spin sequences.",
        epilog="exit codes: 0 success, 1 echo-verify failures, 2 usage error, "
               "3 numerical error. BAHT_THREADS caps worker threads.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"baht {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("timeseries", help="stroboscopic <2 S_x> series and its power spectrum")
    _add_sequence_args(p)
    _add_output_args(p)
    p.add_argument("--tau-ns", type=float, help="base interval in ns (default 50 for built-ins)")
    p.add_argument("--periods", type=int, default=256)
    p.add_argument("--samples-per-period", type=int, default=1)
    p.add_argument("--prop", default="exact", help="exact or aht:m (m <= 7)")
    p.add_argument("--window", choices=["rect", "hann"], default="rect")
    p.add_argument("--psi0", choices=["x", "y", "z"], default="x", help="initial +axis state")
    p.set_defaults(func=cmd_timeseries)

    p = sub.add_parser("fidelity", help="state fidelity of AHT-m against exact evolution")
    _add_sequence_args(p)
    _add_output_args(p)
    _add_grid_args(p)
    p.add_argument("--orders", default="1,3", help="comma-separated AHT orders (default 1,3)")
    p.add_argument("--psi0", choices=["x", "y", "z"], default="x")
    p.set_defaults(func=cmd_fidelity)

    p = sub.add_parser("norms", help="spectral norms of Magnus terms against duration")
    _add_sequence_args(p)
    _add_output_args(p)
    _add_grid_args(p)
    p.add_argument("--orders", default="1,2,3,4,5", help="comma-separated orders")
    p.add_argument("--budget", type=float, default=DEFAULT_BUDGET,
                   help="cap on matrix products per term (order 7 on wahuha needs ~4e6)")
    p.set_defaults(func=cmd_norms)

    p = sub.add_parser("alpha", help="exact coupling factor against duration")
    _add_sequence_args(p)
    _add_output_args(p)
    p.add_argument("--pert", choices=["dc", "ac"], default="dc")
    p.add_argument("--axis", choices=["x", "y", "z"], default="z", help="signal axis")
    p.add_argument("--t-min-us", type=float, help="default t-max / points")
    p.add_argument("--t-max-us", type=float, default=4.0)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--threads", type=int)
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("echo-verify", help="Magnus terms of random rapid-echo sequences")
    _add_output_args(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--M", type=int, default=10, help="echo pairs per sequence (n = 2M)")
    p.add_argument("--m-max", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int)
    p.add_argument("--budget", type=float, default=DEFAULT_BUDGET)
    p.set_defaults(func=cmd_echo_verify)

    p = sub.add_parser("check-convergence", help="sufficient Magnus convergence test")
    _add_sequence_args(p)
    p.add_argument("--t-us", type=float, required=True, help="sequence duration, microseconds")
    p.set_defaults(func=cmd_check_convergence)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SequenceParseError as exc:
        print(f"baht: error: {exc}", file=sys.stderr)
        print(json.dumps(exc.as_dict()), file=sys.stderr)
        return EXIT_USAGE
    except UsageError as exc:
        print(f"baht: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"baht: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
