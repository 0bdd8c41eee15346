"""Command-line front end: ``simulate``, ``check`` and ``plan``.

Exit codes: 0 ok, 1 configuration error, 2 numerical divergence,
3 design check failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time
from pathlib import Path

from . import __version__
from .errors import ConfigError, NumericalDivergence
from .experiments import ExperimentConfig, preset_names
from .lissajous import LissajousSpec, plan_frequencies, required_N, scan_resolution
from .pr_design import check_positive_real, check_theorem1
from .reference import reference_is_recoverable
from .sim_loop import simulate_axis, simulate_dual
from .svgplot import axis_figure, error_figure, trajectory_figure
from .tf_algebra import tf_mul

EXIT_OK, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_CHECK = 0, 1, 2, 3

log = logging.getLogger("quantrack")


def _load(args) -> ExperimentConfig:
    if args.config and args.preset:
        raise ConfigError("give either --config or --preset, not both")
    if args.preset:
        cfg = ExperimentConfig.preset(args.preset)
    elif args.config:
        cfg = ExperimentConfig.load(args.config)
    else:
        raise ConfigError("one of --config or --preset is required")
    if getattr(args, "dt", None) is not None or getattr(args, "t_end", None) is not None:
        cfg = cfg.with_overrides(dt=args.dt, t_end=args.t_end)
    return cfg


def _design_checks(cfg: ExperimentConfig, setups, out=print) -> tuple[bool, dict]:
    """Print and collect the loop and reference checks for every axis."""
    all_ok = True
    verdicts = {}
    for name, s in setups.items():
        loop_h = tf_mul(s.controller, s.plant)
        checked = s.target if s.target is not None else loop_h
        label = "designed loop H" if s.target is not None else "loop C*G"
        rep = check_theorem1(checked, s.loop.reference)
        rec = reference_is_recoverable(s.loop.reference, s.loop.quantizer)
        out(f"axis {name}: {label} = {checked}")
        out(rep.summary())
        if s.target is not None:
            pad = check_positive_real(loop_h)
            out(f"  padded loop C*G positive real: {'yes' if pad.ok else 'no'}"
                f" (min Re = {pad.min_re:.3e} at w = {pad.omega_at_min:.6g}); informational")
        out(f"  reference recoverable: {'PASS' if rec.ok else 'FAIL'}"
            f" (p = {rec.p}, need {rec.required}, rank {rec.rank}) {rec.reason}")
        ok = rep.verdict and rec.ok
        all_ok &= ok
        verdicts[name] = {
            "theorem1": rep.verdict,
            "integrator": rep.has_integrator,
            "resonant_pairs": all(rep.resonant_pairs_ok.values()),
            "remaining_poles_stable": rep.remaining_poles_stable,
            "positive_real": rep.positive_real.ok,
            "reference_recoverable": rec.ok,
            "crossings_per_period": rec.p,
        }
    return all_ok, verdicts


def cmd_simulate(args) -> int:
    cfg = _load(args)
    setups = cfg.build()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    ok, verdicts = _design_checks(cfg, setups, out=log.info)
    if not ok:
        log.warning("design checks did not all pass; simulating anyway "
                    "(the conditions are sufficient, not necessary)")
    t0 = time.perf_counter()
    try:
        if len(setups) == 2:
            dual = simulate_dual(setups["x"].loop, setups["y"].loop)
            traces = {"x": dual.x_axis, "y": dual.y_axis}
        else:
            (name, s), = setups.items()
            dual = None
            traces = {name: simulate_axis(s.loop, axis=name)}
    except NumericalDivergence as exc:
        print(f"error: numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    runtime = time.perf_counter() - t0
    files = []
    for name, tr in traces.items():
        files.append(tr.to_csv(out_dir / f"trace_{name}.csv"))
        files.append(axis_figure(tr, title=f"{name}-axis").save(out_dir / f"axis_{name}.svg"))
    if dual is not None:
        files.append(dual.summary_csv(out_dir / "summary.csv"))
        files.append(trajectory_figure(dual, title="trajectory").save(out_dir / "trajectory.svg"))
        files.append(error_figure(dual).save(out_dir / "euclidean_error.svg"))
    stats = {
        name: {
            "events": tr.events,
            "t_last_active": tr.t_last_active,
            "settle_time_recorded": tr.settle_time(),
            "active_time_final_second": tr.active_time(float(tr.t[-1]) - 1.0),
            "final_abs_error": float(abs(tr.e[-1])),
        }
        for name, tr in traces.items()
    }
    manifest = {
        "version": __version__,
        "config": cfg.to_dict(),
        "runtime_s": runtime,
        "outputs": [p.name for p in files],
        "checks": verdicts,
        "stats": stats,
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(files) + 1} files to {out_dir} (simulation took {runtime:.1f} s)")
    if not ok:
        print("warning: design checks failed, see manifest.json", file=sys.stderr)
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _load(args)
    ok, _ = _design_checks(cfg, cfg.build())
    print("all checks passed" if ok else "one or more checks FAILED")
    return EXIT_OK if ok else EXIT_CHECK


def cmd_plan(args) -> int:
    for name in ("ax", "ay", "f", "h_target"):
        v = getattr(args, name)
        if v is not None and not v > 0:
            raise ConfigError(f"--{name.replace('_', '-')} must be positive")
    if args.N is not None and args.N < 1:
        raise ConfigError("--N must be a positive integer")
    if args.N is None and args.h_target is None:
        raise ConfigError("give --N or --h-target")
    N = args.N if args.N is not None else required_N(args.ax, args.ay, args.h_target)
    spec = LissajousSpec(args.x0, args.y0, args.ax, args.ay, N, args.f)
    wx, wy, period = plan_frequencies(spec)
    h = scan_resolution(spec)
    print(f"N          = {N}")
    print(f"omega_x    = {wx:.6f} rad/s  ({wx / (2 * math.pi):.6g} Hz)")
    print(f"omega_y    = {wy:.6f} rad/s  ({wy / (2 * math.pi):.6g} Hz)")
    print(f"ratio      = {2 * N}/{2 * N - 1}")
    print(f"h          = {h:.6g} um")
    print(f"frame time = {1 / args.f:.6g} s, motion period = {period:.6g} s")
    if args.write_config:
        doc = ExperimentConfig.preset("fig4_lissajous").to_dict()
        doc["trajectory"] = {"x0": args.x0, "y0": args.y0, "ax": args.ax, "ay": args.ay, "N": N, "f": args.f}
        ExperimentConfig.from_dict(doc)
        Path(args.write_config).write_text(json.dumps(doc, indent=2) + "\n")
        print(f"wrote {args.write_config}")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are configuration errors; exit code 2 is reserved for divergence
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quantrack", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        sp.add_argument("--config", metavar="PATH")
        sp.add_argument("--preset", choices=preset_names())
        sp.add_argument("--dt", type=float)
        sp.add_argument("--t-end", type=float, dest="t_end")

    sp = sub.add_parser("simulate", help="run an experiment and write CSV/SVG output")
    source(sp)
    sp.add_argument("--out", metavar="DIR", default="out")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check", help="verify loop and reference conditions")
    source(sp)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("plan", help="plan Lissajous frequencies and resolution")
    sp.add_argument("--ax", type=float, default=1.0)
    sp.add_argument("--ay", type=float, default=1.0)
    sp.add_argument("--N", type=int)
    sp.add_argument("--h-target", type=float, dest="h_target")
    sp.add_argument("--f", type=float, default=1.0)
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--y0", type=float, default=0.0)
    sp.add_argument("--write-config", metavar="PATH")
    sp.set_defaults(func=cmd_plan)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
