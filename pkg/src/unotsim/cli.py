"""Command-line front end.

Subcommands: ``ideal`` (process matrix of the error-free channel), ``sweep``
(Monte Carlo magnitude sweeps with CSV/SVG emission), ``qpt`` (reconstructed
process matrices and Bloch in/out pairs), ``verify`` (the property checks).

Angles are degrees at this boundary and radians internally.  Exit codes:
0 success, 1 usage error, 2 verification failure, 3 I/O error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__, experiments, fidanal, verify
from .channels import axis_set, chi_of_channel, make_unot, perturb_generator, perturb_waveplates, sample_generator_errors
from .output import (
    RATIOS_HEADER,
    SLOPES_HEADER,
    STATS_HEADER,
    SWEEP_HEADER,
    ratios_rows,
    slopes_rows,
    stats_rows,
    sweep_rows,
    utc_now,
    write_csv,
    write_line_chart,
    write_manifest,
)
from .pauli import ValidationError, bloch_of
from .tomography import PROBE_LABELS, PROBE_STATES, run_qpt

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VERIFY = 2
EXIT_IO = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


class UsageError(Exception):
    pass


def _resolve_seed(flag_value, fallback: int = 0) -> int:
    """Flag wins, then the UNOTSIM_SEED environment variable, then ``fallback``."""
    if flag_value is not None:
        return flag_value
    env = os.environ.get("UNOTSIM_SEED")
    if env is not None:
        return int(env)
    return fallback


def _format_chi(chi: np.ndarray) -> str:
    labels = ("I", "X", "Y", "Z")
    lines = ["      " + "".join(f"{c:>22}" for c in labels)]
    for i, row_label in enumerate(labels):
        cells = "".join(f"{chi[i, j].real:+.6f}{chi[i, j].imag:+.6f}j   " for j in range(4))
        lines.append(f"  {row_label}   {cells}")
    return "\n".join(lines)


def cmd_ideal(args) -> int:
    axes = axis_set(args.n)
    channel = make_unot(axes)
    chi = chi_of_channel(channel)
    fid = fidanal.fidelity_closed_form(chi)
    dev = fidanal.deviation_closed_form(chi)
    probe = np.array([0.0, 0.0, 1.0])
    from .pauli import density_of

    contraction = bloch_of(channel.apply(density_of(probe)))[2] / probe[2]
    if args.json:
        print(json.dumps({
            "n": args.n,
            "chi_re": chi.real.tolist(),
            "chi_im": chi.imag.tolist(),
            "F": fid,
            "Delta": dev,
            "bloch_contraction": contraction,
        }))
    else:
        print(f"ideal channel, N = {args.n} ({axes.label})")
        print("process matrix (Pauli basis I, X, Y, Z):")
        print(_format_chi(chi))
        print(f"average fidelity F      = {fid:.12f}")
        print(f"fidelity deviation      = {dev:.3e}")
        print(f"Bloch contraction r->cr = {contraction:+.12f}")
    return EXIT_OK


def _sweep_config(args) -> experiments.SweepConfig:
    import dataclasses

    if args.preset:
        config = experiments.preset(args.preset)
    elif args.config:
        with open(args.config, "r", encoding="utf-8") as handle:
            raw = json.load(handle)
        config = experiments.SweepConfig(**raw)
    else:
        config = experiments.SweepConfig(model=args.model or experiments.GENERATOR)
    # explicit flags win over preset or file values
    overrides = {"seed": _resolve_seed(args.seed, fallback=config.seed)}
    if args.model and (args.preset or args.config):
        overrides["model"] = args.model
    if args.grid:
        overrides["magnitudes"] = tuple(args.grid)
    if args.trials is not None:
        overrides["trials"] = args.trials
    if args.shots is not None:
        overrides["shots"] = args.shots
    if args.ns:
        overrides["ns"] = tuple(args.ns)
    return dataclasses.replace(config, **overrides)


def cmd_sweep(args) -> int:
    started = utc_now()
    config = _sweep_config(args)
    result = experiments.run_sweep(config, jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    paths = []

    sweep_path = os.path.join(args.out_dir, "sweep.csv")
    write_csv(sweep_path, SWEEP_HEADER, sweep_rows(result))
    paths.append(sweep_path)
    stats_path = os.path.join(args.out_dir, "stats.csv")
    write_csv(stats_path, STATS_HEADER, stats_rows(result))
    paths.append(stats_path)

    ratio_entries = []
    if result.fits:
        slopes_path = os.path.join(args.out_dir, "slopes.csv")
        write_csv(slopes_path, SLOPES_HEADER, slopes_rows(result))
        paths.append(slopes_path)
        slopes = result.slopes()
        ratio_entries = experiments.ratio_check(slopes)
        ratios_path = os.path.join(args.out_dir, "ratios.csv")
        write_csv(ratios_path, RATIOS_HEADER, ratios_rows(slopes, ratio_entries))
        paths.append(ratios_path)

    if args.svg:
        unit = "deg" if config.model == experiments.WAVEPLATE else "eps0"
        for quantity, attr in (("Delta", "delta_bar"), ("F", "mean_f")):
            series = []
            for n in config.ns:
                cells = [c for c in result.cells if c.n == n]
                series.append(
                    (f"N={n}", [c.magnitude for c in cells], [getattr(c, attr) for c in cells])
                )
            svg_path = os.path.join(args.out_dir, f"sweep_{quantity.lower()}.svg")
            write_line_chart(
                svg_path, series,
                title=f"mean {quantity} vs error bound ({config.model})",
                x_label=f"error bound ({unit})", y_label=f"mean {quantity}",
            )
            paths.append(svg_path)

    manifest_path = os.path.join(args.out_dir, "manifest.json")
    write_manifest(
        manifest_path, "sweep", config, config.seed, started, paths,
        extra={"exact_mode": config.shots == 0, "jobs": args.jobs},
    )

    print(f"sweep complete: model={config.model} trials={config.trials} "
          f"grid={list(config.magnitudes)} ns={list(config.ns)}")
    for cell in result.cells:
        print(f"  N={cell.n} magnitude={cell.magnitude:g}: "
              f"mean F={cell.mean_f:.6f} delta_bar={cell.delta_bar:.6f}")
    for entry in ratio_entries:
        print(f"  S{entry.n}/S{entry.m}: measured {entry.measured:.4f} "
              f"predicted {entry.predicted:.4f} accuracy {100*entry.accuracy:.1f}%")
    print(f"wrote {len(paths)+1} files to {args.out_dir}")
    return EXIT_OK


def cmd_qpt(args) -> int:
    started = utc_now()
    seed = _resolve_seed(args.seed)
    exact = args.shots == 0
    axes = axis_set(args.n)
    os.makedirs(args.out_dir, exist_ok=True)
    state_rows = []
    chi_rows = []
    for trial in range(args.trials):
        stream = experiments.trial_stream(seed, args.model, args.n, 0, trial)
        if args.model == experiments.GENERATOR:
            draw = sample_generator_errors(args.n, args.magnitude, stream)
            channel = perturb_generator(make_unot(axes), draw)
        else:
            channel = perturb_waveplates(axes, math.radians(args.magnitude), stream)
        if exact:
            qpt = run_qpt(channel.apply, shots=1, exact=True)
        else:
            qpt = run_qpt(channel.apply, shots=args.shots, rng=stream.substream(1))
        for label, probe in zip(PROBE_LABELS, PROBE_STATES):
            r_in = bloch_of(probe)
            r_out = bloch_of(channel.apply(probe))
            state_rows.append(
                (args.model, args.n, args.magnitude, trial, label,
                 r_in[0], r_in[1], r_in[2], r_out[0], r_out[1], r_out[2])
            )
        for i in range(4):
            for j in range(4):
                chi_rows.append(
                    (args.model, args.n, args.magnitude, trial, i, j,
                     float(qpt.chi_tp[i, j].real), float(qpt.chi_tp[i, j].imag))
                )
    states_path = os.path.join(args.out_dir, "qpt_states.csv")
    write_csv(
        states_path,
        ("model", "N", "magnitude", "trial", "probe",
         "in_x", "in_y", "in_z", "out_x", "out_y", "out_z"),
        state_rows,
    )
    chi_path = os.path.join(args.out_dir, "qpt_chi.csv")
    write_csv(
        chi_path,
        ("model", "N", "magnitude", "trial", "row", "col", "re", "im"),
        chi_rows,
    )
    manifest_path = os.path.join(args.out_dir, "manifest.json")
    write_manifest(
        manifest_path, "qpt",
        {"model": args.model, "n": args.n, "magnitude": args.magnitude,
         "shots": args.shots, "trials": args.trials},
        seed, started, [states_path, chi_path],
        extra={"exact_mode": exact},
    )
    print(f"qpt complete: N={args.n} model={args.model} magnitude={args.magnitude:g} "
          f"trials={args.trials} shots={'exact' if exact else args.shots}")
    print(f"wrote qpt_states.csv, qpt_chi.csv, manifest.json to {args.out_dir}")
    return EXIT_OK


def cmd_verify(args) -> int:
    names = args.only if args.only else None
    results = verify.run_checks(names, scaling_trials=args.trials)
    failed = [r for r in results if not r.passed]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"[{status}] {r.name}: margin {r.margin:.3f} of bound; {r.detail}")
    if failed:
        print(f"{len(failed)} check(s) failed: {[r.name for r in failed]}")
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="unotsim", description=__doc__)
    parser.add_argument("--version", action="version", version=f"unotsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_ideal = sub.add_parser("ideal", help="process matrix and figures of merit of the error-free channel")
    p_ideal.add_argument("--n", type=int, required=True, help="axis count (3, 4, 6 or 8)")
    p_ideal.add_argument("--json", action="store_true", help="machine-readable output")
    p_ideal.set_defaults(func=cmd_ideal)

    p_sweep = sub.add_parser("sweep", help="Monte Carlo magnitude sweep with CSV output")
    p_sweep.add_argument("--preset", choices=sorted(experiments.PRESETS), help="named configuration")
    p_sweep.add_argument("--config", help="JSON config file (flags win over file values)")
    p_sweep.add_argument("--model", choices=(experiments.GENERATOR, experiments.WAVEPLATE),
                         default=None)
    p_sweep.add_argument("--ns", type=int, nargs="+", help="axis counts (default 3 4 6 8)")
    p_sweep.add_argument("--grid", type=float, nargs="+",
                         help="error bounds (eps0, or degrees for the waveplate model)")
    p_sweep.add_argument("--trials", type=int, default=None, help="trials per grid point")
    p_sweep.add_argument("--shots", type=int, default=None,
                         help="tomography shots per setting; 0 = exact mode (default)")
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p_sweep.add_argument("--out-dir", default="sweep-out")
    p_sweep.add_argument("--svg", action="store_true", help="also draw SVG line charts")
    p_sweep.set_defaults(func=cmd_sweep)

    p_qpt = sub.add_parser("qpt", help="per-trial reconstructed process matrices and Bloch pairs")
    p_qpt.add_argument("--n", type=int, required=True)
    p_qpt.add_argument("--model", choices=(experiments.GENERATOR, experiments.WAVEPLATE),
                       default=experiments.WAVEPLATE)
    p_qpt.add_argument("--magnitude", type=float, default=0.0,
                       help="error bound (eps0, or degrees for the waveplate model)")
    p_qpt.add_argument("--shots", type=int, default=0, help="0 = exact expectations")
    p_qpt.add_argument("--trials", type=int, default=1)
    p_qpt.add_argument("--seed", type=int, default=None)
    p_qpt.add_argument("--out-dir", default="qpt-out")
    p_qpt.set_defaults(func=cmd_qpt)

    p_verify = sub.add_parser("verify", help="run the property checks and report margins")
    p_verify.add_argument("--only", action="append", choices=sorted(verify.CHECKS),
                          help="run a single named check (repeatable)")
    p_verify.add_argument("--trials", type=int, default=10_000,
                          help="Monte Carlo trials for the scaling check")
    p_verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
