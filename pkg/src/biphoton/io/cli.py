"""Command line driver.

Four subcommands cover the full workflow::

    biphoton simulate    --config run.yaml --out rundir [--seed N]
                         [--subset-size N] [--contrast-threshold X]
    biphoton reconstruct --events A.bin --events-swapped B.bin --out outdir
                         [--subset-size N] [--contrast-threshold X] [--degree D]
    biphoton analyze     --state outdir [--out dir]
    biphoton report      --in outdir

``simulate`` writes one event log per interferometer configuration plus
pooled interferograms. ``reconstruct`` takes the two logs (acquisition
parameters default to the values recorded in their headers), writes the
full report, and prints the headline numbers. ``analyze`` recomputes the
mode structure and views of a saved state into ``<state>/analysis`` (no
subset error bars on this path). ``report`` pretty-prints a previously
written report directory.

Every command exits 0 on success; any validation failure prints the
violated rule to stderr and exits 2.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from ..errors import BiphotonError
from ..model import schmidt_decompose, effective_schmidt_rank, modulus_only, to_time_frequency, VIEW_KINDS
from ..reconstruct import AnalysisSummary
from .config import load_config
from .eventlog import read_event_header, read_events
from .pipeline import EVENT_FILES, apply_overrides, run_reconstruct, run_simulate
from .report import emit_analysis_report, load_state

__all__ = ["main", "build_parser"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="biphoton",
        description="Simulate and reconstruct two-photon spectral states "
        "measured with a spectral-shearing interferometer.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="simulate both configurations to event logs")
    sim.add_argument("--config", required=True, help="run configuration file (YAML)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument("--seed", type=int, default=None, help="override acquisition.seed")
    sim.add_argument("--subset-size", type=int, default=None,
                     help="override acquisition.subset_size (recorded in the logs)")
    sim.add_argument("--contrast-threshold", type=float, default=None,
                     help="override acquisition.contrast_threshold (recorded in the logs)")

    rec = sub.add_parser("reconstruct", help="reconstruct a state from two event logs")
    rec.add_argument("--events", required=True,
                     help="event log of the signal-sheared configuration")
    rec.add_argument("--events-swapped", required=True,
                     help="event log of the idler-sheared configuration")
    rec.add_argument("--out", required=True, help="report directory")
    rec.add_argument("--subset-size", type=int, default=None,
                     help="events per gated subset (default: from the log headers)")
    rec.add_argument("--contrast-threshold", type=float, default=None,
                     help="contrast gate as a fraction of the 0.5 scale "
                     "(default: from the log headers)")
    rec.add_argument("--degree", type=int, default=2, choices=(2, 3),
                     help="polynomial degree of the fitted phase")

    ana = sub.add_parser("analyze", help="mode structure and views of a saved state")
    ana.add_argument("--state", required=True,
                     help="directory holding state_real.tsv / state_imag.tsv")
    ana.add_argument("--out", default=None,
                     help="output directory (default: <state>/analysis)")

    rep = sub.add_parser("report", help="print a report directory's headline numbers")
    rep.add_argument("--in", dest="in_dir", required=True, help="report directory")
    return parser


def _header_defaults(path, subset_size, contrast_threshold) -> tuple[int, float]:
    header = read_event_header(path)
    if subset_size is None:
        subset_size = int(header.get("subset_size", 5000))
    if contrast_threshold is None:
        contrast_threshold = float(header.get("contrast_threshold", 0.20))
    return subset_size, contrast_threshold


def _cmd_simulate(args) -> int:
    cfg = apply_overrides(
        load_config(args.config),
        seed=args.seed,
        subset_size=args.subset_size,
        contrast_threshold=args.contrast_threshold,
    )
    streams = run_simulate(cfg, out_dir=args.out)
    for stream in streams:
        name = EVENT_FILES[stream.settings.sheared_photon]
        print(f"{stream.configuration}: {len(stream)} events -> "
              f"{os.path.join(args.out, name)}")
    return 0


def _cmd_reconstruct(args) -> int:
    subset_size, threshold = _header_defaults(
        args.events, args.subset_size, args.contrast_threshold
    )
    events_a = read_events(args.events)
    events_b = read_events(args.events_swapped)
    result = run_reconstruct(
        events_a, events_b, subset_size, threshold, degree=args.degree,
        out_dir=args.out,
    )
    print(f"phi11 = {result.phi11:.6g} +- {result.phi11_sigma:.3g} fs^2"
          + (" (configurations inconsistent)" if result.inconsistent else ""))
    print(f"k_full = {result.k_full:.6g} +- {result.k_full_sigma:.3g}")
    print(f"k_modulus = {result.k_modulus:.6g} +- {result.k_modulus_sigma:.3g}")
    print(f"report written to {args.out}")
    return 0


def _cmd_analyze(args) -> int:
    state = load_state(args.state)
    spectrum = schmidt_decompose(state)
    values = spectrum.values[:20]
    n = values.size
    summary = AnalysisSummary(
        schmidt_values=np.pad(values, (0, 20 - n)),
        schmidt_sigmas=np.full(20, float("nan")),
        k_full=effective_schmidt_rank(spectrum),
        k_full_sigma=float("nan"),
        k_modulus=effective_schmidt_rank(schmidt_decompose(modulus_only(state))),
        k_modulus_sigma=float("nan"),
        views=tuple(to_time_frequency(state, kind) for kind in VIEW_KINDS),
    )
    out_dir = args.out if args.out is not None else os.path.join(args.state, "analysis")
    emit_analysis_report(out_dir, summary)
    print(f"k_full = {summary.k_full:.6g}, k_modulus = {summary.k_modulus:.6g}")
    print(f"analysis written to {out_dir}")
    return 0


def _cmd_report(args) -> int:
    fit_path = os.path.join(args.in_dir, "fit_summary.txt")
    schmidt_path = os.path.join(args.in_dir, "schmidt_values.tsv")
    with open(fit_path, "r", encoding="utf-8") as fh:
        pairs = dict(
            line.strip().split("=", 1) for line in fh if "=" in line
        )
    print("fitted phase coefficients (fs^2):")
    for prefix in ("signal_sheared", "idler_sheared", "combined"):
        keys = [k for k in pairs if k.startswith(prefix + ".phi")]
        for key in keys:
            if key.endswith("_sigma_fs2"):
                continue
            sigma = pairs.get(key.replace("_fs2", "_sigma_fs2"), "nan")
            name = key.split(".", 1)[1].replace("_fs2", "")
            print(f"  {prefix:15s} {name:6s} = {pairs[key]} +- {sigma}")
    print(f"consistent: {pairs.get('combined.inconsistent', '?') == 'false'}")
    print(f"k_full    = {pairs.get('k_full')} +- {pairs.get('k_full_sigma')}")
    print(f"k_modulus = {pairs.get('k_modulus')} +- {pairs.get('k_modulus_sigma')}")
    if os.path.exists(schmidt_path):
        print("leading Schmidt values:")
        with open(schmidt_path, "r", encoding="utf-8") as fh:
            next(fh)
            for line in [next(fh, "") for _ in range(5)]:
                if not line.strip():
                    continue
                idx, value, sigma = line.split("\t")
                print(f"  mode {idx}: {float(value):.6g} +- {float(sigma):.3g}")
    return 0


_COMMANDS = {
    "simulate": _cmd_simulate,
    "reconstruct": _cmd_reconstruct,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except BiphotonError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
