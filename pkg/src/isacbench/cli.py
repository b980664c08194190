"""Command-line front end: simulate, detect, bench, external-detect."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .bench import (
    DetectorSpec,
    ScenarioConfig,
    export_results,
    load_scenario,
    run_detector,
    run_scenario,
    trial_rng,
)
from .cfar import CfarConfig, read_detections, write_detections
from .channel import read_targets, sample_targets, write_targets
from .csi import save_csi, synthesize_csi
from .metrics import AssociationGate, score_curve, associate
from .periodogram import (
    WindowSpec,
    apply_window,
    compute_periodogram,
    load_periodogram,
    make_window,
    save_periodogram,
)
from .pipeline import simulate_csi_full


def _load_scenario_arg(path) -> ScenarioConfig:
    if path is None:
        return ScenarioConfig()
    return load_scenario(path)


def cmd_simulate(args) -> int:
    scn = _load_scenario_arg(args.config)
    if args.seed is not None:
        scn = replace(scn, base_seed=args.seed)
    rng = trial_rng(scn.base_seed, 0, 0, 0)
    radio = scn.radio
    profile = scn.profiles[0]
    targets = sample_targets(rng, scn.sampling)

    use_full = scn.pipeline == "full" or profile.pa_enabled or profile.quantizer_bits < 64
    if use_full:
        H = simulate_csi_full(targets, args.snr_db, radio, rng, profile=profile)
    else:
        H = synthesize_csi(targets, args.snr_db, radio, rng)

    out = Path(args.out)
    kind = args.kind or ("periodogram" if out.suffix == ".isacper" else "csi")
    if kind == "csi":
        save_csi(H, out)
    else:
        w_rows = make_window(WindowSpec.parse(args.window), radio.num_subcarriers)
        w_cols = make_window(WindowSpec.parse(args.window), radio.num_symbols)
        save_periodogram(compute_periodogram(apply_window(H, w_rows, w_cols)), out)
    write_targets(targets, out.with_suffix(out.suffix + ".targets.csv"))
    print(f"wrote {kind} ({len(targets)} targets) to {out}")
    return 0


def _cfar_config_from_args(args) -> CfarConfig:
    kw = dict(
        pfa=args.pfa,
        guard=tuple(args.guard),
        reference=tuple(args.reference),
        censor_strongest=args.censor_strongest,
        censor_weakest=args.censor_weakest,
        num_subwindows=args.subwindows,
    )
    if args.os_rank is not None:
        kw["os_rank"] = args.os_rank
    return CfarConfig(**kw)


def cmd_detect(args) -> int:
    p = load_periodogram(args.input)
    if args.detector in ("cs", "os") and args.censor_strongest == 0 \
            and args.censor_weakest == 0 and args.os_rank is None:
        spec = DetectorSpec.default(
            args.detector, pfa=args.pfa, guard=tuple(args.guard),
            reference=tuple(args.reference), num_subwindows=args.subwindows,
        )
    else:
        spec = DetectorSpec(args.detector, _cfar_config_from_args(args))
    if args.detector == "global" and args.noise_power is not None:
        from .cfar import detect_global

        dets = detect_global(p, args.pfa, args.noise_power)
    else:
        dets = run_detector(spec, p)
    write_detections(dets, args.out)
    if args.figure:
        from .report import render_periodogram

        render_periodogram(p, args.figure, detections=dets)
    print(f"{len(dets)} detections -> {args.out}")
    return 0


def cmd_bench(args) -> int:
    scn = _load_scenario_arg(args.config)
    kind = args.scenario.replace("-", "_")
    if scn.kind != kind:
        scn = replace(scn, kind=kind)
    if args.trials is not None:
        scn = replace(scn, trials_per_point=args.trials)
    if args.seed is not None:
        scn = replace(scn, base_seed=args.seed)
    result = run_scenario(scn, workers=args.workers)
    paths = export_results(result, args.out_dir)
    written = [paths["csv"], paths["manifest"]]
    if not args.no_figures:
        from .report import render_figures

        written.extend(render_figures(result, args.out_dir))
    for path in written:
        print(f"wrote {path}")
    return 0


def _gate_for(p, args) -> AssociationGate:
    gr = args.gate_range if args.gate_range else 2.0 * p.range_per_bin_m
    gv = args.gate_vel if args.gate_vel else 2.0 * p.velocity_per_bin_mps
    return AssociationGate(range_halfwidth_m=gr, velocity_halfwidth_mps=gv)


def cmd_external_detect(args) -> int:
    """Score third-party detections against the periodograms' ground truth."""
    in_dir = Path(args.input_dir)
    per_files = sorted(in_dir.glob("*.isacper"))
    if not per_files:
        print(f"no *.isacper files in {in_dir}", file=sys.stderr)
        return 2
    det_path = Path(args.detections)
    scores = []
    for pf in per_files:
        truth = read_targets(pf.with_suffix(pf.suffix + ".targets.csv"))
        if det_path.is_dir():
            dets = read_detections(det_path / (pf.stem + ".csv"))
        else:
            dets = read_detections(det_path)
        p = load_periodogram(pf)
        scores.append(associate(dets, truth, _gate_for(p, args)))
    agg = score_curve(scores)
    summary = {
        "images": len(scores),
        "p_md": agg.p_md,
        "p_md_ci": agg.p_md_ci,
        "fa_mean": agg.fa_mean,
        "f1": agg.f1,
        "f1_ci": agg.f1_ci,
    }
    print(json.dumps(summary, indent=2))
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(summary, fh, indent=2)
            fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="isacbench",
        description="OFDM ISAC radar simulator and CFAR peak-detection benchmark",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="emit one CSI matrix or periodogram")
    sim.add_argument("--config", help="scenario YAML file")
    sim.add_argument("--out", required=True)
    sim.add_argument("--kind", choices=["csi", "periodogram"])
    sim.add_argument("--window", default="rectangular")
    sim.add_argument("--snr-db", type=float, default=20.0)
    sim.add_argument("--seed", type=int)
    sim.set_defaults(func=cmd_simulate)

    det = sub.add_parser("detect", help="run a CFAR detector on a periodogram file")
    det.add_argument("--input", required=True, help="*.isacper periodogram file")
    det.add_argument("--detector", required=True, choices=["global", "ca", "cs", "os"])
    det.add_argument("--pfa", type=float, default=1e-4)
    det.add_argument("--guard", type=int, nargs=2, default=[2, 2], metavar=("GR", "GD"))
    det.add_argument("--reference", type=int, nargs=2, default=[6, 6], metavar=("WR", "WD"))
    det.add_argument("--censor-strongest", type=int, default=0)
    det.add_argument("--censor-weakest", type=int, default=0)
    det.add_argument("--subwindows", type=int, default=0)
    det.add_argument("--os-rank", type=int)
    det.add_argument("--noise-power", type=float, help="for --detector global")
    det.add_argument("--out", required=True, help="detections CSV path")
    det.add_argument("--figure", help="optional PNG of the image with detections")
    det.set_defaults(func=cmd_detect)

    bench = sub.add_parser("bench", help="run a Monte Carlo campaign")
    bench.add_argument("scenario", choices=["noise-limited", "resolution-limited"])
    bench.add_argument("--config", help="scenario YAML file")
    bench.add_argument("--out-dir", required=True)
    bench.add_argument("--trials", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--no-figures", action="store_true")
    bench.set_defaults(func=cmd_bench)

    ext = sub.add_parser(
        "external-detect",
        help="score a third-party detector's CSV output against ground truth",
    )
    ext.add_argument("--input-dir", required=True,
                     help="directory of *.isacper files with .targets.csv sidecars")
    ext.add_argument("--detections", required=True,
                     help="detections CSV file, or a directory of per-image CSVs")
    ext.add_argument("--score", action="store_true",
                     help="compute p_MD/FA/F1 (default behavior)")
    ext.add_argument("--gate-range", type=float, help="gate half-width in meters")
    ext.add_argument("--gate-vel", type=float, help="gate half-width in m/s")
    ext.add_argument("--out", help="optional JSON summary path")
    ext.set_defaults(func=cmd_external_detect)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
