"""Command-line interface: track, eval, simulate, plot.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import TrackerConfig, apply_overrides, parse_config
from .errors import ConfigurationError, DataError, ParseError
from .geometry import format_calibration
from .kitti_io import parse_rows
from .metrics import evaluate
from .pipeline import run_sequence, write_kitti
from .simulator import DistortionSpec, degrade, generate_ground_truth, parse_scenario

USAGE_ERROR = 1
DATA_ERROR = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_ERROR, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(prog="fusetrack",
                     description="Camera+LiDAR multi-object tracker and tooling")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    track = sub.add_parser("track", help="run the tracker over detection files")
    track.add_argument("--det2d", type=Path, help="2D detection file")
    track.add_argument("--det3d", type=Path, help="3D detection file")
    track.add_argument("--calib", type=Path, help="calibration file")
    track.add_argument("--config", type=Path, help="key = value configuration file")
    track.add_argument("--out", type=Path, required=True, help="KITTI-format output file")
    track.add_argument("--mono", choices=("2d", "3d"),
                       help="declare mono-detector mode and which file drives it")
    track.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="KEY=VALUE", help="override a configuration value")

    ev = sub.add_parser("eval", help="CLEAR-MOT evaluation of a result file")
    ev.add_argument("--gt", type=Path, required=True)
    ev.add_argument("--hyp", type=Path, required=True)
    ev.add_argument("--iou-gate", type=float, default=0.5)
    ev.add_argument("--category", default=None)
    ev.add_argument("--max-occlusion", type=int, default=0,
                    help="ignore ground truth rows more occluded than this")

    sim = sub.add_parser("simulate", help="generate a synthetic sequence")
    sim.add_argument("--scenario", type=Path, required=True)
    sim.add_argument("--seed", type=int, required=True)
    sim.add_argument("--dropout2d", type=float, default=0.0)
    sim.add_argument("--dropout3d", type=float, default=0.0)
    sim.add_argument("--jitter2d", type=float, default=0.0)
    sim.add_argument("--jitter3d", type=float, default=0.0)
    sim.add_argument("--out-dir", type=Path, required=True)

    plot = sub.add_parser("plot", help="emit static trajectory/overlay figures")
    plot.add_argument("--hyp", type=Path, required=True)
    plot.add_argument("--gt", type=Path)
    plot.add_argument("--out", type=Path, required=True)
    plot.add_argument("--every", type=int, default=50,
                      help="frame overlay period; 0 disables overlays")
    return parser


def _load_config(args) -> TrackerConfig:
    config = TrackerConfig()
    if getattr(args, "config", None):
        config = parse_config(args.config.read_text(), config)
    return apply_overrides(config, args.overrides)


def _cmd_track(args) -> int:
    if args.det2d is None and args.det3d is None:
        print("fusetrack track: need --det2d and/or --det3d", file=sys.stderr)
        return USAGE_ERROR
    if (args.mono == "2d" and args.det2d is None) or (args.mono == "3d" and args.det3d is None):
        print(f"fusetrack track: --mono {args.mono} needs the matching detection file",
              file=sys.stderr)
        return USAGE_ERROR
    det2d = args.det2d if args.mono != "3d" else None
    det3d = args.det3d if args.mono != "2d" else None
    config = _load_config(args)
    results, manifest = run_sequence(det2d, det3d, args.calib, config,
                                     sequence_name=args.out.stem)
    args.out.write_text(write_kitti(results))
    manifest_path = args.out.with_name(args.out.name + ".manifest.json")
    manifest_path.write_text(manifest.to_json())
    print(f"{manifest.total_frames} frames, {manifest.tracks_created} tracks, "
          f"tracker time {manifest.total_seconds:.3f}s -> {args.out}")
    return 0


def _cmd_eval(args) -> int:
    gt = parse_rows(args.gt.read_text())
    hyp = parse_rows(args.hyp.read_text())
    score = evaluate(gt, hyp, iou_gate=args.iou_gate, category=args.category,
                     max_occlusion=args.max_occlusion)
    print(score.summary())
    return 0


def _cmd_simulate(args) -> int:
    scenario = parse_scenario(args.scenario.read_text())
    spec = DistortionSpec(dropout2d=args.dropout2d, dropout3d=args.dropout3d,
                          jitter2d=args.jitter2d, jitter3d=args.jitter3d,
                          seed=args.seed)
    gt = generate_ground_truth(scenario)
    det2d, det3d = degrade(gt, spec)
    out = args.out_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "det2d.txt").write_text(det2d)
    (out / "det3d.txt").write_text(det3d)
    (out / "calib.txt").write_text(format_calibration(scenario.calib))
    from .kitti_io import format_rows
    (out / "gt.txt").write_text(format_rows(gt.to_rows()))
    print(f"wrote det2d/det3d/calib/gt under {out}")
    return 0


def _cmd_plot(args) -> int:
    from .plotting import render_plots
    hyp = parse_rows(args.hyp.read_text())
    gt = parse_rows(args.gt.read_text()) if args.gt else None
    written = render_plots(hyp, gt, args.out, every=args.every)
    print(f"wrote {len(written)} figures under {args.out}")
    return 0


_COMMANDS = {
    "track": _cmd_track,
    "eval": _cmd_eval,
    "simulate": _cmd_simulate,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE_ERROR
    try:
        return _COMMANDS[args.command](args)
    except (ParseError, ConfigurationError, DataError, ValueError, OSError) as exc:
        print(f"fusetrack {args.command}: {exc}", file=sys.stderr)
        return DATA_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
