"""Command-line interface.

Exit codes: 0 success, 1 invalid input values, 2 parse error (including
bad flags), 3 results not aligned with the dataset, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

from . import dataset_io, redetect, simtrackers, speed
from .core import DEFAULT_THRESHOLDS, Box
from .errors import AlignmentError, ParseError
from .protocol import evaluate_tracker
from .report import emit_report, fmt

EXIT_OK, EXIT_INVALID, EXIT_PARSE, EXIT_ALIGN, EXIT_IO = 0, 1, 2, 3, 4


@dataclass(frozen=True)
class Config:
    n_thresholds: int = DEFAULT_THRESHOLDS
    redetect_iou: float = redetect.DEFAULT_IOU
    redetect_frames: int = redetect.DEFAULT_FRAMES
    output_dir: Path = Path(".")
    jobs: int = 1

    def __post_init__(self) -> None:
        if self.n_thresholds < 2:
            raise ValueError(f"--thresholds must be at least 2, got {self.n_thresholds}")
        if not 0.0 < self.redetect_iou <= 1.0:
            raise ValueError(f"--iou must lie in (0, 1], got {self.redetect_iou}")
        if self.redetect_frames <= redetect.STATIC_FRAMES:
            raise ValueError(f"--frames must exceed {redetect.STATIC_FRAMES}, got {self.redetect_frames}")
        if self.jobs < 1:
            raise ValueError(f"--jobs must be at least 1, got {self.jobs}")


def _parse_box(text: str) -> Box:
    frames = dataset_io.parse_groundtruth(text, source="--target")
    if len(frames) != 1 or frames[0].region is None:
        raise ParseError(f"--target must be a single x,y,w,h box, got {text!r}")
    return frames[0].region


def _parse_overlaps(text: str):
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise ParseError(f"--overlap must be a number or comma-separated numbers, got {text!r}") from None
    return values[0] if len(values) == 1 else values


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = Config(n_thresholds=args.thresholds, output_dir=args.out, jobs=args.jobs)
    dataset = dataset_io.load_dataset(args.dataset, jobs=cfg.jobs)
    runs = dataset_io.load_results(Path(args.results) / args.tracker, dataset, jobs=cfg.jobs)
    report = evaluate_tracker(dataset, runs, cfg.n_thresholds, tracker_name=args.tracker, jobs=cfg.jobs)
    emit_report(report, cfg.output_dir)
    print(f"{args.tracker}: f_star={fmt(report.f_star)} tau_star={fmt(report.tau_star)} "
          f"sequences={len(dataset)}")
    return EXIT_OK


def cmd_redetect_gen(args: argparse.Namespace) -> int:
    cfg = Config(redetect_frames=args.frames, output_dir=args.out, jobs=args.jobs)
    image = redetect.read_ppm(args.image)
    target = _parse_box(args.target)
    frames, truth = redetect.generate_redetection_sequence(image, target, cfg.redetect_frames)
    redetect.write_redetection_sequence(cfg.output_dir, frames, truth, jobs=cfg.jobs)
    moved = truth[-1].region
    print(f"wrote {len(frames)} frames {frames[0].width}x{frames[0].height} to {cfg.output_dir}; "
          f"target moves to {moved.x:g},{moved.y:g} at frame {redetect.STATIC_FRAMES + 1}")
    return EXIT_OK


def cmd_redetect_judge(args: argparse.Namespace) -> int:
    cfg = Config(redetect_iou=args.iou, output_dir=args.out, jobs=args.jobs)
    dataset = dataset_io.load_dataset(args.dataset, jobs=cfg.jobs)
    runs = dataset_io.load_results(Path(args.results) / args.tracker, dataset, jobs=cfg.jobs)
    result = redetect.redetect_campaign({t.name: t.frames for t in dataset}, runs, cfg.redetect_iou)
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    with open(cfg.output_dir / "redetect.csv", "w", encoding="utf-8", newline="") as fh:
        fh.write(redetect.campaign_csv(result))
    mean = "-" if result.mean_frames is None else fmt(result.mean_frames)
    print(f"{args.tracker}: success {result.success_count}/{len(result.outcomes)} frames {mean}")
    return EXIT_OK


def cmd_speed(args: argparse.Namespace) -> int:
    cfg = Config(output_dir=args.out, jobs=args.jobs)
    tracker_dir = Path(args.results) / args.tracker
    names = None
    if args.dataset is not None:
        names = [t.name for t in dataset_io.load_dataset(args.dataset, jobs=cfg.jobs)]
    times = dataset_io.load_times(tracker_dir, names, jobs=cfg.jobs)
    if not times:
        raise AlignmentError(f"no timing files in {tracker_dir}")
    stats = speed.speed_stats(list(times.values()))
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    speed.write_speed_csv(cfg.output_dir / "speed.csv", [(args.tracker, stats)])
    print(f"{args.tracker}: init {fmt(stats.init_ms)} ms, max {fmt(stats.max_ms)} ms, "
          f"avg {fmt(stats.avg_ms)} ms ({fmt(stats.fps)} fps, {stats.speed_class})")
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    cfg = Config(output_dir=args.out, jobs=args.jobs)
    model = simtrackers.SimModel(
        kind=args.model,
        overlap=_parse_overlaps(args.overlap),
        overlap_jitter=args.overlap_jitter,
        conf_visible=args.conf_visible,
        conf_lost=args.conf_lost,
        redetect_delay=args.delay,
        seed=args.seed,
    )
    dataset = dataset_io.load_dataset(args.dataset, jobs=cfg.jobs)
    tracker_dir = cfg.output_dir / (args.tracker or args.model)
    with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
        runs = list(pool.map(lambda t: simtrackers.simulate(model, t), dataset))
    for run in runs:
        dataset_io.write_run(tracker_dir, run)
    print(f"simulated {args.model} on {len(runs)} sequences into {tracker_dir}")
    return EXIT_OK


class _HelpFormatter(argparse.ArgumentDefaultsHelpFormatter):
    def _get_help_string(self, action):
        if action.default is None or action.required:
            return action.help
        return super()._get_help_string(action)


def build_parser() -> argparse.ArgumentParser:
    fmt_cls = _HelpFormatter
    parser = argparse.ArgumentParser(prog="lteval", description="Long-term tracking evaluation toolkit.",
                                     formatter_class=fmt_cls)
    sub = parser.add_subparsers(dest="command", required=True)

    def jobs(p):
        p.add_argument("--jobs", type=int, default=1, help="maximum number of parallel workers")

    p = sub.add_parser("eval", help="score a tracker on a dataset", formatter_class=fmt_cls)
    p.add_argument("--dataset", type=Path, required=True, help="dataset root, one directory per sequence")
    p.add_argument("--results", type=Path, required=True, help="results root containing <tracker>/<seq>.txt")
    p.add_argument("--tracker", required=True, help="tracker name (subdirectory of --results)")
    p.add_argument("--thresholds", type=int, default=DEFAULT_THRESHOLDS, help="number of confidence thresholds")
    p.add_argument("--out", type=Path, required=True, help="report output directory")
    jobs(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("redetect", help="re-detection experiment", formatter_class=fmt_cls)
    rsub = p.add_subparsers(dest="redetect_command", required=True)
    g = rsub.add_parser("gen", help="generate a re-detection sequence from a seed frame", formatter_class=fmt_cls)
    g.add_argument("--image", type=Path, required=True, help="seed frame, binary PPM (P6)")
    g.add_argument("--target", required=True, help="target box in the seed frame as x,y,w,h")
    g.add_argument("--frames", type=int, default=redetect.DEFAULT_FRAMES, help="sequence length")
    g.add_argument("--out", type=Path, required=True, help="sequence output directory")
    jobs(g)
    g.set_defaults(func=cmd_redetect_gen)
    j = rsub.add_parser("judge", help="judge re-detection on generated sequences", formatter_class=fmt_cls)
    j.add_argument("--dataset", type=Path, required=True, help="root of generated sequences")
    j.add_argument("--results", type=Path, required=True, help="results root containing <tracker>/<seq>.txt")
    j.add_argument("--tracker", required=True, help="tracker name")
    j.add_argument("--iou", type=float, default=redetect.DEFAULT_IOU, help="overlap needed for re-detection")
    j.add_argument("--out", type=Path, required=True, help="output directory for redetect.csv")
    jobs(j)
    j.set_defaults(func=cmd_redetect_judge)

    p = sub.add_parser("speed", help="speed statistics from timing files", formatter_class=fmt_cls)
    p.add_argument("--results", type=Path, required=True, help="results root containing <tracker>/<seq>_time.txt")
    p.add_argument("--tracker", required=True, help="tracker name")
    p.add_argument("--dataset", type=Path, default=None,
                   help="dataset root; when given every sequence must have a timing file")
    p.add_argument("--out", type=Path, required=True, help="output directory for speed.csv")
    jobs(p)
    p.set_defaults(func=cmd_speed)

    p = sub.add_parser("simulate", help="write results of a simulated tracker", formatter_class=fmt_cls)
    p.add_argument("--dataset", type=Path, required=True, help="dataset root")
    p.add_argument("--model", choices=simtrackers.KINDS, required=True, help="simulated tracker kind")
    p.add_argument("--out", type=Path, required=True, help="results root; runs go to <out>/<tracker>/")
    p.add_argument("--tracker", default=None, help="tracker name (defaults to the model kind)")
    p.add_argument("--delay", type=int, default=0, help="lt1 re-detection delay in frames")
    p.add_argument("--overlap", default="1.0", help="IoU of reported boxes while tracking (comma list cycles)")
    p.add_argument("--overlap-jitter", type=float, default=0.0, help="half-width of uniform IoU noise")
    p.add_argument("--conf-visible", type=float, default=1.0, help="confidence while tracking")
    p.add_argument("--conf-lost", type=float, default=0.1, help="confidence while lost")
    p.add_argument("--seed", type=int, default=0, help="seed of the IoU noise stream")
    jobs(p)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"lteval: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AlignmentError as exc:
        print(f"lteval: alignment error: {exc}", file=sys.stderr)
        return EXIT_ALIGN
    except OSError as exc:
        print(f"lteval: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"lteval: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
