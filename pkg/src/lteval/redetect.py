"""Synthetic re-detection experiment.

The seed frame is padded with black to three times its width and height. The
first five frames show it unchanged; from the sixth frame on the target patch
is cut from its original place and pasted into the bottom-right corner of the
canvas. A tracker re-detects the target when its prediction overlaps the new
location well enough.
"""

from __future__ import annotations

import csv
import io
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .core import Box, FrameTruth, SequenceTruth, TrackerRun, overlap
from .dataset_io import ATTRIBUTES_FILE, GROUNDTRUTH_FILE, format_groundtruth
from .errors import AlignmentError, ParseError

STATIC_FRAMES = 5
DEFAULT_FRAMES = 105
DEFAULT_IOU = 0.5


@dataclass(frozen=True, eq=False)
class RasterImage:
    """8-bit RGB image stored as a read-only ``(height, width, 3)`` array."""

    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError(f"image size must be positive, got {self.width}x{self.height}")
        pixels = np.asarray(self.pixels, dtype=np.uint8)
        if pixels.shape != (self.height, self.width, 3):
            raise ValueError(f"pixel array shape {pixels.shape} does not match {self.width}x{self.height} RGB")
        if pixels.flags.writeable:
            pixels = pixels.copy()
            pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, pixels: np.ndarray) -> "RasterImage":
        return cls(pixels.shape[1], pixels.shape[0], pixels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterImage):
            return NotImplemented
        return np.array_equal(self.pixels, other.pixels)

    def to_ppm(self) -> bytes:
        return f"P6\n{self.width} {self.height}\n255\n".encode("ascii") + self.pixels.tobytes()


_PPM_TOKEN = re.compile(rb"(?:\s|#[^\n]*\n)*(\S+)")


def parse_ppm(data: bytes, source: Optional[str] = None) -> RasterImage:
    """Binary pixmap (P6) with maxval 255."""
    pos = 0
    header = []
    for _ in range(4):
        m = _PPM_TOKEN.match(data, pos)
        if not m:
            raise ParseError("truncated PPM header", source=source)
        header.append(m.group(1))
        pos = m.end()
    if header[0] != b"P6":
        raise ParseError(f"not a binary PPM (magic {header[0]!r})", source=source)
    try:
        width, height, maxval = (int(v) for v in header[1:])
    except ValueError:
        raise ParseError("malformed PPM header", source=source) from None
    if maxval != 255:
        raise ParseError(f"unsupported PPM maxval {maxval}", source=source)
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise ParseError("missing whitespace after PPM header", source=source)
    pos += 1
    size = width * height * 3
    body = data[pos:pos + size]
    if len(body) != size:
        raise ParseError(f"PPM pixel data has {len(body)} bytes, expected {size}", source=source)
    pixels = np.frombuffer(body, dtype=np.uint8).reshape(height, width, 3)
    return RasterImage(width, height, pixels)


def read_ppm(path: Path) -> RasterImage:
    return parse_ppm(Path(path).read_bytes(), str(path))


def write_ppm(path: Path, image: RasterImage) -> None:
    Path(path).write_bytes(image.to_ppm())


def _check_target(image: RasterImage, target: Box) -> tuple[int, int, int, int]:
    values = target.as_tuple()
    if not all(float(v).is_integer() for v in values):
        raise ValueError(f"target {values} must have integer coordinates")
    x, y, w, h = (int(v) for v in values)
    if x < 0 or y < 0 or x + w > image.width or y + h > image.height:
        raise ValueError(f"target {values} lies outside the {image.width}x{image.height} image")
    return x, y, w, h


def generate_redetection_sequence(
    image: RasterImage, target: Box, n_frames: int = DEFAULT_FRAMES
) -> tuple[list[RasterImage], list[FrameTruth]]:
    """Frames and ground truth of the padded-displacement sequence.

    The five static frames share one image object, as do all displaced frames.
    """
    if n_frames <= STATIC_FRAMES:
        raise ValueError(f"need more than {STATIC_FRAMES} frames, got {n_frames}")
    x, y, w, h = _check_target(image, target)
    cw, ch = 3 * image.width, 3 * image.height

    canvas = np.zeros((ch, cw, 3), dtype=np.uint8)
    canvas[: image.height, : image.width] = image.pixels
    displaced = canvas.copy()
    patch = image.pixels[y:y + h, x:x + w]
    displaced[y:y + h, x:x + w] = 0
    displaced[ch - h:, cw - w:] = patch

    static_img = RasterImage(cw, ch, canvas)
    moved_img = RasterImage(cw, ch, displaced)
    moved_box = Box(float(cw - w), float(ch - h), float(w), float(h))
    seed_box = Box(float(x), float(y), float(w), float(h))

    moved = n_frames - STATIC_FRAMES
    frames = [static_img] * STATIC_FRAMES + [moved_img] * moved
    truth = [FrameTruth(seed_box)] * STATIC_FRAMES + [FrameTruth(moved_box)] * moved
    return frames, truth


def redetection_truth(name: str, image: RasterImage, truth: Sequence[FrameTruth]) -> SequenceTruth:
    return SequenceTruth(name, tuple(truth), resolution=(3 * image.width, 3 * image.height))


def write_redetection_sequence(
    out_dir: Path, frames: Sequence[RasterImage], truth: Sequence[FrameTruth], jobs: int = 1
) -> None:
    """``%08d.ppm`` frames numbered from 1, plus ``groundtruth.txt`` and an empty ``attributes.txt``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    encoded: dict[int, bytes] = {}
    for frame in frames:
        if id(frame) not in encoded:
            encoded[id(frame)] = frame.to_ppm()

    def write(item: tuple[int, RasterImage]) -> None:
        i, frame = item
        (out_dir / f"{i:08d}.ppm").write_bytes(encoded[id(frame)])

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        list(pool.map(write, enumerate(frames, start=1)))
    (out_dir / GROUNDTRUTH_FILE).write_text(format_groundtruth(truth), encoding="utf-8", newline="")
    (out_dir / ATTRIBUTES_FILE).write_text("", encoding="utf-8", newline="")


@dataclass(frozen=True)
class RedetectOutcome:
    success: bool
    frames_to_redetect: Optional[int] = None

    def __post_init__(self) -> None:
        if self.success != (self.frames_to_redetect is not None):
            raise ValueError("frames_to_redetect must be given exactly when re-detection succeeded")


def judge_redetection(run: TrackerRun, gt: Sequence[FrameTruth], iou_threshold: float = DEFAULT_IOU) -> RedetectOutcome:
    """First frame after the displacement whose prediction overlaps the moved target."""
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold!r}")
    if len(run.frames) != len(gt):
        raise AlignmentError(f"{run.sequence_name}: {len(run.frames)} predictions for {len(gt)} frames")
    if len(gt) <= STATIC_FRAMES:
        raise AlignmentError(f"{run.sequence_name}: sequence has no displaced frames")
    for t in range(STATIC_FRAMES, len(gt)):
        if overlap(run.frames[t].region, gt[t].region) >= iou_threshold:
            return RedetectOutcome(True, t - STATIC_FRAMES)
    return RedetectOutcome(False)


@dataclass(frozen=True)
class CampaignResult:
    outcomes: Mapping[str, RedetectOutcome]
    success_count: int
    mean_frames: Optional[float]


def redetect_campaign(
    truths: Mapping[str, Sequence[FrameTruth]],
    runs: Sequence[TrackerRun],
    iou_threshold: float = DEFAULT_IOU,
) -> CampaignResult:
    """Judge one run per generated sequence; mean latency over successes only."""
    by_name = {run.sequence_name: run for run in runs}
    outcomes = {}
    for name in sorted(truths):
        if name not in by_name:
            raise AlignmentError(f"no results for re-detection sequence {name!r}")
        outcomes[name] = judge_redetection(by_name[name], truths[name], iou_threshold)
    delays = [o.frames_to_redetect for o in outcomes.values() if o.success]
    mean = math.fsum(delays) / len(delays) if delays else None
    return CampaignResult(outcomes, len(delays), mean)


def campaign_csv(result: CampaignResult) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["seed", "success", "frames"])
    for name, o in result.outcomes.items():
        writer.writerow([name, int(o.success), "" if o.frames_to_redetect is None else o.frames_to_redetect])
    return buf.getvalue()
