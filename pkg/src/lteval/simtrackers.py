"""Deterministic simulated trackers spanning the short-term/long-term spectrum.

The kinds, from weakest to strongest long-term behaviour:

``st0_drift``
    follows the target until it first loses it, then keeps reporting the
    last box forever with the same confidence.
``st0_jitter``
    reports a box with a prescribed overlap to the ground truth whenever the
    target is visible and the stale box otherwise; constant confidence.
``lt0``
    like ``st0_jitter`` while tracking, but reports "absent" once the target
    is lost and only resumes when the target shows up overlapping the place
    where it was lost.
``lt1``
    like ``lt0``, and in addition re-detects the target anywhere in the frame
    exactly ``redetect_delay`` frames after it becomes visible again.
``oracle``
    the ground truth itself.

The target is lost when it disappears or when it jumps to a location that
does not overlap the last tracked position (the re-detection sequences).
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .core import Box, FramePrediction, SequenceTruth, TrackerRun, overlap

KINDS = ("oracle", "st0_drift", "st0_jitter", "lt0", "lt1")


@dataclass(frozen=True)
class SimModel:
    """Simulator configuration.

    ``overlap`` is the IoU of the reported box with the ground truth while
    tracking; a sequence is cycled frame by frame over the visible frames.
    ``overlap_jitter`` adds uniform noise of that half-width to every frame's
    target IoU, drawn from a stream seeded by ``seed`` and the sequence name.
    """

    kind: str = "oracle"
    overlap: Union[float, tuple[float, ...]] = 1.0
    overlap_jitter: float = 0.0
    conf_visible: float = 1.0
    conf_lost: float = 0.1
    redetect_delay: int = 0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown simulator kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        targets = self.overlap if isinstance(self.overlap, tuple) else (self.overlap,)
        if not targets or any(not 0.0 <= r <= 1.0 for r in targets):
            raise ValueError(f"overlap targets must lie in [0, 1], got {self.overlap!r}")
        if not 0.0 <= self.overlap_jitter <= 1.0:
            raise ValueError(f"overlap_jitter must lie in [0, 1], got {self.overlap_jitter!r}")
        if self.redetect_delay < 0:
            raise ValueError(f"redetect_delay must be non-negative, got {self.redetect_delay!r}")
        if not (np.isfinite(self.conf_visible) and np.isfinite(self.conf_lost)):
            raise ValueError("confidences must be finite")
        if self.kind in ("lt0", "lt1") and not self.conf_lost < self.conf_visible:
            raise ValueError("conf_lost must be below conf_visible")


def shifted_box(gt: Box, iou: float) -> Box:
    """``gt`` moved right so that its IoU with ``gt`` equals ``iou``.

    Shifting by ``d`` leaves an intersection of ``(w - d) * h`` out of a union of
    ``(w + d) * h``, so ``d = w (1 - iou) / (1 + iou)``.
    """
    if iou >= 1.0:
        return gt
    return Box(gt.x + gt.w * (1.0 - iou) / (1.0 + iou), gt.y, gt.w, gt.h)


class _OverlapStream:
    def __init__(self, model: SimModel, name: str):
        self.targets = model.overlap if isinstance(model.overlap, tuple) else (model.overlap,)
        self.jitter = model.overlap_jitter
        self.rng = np.random.default_rng([model.seed, zlib.crc32(name.encode("utf-8"))])
        self.i = 0

    def next(self) -> float:
        r = self.targets[self.i % len(self.targets)]
        self.i += 1
        if self.jitter:
            r = float(np.clip(r + self.rng.uniform(-self.jitter, self.jitter), 0.0, 1.0))
        return r


def _lost_target(anchor: Box, gt: Optional[Box]) -> bool:
    return gt is None or overlap(anchor, gt) == 0.0


def simulate(model: SimModel, truth: SequenceTruth) -> TrackerRun:
    gts = [f.region for f in truth.frames]
    init = gts[0]
    frames = [FramePrediction(init, model.conf_visible)]
    stream = _OverlapStream(model, truth.name)
    visible, lost = model.conf_visible, model.conf_lost

    if model.kind == "oracle":
        frames += [FramePrediction(g, visible) for g in gts[1:]]

    elif model.kind == "st0_jitter":
        last = init
        for g in gts[1:]:
            if g is not None:
                last = shifted_box(g, stream.next())
            frames.append(FramePrediction(last, visible))

    elif model.kind == "st0_drift":
        anchor, tracking = init, True
        for g in gts[1:]:
            if tracking and _lost_target(anchor, g):
                tracking = False
            if tracking:
                anchor = g
            frames.append(FramePrediction(anchor, visible))

    else:
        anchor, tracking = init, True
        countdown: Optional[int] = None
        for g in gts[1:]:
            if tracking and _lost_target(anchor, g):
                tracking, countdown = False, None
            if not tracking:
                if g is None:
                    countdown = None
                elif overlap(anchor, g) > 0:
                    tracking = True
                elif model.kind == "lt1":
                    if countdown is None:
                        countdown = model.redetect_delay
                    if countdown == 0:
                        tracking = True
                    else:
                        countdown -= 1
            if tracking:
                anchor = g
                frames.append(FramePrediction(shifted_box(g, stream.next()), visible))
            else:
                frames.append(FramePrediction(None, lost))

    return TrackerRun(truth.name, frames)


def simulate_dataset(model: SimModel, dataset: Sequence[SequenceTruth]) -> list[TrackerRun]:
    return [simulate(model, truth) for truth in dataset]
