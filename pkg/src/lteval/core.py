"""Domain types and the metric kernel.

Every frame carries an optional ground-truth region and an optional tracker
prediction with a confidence score. A prediction whose score falls below the
confidence threshold is treated as "target absent". Tracking precision is the
mean overlap over frames with a surviving prediction, tracking recall the mean
overlap over frames where the target is visible, and the tracking F-score is
their harmonic mean. A tracker is ranked by the maximum F-score over the
threshold sweep.

Frame 0 is the initialization frame and never contributes to any measure.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import AlignmentError

__all__ = [
    "Box",
    "FrameTruth",
    "FramePrediction",
    "AttributeCode",
    "SequenceTruth",
    "TrackerRun",
    "PrPoint",
    "PrCurve",
    "overlap",
    "f_score",
    "pr_re_thresholded",
    "pr_re_at",
    "threshold_axis",
    "sequence_curve",
    "average_curves",
    "max_f",
    "DEFAULT_THRESHOLDS",
]

DEFAULT_THRESHOLDS = 100


@dataclass(frozen=True)
class Box:
    """Axis-aligned rectangle, left/top corner plus size, in pixels."""

    x: float
    y: float
    w: float
    h: float

    def __post_init__(self) -> None:
        for name in ("x", "y", "w", "h"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"box field {name} must be finite, got {value!r}")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box must have positive size, got w={self.w!r} h={self.h!r}")

    @property
    def right(self) -> float:
        return self.x + self.w

    @property
    def bottom(self) -> float:
        return self.y + self.h

    @property
    def area(self) -> float:
        return self.w * self.h

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x, self.y, self.w, self.h)


@dataclass(frozen=True)
class FrameTruth:
    region: Optional[Box] = None

    @property
    def visible(self) -> bool:
        return self.region is not None


@dataclass(frozen=True)
class FramePrediction:
    region: Optional[Box]
    score: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.score):
            raise ValueError(f"prediction score must be finite, got {self.score!r}")


class AttributeCode(str, enum.Enum):
    """Per-sequence visual attributes."""

    O = "O"  # full occlusion
    V = "V"  # out-of-view
    P = "P"  # partial occlusion
    C = "C"  # camera motion
    F = "F"  # fast motion
    S = "S"  # scale change
    A = "A"  # aspect ratio change
    W = "W"  # viewpoint change
    I = "I"  # similar objects
    D = "D"  # deformable object

    @property
    def description(self) -> str:
        return _ATTRIBUTE_NAMES[self]


_ATTRIBUTE_NAMES = {
    AttributeCode.O: "full occlusion",
    AttributeCode.V: "out-of-view",
    AttributeCode.P: "partial occlusion",
    AttributeCode.C: "camera motion",
    AttributeCode.F: "fast motion",
    AttributeCode.S: "scale change",
    AttributeCode.A: "aspect ratio change",
    AttributeCode.W: "viewpoint change",
    AttributeCode.I: "similar objects",
    AttributeCode.D: "deformable object",
}


@dataclass(frozen=True)
class SequenceTruth:
    """Ground truth of one sequence.

    ``resolution`` is ``(width, height)``; when it is ``None`` the bounds check
    on regions is skipped (annotation files do not record the frame size).
    """

    name: str
    frames: tuple[FrameTruth, ...]
    attributes: frozenset[AttributeCode] = frozenset()
    resolution: Optional[tuple[int, int]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        object.__setattr__(self, "attributes", frozenset(AttributeCode(a) for a in self.attributes))
        if not self.frames:
            raise ValueError(f"sequence {self.name!r} has no frames")
        if self.frames[0].region is None:
            raise ValueError(f"sequence {self.name!r}: the initialization frame must have a target")
        if self.resolution is not None:
            width, height = self.resolution
            for t, frame in enumerate(self.frames):
                r = frame.region
                if r is not None and (r.x < 0 or r.y < 0 or r.right > width or r.bottom > height):
                    raise ValueError(
                        f"sequence {self.name!r} frame {t}: region {r.as_tuple()} "
                        f"outside {width}x{height}"
                    )

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def visibility(self) -> list[bool]:
        return [f.region is not None for f in self.frames]


@dataclass(frozen=True)
class TrackerRun:
    sequence_name: str
    frames: tuple[FramePrediction, ...]
    times_ms: Optional[tuple[float, ...]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "frames", tuple(self.frames))
        if self.times_ms is not None:
            times = tuple(float(v) for v in self.times_ms)
            if len(times) != len(self.frames):
                raise AlignmentError(
                    f"{self.sequence_name}: {len(times)} frame times for {len(self.frames)} frames"
                )
            if any(not v >= 0 for v in times):
                raise ValueError(f"{self.sequence_name}: frame times must be non-negative")
            object.__setattr__(self, "times_ms", times)

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class PrPoint:
    """One sample of the precision/recall curve; ``f`` is derived from ``pr`` and ``re``."""

    tau_theta: float
    pr: float
    re: float
    n_p: int = 0
    n_g: int = 0
    f: float = field(init=False)

    def __post_init__(self) -> None:
        if not (0.0 <= self.pr <= 1.0 and 0.0 <= self.re <= 1.0):
            raise ValueError(f"precision/recall out of [0, 1]: pr={self.pr!r} re={self.re!r}")
        object.__setattr__(self, "f", f_score(self.pr, self.re))


@dataclass(frozen=True)
class PrCurve:
    points: tuple[PrPoint, ...]

    def __post_init__(self) -> None:
        points = tuple(self.points)
        object.__setattr__(self, "points", points)
        for prev, cur in zip(points, points[1:]):
            if not cur.tau_theta > prev.tau_theta:
                raise ValueError("curve thresholds must be strictly increasing")
            if cur.re > prev.re:
                raise ValueError(
                    f"recall increases from {prev.re!r} to {cur.re!r} "
                    f"between thresholds {prev.tau_theta!r} and {cur.tau_theta!r}"
                )

    def __len__(self) -> int:
        return len(self.points)

    @property
    def thresholds(self) -> list[float]:
        return [p.tau_theta for p in self.points]

    @property
    def precision(self) -> list[float]:
        return [p.pr for p in self.points]

    @property
    def recall(self) -> list[float]:
        return [p.re for p in self.points]

    @property
    def fscore(self) -> list[float]:
        return [p.f for p in self.points]


def overlap(a: Optional[Box], b: Optional[Box]) -> float:
    """Intersection over union of two boxes; 0 when either one is missing."""
    if a is None or b is None:
        return 0.0
    if a == b:
        return 1.0
    iw = min(a.right, b.right) - max(a.x, b.x)
    ih = min(a.bottom, b.bottom) - max(a.y, b.y)
    if iw <= 0 or ih <= 0:
        return 0.0
    inter = iw * ih
    union = a.area + b.area - inter
    # rounding can push inter/union a hair past 1 for (near) identical boxes
    return min(1.0, inter / union)


def f_score(pr: float, re: float) -> float:
    if pr + re == 0:
        return 0.0
    # dividing first avoids underflow of pr * re and gives f(x, x) == x exactly
    return 2.0 * pr * (re / (pr + re))


@dataclass(frozen=True)
class _ScoredFrames:
    """Per-frame quantities independent of the confidence threshold (frame 0 dropped)."""

    overlaps: np.ndarray
    scores: np.ndarray
    predicted: np.ndarray
    n_g: int

    def point(self, tau_theta: float) -> PrPoint:
        kept = self.predicted & (self.scores >= tau_theta)
        n_p = int(np.count_nonzero(kept))
        # predictions on frames without a target have overlap 0, so the precision
        # and recall numerators are the same sum; fsum keeps it order independent
        total = math.fsum(self.overlaps[kept].tolist())
        pr = total / n_p if n_p else 0.0
        re = total / self.n_g if self.n_g else 0.0
        return PrPoint(tau_theta, pr, re, n_p, self.n_g)


def _check_aligned(run: TrackerRun, truth: SequenceTruth) -> None:
    if len(run.frames) != len(truth.frames):
        raise AlignmentError(
            f"sequence {truth.name!r}: tracker reported {len(run.frames)} frames, "
            f"ground truth has {len(truth.frames)}"
        )


def _scored_frames(run: TrackerRun, truth: SequenceTruth) -> _ScoredFrames:
    _check_aligned(run, truth)
    preds = run.frames[1:]
    gts = truth.frames[1:]
    return _ScoredFrames(
        overlaps=np.array([overlap(p.region, g.region) for p, g in zip(preds, gts)], dtype=float),
        scores=np.array([p.score for p in preds], dtype=float),
        predicted=np.array([p.region is not None for p in preds], dtype=bool),
        n_g=sum(1 for g in gts if g.region is not None),
    )


def pr_re_thresholded(run: TrackerRun, truth: SequenceTruth, tau_theta: float, tau_omega):
    """Detection-style precision and recall at overlap threshold ``tau_omega``.

    A frame counts as a match when both the (surviving) prediction and the
    ground truth exist and their overlap is at least ``tau_omega``.
    ``tau_omega`` may be a scalar or an array of thresholds; the result has
    the same shape.
    """
    taus = np.asarray(tau_omega, dtype=float)
    if np.any((taus < 0) | (taus > 1)) or np.any(np.isnan(taus)):
        raise ValueError("overlap threshold must lie in [0, 1]")
    _check_aligned(run, truth)

    matched = []
    n_p = n_g = 0
    for pred, gt in zip(run.frames[1:], truth.frames[1:]):
        has_pred = pred.region is not None and pred.score >= tau_theta
        n_p += has_pred
        n_g += gt.region is not None
        if has_pred and gt.region is not None:
            matched.append(overlap(pred.region, gt.region))

    ordered = np.sort(np.array(matched, dtype=float))
    hits = len(ordered) - np.searchsorted(ordered, taus, side="left")
    pr = hits / n_p if n_p else np.zeros_like(taus)
    re = hits / n_g if n_g else np.zeros_like(taus)
    if taus.ndim == 0:
        return float(pr), float(re)
    return np.asarray(pr, dtype=float), np.asarray(re, dtype=float)


def pr_re_at(run: TrackerRun, truth: SequenceTruth, tau_theta: float) -> PrPoint:
    """Tracking precision, recall and F-score at one confidence threshold."""
    return _scored_frames(run, truth).point(tau_theta)


def _pooled_scores(runs: Iterable[TrackerRun]) -> list[float]:
    return [p.score for run in runs for p in run.frames[1:] if p.region is not None]


def threshold_axis(runs: Sequence[TrackerRun], n: int = DEFAULT_THRESHOLDS) -> list[float]:
    """Confidence thresholds shared by every sequence of one tracker.

    ``n`` points uniformly spaced between the lowest and highest score of all
    reported predictions, with the first point nudged just below the minimum.
    """
    if n < 2:
        raise ValueError(f"need at least 2 thresholds, got {n}")
    scores = _pooled_scores(runs)
    if not scores:
        raise ValueError("no scored predictions to build a threshold axis from")
    lo, hi = min(scores), max(scores)
    eps = 1e-6 * max(1.0, abs(lo), abs(hi))
    if hi - lo <= eps:
        axis = np.linspace(hi - eps, hi, n)
    else:
        axis = np.linspace(lo, hi, n)
        axis[0] = lo - eps
    axis[-1] = hi
    values = axis.tolist()
    if any(b <= a for a, b in zip(values, values[1:])):
        raise ValueError(f"score range [{lo!r}, {hi!r}] too narrow for {n} distinct thresholds")
    return values


def sequence_curve(run: TrackerRun, truth: SequenceTruth, axis: Sequence[float]) -> PrCurve:
    if len(axis) == 0:
        raise ValueError("threshold axis is empty")
    if any(b <= a for a, b in zip(axis, axis[1:])):
        raise ValueError("threshold axis must be strictly increasing")
    frames = _scored_frames(run, truth)
    return PrCurve(tuple(frames.point(float(tau)) for tau in axis))


def average_curves(curves: Sequence[PrCurve]) -> PrCurve:
    """Pointwise mean of precision and recall; F is recomputed from the means.

    Each sequence has equal weight regardless of its length.
    """
    if not curves:
        raise ValueError("no curves to average")
    axis = curves[0].thresholds
    for c in curves[1:]:
        if c.thresholds != axis:
            raise ValueError("curves are sampled on different threshold axes")
    k = len(curves)
    points = []
    for i, tau in enumerate(axis):
        column = [c.points[i] for c in curves]
        points.append(
            PrPoint(
                tau,
                math.fsum(p.pr for p in column) / k,
                math.fsum(p.re for p in column) / k,
                sum(p.n_p for p in column),
                sum(p.n_g for p in column),
            )
        )
    return PrCurve(tuple(points))


def max_f(curve: PrCurve) -> tuple[float, float]:
    """Highest F-score and the (lowest) threshold attaining it."""
    if not curve.points:
        raise ValueError("empty curve")
    best = curve.points[0]
    for p in curve.points[1:]:
        if p.f > best.f:
            best = p
    return best.f, best.tau_theta
