"""Tracking speed: initialization, maximum and average per-frame time."""

from __future__ import annotations

import csv
import io
import math
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

FAST, MODERATE, SLOW = "fast", "moderate", "slow"


@dataclass(frozen=True)
class SpeedStats:
    init_ms: float
    max_ms: float
    avg_ms: float
    fps: float
    speed_class: str


def classify_speed(fps: float) -> str:
    if fps > 15:
        return FAST
    if fps >= 1:
        return MODERATE
    return SLOW


def slowest_tail(times: Sequence[float]) -> list[float]:
    """The slowest tenth (rounded up) of ``times``."""
    k = -(-len(times) // 10)
    return sorted(times)[len(times) - k:]


def speed_stats(per_sequence_times: Sequence[Sequence[float]]) -> SpeedStats:
    """Speed measures over a dataset; the first time of each sequence is initialization.

    init_ms averages the initialization times over sequences, max_ms averages
    the per-sequence median of the slowest 10% of frames, avg_ms averages over
    every tracking frame of the dataset.
    """
    if not per_sequence_times:
        raise ValueError("no timing data")
    inits, tails, pooled = [], [], []
    for i, times in enumerate(per_sequence_times):
        times = [float(t) for t in times]
        if len(times) < 2:
            raise ValueError(f"sequence {i} has no frames after initialization")
        if any(not t >= 0 for t in times):
            raise ValueError(f"sequence {i} has negative frame times")
        inits.append(times[0])
        tails.append(statistics.median(slowest_tail(times[1:])))
        pooled.extend(times[1:])
    init_ms = math.fsum(inits) / len(inits)
    max_ms = math.fsum(tails) / len(tails)
    avg_ms = math.fsum(pooled) / len(pooled)
    fps = 1000.0 / avg_ms if avg_ms > 0 else math.inf
    return SpeedStats(init_ms, max_ms, avg_ms, fps, classify_speed(fps))


def speed_csv(rows: Sequence[tuple[str, SpeedStats]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["tracker", "init_ms", "max_ms", "avg_ms", "fps", "class"])
    for tracker, s in rows:
        writer.writerow([tracker] + [format(v, ".9g") for v in (s.init_ms, s.max_ms, s.avg_ms, s.fps)] + [s.speed_class])
    return buf.getvalue()


def write_speed_csv(path: Path, rows: Sequence[tuple[str, SpeedStats]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(speed_csv(rows))
