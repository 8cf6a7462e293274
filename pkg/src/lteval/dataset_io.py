"""Reading and writing annotation, result and timing files.

Layout::

    <dataset>/<seq>/groundtruth.txt     x,y,w,h per frame, or nan,nan,nan,nan
    <dataset>/<seq>/attributes.txt      O,V,C ...   (optional, one line)
    <results>/<tracker>/<seq>.txt       x,y,w,h,score  or nan,nan,nan,nan,score
    <results>/<tracker>/<seq>_time.txt  milliseconds per frame

Only '.' is accepted as the radix character, whatever the process locale.
"""

from __future__ import annotations

import math
import re
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .core import AttributeCode, Box, FramePrediction, FrameTruth, SequenceTruth, TrackerRun
from .errors import AlignmentError, ParseError

GROUNDTRUTH_FILE = "groundtruth.txt"
ATTRIBUTES_FILE = "attributes.txt"
TIME_SUFFIX = "_time.txt"

Text = Union[str, Iterable[str]]

_NUMBER = re.compile(r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")


def _lines(text: Text) -> list[str]:
    if isinstance(text, str):
        raw = text.split("\n")
        if raw and raw[-1] == "":
            raw.pop()
    else:
        raw = [line[:-1] if line.endswith("\n") else line for line in text]
    return [line[:-1] if line.endswith("\r") else line for line in raw]


def _number(field: str, lineno: int, source: Optional[str]) -> float:
    field = field.strip()
    if not _NUMBER.fullmatch(field):
        raise ParseError(f"not a decimal number: {field!r}", lineno, source)
    return float(field)


def _split(line: str, expected: int, lineno: int, source: Optional[str]) -> list[str]:
    fields = line.rstrip().split(",")
    if len(fields) != expected:
        raise ParseError(f"expected {expected} comma-separated fields, got {len(fields)}", lineno, source)
    return fields


def _is_nan(field: str) -> bool:
    return field.strip().lower() == "nan"


def _box(fields: Sequence[str], lineno: int, source: Optional[str]) -> Optional[Box]:
    if all(_is_nan(f) for f in fields):
        return None
    values = [_number(f, lineno, source) for f in fields]
    try:
        return Box(*values)
    except ValueError as exc:
        raise ParseError(str(exc), lineno, source) from None


def parse_groundtruth(text: Text, source: Optional[str] = None) -> list[FrameTruth]:
    frames = []
    for lineno, line in enumerate(_lines(text), start=1):
        fields = _split(line, 4, lineno, source)
        frames.append(FrameTruth(_box(fields, lineno, source)))
    return frames


def parse_results(text: Text, source: Optional[str] = None) -> list[FramePrediction]:
    frames = []
    for lineno, line in enumerate(_lines(text), start=1):
        fields = _split(line, 5, lineno, source)
        region = _box(fields[:4], lineno, source)
        score = _number(fields[4], lineno, source)
        if not math.isfinite(score):
            raise ParseError(f"score must be finite, got {fields[4]!r}", lineno, source)
        frames.append(FramePrediction(region, score))
    return frames


def parse_attributes(text: Text, source: Optional[str] = None) -> set[AttributeCode]:
    lines = [line for line in _lines(text) if line.strip()]
    if len(lines) > 1:
        raise ParseError("attributes must be on a single line", 2, source)
    if not lines:
        return set()
    codes = set()
    for field in lines[0].split(","):
        code = field.strip()
        try:
            codes.add(AttributeCode(code))
        except ValueError:
            raise ParseError(f"unknown attribute code {code!r}", 1, source) from None
    return codes


def parse_times(text: Text, source: Optional[str] = None) -> list[float]:
    times = []
    for lineno, line in enumerate(_lines(text), start=1):
        value = _number(line, lineno, source)
        if value < 0:
            raise ParseError(f"negative frame time {value!r}", lineno, source)
        times.append(value)
    return times


def format_number(value: float) -> str:
    """Shortest text that parses back to exactly ``value``."""
    text = repr(float(value))
    return text[:-2] if text.endswith(".0") else text


def _format_box(box: Optional[Box]) -> str:
    if box is None:
        return "nan,nan,nan,nan"
    return ",".join(format_number(v) for v in box.as_tuple())


def format_groundtruth(frames: Iterable[FrameTruth]) -> str:
    return "".join(_format_box(f.region) + "\n" for f in frames)


def format_results(frames: Iterable[FramePrediction]) -> str:
    return "".join(f"{_format_box(p.region)},{format_number(p.score)}\n" for p in frames)


def format_attributes(codes: Iterable[AttributeCode]) -> str:
    ordered = [c.value for c in AttributeCode if c in set(codes)]
    return ",".join(ordered) + "\n" if ordered else ""


def format_times(times: Iterable[float]) -> str:
    return "".join(format_number(t) + "\n" for t in times)


def _read(path: Path) -> str:
    with open(path, encoding="utf-8", newline="") as fh:
        return fh.read()


def _write(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def load_sequence(directory: Path) -> SequenceTruth:
    directory = Path(directory)
    gt_path = directory / GROUNDTRUTH_FILE
    if not gt_path.is_file():
        raise FileNotFoundError(f"sequence {directory.name!r}: missing {gt_path}")
    frames = parse_groundtruth(_read(gt_path), str(gt_path))
    attr_path = directory / ATTRIBUTES_FILE
    attributes = parse_attributes(_read(attr_path), str(attr_path)) if attr_path.is_file() else set()
    try:
        return SequenceTruth(directory.name, frames, frozenset(attributes))
    except ValueError as exc:
        raise ParseError(str(exc), source=str(gt_path)) from None


def load_dataset(root: Path, jobs: int = 1) -> list[SequenceTruth]:
    """Every subdirectory of ``root`` is one sequence, returned in name order."""
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset directory not found: {root}")
    dirs = sorted((p for p in root.iterdir() if p.is_dir()), key=lambda p: p.name)
    if not dirs:
        raise FileNotFoundError(f"no sequence directories under {root}")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(load_sequence, dirs))


def load_run(tracker_dir: Path, truth: SequenceTruth) -> TrackerRun:
    tracker_dir = Path(tracker_dir)
    path = tracker_dir / f"{truth.name}.txt"
    if not path.is_file():
        raise AlignmentError(f"no results for sequence {truth.name!r} (expected {path})")
    frames = parse_results(_read(path), str(path))
    if len(frames) != len(truth):
        raise AlignmentError(
            f"sequence {truth.name!r}: result file has {len(frames)} lines, "
            f"ground truth has {len(truth)} frames"
        )
    times = None
    time_path = tracker_dir / f"{truth.name}{TIME_SUFFIX}"
    if time_path.is_file():
        times = parse_times(_read(time_path), str(time_path))
        if len(times) != len(truth):
            raise AlignmentError(
                f"sequence {truth.name!r}: timing file has {len(times)} lines, "
                f"ground truth has {len(truth)} frames"
            )
    return TrackerRun(truth.name, frames, times)


def load_results(tracker_dir: Path, dataset: Sequence[SequenceTruth], jobs: int = 1) -> list[TrackerRun]:
    """Load ``<tracker_dir>/<seq>.txt`` for every sequence, in dataset order."""
    tracker_dir = Path(tracker_dir)
    if not tracker_dir.is_dir():
        raise FileNotFoundError(f"results directory not found: {tracker_dir}")
    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return list(pool.map(lambda truth: load_run(tracker_dir, truth), dataset))


def load_times(
    tracker_dir: Path, names: Optional[Sequence[str]] = None, jobs: int = 1
) -> dict[str, list[float]]:
    """Per-sequence timing streams; without ``names`` every ``*_time.txt`` is read."""
    tracker_dir = Path(tracker_dir)
    if names is None:
        if not tracker_dir.is_dir():
            raise FileNotFoundError(f"results directory not found: {tracker_dir}")
        names = sorted(p.name[: -len(TIME_SUFFIX)] for p in tracker_dir.glob(f"*{TIME_SUFFIX}"))

    def load(name: str) -> list[float]:
        path = tracker_dir / f"{name}{TIME_SUFFIX}"
        if not path.is_file():
            raise AlignmentError(f"no timing file for sequence {name!r} (expected {path})")
        return parse_times(_read(path), str(path))

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        return dict(zip(names, pool.map(load, names)))


def write_sequence(directory: Path, truth: SequenceTruth) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    _write(directory / GROUNDTRUTH_FILE, format_groundtruth(truth.frames))
    _write(directory / ATTRIBUTES_FILE, format_attributes(truth.attributes))


def write_run(tracker_dir: Path, run: TrackerRun) -> None:
    tracker_dir = Path(tracker_dir)
    tracker_dir.mkdir(parents=True, exist_ok=True)
    _write(tracker_dir / f"{run.sequence_name}.txt", format_results(run.frames))
    if run.times_ms is not None:
        _write(tracker_dir / f"{run.sequence_name}{TIME_SUFFIX}", format_times(run.times_ms))
