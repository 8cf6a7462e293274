"""Dataset-level evaluation under the no-reset protocol."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

from .core import (
    DEFAULT_THRESHOLDS,
    AttributeCode,
    PrCurve,
    SequenceTruth,
    TrackerRun,
    average_curves,
    max_f,
    sequence_curve,
    threshold_axis,
)
from .errors import AlignmentError

GROUPS = ("G1", "G2", "G3")


@dataclass(frozen=True)
class DisappearanceStats:
    dsp: int
    adl: float
    adn: float


def count_disappearances(truth: SequenceTruth) -> tuple[int, list[int]]:
    """Number and lengths of maximal runs of frames without a visible target."""
    lengths: list[int] = []
    run = 0
    for visible in truth.visibility:
        if visible:
            if run:
                lengths.append(run)
            run = 0
        else:
            run += 1
    if run:
        lengths.append(run)
    return len(lengths), lengths


def disappearance_stats(dataset: Sequence[SequenceTruth]) -> DisappearanceStats:
    if not dataset:
        raise ValueError("empty dataset")
    lengths = [n for truth in dataset for n in count_disappearances(truth)[1]]
    dsp = len(lengths)
    adl = sum(lengths) / dsp if dsp else 0.0
    return DisappearanceStats(dsp=dsp, adl=adl, adn=dsp / len(dataset))


def sequence_group(count: int) -> str:
    if count > 10:
        return "G1"
    if count >= 1:
        return "G2"
    return "G3"


def group_sequences(dataset: Sequence[SequenceTruth]) -> dict[str, list[SequenceTruth]]:
    """Split by disappearance count: G1 over ten, G2 one to ten, G3 none."""
    groups: dict[str, list[SequenceTruth]] = {g: [] for g in GROUPS}
    for truth in dataset:
        groups[sequence_group(count_disappearances(truth)[0])].append(truth)
    return groups


@dataclass(frozen=True)
class EvalReport:
    tracker_name: str
    axis: tuple[float, ...]
    per_sequence: Mapping[str, PrCurve]
    averaged: PrCurve
    f_star: float
    tau_star: float
    groups: Mapping[str, Optional[float]]
    attributes: Mapping[AttributeCode, float]
    dataset_stats: DisappearanceStats
    sequence_groups: Mapping[str, str]
    sequence_disappearances: Mapping[str, int]

    def sequence_max_f(self, name: str) -> tuple[float, float]:
        return max_f(self.per_sequence[name])


def _match_runs(dataset: Sequence[SequenceTruth], runs: Sequence[TrackerRun]) -> list[TrackerRun]:
    by_name: dict[str, TrackerRun] = {}
    for run in runs:
        if run.sequence_name in by_name:
            raise AlignmentError(f"duplicate results for sequence {run.sequence_name!r}")
        by_name[run.sequence_name] = run
    matched = []
    for truth in dataset:
        if truth.name not in by_name:
            raise AlignmentError(f"no results for sequence {truth.name!r}")
        matched.append(by_name[truth.name])
    return matched


def evaluate_tracker(
    dataset: Sequence[SequenceTruth],
    runs: Sequence[TrackerRun],
    n_thresholds: int = DEFAULT_THRESHOLDS,
    tracker_name: str = "",
    jobs: int = 1,
) -> EvalReport:
    """Score one tracker on a dataset.

    Per-sequence curves share one threshold axis; the averaged curve weights
    every sequence equally and its maximum F-score is the ranking score.
    Group and attribute scores use the same recipe restricted to a subset.
    """
    if not dataset:
        raise ValueError("empty dataset")
    names = [t.name for t in dataset]
    if len(set(names)) != len(names):
        raise ValueError("sequence names must be unique")
    matched = _match_runs(dataset, runs)
    axis = threshold_axis(matched, n_thresholds)

    with ThreadPoolExecutor(max_workers=max(1, jobs)) as pool:
        curves = list(pool.map(lambda pair: sequence_curve(pair[0], pair[1], axis), zip(matched, dataset)))
    per_sequence = dict(zip(names, curves))

    averaged = average_curves(curves)
    f_star, tau_star = max_f(averaged)

    counts = {t.name: count_disappearances(t)[0] for t in dataset}
    membership = {name: sequence_group(n) for name, n in counts.items()}
    groups: dict[str, Optional[float]] = {}
    for g in GROUPS:
        members = [per_sequence[n] for n in names if membership[n] == g]
        groups[g] = max_f(average_curves(members))[0] if members else None

    attributes: dict[AttributeCode, float] = {}
    for code in AttributeCode:
        members = [per_sequence[t.name] for t in dataset if code in t.attributes]
        if members:
            attributes[code] = max_f(average_curves(members))[0]

    return EvalReport(
        tracker_name=tracker_name,
        axis=tuple(axis),
        per_sequence=per_sequence,
        averaged=averaged,
        f_star=f_star,
        tau_star=tau_star,
        groups=groups,
        attributes=attributes,
        dataset_stats=disappearance_stats(dataset),
        sequence_groups=membership,
        sequence_disappearances=counts,
    )
