import csv
import math
import random

import pytest

from conftest import GT_BOX, five_frame_fixture
from lteval.core import (
    AttributeCode,
    Box,
    FramePrediction,
    FrameTruth,
    PrCurve,
    PrPoint,
    SequenceTruth,
    TrackerRun,
    f_score,
)
from lteval.errors import AlignmentError
from lteval.protocol import (
    DisappearanceStats,
    EvalReport,
    count_disappearances,
    disappearance_stats,
    evaluate_tracker,
    group_sequences,
)
from lteval.report import emit_report


def truth_from_visibility(name, visibility, attributes=()):
    return SequenceTruth(name, [FrameTruth(GT_BOX if v else None) for v in visibility], attributes)


def oracle_run(truth, score=1.0):
    return TrackerRun(truth.name, [FramePrediction(f.region, score) for f in truth.frames])


class TestDisappearances:
    def test_runs(self):
        count, lengths = count_disappearances(truth_from_visibility("s", [1, 1, 0, 0, 1, 0, 1]))
        assert (count, lengths) == (2, [2, 1])
        assert sum(lengths) / count == 1.5

    def test_none(self):
        assert count_disappearances(truth_from_visibility("s", [1, 1, 1])) == (0, [])

    def test_trailing(self):
        assert count_disappearances(truth_from_visibility("s", [1, 0, 0, 0])) == (1, [3])

    def test_dataset_stats(self):
        ds = [truth_from_visibility("a", [1, 0, 0, 1, 0]), truth_from_visibility("b", [1, 1])]
        assert disappearance_stats(ds) == DisappearanceStats(dsp=2, adl=1.5, adn=1.0)

    def test_dataset_stats_no_disappearance(self):
        assert disappearance_stats([truth_from_visibility("a", [1, 1])]) == DisappearanceStats(0, 0.0, 0.0)


def truth_with_disappearances(name, k):
    return truth_from_visibility(name, [1] + [0, 1] * k)


class TestGrouping:
    def test_basic(self):
        ds = [truth_with_disappearances("a", 12), truth_with_disappearances("b", 3), truth_with_disappearances("c", 0)]
        groups = group_sequences(ds)
        assert [[t.name for t in groups[g]] for g in ("G1", "G2", "G3")] == [["a"], ["b"], ["c"]]

    @pytest.mark.parametrize("count,group", [(0, "G3"), (1, "G2"), (10, "G2"), (11, "G1")])
    def test_boundaries(self, count, group):
        groups = group_sequences([truth_with_disappearances("s", count)])
        assert [t.name for t in groups[group]] == ["s"]

    def test_partition(self):
        rng = random.Random(3)
        ds = [truth_with_disappearances(f"s{i}", rng.randint(0, 15)) for i in range(40)]
        groups = group_sequences(ds)
        names = [t.name for g in groups.values() for t in g]
        assert sorted(names) == sorted(t.name for t in ds)


def _seq_b():
    """Fully visible, two scored frames overlapping 0.5 with low and high confidence."""
    truth = SequenceTruth("b", [FrameTruth(GT_BOX)] * 3)
    half = Box(0, 0, 20, 10)
    run = TrackerRun("b", [FramePrediction(GT_BOX, 1.0), FramePrediction(half, 0.55), FramePrediction(half, 0.85)])
    return truth, run


def brute_force_f_star(dataset, runs, axis):
    """Independent recomputation: raw IoUs, per-sequence means, averaged, then F."""

    def iou(a, b):
        if a is None or b is None:
            return 0.0
        iw = max(0.0, min(a.x + a.w, b.x + b.w) - max(a.x, b.x))
        ih = max(0.0, min(a.y + a.h, b.y + b.h) - max(a.y, b.y))
        inter = iw * ih
        return inter / (a.w * a.h + b.w * b.h - inter)

    best = (-1.0, None)
    for tau in axis:
        prs, res = [], []
        for truth, run in zip(dataset, runs):
            kept = [(p, g) for p, g in zip(run.frames[1:], truth.frames[1:]) if p.region is not None and p.score >= tau]
            total = sum(iou(p.region, g.region) for p, g in kept)
            n_g = sum(g.region is not None for g in truth.frames[1:])
            prs.append(total / len(kept) if kept else 0.0)
            res.append(total / n_g if n_g else 0.0)
        pr, re = sum(prs) / len(prs), sum(res) / len(res)
        f = 2 * pr * re / (pr + re) if pr + re else 0.0
        if f > best[0] + 1e-12:
            best = (f, tau)
    return best


class TestEvaluate:
    def test_oracle(self):
        ds = [
            truth_from_visibility("a", [1, 1, 0, 0, 1, 1], {"O"}),
            truth_with_disappearances("b", 11),
            truth_from_visibility("c", [1, 1, 1], {"V"}),
        ]
        report = evaluate_tracker(ds, [oracle_run(t) for t in ds])
        assert report.f_star == 1.0
        assert all(v == 1.0 for v in report.groups.values())
        assert report.attributes == {AttributeCode.O: 1.0, AttributeCode.V: 1.0}

    def test_single_sequence(self, fixture5):
        truth, run = fixture5
        report = evaluate_tracker([truth], [run])
        assert report.averaged == report.per_sequence["fixture"]
        assert report.f_star == pytest.approx(2 / 3, abs=1e-12)
        assert (report.f_star, report.tau_star) == report.sequence_max_f("fixture")
        assert 0.6 < report.tau_star <= 0.7

    def test_two_sequences_brute_force(self, fixture5):
        truth_a, run_a = fixture5
        truth_b, run_b = _seq_b()
        report = evaluate_tracker([truth_a, truth_b], [run_a, run_b], n_thresholds=50)
        fa, ta = report.sequence_max_f("fixture")
        fb, tb = report.sequence_max_f("b")
        assert fa == pytest.approx(2 / 3, abs=1e-12) and fb == pytest.approx(0.5, abs=1e-12)
        assert ta != tb
        f_star, tau = brute_force_f_star([truth_a, truth_b], [run_a, run_b], report.axis)
        assert report.f_star == pytest.approx(f_star, abs=1e-12)
        assert report.tau_star == tau

    def test_groups_and_attributes(self):
        a = truth_from_visibility("a", [1] + [0, 1] * 11, {"O"})
        b = truth_from_visibility("b", [1, 1, 0, 1], {"O", "F"})
        c = truth_from_visibility("c", [1, 1, 1])
        runs = [oracle_run(a), TrackerRun("b", [FramePrediction(GT_BOX, 1.0)] * 4), oracle_run(c)]
        report = evaluate_tracker([a, b, c], runs)
        assert report.groups["G1"] == 1.0 and report.groups["G3"] == 1.0
        assert report.groups["G2"] == pytest.approx(report.sequence_max_f("b")[0])
        assert report.attributes[AttributeCode.F] == report.groups["G2"]
        assert set(report.attributes) == {AttributeCode.O, AttributeCode.F}

    def test_empty_group_reported_absent(self, fixture5):
        truth, run = fixture5
        report = evaluate_tracker([truth], [run])
        assert report.groups == {"G1": None, "G2": report.f_star, "G3": None}

    def test_attribute_on_every_sequence_equals_overall(self):
        rng = random.Random(5)
        ds, runs = [], []
        for i in range(4):
            vis = [1] + [rng.random() < 0.7 for _ in range(12)]
            truth = truth_from_visibility(f"s{i}", vis, {"O"})
            ds.append(truth)
            runs.append(TrackerRun(truth.name, [FramePrediction(GT_BOX if rng.random() < 0.8 else None, rng.random()) for _ in vis]))
        report = evaluate_tracker(ds, runs)
        assert report.attributes[AttributeCode.O] == report.f_star

    def test_reordering_invariant(self):
        rng = random.Random(11)
        ds, runs = [], []
        for i in range(6):
            vis = [1] + [rng.random() < 0.6 for _ in range(20)]
            truth = truth_from_visibility(f"s{i}", vis)
            ds.append(truth)
            runs.append(TrackerRun(truth.name, [
                FramePrediction(Box(rng.uniform(0, 5), 0, 10, 10) if rng.random() < 0.8 else None, rng.random())
                for _ in vis
            ]))
        base = evaluate_tracker(ds, runs)
        shuffled = list(range(6))
        rng.shuffle(shuffled)
        other = evaluate_tracker([ds[i] for i in shuffled], [runs[i] for i in reversed(shuffled)])
        assert (other.f_star, other.tau_star) == (base.f_star, base.tau_star)
        assert other.averaged == base.averaged
        assert evaluate_tracker(ds, runs, jobs=4) == base

    def test_stored_f_recomputes(self, fixture5):
        truth, run = fixture5
        report = evaluate_tracker([truth], [run])
        assert all(p.f == f_score(p.pr, p.re) for p in report.averaged.points)

    def test_missing_run(self, fixture5):
        truth, run = fixture5
        other = SequenceTruth("other", truth.frames)
        with pytest.raises(AlignmentError, match="other"):
            evaluate_tracker([truth, other], [run])


def _read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


class TestEmit:
    def test_files_and_round_trip(self, tmp_path, fixture5):
        truth, run = fixture5
        report = evaluate_tracker([truth], [run], n_thresholds=20, tracker_name="fx")
        paths = emit_report(report, tmp_path)
        for name in ("pr_curve.csv", "summary.csv", "pr_plot.svg", "f_plot.svg"):
            assert (tmp_path / name).is_file()
        assert len(paths) == 5

        rows = _read_csv(tmp_path / "pr_curve.csv")
        assert rows[0] == ["tau", "pr", "re", "f"]
        for row, p in zip(rows[1:], report.averaged.points):
            for text, value in zip(row, (p.tau_theta, p.pr, p.re, p.f)):
                assert float(text) == pytest.approx(value, rel=1e-8, abs=0)
        assert b"\r\n" not in (tmp_path / "pr_curve.csv").read_bytes()

    def test_summary_first_row(self, tmp_path, fixture5):
        truth, run = fixture5
        emit_report(evaluate_tracker([truth], [run]), tmp_path)
        rows = _read_csv(tmp_path / "summary.csv")
        assert rows[0] == ["metric", "value"]
        assert rows[1][0] == "f_star"
        assert float(rows[1][1]) == pytest.approx(0.666667, abs=1e-6)
        summary = dict(rows[1:])
        assert summary["group_G1"] == "" and float(summary["group_G2"]) == float(rows[1][1])
        assert (summary["dsp"], summary["adl"], summary["adn"]) == ("1", "2", "1")

    def test_single_point_plot(self, tmp_path):
        curve = PrCurve((PrPoint(0.5, 0.8, 0.6),))
        report = EvalReport(
            tracker_name="one", axis=(0.5,), per_sequence={"s": curve}, averaged=curve,
            f_star=curve.points[0].f, tau_star=0.5, groups={"G1": None, "G2": None, "G3": curve.points[0].f},
            attributes={}, dataset_stats=DisappearanceStats(0, 0.0, 0.0),
            sequence_groups={"s": "G3"}, sequence_disappearances={"s": 0},
        )
        emit_report(report, tmp_path)
        svg = (tmp_path / "f_plot.svg").read_text()
        assert "<circle" in svg and "<polyline" not in svg
        assert 'width="800" height="600"' in svg

    def test_svg_self_contained(self, tmp_path, fixture5):
        truth, run = fixture5
        emit_report(evaluate_tracker([truth], [run]), tmp_path)
        for name in ("pr_plot.svg", "f_plot.svg"):
            svg = (tmp_path / name).read_text()
            assert svg.startswith("<svg") and svg.rstrip().endswith("</svg>")
            assert "href" not in svg and "<style" not in svg

    def test_deterministic(self, tmp_path, fixture5):
        truth, run = fixture5
        report = evaluate_tracker([truth], [run])
        emit_report(report, tmp_path / "a")
        emit_report(report, tmp_path / "b")
        for p in (tmp_path / "a").iterdir():
            assert p.read_bytes() == (tmp_path / "b" / p.name).read_bytes()
