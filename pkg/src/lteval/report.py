"""Writing evaluation reports: CSV tables and SVG plots."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Optional, Sequence

from .core import PrCurve
from .protocol import GROUPS, EvalReport

PR_CURVE_FILE = "pr_curve.csv"
SUMMARY_FILE = "summary.csv"
SEQUENCES_FILE = "sequences.csv"
PR_PLOT_FILE = "pr_plot.svg"
F_PLOT_FILE = "f_plot.svg"

WIDTH, HEIGHT = 800, 600
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 40, 50, 90


def fmt(value: Optional[float]) -> str:
    """Nine significant digits; empty for a missing value."""
    if value is None:
        return ""
    return format(value, ".9g")


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def pr_curve_csv(curve: PrCurve) -> str:
    return _csv_text(
        ["tau", "pr", "re", "f"],
        [[fmt(p.tau_theta), fmt(p.pr), fmt(p.re), fmt(p.f)] for p in curve.points],
    )


def summary_csv(report: EvalReport) -> str:
    rows = [["f_star", fmt(report.f_star)], ["tau_star", fmt(report.tau_star)]]
    rows += [[f"group_{g}", fmt(report.groups.get(g))] for g in GROUPS]
    rows += [[f"attribute_{code.value}", fmt(score)] for code, score in report.attributes.items()]
    stats = report.dataset_stats
    rows += [["dsp", str(stats.dsp)], ["adl", fmt(stats.adl)], ["adn", fmt(stats.adn)]]
    return _csv_text(["metric", "value"], rows)


def sequences_csv(report: EvalReport) -> str:
    rows = []
    for name in sorted(report.per_sequence):
        f, tau = report.sequence_max_f(name)
        rows.append([name, fmt(f), fmt(tau), str(report.sequence_disappearances[name]), report.sequence_groups[name]])
    return _csv_text(["sequence", "f_star", "tau_star", "disappearances", "group"], rows)


class _Frame:
    """Maps data coordinates onto the plotting area of the fixed viewport."""

    def __init__(self, x_range: tuple[float, float], y_range: tuple[float, float]):
        self.x0, self.x1 = x_range
        self.y0, self.y1 = y_range
        self.pw = WIDTH - _LEFT - _RIGHT
        self.ph = HEIGHT - _TOP - _BOTTOM

    def x(self, v: float) -> float:
        if self.x1 == self.x0:
            return _LEFT + self.pw / 2
        return _LEFT + (v - self.x0) / (self.x1 - self.x0) * self.pw

    def y(self, v: float) -> float:
        if self.y1 == self.y0:
            return _TOP + self.ph / 2
        return _TOP + self.ph - (v - self.y0) / (self.y1 - self.y0) * self.ph


def _c(v: float) -> str:
    return format(v, ".2f")


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _svg(title: str, body: list[str]) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="30" font-family="sans-serif" font-size="18" '
        f'text-anchor="middle" fill="#000000">{_esc(title)}</text>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def _axes(frame: _Frame, xticks, yticks, xlabel: str, ylabel: str) -> list[str]:
    x_left, x_right = _LEFT, _LEFT + frame.pw
    y_top, y_bottom = _TOP, _TOP + frame.ph
    out = [
        f'<rect x="{x_left}" y="{y_top}" width="{frame.pw}" height="{frame.ph}" '
        f'fill="none" stroke="#000000" stroke-width="1"/>'
    ]
    for value, label in xticks:
        px = _c(frame.x(value))
        out.append(f'<line x1="{px}" y1="{y_bottom}" x2="{px}" y2="{y_bottom + 5}" stroke="#000000"/>')
        out.append(
            f'<text x="{px}" y="{y_bottom + 20}" font-family="sans-serif" font-size="12" '
            f'text-anchor="middle" fill="#000000">{_esc(label)}</text>'
        )
    for value, label in yticks:
        py = _c(frame.y(value))
        out.append(
            f'<line x1="{x_left - 5}" y1="{py}" x2="{x_right}" y2="{py}" stroke="#dddddd"/>'
        )
        out.append(
            f'<text x="{x_left - 10}" y="{py}" font-family="sans-serif" font-size="12" '
            f'text-anchor="end" dominant-baseline="middle" fill="#000000">{_esc(label)}</text>'
        )
    out.append(
        f'<text x="{_LEFT + frame.pw / 2:.0f}" y="{HEIGHT - 15}" font-family="sans-serif" '
        f'font-size="14" text-anchor="middle" fill="#000000">{_esc(xlabel)}</text>'
    )
    out.append(
        f'<text x="20" y="{_TOP + frame.ph / 2:.0f}" font-family="sans-serif" font-size="14" '
        f'text-anchor="middle" fill="#000000" transform="rotate(-90 20 {_TOP + frame.ph / 2:.0f})">'
        f"{_esc(ylabel)}</text>"
    )
    return out


def _series(frame: _Frame, xs: Sequence[float], ys: Sequence[float], color: str) -> list[str]:
    coords = [(frame.x(x), frame.y(y)) for x, y in zip(xs, ys)]
    if len(coords) == 1:
        cx, cy = coords[0]
        return [f'<circle cx="{_c(cx)}" cy="{_c(cy)}" r="4" fill="{color}"/>']
    points = " ".join(f"{_c(px)},{_c(py)}" for px, py in coords)
    return [f'<polyline points="{points}" fill="none" stroke="{color}" stroke-width="2"/>']


_UNIT_TICKS = [(i / 5, format(i / 5, ".1f")) for i in range(6)]


def pr_plot_svg(report: EvalReport) -> str:
    curve = report.averaged
    frame = _Frame((0.0, 1.0), (0.0, 1.0))
    body = _axes(frame, _UNIT_TICKS, _UNIT_TICKS, "Recall", "Precision")
    body += _series(frame, curve.recall, curve.precision, "#1f77b4")
    title = f"Tracking precision/recall: {report.tracker_name}" if report.tracker_name else "Tracking precision/recall"
    return _svg(title, body)


def f_plot_svg(report: EvalReport) -> str:
    curve = report.averaged
    lo, hi = curve.thresholds[0], curve.thresholds[-1]
    frame = _Frame((lo, hi), (0.0, 1.0))
    if hi > lo:
        raw = [(lo + (hi - lo) * i / 5, format(lo + (hi - lo) * i / 5, ".3g")) for i in range(6)]
    else:
        raw = [(lo, format(lo, ".3g"))]
    body = _axes(frame, raw, _UNIT_TICKS, "Confidence threshold (raw; normalized below)", "F-score")
    # second row of tick labels on the [0, 1]-normalized threshold scale
    for i, (value, _) in enumerate(raw):
        norm = i / 5 if hi > lo else 0.0
        body.append(
            f'<text x="{_c(frame.x(value))}" y="{_TOP + frame.ph + 38}" font-family="sans-serif" '
            f'font-size="11" text-anchor="middle" fill="#666666">{norm:.1f}</text>'
        )
    body += _series(frame, curve.thresholds, curve.fscore, "#d62728")
    mx, my = frame.x(report.tau_star), frame.y(report.f_star)
    body.append(f'<circle cx="{_c(mx)}" cy="{_c(my)}" r="6" fill="none" stroke="#000000" stroke-width="2"/>')
    body.append(
        f'<text x="{_c(mx)}" y="{_c(my - 12)}" font-family="sans-serif" font-size="12" '
        f'text-anchor="middle" fill="#000000">F={report.f_star:.3f}</text>'
    )
    title = f"Tracking F-score: {report.tracker_name}" if report.tracker_name else "Tracking F-score"
    return _svg(title, body)


def emit_report(report: EvalReport, out_dir: Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    contents = {
        PR_CURVE_FILE: pr_curve_csv(report.averaged),
        SUMMARY_FILE: summary_csv(report),
        SEQUENCES_FILE: sequences_csv(report),
        PR_PLOT_FILE: pr_plot_svg(report),
        F_PLOT_FILE: f_plot_svg(report),
    }
    paths = []
    for name, text in contents.items():
        path = out_dir / name
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        paths.append(path)
    return paths
