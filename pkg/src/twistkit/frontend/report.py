"""Report rendering: aligned human text and a line-oriented structured format.

The structured format is versioned and byte-stable: given the same problem
document and seed, two runs emit identical bytes.  Timing is therefore shown
in the human format only.
"""

from __future__ import annotations

from .execute import Report, TaskResult

STRUCTURED_HEADER = "twistkit-report 1"


def render_report(report: Report, format: str = "human") -> str:
    if format == "structured":
        return _render_structured(report)
    if format == "human":
        return _render_human(report)
    raise ValueError(f"unknown report format {format!r}")


def _render_structured(report: Report) -> str:
    lines = [STRUCTURED_HEADER, f"seed={report.seed}"]
    for r in report.results:
        pre = f"task.{r.index}"
        lines.append(f"{pre}.name={r.kind}")
        lines.append(f"{pre}.verdict={r.verdict}")
        if r.error:
            lines.append(f"{pre}.error={r.error}")
        for i, s in enumerate(r.residuals):
            lines.append(f"{pre}.residual.{i}={s}")
        for i, s in enumerate(r.cofactors):
            lines.append(f"{pre}.cofactor.{i}={s}")
        for key in sorted(r.details):
            lines.append(f"{pre}.detail.{key}={r.details[key]}")
    return "\n".join(lines) + "\n"


def _render_human(report: Report) -> str:
    lines = [f"twistkit report (seed {report.seed})", ""]
    width = 64
    for r in report.results:
        params = ", ".join(f"{k}={v}" for k, v in sorted(r.params.items()))
        head = f"[{r.index}] {r.kind}" + (f" ({params})" if params else "")
        pad = max(1, width - len(head))
        lines.append(f"{head} {'.' * pad} {r.verdict.upper()}  ({r.seconds * 1000:.1f} ms)")
        if r.error:
            lines.append(f"    error: {r.error}")
        for i, s in enumerate(r.residuals):
            lines.append(f"    residual[{i}] = {s}")
        for i, s in enumerate(r.cofactors):
            lines.append(f"    cofactor[{i}] = {s}")
        for key in sorted(r.details):
            lines.append(f"    {key} = {r.details[key]}")
    lines.append("")
    overall = {0: "pass", 1: "fail", 2: "error"}
    lines.append(f"overall: {overall[report.exit_code]}")
    return "\n".join(lines) + "\n"
