"""Problem parsing, task dispatch, and report rendering."""

from .execute import Report, TaskResult, execute
from .parser import Declarations, parse_expression
from .problem import ProblemDocument, Task, parse_problem, render_problem
from .report import render_report

__all__ = [
    "Report",
    "TaskResult",
    "execute",
    "Declarations",
    "parse_expression",
    "ProblemDocument",
    "Task",
    "parse_problem",
    "render_problem",
    "render_report",
]
