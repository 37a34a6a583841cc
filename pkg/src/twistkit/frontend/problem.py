"""Problem files: sectioned plain text declaring a verification job.

Bracketed headers open sections; each body line holds one declaration or
assignment; ``#`` starts a comment.  Declaration sections are gathered in a
first pass so that expressions anywhere in the file can reference them.

    [vars] [deps] [aux] [constants] [functions]   declarations
    [equation NAME]        u_xx = ...   (solved)  or  EXPR = 0 / EXPR
    [lambda NAME]          one expression
    [mu NAME]              x[1,1] = EXPR           (direction, row, column)
    [gauge NAME]           R[1,2] = EXPR
    [covering NAME]        base = EQNAME ; w_x = EXPR lines
    [matrix-covering NAME] base = EQNAME ; A[1,1] = EXPR ; B[i,j] = EXPR
    [field NAME]           u = EXPR                (coefficient per variable)
    [task KIND]            key = value lines
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field

from ..core import Expr, ZERO, as_single_atom, normalize
from ..core.atoms import AuxJetVar, IndepVar, JetVar, mi_order
from ..core.printing import render_expr
from ..errors import (
    DuplicateDeclaration,
    ParseError,
    TwistkitError,
    UndeclaredReference,
)
from .parser import Declarations, parse_expression

_HEADER = re.compile(r"^\[([a-z-]+)(?:\s+([A-Za-z][A-Za-z0-9_-]*))?\]$")
_ENTRY = re.compile(r"^([A-Za-z][A-Za-z0-9]*)\[(\d+)\s*,\s*(\d+)\]$")
_FUNCDECL = re.compile(r"^([A-Za-z][A-Za-z0-9]*)\(([^)]*)\)$")

_DECL_SECTIONS = ("vars", "deps", "aux", "constants", "functions")
_TASK_KINDS = (
    "prolong",
    "check-symmetry",
    "check-augmented-symmetry",
    "check-covering",
    "check-matrix-covering",
    "check-mch",
    "gauge-diagram",
    "check-semiclassical",
    "reconstruct",
)


@dataclass
class Task:
    kind: str
    params: dict
    line: int = 0

    def __eq__(self, other):
        return (
            isinstance(other, Task)
            and self.kind == other.kind
            and self.params == other.params
        )


@dataclass
class CoveringSpec:
    base: str
    rules: dict  # (b, i) -> Expr


@dataclass
class MatrixCoveringSpec:
    base: str
    dim: int
    A: dict  # (i, j) zero-based -> Expr
    B: dict


@dataclass
class ProblemDocument:
    decls: Declarations
    equations: dict = dc_field(default_factory=dict)  # name -> list of line tuples
    lambdas: dict = dc_field(default_factory=dict)
    mus: dict = dc_field(default_factory=dict)  # name -> {(i, a, b): Expr}
    gauges: dict = dc_field(default_factory=dict)  # name -> {(i, j): Expr}
    coverings: dict = dc_field(default_factory=dict)
    matrix_coverings: dict = dc_field(default_factory=dict)
    fields: dict = dc_field(default_factory=dict)  # name -> {("u", a)|("x", i)|("w", b): Expr}
    tasks: list = dc_field(default_factory=list)


def _content_lines(src: str):
    for lineno, raw in enumerate(src.split("\n"), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def parse_problem(src: str) -> ProblemDocument:
    sections = []  # (kind, name, lineno, [(lineno, line), ...])
    current = None
    for lineno, line in _content_lines(src):
        m = _HEADER.match(line)
        if m:
            kind, name = m.group(1), m.group(2)
            current = (kind, name, lineno, [])
            sections.append(current)
            continue
        if current is None:
            raise ParseError("content before any section header", lineno)
        current[3].append((lineno, line))

    # pass 1: declarations
    decl_lists = {k: [] for k in _DECL_SECTIONS}
    functions = {}
    for kind, name, lineno, body in sections:
        if kind not in _DECL_SECTIONS:
            continue
        if name:
            raise ParseError(f"section [{kind}] takes no name", lineno)
        for ln, line in body:
            if kind == "functions":
                m = _FUNCDECL.match(line.replace(" ", ""))
                if not m:
                    raise ParseError("function declarations look like g(x)", ln)
                fname, args = m.group(1), [a for a in m.group(2).split(",") if a]
                if fname in functions:
                    raise DuplicateDeclaration(f"function {fname!r} declared twice")
                functions[fname] = tuple(args)
            else:
                for nm in line.split():
                    decl_lists[kind].append(nm)
    decls = Declarations(
        indep=decl_lists["vars"],
        dep=decl_lists["deps"],
        aux=decl_lists["aux"],
        constants=decl_lists["constants"],
        functions=functions,
    )

    doc = ProblemDocument(decls=decls)

    def parse_rhs(text, ln):
        return parse_expression(text, decls, ln)

    def split_assign(line, ln):
        if "=" not in line:
            return None, line
        lhs, rhs = line.split("=", 1)
        return lhs.strip(), rhs.strip()

    for kind, name, lineno, body in sections:
        if kind in _DECL_SECTIONS:
            continue
        if kind == "equation":
            _need_name(kind, name, lineno)
            _no_dup(doc.equations, name, kind)
            lines = []
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                if lhs is not None:
                    lhs_e = parse_rhs(lhs, ln)
                    rhs_e = parse_rhs(rhs, ln)
                    lead = as_single_atom(lhs_e)
                    if isinstance(lead, (JetVar, AuxJetVar)) and mi_order(lead.J) > 0:
                        lines.append(("solved", lead, rhs_e))
                    else:
                        lines.append(("residual", None, lhs_e - rhs_e))
                else:
                    lines.append(("residual", None, parse_rhs(line, ln)))
            doc.equations[name] = lines
        elif kind == "lambda":
            _need_name(kind, name, lineno)
            _no_dup(doc.lambdas, name, kind)
            if len(body) != 1:
                raise ParseError("[lambda] sections hold exactly one expression", lineno)
            doc.lambdas[name] = parse_rhs(body[0][1], body[0][0])
        elif kind == "mu":
            _need_name(kind, name, lineno)
            _no_dup(doc.mus, name, kind)
            entries = {}
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                m = _ENTRY.match((lhs or "").replace(" ", ""))
                if not m or m.group(1) not in decls.indep:
                    raise ParseError("mu entries look like x[1,2] = ...", ln)
                i = decls.indep.index(m.group(1))
                a, b = int(m.group(2)) - 1, int(m.group(3)) - 1
                if a < 0 or b < 0 or a >= decls.q or b >= decls.q:
                    raise ParseError("mu entry index out of range", ln)
                entries[(i, a, b)] = parse_rhs(rhs, ln)
            doc.mus[name] = entries
        elif kind == "gauge":
            _need_name(kind, name, lineno)
            _no_dup(doc.gauges, name, kind)
            entries = {}
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                m = _ENTRY.match((lhs or "").replace(" ", ""))
                if not m or m.group(1) != "R":
                    raise ParseError("gauge entries look like R[1,2] = ...", ln)
                i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
                if i < 0 or j < 0 or i >= decls.q or j >= decls.q:
                    raise ParseError("gauge entry index out of range", ln)
                entries[(i, j)] = parse_rhs(rhs, ln)
            doc.gauges[name] = entries
        elif kind == "covering":
            _need_name(kind, name, lineno)
            _no_dup(doc.coverings, name, kind)
            base = None
            rules = {}
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                if lhs is None:
                    raise ParseError("covering lines look like w_x = ...", ln)
                if lhs == "base":
                    base = rhs
                    continue
                lhs_e = parse_rhs(lhs, ln)
                lead = as_single_atom(lhs_e)
                if not isinstance(lead, AuxJetVar) or mi_order(lead.J) != 1:
                    raise UndeclaredReference(
                        f"covering rule left side must be a first-order w-jet (line {ln})"
                    )
                i = next(idx for idx, c in enumerate(lead.J) if c)
                rules[(lead.aux, i)] = parse_rhs(rhs, ln)
            if base is None:
                raise ParseError(f"covering {name!r} needs a base equation", lineno)
            doc.coverings[name] = CoveringSpec(base=base, rules=rules)
        elif kind == "matrix-covering":
            _need_name(kind, name, lineno)
            _no_dup(doc.matrix_coverings, name, kind)
            base = None
            A, B = {}, {}
            dim = 0
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                if lhs == "base":
                    base = rhs
                    continue
                m = _ENTRY.match((lhs or "").replace(" ", ""))
                if not m or m.group(1) not in ("A", "B"):
                    raise ParseError("matrix entries look like A[1,2] = ...", ln)
                i, j = int(m.group(2)) - 1, int(m.group(3)) - 1
                dim = max(dim, i + 1, j + 1)
                (A if m.group(1) == "A" else B)[(i, j)] = parse_rhs(rhs, ln)
            if base is None:
                raise ParseError(f"matrix-covering {name!r} needs a base equation", lineno)
            doc.matrix_coverings[name] = MatrixCoveringSpec(base=base, dim=dim, A=A, B=B)
        elif kind == "field":
            _need_name(kind, name, lineno)
            _no_dup(doc.fields, name, kind)
            comps = {}
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                atom = decls.variable_atom(lhs or "")
                if atom is None:
                    raise UndeclaredReference(
                        f"field component {lhs!r} is not a declared variable (line {ln})"
                    )
                if isinstance(atom, IndepVar):
                    key = ("x", atom.index)
                elif isinstance(atom, JetVar):
                    key = ("u", atom.dep)
                else:
                    key = ("w", atom.aux)
                comps[key] = parse_rhs(rhs, ln)
            doc.fields[name] = comps
        elif kind == "task":
            if not name or name not in _TASK_KINDS:
                raise ParseError(
                    f"unknown task kind {name!r}; expected one of {', '.join(_TASK_KINDS)}",
                    lineno,
                )
            params = {}
            for ln, line in body:
                lhs, rhs = split_assign(line, ln)
                if lhs is None:
                    raise ParseError("task lines look like key = value", ln)
                params[lhs] = rhs
            doc.tasks.append(Task(kind=name, params=params, line=lineno))
        else:
            raise ParseError(f"unknown section [{kind}]", lineno)

    _validate_references(doc)
    return doc


def _need_name(kind, name, lineno):
    if not name:
        raise ParseError(f"section [{kind}] needs a name", lineno)


def _no_dup(table, name, kind):
    if name in table:
        raise DuplicateDeclaration(f"{kind} {name!r} declared twice")


def _validate_references(doc: ProblemDocument):
    for name, spec in doc.coverings.items():
        if spec.base not in doc.equations:
            raise UndeclaredReference(
                f"covering {name!r} references undeclared equation {spec.base!r}"
            )
    for name, spec in doc.matrix_coverings.items():
        if spec.base not in doc.equations:
            raise UndeclaredReference(
                f"matrix-covering {name!r} references undeclared equation {spec.base!r}"
            )
    refs = {
        "equation": doc.equations,
        "field": doc.fields,
        "covering": doc.coverings,
        "matrix-covering": doc.matrix_coverings,
        "lambda": doc.lambdas,
        "mu": doc.mus,
        "gauge": doc.gauges,
    }
    for task in doc.tasks:
        for key, table_name in (
            ("equation", "equation"),
            ("field", "field"),
            ("covering", "covering"),
            ("matrix-covering", "matrix-covering"),
            ("lambda", "lambda"),
            ("mu", "mu"),
            ("gauge", "gauge"),
        ):
            val = task.params.get(key)
            if val is not None and val not in refs[table_name]:
                raise UndeclaredReference(
                    f"task {task.kind!r} references undeclared {table_name} {val!r}"
                )


# ---------------------------------------------------------------------------
# rendering (round-trip partner of parse_problem)


def render_problem(doc: ProblemDocument) -> str:
    names = doc.decls.names()
    out = []

    def expr(e):
        return render_expr(e, names)

    if doc.decls.indep:
        out.append("[vars]")
        out.extend(doc.decls.indep)
    if doc.decls.dep:
        out.append("")
        out.append("[deps]")
        out.extend(doc.decls.dep)
    if doc.decls.aux:
        out.append("")
        out.append("[aux]")
        out.extend(doc.decls.aux)
    if doc.decls.constants:
        out.append("")
        out.append("[constants]")
        out.extend(doc.decls.constants)
    if doc.decls.functions:
        out.append("")
        out.append("[functions]")
        for fname, args in doc.decls.functions.items():
            out.append(f"{fname}({', '.join(args)})")
    from ..core.printing import render_atom

    for name, lines in doc.equations.items():
        out.append("")
        out.append(f"[equation {name}]")
        for kind, lead, e in lines:
            if kind == "solved":
                out.append(f"{render_atom(lead, names)} = {expr(e)}")
            else:
                out.append(f"{expr(e)} = 0")
    for name, e in doc.lambdas.items():
        out.append("")
        out.append(f"[lambda {name}]")
        out.append(expr(e))
    for name, entries in doc.mus.items():
        out.append("")
        out.append(f"[mu {name}]")
        for (i, a, b) in sorted(entries):
            out.append(f"{names.indep_name(i)}[{a + 1},{b + 1}] = {expr(entries[(i, a, b)])}")
    for name, entries in doc.gauges.items():
        out.append("")
        out.append(f"[gauge {name}]")
        for (i, j) in sorted(entries):
            out.append(f"R[{i + 1},{j + 1}] = {expr(entries[(i, j)])}")
    for name, spec in doc.coverings.items():
        out.append("")
        out.append(f"[covering {name}]")
        out.append(f"base = {spec.base}")
        for (b, i) in sorted(spec.rules):
            from ..core.atoms import mi_append, mi_zero

            atom = AuxJetVar(b, mi_append(mi_zero(doc.decls.p), i))
            out.append(f"{render_atom(atom, names)} = {expr(spec.rules[(b, i)])}")
    for name, spec in doc.matrix_coverings.items():
        out.append("")
        out.append(f"[matrix-covering {name}]")
        out.append(f"base = {spec.base}")
        for (i, j) in sorted(spec.A):
            out.append(f"A[{i + 1},{j + 1}] = {expr(spec.A[(i, j)])}")
        for (i, j) in sorted(spec.B):
            out.append(f"B[{i + 1},{j + 1}] = {expr(spec.B[(i, j)])}")
    for name, comps in doc.fields.items():
        out.append("")
        out.append(f"[field {name}]")
        order = {"x": 0, "u": 1, "w": 2}
        for key in sorted(comps, key=lambda k: (order[k[0]], k[1])):
            kind, idx = key
            if kind == "x":
                nm = names.indep_name(idx)
            elif kind == "u":
                nm = names.dep_name(idx)
            else:
                nm = names.aux_name(idx)
            out.append(f"{nm} = {expr(comps[key])}")
    for task in doc.tasks:
        out.append("")
        out.append(f"[task {task.kind}]")
        for k, v in task.params.items():
            out.append(f"{k} = {v}")
    return "\n".join(out) + "\n"
