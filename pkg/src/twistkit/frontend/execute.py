"""Task dispatch: run every task of a problem document and collect a report.

Tasks are independent; a failure or error in one never aborts its siblings,
and results are reported in document order.  All check machinery is pure, so
sequential execution satisfies the concurrency contract trivially.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field as dc_field

from ..core import Expr, ZERO, iter_atoms, max_jet_order, normalize, zero_oracle
from ..core.atoms import ExpAtom, FuncAtom, PowAtom, mi_order, mi_zero
from ..core.printing import render_atom, render_expr
from ..covering import (
    CoveringSystem,
    MatrixCovering,
    check_augmented_symmetry,
    check_compatibility,
    check_matrix_covering,
    check_semiclassical,
    reconstruct_lambda,
)
from ..errors import TwistkitError
from ..forms import MatrixOneForm, check_MCH
from ..gauge import GaugeMap, check_gauge_diagram
from ..jets import (
    EquationSystem,
    JetSpace,
    VectorField,
    check_symmetry,
    prolong_lambda,
    prolong_mu,
    prolong_standard,
)
from .problem import ProblemDocument, Task


@dataclass
class TaskResult:
    index: int
    kind: str
    params: dict
    verdict: str  # pass | fail | error
    residuals: list = dc_field(default_factory=list)
    cofactors: list = dc_field(default_factory=list)
    details: dict = dc_field(default_factory=dict)
    error: str = ""
    seconds: float = 0.0


@dataclass
class Report:
    seed: int
    results: list

    @property
    def exit_code(self) -> int:
        if any(r.verdict == "error" for r in self.results):
            return 2
        if any(r.verdict == "fail" for r in self.results):
            return 1
        return 0


class _TaskContext:
    def __init__(self, doc: ProblemDocument, seed: int):
        self.doc = doc
        self.seed = seed
        self.names = doc.decls.names()

    # -- object materialisation ------------------------------------------------

    def space(self, order: int) -> JetSpace:
        d = self.doc.decls
        return JetSpace(d.p, max(d.q, 1), d.r, max(order, 1), self.names)

    def system_order(self, eqname: str) -> int:
        lines = self.doc.equations[eqname]
        orders = []
        for kind, lead, e in lines:
            if kind == "solved":
                orders.append(max(mi_order(lead.J), max_jet_order(e)))
            else:
                orders.append(max_jet_order(e))
        return max(orders, default=1)

    def equation_system(self, eqname: str, space: JetSpace) -> EquationSystem:
        lines = self.doc.equations[eqname]
        residuals = []
        solved = []
        auto = False
        for kind, lead, e in lines:
            if kind == "solved":
                residuals.append(Expr.atom(lead) - e)
                solved.append((lead, e))
            else:
                residuals.append(e)
                auto = True
        if not auto:
            try:
                return EquationSystem(space, residuals, solved)
            except TwistkitError:
                pass  # written orientation is not rank-reducing; re-solve
        return EquationSystem(space, residuals)

    def field(self, name: str, space: JetSpace) -> VectorField:
        comps = self.doc.fields[name]
        xi = [comps.get(("x", i), ZERO) for i in range(space.p)]
        phi = [comps.get(("u", a), ZERO) for a in range(space.q)]
        eta = [comps.get(("w", b), ZERO) for b in range(space.r)]
        semi = any(max_jet_order(e) > 0 for e in eta)
        return VectorField(space, xi, phi, eta, semiclassical=semi)

    def covering(self, name: str, order: int):
        spec = self.doc.coverings[name]
        n = max(order, self.system_order(spec.base))
        space = self.space(n)
        base = self.equation_system(spec.base, space)
        return CoveringSystem(base, spec.rules)

    def mu(self, name: str, space: JetSpace) -> MatrixOneForm:
        entries = self.doc.mus[name]
        mats = [
            [[entries.get((i, a, b), ZERO) for b in range(space.q)] for a in range(space.q)]
            for i in range(space.p)
        ]
        return MatrixOneForm(space, mats)

    def gauge(self, name: str, space: JetSpace) -> GaugeMap:
        entries = self.doc.gauges[name]
        R = [
            [entries.get((i, j), ZERO) for j in range(space.q)] for i in range(space.q)
        ]
        return GaugeMap(space, R)

    def expr_str(self, e) -> str:
        return render_expr(normalize(e), self.names)

    def oracle_confirm(self, residuals) -> str | None:
        """Cross-check nonzero residuals containing transcendental atoms."""
        interesting = [
            r
            for r in residuals
            if not r.is_zero()
            and any(isinstance(a, (ExpAtom, PowAtom, FuncAtom)) for a in iter_atoms(r))
        ]
        if not interesting:
            return None
        ok = all(not zero_oracle(r, seed=self.seed) for r in interesting)
        return "confirmed" if ok else "inconclusive"


def _int_param(task: Task, key: str, default: int) -> int:
    raw = task.params.get(key)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError:
        raise TwistkitError(f"task parameter {key!r} must be an integer") from None


def _run_check_symmetry(ctx: _TaskContext, task: Task, res: TaskResult):
    eqname = task.params["equation"]
    order = _int_param(task, "order", ctx.system_order(eqname))
    space = ctx.space(order)
    sys = ctx.equation_system(eqname, space)
    X = ctx.field(task.params["field"], space)
    mode = task.params.get("mode", "standard")
    lam = ctx.doc.lambdas[task.params["lambda"]] if "lambda" in task.params else None
    mu = ctx.mu(task.params["mu"], space) if "mu" in task.params else None
    rep = check_symmetry(X, sys, mode=mode, lam=lam, mu=mu, order=order)
    res.verdict = "pass" if rep.passed else "fail"
    res.residuals = [ctx.expr_str(r) for r in rep.residuals]
    res.details["mode"] = mode
    oracle = ctx.oracle_confirm(rep.residuals)
    if oracle:
        res.details["oracle"] = oracle


def _run_check_augmented(ctx: _TaskContext, task: Task, res: TaskResult):
    order = _int_param(task, "order", 0)
    cov = ctx.covering(task.params["covering"], order)
    n = max(order, cov.base.order, 1)
    X = ctx.field(task.params["field"], cov.space)
    rep = check_augmented_symmetry(X, cov, n)
    res.verdict = "pass" if rep.passed else "fail"
    res.residuals = [ctx.expr_str(r) for r in rep.base_residuals] + [
        ctx.expr_str(rep.aux_residuals[k]) for k in sorted(rep.aux_residuals)
    ]
    oracle = ctx.oracle_confirm(rep.base_residuals + list(rep.aux_residuals.values()))
    if oracle:
        res.details["oracle"] = oracle


def _run_check_covering(ctx: _TaskContext, task: Task, res: TaskResult):
    cov = ctx.covering(task.params["covering"], 0)
    rep = check_compatibility(cov)
    res.verdict = "pass" if rep.passed else "fail"
    for key in sorted(rep.residuals):
        res.residuals.append(ctx.expr_str(rep.residuals[key]))
        cofs = rep.cofactors.get(key, [])
        if len(cofs) == 1:
            res.cofactors.append(ctx.expr_str(cofs[0]))
        else:
            res.cofactors.extend(ctx.expr_str(c) for c in cofs)
    res.details["trivial"] = "true" if rep.trivial else "false"


def _run_check_matrix_covering(ctx: _TaskContext, task: Task, res: TaskResult):
    spec = ctx.doc.matrix_coverings[task.params["matrix-covering"]]
    n = ctx.system_order(spec.base)
    space = ctx.space(n)
    base = ctx.equation_system(spec.base, space)
    dim = spec.dim
    A = [[spec.A.get((i, j), ZERO) for j in range(dim)] for i in range(dim)]
    B = [[spec.B.get((i, j), ZERO) for j in range(dim)] for i in range(dim)]
    rep = check_matrix_covering(MatrixCovering(space, A, B), base)
    res.verdict = "pass" if rep.passed else "fail"
    for i in range(dim):
        for j in range(dim):
            res.residuals.append(ctx.expr_str(rep.curvature[i][j]))
            cofs = rep.cofactors[i][j]
            if cofs is None:
                res.cofactors.append("<none>")
            elif len(cofs) == 1:
                res.cofactors.append(ctx.expr_str(cofs[0]))
            else:
                res.cofactors.extend(ctx.expr_str(c) for c in cofs)
    res.details["trivial"] = "true" if rep.trivial else "false"


def _run_check_mch(ctx: _TaskContext, task: Task, res: TaskResult):
    space = ctx.space(2)
    mu = ctx.mu(task.params["mu"], space)
    rep = check_MCH(mu)
    res.verdict = "pass" if rep.passed else "fail"
    for key in sorted(rep.residuals):
        for row in rep.residuals[key]:
            for v in row:
                res.residuals.append(ctx.expr_str(v))


def _run_gauge_diagram(ctx: _TaskContext, task: Task, res: TaskResult):
    order = _int_param(task, "order", 1)
    space = ctx.space(order)
    g = ctx.gauge(task.params["gauge"], space)
    X = ctx.field(task.params["field"], space)
    rep = check_gauge_diagram(g, X, order)
    res.verdict = "pass" if rep.passed else "fail"
    for (a, J), diff in rep.mismatches:
        res.residuals.append(ctx.expr_str(diff))
    res.details["order"] = str(order)


def _run_check_semiclassical(ctx: _TaskContext, task: Task, res: TaskResult):
    cov = ctx.covering(task.params["covering"], 0)
    X = ctx.field(task.params["field"], cov.space)
    rep = check_semiclassical(X, cov)
    res.verdict = "pass" if rep.is_semiclassical else "fail"
    res.details["semiclassical"] = "true" if rep.is_semiclassical else "false"
    res.details["exponential-form"] = "true" if rep.exponential_form else "false"
    if rep.exponential_form:
        for a, v in enumerate(rep.phi0):
            res.details[f"phi0.{ctx.names.dep_name(a)}"] = ctx.expr_str(v)


def _run_reconstruct(ctx: _TaskContext, task: Task, res: TaskResult):
    target = task.params.get("target", "lambda")
    if target != "lambda":
        raise TwistkitError(
            "problem files support target = lambda; the matrix pipeline is a library call"
        )
    order = _int_param(task, "order", 0)
    cov = ctx.covering(task.params["covering"], max(order, 1))
    n = max(order, cov.base.order)
    X = ctx.field(task.params["field"], cov.space)
    rep = reconstruct_lambda(X, cov, n)
    res.verdict = "pass" if rep.matched else "fail"
    res.details["matched"] = "true" if rep.matched else "false"
    res.details["lambda"] = ctx.expr_str(rep.lam)
    for a, v in enumerate(rep.X0.phi):
        res.details[f"X0.{ctx.names.dep_name(a)}"] = ctx.expr_str(v)
    for (a, J) in sorted(rep.coefficients, key=lambda k: (mi_order(k[1]), k[0], k[1])):
        from ..core.atoms import JetVar

        res.details[f"coefficient.{render_atom(JetVar(a, J), ctx.names)}"] = ctx.expr_str(
            rep.coefficients[(a, J)]
        )
    if rep.nonlocal_atoms:
        res.details["nonlocal"] = ", ".join(
            render_atom(a, ctx.names) for a in rep.nonlocal_atoms
        )


def _run_prolong(ctx: _TaskContext, task: Task, res: TaskResult):
    order = _int_param(task, "order", 1)
    space = ctx.space(order)
    X = ctx.field(task.params["field"], space)
    mode = task.params.get("mode", "standard")
    if mode == "standard":
        Y = prolong_standard(X, order, space)
    elif mode == "lambda":
        Y = prolong_lambda(X, ctx.doc.lambdas[task.params["lambda"]], order, space)
    elif mode == "mu":
        Y = prolong_mu(X, ctx.mu(task.params["mu"], space), order, space)
    else:
        raise TwistkitError(f"unknown prolongation mode {mode!r}")
    res.verdict = "pass"
    res.details["mode"] = mode
    for (kind, idx, J), v in Y.coefficients():
        if kind == "x":
            key = f"xi.{ctx.names.indep_name(idx)}"
        else:
            from ..core.atoms import AuxJetVar, JetVar

            atom = JetVar(idx, J) if kind == "u" else AuxJetVar(idx, J)
            key = f"{'psi' if kind == 'u' else 'chi'}.{render_atom(atom, ctx.names)}"
        res.details[key] = ctx.expr_str(v)


_RUNNERS = {
    "check-symmetry": _run_check_symmetry,
    "check-augmented-symmetry": _run_check_augmented,
    "check-covering": _run_check_covering,
    "check-matrix-covering": _run_check_matrix_covering,
    "check-mch": _run_check_mch,
    "gauge-diagram": _run_gauge_diagram,
    "check-semiclassical": _run_check_semiclassical,
    "reconstruct": _run_reconstruct,
    "prolong": _run_prolong,
}


def execute(doc: ProblemDocument, seed: int = 0) -> Report:
    """Run every task; errors are captured per task, siblings unaffected."""
    ctx = _TaskContext(doc, seed)
    results = []
    for idx, task in enumerate(doc.tasks):
        res = TaskResult(index=idx, kind=task.kind, params=dict(task.params), verdict="error")
        t0 = time.perf_counter()
        try:
            _RUNNERS[task.kind](ctx, task, res)
        except TwistkitError as e:
            res.verdict = "error"
            res.error = f"{type(e).__name__}: {e}"
        except KeyError as e:
            res.verdict = "error"
            res.error = f"MissingParameter: task needs parameter {e.args[0]!r}"
        except Exception as e:  # defensive: sibling isolation must hold
            res.verdict = "error"
            res.error = f"{type(e).__name__}: {e}"
        res.seconds = time.perf_counter() - t0
        results.append(res)
    return Report(seed=seed, results=results)
