import random
import subprocess
import sys
from pathlib import Path

import pytest

from twistkit.core import Expr, LinForm, ONE, exp_of, pow_of
from twistkit.core.atoms import ConstSym, FuncAtom, IndepVar, JetVar
from twistkit.core.printing import render_expr
from twistkit.errors import (
    ArityError,
    DuplicateDeclaration,
    ParseError,
    TwistkitError,
    UndeclaredReference,
    UnknownSymbol,
)
from twistkit.frontend import (
    Declarations,
    Task,
    execute,
    parse_expression,
    parse_problem,
    render_problem,
    render_report,
)
from twistkit.frontend.report import STRUCTURED_HEADER
from conftest import make_gen
from twistkit.jets import JetSpace


DECLS = Declarations(
    indep=("x", "t"),
    dep=("u",),
    aux=("w",),
    constants=("m", "eta"),
    functions={"g": ("x",), "alpha": ("x", "t"), "lam": ("x", "u")},
)

FIXTURE = Path(__file__).resolve().parent.parent / "src" / "twistkit" / "problems" / "example5.twist"


class TestParseExpression:
    def test_agl_right_side(self):
        e = parse_expression("u_x^2/u + (m*g(x)*u_x + g'(x)*u)*u^m", DECLS)
        u = Expr.atom(JetVar(0, (0, 0)))
        ux = Expr.atom(JetVar(0, (1, 0)))
        m = Expr.atom(ConstSym("m"))
        g = Expr.atom(FuncAtom("g", (IndepVar(0),)))
        gp = Expr.atom(FuncAtom("g", (IndepVar(0),), (1,)))
        um = pow_of(u, LinForm.of("m"))
        assert (e - (ux ** 2 / u + (m * g * ux + gp * u) * um)).is_zero()

    def test_subscript_symmetry(self):
        assert parse_expression("u_xt", DECLS) == parse_expression("u_tx", DECLS)

    def test_unknown_symbol(self):
        with pytest.raises(UnknownSymbol):
            parse_expression("v + 1", DECLS)

    def test_precedence(self):
        e = parse_expression("-u^2", DECLS)
        u = Expr.atom(JetVar(0, (0, 0)))
        assert (e + u ** 2).is_zero()
        e2 = parse_expression("2^3^2", DECLS)
        assert e2 == Expr.const(512)

    def test_arity_errors(self):
        with pytest.raises(ArityError):
            parse_expression("g(x, t)", DECLS)
        with pytest.raises(ArityError):
            parse_expression("alpha'(x, t)", DECLS)

    def test_wrong_argument(self):
        with pytest.raises(ArityError):
            parse_expression("g(t)", DECLS)

    def test_syntax_error_position(self):
        with pytest.raises(ParseError) as err:
            parse_expression("u + * 2", DECLS, line=7)
        assert err.value.line == 7

    def test_nonlinear_exponent_rejected(self):
        with pytest.raises(ParseError):
            parse_expression("u^(m*m)", DECLS)
        with pytest.raises(ParseError):
            parse_expression("u^u", DECLS)

    def test_round_trip_random(self):
        sp = JetSpace(2, 1, 1, 2, names=DECLS.names())
        gen = make_gen(107, sp, max_order=2, constants=("m", "eta"), use_aux=True)
        for _ in range(200):
            e = gen.expr(allow_exp=True, allow_pow=True)
            text = render_expr(e, DECLS.names())
            back = parse_expression(text, DECLS)
            assert back == e

    def test_round_trip_function_derivatives(self):
        for src in ("g_x", "alpha_xxt", "lam_u*lam_x", "D(alpha, x, t)"):
            e = parse_expression(src, DECLS)
            assert parse_expression(render_expr(e, DECLS.names()), DECLS) == e


class TestParseProblem:
    def test_fixture_document(self):
        doc = parse_problem(FIXTURE.read_text())
        assert list(doc.equations) == ["agl"]
        assert list(doc.coverings) == ["cov"]
        assert set(doc.fields) == {"X", "Xtilde"}
        assert len(doc.tasks) == 3

    def test_empty_tasks_valid(self):
        doc = parse_problem("[vars]\nx\n[deps]\nu\n")
        assert doc.tasks == []
        rep = execute(doc)
        assert rep.results == [] and rep.exit_code == 0

    def test_undeclared_covering_symbol(self):
        src = "[vars]\nx\n[deps]\nu\n[equation e]\nu_x = u\n[covering c]\nbase = e\nw_x = u\n"
        with pytest.raises((UndeclaredReference, UnknownSymbol)):
            parse_problem(src)

    def test_undeclared_task_reference(self):
        src = "[vars]\nx\n[deps]\nu\n[equation e]\nu_x = u\n[task check-symmetry]\nfield = nope\nequation = e\n"
        with pytest.raises(UndeclaredReference):
            parse_problem(src)

    def test_duplicate_declaration(self):
        with pytest.raises(DuplicateDeclaration):
            parse_problem("[vars]\nx\nx\n[deps]\nu\n")

    def test_round_trip(self):
        doc = parse_problem(FIXTURE.read_text())
        text = render_problem(doc)
        doc2 = parse_problem(text)
        assert doc2 == doc
        # and rendering is a fixpoint
        assert render_problem(doc2) == text


class TestExecute:
    def test_fixture_all_pass(self):
        doc = parse_problem(FIXTURE.read_text())
        rep = execute(doc, seed=0)
        assert [r.verdict for r in rep.results] == ["pass", "pass", "pass"]
        assert rep.exit_code == 0

    def test_failing_symmetry_residual(self):
        src = (
            "[vars]\nx\n[deps]\nu\n"
            "[equation e]\nu_x = u\n"
            "[field X]\nu = 1\n"
            "[task check-symmetry]\nfield = X\nequation = e\n"
        )
        rep = execute(parse_problem(src))
        assert rep.results[0].verdict == "fail"
        assert rep.results[0].residuals == ["-1"]
        assert rep.exit_code == 1

    def test_error_isolation(self):
        # the middle task divides by zero during reduction; siblings unaffected
        src = (
            "[vars]\nx\n[deps]\nu\n"
            "[equation e]\nu_x = u\n"
            "[equation bad]\nu_xx = 1/(u_x - u)\n"
            "[field X]\nu = u\n"
            "[field Y]\nu = 1\n"
            "[lambda l]\n1/(u_x - u)\n"
            "[task check-symmetry]\nfield = X\nequation = e\n"
            "[task check-symmetry]\nfield = Y\nequation = e\nmode = lambda\nlambda = l\n"
            "[task check-symmetry]\nfield = X\nequation = e\n"
        )
        rep = execute(parse_problem(src))
        verdicts = [r.verdict for r in rep.results]
        assert verdicts[0] == "pass" and verdicts[2] == "pass"
        assert verdicts[1] == "error"
        assert "DivisionByZero" in rep.results[1].error
        assert rep.exit_code == 2

    def test_structured_determinism(self):
        doc = parse_problem(FIXTURE.read_text())
        a = render_report(execute(doc, seed=3), "structured")
        b = render_report(execute(parse_problem(FIXTURE.read_text()), seed=3), "structured")
        assert a == b
        assert a.startswith(STRUCTURED_HEADER + "\n")

    def test_human_report_mentions_verdicts(self):
        doc = parse_problem(FIXTURE.read_text())
        text = render_report(execute(doc), "human")
        assert "PASS" in text and "overall: pass" in text

    def test_prolong_task(self):
        src = (
            "[vars]\nx\n[deps]\nu\n"
            "[field X]\nu = u\n"
            "[task prolong]\nfield = X\norder = 2\n"
        )
        rep = execute(parse_problem(src))
        assert rep.results[0].verdict == "pass"
        assert rep.results[0].details["psi.u_xx"] == "u_xx"

    def test_missing_parameter_is_error(self):
        src = "[vars]\nx\n[deps]\nu\n[equation e]\nu_x = u\n[task check-symmetry]\nequation = e\n"
        rep = execute(parse_problem(src))
        assert rep.results[0].verdict == "error"
        assert "field" in rep.results[0].error


class TestCli:
    def run_cli(self, *args):
        return subprocess.run(
            [sys.executable, "-m", "twistkit.frontend.cli", *args],
            capture_output=True,
            text=True,
        )

    def test_run_fixture(self):
        out = self.run_cli("run", str(FIXTURE))
        assert out.returncode == 0
        assert "overall: pass" in out.stdout

    def test_structured_format(self):
        out = self.run_cli("run", str(FIXTURE), "--format", "structured")
        assert out.returncode == 0
        assert out.stdout.splitlines()[0] == STRUCTURED_HEADER

    def test_subcommand_check_symmetry(self):
        out = self.run_cli(
            "check-symmetry",
            str(FIXTURE),
            "--field", "X",
            "--equation", "agl",
            "--lambda", "lam",
            "--order", "2",
        )
        assert out.returncode == 0

    def test_exit_code_fail(self, tmp_path):
        bad = tmp_path / "bad.twist"
        bad.write_text(
            "[vars]\nx\n[deps]\nu\n[equation e]\nu_x = u\n[field X]\nu = 1\n"
            "[task check-symmetry]\nfield = X\nequation = e\n"
        )
        out = self.run_cli("run", str(bad))
        assert out.returncode == 1

    def test_exit_code_parse_error(self, tmp_path):
        bad = tmp_path / "broken.twist"
        bad.write_text("[vars]\nx\n[deps]\nu\n[task nonsense]\n")
        out = self.run_cli("run", str(bad))
        assert out.returncode == 2
        assert "error" in out.stderr

    def test_reconstruct_subcommand(self):
        out = self.run_cli(
            "reconstruct", str(FIXTURE), "--field", "Xtilde", "--covering", "cov",
            "--order", "2", "--format", "structured",
        )
        assert out.returncode == 0
        assert "task.0.detail.matched=true" in out.stdout
