from pathlib import Path

from twistkit.frontend import execute, parse_problem, render_report

PROBLEMS = Path(__file__).resolve().parent.parent / "src" / "twistkit" / "problems"


def run_source(src, seed=0):
    return execute(parse_problem(src), seed=seed)


class TestBundledFixtures:
    def test_gibbons_tsarev_file(self):
        rep = run_source((PROBLEMS / "gibbons_tsarev.twist").read_text())
        r = rep.results[0]
        assert r.verdict == "pass"
        assert r.residuals == ["(u_t*u_xt - u_x*u_tt + u_xx + 1)/(w^2 - u_t*w - u_x)^2"]
        assert r.cofactors == ["1/(w^2 - u_t*w - u_x)^2"]

    def test_burgers_matrix_file(self):
        rep = run_source((PROBLEMS / "burgers_cover.twist").read_text())
        r = rep.results[0]
        assert r.verdict == "pass"
        assert r.cofactors == ["0", "1/4", "1/4", "0"]


class TestInlineTasks:
    def test_check_mch_task(self):
        src = (
            "[vars]\nx t\n[deps]\nu v\n"
            "[mu flat]\nx[1,2] = 1\nt[1,2] = 1\n"
            "[mu bad]\nx[1,1] = t\n"
            "[task check-mch]\nmu = flat\n"
            "[task check-mch]\nmu = bad\n"
        )
        rep = run_source(src)
        assert rep.results[0].verdict == "pass"
        assert rep.results[1].verdict == "fail"
        assert any(s != "0" for s in rep.results[1].residuals)

    def test_gauge_diagram_task(self):
        src = (
            "[vars]\nx\n[deps]\nu v\n"
            "[gauge R]\nR[1,1] = 1\nR[1,2] = x\nR[2,1] = 0\nR[2,2] = 1\n"
            "[field X]\nu = u*v\nv = u^2\n"
            "[task gauge-diagram]\ngauge = R\nfield = X\norder = 2\n"
        )
        rep = run_source(src)
        assert rep.results[0].verdict == "pass"

    def test_check_semiclassical_task(self):
        src = (
            "[vars]\nx\n[deps]\nu\n[aux]\nw\n"
            "[equation e]\nu_x = u*w\n"
            "[covering c]\nbase = e\nw_x = w\n"
            "[field X]\nu = u*w\nw = w\n"
            "[field E]\nu = exp(w)\n"
            "[task check-semiclassical]\nfield = X\ncovering = c\n"
            "[task check-semiclassical]\nfield = E\ncovering = c\n"
        )
        rep = run_source(src)
        assert rep.results[0].verdict == "pass"
        assert rep.results[0].details["exponential-form"] == "false"
        assert rep.results[1].details["exponential-form"] == "true"
        assert rep.results[1].details["phi0.u"] == "1"

    def test_check_augmented_task(self):
        src = (
            "[vars]\nx\n[deps]\nu\n[aux]\nw\n"
            "[equation e]\nu_x = u*w\n"
            "[covering c]\nbase = e\nw_x = w\n"
            "[field X]\nu = u*w\nw = w\n"
            "[task check-augmented-symmetry]\nfield = X\ncovering = c\n"
        )
        rep = run_source(src)
        assert rep.results[0].verdict == "pass"

    def test_solved_orientation_fallback(self):
        # an equation written for a non-maximal lead still builds a system
        src = (
            "[vars]\nx t\n[deps]\nu\n"
            "[equation b]\nu_t = u_xx + u*u_x\n"
            "[field X]\nx = 1\n"
            "[task check-symmetry]\nfield = X\nequation = b\n"
        )
        rep = run_source(src)
        assert rep.results[0].verdict == "pass"

    def test_oracle_detail_on_transcendental_failures(self):
        src = (
            "[vars]\nx\n[deps]\nu\n[constants]\nm\n"
            "[equation e]\nu_x = u^m\n"
            "[field X]\nu = 1\n"
            "[task check-symmetry]\nfield = X\nequation = e\n"
        )
        rep = run_source(src, seed=5)
        r = rep.results[0]
        assert r.verdict == "fail"
        assert r.details.get("oracle") == "confirmed"
