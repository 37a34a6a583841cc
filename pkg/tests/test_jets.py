import pytest

from twistkit.core import (
    Expr,
    LinForm,
    Names,
    ONE,
    ZERO,
    const,
    exp_of,
    func,
    pow_of,
    zero_oracle,
)
from twistkit.core.atoms import AuxJetVar, IndepVar, JetVar
from twistkit.errors import (
    NoSolvedRule,
    NotInvariant,
    NotScalarBase,
    TruncationExceeded,
    TwistkitError,
)
from twistkit.forms import MatrixOneForm, mu_scalar
from twistkit.jets import (
    EquationSystem,
    JetSpace,
    ProlongedField,
    VectorField,
    check_ibdp,
    check_symmetry,
    commutator,
    evolutionary_representative,
    mu_deviation,
    multiindices,
    prolong_lambda,
    prolong_mu,
    prolong_standard,
    reduce_mod_system,
    total_derivative,
)
from conftest import make_gen


def agl_setup(n=2):
    sp = JetSpace(1, 1, 0, n, names=Names(("x",), ("u",)))
    x, u = sp.x(0), sp.u(0)
    ux, uxx = sp.u(0, (1,)), sp.u(0, (2,))
    m = const("m")
    g = func("g", (IndepVar(0),))
    gp = func("g", (IndepVar(0),), (1,))
    um = pow_of(u, LinForm.of("m"))
    lam = ux / u + m * g * um
    rhs = ux ** 2 / u + (m * g * ux + gp * u) * um
    sys = EquationSystem(sp, [uxx - rhs])
    return sp, x, u, ux, uxx, m, g, gp, um, lam, sys


class TestTotalDerivative:
    def test_shift(self, ode_space):
        u = ode_space.u(0)
        assert total_derivative(u, 0, ode_space) == ode_space.u(0, (1,))

    def test_square(self, ode_space):
        u, ux = ode_space.u(0), ode_space.u(0, (1,))
        assert (total_derivative(u * u, 0, ode_space) - 2 * u * ux).is_zero()

    def test_lambda_derivative(self):
        sp, x, u, ux, uxx, m, g, gp, um, lam, sys = agl_setup()
        got = total_derivative(lam, 0, sp)
        want = uxx / u - ux ** 2 / u ** 2 + m * gp * um + m * m * g * um * ux / u
        assert (got - want).is_zero()
        assert zero_oracle(got - want, seed=17)

    def test_commutes(self, pde_space):
        gen = make_gen(43, pde_space, max_order=1, constants=("m",))
        for _ in range(25):
            e = gen.expr(allow_exp=True)
            d01 = total_derivative(total_derivative(e, 0, pde_space), 1, pde_space)
            d10 = total_derivative(total_derivative(e, 1, pde_space), 0, pde_space)
            assert (d01 - d10).is_zero()

    def test_truncation_guard(self):
        sp = JetSpace(1, 1, 0, 1)
        top = sp.u(0, (2,))  # spare level atom
        with pytest.raises(TruncationExceeded):
            total_derivative(top, 0, sp)


class TestProlongStandard:
    def test_translation(self, ode_space):
        X = VectorField(ode_space, xi=[ONE])
        Y = prolong_standard(X, 2)
        assert all(v.is_zero() for v in Y.psi.values())

    def test_scaling_field(self, ode_space):
        u = ode_space.u(0)
        X = VectorField(ode_space, phi=[u])
        Y = prolong_standard(X, 2)
        for k in range(3):
            assert Y.psi_at(0, (k,)) == ode_space.u(0, (k,))

    def test_burgers_scaling(self, pde_space):
        x, t, u = pde_space.x(0), pde_space.x(1), pde_space.u(0)
        X = VectorField(pde_space, xi=[x, 2 * t], phi=[-u])
        Y = prolong_standard(X, 2)
        uxx = pde_space.u(0, (2, 0))
        assert (Y.psi_at(0, (2, 0)) + 3 * uxx).is_zero()
        # cross-check against the characteristic form
        Q = evolutionary_representative(X)[0]
        Dx = pde_space.D(0)
        alt = Dx(Dx(Q)) + x * pde_space.u(0, (3, 0)) + 2 * t * pde_space.u(0, (2, 1))
        assert (Y.psi_at(0, (2, 0)) - alt).is_zero()

    def test_coherence(self, ode_space):
        gen = make_gen(47, ode_space, max_order=0)
        x, u = ode_space.x(0), ode_space.u(0)
        X = VectorField(ode_space, xi=[x * u], phi=[u ** 2 + x])
        Y2 = prolong_standard(X, 2)
        Y3 = prolong_standard(X, 3)
        for k in range(3):
            assert Y2.psi_at(0, (k,)) == Y3.psi_at(0, (k,))


class TestProlongLambda:
    def test_agl_coefficients(self):
        sp, x, u, ux, uxx, m, g, gp, um, lam, sys = agl_setup()
        X = VectorField(sp, phi=[ONE])
        Y = prolong_lambda(X, lam, 2)
        Dx = sp.D(0)
        assert (Y.psi_at(0, (1,)) - lam).is_zero()
        assert (Y.psi_at(0, (2,)) - (Dx(lam) + lam * lam)).is_zero()

    def test_zero_lambda_matches_standard(self, ode_space):
        u, x = ode_space.u(0), ode_space.x(0)
        X = VectorField(ode_space, xi=[x], phi=[u * x])
        Yl = prolong_lambda(X, ZERO, 2)
        Ys = prolong_standard(X, 2)
        assert all((Yl.psi[k] - Ys.psi[k]).is_zero() for k in Ys.psi)

    def test_one_step_by_hand(self, ode_space):
        x = ode_space.x(0)
        c = const("c")
        X = VectorField(ode_space, phi=[x])
        Y = prolong_lambda(X, c, 1)
        assert (Y.psi_at(0, (1,)) - (1 + c * x)).is_zero()

    def test_requires_scalar_base(self, pde_space):
        X = VectorField(pde_space, phi=[ONE])
        with pytest.raises(NotScalarBase):
            prolong_lambda(X, ZERO, 1)


class TestProlongMu:
    def test_zero_mu_is_standard(self, ode_space):
        u, x = ode_space.u(0), ode_space.x(0)
        X = VectorField(ode_space, xi=[x], phi=[u])
        Ym = prolong_mu(X, mu_scalar(ode_space, [ZERO]), 2)
        Ys = prolong_standard(X, 2)
        assert all((Ym.psi[k] - Ys.psi[k]).is_zero() for k in Ys.psi)

    def test_scalar_matches_lambda(self, ode_space):
        u, ux = ode_space.u(0), ode_space.u(0, (1,))
        lam = ux / u
        X = VectorField(ode_space, phi=[u + 1])
        Ym = prolong_mu(X, mu_scalar(ode_space, [lam]), 2)
        Yl = prolong_lambda(X, lam, 2)
        assert all((Ym.psi[k] - Yl.psi[k]).is_zero() for k in Yl.psi)

    def test_constant_nilpotent(self):
        sp = JetSpace(1, 2, 0, 2, names=Names(("x",), ("u1", "u2")))
        Lam = [[ZERO, ONE], [ZERO, ZERO]]
        X = VectorField(sp, phi=[ZERO, ONE])
        Y = prolong_mu(X, [Lam], 1)
        assert Y.psi_at(0, (1,)) == ONE
        assert Y.psi_at(1, (1,)).is_zero()

    def test_diagonal_is_componentwise_stretching(self):
        sp = JetSpace(1, 2, 0, 2, names=Names(("x",), ("u1", "u2")))
        u1, u2 = sp.u(0), sp.u(1)
        lam = u1 + sp.x(0)
        mu = [[[lam, ZERO], [ZERO, lam]]]
        X = VectorField(sp, phi=[u2, u1 * u2])
        Ym = prolong_mu(X, mu, 2)
        Yl = prolong_lambda(X, lam, 2)
        assert all((Ym.psi[k] - Yl.psi[k]).is_zero() for k in Yl.psi)


class TestEvolutionaryRepresentative:
    def test_vertical(self, ode_space):
        X = VectorField(ode_space, phi=[ONE])
        assert evolutionary_representative(X) == [ONE]

    def test_translation(self, ode_space):
        X = VectorField(ode_space, xi=[ONE])
        assert (evolutionary_representative(X)[0] + ode_space.u(0, (1,))).is_zero()

    def test_burgers_scaling(self, pde_space):
        x, t, u = pde_space.x(0), pde_space.x(1), pde_space.u(0)
        X = VectorField(pde_space, xi=[x, 2 * t], phi=[-u])
        Q = evolutionary_representative(X)[0]
        want = -u - x * pde_space.u(0, (1, 0)) - 2 * t * pde_space.u(0, (0, 1))
        assert (Q - want).is_zero()


class TestReduceModSystem:
    def test_agl_residual(self):
        sp, x, u, ux, uxx, m, g, gp, um, lam, sys = agl_setup()
        um1 = pow_of(u, LinForm.of("m").shift(1))
        resid = (u * uxx - ux ** 2 - um1 * (m * g * ux + u * gp)) / u ** 2
        assert reduce_mod_system(resid, sys).is_zero()

    def test_differential_consequence(self, ode_space):
        f = func("f", (IndepVar(0), JetVar(0, (0,)), JetVar(0, (1,))))
        sys = EquationSystem(ode_space, [ode_space.u(0, (2,)) - f])
        got = reduce_mod_system(ode_space.u(0, (3,)), sys)
        Dxf_reduced = reduce_mod_system(ode_space.D(0)(f), sys)
        assert (got - Dxf_reduced).is_zero()

    def test_no_leading_jets_unchanged(self, ode_space):
        e = ode_space.x(0) + ode_space.u(0)
        sys = EquationSystem(ode_space, [ode_space.u(0, (2,)) - ode_space.u(0)])
        assert reduce_mod_system(e, sys) == e

    def test_solved_rule_validation(self, ode_space):
        u, uxx = ode_space.u(0), ode_space.u(0, (2,))
        with pytest.raises(TwistkitError):
            EquationSystem(ode_space, [uxx - uxx ** 2])  # not linear in the lead


class TestCheckSymmetry:
    def test_agl_lambda_symmetry(self):
        sp, x, u, ux, uxx, m, g, gp, um, lam, sys = agl_setup()
        rep = check_symmetry(VectorField(sp, phi=[ONE]), sys, "lambda", lam=lam, order=2)
        assert rep.passed and all(r.is_zero() for r in rep.residuals)

    def test_translation_standard(self, ode_space):
        sys = EquationSystem(ode_space, [ode_space.u(0, (2,)) - ode_space.u(0)])
        rep = check_symmetry(VectorField(ode_space, xi=[ONE]), sys, "standard")
        assert rep.passed

    def test_failing_case_residual(self):
        sp = JetSpace(1, 1, 0, 1, names=Names(("x",), ("u",)))
        sys = EquationSystem(sp, [sp.u(0, (1,)) - sp.u(0)])
        rep = check_symmetry(VectorField(sp, phi=[ONE]), sys, "standard")
        assert not rep.passed
        assert (rep.residuals[0] + 1).is_zero()


class TestCommutator:
    def test_coordinate_fields(self, ode_space):
        X = VectorField(ode_space, xi=[ONE])
        Y = VectorField(ode_space, phi=[ONE])
        Z = commutator(X, Y)
        assert all(v.is_zero() for v in (*Z.xi, *Z.phi))

    def test_direct_bracket(self, ode_space):
        x, u = ode_space.x(0), ode_space.u(0)
        X = VectorField(ode_space, phi=[x])
        Y = VectorField(ode_space, phi=[u])
        Z = commutator(X, Y)
        assert (Z.phi[0] - x).is_zero()

    def test_lambda_prolongation_anomaly(self):
        sp = JetSpace(1, 1, 0, 1, names=Names(("x",), ("u",)))
        x, u = sp.x(0), sp.u(0)
        lam = func("lam", (IndepVar(0), JetVar(0, (0,))))
        X = VectorField(sp, phi=[x])
        Y = VectorField(sp, phi=[u])
        delta = commutator(prolong_lambda(X, lam, 1), prolong_lambda(Y, lam, 1))
        Zl = prolong_lambda(commutator(X, Y), lam, 1)
        assert (delta.psi_at(0, (0,)) - Zl.psi_at(0, (0,))).is_zero()
        anomaly = delta.psi_at(0, (1,)) - Zl.psi_at(0, (1,))
        assert (anomaly - x * lam).is_zero()

    def test_full_anomaly_with_ux_dependence(self):
        # with lam = lam(x, u, u_x) the defect picks up an extra
        # (u - x u_x) dlam/du_x term; the commutator reports it in full
        sp = JetSpace(1, 1, 0, 1, names=Names(("x",), ("u",)))
        x, u, ux = sp.x(0), sp.u(0), sp.u(0, (1,))
        lam = func("lam", (IndepVar(0), JetVar(0, (0,)), JetVar(0, (1,))))
        lam_ux = func("lam", (IndepVar(0), JetVar(0, (0,)), JetVar(0, (1,))), (0, 0, 1))
        X = VectorField(sp, phi=[x])
        Y = VectorField(sp, phi=[u])
        delta = commutator(prolong_lambda(X, lam, 1), prolong_lambda(Y, lam, 1))
        Zl = prolong_lambda(commutator(X, Y), lam, 1)
        anomaly = delta.psi_at(0, (1,)) - Zl.psi_at(0, (1,))
        want = x * lam + lam_ux * (u - x * ux)
        assert (anomaly - want).is_zero()


class TestIbdp:
    def test_lambda_of_x(self, ode_space):
        lamx = func("lam", (IndepVar(0),))
        X = VectorField(ode_space, phi=[ONE])
        eta = ode_space.x(0)
        zeta = ode_space.u(0, (1,)) - lamx * ode_space.u(0)
        rep = check_ibdp(X, lamx, eta, zeta, ode_space)
        assert rep.passed

    def test_standard_case(self, ode_space):
        X = VectorField(ode_space, phi=[ONE])
        rep = check_ibdp(X, None, ode_space.x(0), ode_space.u(0, (1,)), ode_space)
        assert rep.passed

    def test_two_component_counterexample(self):
        sp = JetSpace(1, 2, 0, 3, names=Names(("x",), ("u1", "u2")))
        u1 = sp.u(0)
        mu = MatrixOneForm(sp, [[[ZERO, ONE], [ZERO, ZERO]]])
        X = VectorField(sp, phi=[ZERO, u1])
        zeta = sp.u(0, (1,)) - sp.u(1)
        rep = check_ibdp(X, mu, sp.x(0), zeta, sp)
        assert not rep.passed
        assert (rep.residual - sp.u(0, (1,))).is_zero()

    def test_not_invariant_rejected(self, ode_space):
        X = VectorField(ode_space, phi=[ONE])
        with pytest.raises(NotInvariant):
            check_ibdp(X, None, ode_space.x(0), ode_space.u(0), ode_space)


class TestMuDeviation:
    def test_zero_mu(self, ode_space):
        X = VectorField(ode_space, xi=[ONE], phi=[ode_space.u(0)])
        dev = mu_deviation(X, mu_scalar(ode_space, [ZERO]), 2)
        assert all(v.is_zero() for v in dev.values())

    def test_first_order_scalar(self, ode_space):
        u, ux, x = ode_space.u(0), ode_space.u(0, (1,)), ode_space.x(0)
        lam = ux + x
        X = VectorField(ode_space, xi=[ONE], phi=[u * x])
        dev = mu_deviation(X, mu_scalar(ode_space, [lam]), 1)
        Q = evolutionary_representative(X)[0]
        assert (dev[(0, (1,))] - lam * Q).is_zero()

    def test_vanishes_on_invariant_set(self, ode_space):
        u, ux, x = ode_space.u(0), ode_space.u(0, (1,)), ode_space.x(0)
        lam = ux + u
        X = VectorField(ode_space, xi=[ONE], phi=[u * x + 1])
        dev = mu_deviation(X, mu_scalar(ode_space, [lam]), 3)
        Q = evolutionary_representative(X)[0]
        sysQ = EquationSystem(ode_space, [Q])
        assert all(reduce_mod_system(v, sysQ, ode_space).is_zero() for v in dev.values())


def test_prolonged_field_restriction(ode_space):
    X = VectorField(ode_space, xi=[ode_space.x(0)], phi=[ode_space.u(0) ** 2])
    Y = prolong_standard(X, 3)
    R = Y.restricted(1)
    assert set(R.psi) == {(0, (0,)), (0, (1,))}
