"""Coverings: augmented systems, compatibility, and symmetry reconstruction.

A covering extends an equation system by auxiliary variables w^b subject to
first-order rules w^b_i = H^b_i(x, u, w, u_(1)).  Cross-derivative
compatibility of the rules must reduce to the base system; symmetries of the
augmented system project, after restriction to the rules and a rescaling that
strips the w-dependence, onto lambda- or mu-twisted symmetries of the base.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .core import (
    Expr,
    ONE,
    ZERO,
    exp_of,
    iter_atoms,
    max_jet_order,
    normalize,
    substitute,
)
from .core.atoms import AuxJetVar, IndepVar, JetVar, mi_append, mi_order, mi_zero
from .core.polynomial import divmod_multi
from .errors import (
    DimensionMismatch,
    NoDecomposition,
    NotExponentialForm,
    NotVertical,
    TwistkitError,
)
from .forms import MatrixOneForm, check_MCH
from .jets import (
    EquationSystem,
    JetSpace,
    ProlongedField,
    Reducer,
    VectorField,
    commutator,
    prolong_lambda,
    prolong_mu,
    prolong_standard,
)
from .linalg import mat_mul, mat_vec, matrix_inverse


class CoveringSystem:
    """Base system plus auxiliary first-order rules w^b_i = H^b_i."""

    def __init__(self, base: EquationSystem, aux_rules):
        self.base = base
        self.space = base.space
        if self.space.r < 1:
            raise TwistkitError("covering requires auxiliary variables in the jet space")
        rules = {}
        for (b, i), H in aux_rules.items():
            H = normalize(H)
            if b < 0 or b >= self.space.r or i < 0 or i >= self.space.p:
                raise DimensionMismatch("aux rule index out of range")
            for a in iter_atoms(H):
                if isinstance(a, AuxJetVar) and a.order > 0:
                    raise TwistkitError("aux rule right sides may not contain w-jets")
                if isinstance(a, JetVar) and a.order > 1:
                    raise TwistkitError("aux rule right sides are first order in u")
            rules[(b, i)] = H
        for b in range(self.space.r):
            for i in range(self.space.p):
                if (b, i) not in rules:
                    raise TwistkitError(f"missing aux rule for w{b}_x{i}")
        self.aux_rules = rules
        self._w_reducer = None

    def rule(self, b: int, i: int) -> Expr:
        return self.aux_rules[(b, i)]

    def w_rules_map(self):
        p = self.space.p
        return {
            AuxJetVar(b, mi_append(mi_zero(p), i)): H
            for (b, i), H in self.aux_rules.items()
        }

    def w_reducer(self) -> Reducer:
        if self._w_reducer is None:
            self._w_reducer = Reducer(self.w_rules_map(), self.space)
        return self._w_reducer

    def joint_reducer(self) -> Reducer:
        rules = dict(self.base.rules_map())
        rules.update(self.w_rules_map())
        return Reducer(rules, self.space)

    def aux_residuals(self):
        p = self.space.p
        out = []
        for b in range(self.space.r):
            for i in range(p):
                out.append(
                    (
                        (b, i),
                        Expr.atom(AuxJetVar(b, mi_append(mi_zero(p), i)))
                        - self.aux_rules[(b, i)],
                    )
                )
        return out


def augmented_total_derivative(e, i: int, cov: CoveringSystem) -> Expr:
    """D~_i: total derivative with w-jets eliminated through the aux rules."""
    red = cov.w_reducer()
    return red.reduce(cov.space.D(i)(red.reduce(normalize(e))))


# ---------------------------------------------------------------------------
# compatibility


@dataclass
class CompatibilityReport:
    passed: bool
    trivial: bool
    residuals: dict
    cofactors: dict


def check_compatibility(cov: CoveringSystem) -> CompatibilityReport:
    """Cross-derivative residuals of the aux rules, decomposed over the base.

    For the pair (x^i, x^j), i < j, the residual is D~_j H_i - D~_i H_j; each
    must write as sum_l c_l F^l with expression cofactors found by exact
    multivariate division, and a proper covering has a nonzero cofactor.
    """
    space = cov.space
    residuals = {}
    cofactors = {}
    if space.p < 2:
        return CompatibilityReport(True, False, residuals, cofactors)
    base_nums = [F.num for F in cov.base.residuals]
    any_nonzero = False
    for b in range(space.r):
        for i in range(space.p):
            for j in range(i + 1, space.p):
                C = augmented_total_derivative(
                    cov.rule(b, i), j, cov
                ) - augmented_total_derivative(cov.rule(b, j), i, cov)
                residuals[(b, i, j)] = C
                if C.is_zero():
                    cofactors[(b, i, j)] = [ZERO] * len(base_nums)
                    continue
                any_nonzero = True
                quos, rem = divmod_multi(C.num, base_nums)
                if not rem.is_zero():
                    raise NoDecomposition((b, i, j))
                cofactors[(b, i, j)] = [
                    Expr._make(q * F.den, C.den) if not q.is_zero() else ZERO
                    for q, F in zip(quos, cov.base.residuals)
                ]
    some_cofactor = any(
        not c.is_zero() for cs in cofactors.values() for c in cs
    )
    passed = any_nonzero and some_cofactor
    return CompatibilityReport(
        passed=passed,
        trivial=not any_nonzero,
        residuals=residuals,
        cofactors=cofactors,
    )


# ---------------------------------------------------------------------------
# matrix (zero curvature) coverings


class MatrixCovering:
    """Linear auxiliary system W_x = A W, W_t = B W over a two-variable base."""

    def __init__(self, space: JetSpace, A, B):
        if space.p != 2:
            raise DimensionMismatch("matrix coverings use exactly two independent variables")
        self.space = space
        self.A = [[normalize(v) for v in row] for row in A]
        self.B = [[normalize(v) for v in row] for row in B]
        nA = len(self.A)
        if any(len(r) != nA for r in self.A) or len(self.B) != nA or any(
            len(r) != nA for r in self.B
        ):
            raise DimensionMismatch("A and B must be square of equal dimension")
        for M in (self.A, self.B):
            for row in M:
                for v in row:
                    if max_jet_order(v) > 1:
                        raise TwistkitError("matrix covering entries are first order at most")

    def curvature(self):
        """Z = D_t A - D_x B + A B - B A."""
        Dx, Dt = self.space.D(0), self.space.D(1)
        n = len(self.A)
        Z = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = Dt(self.A[i][j]) - Dx(self.B[i][j])
                for k in range(n):
                    acc = acc + self.A[i][k] * self.B[k][j] - self.B[i][k] * self.A[k][j]
                row.append(acc)
            Z.append(row)
        return Z


@dataclass
class MatrixCoveringReport:
    passed: bool
    trivial: bool
    curvature: list
    reduced: list
    cofactors: list


def check_matrix_covering(mc: MatrixCovering, base: EquationSystem) -> MatrixCoveringReport:
    """Does the zero-curvature residual reduce to the base equation, and only there?"""
    from .jets import reduce_mod_system

    Z = mc.curvature()
    reduced = [[reduce_mod_system(v, base) for v in row] for row in Z]
    all_reduce = all(v.is_zero() for row in reduced for v in row)
    any_nonzero = any(not v.is_zero() for row in Z for v in row)
    base_nums = [F.num for F in base.residuals]
    cofactors = []
    for row in Z:
        crow = []
        for v in row:
            if v.is_zero():
                crow.append([ZERO] * len(base_nums))
                continue
            quos, rem = divmod_multi(v.num, base_nums)
            if not rem.is_zero():
                crow.append(None)
                continue
            crow.append(
                [
                    Expr._make(q * F.den, v.den) if not q.is_zero() else ZERO
                    for q, F in zip(quos, base.residuals)
                ]
            )
        cofactors.append(crow)
    return MatrixCoveringReport(
        passed=all_reduce and any_nonzero,
        trivial=not any_nonzero,
        curvature=Z,
        reduced=reduced,
        cofactors=cofactors,
    )


# ---------------------------------------------------------------------------
# augmented symmetries


@dataclass
class AugmentedSymmetryReport:
    passed: bool
    base_residuals: list
    aux_residuals: dict
    prolonged: ProlongedField = field(repr=False, default=None)


def check_augmented_symmetry(X: VectorField, cov: CoveringSystem, order: int | None = None) -> AugmentedSymmetryReport:
    """Classical prolongation in the augmented space, reduced mod the joint system."""
    space = cov.space
    n = order if order is not None else max(cov.base.order, 1)
    if n < max(cov.base.order, 1):
        raise TwistkitError("order too low for the covering system")
    Y = prolong_standard(X, n, space)
    apply = Y.as_derivation()
    red = cov.joint_reducer()
    base_res = [red.reduce(apply(F)) for F in cov.base.residuals]
    aux_res = {}
    for (b, i), resid in cov.aux_residuals():
        aux_res[(b, i)] = red.reduce(apply(resid))
    passed = all(v.is_zero() for v in base_res) and all(
        v.is_zero() for v in aux_res.values()
    )
    return AugmentedSymmetryReport(passed, base_res, aux_res, Y)


# ---------------------------------------------------------------------------
# semi-classical structure


@dataclass
class SemiClassicalReport:
    is_semiclassical: bool
    exponential_form: bool
    phi0: list | None = None
    xi0: list | None = None
    eta0: list | None = None


def _w_free(e: Expr) -> bool:
    return not any(isinstance(a, AuxJetVar) for a in iter_atoms(e))


def check_semiclassical(X: VectorField, cov: CoveringSystem) -> SemiClassicalReport:
    """Shape test: xi, phi on (x,u,w); eta may carry u-jets.  Exponential form
    holds when the bracket of d/dw with the field reproduces the field."""
    space = cov.space
    semi = all(max_jet_order(v) == 0 for v in X.xi) and all(
        max_jet_order(v) == 0 for v in X.phi
    )
    semi = semi and all(
        not any(isinstance(a, AuxJetVar) and a.order > 0 for a in iter_atoms(v))
        for v in X.eta
    )
    if not semi:
        return SemiClassicalReport(False, False)
    if space.r != 1:
        return SemiClassicalReport(True, False)
    dw = VectorField(space, eta=[ONE])
    bracket = commutator(dw, X)
    same = (
        all((a - b).is_zero() for a, b in zip(bracket.xi, X.xi))
        and all((a - b).is_zero() for a, b in zip(bracket.phi, X.phi))
        and all((a - b).is_zero() for a, b in zip(bracket.eta, X.eta))
    )
    if not same:
        return SemiClassicalReport(True, False)
    ew = exp_of(Expr.atom(AuxJetVar(0, mi_zero(space.p))))
    phi0 = [v / ew for v in X.phi]
    xi0 = [v / ew for v in X.xi]
    eta0 = [v / ew for v in X.eta]
    if not all(_w_free(v) for v in phi0 + xi0 + eta0):
        return SemiClassicalReport(True, False)
    return SemiClassicalReport(True, True, phi0=phi0, xi0=xi0, eta0=eta0)


# ---------------------------------------------------------------------------
# reconstruction of twisted symmetries from covering symmetries


@dataclass
class LambdaReconstruction:
    X0: VectorField
    matched: bool
    lam: Expr
    coefficients: dict
    nonlocal_atoms: list


def _w_jet_images(cov: CoveringSystem, max_order: int):
    """Substitution w^b_J -> consequence of the aux rules, all w-jet orders >= 1."""
    red = cov.w_reducer()
    sigma = {}
    p = cov.space.p
    from .jets import multiindices

    for k in range(1, max_order + 1):
        for J in multiindices(p, k):
            for b in range(cov.space.r):
                atom = AuxJetVar(b, J)
                val = red.reduce_atom(atom)
                if val is not None:
                    sigma[atom] = val
    return sigma


def reconstruct_lambda(X: VectorField, cov: CoveringSystem, order: int) -> LambdaReconstruction:
    """Project the augmented symmetry onto the scalar twisted prolongation.

    The classical prolongation of X in the augmented space is restricted to
    the aux rule w_x = lambda and its derivatives, rescaled by e^{-w} and
    projected onto the u-jets; the result must coincide with the
    lambda-twisted prolongation of the projected field.
    """
    space = cov.space
    if space.p != 1 or space.r != 1:
        raise TwistkitError("scalar reconstruction needs p = 1 and a single aux variable")
    lam = cov.rule(0, 0)
    if not _w_free(lam):
        raise TwistkitError("the aux rule must be free of the auxiliary variable itself")
    sc = check_semiclassical(X, cov)
    if not sc.exponential_form:
        raise NotExponentialForm(
            "field does not satisfy the exponential bracket condition"
        )
    Y = prolong_standard(X, order, space)
    sigma = _w_jet_images(cov, order)
    ew = exp_of(Expr.atom(AuxJetVar(0, (0,))))
    hat_xi = substitute(Y.xi[0], sigma) / ew
    hat_psi = {
        k: substitute(v, sigma) / ew for k, v in Y.psi.items()
    }
    nonlocal_atoms = sorted(
        {
            a
            for v in [hat_xi, *hat_psi.values()]
            for a in iter_atoms(v)
            if isinstance(a, AuxJetVar)
        },
        key=lambda a: a.key,
    )
    proj = JetSpace(space.p, space.q, 0, space.n, space.names)
    X0 = VectorField(proj, xi=[sc.xi0[0]], phi=[sc.phi0[a] for a in range(space.q)])
    twisted = prolong_lambda(X0, lam, order, proj)
    matched = not nonlocal_atoms and (hat_xi - twisted.xi[0]).is_zero() and all(
        (hat_psi[k] - twisted.psi[k]).is_zero() for k in twisted.psi
    )
    return LambdaReconstruction(
        X0=X0, matched=matched, lam=lam, coefficients=hat_psi, nonlocal_atoms=nonlocal_atoms
    )


@dataclass
class MuReconstruction:
    X0: VectorField
    mu: MatrixOneForm
    matched: bool
    mch_passed: bool
    coefficients: dict
    nonlocal_atoms: list


def reconstruct_mu(X: VectorField, G, cov: CoveringSystem, order: int) -> MuReconstruction:
    """Matrix analogue: phi = G(w) phi0(x, u) factors through the rules.

    M_i = G^{-1} (w^b_i dG/dw^b) restricted along the rules provides the
    twisting matrices; the restricted projected prolongation, rescaled by
    G^{-1}, must equal the mu-twisted prolongation of phi0 d/du.
    """
    space = cov.space
    if not X.is_vertical():
        raise NotVertical("matrix reconstruction is stated for vertical fields")
    q = space.q
    G = [[normalize(v) for v in row] for row in G]
    for row in G:
        for v in row:
            if not all(
                isinstance(a, AuxJetVar) and a.order == 0
                for a in iter_atoms(v)
                if isinstance(a, (IndepVar, JetVar, AuxJetVar))
            ):
                raise TwistkitError("G must depend on the auxiliary variables only")
    Ginv = matrix_inverse(G)
    phi0 = mat_vec(Ginv, list(X.phi))
    if not all(_w_free(v) for v in phi0):
        raise TwistkitError("phi does not factor as G(w) phi0(x, u)")

    from .core.derivation import partial

    p = space.p
    Jz = mi_zero(p)
    w_rules = cov.w_rules_map()

    def d1(entry: Expr, i: int) -> Expr:
        out = ZERO
        for b in range(space.r):
            out = out + Expr.atom(AuxJetVar(b, mi_append(Jz, i))) * partial(
                entry, AuxJetVar(b, Jz)
            )
        return out

    M = [
        mat_mul(Ginv, [[d1(G[a][c], i) for c in range(q)] for a in range(q)])
        for i in range(p)
    ]
    Lam = [
        [[substitute(M[i][a][c], w_rules) for c in range(q)] for a in range(q)]
        for i in range(p)
    ]
    mu = MatrixOneForm(space, Lam)

    red = cov.w_reducer()

    def aug_deriv(i):
        base = space.D(i)

        def call(e):
            return red.reduce(base(red.reduce(e)))

        class _D:
            def __call__(self, e):
                return call(normalize(e))

        return _D()

    mu_w_free = all(_w_free(v) for Mi in Lam for row in Mi for v in row)
    deriv = None if mu_w_free else aug_deriv
    mch = check_MCH(mu, deriv=deriv)

    # first-order structural identity: Psi_i = G (D_i^(0) phi0 + M_i phi0)
    Y = prolong_standard(X, order, space)
    for i in range(p):
        lhs = [Y.psi_at(a, mi_append(Jz, i)) for a in range(q)]
        d0phi = [space.D(i)(phi0[a]) for a in range(q)]
        rhs = mat_vec(G, [d0phi[a] + sum((M[i][a][c] * phi0[c] for c in range(q)), ZERO) for a in range(q)])
        for a in range(q):
            if not (lhs[a] - rhs[a]).is_zero():
                raise TwistkitError("first-order factorisation identity failed")

    sigma = _w_jet_images(cov, order)
    hat_psi_vec = {}
    from .jets import multiindices

    for k in range(order + 1):
        for J in multiindices(p, k):
            vec = [substitute(Y.psi_at(a, J), sigma) for a in range(q)]
            hat_psi_vec[J] = mat_vec(Ginv, vec)
    nonlocal_atoms = sorted(
        {
            a
            for vec in hat_psi_vec.values()
            for v in vec
            for a in iter_atoms(v)
            if isinstance(a, AuxJetVar)
        },
        key=lambda at: at.key,
    )
    proj = JetSpace(p, q, space.r if not mu_w_free else 0, space.n, space.names)
    X0 = VectorField(proj, phi=phi0)
    twisted = prolong_mu(
        X0, mu.lambdas, order, proj, enforce_mch=False, deriv=deriv
    )
    matched = mch.passed and all(
        (hat_psi_vec[J][a] - twisted.psi_at(a, J)).is_zero()
        for J in hat_psi_vec
        for a in range(q)
    )
    if nonlocal_atoms and mu_w_free:
        # w-dependence should have factored out entirely; a survivor is a
        # formal nonlocal remnant and blocks the exact match
        matched = False
    return MuReconstruction(
        X0=X0,
        mu=mu,
        matched=matched,
        mch_passed=mch.passed,
        coefficients=hat_psi_vec,
        nonlocal_atoms=nonlocal_atoms,
    )
