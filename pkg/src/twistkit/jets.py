"""Truncated jet spaces, total derivatives, prolongations and symmetry checks.

Vector fields live on the base space (coordinates x^i, u^a and optionally
w^b); prolonged fields carry coefficients for every jet coordinate up to the
requested order.  Three prolongation rules are provided: the classical
contact-preserving recursion, the scalar-ODE stretching by a function
lambda(x, u, u_x), and the matrix twisting by a horizontal one-form
mu = Lambda_i dx^i.  Symmetry verification reduces the prolonged field
applied to each residual modulo the equation system and its differential
consequences.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .core import (
    Derivation,
    Expr,
    Names,
    ONE,
    ZERO,
    as_single_atom,
    iter_atoms,
    max_jet_order,
    normalize,
    substitute,
)
from .core.atoms import (
    AuxJetVar,
    ConstSym,
    ExpAtom,
    FuncAtom,
    IndepVar,
    JetVar,
    PowAtom,
    jet_order_of,
    mi_append,
    mi_leq,
    mi_order,
    mi_sub,
    mi_zero,
)
from .errors import (
    DimensionMismatch,
    MCHViolated,
    NoSolvedRule,
    NotInvariant,
    NotScalarBase,
    TruncationExceeded,
    TwistkitError,
)


def multiindices(p: int, order: int):
    """All multi-indices with p slots of exactly the given order, ascending."""
    if order == 0:
        return [mi_zero(p)]
    out = []
    for combo in itertools.combinations_with_replacement(range(p), order):
        J = [0] * p
        for i in combo:
            J[i] += 1
        out.append(tuple(J))
    return sorted(set(out))


class JetSpace:
    """Dimensions and truncation order, plus display names.

    Atoms of hosted expressions must respect order <= n + 1; the spare level
    exists for derivative closure and is enforced by total_derivative.
    """

    def __init__(self, p: int, q: int, r: int = 0, n: int = 2, names: Names | None = None):
        if p < 1 or q < 1 or r < 0 or n < 1:
            raise TwistkitError("jet space requires p >= 1, q >= 1, r >= 0, n >= 1")
        self.p = p
        self.q = q
        self.r = r
        self.n = n
        self.names = names or Names()
        self._d = {}

    def __repr__(self):
        return f"JetSpace(p={self.p}, q={self.q}, r={self.r}, n={self.n})"

    def with_order(self, n: int) -> "JetSpace":
        return JetSpace(self.p, self.q, self.r, n, self.names)

    def D(self, i: int) -> Derivation:
        """Total derivative along x^i; jets shift, w-jets are coordinates."""
        if i < 0 or i >= self.p:
            raise DimensionMismatch(f"direction {i} out of range for p={self.p}")
        d = self._d.get(i)
        if d is None:
            cap = self.n + 1

            def action(a, _i=i, _cap=cap):
                if isinstance(a, IndepVar):
                    return ONE if a.index == _i else ZERO
                if isinstance(a, JetVar):
                    if a.order + 1 > _cap:
                        raise TruncationExceeded(
                            f"derivative of order-{a.order} jet exceeds order {_cap}"
                        )
                    return Expr.atom(JetVar(a.dep, mi_append(a.J, _i)))
                if isinstance(a, AuxJetVar):
                    if a.order + 1 > _cap:
                        raise TruncationExceeded(
                            f"derivative of order-{a.order} jet exceeds order {_cap}"
                        )
                    return Expr.atom(AuxJetVar(a.aux, mi_append(a.J, _i)))
                return None

            d = Derivation(action, name=f"D_{self.names.indep_name(i)}")
            self._d[i] = d
        return d

    # -- atom shorthands -----------------------------------------------------

    def x(self, i: int) -> Expr:
        return Expr.atom(IndepVar(i))

    def u(self, a: int = 0, J=None) -> Expr:
        return Expr.atom(JetVar(a, tuple(J) if J is not None else mi_zero(self.p)))

    def w(self, b: int = 0, J=None) -> Expr:
        return Expr.atom(AuxJetVar(b, tuple(J) if J is not None else mi_zero(self.p)))


def total_derivative(e, i: int, space: JetSpace) -> Expr:
    return space.D(i)(normalize(e))


# ---------------------------------------------------------------------------
# fields


def _check_order0(exprs, what):
    for e in exprs:
        if max_jet_order(e) > 0:
            raise TwistkitError(f"{what} must depend on order-0 coordinates only")


class VectorField:
    """xi^i d/dx^i + phi^a d/du^a + eta^b d/dw^b on the base space."""

    def __init__(self, space: JetSpace, xi=None, phi=None, eta=None, semiclassical=False):
        self.space = space
        self.xi = tuple(normalize(v) for v in (xi or [ZERO] * space.p))
        self.phi = tuple(normalize(v) for v in (phi or [ZERO] * space.q))
        self.eta = tuple(normalize(v) for v in (eta or [ZERO] * space.r))
        if len(self.xi) != space.p or len(self.phi) != space.q or len(self.eta) != space.r:
            raise DimensionMismatch("component counts must match the jet space")
        self.semiclassical = semiclassical
        _check_order0(self.xi, "xi")
        _check_order0(self.phi, "phi")
        if not semiclassical:
            _check_order0(self.eta, "eta")
        else:
            for e in self.eta:
                if any(isinstance(a, AuxJetVar) and a.order > 0 for a in iter_atoms(e)):
                    raise TwistkitError("semi-classical eta may not contain w-jets")

    def is_vertical(self) -> bool:
        return all(v.is_zero() for v in self.xi)

    def as_derivation(self) -> Derivation:
        table = {}
        for i, v in enumerate(self.xi):
            table[IndepVar(i)] = v
        Jz = mi_zero(self.space.p)
        for a, v in enumerate(self.phi):
            table[JetVar(a, Jz)] = v
        for b, v in enumerate(self.eta):
            table[AuxJetVar(b, Jz)] = v
        return Derivation(table, name="X")

    def apply(self, e) -> Expr:
        return self.as_derivation()(e)

    def __repr__(self):
        names = self.space.names
        parts = []
        for i, v in enumerate(self.xi):
            if not v.is_zero():
                parts.append(f"({v!r}) d/d{names.indep_name(i)}")
        for a, v in enumerate(self.phi):
            if not v.is_zero():
                parts.append(f"({v!r}) d/d{names.dep_name(a)}")
        for b, v in enumerate(self.eta):
            if not v.is_zero():
                parts.append(f"({v!r}) d/d{names.aux_name(b)}")
        return " + ".join(parts) or "0"


class ProlongedField:
    """Coefficients xi^i, psi^a_J, chi^b_J of a field on the truncated jet space."""

    def __init__(self, space: JetSpace, order: int, xi, psi, chi=None):
        self.space = space
        self.order = order
        self.xi = tuple(normalize(v) for v in xi)
        self.psi = {k: normalize(v) for k, v in psi.items()}
        self.chi = {k: normalize(v) for k, v in (chi or {}).items()}

    def psi_at(self, a: int, J) -> Expr:
        return self.psi.get((a, tuple(J)), ZERO)

    def chi_at(self, b: int, J) -> Expr:
        return self.chi.get((b, tuple(J)), ZERO)

    def as_derivation(self) -> Derivation:
        table = {}
        for i, v in enumerate(self.xi):
            table[IndepVar(i)] = v
        for (a, J), v in self.psi.items():
            table[JetVar(a, J)] = v
        for (b, J), v in self.chi.items():
            table[AuxJetVar(b, J)] = v
        return Derivation(table, name="Y")

    def apply(self, e) -> Expr:
        return self.as_derivation()(e)

    def restricted(self, order: int) -> "ProlongedField":
        return ProlongedField(
            self.space,
            order,
            self.xi,
            {k: v for k, v in self.psi.items() if mi_order(k[1]) <= order},
            {k: v for k, v in self.chi.items() if mi_order(k[1]) <= order},
        )

    def base_field(self) -> VectorField:
        Jz = mi_zero(self.space.p)
        return VectorField(
            self.space,
            xi=self.xi,
            phi=[self.psi_at(a, Jz) for a in range(self.space.q)],
            eta=[self.chi_at(b, Jz) for b in range(self.space.r)],
        )

    def coefficients(self):
        """Deterministically ordered ((kind, index, J), expr) pairs."""
        out = [(("x", i, None), v) for i, v in enumerate(self.xi)]
        for (a, J) in sorted(self.psi, key=lambda k: (mi_order(k[1]), k[0], k[1])):
            out.append((("u", a, J), self.psi[(a, J)]))
        for (b, J) in sorted(self.chi, key=lambda k: (mi_order(k[1]), k[0], k[1])):
            out.append((("w", b, J), self.chi[(b, J)]))
        return out


# ---------------------------------------------------------------------------
# prolongations


def _prolong(space, X, n, twist=None, deriv=None):
    """Shared recursion; twist(i, a, vec) adds the lambda/mu stretching term."""
    p, q, r = space.p, space.q, space.r
    D = deriv or (lambda i: space.D(i))
    psi = {}
    chi = {}
    Jz = mi_zero(p)
    for a in range(q):
        psi[(a, Jz)] = X.phi[a]
    for b in range(r):
        chi[(b, Jz)] = X.eta[b]
    dxi = [[D(i)(X.xi[k]) for k in range(p)] for i in range(p)]
    for order in range(1, n + 1):
        for J in multiindices(p, order):
            i = next(idx for idx, c in enumerate(J) if c > 0)
            J0 = mi_sub(J, mi_append(mi_zero(p), i))
            for a in range(q):
                val = D(i)(psi[(a, J0)])
                for k in range(p):
                    val = val - Expr.atom(JetVar(a, mi_append(J0, k))) * dxi[i][k]
                if twist is not None:
                    val = val + twist(i, a, J0, psi)
                psi[(a, J)] = val
            for b in range(r):
                val = D(i)(chi[(b, J0)])
                for k in range(p):
                    val = val - Expr.atom(AuxJetVar(b, mi_append(J0, k))) * dxi[i][k]
                chi[(b, J)] = val
    return ProlongedField(space, n, X.xi, psi, chi)


def prolong_standard(X: VectorField, n: int, space: JetSpace | None = None) -> ProlongedField:
    """Contact-preserving prolongation: psi_{J,i} = D_i psi_J - u_{J,k} D_i xi^k."""
    return _prolong(space or X.space, X, n)


def prolong_lambda(X: VectorField, lam, n: int, space: JetSpace | None = None) -> ProlongedField:
    """Scalar-ODE stretching: psi_{k+1} = (D_x + lambda) psi_k - u_{k+1} (D_x + lambda) xi."""
    space = space or X.space
    if space.p != 1:
        raise NotScalarBase("lambda-prolongation requires a single independent variable")
    lam = normalize(lam)
    if max_jet_order(lam) > 1:
        raise TwistkitError("lambda may depend on (x, u, u_x) at most")

    def twist(i, a, J0, psi):
        val = psi[(a, J0)]
        for k in range(space.p):
            val = val - Expr.atom(JetVar(a, mi_append(J0, k))) * X.xi[k]
        return lam * val

    return _prolong(space, X, n, twist=twist)


def prolong_mu(
    X: VectorField,
    mu,
    n: int,
    space: JetSpace | None = None,
    enforce_mch: bool = True,
    deriv=None,
) -> ProlongedField:
    """Matrix twisting: adds (Lambda_i)^a_b (psi^b_J - u^b_{J,k} xi^k) per step."""
    space = space or X.space
    mats = mu.lambdas if hasattr(mu, "lambdas") else mu
    if len(mats) != space.p or any(
        len(M) != space.q or any(len(row) != space.q for row in M) for M in mats
    ):
        raise DimensionMismatch("mu must provide one q x q matrix per direction")
    if enforce_mch and space.p > 1:
        from .forms import MatrixOneForm, check_MCH

        mof = mu if hasattr(mu, "lambdas") else MatrixOneForm(space, mats)
        rep = check_MCH(mof)
        if not rep.passed:
            raise MCHViolated("matrix one-form fails the horizontal Maurer-Cartan equation")

    def twist(i, a, J0, psi):
        val = ZERO
        for b in range(space.q):
            vec = psi[(b, J0)]
            for k in range(space.p):
                vec = vec - Expr.atom(JetVar(b, mi_append(J0, k))) * X.xi[k]
            entry = normalize(mats[i][a][b])
            if not entry.is_zero():
                val = val + entry * vec
        return val

    return _prolong(space, X, n, twist=twist, deriv=deriv)


def evolutionary_representative(X: VectorField, space: JetSpace | None = None):
    """Characteristics Q^a = phi^a - u^a_i xi^i of a Lie-point field."""
    space = space or X.space
    out = []
    for a in range(space.q):
        val = X.phi[a]
        for i in range(space.p):
            val = val - Expr.atom(JetVar(a, mi_append(mi_zero(space.p), i))) * X.xi[i]
        out.append(val)
    return out


def mu_deviation(X: VectorField, mu, n: int, space: JetSpace | None = None):
    """Coefficient differences between the mu-twisted and classical prolongations."""
    space = space or X.space
    twisted = prolong_mu(X, mu, n, space)
    plain = prolong_standard(X, n, space)
    return {k: twisted.psi[k] - plain.psi[k] for k in twisted.psi}


# ---------------------------------------------------------------------------
# equation systems and reduction


def _rank(atom):
    return (jet_order_of(atom), atom.key)


class EquationSystem:
    """Residuals F^l plus solved rules (leading jet -> lower-rank right side)."""

    def __init__(self, space: JetSpace, residuals, solved_rules=None):
        self.space = space
        self.residuals = tuple(normalize(F) for F in residuals)
        if solved_rules is None:
            solved_rules = [self._solve(F) for F in self.residuals]
        rules = []
        for lead, rhs in solved_rules:
            lead = as_single_atom(lead) if isinstance(lead, Expr) else lead
            rhs = normalize(rhs)
            if not isinstance(lead, (JetVar, AuxJetVar)):
                raise TwistkitError("solved-rule lead must be a jet atom")
            bad = [a for a in iter_atoms(rhs) if _rank(a) >= _rank(lead) and isinstance(a, (JetVar, AuxJetVar))]
            if bad:
                raise TwistkitError(
                    f"solved rule for {lead!r} has right side of rank >= lead: {bad[0]!r}"
                )
            rules.append((lead, rhs))
        self.solved_rules = tuple(rules)
        for F, (lead, rhs) in zip(self.residuals, self.solved_rules):
            if not substitute(F, {lead: rhs}).is_zero():
                raise TwistkitError("solved rule does not annihilate its residual")

    def _solve(self, F: Expr):
        jets = [a for a in iter_atoms(F, deep=False) if isinstance(a, (JetVar, AuxJetVar))]
        if not jets:
            raise TwistkitError("residual contains no jet atom to solve for")
        lead = max(jets, key=_rank)
        num = F.num
        if F.den.degree_in(lead):
            raise TwistkitError(f"cannot solve: {lead!r} occurs in a denominator")
        if num.degree_in(lead) != 1:
            raise TwistkitError(f"cannot solve: residual is not linear in {lead!r}")
        A_terms, B_terms = [], []
        for mono, c in num.terms:
            hit = [(a, e) for a, e in mono if a == lead]
            if hit:
                rest = tuple((a, e) for a, e in mono if a != lead)
                A_terms.append((rest, c))
            else:
                B_terms.append((mono, c))
        from .core.polynomial import Poly

        A = Expr._make(Poly(A_terms), F.den)
        B = Expr._make(Poly(B_terms), F.den)
        if A.is_zero():
            raise TwistkitError("degenerate residual")
        return lead, -B / A

    @property
    def order(self) -> int:
        return max((max_jet_order(F) for F in self.residuals), default=1)

    def rules_map(self):
        return dict(self.solved_rules)


class Reducer:
    """Fixpoint substitution engine for solved rules and their consequences."""

    def __init__(self, rules, space: JetSpace, deriv=None):
        self.rules = dict(rules)
        self.space = space
        self.D = deriv or (lambda i: space.D(i))
        self.memo = {}
        self._by_var = {}
        for lead in self.rules:
            key = (type(lead).__name__, lead.dep if isinstance(lead, JetVar) else lead.aux)
            self._by_var.setdefault(key, []).append(lead)

    def _find_rule_lead(self, atom):
        if not isinstance(atom, (JetVar, AuxJetVar)):
            return None
        key = (type(atom).__name__, atom.dep if isinstance(atom, JetVar) else atom.aux)
        best = None
        for lead in self._by_var.get(key, ()):
            if mi_leq(lead.J, atom.J):
                if best is None or mi_order(lead.J) > mi_order(best.J):
                    best = lead
        return best

    def reduce_atom(self, atom):
        """Fully reduced value of a reducible jet atom, else None."""
        if atom in self.memo:
            return self.memo[atom]
        lead = self._find_rule_lead(atom)
        if lead is None:
            self.memo[atom] = None
            return None
        if atom == lead:
            val = self.reduce(self.rules[lead])
        else:
            diff = mi_sub(atom.J, lead.J)
            i = next(idx for idx, c in enumerate(diff) if c > 0)
            if isinstance(atom, JetVar):
                parent = JetVar(atom.dep, mi_sub(atom.J, mi_append(mi_zero(self.space.p), i)))
            else:
                parent = AuxJetVar(atom.aux, mi_sub(atom.J, mi_append(mi_zero(self.space.p), i)))
            pval = self.reduce_atom(parent)
            val = self.reduce(self.D(i)(pval))
        self.memo[atom] = val
        return val

    def reduce(self, e) -> Expr:
        e = normalize(e)
        sigma = {}
        for a in iter_atoms(e):
            if isinstance(a, (JetVar, AuxJetVar)) and self._find_rule_lead(a) is not None:
                sigma[a] = self.reduce_atom(a)
        if not sigma:
            return e
        return substitute(e, sigma)


def reduce_mod_system(e, sys: EquationSystem, space: JetSpace | None = None) -> Expr:
    """Fixpoint of substituting solved rules and their differential consequences."""
    space = space or sys.space
    red = Reducer(sys.rules_map(), space)
    out = red.reduce(normalize(e))
    leftover = [
        a
        for a in iter_atoms(out)
        if isinstance(a, (JetVar, AuxJetVar)) and red._find_rule_lead(a) is not None
    ]
    if leftover:
        raise NoSolvedRule(leftover[0])
    return out


# ---------------------------------------------------------------------------
# symmetry verification


@dataclass
class SymmetryReport:
    passed: bool
    residuals: list
    mode: str
    prolonged: ProlongedField = field(repr=False, default=None)


def check_symmetry(
    X: VectorField,
    sys: EquationSystem,
    mode: str = "standard",
    lam=None,
    mu=None,
    order: int | None = None,
) -> SymmetryReport:
    """Does the mode's prolongation of X annihilate the system on-shell?"""
    space = sys.space
    n = order if order is not None else sys.order
    if n < sys.order:
        raise TwistkitError("prolongation order is below the system order")
    if mode == "standard":
        Y = prolong_standard(X, n, space)
    elif mode == "lambda":
        if lam is None:
            raise TwistkitError("lambda mode requires the lambda expression")
        Y = prolong_lambda(X, lam, n, space)
    elif mode == "mu":
        if mu is None:
            raise TwistkitError("mu mode requires the matrix one-form")
        Y = prolong_mu(X, mu, n, space)
    else:
        raise TwistkitError(f"unknown symmetry mode {mode!r}")
    apply = Y.as_derivation()
    residuals = [reduce_mod_system(apply(F), sys, space) for F in sys.residuals]
    return SymmetryReport(
        passed=all(res.is_zero() for res in residuals),
        residuals=residuals,
        mode=mode,
        prolonged=Y,
    )


# ---------------------------------------------------------------------------
# commutators


def commutator(A, B):
    """[A, B] componentwise: A(B^k) - B(A^k) per coordinate direction."""
    if isinstance(A, VectorField) and isinstance(B, VectorField):
        if A.space is not B.space and (A.space.p, A.space.q, A.space.r) != (
            B.space.p,
            B.space.q,
            B.space.r,
        ):
            raise DimensionMismatch("commutator requires matching spaces")
        da, db = A.as_derivation(), B.as_derivation()
        semi = A.semiclassical or B.semiclassical
        return VectorField(
            A.space,
            xi=[da(B.xi[i]) - db(A.xi[i]) for i in range(A.space.p)],
            phi=[da(B.phi[a]) - db(A.phi[a]) for a in range(A.space.q)],
            eta=[da(B.eta[b]) - db(A.eta[b]) for b in range(A.space.r)],
            semiclassical=semi,
        )
    if isinstance(A, ProlongedField) and isinstance(B, ProlongedField):
        order = min(A.order, B.order)
        da, db = A.as_derivation(), B.as_derivation()
        xi = [da(B.xi[i]) - db(A.xi[i]) for i in range(A.space.p)]
        psi = {}
        chi = {}
        for a in range(A.space.q):
            for k in range(order + 1):
                for J in multiindices(A.space.p, k):
                    psi[(a, J)] = da(B.psi_at(a, J)) - db(A.psi_at(a, J))
        for b in range(A.space.r):
            for k in range(order + 1):
                for J in multiindices(A.space.p, k):
                    chi[(b, J)] = da(B.chi_at(b, J)) - db(A.chi_at(b, J))
        return ProlongedField(A.space, order, xi, psi, chi)
    raise TwistkitError("commutator arguments must be two fields of the same kind")


# ---------------------------------------------------------------------------
# invariance by differentiation


@dataclass
class IbdpReport:
    passed: bool
    quotient: Expr
    residual: Expr


def check_ibdp(X: VectorField, twist, eta, zeta, space: JetSpace | None = None) -> IbdpReport:
    """Does the next prolongation annihilate D_x(zeta) / D_x(eta)?

    twist: None for the classical prolongation, an expression for the scalar
    stretching, or a matrix one-form (or list of matrices) for the twisting.
    """
    space = space or X.space
    if space.p != 1:
        raise NotScalarBase("invariance-by-differentiation is checked for one independent variable")
    eta = normalize(eta)
    zeta = normalize(zeta)
    if max_jet_order(eta) > 0:
        raise NotInvariant("eta (must be order 0)")
    k = max_jet_order(zeta)

    def prolong_to(order):
        if twist is None:
            return prolong_standard(X, order, space)
        if isinstance(twist, Expr) or isinstance(twist, (int,)):
            return prolong_lambda(X, twist, order, space)
        return prolong_mu(X, twist, order, space)

    Yk = prolong_to(max(k, 1))
    if not Yk.apply(eta).is_zero():
        raise NotInvariant("eta")
    if not Yk.apply(zeta).is_zero():
        raise NotInvariant("zeta")
    Dx = space.D(0)
    quot = Dx(zeta) / Dx(eta)
    Yk1 = prolong_to(k + 1)
    residual = Yk1.apply(quot)
    return IbdpReport(passed=residual.is_zero(), quotient=quot, residual=residual)
