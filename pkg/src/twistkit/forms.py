"""Exterior calculus on truncated jet spaces.

Differential forms are supported through degree 2, which covers every check
in scope: contact structure preservation, horizontal Maurer-Cartan residuals,
the deformed exterior/Lie derivatives, and the characterization of twisted
prolongations by contact-ideal membership with respect to the deformed Lie
derivative.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Derivation, Expr, ONE, ZERO, iter_atoms, max_jet_order, normalize
from .core.atoms import AuxJetVar, IndepVar, JetVar, mi_append, mi_order, mi_zero
from .errors import (
    DimensionMismatch,
    OrderTooHigh,
    TruncationExceeded,
    TwistkitError,
    UnsupportedDegree,
)
from .jets import JetSpace, ProlongedField, VectorField, commutator, multiindices
from .linalg import mat_map

# covector tags: ("x", i) -> dx^i, ("u", a, J) -> du^a_J, ("w", b, J) -> dw^b_J


def cov_x(i):
    return ("x", i, None)


def cov_u(a, J):
    return ("u", a, tuple(J))


def cov_w(b, J):
    return ("w", b, tuple(J))


def _cov_key(c):
    kind, idx, J = c
    rank = {"x": 0, "u": 1, "w": 2}[kind]
    if J is None:
        return (rank, idx)
    return (rank, idx, mi_order(J), J)


def _cov_atom(c):
    kind, idx, J = c
    if kind == "x":
        return IndepVar(idx)
    if kind == "u":
        return JetVar(idx, J)
    return AuxJetVar(idx, J)


def render_covector(c, names=None) -> str:
    from .core.printing import render_atom

    return "d" + render_atom(_cov_atom(c), names)


def _sort_signed(key):
    """Sort a covector tuple, returning (sorted tuple, sign) or (None, 0) on repeats."""
    items = list(key)
    sign = 1
    for i in range(1, len(items)):
        j = i
        while j > 0 and _cov_key(items[j - 1]) > _cov_key(items[j]):
            items[j - 1], items[j] = items[j], items[j - 1]
            sign = -sign
            j -= 1
    for a, b in zip(items, items[1:]):
        if a == b:
            return None, 0
    return tuple(items), sign


class DiffForm:
    """Exterior form of fixed degree with canonical ordered-key coefficients."""

    def __init__(self, space: JetSpace, degree: int, coeffs=None):
        if degree < 0:
            raise UnsupportedDegree("negative form degree")
        self.space = space
        self.degree = degree
        table = {}
        for key, val in (coeffs or {}).items():
            val = normalize(val)
            if val.is_zero():
                continue
            if len(key) != degree:
                raise DimensionMismatch("coefficient key length differs from form degree")
            skey, sign = _sort_signed(tuple(key))
            if sign == 0:
                continue
            val = val if sign > 0 else -val
            if skey in table:
                s = table[skey] + val
                if s.is_zero():
                    del table[skey]
                else:
                    table[skey] = s
            else:
                table[skey] = val
        self.coeffs = table

    def is_zero(self) -> bool:
        return not self.coeffs

    def items(self):
        return sorted(self.coeffs.items(), key=lambda kv: tuple(_cov_key(c) for c in kv[0]))

    def __add__(self, other):
        if self.degree != other.degree:
            raise DimensionMismatch("cannot add forms of different degree")
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            s = out.get(k, ZERO) + v
            if s.is_zero():
                out.pop(k, None)
            else:
                out[k] = s
        return DiffForm(self.space, self.degree, out)

    def __neg__(self):
        return DiffForm(self.space, self.degree, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, s) -> "DiffForm":
        s = normalize(s)
        return DiffForm(self.space, self.degree, {k: v * s for k, v in self.coeffs.items()})

    def __eq__(self, other):
        return (
            isinstance(other, DiffForm)
            and self.degree == other.degree
            and self.coeffs == other.coeffs
        )

    def __repr__(self):
        if not self.coeffs:
            return "0"
        names = self.space.names
        bits = []
        for key, val in self.items():
            basis = "^".join(render_covector(c, names) for c in key) or "1"
            bits.append(f"({val!r}) {basis}")
        return " + ".join(bits)


def form_zero(space: JetSpace, degree: int) -> DiffForm:
    return DiffForm(space, degree, {})


def form_scalar(space: JetSpace, f) -> DiffForm:
    return DiffForm(space, 0, {(): normalize(f)})


def one_form(space: JetSpace, entries) -> DiffForm:
    """entries: mapping covector -> Expr."""
    return DiffForm(space, 1, {(c,): v for c, v in entries.items()})


def dx(space: JetSpace, i: int) -> DiffForm:
    return one_form(space, {cov_x(i): ONE})


def du(space: JetSpace, a: int, J=None) -> DiffForm:
    J = tuple(J) if J is not None else mi_zero(space.p)
    return one_form(space, {cov_u(a, J): ONE})


def wedge(a: DiffForm, b: DiffForm) -> DiffForm:
    """Graded-antisymmetric product."""
    out = {}
    for k1, v1 in a.coeffs.items():
        for k2, v2 in b.coeffs.items():
            key, sign = _sort_signed(k1 + k2)
            if sign == 0:
                continue
            val = v1 * v2
            if sign < 0:
                val = -val
            s = out.get(key, ZERO) + val
            if s.is_zero():
                out.pop(key, None)
            else:
                out[key] = s
    return DiffForm(a.space, a.degree + b.degree, out)


def _coordinate_atoms(e: Expr):
    return [a for a in iter_atoms(e) if isinstance(a, (IndepVar, JetVar, AuxJetVar))]


def exterior_d(a: DiffForm) -> DiffForm:
    """Coefficientwise total differential; jet coordinates are independent."""
    out = {}
    for key, val in a.coeffs.items():
        for atom in _coordinate_atoms(val):
            dv = Derivation({atom: ONE})(val)
            if dv.is_zero():
                continue
            if isinstance(atom, IndepVar):
                c = cov_x(atom.index)
            elif isinstance(atom, JetVar):
                c = cov_u(atom.dep, atom.J)
            else:
                c = cov_w(atom.aux, atom.J)
            nkey, sign = _sort_signed((c,) + key)
            if sign == 0:
                continue
            term = dv if sign > 0 else -dv
            s = out.get(nkey, ZERO) + term
            if s.is_zero():
                out.pop(nkey, None)
            else:
                out[nkey] = s
    return DiffForm(a.space, a.degree + 1, out)


def contact_form(a: int, J, space: JetSpace) -> DiffForm:
    """theta^a_J = du^a_J - u^a_{J,i} dx^i."""
    J = tuple(J)
    if mi_order(J) >= space.n:
        raise OrderTooHigh(
            f"contact form of order {mi_order(J)} does not exist on order-{space.n} jets"
        )
    entries = {cov_u(a, J): ONE}
    for i in range(space.p):
        entries[cov_x(i)] = -Expr.atom(JetVar(a, mi_append(J, i)))
    return one_form(space, entries)


def _component(field, c):
    kind, idx, J = c
    if isinstance(field, VectorField):
        if kind == "x":
            return field.xi[idx]
        if kind == "u":
            return field.phi[idx] if mi_order(J) == 0 else ZERO
        return field.eta[idx] if mi_order(J) == 0 else ZERO
    if kind == "x":
        return field.xi[idx]
    if kind == "u":
        return field.psi_at(idx, J)
    return field.chi_at(idx, J)


def interior(field, a: DiffForm) -> DiffForm:
    """Contraction of the field into the first slot of the form."""
    if a.degree == 0:
        raise UnsupportedDegree("cannot contract into a 0-form")
    out = {}
    for key, val in a.coeffs.items():
        for pos, c in enumerate(key):
            comp = _component(field, c)
            if comp.is_zero():
                continue
            term = comp * val
            if pos % 2:
                term = -term
            nkey = key[:pos] + key[pos + 1:]
            s = out.get(nkey, ZERO) + term
            if s.is_zero():
                out.pop(nkey, None)
            else:
                out[nkey] = s
    return DiffForm(a.space, a.degree - 1, out)


def lie_derivative(field, a: DiffForm) -> DiffForm:
    """Cartan formula: L_Y = d(Y .| a) + Y .| (d a)."""
    if a.degree == 0:
        d = a.coeffs.get((), ZERO)
        if isinstance(field, (VectorField, ProlongedField)):
            return form_scalar(a.space, field.apply(d))
    return exterior_d(interior(field, a)) + interior(field, exterior_d(a))


# ---------------------------------------------------------------------------
# matrix one-forms and twisted calculus


class MatrixOneForm:
    """Horizontal form Lambda_i dx^i with q x q expression matrices.

    Entries may depend on the base coordinates and first-order jets only.
    """

    def __init__(self, space: JetSpace, lambdas):
        self.space = space
        if len(lambdas) != space.p:
            raise DimensionMismatch("need one matrix per independent variable")
        mats = []
        for M in lambdas:
            M = [[normalize(v) for v in row] for row in M]
            if len(M) != space.q or any(len(row) != space.q for row in M):
                raise DimensionMismatch("matrices must be q x q")
            for row in M:
                for v in row:
                    if max_jet_order(v) > 1:
                        raise TwistkitError("matrix one-form entries may depend on first-order jets at most")
            mats.append(M)
        self.lambdas = mats

    def entry_form(self, a: int, b: int) -> DiffForm:
        return one_form(
            self.space, {cov_x(i): self.lambdas[i][a][b] for i in range(self.space.p)}
        )

    def is_zero(self) -> bool:
        return all(v.is_zero() for M in self.lambdas for row in M for v in row)

    def __repr__(self):
        return f"MatrixOneForm({self.lambdas!r})"


def mu_zero(space: JetSpace) -> MatrixOneForm:
    from .linalg import zeros

    return MatrixOneForm(space, [zeros(space.q) for _ in range(space.p)])


def mu_scalar(space: JetSpace, lams) -> MatrixOneForm:
    """Scalar functions lambda_i as multiples of the identity (q = 1 friendly)."""
    return MatrixOneForm(
        space,
        [
            [[normalize(l) if i == j else ZERO for j in range(space.q)] for i in range(space.q)]
            for l in lams
        ],
    )


@dataclass
class MCHReport:
    passed: bool
    residuals: dict


def check_MCH(mu: MatrixOneForm, deriv=None) -> MCHReport:
    """Zero-curvature residuals D_i L_j - D_j L_i + [L_i, L_j] per pair i < j."""
    space = mu.space
    D = deriv or (lambda i: space.D(i))
    residuals = {}
    ok = True
    for i in range(space.p):
        for j in range(i + 1, space.p):
            Li, Lj = mu.lambdas[i], mu.lambdas[j]
            R = [
                [
                    D(i)(Lj[a][b]) - D(j)(Li[a][b])
                    + sum((Li[a][c] * Lj[c][b] - Lj[a][c] * Li[c][b] for c in range(space.q)), ZERO)
                    for b in range(space.q)
                ]
                for a in range(space.q)
            ]
            residuals[(i, j)] = R
            ok = ok and all(v.is_zero() for row in R for v in row)
    return MCHReport(passed=ok, residuals=residuals)


def d_mu(a, mu):
    """Deformed exterior derivative d a + mu ^ a.

    Scalar case: a is a DiffForm and mu a one-form (DiffForm of degree 1).
    Matrix case: a is a sequence of q DiffForms and mu a MatrixOneForm.
    """
    if isinstance(a, DiffForm):
        if isinstance(mu, MatrixOneForm):
            if mu.space.q != 1:
                raise DimensionMismatch("matrix one-form applied to a scalar form")
            mu = mu.entry_form(0, 0)
        if mu.degree != 1:
            raise DimensionMismatch("mu must be a one-form")
        return exterior_d(a) + wedge(mu, a)
    if not isinstance(mu, MatrixOneForm):
        raise DimensionMismatch("vector-valued forms require a matrix one-form")
    comps = list(a)
    if len(comps) != mu.space.q:
        raise DimensionMismatch("component count differs from the matrix dimension")
    out = []
    for i in range(mu.space.q):
        acc = exterior_d(comps[i])
        for j in range(mu.space.q):
            acc = acc + wedge(mu.entry_form(i, j), comps[j])
        out.append(acc)
    return out


def mu_curvature(mu: MatrixOneForm):
    """Matrix of 2-forms d mu + mu ^ mu (full exterior derivative)."""
    q = mu.space.q
    out = []
    for i in range(q):
        row = []
        for j in range(q):
            acc = exterior_d(mu.entry_form(i, j))
            for k in range(q):
                acc = acc + wedge(mu.entry_form(i, k), mu.entry_form(k, j))
            row.append(acc)
        out.append(row)
    return out


def _scale_field(X, s):
    s = normalize(s)
    if isinstance(X, VectorField):
        return VectorField(
            X.space,
            xi=[v * s for v in X.xi],
            phi=[v * s for v in X.phi],
            eta=[v * s for v in X.eta],
            semiclassical=X.semiclassical,
        )
    return ProlongedField(
        X.space,
        X.order,
        [v * s for v in X.xi],
        {k: v * s for k, v in X.psi.items()},
        {k: v * s for k, v in X.chi.items()},
    )


def lie_mu(X, target, mu):
    """Deformed Lie derivative.

    On forms:   L_X a + mu ^ (X .| a); matrix mu acts on q-tuples of forms.
    On fields:  [X, Y] - (Y .| mu) X  for scalar mu.
    """
    if isinstance(target, DiffForm):
        if isinstance(mu, MatrixOneForm):
            if mu.space.q != 1:
                raise DimensionMismatch("matrix one-form applied to a scalar form")
            mu = mu.entry_form(0, 0)
        out = lie_derivative(X, target)
        if target.degree >= 1:
            out = out + wedge(mu, interior(X, target))
        return out
    if isinstance(target, (VectorField, ProlongedField)):
        if isinstance(mu, MatrixOneForm):
            if mu.space.q != 1:
                raise DimensionMismatch("field-valued deformed Lie derivative needs scalar mu")
            mu = mu.entry_form(0, 0)
        pairing = ZERO
        for (c,), v in mu.coeffs.items():
            pairing = pairing + _component(target, c) * v
        bracket = commutator(X, target)
        if isinstance(bracket, VectorField):
            xi = [a - b * pairing for a, b in zip(bracket.xi, X.xi)]
            phi = [a - b * pairing for a, b in zip(bracket.phi, X.phi)]
            eta = [a - b * pairing for a, b in zip(bracket.eta, X.eta)]
            try:
                return VectorField(bracket.space, xi, phi, eta, semiclassical=True)
            except TwistkitError:
                sp = bracket.space
                Jz = mi_zero(sp.p)
                return ProlongedField(
                    sp, 0, xi,
                    {(a, Jz): v for a, v in enumerate(phi)},
                    {(b, Jz): v for b, v in enumerate(eta)},
                )
        return ProlongedField(
            bracket.space,
            bracket.order,
            [a - b * pairing for a, b in zip(bracket.xi, X.xi)],
            {k: bracket.psi[k] - X.psi_at(*k) * pairing for k in bracket.psi},
            {k: bracket.chi[k] - X.chi_at(*k) * pairing for k in bracket.chi},
        )
    # vector-valued forms with a matrix mu
    comps = list(target)
    out = []
    for a in range(mu.space.q):
        acc = lie_derivative(X, comps[a])
        for b in range(mu.space.q):
            acc = acc + wedge(mu.entry_form(a, b), interior(X, comps[b]))
        out.append(acc)
    return out


def is_in_contact_ideal(w: DiffForm, space: JetSpace) -> bool:
    """Membership in the ideal generated by the contact forms, degree <= 2.

    Every du^a_J (and dw^b_J) is rewritten as theta + u^a_{J,i} dx^i; a
    one-form belongs to the ideal iff the horizontal residue vanishes, a
    two-form iff the purely horizontal block vanishes.
    """
    if w.degree not in (1, 2):
        raise UnsupportedDegree("contact-ideal membership implemented for degrees 1 and 2")
    cap = space.n + 1

    def rewrite(c):
        """List of (covector-or-theta, coefficient) for the basis change."""
        kind, idx, J = c
        if kind == "x":
            return [(("x", idx, None), ONE)]
        if mi_order(J) + 1 > cap:
            raise TruncationExceeded("contact rewrite needs a jet beyond the spare order")
        out = [((f"theta_{kind}", idx, J), ONE)]
        for i in range(space.p):
            if kind == "u":
                shift = Expr.atom(JetVar(idx, mi_append(J, i)))
            else:
                shift = Expr.atom(AuxJetVar(idx, mi_append(J, i)))
            out.append((("x", i, None), shift))
        return out

    def key_of(c):
        kind = c[0]
        rank = {"x": 0, "theta_u": 1, "theta_w": 2}[kind]
        if c[2] is None:
            return (rank, c[1])
        return (rank, c[1], mi_order(c[2]), c[2])

    horizontal = {}
    for key, val in w.coeffs.items():
        expansions = [rewrite(c) for c in key]
        # distribute the wedge product over the rewritten covectors
        stack = [((), val)]
        for exp in expansions:
            stack = [
                (acc + (c,), coeff * f) for acc, coeff in stack for c, f in exp
            ]
        for covs, coeff in stack:
            if any(c[0].startswith("theta") for c in covs):
                continue
            # sort the horizontal block with signs
            items = list(covs)
            sign = 1
            for i in range(1, len(items)):
                j = i
                while j > 0 and key_of(items[j - 1]) > key_of(items[j]):
                    items[j - 1], items[j] = items[j], items[j - 1]
                    sign = -sign
                    j -= 1
            if any(a == b for a, b in zip(items, items[1:])):
                continue
            k = tuple(items)
            term = coeff if sign > 0 else -coeff
            s = horizontal.get(k, ZERO) + term
            if s.is_zero():
                horizontal.pop(k, None)
            else:
                horizontal[k] = s
    return not horizontal


@dataclass
class MuProlongationReport:
    passed: bool
    projects: bool
    failures: list


def check_mu_prolongation(Y: ProlongedField, mu: MatrixOneForm, space: JetSpace | None = None) -> MuProlongationReport:
    """Twisted contact criterion: Y projects to the base and L^mu_Y theta stays in the ideal."""
    space = space or Y.space
    projects = all(max_jet_order(v) == 0 for v in Y.xi) and all(
        max_jet_order(Y.psi_at(a, mi_zero(space.p))) == 0 for a in range(space.q)
    )
    failures = []
    for k in range(Y.order):
        for J in multiindices(space.p, k):
            thetas = [contact_form(a, J, space.with_order(Y.order)) for a in range(space.q)]
            moved = lie_mu(Y, thetas, mu)
            for a, form in enumerate(moved):
                if not is_in_contact_ideal(form, space.with_order(Y.order)):
                    failures.append((a, J))
    passed = projects and not failures
    return MuProlongationReport(passed=passed, projects=projects, failures=failures)


def nabla_apply(mu: MatrixOneForm, i: int, v) -> list:
    """Connection action: (D_i + Lambda_i) applied to a q-vector of expressions."""
    space = mu.space
    v = [normalize(c) for c in v]
    if len(v) != space.q:
        raise DimensionMismatch("vector length differs from the matrix dimension")
    D = space.D(i)
    out = []
    for a in range(space.q):
        acc = D(v[a])
        for b in range(space.q):
            acc = acc + mu.lambdas[i][a][b] * v[b]
        out.append(acc)
    return out
