"""Derivations of the expression field.

A Derivation is determined by its action on coordinate-like atoms
(independent variables, jet variables, auxiliary jets, constants); unmapped
atoms derive to zero.  Exponentials, symbolic powers and opaque-function
derivatives follow built-in chain rules:

    D exp(f)        = exp(f) * D f
    D base^form     = form * base^form * D base / base
    D f_K(a_1,...)  = sum_j f_{K+e_j}(a_1,...) * D a_j

Both total and partial derivatives, as well as the action of a vector field
as a differential operator, are instances.
"""

from __future__ import annotations

from .atoms import Atom, ConstSym, ExpAtom, FuncAtom, LinForm, PowAtom
from .expression import Expr, ONE, ZERO, normalize
from .polynomial import P_ONE, Poly


def linform_expr(form: LinForm) -> Expr:
    out = Expr.const(form.const)
    for name, c in form.entries:
        out = out + Expr.const(c) * Expr.atom(ConstSym(name))
    return out


class Derivation:
    def __init__(self, action, name: str = "D"):
        """action: mapping Atom -> Expr-like, or callable returning one (or None)."""
        if callable(action) and not hasattr(action, "get"):
            self._lookup = action
        else:
            table = {a: normalize(v) for a, v in action.items()}
            self._lookup = table.get
        self.name = name
        self._cache: dict[Atom, Expr] = {}

    def of_atom(self, a: Atom) -> Expr:
        hit = self._cache.get(a)
        if hit is not None:
            return hit
        if isinstance(a, ExpAtom):
            out = Expr.atom(a) * self(a.arg)
        elif isinstance(a, PowAtom):
            d_base = self(a.base)
            if d_base.is_zero():
                out = ZERO
            else:
                out = linform_expr(a.form) * Expr.atom(a) * d_base / a.base
        elif isinstance(a, FuncAtom):
            out = ZERO
            for j, arg in enumerate(a.args):
                d_arg = self.of_atom(arg)
                if not d_arg.is_zero():
                    out = out + Expr.atom(a.bump(j)) * d_arg
        else:
            mapped = self._lookup(a)
            out = normalize(mapped) if mapped is not None else ZERO
        self._cache[a] = out
        return out

    def of_poly(self, p: Poly) -> Expr:
        out = ZERO
        for mono, c in p.terms:
            for i, (a, e) in enumerate(mono):
                da = self.of_atom(a)
                if da.is_zero():
                    continue
                if e > 1:
                    rest = mono[:i] + ((a, e - 1),) + mono[i + 1:]
                else:
                    rest = mono[:i] + mono[i + 1:]
                out = out + Expr(Poly(((rest, c * e),)), P_ONE) * da
        return out

    def __call__(self, e) -> Expr:
        e = normalize(e)
        dn = self.of_poly(e.num)
        if e.den.is_one():
            return dn
        dd = self.of_poly(e.den)
        inv = Expr(P_ONE, e.den)
        return dn * inv - Expr(e.num, P_ONE) * dd * inv * inv

    def __repr__(self):
        return f"<Derivation {self.name}>"


def partial(e, atom: Atom) -> Expr:
    """Partial derivative treating every other coordinate atom as constant."""
    return Derivation({atom: ONE}, name="partial")(e)
