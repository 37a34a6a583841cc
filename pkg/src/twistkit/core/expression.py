"""Canonical rational expressions over the atom generators.

An Expr is a reduced fraction num/den of canonical polynomials: gcd(num, den)
is a unit, den is nonzero with leading coefficient 1, and the zero expression
is 0/1.  Two expressions are semantically equal (within the declared
independent-generator fragment) iff their fields are structurally identical.

Transcendental atoms are normalised at construction only:

* ``exp_of`` maps exp(0) to 1 and represents exp(f) with negative-leading f
  as 1/exp(-f), so exp(f)*exp(-f) cancels to 1 structurally;
* ``pow_of`` expands the integer part of the exponent into ordinary powers
  and sign-normalises the remaining linear form the same way.

No other relations among exp/power/opaque atoms are imposed.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import DivisionByZero, TwistkitError
from .atoms import (
    Atom,
    ConstSym,
    ExpAtom,
    FuncAtom,
    IndepVar,
    JetVar,
    AuxJetVar,
    LinForm,
    PowAtom,
    jet_order_of,
)
from .gcd import poly_gcd
from .polynomial import MONO_ONE, P_ONE, P_ZERO, Poly, exact_div, poly_atom, poly_const


class Expr:
    __slots__ = ("num", "den", "_hash", "_key")

    def __init__(self, num: Poly, den: Poly):
        # callers must pass already-reduced data; use normalize()/_make otherwise
        self.num = num
        self.den = den
        self._hash = None
        self._key = None

    # -- construction --------------------------------------------------------

    @staticmethod
    def _make(num: Poly, den: Poly) -> "Expr":
        if den.is_zero():
            raise DivisionByZero()
        if num.is_zero():
            return ZERO
        if not den.is_one():
            g = poly_gcd(num, den)
            if not g.is_one():
                num = exact_div(num, g)
                den = exact_div(den, g)
            lc = den.leading()[1]
            if lc != 1:
                num = num.scale(1 / lc)
                den = den.scale(1 / lc)
        return Expr(num, den)

    @staticmethod
    def const(c) -> "Expr":
        c = Fraction(c)
        if c == 0:
            return ZERO
        return Expr(poly_const(c), P_ONE)

    @staticmethod
    def atom(a: Atom) -> "Expr":
        return Expr(poly_atom(a), P_ONE)

    # -- identity --------------------------------------------------------------

    @property
    def key(self):
        if self._key is None:
            self._key = (self.num.key, self.den.key)
        return self._key

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_rational(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def rational_value(self) -> Fraction:
        if not self.is_rational():
            raise TwistkitError("expression is not a rational constant")
        return self.num.constant_value() / self.den.constant_value()

    # -- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        if self.den == other.den:
            return Expr._make(self.num + other.num, self.den)
        return Expr._make(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return Expr(self.num.neg(), self.den)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if self.is_zero() or other.is_zero():
            return ZERO
        if self.is_one():
            return other
        if other.is_one():
            return self
        return Expr._make(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise DivisionByZero()
        return Expr._make(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k == 0:
            return ONE
        if k < 0:
            if self.is_zero():
                raise DivisionByZero()
            return Expr._make(self.den.pow(-k), self.num.pow(-k))
        return Expr(self.num.pow(k), self.den.pow(k))

    def __repr__(self):
        from .printing import render_expr

        return render_expr(self, None)


ZERO = Expr(P_ZERO, P_ONE)
ONE = Expr(P_ONE, P_ONE)


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)):
        return Expr.const(x)
    if isinstance(x, Atom):
        return Expr.atom(x)
    return NotImplemented


def normalize(x) -> Expr:
    """Canonicalise ints, Fractions, atoms and expressions; idempotent."""
    e = _coerce(x)
    if e is NotImplemented:
        raise TwistkitError(f"cannot normalise object of type {type(x).__name__}")
    return e


def arith(op: str, a, b) -> Expr:
    a = normalize(a)
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / normalize(b)
    if op == "int_pow":
        return a ** int(b)
    raise TwistkitError(f"unknown arithmetic operation {op!r}")


# -- transcendental constructors ---------------------------------------------


def exp_of(arg) -> Expr:
    arg = normalize(arg)
    if arg.is_zero():
        return ONE
    if arg.num.leading()[1] > 0:
        return Expr.atom(ExpAtom(arg))
    return ONE / Expr.atom(ExpAtom(-arg))


def pow_of(base, form: LinForm) -> Expr:
    base = normalize(base)
    if base.is_zero():
        raise DivisionByZero("symbolic power of zero base")
    if form.is_zero() or base.is_one():
        return ONE
    k = form.integer_part()
    if k:
        rest = form.shift(-k)
        head = base ** k
        if rest.is_zero():
            return head
        return head * pow_of(base, rest)
    if form.leading_sign() < 0:
        return ONE / Expr.atom(PowAtom(base, form.neg()))
    return Expr.atom(PowAtom(base, form))


# -- structural queries --------------------------------------------------------


def iter_atoms(e: Expr, deep: bool = True):
    """Every distinct atom of e; with deep=True also inside exp/pow/func atoms."""
    seen = set()
    stack = [e.num, e.den]
    while stack:
        p = stack.pop()
        for a in p.atoms():
            if a in seen:
                continue
            seen.add(a)
            yield a
            if not deep:
                continue
            if isinstance(a, ExpAtom):
                stack.append(a.arg.num)
                stack.append(a.arg.den)
            elif isinstance(a, PowAtom):
                stack.append(a.base.num)
                stack.append(a.base.den)
            elif isinstance(a, FuncAtom):
                for arg in a.args:
                    if arg not in seen:
                        seen.add(arg)
                        yield arg


def max_jet_order(e: Expr) -> int:
    return max((jet_order_of(a) for a in iter_atoms(e)), default=0)


def depends_on_aux(e: Expr) -> bool:
    return any(isinstance(a, AuxJetVar) for a in iter_atoms(e))


def as_single_atom(e: Expr):
    """The atom when e is exactly one atom to the first power, else None."""
    if not e.den.is_one() or len(e.num.terms) != 1:
        return None
    mono, c = e.num.terms[0]
    if c != 1 or len(mono) != 1 or mono[0][1] != 1:
        return None
    return mono[0][0]


def is_zero(e) -> bool:
    """True iff the canonical numerator is the zero polynomial."""
    return normalize(e).is_zero()


# -- substitution ---------------------------------------------------------------


def substitute(e: Expr, sigma) -> Expr:
    """Simultaneous replacement of atoms by expressions, then normalisation.

    Keys of sigma are atoms; images are coerced to Expr.  Substituting an atom
    that appears as an argument of an opaque function by anything other than a
    single atom leaves the declared fragment and raises.
    """
    sigma = {a: normalize(v) for a, v in sigma.items()}
    if not sigma:
        return e
    cache: dict = {}

    def touched(a: Atom) -> bool:
        if a in sigma:
            return True
        hit = cache.get(("t", a))
        if hit is not None:
            return hit
        if isinstance(a, ExpAtom):
            out = _poly_touched(a.arg.num) or _poly_touched(a.arg.den)
        elif isinstance(a, PowAtom):
            out = (
                _poly_touched(a.base.num)
                or _poly_touched(a.base.den)
                or any(ConstSym(n) in sigma for n, _ in a.form.entries)
            )
        elif isinstance(a, FuncAtom):
            out = any(arg in sigma for arg in a.args)
        else:
            out = False
        cache[("t", a)] = out
        return out

    def _poly_touched(p: Poly) -> bool:
        return any(touched(a) for a in p.atoms())

    def sub_atom(a: Atom) -> Expr:
        if a in sigma:
            return sigma[a]
        hit = cache.get(a)
        if hit is not None:
            return hit
        if isinstance(a, ExpAtom):
            out = exp_of(sub_expr(a.arg))
        elif isinstance(a, PowAtom):
            form = a.form
            if any(ConstSym(n) in sigma for n, _ in form.entries):
                entries = []
                const = form.const
                for n, c in form.entries:
                    img = sigma.get(ConstSym(n))
                    if img is None:
                        entries.append((n, c))
                    elif img.is_rational():
                        const += c * img.rational_value()
                    else:
                        sole = as_single_atom(img)
                        if isinstance(sole, ConstSym):
                            entries.append((sole.name, c))
                        else:
                            raise TwistkitError(
                                "substitution into a symbolic exponent must map "
                                "constants to constants or rationals"
                            )
                form = LinForm(entries, const)
            out = pow_of(sub_expr(a.base), form)
        elif isinstance(a, FuncAtom):
            new_args = []
            for arg in a.args:
                img = sigma.get(arg)
                if img is None:
                    new_args.append(arg)
                    continue
                sole = as_single_atom(img)
                if sole is None:
                    raise TwistkitError(
                        f"cannot substitute a non-atom into argument {arg!r} "
                        f"of opaque function {a.name!r}"
                    )
                new_args.append(sole)
            out = Expr.atom(FuncAtom(a.name, new_args, a.orders))
        else:
            out = Expr.atom(a)
        cache[a] = out
        return out

    def sub_poly(p: Poly) -> Expr:
        if not _poly_touched(p):
            return Expr(p, P_ONE)
        total = ZERO
        for mono, c in p.terms:
            fixed = []
            moving = ONE
            for a, k in mono:
                if touched(a):
                    moving = moving * (sub_atom(a) ** k)
                else:
                    fixed.append((a, k))
            term = Expr(Poly(((tuple(fixed), c),)), P_ONE)
            total = total + term * moving
        return total

    def sub_expr(x: Expr) -> Expr:
        num = sub_poly(x.num)
        den = sub_poly(x.den)
        if den.is_zero():
            offender = next((a for a in x.den.atoms() if touched(a)), None)
            raise DivisionByZero(
                "substitution produced a zero denominator", atom=offender
            )
        return num / den

    return sub_expr(e)


# -- convenience atom expressions ------------------------------------------------


def x_(i: int) -> Expr:
    return Expr.atom(IndepVar(i))


def u_(a: int, J) -> Expr:
    return Expr.atom(JetVar(a, tuple(J)))


def w_(b: int, J) -> Expr:
    return Expr.atom(AuxJetVar(b, tuple(J)))


def const(name: str) -> Expr:
    return Expr.atom(ConstSym(name))


def func(name: str, args, orders=None) -> Expr:
    return Expr.atom(FuncAtom(name, args, orders))
