"""Atoms of the differential-field fragment.

An atom is one of:

* an independent variable ``x^i``,
* a jet variable ``u^a_J`` (dependent variable ``a`` differentiated per the
  multi-index ``J``),
* an auxiliary jet variable ``w^b_J``,
* a named symbolic constant,
* a derivative of an opaque function (known arguments, unknown body),
* a symbolic power ``base^(linear form in constants)``,
* an exponential ``exp(argument)``.

Atoms carry a strict total order (kind rank, then indices, then recursive
comparison) realised as a nested-tuple sort key, so every downstream
canonical form is deterministic across runs.
"""

from __future__ import annotations

from fractions import Fraction

# ---------------------------------------------------------------------------
# multi-indices

MultiIndex = tuple  # tuple[int, ...], one count per independent variable


def mi_zero(p: int) -> MultiIndex:
    return (0,) * p


def mi_order(J: MultiIndex) -> int:
    return sum(J)


def mi_append(J: MultiIndex, i: int) -> MultiIndex:
    """The multi-index J with slot i incremented (J, i)."""
    return J[:i] + (J[i] + 1,) + J[i + 1:]


def mi_sub(J: MultiIndex, K: MultiIndex):
    """Componentwise J - K, or None when K does not divide J."""
    if len(J) != len(K):
        return None
    out = tuple(j - k for j, k in zip(J, K))
    if any(c < 0 for c in out):
        return None
    return out


def mi_leq(K: MultiIndex, J: MultiIndex) -> bool:
    return len(K) == len(J) and all(k <= j for k, j in zip(K, J))


# ---------------------------------------------------------------------------
# linear forms in symbolic constants (exponents of symbolic powers)


class LinForm:
    """Rational-linear combination of constant names plus a rational term."""

    __slots__ = ("entries", "const", "_key")

    def __init__(self, entries=(), const=0):
        clean = [(name, Fraction(c)) for name, c in entries if c != 0]
        clean.sort(key=lambda e: e[0])
        self.entries = tuple(clean)
        self.const = Fraction(const)
        self._key = (self.entries, self.const)

    @staticmethod
    def of(name: str) -> "LinForm":
        return LinForm(((name, Fraction(1)),))

    def is_zero(self) -> bool:
        return not self.entries and self.const == 0

    def is_rational(self) -> bool:
        return not self.entries

    def add(self, other: "LinForm") -> "LinForm":
        acc = dict(self.entries)
        for name, c in other.entries:
            acc[name] = acc.get(name, Fraction(0)) + c
        return LinForm(acc.items(), self.const + other.const)

    def scale(self, k) -> "LinForm":
        k = Fraction(k)
        return LinForm(((n, c * k) for n, c in self.entries), self.const * k)

    def neg(self) -> "LinForm":
        return self.scale(-1)

    def shift(self, k) -> "LinForm":
        return LinForm(self.entries, self.const + Fraction(k))

    def leading_sign(self) -> int:
        """Sign of the coefficient of the first constant name, else of the term."""
        if self.entries:
            c = self.entries[0][1]
        else:
            c = self.const
        return (c > 0) - (c < 0)

    def integer_part(self) -> int:
        """Integer component of the constant term (pulled out at construction)."""
        num, den = self.const.numerator, self.const.denominator
        return num // den if den == 1 else 0

    def __eq__(self, other):
        return isinstance(other, LinForm) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        parts = [f"{c}*{n}" for n, c in self.entries]
        if self.const != 0 or not parts:
            parts.append(str(self.const))
        return " + ".join(parts)


# ---------------------------------------------------------------------------
# atoms

_RANK_INDEP = 0
_RANK_JET = 1
_RANK_AUX = 2
_RANK_CONST = 3
_RANK_FUNC = 4
_RANK_POW = 5
_RANK_EXP = 6


class Atom:
    __slots__ = ("key", "_hash")

    def _finish(self, key):
        self.key = key
        self._hash = hash(key)

    def __eq__(self, other):
        return self is other or (isinstance(other, Atom) and self.key == other.key)

    def __hash__(self):
        return self._hash

    def __lt__(self, other):
        return self.key < other.key

    def __repr__(self):
        from .printing import render_atom

        return render_atom(self, None)


class IndepVar(Atom):
    __slots__ = ("index",)

    def __init__(self, index: int):
        self.index = index
        self._finish((_RANK_INDEP, index))


class JetVar(Atom):
    __slots__ = ("dep", "J")

    def __init__(self, dep: int, J: MultiIndex):
        self.dep = dep
        self.J = tuple(J)
        self._finish((_RANK_JET, dep, mi_order(self.J), self.J))

    @property
    def order(self) -> int:
        return mi_order(self.J)


class AuxJetVar(Atom):
    __slots__ = ("aux", "J")

    def __init__(self, aux: int, J: MultiIndex):
        self.aux = aux
        self.J = tuple(J)
        self._finish((_RANK_AUX, aux, mi_order(self.J), self.J))

    @property
    def order(self) -> int:
        return mi_order(self.J)


class ConstSym(Atom):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._finish((_RANK_CONST, name))


class FuncAtom(Atom):
    """Derivative of an opaque function of declared argument atoms.

    ``orders[j]`` counts differentiations with respect to argument slot j.
    """

    __slots__ = ("name", "args", "orders")

    def __init__(self, name: str, args, orders=None):
        args = tuple(args)
        if orders is None:
            orders = (0,) * len(args)
        orders = tuple(orders)
        if len(orders) != len(args):
            raise ValueError("orders length must match argument count")
        self.name = name
        self.args = args
        self.orders = orders
        self._finish(
            (_RANK_FUNC, name, sum(orders), orders, tuple(a.key for a in args))
        )

    def bump(self, slot: int) -> "FuncAtom":
        orders = self.orders[:slot] + (self.orders[slot] + 1,) + self.orders[slot + 1:]
        return FuncAtom(self.name, self.args, orders)


class PowAtom(Atom):
    """Symbolic power of a canonical expression base.

    The exponent is a linear form whose constant term is never a nonzero
    integer and whose leading coefficient is positive (reciprocals live in
    denominators); both normalisations happen in the ``pow_of`` constructor.
    """

    __slots__ = ("base", "form")

    def __init__(self, base, form: LinForm):
        self.base = base
        self.form = form
        self._finish((_RANK_POW, base.key, form._key))


class ExpAtom(Atom):
    """exp of a canonical expression with positive-leading numerator."""

    __slots__ = ("arg",)

    def __init__(self, arg):
        self.arg = arg
        self._finish((_RANK_EXP, arg.key))


def jet_order_of(atom: Atom) -> int:
    """Jet order contributed by the atom itself (0 for non-jet kinds)."""
    if isinstance(atom, (JetVar, AuxJetVar)):
        return atom.order
    return 0
