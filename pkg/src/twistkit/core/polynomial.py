"""Sparse multivariate polynomials over the rationals in atom generators.

A monomial is a tuple of (atom, positive exponent) pairs in ascending atom
order; terms are kept in descending graded-lexicographic order (total degree
first, then lexicographic with the larger atom more significant).  No zero
coefficients are ever stored, so structural equality is canonical equality.
"""

from __future__ import annotations

from fractions import Fraction

Mono = tuple  # tuple[tuple[Atom, int], ...] ascending by atom key

MONO_ONE: Mono = ()


def mono_key(m: Mono):
    deg = 0
    for _, e in m:
        deg += e
    return (deg, tuple((a.key, e) for a, e in reversed(m)))


def mono_mul(m1: Mono, m2: Mono) -> Mono:
    if not m1:
        return m2
    if not m2:
        return m1
    acc = dict(m1)
    for a, e in m2:
        acc[a] = acc.get(a, 0) + e
    return tuple(sorted(acc.items(), key=lambda it: it[0].key))


def mono_pow(m: Mono, k: int) -> Mono:
    if k == 0 or not m:
        return MONO_ONE
    return tuple((a, e * k) for a, e in m)


def mono_div(m1: Mono, m2: Mono):
    """m1 / m2, or None when m2 does not divide m1."""
    if not m2:
        return m1
    d2 = dict(m2)
    out = []
    for a, e in m1:
        if a in d2:
            r = e - d2.pop(a)
            if r < 0:
                return None
            if r:
                out.append((a, r))
        else:
            out.append((a, e))
    if d2:
        return None
    return tuple(out)


def mono_gcd(m1: Mono, m2: Mono) -> Mono:
    d2 = dict(m2)
    out = []
    for a, e in m1:
        if a in d2:
            out.append((a, min(e, d2[a])))
    return tuple(out)


def mono_degree(m: Mono) -> int:
    return sum(e for _, e in m)


class Poly:
    """Immutable canonical polynomial."""

    __slots__ = ("terms", "_hash", "_key")

    def __init__(self, terms):
        """terms: iterable of (mono, coeff); combined, cleaned and sorted here."""
        acc = {}
        for m, c in terms:
            if c == 0:
                continue
            prev = acc.get(m)
            if prev is None:
                acc[m] = Fraction(c)
            else:
                s = prev + c
                if s:
                    acc[m] = s
                else:
                    del acc[m]
        ordered = sorted(acc.items(), key=lambda t: mono_key(t[0]), reverse=True)
        self.terms = tuple(ordered)
        self._hash = None
        self._key = None

    # -- canonical identity ------------------------------------------------

    @property
    def key(self):
        if self._key is None:
            self._key = tuple((mono_key(m), c) for m, c in self.terms)
        return self._key

    def __eq__(self, other):
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.terms)
        return self._hash

    # -- basic queries -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return self.terms == ((MONO_ONE, Fraction(1)),)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and self.terms[0][0] == MONO_ONE)

    def constant_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return self.terms[0][1]

    def leading(self):
        """(mono, coeff) of the graded-lex leading term; requires nonzero."""
        return self.terms[0]

    def atoms(self):
        seen = set()
        for m, _ in self.terms:
            for a, _e in m:
                if a not in seen:
                    seen.add(a)
                    yield a

    def total_degree(self) -> int:
        return max((mono_degree(m) for m, _ in self.terms), default=0)

    def degree_in(self, atom) -> int:
        deg = 0
        for m, _ in self.terms:
            for a, e in m:
                if a == atom and e > deg:
                    deg = e
        return deg

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        if not other.terms:
            return self
        if not self.terms:
            return other
        return Poly(self.terms + other.terms)

    def __sub__(self, other):
        return self + other.neg()

    def neg(self):
        return Poly(((m, -c) for m, c in self.terms))

    def __mul__(self, other):
        if not self.terms or not other.terms:
            return P_ZERO
        if self.is_one():
            return other
        if other.is_one():
            return self
        acc = {}
        for m1, c1 in self.terms:
            for m2, c2 in other.terms:
                m = mono_mul(m1, m2)
                prev = acc.get(m)
                if prev is None:
                    acc[m] = c1 * c2
                else:
                    s = prev + c1 * c2
                    if s:
                        acc[m] = s
                    else:
                        del acc[m]
        return Poly(acc.items())

    def scale(self, c):
        c = Fraction(c)
        if c == 0:
            return P_ZERO
        if c == 1:
            return self
        return Poly(((m, k * c) for m, k in self.terms))

    def mul_mono(self, mono: Mono, c=1):
        c = Fraction(c)
        if c == 0:
            return P_ZERO
        return Poly(((mono_mul(m, mono), k * c) for m, k in self.terms))

    def pow(self, k: int):
        if k < 0:
            raise ValueError("negative power on Poly")
        out = P_ONE
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __repr__(self):
        from .printing import render_poly

        return render_poly(self, None)


P_ZERO = Poly(())
P_ONE = Poly(((MONO_ONE, Fraction(1)),))


def poly_const(c) -> Poly:
    return Poly(((MONO_ONE, Fraction(c)),))


def poly_atom(a, exp: int = 1) -> Poly:
    return Poly((((((a, exp),)), Fraction(1)),))


def exact_div(f: Poly, g: Poly):
    """Exact multivariate division f / g, or None when g does not divide f."""
    if g.is_zero():
        raise ZeroDivisionError("polynomial division by zero")
    if f.is_zero():
        return P_ZERO
    if g.is_one():
        return f
    gm, gc = g.leading()
    quo = {}
    rem = dict(f.terms)
    # repeatedly cancel the current leading term of the remainder
    while rem:
        m = max(rem, key=mono_key)
        c = rem[m]
        qm = mono_div(m, gm)
        if qm is None:
            return None
        qc = c / gc
        prev = quo.get(qm)
        quo[qm] = prev + qc if prev is not None else qc
        for m2, c2 in g.terms:
            mm = mono_mul(qm, m2)
            prev = rem.get(mm)
            s = (prev if prev is not None else Fraction(0)) - qc * c2
            if s:
                rem[mm] = s
            elif prev is not None:
                del rem[mm]
    return Poly(quo.items())


def divmod_multi(f: Poly, divisors):
    """Graded-lex division of f by an ordered list of divisors.

    Returns (quotients, remainder) with f = sum q_i d_i + r and no monomial of
    r divisible by any leading monomial of the divisors.
    """
    quos = [dict() for _ in divisors]
    rem = {}
    work = dict(f.terms)
    leads = [d.leading() for d in divisors]
    while work:
        m = max(work, key=mono_key)
        c = work.pop(m)
        for i, (dm, dc) in enumerate(leads):
            qm = mono_div(m, dm)
            if qm is not None:
                qc = c / dc
                prev = quos[i].get(qm)
                quos[i][qm] = prev + qc if prev is not None else qc
                for m2, c2 in divisors[i].terms:
                    if m2 == dm:
                        continue
                    mm = mono_mul(qm, m2)
                    prev = work.get(mm)
                    s = (prev if prev is not None else Fraction(0)) - qc * c2
                    if s:
                        work[mm] = s
                    elif prev is not None:
                        del work[mm]
                break
        else:
            prev = rem.get(m)
            rem[m] = prev + c if prev is not None else c
    return [Poly(q.items()) for q in quos], Poly(rem.items())


def content_mono(f: Poly) -> Mono:
    """Largest monomial dividing every term of f."""
    if f.is_zero():
        return MONO_ONE
    it = iter(f.terms)
    acc = next(it)[0]
    for m, _ in it:
        if not acc:
            break
        acc = mono_gcd(acc, m)
    return acc
