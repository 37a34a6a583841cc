"""Canonical text rendering.

The printer fixes the bit-exact surface of every report: terms appear in
descending graded-lexicographic order, atom spellings are determined by the
declared variable names, and there is no whitespace or ordering variance.
The expression grammar accepted by the frontend parser is a superset of what
is emitted here, so parse(render(e)) always reproduces e.
"""

from __future__ import annotations

from fractions import Fraction

from .atoms import (
    AuxJetVar,
    ConstSym,
    ExpAtom,
    FuncAtom,
    IndepVar,
    JetVar,
    LinForm,
    PowAtom,
)

_DEFAULT_INDEP = ("x", "t", "y", "z")
_DEFAULT_DEP = ("u", "v")


class Names:
    """Variable name tables used by the renderer and the parser."""

    __slots__ = ("indep", "dep", "aux")

    def __init__(self, indep=(), dep=(), aux=()):
        self.indep = tuple(indep)
        self.dep = tuple(dep)
        self.aux = tuple(aux)

    def indep_name(self, i: int) -> str:
        if i < len(self.indep):
            return self.indep[i]
        return _DEFAULT_INDEP[i] if i < len(_DEFAULT_INDEP) else f"x{i}"

    def dep_name(self, a: int) -> str:
        if a < len(self.dep):
            return self.dep[a]
        return _DEFAULT_DEP[a] if a < len(_DEFAULT_DEP) else f"u{a}"

    def aux_name(self, b: int) -> str:
        if b < len(self.aux):
            return self.aux[b]
        return "w" if b == 0 else f"w{b}"


_DEFAULT_NAMES = Names()


def _subscript(J, names: Names) -> str:
    return "".join(names.indep_name(i) * k for i, k in enumerate(J))


def _atom_base_name(atom, names: Names):
    """Plain name for atoms usable in function-derivative subscripts."""
    if isinstance(atom, IndepVar):
        return names.indep_name(atom.index)
    if isinstance(atom, JetVar) and atom.order == 0:
        return names.dep_name(atom.dep)
    if isinstance(atom, AuxJetVar) and atom.order == 0:
        return names.aux_name(atom.aux)
    return None


def render_linform(form: LinForm) -> str:
    parts = []
    for name, c in form.entries:
        body = name if abs(c) == 1 else f"{_frac(abs(c))}*{name}"
        parts.append((c < 0, body))
    if form.const != 0:
        parts.append((form.const < 0, _frac(abs(form.const))))
    out = ""
    for neg, body in parts:
        if not out:
            out = ("-" if neg else "") + body
        else:
            out += (" - " if neg else " + ") + body
    return out or "0"


def _frac(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def render_atom(atom, names=None) -> str:
    names = names or _DEFAULT_NAMES
    if isinstance(atom, IndepVar):
        return names.indep_name(atom.index)
    if isinstance(atom, JetVar):
        base = names.dep_name(atom.dep)
        return base if atom.order == 0 else f"{base}_{_subscript(atom.J, names)}"
    if isinstance(atom, AuxJetVar):
        base = names.aux_name(atom.aux)
        return base if atom.order == 0 else f"{base}_{_subscript(atom.J, names)}"
    if isinstance(atom, ConstSym):
        return atom.name
    if isinstance(atom, FuncAtom):
        if not any(atom.orders):
            return atom.name
        subs = []
        plain = True
        for arg, k in zip(atom.args, atom.orders):
            if not k:
                continue
            base = _atom_base_name(arg, names)
            if base is None:
                plain = False
                break
            subs.append(base * k)
        if plain:
            return f"{atom.name}_{''.join(subs)}"
        inner = ", ".join(
            ", ".join([render_atom(arg, names)] * k)
            for arg, k in zip(atom.args, atom.orders)
            if k
        )
        return f"D({atom.name}, {inner})"
    if isinstance(atom, PowAtom):
        from .expression import as_single_atom

        sole = as_single_atom(atom.base)
        base_s = render_atom(sole, names) if sole else f"({render_expr(atom.base, names)})"
        form = atom.form
        if len(form.entries) == 1 and form.const == 0 and form.entries[0][1] == 1:
            return f"{base_s}^{form.entries[0][0]}"
        return f"{base_s}^({render_linform(form)})"
    if isinstance(atom, ExpAtom):
        return f"exp({render_expr(atom.arg, names)})"
    raise TypeError(f"unknown atom {atom!r}")


def _render_factor(atom, exp: int, names) -> str:
    s = render_atom(atom, names)
    if exp == 1:
        return s
    if "^" in s:
        s = f"({s})"
    return f"{s}^{exp}"


def _render_term(mono, coeff: Fraction, names) -> str:
    factors = [_render_factor(a, e, names) for a, e in mono]
    if not factors:
        return _frac(coeff)
    if abs(coeff) != 1:
        factors.insert(0, _frac(abs(coeff)))
    return "*".join(factors)


def render_poly(p, names=None) -> str:
    names = names or _DEFAULT_NAMES
    if p.is_zero():
        return "0"
    out = ""
    for mono, c in p.terms:
        body = _render_term(mono, abs(c), names)
        if not out:
            out = ("-" if c < 0 else "") + body
        else:
            out += (" - " if c < 0 else " + ") + body
    return out


def render_expr(e, names=None) -> str:
    names = names or _DEFAULT_NAMES
    num_s = render_poly(e.num, names)
    if e.den.is_one():
        return num_s
    if len(e.num.terms) > 1:
        num_s = f"({num_s})"
    den = e.den
    if len(den.terms) == 1:
        mono, _c = den.terms[0]
        if len(mono) == 1:
            den_s = _render_factor(mono[0][0], mono[0][1], names)
            if "^" in render_atom(mono[0][0], names) and mono[0][1] == 1:
                den_s = f"({den_s})"
            return f"{num_s}/{den_s}"
        return f"{num_s}/({render_poly(den, names)})"
    from .gcd import perfect_power

    pp = perfect_power(den)
    if pp is not None:
        h, k = pp
        return f"{num_s}/({render_poly(h, names)})^{k}"
    return f"{num_s}/({render_poly(den, names)})"
