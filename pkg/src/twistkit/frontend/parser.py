"""Expression parsing against a declaration context.

Grammar (operator precedence, loosest first):

    expr    :=  term (('+' | '-') term)*
    term    :=  factor (('*' | '/') factor)*
    factor  :=  '-' factor | power
    power   :=  primary ('^' factor)?          # right associative
    primary :=  NUMBER | '(' expr ')' | 'exp' '(' expr ')'
             |  'D' '(' fname (',' var)+ ')' | name ['(' args ')']

Names carry optional primes (g', unary functions only) and subscripts
(u_xx, alpha_xt, lam_u); subscripts are split greedily over the declared
variable names, so multi-character names work.  An exponent must evaluate to
an integer or to a linear form in declared constants; anything else is
outside the expression fragment and rejected.
"""

from __future__ import annotations

import re
from fractions import Fraction

from ..core import Expr, LinForm, Names, exp_of, normalize, pow_of
from ..core.atoms import AuxJetVar, ConstSym, FuncAtom, IndepVar, JetVar, mi_zero
from ..errors import (
    ArityError,
    DuplicateDeclaration,
    ParseError,
    UnknownSymbol,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+)"
    r"|(?P<name>[A-Za-z][A-Za-z0-9]*(?P<primes>'*)(?:_(?P<sub>[A-Za-z0-9]+))?)"
    r"|(?P<op>\*|/|\+|-|\^|\(|\)|,|\[|\]|=)"
    r")"
)

_RESERVED = {"exp", "D"}


class Declarations:
    """Declared symbols of a problem: variables, constants, opaque functions."""

    def __init__(self, indep=(), dep=(), aux=(), constants=(), functions=None):
        self.indep = tuple(indep)
        self.dep = tuple(dep)
        self.aux = tuple(aux)
        self.constants = tuple(constants)
        self.functions = dict(functions or {})
        seen = set()
        for name in (*self.indep, *self.dep, *self.aux, *self.constants, *self.functions):
            if name in _RESERVED:
                raise DuplicateDeclaration(f"{name!r} is a reserved word")
            if name in seen:
                raise DuplicateDeclaration(f"symbol {name!r} declared twice")
            seen.add(name)
        for fname, args in self.functions.items():
            for arg in args:
                if self.variable_atom(arg) is None:
                    raise DuplicateDeclaration(
                        f"function {fname!r} argument {arg!r} is not a declared variable"
                    )

    def __eq__(self, other):
        return isinstance(other, Declarations) and (
            self.indep,
            self.dep,
            self.aux,
            self.constants,
            self.functions,
        ) == (other.indep, other.dep, other.aux, other.constants, other.functions)

    @property
    def p(self):
        return len(self.indep)

    @property
    def q(self):
        return len(self.dep)

    @property
    def r(self):
        return len(self.aux)

    def names(self) -> Names:
        return Names(self.indep, self.dep, self.aux)

    def variable_atom(self, name):
        """Order-0 atom for a declared variable name, else None."""
        if name in self.indep:
            return IndepVar(self.indep.index(name))
        if name in self.dep:
            return JetVar(self.dep.index(name), mi_zero(self.p))
        if name in self.aux:
            return AuxJetVar(self.aux.index(name), mi_zero(self.p))
        return None

    def split_subscript(self, sub: str, candidates):
        """Split a subscript string into declared names, longest match first."""
        ordered = sorted(candidates, key=len, reverse=True)

        def go(i):
            if i == len(sub):
                return []
            for nm in ordered:
                if sub.startswith(nm, i):
                    rest = go(i + len(nm))
                    if rest is not None:
                        return [nm] + rest
            return None

        return go(0)


def tokenize(src: str, line_offset: int = 1):
    tokens = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m or m.end() == pos:
            stripped = src[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(
                f"unexpected character {stripped[0]!r}", line_offset, pos + 1
            )
        pos = m.end()
        col = m.start() + 1
        if m.group("num"):
            tokens.append(("num", int(m.group("num")), col))
        elif m.group("name"):
            full = m.group("name")
            primes = m.group("primes") or ""
            sub = m.group("sub")
            base = full.split("'")[0].split("_")[0]
            tokens.append(("name", (base, len(primes), sub), col))
        else:
            tokens.append(("op", m.group("op"), col))
    tokens.append(("end", None, len(src) + 1))
    return tokens


class ExpressionParser:
    def __init__(self, decls: Declarations, src: str, line: int | None = None):
        self.decls = decls
        self.src = src
        self.line = line
        self.tokens = tokenize(src, line or 1)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def next(self):
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def expect_op(self, op):
        kind, val, col = self.next()
        if kind != "op" or val != op:
            raise ParseError(f"expected {op!r}", self.line, col)

    def fail(self, msg, col):
        raise ParseError(msg, self.line, col)

    # -- grammar -------------------------------------------------------------

    def parse(self) -> Expr:
        e = self.parse_expr()
        kind, val, col = self.peek()
        if kind != "end":
            self.fail(f"unexpected trailing input {val!r}", col)
        return e

    def parse_expr(self) -> Expr:
        e = self.parse_term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("+", "-"):
                self.next()
                rhs = self.parse_term()
                e = e + rhs if val == "+" else e - rhs
            else:
                return e

    def parse_term(self) -> Expr:
        e = self.parse_factor()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in ("*", "/"):
                self.next()
                rhs = self.parse_factor()
                e = e * rhs if val == "*" else e / rhs
            else:
                return e

    def parse_factor(self) -> Expr:
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.next()
            return -self.parse_factor()
        return self.parse_power()

    def parse_power(self) -> Expr:
        base = self.parse_primary()
        kind, val, col = self.peek()
        if kind == "op" and val == "^":
            self.next()
            expo = self.parse_factor()
            return self.apply_power(base, expo, col)
        return base

    def apply_power(self, base: Expr, expo: Expr, col) -> Expr:
        if expo.is_rational():
            v = expo.rational_value()
            if v.denominator == 1:
                return base ** int(v)
            return pow_of(base, LinForm((), v))
        form = self.as_linform(expo, col)
        return pow_of(base, form)

    def as_linform(self, e: Expr, col) -> LinForm:
        if not e.den.is_one():
            self.fail("exponent must be a linear form in declared constants", col)
        entries = {}
        const = Fraction(0)
        for mono, c in e.num.terms:
            if mono == ():
                const += c
            elif len(mono) == 1 and mono[0][1] == 1 and isinstance(mono[0][0], ConstSym):
                entries[mono[0][0].name] = entries.get(mono[0][0].name, Fraction(0)) + c
            else:
                self.fail("exponent must be a linear form in declared constants", col)
        return LinForm(entries.items(), const)

    def parse_primary(self) -> Expr:
        kind, val, col = self.next()
        if kind == "num":
            return Expr.const(val)
        if kind == "op" and val == "(":
            e = self.parse_expr()
            self.expect_op(")")
            return e
        if kind == "name":
            return self.resolve_name(val, col)
        self.fail(f"unexpected token {val!r}", col)

    def parse_call_args(self):
        self.expect_op("(")
        args = [self.parse_expr()]
        while True:
            kind, val, col = self.peek()
            if kind == "op" and val == ",":
                self.next()
                args.append(self.parse_expr())
            else:
                break
        self.expect_op(")")
        return args

    def resolve_name(self, triple, col) -> Expr:
        base, primes, sub = triple
        decls = self.decls
        if base == "exp":
            if primes or sub:
                self.fail("exp takes no primes or subscripts", col)
            args = self.parse_call_args()
            if len(args) != 1:
                raise ArityError("exp takes one argument", self.line, col)
            return exp_of(args[0])
        if base == "D":
            return self.resolve_functional_derivative(col)
        if base in decls.indep:
            if primes or sub:
                self.fail(f"independent variable {base!r} takes no derivatives here", col)
            return Expr.atom(IndepVar(decls.indep.index(base)))
        if base in decls.dep or base in decls.aux:
            if primes:
                self.fail(f"use subscripts for jet derivatives of {base!r}", col)
            J = [0] * decls.p
            if sub:
                parts = decls.split_subscript(sub, decls.indep)
                if parts is None:
                    self.fail(
                        f"cannot read subscript {sub!r} as independent variables", col
                    )
                for nm in parts:
                    J[decls.indep.index(nm)] += 1
            if base in decls.dep:
                return Expr.atom(JetVar(decls.dep.index(base), tuple(J)))
            return Expr.atom(AuxJetVar(decls.aux.index(base), tuple(J)))
        if base in decls.constants:
            if primes or sub:
                self.fail(f"constant {base!r} takes no derivatives", col)
            return Expr.atom(ConstSym(base))
        if base in decls.functions:
            return self.resolve_function(base, primes, sub, col)
        raise UnknownSymbol(base, self.line, col)

    def resolve_function(self, base, primes, sub, col) -> Expr:
        decls = self.decls
        argnames = decls.functions[base]
        orders = [0] * len(argnames)
        if primes and sub:
            self.fail("mix of primes and subscripts on a function", col)
        if primes:
            if len(argnames) != 1:
                raise ArityError(
                    f"primes require a unary function, {base!r} has {len(argnames)} arguments",
                    self.line,
                    col,
                )
            orders[0] = primes
        if sub:
            parts = decls.split_subscript(sub, argnames)
            if parts is None:
                self.fail(
                    f"subscript {sub!r} does not name arguments of {base!r}", col
                )
            for nm in parts:
                orders[argnames.index(nm)] += 1
        kind, val, _ = self.peek()
        if kind == "op" and val == "(":
            args = self.parse_call_args()
            if len(args) != len(argnames):
                raise ArityError(
                    f"{base!r} expects {len(argnames)} arguments, got {len(args)}",
                    self.line,
                    col,
                )
            for given, declared in zip(args, argnames):
                want = Expr.atom(decls.variable_atom(declared))
                if given != want:
                    raise ArityError(
                        f"{base!r} must be applied to its declared arguments "
                        f"({', '.join(argnames)})",
                        self.line,
                        col,
                    )
        atoms = [decls.variable_atom(nm) for nm in argnames]
        return Expr.atom(FuncAtom(base, atoms, tuple(orders)))

    def resolve_functional_derivative(self, col) -> Expr:
        decls = self.decls
        self.expect_op("(")
        kind, val, c2 = self.next()
        if kind != "name" or val[1] or val[2]:
            self.fail("D(...) expects a plain function name first", c2)
        fname = val[0]
        if fname not in decls.functions:
            raise UnknownSymbol(fname, self.line, c2)
        argnames = decls.functions[fname]
        orders = [0] * len(argnames)
        while True:
            kind, val, c3 = self.next()
            if kind == "op" and val == ")":
                break
            if not (kind == "op" and val == ","):
                self.fail("expected ',' or ')' in D(...)", c3)
            kind, val, c4 = self.next()
            if kind != "name" or val[1] or val[2]:
                self.fail("D(...) expects declared argument names", c4)
            if val[0] not in argnames:
                raise ArityError(
                    f"{val[0]!r} is not an argument of {fname!r}", self.line, c4
                )
            orders[argnames.index(val[0])] += 1
        atoms = [decls.variable_atom(nm) for nm in argnames]
        return Expr.atom(FuncAtom(fname, atoms, tuple(orders)))


def parse_expression(src: str, decls: Declarations, line: int | None = None) -> Expr:
    """Parse a single expression in the declaration context."""
    return ExpressionParser(decls, src, line).parse()
