import random
from fractions import Fraction

import pytest

from twistkit.core import Expr, Names, ONE, ZERO, exp_of, normalize, pow_of
from twistkit.core.atoms import (
    AuxJetVar,
    ConstSym,
    IndepVar,
    JetVar,
    LinForm,
    mi_zero,
)
from twistkit.jets import JetSpace, multiindices


class ExprGen:
    """Deterministic random expression factory over a jet space."""

    def __init__(self, rng: random.Random, space: JetSpace, max_order: int = 1,
                 constants=(), use_aux=False):
        self.rng = rng
        self.space = space
        self.pool = [IndepVar(i) for i in range(space.p)]
        for k in range(max_order + 1):
            for J in multiindices(space.p, k):
                for a in range(space.q):
                    self.pool.append(JetVar(a, J))
                if use_aux:
                    for b in range(space.r):
                        self.pool.append(AuxJetVar(b, J))
        self.pool.extend(ConstSym(c) for c in constants)

    def coeff(self) -> Fraction:
        c = 0
        while c == 0:
            c = self.rng.randint(-5, 5)
        return Fraction(c, self.rng.randint(1, 3))

    def monomial(self, deg: int) -> Expr:
        e = Expr.const(self.coeff())
        for _ in range(self.rng.randint(0, deg)):
            e = e * Expr.atom(self.rng.choice(self.pool))
        return e

    def poly(self, terms: int = 3, deg: int = 2) -> Expr:
        e = ZERO
        for _ in range(self.rng.randint(1, terms)):
            e = e + self.monomial(deg)
        if e.is_zero():
            e = Expr.const(self.coeff())
        return e

    def nonzero_poly(self, terms: int = 2, deg: int = 1) -> Expr:
        while True:
            e = self.poly(terms, deg)
            if not e.is_zero():
                return e

    def rational(self, terms: int = 3, deg: int = 2) -> Expr:
        num = self.poly(terms, deg)
        if self.rng.random() < 0.4:
            return num / self.nonzero_poly()
        return num

    def expr(self, allow_exp=False, allow_pow=False, const_name="m") -> Expr:
        e = self.rational()
        if allow_exp and self.rng.random() < 0.5:
            e = e + exp_of(self.poly(2, 1)) * self.monomial(1)
        if allow_pow and self.rng.random() < 0.5:
            base = Expr.atom(JetVar(0, mi_zero(self.space.p)))
            e = e + pow_of(base, LinForm.of(const_name)) * self.monomial(1)
        return e


@pytest.fixture
def ode_space():
    return JetSpace(p=1, q=1, r=0, n=3, names=Names(("x",), ("u",)))


@pytest.fixture
def pde_space():
    return JetSpace(p=2, q=1, r=0, n=2, names=Names(("x", "t"), ("u",)))


@pytest.fixture
def aug_space():
    return JetSpace(p=1, q=1, r=1, n=2, names=Names(("x",), ("u",), ("w",)))


def make_gen(seed, space, **kw) -> ExprGen:
    return ExprGen(random.Random(seed), space, **kw)
