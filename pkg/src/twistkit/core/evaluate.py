"""Exact rational evaluation of expressions at sample points.

Transcendental atoms (exponentials, symbolic powers, opaque-function
derivatives) are assigned values as independent unknowns: an assignment keys
whole atoms, and evaluation never descends into their arguments.  This is the
brute-force oracle backing derived test values and the probabilistic
confirmation of zero verdicts.
"""

from __future__ import annotations

import random
from fractions import Fraction

from ..errors import PoleAtAllSamples, TwistkitError
from .expression import Expr, iter_atoms, normalize
from .polynomial import Poly

SAMPLE_BOUND = 10**4


class _Pole(Exception):
    pass


def _eval_poly(p: Poly, assignment) -> Fraction:
    total = Fraction(0)
    for mono, c in p.terms:
        v = Fraction(c)
        for a, e in mono:
            try:
                v *= assignment[a] ** e
            except KeyError:
                raise TwistkitError(f"assignment does not cover atom {a!r}") from None
        total += v
    return total


def eval_at(e: Expr, assignment) -> Fraction:
    """Exact value of e at the assignment; raises _Pole on zero denominator."""
    den = _eval_poly(e.den, assignment)
    if den == 0:
        raise _Pole()
    return _eval_poly(e.num, assignment) / den


def sample_atoms(e: Expr):
    """Atoms requiring values: the shallow generators of num and den."""
    return sorted(iter_atoms(e, deep=False), key=lambda a: a.key)


def sample_assignment(atoms, rng: random.Random):
    return {
        a: Fraction(rng.randint(-SAMPLE_BOUND, SAMPLE_BOUND), rng.randint(1, SAMPLE_BOUND))
        for a in atoms
    }


def random_eval(e, assignment=None, retries: int = 8, seed: int = 0, rng=None) -> Fraction:
    """Evaluate at the given assignment, resampling on poles up to `retries` times."""
    e = normalize(e)
    if rng is None:
        rng = random.Random(seed)
    atoms = sample_atoms(e)
    if assignment is None:
        assignment = sample_assignment(atoms, rng)
    tries = 1 + max(0, retries)
    for _ in range(tries):
        try:
            return eval_at(e, assignment)
        except _Pole:
            assignment = sample_assignment(atoms, rng)
    raise PoleAtAllSamples(f"denominator vanished at all {tries} sample points")


def zero_oracle(e, seed: int = 0, points: int = 30) -> bool:
    """True iff e evaluates to 0 at `points` random assignments."""
    e = normalize(e)
    if e.is_zero():
        return True
    rng = random.Random(seed)
    for _ in range(points):
        if random_eval(e, retries=8, rng=rng) != 0:
            return False
    return True


def agree_oracle(a, b, seed: int = 0, points: int = 20) -> bool:
    """Independent check that two expressions agree at random rational points."""
    a = normalize(a)
    b = normalize(b)
    rng = random.Random(seed)
    atoms = sorted(
        set(iter_atoms(a, deep=False)) | set(iter_atoms(b, deep=False)),
        key=lambda at: at.key,
    )
    done = 0
    attempts = 0
    while done < points:
        attempts += 1
        if attempts > 20 * points:
            raise PoleAtAllSamples("could not find enough pole-free sample points")
        assignment = sample_assignment(atoms, rng)
        try:
            va = eval_at(a, assignment)
            vb = eval_at(b, assignment)
        except _Pole:
            continue
        if va != vb:
            return False
        done += 1
    return True
