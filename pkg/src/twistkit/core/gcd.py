"""Exact multivariate GCD via the subresultant polynomial remainder sequence.

Atoms are treated as free commuting generators.  Sizes here are desk scale,
so the classic primitive-PRS-with-subresultant-factors algorithm is fast
enough; cheap fast paths (monomial contents, disjoint supports, trial exact
division) catch the overwhelmingly common cases first.
"""

from __future__ import annotations

from fractions import Fraction

from .polynomial import (
    MONO_ONE,
    P_ONE,
    P_ZERO,
    Poly,
    content_mono,
    exact_div,
    mono_div,
    mono_gcd,
)


def monic(p: Poly) -> Poly:
    if p.is_zero():
        return p
    lc = p.leading()[1]
    return p if lc == 1 else p.scale(1 / lc)


def _strip_mono(p: Poly, m) -> Poly:
    if not m:
        return p
    return Poly(((mono_div(mm, m), c) for mm, c in p.terms))


def poly_gcd(f: Poly, g: Poly) -> Poly:
    """Monic gcd of f and g over the rationals."""
    if f.is_zero():
        return monic(g)
    if g.is_zero():
        return monic(f)
    mf, mg = content_mono(f), content_mono(g)
    mc = mono_gcd(mf, mg)
    f1 = _strip_mono(f, mf)
    g1 = _strip_mono(g, mg)
    core = _gcd_core(f1, g1)
    return monic(core.mul_mono(mc))


def _gcd_core(f: Poly, g: Poly) -> Poly:
    if f.is_constant() or g.is_constant():
        return P_ONE
    common = set(a.key for a in f.atoms()) & set(a.key for a in g.atoms())
    if not common:
        return P_ONE
    if f == g:
        return f
    # trial divisions settle most real cancellations immediately
    if exact_div(f, g) is not None:
        return g
    if exact_div(g, f) is not None:
        return f
    x = max(
        (a for a in f.atoms() if a.key in common),
        key=lambda a: a.key,
    )
    fu = _to_univ(f, x)
    gu = _to_univ(g, x)
    cf = _coeff_content(fu)
    cg = _coeff_content(gu)
    fp = [_exact(c, cf) for c in fu]
    gp = [_exact(c, cg) for c in gu]
    cont = poly_gcd(cf, cg)
    if len(fp) < len(gp):
        fp, gp = gp, fp
    last = _subresultant_prs(fp, gp)
    if len(last) == 1:
        pp = P_ONE
    else:
        cl = _coeff_content(last)
        pp = _from_univ([_exact(c, cl) for c in last], x)
    cand = cont * pp
    if exact_div(f, cand) is None or exact_div(g, cand) is None:
        raise AssertionError("subresultant gcd produced a non-divisor")
    return cand


# -- univariate-over-ring helpers -------------------------------------------


def _to_univ(p: Poly, x):
    deg = p.degree_in(x)
    buckets = [dict() for _ in range(deg + 1)]
    for m, c in p.terms:
        e = 0
        rest = []
        for a, k in m:
            if a == x:
                e = k
            else:
                rest.append((a, k))
        key = tuple(rest)
        b = buckets[e]
        b[key] = b.get(key, Fraction(0)) + c
    return [Poly(b.items()) for b in buckets]


def _from_univ(coeffs, x) -> Poly:
    out = P_ZERO
    for e, ce in enumerate(coeffs):
        if ce.is_zero():
            continue
        out = out + ce.mul_mono(((x, e),) if e else MONO_ONE)
    return out


def _coeff_content(coeffs) -> Poly:
    acc = P_ZERO
    for c in coeffs:
        if not c.is_zero():
            acc = poly_gcd(acc, c)
            if acc.is_one():
                break
    return acc if not acc.is_zero() else P_ONE


def _exact(f: Poly, g: Poly) -> Poly:
    q = exact_div(f, g)
    if q is None:
        raise AssertionError("expected exact division during gcd")
    return q


def _uv_strip(A):
    while A and A[-1].is_zero():
        A.pop()
    return A


def _uv_scale(A, s: Poly):
    return [c * s for c in A]


def _uv_sub(A, B):
    n = max(len(A), len(B))
    out = []
    for i in range(n):
        a = A[i] if i < len(A) else P_ZERO
        b = B[i] if i < len(B) else P_ZERO
        out.append(a - b)
    return _uv_strip(out)


def _uv_prem(A, B):
    """Pseudo remainder: lc(B)^(deg A - deg B + 1) * A mod B."""
    dB = len(B) - 1
    lb = B[-1]
    R = list(A)
    steps = len(A) - len(B) + 1
    while R and len(R) - 1 >= dB:
        lr = R[-1]
        shift = len(R) - 1 - dB
        RB = [P_ZERO] * shift + _uv_scale(B, lr)
        R = _uv_sub(_uv_scale(R, lb), RB)
        steps -= 1
    for _ in range(steps):
        R = _uv_scale(R, lb)
    return R


def _subresultant_prs(A, B):
    """Last nonzero element of the subresultant PRS of primitive A, B."""
    g = P_ONE
    h = P_ONE
    while True:
        delta = len(A) - len(B)
        R = _uv_prem(A, B)
        if not R:
            return B
        if len(R) == 1:
            return R
        divisor = g * h.pow(delta)
        A, B = B, [_exact(c, divisor) for c in R]
        g = A[-1]
        if delta == 0:
            pass
        elif delta == 1:
            h = g
        else:
            h = _exact(g.pow(delta), h.pow(delta - 1))


# -- perfect powers (display sugar for squared denominators etc.) -----------


def _partial(p: Poly, x) -> Poly:
    terms = []
    for m, c in p.terms:
        for i, (a, e) in enumerate(m):
            if a == x:
                rest = m[:i] + ((a, e - 1),) + m[i + 1:] if e > 1 else m[:i] + m[i + 1:]
                terms.append((rest, c * e))
                break
    return Poly(terms)


def perfect_power(p: Poly):
    """Return (h, k) with p = h^k for maximal k >= 2, else None."""
    if p.is_constant():
        return None
    x = next(iter(p.atoms()))
    for a in p.atoms():
        if p.degree_in(a) >= 2:
            x = a
            break
    else:
        return None
    g = poly_gcd(p, _partial(p, x))
    if g.is_constant():
        return None
    h = exact_div(p, g)
    if h is None or h.is_constant():
        return None
    k = 0
    rest = p
    while True:
        q = exact_div(rest, h)
        if q is None:
            break
        k += 1
        rest = q
    if k >= 2 and rest.is_constant():
        if rest.constant_value() == 1 and h.pow(k) == p:
            return h, k
    return None
