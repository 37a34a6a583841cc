"""Gauge transformations of vertical fields on jet bundles.

A gauge map is a pointwise invertible matrix R(x, u) acting blockwise on
every derivative level.  Twisting a prolongation by the horizontal one-form
Lambda_i = R D_i(R^{-1}) makes the square

        X  --gauge-->  W
        |               |
   classical        mu-twisted
        |               |
        Y  --gauge-->  Z

commute, which check_gauge_diagram verifies coefficient by coefficient.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import Expr, iter_atoms, max_jet_order, normalize
from .core.atoms import AuxJetVar, IndepVar, JetVar
from .errors import NotVertical, TwistkitError
from .forms import MatrixOneForm
from .jets import JetSpace, ProlongedField, VectorField, prolong_mu, prolong_standard
from .linalg import identity, mat_eq, mat_mul, mat_vec, matrix_inverse


class GaugeMap:
    """Invertible q x q matrix over (x, u) with a verified cached inverse."""

    def __init__(self, space: JetSpace, R):
        self.space = space
        self.R = [[normalize(v) for v in row] for row in R]
        if len(self.R) != space.q or any(len(row) != space.q for row in self.R):
            raise TwistkitError("gauge matrix must be q x q")
        for row in self.R:
            for v in row:
                if max_jet_order(v) > 0 or any(
                    isinstance(a, AuxJetVar) for a in iter_atoms(v)
                ):
                    raise TwistkitError("gauge entries must depend on (x, u) only")
        self.Rinv = matrix_inverse(self.R)
        if not mat_eq(mat_mul(self.R, self.Rinv), identity(space.q)):
            raise TwistkitError("inverse verification failed")

    def inverse_map(self) -> "GaugeMap":
        return GaugeMap(self.space, self.Rinv)


def mu_from_gauge(g: GaugeMap, space: JetSpace | None = None) -> MatrixOneForm:
    """Lambda_i = R (D_i R^{-1}); equal to -(D_i R) R^{-1}, which is asserted."""
    space = space or g.space
    mats = []
    for i in range(space.p):
        D = space.D(i)
        dRinv = [[D(v) for v in row] for row in g.Rinv]
        dR = [[D(v) for v in row] for row in g.R]
        lam = mat_mul(g.R, dRinv)
        alt = [[-v for v in row] for row in mat_mul(dR, g.Rinv)]
        if not mat_eq(lam, alt):
            raise TwistkitError("gauge one-form sign identity failed")
        mats.append(lam)
    return MatrixOneForm(space, mats)


def apply_gauge(g: GaugeMap, V):
    """Blockwise action psi_J -> R psi_J on a vertical field."""
    if isinstance(V, VectorField):
        if not V.is_vertical():
            raise NotVertical("gauge action is defined for vertical fields")
        return VectorField(
            V.space,
            phi=mat_vec(g.R, list(V.phi)),
            eta=list(V.eta),
            semiclassical=V.semiclassical,
        )
    if isinstance(V, ProlongedField):
        if any(not v.is_zero() for v in V.xi):
            raise NotVertical("gauge action is defined for vertical fields")
        levels = {}
        for (a, J), v in V.psi.items():
            levels.setdefault(J, {})[a] = v
        psi = {}
        from .core import ZERO

        for J, comps in levels.items():
            vec = [comps.get(a, ZERO) for a in range(V.space.q)]
            out = mat_vec(g.R, vec)
            for a in range(V.space.q):
                psi[(a, J)] = out[a]
        return ProlongedField(V.space, V.order, V.xi, psi, V.chi)
    raise TwistkitError("apply_gauge expects a vector field or a prolonged field")


@dataclass
class GaugeDiagramReport:
    passed: bool
    mu: MatrixOneForm
    mismatches: list


def check_gauge_diagram(g: GaugeMap, X: VectorField, n: int) -> GaugeDiagramReport:
    """Compare Pr_mu(gauge(X)) against gauge(Pr_0(X)) with mu from the gauge map."""
    if not X.is_vertical():
        raise NotVertical("the diagram is stated for vertical fields")
    space = g.space
    mu = mu_from_gauge(g, space)
    W = apply_gauge(g, X)
    path1 = prolong_mu(W, mu, n, space, enforce_mch=False)
    path2 = apply_gauge(g, prolong_standard(X, n, space))
    mismatches = []
    for key in path1.psi:
        diff = path1.psi[key] - path2.psi.get(key)
        if not diff.is_zero():
            mismatches.append((key, diff))
    return GaugeDiagramReport(passed=not mismatches, mu=mu, mismatches=mismatches)
