"""Almost Hermitian structures and the four-part splitting of ``nabla Omega``.

Conventions used throughout:

* ``J`` is stored as a matrix ``J[i, j] = J^i_j`` acting on column vectors.
* The fundamental form is ``Omega(X, Y) = h(JX, Y)``, so
  ``Omega_ij = J^k_i h_kj`` and ``J = -h^{-1} Omega``.
* ``A[x, y, z] = (nabla_x Omega)(y, z)``; the derivative index comes first.
* The Lee form is ``theta = (Omega -| dOmega) / (2(m-1))`` in real dimension
  ``2m``.  With this choice ``theta = df`` for ``e^{2f}`` times a Kaehler
  metric, and a conformal change by ``f`` shifts ``theta`` by ``df``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import jets
from .errors import GeometryError, StructureError
from .metric_builders import conformal_rescale, scale_metric
from .tensor_core import (
    MetricField,
    ScalarField,
    _gamma_from_jet,
    covariant_derivative_jet,
    d_jet,
    inner,
    metric_contraction,
    metric_norm_sq,
)

CLASSES = ("W1", "W2", "W3", "W4")


class AlmostHermitianField:
    """A chart metric together with a compatible almost complex structure."""

    def __init__(self, metric: MetricField, J: Callable, name="", tol=1e-9):
        self.metric = metric
        self.J = J
        self.name = name or f"ah({metric.name})"
        self.tol = tol

    @property
    def dim(self):
        return self.metric.dim

    def J_jet(self, p, order=2):
        out = self.J(jets.seed(np.asarray(p, dtype=float), order))
        if not isinstance(out, jets.Jet2):
            out = jets.constant(out, self.dim, order)
        return out

    def invariant_residuals(self, p):
        """``(|J^2 + 1|, |J^T h J - h|)`` at ``p`` (max abs entries)."""
        J = self.J_jet(p, order=1).value
        h = self.metric.value(p)
        r1 = float(np.max(np.abs(J @ J + np.eye(self.dim))))
        r2 = float(np.max(np.abs(J.T @ h @ J - h)))
        return r1, r2

    def check(self, p):
        r1, r2 = self.invariant_residuals(p)
        if r1 > self.tol:
            raise StructureError(f"{self.name}: J^2 + Id = {r1:.3g} at {np.asarray(p)}")
        if r2 > self.tol:
            raise StructureError(f"{self.name}: h(J., J.) != h by {r2:.3g} at {np.asarray(p)}")


@dataclass
class GHComponents:
    w1_norm: float
    w2_norm: float
    w3_norm: float
    w4_norm: float
    lee: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    nabla_norm_sq: float
    dlee_norm: float
    nabla_lee_norm: float
    nk_residual: float

    @property
    def norms(self):
        return (self.w1_norm, self.w2_norm, self.w3_norm, self.w4_norm)

    @property
    def orthogonality_residual(self):
        return abs(self.nabla_norm_sq - sum(w * w for w in self.norms))


def _require_dim(d):
    if d < 6 or d % 2:
        raise GeometryError(f"dimension ≥ 6 required (even), got {d}")


def _omega_jet(Jt, G):
    return jets.einsum("ki,kj->ij", Jt, G)


def fundamental_form(s: AlmostHermitianField, p) -> np.ndarray:
    s.check(p)
    return jets.value_of(_omega_jet(s.J_jet(p, order=1), s.metric.jet(p, order=1)))


def lee_coefficient(d):
    return 1.0 / (d - 2)


def _cyclic(A):
    return A + np.einsum("yzx->xyz", A) + np.einsum("zxy->xyz", A)


def w4_injection(theta, Omega, g, ginv):
    """The ``nabla Omega``-type tensor carried by a 1-form ``theta``."""
    tsharp = ginv @ theta
    om_t = tsharp @ Omega  # om_t[z] = Omega(theta#, z)
    return (
        np.einsum("z,xy->xyz", theta, Omega)
        - np.einsum("y,xz->xyz", theta, Omega)
        + np.einsum("xy,z->xyz", g, om_t)
        - np.einsum("xz,y->xyz", g, om_t)
    )


def _type30(psi, J):
    """Projection of a 3-form onto its ``(3,0)+(0,3)`` part."""
    a = np.einsum("ay,bz,xab->xyz", J, J, psi)
    b = np.einsum("ax,bz,ayb->xyz", J, J, psi)
    c = np.einsum("ax,by,abz->xyz", J, J, psi)
    return 0.25 * (psi - a - b - c)


@dataclass
class _Local:
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray
    J: np.ndarray
    Omega: np.ndarray
    A: np.ndarray
    DJ: np.ndarray
    lee: jets.Jet2


def _local(s: AlmostHermitianField, p) -> _Local:
    s.check(p)
    d = s.dim
    G = s.metric.jet(p)
    Jt = s.J_jet(p)
    g, ginv, _, gamma = _gamma_from_jet(G)
    Om = _omega_jet(Jt, G)
    Om1 = jets.truncate(Om)
    dOm = d_jet(Om, 2)
    Ginv = jets.truncate(jets.inv(G))
    lee = lee_coefficient(d) * metric_contraction(Om1, dOm, Ginv)
    A = covariant_derivative_jet(Om1, gamma)
    DJ = covariant_derivative_jet(jets.truncate(Jt), gamma, upper=1)
    return _Local(g, ginv, gamma, Jt.value, Om.value, A, DJ, lee)


def _nijenhuis(loc: _Local):
    J, DJ = loc.J, loc.DJ  # DJ[c, i, j] = (nabla_c J)^i_j
    N = (
        np.einsum("ca,cib->iab", J, DJ)
        - np.einsum("cb,cia->iab", J, DJ)
        - np.einsum("ik,akb->iab", J, DJ)
        + np.einsum("ik,bka->iab", J, DJ)
    )
    low = np.einsum("zi,iab->abz", loc.g, N)
    n1 = (low + np.einsum("bza->abz", low) + np.einsum("zab->abz", low)) / 3.0
    return n1, low - n1


def nijenhuis_split(s: AlmostHermitianField, p):
    """Lowered Nijenhuis tensor ``N(X,Y,Z) = h(N(X,Y), Z)`` split as ``(n1, n2)``."""
    return _nijenhuis(_local(s, p))


def gh_decompose(s: AlmostHermitianField, p) -> GHComponents:
    _require_dim(s.dim)
    loc = _local(s, p)
    A, J, ginv = loc.A, loc.J, loc.ginv
    TA = np.einsum("ax,by,abz->xyz", J, J, A)
    p12 = 0.5 * (A - TA)
    p34 = 0.5 * (A + TA)
    a1 = _type30(_cyclic(A), J) / 3.0
    a2 = p12 - a1
    theta = loc.lee.value
    a4 = w4_injection(theta, loc.Omega, loc.g, ginv)
    a3 = p34 - a4
    n1, n2 = _nijenhuis(loc)
    dlee = d_jet(loc.lee, 1)
    nabla_lee = covariant_derivative_jet(loc.lee, loc.gamma)
    sym = A + np.einsum("yxz->xyz", A)
    w = [math.sqrt(max(metric_norm_sq(a, ginv), 0.0)) for a in (a1, a2, a3, a4)]
    return GHComponents(
        *w,
        lee=theta,
        n1=n1,
        n2=n2,
        nabla_norm_sq=metric_norm_sq(A, ginv),
        dlee_norm=math.sqrt(max(inner(dlee, dlee, ginv), 0.0)),
        nabla_lee_norm=math.sqrt(max(metric_norm_sq(nabla_lee, ginv), 0.0)),
        nk_residual=math.sqrt(max(metric_norm_sq(sym, ginv), 0.0)),
    )


def classify_type(s: AlmostHermitianField, points, tol=1e-6):
    """Sorted tuple of the classes whose component norm exceeds ``tol`` somewhere."""
    points = list(points)
    if len(points) < 10:
        raise ValueError("classify_type needs at least 10 sample points")
    worst = np.zeros(4)
    for p in points:
        worst = np.maximum(worst, gh_decompose(s, p).norms)
    return tuple(c for c, w in zip(CLASSES, worst) if w > tol)


def component_maxima(s: AlmostHermitianField, points) -> dict:
    """Max over points of each component norm and of the derived residuals."""
    keys = ("w1", "w2", "w3", "w4", "orthogonality", "dlee", "nabla_lee", "n2", "nk")
    out = dict.fromkeys(keys, 0.0)
    for p in points:
        c = gh_decompose(s, p)
        vals = (*c.norms, c.orthogonality_residual, c.dlee_norm, c.nabla_lee_norm,
                float(np.max(np.abs(c.n2))), c.nk_residual)
        for k, v in zip(keys, vals):
            out[k] = max(out[k], float(v))
    return out


def conformal_transform(s: AlmostHermitianField, f: ScalarField) -> AlmostHermitianField:
    """``(e^{2f} h, J)``."""
    return AlmostHermitianField(conformal_rescale(s.metric, f), s.J, name=f"e2f({s.name})", tol=s.tol)


def homothety(s: AlmostHermitianField, c) -> AlmostHermitianField:
    return AlmostHermitianField(scale_metric(s.metric, c), s.J, name=f"{c}*{s.name}", tol=s.tol)


def lee_form(s: AlmostHermitianField, p) -> np.ndarray:
    _require_dim(s.dim)
    return np.array(_local(s, p).lee.value)


def lee_form_closedness(s: AlmostHermitianField, points) -> float:
    """Max over points of ``|d theta|`` (form norm)."""
    _require_dim(s.dim)
    worst = 0.0
    for p in points:
        loc = _local(s, p)
        dlee = d_jet(loc.lee, 1)
        worst = max(worst, math.sqrt(max(inner(dlee, dlee, loc.ginv), 0.0)))
    return worst


def lee_parallel_residual(s: AlmostHermitianField, points) -> float:
    """Max over points of ``|nabla theta|``."""
    _require_dim(s.dim)
    worst = 0.0
    for p in points:
        loc = _local(s, p)
        nl = covariant_derivative_jet(loc.lee, loc.gamma)
        worst = max(worst, math.sqrt(max(metric_norm_sq(nl, loc.ginv), 0.0)))
    return worst


def structure_from_form(g: MetricField, omega: Callable, name="") -> AlmostHermitianField:
    """Almost Hermitian structure ``J = -h^{-1} Omega`` from a chart 2-form."""

    def J(x):
        return -jets.einsum("...ik,...kj->...ij", jets.inv(g(x)), omega(x))

    return AlmostHermitianField(g, J, name=name or f"J({g.name})")
