"""Conformally Einstein cylinders ``e^{2f}(g + dt^2)`` over a base ``(M^n, g)``.

Dimension bookkeeping: ``n`` is always the dimension of the base ``M``; the
cylinder has dimension ``n + 1``.  The general conformal Ricci formula in
dimension ``D`` carries the coefficient ``D - 2``, which is ``n - 1`` on the
cylinder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import jets
from .metric_builders import QuadratureResult, chart_quadrature
from .tensor_core import (
    MetricField,
    ScalarField,
    _gamma_from_jet,
    _hessian_from,
    curvature,
    curvature_from_jet,
    metric_norm_sq,
    operator_norm,
)


@dataclass
class EinsteinReport:
    lambda_fit: float
    max_residual: float
    samples: int
    tolerance: float
    verdict: bool


@dataclass
class SplitConformalFactor:
    """``e^{-f(x,t)} = a(t) + b(x)``.

    ``a`` maps a one-dimensional jet to a jet; ``da`` (optional) is its
    derivative, used for the third derivative of ``a``.
    """

    a: Callable
    b: ScalarField
    delta: Optional[float] = None
    eps: Optional[float] = None
    eps_prime: Optional[float] = None
    da: Optional[Callable] = None

    def a_jet(self, t):
        out = self.a(jets.seed([t])[..., 0])
        if not isinstance(out, jets.Jet2):
            out = jets.constant(out, 1)
        return float(out.value), float(out.grad[0]), float(out.hess[0, 0])

    def a3(self, t, h=1e-3):
        if self.da is not None:
            out = self.da(jets.seed([t])[..., 0])
            return float(out.hess[0, 0])
        # central difference of the exact second derivative
        return (self.a_jet(t + h)[2] - self.a_jet(t - h)[2]) / (2 * h)

    def f(self) -> ScalarField:
        """``f = -ln(a(t) + b(x))`` on the cylinder chart ``(x, t)``."""
        n = self.b.dim
        a, b = self.a, self.b

        def fn(x):
            return -jets.log(a(x[..., n]) + b(x[..., :n]))

        return ScalarField(n + 1, fn, name="split_f")

    def shifted(self, c) -> "SplitConformalFactor":
        """``(a + c, b - c)``, which leaves ``f`` unchanged."""
        a, b = self.a, self.b
        da = self.da
        nb = ScalarField(b.dim, lambda x: b(x) - c, name=f"{b.name}-{c}")
        return SplitConformalFactor(
            lambda t: a(t) + c, nb, self.delta,
            None if self.eps is None else self.eps + (self.delta or 0.0) * c,
            None if self.eps_prime is None else self.eps_prime - (b.dim * (self.delta or 0.0)) * c,
            da,
        )


@dataclass
class Case1Profile:
    """``a(t) = sqrt(r / (n beta^2)) cosh(beta t + gamma)``; ``e^{2f} = alpha^2 cosh^-2``.

    ``alpha_sq`` is ``n beta^2 / r``; this is the squared amplitude of the
    conformal factor.
    """

    alpha_sq: float
    beta: float
    gamma: float
    r: float
    n: int

    @property
    def amplitude(self):
        return math.sqrt(self.r / (self.n * self.beta**2))

    def a(self, t):
        return self.amplitude * jets.cosh(self.beta * t + self.gamma)

    def da(self, t):
        return self.amplitude * self.beta * jets.sinh(self.beta * t + self.gamma)

    def ode_residual(self, ts) -> float:
        worst = 0.0
        for t in np.atleast_1d(ts):
            A = self.a(jets.seed([t])[..., 0])
            a, a1, a2 = float(A.value), float(A.grad[0]), float(A.hess[0, 0])
            worst = max(worst, abs(a2 * a - a1 * a1 - self.r / self.n))
        return worst


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def conformal_ricci(g: MetricField, f: ScalarField, p) -> np.ndarray:
    """Ricci tensor of ``e^{2f} g`` from data of ``g`` and ``f``.

    ``Ric~ = Ric - (D-2)(Hess f - df df) + (Lap f - (D-2)|df|^2) g`` with the
    positive Laplacian, ``D = dim``.
    """
    G = g.jet(p)
    pack = curvature_from_jet(G)
    F = f.jet(p)
    H = _hessian_from(F, pack.gamma)
    df = F.grad
    lap = -float(np.einsum("ij,ij->", pack.ginv, H))
    norm = float(df @ pack.ginv @ df)
    c = g.dim - 2
    return pack.ricci - c * (H - np.outer(df, df)) + (lap - c * norm) * pack.g


def mixed_ricci_residual(f: ScalarField, p) -> np.ndarray:
    """``X(f'_t) - X(f_t) f'_t`` for the base coordinate directions ``X``.

    The chart is a cylinder with ``t`` last.
    """
    F = f.jet(p)
    n = f.dim - 1
    return F.hess[:n, n] - F.grad[:n] * F.grad[n]


@dataclass
class SyResidual:
    scalar: float
    matrix: np.ndarray
    matrix_norm: float


def system_sy_residual(split: SplitConformalFactor, g: MetricField, r, p, t) -> SyResidual:
    """Residuals of the reduced Einstein system for ``e^{-f} = a + b``.

    scalar: ``(n a'' - Lap b)(a+b) - n a'^2 - n |db|^2 - r``
    matrix: ``(n-1) a'' g - (a+b) Ric - (n-1) H(b)``
    """
    n = g.dim
    a, a1, a2 = split.a_jet(t)
    pack = curvature(g, p)
    B = split.b.jet(p)
    b = float(B.value)
    H = _hessian_from(B, pack.gamma)
    lap = -float(np.einsum("ij,ij->", pack.ginv, H))
    db2 = float(B.grad @ pack.ginv @ B.grad)
    s = (n * a2 - lap) * (a + b) - n * a1 * a1 - n * db2 - r
    M = (n - 1) * a2 * pack.g - (a + b) * pack.ricci - (n - 1) * H
    return SyResidual(float(s), M, math.sqrt(metric_norm_sq(M, pack.ginv)))


def case1_solution(r, n, beta, gamma=0.0):
    """Case-1 profile and ``f = -ln a(t)`` on the ``(n+1)``-dimensional cylinder chart."""
    if r <= 0:
        raise ValueError("case1_solution needs r > 0")
    if beta == 0:
        raise ValueError("case1_solution needs beta != 0")
    if n < 2:
        raise ValueError("case1_solution needs n >= 2")
    prof = Case1Profile(n * beta**2 / r, float(beta), float(gamma), float(r), int(n))

    def fn(x):
        return -jets.log(prof.a(x[..., n]))

    return prof, ScalarField(n + 1, fn, name=f"case1_f(r={r},beta={beta},gamma={gamma})")


def case1_split(profile: Case1Profile, base: MetricField) -> SplitConformalFactor:
    zero = ScalarField(base.dim, lambda x: 0.0 * x[..., 0], name="0")
    return SplitConformalFactor(profile.a, zero, da=profile.da)


def case3_separation_residuals(split: SplitConformalFactor, g: MetricField, points, ts=None) -> dict:
    """Residuals of the separated equations with constants ``delta, eps, eps'``.

    ``ts`` defaults to 11 evenly spaced values in ``[-1.5, 1.5]``.

    Keys: ``a3`` (a''' - delta a'), ``grad_lap`` (X(Lap b) - n delta X(b)),
    ``a_ode`` (a'' - delta a - eps), ``b_eigen`` (Lap b - n delta b - eps').
    """
    if split.delta is None or split.eps is None or split.eps_prime is None:
        raise ValueError("separation constants delta, eps, eps' must be set")
    n = g.dim
    delta = split.delta
    out = {"a3": 0.0, "grad_lap": 0.0, "a_ode": 0.0, "b_eigen": 0.0}
    if ts is None:
        ts = np.linspace(-1.5, 1.5, 11)
    for t in np.atleast_1d(ts):
        a, a1, a2 = split.a_jet(t)
        out["a3"] = max(out["a3"], abs(split.a3(t) - delta * a1))
        out["a_ode"] = max(out["a_ode"], abs(a2 - delta * a - split.eps))
    for p in points:
        lap = laplacian_of(split.b, g, p)
        b = float(split.b.jet(p, order=1).value)
        out["b_eigen"] = max(out["b_eigen"], abs(lap - n * delta * b - split.eps_prime))
        # X(Lap b) by central differences of the exact pointwise Laplacian
        db = split.b.jet(p, order=1).grad
        h = 1e-4
        for i in range(n):
            e = np.zeros(n)
            e[i] = h
            dlap = (laplacian_of(split.b, g, p + e) - laplacian_of(split.b, g, p - e)) / (2 * h)
            out["grad_lap"] = max(out["grad_lap"], abs(dlap - n * delta * db[i]))
    return out


def laplacian_of(b: ScalarField, g: MetricField, p) -> float:
    G = g.jet(p, order=1)
    _, ginv, _, gamma = _gamma_from_jet(G)
    return -float(np.einsum("ij,ij->", ginv, _hessian_from(b.jet(p), gamma)))


def obata_residual(b: ScalarField, g: MetricField, delta, points):
    """Max over points of ``|H(b) + delta b g|`` and ``|Ric - (n-1) delta g|`` (metric norms)."""
    if delta <= 0:
        raise ValueError("obata_residual needs delta > 0")
    n = g.dim
    hres = eres = 0.0
    for p in points:
        pack = curvature(g, p)
        B = b.jet(p)
        H = _hessian_from(B, pack.gamma)
        A = H + delta * float(B.value) * pack.g
        E = pack.ricci - (n - 1) * delta * pack.g
        hres = max(hres, math.sqrt(metric_norm_sq(A, pack.ginv)))
        eres = max(eres, math.sqrt(metric_norm_sq(E, pack.ginv)))
    return hres, eres


def case2_obstruction(g: MetricField, b: ScalarField, r, n, grid) -> QuadratureResult:
    """Quadrature of ``(n+1)|db|^2 + r`` over the chart."""
    if r <= 0:
        raise ValueError("case2_obstruction needs r > 0")

    def integrand(X):
        B = b(X)
        G = jets.value_of(g(X))
        if not isinstance(B, jets.Jet2):
            return np.full(X.shape[:-1], float(r))
        db = B.grad
        norm = np.einsum("...i,...ij,...j->...", db, np.linalg.inv(G), db)
        return (n + 1) * norm + r

    return chart_quadrature(g, integrand, grid)


def einstein_check(g: MetricField, points, tol=1e-6) -> EinsteinReport:
    """Fit ``lambda = mean(scal / dim)`` and measure ``max |Ric - lambda g|_op``."""
    points = list(points)
    if len(points) < 10:
        raise ValueError("einstein_check needs at least 10 sample points")
    packs = [curvature(g, p) for p in points]
    lam = float(np.mean([pk.scalar / g.dim for pk in packs]))
    worst = max(operator_norm(pk.ricci - lam * pk.g, pk.g) for pk in packs)
    return EinsteinReport(lam, worst, len(points), tol, worst <= tol)
