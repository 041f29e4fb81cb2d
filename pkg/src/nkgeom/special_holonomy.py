"""Sasaki-Einstein 5-manifolds, their Kaehler cones, G2 cylinders and the
nearly Kaehler sine-cone, plus the two structures on the Riemannian cylinder.

Chart conventions: the Sasaki base uses the stereographic chart of the unit
5-sphere, whose embedding into R^6 is read as C^3 with interleaved real
coordinates ``(x1, y1, x2, y2, x3, y3)``.  Extra coordinates are appended in
the order ``cone_r`` then ``cyl_t``.  The sine-cone chart is ``(x, sine_s)``.

Sign table (all fixed by the residual checks on the round 5-sphere):

* ``d eta = -2 omega1``, ``d omega2 = 3 eta ^ omega3``, ``d omega3 = -3 eta ^ omega2``
* cone: ``omega = r^2 omega1 - r dr ^ eta``,
  ``Psi = r^2 (omega2 + i omega3) ^ (dr - i r eta)``
* G2: ``phi = omega ^ dt + psi_re``, ``*phi = omega^2 / 2 + psi_im ^ dt``
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import jets
from .errors import StructureError
from .gray_hervella import AlmostHermitianField, structure_from_form
from .metric_builders import (
    CoordinateMap,
    cone_metric,
    product_cylinder,
    round_sphere,
    scale_metric,
    sine_cone_metric,
)
from .tensor_core import (
    FormField,
    MetricField,
    curvature,
    d_jet,
    hodge_star,
    operator_norm,
    top_component,
    wedge,
)

# ---------------------------------------------------------------------------
# constant forms on C^3 = R^6 with interleaved coordinates
# ---------------------------------------------------------------------------

_J0 = np.zeros((6, 6))
for _k in range(3):
    _J0[2 * _k + 1, 2 * _k] = 1.0
    _J0[2 * _k, 2 * _k + 1] = -1.0
_OMEGA_STD = _J0.T.copy()  # sum dx_k ^ dy_k


def _zeta_tensors():
    """``Re``/``Im`` of ``iota_P(dz1 ^ dz2 ^ dz3)`` as ``T[A, a, b]`` linear in ``X_A``."""
    dz = []
    for k in range(3):
        v = np.zeros(6, dtype=complex)
        v[2 * k] = 1.0
        v[2 * k + 1] = 1j
        dz.append(v)

    def w2(u, v):
        return np.outer(u, v) - np.outer(v, u)

    C = [w2(dz[1], dz[2]), -w2(dz[0], dz[2]), w2(dz[0], dz[1])]
    T = np.zeros((6, 6, 6), dtype=complex)
    for k in range(3):
        T[2 * k] += C[k]  # z_k = x_k + i y_k
        T[2 * k + 1] += 1j * C[k]
    return T.real.copy(), T.imag.copy()


_ZETA_RE, _ZETA_IM = _zeta_tensors()


def _pull1(emb: CoordinateMap, amb):
    def fn(x):
        X = emb(x)
        return jets.einsum("...a,...ai->...i", amb(X), emb.jacobian(x))

    return fn


def _pull2(emb: CoordinateMap, amb):
    def fn(x):
        X = emb(x)
        D = emb.jacobian(x)
        return jets.einsum("...ai,...ab,...bj->...ij", D, amb(X), D)

    return fn


# ---------------------------------------------------------------------------
# Sasaki-Einstein SU(2)-structures
# ---------------------------------------------------------------------------


@dataclass
class SasakiSU2Structure:
    base: MetricField
    eta: FormField
    omega1: FormField
    omega2: FormField
    omega3: FormField
    name: str = "sasaki"

    def xi(self, p):
        """Metric dual of ``eta``."""
        return np.linalg.solve(self.base.value(p), self.eta.value(p))

    def with_metric(self, g: MetricField, name=None) -> "SasakiSU2Structure":
        return SasakiSU2Structure(g, self.eta, self.omega1, self.omega2, self.omega3,
                                  name or f"{self.name}[{g.name}]")


def round_s5_sasaki() -> SasakiSU2Structure:
    """Hopf contact structure on the unit 5-sphere (stereographic chart)."""
    g = round_sphere(5)
    emb = g.embedding
    eta = FormField(5, 1, _pull1(emb, lambda X: jets.einsum("ab,...b->...a", _J0, X)), "eta")
    om1 = FormField(5, 2, _pull2(emb, lambda X: -_OMEGA_STD), "omega1")
    om2 = FormField(5, 2, _pull2(emb, lambda X: jets.einsum("...a,abc->...bc", X, _ZETA_RE)), "omega2")
    om3 = FormField(5, 2, _pull2(emb, lambda X: -jets.einsum("...a,abc->...bc", X, _ZETA_IM)), "omega3")
    return SasakiSU2Structure(g, eta, om1, om2, om3, name="s5_sasaki")


def squashed_s5() -> MetricField:
    """``g + 3 eta (x) eta`` on the unit 5-sphere: homogeneous, not Einstein."""
    s = round_s5_sasaki()
    g, eta = s.base, s.eta

    def fn(x):
        e = eta(x)
        return g(x) + 3.0 * jets.einsum("...i,...j->...ij", e, e)

    return MetricField(5, fn, name="squashed_s5")


def squashed_s5_sasaki() -> SasakiSU2Structure:
    """Round-sphere forms on the squashed metric (fails the structure checks)."""
    return round_s5_sasaki().with_metric(squashed_s5(), "squashed_s5")


@dataclass
class CheckReport:
    residuals: dict
    tolerance: float
    passed: bool
    failed: list = field(default_factory=list)


def _report(res: dict, tol, limits=None) -> CheckReport:
    limits = limits or {}
    failed = [k for k, v in res.items() if not v <= limits.get(k, tol)]
    return CheckReport(res, tol, not failed, failed)


def _maxabs(a):
    return float(np.max(np.abs(a), initial=0.0))


def se_verify(s: SasakiSU2Structure, points, tol=1e-7) -> CheckReport:
    """Algebraic, structure-equation and Einstein checks of a Sasaki SU(2)-structure."""
    keys = ("eta_xi", "xi_omega", "algebra", "volume", "d_eta", "d_omega2", "d_omega3", "einstein")
    res = dict.fromkeys(keys, 0.0)
    for p in points:
        g = s.base.value(p)
        eta = s.eta.jet(p, order=1)
        om = [w.jet(p, order=1) for w in (s.omega1, s.omega2, s.omega3)]
        ev, ov = eta.value, [w.value for w in om]
        xi = np.linalg.solve(g, ev)
        res["eta_xi"] = max(res["eta_xi"], abs(float(ev @ xi) - 1.0))
        res["xi_omega"] = max(res["xi_omega"], max(_maxabs(xi @ w) for w in ov))
        w11 = wedge(ov[0], ov[0])
        for i in range(3):
            for j in range(3):
                target = w11 if i == j else 0.0
                res["algebra"] = max(res["algebra"], _maxabs(wedge(ov[i], ov[j]) - target))
        top = abs(top_component(wedge(ev, w11)))
        res["volume"] = max(res["volume"], abs(top - 2.0 * math.sqrt(np.linalg.det(g))))
        d_eta = jets.value_of(d_jet(eta, 1))
        d2, d3 = (jets.value_of(d_jet(w, 2)) for w in om[1:])
        res["d_eta"] = max(res["d_eta"], _maxabs(d_eta + 2.0 * ov[0]))
        res["d_omega2"] = max(res["d_omega2"], _maxabs(d2 - 3.0 * wedge(ev, ov[2])))
        res["d_omega3"] = max(res["d_omega3"], _maxabs(d3 + 3.0 * wedge(ev, ov[1])))
        pk = curvature(s.base, p)
        res["einstein"] = max(res["einstein"], operator_norm(pk.ricci - 4.0 * pk.g, pk.g))
    return _report(res, tol, {"algebra": 10 * tol, "volume": 10 * tol})


# ---------------------------------------------------------------------------
# chart helpers
# ---------------------------------------------------------------------------


def _embed(n, d):
    E = np.zeros((n, d))
    E[:, :n] = np.eye(n)
    return E


def _pad(form, d):
    """Extend a form on the first ``n`` coordinates by zeros to ``d`` coordinates."""
    v = jets.value_of(form)
    k = v.ndim
    if k == 0:
        return form
    E = _embed(v.shape[0], d)
    letters = "abc"[:k]
    outs = "ijk"[:k]
    ops = ",".join(f"{a}{o}" for a, o in zip(letters, outs))
    return jets.einsum(f"{ops},{letters}->{outs}", *([E] * k), form)


def _coord1(x, i):
    """The differential ``dx_i`` as a constant 1-form on the chart of ``x``."""
    e = np.zeros(x.shape[-1])
    e[i] = 1.0
    return e


# ---------------------------------------------------------------------------
# Kaehler cone
# ---------------------------------------------------------------------------


@dataclass
class ConeSU3:
    cone_metric: MetricField
    omega: FormField
    psi_re: FormField
    psi_im: FormField
    base: Optional[SasakiSU2Structure] = None


def kahler_cone(s: SasakiSU2Structure, verify=True, points=None, tol=1e-7) -> ConeSU3:
    """Cone metric ``r^2 g + dr^2`` with its SU(3)-structure."""
    if verify:
        from .metric_builders import sample_points

        pts = points if points is not None else sample_points([(-1, 1)] * 5, 10, seed=0)
        rep = se_verify(s, pts, tol)
        if not rep.passed:
            raise StructureError(f"Sasaki structure check failed: {rep.failed}")
    n = s.base.dim
    d = n + 1

    def parts(x):
        r = x[n]
        xb = x[:n]
        return r, _coord1(x, n), [_pad(w(xb), d) for w in (s.eta, s.omega1, s.omega2, s.omega3)]

    def omega(x):
        r, dr, (eta, w1, _, _) = parts(x)
        return wedge(r * r, w1) - wedge(r, wedge(dr, eta))

    def psi_re(x):
        r, dr, (eta, _, w2, w3) = parts(x)
        return wedge(r * r, wedge(w2, dr)) + wedge(r * r * r, wedge(w3, eta))

    def psi_im(x):
        r, dr, (eta, _, w2, w3) = parts(x)
        return wedge(r * r, wedge(w3, dr)) - wedge(r * r * r, wedge(w2, eta))

    return ConeSU3(
        cone_metric(s.base),
        FormField(d, 2, omega, "cone_omega"),
        FormField(d, 3, psi_re, "cone_psi_re"),
        FormField(d, 3, psi_im, "cone_psi_im"),
        s,
    )


def su3_check(c: ConeSU3, points, tol=1e-6) -> CheckReport:
    """Algebraic normalisation, torsion and Ricci-flatness of a cone SU(3)-structure."""
    keys = ("volume", "psi_norm", "omega_psi", "d_omega", "d_psi_re", "d_psi_im", "ricci")
    res = dict.fromkeys(keys, 0.0)
    for p in points:
        g = c.cone_metric.value(p)
        vol = math.sqrt(np.linalg.det(g))
        om, pr, pi = (f.jet(p, order=1) for f in (c.omega, c.psi_re, c.psi_im))
        o3 = wedge(om.value, wedge(om.value, om.value))
        res["volume"] = max(res["volume"], abs(abs(top_component(o3)) / 6.0 - vol))
        res["psi_norm"] = max(res["psi_norm"], _maxabs(wedge(pr.value, pi.value) - (2.0 / 3.0) * o3))
        res["omega_psi"] = max(
            res["omega_psi"], _maxabs(wedge(om.value, pr.value)), _maxabs(wedge(om.value, pi.value))
        )
        res["d_omega"] = max(res["d_omega"], _maxabs(jets.value_of(d_jet(om, 2))))
        res["d_psi_re"] = max(res["d_psi_re"], _maxabs(jets.value_of(d_jet(pr, 3))))
        res["d_psi_im"] = max(res["d_psi_im"], _maxabs(jets.value_of(d_jet(pi, 3))))
        pk = curvature(c.cone_metric, p)
        res["ricci"] = max(res["ricci"], _maxabs(pk.ricci))
    return _report(res, tol)


def cone_complex_structure(c: ConeSU3) -> AlmostHermitianField:
    """``J = -h^{-1} omega`` on the cone chart."""
    return structure_from_form(c.cone_metric, c.omega, name="kahler_cone")


# ---------------------------------------------------------------------------
# G2 cylinder over the cone
# ---------------------------------------------------------------------------


@dataclass
class G2Pack:
    metric7: MetricField
    phi: FormField
    star_phi: FormField
    orientation: int = 1


def g2_from_su3(c: ConeSU3, orientation=1, reference_point=None) -> G2Pack:
    """``phi = omega ^ dt + psi_re`` on the cylinder over the cone.

    ``orientation = +1`` selects the orientation for which the Hodge star of
    ``phi`` equals the closed-form ``*phi``; ``-1`` reverses it.
    """
    if orientation not in (1, -1):
        raise ValueError("orientation must be +1 or -1")
    d6 = c.cone_metric.dim
    d = d6 + 1

    def phi(x):
        dt = _coord1(x, d6)
        return wedge(_pad(c.omega(x[:d6]), d), dt) + _pad(c.psi_re(x[:d6]), d)

    def star_phi(x):
        dt = _coord1(x, d6)
        om = _pad(c.omega(x[:d6]), d)
        return 0.5 * wedge(om, om) + wedge(_pad(c.psi_im(x[:d6]), d), dt)

    if reference_point is None:
        reference_point = np.r_[np.zeros(d6 - 1), 1.0]
    om = c.omega.value(reference_point)
    canonical = 1 if top_component(wedge(om, wedge(om, om))) > 0 else -1
    metric7 = product_cylinder(c.cone_metric).with_orientation(canonical * orientation)
    return G2Pack(
        metric7,
        FormField(d, 3, phi, "phi"),
        FormField(d, 4, star_phi, "star_phi"),
        orientation,
    )


def g2_check(g2: G2Pack, points, tol=1e-6) -> CheckReport:
    """``d phi``, ``d *phi``, Hodge consistency, ``phi ^ *phi = 7 vol`` and Ricci-flatness."""
    keys = ("d_phi", "d_star_phi", "star_consistency", "phi_star_phi", "ricci")
    res = dict.fromkeys(keys, 0.0)
    o = g2.metric7.orientation
    for p in points:
        g = g2.metric7.value(p)
        ph, sp = g2.phi.jet(p, order=1), g2.star_phi.jet(p, order=1)
        res["d_phi"] = max(res["d_phi"], _maxabs(jets.value_of(d_jet(ph, 3))))
        res["d_star_phi"] = max(res["d_star_phi"], _maxabs(jets.value_of(d_jet(sp, 4))))
        res["star_consistency"] = max(
            res["star_consistency"], _maxabs(hodge_star(ph.value, g, o) - sp.value)
        )
        top = top_component(wedge(ph.value, sp.value))
        res["phi_star_phi"] = max(res["phi_star_phi"], abs(top - 7.0 * o * math.sqrt(np.linalg.det(g))))
        pk = curvature(g2.metric7, p)
        res["ricci"] = max(res["ricci"], _maxabs(pk.ricci))
    return _report(res, tol)


# ---------------------------------------------------------------------------
# products of cones
# ---------------------------------------------------------------------------


def _polar_to_product(theta, r):
    return r * jets.sin(theta), r * jets.cos(theta)


def cone_product_isometry(g: MetricField, h: Optional[MetricField], points, mapping=None) -> float:
    """Residual of ``(t^2 g + dt^2) + (s^2 h + ds^2) = r^2(sin^2 g + cos^2 h + dtheta^2) + dr^2``.

    Points live on the right-hand chart ``(x_g, x_h, theta, r)``; ``h = None``
    is the metric of a point.  ``mapping(theta, r) -> (t, s)`` defaults to
    ``(r sin theta, r cos theta)``.
    """
    mapping = mapping or _polar_to_product
    n = g.dim
    m = 0 if h is None else h.dim
    D = n + m + 2
    worst = 0.0
    for p in points:
        p = np.asarray(p, dtype=float)
        X = jets.seed(p, order=1)
        theta, r = X[n + m], X[n + m + 1]
        t, s = mapping(theta, r)
        # left chart (x_g, t, x_h, s)
        comps = [X[i] for i in range(n)] + [t] + [X[n + i] for i in range(m)] + [s]
        Y = jets.stack(comps)
        Jac = Y.grad
        yv = Y.value
        lhs = np.zeros((D, D))
        lhs[:n, :n] = yv[n] ** 2 * g.value(yv[:n])
        lhs[n, n] = 1.0
        if m:
            lhs[n + 1 : n + 1 + m, n + 1 : n + 1 + m] = yv[-1] ** 2 * h.value(yv[n + 1 : n + 1 + m])
        lhs[-1, -1] = 1.0
        pulled = Jac.T @ lhs @ Jac
        th, rv = p[n + m], p[n + m + 1]
        rhs = np.zeros((D, D))
        rhs[:n, :n] = rv**2 * math.sin(th) ** 2 * g.value(p[:n])
        if m:
            rhs[n : n + m, n : n + m] = rv**2 * math.cos(th) ** 2 * h.value(p[n : n + m])
        rhs[n + m, n + m] = rv**2
        rhs[-1, -1] = 1.0
        worst = max(worst, _maxabs(pulled - rhs))
    return worst


# ---------------------------------------------------------------------------
# conformal cylinder map
# ---------------------------------------------------------------------------


def sine_cone_coordinate(t, beta, gamma):
    """``s = 2 atan(exp(beta t + gamma))``."""
    return 2.0 * jets.atan(jets.exp(beta * t + gamma))


def cylinder_to_sine_cone(n, beta, gamma) -> CoordinateMap:
    """``(x, t) -> (x, 2 atan(exp(beta t + gamma)))`` with its Jacobian."""

    def fn(x):
        s = sine_cone_coordinate(x[..., n], beta, gamma)
        return jets.stack([x[..., i] for i in range(n)] + [s], axis=-1)

    def jac(x):
        ds = beta / jets.cosh(beta * x[..., n] + gamma)
        diag = [jets.const_like(np.ones(x.shape[:-1]), x) for _ in range(n)] + [ds]
        return jets.stack(diag, axis=-1)[..., :, None] * np.eye(n + 1)

    return CoordinateMap(n + 1, n + 1, fn, jac, name=f"si(beta={beta},gamma={gamma})")


def conformal_cylinder_residual(g: MetricField, alpha, beta, gamma, points) -> float:
    """Componentwise residual of ``e^{2f}(g + dt^2) = (alpha/beta)^2 phi^*(beta^2 sin^2 s g + ds^2)``

    with ``e^{2f} = alpha^2 cosh^{-2}(beta t + gamma)``.
    """
    n = g.dim
    phi = cylinder_to_sine_cone(n, beta, gamma)
    target = sine_cone_metric(scale_metric(g, beta))
    cyl = product_cylinder(g)
    worst = 0.0
    for p in points:
        X = jets.seed(np.asarray(p, dtype=float), order=1)
        J = jets.value_of(phi.jacobian(X))
        y = jets.value_of(phi(X))
        pulled = (alpha / beta) ** 2 * (J.T @ target.value(y) @ J)
        lhs = alpha**2 / math.cosh(beta * p[n] + gamma) ** 2 * cyl.value(p)
        worst = max(worst, _maxabs(lhs - pulled))
    return worst


def transport_structure(J: Callable, phi: CoordinateMap) -> Callable:
    """Pull a (1,1)-tensor back through a local diffeomorphism: ``D^-1 J(phi) D``."""

    def fn(x):
        D = phi.jacobian(x)
        return jets.einsum("...ia,...ab,...bj->...ij", jets.inv(D), J(phi(x)), D)

    return fn


# ---------------------------------------------------------------------------
# nearly Kaehler sine-cone and the cylinder structures
# ---------------------------------------------------------------------------


def _polar_map(n):
    """``(x, theta, R) -> (x, cone_r = R sin theta, cyl_t = R cos theta)``."""

    def fn(x):
        th, R = x[..., n], x[..., n + 1]
        return jets.stack(
            [x[..., i] for i in range(n)] + [R * jets.sin(th), R * jets.cos(th)], axis=-1
        )

    return fn


def nk_from_g2(g2: G2Pack, base: MetricField) -> AlmostHermitianField:
    """Nearly Kaehler structure on the sine-cone ``sin^2 s g + ds^2``.

    The cylinder over the cone is identified with the cone over the sine-cone
    by ``(x, s, R) -> (x, R sin s, R cos s)``; on the level set ``R = 1`` the
    fundamental form is ``Omega(u, v) = phi(d/dR, u, v)``.
    """
    n = base.dim
    h = sine_cone_metric(base)
    polar = _polar_map(n)

    def omega(x):
        one = jets.const_like(np.ones(x.shape[:-1]), x)
        th = x[..., n]
        X = jets.stack([x[..., i] for i in range(n)] + [th, one], axis=-1)
        Y = polar(X)
        # columns: d/dx_i, d/ds and the radial field d/dR at R = 1
        D = np.zeros(x.shape[:-1] + (n + 2, n + 1))
        D[..., np.arange(n), np.arange(n)] = 1.0
        D = jets.const_like(D, x)
        s_col = jets.stack(
            [jets.const_like(np.zeros(x.shape[:-1]), x)] * n + [jets.cos(th), -jets.sin(th)], axis=-1
        )
        radial = jets.stack(
            [jets.const_like(np.zeros(x.shape[:-1]), x)] * n + [jets.sin(th), jets.cos(th)], axis=-1
        )
        D = D + s_col[..., :, None] * _unit_row(n + 1, n)
        return jets.einsum("...abc,...a,...bi,...cj->...ij", g2.phi(Y), radial, D, D)

    return structure_from_form(h, omega, name=f"nk_sinecone({base.name})")


def _unit_row(size, k):
    e = np.zeros(size)
    e[k] = 1.0
    return e


def cylinder_w1w4(s: SasakiSU2Structure, beta=1.0, gamma=0.0, nk=None) -> AlmostHermitianField:
    """Type W1+W4 structure on the cylinder ``g / beta^2 + dt^2``.

    The sine-cone nearly Kaehler ``J`` is pulled back through
    ``(x, t) -> (x, 2 atan(exp(beta t + gamma)))``; the cylinder metric is
    conformal to the pulled-back sine-cone metric, so ``J`` stays compatible.
    """
    if beta == 0:
        raise ValueError("cylinder_w1w4 needs beta != 0")
    n = s.base.dim
    if nk is None:
        nk = nk_from_g2(g2_from_su3(kahler_cone(s)), s.base)
    phi = cylinder_to_sine_cone(n, beta, gamma)
    J = transport_structure(nk.J, phi)
    metric = product_cylinder(scale_metric(s.base, 1.0 / beta) if beta != 1 else s.base)
    return AlmostHermitianField(metric, J, name=f"cylinder_w1w4(beta={beta},gamma={gamma})")


def _exp_map(n):
    """``(x, t) -> (x, cone_r = e^t)``."""

    def fn(x):
        return jets.stack([x[..., i] for i in range(n)] + [jets.exp(x[..., n])], axis=-1)

    def jac(x):
        diag = [jets.const_like(np.ones(x.shape[:-1]), x) for _ in range(n)] + [jets.exp(x[..., n])]
        return jets.stack(diag, axis=-1)[..., :, None] * np.eye(n + 1)

    return CoordinateMap(n + 1, n + 1, fn, jac, name="cone_r=exp(t)")


def vaisman_cylinder(s: SasakiSU2Structure, cone: Optional[ConeSU3] = None) -> AlmostHermitianField:
    """Cone complex structure carried to ``g + dt^2`` through ``cone_r = e^t``."""
    n = s.base.dim
    cone = cone or kahler_cone(s)
    Jc = cone_complex_structure(cone).J
    J = transport_structure(Jc, _exp_map(n))
    return AlmostHermitianField(product_cylinder(s.base), J, name="vaisman_cylinder")
