"""Constructors for chart metrics, coordinate maps and chart quadrature.

Every builder returns closures that accept batched coordinate jets, so the
same metric can be evaluated at a single point (with second derivatives for
curvature) or over a quadrature grid (values and gradients only).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import DomainViolation, GeometryError, SingularMetricError
from .jets import Jet2
from .tensor_core import FormField, MetricField, ScalarField

# ---------------------------------------------------------------------------
# coordinate maps
# ---------------------------------------------------------------------------


class CoordinateMap:
    """Smooth map between charts with an analytic Jacobian.

    ``fn`` maps a coordinate jet ``(..., source_dim)`` to ``(..., target_dim)``;
    ``jacobian`` maps it to ``(..., target_dim, source_dim)``.  The Jacobian
    is supplied in closed form so that pulled-back fields keep their second
    derivatives.
    """

    def __init__(self, source_dim, target_dim, fn, jacobian=None, name=""):
        self.source_dim = source_dim
        self.target_dim = target_dim
        self.fn = fn
        self._jacobian = jacobian
        self.name = name

    def __call__(self, x):
        return self.fn(x)

    def jacobian(self, x):
        if self._jacobian is None:
            raise GeometryError(f"coordinate map {self.name!r} has no Jacobian")
        return self._jacobian(x)

    def at(self, p):
        return jets.value_of(self.fn(jets.seed(p, order=1)))

    def compose(self, inner: "CoordinateMap") -> "CoordinateMap":
        """The map ``self o inner``."""
        if inner.target_dim != self.source_dim:
            raise GeometryError("composition of maps with mismatched dimensions")

        def fn(x):
            return self.fn(inner.fn(x))

        def jac(x):
            return jets.einsum("...ab,...bc->...ac", self.jacobian(inner.fn(x)), inner.jacobian(x))

        return CoordinateMap(
            inner.source_dim, self.target_dim, fn, jac, name=f"{self.name}o{inner.name}"
        )


def identity_map(n) -> CoordinateMap:
    def jac(x):
        return jets.const_like(np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)), x)

    return CoordinateMap(n, n, lambda x: x, jac, name="id")


def _eye_like(n, x):
    return jets.const_like(np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)), x)


def stereographic_embedding(n, radius=1.0) -> CoordinateMap:
    """Inverse stereographic projection R^n -> S^n(radius) in R^{n+1}.

    The last ambient coordinate is the height; the chart misses the point
    ``(0, ..., 0, radius)``.
    """
    R = float(radius)

    def fn(x):
        r2 = (x * x).sum(-1)
        q = 1.0 / (1.0 + r2)
        top = (2.0 * R) * q[..., None] * x
        last = R * (r2 - 1.0) * q
        return jets.stack([top[..., a] for a in range(n)] + [last], axis=-1)

    def jac(x):
        r2 = (x * x).sum(-1)
        q = 1.0 / (1.0 + r2)
        q2 = q * q
        top = (2.0 * R) * q[..., None, None] * np.eye(n) - (4.0 * R) * q2[..., None, None] * (
            x[..., :, None] * x[..., None, :]
        )
        bottom = (4.0 * R) * q2[..., None] * x
        return jets.stack([top[..., a, :] for a in range(n)] + [bottom], axis=-2)

    return CoordinateMap(n, n + 1, fn, jac, name=f"stereo{n}")


def angular_embedding(n, radius=1.0) -> CoordinateMap:
    """Hyperspherical angles ``(theta_1, ..., theta_{n-1}, phi)`` -> R^{n+1}.

    The last ambient coordinate is ``radius * cos(theta_1)``.
    """
    R = float(radius)

    def fn(x):
        comps = [None] * (n + 1)
        s = 1.0
        for k in range(n):
            a = x[..., k]
            comps[n - k] = R * s * jets.cos(a)
            s = s * jets.sin(a)
        comps[0] = R * s if n > 0 else R
        return jets.stack(comps, axis=-1)

    return CoordinateMap(n, n + 1, fn, None, name=f"angular{n}")


# ---------------------------------------------------------------------------
# metric constructors
# ---------------------------------------------------------------------------


def euclidean(n) -> MetricField:
    return MetricField(n, lambda x: _eye_like(n, x), name=f"euclidean_{n}")


def round_sphere(n, radius=1.0) -> MetricField:
    """Stereographic chart of the round n-sphere: ``4 R^2 delta / (1+|x|^2)^2``."""
    if n < 1 or radius <= 0:
        raise ValueError("round_sphere needs n >= 1 and radius > 0")
    R2 = float(radius) ** 2

    def fn(x):
        r2 = (x * x).sum(-1)
        fac = 4.0 * R2 / (1.0 + r2) ** 2
        return fac[..., None, None] * np.eye(n)

    return MetricField(
        n, fn, name=f"round_sphere_{n}", embedding=stereographic_embedding(n, radius)
    )


def angular_sphere(n, radius=1.0) -> MetricField:
    """Iterated angular chart of the round n-sphere (used for quadrature)."""
    R2 = float(radius) ** 2

    def fn(x):
        diag = []
        s2 = R2
        for k in range(n):
            diag.append(s2)
            if k < n - 1:
                s2 = s2 * jets.sin(x[..., k]) ** 2
        d = jets.stack(diag, axis=-1)
        return d[..., :, None] * np.eye(n)

    def domain(p):
        th = p[..., : n - 1]
        return np.all((th > 0) & (th < np.pi), axis=-1)

    return MetricField(
        n, fn, domain=domain, name=f"angular_sphere_{n}", embedding=angular_embedding(n, radius)
    )


def ambient_coordinate(g: MetricField, index=-1) -> ScalarField:
    """Restriction of an ambient linear coordinate through ``g.embedding``."""
    if g.embedding is None:
        raise GeometryError(f"{g.name} has no embedding")
    emb = g.embedding
    return ScalarField(g.dim, lambda x: emb(x)[..., index], name=f"x{index}|{g.name}")


def _block(gM: Jet2, n, m):
    """Embed an ``n x n`` metric jet into the top-left of ``(n+m) x (n+m)``."""
    E = np.zeros((n, n + m))
    E[:, :n] = np.eye(n)
    return jets.einsum("ia,...ij,jb->...ab", E, gM, E)


def _unit(n, k):
    e = np.zeros((n, n))
    e[k, k] = 1.0
    return e


def _lift_domain(g: MetricField, extra=None):
    n = g.dim

    def domain(p):
        ok = np.ones(p.shape[:-1], dtype=bool)
        if g.domain is not None:
            ok &= g.domain(p[..., :n])
        if extra is not None:
            ok &= extra(p[..., n])
        return ok

    return domain


def warped_product(g: MetricField, warp, domain=None, name="") -> MetricField:
    """``warp(t)^2 g + dt^2`` with ``t`` appended as the last coordinate."""
    n = g.dim

    def fn(x):
        t = x[..., n]
        w = warp(t)
        gM = _block(g(x[..., :n]), n, 1)
        return (w * w)[..., None, None] * gM + _unit(n + 1, n)

    return MetricField(
        n + 1, fn, domain=_lift_domain(g, domain), orientation=g.orientation, name=name
    )


def product_cylinder(g: MetricField) -> MetricField:
    """Riemannian cylinder ``g + dt^2``."""
    n = g.dim

    def fn(x):
        return _block(g(x[..., :n]), n, 1) + _unit(n + 1, n)

    return MetricField(
        n + 1, fn, domain=_lift_domain(g), orientation=g.orientation, name=f"cylinder({g.name})"
    )


def cone_metric(g: MetricField) -> MetricField:
    """Riemannian cone ``r^2 g + dr^2`` on ``r > 0``."""
    return warped_product(g, lambda r: r, domain=lambda r: r > 0, name=f"cone({g.name})")


def sine_cone_metric(g: MetricField) -> MetricField:
    """Sine-cone ``sin^2(s) g + ds^2`` on ``0 < s < pi``."""
    return warped_product(
        g, jets.sin, domain=lambda s: (s > 0) & (s < np.pi), name=f"sinecone({g.name})"
    )


def conformal_rescale(g: MetricField, f: ScalarField) -> MetricField:
    """``e^{2f} g``."""
    if f.dim != g.dim:
        raise GeometryError("conformal factor lives on a different chart")

    def fn(x):
        return jets.exp(2.0 * f(x))[..., None, None] * g(x)

    return MetricField(
        g.dim, fn, domain=g.domain, orientation=g.orientation, name=f"e2f({g.name})",
        embedding=g.embedding,
    )


def scale_metric(g: MetricField, c) -> MetricField:
    """Homothety ``c^2 g``."""
    c2 = float(c) ** 2
    return MetricField(
        g.dim, lambda x: c2 * g(x), domain=g.domain, orientation=g.orientation,
        name=f"{c}^2*{g.name}", embedding=g.embedding,
    )


def product_metric(g: MetricField, h: MetricField) -> MetricField:
    """Riemannian product ``g + h`` on concatenated charts."""
    n, m = g.dim, h.dim
    E1 = np.zeros((n, n + m))
    E1[:, :n] = np.eye(n)
    E2 = np.zeros((m, n + m))
    E2[:, n:] = np.eye(m)

    def fn(x):
        return jets.einsum("ia,...ij,jb->...ab", E1, g(x[..., :n]), E1) + jets.einsum(
            "ia,...ij,jb->...ab", E2, h(x[..., n:]), E2
        )

    def domain(p):
        ok = np.ones(p.shape[:-1], dtype=bool)
        if g.domain is not None:
            ok &= g.domain(p[..., :n])
        if h.domain is not None:
            ok &= h.domain(p[..., n:])
        return ok

    orient = None if g.orientation is None or h.orientation is None else g.orientation * h.orientation
    return MetricField(n + m, fn, domain=domain, orientation=orient, name=f"{g.name}+{h.name}")


def _check_rank(J: Jet2, name):
    Jv = J.value
    if Jv.ndim == 2:
        s = np.linalg.svd(Jv, compute_uv=False)
        if s.size == 0 or s[-1] <= 1e-12 * max(1.0, s[0]):
            raise SingularMetricError(f"{name}: rank-deficient Jacobian")


def pullback_metric(phi: CoordinateMap, h: MetricField) -> MetricField:
    """``(phi^* h)_ij = d_i phi^a d_j phi^b h_ab(phi)``."""
    if phi.target_dim != h.dim:
        raise GeometryError("pullback: map target does not match metric chart")

    def fn(x):
        y = phi(x)
        if h.domain is not None and not np.all(h.domain(jets.value_of(y))):
            raise DomainViolation(f"pullback: image outside the domain of {h.name}")
        J = phi.jacobian(x)
        _check_rank(J, phi.name)
        return jets.einsum("...ai,...ab,...bj->...ij", J, h(y), J)

    return MetricField(phi.source_dim, fn, name=f"{phi.name}*{h.name}")


def pullback_form(phi: CoordinateMap, psi: FormField) -> FormField:
    """Pull a k-form back through ``phi``."""
    k = psi.degree
    letters = "abcdefg"[:k]
    outs = "ijklmno"[:k]

    def fn(x):
        y = phi(x)
        J = phi.jacobian(x)
        form = psi(y)
        out = form
        for q in range(k):
            src = "".join(outs[:q]) + letters[q] + "".join(letters[q + 1:])
            dst = "".join(outs[: q + 1]) + "".join(letters[q + 1:])
            out = jets.einsum(f"...{letters[q]}{outs[q]},...{src}->...{dst}", J, out)
        return out

    return FormField(phi.source_dim, k, fn, name=f"{phi.name}*{psi.name}")


def metric_residual(g: MetricField, h: MetricField, points) -> float:
    """Max componentwise difference of two metrics over sample points."""
    worst = 0.0
    for p in points:
        worst = max(worst, float(np.max(np.abs(g.value(p) - h.value(p)))))
    return worst


# ---------------------------------------------------------------------------
# quadrature
# ---------------------------------------------------------------------------


@dataclass
class QuadratureResult:
    value: float
    error: float
    nodes: int


def _tensor_grid(grid):
    axes, weights = [], []
    for lo, hi, n in grid:
        x, w = np.polynomial.legendre.leggauss(int(n))
        axes.append(0.5 * (hi - lo) * x + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * w)
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(grid))
    w = np.ones(1)
    for wk in weights:
        w = np.multiply.outer(w, wk).reshape(-1)
    return pts, w


def _gauss(g, integrand, grid, chunk):
    pts, w = _tensor_grid(grid)
    total = 0.0
    for start in range(0, len(pts), chunk):
        X = jets.seed(pts[start : start + chunk], order=1)
        G = jets.value_of(g(X))
        vol = np.sqrt(np.linalg.det(G))
        val = jets.value_of(integrand(X))
        if not (np.all(np.isfinite(val)) and np.all(np.isfinite(vol))):
            raise GeometryError("quadrature: non-finite integrand value")
        total += float(np.sum(w[start : start + chunk] * val * vol))
    return total, len(pts)


def chart_quadrature(g: MetricField, integrand, grid, chunk=20000) -> QuadratureResult:
    """Gauss-Legendre tensor-product integral of ``integrand * sqrt(det g)``.

    ``grid`` is a sequence of ``(lo, hi, nodes)`` per chart axis.  The
    integrand receives the batched coordinate seed jet (first order) and
    returns values or a jet.  The error estimate is the change against the
    half-resolution rule.
    """
    grid = [(float(lo), float(hi), int(n)) for lo, hi, n in grid]
    if len(grid) != g.dim:
        raise GeometryError("quadrature grid does not match chart dimension")
    full, count = _gauss(g, integrand, grid, chunk)
    half_grid = [(lo, hi, max(1, n // 2)) for lo, hi, n in grid]
    half, _ = _gauss(g, integrand, half_grid, chunk)
    return QuadratureResult(full, abs(full - half), count)


def angular_grid(n, nodes=32):
    """Full-sphere grid for :func:`angular_sphere` charts."""
    return [(0.0, np.pi, nodes)] * (n - 1) + [(0.0, 2.0 * np.pi, nodes)]


def sample_points(box, count, seed=0):
    """Seeded uniform samples inside a coordinate box ``[(lo, hi), ...]``."""
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    return lo + (hi - lo) * rng.random((count, len(box)))
