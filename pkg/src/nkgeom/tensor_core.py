"""Pointwise tensor calculus on a single coordinate chart.

Fields are callables from a coordinate jet (value shape ``(..., d)``) to a
component jet.  Evaluating a field on a seed jet yields its components with
first and second coordinate derivatives; evaluating it on the output of a
coordinate map composes the two through the chain rule.

Conventions used throughout:

* ``R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]`` and
  ``R_ijkl = g(R(d_i, d_j) d_k, d_l)``, so that ``Ric_ik = g^jl R_jikl`` and
  the unit sphere has ``R_ijkl = g_il g_jk - g_ik g_jl``.
* The Laplacian is the geometer's positive operator ``-tr_g Hess``.
* A k-form is stored as a fully antisymmetric array with
  ``psi = (1/k!) psi_{i1..ik} dx^i1 ^ ... ^ dx^ik``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations

import numpy as np

from . import jets
from .errors import (
    DegreeError,
    DomainViolation,
    JetOrderError,
    OrientationError,
    SingularMetricError,
)
from .jets import Jet2

# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class Field:
    """Jet-valued component function on a chart of dimension ``dim``."""

    def __init__(self, dim, fn, name=""):
        self.dim = dim
        self.fn = fn
        self.name = name

    def __call__(self, x: Jet2):
        return self.fn(x)

    def jet(self, p, order=2) -> Jet2:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.dim:
            raise DomainViolation(
                f"{self.name or type(self).__name__}: point has {p.shape[-1]} coordinates, "
                f"chart has {self.dim}"
            )
        out = self.fn(jets.seed(p, order))
        if not isinstance(out, Jet2):
            out = jets.constant(out, self.dim, order)
        return out

    def value(self, p):
        return self.jet(p, order=1).value


class ScalarField(Field):
    pass


class FormField(Field):
    def __init__(self, dim, degree, fn, name=""):
        super().__init__(dim, fn, name)
        self.degree = degree


class MetricField(Field):
    """Chart metric with optional domain predicate and coordinate orientation.

    ``orientation`` is +1/-1 relative to the coordinate order, or ``None``
    for an unoriented metric.
    """

    def __init__(self, dim, fn, domain=None, orientation=1, name="", embedding=None):
        super().__init__(dim, fn, name)
        self.domain = domain
        self.orientation = orientation
        self.embedding = embedding

    def in_domain(self, p) -> bool:
        if self.domain is None:
            return True
        return bool(np.all(self.domain(np.asarray(p, dtype=float))))

    def jet(self, p, order=2) -> Jet2:
        if not self.in_domain(p):
            raise DomainViolation(f"{self.name or 'metric'}: point {np.asarray(p)} outside domain")
        return super().jet(p, order)

    def with_orientation(self, orientation):
        return MetricField(self.dim, self.fn, self.domain, orientation, self.name, self.embedding)


def check_metric(g: MetricField, p, sym_tol=1e-12):
    """Raise unless ``g`` is symmetric and positive definite at ``p``."""
    G = g.value(p)
    if np.max(np.abs(G - G.T), initial=0.0) > sym_tol:
        raise SingularMetricError(f"metric not symmetric at {p}")
    lam = np.linalg.eigvalsh(0.5 * (G + G.T))
    if lam[0] <= 0:
        raise SingularMetricError(f"metric not positive definite at {p} (min eigenvalue {lam[0]:.3g})")
    return lam


# ---------------------------------------------------------------------------
# connection and curvature
# ---------------------------------------------------------------------------


@dataclass
class CurvaturePack:
    g: np.ndarray
    ginv: np.ndarray
    gamma: np.ndarray  # gamma[k, i, j] = Gamma^k_ij
    riemann_low: np.ndarray  # R_ijkl
    ricci: np.ndarray
    scalar: float


def _inverse(G):
    lam = np.linalg.eigvalsh(0.5 * (G + G.T))
    if lam[0] <= 0:
        raise SingularMetricError(f"metric singular or indefinite (min eigenvalue {lam[0]:.3g})")
    return np.linalg.inv(G)


def _gamma_from_jet(G: Jet2):
    """First-kind and second-kind Christoffel symbols from a metric jet."""
    g = G.value
    dg = G.grad  # dg[a, b, c] = d_c g_ab
    ginv = _inverse(g)
    # gamma_low[l, i, j] = 1/2 (d_i g_jl + d_j g_il - d_l g_ij)
    gl = 0.5 * (
        np.einsum("jli->lij", dg) + np.einsum("ilj->lij", dg) - np.einsum("ijl->lij", dg)
    )
    gamma = np.einsum("kl,lij->kij", ginv, gl)
    return g, ginv, gl, gamma


def christoffel(g: MetricField, p) -> np.ndarray:
    """Levi-Civita symbols ``Gamma[k, i, j] = Gamma^k_ij`` at ``p``."""
    return _gamma_from_jet(g.jet(p, order=1))[3]


def curvature_from_jet(G: Jet2) -> CurvaturePack:
    if G.hess is None:
        raise JetOrderError("curvature needs second derivatives of the metric")
    g, ginv, gl, gamma = _gamma_from_jet(G)
    dg = G.grad
    d2g = G.hess  # d2g[a, b, c, e] = d_c d_e g_ab
    # dgl[i, l, j, k] = d_i Gamma_{l,jk}
    dgl = 0.5 * (
        np.einsum("klij->iljk", d2g) + np.einsum("jlik->iljk", d2g) - np.einsum("jkil->iljk", d2g)
    )
    # A_ijkl = g_lm d_i Gamma^m_jk = d_i Gamma_{l,jk} - (d_i g_lm) Gamma^m_jk
    A = np.einsum("iljk->ijkl", dgl) - np.einsum("lmi,mjk->ijkl", dg, gamma)
    R = (
        A
        - np.einsum("jikl->ijkl", A)
        + np.einsum("pjk,lip->ijkl", gamma, gl)
        - np.einsum("pik,ljp->ijkl", gamma, gl)
    )
    ric = np.einsum("jl,jikl->ik", ginv, R)
    scal = float(np.einsum("ik,ik->", ginv, ric))
    return CurvaturePack(g, ginv, gamma, R, ric, scal)


def curvature(g: MetricField, p) -> CurvaturePack:
    """Christoffel, Riemann, Ricci and scalar curvature at ``p``."""
    return curvature_from_jet(g.jet(p))


def curvature_symmetry_residuals(pack: CurvaturePack) -> dict:
    R = pack.riemann_low
    return {
        "antisym_12": float(np.max(np.abs(R + np.einsum("jikl->ijkl", R)))),
        "antisym_34": float(np.max(np.abs(R + np.einsum("ijlk->ijkl", R)))),
        "pair_sym": float(np.max(np.abs(R - np.einsum("klij->ijkl", R)))),
        "bianchi": float(
            np.max(np.abs(R + np.einsum("iljk->ijkl", R) + np.einsum("iklj->ijkl", R)))
        ),
        "ricci_sym": float(np.max(np.abs(pack.ricci - pack.ricci.T))),
    }


def _hessian_from(B: Jet2, gamma):
    return B.hess - np.einsum("kij,k->ij", gamma, B.grad)


def hessian(b: ScalarField, g: MetricField, p) -> np.ndarray:
    """Riemannian Hessian ``H(b)_ij = d_i d_j b - Gamma^k_ij d_k b``."""
    gamma = christoffel(g, p)
    return _hessian_from(b.jet(p), gamma)


def laplacian(b: ScalarField, g: MetricField, p) -> float:
    """Positive Laplacian ``-g^ij H(b)_ij``."""
    G = g.jet(p, order=1)
    _, ginv, _, gamma = _gamma_from_jet(G)
    return float(-np.einsum("ij,ij->", ginv, _hessian_from(b.jet(p), gamma)))


def grad_norm_sq(b: ScalarField, g: MetricField, p) -> float:
    db = b.jet(p, order=1).grad
    return float(db @ np.linalg.solve(g.value(p), db))


def covariant_derivative_jet(T: Jet2, gamma, upper=0):
    """Covariant derivative of a tensor jet; the derivative index comes first.

    ``T`` has ``upper`` contravariant indices followed by covariant ones.
    """
    k = T.ndim
    D = np.moveaxis(T.grad, -1, 0)
    out = D.copy()
    tv = T.value
    for pos in range(k):
        # contract index ``pos`` of T with the Christoffel symbol
        moved = np.moveaxis(tv, pos, 0)  # (m, ...rest)
        if pos < upper:
            # + Gamma^i_{c m} T^{..m..}
            term = np.einsum("icm,m...->ci...", gamma, moved)
            out = out + np.moveaxis(term, 1, pos + 1)
        else:
            # - Gamma^m_{c i} T_{..m..}
            term = np.einsum("mci,m...->ci...", gamma, moved)
            out = out - np.moveaxis(term, 1, pos + 1)
    return out


def covariant_derivative(T: Field, g: MetricField, p, kind="(0,2)") -> np.ndarray:
    """``nabla T`` at ``p`` for a ``(0,k)`` or ``(1,1)`` tensor field.

    Output index order is ``[c, ...]`` with ``c`` the differentiation index.
    """
    upper = int(kind.strip("()").split(",")[0])
    gamma = christoffel(g, p)
    return covariant_derivative_jet(T.jet(p, order=1), gamma, upper)


def metric_norm_sq(A, ginv) -> float:
    """Full contraction ``A_{a..} A^{a..}`` of a covariant tensor."""
    B = np.asarray(A, dtype=float)
    raised = B
    for ax in range(B.ndim):
        raised = np.moveaxis(np.tensordot(ginv, raised, axes=([1], [ax])), 0, ax)
    return float(np.sum(B * raised))


def operator_norm(S, g) -> float:
    """Largest |eigenvalue| of the symmetric form ``S`` relative to ``g``."""
    from scipy.linalg import eigh

    lam = eigh(0.5 * (S + S.T), g, eigvals_only=True)
    return float(np.max(np.abs(lam)))


# ---------------------------------------------------------------------------
# differential forms
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _combos(d, k):
    combos = list(combinations(range(d), k))
    return np.array(combos, dtype=int).reshape(len(combos), k)


def _perm_sign(seq):
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


@lru_cache(maxsize=None)
def _expand_plan(d, k):
    combos = _combos(d, k)
    rows, cols, signs = [], [], []
    for r, I in enumerate(combos):
        for perm in permutations(range(k)):
            rows.append(r)
            cols.append([I[q] for q in perm])
            signs.append(_perm_sign(perm))
    return np.array(rows), np.array(cols, dtype=int).reshape(-1, k), np.array(signs, dtype=float)


def compact(form, k):
    """Sorted-index components ``psi_I`` (``I`` increasing) of a k-form."""
    if k == 0:
        return jets.linear(form, lambda a: a[None])
    d = jets.value_of(form).shape[0]
    C = _combos(d, k)
    return form[tuple(C.T)]


def expand(comp, k, d):
    """Inverse of :func:`compact`: fully antisymmetric array of a k-form."""
    if k == 0:
        return comp[0]
    rows, cols, signs = _expand_plan(d, k)

    def fn(a):
        out = np.zeros((d,) * k + a.shape[1:])
        s = signs.reshape((-1,) + (1,) * (a.ndim - 1))
        out[tuple(cols.T)] = s * a[rows]
        return out

    return jets.linear(comp, fn)


@lru_cache(maxsize=None)
def _wedge_plan(d, k, l):
    out = _combos(d, k + l)
    Js, Ks, rows, signs = [], [], [], []
    for r, I in enumerate(out):
        for pos in combinations(range(k + l), k):
            rest = [q for q in range(k + l) if q not in pos]
            Js.append([I[q] for q in pos])
            Ks.append([I[q] for q in rest])
            rows.append(r)
            signs.append(_perm_sign(list(pos) + rest))
    n = len(rows)
    S = np.zeros((len(out), n))
    S[rows, np.arange(n)] = signs
    return (
        np.array(Js, dtype=int).reshape(n, k),
        np.array(Ks, dtype=int).reshape(n, l),
        S,
    )


def wedge(alpha, beta):
    """Exterior product; degrees are read from the array ranks."""
    k = jets.value_of(alpha).ndim
    l = jets.value_of(beta).ndim
    if k == 0 or l == 0:
        if k == 0 and l == 0:
            return alpha * beta
        scal, form = (alpha, beta) if k == 0 else (beta, alpha)
        sv = jets.value_of(scal)
        nd = jets.value_of(form).ndim
        return form * (scal[(...,) + (None,) * nd] if isinstance(scal, Jet2) else sv)
    d = jets.value_of(alpha).shape[0]
    if jets.value_of(beta).shape[0] != d:
        raise DegreeError("wedge of forms on charts of different dimension")
    if k + l > d:
        z = np.zeros((d,) * (k + l))
        jl = [x for x in (alpha, beta) if isinstance(x, Jet2)]
        return jets.const_like(z, jl[0]) if jl else z
    J, K, S = _wedge_plan(d, k, l)
    a = alpha[tuple(J.T)]
    b = beta[tuple(K.T)]
    comp = jets.einsum("It,t->I", S, a * b)
    return expand(comp, k + l, d)


@lru_cache(maxsize=None)
def _d_plan(d, k):
    out = _combos(d, k + 1)
    src, rows, signs = [], [], []
    for r, I in enumerate(out):
        for j in range(k + 1):
            rest = [I[q] for q in range(k + 1) if q != j]
            src.append(rest + [I[j]])
            rows.append(r)
            signs.append((-1) ** j)
    n = len(rows)
    S = np.zeros((len(out), n))
    S[rows, np.arange(n)] = signs
    return np.array(src, dtype=int).reshape(n, k + 1), S


def d_jet(form: Jet2, k=None):
    """Exterior derivative of a k-form jet; the result loses one jet order."""
    if not isinstance(form, Jet2):
        raise TypeError("d_jet needs a jet carrying derivatives")
    k = form.ndim if k is None else k
    d = form.dim
    if k + 1 > d:
        raise DegreeError(f"degree {k} form has no exterior derivative on a {d}-dimensional chart")
    D = jets.derivative(form)  # value axes (k form axes) + derivative axis
    src, S = _d_plan(d, k)
    gathered = D[tuple(src.T)]
    comp = jets.einsum("It,t->I", S, gathered)
    return expand(comp, k + 1, d)


def exterior_derivative(psi: FormField, p) -> np.ndarray:
    """Components of ``d psi`` at ``p``."""
    return jets.value_of(d_jet(psi.jet(p, order=1), psi.degree))


def raise_all(form, ginv):
    out = np.asarray(form, dtype=float)
    for ax in range(out.ndim):
        out = np.moveaxis(np.tensordot(ginv, out, axes=([1], [ax])), 0, ax)
    return out


def inner(psi, chi, ginv) -> float:
    """Form inner product ``<psi, chi> = (1/k!) psi_I.. chi^I..``."""
    psi = np.asarray(psi, dtype=float)
    k = psi.ndim
    return float(np.sum(psi * raise_all(chi, ginv)) / math.factorial(k))


def volume_form(g_value, orientation):
    if orientation is None:
        raise OrientationError("volume form requested on an unoriented metric")
    d = g_value.shape[0]
    comp = np.array([orientation * math.sqrt(np.linalg.det(g_value))])
    return expand(comp, d, d)


def top_component(form) -> float:
    """The ``[0, 1, ..., d-1]`` component of a top-degree form."""
    a = np.asarray(form, dtype=float)
    return float(a[tuple(range(a.ndim))])


@lru_cache(maxsize=None)
def _star_plan(d, k):
    Ks = _combos(d, d - k)
    Is = []
    signs = []
    for K in Ks:
        I = [i for i in range(d) if i not in K]
        Is.append(I)
        signs.append(_perm_sign(I + list(K)))
    return np.array(Is, dtype=int).reshape(len(Ks), k), np.array(signs, dtype=float)


def hodge_star(psi, g_value, orientation):
    """Hodge star with ``psi ^ *chi = <psi, chi> vol``."""
    if orientation is None:
        raise OrientationError("hodge star needs an oriented metric")
    psi = np.asarray(psi, dtype=float)
    k = psi.ndim
    d = g_value.shape[0]
    if k > d:
        raise DegreeError(f"degree {k} exceeds chart dimension {d}")
    ginv = np.linalg.inv(g_value)
    up = raise_all(psi, ginv)
    vol = orientation * math.sqrt(np.linalg.det(g_value))
    if k == 0:
        up_c = np.array([float(up)])
    else:
        up_c = up[tuple(_combos(d, k).T)]
    Is, signs = _star_plan(d, k)
    # map each complement multi-index I to its position among sorted k-combos
    lookup = {tuple(c): n for n, c in enumerate(_combos(d, k))}
    idx = np.array([lookup[tuple(I)] for I in Is], dtype=int)
    comp = vol * signs * up_c[idx]
    return expand(comp, d - k, d)


def interior(v, form):
    """Contraction ``iota_v form`` in the first slot."""
    return jets.einsum("i,i...->...", v, form)


def metric_contraction(Omega, dOmega, ginv):
    """The 1-form ``Z -> 1/2 g^ia g^jb Omega_ab (dOmega)_ijZ``.

    Accepts plain arrays or jets for any argument.
    """
    up = jets.einsum("ia,jb,ab->ij", ginv, ginv, Omega)
    return 0.5 * jets.einsum("ij,ijz->z", up, dOmega)


def form_algebra(op, *args, **kw):
    """Dispatch by name: ``wedge``, ``hodge_star`` or ``metric_contraction``."""
    table = {"wedge": wedge, "hodge_star": hodge_star, "metric_contraction": metric_contraction}
    try:
        fn = table[op]
    except KeyError:
        raise ValueError(f"unknown form operation {op!r}") from None
    return fn(*args, **kw)


def antisymmetry_residual(form) -> float:
    a = np.asarray(form, dtype=float)
    worst = 0.0
    for i in range(a.ndim - 1):
        worst = max(worst, float(np.max(np.abs(a + np.swapaxes(a, i, i + 1)), initial=0.0)))
    return worst
