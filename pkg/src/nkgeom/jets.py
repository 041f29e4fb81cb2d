"""Second-order forward-mode differentiation.

A :class:`Jet2` bundles a value with its gradient and Hessian with respect to
the ``d`` chart coordinates.  The value may be a scalar or an array of any
shape ``S``; the gradient then has shape ``S + (d,)`` and the Hessian
``S + (d, d)``.  Array-valued jets are how metric components, forms and
tensor fields travel through the engine: one jet holds all components.

A jet whose ``hess`` is ``None`` is first order.  Such jets appear when a
derivative of a second-order jet is taken (see :func:`derivative`), e.g. the
exterior derivative of a 2-form carried with its own first derivatives.
"""

from __future__ import annotations

import math
import string

import numpy as np

from .errors import JetDimensionError, JetDomainError

__all__ = [
    "Jet2",
    "seed",
    "lift_coordinate",
    "constant",
    "const_like",
    "value_of",
    "sin",
    "cos",
    "tan",
    "sinh",
    "cosh",
    "tanh",
    "exp",
    "log",
    "sqrt",
    "atan",
    "einsum",
    "stack",
    "inv",
    "derivative",
    "truncate",
    "linear",
    "jet_arith",
    "jet_apply",
]


class Jet2:
    """Value, gradient and Hessian of a (possibly array-valued) quantity."""

    __slots__ = ("value", "grad", "hess")
    # make ``ndarray <op> Jet2`` defer to the reflected Jet2 operator
    __array_ufunc__ = None

    def __init__(self, value, grad, hess=None):
        self.value = np.asarray(value, dtype=float)
        self.grad = np.asarray(grad, dtype=float)
        self.hess = None if hess is None else np.asarray(hess, dtype=float)

    # -- shape bookkeeping -------------------------------------------------
    @property
    def dim(self) -> int:
        return self.grad.shape[-1]

    @property
    def shape(self):
        return self.value.shape

    @property
    def ndim(self) -> int:
        return self.value.ndim

    @property
    def order(self) -> int:
        return 1 if self.hess is None else 2

    def __repr__(self):
        return f"Jet2(value={self.value!r}, dim={self.dim}, order={self.order})"

    def __len__(self):
        return len(self.value)

    # -- coercion ----------------------------------------------------------
    def _coerce(self, other):
        if isinstance(other, Jet2):
            if other.dim != self.dim:
                raise JetDimensionError(
                    f"chart dimension mismatch: {self.dim} vs {other.dim}"
                )
            return other
        c = np.asarray(other, dtype=float)
        d = self.dim
        hess = None if self.hess is None else np.zeros(c.shape + (d, d))
        return Jet2(c, np.zeros(c.shape + (d,)), hess)

    # -- arithmetic --------------------------------------------------------
    def __neg__(self):
        return Jet2(-self.value, -self.grad, None if self.hess is None else -self.hess)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            pad = np.zeros(c.shape + (1,))
            hess = None if self.hess is None else self.hess + pad[..., None]
            return Jet2(self.value + c, self.grad + pad, hess)
        o = self._coerce(other)
        hess = None if (self.hess is None or o.hess is None) else self.hess + o.hess
        return Jet2(self.value + o.value, self.grad + o.grad, hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -np.asarray(other, dtype=float))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            hess = None if self.hess is None else self.hess * c[..., None, None]
            return Jet2(self.value * c, self.grad * c[..., None], hess)
        o = self._coerce(other)
        a, b = self, o
        value = a.value * b.value
        grad = a.value[..., None] * b.grad + b.value[..., None] * a.grad
        hess = None
        if a.hess is not None and b.hess is not None:
            cross = a.grad[..., :, None] * b.grad[..., None, :]
            hess = (
                a.value[..., None, None] * b.hess
                + b.value[..., None, None] * a.hess
                + cross
                + np.swapaxes(cross, -1, -2)
            )
        return Jet2(value, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet2):
            c = np.asarray(other, dtype=float)
            if np.any(c == 0):
                raise JetDomainError("div", "division by zero")
            return self * (1.0 / c)
        return self * _reciprocal(self._coerce(other))

    def __rtruediv__(self, other):
        return _reciprocal(self) * other

    def __pow__(self, p):
        if isinstance(p, Jet2):
            return exp(p * log(self))
        p = float(p)
        v = self.value
        if p == 0.0:
            return const_like(np.ones_like(v), self)
        if p == 1.0:
            return self
        if p.is_integer():
            if p < 0 and np.any(v == 0):
                raise JetDomainError("pow", "negative power of zero")
            f0 = v**p
            f1 = p * v ** (p - 1)
            f2 = p * (p - 1) * v ** (p - 2) if p != 1 else np.zeros_like(v)
            return _chain(self, f0, f1, f2)
        if np.any(v <= 0):
            raise JetDomainError("pow", "non-integer power requires a positive base")
        return _chain(self, v**p, p * v ** (p - 1), p * (p - 1) * v ** (p - 2))

    def __rpow__(self, base):
        base = float(base)
        if base <= 0:
            raise JetDomainError("pow", "base of a jet exponent must be positive")
        return exp(self * math.log(base))

    # -- indexing and reshaping -------------------------------------------
    def __getitem__(self, idx):
        if not isinstance(idx, tuple):
            idx = (idx,)
        g = self.grad[idx + (slice(None),)]
        h = None if self.hess is None else self.hess[idx + (slice(None), slice(None))]
        return Jet2(self.value[idx], g, h)

    def sum(self, axis=None):
        nd = self.ndim
        if axis is None:
            axes = tuple(range(nd))
        else:
            axes = tuple(a % nd for a in np.atleast_1d(axis))
        hess = None if self.hess is None else self.hess.sum(axis=axes)
        return Jet2(self.value.sum(axis=axes), self.grad.sum(axis=axes), hess)

    def transpose(self, *axes):
        nd = self.ndim
        if not axes:
            axes = tuple(reversed(range(nd)))
        elif len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return linear(self, lambda a: np.transpose(a, tuple(axes) + tuple(range(nd, a.ndim))))

    @property
    def T(self):
        return self.transpose()

    def swapaxes(self, a1, a2):
        nd = self.ndim
        a1, a2 = a1 % nd, a2 % nd
        return linear(self, lambda a: np.swapaxes(a, a1, a2))

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return linear(self, lambda a: a.reshape(tuple(shape) + a.shape[self.ndim:]))


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def seed(p, order=2) -> Jet2:
    """Coordinate jet at chart point(s) ``p``.

    ``p`` has shape ``(..., d)``; leading axes are a batch of points.
    """
    p = np.asarray(p, dtype=float)
    if p.ndim == 0:
        p = p[None]
    d = p.shape[-1]
    grad = np.broadcast_to(np.eye(d), p.shape + (d,)).copy()
    hess = np.zeros(p.shape + (d, d)) if order == 2 else None
    return Jet2(p, grad, hess)


def lift_coordinate(p, i) -> Jet2:
    """The ``i``-th coordinate function as a jet at the point ``p``."""
    p = np.asarray(p, dtype=float)
    d = p.shape[-1] if p.ndim else 1
    if not 0 <= i < d:
        raise IndexError(f"coordinate index {i} out of range for chart dimension {d}")
    return seed(p)[..., i]


def constant(c, d, order=2) -> Jet2:
    c = np.asarray(c, dtype=float)
    hess = np.zeros(c.shape + (d, d)) if order == 2 else None
    return Jet2(c, np.zeros(c.shape + (d,)), hess)


def const_like(c, like: Jet2) -> Jet2:
    """Constant jet with the chart dimension and order of ``like``."""
    return constant(c, like.dim, like.order)


def value_of(x):
    return x.value if isinstance(x, Jet2) else np.asarray(x, dtype=float)


# ---------------------------------------------------------------------------
# elementary functions
# ---------------------------------------------------------------------------


def _chain(x: Jet2, f0, f1, f2) -> Jet2:
    grad = f1[..., None] * x.grad
    hess = None
    if x.hess is not None:
        hess = f1[..., None, None] * x.hess + f2[..., None, None] * (
            x.grad[..., :, None] * x.grad[..., None, :]
        )
    return Jet2(f0, grad, hess)


def _reciprocal(x: Jet2) -> Jet2:
    v = x.value
    if np.any(v == 0):
        raise JetDomainError("div", "division by zero")
    r = 1.0 / v
    return _chain(x, r, -r * r, 2.0 * r * r * r)


def _unary(name, f0, f1, f2, domain=None):
    def fn(x):
        if not isinstance(x, Jet2):
            v = np.asarray(x, dtype=float)
            if domain is not None and not np.all(domain(v)):
                raise JetDomainError(name)
            out = f0(v)
            return float(out) if out.ndim == 0 else out
        v = x.value
        if domain is not None and not np.all(domain(v)):
            raise JetDomainError(name)
        return _chain(x, f0(v), f1(v), f2(v))

    fn.__name__ = name
    fn.__doc__ = f"{name} applied to a jet (or plain number) with exact chain rule."
    return fn


sin = _unary("sin", np.sin, np.cos, lambda v: -np.sin(v))
cos = _unary("cos", np.cos, lambda v: -np.sin(v), lambda v: -np.cos(v))
tan = _unary(
    "tan",
    np.tan,
    lambda v: 1.0 / np.cos(v) ** 2,
    lambda v: 2.0 * np.tan(v) / np.cos(v) ** 2,
)
sinh = _unary("sinh", np.sinh, np.cosh, np.sinh)
cosh = _unary("cosh", np.cosh, np.sinh, np.cosh)
tanh = _unary(
    "tanh",
    np.tanh,
    lambda v: 1.0 / np.cosh(v) ** 2,
    lambda v: -2.0 * np.tanh(v) / np.cosh(v) ** 2,
)
exp = _unary("exp", np.exp, np.exp, np.exp)
log = _unary("ln", np.log, lambda v: 1.0 / v, lambda v: -1.0 / v**2, domain=lambda v: v > 0)
sqrt = _unary(
    "sqrt",
    np.sqrt,
    lambda v: 0.5 / np.sqrt(v),
    lambda v: -0.25 / v**1.5,
    domain=lambda v: v > 0,
)
atan = _unary(
    "atan",
    np.arctan,
    lambda v: 1.0 / (1.0 + v * v),
    lambda v: -2.0 * v / (1.0 + v * v) ** 2,
)

_FUNCS = {
    "sin": sin,
    "cos": cos,
    "sinh": sinh,
    "cosh": cosh,
    "tanh": tanh,
    "exp": exp,
    "ln": log,
    "sqrt": sqrt,
    "atan": atan,
}


def jet_apply(fn: str, x: Jet2) -> Jet2:
    """Apply a named elementary function (``sin``, ..., ``ln``, ``sqrt``, ``atan``)."""
    try:
        return _FUNCS[fn](x)
    except KeyError:
        raise ValueError(f"unknown function {fn!r}") from None


def jet_arith(op: str, x: Jet2, y) -> Jet2:
    """Binary arithmetic by name: add, sub, mul, div, pow."""
    if op == "add":
        return x + y
    if op == "sub":
        return x - y
    if op == "mul":
        return x * y
    if op == "div":
        return x / y
    if op == "pow":
        return x**y
    raise ValueError(f"unknown operation {op!r}")


# ---------------------------------------------------------------------------
# array operations
# ---------------------------------------------------------------------------

_EXTRA = string.ascii_uppercase


def _check_dims(jets):
    dims = {j.dim for j in jets}
    if len(dims) > 1:
        raise JetDimensionError(f"chart dimension mismatch: {sorted(dims)}")
    return dims.pop()


def einsum(subscripts: str, *operands):
    """``numpy.einsum`` with the Leibniz rule applied to jet operands.

    Subscripts use lowercase letters (and optionally ``...``); uppercase
    letters are reserved for the derivative axes.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    ins = ins.split(",")
    is_jet = [isinstance(o, Jet2) for o in operands]
    vals = [value_of(o) for o in operands]
    opt = len(operands) > 2
    value = np.einsum(subscripts, *vals, optimize=opt)
    if not any(is_jet):
        return value
    jets = [o for o in operands if isinstance(o, Jet2)]
    d = _check_dims(jets)
    second = all(j.hess is not None for j in jets)

    grad = np.zeros(value.shape + (d,))
    hess = np.zeros(value.shape + (d, d)) if second else None
    for q, oq in enumerate(operands):
        if not is_jet[q]:
            continue
        sub = ins.copy()
        sub[q] = ins[q] + "Y"
        args = vals.copy()
        args[q] = oq.grad
        grad += np.einsum(",".join(sub) + "->" + out + "Y", *args, optimize=opt)
        if second:
            sub = ins.copy()
            sub[q] = ins[q] + "YZ"
            args = vals.copy()
            args[q] = oq.hess
            hess += np.einsum(",".join(sub) + "->" + out + "YZ", *args, optimize=opt)
            for r, orr in enumerate(operands):
                if r == q or not is_jet[r]:
                    continue
                sub = ins.copy()
                sub[q] = ins[q] + "Y"
                sub[r] = ins[r] + "Z"
                args = vals.copy()
                args[q] = oq.grad
                args[r] = orr.grad
                hess += np.einsum(",".join(sub) + "->" + out + "YZ", *args, optimize=opt)
    return Jet2(value, grad, hess)


def stack(items, axis=0):
    """Stack jets and/or constants along a new value axis, broadcasting shapes."""
    jets = [x for x in items if isinstance(x, Jet2)]
    if not jets:
        return np.stack([np.asarray(x, dtype=float) for x in items], axis=axis)
    d = _check_dims(jets)
    order = min(j.order for j in jets)
    lifted = [x if isinstance(x, Jet2) else constant(x, d, order) for x in items]
    if order == 1:
        lifted = [truncate(x) for x in lifted]
    shape = np.broadcast_shapes(*(x.shape for x in lifted))
    nd = len(shape)
    ax = axis if axis >= 0 else axis + nd + 1
    value = np.stack([np.broadcast_to(x.value, shape) for x in lifted], axis=ax)
    grad = np.stack([np.broadcast_to(x.grad, shape + (d,)) for x in lifted], axis=ax)
    hess = None
    if order == 2:
        hess = np.stack([np.broadcast_to(x.hess, shape + (d, d)) for x in lifted], axis=ax)
    return Jet2(value, grad, hess)


def inv(m):
    """Inverse of a (batch of) square matrix jet(s) over the last two value axes."""
    if not isinstance(m, Jet2):
        return np.linalg.inv(m)
    try:
        a = np.linalg.inv(m.value)
    except np.linalg.LinAlgError as exc:
        from .errors import SingularMetricError

        raise SingularMetricError("singular matrix in jet inverse") from exc
    # d(A^-1) = -A^-1 dA A^-1
    grad = -np.einsum("...ij,...jkY,...kl->...ilY", a, m.grad, a)
    hess = None
    if m.hess is not None:
        t = np.einsum("...ij,...jkY,...kl,...lmZ,...mn->...inYZ", a, m.grad, a, m.grad, a, optimize=True)
        hess = (
            t
            + np.swapaxes(t, -1, -2)
            - np.einsum("...ij,...jkYZ,...kl->...ilYZ", a, m.hess, a)
        )
    return Jet2(a, grad, hess)


def derivative(x: Jet2):
    """Coordinate partial derivatives of ``x`` as a new value axis (last).

    For a second-order jet the result is a first-order jet whose value is
    ``x.grad``; for a first-order jet the result is the plain gradient array.
    """
    if x.hess is None:
        return x.grad.copy()
    return Jet2(x.grad, x.hess, None)


def truncate(x):
    """Drop second-order information."""
    if not isinstance(x, Jet2) or x.hess is None:
        return x
    return Jet2(x.value, x.grad, None)


def linear(x, fn):
    """Apply a linear map acting on the leading (value) axes of ``x``.

    ``fn`` must accept an array with extra trailing axes and leave them alone.
    """
    if not isinstance(x, Jet2):
        return fn(np.asarray(x, dtype=float))
    hess = None if x.hess is None else fn(x.hess)
    return Jet2(fn(x.value), fn(x.grad), hess)
