"""Truncated multivariate Taylor arithmetic.

A :class:`Jet` stores the Taylor coefficients of a (possibly tensor-valued)
function around a base point, in centered coordinates ``u = x - p``.  The
coefficient axis is always the last axis; any leading axes are tensor
indices.  Monomials are graded by total degree, so the coefficients of a
lower-order truncation form a prefix of the coefficient axis.

Differentiation lowers the order by one: the result knows nothing about the
top-degree terms it would need, and mixed-order arithmetic truncates to the
lowest order involved.
"""

from __future__ import annotations

import cmath
import functools
import itertools
import math
from typing import Callable, Sequence

import numpy as np


class JetOrderError(ValueError):
    """Requested a derivative beyond the retained order."""


class JetSingularityError(ZeroDivisionError):
    """Division by a jet whose constant term vanishes."""


class DomainError(ValueError):
    """Evaluation point lies outside the chart domain."""


@functools.lru_cache(maxsize=None)
def monomials(nvars: int, order: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for deg in range(order + 1):
        for combo in itertools.combinations_with_replacement(range(nvars), deg):
            e = [0] * nvars
            for v in combo:
                e[v] += 1
            out.append(tuple(e))
    return tuple(out)


@functools.lru_cache(maxsize=None)
def _index(nvars: int, order: int) -> dict:
    return {m: k for k, m in enumerate(monomials(nvars, order))}


def ncoeffs(nvars: int, order: int) -> int:
    return math.comb(nvars + order, order)


@functools.lru_cache(maxsize=None)
def _product_table(nvars: int, order: int):
    mons = monomials(nvars, order)
    idx = _index(nvars, order)
    left, right, target = [], [], []
    for i, a in enumerate(mons):
        da = sum(a)
        for j, b in enumerate(mons):
            if da + sum(b) > order:
                continue
            left.append(i)
            right.append(j)
            target.append(idx[tuple(x + y for x, y in zip(a, b))])
    scatter = np.zeros((len(target), len(mons)))
    scatter[np.arange(len(target)), target] = 1.0
    return np.array(left), np.array(right), scatter


@functools.lru_cache(maxsize=None)
def _grad_table(nvars: int, order: int):
    # d/du_v of sum c_g u^g: coefficient at g is (g_v + 1) * c_{g + e_v}
    lower = monomials(nvars, order - 1)
    idx = _index(nvars, order)
    src = np.zeros((nvars, len(lower)), dtype=int)
    fac = np.zeros((nvars, len(lower)))
    for v in range(nvars):
        for k, g in enumerate(lower):
            up = list(g)
            up[v] += 1
            src[v, k] = idx[tuple(up)]
            fac[v, k] = g[v] + 1
    return src, fac


class Jet:
    """Truncated Taylor expansion with optional leading tensor axes."""

    __array_priority__ = 100

    def __init__(self, coeffs, nvars: int, order: int):
        coeffs = np.asarray(coeffs)
        if coeffs.dtype.kind not in "fc":
            coeffs = coeffs.astype(float)
        if coeffs.shape[-1] != ncoeffs(nvars, order):
            raise ValueError(
                f"coefficient axis has length {coeffs.shape[-1]}, "
                f"expected {ncoeffs(nvars, order)} for nvars={nvars}, order={order}"
            )
        self.coeffs = coeffs
        self.nvars = nvars
        self.order = order

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, value, nvars: int, order: int) -> "Jet":
        value = np.asarray(value)
        c = np.zeros(value.shape + (ncoeffs(nvars, order),), dtype=np.result_type(value, float))
        c[..., 0] = value
        return cls(c, nvars, order)

    @classmethod
    def variable(cls, index: int, point: Sequence[float], order: int) -> "Jet":
        nvars = len(point)
        c = np.zeros(ncoeffs(nvars, order))
        c[0] = point[index]
        if order >= 1:
            c[1 + index] = 1.0
        return cls(c, nvars, order)

    @classmethod
    def variables(cls, point: Sequence[float], order: int) -> list["Jet"]:
        return [cls.variable(i, point, order) for i in range(len(point))]

    # views --------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.coeffs.shape[:-1]

    @property
    def value(self):
        v = self.coeffs[..., 0]
        return v if v.ndim else v.item()

    @property
    def dtype(self):
        return self.coeffs.dtype

    def __getitem__(self, key) -> "Jet":
        if not isinstance(key, tuple):
            key = (key,)
        tail = (slice(None),) if any(k is Ellipsis for k in key) else (Ellipsis,)
        return Jet(self.coeffs[key + tail], self.nvars, self.order)

    def __len__(self):
        return self.shape[0]

    def __iter__(self):
        for k in range(len(self)):
            yield self[k]

    def __repr__(self):
        return f"Jet(shape={self.shape}, nvars={self.nvars}, order={self.order}, value={self.value!r})"

    def truncate(self, order: int) -> "Jet":
        if order > self.order:
            raise JetOrderError(f"cannot raise order {self.order} to {order}")
        if order == self.order:
            return self
        return Jet(self.coeffs[..., : ncoeffs(self.nvars, order)], self.nvars, order)

    def conj(self) -> "Jet":
        return Jet(np.conj(self.coeffs), self.nvars, self.order)

    @property
    def real(self) -> "Jet":
        return Jet(self.coeffs.real, self.nvars, self.order)

    @property
    def imag(self) -> "Jet":
        return Jet(self.coeffs.imag, self.nvars, self.order)

    def transpose(self, *axes) -> "Jet":
        axes = axes or tuple(reversed(range(len(self.shape))))
        return Jet(np.transpose(self.coeffs, tuple(axes) + (len(self.shape),)), self.nvars, self.order)

    @property
    def T(self) -> "Jet":
        return self.transpose()

    def sum(self, axis=None) -> "Jet":
        if axis is None:
            axis = tuple(range(len(self.shape)))
        return Jet(self.coeffs.sum(axis=axis), self.nvars, self.order)

    # calculus -----------------------------------------------------------

    def grad(self) -> "Jet":
        """Partial derivatives, appended as a new last tensor axis."""
        if self.order == 0:
            raise JetOrderError("cannot differentiate an order-0 jet")
        src, fac = _grad_table(self.nvars, self.order)
        return Jet(self.coeffs[..., src] * fac, self.nvars, self.order - 1)

    def partial(self, var: int) -> "Jet":
        return self.grad()[(Ellipsis, var)]

    # arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.nvars != self.nvars:
                raise ValueError("jets over different variable counts")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        return self, Jet.constant(other, self.nvars, self.order)

    def __add__(self, other):
        a, b = self._coerce(other)
        return Jet(a.coeffs + b.coeffs, a.nvars, a.order)

    __radd__ = __add__

    def __sub__(self, other):
        a, b = self._coerce(other)
        return Jet(a.coeffs - b.coeffs, a.nvars, a.order)

    def __rsub__(self, other):
        a, b = self._coerce(other)
        return Jet(b.coeffs - a.coeffs, a.nvars, a.order)

    def __neg__(self):
        return Jet(-self.coeffs, self.nvars, self.order)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            other = np.asarray(other)
            return Jet(self.coeffs * other[..., None], self.nvars, self.order)
        a, b = self._coerce(other)
        left, right, scatter = _product_table(a.nvars, a.order)
        return Jet((a.coeffs[..., left] * b.coeffs[..., right]) @ scatter, a.nvars, a.order)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other))
        return self * reciprocal(other)

    def __rtruediv__(self, other):
        return reciprocal(self) * other

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return compose(self, lambda t, n: _power_derivs(t, n, k))
        out = Jet.constant(np.ones(self.shape), self.nvars, self.order)
        for _ in range(k):
            out = out * self
        return out


def _power_derivs(t, order, k):
    if t == 0 and (k < order and k != int(k) or k < 0):
        raise JetSingularityError(f"power {k} of a jet with zero constant term")
    out = []
    c = 1.0
    for j in range(order + 1):
        out.append(c * t ** (k - j))
        c *= k - j
    return out




def einsum(subscripts: str, *operands):
    """``numpy.einsum`` over tensor axes with Taylor convolution on coefficients.

    Operands may be jets or plain arrays (treated as constants).  Operands are
    combined left to right; an index is summed as soon as neither the output
    nor a later operand needs it.
    """
    ins, out = subscripts.replace(" ", "").split("->")
    ins = ins.split(",")
    if len(ins) != len(operands):
        raise ValueError("operand count does not match subscripts")
    ell = ["..." in s for s in ins]
    ins = [s.replace("...", "") for s in ins]
    out = out.replace("...", "")
    acc, acc_sub, acc_ell = operands[0], ins[0], ell[0]
    for k in range(1, len(operands)):
        needed = set(out).union(*ins[k + 1 :])
        acc, acc_sub = _einsum2(acc, acc_sub, acc_ell, operands[k], ins[k], ell[k], needed)
        acc_ell = acc_ell or ell[k]
    e = "..." if acc_ell else ""
    if isinstance(acc, Jet):
        return Jet(np.einsum(f"{e}{acc_sub}Z->{e}{out}Z", acc.coeffs), acc.nvars, acc.order)
    return np.einsum(f"{e}{acc_sub}->{e}{out}", acc)


def _einsum2(a, a_sub, a_ell, b, b_sub, b_ell, needed):
    o = "".join(dict.fromkeys(ch for ch in a_sub + b_sub if ch in needed))
    ea = "..." if a_ell else ""
    eb = "..." if b_ell else ""
    eo = "..." if a_ell or b_ell else ""
    aj, bj = isinstance(a, Jet), isinstance(b, Jet)
    if not aj and not bj:
        return np.einsum(f"{ea}{a_sub},{eb}{b_sub}->{eo}{o}", a, b), o
    if aj and not bj:
        c = np.einsum(f"{ea}{a_sub}Z,{eb}{b_sub}->{eo}{o}Z", a.coeffs, b)
        return Jet(c, a.nvars, a.order), o
    if bj and not aj:
        c = np.einsum(f"{ea}{a_sub},{eb}{b_sub}Z->{eo}{o}Z", a, b.coeffs)
        return Jet(c, b.nvars, b.order), o
    a, b = a._coerce(b)
    left, right, scatter = _product_table(a.nvars, a.order)
    prod = np.einsum(
        f"{ea}{a_sub}Z,{eb}{b_sub}Z->{eo}{o}Z", a.coeffs[..., left], b.coeffs[..., right]
    )
    return Jet(prod @ scatter, a.nvars, a.order), o


def stack(items, nvars: int | None = None, order: int | None = None) -> Jet:
    """Assemble scalars and jets (nested sequences allowed) into one tensor jet."""
    flat, shape = _flatten(items)
    jets = [x for x in flat if isinstance(x, Jet)]
    if jets:
        nvars = jets[0].nvars
        order = min(j.order for j in jets)
    if nvars is None or order is None:
        raise ValueError("need nvars and order when no element is a jet")
    rows = [
        x.truncate(order).coeffs if isinstance(x, Jet) else Jet.constant(x, nvars, order).coeffs
        for x in flat
    ]
    dtype = np.result_type(*rows)
    arr = np.stack([r.astype(dtype) for r in rows]).reshape(shape + (ncoeffs(nvars, order),))
    return Jet(arr, nvars, order)


def _flatten(items):
    if isinstance(items, Jet) or np.ndim(items) == 0:
        return [items], ()
    parts = [_flatten(x) for x in items]
    shapes = {p[1] for p in parts}
    if len(shapes) != 1:
        raise ValueError("ragged nested sequence")
    return [x for p in parts for x in p[0]], (len(parts),) + shapes.pop()


# analytic composition ------------------------------------------------------

Kernel = Callable[[complex, int], Sequence]


def compose(a: Jet, kernel: Kernel) -> Jet:
    """Apply a univariate analytic function elementwise.

    ``kernel(t0, order)`` returns ``[f(t0), f'(t0), ..., f^(order)(t0)]``.
    """
    a0 = a.coeffs[..., 0]
    delta = Jet(a.coeffs.copy(), a.nvars, a.order)
    delta.coeffs[..., 0] = 0
    derivs = np.array([kernel(t, a.order) for t in np.ravel(a0)])
    derivs = derivs.reshape(a0.shape + (a.order + 1,))
    out = Jet.constant(derivs[..., 0], a.nvars, a.order)
    power = None
    fact = 1.0
    for k in range(1, a.order + 1):
        power = delta if power is None else power * delta
        fact *= k
        out = out + power * (derivs[..., k] / fact)
    return out


def _recip_kernel(t, order):
    if t == 0:
        raise JetSingularityError("division by a jet with zero constant term")
    return [(-1) ** k * math.factorial(k) / t ** (k + 1) for k in range(order + 1)]


def reciprocal(b: Jet) -> Jet:
    return compose(b, _recip_kernel)


def _exp_kernel(t, order):
    return [np.exp(t)] * (order + 1)


def _sin_kernel(t, order):
    cyc = [np.sin(t), np.cos(t), -np.sin(t), -np.cos(t)]
    return [cyc[k % 4] for k in range(order + 1)]


def _cos_kernel(t, order):
    cyc = [np.cos(t), -np.sin(t), -np.cos(t), np.sin(t)]
    return [cyc[k % 4] for k in range(order + 1)]


def _log_kernel(t, order):
    if t == 0:
        raise JetSingularityError("log of a jet with zero constant term")
    return [np.log(t)] + [(-1) ** (k - 1) * math.factorial(k - 1) / t**k for k in range(1, order + 1)]


def _sqrt_kernel(t, order):
    return _power_derivs(t, order, 0.5)


KERNELS: dict[str, Kernel] = {
    "exp": _exp_kernel,
    "sin": _sin_kernel,
    "cos": _cos_kernel,
    "log": _log_kernel,
    "sqrt": _sqrt_kernel,
}


def _dispatch(name, plain):
    def f(x):
        if isinstance(x, Jet):
            return compose(x, KERNELS[name])
        return plain(x)

    f.__name__ = name
    return f


exp = _dispatch("exp", np.exp)
sin = _dispatch("sin", np.sin)
cos = _dispatch("cos", np.cos)
log = _dispatch("log", np.log)
sqrt = _dispatch("sqrt", np.sqrt)


def inv(m: Jet) -> Jet:
    """Inverse of a square-matrix jet.

    Neumann series around the constant term; exact at the retained order
    since the non-constant part is nilpotent under truncation.
    """
    m0inv = np.linalg.inv(m.coeffs[..., 0])
    delta = Jet(m.coeffs.copy(), m.nvars, m.order)
    delta.coeffs[..., 0] = 0
    step = -einsum("ab,bc->ac", m0inv, delta)
    out = Jet.constant(m0inv, m.nvars, m.order)
    term = out
    for _ in range(m.order):
        term = einsum("ab,bc->ac", step, term)
        out = out + term
    return out


# public surface -------------------------------------------------------------


def check_domain(point, domain) -> None:
    if len(point) != len(domain):
        raise DomainError(f"point has {len(point)} coordinates, chart has {len(domain)}")
    for k, (x, (lo, hi)) in enumerate(zip(point, domain)):
        if not lo <= x <= hi:
            raise DomainError(f"coordinate {k} = {x} outside [{lo}, {hi}]")


def jet_lift(field: Callable, point: Sequence[float], order: int = 3, domain=None) -> Jet:
    """Taylor expansion of ``field`` at ``point`` up to ``order``.

    ``field`` takes a sequence of coordinates and must only use operations
    that accept jets (arithmetic and the functions of this module).  A
    sequence result is stacked into a tensor jet.
    """
    if order < 0:
        raise JetOrderError("order must be non-negative")
    point = [float(x) for x in point]
    if domain is not None:
        check_domain(point, domain)
    out = field(Jet.variables(point, order))
    if isinstance(out, Jet):
        return out
    if isinstance(out, (list, tuple)) or np.ndim(out) > 0:
        return stack(out, len(point), order)
    return Jet.constant(out, len(point), order)


def jet_arith(a: Jet, b, op: str) -> Jet:
    """Binary jet operation; for ``op="compose"``, ``b`` is a kernel or a kernel name."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "compose":
        return compose(a, KERNELS[b] if isinstance(b, str) else b)
    raise ValueError(f"unknown jet operation {op!r}")


def extract_partial(j: Jet, multi_index: Sequence[int]):
    """Mixed partial derivative at the base point for an exponent tuple."""
    multi_index = tuple(int(k) for k in multi_index)
    if len(multi_index) != j.nvars:
        raise ValueError(f"multi-index has length {len(multi_index)}, jet has {j.nvars} variables")
    deg = sum(multi_index)
    if deg > j.order:
        raise JetOrderError(f"degree {deg} exceeds jet order {j.order}")
    k = _index(j.nvars, j.order)[multi_index]
    v = j.coeffs[..., k] * math.prod(math.factorial(e) for e in multi_index)
    return v if v.ndim else v.item()
