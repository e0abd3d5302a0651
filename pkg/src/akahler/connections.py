"""Levi-Civita and Hermitian connections and the tensors built from them.

Index conventions (all arrays are coordinate components at one point, or
jets of them around that point):

* ``gamma[a, b, c]``: ``nabla_{d_b} d_c = gamma[a, b, c] d_a``.  The first
  lower index is the differentiation direction; this matters for the
  non-symmetric Hermitian coefficients.
* A trailing index on a derivative array is always the direction:
  ``nabla_J[a, b, c] = (nabla_{d_c} J)^a_b``.
* ``R(X, Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z`` and
  ``R(X, Y, Z, W) = g(R(X, Y)Z, W)``; ``riemann4[b, c, d, e]`` is
  ``R(d_b, d_c, d_d, d_e)``.

Complex arguments are handled by complex-bilinear extension; ``g`` is never
conjugated implicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import jets
from .charts import AlmostKahlerChart, StructureError, TangentVector, bracket_jets, lift_vector
from .jets import Jet

DEFAULT_ORDER = 3


@dataclass(frozen=True)
class ConnectionCoefficients:
    point: np.ndarray
    gamma: np.ndarray
    kind: str = "levi-civita"

    def torsion(self) -> np.ndarray:
        """``T[a, b, c] = gamma[a, b, c] - gamma[a, c, b]``."""
        return self.gamma - self.gamma.transpose(0, 2, 1)


@dataclass(frozen=True)
class TensorValue:
    point: np.ndarray
    signature: tuple[str, ...]
    components: np.ndarray

    def __post_init__(self):
        if self.components.ndim != len(self.signature):
            raise ValueError("component rank does not match signature")


def cov_jet(T: Jet, signature: Sequence[str], gamma: Jet) -> Jet:
    """Covariant derivative of a tensor jet; direction appended as last index.

    ``signature`` lists each tensor slot as ``"u"`` (contravariant) or
    ``"d"`` (covariant).  Leading batch axes beyond the signature are allowed.
    """
    rank = len(signature)
    out = T.grad()
    letters = "abcdefgh"[:rank]
    batch = len(T.shape) - rank
    ell = "..." if batch else ""
    for k, kind in enumerate(signature):
        src = letters[:k] + "y" + letters[k + 1 :]
        if kind == "u":
            term = jets.einsum(f"{letters[k]}zy,{ell}{src}->{ell}{letters}z", gamma, T)
            out = out + term
        elif kind == "d":
            term = jets.einsum(f"yz{letters[k]},{ell}{src}->{ell}{letters}z", gamma, T)
            out = out - term
        else:
            raise ValueError(f"slot kind must be 'u' or 'd', got {kind!r}")
    return out


def cov_vector(V: Jet, gamma: Jet) -> Jet:
    """``D[..., a, c] = d_c V^a + gamma[a, c, e] V^e`` for (batched) vector jets."""
    return V.grad() + jets.einsum("ace,...e->...ac", gamma, V)


def curvature_jet(gamma: Jet) -> Jet:
    """``Rm[a, d, b, c]``: component ``a`` of ``R(d_b, d_c) d_d``."""
    dG = gamma.grad()  # [a, c, d, b] = d_b gamma[a, c, d]
    t1 = dG.transpose(0, 2, 3, 1)  # [a, d, b, c] = d_b gamma[a, c, d]
    rm = t1 - t1.transpose(0, 1, 3, 2)
    quad = jets.einsum("abe,ecd->adbc", gamma, gamma)  # gamma[a,b,e] gamma[e,c,d]
    return rm + quad - quad.transpose(0, 1, 3, 2)


class LocalGeometry:
    """Jets of every structure field around one point of a chart.

    Built lazily and cached; callers should obtain instances through
    :func:`geometry` so repeated queries at one point share work.
    """

    def __init__(self, chart: AlmostKahlerChart, point, order: int = DEFAULT_ORDER):
        if order < 2:
            raise jets.JetOrderError("curvature needs jets of order >= 2")
        self.chart = chart
        self.point = chart.check_point(point)
        self.order = order
        self.m = chart.dim

    @cached_property
    def kappa(self) -> Jet:
        return self.chart.kappa_jet(self.point, self.order)

    @cached_property
    def J(self) -> Jet:
        return self.chart.J_jet(self.point, self.order)

    @cached_property
    def g(self) -> Jet:
        return jets.einsum("ac,cb->ab", self.kappa, self.J)

    @cached_property
    def g0(self) -> np.ndarray:
        g0 = self.g.value
        asym = np.abs(g0 - g0.T).max()
        if asym > 1e-12 * max(1.0, np.abs(g0).max()):
            raise StructureError(f"{self.chart.label}: g not symmetric at {list(self.point)}")
        if np.linalg.eigvalsh((g0 + g0.T) / 2).min() <= 0:
            raise StructureError(f"{self.chart.label}: g not positive at {list(self.point)}")
        return g0

    @cached_property
    def J0(self) -> np.ndarray:
        return self.J.value

    @cached_property
    def ginv(self) -> Jet:
        self.g0  # noqa: B018 - structure check
        return jets.inv(self.g)

    @cached_property
    def gamma(self) -> Jet:
        dg = self.g.grad()  # [x, y, z] = d_z g_xy
        # gamma^a_bc = 1/2 g^ad (d_b g_dc + d_c g_bd - d_d g_bc)
        t = dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2) - dg.transpose(2, 0, 1)
        return jets.einsum("ad,dbc->abc", self.ginv, t) * 0.5

    @cached_property
    def dJ(self) -> Jet:
        return self.J.grad()  # [a, b, c] = d_c J^a_b

    @cached_property
    def nabla_J(self) -> Jet:
        return cov_jet(self.J, "ud", self.gamma)

    @cached_property
    def nijenhuis(self) -> Jet:
        """``N[a, b, c]``: component ``a`` of ``N_J(d_b, d_c)`` from partials of J."""
        J, dJ = self.J.truncate(self.order - 1), self.dJ
        t = jets.einsum("db,acd->abc", J, dJ) + jets.einsum("ad,dbc->abc", J, dJ)
        return t - t.transpose(0, 2, 1)

    @cached_property
    def B(self) -> Jet:
        """``B[a, b, c]``: component ``a`` of ``B(d_b, d_c) = J(nabla_b J)d_c - (nabla_{J d_b} J)d_c``."""
        nJ = self.nabla_J
        return jets.einsum("ae,ecb->abc", self.J, nJ) - jets.einsum("db,acd->abc", self.J, nJ)

    @cached_property
    def nabla_B(self) -> Jet:
        return cov_jet(self.B, "udd", self.gamma)

    @cached_property
    def nabla_N(self) -> Jet:
        return cov_jet(self.nijenhuis, "udd", self.gamma)

    @cached_property
    def hermitian_gamma(self) -> Jet:
        # nabla~_b d_c = nabla_b d_c - 1/2 J (nabla_b J) d_c
        return self.gamma - jets.einsum("ae,ecb->abc", self.J, self.nabla_J) * 0.5

    @cached_property
    def riemann_op(self) -> Jet:
        return curvature_jet(self.gamma)

    @cached_property
    def hermitian_riemann_op(self) -> Jet:
        return curvature_jet(self.hermitian_gamma)

    @cached_property
    def riemann4(self) -> np.ndarray:
        return np.einsum("ea,adbc->bcde", self.g0, self.riemann_op.value)

    @cached_property
    def hermitian_riemann4(self) -> np.ndarray:
        return np.einsum("ea,adbc->bcde", self.g0, self.hermitian_riemann_op.value)

    @cached_property
    def L4(self) -> np.ndarray:
        """``L[x, y, z, w] = g((nabla_x B)(d_y, d_z), d_w)``."""
        return np.einsum("wa,ayzx->xyzw", self.g0, self.nabla_B.value)

    @cached_property
    def nabla_J0(self) -> np.ndarray:
        return self.nabla_J.value

    @cached_property
    def N0(self) -> np.ndarray:
        return self.nijenhuis.value

    @cached_property
    def B0(self) -> np.ndarray:
        return self.B.value


@lru_cache(maxsize=512)
def _geometry(chart: AlmostKahlerChart, key: tuple, order: int) -> LocalGeometry:
    return LocalGeometry(chart, np.array(key), order)


def geometry(chart: AlmostKahlerChart, p, order: int = DEFAULT_ORDER) -> LocalGeometry:
    p = chart.check_point(p)
    return _geometry(chart, tuple(float(x) for x in p), order)


def _value(v):
    if isinstance(v, Jet):
        return np.asarray(v.value)
    if isinstance(v, TangentVector):
        return np.asarray(v.components)
    return np.asarray(v)


def pointwise(X, p, chart: AlmostKahlerChart) -> np.ndarray:
    """Value at ``p`` of a vector argument given as field, jet, or components."""
    if callable(X) and not isinstance(X, (Jet, TangentVector)):
        return np.asarray(lift_vector(X, p, 0).value)
    return _value(X)


def gpair(g0: np.ndarray, u, v):
    """Complex-bilinear ``g(u, v)``; batched over leading axes."""
    return np.einsum("...a,ab,...b->...", u, g0, v)


def gnorm(g0: np.ndarray, v) -> np.ndarray:
    """Hermitian length ``sqrt(g(v, conj v))``."""
    return np.sqrt(np.abs(gpair(g0, v, np.conj(v))))


# operations -----------------------------------------------------------------


def christoffel(chart: AlmostKahlerChart, p, order: int = DEFAULT_ORDER) -> ConnectionCoefficients:
    geo = geometry(chart, p, order)
    return ConnectionCoefficients(geo.point, geo.gamma.value, "levi-civita")


def hermitian_connection(chart: AlmostKahlerChart, p, order: int = DEFAULT_ORDER) -> ConnectionCoefficients:
    """Coefficients of ``nabla - 1/2 J nabla J``."""
    geo = geometry(chart, p, order)
    return ConnectionCoefficients(geo.point, geo.hermitian_gamma.value, "hermitian")


def covariant_derivative(
    chart: AlmostKahlerChart, p, X, T, signature: Sequence[str], connection: str = "levi-civita",
    order: int = DEFAULT_ORDER,
) -> TensorValue:
    """``(nabla_X T)(p)`` for a tensor field ``T`` (callable returning nested components, or a jet)."""
    geo = geometry(chart, p, order)
    gamma = geo.gamma if connection == "levi-civita" else geo.hermitian_gamma
    Tj = T if isinstance(T, Jet) else jets.jet_lift(T, geo.point, order)
    D = cov_jet(Tj, signature, gamma).value
    x = pointwise(X, geo.point, chart)
    return TensorValue(geo.point, tuple(signature), np.tensordot(D, x, axes=([-1], [0])))


def nijenhuis(chart: AlmostKahlerChart, p, X, Y, order: int = 2) -> TangentVector:
    """``[JX, JY] - J[JX, Y] - J[X, JY] - [X, Y]`` at ``p`` from the fields' brackets."""
    p = chart.check_point(p)
    Xj, Yj = lift_vector(X, p, order), lift_vector(Y, p, order)
    J = chart.J_jet(p, order)
    return TangentVector(p, np.asarray(_nijenhuis_fields(J, Xj, Yj).value))


def _nijenhuis_fields(J: Jet, X: Jet, Y: Jet) -> Jet:
    JX = jets.einsum("ab,...b->...a", J, X)
    JY = jets.einsum("ab,...b->...a", J, Y)
    Jt = J.truncate(min(J.order, X.order, Y.order) - 1)
    return (
        bracket_jets(JX, JY)
        - jets.einsum("ab,...b->...a", Jt, bracket_jets(JX, Y))
        - jets.einsum("ab,...b->...a", Jt, bracket_jets(X, JY))
        - bracket_jets(X, Y)
    )


def riemann(chart: AlmostKahlerChart, p, X, Y, Z, W, order: int = DEFAULT_ORDER):
    geo = geometry(chart, p, order)
    args = [pointwise(v, geo.point, chart) for v in (X, Y, Z, W)]
    return _scalar(np.einsum("bcde,b,c,d,e->", geo.riemann4, *args))


def hermitian_curvature(chart: AlmostKahlerChart, p, X, Y, Z, W, order: int = DEFAULT_ORDER):
    """Curvature of the Hermitian connection, computed from its own coefficients."""
    geo = geometry(chart, p, order)
    args = [pointwise(v, geo.point, chart) for v in (X, Y, Z, W)]
    return _scalar(np.einsum("bcde,b,c,d,e->", geo.hermitian_riemann4, *args))


def sekigawa_curvature(chart: AlmostKahlerChart, p, X, Y, Z, W, order: int = DEFAULT_ORDER):
    """Hermitian curvature through the Levi-Civita curvature and ``nabla J``.

    ``1/2 R(X,Y,Z,W) + 1/2 R(X,Y,JZ,JW)
    - 1/4 g((nabla_X J)(nabla_Y J)Z - (nabla_Y J)(nabla_X J)Z, W)``
    """
    geo = geometry(chart, p, order)
    x, y, z, w = (pointwise(v, geo.point, chart) for v in (X, Y, Z, W))
    return _scalar(sekigawa_array(geo, x, y, z, w))


def sekigawa_array(geo: LocalGeometry, x, y, z, w):
    J0, R4, nJ = geo.J0, geo.riemann4, geo.nabla_J0
    Jz, Jw = z @ J0.T, w @ J0.T
    r1 = np.einsum("bcde,...b,...c,...d,...e->...", R4, x, y, z, w)
    r2 = np.einsum("bcde,...b,...c,...d,...e->...", R4, x, y, Jz, Jw)
    nx = np.einsum("abc,...c->...ab", nJ, x)
    ny = np.einsum("abc,...c->...ab", nJ, y)
    v = np.einsum("...ab,...bc,...c->...a", nx, ny, z) - np.einsum("...ab,...bc,...c->...a", ny, nx, z)
    return 0.5 * r1 + 0.5 * r2 - 0.25 * gpair(geo.g0, v, w)


def B_tensor(chart: AlmostKahlerChart, p, X, Y, order: int = DEFAULT_ORDER) -> TangentVector:
    """``B(X, Y) = J(nabla_X J)Y - (nabla_{JX} J)Y``."""
    geo = geometry(chart, p, order)
    x, y = (pointwise(v, geo.point, chart) for v in (X, Y))
    return TangentVector(geo.point, np.einsum("abc,b,c->a", geo.B0, x, y))


def L_tensor(chart: AlmostKahlerChart, p, X, Y, Z, W, order: int = DEFAULT_ORDER):
    """``L(X, Y, Z, W) = g((nabla_X B)(Y, Z), W)``."""
    geo = geometry(chart, p, order)
    args = [pointwise(v, geo.point, chart) for v in (X, Y, Z, W)]
    return _scalar(np.einsum("xyzw,x,y,z,w->", geo.L4, *args))


def RJ_tensor(chart: AlmostKahlerChart, p, X, Y, Z, W, order: int = DEFAULT_ORDER):
    """``g(nabla_X(J nabla_Y Z) - nabla_Y(J nabla_X Z) - nabla_[X,Y](JZ), JW)``.

    Not tensorial in general: ``X``, ``Y``, ``Z`` are used as fields (their
    derivatives at ``p`` enter), ``W`` only through its value.
    """
    geo = geometry(chart, p, order)
    Xj, Yj, Zj = (lift_vector(v, geo.point, order) for v in (X, Y, Z))
    w = pointwise(W, geo.point, chart)
    return _scalar(rj_fields(geo, Xj, Yj, Zj, w))


def rj_fields(geo: LocalGeometry, X: Jet, Y: Jet, Z: Jet, w) -> np.ndarray:
    """Batched R^J: leading axes of the jets and of ``w`` broadcast together."""
    J, gamma = geo.J, geo.gamma
    DZ = cov_vector(Z, gamma)
    nYZ = jets.einsum("...ac,...c->...a", DZ, Y)
    nXZ = jets.einsum("...ac,...c->...a", DZ, X)
    JnYZ = jets.einsum("ab,...b->...a", J, nYZ)
    JnXZ = jets.einsum("ab,...b->...a", J, nXZ)
    t1 = jets.einsum("...ac,...c->...a", cov_vector(JnYZ, gamma), X).value
    t2 = jets.einsum("...ac,...c->...a", cov_vector(JnXZ, gamma), Y).value
    JZ = jets.einsum("ab,...b->...a", J, Z)
    XY = bracket_jets(X, Y)
    t3 = jets.einsum("...ac,...c->...a", cov_vector(JZ, gamma), XY).value
    Jw = np.einsum("ab,...b->...a", geo.J0, w)
    return gpair(geo.g0, t1 - t2 - t3, Jw)


def hermitian_torsion(chart: AlmostKahlerChart, p, X, Y, order: int = DEFAULT_ORDER) -> TangentVector:
    """``nabla~_X Y - nabla~_Y X - [X, Y]`` at ``p`` (tensorial)."""
    geo = geometry(chart, p, order)
    x, y = (pointwise(v, geo.point, chart) for v in (X, Y))
    G = geo.hermitian_gamma.value
    T = G - G.transpose(0, 2, 1)
    return TangentVector(geo.point, np.einsum("abc,b,c->a", T, x, y))


def bisectional(chart: AlmostKahlerChart, p, sigma1, sigma2, which: str = "riemannian",
                order: int = DEFAULT_ORDER):
    """``R(v, Jv, w, Jw)`` (or the Hermitian curvature) for two J-invariant planes."""
    geo = geometry(chart, p, order)
    v, w = _plane_vector(geo, sigma1), _plane_vector(geo, sigma2)
    R4 = geo.riemann4 if which == "riemannian" else geo.hermitian_riemann4
    if which not in ("riemannian", "hermitian"):
        raise ValueError("which must be 'riemannian' or 'hermitian'")
    return float(np.einsum("bcde,b,c,d,e->", R4, v, geo.J0 @ v, w, geo.J0 @ w))


def _plane_vector(geo: LocalGeometry, plane) -> np.ndarray:
    v = np.asarray(getattr(plane, "v", plane), dtype=float)
    norm = np.sqrt(v @ geo.g0 @ v)
    return v / norm


def _scalar(x):
    x = complex(x)
    return x.real if x.imag == 0 else x
