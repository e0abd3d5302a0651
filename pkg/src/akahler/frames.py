"""(1,0)/(0,1) splitting, unitary frames and generalized normal holomorphic frames.

A generalized normal holomorphic frame at ``o`` is a (1,0)-frame
``Z_1..Z_n`` with, at ``o``,

1. ``nabla_{Z_k} conj(Z_i) = 0``
2. ``nabla_{Z_k} Z_i`` of type (0,1)
3. ``g(Z_r, conj Z_s) = delta_rs`` with vanishing differential
4. ``nabla_{Z_r} nabla_{conj Z_k} Z_i = 0``

The constructor uses the ansatz ``Z_i = P(x) V_i(x)``.  Here ``P = (1 - iJ)/2``
is the pointwise (1,0)-projector and
``V_i = W_i + (a_ik^j u^k + b_ikl^j u^k u^l / 2) W_j`` over the constant
unitary frame ``W`` at ``o``.  The stored 2-jet of every ``Z_i`` is then of
type (1,0) to second order at ``o``.  Conditions 1 and 2 fix ``a``
in closed form; condition 4 is then linear in ``b`` and solved by minimal-norm
least squares.  Condition 3 follows from 1 and 2 by metricity and is checked,
not imposed.
"""

from __future__ import annotations

import inspect
import re
import unicodedata
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import jets
from .charts import AlmostKahlerChart, StructureError
from .connections import DEFAULT_ORDER, LocalGeometry, cov_vector, geometry, gnorm, gpair
from .jets import Jet

FRAME_TOL = 1e-7


class FrameConstructionError(RuntimeError):
    """The normal-frame solve missed its tolerance."""

    def __init__(self, message: str, condition: str = "", residual: float = float("nan")):
        super().__init__(message)
        self.condition = condition
        self.residual = residual


def projector(J0: np.ndarray, part: str = "10") -> np.ndarray:
    sign = -1 if _part(part) == "10" else 1
    return 0.5 * (np.eye(len(J0)) + sign * 1j * J0)


def _part(part) -> str:
    key = str(part).replace("(", "").replace(")", "").replace(",", "").replace(" ", "")
    if key not in ("10", "01"):
        raise ValueError(f"part must be (1,0) or (0,1), got {part!r}")
    return key


def project(chart: AlmostKahlerChart, p, v, part="(1,0)") -> np.ndarray:
    """``(1 - iJ) v / 2`` for (1,0), ``(1 + iJ) v / 2`` for (0,1)."""
    J0 = chart.J_matrix(p)
    return projector(J0, part) @ np.asarray(v)


def hermitian_orthonormal_frame(chart: AlmostKahlerChart, p, order: int = DEFAULT_ORDER) -> np.ndarray:
    """Rows ``Z_r`` of type (1,0) with ``g(Z_r, conj Z_s) = delta_rs``.

    Gram-Schmidt over ``h(u, w) = g(u, conj w)`` applied to the (1,0) parts of
    the coordinate vectors in index order.
    """
    geo = geometry(chart, p, order)
    return unitary_frame(geo.g0, geo.J0)


def unitary_frame(g0: np.ndarray, J0: np.ndarray, seeds: np.ndarray | None = None) -> np.ndarray:
    m = len(g0)
    n = m // 2
    P = projector(J0, "10")
    cands = P @ (np.eye(m) if seeds is None else np.asarray(seeds).T)
    out: list[np.ndarray] = []
    for k in range(cands.shape[1]):
        v = cands[:, k].astype(complex)
        for _ in range(2):  # re-orthogonalize for stability
            for w in out:
                v = v - gpair(g0, v, np.conj(w)) * w
        norm = gnorm(g0, v)
        if norm > 1e-8:
            out.append(v / norm)
        if len(out) == n:
            return np.array(out)
    raise StructureError("could not build a (1,0) frame: rank deficiency")


def real_frame(W: np.ndarray) -> np.ndarray:
    """Orthonormal real frame ``X_1, J X_1, ..., X_n, J X_n`` from a unitary frame.

    ``Z = (X - iJX)/sqrt 2`` gives ``X = sqrt 2 Re Z`` and ``JX = -sqrt 2 Im Z``.
    """
    rows = []
    for z in W:
        rows.append(np.sqrt(2) * z.real)
        rows.append(-np.sqrt(2) * z.imag)
    return np.array(rows)


# generalized normal holomorphic frames ------------------------------------------


def _poly_jet(z0, z1, z2, point, order) -> Jet:
    """Jet of ``z0 + z1 u + z2 u u / 2`` (``z1[..., c]``, ``z2[..., c, d]``)."""
    m = len(point)
    mons = jets.monomials(m, order)
    coeffs = np.zeros(z0.shape + (len(mons),), dtype=complex)
    coeffs[..., 0] = z0
    for k, mon in enumerate(mons):
        deg = sum(mon)
        if deg == 1:
            coeffs[..., k] = z1[..., mon.index(1)]
        elif deg == 2:
            idx = [c for c in range(m) for _ in range(mon[c])]
            c, d = idx
            coeffs[..., k] = z2[..., c, c] / 2 if c == d else (z2[..., c, d] + z2[..., d, c]) / 2
    return Jet(coeffs, m, order)


@dataclass
class FrameJet:
    """Order-2 Taylor data of a (1,0)-frame around ``point``.

    ``z0[i, a]`` = ``Z_i^a(o)``, ``z1[i, a, c]`` = ``d_c Z_i^a(o)``,
    ``z2[i, a, c, d]`` = ``d_c d_d Z_i^a(o)``.  ``a`` and ``b`` are the ansatz
    coefficients (``a[i, j, c]``, ``b[i, j, c, d]``) when the frame came from
    :func:`construct_gnh_frame`.
    """

    point: np.ndarray
    z0: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    a: np.ndarray | None = None
    b: np.ndarray | None = None
    residuals: dict[str, float] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return self.z0.shape[0]

    def jet(self, order: int = DEFAULT_ORDER) -> Jet:
        return _poly_jet(self.z0, self.z1, self.z2, self.point, order)

    def vector_field(self, i: int, conjugate: bool = False) -> Callable:
        """Polynomial vector field ``Z_i`` (or its conjugate); accepts jets."""
        z0, z1, z2 = self.z0[i], self.z1[i], self.z2[i]
        if conjugate:
            z0, z1, z2 = np.conj(z0), np.conj(z1), np.conj(z2)
        o = self.point

        def Z(x):
            u = [xi - oi for xi, oi in zip(x, o)]
            m = len(u)
            comps = []
            for a in range(m):
                val = complex(z0[a])
                for c in range(m):
                    if z1[a, c]:
                        val = val + complex(z1[a, c]) * u[c]
                    for d in range(m):
                        if z2[a, c, d]:
                            val = val + 0.5 * complex(z2[a, c, d]) * u[c] * u[d]
                comps.append(val)
            return comps

        return Z

    def with_perturbation(self, scale: float = 1e-2, seed: int = 0) -> "FrameJet":
        rng = np.random.default_rng(seed)
        dz = scale * (rng.standard_normal(self.z1.shape) + 1j * rng.standard_normal(self.z1.shape))
        return FrameJet(self.point, self.z0, self.z1 + dz, self.z2)


def _ansatz_jet(geo: LocalGeometry, W, a, b) -> Jet:
    """Jet of ``Z_i = P(x) V_i(x)`` for the constructor's ansatz."""
    m, order = geo.m, geo.order
    Ainner = np.einsum("ijc,ja->iac", a, W)
    Binner = np.einsum("ijcd,ja->iacd", b, W)
    V = _poly_jet(W.astype(complex), Ainner, Binner, geo.point, order)
    P = (Jet.constant(np.eye(m), m, order) - geo.J * 1j) * 0.5
    return jets.einsum("ab,ib->ia", P, V)


def _cond4_vectors(geo: LocalGeometry, Z: Jet) -> np.ndarray:
    """``v[r, k, i] = nabla_{Z_r} nabla_{conj Z_k} Z_i`` at the base point."""
    D = cov_vector(Z, geo.gamma)  # [i, a, c]
    Y = jets.einsum("kc,iac->kia", Z.conj(), D)  # nabla_{conj Z_k} Z_i
    DY = cov_vector(Y, geo.gamma).value  # [k, i, a, d]
    return np.einsum("rd,kiad->rkia", Z.value, DY)


def construct_gnh_frame(
    chart: AlmostKahlerChart, o, order: int = DEFAULT_ORDER, tol: float = FRAME_TOL
) -> FrameJet:
    """Generalized normal holomorphic frame at ``o``; raises if any condition misses ``tol``."""
    geo = geometry(chart, o, order)
    g0, J0 = geo.g0, geo.J0
    W = unitary_frame(g0, J0)
    n, m = W.shape
    P0 = projector(J0, "10")
    dJ0 = geo.dJ.value  # [a, b, c] = d_c J^a_b
    G0 = geo.gamma.value
    Wbar = np.conj(W)

    # (1,0)-part of nabla_c Z_i must vanish: A_ic = -P0 (dP_c + Gamma_c) W_i
    dP = -0.5j * dJ0
    M = dP + G0.transpose(0, 2, 1)  # [a, e, c]: (dP_c + Gamma_c)^a_e
    A = -np.einsum("ab,bec,ie->ica", P0, M, W)
    a = np.einsum("ica,ab,jb->ijc", A, g0, Wbar)

    zero_b = np.zeros((n, n, m, m), dtype=complex)
    rho = _cond4_vectors(geo, _ansatz_jet(geo, W, a, zero_b))
    rho_w = np.einsum("rkia,ab,jb->rkij", rho, g0, Wbar)  # coordinates along W_j

    # sum_{c,d} W_r^d conj(W_k)^c S_cd = -rho, S symmetric: unknowns S_cd, c <= d
    iu = np.triu_indices(m)
    rows = []
    for r in range(n):
        for k in range(n):
            outer = np.outer(Wbar[k], W[r])  # [c, d]
            sym = outer + outer.T
            coef = np.where(iu[0] == iu[1], outer[iu], sym[iu])
            rows.append(coef)
    Mb = np.array(rows)
    rhs = -rho_w.reshape(n * n, n * n)  # rows (r, k), columns (i, j)
    sol = np.linalg.lstsq(Mb, rhs, rcond=None)[0]
    b = np.zeros((n, n, m, m), dtype=complex)
    for col in range(n * n):
        i, j = divmod(col, n)
        S = np.zeros((m, m), dtype=complex)
        S[iu] = sol[:, col]
        S = S + np.triu(S, 1).T
        b[i, j] = S

    Zj = _ansatz_jet(geo, W, a, b)
    z0 = Zj.value
    z1 = Zj.grad().value
    z2 = Zj.grad().grad().value
    frame = FrameJet(geo.point, z0, z1, z2, a, b)
    frame.residuals = verify_gnh_properties(chart, frame, order)
    worst = max(frame.residuals, key=frame.residuals.get)
    if not frame.residuals[worst] <= tol:
        raise FrameConstructionError(
            f"{chart.label}: normal frame at {list(geo.point)} misses tolerance; "
            f"worst condition {worst} = {frame.residuals[worst]:.3e}",
            worst,
            frame.residuals[worst],
        )
    return frame


def verify_gnh_properties(chart: AlmostKahlerChart, F: FrameJet, order: int = DEFAULT_ORDER) -> dict:
    """Residuals of conditions 1-4 (and the (1,0) type at ``o``) for a frame."""
    geo = geometry(chart, F.point, order)
    g0, J0 = geo.g0, geo.J0
    Z = F.jet(order)
    W = Z.value
    D = cov_vector(Z, geo.gamma).value  # [i, a, c] = nabla_c Z_i^a
    nabla = np.einsum("kc,iac->kia", W, D)  # nabla_{Z_k} Z_i
    nabla_bar_target = np.einsum("kc,iac->kia", W, np.conj(D))  # nabla_{Z_k} conj Z_i
    P10 = projector(J0, "10")
    Zb = Z.conj()
    G = jets.einsum("ra,ab,sb->rs", Z, geo.g, Zb)
    n = F.n
    return {
        "type_10": float(gnorm(g0, np.einsum("ab,ib->ia", projector(J0, "01"), W)).max()),
        "cond1": float(gnorm(g0, nabla_bar_target).max()),
        "cond2": float(gnorm(g0, np.einsum("ab,kib->kia", P10, nabla)).max()),
        "cond3_value": float(np.abs(G.value - np.eye(n)).max()),
        "cond3_differential": float(np.abs(G.grad().value).max()),
        "cond4": float(gnorm(g0, _cond4_vectors(geo, Z)).max()),
    }


# frame components ----------------------------------------------------------------

_TOKEN = re.compile(r"([A-Za-z])(̄|\*|~|')?")


def parse_pattern(pattern: str) -> list[tuple[str, bool]]:
    """``"ījrs̄"`` -> ``[("i", True), ("j", False), ("r", False), ("s", True)]``.

    A bar is written as a combining macron (precomposed letters such as
    ``ī`` are decomposed first) or a trailing ``*``, ``~`` or ``'``.
    """
    text = unicodedata.normalize("NFD", pattern).replace(" ", "").replace(",", "")
    tokens = []
    pos = 0
    while pos < len(text):
        mt = _TOKEN.match(text, pos)
        if not mt:
            raise ValueError(f"cannot parse index pattern {pattern!r} at {text[pos:]!r}")
        tokens.append((mt.group(1), mt.group(2) is not None))
        pos = mt.end()
    return tokens


def _arity(T: Callable) -> int | None:
    rank = getattr(T, "rank", None)
    if rank is not None:
        return int(rank)
    try:
        params = inspect.signature(T).parameters.values()
    except (TypeError, ValueError):
        return None
    positional = [
        q for q in params
        if q.kind in (q.POSITIONAL_ONLY, q.POSITIONAL_OR_KEYWORD) and q.default is q.empty
    ]
    if any(q.kind == q.VAR_POSITIONAL for q in params):
        return None
    return len(positional) - 2


def frame_components(
    chart: AlmostKahlerChart,
    frame,
    T: Callable,
    pattern: str,
    point=None,
    order: int = DEFAULT_ORDER,
) -> np.ndarray:
    """Evaluate ``T(chart, p, *vectors)`` on frame vectors selected by ``pattern``.

    ``frame`` is a :class:`FrameJet` (vectors passed as jets, so
    derivative-dependent operations such as ``RJ_tensor`` see the frame
    fields) or an ``(n, 2n)`` array of pointwise (1,0) vectors together with
    ``point``.  Repeated letters share an index; the result has one axis per
    distinct letter in order of first appearance, followed by the axes of
    ``T``'s own value (e.g. vector components of ``nijenhuis``).
    """
    tokens = parse_pattern(pattern)
    rank = _arity(T)
    if rank is not None and rank != len(tokens):
        raise ValueError(f"pattern {pattern!r} has {len(tokens)} indices but the tensor takes {rank}")
    if isinstance(frame, FrameJet):
        p = frame.point
        Zj = frame.jet(order)
        vecs, bars = [Zj[i] for i in range(frame.n)], [Zj[i].conj() for i in range(frame.n)]
    else:
        if point is None:
            raise ValueError("a pointwise frame needs the base point")
        p = chart.check_point(point)
        frame = np.asarray(frame)
        vecs, bars = list(frame), list(np.conj(frame))
    n = len(vecs)
    letters = list(dict.fromkeys(t[0] for t in tokens))
    values = {}
    for idx in np.ndindex(*(n,) * len(letters)):
        env = dict(zip(letters, idx))
        args = [bars[env[name]] if bar else vecs[env[name]] for name, bar in tokens]
        values[idx] = np.asarray(T(chart, p, *args), dtype=complex)
    tail = next(iter(values.values())).shape
    out = np.zeros((n,) * len(letters) + tail, dtype=complex)
    for idx, v in values.items():
        out[idx] = v
    return out
