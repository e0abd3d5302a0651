"""Integrability defects and the identity suite.

Every defect is a sup-norm over a finite sample of points (the domain
center first, then seeded uniform draws) and, per point, over the vectors of
an orthonormal frame there.  A vanishing defect can only be *consistent* with
a Kähler structure; a large Nijenhuis defect refutes integrability.

Frame conventions at a point: ``W`` is the unitary (1,0)-frame from
:func:`~akahler.frames.hermitian_orthonormal_frame` and ``E`` the real
orthonormal frame ``X_1, JX_1, ..., X_n, JX_n`` with ``Z_r = (X_r - iJX_r)/sqrt 2``.
Defects that need vector *fields* (``R^J`` is not tensorial) use the real and
imaginary parts of the generalized normal holomorphic frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from . import jets
from .charts import AlmostKahlerChart, bracket_jets
from .connections import DEFAULT_ORDER, LocalGeometry, cov_jet, cov_vector, geometry, gnorm, gpair, rj_fields
from .frames import FrameJet, construct_gnh_frame, projector, real_frame, unitary_frame

SCHEMA = "v1"
ZERO_TOL = 1e-9
DETECT_TOL = 1e-3
IDENTITY_TOL = 1e-7
B_LAMBDA = -1.0
"""``B(X, Y) - B(Y, X) = B_LAMBDA * N_J(X, Y)``; fitted by :func:`fit_b_lambda`."""
BRACKET_CONSTANT = -4.0
"""``N_J(Z_i, Z_k)(o) = BRACKET_CONSTANT * [Z_i, Z_k](o)`` in a normal frame."""
L_DIAGONAL_CONSTANT = -4.0
"""``L(conj Z_i, Z_i, Z_j, conj Z_j)(o) = L_DIAGONAL_CONSTANT * g(nabla_i Z_j, nabla_{conj i} conj Z_j)(o)``."""

DEFECTS = ("nijenhuis", "nabla01_nijenhuis", "L_diagonal", "RJ_vs_R", "hermitian_vs_R", "bisectional")

CORE_IDENTITIES = {
    "fundamental_relation": "2 g((nabla_X J)Y, Z) = g(N_J(Y, Z), JX)",
    "corollary_nablaJ": "(nabla_{conj Z_i} J) Z_j = 0",
    "B_antisymmetric": "B(X, Y) - B(Y, X) = lambda N_J(X, Y), lambda = -1",
    "L_symmetry": "L_{conj(i) j r conj(s)} = L_{j conj(i) conj(s) r}",
    "L_vanishing": "L_{i conj(j) r s} = L_{i j conj(r) s} = L_{i j r conj(s)} = 0",
    "L_RJ_R": "L_{conj(i) j r conj(s)}(o) = -2 R^J_{conj(i) j r conj(s)}(o) + 2 R_{conj(i) j r conj(s)}(o)",
    "sekigawa": "R~(X,Y,Z,W) = R(X,Y,Z,W)/2 + R(X,Y,JZ,JW)/2 - g([nabla_X J, nabla_Y J] Z, W)/4",
    "hermitian_curvature_L": "R~_{i conj(j) r conj(s)} = R_{i conj(j) r conj(s)} + L_{conj(j) i r conj(s)}/4",
    "hermitian_metric": "nabla~ g = 0",
    "hermitian_J": "nabla~ J = 0",
    "hermitian_torsion": "T(nabla~) = N_J / 4",
    "nijenhuis_type": "N_J(T^{1,0} x T^{1,0}) in T^{0,1}",
}

FRAME_IDENTITIES = {
    "frame_conditions": "normal frame conditions 1-4 at o",
    "frame_bracket": "N_J(Z_i, Z_k)(o) = -4 [Z_i, Z_k](o)",
    "frame_RJ": "R^J_{conj(i) j r conj(s)}(o) = -i g(nabla_{conj i} J nabla_j Z_r, conj Z_s)(o)",
    "frame_L_diagonal": "L(conj Z_i, Z_i, Z_j, conj Z_j)(o) = -4 g(nabla_i Z_j, nabla_{conj i} conj Z_j)(o)",
}

IDENTITIES = {**CORE_IDENTITIES, **FRAME_IDENTITIES}

WR1_VARIANTS = ("L_i_jbar_r_sbar", "L_jbar_i_r_sbar")


def _sig(x: float, digits: int = 12) -> float:
    return float(f"{float(x):.{digits}g}")


def sample_points(chart: AlmostKahlerChart, nsamples: int, seed: int) -> np.ndarray:
    """Domain center followed by ``nsamples - 1`` seeded uniform points."""
    if nsamples < 1:
        raise ValueError("nsamples must be >= 1")
    rest = chart.sample_points(nsamples - 1, seed) if nsamples > 1 else np.zeros((0, chart.dim))
    return np.vstack([chart.center[None, :], rest])


def fit_b_lambda(order: int = DEFAULT_ORDER, seed: int = 0) -> float:
    """Least-squares ``lambda`` in ``B(X,Y) - B(Y,X) = lambda N_J(X,Y)`` on Kodaira-Thurston."""
    from .zoo import kodaira_thurston

    chart = kodaira_thurston()
    rng = np.random.default_rng(seed)
    geo = geometry(chart, rng.uniform(-0.9, 0.9, chart.dim), order)
    X, Y = rng.standard_normal((2, chart.dim))
    anti = np.einsum("abc,b,c->a", geo.B0, X, Y) - np.einsum("abc,b,c->a", geo.B0, Y, X)
    N = np.einsum("abc,b,c->a", geo.N0, X, Y)
    return float(anti @ N / (N @ N))


# per-point machinery -------------------------------------------------------------


class _Point:
    """Frames and contractions shared by every defect and identity at one point."""

    def __init__(self, chart: AlmostKahlerChart, p, order: int):
        self.geo: LocalGeometry = geometry(chart, p, order)
        self.p = self.geo.point
        geo = self.geo
        self.W = unitary_frame(geo.g0, geo.J0)
        self.Wb = np.conj(self.W)
        self.E = real_frame(self.W)
        self.n = len(self.W)
        self._frame: FrameJet | None = None

    @property
    def frame(self) -> FrameJet:
        if self._frame is None:
            self._frame = construct_gnh_frame(self.geo.chart, self.p, self.geo.order)
        return self._frame

    def L(self, a, b, c, d):
        return np.einsum("xyzw,ix,jy,rz,sw->ijrs", self.geo.L4, a, b, c, d)

    def R(self, a, b, c, d):
        return np.einsum("xyzw,ix,jy,rz,sw->ijrs", self.geo.riemann4, a, b, c, d)

    def Rt(self, a, b, c, d):
        return np.einsum("xyzw,ix,jy,rz,sw->ijrs", self.geo.hermitian_riemann4, a, b, c, d)

    def N(self, a, b):
        return np.einsum("abc,ib,jc->ija", self.geo.N0, a, b)


def _argmax_update(best: dict, name: str, value: float, p, where: str):
    if value > best[name][0]:
        best[name] = (value, [float(x) for x in p], where)


def _E_names(n: int) -> list[str]:
    out = []
    for r in range(1, n + 1):
        out += [f"X{r}", f"JX{r}"]
    return out


def _defects_at(pt: _Point, rng: np.random.Generator, nplanes: int = 8) -> dict[str, tuple[float, str]]:
    geo, W, Wb, E, n = pt.geo, pt.W, pt.Wb, pt.E, pt.n
    g0, J0 = geo.g0, geo.J0
    names = _E_names(n)
    out = {}

    norms = gnorm(g0, pt.N(E, E))
    a, b = np.unravel_index(np.argmax(norms), norms.shape)
    out["nijenhuis"] = (float(norms[a, b]), f"N_J({names[a]}, {names[b]})")

    F = np.vstack([W, Wb])
    fnames = [f"Z{r}" for r in range(1, n + 1)] + [f"conj Z{r}" for r in range(1, n + 1)]
    dN = np.einsum("abcd,kd,ib,jc->kija", geo.nabla_N.value, Wb, F, F)
    norms = gnorm(g0, dN)
    k, i, j = np.unravel_index(np.argmax(norms), norms.shape)
    out["nabla01_nijenhuis"] = (float(norms[k, i, j]), f"(nabla_(conj Z{k + 1}) N_J)({fnames[i]}, {fnames[j]})")

    Ld = np.abs(np.einsum("xyzw,ix,iy,jz,jw->ij", geo.L4, Wb, W, W, Wb))
    i, j = np.unravel_index(np.argmax(Ld), Ld.shape)
    out["L_diagonal"] = (float(Ld[i, j]), f"L(conj Z{i + 1}, Z{i + 1}, Z{j + 1}, conj Z{j + 1})")

    # R^J(JX, Y, X, JY) with X, Y the real parts of the normal frame as fields
    Ej = real_frame_jet(pt.frame, geo.order)
    JEj = jets.einsum("ab,ib->ia", geo.J, Ej)
    m2 = 2 * n
    ia, ib = (ix.ravel() for ix in np.meshgrid(np.arange(m2), np.arange(m2), indexing="ij"))
    JE = E @ J0.T
    rj = rj_fields(geo, JEj[ia], Ej[ib], Ej[ia], JE[ib])
    r = np.einsum("bcde,kb,kc,kd,ke->k", geo.riemann4, JE[ia], E[ib], E[ia], JE[ib])
    diff = np.abs(rj - r)
    k = int(np.argmax(diff))
    out["RJ_vs_R"] = (float(diff[k]), f"X={names[ia[k]]}, Y={names[ib[k]]}")

    hv = np.abs(
        np.einsum("bcde,ib,ic,jd,je->ij", geo.hermitian_riemann4 - geo.riemann4, E, JE, E, JE)
    )
    i, j = np.unravel_index(np.argmax(hv), hv.shape)
    out["hermitian_vs_R"] = (float(hv[i, j]), f"X={names[i]}, Y={names[j]}")

    V = rng.standard_normal((2, nplanes, pt.geo.m))
    V = V / gnorm(g0, V)[..., None]
    v, w = V
    dR = geo.hermitian_riemann4 - geo.riemann4
    bis = np.abs(np.einsum("bcde,kb,kc,kd,ke->k", dR, v, v @ J0.T, w, w @ J0.T))
    k = int(np.argmax(bis))
    out["bisectional"] = (
        float(bis[k]),
        f"v={np.round(v[k], 6).tolist()}, w={np.round(w[k], 6).tolist()}",
    )
    return out


def real_frame_jet(F: FrameJet, order: int = DEFAULT_ORDER):
    """Jets of the real fields ``sqrt 2 Re Z_r`` and ``-sqrt 2 Im Z_r`` (interleaved)."""
    Z = F.jet(order)
    s = np.sqrt(2)
    re, im = Z.real.coeffs * s, Z.imag.coeffs * (-s)
    coeffs = np.stack([re, im], axis=1).reshape((2 * F.n,) + re.shape[1:])
    return jets.Jet(coeffs, Z.nvars, Z.order)


def _identities_at(pt: _Point, rows: Iterable[str]) -> dict[str, float | dict]:
    geo, W, Wb, E, n = pt.geo, pt.W, pt.Wb, pt.E, pt.n
    g0, J0, nJ = geo.g0, geo.J0, geo.nabla_J0
    rows = set(rows)
    res: dict = {}
    JE = E @ J0.T

    if "fundamental_relation" in rows:
        lhs = 2 * np.einsum("abc,yb,xc,ad,zd->xyz", nJ, E, E, g0, E)
        rhs = np.einsum("yza,ad,xd->xyz", pt.N(E, E), g0, JE)
        res["fundamental_relation"] = np.abs(lhs - rhs).max()
    if "corollary_nablaJ" in rows:
        v = np.einsum("abc,jb,ic->ija", nJ, W, Wb)
        res["corollary_nablaJ"] = gnorm(g0, v).max()
    if "B_antisymmetric" in rows:
        Bv = np.einsum("abc,ib,jc->ija", geo.B0, E, E)
        v = Bv - Bv.transpose(1, 0, 2) - B_LAMBDA * pt.N(E, E)
        res["B_antisymmetric"] = gnorm(g0, v).max()
    if "L_symmetry" in rows:
        A = pt.L(Wb, W, W, Wb)
        B = pt.L(W, Wb, Wb, W).transpose(1, 0, 3, 2)
        res["L_symmetry"] = np.abs(A - B).max()
    if "L_vanishing" in rows:
        res["L_vanishing"] = max(
            np.abs(pt.L(W, Wb, W, W)).max(), np.abs(pt.L(W, W, Wb, W)).max(), np.abs(pt.L(W, W, W, Wb)).max()
        )
    if "sekigawa" in rows:
        from .connections import sekigawa_array

        idx = np.array(list(np.ndindex(*(len(E),) * 4)))
        x, y, z, w = (E[idx[:, k]] for k in range(4))
        direct = np.einsum("bcde,kb,kc,kd,ke->k", geo.hermitian_riemann4, x, y, z, w)
        res["sekigawa"] = np.abs(direct - sekigawa_array(geo, x, y, z, w)).max()
    if "hermitian_curvature_L" in rows:
        lhs = pt.Rt(W, Wb, W, Wb) - pt.R(W, Wb, W, Wb)
        v1 = np.abs(lhs - 0.25 * pt.L(W, Wb, W, Wb)).max()
        v2 = np.abs(lhs - 0.25 * pt.L(Wb, W, W, Wb).transpose(1, 0, 2, 3)).max()
        res["hermitian_curvature_L"] = {WR1_VARIANTS[0]: v1, WR1_VARIANTS[1]: v2}
    if {"hermitian_metric", "hermitian_J", "hermitian_torsion"} & rows:
        Gt = geo.hermitian_gamma
        if "hermitian_metric" in rows:
            dg = cov_jet(geo.g, "dd", Gt).value
            res["hermitian_metric"] = np.abs(np.einsum("abc,ia,jb,kc->ijk", dg, E, E, E)).max()
        if "hermitian_J" in rows:
            dJ = cov_jet(geo.J, "ud", Gt).value
            v = np.einsum("abc,jb,kc->jka", dJ, E, E)
            res["hermitian_J"] = gnorm(g0, v).max()
        if "hermitian_torsion" in rows:
            G = Gt.value
            T = G - G.transpose(0, 2, 1)
            v = np.einsum("abc,ib,jc->ija", T, E, E) - 0.25 * pt.N(E, E)
            res["hermitian_torsion"] = gnorm(g0, v).max()
    if "nijenhuis_type" in rows:
        v = np.einsum("ab,ijb->ija", projector(J0, "10"), pt.N(W, W))
        res["nijenhuis_type"] = gnorm(g0, v).max()

    frame_rows = rows & (set(FRAME_IDENTITIES) | {"L_RJ_R"})
    if frame_rows:
        fr = pt.frame
        Z = fr.jet(geo.order)
        Zv = Z.value
        Zb = Z.conj()
        Zbv = np.conj(Zv)
        if "frame_conditions" in rows:
            res["frame_conditions"] = max(fr.residuals.values())
        if "frame_bracket" in rows:
            br = np.array([[bracket_jets(Z[i], Z[k]).value for k in range(n)] for i in range(n)])
            N = pt.N(Zv, Zv)
            res["frame_bracket"] = {
                "fitted": gnorm(g0, N - BRACKET_CONSTANT * br).max(),
                "quarter": gnorm(g0, N + 0.25 * br).max(),
            }
        D = cov_vector(Z, geo.gamma)
        if "frame_RJ" in rows or "L_RJ_R" in rows:
            idx = np.array(list(np.ndindex(n, n, n, n)))
            i, j, r, s = idx.T
            RJ = rj_fields(geo, Zb[i], Z[j], Z[r], Zbv[s]).reshape((n,) * 4)
            if "L_RJ_R" in rows:
                Lv = pt.L(Zbv, Zv, Zv, Zbv)
                res["L_RJ_R"] = np.abs(Lv + 2 * RJ - 2 * pt.R(Zbv, Zv, Zv, Zbv)).max()
            if "frame_RJ" in rows:
                nZ = jets.einsum("rac,jc->jra", D, Z)
                JnZ = jets.einsum("ab,jrb->jra", geo.J, nZ)
                v = np.einsum("jrac,ic->ijra", cov_vector(JnZ, geo.gamma).value, Zbv)
                rhs = -1j * np.einsum("ijra,ab,sb->ijrs", v, g0, Zbv)
                res["frame_RJ"] = np.abs(RJ - rhs).max()
        if "frame_L_diagonal" in rows:
            Ld = np.einsum("xyzw,ix,iy,jz,jw->ij", geo.L4, Zbv, Zv, Zv, Zbv)
            nZv = np.einsum("jac,ic->ija", D.value, Zv)
            gp = np.einsum("ija,ab,ijb->ij", nZv, g0, np.conj(nZv))
            res["frame_L_diagonal"] = np.abs(Ld - L_DIAGONAL_CONSTANT * gp).max()
    return res


# reports ---------------------------------------------------------------------------


@dataclass
class IdentityRow:
    name: str
    paper_anchor: str
    residual: float
    tol: float
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "paper_anchor": self.paper_anchor,
            "residual": _sig(self.residual),
            "pass": bool(self.passed),
            "tol": self.tol,
            "detail": {k: _sig(v) for k, v in self.detail.items()},
        }


@dataclass
class IdentityTable:
    chart: str
    nsamples: int
    seed: int
    rows: list[IdentityRow]
    wr1_variant: dict

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def row(self, name: str) -> IdentityRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "chart": self.chart,
            "nsamples": self.nsamples,
            "seed": self.seed,
            "identities": [r.to_dict() for r in self.rows],
            "wr1_variant": self.wr1_variant,
        }


@dataclass
class DefectReport:
    chart: str
    nsamples: int
    seed: int
    points: list[list[float]]
    defects: dict[str, float]
    argmax: dict[str, dict]
    verdict: str
    identities: list[IdentityRow] = field(default_factory=list)
    wr1_variant: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "chart": self.chart,
            "seed": self.seed,
            "nsamples": self.nsamples,
            "defects": {k: _sig(v) for k, v in self.defects.items()},
            "argmax": self.argmax,
            "thresholds": {"zero": ZERO_TOL, "detect": DETECT_TOL},
            "verdict": self.verdict,
            "identities": [r.to_dict() for r in self.identities],
            "wr1_variant": self.wr1_variant,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def classify(report: DefectReport | dict) -> str:
    """``kahler-consistent`` / ``non-integrable`` / ``inconclusive`` from the six defects."""
    defects = report.defects if isinstance(report, DefectReport) else report
    missing = set(DEFECTS) - set(defects)
    if missing:
        raise ValueError(f"report lacks defects {sorted(missing)}")
    if all(defects[k] <= ZERO_TOL for k in DEFECTS):
        return "kahler-consistent"
    if defects["nijenhuis"] >= DETECT_TOL:
        return "non-integrable"
    return "inconclusive"


def wr1_verdict(v1: float, v2: float, tol: float = IDENTITY_TOL, gap: float = DETECT_TOL) -> str:
    passes = [v <= tol for v in (v1, v2)]
    if passes[0] and passes[1]:
        return "indistinguishable"
    if not any(passes):
        return "neither"
    win, lose = (0, 1) if passes[0] else (1, 0)
    other = (v1, v2)[lose]
    return WR1_VARIANTS[win] if other >= gap else f"{WR1_VARIANTS[win]} (weak separation)"


def _wr1_record(v1: float, v2: float) -> dict:
    return {WR1_VARIANTS[0]: _sig(v1), WR1_VARIANTS[1]: _sig(v2), "verdict": wr1_verdict(v1, v2)}


def _table(maxima: dict, tols: dict | None) -> tuple[list[IdentityRow], dict]:
    tols = tols or {}
    rows = []
    wr1 = {}
    for name, val in maxima.items():
        tol = float(tols.get(name, IDENTITY_TOL))
        detail = {}
        if name == "hermitian_curvature_L":
            detail = dict(val)
            wr1 = _wr1_record(val[WR1_VARIANTS[0]], val[WR1_VARIANTS[1]])
            residual = min(val.values())
        elif name == "frame_bracket":
            detail = dict(val)
            residual = val["fitted"]
        else:
            residual = float(val)
        rows.append(IdentityRow(name, IDENTITIES[name], float(residual), tol, bool(residual <= tol), detail))
    return rows, wr1


def _merge(maxima: dict, res: dict):
    for k, v in res.items():
        if isinstance(v, dict):
            cur = maxima.setdefault(k, dict.fromkeys(v, 0.0))
            for kk, vv in v.items():
                cur[kk] = max(cur[kk], float(vv))
        else:
            maxima[k] = max(maxima.get(k, 0.0), float(v))


def identity_suite(
    chart: AlmostKahlerChart,
    nsamples: int = 20,
    seed: int = 42,
    order: int = DEFAULT_ORDER,
    rows: Iterable[str] | None = None,
    tols: dict | None = None,
) -> IdentityTable:
    """Max residual of each identity over the sample; the wR1 row carries both index variants."""
    rows = list(IDENTITIES if rows is None else rows)
    unknown = set(rows) - set(IDENTITIES)
    if unknown:
        raise KeyError(f"unknown identities {sorted(unknown)}")
    maxima: dict = {}
    for p in sample_points(chart, nsamples, seed):
        _merge(maxima, _identities_at(_Point(chart, p, order), rows))
    ordered = {k: maxima[k] for k in IDENTITIES if k in maxima}
    table, wr1 = _table(ordered, tols)
    return IdentityTable(chart.label, nsamples, seed, table, wr1)


def integrability_defects(
    chart: AlmostKahlerChart,
    nsamples: int = 100,
    seed: int = 42,
    order: int = DEFAULT_ORDER,
    identities: bool = True,
    tols: dict | None = None,
) -> DefectReport:
    """The six defects (with argmax locations), the verdict and, optionally, the identity table."""
    points = sample_points(chart, nsamples, seed)
    best = {k: (-1.0, None, "") for k in DEFECTS}
    maxima: dict = {}
    for k, p in enumerate(points):
        pt = _Point(chart, p, order)
        rng = np.random.default_rng([seed, k])
        for name, (val, where) in _defects_at(pt, rng).items():
            _argmax_update(best, name, val, pt.p, where)
        if identities:
            _merge(maxima, _identities_at(pt, IDENTITIES))
    defects = {k: float(v[0]) for k, v in best.items()}
    argmax = {k: {"point": [_sig(x) for x in v[1]], "where": v[2]} for k, v in best.items()}
    rows, wr1 = _table({k: maxima[k] for k in IDENTITIES if k in maxima}, tols) if identities else ([], {})
    report = DefectReport(chart.label, nsamples, seed, points.tolist(), defects, argmax, "", rows, wr1)
    report.verdict = classify(report)
    return report
