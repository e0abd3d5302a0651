"""Almost-Kähler structures on a single coordinate chart.

A chart carries the symplectic form ``kappa`` and the almost complex
structure ``J`` as component fields.  Component fields are callables taking
a coordinate sequence; they must be written with operations that also accept
:class:`~akahler.jets.Jet` arguments so every derivative comes out of the jet
engine.  Plain numbers are accepted as constant fields.

The metric is never stored: ``g(X, Y) = kappa(X, J Y)``, i.e.
``g_ab = kappa_ac J^c_b``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import jets
from .jets import DomainError, Jet

__all__ = [
    "AlmostKahlerChart",
    "DomainError",
    "InvariantPlane",
    "Polynomial",
    "StructureError",
    "TangentVector",
    "ValidationReport",
    "lie_bracket",
    "lift_vector",
    "load_chart",
    "metric_eval",
    "validate_structure",
]

STRUCTURE_TOL = 1e-10


class StructureError(ValueError):
    """The chart data is not an almost-Kähler structure at some point."""


def _eval(f, x):
    return f(x) if callable(f) else f


@dataclass(frozen=True, eq=False)
class AlmostKahlerChart:
    """Symplectic form and calibrated almost complex structure on a box.

    ``kappa`` maps index pairs ``(a, b)`` with ``a < b`` to the component
    field of ``kappa_ab``; missing pairs are zero.  ``J[a][b]`` is the field
    of ``J^a_b`` (row = upper index), so ``J @ X`` applies ``J`` to a vector.
    """

    n: int
    domain: tuple[tuple[float, float], ...]
    kappa: Mapping[tuple[int, int], Callable | float]
    J: tuple[tuple[Callable | float, ...], ...]
    label: str = "chart"
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        m = 2 * self.n
        if len(self.domain) != m:
            raise ValueError(f"domain has {len(self.domain)} axes, expected {m}")
        if len(self.J) != m or any(len(row) != m for row in self.J):
            raise ValueError(f"J must be {m}x{m}")
        for a, b in self.kappa:
            if not 0 <= a < b < m:
                raise ValueError(f"kappa index {(a, b)} must satisfy 0 <= a < b < {m}")

    @property
    def dim(self) -> int:
        return 2 * self.n

    @property
    def center(self) -> np.ndarray:
        return np.array([(lo + hi) / 2 for lo, hi in self.domain])

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        jets.check_domain(p, self.domain)
        return p

    def sample_points(self, nsamples: int, seed: int) -> np.ndarray:
        rng = np.random.default_rng(seed)
        lo = np.array([d[0] for d in self.domain])
        hi = np.array([d[1] for d in self.domain])
        return lo + (hi - lo) * rng.random((nsamples, self.dim))

    # component evaluation ----------------------------------------------------

    def _kappa_entries(self, x):
        m = self.dim
        rows = [[0.0] * m for _ in range(m)]
        for (a, b), f in self.kappa.items():
            v = _eval(f, x)
            rows[a][b] = v
            rows[b][a] = -v
        return rows

    def _J_entries(self, x):
        return [[_eval(f, x) for f in row] for row in self.J]

    def kappa_matrix(self, p) -> np.ndarray:
        return np.array(self._kappa_entries(list(self.check_point(p))), dtype=float)

    def J_matrix(self, p) -> np.ndarray:
        return np.array(self._J_entries(list(self.check_point(p))), dtype=float)

    def kappa_jet(self, p, order: int = 3) -> Jet:
        p = self.check_point(p)
        return jets.jet_lift(self._kappa_entries, p, order)

    def J_jet(self, p, order: int = 3) -> Jet:
        p = self.check_point(p)
        return jets.jet_lift(self._J_entries, p, order)


@dataclass(frozen=True)
class TangentVector:
    point: np.ndarray
    components: np.ndarray

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


@dataclass(frozen=True)
class InvariantPlane:
    """The J-invariant plane spanned by a g-unit vector ``v`` and ``Jv``."""

    point: np.ndarray
    v: np.ndarray
    normalized: bool = False

    @classmethod
    def through(cls, chart: AlmostKahlerChart, p, v) -> "InvariantPlane":
        p = chart.check_point(p)
        v = np.asarray(v, dtype=float)
        g = metric_eval(chart, p)
        norm = np.sqrt(v @ g @ v)
        if norm == 0:
            raise ValueError("zero vector does not span a plane")
        if abs(norm - 1) > 1e-12:
            return cls(p, v / norm, normalized=True)
        return cls(p, v)


def metric_eval(chart: AlmostKahlerChart, p) -> np.ndarray:
    """``g_ab(p) = kappa_ac(p) J^c_b(p)``; raises if not symmetric positive-definite."""
    g = chart.kappa_matrix(p) @ chart.J_matrix(p)
    scale = max(1.0, np.abs(g).max())
    asym = np.abs(g - g.T).max()
    if asym > 1e-12 * scale:
        raise StructureError(f"{chart.label}: g not symmetric at {list(p)} (residual {asym:.3e})")
    lam = np.linalg.eigvalsh((g + g.T) / 2).min()
    if lam <= 0:
        raise StructureError(f"{chart.label}: g not positive at {list(p)} (min eigenvalue {lam:.3e})")
    return g


@dataclass
class ValidationReport:
    label: str
    nsamples: int
    seed: int
    residuals: dict[str, float]
    min_abs_det_kappa: float
    min_eigenvalue_g: float
    tol: float = STRUCTURE_TOL
    failures: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "chart": self.label,
            "nsamples": self.nsamples,
            "seed": self.seed,
            "residuals": self.residuals,
            "min_abs_det_kappa": self.min_abs_det_kappa,
            "min_eigenvalue_g": self.min_eigenvalue_g,
            "tol": self.tol,
            "passed": self.passed,
            "failures": self.failures,
        }


def validate_structure(
    chart: AlmostKahlerChart, nsamples: int = 100, seed: int = 42, tol: float = STRUCTURE_TOL
) -> ValidationReport:
    """Max residual of every almost-Kähler axiom over seeded random points."""
    if nsamples < 1:
        raise ValueError("nsamples must be >= 1")
    m = chart.dim
    res = dict.fromkeys(["J_squared", "closedness", "compatibility", "metric_symmetry"], 0.0)
    min_det, min_eig = np.inf, np.inf
    eye = np.eye(m)
    for p in chart.sample_points(nsamples, seed):
        K = chart.kappa_jet(p, 1)
        Jm = chart.J_jet(p, 0).value
        k0 = K.value
        # d kappa_{abc} = d_a k_bc + d_b k_ca + d_c k_ab
        dk = K.grad().value  # [b, c, a] = d_a k_bc
        dkappa = (
            np.einsum("bca->abc", dk) + np.einsum("cab->abc", dk) + np.einsum("abc->abc", dk)
        )
        res["closedness"] = max(res["closedness"], np.abs(dkappa).max())
        res["J_squared"] = max(res["J_squared"], np.abs(Jm @ Jm + eye).max())
        res["compatibility"] = max(res["compatibility"], np.abs(Jm.T @ k0 @ Jm - k0).max())
        g = k0 @ Jm
        res["metric_symmetry"] = max(res["metric_symmetry"], np.abs(g - g.T).max())
        min_det = min(min_det, abs(np.linalg.det(k0)))
        min_eig = min(min_eig, np.linalg.eigvalsh((g + g.T) / 2).min())
    failures = [f"{k} residual {v:.3e} > {tol:g}" for k, v in res.items() if not v <= tol]
    if not min_det > 1e-8:
        failures.append(f"kappa degenerate (min |det| {min_det:.3e})")
    if not min_eig > 0:
        failures.append(f"positivity: min eigenvalue of g {min_eig:.3e} <= 0")
    return ValidationReport(
        chart.label, nsamples, seed, {k: float(v) for k, v in res.items()},
        float(min_det), float(min_eig), tol, failures,
    )


# vector fields --------------------------------------------------------------


def lift_vector(X, p, order: int) -> Jet:
    """Jet of a vector field at ``p``.

    ``X`` may be a jet, a callable returning components, or a constant
    component array (real or complex).
    """
    p = np.asarray(p, dtype=float)
    if isinstance(X, Jet):
        return X.truncate(min(order, X.order))
    if isinstance(X, TangentVector):
        X = X.components
    if callable(X):
        return jets.jet_lift(X, p, order)
    return Jet.constant(np.asarray(X), len(p), order)


def bracket_jets(X: Jet, Y: Jet) -> Jet:
    """``[X, Y]^a = X^b d_b Y^a - Y^b d_b X^a`` (order drops by one)."""
    return jets.einsum("...b,...ab->...a", X, Y.grad()) - jets.einsum(
        "...b,...ab->...a", Y, X.grad()
    )


def lie_bracket(chart: AlmostKahlerChart, X, Y, p) -> TangentVector:
    p = chart.check_point(p)
    Xj, Yj = lift_vector(X, p, 1), lift_vector(Y, p, 1)
    return TangentVector(p, np.asarray(bracket_jets(Xj, Yj).value))


# polynomial fields and the JSON chart format ----------------------------------


class Polynomial:
    """Polynomial scalar field from ``[(coefficient, exponents), ...]``."""

    def __init__(self, terms: Sequence):
        self.terms = [(float(c), tuple(int(e) for e in exps)) for c, exps in terms]

    def __call__(self, x):
        total = 0.0
        for c, exps in self.terms:
            term = c
            for xi, e in zip(x, exps):
                if e:
                    term = term * xi**e
            total = total + term
        return total

    def __repr__(self):
        return f"Polynomial({self.terms!r})"


def _poly(entry):
    if isinstance(entry, (int, float)):
        return float(entry)
    return Polynomial(entry)


def load_chart(source) -> AlmostKahlerChart:
    """Build a chart from the JSON schema (path, JSON text, or parsed dict).

    Schema::

        {"label": str, "n": int,
         "domain": [[lo, hi], ...],                 # 2n axes
         "kappa": {"a,b": poly, ...},               # a < b, missing pairs are zero
         "J": [[poly, ...], ...]}                   # J[a][b] = J^a_b

    ``poly`` is a number or a list of ``[coefficient, [e_0, ..., e_{2n-1}]]``
    terms meaning ``coefficient * prod x_k**e_k``.
    """
    if isinstance(source, Mapping):
        data = source
    else:
        text = str(source)
        path = Path(text)
        data = json.loads(path.read_text() if not text.lstrip().startswith("{") else text)
    kappa = {}
    for key, entry in data.get("kappa", {}).items():
        a, b = (int(t) for t in key.split(","))
        kappa[(a, b)] = _poly(entry)
    J = tuple(tuple(_poly(s) for s in row) for row in data["J"])
    domain = tuple((float(lo), float(hi)) for lo, hi in data["domain"])
    return AlmostKahlerChart(int(data["n"]), domain, kappa, J, data.get("label", "json-chart"))
