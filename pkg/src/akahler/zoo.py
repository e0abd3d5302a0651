"""Built-in almost-Kähler charts with known ground truth.

Compact quotients (the Kodaira-Thurston nilmanifold) are not modeled as
manifolds: every field here is invariant under the relevant lattice, so the
pointwise tensors computed on one chart are those of the quotient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .charts import AlmostKahlerChart, StructureError
from .jets import Jet, compose

__all__ = [
    "ZOO",
    "ZooEntry",
    "build",
    "flat_kahler",
    "kodaira_thurston",
    "symplectic_twist_r4",
    "standard_pair",
]


def standard_pair(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Constant ``(kappa, J)`` matrices for coordinates ``(x1, y1, ..., xn, yn)``."""
    k = np.zeros((2 * n, 2 * n))
    J = np.zeros((2 * n, 2 * n))
    for i in range(n):
        x, y = 2 * i, 2 * i + 1
        k[x, y], k[y, x] = 1.0, -1.0
        J[y, x], J[x, y] = 1.0, -1.0  # J dx = dy, J dy = -dx
    return k, J


def _constant_chart(n, kappa, J, label, params=None, box=1.0):
    m = 2 * n
    kfields = {(a, b): float(kappa[a, b]) for a in range(m) for b in range(a + 1, m) if kappa[a, b]}
    Jfields = tuple(tuple(float(J[a, b]) for b in range(m)) for a in range(m))
    return AlmostKahlerChart(n, ((-box, box),) * m, kfields, Jfields, label, params or {})


def flat_kahler(n: int = 2) -> AlmostKahlerChart:
    """Standard Kähler structure on [-1, 1]^{2n}."""
    if not 1 <= n <= 4:
        raise ValueError("flat_kahler needs 1 <= n <= 4")
    k, J = standard_pair(n)
    return _constant_chart(n, k, J, f"flat_kahler(n={n})", {"n": n})


def kodaira_thurston() -> AlmostKahlerChart:
    """Kodaira-Thurston structure in coordinates ``(x, y, z, t)``.

    Invariant frame ``e1 = dx, e2 = dy + x dz, e3 = dz, e4 = dt`` (as
    derivations) with ``[e1, e2] = e3``; ``kappa = dx^(dz - x dy) + dy^dt``;
    ``J e1 = e3, J e2 = e4``.  The frame is g-orthonormal.
    """
    x = lambda c: c[0]  # noqa: E731
    negx = lambda c: -c[0]  # noqa: E731
    kappa = {(0, 2): 1.0, (0, 1): negx, (1, 3): 1.0}
    J = (
        (0.0, x, -1.0, 0.0),
        (0.0, 0.0, 0.0, -1.0),
        (1.0, 0.0, 0.0, negx),
        (0.0, 1.0, 0.0, 0.0),
    )
    return AlmostKahlerChart(2, ((-1.0, 1.0),) * 4, kappa, J, "kodaira_thurston")


class _SeriesEntry:
    """Scalar field ``x -> sum_k c_k s(x)^k`` for an entire series in ``s``."""

    def __init__(self, coeffs: np.ndarray, s: Callable, max_order: int = 6):
        self.coeffs = coeffs
        self.s = s
        k = np.arange(len(coeffs))
        # falling[j, k] = k! / (k - j)!
        self.falling = np.array(
            [[math.perm(int(kk), j) for kk in k] for j in range(max_order + 1)], dtype=float
        )
        self.k = k

    def _kernel(self, t, order):
        out = []
        for j in range(order + 1):
            pw = np.where(self.k >= j, float(t) ** np.maximum(self.k - j, 0), 0.0)
            out.append(float(np.sum(self.coeffs * self.falling[j] * pw)))
        return out

    def __call__(self, x):
        s = self.s(x)
        if isinstance(s, Jet):
            return compose(s, self._kernel)
        return float(np.polynomial.polynomial.polyval(s, self.coeffs))


def _bump(eps):
    return lambda x: eps * x[0] * x[2]


def twist_generator(seed: int) -> np.ndarray:
    """Seeded element ``A`` of sp(4): ``A^T kappa0 + kappa0 A = 0``, unit Frobenius norm."""
    rng = np.random.default_rng(seed)
    S = rng.standard_normal((4, 4))
    S = (S + S.T) / 2
    k0, _ = standard_pair(2)
    A = np.linalg.solve(k0, S)
    return A / np.linalg.norm(A)


def symplectic_twist_r4(eps: float = 0.3, seed: int = 7, terms: int = 40) -> AlmostKahlerChart:
    """Standard ``kappa`` on [-1, 1]^4 with ``J(x) = P J0 P^-1``, ``P = exp(eps f(x) A)``.

    ``f = x1 * x2`` and ``A`` in sp(4) chosen from ``seed``.  Since ``P`` is
    symplectic, ``J`` stays kappa-calibrated.  ``P J0 P^-1 = exp(s ad_A) J0``
    with ``s = eps f``, so each entry of ``J`` is an entire series in ``s``
    and jets only pass through analytic composition.
    """
    if abs(eps) > 0.5:
        raise StructureError(
            f"symplectic_twist_r4: |eps| = {abs(eps)} outside the supported range |eps| <= 0.5 "
            "(positivity/conditioning guard)"
        )
    k0, J0 = standard_pair(2)
    A = twist_generator(seed)
    coeffs = [J0]
    term = J0
    for k in range(1, terms):
        term = (A @ term - term @ A) / k
        coeffs.append(term)
    C = np.array(coeffs)  # C[k] = ad_A^k(J0) / k!
    s = _bump(eps)
    Jfields = tuple(
        tuple(_SeriesEntry(C[:, a, b], s) if np.abs(C[:, a, b]).max() > 0 else 0.0 for b in range(4))
        for a in range(4)
    )
    kfields = {(0, 1): 1.0, (2, 3): 1.0}
    label = f"symplectic_twist_r4(eps={eps:g},seed={seed})"
    return AlmostKahlerChart(2, ((-1.0, 1.0),) * 4, kfields, Jfields, label, {"eps": eps, "seed": seed})


@dataclass(frozen=True)
class ZooEntry:
    id: str
    constructor: Callable[..., AlmostKahlerChart]
    params: dict[str, tuple[type, object, str]] = field(default_factory=dict)
    expected_verdict: str = ""
    facts: tuple[str, ...] = ()

    def build(self, **kwargs) -> AlmostKahlerChart:
        unknown = set(kwargs) - set(self.params)
        if unknown:
            raise KeyError(f"{self.id}: unknown parameter(s) {sorted(unknown)}")
        args = {k: typ(kwargs.get(k, default)) for k, (typ, default, _) in self.params.items()}
        return self.constructor(**args)

    def describe(self) -> dict:
        return {
            "id": self.id,
            "params": {k: {"type": t.__name__, "default": d, "doc": doc} for k, (t, d, doc) in self.params.items()},
            "expected_verdict": self.expected_verdict,
            "facts": list(self.facts),
        }


ZOO: dict[str, ZooEntry] = {
    "flat_kahler": ZooEntry(
        "flat_kahler",
        flat_kahler,
        {"n": (int, 2, "complex dimension, 1..4")},
        "kahler-consistent",
        ("metric is the identity everywhere", "all curvatures and N_J vanish identically"),
    ),
    "kodaira_thurston": ZooEntry(
        "kodaira_thurston",
        kodaira_thurston,
        {},
        "non-integrable",
        (
            "[e1, e2] = e3 for e1 = d/dx, e2 = d/dy + x d/dz",
            "N_J(e1, e2) = -e3 at every point, so |N_J(e1, e2)|_g = 1",
            "sectional curvature of span{e1, e2} is -3/4",
        ),
    ),
    "symplectic_twist_r4": ZooEntry(
        "symplectic_twist_r4",
        symplectic_twist_r4,
        {
            "eps": (float, 0.3, "twist amplitude, |eps| <= 0.5; eps = 0 is flat"),
            "seed": (int, 7, "seed choosing the sp(4) generator"),
        },
        "non-integrable for eps != 0, kahler-consistent for eps = 0",
        ("kappa is the standard form", "J is kappa-calibrated by symplectic conjugation"),
    ),
}


def build(chart_id: str, **params) -> AlmostKahlerChart:
    if chart_id not in ZOO:
        raise KeyError(f"unknown chart {chart_id!r}; known: {sorted(ZOO)}")
    return ZOO[chart_id].build(**params)
