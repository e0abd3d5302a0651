import numpy as np
import pytest
from scipy.linalg import expm

from akahler import zoo
from akahler.charts import StructureError, metric_eval, validate_structure


def test_registry():
    assert set(zoo.ZOO) == {"flat_kahler", "kodaira_thurston", "symplectic_twist_r4"}
    for entry in zoo.ZOO.values():
        d = entry.describe()
        assert d["id"] == entry.id and d["expected_verdict"]
        assert validate_structure(entry.build(), 20).passed


def test_build_with_params():
    assert zoo.build("flat_kahler", n=3).dim == 6
    assert zoo.build("symplectic_twist_r4", eps="0.1").params["eps"] == 0.1
    with pytest.raises(KeyError):
        zoo.build("flat_kahler", eps=1)
    with pytest.raises(KeyError):
        zoo.build("nope")


def test_flat_bounds():
    with pytest.raises(ValueError):
        zoo.flat_kahler(0)
    with pytest.raises(ValueError):
        zoo.flat_kahler(5)


def test_flat_metric_is_identity(rng):
    chart = zoo.flat_kahler(3)
    for p in rng.uniform(-1, 1, (5, 6)):
        assert np.array_equal(metric_eval(chart, p), np.eye(6))


def test_twist_generator_is_symplectic():
    k0, _ = zoo.standard_pair(2)
    for seed in range(5):
        A = zoo.twist_generator(seed)
        assert np.abs(A.T @ k0 + k0 @ A).max() < 1e-14
        assert np.linalg.norm(A) == pytest.approx(1.0)


def test_twist_matches_matrix_exponential(rng):
    """The ad-series for J agrees with a dense matrix exponential."""
    eps, seed = 0.3, 7
    chart = zoo.symplectic_twist_r4(eps, seed)
    A = zoo.twist_generator(seed)
    _, J0 = zoo.standard_pair(2)
    for p in rng.uniform(-1, 1, (10, 4)):
        P = expm(eps * p[0] * p[2] * A)
        assert np.abs(chart.J_matrix(p) - P @ J0 @ np.linalg.inv(P)).max() < 1e-13


def test_twist_zero_is_flat(rng):
    chart = zoo.symplectic_twist_r4(0.0)
    flat = zoo.flat_kahler(2)
    for p in rng.uniform(-1, 1, (5, 4)):
        assert np.array_equal(chart.J_matrix(p), flat.J_matrix(p))
        assert np.abs(chart.J_jet(p, 3).coeffs - flat.J_jet(p, 3).coeffs).max() == 0


def test_twist_compatibility(rng):
    chart = zoo.symplectic_twist_r4(0.3)
    for p in rng.uniform(-1, 1, (20, 4)):
        k, J = chart.kappa_matrix(p), chart.J_matrix(p)
        X, Y = rng.standard_normal((2, 4))
        assert abs((J @ X) @ k @ (J @ Y) - X @ k @ Y) <= 1e-10


def test_twist_range_guard():
    with pytest.raises(StructureError):
        zoo.symplectic_twist_r4(0.9)
    zoo.symplectic_twist_r4(-0.5)
