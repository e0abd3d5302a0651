import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from akahler import jets
from akahler.jets import DomainError, Jet, JetOrderError, JetSingularityError

from conftest import all_charts, fd_partial

finite = st.floats(-2, 2, allow_nan=False, allow_infinity=False)


def poly(x):
    # 3 x^2 y + y^3 z - 2 x z + 5
    return 3 * x[0] ** 2 * x[1] + x[1] ** 3 * x[2] - 2 * x[0] * x[2] + 5


def test_monomials_are_graded_and_prefix_closed():
    mons = jets.monomials(3, 3)
    assert len(mons) == math.comb(3 + 3, 3)
    degrees = [sum(m) for m in mons]
    assert degrees == sorted(degrees)
    assert jets.monomials(3, 2) == mons[: jets.ncoeffs(3, 2)]


def test_polynomial_partials_exact():
    p = [0.5, -1.0, 2.0]
    j = jets.jet_lift(poly, p, order=3)
    x, y, z = p
    assert j.value == pytest.approx(poly(p))
    assert jets.extract_partial(j, (1, 0, 0)) == pytest.approx(6 * x * y - 2 * z)
    assert jets.extract_partial(j, (0, 1, 0)) == pytest.approx(3 * x**2 + 3 * y**2 * z)
    assert jets.extract_partial(j, (0, 2, 1)) == pytest.approx(6 * y)
    assert jets.extract_partial(j, (2, 1, 0)) == pytest.approx(6.0)
    assert jets.extract_partial(j, (0, 3, 0)) == pytest.approx(6 * z)
    assert jets.extract_partial(j, (1, 1, 1)) == 0.0


def test_extract_partial_order_errors():
    j = jets.jet_lift(poly, [0, 0, 0], order=2)
    with pytest.raises(JetOrderError):
        jets.extract_partial(j, (0, 3, 0))
    with pytest.raises(ValueError):
        jets.extract_partial(j, (1, 0))
    with pytest.raises(JetOrderError):
        Jet.constant(1.0, 2, 0).grad()


def test_domain_check():
    with pytest.raises(DomainError):
        jets.jet_lift(poly, [0, 0, 3.0], domain=((-1, 1),) * 3)
    jets.jet_lift(poly, [0, 0, 1.0], domain=((-1, 1),) * 3)


@pytest.mark.parametrize(
    "name, f, derivs",
    [
        ("exp", np.exp, lambda t: [np.exp(t)] * 4),
        ("sin", np.sin, lambda t: [np.sin(t), np.cos(t), -np.sin(t), -np.cos(t)]),
        ("log", np.log, lambda t: [np.log(t), 1 / t, -1 / t**2, 2 / t**3]),
        ("sqrt", np.sqrt, lambda t: [t**0.5, 0.5 * t**-0.5, -0.25 * t**-1.5, 0.375 * t**-2.5]),
    ],
)
def test_compose_univariate(name, f, derivs):
    t0 = 0.7
    j = jets.jet_arith(Jet.variable(0, [t0], 3), name, "compose")
    for k, d in enumerate(derivs(t0)):
        assert jets.extract_partial(j, (k,)) == pytest.approx(d, rel=1e-13)


def test_singularities_raise():
    zero = Jet.variable(0, [0.0], 2)
    with pytest.raises(JetSingularityError):
        1.0 / zero
    with pytest.raises(JetSingularityError):
        jets.log(zero)
    with pytest.raises(JetSingularityError):
        jets.sqrt(zero)
    with pytest.raises(ZeroDivisionError):
        zero**-1


def test_rational_field_matches_finite_differences():
    def f(x):
        return (1 + x[0] * x[1]) / (2 + x[0] ** 2) + jets.sin(x[1]) * x[0]

    def f_plain(x):
        return (1 + x[0] * x[1]) / (2 + x[0] ** 2) + np.sin(x[1]) * x[0]

    p = [0.3, -0.4]
    j = jets.jet_lift(f, p, order=2)
    for k in range(2):
        e = [0, 0]
        e[k] = 1
        assert jets.extract_partial(j, e) == pytest.approx(fd_partial(f_plain, p, k), abs=1e-9)


def test_zoo_component_fields_match_finite_differences():
    """Jet partials against the Richardson oracle on 200 random probes of zoo component fields."""
    rng = np.random.default_rng(6)
    charts = all_charts()
    worst = 0.0
    for _ in range(200):
        chart = charts[rng.integers(len(charts))]
        p = rng.uniform(-0.9, 0.9, chart.dim)
        k = int(rng.integers(chart.dim))
        if rng.random() < 0.5:
            field = chart._J_entries
            jet = chart.J_jet(p, 1)
        else:
            field = chart._kappa_entries
            jet = chart.kappa_jet(p, 1)
        exact = jet.grad().value[..., k]
        approx = fd_partial(field, p, k)
        worst = max(worst, np.abs(exact - approx).max())
    assert worst <= 1e-6


def test_second_partials_match_finite_differences(twist):
    p = np.array([0.2, -0.3, 0.4, 0.1])
    J2 = twist.J_jet(p, 2).grad().grad().value  # [a, b, k, l]
    for k, l in [(0, 2), (0, 0), (2, 2), (1, 3)]:
        d_l = lambda q: np.asarray(twist.J_jet(q, 1).grad().value[..., l])  # noqa: E731
        approx = fd_partial(lambda q: d_l(np.asarray(q)), p, k)
        assert np.abs(J2[..., k, l] - approx).max() <= 1e-8


def test_grad_commutes():
    j = jets.jet_lift(lambda x: jets.exp(x[0] * x[1]) * x[2] ** 2, [0.1, 0.2, 0.3], 3)
    H = j.grad().grad().value
    assert np.allclose(H, H.T, atol=1e-14)


def test_einsum_matches_numpy_on_values(rng):
    A = Jet(rng.standard_normal((3, 4, 10)), 3, 2)
    B = Jet(rng.standard_normal((4, 2, 10)), 3, 2)
    C = jets.einsum("ab,bc->ac", A, B)
    assert np.allclose(C.value, A.value @ B.value)
    D = jets.einsum("...b,bc->...c", A, B)
    assert np.allclose(D.value, C.value)
    M = rng.standard_normal((2, 3))
    assert np.allclose(jets.einsum("ab,ca->cb", A, M).value, M @ A.value)


def test_matrix_inverse(rng):
    M = Jet(rng.standard_normal((3, 3, 10)), 3, 2)
    M.coeffs[..., 0] += 3 * np.eye(3)
    ident = jets.einsum("ab,bc->ac", jets.inv(M), M)
    expected = Jet.constant(np.eye(3), 3, 2)
    assert np.abs(ident.coeffs - expected.coeffs).max() < 1e-12


def _coeff_jet(c, nvars=2, order=2):
    return Jet(np.asarray(c, dtype=float), nvars, order)


coeff_lists = st.lists(finite, min_size=6, max_size=6)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists, coeff_lists)
def test_ring_axioms(a, b, c):
    A, B, C = _coeff_jet(a), _coeff_jet(b), _coeff_jet(c)
    assert np.allclose((A * B).coeffs, (B * A).coeffs)
    assert np.allclose(((A * B) * C).coeffs, (A * (B * C)).coeffs, atol=1e-10)
    assert np.allclose((A * (B + C)).coeffs, (A * B + A * C).coeffs, atol=1e-10)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists, st.floats(0.5, 3))
def test_division_inverts_multiplication(a, b, shift):
    A = _coeff_jet(a)
    b = list(b)
    b[0] = shift if abs(b[0]) < 0.5 else b[0]
    B = _coeff_jet(b)
    assert np.allclose(((A / B) * B).coeffs, A.coeffs, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(coeff_lists, coeff_lists, st.integers(0, 1))
def test_product_rule(a, b, k):
    A, B = _coeff_jet(a), _coeff_jet(b)
    lhs = (A * B).partial(k)
    rhs = A.partial(k) * B.truncate(1) + A.truncate(1) * B.partial(k)
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.lists(finite, min_size=2, max_size=2), st.lists(finite, min_size=4, max_size=4))
def test_lift_of_product_is_product_of_lifts(p, c):
    f = lambda x: c[0] + c[1] * x[0] + c[2] * x[0] * x[1] ** 2  # noqa: E731
    g = lambda x: jets.cos(x[0]) + c[3] * x[1]  # noqa: E731
    fg = jets.jet_lift(lambda x: f(x) * g(x), p, 3)
    assert np.allclose(fg.coeffs, (jets.jet_lift(f, p, 3) * jets.jet_lift(g, p, 3)).coeffs, atol=1e-10)


def test_mixed_order_truncates():
    a = Jet.variable(0, [1.0, 2.0], 3)
    b = Jet.variable(1, [1.0, 2.0], 1)
    assert (a * b).order == 1
    assert (a + b).order == 1


def test_jet_arith_rejects_unknown_op():
    with pytest.raises(ValueError):
        jets.jet_arith(Jet.constant(1.0, 1, 1), 1.0, "pow")
