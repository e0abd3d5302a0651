import numpy as np
import pytest

from akahler import connections as C
from akahler import jets, zoo
from akahler.charts import bracket_jets, lift_vector
from akahler.frames import (
    FrameConstructionError,
    FrameJet,
    construct_gnh_frame,
    frame_components,
    hermitian_orthonormal_frame,
    parse_pattern,
    project,
    real_frame,
    unitary_frame,
    verify_gnh_properties,
)

CHARTS = [zoo.flat_kahler(2), zoo.kodaira_thurston(), zoo.symplectic_twist_r4(0.3)]


def test_project_flat():
    flat = zoo.flat_kahler(1)
    v = project(flat, [0, 0], [1.0, 0.0], "(1,0)")
    assert np.allclose(v, [0.5, -0.5j])
    assert np.allclose(project(flat, [0, 0], [1.0, 0.0], "(0,1)"), [0.5, 0.5j])


def test_projector_identities(twist, rng):
    p = rng.uniform(-1, 1, 4)
    J = twist.J_matrix(p)
    for _ in range(5):
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        a, b = project(twist, p, v, "10"), project(twist, p, v, "01")
        assert np.abs(a + b - v).max() <= 1e-12
        assert np.abs(project(twist, p, a, "10") - a).max() <= 1e-12
        assert np.abs(J @ a - 1j * a).max() <= 1e-12
        assert np.abs(J @ np.conj(a) + 1j * np.conj(a)).max() <= 1e-12
    with pytest.raises(ValueError):
        project(twist, p, v, "(2,0)")


def test_project_kt(kt):
    p = [1.0, 0.0, 0.0, 0.0]
    z = project(kt, p, [0, 1.0, 0, 0])
    assert np.abs(kt.J_matrix(p) @ z - 1j * z).max() <= 1e-12


@pytest.mark.parametrize("chart", CHARTS, ids=lambda c: c.label)
def test_hermitian_frame_is_unitary(chart, rng):
    for p in rng.uniform(-1, 1, (5, 4)):
        W = hermitian_orthonormal_frame(chart, p)
        g = C.geometry(chart, p).g0
        assert np.abs(W @ g @ np.conj(W).T - np.eye(2)).max() <= 1e-12
        assert np.abs(W @ chart.J_matrix(p).T - 1j * W).max() <= 1e-12
        E = real_frame(W)
        assert np.abs(E @ g @ E.T - np.eye(4)).max() <= 1e-12


def test_hermitian_frame_kt_origin(kt):
    W = hermitian_orthonormal_frame(kt, np.zeros(4))
    s = 1 / np.sqrt(2)
    assert np.allclose(W, [[s, 0, -1j * s, 0], [0, s, 0, -1j * s]])


def test_hermitian_frame_idempotent(twist):
    p = np.array([0.4, 0.2, -0.7, 0.1])
    geo = C.geometry(twist, p)
    W = hermitian_orthonormal_frame(twist, p)
    again = unitary_frame(geo.g0, geo.J0, seeds=W)
    assert np.abs(again - W).max() <= 1e-12


def test_flat_frame_is_constant():
    F = construct_gnh_frame(zoo.flat_kahler(2), np.zeros(4))
    assert np.all(F.a == 0) and np.all(F.b == 0)
    assert np.all(F.z1 == 0) and np.all(F.z2 == 0)
    assert max(F.residuals.values()) <= 1e-15


@pytest.mark.parametrize("chart", CHARTS, ids=lambda c: c.label)
def test_construct_gnh_frame(chart, rng):
    for o in rng.uniform(-0.95, 0.95, (10, 4)):
        F = construct_gnh_frame(chart, o)
        assert max(F.residuals.values()) <= 1e-7
        assert F.residuals["type_10"] <= 1e-10
        assert F.residuals["cond3_value"] <= 1e-9
        assert F.residuals["cond3_differential"] <= 1e-8
        # the ansatz keeps Z of type (1,0) to second order around o
        Z = F.jet(2)
        JZ = jets.einsum("ab,ib->ia", chart.J_jet(o, 2), Z)
        assert np.abs((JZ - Z * 1j).coeffs).max() <= 1e-12


def test_perturbed_frame_fails_condition_1(kt):
    F = construct_gnh_frame(kt, np.array([0.2, 0.1, -0.3, 0.5]))
    bad = F.with_perturbation(1e-2)
    res = verify_gnh_properties(kt, bad)
    assert res["cond1"] > 1e-3


def test_frame_jet_matches_field(twist):
    o = np.array([0.3, -0.1, 0.2, 0.6])
    F = construct_gnh_frame(twist, o)
    for i in range(2):
        lifted = lift_vector(F.vector_field(i), o, 3)
        assert np.abs(lifted.coeffs - F.jet(3)[i].coeffs).max() <= 1e-14
        lifted_bar = lift_vector(F.vector_field(i, conjugate=True), o, 3)
        assert np.abs(lifted_bar.coeffs - F.jet(3)[i].conj().coeffs).max() <= 1e-14


def test_construction_failure_is_loud(kt):
    with pytest.raises(FrameConstructionError) as info:
        construct_gnh_frame(kt, np.zeros(4), tol=0.0)
    assert info.value.condition in verify_gnh_properties(kt, construct_gnh_frame(kt, np.zeros(4)))


def test_parse_pattern():
    assert parse_pattern("ījrs̄") == [("i", True), ("j", False), ("r", False), ("s", True)]
    assert parse_pattern("i*j r s*") == parse_pattern("ījrs̄")
    with pytest.raises(ValueError):
        parse_pattern("i1")


def test_frame_components_basic(kt, flat):
    p = np.array([0.2, 0.3, -0.1, 0.0])
    W = hermitian_orthonormal_frame(kt, p)
    g = lambda chart, q, u, v: C.gpair(C.geometry(chart, q).g0, u, v)  # noqa: E731
    assert np.abs(frame_components(kt, W, g, "rs̄", point=p) - np.eye(2)).max() <= 1e-12
    Wf = hermitian_orthonormal_frame(flat, p)
    assert np.all(frame_components(flat, Wf, C.nijenhuis, "ik", point=p) == 0)
    with pytest.raises(ValueError):
        frame_components(kt, W, C.riemann, "ij̄r", point=p)
    with pytest.raises(ValueError):
        frame_components(kt, W, C.riemann, "ij̄rs")


def test_frame_components_with_frame_jet(kt):
    F = construct_gnh_frame(kt, np.array([0.1, 0.2, 0.3, 0.4]))
    a = frame_components(kt, F, C.riemann, "ij̄rs̄")
    b = frame_components(kt, F.z0, C.riemann, "ij̄rs̄", point=F.point)
    assert np.abs(a - b).max() <= 1e-14
    assert a.shape == (2, 2, 2, 2)
    assert frame_components(kt, F, C.riemann, "ij̄ij̄").shape == (2, 2)


@pytest.mark.parametrize("chart", CHARTS[1:], ids=lambda c: c.label)
def test_nijenhuis_bracket_constant_in_normal_frame(chart, rng):
    """N_J(Z_i, Z_k)(o) = -4 [Z_i, Z_k](o); the constant is forced by T = N_J / 4."""
    for o in rng.uniform(-0.9, 0.9, (5, 4)):
        F = construct_gnh_frame(chart, o)
        Z = F.jet(3)
        g0 = C.geometry(chart, o).g0
        N = frame_components(chart, F, C.nijenhuis, "ik")
        br = np.array([[bracket_jets(Z[i], Z[k]).value for k in range(2)] for i in range(2)])
        assert C.gnorm(g0, N + 4 * br).max() <= 1e-9
        # the Hermitian connection kills Z_i along Z_k at o
        Gt = C.geometry(chart, o).hermitian_gamma
        D = C.cov_vector(Z, Gt).value
        assert np.abs(np.einsum("iac,kc->kia", D, Z.value)).max() <= 1e-9


def test_rj_frame_lemma_and_L_relation(kt, twist, rng):
    for chart in (kt, twist):
        o = rng.uniform(-0.9, 0.9, 4)
        F = construct_gnh_frame(chart, o)
        geo = C.geometry(chart, o)
        RJ = frame_components(chart, F, C.RJ_tensor, "ījrs̄")
        R = frame_components(chart, F, C.riemann, "ījrs̄")
        L = frame_components(chart, F, C.L_tensor, "ījrs̄")
        assert np.abs(L - (-2 * RJ + 2 * R)).max() <= 1e-7
        Z = F.jet(3)
        nZ = jets.einsum("rac,jc->jra", C.cov_vector(Z, geo.gamma), Z)
        JnZ = jets.einsum("ab,jrb->jra", geo.J, nZ)
        Zb = np.conj(Z.value)
        v = np.einsum("jrac,ic->ijra", C.cov_vector(JnZ, geo.gamma).value, Zb)
        rhs = -1j * np.einsum("ijra,ab,sb->ijrs", v, geo.g0, Zb)
        assert np.abs(RJ - rhs).max() <= 1e-7
