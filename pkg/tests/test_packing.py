import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cpwalk.complex import constant_degree_ball, hex_ball, validate
from cpwalk.packing import (LayoutInconsistency, NonConvergence, Packing, PackingFormatError,
                            _FaceSystem, angle_at, angle_sum, angle_sums, euclidean_packing,
                            layout, load_packing, save_packing, solve_euclidean, solve_max_disc,
                            tangency_residual, univalence_violation)
from conftest import hex_regular, max_disc
from oracles import max_disc_triangle_radius, single_flower_radius, tangent_angle

TRIANGLE = validate([[1, 2], [2, 0], [0, 1]], [True, True, True])
radius = st.floats(0.01, 100.0)


def test_angle_at_examples():
    assert angle_at(1, 1, 1) == pytest.approx(math.pi / 3, abs=1e-15)
    # sides 3, 4, 5: right angle at the vertex of radius 1
    assert angle_at(1, 2, 3) == pytest.approx(math.pi / 2, abs=1e-15)


def test_angle_at_decreasing_in_r():
    vals = [angle_at(r, 1.0, 1.0) for r in (0.5, 1.0, 2.0)]
    assert vals[0] > vals[1] > vals[2]


def test_angle_at_rejects_nonpositive():
    with pytest.raises(ValueError):
        angle_at(0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        angle_at(1.0, -1.0, 1.0)


@settings(max_examples=200, deadline=None)
@given(radius, radius, radius)
def test_angle_at_matches_acos_oracle(a, b, c):
    assert angle_at(a, b, c) == pytest.approx(tangent_angle(a, b, c), abs=1e-12)
    assert 0 < angle_at(a, b, c) < math.pi


@settings(max_examples=100, deadline=None)
@given(radius, radius, radius)
def test_triangle_angles_sum_to_pi(a, b, c):
    assert angle_at(a, b, c) + angle_at(b, c, a) + angle_at(c, a, b) == pytest.approx(math.pi, abs=1e-12)


def test_angle_sum_examples():
    assert angle_sum(hex_ball(1), [1.0] * 7, 0) == pytest.approx(2 * math.pi, abs=1e-14)
    for v in range(3):
        assert angle_sum(TRIANGLE, [1, 1, 1], v) == pytest.approx(math.pi / 3, abs=1e-15)
    cx = hex_ball(2)
    for v in cx.flowers[0]:
        assert angle_sum(cx, [1.0] * cx.vertex_count, v) == pytest.approx(2 * math.pi, abs=1e-14)


def test_vectorized_angle_sums_agree():
    cx = constant_degree_ball(7, 3)
    r = np.random.default_rng(3).uniform(0.2, 2.0, cx.vertex_count)
    vec = angle_sums(cx, r)
    for v in range(cx.vertex_count):
        assert vec[v] == pytest.approx(angle_sum(cx, r, v), abs=1e-12)


@pytest.mark.parametrize("hyperbolic", [False, True])
def test_jacobian_matches_finite_differences(hyperbolic):
    cx = constant_degree_ball(7, 2)
    fs = _FaceSystem(cx)
    rng = np.random.default_rng(11)
    if hyperbolic:
        u = np.log(rng.uniform(0.2, 0.8, cx.vertex_count))
        u[np.array(cx.boundary)] = -np.inf  # horocycles
    else:
        u = np.log(rng.uniform(0.5, 2.0, cx.vertex_count))
    _, J = fs.evaluate(u, hyperbolic, jacobian=True)
    J = J.toarray()
    h = 1e-6
    for k, v in enumerate(fs.int_idx):
        up, dn = u.copy(), u.copy()
        up[v] += h
        dn[v] -= h
        col = (fs.evaluate(up, hyperbolic)[0] - fs.evaluate(dn, hyperbolic)[0])[fs.int_idx] / (2 * h)
        np.testing.assert_allclose(J[:, k], col, atol=1e-7)


def test_euclidean_hex_fixed_point():
    for n in (1, 2, 3, 5):
        r = solve_euclidean(hex_ball(n), 1.0)
        np.testing.assert_allclose(r, 1.0, rtol=1e-12)


def test_euclidean_scaled_boundary():
    r = solve_euclidean(hex_ball(1), 2.0)
    assert r[0] == pytest.approx(2.0, rel=1e-12)


def test_euclidean_uneven_flower_against_bisection():
    cx = hex_ball(1)
    bdry = [2.0, 1.0, 1.0, 1.0, 1.0, 1.0]
    r = solve_euclidean(cx, bdry, tol=1e-10)
    petals = [bdry[cx.boundary_vertices().index(u)] for u in cx.flowers[0]]
    expected = single_flower_radius(petals)
    assert expected == pytest.approx(1.1120097437493597, rel=1e-14)  # 40-digit root: 1.11200974374935966
    assert r[0] == pytest.approx(expected, rel=1e-12)
    assert abs(angle_sum(cx, r, 0) - 2 * math.pi) <= 1e-10


def test_euclidean_scaling_covariance():
    cx = hex_ball(3)
    rng = np.random.default_rng(5)
    b = rng.uniform(0.5, 2.0, len(cx.boundary_vertices()))
    r1 = solve_euclidean(cx, b)
    r2 = solve_euclidean(cx, 2 * b)
    np.testing.assert_allclose(r2, 2 * r1, rtol=1e-10)


def test_euclidean_residual_and_boundary_unchanged():
    cx = constant_degree_ball(7, 3)
    b = np.linspace(0.5, 1.5, len(cx.boundary_vertices()))
    r = solve_euclidean(cx, b, tol=1e-10)
    np.testing.assert_array_equal(r[cx.boundary_vertices()], b)
    sums = angle_sums(cx, r)[cx.interior_vertices()]
    assert np.max(np.abs(sums - 2 * math.pi)) <= 1e-10


def test_euclidean_rejects_bad_boundary():
    with pytest.raises(ValueError):
        solve_euclidean(hex_ball(2), -1.0)
    with pytest.raises(ValueError):
        solve_euclidean(hex_ball(2), [1.0, 2.0])


def test_nonconvergence_reports_best():
    cx = constant_degree_ball(7, 4)
    with pytest.raises(NonConvergence) as err:
        solve_euclidean(cx, np.linspace(0.1, 10, len(cx.boundary_vertices())), tol=1e-10, max_iter=1)
    assert err.value.residual > 1e-10
    assert len(err.value.best) == cx.vertex_count


def test_layout_examples():
    z = layout(TRIANGLE, [1, 1, 1])
    np.testing.assert_allclose(z, [0, 2, complex(1, math.sqrt(3))], atol=1e-15)
    cx, P = hex_regular(2)
    d = np.abs(P.centers[:, None] - P.centers[None, :])
    edges = np.array(cx.edges())
    np.testing.assert_allclose(d[edges[:, 0], edges[:, 1]], 2.0, atol=1e-13)
    # lattice: every center is an integer combination of 2 and 2 omega
    omega = complex(0.5, math.sqrt(3) / 2)
    j = P.centers.imag / (2 * omega.imag)
    i = (P.centers.real - 2 * j * omega.real) / 2
    np.testing.assert_allclose(i, np.round(i), atol=1e-12)
    np.testing.assert_allclose(j, np.round(j), atol=1e-12)


def test_layout_anchor_and_orientation():
    cx = constant_degree_ball(7, 3)
    r = solve_euclidean(cx, 1.0)
    z = layout(cx, r, anchor=0, anchor_petal=cx.flowers[0][2])
    assert z[0] == 0
    assert abs(z[cx.flowers[0][2]].imag) < 1e-14 and z[cx.flowers[0][2]].real > 0
    for a, b, c in cx.faces():
        area = ((z[b] - z[a]).conjugate() * (z[c] - z[a])).imag
        assert area > 0


def test_layout_inconsistency_detected():
    cx = hex_ball(2)
    r = np.ones(cx.vertex_count)
    r[0] = 1.2  # angle sum at 0 no longer 2 pi
    with pytest.raises(LayoutInconsistency):
        layout(cx, r)


@pytest.mark.parametrize("family,n", [("hex", 3), ("deg7", 3), ("deg7", 5)])
def test_euclidean_tangency_and_univalence(family, n):
    cx = hex_ball(n) if family == "hex" else constant_degree_ball(7, n)
    b = 1 + 0.5 * np.sin(np.arange(len(cx.boundary_vertices())))
    P = euclidean_packing(cx, b)
    assert tangency_residual(P) <= 1e-8 * P.radii.max()
    assert univalence_violation(P) <= 1e-8 * P.radii.max()


def test_max_disc_single_triangle():
    P = solve_max_disc(TRIANGLE)
    expected = max_disc_triangle_radius()
    assert expected == pytest.approx(2 * math.sqrt(3) - 3, abs=1e-15)
    np.testing.assert_allclose(P.radii, expected, rtol=1e-10)
    np.testing.assert_allclose(np.abs(P.centers) + P.radii, 1.0, atol=1e-10)


def test_max_disc_hex1_symmetric():
    cx, P = max_disc("hex", 1)
    assert P.centers[0] == 0
    assert P.radii[0] == pytest.approx(1 / 3, rel=1e-10)
    np.testing.assert_allclose(P.radii[1:], P.radii[1], rtol=1e-10)
    # first petal on the positive real axis
    f = cx.flowers[0][0]
    assert abs(P.centers[f].imag) < 1e-14 and P.centers[f].real > 0


def test_max_disc_hex_center_radius_decreases():
    r = [max_disc("hex", n)[1].radii[0] for n in range(4, 9)]
    np.testing.assert_allclose(r, [0.1216, 0.0998, 0.0846, 0.0735, 0.0649], atol=1e-4)
    assert all(b / a < 0.9 for a, b in zip(r, r[1:]))


@pytest.mark.parametrize("family,n", [("hex", 4), ("deg7", 3), ("deg7", 5)])
def test_max_disc_invariants(family, n):
    cx, P = max_disc(family, n)
    assert P.geometry == "disc"
    assert P.residual <= 1e-10
    assert tangency_residual(P) <= 1e-8 * P.radii.max()
    assert univalence_violation(P) <= 1e-10
    b = cx.boundary_vertices()
    assert np.max(np.abs(np.abs(P.centers[b]) + P.radii[b] - 1)) <= 1e-8
    assert np.all(np.abs(P.centers) + P.radii <= 1 + 1e-10)
    assert P.labels is not None and np.all(P.labels[b] == 0)


def test_max_disc_boundary_anchor():
    cx = hex_ball(2)
    v = cx.boundary_vertices()[0]
    P = solve_max_disc(cx, anchor=v)
    assert abs(P.centers[v].imag) < 1e-12 and P.centers[v].real > 0
    b = cx.boundary_vertices()
    assert np.max(np.abs(np.abs(P.centers[b]) + P.radii[b] - 1)) <= 1e-8


def test_packing_validation():
    with pytest.raises(ValueError):
        Packing(TRIANGLE, "spherical", [1, 1, 1], [0, 2, 1j])
    with pytest.raises(ValueError):
        Packing(TRIANGLE, "euclidean", [1, 1], [0, 2])


def test_packing_file_round_trip(tmp_path):
    cx, P = max_disc("deg7", 3)
    p = tmp_path / "p.txt"
    save_packing(P, p)
    Q = load_packing(p, cx)
    np.testing.assert_array_equal(Q.radii, P.radii)
    np.testing.assert_array_equal(Q.centers, P.centers)
    assert Q.geometry == "disc"
    q = tmp_path / "q.txt"
    save_packing(Q, q)
    assert p.read_bytes() == q.read_bytes()


def test_packing_file_errors(tmp_path):
    p = tmp_path / "p.txt"
    p.write_text("packing 3 euclidean\n0 0 0 1\n1 2 0 1\n1 1 1.7 1\n")
    with pytest.raises(PackingFormatError, match="line 4"):
        load_packing(p, TRIANGLE)
    p.write_text("packing 3 euclidean\n0 0 0 1\n1 2 0 0\n2 1 1.7 1\n")
    with pytest.raises(PackingFormatError, match="line 3"):
        load_packing(p, TRIANGLE)
    p.write_text("packing 4 euclidean\n")
    with pytest.raises(PackingFormatError):
        load_packing(p, TRIANGLE)


def test_load_accepts_overlapping_packing(tmp_path):
    p = tmp_path / "p.txt"
    p.write_text("packing 3 euclidean\n0 0 0 1\n1 1.5 0 1\n2 0.75 1.3 1\n")
    P = load_packing(p, TRIANGLE)
    assert univalence_violation(P) > 0.4
