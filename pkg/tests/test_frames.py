import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherecong import frames as fr
from spherecong import gallery
from spherecong.errors import StencilOutsideDomain, UmbilicPoint
from spherecong.surfaces import DslSurface, Reparametrized

import oracles

# frozen from tests/oracles.py (finite differences + Richardson, see scripts/oracle_values.py)
GRAPH_R5_SWILLMORE_AT_0201 = 0.55548767827
GRAPH_R5_SWILLMORE_AT_03m02 = 0.46701150


def fd_at(src, p=(0.0, 0.0), order=2):
    return fr.fundamental_forms(DslSurface.from_source(src).jet(p, order))


def test_plane():
    fd = fd_at("[u, v, 0, 0]")
    for a in (fd.alpha11, fd.alpha12, fd.alpha22, fd.H):
        assert np.all(a == 0)
    assert fd.dim_N1 == 0 and "degenerate_N1" in fd.flags


def test_paraboloid_umbilic():
    fd = fd_at("[u, v, u^2 + v^2, 0]")
    np.testing.assert_allclose(fd.alpha11, [0, 0, 2, 0])
    np.testing.assert_allclose(fd.alpha22, [0, 0, 2, 0])
    np.testing.assert_allclose(fd.alpha12, 0)
    np.testing.assert_allclose(fd.H, [0, 0, 2, 0])
    assert fd.umbilic and fd.mu == 0
    el = fr.ellipse_of_curvature(fd)
    assert el.semi_major == 0 and el.semi_minor == 0
    np.testing.assert_allclose(el.center, [0, 0, 2, 0])


def test_holomorphic_curve_frame():
    fd = fd_at("[u, v, u^2 - v^2, 2*u*v]")
    np.testing.assert_allclose(fd.H, 0, atol=1e-15)
    assert fd.mu == pytest.approx(2.0)
    np.testing.assert_allclose(fd.xi1, [0, 0, 1, 0], atol=1e-15)
    np.testing.assert_allclose(fd.xi2, [0, 0, 0, 1], atol=1e-15)


def test_holomorphic_curve_ellipse_is_circle_of_radius_two():
    src = "[u, v, u^2 - v^2, 2*u*v]"
    el = fr.ellipse_of_curvature(fd_at(src))
    assert el.semi_major == pytest.approx(2.0) and el.semi_minor == pytest.approx(2.0)
    assert el.circle_residual < 1e-12
    pts, H = oracles.sampled_ellipse(DslSurface.from_source(src).value, (0.0, 0.0))
    np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 2.0, rtol=1e-7)


def test_graph_segment_ellipse():
    fd = fd_at("[u, v, u^2, 0]")
    el = fr.ellipse_of_curvature(fd)
    assert el.semi_minor == 0.0
    assert el.circle_residual == pytest.approx(2.0)
    assert fr.superconformal_residual(fd) == pytest.approx(2 / 9)
    assert "segment" in fd.flags


@pytest.mark.parametrize("p", [(0.1, 0.2), (0.4, -0.3), (-0.9, 0.7)])
def test_holomorphic_curve_superconformal(p):
    src = "[u, v, u^3 - 3*u*v^2 + u, 3*u^2*v - v^3 + v]"
    fd = fd_at(src, p)
    assert fr.superconformal_residual(fd) < 1e-10
    assert oracles.sampled_radius_ratio(DslSurface.from_source(src).value, p) < 1e-6


def test_round_sphere_umbilic_convention():
    spec = gallery.make("round_sphere_slice").spec
    fd = fr.fundamental_forms(spec.jet((0.3, 0.2), 2))
    assert fd.umbilic
    assert fr.superconformal_residual(fd) == 0.0


def test_normal_derivative_of_minimal_and_sphere():
    for src in ("[u, v, u^2 - v^2, 2*u*v]", "[u, v, u^3 - 3*u*v^2, 3*u^2*v - v^3]"):
        n1, n2 = fr.normal_derivative_H(DslSurface.from_source(src).jet((0.3, 0.1), 3))
        assert np.linalg.norm(n1) < 1e-10 and np.linalg.norm(n2) < 1e-10
    n1, n2 = fr.normal_derivative_H(gallery.make("round_sphere_slice").spec.jet((0.3, 0.2), 3))
    assert np.linalg.norm(n1) < 1e-9 and np.linalg.norm(n2) < 1e-9


def test_normal_derivative_against_oracle():
    s = DslSurface.from_source("[u, v, u^2 + v^3, u*v, 0]")
    p = (0.2, 0.1)
    got = fr.normal_derivative_H(s.jet(p, 3))
    ref = oracles.normal_dH(s.value, p)
    for g, r in zip(got, ref):
        np.testing.assert_allclose(g, r, atol=1e-6)


def test_s_willmore_minimal_is_zero():
    s = gallery.make("holo_curve_generic").spec
    for p in [(0.3, 0.2), (-0.5, 0.6)]:
        assert fr.s_willmore_residual(s.jet(p, 3)) < 1e-12


def test_s_willmore_torus_image():
    s = gallery.make("stereo_torus_r5").spec
    worst = max(fr.s_willmore_residual(s.jet(p, 3)) for p in s.domain.grid(21, 21))
    assert worst < 1e-7


def test_s_willmore_generic_graph_frozen():
    s = gallery.make("graph_generic_r5").spec
    assert fr.s_willmore_residual(s.jet((0.2, 0.1), 3)) == pytest.approx(GRAPH_R5_SWILLMORE_AT_0201, abs=1e-6)
    assert fr.s_willmore_residual(s.jet((0.3, -0.2), 3)) == pytest.approx(GRAPH_R5_SWILLMORE_AT_03m02, abs=1e-6)
    assert GRAPH_R5_SWILLMORE_AT_0201 > 1e-3


def test_s_willmore_raises_at_umbilic():
    with pytest.raises(UmbilicPoint):
        fr.s_willmore_residual(gallery.make("round_sphere_slice").spec.jet((0.1, 0.1), 3))


def test_willmore_minimal_and_sphere():
    assert fr.willmore_residual(gallery.make("holo_curve_generic").spec, (0.3, 0.2)) < 1e-6
    assert fr.willmore_residual(gallery.make("round_sphere_slice").spec, (0.3, 0.2)) < 1e-6


def test_willmore_torus_image_and_step_decay():
    s = gallery.make("stereo_torus_r5").spec
    for p in [(1.0, 2.0), (3.5, 0.7), (5.0, 4.4)]:
        r1 = fr.willmore_residual(s, p, 1e-2)
        r2 = fr.willmore_residual(s, p, 2e-3)
        assert r2 < 1e-5
        assert r2 <= r1 + 1e-12
        assert fr.willmore_residual_exact(s.jet(p, 4)) < 1e-9


def test_willmore_fd_matches_exact_on_generic_graph():
    s = gallery.make("graph_generic_r5").spec
    p = (0.2, 0.1)
    exact = fr.willmore_residual_exact(s.jet(p, 4))
    assert exact > 1e-2
    assert fr.willmore_residual(s, p) == pytest.approx(exact, rel=1e-5)


def test_willmore_stencil_must_fit():
    s = gallery.make("graph_generic_r5").spec
    with pytest.raises(StencilOutsideDomain):
        fr.willmore_residual(s, (0.9999, 0.0), 1e-3)


SMOOTH = ["holo_curve_generic", "graph_generic_r5", "graph_generic_r6", "stereo_torus_r5",
          "stereo_veronese_r4", "rouxel_generic_r4", "inverted_isotropic_r6"]


def interior_point(spec, a, b):
    (u0, u1), (v0, v1) = spec.domain.u_range, spec.domain.v_range
    return (u0 + (0.15 + 0.7 * a) * (u1 - u0), v0 + (0.15 + 0.7 * b) * (v1 - v0))


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SMOOTH), st.floats(0, 1), st.floats(0, 1), st.floats(0.1, 3.0))
def test_frame_choice_invariance(gid, a, b, angle):
    spec = gallery.make(gid).spec
    p = interior_point(spec, a, b)
    if not spec.domain.contains(p):
        return
    rot = Reparametrized.rotation(spec, angle)
    q = np.linalg.solve(rot.matrix, np.asarray(p))
    j, jr = spec.jet(p, 3), rot.jet(q, 3)
    fd, fdr = fr.fundamental_forms(j), fr.fundamental_forms(jr)
    assert abs(fr.superconformal_residual(fd) - fr.superconformal_residual(fdr)) < 1e-10
    assert abs(fd.H_norm - fdr.H_norm) < 1e-10 * (1 + fd.H_norm)
    e, er = fr.ellipse_of_curvature(fd), fr.ellipse_of_curvature(fdr)
    assert abs(e.semi_major - er.semi_major) < 1e-10 * (1 + e.semi_major)
    assert abs(e.semi_minor - er.semi_minor) < 1e-10 * (1 + e.semi_major)
    if not fd.umbilic:
        assert abs(fr.s_willmore_residual(j) - fr.s_willmore_residual(jr)) < 1e-10


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(gallery.ids()), st.floats(0, 1), st.floats(0, 1))
def test_first_normal_space_invariants(gid, a, b):
    spec = gallery.make(gid).spec
    p = interior_point(spec, a, b)
    if not spec.domain.contains(p):
        return
    fd = fr.fundamental_forms(spec.jet(p, 2), spec.metric)
    assert fd.dim_N1 <= 3
    if spec.metric is None and fr.superconformal_residual(fd) < 1e-8 and fd.mu > 1e-6:
        assert fd.dim_N1 in (2, 3)
    if fd.xi1 is not None and fd.lambda1 is not None and spec.metric is None:
        assert abs(fd.theta + fd.lam ** 2 - fd.H_norm ** 2) < 1e-10 * (1 + fd.H_norm ** 2)


def test_sampling_defect_small_on_gallery():
    for gid in gallery.ids():
        spec = gallery.make(gid).spec
        if spec.metric is not None:
            continue
        for p in spec.domain.grid(5, 5):
            fd = fr.fundamental_forms(spec.jet(p, 2))
            assert fr.ellipse_sampling_defect(fd) < 1e-9, (gid, p)


def test_ellipse_distance_segment_endpoints_and_brute_force():
    a = np.array([0.35, 0.0, 0.0, 0.0])
    seg = fr.Ellipse(np.zeros(4), a, np.zeros(4), 0.35, 0.0, 0.7)
    for t in (0.0, 1e-3, 0.02, np.pi):
        assert seg.distance(np.cos(t) * a) < 1e-16
    rng = np.random.default_rng(1)
    t = np.linspace(0, 2 * np.pi, 100001)
    for k in range(40):
        a1, a2 = rng.normal(size=4), rng.normal(size=4)
        if k % 3 == 0:
            a2 = 0.3 * a1
        el = fr.Ellipse(np.zeros(4), a1, a2, 0.0, 0.0, 0.0)
        p = rng.normal(size=4)
        brute = np.linalg.norm(np.outer(np.cos(t), a1) + np.outer(np.sin(t), a2) - p, axis=1).min()
        assert el.distance(p) <= brute + 1e-12
