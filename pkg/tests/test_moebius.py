import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spherecong import frames as fr
from spherecong import gallery
from spherecong import moebius as mb
from spherecong.errors import MinimalPoint, PoleHit
from spherecong.surfaces import DslSurface

vec5 = st.lists(st.floats(-3, 3), min_size=5, max_size=5).map(np.array)


def test_apply_examples():
    inv = mb.Inversion((0, 0, 0, 0, 0), 1.0)
    np.testing.assert_allclose(mb.apply(inv, [2, 0, 0, 0, 0]), [0.5, 0, 0, 0, 0])
    T = mb.stereographic_inversion(5)
    np.testing.assert_allclose(mb.apply(T, np.zeros(5)), np.zeros(5))
    refl = mb.Reflection((0, 0, 0, 0, 0))
    np.testing.assert_allclose(mb.apply(refl, [1, 2, 3, 4, 5]), [-1, -2, -3, -4, -5])


def test_apply_at_pole_raises():
    with pytest.raises(PoleHit):
        mb.apply(mb.Inversion((1, 0, 0), 1.0), [1, 0, 0])


@settings(max_examples=100, deadline=None)
@given(vec5, vec5, st.floats(0.2, 3.0), st.sampled_from([mb.EUCLIDEAN, mb.LORENTZIAN]))
def test_involution(p, c, r, sig):
    w = p - c
    q = w @ w if sig == mb.EUCLIDEAN else w[:-1] @ w[:-1] - w[-1] ** 2
    if abs(q) < 1e-2:
        return
    for m in (mb.Inversion(tuple(c), r, sig), mb.Reflection(tuple(c))):
        back = mb.apply(m, mb.apply(m, p))
        assert np.linalg.norm(back - p) < 1e-10 * (1 + np.linalg.norm(p))


@settings(max_examples=60, deadline=None)
@given(vec5, vec5, st.floats(0.2, 3.0), st.integers(0, 2**31))
def test_normal_isometry(p, c, r, seed):
    if np.linalg.norm(p - c) < 1e-2:
        return
    rng = np.random.default_rng(seed)
    mu, nu = rng.normal(size=5), rng.normal(size=5)
    Pmu = mb.normal_isometry_P(p, None, mu, c)
    Pnu = mb.normal_isometry_P(p, None, nu, c)
    assert abs(Pmu @ Pnu - mu @ nu) < 1e-12 * (1 + np.linalg.norm(mu) * np.linalg.norm(nu))


def test_normal_isometry_axis_cases():
    p, c = np.array([1.0, 2.0, 0, 0, 0]), np.zeros(5)
    perp = np.array([0, 0, 1.0, 0, 0])
    np.testing.assert_allclose(mb.normal_isometry_P(p, None, perp, c), perp)
    np.testing.assert_allclose(mb.normal_isometry_P(p, None, p, c), -p)


def test_pushed_normal_is_normal():
    spec = gallery.make("graph_generic_r5").spec
    m = mb.Inversion((0.3, -0.2, 1.0, 0.5, 0.4), 1.3)
    pushed = mb.push_immersion(m, spec)
    p = (0.2, 0.1)
    fd = fr.fundamental_forms(spec.jet(p, 2))
    fdh = fr.fundamental_forms(pushed.jet(p, 2))
    for mu in fd.normal_basis():
        Pmu = mb.normal_isometry_P(fd.point, fd, mu, m.c)
        assert abs(np.linalg.norm(Pmu) - 1) < 1e-12
        assert abs(Pmu @ fdh.X1) < 1e-8 and abs(Pmu @ fdh.X2) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.floats(-0.9, 0.9), st.floats(-0.9, 0.9), vec5, st.floats(0.3, 2.0))
def test_inversion_is_conformal(u, v, c, r):
    spec = gallery.make("graph_generic_r5").spec
    f = spec.value((u, v))
    if np.linalg.norm(f - c) < 0.1:
        return
    m = mb.Inversion(tuple(c), r)
    j, jh = spec.jet((u, v), 1), mb.push_immersion(m, spec).jet((u, v), 1)
    D = np.stack([j.taylor.derivative(1, 0), j.taylor.derivative(0, 1)])
    Dh = np.stack([jh.taylor.derivative(1, 0), jh.taylor.derivative(0, 1)])
    scale = (r ** 2 / np.sum((f - c) ** 2)) ** 2
    np.testing.assert_allclose(Dh @ Dh.T, scale * (D @ D.T), rtol=1e-10, atol=1e-12)


def test_double_push_is_identity():
    spec = gallery.make("stereo_torus_r5").spec
    m = mb.Inversion((0.1, 0.2, -0.3, 0.4, 2.0), 0.8)
    twice = mb.push_immersion(m, mb.push_immersion(m, spec))
    for p in [(0.5, 1.5), (4.0, 2.0)]:
        a, b = spec.jet(p, 3).taylor.coeffs, twice.jet(p, 3).taylor.coeffs
        assert np.max(np.abs(a - b)) < 1e-10 * (1 + np.max(np.abs(a)))


def test_stereographic_image_of_veronese_model():
    model = gallery.make("veronese_s4").spec
    T = mb.stereographic_inversion(model.ambient_dim)
    e = T.c
    for p in model.domain.grid(5, 5):
        x = model.value(p)
        y = mb.apply(T, x)
        assert abs(np.linalg.norm(y - e) * np.linalg.norm(x - e) - 1.0) < 1e-12
        assert abs(y[-1]) < 1e-12


def test_plane_through_pole():
    plane = DslSurface.from_source("[u, v, 0, 0]")
    m = mb.Inversion((0.0, 0.0, 0.0, 0.0), 1.0)
    with pytest.raises(PoleHit):
        mb.push_immersion(m, plane).jet((0.0, 0.0), 2)


def test_concentric_sphere_law():
    spec = gallery.make("round_sphere_slice").spec
    r = mb.mean_curvature_law_check(spec, mb.Inversion((0, 0, 0, 0), 1.7), (0.4, 0.3))
    assert r["residual"] < 1e-9


def test_holomorphic_curve_law():
    spec = gallery.make("holo_curve_z2").spec
    for p in [(0.3, 0.2), (-0.5, 0.1)]:
        r = mb.mean_curvature_law_check(spec, mb.Inversion((0, 0, 0, 3), 1.0), p)
        assert r["residual"] < 1e-7


def test_lorentzian_law_on_hyperbolic_patch():
    spec = gallery.make("hyperbolic_patch").spec
    m = mb.Inversion(tuple([0.2, -0.1, 0.3, 0.1, 2.5]), 1.2, mb.LORENTZIAN)
    for p in spec.domain.grid(3, 3):
        assert mb.mean_curvature_law_check(spec, m, p)["residual"] < 1e-7


def test_lorentzian_law_on_euclidean_surface():
    spec = gallery.make("graph_generic_r5").spec
    m = mb.Inversion((0.2, -0.1, 0.3, 0.1, 0.5, 2.0), 1.0, mb.LORENTZIAN)
    assert mb.mean_curvature_law_check(spec, m, (0.2, 0.1))["residual"] < 1e-7


@settings(max_examples=40, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2), st.floats(0.2, 2), st.floats(0.3, 2))
def test_lorentzian_inversion_maps_hyperboloids(a, b, c, rho, R):
    # point on {<p - q0, p - q0>_L = -rho^2} in L^4
    w = np.array([a, b, c, 0.0])
    w[-1] = np.sqrt(w[:-1] @ w[:-1] + rho ** 2)
    q0 = np.array([0.1, 0.2, -0.3, 0.4])
    y = mb.apply(mb.Inversion(tuple(q0), R, mb.LORENTZIAN), q0 + w)
    d = y - q0
    q = d[:-1] @ d[:-1] - d[-1] ** 2
    assert abs(q + (R ** 2 / rho) ** 2) < 1e-10 * (1 + (R ** 2 / rho) ** 2)


def test_stereo_relations():
    sv = gallery.make("stereo_veronese_r4").spec
    checked = 0
    for p in sv.domain.grid(5, 5):
        try:
            assert mb.stereo_relation_residual(sv, "spherical", p) < 1e-7
            checked += 1
        except MinimalPoint:  # the image has isolated minimal points
            pass
    assert checked >= 20
    sh = gallery.make("stereo_hyperbolic_r4").spec
    for p in sh.domain.grid(5, 5):
        assert mb.stereo_relation_residual(sh, "hyperbolic", p) < 1e-7
    g = gallery.make("graph_generic_r5").spec
    for p in [(0.2, 0.1), (-0.5, 0.4)]:
        assert mb.stereo_relation_residual(g, "spherical", p) > 1e-2
    with pytest.raises(MinimalPoint):
        mb.stereo_relation_residual(gallery.make("holo_curve_z2").spec, "spherical", (0.3, 0.2))


def test_model_lift_round_trip():
    spec = gallery.make("stereo_torus_r5").spec
    lifted = mb.model_lift(spec)
    back = mb.stereographic(lifted)
    for p in [(0.5, 1.5), (4.0, 2.0)]:
        np.testing.assert_allclose(back.value(p), spec.value(p), atol=1e-12)
        r = mb.model_residuals(lifted, p)
        assert r["quadric"] < 1e-12 and r["mean_curvature"] < 1e-10


def test_hyperbolic_model_residuals():
    spec = gallery.make("hyperbolic_patch").spec
    for p in spec.domain.grid(3, 3):
        r = mb.model_residuals(spec, p, "hyperbolic")
        assert r["quadric"] < 1e-12
