"""Acceptance criteria 1-9, one test each.

Every test records a PASS/FAIL line with the measured worst values; the lines
are printed at the end of the pytest run (see conftest.py) and by
scripts/run_acceptance.py.
"""
import json
import math
from pathlib import Path

import numpy as np

import conftest
from spherecong import cli
from spherecong import duality as du
from spherecong import frames as fr
from spherecong import gallery
from spherecong import moebius as mb
from spherecong.errors import MinimalPoint, SpherecongError, UmbilicPoint

JOBS = Path(__file__).resolve().parent.parent / "scripts" / "jobs"
GRID = (21, 21)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    conftest.ACCEPTANCE[n] = line
    print(line)
    assert ok, line


def random_points(spec, count, rng):
    (u0, u1), (v0, v1) = spec.domain.u_range, spec.domain.v_range
    out = []
    while len(out) < count:
        p = (float(rng.uniform(u0, u1)), float(rng.uniform(v0, v1)))
        if spec.domain.contains(p):
            out.append(p)
    return out


def sampled_avv(jet, n=360):
    """alpha(v, v) for n unit tangent vectors, from raw chart partials only."""
    t = jet.taylor
    fu, fv = np.asarray(t.derivative(1, 0)), np.asarray(t.derivative(0, 1))
    fuu, fuv, fvv = (np.asarray(t.derivative(*k)) for k in ((2, 0), (1, 1), (0, 2)))
    Q, _ = np.linalg.qr(np.column_stack([fu, fv]))
    G = np.array([[fu @ fu, fu @ fv], [fu @ fv, fv @ fv]])
    w, V = np.linalg.eigh(G)
    Gih = V @ np.diag(w ** -0.5) @ V.T
    out = []
    for s in np.linspace(0.0, 2 * np.pi, n, endpoint=False):
        a, b = Gih @ np.array([math.cos(s), math.sin(s)])
        d2 = a * a * fuu + 2 * a * b * fuv + b * b * fvv
        out.append(d2 - Q @ (Q.T @ d2))
    return np.array(out)


def on_ellipse_defect(el, pts):
    """Distance of points to {center + cos t axis1 + sin t axis2}, relative to 1 + semi_major."""
    worst = 0.0
    for p in pts:
        worst = max(worst, el.distance(p))
    return worst / (1.0 + el.semi_major)


# ----------------------------------------------------------------------

def test_criterion_1_circle_criterion_vs_sampling():
    rng = np.random.default_rng(20240101)
    worst_contain, disagree, checked, skipped = 0.0, [], 0, []
    for gid in gallery.ids():
        spec = gallery.make(gid).spec
        if spec.metric is not None:
            skipped.append(gid)  # Lorentzian normal metric: no Euclidean ellipse
            continue
        for p in random_points(spec, 50, rng):
            j = spec.jet(p, 2)
            fd = fr.fundamental_forms(j)
            el = fr.ellipse_of_curvature(fd)
            pts = sampled_avv(j)
            worst_contain = max(worst_contain, on_ellipse_defect(el, pts))
            checked += 1
            if fd.umbilic:
                continue  # a point-ellipse: the radius ratio is undefined
            r = np.linalg.norm(pts - fd.H, axis=1)
            ratio = r.max() / r.min() - 1.0
            if (fr.superconformal_residual(fd) < 1e-8) != (ratio < 1e-6):
                disagree.append((gid, p))
    ok = worst_contain < 1e-9 and not disagree
    record(1, ok, f"{checked} points; max containment defect {worst_contain:.2e} (tol 1e-9); "
                  f"superconformal/ratio disagreements {len(disagree)}; skipped Lorentzian {skipped}")


def test_criterion_2_codim2_rouxel_roundtrip():
    entry = gallery.make("rouxel_enneper_r4")
    f = entry.spec
    partner = gallery.make("rouxel_enneper_r4", {"sign": -1}).spec
    g = f.g_spec()
    sc = cen = met = back = 0.0
    n = flagged = 0
    for p in f.domain.grid(*GRID):
        try:
            fd = fr.fundamental_forms(f.jet(p, 2))
            if fd.umbilic:
                raise UmbilicPoint("flat point of g")
            s = du.central_sphere(f.jet(p, 2))
            pair = du.codim2_pair(f, p)
        except (UmbilicPoint, MinimalPoint):
            flagged += 1
            continue
        n += 1
        sc = max(sc, fr.superconformal_residual(fd))
        cen = max(cen, float(np.linalg.norm(s.center - g.value(p))))
        met = max(met, du.rouxel_metric_defect(f, p))
        back = max(back, float(np.linalg.norm(pair.partner - partner.value(p))))
    rep = du.verify_duality(f, partner, f.domain.grid(*GRID), classify=False)
    vmax = max(rep.maxima().values())
    ok = (n > 0.9 * len(f.domain.grid(*GRID)) and sc < 1e-8 and cen < 1e-7 and met < 1e-7
          and back < 1e-7 and vmax < 1e-6)
    record(2, ok, f"{n} points ({flagged} flagged); superconformal {sc:.2e}; centres-g {cen:.2e}; "
                  f"metric identity {met:.2e}; recovered partner {back:.2e}; verify max {vmax:.2e}")


def test_criterion_3_dual_formula_torus():
    f = gallery.make("stereo_torus_r5").spec
    pts = f.domain.grid(*GRID)
    rep = du.verify_duality(f, du.dualize(f), pts, classify=False)
    m = rep.maxima()
    cls = du.classify_dual(f, pts)
    # the proof's normal form: reflection-inversion in the unit sphere about the origin
    p0_err = float(np.linalg.norm(cls.p0)) if cls.p0 is not None else math.inf
    ok = (all(m[k] < 1e-6 for k in ("same_center", "same_radius", "same_plane3", "conformality_defect"))
          and m["superconformal_residual_dual"] < 1e-6
          and cls.kind == "InversionReflection" and p0_err < 1e-5)
    record(3, ok, f"surfcen {m['same_center']:.2e}, radius {m['same_radius']:.2e}, eqspe {m['same_plane3']:.2e}, "
                  f"conformality {m['conformality_defect']:.2e}, dual superconformal "
                  f"{m['superconformal_residual_dual']:.2e}; {cls.kind}, |p0| {p0_err:.2e}, "
                  f"radius {cls.radius:.6f}; excluded {len(rep.excluded)}/{len(pts)}")


def test_criterion_4_point_dual():
    entry = gallery.make("inverted_isotropic_r6")
    f = entry.spec
    pts = f.domain.grid(*GRID)
    duals = []
    for p in pts:
        try:
            duals.append(du.dual_point(f, p))
        except SpherecongError:
            pass
    duals = np.array(duals)
    diam = float(np.max(np.linalg.norm(duals[:, None] - duals[None], axis=-1)))
    scale = f.scale()
    cls = du.classify_dual(f, pts)
    c = np.array([entry.params[f"c{i}"] for i in range(1, 7)])
    err = float(np.linalg.norm(cls.p0 - c))
    ok = diam < 1e-6 * scale and cls.kind == "PointDual" and err < 1e-6
    record(4, ok, f"dual diameter {diam:.2e} (scale {scale:.3f}); {cls.kind}; |p0 - centre| {err:.2e}")


def test_criterion_5_lemma_suite_torus():
    f = gallery.make("stereo_torus_r5").spec
    n_dim = f.ambient_dim - 2
    w = {"ht": 0.0, "hg": 0.0, "perp": 0.0, "param": 0.0}
    rank_bad = n = excluded = 0
    for p in f.domain.grid(*GRID):
        try:
            r = du.center_data(f, p).residuals
            hg = du.centers_mean_curvature_check(f, p)
            perp = du.first_normal_perp_check(f, p)
        except SpherecongError:
            excluded += 1
            continue
        n += 1
        w["ht"] = max(w["ht"], r["ht1"], r["ht2"])
        w["hg"] = max(w["hg"], hg["eta"], hg["xi"])
        w["perp"] = max(w["perp"], perp)
        w["param"] = max(w["param"], r["parametrization"])
        rank_bad += r["lambda_rank"] != n_dim - 2
    # in R^5 the first normal space fills the normal space, so also run the inclusion in R^6
    inv = gallery.make("inverted_isotropic_r6").spec
    perp6 = 0.0
    for p in inv.domain.grid(*GRID):
        try:
            perp6 = max(perp6, du.first_normal_perp_check(inv, p))
        except SpherecongError:
            pass
    ok = (n > 0.9 * (n + excluded) and w["ht"] < 1e-7 and w["hg"] < 1e-6 and w["perp"] < 1e-7
          and perp6 < 1e-7 and w["param"] < 1e-7 and rank_bad == 0)
    record(5, ok, f"{n} points ({excluded} excluded); ht {w['ht']:.2e}; Hg {w['hg']:.2e}; "
                  f"contained {w['perp']:.2e} (R^6 isotropic {perp6:.2e}); parametrization {w['param']:.2e}; "
                  f"dim Lambda != {n_dim - 2} at {rank_bad} points")


def test_criterion_6_transformation_laws():
    rng = np.random.default_rng(7)
    iso = 0.0
    for _ in range(200):
        p, c = rng.normal(size=5), rng.normal(size=5)
        a, b = rng.normal(size=5), rng.normal(size=5)
        for sig in (mb.EUCLIDEAN, mb.LORENTZIAN):
            Pa = mb.normal_isometry_P(p, None, a, c, sig)
            Pb = mb.normal_isometry_P(p, None, b, c, sig)
            ip = (lambda x, y: x @ y) if sig == mb.EUCLIDEAN else (lambda x, y: x[:-1] @ y[:-1] - x[-1] * y[-1])
            iso = max(iso, abs(ip(Pa, Pb) - ip(a, b)) / (1 + abs(ip(a, b))))
    law_e = law_l = 0.0
    for gid in ("graph_generic_r5", "stereo_torus_r5", "holo_curve_z2", "inverted_isotropic_r6"):
        spec = gallery.make(gid).spec
        n = spec.ambient_dim
        for p in random_points(spec, 5, rng):
            f = spec.value(p)
            c = f + rng.normal(size=n)
            law_e = max(law_e, mb.mean_curvature_law_check(spec, mb.Inversion(tuple(c), 1.3), p)["residual"])
            cl = np.append(c, 0.7)
            law_l = max(law_l, mb.mean_curvature_law_check(spec, mb.Inversion(tuple(cl), 1.1, mb.LORENTZIAN), p)["residual"])
    hyp = gallery.make("hyperbolic_patch").spec
    for p in hyp.domain.grid(5, 5):
        m = mb.Inversion(tuple(hyp.value(p) + np.array([0.4, -0.3, 0.2, 0.1, 0.9])), 1.2, mb.LORENTZIAN)
        law_l = max(law_l, mb.mean_curvature_law_check(hyp, m, p)["residual"])
    sph = 0.0
    for gid in ("stereo_veronese_r4", "stereo_torus_r5"):
        spec = gallery.make(gid).spec
        for p in spec.domain.grid(*GRID):
            try:
                sph = max(sph, mb.stereo_relation_residual(spec, "spherical", p))
            except MinimalPoint:
                pass
    sh = gallery.make("stereo_hyperbolic_r4").spec
    hyp_rel = max(mb.stereo_relation_residual(sh, "hyperbolic", p) for p in sh.domain.grid(*GRID))
    ok = iso < 1e-12 and law_e < 1e-7 and law_l < 1e-7 and sph < 1e-7 and hyp_rel < 1e-7
    record(6, ok, f"P-isometry {iso:.2e}; Euclidean law {law_e:.2e}; Lorentzian law {law_l:.2e}; "
                  f"spherical stereo relation {sph:.2e}; hyperbolic relation {hyp_rel:.2e}")


def test_criterion_7_theorem2_consistency():
    lines, ok, gates = [], True, {}
    for gid in gallery.ids():
        spec = gallery.make(gid).spec
        if spec.ambient_dim != 5 or spec.metric is not None:
            continue
        gate = implied = bad = 0
        for p in spec.domain.grid(*GRID):
            try:
                j = spec.jet(p, 3)
                fd = fr.fundamental_forms(j)
                if fd.umbilic:
                    continue
                if fr.superconformal_residual(fd) >= 1e-8:
                    continue
                if fr.willmore_residual(spec, p, 1e-3) >= 1e-5:
                    continue
                gate += 1
                if fr.s_willmore_residual(j) < 1e-5:
                    implied += 1
                else:
                    bad += 1
            except SpherecongError:
                continue
        ok &= bad == 0
        gates[gid] = gate
        if gid == "graph_generic_r5":
            ok &= gate == 0
        lines.append(f"{gid} gate {gate} s-willmore {implied} violations {bad}")
    # the implication must be exercised, not pass vacuously
    ok &= gates.get("stereo_torus_r5", 0) > 0.9 * GRID[0] * GRID[1]
    record(7, ok, "; ".join(lines))


def test_criterion_8_conformal_invariance():
    rng = np.random.default_rng(8)
    ids = [i for i in gallery.ids() if gallery.make(i).spec.metric is None]
    results = []
    for trial in range(10):
        gid = ids[int(rng.integers(len(ids)))]
        spec = gallery.make(gid).spec
        p = random_points(spec, 1, rng)[0]
        f = spec.value(p)
        scale = max(spec.scale(), 1e-3)
        c = f + rng.normal(size=spec.ambient_dim) * scale
        m = mb.Inversion(tuple(c), float(rng.uniform(0.5, 2.0)) * scale)
        pushed = mb.push_immersion(m, spec)
        before = fr.superconformal_residual(fr.fundamental_forms(spec.jet(p, 2)))
        after = fr.superconformal_residual(fr.fundamental_forms(pushed.jet(p, 2)))
        results.append((gid, before < 1e-8, after < 1e-8, before, after))
    flips = [r for r in results if r[1] != r[2]]
    kinds = sum(r[1] for r in results)
    record(8, not flips, f"10 trials ({kinds} superconformal, {10 - kinds} not); classification flips {len(flips)}; "
                         + ", ".join(f"{g}:{b:.1e}->{a:.1e}" for g, _, _, b, a in results))


def test_criterion_9_cli_determinism(tmp_path):
    jobs = sorted(JOBS.glob("*.json"))
    differ, failed = [], []
    for path in jobs:
        command = json.loads(path.read_text())["command"]
        outs = []
        for run in ("a", "b"):
            out = tmp_path / path.stem / run
            code = cli.main([command, "--config", str(path), "--out", str(out)])
            if code != 0:
                failed.append((path.stem, code))
                break
            outs.append((out / "summary.json").read_bytes())
        if len(outs) == 2 and outs[0] != outs[1]:
            differ.append(path.stem)
    ok = bool(jobs) and not differ and not failed
    record(9, ok, f"{len(jobs)} jobs run twice; differing summaries {differ}; failed runs {failed}")
