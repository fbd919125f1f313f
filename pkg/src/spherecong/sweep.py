"""Grid sweeps: per-point analysis with ordered, optionally threaded evaluation."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import duality as du
from . import frames as fr
from . import moebius as mb
from .errors import DegenerateCoverage, SpherecongError, UmbilicPoint

MAX_EXCLUDED_FRACTION = 0.10

# jet order each check needs
CHECK_ORDER = {
    "frames": 2,
    "ellipse": 2,
    "s_willmore": 3,
    "willmore": 3,
    "centers": 3,
    "lemmas": 4,
    "moebius_laws": 2,
    "stereo_spherical": 2,
    "stereo_hyperbolic": 2,
}
DEFAULT_CHECKS = {2: ("frames", "ellipse"), 3: ("frames", "ellipse", "s_willmore"),
                  4: ("frames", "ellipse", "s_willmore", "willmore")}


@contextmanager
def point_mapper(threads: int = 1):
    """An order-preserving map over points, threaded when threads > 1."""
    if threads <= 1:
        yield map
        return
    with ThreadPoolExecutor(max_workers=threads) as pool:
        yield pool.map


def guarded(fn):
    """Wrap fn so library errors become (None, message) instead of raising."""
    def run(p):
        try:
            return fn(p), None
        except SpherecongError as exc:
            return None, f"{type(exc).__name__}: {exc}"
    return run


def check_coverage(excluded: int, total: int, limit: float = MAX_EXCLUDED_FRACTION) -> None:
    if total == 0 or excluded > limit * total:
        raise DegenerateCoverage(excluded, total)


@dataclass
class PointTable:
    points: list
    columns: list
    rows: list  # per point: dict or None
    errors: list  # per point: message or None
    notes: dict = field(default_factory=dict)

    @property
    def excluded(self) -> int:
        return sum(r is None for r in self.rows)

    def column(self, name) -> np.ndarray:
        return np.array([np.nan if r is None or r.get(name) is None else float(r[name]) for r in self.rows])

    def summary(self) -> dict:
        out = {}
        for c in self.columns:
            a = self.column(c)
            a = a[np.isfinite(a)]
            out[c] = {"max": float(a.max()) if a.size else None,
                      "mean": float(a.mean()) if a.size else None,
                      "count": int(a.size)}
        return out


def analyze_point(spec, point, checks, tolerances=None, maps=()) -> dict:
    """Residuals of one sample point for the requested checks."""
    tol = {"superconformal": 1e-8, "fd_step": 1e-3}
    tol.update(tolerances or {})
    order = max(CHECK_ORDER[c] for c in checks)
    j = spec.jet(point, order)
    fd = fr.fundamental_forms(j)
    row = {
        "H_norm": fd.H_norm, "mu": fd.mu, "lambda": fd.lam, "theta": fd.theta,
        "dim_N1": fd.dim_N1, "umbilic": int(fd.umbilic),
        "superconformal_residual": fr.superconformal_residual(fd),
    }
    if "ellipse" in checks:
        row["ellipse_defect"] = fr.ellipse_sampling_defect(fd)
        if not fd.umbilic:
            ratio = fr.sampled_circle_ratio(fd)
            row["circle_ratio_defect"] = ratio
            row["circle_agreement"] = int((row["superconformal_residual"] < tol["superconformal"]) == (ratio < 1e-6))
    if "s_willmore" in checks:
        try:
            row["s_willmore_residual"] = fr.s_willmore_residual(j)
        except UmbilicPoint:
            row["s_willmore_residual"] = None
    if "willmore" in checks:
        row["willmore_residual"] = fr.willmore_residual(spec, point, tol["fd_step"])
    if "centers" in checks:
        cf = du.CenterFields(j.taylor.truncate(3))
        row["eq19_defect"] = cf.eq19_defect()
        row["f_g_conformality"] = fr.conformality_defect(fd.chart_metric, cf.g_metric())
    if "lemmas" in checks:
        cd = du.DualFields(j.taylor.truncate(3)).center_data()
        for k in ("ht1", "ht2", "eta_xi_inner", "parametrization", "omega_identity", "dual_crosscheck"):
            row[k] = cd.residuals[k]
        row["lambda_rank_defect"] = abs(cd.residuals["lambda_rank"] - (spec.ambient_dim - 4))
        hg = du.centers_mean_curvature_check(spec, point)
        row["Hg_eta"], row["Hg_xi"] = hg["eta"], hg["xi"]
        row["first_normal_perp"] = du.first_normal_perp_check(spec, point)
    if "moebius_laws" in checks:
        worst_p = worst_law = 0.0
        for m in maps:
            if isinstance(m, mb.Inversion):
                r = mb.mean_curvature_law_check(spec, m, point)
                worst_law = max(worst_law, r["residual"])
                for mu in fd.normal_basis():
                    pm = mb.normal_isometry_P(fd.point, fd, mu, m.c)
                    worst_p = max(worst_p, abs(float(np.linalg.norm(pm)) - 1.0))
        row["moebius_law_residual"] = worst_law
        row["isometry_defect"] = worst_p
    for kind in ("spherical", "hyperbolic"):
        if f"stereo_{kind}" in checks:
            row[f"stereo_{kind}_residual"] = mb.stereo_relation_residual(spec, kind, point)
    return row


def analyze(spec, points, checks, tolerances=None, maps=(), threads: int = 1) -> PointTable:
    fn = guarded(lambda p: analyze_point(spec, p, checks, tolerances, maps))
    with point_mapper(threads) as mapper:
        results = list(mapper(fn, points))
    rows = [r for r, _ in results]
    cols = []
    for r in rows:
        if r is not None:
            cols.extend(k for k in r if k not in cols)
    return PointTable(list(points), cols, rows, [e for _, e in results])


def sample_dual(spec, points, threads: int = 1):
    fn = guarded(lambda p: du.dual_point(spec, p) if spec.ambient_dim > 4 else du.DualSurface(spec).value(p))
    with point_mapper(threads) as mapper:
        return list(mapper(fn, points))
