"""Central sphere congruence, surface of centers and dual surfaces.

For a superconformal surface ``f`` with mean curvature vector ``H`` the
centres of its central spheres trace ``g = f + r^2 H`` (``r = 1/|H|``).  In
codimension >= 3 the dual is

    f~ = f + 2 r^2 (H)^Lambda,

where ``(H)^Lambda`` is the part of ``H`` normal to ``g`` and orthogonal to
the normal parts ``eta, xi`` of

    h1 = r^2 (lambda2 xi1 - lambda1 xi2),   h2 = r^2 H - delta / lambda.

In codimension two the dual is the reflection of ``f`` through the point
``g - (r^2 H)^T`` (tangent part along ``g``), which exchanges the two
complex structures of the normal bundle of ``g``.

All of it runs in Taylor arithmetic: a jet of ``f`` of order ``m + 3`` gives
the jet of the dual of order ``m``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from . import taylor as tl
from .errors import (
    DegenerateCenters,
    DegenerateFrame,
    InsufficientSamples,
    LambdaRankError,
    MinimalPoint,
    SpherecongError,
    UmbilicPoint,
)
from .frames import FrameData, FrameFields, conformality_defect, fundamental_forms, superconformal_residual
from .surfaces import ImmersionSpec
from .weierstrass import WeierstrassData

EPS = np.array([[0.0, -1.0], [1.0, 0.0]])


@dataclass(frozen=True)
class Thresholds:
    superconformal: float = 1e-8
    umbilic: float = 1e-8
    lam: float = 1e-8
    theta: float = 1e-8
    H: float = 1e-8
    lambda_rank: float = 1e-10
    centers_rank: float = 1e-7


DEFAULT = Thresholds()


# ----------------------------------------------------------------------
# small Taylor linear algebra

def _gram_inverse(a, b):
    """Inverse of the Gram matrix of (a, b) as nested Taylor entries."""
    g11, g12, g22 = tl.dot(a, a), tl.dot(a, b), tl.dot(b, b)
    det = g11 * g22 - g12 * g12
    idet = tl.recip(det)
    return ((g22 * idet, -(g12 * idet)), (-(g12 * idet), g11 * idet)), ((g11, g12), (g12, g22))


class _Plane:
    """Orthogonal projection onto span(a, b) for Taylor vectors a, b."""

    def __init__(self, a, b):
        self.a, self.b = a, b
        self.inv, self.gram = _gram_inverse(a, b)

    def coefficients(self, v):
        pa, pb = tl.dot(self.a, v), tl.dot(self.b, v)
        (i11, i12), (_, i22) = self.inv
        return pa * i11 + pb * i12, pa * i12 + pb * i22

    def combine(self, cu, cv):
        return self.a * cu + self.b * cv

    def project(self, v):
        return self.combine(*self.coefficients(v))


def _val(t):
    return np.real(np.asarray(t.value, dtype=complex if np.iscomplexobj(t.coeffs) else float))


def _chart_J(G: np.ndarray, orientation: int = 1) -> np.ndarray:
    """Rotation by +90 degrees on chart coefficient vectors for metric G."""
    return orientation * np.sqrt(np.linalg.det(G)) * np.linalg.inv(G) @ EPS


def _check_frame(fd: FrameData, th: Thresholds, codim: int) -> None:
    Hn = fd.H_norm
    if Hn < th.H:
        raise MinimalPoint("H vanishes: no central sphere")
    if fd.umbilic or "segment" in fd.flags:
        raise UmbilicPoint("ellipse of curvature degenerates")
    res = superconformal_residual(fd)
    if res > th.superconformal:
        raise DegenerateFrame(f"not superconformal (residual {res:.3e})")
    if codim >= 3:
        if "lambda_zero" in fd.flags or fd.lam < th.lam * (1 + Hn):
            raise DegenerateFrame("lambda vanishes (first normal space of dimension 2)")
        if fd.theta < th.theta * (1 + Hn**2):
            raise DegenerateFrame("theta vanishes")
        if fd.dim_N1 != 3:
            raise DegenerateFrame(f"first normal space has dimension {fd.dim_N1}")


# ----------------------------------------------------------------------

@dataclass(frozen=True)
class SphereElement:
    center: np.ndarray
    radius: float
    plane3: np.ndarray  # rows: orthonormal basis of f_*T M + span(H)

    def projector(self) -> np.ndarray:
        return self.plane3.T @ self.plane3


def central_sphere(j: tl.Jet) -> SphereElement:
    fd = fundamental_forms(j)
    return sphere_from_frame(fd)


def sphere_from_frame(fd: FrameData) -> SphereElement:
    Hn = fd.H_norm
    if Hn < DEFAULT.H:
        raise MinimalPoint("H vanishes: no central sphere")
    center = fd.point + fd.H / Hn**2
    q, _ = np.linalg.qr(np.stack([fd.X1, fd.X2, fd.H / Hn], axis=1))
    return SphereElement(center, 1.0 / Hn, q.T)


class CenterFields:
    """g = f + r^2 H with its derivatives, from an expansion of f of order K.

    g has order ``K-2`` and its tangent plane order ``K-3``.
    """

    def __init__(self, F: tl.Taylor, orientation: int = 1, th: Thresholds = DEFAULT, ff: FrameFields | None = None):
        self.ff = ff if ff is not None else FrameFields(F, orientation=orientation)
        self.fd = self.ff.frame_data()
        H = self.ff.H
        if self.fd.H_norm < th.H:
            raise MinimalPoint("H vanishes: no surface of centers")
        self.r2 = tl.recip(tl.dot(H, H))
        self.g = F + H * self.r2
        self.orientation = orientation
        self.th = th
        if self.g.order >= 1:
            self.gu, self.gv = self.g.d(0), self.g.d(1)
            s_g = np.linalg.svd(np.stack([_val(self.gu), _val(self.gv)]), compute_uv=False)
            s_f = np.linalg.svd(np.stack([_val(self.ff.fu), _val(self.ff.fv)]), compute_uv=False)
            self.dg_singular = s_g
            if s_g[-1] < th.centers_rank * s_f[0] / self.fd.H_norm:
                raise DegenerateCenters(
                    f"surface of centers is singular (dg singular values {s_g[0]:.3e}, {s_g[-1]:.3e})")
            self.tangent = _Plane(self.gu, self.gv)

    def g_metric(self) -> np.ndarray:
        (g11, g12), (_, g22) = self.tangent.gram
        return np.array([[float(_val(g11)), float(_val(g12))], [float(_val(g12)), float(_val(g22))]])

    def eq19_defect(self) -> float:
        """|g_* X_i - [f_*(I - r^2 A_H) X_i + r^2 nabla-perp_{X_i} H + X_i(r^2) H]|."""
        fd, ff = self.fd, self.ff
        M = fd.chart_frame
        r2 = float(_val(self.r2))
        dH = [_val(ff.H.d(k)) for k in range(2)]
        dr2 = [float(_val(self.r2.d(k))) for k in range(2)]
        dg = [_val(self.gu), _val(self.gv)]
        X = [fd.X1, fd.X2]
        worst = 0.0
        for i in range(2):
            lhs = M[i, 0] * dg[0] + M[i, 1] * dg[1]
            AH = [float(fd.alpha(i, j) @ fd.H) for j in range(2)]
            rhs = X[i] - r2 * (AH[0] * X[0] + AH[1] * X[1])
            rhs = rhs + r2 * fd.normal_part(M[i, 0] * dH[0] + M[i, 1] * dH[1])
            rhs = rhs + (M[i, 0] * dr2[0] + M[i, 1] * dr2[1]) * fd.H
            worst = max(worst, float(np.linalg.norm(lhs - rhs) / (1.0 + np.linalg.norm(lhs))))
        return worst


def centers_jet(spec: ImmersionSpec, point, order: int, orientation: int = 1) -> tl.Jet:
    """Jet of the surface of centers; raises DegenerateCenters when dg has rank < 2."""
    cf = CenterFields(spec.jet(point, max(order, 1) + 2).taylor, orientation)
    return tl.Jet(cf.g.truncate(order), tuple(point))


def eq19_defect(spec: ImmersionSpec, point) -> float:
    return CenterFields(spec.jet(point, 3).taylor).eq19_defect()


class CentersSurface(ImmersionSpec):
    def __init__(self, base: ImmersionSpec, orientation: int = 1):
        self.base = base
        self.orientation = orientation
        self.name = f"centers({base.name})"
        self.domain = base.domain
        self.ambient_dim = base.ambient_dim

    def _jet(self, point, order):
        F = self.base.jet(point, order + 2).taylor
        return tl.Jet(CenterFields(F, self.orientation).g, point)


# ----------------------------------------------------------------------
# the dual in codimension >= 3

@dataclass(frozen=True)
class CenterData:
    g_point: np.ndarray
    g_tangent: np.ndarray
    varrho: float
    rho: float
    Omega: float
    eta: np.ndarray
    xi: np.ndarray
    Y: np.ndarray
    Z: np.ndarray
    Lambda_basis: np.ndarray
    w: np.ndarray
    H_lambda: np.ndarray
    dual: np.ndarray
    residuals: dict = field(default_factory=dict)


class DualFields(CenterFields):
    """Dual surface fields: from f of order K the dual has order K-3."""

    def __init__(self, F: tl.Taylor, orientation: int = 1, th: Thresholds = DEFAULT):
        ff = FrameFields(F, orientation=orientation)
        fd = ff.frame_data()
        self.codim = F.shape[-1] - 2
        _check_frame(fd, th, self.codim)
        super().__init__(F, orientation, th, ff=ff)
        ff = self.ff
        r2 = self.r2
        H = ff.H
        T = self.tangent
        if self.codim == 2:
            self.partner_center = self.g - T.project(H * r2)
            self.dual = self.partner_center * 2.0 - F
            return
        h1 = (ff.xi1 * ff.lambda2 - ff.xi2 * ff.lambda1) * r2
        Hp = ff.Hperp
        h2 = H * r2 - Hp * tl.recip(tl.dot(Hp, Hp))
        self.h1, self.h2 = h1, h2
        self.Y = T.coefficients(h1)
        self.Z = T.coefficients(h2)
        self.eta = h1 - T.combine(*self.Y)
        self.xi = h2 - T.combine(*self.Z)
        HN = H - T.project(H)
        self.PQ = _Plane(self.eta, self.xi)
        self.H_lambda = HN - self.PQ.project(HN)
        hl = float(np.linalg.norm(_val(self.H_lambda)))
        if hl < th.lambda_rank * self.fd.H_norm:
            raise LambdaRankError(f"(H)^Lambda vanishes ({hl:.3e})")
        self.dual = F + self.H_lambda * (r2 * 2.0)

    def center_data(self) -> CenterData:
        """Point data plus the residuals of the identities the dual rests on."""
        if self.codim == 2:
            raise DegenerateFrame("center data needs codimension >= 3")
        fd = self.fd
        v = _val
        g = v(self.g)
        dg = np.stack([v(self.gu), v(self.gv)])
        Gg = self.g_metric()
        r2 = float(v(self.r2))
        varrho = r2 / 2
        dvr = np.array([float(v(self.r2.d(k))) / 2 for k in range(2)])
        grad = np.linalg.solve(Gg, dvr)
        J = _chart_J(fd.chart_metric, self.orientation)
        Y = np.array([float(v(c)) for c in self.Y])
        Z = np.array([float(v(c)) for c in self.Z])
        eta, xi = v(self.eta), v(self.xi)
        h1, h2 = v(self.h1), v(self.h2)
        Hl = v(self.H_lambda)
        rho = float(grad @ Gg @ grad) / float(xi @ xi)
        Omega = float(np.linalg.norm(r2 * Hl))
        w = -Hl / np.linalg.norm(Hl)
        f = fd.point
        # Lambda: normal space of g orthogonal to eta and xi
        n_amb = f.shape[0]
        q, _ = np.linalg.qr(np.stack([dg[0], dg[1], eta, xi], axis=1))
        P = np.eye(n_amb) - q @ q.T
        u, s, _ = np.linalg.svd(P)
        rank = int(np.sum(s > 0.5))
        lam_basis = u[:, :rank].T
        gap = float(min(s[rank - 1], 1.0) - (s[rank] if rank < len(s) else 0.0)) if rank else 0.0
        smin = np.linalg.svd(np.stack([eta, xi], axis=1), compute_uv=False)[-1]
        recon = g + dg.T @ Z - rho * xi + Omega * w
        dual = v(self.dual)
        res = {
            "ht1": float(np.linalg.norm(dg.T @ Y - dg.T @ (J @ grad)) / (1.0 + np.linalg.norm(h1))),
            "ht2": float(np.linalg.norm(dg.T @ Z + dg.T @ grad) / (1.0 + np.linalg.norm(h2))),
            "eta_xi_inner": abs(float(eta @ xi)),
            "eta_xi_smin": float(smin),
            "parametrization": float(np.linalg.norm(f - recon)),
            "omega_identity": abs(Omega**2 + rho * (rho + 1) * float(xi @ xi) - 2 * varrho),
            "dual_crosscheck": float(np.linalg.norm(dual - (g + dg.T @ Z - rho * xi - Omega * w))),
            "lambda_rank": rank,
            "lambda_gap": gap,
            "radicand": 2 * varrho - rho * (rho + 1) * float(xi @ xi),
        }
        return CenterData(g, dg, varrho, rho, Omega, eta, xi, Y, Z, lam_basis, w, Hl, dual, res)


def center_data(spec: ImmersionSpec, point, orientation: int = 1, th: Thresholds = DEFAULT) -> CenterData:
    return DualFields(spec.jet(point, 3).taylor, orientation, th).center_data()


def dual_point(spec: ImmersionSpec, point, orientation: int = 1, th: Thresholds = DEFAULT) -> np.ndarray:
    return _val(DualFields(spec.jet(point, 3).taylor, orientation, th).dual).copy()


class DualSurface(ImmersionSpec):
    """The dual of ``base``; codimension two uses the Rouxel partner."""

    max_order = tl.MAX_ORDER - 3

    def __init__(self, base: ImmersionSpec, orientation: int = 1, th: Thresholds = DEFAULT):
        self.base = base
        self.orientation = orientation
        self.th = th
        self.name = f"dual({base.name})"
        self.domain = base.domain
        self.ambient_dim = base.ambient_dim

    def _jet(self, point, order):
        if order > self.max_order:
            raise tl.OrderError(f"dual jets are available up to order {self.max_order}")
        F = self.base.jet(point, order + 3).taylor
        return tl.Jet(DualFields(F, self.orientation, self.th).dual, point)


def dualize(spec: ImmersionSpec, orientation: int = 1, th: Thresholds = DEFAULT) -> DualSurface:
    return DualSurface(spec, orientation, th)


def double_dual_defect(spec: ImmersionSpec, point) -> float:
    dd = DualSurface(DualSurface(spec))
    return float(np.linalg.norm(dd.value(point) - spec.value(point)))


# ----------------------------------------------------------------------
# lemma-level checks

def centers_mean_curvature_check(spec: ImmersionSpec, point, orientation: int = 1) -> dict:
    """Mean curvature of g against eta and xi: returns the two residuals."""
    df = DualFields(spec.jet(point, 4).taylor, orientation)
    if df.codim == 2:
        Hg = FrameFields(df.g.truncate(2)).frame_data().H
        return {"H_g": float(np.linalg.norm(Hg))}
    Hg = FrameFields(df.g.truncate(2)).frame_data().H
    eta, xi, h2 = _val(df.eta), _val(df.xi), _val(df.h2)
    r_eta = abs(float(Hg @ eta)) / np.linalg.norm(eta)
    Hxi = float(Hg @ xi) / float(xi @ xi) * xi
    r_xi = float(np.linalg.norm(Hxi + 2 * xi / float(h2 @ h2)))
    return {"eta": float(r_eta), "xi": r_xi}


def first_normal_perp_check(spec: ImmersionSpec, point) -> float:
    """Largest g-tangent component of a unit normal of f orthogonal to N1."""
    cf = CenterFields(spec.jet(point, 3).taylor)
    fd = cf.fd
    nb = fd.normal_basis()
    A = np.stack([fd.alpha11, fd.alpha12, fd.alpha22])
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > 1e-8 * (1 + s[0])))
    N1 = vt[:rank]
    comp = nb - (nb @ N1.T) @ N1
    u, s2, _ = np.linalg.svd(comp.T, full_matrices=False)
    perp = u[:, s2 > 0.5].T
    if perp.shape[0] == 0:
        return 0.0
    dg = np.stack([_val(cf.gu), _val(cf.gv)])
    q, _ = np.linalg.qr(dg.T)
    return float(max(np.linalg.norm(q.T @ e) for e in perp))


def f_g_conformality(spec: ImmersionSpec, point) -> float:
    cf = CenterFields(spec.jet(point, 3).taylor)
    return conformality_defect(cf.fd.chart_metric, cf.g_metric())


# ----------------------------------------------------------------------
# verification and classification

@dataclass
class Classification:
    kind: str
    p0: np.ndarray | None = None
    radius: float | None = None
    residual_inversion: float | None = None
    residual_inversion_reflection: float | None = None
    diameter: float = 0.0
    scale: float = 1.0
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "diameter": self.diameter, "scale": self.scale,
               "p0": None if self.p0 is None else [float(x) for x in self.p0],
               "radius": self.radius,
               "residual_inversion": self.residual_inversion,
               "residual_inversion_reflection": self.residual_inversion_reflection}
        out["diagnostics"] = dict(self.diagnostics)
        return out


POINT_TOL = 1e-6
FIT_TOL = 1e-5
SEPARATION = 10.0


def _fit(F: np.ndarray, Ft: np.ndarray, sign: float, scale: float):
    def resid(x):
        # R^2 = s^2 keeps the radius real, so the two signs stay distinguishable
        p0, R2 = x[:-1], x[-1] ** 2
        d = F - p0
        q = np.sum(d * d, axis=1)[:, None]
        return ((Ft - p0) - sign * R2 * d / q).ravel() / scale

    best = None
    seeds = [Ft.mean(axis=0), F.mean(axis=0), np.zeros(F.shape[1])]
    for p0 in seeds:
        d = F - p0
        q = np.sum(d * d, axis=1)
        # R^2 seed from the distance product
        R2 = float(np.median(np.linalg.norm(Ft - p0, axis=1) * np.sqrt(q))) or 1.0
        try:
            sol = least_squares(resid, np.concatenate([p0, [np.sqrt(abs(R2))]]), method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15)
        except (ValueError, FloatingPointError):
            continue
        err = float(np.max(np.abs(resid(sol.x))))
        if best is None or err < best[0]:
            best = (err, sol.x)
    return best


def classify_pair(F: np.ndarray, Ft: np.ndarray, scale: float | None = None) -> Classification:
    """Detect the normal forms of Theorem-level duals from sampled point pairs."""
    F, Ft = np.asarray(F, float), np.asarray(Ft, float)
    if scale is None:
        scale = float(np.max(np.linalg.norm(F[:, None] - F[None], axis=-1)))
    scale = scale or 1.0
    diam = float(np.max(np.linalg.norm(Ft[:, None] - Ft[None], axis=-1)))
    if diam < POINT_TOL * scale:
        return Classification("PointDual", Ft.mean(axis=0), None, None, None, diam, scale)
    if np.max(np.linalg.norm(F - Ft, axis=1)) < 1e-12 * scale:
        return Classification("Undetermined", None, None, None, None, diam, scale,
                              {"reason": "dual coincides with the surface"})
    minus = _fit(F, Ft, -1.0, scale)
    plus = _fit(F, Ft, 1.0, scale)
    em = minus[0] if minus else np.inf
    ep = plus[0] if plus else np.inf
    kind, best = "Generic", None
    if min(em, ep) < FIT_TOL:
        if em * SEPARATION <= ep:
            kind, best = "InversionReflection", minus
        elif ep * SEPARATION <= em:
            kind, best = "Inversion", plus
        else:
            kind = "Undetermined"
    p0 = radius = None
    if best is not None:
        p0 = best[1][:-1]
        radius = float(abs(best[1][-1]))
    return Classification(kind, p0, radius, float(ep), float(em), diam, scale)


@dataclass
class DualityReport:
    grid: tuple
    points: list
    residuals: dict  # name -> list (nan where excluded)
    excluded: list
    classification: Classification | None = None

    def aggregates(self) -> dict:
        out = {}
        for k, vals in self.residuals.items():
            a = np.asarray(vals, float)
            a = a[np.isfinite(a)]
            out[k] = {"max": float(a.max()) if a.size else None, "mean": float(a.mean()) if a.size else None}
        return out

    def maxima(self) -> dict:
        return {k: v["max"] for k, v in self.aggregates().items()}

    def to_dict(self) -> dict:
        return {
            "grid": {"nu": self.grid[0], "nv": self.grid[1]},
            "points": [[float(p[0]), float(p[1])] for p in self.points],
            "residuals": {k: [None if not np.isfinite(x) else float(x) for x in v] for k, v in self.residuals.items()},
            "aggregates": self.aggregates(),
            "excluded": [{"point": [float(p[0]), float(p[1])], "reason": r} for p, r in self.excluded],
            "classification": None if self.classification is None else self.classification.to_dict(),
        }


VERIFY_KEYS = ("same_center", "same_radius", "same_plane3", "conformality_defect", "superconformal_residual_dual")


def verify_point(f_spec: ImmersionSpec, ft_spec: ImmersionSpec, point) -> dict:
    fd = fundamental_forms(f_spec.jet(point, 2))
    fdt = fundamental_forms(ft_spec.jet(point, 2))
    s, st = sphere_from_frame(fd), sphere_from_frame(fdt)
    return {
        "same_center": float(np.linalg.norm(s.center - st.center)),
        "same_radius": abs(fd.H_norm - fdt.H_norm),
        "same_plane3": float(np.linalg.norm(s.projector() - st.projector())),
        "conformality_defect": conformality_defect(fd.chart_metric, fdt.chart_metric),
        "superconformal_residual_dual": superconformal_residual(fdt),
    }


def verify_duality(f_spec: ImmersionSpec, ft_spec: ImmersionSpec, grid, mapper=map, classify: bool = True) -> DualityReport:
    """Pointwise residuals of the defining properties of a dual pair."""
    grid = list(grid)

    def one(p):
        try:
            return verify_point(f_spec, ft_spec, p), None
        except SpherecongError as exc:
            return None, f"{type(exc).__name__}: {exc}"

    results = list(mapper(one, grid))
    residuals = {k: [] for k in VERIFY_KEYS}
    excluded = []
    F, Ft = [], []
    for p, (r, err) in zip(grid, results):
        for k in VERIFY_KEYS:
            residuals[k].append(np.nan if r is None else r[k])
        if r is None:
            excluded.append((p, err))
        elif classify:
            F.append(f_spec.value(p))
            Ft.append(ft_spec.value(p))
    cls = classify_pair(np.array(F), np.array(Ft)) if classify and len(F) >= 3 else None
    dims = getattr(grid, "shape", None)
    return DualityReport(dims or (len(grid), 1), grid, residuals, excluded, cls)


def classify_dual(f_spec: ImmersionSpec, grid, mapper=map, stereo_diagnostics: bool = True) -> Classification:
    from .moebius import stereo_relation_residual

    grid = list(grid)

    def one(p):
        try:
            return dual_point(f_spec, p)
        except SpherecongError:
            return None

    duals = list(mapper(one, grid))
    ok = [(p, d) for p, d in zip(grid, duals) if d is not None]
    if len(ok) < 0.9 * len(grid) or len(ok) < 3:
        raise InsufficientSamples(f"dual defined at {len(ok)} of {len(grid)} samples")
    F = np.array([f_spec.value(p) for p, _ in ok])
    Ft = np.array([d for _, d in ok])
    cls = classify_pair(F, Ft, f_spec.scale())
    cls.diagnostics["samples"] = len(ok)
    cls.diagnostics["excluded"] = len(grid) - len(ok)
    if stereo_diagnostics:
        for model in ("spherical", "hyperbolic"):
            vals = []
            for p, _ in ok:
                try:
                    vals.append(stereo_relation_residual(f_spec, model, p))
                except SpherecongError:
                    pass
            cls.diagnostics[f"stereo_{model}_median"] = float(np.median(vals)) if vals else None
    return cls


# ----------------------------------------------------------------------
# codimension two

def cross4(a, b, c):
    """x with <x, d> = det[a; b; c; d] (Taylor or array rows of length 4)."""
    rows = (a, b, c)
    comps = []
    for i in range(4):
        cols = [k for k in range(4) if k != i]
        m = [[r[k] for k in cols] for r in rows]
        det = (m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
               - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
               + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]))
        comps.append(det * (-1.0 if (3 + i) % 2 else 1.0))
    if isinstance(comps[0], tl.Taylor):
        return tl.stack(comps)
    return np.array(comps)


def _cross4_text(a, b, c) -> list[str]:
    """cross4 on DSL expression strings."""
    out = []
    for i in range(4):
        k = [j for j in range(4) if j != i]
        m = [[r[j] for j in k] for r in (a, b, c)]
        det = (f"{m[0][0]}*({m[1][1]}*{m[2][2]} - {m[1][2]}*{m[2][1]})"
               f" - {m[0][1]}*({m[1][0]}*{m[2][2]} - {m[1][2]}*{m[2][0]})"
               f" + {m[0][2]}*({m[1][0]}*{m[2][1]} - {m[1][1]}*{m[2][0]})")
        out.append(f"-({det})" if (3 + i) % 2 else det)
    return out


class RouxelSurface(ImmersionSpec):
    """f = g + g_*(J Y) + J^_± eta from minimal g = Re Phi and its conjugate h = Im Phi.

    ``h = g_* Y + eta`` splits h into tangent and normal parts along g; J is the
    complex structure with ``h_* = g_* J`` and ``J^_±`` the two rotations of the
    normal plane of g.
    """

    max_order = tl.MAX_ORDER - 1

    def __init__(self, data: WeierstrassData, sign: int = 1, name: str | None = None, check: bool = True):
        if data.dim != 4:
            raise ValueError("the codimension-two construction needs data in C^4")
        if check:
            data.check_isotropic()
        self.data = data
        self.sign = 1 if sign >= 0 else -1
        self.name = name or f"rouxel{'+' if self.sign > 0 else '-'}"
        self.domain = data.domain
        self.ambient_dim = 4

    def parts(self, point, order):
        Phi = self.data.complex_jet(point, order + 1)
        g, h = Phi.real, Phi.imag
        gu, gv = g.d(0), g.d(1)
        T = _Plane(gu, gv)
        a = tl.sqrt(tl.dot(gu, gu))
        e1 = gu / a
        w = gv - e1 * tl.dot(gv, e1)
        e2 = w / tl.sqrt(tl.dot(w, w))
        Yu, Yv = T.coefficients(h)
        eta = h - T.combine(Yu, Yv)
        # J = -sqrt(det G) G^{-1} eps on chart coefficients (h_* = g_* J)
        (g11, g12), (_, g22) = T.gram
        sq = tl.sqrt(g11 * g22 - g12 * g12)
        (i11, i12), (_, i22) = T.inv
        # G^{-1} eps = [[i12, -i11], [i22, -i12]]
        JYu = -(sq * (i12 * Yu - i11 * Yv))
        JYv = -(sq * (i22 * Yu - i12 * Yv))
        Jeta = cross4(e1, e2, eta) * float(self.sign)
        return {"g": g, "h": h, "gu": gu, "gv": gv, "JY": T.combine(JYu, JYv), "Jeta": Jeta, "eta": eta}

    def _jet(self, point, order):
        if order > self.max_order:
            raise tl.OrderError(f"jets available up to order {self.max_order}")
        p = self.parts(point, order)
        g = p["g"].truncate(order)
        return tl.Jet(g + p["JY"] + p["Jeta"], point)

    def to_ast(self):
        # the chart is conformal for g, so with a2 = |g_u|^2 the construction is
        # f = g + (<h, g_v> g_u - <h, g_u> g_v +- cross4(g_u, g_v, h)) / a2
        ph, src = self.data.phi_sources(), self.data.real_sources()
        if ph is None or src is None:
            return None
        from . import dsl

        par = [f"({s})" for s in ph[1]]
        gu = [f"({s})" for s in ph[0]]
        gv = [f"(-{s})" for s in par]
        g = [f"({s})" for s in src[0]]
        h = [f"({s})" for s in src[1]]

        def dot(a, b):
            return " + ".join(f"{x}*{y}" for x, y in zip(a, b))

        a2, hu, hv = f"({dot(gu, gu)})", f"({dot(h, gu)})", f"({dot(h, gv)})"
        cr = _cross4_text(gu, gv, h)
        sgn = "+" if self.sign > 0 else "-"
        comps = [f"{g[i]} + ({hv}*{gu[i]} - {hu}*{gv[i]} {sgn} ({cr[i]}))/{a2}" for i in range(4)]
        ast = dsl.parse("[" + ", ".join(comps) + "]")
        return dsl.SurfaceAst(ast.components, (), self.domain)

    def source(self):
        from . import dsl

        ast = self.to_ast()
        return None if ast is None else dsl.pretty(ast)

    def g_spec(self):
        from .weierstrass import WeierstrassSurface

        return WeierstrassSurface(self.data, "real", check=False)


def rouxel_dual(g_data: WeierstrassData, sign: int = 1) -> RouxelSurface:
    return RouxelSurface(g_data, sign)


def normal_curvatures(g_spec: ImmersionSpec, point, sign: int = 1) -> tuple[float, float]:
    """Gauss curvature K and normal curvature K-perp of a surface in R^4.

    K-perp is ``2 <J A_nu e, A_{J^ nu} e>`` for unit e and nu, with J the
    rotation satisfying ``h_* = g_* J`` for the conjugate h = Im Phi, which in
    the (X1, X2) frame is ``J X1 = -X2``.
    """
    fd = fundamental_forms(g_spec.jet(point, 2))
    K = float(fd.alpha11 @ fd.alpha22 - fd.alpha12 @ fd.alpha12)
    nb = fd.normal_basis()
    nu1 = nb[0]
    nu2 = sign * cross4(fd.X1, fd.X2, nu1)
    A1, A2 = fd.shape_operator(nu1), fd.shape_operator(nu2)
    Jm = -EPS  # J X1 = -X2 in frame coordinates
    e = np.array([1.0, 0.0])
    Kp = 2.0 * float((Jm @ A1 @ e) @ (A2 @ e))
    return K, Kp


def rouxel_metric_defect(r: RouxelSurface, point) -> float:
    """|G_f + |h|^2 (K + K-perp) G_g| relative to |G_f|."""
    K, Kp = normal_curvatures(r.g_spec(), point, r.sign)
    Gg = fundamental_forms(r.g_spec().jet(point, 2)).chart_metric
    Gf = fundamental_forms(r.jet(point, 2)).chart_metric
    h = np.imag(r.data.complex_jet(point, 0).value)
    want = -float(h @ h) * (K + Kp) * Gg
    return float(np.linalg.norm(Gf - want) / (1.0 + np.linalg.norm(Gf)))


@dataclass(frozen=True)
class Codim2Pair:
    g: np.ndarray
    H_g: float
    conjugacy: float
    conformality: float
    partner: np.ndarray


def codim2_pair(f_spec: ImmersionSpec, point, orientation: int = 1) -> Codim2Pair:
    """Recover g and h = r^2(lambda2 xi1 - lambda1 xi2) from f in R^4 and check h_* = g_* J."""
    if f_spec.ambient_dim != 4:
        raise ValueError("codim2_pair needs a surface in R^4")
    F = f_spec.jet(point, 4).taylor
    df = DualFields(F, orientation)
    ff, fd = df.ff, df.fd
    h = (ff.xi1 * ff.lambda2 - ff.xi2 * ff.lambda1) * df.r2
    M = fd.chart_frame
    dh = [_val(h.d(k)) for k in range(2)]
    dg = [_val(df.gu), _val(df.gv)]
    hX = [M[i, 0] * dh[0] + M[i, 1] * dh[1] for i in range(2)]
    gX = [M[i, 0] * dg[0] + M[i, 1] * dg[1] for i in range(2)]
    scale = 1.0 + np.linalg.norm(gX[0])
    conj = max(np.linalg.norm(hX[0] - gX[1]), np.linalg.norm(hX[1] + gX[0])) / scale
    Hg = FrameFields(df.g.truncate(2)).frame_data().H_norm
    return Codim2Pair(_val(df.g).copy(), float(Hg), float(conj),
                      conformality_defect(fd.chart_metric, df.g_metric()), _val(df.dual).copy())
