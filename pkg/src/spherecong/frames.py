"""Adapted frames, second fundamental form and the residuals built on them.

Everything here is written over :class:`~spherecong.taylor.Taylor` values, so
the same code gives point data (order-0 fields) or jets of frame fields
(higher order), which the duality constructions differentiate further.

Conventions: ``X1, X2`` come from Gram-Schmidt on ``(f_u, f_v)`` in that
order, so ``X2 = J X1`` for the chart orientation; ``orientation=-1`` flips
``X2``.  The xi-frame follows the normal form of a superconformal surface:
``alpha11 - alpha22 = 2 mu xi1`` and ``alpha12 = mu xi2``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import taylor as tl
from .errors import DegenerateImmersion, StencilOutsideDomain, UmbilicPoint

UMBILIC_TOL = 1e-8
LAMBDA_TOL = 1e-8
IMMERSION_TOL = 1e-8
RANK_TOL = 1e-8


def inner(x, y, metric=None):
    if metric is None:
        return tl.dot(x, y)
    return tl.dot(x * np.asarray(metric, dtype=float), y)


def _norm2(x, metric=None):
    return inner(x, x, metric)


@dataclass(frozen=True)
class FrameData:
    """Frame quantities at a single point (plain arrays and floats)."""

    point: np.ndarray
    X1: np.ndarray
    X2: np.ndarray
    alpha11: np.ndarray
    alpha12: np.ndarray
    alpha22: np.ndarray
    H: np.ndarray
    mu: float
    xi1: np.ndarray | None
    xi2: np.ndarray | None
    delta: np.ndarray | None
    lambda1: float
    lambda2: float
    lam: float
    theta: float
    dim_N1: int
    conformal_factor: float
    chart_metric: np.ndarray
    chart_frame: np.ndarray  # rows: X_i in terms of (d/du, d/dv)
    flags: frozenset = field(default_factory=frozenset)
    metric: np.ndarray | None = None

    @property
    def umbilic(self) -> bool:
        return "umbilic" in self.flags

    @property
    def alpha_norm(self) -> float:
        return float(np.sqrt(np.sum(self.alpha11**2) + 2 * np.sum(self.alpha12**2) + np.sum(self.alpha22**2)))

    @property
    def H_norm(self) -> float:
        return float(np.linalg.norm(self.H))

    def normal_basis(self) -> np.ndarray:
        """Orthonormal basis (rows) of the Euclidean normal space."""
        n = self.X1.shape[0]
        tangent = np.stack([self.X1, self.X2])
        _, _, vt = np.linalg.svd(tangent, full_matrices=True)
        return vt[2:n]

    def inner(self, x, y) -> float:
        if self.metric is None:
            return float(np.dot(x, y))
        return float(np.dot(np.asarray(x) * self.metric, y))

    def normal_part(self, vec) -> np.ndarray:
        vec = np.asarray(vec, dtype=float)
        return vec - self.inner(vec, self.X1) * self.X1 - self.inner(vec, self.X2) * self.X2

    def alpha(self, i: int, j: int) -> np.ndarray:
        return (self.alpha11, self.alpha12, self.alpha22)[i + j]

    def shape_operator(self, mu_vec) -> np.ndarray:
        """Matrix of A_mu in the orthonormal frame (X1, X2)."""
        return np.array([[self.inner(self.alpha(i, j), mu_vec) for j in range(2)] for i in range(2)])


class FrameFields:
    """Frame fields as Taylor expansions around the base point.

    Orders: tangent quantities have ``K-1``, second fundamental form and the
    quantities built from it ``K-2``, where ``K`` is the input order.
    """

    def __init__(self, F: tl.Taylor, metric=None, orientation: int = 1):
        if F.order < 2:
            raise ValueError("frame fields need an expansion of order >= 2")
        self.F = F
        self.metric = metric
        fu, fv = F.d(0), F.d(1)
        fuu, fuv, fvv = fu.d(0), fu.d(1), fv.d(1)
        guu, guv, gvv = _norm2(fu, metric), inner(fu, fv, metric), _norm2(fv, metric)
        gu0, gv0, gw0 = float(np.real(guu.value)), float(np.real(guv.value)), float(np.real(gvv.value))
        if gu0 <= 0 or gw0 <= 0:
            raise DegenerateImmersion("vanishing or non-spacelike chart derivative")
        sin2 = (gu0 * gw0 - gv0 * gv0) / (gu0 * gw0)
        if not sin2 > IMMERSION_TOL**2:
            raise DegenerateImmersion(f"chart derivatives nearly parallel (sin^2 = {sin2:.3e})")
        a = tl.sqrt(guu)
        X1 = fu / a
        c = inner(fv, X1, metric)
        w = fv - X1 * c
        b = tl.sqrt(_norm2(w, metric))
        X2 = w / b
        if orientation < 0:
            X2 = -X2
        # X_i = M[i][0] f_u + M[i][1] f_v
        ia, ib = tl.recip(a), tl.recip(b)
        M = [[ia, None], [-(c * ia * ib) * orientation, ib * orientation]]
        self.fu, self.fv, self.X1, self.X2, self.M = fu, fv, X1, X2, M
        self.G = ((guu, guv), (guv, gvv))

        def normal(v):
            return v - X1 * inner(v, X1, metric) - X2 * inner(v, X2, metric)

        self.normal = normal
        auu, auv, avv = normal(fuu), normal(fuv), normal(fvv)
        m00, m10, m11 = M[0][0], M[1][0], M[1][1]
        self.alpha11 = auu * (m00 * m00)
        self.alpha12 = (auu * m10 + auv * m11) * m00
        self.alpha22 = auu * (m10 * m10) + auv * (m10 * m11 * 2.0) + avv * (m11 * m11)
        self.H = (self.alpha11 + self.alpha22) * 0.5
        self.xt1 = (self.alpha11 - self.alpha22) * 0.5
        self.xt2 = self.alpha12
        self._frame_data = None
        self.xi1 = self.xi2 = self.delta = None
        self.mu = self.lambda1 = self.lambda2 = self.lam = None
        if metric is None:
            self._build_xi_frame()

    # --------------------------------------------------------------
    def _build_xi_frame(self):
        xt1, xt2, H = self.xt1, self.xt2, self.H
        n1, n2 = _norm2(xt1), _norm2(xt2)
        alpha_norm = np.sqrt(float(_norm2(self.alpha11).value + 2 * _norm2(self.alpha12).value + _norm2(self.alpha22).value))
        self.mu = tl.sqrt((n1 + n2) * 0.5) if float((n1 + n2).value) > 0 else None
        mu0 = float(self.mu.value) if self.mu is not None else 0.0
        self.flags = set()
        thr = UMBILIC_TOL * (1.0 + alpha_norm)
        if mu0 < thr:
            self.flags.add("umbilic")
            return
        semi = np.linalg.svd(np.stack([np.atleast_1d(xt1.value), np.atleast_1d(xt2.value)], axis=1), compute_uv=False)
        if semi[-1] < thr:
            self.flags.add("segment")
            return
        xi1 = xt1 / tl.sqrt(n1)
        w = xt2 - xi1 * tl.dot(xt2, xi1)
        xi2 = w / tl.sqrt(_norm2(w))
        self.xi1, self.xi2 = xi1, xi2
        self.lambda1, self.lambda2 = tl.dot(H, xi1), tl.dot(H, xi2)
        Hp = H - xi1 * self.lambda1 - xi2 * self.lambda2
        lam2 = _norm2(Hp)
        H0 = float(np.sqrt(_norm2(H).value))
        if np.sqrt(max(float(lam2.value), 0.0)) < LAMBDA_TOL * (1.0 + H0):
            self.flags.add("lambda_zero")
            self.Hperp = Hp
            return
        self.lam = tl.sqrt(lam2)
        self.delta = Hp / self.lam
        self.Hperp = Hp

    # --------------------------------------------------------------
    def chart_vector(self, i: int, du, dv):
        """Ambient image of X_i applied to a field with chart derivatives (du, dv)."""
        M = self.M
        if i == 0:
            return du * M[0][0]
        return du * M[1][0] + dv * M[1][1]

    def frame_data(self) -> FrameData:
        if self._frame_data is not None:
            return self._frame_data
        v = lambda t: None if t is None else np.real(np.asarray(t.value, dtype=float))
        a11, a12, a22 = v(self.alpha11), v(self.alpha12), v(self.alpha22)
        flags = set(getattr(self, "flags", set()))
        s = np.linalg.svd(np.stack([a11, a12, a22]), compute_uv=False)
        dim_n1 = int(np.sum(s > RANK_TOL * (1.0 + s[0])))
        if dim_n1 == 0:
            flags.add("degenerate_N1")
        H = v(self.H)
        if self.metric is not None:
            mu = float(np.sqrt(0.5 * (np.sum(v(self.xt1) ** 2) + np.sum(a12**2))))
        else:
            mu = float(v(self.mu)) if self.mu is not None else 0.0
        lam1 = float(v(self.lambda1)) if self.lambda1 is not None else 0.0
        lam2 = float(v(self.lambda2)) if self.lambda2 is not None else 0.0
        lam = float(v(self.lam)) if self.lam is not None else 0.0
        M = self.M
        frame = np.array([[float(M[0][0].value), 0.0], [float(M[1][0].value), float(M[1][1].value)]])
        G = np.array([[float(self.G[0][0].value), float(self.G[0][1].value)],
                      [float(self.G[1][0].value), float(self.G[1][1].value)]])
        self._frame_data = FrameData(
            point=v(self.F),
            X1=v(self.X1), X2=v(self.X2),
            alpha11=a11, alpha12=a12, alpha22=a22, H=H,
            mu=mu, xi1=v(self.xi1), xi2=v(self.xi2), delta=v(self.delta),
            lambda1=lam1, lambda2=lam2, lam=lam, theta=lam1**2 + lam2**2,
            dim_N1=dim_n1, conformal_factor=float(G[0, 0]),
            chart_metric=G, chart_frame=frame, flags=frozenset(flags),
            metric=None if self.metric is None else np.asarray(self.metric, dtype=float),
        )
        return self._frame_data


def frame_fields(F: tl.Taylor, metric=None, orientation: int = 1) -> FrameFields:
    return FrameFields(F, metric=metric, orientation=orientation)


def fundamental_forms(j: tl.Jet, metric=None, orientation: int = 1) -> FrameData:
    """Frame data at the base point of a jet of order >= 2."""
    if j.order < 2:
        raise ValueError("fundamental_forms needs a jet of order >= 2")
    return FrameFields(j.taylor.truncate(2), metric=metric, orientation=orientation).frame_data()


# ----------------------------------------------------------------------
# ellipse of curvature

@dataclass(frozen=True)
class Ellipse:
    center: np.ndarray
    axis1: np.ndarray
    axis2: np.ndarray
    semi_major: float
    semi_minor: float
    circle_residual: float

    def sample(self, angle) -> np.ndarray:
        """alpha(v, v) for the unit tangent vector at the given angle from X1."""
        return self.center + np.cos(2 * angle) * self.axis1 + np.sin(2 * angle) * self.axis2

    def distance(self, point) -> float:
        """Distance from a normal vector to the ellipse.

        The nearest point A c (|c| = 1) solves (M - s I) c = A^T p with
        M = A^T A; in the eigenbasis of M the multiplier s is a root of a
        quartic.  A dense search over the angle is kept as a fallback.
        """
        p = np.asarray(point, dtype=float) - self.center
        A = np.stack([self.axis1, self.axis2], axis=1)
        t = np.linspace(0, 2 * np.pi, 721)
        d = np.linalg.norm(p[None, :] - (np.cos(t)[:, None] * A[:, 0] + np.sin(t)[:, None] * A[:, 1]), axis=1)
        best = float(d.min())
        m, V = np.linalg.eigh(A.T @ A)
        b = V.T @ (A.T @ p)
        tiny = 1e-14 * (1.0 + m[-1])
        cands = []
        q1, q2 = np.poly1d([1.0, -m[0]]) ** 2, np.poly1d([1.0, -m[1]]) ** 2
        for s in (q1 * q2 - b[0] ** 2 * q2 - b[1] ** 2 * q1).roots:
            if abs(s.imag) <= 1e-8 * (1.0 + abs(s)):
                den = m - s.real
                if np.all(np.abs(den) > tiny):
                    cands.append(b / den)
        for i in range(2):
            j = 1 - i
            if abs(m[j] - m[i]) > tiny:
                cj = b[j] / (m[j] - m[i])
                if abs(cj) <= 1.0:
                    ci = np.sqrt(1.0 - cj * cj)
                    for sg in (1.0, -1.0):
                        c = np.empty(2)
                        c[i], c[j] = sg * ci, cj
                        cands.append(c)
            elif np.linalg.norm(b) > 0:
                cands.append(b)
        for c in cands:
            n = np.linalg.norm(c)
            if n > 0:
                best = min(best, float(np.linalg.norm(A @ (V @ (c / n)) - p)))
        return best


def tangent_circle_samples(fd: FrameData, n: int = 360) -> np.ndarray:
    """alpha(v, v) for n unit tangent vectors v, straight from the alpha_ij."""
    t = np.arange(n) * (2 * np.pi / n)
    c, s = np.cos(t)[:, None], np.sin(t)[:, None]
    return c * c * fd.alpha11 + 2 * c * s * fd.alpha12 + s * s * fd.alpha22


def ellipse_sampling_defect(fd: FrameData, n: int = 360) -> float:
    """Largest distance from a sampled alpha(v, v) to the computed ellipse, relative to 1 + semi_major."""
    el = ellipse_of_curvature(fd)
    pts = tangent_circle_samples(fd, n) - el.center
    A = np.stack([el.axis1, el.axis2], axis=1)
    if el.semi_minor > 1e-6 * (1.0 + el.semi_major):
        coords = np.linalg.lstsq(A, pts.T, rcond=None)[0].T
        off = np.linalg.norm(pts - coords @ A.T, axis=1)
        radial = np.abs(np.linalg.norm(coords, axis=1) - 1.0) * el.semi_major
        worst = float(np.max(off + radial))
    else:
        worst = max(el.distance(p + el.center) for p in pts[:: max(1, n // 72)])
    return worst / (1.0 + el.semi_major)


def axis_gap(axis1, axis2) -> float:
    """Semi-major minus semi-minor axis of the ellipse spanned by two axis vectors.

    Written as (s1^2 - s2^2) / (s1 + s2) so that near-circles lose no digits.
    """
    n1, n2, c = float(axis1 @ axis1), float(axis2 @ axis2), float(axis1 @ axis2)
    diff = np.hypot(n1 - n2, 2.0 * c)
    total = np.sqrt(n1 + n2 + 2.0 * np.sqrt(max(n1 * n2 - c * c, 0.0)))
    return float(diff / total) if total > 0 else 0.0


def ellipse_of_curvature(fd: FrameData) -> Ellipse:
    axis1 = 0.5 * (fd.alpha11 - fd.alpha22)
    axis2 = fd.alpha12
    s = np.linalg.svd(np.stack([axis1, axis2], axis=1), compute_uv=False)
    # the circle conditions read in the frame along the ellipse's own axes
    circle = 2.0 * axis_gap(axis1, axis2)
    return Ellipse(fd.H.copy(), axis1, axis2, float(s[0]), float(s[-1]), float(circle))


def superconformal_residual(fd: FrameData) -> float:
    """Scale-free defect of the circle conditions; 0 at (flagged) umbilics.

    In a tangent frame aligned with the axes of the ellipse the inner-product
    condition holds trivially and the length condition reduces to twice the
    axis gap, which makes the value independent of the chart.
    """
    if fd.umbilic:
        return 0.0
    raw = 2.0 * axis_gap(0.5 * (fd.alpha11 - fd.alpha22), fd.alpha12)
    return raw / (1.0 + 2.0 * fd.alpha_norm**2)


def sampled_circle_ratio(fd: FrameData, n: int = 360) -> float:
    """max/min distance of sampled alpha(v, v) from H, minus one (inf at umbilics)."""
    d = np.linalg.norm(tangent_circle_samples(fd, n) - fd.H, axis=1)
    if d.min() == 0:
        return float("inf")
    return float(d.max() / d.min() - 1.0)


# ----------------------------------------------------------------------
# derivatives of the mean curvature vector

def normal_derivative_H(j: tl.Jet, orientation: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """(nabla-perp_{X1} H, nabla-perp_{X2} H) at the base point; needs order >= 3."""
    if j.order < 3:
        raise ValueError("normal_derivative_H needs a jet of order >= 3")
    ff = FrameFields(j.taylor.truncate(3), orientation=orientation)
    return _normal_dH(ff)


def _normal_dH(ff: FrameFields):
    fd = ff.frame_data()
    dHu = np.asarray(ff.H.d(0).value)
    dHv = np.asarray(ff.H.d(1).value)
    M = fd.chart_frame
    out = []
    for i in range(2):
        out.append(fd.normal_part(M[i, 0] * dHu + M[i, 1] * dHv))
    return out[0], out[1]


def s_willmore_residual(j: tl.Jet, orientation: int = 1) -> float:
    """Norm of nabla-perp_V H off the complex line of alpha(V, V), V = X1 - i X2."""
    if j.order < 3:
        raise ValueError("s_willmore_residual needs a jet of order >= 3")
    ff = FrameFields(j.taylor.truncate(3), orientation=orientation)
    fd = ff.frame_data()
    A = (fd.alpha11 - fd.alpha22) - 2j * fd.alpha12
    AA = float(np.real(np.vdot(A, A)))
    if fd.umbilic or AA <= (UMBILIC_TOL * (1 + fd.alpha_norm)) ** 2:
        raise UmbilicPoint("alpha(V, V) vanishes")
    n1, n2 = _normal_dH(ff)
    B = n1 - 1j * n2
    off = B - (np.vdot(A, B) / AA) * A
    return float(np.linalg.norm(off) / (1.0 + np.linalg.norm(B)))


def _willmore_terms(fd: FrameData, lap: np.ndarray) -> np.ndarray:
    H = fd.H
    s = np.zeros_like(H)
    for a in (fd.alpha11, fd.alpha22):
        s += (H @ a) * a
    s += 2 * (H @ fd.alpha12) * fd.alpha12
    return lap - 2 * (H @ H) * H + s


def _christoffel(fd: FrameData, jet2: tl.Jet):
    fu = np.asarray(jet2.taylor.derivative(1, 0))
    fv = np.asarray(jet2.taylor.derivative(0, 1))
    second = {(0, 0): jet2.taylor.derivative(2, 0), (0, 1): jet2.taylor.derivative(1, 1),
              (1, 1): jet2.taylor.derivative(0, 2)}
    second[(1, 0)] = second[(0, 1)]
    Ginv = np.linalg.inv(fd.chart_metric)
    gam = np.zeros((2, 2, 2))
    for k in range(2):
        for l in range(2):
            low = np.array([second[(k, l)] @ fu, second[(k, l)] @ fv])
            gam[:, k, l] = Ginv @ low
    return gam, Ginv


def _chart_normal_dH(j: tl.Jet):
    """(nabla-perp_{d/du} H, nabla-perp_{d/dv} H) in chart directions."""
    ff = FrameFields(j.taylor.truncate(3))
    fd = ff.frame_data()
    return fd, [fd.normal_part(np.asarray(ff.H.d(k).value)) for k in range(2)]


def willmore_laplacian_exact(j: tl.Jet) -> tuple[np.ndarray, FrameData]:
    """Normal Laplacian of H at the base point from an order-4 jet."""
    if j.order < 4:
        raise ValueError("needs a jet of order >= 4")
    ff = FrameFields(j.taylor.truncate(4))
    fd = ff.frame_data()
    W = [ff.normal(ff.H.d(k)) for k in range(2)]
    gam, Ginv = _christoffel(fd, j)
    W0 = [np.asarray(w.value) for w in W]
    lap = np.zeros_like(fd.H)
    for k in range(2):
        for l in range(2):
            term = fd.normal_part(np.asarray(W[l].d(k).value))
            term = term - gam[0, k, l] * W0[0] - gam[1, k, l] * W0[1]
            lap += Ginv[k, l] * term
    return lap, fd


def willmore_residual_exact(j: tl.Jet) -> float:
    lap, fd = willmore_laplacian_exact(j)
    return float(np.linalg.norm(_willmore_terms(fd, lap)) / (1.0 + fd.H_norm**3))


def willmore_residual(spec, point, fd_step: float = 1e-3) -> float:
    """Willmore-equation defect with the normal Laplacian from central differences.

    The nabla-perp H field is sampled from order-3 jets on a 5-point stencil,
    differenced, projected to the normal space at ``point`` and corrected by
    the chart Christoffel symbols; steps ``h`` and ``h/2`` are combined by
    Richardson extrapolation.
    """
    u, v = float(point[0]), float(point[1])
    for du, dv in ((fd_step, 0), (-fd_step, 0), (0, fd_step), (0, -fd_step)):
        if not spec.domain.contains((u + du, v + dv)):
            raise StencilOutsideDomain(f"stencil at {point} with step {fd_step} leaves the domain")
    j0 = spec.jet((u, v), 3)
    fd, W0 = _chart_normal_dH(j0)
    gam, Ginv = _christoffel(fd, j0)

    def lap_at(h):
        W = {}
        for key, (du, dv) in {"u+": (h, 0), "u-": (-h, 0), "v+": (0, h), "v-": (0, -h)}.items():
            W[key] = _chart_normal_dH(spec.jet((u + du, v + dv), 3))[1]
        D = [[None, None], [None, None]]
        for l in range(2):
            D[0][l] = fd.normal_part((W["u+"][l] - W["u-"][l]) / (2 * h))
            D[1][l] = fd.normal_part((W["v+"][l] - W["v-"][l]) / (2 * h))
        lap = np.zeros_like(fd.H)
        for k in range(2):
            for l in range(2):
                lap += Ginv[k, l] * (D[k][l] - gam[0, k, l] * W0[0] - gam[1, k, l] * W0[1])
        return lap

    lap = (4 * lap_at(fd_step / 2) - lap_at(fd_step)) / 3
    return float(np.linalg.norm(_willmore_terms(fd, lap)) / (1.0 + fd.H_norm**3))


def conformality_defect(G1: np.ndarray, G2: np.ndarray) -> float:
    """How far two chart metrics are from being proportional (0 when conformal)."""
    a = G1 / np.trace(G1)
    b = G2 / np.trace(G2)
    return float(np.linalg.norm(a - b))
