"""Inversions, reflections and the stereographic configurations.

The stereographic projection is the inversion centred at ``e`` (last basis
vector) with radius 1: it maps the sphere ``S_{1/2}(e/2)`` and, in the
Lorentzian model, the hyperboloid ``H_{1/2}(e/2)`` onto the hyperplane
``x_last = 0``.  Model surfaces therefore live one dimension up and are
projected by dropping a certified-zero last coordinate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dsl
from . import taylor as tl
from .errors import GeometryError, MinimalPoint, PoleHit
from .frames import FrameData, fundamental_forms
from .surfaces import ImmersionSpec

POLE_TOL = 1e-10
EUCLIDEAN = "euclidean"
LORENTZIAN = "lorentzian"


def lorentz_metric(n: int) -> np.ndarray:
    m = np.ones(n)
    m[-1] = -1.0
    return m


def _sig_inner(x, y, signature: str):
    if signature == LORENTZIAN:
        n = x.shape[-1] if not isinstance(x, tl.Taylor) else x.shape[-1]
        return tl.dot(x * lorentz_metric(n), y)
    return tl.dot(x, y)


@dataclass(frozen=True)
class Inversion:
    center: tuple
    radius: float = 1.0
    signature: str = EUCLIDEAN

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("inversion radius must be positive")
        if self.signature not in (EUCLIDEAN, LORENTZIAN):
            raise ValueError(f"unknown signature {self.signature!r}")

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True)
class Reflection:
    center: tuple
    signature: str = EUCLIDEAN

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.center, dtype=float)


@dataclass(frozen=True)
class Composite:
    """Maps applied in list order (the first element acts first)."""

    maps: tuple

    def __post_init__(self):
        if not self.maps:
            raise ValueError("composite map list must be nonempty")


MoebiusMap = Inversion | Reflection | Composite


def apply(m, p):
    """Apply a map to a point or to a Taylor field of points."""
    if isinstance(m, Composite):
        for sub in m.maps:
            p = apply(sub, p)
        return p
    if isinstance(m, Reflection):
        return m.c * 2.0 - p
    is_taylor = isinstance(p, tl.Taylor)
    p = p if is_taylor else np.asarray(p, dtype=float)
    c = m.c
    if p.shape[-1] != c.shape[0]:
        raise ValueError(f"point of dimension {p.shape[-1]} vs centre of dimension {c.shape[0]}")
    w = p - c
    q = _sig_inner(w, w, m.signature)
    q0 = float(np.real(q.value if is_taylor else q))
    dist = np.sqrt(abs(q0)) if m.signature == LORENTZIAN else np.sqrt(q0)
    if dist <= POLE_TOL:
        raise PoleHit(f"point at distance {dist:.3e} from the inversion pole")
    r2 = m.radius**2
    if m.signature == LORENTZIAN:
        return c - w * (r2 / q) if not is_taylor else w * tl.recip(q) * (-r2) + c
    return c + w * (r2 / q) if not is_taylor else w * tl.recip(q) * r2 + c


def stereographic_inversion(dim: int, signature: str = EUCLIDEAN) -> Inversion:
    """Inversion of R^dim (or L^dim) centred at e with radius 1."""
    e = np.zeros(dim)
    e[-1] = 1.0
    return Inversion(tuple(e), 1.0, signature)


# ----------------------------------------------------------------------
# specs

def _map_ast(m, comps, signature_dim):
    """Compose DSL component expressions with a map."""
    if isinstance(m, Composite):
        for sub in m.maps:
            comps = _map_ast(sub, comps, signature_dim)
        return comps
    c = [float(x) for x in m.c]
    if isinstance(m, Reflection):
        return [dsl.BinOp("-", dsl.Num(2 * ci), e) for ci, e in zip(c, comps)]
    diffs = [dsl.BinOp("-", e, dsl.Num(ci)) if ci != 0 else e for ci, e in zip(c, comps)]
    sq = [dsl.BinOp("^", d, dsl.Num(2.0)) for d in diffs]
    q = sq[0]
    for k, s in enumerate(sq[1:], start=1):
        op = "-" if (m.signature == LORENTZIAN and k == len(sq) - 1) else "+"
        q = dsl.BinOp(op, q, s)
    r2 = m.radius**2 * (-1.0 if m.signature == LORENTZIAN else 1.0)
    out = []
    for ci, d in zip(c, diffs):
        t = dsl.BinOp("/", dsl.BinOp("*", dsl.Num(r2), d), q)
        out.append(dsl.BinOp("+", dsl.Num(ci), t) if ci != 0 else t)
    return out


def _ast_of(spec):
    fn = getattr(spec, "to_ast", None)
    if fn is not None:
        return fn()
    return getattr(spec, "ast", None)


class PushedSurface(ImmersionSpec):
    """m composed after spec, evaluated in Taylor arithmetic."""

    def __init__(self, m, base: ImmersionSpec, name: str | None = None, metric=None):
        self.m = m
        self.base = base
        self.name = name or f"pushed({base.name})"
        self.domain = base.domain
        self.ambient_dim = base.ambient_dim
        self.metric = metric if metric is not None else base.metric

    def _jet(self, point, order):
        j = self.base.jet(point, order)
        return tl.Jet(apply(self.m, j.taylor), point)

    def to_ast(self):
        base = _ast_of(self.base)
        if base is None:
            return None
        comps = _map_ast(self.m, list(base.components), self.ambient_dim)
        return dsl.SurfaceAst(tuple(comps), base.params, base.domain)

    def source(self):
        ast = self.to_ast()
        return None if ast is None else dsl.pretty(ast)


def push_immersion(m, spec: ImmersionSpec) -> PushedSurface:
    return PushedSurface(m, spec)


class Projected(ImmersionSpec):
    """Drop the last coordinate after certifying that it vanishes."""

    def __init__(self, base: ImmersionSpec, name: str | None = None, tol: float = 1e-10):
        self.base = base
        self.tol = tol
        self.name = name or f"projected({base.name})"
        self.domain = base.domain
        self.ambient_dim = base.ambient_dim - 1
        self.metric = None

    def _jet(self, point, order):
        j = self.base.jet(point, order)
        p = j.value
        if abs(p[-1]) > self.tol * (1.0 + np.linalg.norm(p)):
            raise GeometryError(f"last coordinate {p[-1]:.3e} is not zero: point is off the model quadric")
        return tl.Jet(j.taylor[..., :-1], point)

    def to_ast(self):
        base = _ast_of(self.base)
        if base is None:
            return None
        return dsl.SurfaceAst(tuple(base.components[:-1]), base.params, base.domain)

    def source(self):
        ast = self.to_ast()
        return None if ast is None else dsl.pretty(ast)


class Embedded(ImmersionSpec):
    """R^N surface viewed in R^{N+1} or L^{N+1} with a zero last coordinate."""

    def __init__(self, base: ImmersionSpec, signature: str = EUCLIDEAN):
        self.base = base
        self.name = f"embedded({base.name})"
        self.domain = base.domain
        self.ambient_dim = base.ambient_dim + 1
        self.metric = lorentz_metric(self.ambient_dim) if signature == LORENTZIAN else None

    def _jet(self, point, order):
        t = self.base.jet(point, order).taylor
        c = np.concatenate([t.coeffs, np.zeros(t.coeffs.shape[:-1] + (1,))], axis=-1)
        return tl.Jet(tl.Taylor(c, order), point)


def stereographic(model: ImmersionSpec, kind: str = "spherical", name: str | None = None) -> Projected:
    """Project a model surface on S_{1/2}(e/2) (or H_{1/2}(e/2)) to R^{n+2}."""
    sig = LORENTZIAN if kind == "hyperbolic" else EUCLIDEAN
    T = stereographic_inversion(model.ambient_dim, sig)
    return Projected(PushedSurface(T, model, metric=None), name=name)


def model_lift(spec: ImmersionSpec, kind: str = "spherical") -> PushedSurface:
    """Inverse of :func:`stereographic`: the model surface of an R^{n+2} surface."""
    sig = LORENTZIAN if kind == "hyperbolic" else EUCLIDEAN
    emb = Embedded(spec, sig)
    T = stereographic_inversion(emb.ambient_dim, sig)
    return PushedSurface(T, emb, name=f"model({spec.name})", metric=emb.metric)


# ----------------------------------------------------------------------
# the normal-bundle isometry and the transformation laws

def normal_isometry_P(f_point, f_frame: FrameData | None, mu, center, signature: str = EUCLIDEAN) -> np.ndarray:
    """Reflection of mu in the hyperplane orthogonal to f - center."""
    w = np.asarray(f_point, dtype=float) - np.asarray(center, dtype=float)
    mu = np.asarray(mu, dtype=float)
    q = float(_sig_inner(w, w, signature))
    if np.sqrt(abs(q)) <= POLE_TOL:
        raise PoleHit("point at the inversion centre")
    return mu - 2.0 * float(_sig_inner(w, mu, signature)) / q * w


def normal_space_basis(fd: FrameData) -> np.ndarray:
    """Rows spanning the normal space (orthonormal in the Euclidean case)."""
    if fd.metric is None:
        return fd.normal_basis()
    n = fd.X1.shape[0]
    proj = np.array([fd.normal_part(e) for e in np.eye(n)])
    u, s, vt = np.linalg.svd(proj)
    return vt[: n - 2]


def mean_curvature_law_check(spec: ImmersionSpec, m: Inversion, point) -> dict:
    """Compare H and shape operators of m∘spec with the conformal transformation laws.

    Returns a dict with the normalized defects ``mean_curvature``,
    ``shape_operator`` and their maximum ``residual``.
    """
    sig = m.signature
    if sig == LORENTZIAN and spec.metric is None and spec.ambient_dim == len(m.center) - 1:
        spec = Embedded(spec, LORENTZIAN)
    metric = lorentz_metric(spec.ambient_dim) if sig == LORENTZIAN else None
    pushed = PushedSurface(m, spec, metric=metric)
    j = spec.jet(point, 2)
    fd = fundamental_forms(j, metric=metric)
    fdh = fundamental_forms(pushed.jet(point, 2), metric=metric)
    c = m.c
    w = fd.point - c
    Q = fd.inner(w, w)
    r2 = m.radius**2
    P = lambda v: normal_isometry_P(fd.point, fd, v, c, sig)
    if sig == LORENTZIAN:
        pred = -P(Q * fd.H + 2 * fd.normal_part(w)) / r2
    else:
        pred = P(Q * fd.H + 2 * fd.normal_part(w)) / r2
    eH = float(np.linalg.norm(fdh.H - pred) / (1.0 + np.linalg.norm(fdh.H)))
    eA = 0.0
    for mu in normal_space_basis(fd):
        mu = mu / np.linalg.norm(mu)
        got = fdh.shape_operator(P(mu))
        want = (Q * fd.shape_operator(mu) + 2 * fd.inner(w, mu) * np.eye(2)) / r2
        if sig == LORENTZIAN:
            want = -want
        eA = max(eA, float(np.linalg.norm(got - want) / (1.0 + np.linalg.norm(want))))
    return {"mean_curvature": eH, "shape_operator": eA, "residual": max(eH, eA)}


def stereo_relation_residual(spec: ImmersionSpec, model: str, point) -> float:
    """Defect of the relation characterising stereographic images of minimal surfaces.

    spherical:  2 f^perp + (1 + |f|^2) H = 0
    hyperbolic: 2 f^perp - (1 - |f|^2) H = 0
    The defect is normalized by ``(1 + |f|^2) |H| + 2|f^perp|``.
    """
    fd = fundamental_forms(spec.jet(point, 2))
    Hn = np.linalg.norm(fd.H)
    if Hn < 1e-8:
        raise MinimalPoint(f"H vanishes at {tuple(point)}")
    f = fd.point
    fp = fd.normal_part(f)
    s = float(f @ f)
    if model == "spherical":
        d = 2 * fp + (1 + s) * fd.H
    elif model == "hyperbolic":
        d = 2 * fp - (1 - s) * fd.H
    else:
        raise ValueError(f"unknown model {model!r}")
    return float(np.linalg.norm(d) / ((1 + s) * Hn + 2 * np.linalg.norm(fp)))


def model_residuals(spec: ImmersionSpec, point, kind: str = "spherical") -> dict:
    """Check a surface against the model configuration directly.

    Returns the quadric defect and the mean-curvature defect: a minimal surface
    in S_{1/2}(e/2) has ``H = -4 (F - e/2)``, one in H_{1/2}(e/2) has
    ``H = 4 (F - e/2)`` in the Lorentzian metric.
    """
    metric = spec.metric
    fd = fundamental_forms(spec.jet(point, 2), metric=metric)
    e = np.zeros(spec.ambient_dim)
    e[-1] = 1.0
    w = fd.point - e / 2
    q = fd.inner(w, w)
    target = -0.25 if kind == "hyperbolic" else 0.25
    sign = 4.0 if kind == "hyperbolic" else -4.0
    return {"quadric": abs(q - target), "mean_curvature": float(np.linalg.norm(fd.H - sign * w))}
