"""Immersion specifications: anything that can produce jets at chart points.

Specs compose: Möbius pushes (``moebius.PushedSurface``), duals
(``duality.DualSurface``) and the codimension-two construction
(``duality.RouxelSurface``) all wrap another spec and evaluate through it
in Taylor arithmetic.
"""
from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from . import dsl
from . import taylor as tl
from .dsl import Domain
from .errors import PointOutsideDomain


class ImmersionSpec:
    """Base class.  Subclasses implement :meth:`_jet`."""

    name: str = "surface"
    metric = None  # None: Euclidean; otherwise a diagonal signature vector
    domain: Domain
    ambient_dim: int

    def jet(self, point, order: int) -> tl.Jet:
        point = (float(point[0]), float(point[1]))
        if not self.domain.contains(point):
            raise PointOutsideDomain(f"{point} outside the chart domain of {self.name}")
        return self._jet(point, order)

    def _jet(self, point, order: int) -> tl.Jet:
        raise NotImplementedError

    def value(self, point) -> np.ndarray:
        return self.jet(point, 0).value

    def source(self) -> str | None:
        """DSL text for the map, when it has a closed form."""
        return None

    def describe(self) -> dict:
        return {"name": self.name, "kind": type(self).__name__, "ambient_dim": self.ambient_dim}

    def scale(self, nu: int = 7, nv: int = 7) -> float:
        """Diameter of the image over a coarse grid (used to make tolerances relative)."""
        pts = []
        for p in self.domain.grid(nu, nv):
            try:
                pts.append(self.value(p))
            except Exception:
                continue
        if len(pts) < 2:
            return 1.0
        pts = np.array(pts)
        return float(np.max(np.linalg.norm(pts[:, None, :] - pts[None, :, :], axis=-1)))


class DslSurface(ImmersionSpec):
    def __init__(self, ast: dsl.SurfaceAst, name: str = "dsl", text: str | None = None):
        self.ast = ast
        self.name = name
        self.domain = ast.domain
        self.ambient_dim = ast.ambient_dim
        self._text = text

    @classmethod
    def from_source(cls, text: str, name: str = "dsl") -> "DslSurface":
        return cls(dsl.parse(text), name=name, text=text)

    @classmethod
    def from_file(cls, path) -> "DslSurface":
        path = Path(path)
        return cls.from_source(path.read_text(encoding="utf-8"), name=path.stem)

    def _jet(self, point, order):
        return dsl.jet_unchecked(self.ast, point, order)

    def plain_value(self, point) -> np.ndarray:
        return dsl.eval_value(self.ast, point)

    def source(self) -> str:
        return dsl.pretty(self.ast)

    def describe(self) -> dict:
        out = super().describe()
        out["params"] = dict(self.ast.params)
        return out


def substitute_linear(t: tl.Taylor, matrix) -> tl.Taylor:
    """Re-expand t(du, dv) in new variables with (du, dv) = matrix @ (ds, dt)."""
    a = np.asarray(matrix, dtype=float)
    k = t.order
    s = tl.Taylor.variable(0.0, 0, k) * a[0, 0] + tl.Taylor.variable(0.0, 1, k) * a[0, 1]
    r = tl.Taylor.variable(0.0, 0, k) * a[1, 0] + tl.Taylor.variable(0.0, 1, k) * a[1, 1]
    spow = [tl.Taylor.constant(1.0, k)]
    rpow = [tl.Taylor.constant(1.0, k)]
    for _ in range(k):
        spow.append(spow[-1] * s)
        rpow.append(rpow[-1] * r)
    out = np.zeros_like(t.coeffs)
    extra = (1,) * len(t.shape)
    for i, (p, q) in enumerate(tl.monomials(k)):
        basis = (spow[p] * rpow[q]).coeffs.reshape((-1,) + extra)
        out = out + basis * t.coeffs[i]
    return tl.Taylor(out, k)


class Reparametrized(ImmersionSpec):
    """base(matrix @ (u, v) + offset): a linear change of chart."""

    def __init__(self, base: ImmersionSpec, matrix, offset=(0.0, 0.0), domain: Domain | None = None):
        self.base = base
        self.matrix = np.asarray(matrix, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        self.name = f"reparam({base.name})"
        self.metric = base.metric
        self.ambient_dim = base.ambient_dim
        if domain is None:
            inv = np.linalg.inv(self.matrix)
            (u0, u1), (v0, v1) = base.domain.u_range, base.domain.v_range
            corners = np.array([[u0, v0], [u0, v1], [u1, v0], [u1, v1]]) - self.offset
            pre = corners @ inv.T
            exc = []
            for cu, cv, r in base.domain.exclusions:
                c = inv @ (np.array([cu, cv]) - self.offset)
                exc.append((float(c[0]), float(c[1]), float(r / np.linalg.svd(self.matrix)[1][-1])))
            domain = Domain((float(pre[:, 0].min()), float(pre[:, 0].max())),
                            (float(pre[:, 1].min()), float(pre[:, 1].max())), tuple(exc))
        self.domain = domain

    @classmethod
    def rotation(cls, base: ImmersionSpec, angle: float) -> "Reparametrized":
        c, s = math.cos(angle), math.sin(angle)
        return cls(base, [[c, -s], [s, c]])

    def jet(self, point, order):
        point = (float(point[0]), float(point[1]))
        return self._jet(point, order)

    def _jet(self, point, order):
        q = self.matrix @ np.asarray(point) + self.offset
        j = self.base.jet(q, order)
        return tl.Jet(substitute_linear(j.taylor, self.matrix), point)


class Similarity(ImmersionSpec):
    """scale * rotation @ base + translation (a rigid motion when scale = 1)."""

    def __init__(self, base: ImmersionSpec, rotation=None, translation=None, scale: float = 1.0):
        n = base.ambient_dim
        self.base = base
        self.rotation = np.eye(n) if rotation is None else np.asarray(rotation, dtype=float)
        self.translation = np.zeros(n) if translation is None else np.asarray(translation, dtype=float)
        self.factor = float(scale)
        self.name = f"similar({base.name})"
        self.ambient_dim = n
        self.domain = base.domain

    def _jet(self, point, order):
        j = self.base.jet(point, order)
        c = np.einsum("ij,kj->ki", self.rotation, j.taylor.coeffs) * self.factor
        c[0] += self.translation
        return tl.Jet(tl.Taylor(c, order), point)


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.normal(size=(n, n)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
