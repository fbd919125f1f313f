"""Weierstrass data for minimal surfaces: g = Re Phi, conjugate h = Im Phi.

``phi`` is a vector of complex polynomials in z = u + i v (coefficients in
ascending powers), optionally plus pole terms ``c / (z - a)^k`` with k >= 2.
Antiderivatives are exact, so g and h have machine-precision jets.  Residue
terms (k = 1) integrate to a logarithm and are rejected.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import dsl
from . import taylor as tl
from .dsl import Domain
from .errors import NonClosedFormAntiderivative, NonIsotropicData, PoleHit
from .surfaces import ImmersionSpec

ISOTROPY_TOL = 1e-10


@dataclass(frozen=True)
class WeierstrassData:
    phi: tuple  # per component: tuple of complex coefficients, ascending powers
    domain: Domain = field(default_factory=Domain)
    poles: tuple = ()  # (component, a, k, c)

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(tuple(complex(c) for c in comp) for comp in self.phi))
        for comp, a, k, c in self.poles:
            if k < 2:
                raise NonClosedFormAntiderivative(
                    f"pole term of order {k} at {a} in component {comp} has a logarithmic antiderivative")
            (u0, u1), (v0, v1) = self.domain.u_range, self.domain.v_range
            a = complex(a)
            if u0 <= a.real <= u1 and v0 <= a.imag <= v1 and self.domain.contains((a.real, a.imag)):
                raise PoleHit(f"pole of phi at {a} inside the chart domain")

    @property
    def dim(self) -> int:
        return len(self.phi)

    def _antiderivative(self) -> list[list[complex]]:
        out = []
        for comp in self.phi:
            out.append([0j] + [c / (j + 1) for j, c in enumerate(comp)])
        return out

    def Phi(self, z):
        """Exact antiderivative of phi at z (complex number or complex Taylor)."""
        vals = []
        for coeffs in self._antiderivative():
            acc = 0j
            for c in reversed(coeffs):
                acc = acc * z + c
            vals.append(acc)
        for comp, a, k, c in self.poles:
            w = z - complex(a)
            term = (tl.recip(w) if isinstance(w, tl.Taylor) else 1.0 / w) ** (k - 1)
            vals[comp] = vals[comp] + term * (-complex(c) / (k - 1))
        return vals

    def phi_at(self, z: complex) -> np.ndarray:
        vals = []
        for comp in self.phi:
            acc = 0j
            for c in reversed(comp):
                acc = acc * z + c
            vals.append(acc)
        for comp, a, k, c in self.poles:
            vals[comp] += complex(c) / (z - complex(a)) ** k
        return np.array(vals)

    def isotropy_defect(self, samples: int = 7) -> float:
        worst = 0.0
        for (u, v) in self.domain.grid(samples, samples):
            p = self.phi_at(complex(u, v))
            worst = max(worst, abs(np.sum(p * p)) / (1.0 + np.sum(np.abs(p) ** 2)))
        return float(worst)

    def check_isotropic(self) -> None:
        d = self.isotropy_defect()
        if d > ISOTROPY_TOL:
            raise NonIsotropicData(f"phi . phi = {d:.3e} is not zero: the data do not define a minimal surface")

    def complex_jet(self, point, order: int) -> tl.Taylor:
        u, v = float(point[0]), float(point[1])
        z = tl.Taylor.variable(u, 0, order) + tl.Taylor.variable(v, 1, order) * 1j
        vals = self.Phi(z)
        return tl.stack([x if isinstance(x, tl.Taylor) else tl.Taylor.constant(x, order) for x in vals], order)

    def real_sources(self) -> tuple[list[str], list[str]] | None:
        """DSL expressions for Re Phi and Im Phi (polynomial data only)."""
        if self.poles:
            return None
        return _poly_sources(self._antiderivative())

    def phi_sources(self) -> tuple[list[str], list[str]] | None:
        """DSL expressions for Re phi and Im phi (polynomial data only)."""
        if self.poles:
            return None
        return _poly_sources([list(c) for c in self.phi])


def _poly_sources(polys) -> tuple[list[str], list[str]]:
    re_parts, im_parts = [], []
    for coeffs in polys:
        re_terms, im_terms = [], []
        for k, c in enumerate(coeffs):
            if c == 0:
                continue
            # c (u + i v)^k = sum_j C(k, j) u^(k-j) (i v)^j c
            for j in range(k + 1):
                w = c * comb(k, j) * (1j**j)
                mono = _monomial(k - j, j)
                if abs(w.real) > 0:
                    re_terms.append(_term(w.real, mono))
                if abs(w.imag) > 0:
                    im_terms.append(_term(w.imag, mono))
        re_parts.append(" + ".join(re_terms) if re_terms else "0")
        im_parts.append(" + ".join(im_terms) if im_terms else "0")
    return re_parts, im_parts


def _monomial(p: int, q: int) -> str:
    parts = []
    if p:
        parts.append("u" if p == 1 else f"u^{p}")
    if q:
        parts.append("v" if q == 1 else f"v^{q}")
    return "*".join(parts)


def _term(c: float, mono: str) -> str:
    if not mono:
        return repr(c)
    if c == 1.0:
        return mono
    return f"{c!r}*{mono}"


class WeierstrassSurface(ImmersionSpec):
    """g = Re Phi (or the conjugate h = Im Phi when ``part='imag'``)."""

    def __init__(self, data: WeierstrassData, part: str = "real", name: str = "weierstrass", check: bool = True):
        if check:
            data.check_isotropic()
        self.data = data
        self.part = part
        self.name = name
        self.domain = data.domain
        self.ambient_dim = data.dim

    def _jet(self, point, order):
        t = self.data.complex_jet(point, order)
        return tl.Jet(t.real if self.part == "real" else t.imag, point)

    def to_ast(self):
        src = self.data.real_sources()
        if src is None:
            return None
        comps = src[0] if self.part == "real" else src[1]
        text = "[" + ", ".join(comps) + "]"
        ast = dsl.parse(text)
        return dsl.SurfaceAst(ast.components, (), self.domain)

    def source(self):
        ast = self.to_ast()
        return None if ast is None else dsl.pretty(ast)


ENNEPER_PHI = ((1, 0, -1), (1j, 0, 1j), (0, 2), (0,))
