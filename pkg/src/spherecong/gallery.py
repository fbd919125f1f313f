"""Catalogue of test surfaces with expected geometric flags.

Flags are tri-state: True / False must be reproduced by :func:`certify`,
None means "not asserted" (for example superconformality of a totally
umbilic surface, whose ellipse of curvature is a point).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

from . import frames as fr
from . import moebius as mb
from .dsl import Domain
from .errors import BadParams, CertificationFailed, DegenerateCenters, SpherecongError, UmbilicPoint, UnknownId
from .surfaces import DslSurface, ImmersionSpec
from .weierstrass import ENNEPER_PHI, WeierstrassData, WeierstrassSurface

FLAG_KEYS = ("superconformal", "minimal", "minimal_in_sphere_model", "s_willmore", "codim",
             "spherical_model", "hyperbolic_model")
TWO_PI = repr(2 * math.pi)


@dataclass
class GalleryEntry:
    id: str
    params: dict
    expected_flags: dict
    spec: ImmersionSpec
    description: str = ""
    grid: tuple = (21, 21)

    def manifest(self) -> dict:
        return {
            "id": self.id,
            "params": dict(self.params),
            "flags": {k: self.expected_flags.get(k) for k in FLAG_KEYS},
            "ambient_dim": self.spec.ambient_dim,
            "signature": "lorentzian" if self.spec.metric is not None else "euclidean",
            "description": self.description,
            "source": self.spec.source(),
        }


def _lets(params: dict) -> str:
    return "".join(f"let {k} = {float(v)!r};\n" for k, v in params.items())


def _dsl(name, params, body, domain="") -> DslSurface:
    return DslSurface.from_source(_lets(params) + domain + body, name=name)


# inverse stereographic chart of the unit sphere: (x, y, z) from (u, v)
_S2 = {
    "x": "(2*u/(1+u^2+v^2))",
    "y": "(2*v/(1+u^2+v^2))",
    "z": "((u^2+v^2-1)/(1+u^2+v^2))",
}


def _veronese_model(params):
    x, y, z = _S2["x"], _S2["y"], _S2["z"]
    body = (f"[0.5*s3*{y}*{z}, 0.5*s3*{x}*{z}, 0.5*s3*{x}*{y}, 0.25*s3*({x}^2-{y}^2), "
            f"0.5 + 0.25*({x}^2+{y}^2-2*{z}^2)]")
    return _dsl("veronese_s4", {"s3": math.sqrt(3)}, body, "domain u in [-2, 2], v in [-2, 2];\n")


def _torus_model(params):
    body = ("[0.5*k*cos(u), 0.5*k*sin(u), 0.5*k*cos(v), 0.5*k*sin(v), "
            "0.5*k*cos(-u-v), 0.5 + 0.5*k*sin(-u-v)]")
    return _dsl("equilateral_torus_s5", {"k": 1 / math.sqrt(3)}, body,
                f"domain u in [0, {TWO_PI}], v in [0, {TWO_PI}];\n")


def _hyperbolic_model(params):
    # totally geodesic plane of H_{1/2}(e/2) whose span misses e, lower sheet
    p = {"cb": math.cosh(params["beta"]), "sb": math.sinh(params["beta"]),
         "ct": math.cos(params["tilt"]), "st": math.sin(params["tilt"])}
    body = "[0.5*sb*sqrt(1+u^2+v^2), 0.5*u, 0.5*ct*v, 0.5*st*v, 0.5 - 0.5*cb*sqrt(1+u^2+v^2)]"
    spec = _dsl("hyperbolic_patch", p, body)
    spec.metric = mb.lorentz_metric(5)
    return spec


ISOTROPIC_PHI = ((1, 0, -1), (1j, 0, 1j), (0, 2), (1j, 0, -1j), (-1, 0, -1), (0, 2j))
GENERIC_R4_PHI = ((1, 0, 0, -1), (1j, 0, 0, 1j), (0, 1, 1), (0, -1j, 1j))


def _isotropic(params):
    return WeierstrassSurface(WeierstrassData(ISOTROPIC_PHI), name="isotropic_minimal_r6")


def _inverted_isotropic(params):
    c = tuple(float(params[f"c{i}"]) for i in range(1, 7))
    return mb.PushedSurface(mb.Inversion(c, float(params["radius"])), _isotropic({}), name="inverted_isotropic_r6")


def _rouxel(phi, domain):
    def build(params):
        from .duality import RouxelSurface

        return RouxelSurface(WeierstrassData(phi, domain), int(params["sign"]))
    return build


@dataclass
class _Recipe:
    build: Callable
    defaults: dict
    flags: dict
    description: str
    check: Callable | None = None


def _positive(*names):
    def check(params):
        for n in names:
            if not params[n] > 0:
                raise BadParams(f"parameter {n} must be positive")
    return check


def _sign(params):
    if params["sign"] not in (1, -1, 1.0, -1.0):
        raise BadParams("parameter sign must be +1 or -1")


_F = dict  # flags literal helper

RECIPES: dict[str, _Recipe] = {
    "plane": _Recipe(
        lambda p: _dsl("plane", {}, "[u, v, 0, 0]"), {},
        _F(minimal=True, codim=2), "flat plane in R^4"),
    "paraboloid_r4": _Recipe(
        lambda p: _dsl("paraboloid_r4", p, "[u, v, a*(u^2+v^2), 0]"), {"a": 1.0},
        _F(superconformal=False, minimal=False, s_willmore=True, codim=2),
        "paraboloid of revolution in an R^3 slice of R^4", _positive("a")),
    "holo_curve_z2": _Recipe(
        lambda p: _dsl("holo_curve_z2", {}, "[u, v, u^2 - v^2, 2*u*v]"), {},
        _F(superconformal=True, minimal=True, s_willmore=True, codim=2), "graph of z^2 in C^2"),
    "holo_curve_generic": _Recipe(
        lambda p: _dsl("holo_curve_generic", p, "[u, v, u^3 - 3*u*v^2 + a*u, 3*u^2*v - v^3 + a*v]"), {"a": 1.0},
        _F(superconformal=True, minimal=True, s_willmore=True, codim=2), "graph of z^3 + a z in C^2"),
    "round_sphere_slice": _Recipe(
        lambda p: _dsl("round_sphere_slice", p, "[R*cos(u)*cos(v), R*sin(u)*cos(v), R*sin(v), 0]",
                       "domain u in [-3, 3], v in [-1.2, 1.2];\n"), {"R": 1.0},
        _F(minimal=False, codim=2), "round sphere in an R^3 slice, poles outside the chart", _positive("R")),
    "enneper_r3slice_r4": _Recipe(
        lambda p: WeierstrassSurface(WeierstrassData(ENNEPER_PHI), name="enneper_r3slice_r4"), {},
        _F(superconformal=False, minimal=True, s_willmore=True, codim=2), "Enneper surface in an R^3 slice"),
    "veronese_s4": _Recipe(
        _veronese_model, {},
        _F(superconformal=True, minimal=False, minimal_in_sphere_model=True, spherical_model=True, codim=3),
        "Veronese surface on the sphere of radius 1/2 centred at e/2 in R^5"),
    "equilateral_torus_s5": _Recipe(
        _torus_model, {},
        _F(superconformal=True, minimal=False, minimal_in_sphere_model=True, spherical_model=True, codim=4),
        "equilateral minimal torus on the sphere of radius 1/2 centred at e/2 in R^6"),
    "stereo_veronese_r4": _Recipe(
        lambda p: mb.stereographic(_veronese_model({}), name="stereo_veronese_r4"), {},
        _F(superconformal=True, minimal=False, s_willmore=True, codim=2), "stereographic Veronese in R^4"),
    "stereo_torus_r5": _Recipe(
        lambda p: mb.stereographic(_torus_model({}), name="stereo_torus_r5"), {},
        _F(superconformal=True, minimal=False, s_willmore=True, codim=3), "stereographic equilateral torus in R^5"),
    "isotropic_minimal_r6": _Recipe(
        _isotropic, {},
        _F(superconformal=True, minimal=True, s_willmore=True, codim=4),
        "1-isotropic minimal surface (Enneper data doubled into C^6)"),
    "inverted_isotropic_r6": _Recipe(
        _inverted_isotropic, {"c1": 0.3, "c2": 0.2, "c3": 0.1, "c4": 0.0, "c5": 0.0, "c6": 2.0, "radius": 1.0},
        _F(superconformal=True, minimal=False, s_willmore=True, codim=4),
        "inversion of the 1-isotropic surface", _positive("radius")),
    "graph_generic_r5": _Recipe(
        lambda p: _dsl("graph_generic_r5", {}, "[u, v, u^2 + v^3, u*v, u^3/3 + v^2/2]"), {},
        _F(superconformal=False, minimal=False, s_willmore=False, codim=3), "non-superconformal control graph"),
    "graph_generic_r6": _Recipe(
        lambda p: _dsl("graph_generic_r6", {}, "[u, v, u^2 + v^3, u*v, u^3/3 + v^2/2, u^2*v]"), {},
        _F(superconformal=False, minimal=False, s_willmore=False, codim=4), "non-superconformal control graph"),
    "hyperbolic_patch": _Recipe(
        _hyperbolic_model, {"beta": 0.4, "tilt": 0.7},
        _F(hyperbolic_model=True, codim=3),
        "totally geodesic disc of the hyperboloid H_{1/2}(e/2) in Lorentz space L^5"),
    "stereo_hyperbolic_r4": _Recipe(
        lambda p: mb.stereographic(_hyperbolic_model(p), "hyperbolic", name="stereo_hyperbolic_r4"),
        {"beta": 0.4, "tilt": 0.7},
        _F(minimal=False, codim=2), "stereographic image of hyperbolic_patch: a sphere orthogonal to S^3"),
    "rouxel_enneper_r4": _Recipe(
        _rouxel(ENNEPER_PHI, Domain((-1, 1), (-1, 1), ((0.0, 0.0, 0.15),))), {"sign": 1},
        _F(superconformal=True, minimal=False, s_willmore=True, codim=2),
        "g + J h from the Enneper surface and its conjugate", _sign),
    "rouxel_generic_r4": _Recipe(
        _rouxel(GENERIC_R4_PHI, Domain((-0.8, 0.8), (-0.8, 0.8), ((0.0, 0.0, 0.15),))), {"sign": 1},
        _F(superconformal=True, minimal=False, s_willmore=True, codim=2),
        "g + J h from a minimal surface with non-flat normal bundle", _sign),
}


def ids() -> list[str]:
    return sorted(RECIPES)


def make(entry_id: str, params: dict | None = None) -> GalleryEntry:
    if entry_id not in RECIPES:
        raise UnknownId(f"unknown gallery id {entry_id!r}")
    r = RECIPES[entry_id]
    merged = dict(r.defaults)
    for k, v in (params or {}).items():
        if k not in merged:
            raise BadParams(f"{entry_id} has no parameter {k!r} (known: {sorted(merged)})")
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v):
            raise BadParams(f"parameter {k!r} must be a finite number")
        merged[k] = float(v)
    if r.check is not None:
        r.check(merged)
    spec = r.build(merged)
    flags = {k: r.flags.get(k) for k in FLAG_KEYS}
    return GalleryEntry(entry_id, merged, flags, spec, r.description)


def manifest() -> list[dict]:
    return [make(i).manifest() for i in ids()]


def write_manifest(path) -> None:
    from .files import atomic_write_text

    atomic_write_text(path, json.dumps(manifest(), sort_keys=True, indent=2) + "\n")


# ----------------------------------------------------------------------
# certification

@dataclass
class FlagReport:
    entry_id: str
    observed: dict
    expected: dict
    counts: dict = field(default_factory=dict)

    @property
    def violations(self) -> list[str]:
        return [k for k, v in self.expected.items() if v is not None and self.observed.get(k) != v]

    def to_dict(self) -> dict:
        return {"id": self.entry_id, "observed": self.observed, "expected": self.expected,
                "counts": self.counts, "violations": self.violations}


SC_TOL = 1e-8
SW_TOL = 1e-7
MIN_TOL = 1e-8


def _tri(values: list[bool]):
    if not values:
        return None
    return all(values)


def observe(spec: ImmersionSpec, points, want: dict) -> tuple[dict, dict]:
    """Observed flags over sample points (only the keys ``want`` asserts)."""
    sc, mn, sw, mis, sph, hyp = [], [], [], [], [], []
    counts = {"points": 0, "umbilic": 0, "errors": 0}
    lorentz = spec.metric is not None
    for p in points:
        counts["points"] += 1
        try:
            if lorentz:
                if want.get("hyperbolic_model") is not None:
                    r = mb.model_residuals(spec, p, "hyperbolic")
                    hyp.append(r["quadric"] < 1e-10 and r["mean_curvature"] < 1e-8)
                continue
            j = spec.jet(p, 3)
            fd = fr.fundamental_forms(j)
            mn.append(fd.H_norm < MIN_TOL * (1 + fd.alpha_norm))
            if fd.umbilic:
                counts["umbilic"] += 1
            else:
                sc.append(fr.superconformal_residual(fd) < SC_TOL)
                if want.get("s_willmore") is not None:
                    try:
                        sw.append(fr.s_willmore_residual(j) < SW_TOL)
                    except UmbilicPoint:
                        pass
            if want.get("minimal_in_sphere_model") is not None and fd.H_norm > MIN_TOL:
                from .duality import centers_jet

                try:
                    centers_jet(spec, p, 1)
                    mis.append(False)
                except DegenerateCenters:
                    mis.append(True)
            if want.get("spherical_model") is not None:
                r = mb.model_residuals(spec, p, "spherical")
                sph.append(r["quadric"] < 1e-10 and r["mean_curvature"] < 1e-8)
        except SpherecongError:
            counts["errors"] += 1
    observed = {
        "superconformal": _tri(sc), "minimal": _tri(mn), "s_willmore": _tri(sw),
        "minimal_in_sphere_model": _tri(mis), "codim": spec.ambient_dim - 2,
        "spherical_model": _tri(sph), "hyperbolic_model": _tri(hyp),
    }
    return observed, counts


def certify(entry: GalleryEntry, nu: int | None = None, nv: int | None = None, raise_on_failure: bool = True) -> FlagReport:
    nu = nu or entry.grid[0]
    nv = nv or entry.grid[1]
    points = entry.spec.domain.grid(nu, nv)
    observed, counts = observe(entry.spec, points, entry.expected_flags)
    rep = FlagReport(entry.id, observed, dict(entry.expected_flags), counts)
    if raise_on_failure and rep.violations:
        raise CertificationFailed(entry.id, rep.violations)
    return rep
