"""Command-line front end.

    spherecong <command> --config job.json [--threads N] [--out DIR]

Exit codes: 0 success, 1 configuration error, 2 degenerate coverage
(more than 10% of the grid excluded), 3 certification or verification
failure.  Errors are reported as one JSON object on stderr.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import duality as du
from . import gallery
from . import moebius as mb
from . import sweep
from .errors import CertificationFailed, DegenerateCoverage, InsufficientSamples, SpherecongError
from .files import atomic_write_text, csv_text, dumps
from .surfaces import DslSurface

COMMANDS = ("analyze", "dual", "verify", "classify", "gallery", "export")
FORMATS = ("json", "csv", "obj")
SCHEMA = 1
FIELDS = {"schema", "command", "surface", "params", "grid", "order", "tolerances", "output",
          "formats", "moebius", "projection", "checks", "partner", "certify"}
TOLERANCE_KEYS = {"superconformal", "fd_step", "verify", "coverage"}

EXIT_CONFIG, EXIT_COVERAGE, EXIT_VERIFY = 1, 2, 3


class ConfigError(Exception):
    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass
class JobConfig:
    command: str
    surface: str | None = None
    params: dict = field(default_factory=dict)
    nu: int = 21
    nv: int = 21
    order: int = 3
    tolerances: dict = field(default_factory=dict)
    output: str = "out"
    formats: tuple = ("json",)
    moebius: tuple = ()
    projection: str = "coords"
    checks: tuple | None = None
    partner: str = "dual"
    certify: bool = False
    base_dir: Path = Path(".")


def _require(cond, message, fld):
    if not cond:
        raise ConfigError(message, fld)


def _number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and np.isfinite(x)


def parse_maps(raw) -> tuple:
    _require(isinstance(raw, list), "moebius must be a list of maps", "moebius")
    maps = []
    for i, m in enumerate(raw):
        fld = f"moebius[{i}]"
        _require(isinstance(m, dict), "each map must be an object", fld)
        unknown = set(m) - {"kind", "center", "radius", "signature"}
        _require(not unknown, f"unknown fields {sorted(unknown)}", fld)
        kind = m.get("kind")
        c = m.get("center")
        _require(isinstance(c, list) and c and all(_number(x) for x in c), "center must be a list of numbers", f"{fld}.center")
        sig = m.get("signature", mb.EUCLIDEAN)
        _require(sig in (mb.EUCLIDEAN, mb.LORENTZIAN), "signature must be euclidean or lorentzian", f"{fld}.signature")
        if kind == "inversion":
            r = m.get("radius", 1.0)
            _require(_number(r) and r > 0, "radius must be positive", f"{fld}.radius")
            maps.append(mb.Inversion(tuple(float(x) for x in c), float(r), sig))
        elif kind == "reflection":
            maps.append(mb.Reflection(tuple(float(x) for x in c), sig))
        else:
            raise ConfigError("kind must be inversion or reflection", f"{fld}.kind")
    return tuple(maps)


def parse_config(raw: dict, command: str, base_dir: Path = Path(".")) -> JobConfig:
    _require(isinstance(raw, dict), "config must be a JSON object", None)
    unknown = set(raw) - FIELDS
    _require(not unknown, f"unknown fields {sorted(unknown)}", sorted(unknown)[0] if unknown else None)
    _require(raw.get("schema") == SCHEMA, f"schema must be {SCHEMA}", "schema")
    if "command" in raw:
        _require(raw["command"] == command, f"config command {raw['command']!r} does not match {command!r}", "command")
    job = JobConfig(command=command, base_dir=base_dir)
    if command != "gallery":
        _require(isinstance(raw.get("surface"), str) and raw["surface"], "surface is required", "surface")
    job.surface = raw.get("surface")
    params = raw.get("params", {})
    _require(isinstance(params, dict) and all(_number(v) for v in params.values()),
             "params must map names to numbers", "params")
    job.params = params
    grid = raw.get("grid", {})
    _require(isinstance(grid, dict) and not (set(grid) - {"nu", "nv"}), "grid takes nu and nv", "grid")
    for k in ("nu", "nv"):
        v = grid.get(k, 21)
        _require(isinstance(v, int) and not isinstance(v, bool) and v >= 2, f"{k} must be an integer >= 2", f"grid.{k}")
        setattr(job, k, v)
    order = raw.get("order", 3)
    _require(isinstance(order, int) and not isinstance(order, bool) and 2 <= order <= 4, "order must be 2, 3 or 4", "order")
    job.order = order
    tol = raw.get("tolerances", {})
    _require(isinstance(tol, dict), "tolerances must be an object", "tolerances")
    for k, v in tol.items():
        _require(k in TOLERANCE_KEYS, f"unknown tolerance {k!r}", f"tolerances.{k}")
        _require(_number(v) and v > 0, "tolerance overrides must be positive", f"tolerances.{k}")
    job.tolerances = dict(tol)
    out = raw.get("output", "out")
    _require(isinstance(out, str) and out, "output must be a directory name", "output")
    job.output = out
    formats = raw.get("formats", ["json"])
    _require(isinstance(formats, list) and formats and set(formats) <= set(FORMATS),
             f"formats must be a nonempty subset of {list(FORMATS)}", "formats")
    job.formats = tuple(sorted(set(formats)))
    job.moebius = parse_maps(raw.get("moebius", []))
    proj = raw.get("projection", "coords")
    _require(proj in ("coords", "pca"), "projection must be coords or pca", "projection")
    job.projection = proj
    checks = raw.get("checks")
    if checks is not None:
        _require(isinstance(checks, list) and checks and set(checks) <= set(sweep.CHECK_ORDER),
                 f"checks must be a nonempty subset of {sorted(sweep.CHECK_ORDER)}", "checks")
        need = max(sweep.CHECK_ORDER[c] for c in checks)
        _require(need <= order, f"checks need jet order {need}", "order")
        job.checks = tuple(dict.fromkeys(["frames"] + list(checks)))
    partner = raw.get("partner", "dual")
    _require(isinstance(partner, str) and partner, "partner must be 'dual', a gallery id or a .surf path", "partner")
    job.partner = partner
    cert = raw.get("certify", False)
    _require(isinstance(cert, bool), "certify must be true or false", "certify")
    job.certify = cert
    return job


def load_surface(name: str, params: dict, base_dir: Path):
    if name.endswith(".surf"):
        path = Path(name)
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"surface file {name} not found", "surface")
        if params:
            raise ConfigError("params apply to gallery surfaces only", "params")
        return DslSurface.from_file(path)
    if name not in gallery.RECIPES:
        raise ConfigError(f"unknown gallery id {name!r}", "surface")
    return gallery.make(name, params).spec


def build_spec(job: JobConfig):
    spec = load_surface(job.surface, job.params, job.base_dir)
    if job.moebius:
        m = job.moebius[0] if len(job.moebius) == 1 else mb.Composite(job.moebius)
        dims = {len(x.center) for x in job.moebius}
        if dims != {spec.ambient_dim}:
            raise ConfigError(f"moebius centres must have dimension {spec.ambient_dim}", "moebius")
        spec = mb.PushedSurface(m, spec)
    return spec


# ----------------------------------------------------------------------
# output helpers

def _clean(x):
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        return float(x) if np.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.ndarray):
        return _clean(x.tolist())
    return x


def _surface_info(job, spec) -> dict:
    return {"surface": job.surface, "params": job.params, "ambient_dim": spec.ambient_dim,
            "grid": {"nu": job.nu, "nv": job.nv}, "order": job.order}


def _obj_text(points, values, nu, nv, projection):
    """Vertices for sampled points (3D projection) and quad faces between grid neighbours."""
    idx = {}
    verts = []
    for (i, j), v in zip(points, values):
        if v is None:
            continue
        idx[(i, j)] = len(verts) + 1
        verts.append(np.asarray(v, float))
    if not verts:
        return "", None
    V = np.array(verts)
    basis = None
    if projection == "pca" and V.shape[1] > 3:
        centred = V - V.mean(axis=0)
        _, _, vt = np.linalg.svd(centred, full_matrices=False)
        basis = vt[:3]
        # fix signs so the basis is deterministic
        for k in range(3):
            m = np.argmax(np.abs(basis[k]))
            if basis[k, m] < 0:
                basis[k] = -basis[k]
        P = centred @ basis.T
    else:
        P = V[:, :3] if V.shape[1] >= 3 else np.pad(V, ((0, 0), (0, 3 - V.shape[1])))
    lines = ["# spherecong grid export"]
    lines += [f"v {x!r} {y!r} {z!r}" for x, y, z in P.tolist()]
    for i in range(nu - 1):
        for j in range(nv - 1):
            quad = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)]
            if all(q in idx for q in quad):
                lines.append("f " + " ".join(str(idx[q]) for q in quad))
    return "\n".join(lines) + "\n", basis


def _grid_points(spec, nu, nv):
    """Cell-centre grid with (i, j) indices, exclusion disks removed."""
    d = spec.domain
    (u0, u1), (v0, v1) = d.u_range, d.v_range
    out = []
    for i in range(nu):
        u = u0 + (u1 - u0) * (i + 0.5) / nu
        for j in range(nv):
            v = v0 + (v1 - v0) * (j + 0.5) / nv
            if d.contains((u, v)):
                out.append(((i, j), (u, v)))
    return out


class Runner:
    def __init__(self, job: JobConfig, out_dir: Path, threads: int = 1):
        self.job = job
        self.out = out_dir
        self.threads = max(1, threads)
        self.files: dict[str, str] = {}

    def emit(self, name, text):
        self.files[name] = text

    def commit(self):
        for name in sorted(self.files):
            atomic_write_text(self.out / name, self.files[name])

    def coverage(self, excluded, total):
        limit = self.job.tolerances.get("coverage", sweep.MAX_EXCLUDED_FRACTION)
        sweep.check_coverage(excluded, total, limit)

    # commands ------------------------------------------------------
    def analyze(self):
        job = self.job
        spec = build_spec(job)
        checks = job.checks or sweep.DEFAULT_CHECKS[job.order]
        idx_pts = _grid_points(spec, job.nu, job.nv)
        pts = [p for _, p in idx_pts]
        maps = job.moebius if "moebius_laws" in checks else ()
        if "moebius_laws" in checks:
            if not maps:
                raise ConfigError("moebius_laws needs maps in the moebius field", "moebius")
            spec = load_surface(job.surface, job.params, job.base_dir)
        table = sweep.analyze(spec, pts, checks, job.tolerances, maps, self.threads)
        self.coverage(table.excluded, len(pts))
        summary = _surface_info(job, spec)
        summary.update({"command": "analyze", "checks": list(checks), "points": len(pts),
                        "excluded": table.excluded, "residuals": table.summary(),
                        "excluded_reasons": _reasons(table.errors)})
        sc = table.column("superconformal_residual")
        sc_tol = job.tolerances.get("superconformal", 1e-8)
        summary["flags"] = {"umbilic": int(np.nansum(table.column("umbilic"))),
                            "superconformal": int(np.sum(sc < sc_tol)),
                            "not_superconformal": int(np.sum(sc >= sc_tol))}
        if job.certify and job.surface in gallery.RECIPES:
            rep = gallery.certify(gallery.make(job.surface, job.params), job.nu, job.nv, raise_on_failure=False)
            summary["certification"] = rep.to_dict()
        if "csv" in job.formats:
            rows = []
            for (ij, p), r, err in zip(idx_pts, table.rows, table.errors):
                rows.append([repr(p[0]), repr(p[1])] + [None if r is None else _fmt(r.get(c)) for c in table.columns]
                            + [err or ""])
            self.emit("points.csv", csv_text(["u", "v"] + table.columns + ["error"], rows))
        if "obj" in job.formats:
            vals = [spec.value(p) if r is not None else None for p, r in zip(pts, table.rows)]
            text, basis = _obj_text([ij for ij, _ in idx_pts], vals, job.nu, job.nv, job.projection)
            self.emit("surface.obj", text)
            summary["projection"] = {"kind": job.projection, "basis": basis}
        if "json" in job.formats:
            self.emit("summary.json", dumps(_clean(summary)))
        if job.certify and summary.get("certification", {}).get("violations"):
            self.commit()
            raise CertificationFailed(job.surface, summary["certification"]["violations"])
        return summary

    def dual(self):
        job = self.job
        spec = build_spec(job)
        idx_pts = _grid_points(spec, job.nu, job.nv)
        pts = [p for _, p in idx_pts]
        res = sweep.sample_dual(spec, pts, self.threads)
        excluded = sum(v is None for v, _ in res)
        self.coverage(excluded, len(pts))
        vals = [v for v, _ in res]
        summary = _surface_info(job, spec)
        ok = np.array([v for v in vals if v is not None])
        summary.update({"command": "dual", "points": len(pts), "excluded": excluded,
                        "excluded_reasons": _reasons([e for _, e in res]),
                        "bbox_min": ok.min(axis=0), "bbox_max": ok.max(axis=0),
                        "diameter": float(np.max(np.linalg.norm(ok[:, None] - ok[None], axis=-1)))})
        if "obj" in job.formats:
            text, basis = _obj_text([ij for ij, _ in idx_pts], vals, job.nu, job.nv, job.projection)
            self.emit("dual.obj", text)
            summary["projection"] = {"kind": job.projection, "basis": basis}
        if "csv" in job.formats:
            n = spec.ambient_dim
            rows = [[repr(p[0]), repr(p[1])] + ([None] * n if v is None else [repr(float(x)) for x in v])
                    for p, v in zip(pts, vals)]
            self.emit("dual.csv", csv_text(["u", "v"] + [f"x{k + 1}" for k in range(n)], rows))
        if "json" in job.formats:
            self.emit("summary.json", dumps(_clean(summary)))
        return summary

    def _partner(self, spec):
        job = self.job
        if job.partner == "dual":
            return du.dualize(spec)
        return load_surface(job.partner, {}, job.base_dir)

    def verify(self):
        job = self.job
        spec = build_spec(job)
        partner = self._partner(spec)
        pts = [p for _, p in _grid_points(spec, job.nu, job.nv)]
        with sweep.point_mapper(self.threads) as mapper:
            rep = du.verify_duality(spec, partner, pts, mapper=mapper)
        self.coverage(len(rep.excluded), len(pts))
        tol = job.tolerances.get("verify", 1e-6)
        maxima = rep.maxima()
        failed = sorted(k for k, v in maxima.items() if v is None or v > tol)
        summary = _surface_info(job, spec)
        summary.update({"command": "verify", "partner": job.partner, "tolerance": tol,
                        "maxima": maxima, "failed": failed, "report": rep.to_dict()})
        summary["report"].pop("points")
        self.emit("summary.json", dumps(_clean(summary)))
        if "csv" in job.formats:
            keys = list(du.VERIFY_KEYS)
            rows = [[repr(p[0]), repr(p[1])] + [_fmt(rep.residuals[k][i]) for k in keys] for i, p in enumerate(pts)]
            self.emit("verify.csv", csv_text(["u", "v"] + keys, rows))
        if failed:
            self.commit()
            raise CertificationFailed(job.surface, failed)
        return summary

    def classify(self):
        job = self.job
        spec = build_spec(job)
        pts = [p for _, p in _grid_points(spec, job.nu, job.nv)]
        with sweep.point_mapper(self.threads) as mapper:
            cls = du.classify_dual(spec, pts, mapper=mapper)
        self.coverage(cls.diagnostics.get("excluded", 0), len(pts))
        summary = _surface_info(job, spec)
        summary.update({"command": "classify", "classification": cls.to_dict()})
        self.emit("summary.json", dumps(_clean(summary)))
        return summary

    def gallery(self):
        job = self.job
        entries = gallery.manifest()
        summary = {"command": "gallery", "entries": [e["id"] for e in entries]}
        if job.certify:
            reports = [gallery.certify(gallery.make(i), job.nu, job.nv, raise_on_failure=False).to_dict()
                       for i in gallery.ids()]
            summary["certification"] = reports
        self.emit("gallery.json", dumps(_clean(entries)))
        self.emit("summary.json", dumps(_clean(summary)))
        bad = [r["id"] for r in summary.get("certification", []) if r["violations"]]
        if bad:
            self.commit()
            raise CertificationFailed(",".join(bad), ["certification"])
        return summary

    def export(self):
        job = self.job
        spec = build_spec(job)
        src = spec.source()
        if src is None:
            raise ConfigError(f"surface {job.surface!r} has no closed-form DSL source", "surface")
        self.emit("surface.surf", src + "\n")
        self.emit("summary.json", dumps(_clean({"command": "export", "surface": job.surface,
                                                 "ambient_dim": spec.ambient_dim, "file": "surface.surf"})))
        return {"file": "surface.surf"}


def _fmt(x):
    if x is None:
        return None
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    return repr(x) if np.isfinite(x) else None


def _reasons(errors) -> dict:
    out: dict[str, int] = {}
    for e in errors:
        if e:
            key = e.split(":", 1)[0]
            out[key] = out.get(key, 0) + 1
    return dict(sorted(out.items()))


def _error(code: int, kind: str, message: str, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update({k: v for k, v in extra.items() if v is not None})
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spherecong", description="Superconformal surfaces, central spheres and their duals.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="job JSON file")
    p.add_argument("--threads", type=int, default=1, help="worker threads for point sweeps")
    p.add_argument("--out", default=None, help="output directory (overrides the config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg_path = Path(args.config)
    try:
        raw = json.loads(cfg_path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        return _error(EXIT_CONFIG, "ConfigError", f"cannot read config: {exc}", field="config")
    if args.threads < 1:
        return _error(EXIT_CONFIG, "ConfigError", "--threads must be >= 1", field="threads")
    try:
        job = parse_config(raw, args.command, cfg_path.parent)
        out = Path(args.out) if args.out else (cfg_path.parent / job.output)
        runner = Runner(job, out, args.threads)
        getattr(runner, args.command)()
        runner.commit()
    except ConfigError as exc:
        return _error(EXIT_CONFIG, "ConfigError", str(exc), field=exc.field)
    except (DegenerateCoverage, InsufficientSamples) as exc:
        return _error(EXIT_COVERAGE, type(exc).__name__, str(exc))
    except CertificationFailed as exc:
        return _error(EXIT_VERIFY, "CertificationFailed", str(exc))
    except SpherecongError as exc:
        return _error(EXIT_CONFIG, type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
