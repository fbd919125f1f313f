"""Dual of the stereographic equilateral torus, sampled and classified.

Prints the worst duality residuals, the classification of the dual, and
writes the torus and its dual as OBJ meshes (first three coordinates).

    python3 scripts/torus_dual_demo.py [--n 31] [--out demo_out]
"""
import argparse
from pathlib import Path

import numpy as np

from spherecong import duality as du
from spherecong import gallery
from spherecong.errors import SpherecongError
from spherecong.files import atomic_write_text


def obj(values, n):
    lines, index = [], {}
    for k, v in enumerate(values):
        if v is not None:
            index[k] = len(index) + 1
            lines.append("v " + " ".join(f"{x:.9g}" for x in v[:3]))
    for i in range(n - 1):
        for j in range(n - 1):
            q = [i * n + j, (i + 1) * n + j, (i + 1) * n + j + 1, i * n + j + 1]
            if all(k in index for k in q):
                lines.append("f " + " ".join(str(index[k]) for k in q))
    return "\n".join(lines) + "\n"


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=31)
    ap.add_argument("--out", default="demo_out")
    args = ap.parse_args()
    f = gallery.make("stereo_torus_r5").spec
    pts = f.domain.grid(args.n, args.n)
    rep = du.verify_duality(f, du.dualize(f), pts)
    for k, v in rep.maxima().items():
        print(f"{k:30s} {v:.3e}")
    cls = rep.classification
    print(f"classification: {cls.kind}, p0 = {np.round(cls.p0, 12)}, radius = {cls.radius:.12f}")
    print(f"excluded: {len(rep.excluded)} of {len(pts)}")
    duals = []
    for p in pts:
        try:
            duals.append(du.dual_point(f, p))
        except SpherecongError:
            duals.append(None)
    out = Path(args.out)
    atomic_write_text(out / "torus.obj", obj([f.value(p) for p in pts], args.n))
    atomic_write_text(out / "torus_dual.obj", obj(duals, args.n))
    print(f"wrote {out / 'torus.obj'} and {out / 'torus_dual.obj'}")


if __name__ == "__main__":
    main()
