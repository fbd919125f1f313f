"""Write gallery.json and one .surf file per gallery entry that has a closed form.

    python3 scripts/export_gallery.py [--out gallery_out] [--certify]
"""
import argparse
import json
from pathlib import Path

from spherecong import gallery
from spherecong.files import atomic_write_text, dumps


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="gallery_out")
    ap.add_argument("--certify", action="store_true", help="also certify every entry on its default grid")
    args = ap.parse_args()
    out = Path(args.out)
    gallery.write_manifest(out / "gallery.json")
    reports = []
    for gid in gallery.ids():
        entry = gallery.make(gid)
        src = entry.spec.source()
        if src is not None:
            atomic_write_text(out / f"{gid}.surf", src + "\n")
        if args.certify:
            rep = gallery.certify(entry, raise_on_failure=False)
            reports.append(rep.to_dict())
            print(f"{gid:24s} {'ok' if not rep.violations else 'VIOLATES ' + ','.join(rep.violations)}")
    if reports:
        atomic_write_text(out / "certification.json", dumps(reports))
    print(json.dumps({"entries": len(gallery.ids()), "out": str(out)}))


if __name__ == "__main__":
    main()
