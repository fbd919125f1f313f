"""Recompute the frozen oracle constants used in tests/test_frames.py and tests/test_duality.py.

The values come from tests/oracles.py only (finite differences of the plain
surface map plus Richardson extrapolation); no jet code is involved.

    python3 scripts/oracle_values.py
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

import oracles  # noqa: E402
from spherecong import gallery  # noqa: E402

PROBES = [
    ("GRAPH_R5_SWILLMORE_AT_0201", "graph_generic_r5", (0.2, 0.1), oracles.s_willmore),
    ("GRAPH_R5_SWILLMORE_AT_03m02", "graph_generic_r5", (0.3, -0.2), oracles.s_willmore),
    ("GRAPH_R6_FIRST_NORMAL_PERP_AT_0201", "graph_generic_r6", (0.2, 0.1), oracles.first_normal_perp),
]


def main() -> None:
    for name, gid, p, fn in PROBES:
        f = gallery.make(gid).spec.plain_value
        print(f"{name} = {fn(f, p):.11f}")


if __name__ == "__main__":
    main()
