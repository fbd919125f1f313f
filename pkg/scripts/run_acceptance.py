"""Run the acceptance suite and print one PASS/FAIL line per criterion.

    python3 scripts/run_acceptance.py [-k criterion_3]

Extra arguments are passed to pytest.
"""
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def main() -> int:
    cmd = [sys.executable, "-m", "pytest", str(ROOT / "tests" / "test_acceptance.py"), "-q", "-p", "no:cacheprovider"]
    return subprocess.call(cmd + sys.argv[1:], cwd=ROOT)


if __name__ == "__main__":
    sys.exit(main())
