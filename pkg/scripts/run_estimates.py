#!/usr/bin/env python3
"""Run every inequality check at its defaults and write one report each.

Usage: run_estimates.py [OUTDIR]            (default: estimate_reports/)

Each check gets OUTDIR/<id>/report.json plus samples.csv, produced by the
same code path as `gkdvlab verify --id <id>`.  The exit status is the
number of checks whose stability gate failed.
"""

import sys
from pathlib import Path

from gkdvlab.cli import main as cli_main
from gkdvlab.estimates import ESTIMATE_IDS


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    outdir = Path(argv[0]) if argv else Path("estimate_reports")
    failures = 0
    for estimate_id in ESTIMATE_IDS:
        code = cli_main(["verify", "--id", estimate_id,
                         "--out", str(outdir / estimate_id)])
        if code != 0:
            failures += 1
    print(f"\n{len(ESTIMATE_IDS) - failures}/{len(ESTIMATE_IDS)} checks stable")
    return failures


if __name__ == "__main__":
    sys.exit(main())
