#!/usr/bin/env python3
"""Run the full desk-scale experiment battery and print where the report landed.

Thin wrapper over `vaughanlab suite`.  Desk scale takes a few minutes single
threaded; pass --threads to spread the banded variance sums over cores, or
--scale quick for a smoke run.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from vaughanlab.cli import main as cli_main


def parse_args() -> argparse.Namespace:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="runs/desk", help="output directory (default runs/desk)")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--scale", choices=["desk", "quick"], default="desk")
    return parser.parse_args()


def main() -> int:
    args = parse_args()
    rc = cli_main(
        [
            "suite",
            "--scale",
            args.scale,
            "--out",
            args.out,
            "--threads",
            str(args.threads),
        ]
    )
    if rc == 0:
        report = Path(args.out) / "report.txt"
        print(f"\nreport written to {report}", file=sys.stderr)
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
