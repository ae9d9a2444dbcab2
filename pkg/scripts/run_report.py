#!/usr/bin/env python3
"""Run the full gallery verification report and write it as JSON.

Usage: python scripts/run_report.py [out.json]
"""

import json
import sys

from lcklab.cli import run_report


def main():
    out_path = sys.argv[1] if len(sys.argv) > 1 else "report.json"
    report, code = run_report()
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    for fx, rc in report["summary"].items():
        print(f"  {fx:<16s} exit {rc}")
    print(f"wrote {out_path}; all pass: {report['all_pass']}")
    return code


if __name__ == "__main__":
    sys.exit(main())
