#!/usr/bin/env python3
"""Run a kflow command with --format json and validate its output.

usage: validate_report.py SCHEMA EXPECTED_EXIT -- COMMAND...
"""
import json
import subprocess
import sys

import jsonschema


def main() -> int:
    if len(sys.argv) < 5 or sys.argv[3] != "--":
        print(__doc__, file=sys.stderr)
        return 2
    with open(sys.argv[1], encoding="utf-8") as f:
        schema = json.load(f)
    expected = int(sys.argv[2])
    proc = subprocess.run(sys.argv[4:], capture_output=True, text=True, check=False)
    if proc.returncode != expected:
        print(f"exit {proc.returncode}, expected {expected}\n{proc.stderr}", file=sys.stderr)
        return 1
    report = json.loads(proc.stdout)
    jsonschema.Draft202012Validator.check_schema(schema)
    jsonschema.validate(report, schema, cls=jsonschema.Draft202012Validator)
    print(f"valid {report['command']} report")
    return 0


if __name__ == "__main__":
    sys.exit(main())
