"""Run the CLI and validate every JSON output against its schema."""

import json
import pathlib
import subprocess
import sys
import tempfile

import jsonschema

RUNS = {
    "threshold": [
        ["threshold", "--kind", "nonunitary", "--y", "0"],
        ["threshold", "--kind", "unitary", "--quote-paper"],
    ],
    "maximize": [
        ["maximize", "--kind", "renormalized", "--x", "0.77"],
        ["maximize", "--kind", "unitary", "--system", "Bs"],
    ],
    "scan": [
        ["--format", "json", "scan", "--kind", "nonunitary", "--x-from", "1", "--x-to", "3", "--x-steps", "3"],
    ],
    "verdict": [
        ["verdict", "all"],
        ["verdict", "D0", "--quote-paper", "--kinds", "unitary"],
    ],
    "simulate": [
        ["simulate", "--kind", "renormalized", "--system", "B0", "--n-events", "1000",
         "--tau-a", "0", "--tau-a-prime", "2.04", "--tau-b", "1.02", "--tau-b-prime", "3.06"],
        ["simulate", "--kind", "unitary", "--x", "2", "--y", "0.5", "--n-events", "100"],
    ],
}

CSV_HEADERS = {
    "scan": "x,s_max,tau_a,tau_a_prime,tau_b,tau_b_prime,converged",
    "verdict": "system,kind,x,y,bound,s_max,violates,caveat",
    "events": "setting,left,right",
}


def run(binary, args):
    proc = subprocess.run([binary, *args], capture_output=True, text=True, check=False)
    if proc.returncode != 0:
        raise SystemExit(f"{' '.join(args)} exited {proc.returncode}: {proc.stderr}")
    return proc.stdout


def main():
    binary, schema_dir = sys.argv[1], pathlib.Path(sys.argv[2])
    failures = 0
    for command, runs in RUNS.items():
        schema = json.loads((schema_dir / f"{command}.schema.json").read_text())
        jsonschema.Draft202012Validator.check_schema(schema)
        validator = jsonschema.Draft202012Validator(schema)
        for args in runs:
            errors = list(validator.iter_errors(json.loads(run(binary, args))))
            for error in errors:
                print(f"{' '.join(args)}: {error.json_path}: {error.message}")
            failures += bool(errors)
            print(f"{'ok' if not errors else 'FAILED'}: {' '.join(args)}")

    scan_csv = run(binary, ["scan", "--kind", "unitary", "--x-from", "1", "--x-to", "2", "--x-steps", "2"])
    verdict_csv = run(binary, ["--format", "csv", "verdict", "B0"])
    with tempfile.TemporaryDirectory() as tmp:
        events = pathlib.Path(tmp) / "events.csv"
        run(binary, ["simulate", "--kind", "unitary", "--x", "1", "--n-events", "5", "--events-csv", str(events)])
        events_csv = events.read_text()
    for name, text in (("scan", scan_csv), ("verdict", verdict_csv), ("events", events_csv)):
        header = text.splitlines()[0]
        if header != CSV_HEADERS[name]:
            print(f"FAILED: {name} csv header {header!r}")
            failures += 1
        else:
            print(f"ok: {name} csv header")

    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
