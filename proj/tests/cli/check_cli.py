"""End-to-end checks of the capfield executable.

Each case is run twice: the JSON summary must validate against the schema,
hold only finite numbers, match the golden file, and be byte-identical
across runs (the CSV table too, when one is written).
"""
import argparse
import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

CASES = {
    "capacity_half": ["capacity", "--alpha", "1.5707963267948966"],
    "gonchar_q1": ["gonchar", "--q", "1"],
    "support_pc_1_2": ["support", "--field", "point-charge", "--q", "1", "--h", "2"],
    "support_pc_1_3": ["support", "--field", "point-charge", "--q", "1", "--h", "3"],
    "support_northpole_1": ["support", "--field", "north-pole", "--q", "1"],
    "support_quadratic": ["support", "--field", "quadratic", "--a", "1", "--b", "2.5", "--c", "2"],
    "ffunctional_quadratic": ["ffunctional", "--field", "quadratic", "--a", "1", "--b", "2.5",
                              "--c", "2", "--alpha", "1"],
    "density_pc_1_2": ["density", "--field", "point-charge", "--q", "1", "--h", "2",
                       "--nodes", "16"],
    "density_pc_pipeline": ["density", "--field", "point-charge", "--q", "1", "--h", "2",
                            "--nodes", "8", "--pipeline"],
    "density_zero_cap": ["density", "--field", "zero", "--alpha", "1.0471975511965976",
                         "--nodes", "16"],
    "verify_quadratic": ["verify", "--field", "quadratic", "--a", "1", "--b", "2.5", "--c", "2",
                         "--nodes", "16"],
    "oracle_nystrom_pc": ["oracle", "--field", "point-charge", "--q", "1", "--h", "2",
                          "--nodes", "48"],
    "oracle_energy_pc": ["oracle", "--field", "point-charge", "--q", "1", "--h", "2",
                         "--method", "energy", "--nodes", "32"],
}

TABLE_COMMANDS = {"density", "verify", "oracle"}

EXIT_CASES = [
    (["capacity", "--alpha", "60deg"], 2),
    (["capacity"], 2),
    (["support", "--field", "point-charge", "--q", "1", "--h", "-2"], 2),
    (["support", "--field", "quadratic", "--a", "-1", "--b", "0", "--c", "0"], 2),
    (["support", "--field", "tabulated", "--csv", "/nonexistent/field.csv"], 2),
    (["oracle", "--field", "point-charge", "--q", "1", "--h", "2", "--method", "energy",
      "--nodes", "32", "--iterations", "3"], 3),
]


def finite_numbers(value, path="$"):
    if isinstance(value, bool):
        return []
    if isinstance(value, (int, float)):
        return [] if math.isfinite(value) else [path]
    if isinstance(value, dict):
        return [p for k, v in value.items() for p in finite_numbers(v, f"{path}.{k}")]
    if isinstance(value, list):
        return [p for i, v in enumerate(value) for p in finite_numbers(v, f"{path}[{i}]")]
    return []


def run(binary, args):
    return subprocess.run([binary, *args], capture_output=True, text=True)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--binary", required=True)
    parser.add_argument("--schema", required=True, type=Path)
    parser.add_argument("--golden", required=True, type=Path)
    parser.add_argument("--pin", action="store_true", help="rewrite the golden files")
    opts = parser.parse_args()

    schema = json.loads(opts.schema.read_text())
    validator = jsonschema.Draft202012Validator(schema)
    failures = []

    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        for name, args in CASES.items():
            outputs = []
            for rep in range(2):
                summary = tmp / f"{name}.{rep}.json"
                extra = ["--out", str(summary)]
                table = tmp / f"{name}.csv"
                if args[0] in TABLE_COMMANDS:
                    extra += ["--table", str(table)]
                proc = run(opts.binary, args + extra)
                if proc.returncode != 0:
                    failures.append(f"{name}: exit {proc.returncode}: {proc.stderr.strip()}")
                    break
                csv = table.read_bytes() if table.exists() else b""
                outputs.append((summary.read_bytes(), csv))
            if len(outputs) != 2:
                continue
            if outputs[0] != outputs[1]:
                failures.append(f"{name}: output differs between runs")
            data = json.loads(outputs[0][0])
            data.pop("table", None)
            for err in validator.iter_errors(data):
                failures.append(f"{name}: schema: {err.message}")
            for bad in finite_numbers(data):
                failures.append(f"{name}: non-finite number at {bad}")
            if outputs[0][1]:
                header = outputs[0][1].split(b"\n", 1)[0]
                if header != b"phi,f,Q,U,weighted_potential":
                    failures.append(f"{name}: table header {header!r}")

            golden = opts.golden / f"{name}.json"
            if opts.pin:
                proc = run(opts.binary, args + ["--pin", str(golden)])
                if proc.returncode != 0:
                    failures.append(f"{name}: pin failed: {proc.stderr.strip()}")
                continue
            if not golden.exists():
                failures.append(f"{name}: missing golden file {golden}")
                continue
            proc = run(opts.binary, args + ["--check", str(golden)])
            if proc.returncode != 0:
                failures.append(f"{name}: golden check exit {proc.returncode}: "
                                f"{proc.stderr.strip()}")

    for args, expected in EXIT_CASES:
        proc = run(opts.binary, args)
        if proc.returncode != expected:
            failures.append(f"{' '.join(args)}: exit {proc.returncode}, expected {expected}")
        elif "capfield:" not in proc.stderr:
            failures.append(f"{' '.join(args)}: no diagnostic on stderr")

    for f in failures:
        print("FAIL", f)
    print(f"{len(CASES)} cases, {len(EXIT_CASES)} exit-code cases, {len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
