"""
Driver runs and reports
=======================

The driver runs one or both engines, compares their answers and returns a
JSON-ready report. The same runs are available from the command line:

    ddtn simulate ghz.qc --backend both --mode amp 000 --json report.json
    ddtn bench --family grover-oracle --n 2..16 --metric dd-gate-nodes --csv mcx.csv
"""
import json

from ddtn import RunConfig, run
from ddtn.benchmarks import generate_benchmark
from ddtn.driver import FullStateRefused

circuit = generate_benchmark("random", 8, seed=3)
report = run(RunConfig(backend="both", slices=2, workers=4), circuit)
print(report.summary())

short = report.to_json()
for r in short["runs"]:
    r["result"] = {"kind": r["result"]["kind"], "entries": len(r["result"]["amplitudes"])}
print(json.dumps(short, indent=1)[:800])

# past the dense cap the tensor network refuses a full state, the DD does not
big = generate_benchmark("ghz", 26)
try:
    run(RunConfig(backend="tn"), big)
except FullStateRefused as exc:
    print("tn:", exc)
dd = run(RunConfig(backend="dd"), big)
print("dd:", dd.runs[0]["result"]["nonzero"])
