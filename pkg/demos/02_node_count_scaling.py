"""
How big are gates?
==================

A CX between the outermost qubits needs 2n-1 decision-diagram nodes and the
multi-controlled X of a Grover oracle grows linearly as well, while the
same gate as a dense tensor has 4^n entries.
"""
from ddtn import DDPackage, Gate, GateKind, node_count
from ddtn.driver import linear_fit, scaling_sweep, sweep_to_csv

pkg = DDPackage()
for n in (2, 4, 8, 16):
    cx = pkg.from_gate(Gate(GateKind.CX, targets=(0,), controls=(n - 1,)), n)
    print(f"n={n:2d}  CX nodes={node_count(cx):3d}  identity nodes={node_count(pkg.identity(n))}")

dd = scaling_sweep("grover-oracle", range(2, 17), "dd-gate-nodes")
tn = scaling_sweep("grover-oracle", range(2, 17), "tn-gate-tensor-elements")
a, b, r2 = linear_fit([r["n"] for r in dd], [r["value"] for r in dd])
print(f"MCX nodes ~ {a:.2f} n + {b:.2f}   (R^2 = {r2:.4f})")
for d, t in zip(dd, tn):
    print(f"n={d['n']:2d}  dd nodes={d['value']:3d}  tensor entries={t['value']}")

# the same table as CSV, ready for a plotting tool
print(sweep_to_csv(scaling_sweep("ghz", range(2, 8), "dd-state-nodes")))
