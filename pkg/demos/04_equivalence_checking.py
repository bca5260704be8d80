"""
Equivalence checking from the middle
====================================

Two circuits agree on an input when G followed by the inverse of G' maps
it back to itself. Building that operator from the middle outwards keeps
it close to the identity while G and G' stay in step.
"""
from ddtn import check_equivalence
from ddtn.benchmarks import equivalent_rewrite, mutate_gate, random_circuit
from ddtn.circuit import GateKind, concatenate, invert_circuit
from ddtn.paths import TaskGraph, alternating_path, default_sequential_path, execute_path

g = random_circuit(6, 30, seed=1)
same = equivalent_rewrite(g, seed=2)      # commutations, fusions, cancelling pairs
broken = mutate_gate(g, seed=3)           # one extra Hadamard somewhere

for label, other in (("rewritten", same), ("mutated", broken)):
    for strategy in ("sequential", "alternating", "greedy-alt"):
        v = check_equivalence(g, other, strategy=strategy)
        print(f"{label:9s} {strategy:11s} fidelity={v.fidelity:.6f}  equivalent={v.equivalent}  "
              f"peak nodes={v.metrics['peak_nodes']}")

# peak sizes on an entangling 12-qubit circuit checked against itself
g = random_circuit(12, 60, seed=0, kinds=[GateKind.CX, GateKind.RY])
g_inv = invert_circuit(g)
miter = concatenate(g, g_inv)
seq = execute_path(miter, default_sequential_path(miter))
alt = execute_path(TaskGraph.operator(g, g_inv), alternating_path(g, g_inv))
print("sequential peak:", seq.peak_nodes, " alternating peak:", alt.peak_nodes)
print("alternating node counts:", alt.node_counts[:12], "...")
