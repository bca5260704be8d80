"""
From contraction plans to simulation paths
==========================================

A plan found for the tensor network can be replayed on decision diagrams.
Merges of gates that are not yet neighbours wait until the gates between
them have joined.
"""
import numpy as np

from ddtn import (BasisState, circuit_to_network, default_sequential_path, execute_path,
                  extract_statevector, plan_greedy, plan_to_path)
from ddtn.benchmarks import ghz, random_circuit
from ddtn.tn import ContractionPlan

# on GHZ, fuse the two CX gates first: one operator step, then two vector steps
c = ghz(3)
net = circuit_to_network(c, BasisState.zeros(3))
path = plan_to_path(ContractionPlan((((0, 1), 2), (3, (4, 5)))), c, net)
for step in path.steps:
    print(step.left, "+", step.right, step.kind.value)

c = random_circuit(6, 25, seed=5)
net = circuit_to_network(c, BasisState.zeros(6))
path = plan_to_path(plan_greedy(net), c, net)
kinds = [s.kind.value for s in path.steps]
print(kinds.count("operator"), "operator steps,", kinds.count("vector"), "vector steps")

a = execute_path(c, path)
b = execute_path(c, default_sequential_path(c))
print("max difference to the default path:",
      np.max(np.abs(extract_statevector(a.result) - extract_statevector(b.result))))
print("peak nodes, translated vs default:", a.peak_nodes, b.peak_nodes)
print(path.to_json()["steps"][:5])
