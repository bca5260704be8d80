"""
GHZ state on both engines
=========================

Prepare (|000> + |111>)/sqrt(2) with a decision diagram and with a tensor
network, then read amplitudes back out of each.
"""
import numpy as np

from ddtn import (BasisState, DDPackage, circuit_to_network, contract, extract_statevector,
                  get_amplitude, node_count, parse_circuit, to_dot)
from ddtn.paths import default_sequential_path, execute_path

circuit = parse_circuit("qubits 3; h 2; cx 2 1; cx 1 0")
print(circuit)

# decision diagram: apply the gates to |000> one at a time
pkg = DDPackage()
state = execute_path(circuit, default_sequential_path(circuit), pkg).result
print("DD amplitude <000|psi> =", get_amplitude(state, "000"))
print("DD amplitude <111|psi> =", get_amplitude(state, "111"))
print("DD nodes:", node_count(state))
print(np.round(extract_statevector(state), 6))

# the diagram in Graphviz form, edge labels are the complex weights
print(to_dot(state))

# tensor network: project the output on <000| and contract to a scalar
net = circuit_to_network(circuit, BasisState.zeros(3), BasisState.from_string("000"))
print("TN tensors:", len(net), "ranks:", sorted(t.rank for t in net.tensors.values()))
print("TN amplitude <000|psi> =", complex(contract(net).data))

# leaving the outputs open gives the rank-3 state tensor
full = contract(circuit_to_network(circuit, BasisState.zeros(3)))
print(np.round(full.data.reshape(-1), 6))
