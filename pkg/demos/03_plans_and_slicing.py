"""
Contraction plans and slicing
=============================

Plan costs come from index shapes alone, so plans can be compared before
any arithmetic happens. Slicing fixes an index to each of its values and
sums the independent pieces.
"""
import numpy as np

from ddtn import BasisState, circuit_to_network, contract, plan_cost, plan_exhaustive, plan_greedy
from ddtn.benchmarks import random_circuit
from ddtn.tn import FlopCounter, choose_slice_labels, contract_sliced, sequential_plan

circuit = random_circuit(3, 5, seed=4)
net = circuit_to_network(circuit, BasisState.zeros(3), BasisState.zeros(3))
print(len(net), "tensors")

plans = {"sequential": sequential_plan(net), "greedy": plan_greedy(net), "exhaustive": plan_exhaustive(net)}
for name, plan in plans.items():
    cost = plan_cost(net, plan)
    counter = FlopCounter()
    value = complex(contract(net, plan, counter).data)
    print(f"{name:10s} flops={cost.flops:4d} (counted {counter.count:4d})  "
          f"max intermediate={cost.max_intermediate:3d}  value={value:.6f}")

# slice the two indices that run through the largest intermediates
plan = plans["greedy"]
labels = choose_slice_labels(net, plan, 2)
print("slicing on", labels)
for workers in (1, 2, 8):
    print(workers, "workers ->", complex(contract_sliced(net, labels, plan, workers).data))
print("unsliced   ->", complex(contract(net, plan).data))

# the plan is plain nested pairs, easy to store next to the network
print(plan.to_json())
print(np.round(contract(circuit_to_network(circuit, BasisState.zeros(3))).data.reshape(-1), 4))
