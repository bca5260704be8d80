"""Quantum circuit simulation with decision diagrams and tensor networks."""
__version__ = "0.1.0"

from .circuit import (BasisState, Circuit, CircuitError, CircuitParseError, Gate, GateKind,
                      concatenate, format_circuit, gate_matrix, invert_circuit, invert_gate,
                      parse_circuit)
from .config import Tolerances
from .dd import (DDPackage, DenseCapExceeded, MatrixDD, VectorDD, extract_statevector,
                 get_amplitude, is_identity, matrix_element, node_count, to_dot)
from .tn import (ContractionPlan, PlanCost, Tensor, TensorNetwork, circuit_to_network, contract,
                 contract_sliced, plan_cost, plan_exhaustive, plan_greedy, slice_network)
from .paths import (SimulationPath, TaskGraph, alternating_path, check_equivalence,
                    default_sequential_path, execute_path, plan_to_path)
from .benchmarks import generate_benchmark
from .driver import RunConfig, RunReport, run, scaling_sweep

__all__ = [
    "__version__",
    "BasisState", "Circuit", "CircuitError", "CircuitParseError", "Gate", "GateKind",
    "concatenate", "format_circuit", "gate_matrix", "invert_circuit", "invert_gate", "parse_circuit",
    "Tolerances",
    "DDPackage", "DenseCapExceeded", "MatrixDD", "VectorDD", "extract_statevector", "get_amplitude",
    "is_identity", "matrix_element", "node_count", "to_dot",
    "ContractionPlan", "PlanCost", "Tensor", "TensorNetwork", "circuit_to_network", "contract",
    "contract_sliced", "plan_cost", "plan_exhaustive", "plan_greedy", "slice_network",
    "SimulationPath", "TaskGraph", "alternating_path", "check_equivalence",
    "default_sequential_path", "execute_path", "plan_to_path",
    "generate_benchmark",
    "RunConfig", "RunReport", "run", "scaling_sweep",
]
