"""Brute-force dense statevector and unitary simulation.

Used as the referee for both engines. Memory is ``2^n`` (state) or
``4^n`` (unitary); keep it to small registers.
"""
from __future__ import annotations

import numpy as np

from .circuit import BasisState, Circuit, Gate, gate_matrix


def apply_gate(state: np.ndarray, g: Gate, n: int) -> np.ndarray:
    """Apply ``g`` to a length-``2^n`` state vector (qubit 0 = LSB)."""
    k = g.num_qubits
    u = gate_matrix(g).reshape((2,) * (2 * k))
    # axis j of the reshaped state holds qubit n-1-j
    axes = [n - 1 - q for q in g.qubits]
    psi = state.reshape((2,) * n)
    psi = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), axes))
    # tensordot moved the gate's output axes to the front
    psi = np.moveaxis(psi, list(range(k)), axes)
    return psi.reshape(-1)


def simulate(circuit: Circuit, initial: BasisState | None = None) -> np.ndarray:
    n = circuit.num_qubits
    state = np.zeros(2 ** n, dtype=complex)
    state[0 if initial is None else initial.index] = 1
    for g in circuit.gates:
        state = apply_gate(state, g, n)
    return state


def full_gate_matrix(g: Gate, n: int) -> np.ndarray:
    """``2^n x 2^n`` matrix of ``g`` extended by identities."""
    eye = np.eye(2 ** n, dtype=complex)
    cols = [apply_gate(eye[:, j], g, n) for j in range(2 ** n)]
    return np.stack(cols, axis=1)


def unitary(circuit: Circuit) -> np.ndarray:
    n = circuit.num_qubits
    u = np.eye(2 ** n, dtype=complex)
    for g in circuit.gates:
        u = full_gate_matrix(g, n) @ u
    return u


def fidelity(g1: Circuit, g2: Circuit, initial: BasisState | None = None) -> float:
    """``|<phi| U2^dagger U1 |phi>|^2``, i.e. the squared overlap of both outputs."""
    a = simulate(g1, initial)
    b = simulate(g2, initial)
    return float(abs(np.vdot(b, a)) ** 2)
