"""Benchmark circuit families: GHZ preparation, the all-ones Grover oracle,
and seeded random circuits over the whole gate library."""
from __future__ import annotations

import numpy as np

from .circuit import Circuit, Gate, GateKind, invert_gate

FAMILIES = ("ghz", "grover-oracle", "random")

_ONE_QUBIT = [GateKind.I, GateKind.X, GateKind.Y, GateKind.Z, GateKind.H, GateKind.S,
              GateKind.SDG, GateKind.T, GateKind.TDG]
_ROTATIONS = [GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.P]
_TWO_QUBIT = [GateKind.CX, GateKind.CZ, GateKind.SWAP]
LIBRARY = _ONE_QUBIT + _ROTATIONS + _TWO_QUBIT + [GateKind.MCX]


def ghz(n: int) -> Circuit:
    """H on the top qubit, then a CX ladder down to qubit 0."""
    gates = [Gate(GateKind.H, (n - 1,))]
    gates += [Gate(GateKind.CX, (q - 1,), (q,)) for q in range(n - 1, 0, -1)]
    return Circuit(n, gates)


def grover_oracle(n: int) -> Circuit:
    """Oracle marking ``|1...1>``: one MCX with controls q_{n-1}..q_1 on q_0.

    At ``n = 2`` this is a single-control MCX, i.e. a CX.
    """
    return Circuit(n, [Gate(GateKind.MCX, (0,), tuple(range(n - 1, 0, -1)))])


def _window(rng, n: int, size: int, locality: int | None) -> list[int]:
    if locality is None or locality >= n - 1:
        return [int(q) for q in rng.choice(n, size=size, replace=False)]
    span = max(locality, size - 1)
    lo = int(rng.integers(0, n - span)) if n > span else 0
    pool = np.arange(lo, min(n, lo + span + 1))
    return [int(q) for q in rng.choice(pool, size=size, replace=False)]


def random_gate(rng, n: int, locality: int | None = None,
                kinds=None, max_controls: int = 3) -> Gate:
    kinds = LIBRARY if kinds is None else list(kinds)
    while True:
        kind = kinds[int(rng.integers(len(kinds)))]
        if kind in _TWO_QUBIT and n < 2:
            continue
        if kind is GateKind.MCX and n < 3:
            continue
        break
    if kind in _ONE_QUBIT:
        return Gate(kind, (int(rng.integers(n)),))
    if kind in _ROTATIONS:
        return Gate(kind, (int(rng.integers(n)),), (), (float(rng.uniform(0, 2 * np.pi)),))
    if kind is GateKind.SWAP:
        return Gate(kind, tuple(_window(rng, n, 2, locality)))
    if kind in _TWO_QUBIT:
        c, t = _window(rng, n, 2, locality)
        return Gate(kind, (t,), (c,))
    k = int(rng.integers(2, min(n - 1, max_controls) + 1))
    qs = _window(rng, n, k + 1, locality)
    return Gate(kind, (qs[-1],), tuple(qs[:-1]))


def random_circuit(n: int, num_gates: int, seed: int | np.random.Generator | None = None,
                   locality: int | None = None, kinds=None) -> Circuit:
    rng = np.random.default_rng(seed)
    return Circuit(n, [random_gate(rng, n, locality, kinds) for _ in range(num_gates)])


def generate_benchmark(family: str, n: int, seed: int | None = 0, *,
                       num_gates: int | None = None, locality: int | None = None) -> Circuit:
    if n < 1:
        raise ValueError("need at least one qubit")
    if family == "ghz":
        return ghz(n)
    if family == "grover-oracle":
        if n < 2:
            raise ValueError("grover-oracle needs at least 2 qubits")
        return grover_oracle(n)
    if family == "random":
        return random_circuit(n, 3 * n if num_gates is None else num_gates, seed, locality)
    raise ValueError(f"unsupported benchmark family {family!r}; choose from {', '.join(FAMILIES)}")


# --------------------------------------------------------------------------
# equivalence-preserving rewrites and single-gate mutations

_FUSABLE = {GateKind.RX, GateKind.RY, GateKind.RZ, GateKind.P}
_SQUARES = {GateKind.T: GateKind.S, GateKind.S: GateKind.Z,
            GateKind.TDG: GateKind.SDG, GateKind.SDG: GateKind.Z}
_ROOTS = {v: k for k, v in _SQUARES.items() if k in (GateKind.T, GateKind.S)}


def _disjoint(a: Gate, b: Gate) -> bool:
    return not set(a.qubits) & set(b.qubits)


def _rewrite_once(rng, gates: list[Gate], n: int) -> None:
    """Apply one randomly chosen identity-preserving rewrite in place."""
    move = int(rng.integers(5))
    i = int(rng.integers(len(gates))) if gates else 0
    if move == 0 and len(gates) > 1:
        # commute neighbours on disjoint qubits
        i = min(i, len(gates) - 2)
        if _disjoint(gates[i], gates[i + 1]):
            gates[i], gates[i + 1] = gates[i + 1], gates[i]
            return
    if move == 1 and len(gates) > 1:
        # fuse two neighbouring rotations about the same axis
        i = min(i, len(gates) - 2)
        a, b = gates[i], gates[i + 1]
        if a.kind in _FUSABLE and a.kind is b.kind and a.targets == b.targets:
            gates[i:i + 2] = [Gate(a.kind, a.targets, (), (a.params[0] + b.params[0],))]
            return
        if a.kind in _SQUARES and a.kind is b.kind and a.targets == b.targets:
            gates[i:i + 2] = [Gate(_SQUARES[a.kind], a.targets)]
            return
    if move == 2 and gates:
        # split a rotation or a square into two factors
        g = gates[i]
        if g.kind in _FUSABLE:
            a = float(rng.uniform(0, 2 * np.pi))
            gates[i:i + 1] = [Gate(g.kind, g.targets, (), (a,)),
                              Gate(g.kind, g.targets, (), (g.params[0] - a,))]
            return
        if g.kind in _ROOTS:
            root = _ROOTS[g.kind]
            gates[i:i + 1] = [Gate(root, g.targets), Gate(root, g.targets)]
            return
    if move == 3 and n >= 1:
        # insert a gate next to its inverse
        g = random_gate(rng, n)
        gates[i:i] = [g, invert_gate(g)]
        return
    if move == 4 and len(gates) > 1:
        # cancel an adjacent inverse pair
        i = min(i, len(gates) - 2)
        a, b = gates[i], gates[i + 1]
        if invert_gate(a) == b:
            del gates[i:i + 2]
            return
    # fall back to an identity insertion that always applies
    q = int(rng.integers(n))
    gates[i:i] = [Gate(GateKind.H, (q,)), Gate(GateKind.H, (q,))]


def equivalent_rewrite(circuit: Circuit, seed=None, steps: int = 20) -> Circuit:
    """A circuit implementing exactly the same unitary, reached by ``steps``
    random commutations, fusions, splits and inverse-pair insertions."""
    rng = np.random.default_rng(seed)
    gates = list(circuit.gates)
    for _ in range(steps):
        _rewrite_once(rng, gates, circuit.num_qubits)
    return Circuit(circuit.num_qubits, gates)


def mutate_gate(circuit: Circuit, seed=None) -> Circuit:
    """Insert one Hadamard at a random position on a random qubit.

    Every unitary leaves its own eigenstates unchanged, so no single gate is
    visible on every input. The eigenstates of H are not stabilizer states,
    so the Clifford+T and rotation gates of the library rarely land on
    them, unlike the Pauli eigenstates that hide an inserted X, Y or Z.
    """
    rng = np.random.default_rng(seed)
    n = circuit.num_qubits
    i = int(rng.integers(len(circuit.gates) + 1))
    h = Gate(GateKind.H, (int(rng.integers(n)),))
    return Circuit(n, circuit.gates[:i] + (h,) + circuit.gates[i:])
