"""Simulation paths for the DD engine and their link to contraction plans.

A task graph lines up the initial state (optional) and the gates of a
circuit in circuit order. A simulation path is a sequence of pairwise
combine steps on that line. Only neighbouring operands may be combined,
because decision diagrams multiply operators, so every intermediate
covers a contiguous run of leaves:

* a run that starts at the initial state is a vector, and extending it
  is a matrix-vector product (``vector`` step);
* any other run is an operator, and joining two of them is a
  matrix-matrix product (``operator`` step).

Leaf ids are ``0`` for the state (when present) followed by the gates;
the ``k``-th step creates id ``num_leaves + k``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .circuit import BasisState, Circuit, Gate, concatenate, invert_circuit
from .config import defaults
from .dd import DDPackage, MatrixDD, VectorDD, get_amplitude, matrix_element, node_count
from .tn import ContractionPlan, TensorNetwork, circuit_to_network, plan_greedy

__all__ = [
    "StepKind",
    "Step",
    "SimulationPath",
    "TaskGraph",
    "PathError",
    "PathResult",
    "EquivalenceVerdict",
    "default_sequential_path",
    "plan_to_path",
    "alternating_path",
    "execute_path",
    "greedy_alternation",
    "check_equivalence",
    "STRATEGIES",
]

STRATEGIES = ("sequential", "alternating", "greedy-alt", "plan")


class PathError(ValueError):
    pass


class StepKind(str, Enum):
    VECTOR = "vector"
    OPERATOR = "operator"


@dataclass(frozen=True)
class Step:
    left: int
    right: int
    kind: StepKind


@dataclass(frozen=True)
class TaskGraph:
    """Leaves of a simulation: an optional basis state, then the gates."""

    num_qubits: int
    gates: tuple[Gate, ...]
    initial: BasisState | None = None

    @classmethod
    def for_circuit(cls, circuit: Circuit, initial: BasisState | None = None) -> "TaskGraph":
        initial = BasisState(circuit.num_qubits, 0) if initial is None else initial
        return cls(circuit.num_qubits, circuit.gates, initial)

    @classmethod
    def operator(cls, *circuits: Circuit) -> "TaskGraph":
        """Gate-only graph over the concatenation of ``circuits``."""
        n = circuits[0].num_qubits
        gates: tuple[Gate, ...] = ()
        for c in circuits:
            if c.num_qubits != n:
                raise PathError("circuits differ in qubit count")
            gates += c.gates
        return cls(n, gates, None)

    @property
    def has_input(self) -> bool:
        return self.initial is not None

    @property
    def num_leaves(self) -> int:
        return len(self.gates) + self.has_input


@dataclass(frozen=True)
class SimulationPath:
    num_leaves: int
    steps: tuple[Step, ...]
    has_input: bool = True

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        self.validate()

    def validate(self) -> None:
        if self.num_leaves and len(self.steps) != self.num_leaves - 1:
            raise PathError(f"{self.num_leaves} leaves need {self.num_leaves - 1} steps, got {len(self.steps)}")
        spans = {i: (i, i) for i in range(self.num_leaves)}
        for k, s in enumerate(self.steps):
            if s.left not in spans or s.right not in spans:
                raise PathError(f"step {k} uses an operand that is unavailable")
            (lo, mid), (mid2, hi) = spans.pop(s.left), spans.pop(s.right)
            if mid + 1 != mid2:
                raise PathError(f"step {k} combines non-adjacent operands {s.left} and {s.right}")
            expected = StepKind.VECTOR if self.has_input and lo == 0 else StepKind.OPERATOR
            if StepKind(s.kind) is not expected:
                raise PathError(f"step {k} should be a {expected.value} step")
            spans[self.num_leaves + k] = (lo, hi)

    def __len__(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "num_leaves": self.num_leaves,
            "has_input": self.has_input,
            "steps": [[s.left, s.right, StepKind(s.kind).value] for s in self.steps],
        }

    @classmethod
    def from_json(cls, d: dict) -> "SimulationPath":
        steps = tuple(Step(int(a), int(b), StepKind(k)) for a, b, k in d["steps"])
        return cls(int(d["num_leaves"]), steps, bool(d.get("has_input", True)))


class _Builder:
    """Tracks contiguous runs while steps are appended."""

    def __init__(self, num_leaves: int, has_input: bool):
        self.num_leaves = num_leaves
        self.has_input = has_input
        self.steps: list[Step] = []
        # ordered runs: [lo, hi, id]
        self.runs = [[i, i, i] for i in range(num_leaves)]

    def merge_at(self, pos: int) -> None:
        """Combine run ``pos`` with the run to its right."""
        left, right = self.runs[pos], self.runs[pos + 1]
        kind = StepKind.VECTOR if self.has_input and left[0] == 0 else StepKind.OPERATOR
        new_id = self.num_leaves + len(self.steps)
        self.steps.append(Step(left[2], right[2], kind))
        self.runs[pos:pos + 2] = [[left[0], right[1], new_id]]

    def path(self) -> SimulationPath:
        return SimulationPath(self.num_leaves, tuple(self.steps), self.has_input)


def default_sequential_path(circuit: Circuit | TaskGraph) -> SimulationPath:
    """Apply the gates to the state one at a time, first gate first."""
    m = len(circuit.gates)
    b = _Builder(m + 1, True)
    for _ in range(m):
        b.merge_at(0)
    return b.path()


def plan_to_path(plan: ContractionPlan, circuit: Circuit, net: TensorNetwork | None = None) -> SimulationPath:
    """Translate a contraction plan for ``circuit_to_network(circuit, ...)``.

    Input tensors map to the state leaf, gate tensors to their gate, and
    output projectors are ignored. Plan steps are replayed in order; each
    one fuses two groups of leaves. Whenever two neighbouring runs belong
    to the same group they are combined. A group whose members are not yet
    neighbours stays queued until the runs in between join it; queued
    groups are revisited first-in first-out.
    """
    n, m = circuit.num_qubits, len(circuit.gates)
    if net is not None:
        tags = net.tags
    else:
        tags = {q: ("input", q) for q in range(n)}
        tags.update({n + i: ("gate", i) for i in range(m)})
        tags.update({n + m + q: ("output", q) for q in range(n)})

    def leaf_of(tid: int):
        if tid not in tags:
            raise PathError(f"plan leaf {tid} is not a tensor of the circuit's network")
        role, k = tags[tid][0], int(tags[tid][1])
        if role == "input":
            return 0
        if role == "gate":
            if k >= m:
                raise PathError(f"plan refers to gate {k}, circuit has {m}")
            return k + 1
        return None

    leaves = plan.leaves()
    for t in leaves:
        leaf_of(t)
    required = {t for t, tag in tags.items() if tag[0] in ("input", "gate")}
    if len(set(leaves)) != len(leaves) or not required <= set(leaves):
        raise PathError("plan leaves do not cover the circuit's input and gates exactly once")

    parent = list(range(m + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    b = _Builder(m + 1, True)
    pending: deque[int] = deque()

    def settle() -> None:
        progress = True
        while progress and pending:
            progress = False
            for _ in range(len(pending)):
                root = find(pending.popleft())
                pos = 0
                while pos < len(b.runs) - 1:
                    if find(b.runs[pos][0]) == root and find(b.runs[pos + 1][0]) == root:
                        b.merge_at(pos)
                        progress = True
                    else:
                        pos += 1
                if sum(1 for r in b.runs if find(r[0]) == root) > 1 and root not in pending:
                    pending.append(root)

    def walk(node):
        """Return a representative task leaf of the subtree (or None)."""
        if not isinstance(node, tuple):
            return leaf_of(node)
        a, c = walk(node[0]), walk(node[1])
        if a is None or c is None:
            return a if c is None else c
        ra, rc = find(a), find(c)
        if ra != rc:
            parent[rc] = ra
            pending.append(ra)
            settle()
        return a

    walk(plan.tree)
    if len(b.runs) > 1:  # pragma: no cover - the plan root joins everything
        raise PathError("plan did not combine every leaf")
    return b.path()


def alternating_path(g: Circuit, g2_inv: Circuit, ratio: int = 1) -> SimulationPath:
    """Operator path over ``g`` followed by ``g2_inv``, grown from the middle.

    Starting between the two halves, each round takes one more gate of
    ``g`` (multiplied from the right) and then ``ratio`` gates of
    ``g2_inv`` (from the left). Once a side runs out the other finishes.
    """
    if g.num_qubits != g2_inv.num_qubits:
        raise PathError("circuits differ in qubit count")
    if ratio < 1:
        raise PathError("alternation ratio must be at least 1")
    m, k = len(g.gates), len(g2_inv.gates)
    b = _Builder(m + k, False)
    # runs: g_0 .. g_{m-1} | h_0 .. h_{k-1}; the accumulator is one run
    acc = None  # position of the accumulator in b.runs
    left, right = m - 1, m  # next leaves to absorb on each side

    def absorb_left():
        nonlocal acc, left
        if acc is None:
            acc = left
        else:
            b.merge_at(acc - 1)
            acc -= 1
        left -= 1

    def absorb_right():
        nonlocal acc, right
        if acc is None:
            acc = right
        else:
            b.merge_at(acc)
        right += 1

    while left >= 0 or right < m + k:
        if left >= 0:
            absorb_left()
        for _ in range(ratio):
            if right < m + k:
                absorb_right()
    return b.path()


# ----------------------------------------------------------------------
# execution

@dataclass
class PathResult:
    result: VectorDD | MatrixDD
    node_counts: list[int] = field(default_factory=list)

    @property
    def peak_nodes(self) -> int:
        return max(self.node_counts, default=node_count(self.result))

    @property
    def final_nodes(self) -> int:
        return node_count(self.result)


def _leaf_dd(graph: TaskGraph, leaf: int, pkg: DDPackage):
    if graph.has_input:
        if leaf == 0:
            return pkg.basis_state(graph.num_qubits, graph.initial)
        leaf -= 1
    return pkg.from_gate(graph.gates[leaf], graph.num_qubits)


def execute_path(graph: TaskGraph | Circuit, path: SimulationPath, pkg: DDPackage | None = None,
                 observer=None) -> PathResult:
    """Run ``path`` on ``pkg``; records the node count after every step.

    ``observer(step_index, step, dd)`` is called after each step if given.
    """
    if isinstance(graph, Circuit):
        graph = TaskGraph.for_circuit(graph)
    pkg = DDPackage() if pkg is None else pkg
    if path.num_leaves != graph.num_leaves or path.has_input != graph.has_input:
        raise PathError("path does not belong to this task graph")
    n = graph.num_qubits
    if graph.num_leaves == 0:
        return PathResult(pkg.identity(n), [n])
    values: dict[int, object] = {}

    def operand(i: int):
        if i in values:
            return values.pop(i)
        d = _leaf_dd(graph, i, pkg)
        pkg.incref(d)
        return d

    counts: list[int] = []
    if not path.steps:
        d = _leaf_dd(graph, 0, pkg)
        return PathResult(d, [node_count(d)])
    for k, s in enumerate(path.steps):
        a, b = operand(s.left), operand(s.right)
        if s.kind is StepKind.VECTOR:
            out = pkg.mv_multiply(b, a)
        else:
            out = pkg.mm_multiply(b, a)
        pkg.incref(out)
        pkg.decref(a)
        pkg.decref(b)
        values[path.num_leaves + k] = out
        counts.append(node_count(out))
        if observer is not None:
            observer(k, s, out)
        pkg.garbage_collect()
    (result,) = values.values()
    pkg.decref(result)
    return PathResult(result, counts)


def greedy_alternation(g: Circuit, g2_inv: Circuit, pkg: DDPackage | None = None) -> tuple[SimulationPath, PathResult]:
    """Alternation that at each round applies whichever side's next gate
    leaves the smaller accumulator (ties favour ``g``)."""
    if g.num_qubits != g2_inv.num_qubits:
        raise PathError("circuits differ in qubit count")
    pkg = DDPackage() if pkg is None else pkg
    n, m, k = g.num_qubits, len(g.gates), len(g2_inv.gates)
    b = _Builder(m + k, False)
    acc_pos = None
    acc = pkg.identity(n)
    left, right = m - 1, 0
    counts: list[int] = []
    while left >= 0 or right < k:
        cand_l = pkg.mm_multiply(acc, pkg.from_gate(g.gates[left], n)) if left >= 0 else None
        cand_r = pkg.mm_multiply(pkg.from_gate(g2_inv.gates[right], n), acc) if right < k else None
        if cand_r is None or (cand_l is not None and node_count(cand_l) <= node_count(cand_r)):
            acc = cand_l
            if acc_pos is None:
                acc_pos = left
            else:
                b.merge_at(acc_pos - 1)
                acc_pos -= 1
            left -= 1
        else:
            acc = cand_r
            if acc_pos is None:
                acc_pos = m + right
            else:
                b.merge_at(acc_pos)
            right += 1
        if b.steps:
            counts.append(node_count(acc))
    path = b.path()
    return path, PathResult(acc, counts or [node_count(acc)])


# ----------------------------------------------------------------------
# equivalence checking

@dataclass
class EquivalenceVerdict:
    fidelity: float
    equivalent: bool
    metrics: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"fidelity": self.fidelity, "equivalent": self.equivalent, "metrics": self.metrics}


def _normalize_strategy(strategy: str) -> str:
    s = strategy.lower()
    aliases = {"seq": "sequential", "alt": "alternating", "plan-translated": "plan", "greedy": "greedy-alt"}
    s = aliases.get(s, s)
    if s not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    return s


def check_equivalence(g: Circuit, g2: Circuit, initial: BasisState | None = None,
                      strategy: str = "alternating", ratio: int = 1,
                      pkg: DDPackage | None = None, eps_eq: float | None = None) -> EquivalenceVerdict:
    """Decide whether ``g`` and ``g2`` agree on the input ``initial``.

    Evaluates ``|<phi| U2^dagger U1 |phi>|^2`` on the miter circuit
    ``g`` followed by the inverse of ``g2``. ``sequential`` and ``plan``
    simulate the miter on the state; ``alternating`` and ``greedy-alt``
    build the miter operator from the middle outwards.
    """
    if g.num_qubits != g2.num_qubits:
        raise PathError(f"circuits act on {g.num_qubits} and {g2.num_qubits} qubits")
    n = g.num_qubits
    initial = BasisState(n, 0) if initial is None else initial
    eps_eq = defaults().eps_eq if eps_eq is None else eps_eq
    pkg = DDPackage() if pkg is None else pkg
    strategy = _normalize_strategy(strategy)
    g2_inv = invert_circuit(g2)

    if strategy in ("sequential", "plan"):
        miter = concatenate(g, g2_inv)
        graph = TaskGraph.for_circuit(miter, initial)
        if strategy == "sequential":
            path = default_sequential_path(miter)
        else:
            net = circuit_to_network(miter, initial, initial)
            path = plan_to_path(plan_greedy(net), miter, net)
        run = execute_path(graph, path, pkg)
        overlap = get_amplitude(run.result, initial)
    else:
        if strategy == "alternating":
            path = alternating_path(g, g2_inv, ratio)
            run = execute_path(TaskGraph.operator(g, g2_inv), path, pkg)
        else:
            path, run = greedy_alternation(g, g2_inv, pkg)
        overlap = matrix_element(run.result, initial.index, initial.index)
    fid = min(1.0, abs(overlap) ** 2)
    metrics = {
        "strategy": strategy,
        "ratio": ratio if strategy == "alternating" else None,
        "steps": len(path.steps),
        "peak_nodes": run.peak_nodes,
        "final_nodes": run.final_nodes,
        "node_counts": run.node_counts,
    }
    return EquivalenceVerdict(float(fid), abs(1.0 - fid) <= eps_eq, metrics)

