"""Tensor-network engine: circuit translation, pairwise contraction,
contraction plans and their a-priori cost, plan search, and slicing.

Tensors are dense numpy arrays whose axes carry string labels. Within a
network a label names an index shared by at most two tensors; labels that
occur once are open. A contraction plan is a binary tree written as
nested 2-tuples with integer tensor ids at the leaves.
"""
from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import reduce
from math import prod
from typing import Iterable, Mapping, NamedTuple, Sequence

import numpy as np

from .circuit import BasisState, Circuit, Gate, gate_matrix

__all__ = [
    "Index",
    "Tensor",
    "TensorNetwork",
    "ContractionPlan",
    "PlanCost",
    "FlopCounter",
    "PlanError",
    "contract_pair",
    "circuit_to_network",
    "gate_tensor_shape",
    "contract",
    "plan_cost",
    "plan_greedy",
    "plan_exhaustive",
    "sequential_plan",
    "slice_network",
    "contract_sliced",
    "choose_slice_labels",
]


class PlanError(ValueError):
    """Malformed plan, or a plan that does not match its network."""


class Index(NamedTuple):
    label: str
    dim: int


class Tensor:
    __slots__ = ("labels", "data")

    def __init__(self, labels: Sequence[str], data):
        labels = tuple(labels)
        data = np.asarray(data, dtype=complex)
        if data.ndim != len(labels):
            raise ValueError(f"{len(labels)} labels for an array of rank {data.ndim}")
        if len(set(labels)) != len(labels):
            raise ValueError(f"repeated label in {labels}")
        data.setflags(write=False)
        self.labels = labels
        self.data = data

    @property
    def indices(self) -> tuple[Index, ...]:
        return tuple(Index(lb, d) for lb, d in zip(self.labels, self.data.shape))

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return int(self.data.size)

    def dim(self, label: str) -> int:
        return self.data.shape[self.labels.index(label)]

    def transpose(self, labels: Sequence[str]) -> "Tensor":
        labels = tuple(labels)
        if labels == self.labels:
            return self
        if set(labels) != set(self.labels):
            raise ValueError(f"cannot reorder {self.labels} as {labels}")
        return Tensor(labels, np.transpose(self.data, [self.labels.index(x) for x in labels]))

    def __repr__(self):
        return f"Tensor({list(self.labels)}, shape={self.data.shape})"


@dataclass(frozen=True)
class TensorNetwork:
    tensors: Mapping[int, Tensor]
    open_indices: tuple[str, ...] = ()
    # tensor id -> role, e.g. ("input", q), ("gate", i), ("output", q)
    tags: Mapping[int, tuple] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tensors", dict(self.tensors))
        object.__setattr__(self, "open_indices", tuple(self.open_indices))
        object.__setattr__(self, "tags", dict(self.tags))
        holders: dict[str, list[int]] = {}
        dims: dict[str, int] = {}
        for tid, t in self.tensors.items():
            for idx in t.indices:
                holders.setdefault(idx.label, []).append(tid)
                if dims.setdefault(idx.label, idx.dim) != idx.dim:
                    raise ValueError(f"index {idx.label!r} has inconsistent dimensions")
        for label, hs in holders.items():
            if len(hs) > 2:
                raise ValueError(f"index {label!r} is shared by more than two tensors")
        once = {lb for lb, hs in holders.items() if len(hs) == 1}
        if set(self.open_indices) != once or len(self.open_indices) != len(once):
            raise ValueError(
                f"open indices {sorted(self.open_indices)} differ from the unpaired indices {sorted(once)}"
            )
        object.__setattr__(self, "_holders", holders)
        object.__setattr__(self, "_dims", dims)

    @property
    def dims(self) -> dict[str, int]:
        return dict(self._dims)

    def holders(self, label: str) -> list[int]:
        return list(self._holders[label])

    @property
    def closed_indices(self) -> list[str]:
        return sorted(lb for lb, hs in self._holders.items() if len(hs) == 2)

    def __len__(self) -> int:
        return len(self.tensors)

    # json interchange -----------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "tensors": [
                {
                    "id": tid,
                    "indices": list(t.labels),
                    "dims": list(t.data.shape),
                    "data": [[float(z.real), float(z.imag)] for z in t.data.reshape(-1)],
                    **({"tag": list(self.tags[tid])} if tid in self.tags else {}),
                }
                for tid, t in sorted(self.tensors.items())
            ],
            "open_indices": list(self.open_indices),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TensorNetwork":
        tensors, tags = {}, {}
        for entry in d["tensors"]:
            flat = np.array([complex(re, im) for re, im in entry["data"]], dtype=complex)
            tensors[int(entry["id"])] = Tensor(entry["indices"], flat.reshape(entry["dims"]))
            if "tag" in entry:
                tags[int(entry["id"])] = tuple(entry["tag"])
        return cls(tensors, tuple(d["open_indices"]), tags)


class ContractionPlan:
    """Binary contraction tree; leaves are tensor ids."""

    __slots__ = ("tree",)

    def __init__(self, tree):
        self.tree = _normalize_tree(tree)

    def leaves(self) -> list[int]:
        out: list[int] = []
        stack = [self.tree]
        while stack:
            node = stack.pop()
            if isinstance(node, tuple):
                stack.append(node[1])
                stack.append(node[0])
            else:
                out.append(node)
        return out

    def steps(self) -> list[tuple]:
        """Internal nodes in post-order, i.e. the order of contraction."""
        out: list[tuple] = []

        def walk(node):
            if isinstance(node, tuple):
                walk(node[0])
                walk(node[1])
                out.append(node)

        walk(self.tree)
        return out

    def to_json(self):
        def conv(node):
            return [conv(node[0]), conv(node[1])] if isinstance(node, tuple) else node
        return conv(self.tree)

    @classmethod
    def from_json(cls, data) -> "ContractionPlan":
        return cls(data)

    def __eq__(self, other):
        return isinstance(other, ContractionPlan) and self.tree == other.tree

    def __hash__(self):
        return hash(self.tree)

    def __repr__(self):
        return f"ContractionPlan({self.tree!r})"


def _normalize_tree(node):
    if isinstance(node, (list, tuple)):
        if len(node) != 2:
            raise PlanError(f"plan nodes must be pairs, got {node!r}")
        return (_normalize_tree(node[0]), _normalize_tree(node[1]))
    if isinstance(node, (int, np.integer)) and not isinstance(node, bool):
        return int(node)
    raise PlanError(f"invalid plan leaf {node!r}")


@dataclass(frozen=True)
class PlanCost:
    flops: int
    max_intermediate: int
    max_rank: int

    def as_dict(self) -> dict:
        return {"flops": self.flops, "max_intermediate": self.max_intermediate, "max_rank": self.max_rank}


class FlopCounter:
    """Accumulates the multiply-adds actually performed by :func:`contract_pair`."""

    def __init__(self):
        self.count = 0


# ----------------------------------------------------------------------
# contraction

def contract_pair(a: Tensor, b: Tensor, counter: FlopCounter | None = None) -> Tensor:
    """Sum over the shared labels; result keeps ``a``'s free labels, then ``b``'s."""
    shared = [lb for lb in a.labels if lb in b.labels]
    for lb in shared:
        if a.dim(lb) != b.dim(lb):
            raise ValueError(f"dimension mismatch on shared index {lb!r}")
    out_labels = [lb for lb in a.labels if lb not in shared] + [lb for lb in b.labels if lb not in shared]
    if counter is None:
        data = np.tensordot(a.data, b.data,
                            axes=([a.labels.index(s) for s in shared], [b.labels.index(s) for s in shared]))
        return Tensor(out_labels, data)
    # explicit elementwise product over the union of labels, then the sum
    union = out_labels + shared
    ea = np.einsum(a.data, [union.index(x) for x in a.labels], sorted(union.index(x) for x in a.labels))
    eb = np.einsum(b.data, [union.index(x) for x in b.labels], sorted(union.index(x) for x in b.labels))
    shape_a = [a.dim(x) if x in a.labels else 1 for x in union]
    shape_b = [b.dim(x) if x in b.labels else 1 for x in union]
    product = ea.reshape(shape_a) * eb.reshape(shape_b)
    counter.count += product.size
    data = product.sum(axis=tuple(range(len(out_labels), len(union)))) if shared else product
    return Tensor(out_labels, data)


def _check_plan(net: TensorNetwork, plan: ContractionPlan) -> None:
    leaves = plan.leaves()
    if sorted(leaves) != sorted(net.tensors) or len(set(leaves)) != len(leaves):
        raise PlanError("plan leaves do not match the network's tensors one-to-one")


def contract(net: TensorNetwork, plan: ContractionPlan | None = None,
             counter: FlopCounter | None = None) -> Tensor:
    """Contract ``net`` along ``plan``; result axes follow ``net.open_indices``."""
    if not net.tensors:
        raise PlanError("cannot contract an empty network")
    plan = plan_greedy(net) if plan is None else plan
    _check_plan(net, plan)

    def evaluate(node) -> Tensor:
        if isinstance(node, tuple):
            return contract_pair(evaluate(node[0]), evaluate(node[1]), counter)
        return net.tensors[node]

    return evaluate(plan.tree).transpose(net.open_indices)


# ----------------------------------------------------------------------
# circuits

def gate_tensor_shape(g: Gate) -> tuple[int, ...]:
    """A k-qubit gate is a rank-2k tensor with every dimension 2."""
    return (2,) * (2 * g.num_qubits)


def circuit_to_network(circuit: Circuit, initial: BasisState | None = None,
                       output: BasisState | None = None) -> TensorNetwork:
    """One rank-1 tensor per input qubit, one rank-2k tensor per k-qubit gate,
    and, when ``output`` is given, one rank-1 projector per output qubit.

    Tensor ids: inputs ``0..n-1`` (by qubit), gates ``n..n+m-1`` in circuit
    order, outputs after that. Without an output the open indices are the
    final wires ordered ``q_{n-1} .. q_0`` so that the contracted tensor
    reshapes to the state vector.
    """
    n = circuit.num_qubits
    initial = BasisState(n, 0) if initial is None else initial
    if initial.n != n or (output is not None and output.n != n):
        raise ValueError("basis state size does not match the circuit")
    tensors: dict[int, Tensor] = {}
    tags: dict[int, tuple] = {}
    step = [0] * n

    def wire(q: int) -> str:
        return f"q{q}_{step[q]}"

    for q in range(n):
        vec = np.zeros(2, dtype=complex)
        vec[initial.bit(q)] = 1
        tensors[q] = Tensor([wire(q)], vec)
        tags[q] = ("input", q)
    for i, g in enumerate(circuit.gates):
        ins = [wire(q) for q in g.qubits]
        for q in g.qubits:
            step[q] += 1
        outs = [wire(q) for q in g.qubits]
        tensors[n + i] = Tensor(outs + ins, gate_matrix(g).reshape(gate_tensor_shape(g)))
        tags[n + i] = ("gate", i)
    m = len(circuit.gates)
    if output is None:
        return TensorNetwork(tensors, tuple(wire(q) for q in reversed(range(n))), tags)
    for q in range(n):
        vec = np.zeros(2, dtype=complex)
        vec[output.bit(q)] = 1
        tensors[n + m + q] = Tensor([wire(q)], vec)
        tags[n + m + q] = ("output", q)
    return TensorNetwork(tensors, (), tags)


# ----------------------------------------------------------------------
# plans

def _labels_of(net: TensorNetwork) -> dict[int, frozenset]:
    return {tid: frozenset(t.labels) for tid, t in net.tensors.items()}


def _size(labels: Iterable[str], dims: Mapping[str, int]) -> int:
    return prod(dims[x] for x in labels)


def plan_cost(net: TensorNetwork, plan: ContractionPlan) -> PlanCost:
    """Flops and intermediate sizes from index shapes alone."""
    _check_plan(net, plan)
    dims = net.dims
    labels = _labels_of(net)
    flops = max_size = max_rank = 0

    def walk(node) -> frozenset:
        nonlocal flops, max_size, max_rank
        if not isinstance(node, tuple):
            return labels[node]
        left, right = walk(node[0]), walk(node[1])
        flops += _size(left | right, dims)
        result = left ^ right
        max_size = max(max_size, _size(result, dims))
        max_rank = max(max_rank, len(result))
        return result

    walk(plan.tree)
    return PlanCost(flops, max_size, max_rank)


def sequential_plan(net: TensorNetwork, order: Sequence[int] | None = None) -> ContractionPlan:
    """Left-deep plan absorbing tensors one by one (by id unless ``order`` given)."""
    order = sorted(net.tensors) if order is None else list(order)
    return ContractionPlan(reduce(lambda acc, t: (acc, t), order[1:], order[0]))


def plan_greedy(net: TensorNetwork, alpha: float = 1.0) -> ContractionPlan:
    """Repeatedly contract the pair minimising
    ``size(result) - alpha * (size(a) + size(b))``.

    Only pairs sharing an index are considered while any exist. Ties go to
    the smaller result rank, then to the lexicographically smallest id pair.
    """
    dims = net.dims
    active = _labels_of(net)
    trees: dict[int, object] = {tid: tid for tid in active}
    holders: dict[str, set[int]] = {}
    for tid, ls in active.items():
        for lb in ls:
            holders.setdefault(lb, set()).add(tid)
    next_id = max(active) + 1

    while len(active) > 1:
        pairs = {tuple(sorted(h)) for h in holders.values() if len(h) == 2}
        if not pairs:
            pairs = set(itertools.combinations(sorted(active), 2))
        best = None
        for i, j in pairs:
            res = active[i] ^ active[j]
            score = _size(res, dims) - alpha * (_size(active[i], dims) + _size(active[j], dims))
            key = (score, len(res), i, j)
            if best is None or key < best[0]:
                best = (key, i, j, res)
        _, i, j, res = best
        for lb in active[i] | active[j]:
            holders[lb] -= {i, j}
        for lb in res:
            holders[lb].add(next_id)
        trees[next_id] = (trees.pop(i), trees.pop(j))
        del active[i], active[j]
        active[next_id] = res
        next_id += 1
    return ContractionPlan(next(iter(trees.values())))


def plan_exhaustive(net: TensorNetwork, max_tensors: int = 12) -> ContractionPlan:
    """Flop-optimal plan by dynamic programming over tensor subsets.

    Ties are broken by the largest intermediate, then by enumeration order.
    Exponential (about 3^T); refuses networks above ``max_tensors``.
    """
    ids = sorted(net.tensors)
    count = len(ids)
    if count > max_tensors:
        raise PlanError(f"{count} tensors exceed the exhaustive-search limit of {max_tensors}")
    if count == 1:
        return ContractionPlan(ids[0])
    dims = net.dims
    label_bits = {lb: k for k, lb in enumerate(sorted(dims))}
    label_dims = [dims[lb] for lb in sorted(dims)]
    open_mask = sum(1 << label_bits[lb] for lb in net.open_indices)
    tmask = [sum(1 << label_bits[lb] for lb in net.tensors[t].labels) for t in ids]
    holder_mask = [0] * len(label_dims)
    for k, m in enumerate(tmask):
        for b in range(len(label_dims)):
            if m >> b & 1:
                holder_mask[b] |= 1 << k

    full = (1 << count) - 1
    union = [0] * (full + 1)
    ext = [0] * (full + 1)
    for s in range(1, full + 1):
        low = s & -s
        union[s] = union[s ^ low] | tmask[low.bit_length() - 1]
        e = 0
        u = union[s]
        while u:
            lb = u & -u
            b = lb.bit_length() - 1
            if open_mask & lb or holder_mask[b] & ~s:
                e |= lb
            u ^= lb
        ext[s] = e

    size_cache: dict[int, int] = {}

    def size(mask: int) -> int:
        r = size_cache.get(mask)
        if r is None:
            r = 1
            m = mask
            while m:
                lb = m & -m
                r *= label_dims[lb.bit_length() - 1]
                m ^= lb
            size_cache[mask] = r
        return r

    best: dict[int, tuple] = {}
    for k in range(count):
        best[1 << k] = (0, 0, ids[k])
    for s in range(1, full + 1):
        if s & (s - 1) == 0:
            continue
        low = s & -s
        rest = s ^ low
        chosen = None
        # submasks containing the lowest element enumerate each split once
        sub = rest
        while True:
            a = sub | low
            if a != s:
                b = s ^ a
                fa, ma, ta = best[a]
                fb, mb, tb = best[b]
                flops = fa + fb + size(ext[a] | ext[b])
                cand = (flops, max(ma, mb, size(ext[s])))
                if chosen is None or cand < chosen[:2]:
                    chosen = (cand[0], cand[1], (ta, tb))
            if sub == 0:
                break
            sub = (sub - 1) & rest
        best[s] = chosen
    return ContractionPlan(best[full][2])


# ----------------------------------------------------------------------
# slicing

def slice_network(net: TensorNetwork, labels: Sequence[str]) -> list[tuple[dict, TensorNetwork]]:
    """Fix the given closed indices to every value combination.

    Returns ``(assignment, network)`` pairs in lexicographic assignment
    order; the sub-networks keep the original tensor ids, so a plan for
    ``net`` is valid for each of them.
    """
    labels = list(labels)
    if len(set(labels)) != len(labels):
        raise ValueError("repeated slice label")
    closed = set(net.closed_indices)
    for lb in labels:
        if lb not in net.dims:
            raise ValueError(f"unknown index {lb!r}")
        if lb not in closed:
            raise ValueError(f"cannot slice open index {lb!r}")
    if not labels:
        return [({}, net)]
    dims = net.dims
    out = []
    for values in itertools.product(*(range(dims[lb]) for lb in labels)):
        fixed = dict(zip(labels, values))
        tensors = {}
        for tid, t in net.tensors.items():
            if not fixed.keys() & set(t.labels):
                tensors[tid] = t
                continue
            index = tuple(fixed.get(lb, slice(None)) for lb in t.labels)
            tensors[tid] = Tensor([lb for lb in t.labels if lb not in fixed], t.data[index])
        out.append((fixed, TensorNetwork(tensors, net.open_indices, net.tags)))
    return out


def choose_slice_labels(net: TensorNetwork, plan: ContractionPlan, k: int) -> list[str]:
    """Pick ``k`` closed indices that run through the largest intermediates."""
    if k <= 0:
        return []
    dims = net.dims
    labels = _labels_of(net)
    weight: dict[str, int] = {lb: 0 for lb in net.closed_indices}

    def walk(node) -> frozenset:
        if not isinstance(node, tuple):
            return labels[node]
        res = walk(node[0]) ^ walk(node[1])
        s = _size(res, dims)
        for lb in res:
            if lb in weight:
                weight[lb] += s
        return res

    walk(plan.tree)
    ranked = sorted(weight, key=lambda lb: (-weight[lb], lb))
    if k > len(ranked):
        raise ValueError(f"only {len(ranked)} closed indices available for slicing")
    return ranked[:k]


def contract_sliced(net: TensorNetwork, labels: Sequence[str], plan: ContractionPlan | None = None,
                    workers: int = 1) -> Tensor:
    """Contract every slice independently and sum them in assignment order.

    The sum order is fixed, so the result does not depend on ``workers``.
    """
    plan = plan_greedy(net) if plan is None else plan
    parts = slice_network(net, labels)
    nets = [sub for _, sub in parts]
    if workers > 1 and len(nets) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda sub: contract(sub, plan), nets))
    else:
        results = [contract(sub, plan) for sub in nets]
    data = results[0].data.copy()
    for r in results[1:]:
        data = data + r.data
    return Tensor(results[0].labels, data)
