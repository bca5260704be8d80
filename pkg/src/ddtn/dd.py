"""Edge-weighted decision diagrams for state vectors and operator matrices.

A vector node at level ``l`` splits a sub-vector on the value of qubit
``l`` (two successors); a matrix node splits a sub-matrix into the four
blocks ``|0><0|, |0><1|, |1><0|, |1><1|``. Every node below the root sits
exactly one level below its parent, except that edges with weight zero
point straight at the single terminal.

Canonicity comes from three rules:

* weights are snapped to representatives of a tolerance table, so
  numerically equal weights are bit-identical;
* a node's outgoing weights are divided by the one of largest magnitude
  (the first, if several tie within tolerance), which becomes exactly 1,
  and the factor moves to the incoming edge;
* nodes are hash-consed in a unique table keyed by (level, successors).

An edge is a plain ``(node, weight)`` tuple. ``VectorDD``/``MatrixDD``
wrap a root edge together with the register size and owning package.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .circuit import BasisState, Gate, base_matrix
from .config import defaults

__all__ = [
    "Node",
    "DDPackage",
    "VectorDD",
    "MatrixDD",
    "DenseCapExceeded",
    "get_amplitude",
    "extract_statevector",
    "nonzero_amplitudes",
    "node_count",
    "is_identity",
    "to_dot",
]


class DenseCapExceeded(ValueError):
    """The register is too large to be expanded into a dense array."""


class Node:
    __slots__ = ("level", "edges", "ident")

    def __init__(self, level: int, edges: tuple):
        self.level = level
        self.edges = edges
        self.ident = False

    @property
    def is_terminal(self) -> bool:
        return self.level < 0

    def __repr__(self):
        return f"Node(level={self.level}, id={id(self):#x})"


TERMINAL = Node(-1, ())
TERMINAL.ident = True  # the 1x1 identity
ZERO = (TERMINAL, 0j)
ONE = (TERMINAL, 1 + 0j)


class _NoCache(dict):
    """Compute table stand-in that never remembers anything."""

    def get(self, key, default=None):
        return default

    def __setitem__(self, key, value):
        pass


@dataclass(frozen=True, eq=False)
class VectorDD:
    root: tuple
    n: int
    pkg: "DDPackage"

    @property
    def weight(self) -> complex:
        return self.root[1]

    def same_as(self, other: "VectorDD") -> bool:
        """Identical root node and weight, i.e. the same canonical object."""
        return self.root[0] is other.root[0] and self.root[1] == other.root[1]


@dataclass(frozen=True, eq=False)
class MatrixDD:
    root: tuple
    n: int
    pkg: "DDPackage"

    @property
    def weight(self) -> complex:
        return self.root[1]

    def same_as(self, other: "MatrixDD") -> bool:
        return self.root[0] is other.root[0] and self.root[1] == other.root[1]


class DDPackage:
    """Unique table, compute tables and weight table for one DD universe.

    A package is single-writer: public operations take a lock, so one
    package may be shared between threads but work on it is serialized.
    Independent packages can run in parallel. Diagrams from different
    packages must not be mixed.

    Garbage collection is explicit: roots registered with :meth:`incref`
    (plus all identity diagrams) survive :meth:`garbage_collect`; every
    other node is dropped from the unique table and the compute tables
    are cleared. Diagrams that were not registered must not be used after
    a collection.
    """

    def __init__(self, eps: float | None = None, gc_threshold: int = 250_000,
                 compute_table: bool = True):
        self.eps = defaults().eps_num if eps is None else float(eps)
        self.gc_threshold = gc_threshold
        self._inv_eps = 1.0 / self.eps
        self._reals: dict[int, float] = {}
        self._unique: dict[tuple, Node] = {}
        self._identity: list[tuple] = [ONE]
        self._roots: dict[Node, int] = {}
        self._lock = threading.RLock()
        self.compute_table_enabled = compute_table
        self._new_caches()
        self.collections = 0

    def _new_caches(self):
        make = dict if self.compute_table_enabled else _NoCache
        self._ct_add = make()
        self._ct_mv = make()
        self._ct_mm = make()

    # ------------------------------------------------------------------
    # weights

    def _snap_real(self, x: float) -> float:
        eps = self.eps
        if -eps < x < eps:
            return 0.0
        key = round(x * self._inv_eps)
        table = self._reals
        r = table.get(key)
        if r is not None:
            return r
        for k in (key - 1, key + 1):
            r = table.get(k)
            if r is not None and abs(r - x) <= eps:
                return r
        table[key] = x
        return x

    def snap(self, w: complex) -> complex:
        if w == 0:
            return 0j
        return complex(self._snap_real(w.real), self._snap_real(w.imag))

    def weights_equal(self, a: complex, b: complex) -> bool:
        return abs(a.real - b.real) <= self.eps and abs(a.imag - b.imag) <= self.eps

    # ------------------------------------------------------------------
    # node construction

    def _make(self, level: int, edges) -> tuple:
        """Normalize, hash-cons, and return the incoming edge."""
        mags = [abs(w) for _, w in edges]
        top = max(mags)
        if top == 0:
            return ZERO
        # first weight whose magnitude is within tolerance of the largest
        pivot = next(i for i, a in enumerate(mags) if a >= top - self.eps)
        norm = edges[pivot][1]
        snap = self.snap
        out = []
        for i, (node, w) in enumerate(edges):
            if i == pivot:
                out.append((node, 1 + 0j))
            elif w == 0:
                out.append(ZERO)
            else:
                w = snap(w / norm)
                out.append((node, w) if w != 0 else ZERO)
        key = (level, *(x for e in out for x in e))
        node = self._unique.get(key)
        if node is None:
            node = Node(level, tuple(out))
            self._unique[key] = node
        return node, snap(norm)

    def make_vector_node(self, level: int, e0: tuple, e1: tuple) -> tuple:
        return self._make(level, (e0, e1))

    def make_matrix_node(self, level: int, e00, e01, e10, e11) -> tuple:
        return self._make(level, (e00, e01, e10, e11))

    def _scale(self, e: tuple, w: complex) -> tuple:
        if e[1] == 0 or w == 0:
            return ZERO
        return (e[0], self.snap(e[1] * w))

    def _identity_edge(self, k: int) -> tuple:
        """Identity over the ``k`` lowest qubits."""
        ids = self._identity
        while len(ids) <= k:
            lower = ids[-1]
            e = self._make(len(ids) - 1, (lower, ZERO, ZERO, lower))
            e[0].ident = True
            ids.append(e)
        return ids[k]

    # ------------------------------------------------------------------
    # constructors

    def identity(self, n: int) -> MatrixDD:
        with self._lock:
            return MatrixDD(self._identity_edge(n), n, self)

    def zero_vector(self, n: int) -> VectorDD:
        return VectorDD(ZERO, n, self)

    def basis_state(self, n: int, b: BasisState | str | int = 0) -> VectorDD:
        if isinstance(b, str):
            b = BasisState.from_string(b)
        elif isinstance(b, int):
            b = BasisState(n, b)
        if b.n != n:
            raise ValueError(f"basis state has {b.n} bits, expected {n}")
        with self._lock:
            e = ONE
            for level in range(n):
                e = self._make(level, (e, ZERO) if b.bit(level) == 0 else (ZERO, e))
            return VectorDD(e, n, self)

    def from_vector(self, vec) -> VectorDD:
        """Build a vector DD from a dense array of length ``2^n``."""
        vec = np.asarray(vec, dtype=complex)
        n = int(vec.size).bit_length() - 1
        if vec.size != 1 << n:
            raise ValueError("vector length must be a power of two")

        def build(lo: int, level: int) -> tuple:
            if level < 0:
                w = self.snap(complex(vec[lo]))
                return (TERMINAL, w) if w != 0 else ZERO
            half = 1 << level
            return self._make(level, (build(lo, level - 1), build(lo + half, level - 1)))

        with self._lock:
            return VectorDD(build(0, n - 1), n, self)

    def from_matrix(self, mat) -> MatrixDD:
        mat = np.asarray(mat, dtype=complex)
        n = int(mat.shape[0]).bit_length() - 1
        if mat.shape != (1 << n, 1 << n):
            raise ValueError("matrix must be square with a power-of-two size")

        def build(r: int, c: int, level: int) -> tuple:
            if level < 0:
                w = self.snap(complex(mat[r, c]))
                return (TERMINAL, w) if w != 0 else ZERO
            h = 1 << level
            return self._make(level, (
                build(r, c, level - 1), build(r, c + h, level - 1),
                build(r + h, c, level - 1), build(r + h, c + h, level - 1),
            ))

        with self._lock:
            return MatrixDD(build(0, 0, n - 1), n, self)

    def from_gate(self, g: Gate, n: int) -> MatrixDD:
        """Gate extended to ``n`` qubits with identities on untouched qubits."""
        if max(g.qubits) >= n:
            raise ValueError(f"gate {g} does not fit on {n} qubits")
        u = base_matrix(g)
        t = len(g.targets)
        shift = {q: t - 1 - i for i, q in enumerate(g.targets)}
        controls = set(g.controls)
        memo: dict[tuple, tuple] = {}

        # r/c accumulate the row/column bits of the targets seen so far
        def build(level: int, r: int, c: int) -> tuple:
            if level < 0:
                w = self.snap(complex(u[r, c]))
                return (TERMINAL, w) if w != 0 else ZERO
            key = (level, r, c)
            e = memo.get(key)
            if e is not None:
                return e
            if level in controls:
                off = self._identity_edge(level) if r == c else ZERO
                e = self._make(level, (off, ZERO, ZERO, build(level - 1, r, c)))
            elif level in shift:
                s = shift[level]
                e = self._make(level, tuple(
                    build(level - 1, r | (rb << s), c | (cb << s))
                    for rb in (0, 1) for cb in (0, 1)
                ))
            else:
                sub = build(level - 1, r, c)
                e = self._make(level, (sub, ZERO, ZERO, sub))
            memo[key] = e
            return e

        with self._lock:
            self._identity_edge(n)
            return MatrixDD(build(n - 1, 0, 0), n, self)

    # ------------------------------------------------------------------
    # arithmetic

    def _add(self, x: tuple, y: tuple) -> tuple:
        nx, wx = x
        ny, wy = y
        if wx == 0:
            return (ny, self.snap(wy)) if wy != 0 else ZERO
        if wy == 0:
            return (nx, self.snap(wx))
        if nx is ny:
            w = self.snap(wx + wy)
            return (nx, w) if w != 0 else ZERO
        ratio = self.snap(wy / wx)
        if ratio == 0:
            return (nx, self.snap(wx))
        key = (nx, ny, ratio)
        r = self._ct_add.get(key)
        if r is None:
            ey = ny.edges
            r = self._make(nx.level, [
                self._add(ex, (ey[i][0], ey[i][1] * ratio)) for i, ex in enumerate(nx.edges)
            ])
            self._ct_add[key] = r
        if r[1] == 0:
            return ZERO
        return (r[0], self.snap(r[1] * wx))

    def _mv(self, m: tuple, v: tuple) -> tuple:
        nm, wm = m
        nv, wv = v
        if wm == 0 or wv == 0:
            return ZERO
        w = wm * wv
        if nm.ident:
            return (nv, self.snap(w))
        key = (nm, nv)
        r = self._ct_mv.get(key)
        if r is None:
            em, ev = nm.edges, nv.edges
            mv, add = self._mv, self._add
            r = self._make(nm.level, (
                add(mv(em[0], ev[0]), mv(em[1], ev[1])),
                add(mv(em[2], ev[0]), mv(em[3], ev[1])),
            ))
            self._ct_mv[key] = r
        if r[1] == 0:
            return ZERO
        return (r[0], self.snap(r[1] * w))

    def _mm(self, a: tuple, b: tuple) -> tuple:
        na, wa = a
        nb, wb = b
        if wa == 0 or wb == 0:
            return ZERO
        w = wa * wb
        if na.ident:
            return (nb, self.snap(w))
        if nb.ident:
            return (na, self.snap(w))
        key = (na, nb)
        r = self._ct_mm.get(key)
        if r is None:
            ea, eb = na.edges, nb.edges
            mm, add = self._mm, self._add
            r = self._make(na.level, tuple(
                add(mm(ea[2 * i], eb[k]), mm(ea[2 * i + 1], eb[2 + k]))
                for i in (0, 1) for k in (0, 1)
            ))
            self._ct_mm[key] = r
        if r[1] == 0:
            return ZERO
        return (r[0], self.snap(r[1] * w))

    def _kron(self, na: Node, b: tuple, shift: int, memo: dict) -> tuple:
        if na is TERMINAL:
            return b
        r = memo.get(na)
        if r is None:
            r = self._make(na.level + shift, [
                ZERO if w == 0 else self._scale(self._kron(c, b, shift, memo), w)
                for c, w in na.edges
            ])
            memo[na] = r
        return r

    def mv_multiply(self, u: MatrixDD, v: VectorDD) -> VectorDD:
        if u.n != v.n:
            raise ValueError(f"size mismatch: {u.n}-qubit matrix, {v.n}-qubit vector")
        with self._lock:
            return VectorDD(self._mv(u.root, v.root), v.n, self)

    def mm_multiply(self, a: MatrixDD, b: MatrixDD) -> MatrixDD:
        """The matrix product ``a @ b``."""
        if a.n != b.n:
            raise ValueError(f"size mismatch: {a.n} vs {b.n} qubits")
        with self._lock:
            return MatrixDD(self._mm(a.root, b.root), a.n, self)

    def multiply(self, a: MatrixDD, b):
        if isinstance(b, VectorDD):
            return self.mv_multiply(a, b)
        return self.mm_multiply(a, b)

    def add(self, a, b):
        if type(a) is not type(b) or a.n != b.n:
            raise ValueError("can only add diagrams of the same kind and size")
        with self._lock:
            return type(a)(self._add(a.root, b.root), a.n, self)

    def kron(self, a, b):
        """Kronecker product with ``a`` on the more significant qubits."""
        if type(a) is not type(b):
            raise ValueError("can only take the Kronecker product of diagrams of the same kind")
        with self._lock:
            e = self._scale(self._kron(a.root[0], b.root, b.n, {}), a.root[1])
            return type(a)(e, a.n + b.n, self)

    def scale(self, d, w: complex):
        with self._lock:
            return type(d)(self._scale(d.root, complex(w)), d.n, self)

    # ------------------------------------------------------------------
    # memory management

    @property
    def live_nodes(self) -> int:
        return len(self._unique)

    def incref(self, d) -> None:
        node = d.root[0]
        if node is not TERMINAL:
            with self._lock:
                self._roots[node] = self._roots.get(node, 0) + 1

    def decref(self, d) -> None:
        node = d.root[0]
        if node is TERMINAL:
            return
        with self._lock:
            count = self._roots.get(node, 0) - 1
            if count < 0:
                raise ValueError("decref of a diagram that was never referenced")
            if count:
                self._roots[node] = count
            else:
                del self._roots[node]

    def garbage_collect(self, force: bool = False) -> int:
        """Drop unreferenced nodes once the live count passes the threshold."""
        with self._lock:
            if not force and len(self._unique) < self.gc_threshold:
                return 0
            keep: set[int] = set()
            stack = list(self._roots) + [e[0] for e in self._identity]
            while stack:
                node = stack.pop()
                if node is TERMINAL or id(node) in keep:
                    continue
                keep.add(id(node))
                stack.extend(c for c, _ in node.edges)
            before = len(self._unique)
            self._unique = {k: v for k, v in self._unique.items() if id(v) in keep}
            self._new_caches()
            self.collections += 1
            return before - len(self._unique)

    def clear_compute_tables(self) -> None:
        with self._lock:
            self._new_caches()

    def check_normalized(self, d) -> bool:
        """Full walk asserting the normalization and level-order rules."""
        for node in _nodes(d.root[0]):
            mags = [abs(w) for _, w in node.edges]
            top = max(mags)
            pivot = next(i for i, a in enumerate(mags) if a >= top - self.eps)
            if node.edges[pivot][1] != 1 or top > 1 + self.eps:
                return False
            for c, w in node.edges:
                if w == 0 and c is not TERMINAL:
                    return False
                if w != 0 and c is not TERMINAL and c.level != node.level - 1:
                    return False
                if w != 0 and c is TERMINAL and node.level != 0:
                    return False
        return True


# ----------------------------------------------------------------------
# read-only queries

def _nodes(root: Node) -> Iterator[Node]:
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if node is TERMINAL or id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        stack.extend(c for c, _ in node.edges)


def node_count(d) -> int:
    """Distinct nonterminal nodes reachable from the root."""
    if d.root[1] == 0:
        return 0
    return sum(1 for _ in _nodes(d.root[0]))


def get_amplitude(v: VectorDD, b: BasisState | str | int) -> complex:
    """Product of edge weights along the path selected by ``b``."""
    if isinstance(b, str):
        b = BasisState.from_string(b)
    elif isinstance(b, int):
        b = BasisState(v.n, b)
    if b.n != v.n:
        raise ValueError(f"basis state has {b.n} bits, diagram has {v.n} qubits")
    node, w = v.root
    while w != 0 and node is not TERMINAL:
        node, x = node.edges[b.bit(node.level)]
        w *= x
    return complex(w)


def matrix_element(a: MatrixDD, row: int, col: int) -> complex:
    node, w = a.root
    while w != 0 and node is not TERMINAL:
        lv = node.level
        node, x = node.edges[2 * ((row >> lv) & 1) + ((col >> lv) & 1)]
        w *= x
    return complex(w)


def _check_cap(n: int, cap: int | None):
    cap = defaults().n_dense if cap is None else cap
    if n > cap:
        raise DenseCapExceeded(f"{n} qubits exceed the dense cap of {cap}")


def extract_statevector(v: VectorDD, cap: int | None = None) -> np.ndarray:
    _check_cap(v.n, cap)
    memo: dict[int, np.ndarray] = {}

    def dense(node: Node) -> np.ndarray:
        if node is TERMINAL:
            return np.ones(1, dtype=complex)
        arr = memo.get(id(node))
        if arr is None:
            half = 1 << node.level
            arr = np.zeros(2 * half, dtype=complex)
            for i, (c, w) in enumerate(node.edges):
                if w != 0:
                    arr[i * half:(i + 1) * half] = w * dense(c)
            memo[id(node)] = arr
        return arr

    node, w = v.root
    if w == 0:
        return np.zeros(1 << v.n, dtype=complex)
    return w * dense(node)


def matrix_to_dense(a: MatrixDD, cap: int | None = None) -> np.ndarray:
    _check_cap(2 * a.n, None if cap is None else 2 * cap)
    memo: dict[int, np.ndarray] = {}

    def dense(node: Node) -> np.ndarray:
        if node is TERMINAL:
            return np.ones((1, 1), dtype=complex)
        arr = memo.get(id(node))
        if arr is None:
            h = 1 << node.level
            arr = np.zeros((2 * h, 2 * h), dtype=complex)
            for i, (c, w) in enumerate(node.edges):
                if w != 0:
                    r, col = divmod(i, 2)
                    arr[r * h:(r + 1) * h, col * h:(col + 1) * h] = w * dense(c)
            memo[id(node)] = arr
        return arr

    node, w = a.root
    if w == 0:
        return np.zeros((1 << a.n, 1 << a.n), dtype=complex)
    return w * dense(node)


def nonzero_amplitudes(v: VectorDD, limit: int | None = None) -> dict[int, complex]:
    """Sparse ``{index: amplitude}`` of the nonzero entries, depth first."""
    out: dict[int, complex] = {}
    stack = [(v.root[0], v.root[1], 0)]
    while stack:
        node, w, idx = stack.pop()
        if w == 0:
            continue
        if node is TERMINAL:
            out[idx] = complex(w)
            if limit is not None and len(out) >= limit:
                break
            continue
        bit = 1 << node.level
        (c0, w0), (c1, w1) = node.edges
        stack.append((c1, w * w1, idx | bit))
        stack.append((c0, w * w0, idx))
    return out


def is_identity(a: MatrixDD, up_to_phase: bool = False) -> bool:
    """True iff ``a`` is the identity (times a unit-modulus scalar if allowed)."""
    node, w = a.root
    if node is not a.pkg._identity_edge(a.n)[0]:
        return False
    if up_to_phase:
        return abs(abs(w) - 1) <= a.pkg.eps
    return a.pkg.weights_equal(w, 1 + 0j)


def _fmt(w: complex) -> str:
    return f"{w.real:.6g}{w.imag:+.6g}i"


def to_dot(d, name: str = "dd") -> str:
    """Graphviz rendering; edge labels are the complex weights."""
    is_matrix = isinstance(d, MatrixDD)
    ids: dict[int, str] = {}
    lines = [f"digraph {name} {{", '  root [shape=point];', '  t [shape=box, label="1"];']
    nodes = list(_nodes(d.root[0])) if d.root[1] != 0 else []
    for k, node in enumerate(nodes):
        ids[id(node)] = f"n{k}"
        lines.append(f'  n{k} [shape=circle, label="q{node.level}"];')

    def ref(node):
        return "t" if node is TERMINAL else ids[id(node)]

    if d.root[1] != 0:
        lines.append(f'  root -> {ref(d.root[0])} [label="{_fmt(d.root[1])}"];')
    else:
        lines.append('  root -> t [label="0", style=dashed];')
    for node in nodes:
        for i, (c, w) in enumerate(node.edges):
            if w == 0:
                continue
            tag = f"{i >> 1}{i & 1}" if is_matrix else str(i)
            lines.append(f'  {ids[id(node)]} -> {ref(c)} [label="{_fmt(w)}", taillabel="{tag}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
