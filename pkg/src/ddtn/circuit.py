"""Circuit representation, the text format, and dense gate matrices.

Conventions used across the package:

* qubit 0 is the least-significant bit of a state-vector index, so the
  ket ``|q_{n-1} ... q_1 q_0>`` reads left to right as a binary number;
* the dense matrix of a gate acting on ``k`` qubits is laid out with the
  controls first and the targets after them, most significant first.
  ``CX`` therefore has the familiar ``[[1,0,0,0],[0,1,0,0],[0,0,0,1],[0,0,1,0]]``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "GateKind",
    "Gate",
    "Circuit",
    "BasisState",
    "CircuitError",
    "CircuitParseError",
    "parse_circuit",
    "format_circuit",
    "gate_matrix",
    "base_matrix",
    "invert_gate",
    "invert_circuit",
    "concatenate",
    "EPS_UNIT",
]

EPS_UNIT = 1e-12

_SQRT1_2 = 1 / np.sqrt(2)


class GateKind(str, Enum):
    I = "i"
    X = "x"
    Y = "y"
    Z = "z"
    H = "h"
    S = "s"
    SDG = "sdg"
    T = "t"
    TDG = "tdg"
    RX = "rx"
    RY = "ry"
    RZ = "rz"
    P = "p"
    SWAP = "swap"
    CX = "cx"
    CZ = "cz"
    MCX = "mcx"


# kind -> (number of angles, number of targets, allowed control counts)
# control count ``None`` means "one or more".
_ARITY = {
    GateKind.I: (0, 1, 0),
    GateKind.X: (0, 1, 0),
    GateKind.Y: (0, 1, 0),
    GateKind.Z: (0, 1, 0),
    GateKind.H: (0, 1, 0),
    GateKind.S: (0, 1, 0),
    GateKind.SDG: (0, 1, 0),
    GateKind.T: (0, 1, 0),
    GateKind.TDG: (0, 1, 0),
    GateKind.RX: (1, 1, 0),
    GateKind.RY: (1, 1, 0),
    GateKind.RZ: (1, 1, 0),
    GateKind.P: (1, 1, 0),
    GateKind.SWAP: (0, 2, 0),
    GateKind.CX: (0, 1, 1),
    GateKind.CZ: (0, 1, 1),
    GateKind.MCX: (0, 1, None),
}

_SELF_INVERSE = {
    GateKind.I, GateKind.X, GateKind.Y, GateKind.Z, GateKind.H,
    GateKind.SWAP, GateKind.CX, GateKind.CZ, GateKind.MCX,
}
_ADJOINT = {
    GateKind.S: GateKind.SDG,
    GateKind.SDG: GateKind.S,
    GateKind.T: GateKind.TDG,
    GateKind.TDG: GateKind.T,
}


class CircuitError(ValueError):
    """Raised for structurally invalid gates or circuits."""


class CircuitParseError(CircuitError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Gate:
    """A gate instance: kind, angles, control qubits and target qubits."""

    kind: GateKind
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    params: tuple[float, ...] = ()

    def __post_init__(self):
        kind = GateKind(self.kind)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        n_params, n_targets, n_controls = _ARITY[kind]
        if len(self.params) != n_params:
            raise CircuitError(f"{kind.value} takes {n_params} angle(s), got {len(self.params)}")
        if len(self.targets) != n_targets:
            raise CircuitError(f"{kind.value} takes {n_targets} target(s), got {len(self.targets)}")
        if n_controls is None:
            if len(self.controls) < 1:
                raise CircuitError(f"{kind.value} needs at least one control")
        elif len(self.controls) != n_controls:
            raise CircuitError(f"{kind.value} takes {n_controls} control(s), got {len(self.controls)}")
        qubits = self.qubits
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{kind.value}: controls and targets must be distinct qubits")
        if any(q < 0 for q in qubits):
            raise CircuitError(f"{kind.value}: negative qubit index")

    @property
    def qubits(self) -> tuple[int, ...]:
        """Controls followed by targets; this is the matrix bit order."""
        return self.controls + self.targets

    @property
    def num_qubits(self) -> int:
        return len(self.controls) + len(self.targets)

    def __str__(self) -> str:
        parts = [self.kind.value]
        parts += [repr(p) for p in self.params]
        parts += [str(q) for q in self.qubits]
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        for g in self.gates:
            if max(g.qubits) >= self.num_qubits:
                raise CircuitError(
                    f"gate '{g}' touches qubit {max(g.qubits)} but the circuit has {self.num_qubits}"
                )

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def __str__(self) -> str:
        return format_circuit(self)


@dataclass(frozen=True)
class BasisState:
    """Computational basis state ``|b_{n-1} ... b_0>``.

    ``index`` is the state-vector index (qubit 0 least significant). The
    string form lists qubit ``n-1`` first, as a ket is written.
    """

    n: int
    index: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("negative qubit count")
        if not 0 <= self.index < (1 << self.n):
            raise ValueError(f"basis index {self.index} out of range for {self.n} qubits")

    @classmethod
    def from_string(cls, bits: str) -> "BasisState":
        bits = bits.strip()
        if not bits or set(bits) - {"0", "1"}:
            raise CircuitError(f"not a bit string: {bits!r}")
        return cls(len(bits), int(bits, 2))

    @classmethod
    def zeros(cls, n: int) -> "BasisState":
        return cls(n, 0)

    def bit(self, qubit: int) -> int:
        return (self.index >> qubit) & 1

    @property
    def bits(self) -> str:
        return format(self.index, f"0{self.n}b") if self.n else ""

    def __str__(self) -> str:
        return self.bits


# --------------------------------------------------------------------------
# matrices

def base_matrix(g: Gate) -> np.ndarray:
    """Matrix acting on the targets only (the controlled part is excluded)."""
    k = g.kind
    if k is GateKind.I:
        return np.eye(2, dtype=complex)
    if k in (GateKind.X, GateKind.CX, GateKind.MCX):
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if k is GateKind.Y:
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if k in (GateKind.Z, GateKind.CZ):
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if k is GateKind.H:
        return np.array([[1, 1], [1, -1]], dtype=complex) * _SQRT1_2
    if k is GateKind.S:
        return np.diag([1, 1j]).astype(complex)
    if k is GateKind.SDG:
        return np.diag([1, -1j]).astype(complex)
    if k is GateKind.T:
        return np.diag([1, np.exp(1j * np.pi / 4)])
    if k is GateKind.TDG:
        return np.diag([1, np.exp(-1j * np.pi / 4)])
    if k is GateKind.RX:
        c, s = np.cos(g.params[0] / 2), np.sin(g.params[0] / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if k is GateKind.RY:
        c, s = np.cos(g.params[0] / 2), np.sin(g.params[0] / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if k is GateKind.RZ:
        t = g.params[0] / 2
        return np.diag([np.exp(-1j * t), np.exp(1j * t)])
    if k is GateKind.P:
        return np.diag([1, np.exp(1j * g.params[0])])
    if k is GateKind.SWAP:
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise CircuitError(f"no matrix for {k}")  # pragma: no cover


def gate_matrix(g: Gate) -> np.ndarray:
    """Dense ``2^k x 2^k`` unitary, controls first then targets, MSB first."""
    u = base_matrix(g)
    if not g.controls:
        return u
    dim = 2 ** g.num_qubits
    m = np.eye(dim, dtype=complex)
    m[dim - u.shape[0]:, dim - u.shape[0]:] = u
    return m


# --------------------------------------------------------------------------
# inversion and concatenation

def invert_gate(g: Gate) -> Gate:
    if g.kind in _SELF_INVERSE:
        return g
    if g.kind in _ADJOINT:
        return Gate(_ADJOINT[g.kind], g.targets, g.controls)
    # rotations and phase: negate the angle
    return Gate(g.kind, g.targets, g.controls, tuple(-p for p in g.params))


def invert_circuit(c: Circuit) -> Circuit:
    return Circuit(c.num_qubits, tuple(invert_gate(g) for g in reversed(c.gates)))


def concatenate(first: Circuit, second: Circuit) -> Circuit:
    """Gates of ``first`` followed by gates of ``second``."""
    if first.num_qubits != second.num_qubits:
        raise CircuitError(
            f"cannot concatenate circuits on {first.num_qubits} and {second.num_qubits} qubits"
        )
    return Circuit(first.num_qubits, first.gates + second.gates)


# --------------------------------------------------------------------------
# text format
#
#   qubits <n>
#   <gate> [<angle>] <qubit> ...     (controls before the target)
#
# Statements are separated by newlines or ';', '#' starts a comment.

_TOKEN = re.compile(r"\S+")


def _statements(text: str):
    """Yield (line_no, [(column, token), ...]) per statement."""
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        start = 0
        for chunk in line.split(";"):
            tokens = [(start + m.start() + 1, m.group()) for m in _TOKEN.finditer(chunk)]
            start += len(chunk) + 1
            if tokens:
                yield line_no, tokens


def _parse_int(tok: str, line: int, col: int, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise CircuitParseError(f"expected {what}, got {tok!r}", line, col) from None
    return value


def parse_circuit(text: str) -> Circuit:
    n = None
    gates: list[Gate] = []
    for line, tokens in _statements(text):
        col, head = tokens[0]
        name = head.lower()
        if n is None:
            if name != "qubits":
                raise CircuitParseError("circuit must start with 'qubits <n>'", line, col)
            if len(tokens) != 2:
                raise CircuitParseError("'qubits' takes exactly one argument", line, col)
            n = _parse_int(tokens[1][1], line, tokens[1][0], "qubit count")
            if n < 1:
                raise CircuitParseError("qubit count must be positive", line, tokens[1][0])
            continue
        if name == "qubits":
            raise CircuitParseError("duplicate 'qubits' header", line, col)
        try:
            kind = GateKind(name)
        except ValueError:
            raise CircuitParseError(f"unknown gate {head!r}", line, col) from None
        n_params, n_targets, n_controls = _ARITY[kind]
        args = tokens[1:]
        if len(args) < n_params:
            raise CircuitParseError(f"{name} needs {n_params} angle(s)", line, col)
        params = []
        for acol, tok in args[:n_params]:
            try:
                params.append(float(tok))
            except ValueError:
                raise CircuitParseError(f"expected an angle, got {tok!r}", line, acol) from None
        qubit_tokens = args[n_params:]
        qubits = []
        for qcol, tok in qubit_tokens:
            q = _parse_int(tok, line, qcol, "qubit index")
            if not 0 <= q < n:
                raise CircuitParseError(f"qubit index {q} out of range [0, {n})", line, qcol)
            qubits.append(q)
        expected = None if n_controls is None else n_controls + n_targets
        if (expected is not None and len(qubits) != expected) or (
            expected is None and len(qubits) < n_targets + 1
        ):
            want = f"{expected}" if expected is not None else f"at least {n_targets + 1}"
            raise CircuitParseError(f"{name} takes {want} qubit(s), got {len(qubits)}", line, col)
        n_ctrl = len(qubits) - n_targets
        try:
            gates.append(Gate(kind, qubits[n_ctrl:], qubits[:n_ctrl], params))
        except CircuitError as exc:
            raise CircuitParseError(str(exc), line, col) from None
    if n is None:
        raise CircuitParseError("missing 'qubits <n>' header", 1, 1)
    return Circuit(n, gates)


def format_circuit(c: Circuit) -> str:
    lines = [f"qubits {c.num_qubits}"]
    lines += [str(g) for g in c.gates]
    return "\n".join(lines) + "\n"

