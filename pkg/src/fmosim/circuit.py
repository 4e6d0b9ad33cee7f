"""A small gate-level circuit IR with simulators and text serialization.

Instructions are either unitary gates (X, H, RX, RY, RZ, CZ, CNOT, CPHASE and
opaque UNITARY blocks), a single-qubit Kraus-channel application, or a
measure-and-discard of one qubit (dephase in the computational basis, then
trace out; the reduced state of the survivors is the same either way, so it is
implemented as a partial trace).  Qubit 1 is the most significant bit of a
basis index.

The text format is line based: ``GATE(angle) qubits...`` with 1-based qubit
indices, ``#`` comments, and ``UNITARY q... :`` / ``KRAUS q ... :`` headers
followed by row-major complex matrix rows.  Angles and matrix entries are
printed with 17 significant digits so that parsing an exported program
reproduces it bit-exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .qcore import ID2, SX, UNITARY_ATOL, is_unitary

__all__ = [
    "Gate",
    "KrausApply",
    "MeasureAndDiscard",
    "Program",
    "x",
    "h",
    "rx",
    "ry",
    "rz",
    "cz",
    "cnot",
    "cphase",
    "unitary_gate",
    "gate_matrix",
    "run_statevector",
    "run_density",
    "unitary_of",
    "partial_trace",
    "export_text",
    "parse_text",
]

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / math.sqrt(2.0)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)

_FIXED = {"X": SX, "H": _H, "CZ": _CZ, "CNOT": _CNOT}
_PARAM = {
    "RX": lambda t: np.array(
        [
            [math.cos(t / 2), -1j * math.sin(t / 2)],
            [-1j * math.sin(t / 2), math.cos(t / 2)],
        ]
    ),
    "RY": lambda t: np.array(
        [
            [math.cos(t / 2), -math.sin(t / 2)],
            [math.sin(t / 2), math.cos(t / 2)],
        ],
        dtype=complex,
    ),
    "RZ": lambda t: np.diag([np.exp(-0.5j * t), np.exp(0.5j * t)]),
    "CPHASE": lambda t: np.diag([1.0, 1.0, 1.0, np.exp(1j * t)]),
}
_ARITY = {"X": 1, "H": 1, "RX": 1, "RY": 1, "RZ": 1, "CZ": 2, "CNOT": 2, "CPHASE": 2}


@dataclass(frozen=True, eq=False)
class Gate:
    """One unitary instruction.  ``matrix`` is set only for kind UNITARY."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == "UNITARY":
            m = np.asarray(self.matrix, dtype=complex)
            if m.shape != (2 ** len(self.qubits),) * 2:
                raise ValueError("UNITARY matrix shape does not match qubit count")
            if not is_unitary(m, atol=UNITARY_ATOL):
                raise ValueError("UNITARY block is not unitary")
            object.__setattr__(self, "matrix", m)
        else:
            if self.kind not in _ARITY:
                raise ValueError(f"unknown gate kind {self.kind!r}")
            if len(self.qubits) != _ARITY[self.kind]:
                raise ValueError(f"{self.kind} expects {_ARITY[self.kind]} qubit(s)")
            needs_angle = self.kind in _PARAM
            if needs_angle != (self.angle is not None):
                raise ValueError(f"bad angle for {self.kind}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("repeated qubit in gate")

    def __eq__(self, other):
        if not isinstance(other, Gate):
            return NotImplemented
        if (self.kind, self.qubits, self.angle) != (other.kind, other.qubits, other.angle):
            return False
        if self.matrix is None or other.matrix is None:
            return self.matrix is None and other.matrix is None
        return bool(np.array_equal(self.matrix, other.matrix))


@dataclass(frozen=True, eq=False)
class KrausApply:
    """Apply a single-qubit operator-sum channel to ``qubit``."""

    qubit: int
    operators: tuple[np.ndarray, ...]
    cptp: str = "unchecked"  # "verified" | "violated" | "unchecked"
    label: str = ""

    def __post_init__(self):
        ops = tuple(np.asarray(k, dtype=complex) for k in self.operators)
        if not ops or any(k.shape != (2, 2) for k in ops):
            raise ValueError("KrausApply expects one or more 2x2 operators")
        if self.cptp not in ("verified", "violated", "unchecked"):
            raise ValueError(f"bad cptp status {self.cptp!r}")
        object.__setattr__(self, "operators", ops)

    def __eq__(self, other):
        if not isinstance(other, KrausApply):
            return NotImplemented
        return (
            (self.qubit, self.cptp, self.label) == (other.qubit, other.cptp, other.label)
            and len(self.operators) == len(other.operators)
            and all(np.array_equal(a, b) for a, b in zip(self.operators, other.operators))
        )


@dataclass(frozen=True)
class MeasureAndDiscard:
    """Trace out ``qubit``; remaining qubits above it shift down by one."""

    qubit: int


Instruction = Union[Gate, KrausApply, MeasureAndDiscard]


@dataclass(frozen=True)
class Program:
    n_qubits: int
    instructions: tuple[Instruction, ...]

    def __post_init__(self):
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if self.n_qubits < 1:
            raise ValueError("need at least one qubit")
        live = self.n_qubits
        for ins in self.instructions:
            qs = ins.qubits if isinstance(ins, Gate) else (ins.qubit,)
            if any(not 1 <= q <= live for q in qs):
                raise ValueError(f"qubit out of range in {ins}")
            if isinstance(ins, MeasureAndDiscard):
                live -= 1
                if live == 0:
                    raise ValueError("cannot discard the last remaining qubit")


def x(q: int) -> Gate:
    return Gate("X", (q,))


def h(q: int) -> Gate:
    return Gate("H", (q,))


def rx(theta: float, q: int) -> Gate:
    return Gate("RX", (q,), float(theta))


def ry(theta: float, q: int) -> Gate:
    return Gate("RY", (q,), float(theta))


def rz(theta: float, q: int) -> Gate:
    return Gate("RZ", (q,), float(theta))


def cz(q1: int, q2: int) -> Gate:
    return Gate("CZ", (q1, q2))


def cnot(control: int, target: int) -> Gate:
    return Gate("CNOT", (control, target))


def cphase(theta: float, q1: int, q2: int) -> Gate:
    return Gate("CPHASE", (q1, q2), float(theta))


def unitary_gate(matrix: np.ndarray, qubits: Sequence[int]) -> Gate:
    return Gate("UNITARY", tuple(qubits), matrix=matrix)


def gate_matrix(g: Gate) -> np.ndarray:
    """Local unitary of a gate on its own qubits (row = qubit order as listed)."""
    if g.kind == "UNITARY":
        return g.matrix
    if g.kind in _FIXED:
        return _FIXED[g.kind]
    return _PARAM[g.kind](g.angle)


# --- simulators -------------------------------------------------------------
#
# States are reshaped to rank-n tensors (one axis per qubit, qubit 1 first);
# a k-qubit operator contracts its k input axes against the target qubits and
# the result axes are moved back in place.


def _apply(tensor: np.ndarray, u: np.ndarray, qubits: Sequence[int], offset: int) -> np.ndarray:
    k = len(qubits)
    axes = [offset + q - 1 for q in qubits]
    ut = u.reshape((2,) * (2 * k))
    out = np.tensordot(ut, tensor, axes=(tuple(range(k, 2 * k)), axes))
    return np.moveaxis(out, tuple(range(k)), axes)


def parse_basis_label(init: str | int, n: int) -> np.ndarray:
    """Statevector of a computational-basis label ('0110...', or flat index)."""
    if isinstance(init, str):
        if len(init) != n or set(init) - {"0", "1"}:
            raise ValueError(f"basis label must be {n} characters of 0/1")
        idx = int(init, 2)
    else:
        idx = int(init)
        if not 0 <= idx < 2**n:
            raise ValueError("basis index out of range")
    psi = np.zeros(2**n, dtype=complex)
    psi[idx] = 1.0
    return psi


def run_statevector(program: Program, init: str | int | np.ndarray = 0) -> np.ndarray:
    """Evolve a pure state through a unitary-only program."""
    n = program.n_qubits
    if isinstance(init, (str, int)):
        psi = parse_basis_label(init, n)
    else:
        psi = np.asarray(init, dtype=complex).reshape(2**n)
        if abs(np.linalg.norm(psi) - 1.0) > 1e-10:
            raise ValueError("initial state is not normalized")
    t = psi.reshape((2,) * n)
    for ins in program.instructions:
        if not isinstance(ins, Gate):
            raise ValueError("statevector simulation supports unitary gates only")
        t = _apply(t, gate_matrix(ins), ins.qubits, 0)
    return t.reshape(2**n)


def run_density(
    program: Program, rho0: np.ndarray, allow_noncptp: bool = False
) -> np.ndarray:
    """Evolve a density matrix through gates, Kraus channels and discards.

    A KrausApply whose channel is flagged as violating CPTP raises unless
    ``allow_noncptp`` is passed; the caller then owns the interpretation of
    the (possibly trace-changing) output.
    """
    n = program.n_qubits
    rho = np.asarray(rho0, dtype=complex)
    if rho.shape != (2**n, 2**n):
        raise ValueError(f"density matrix must be {2**n}x{2**n}")
    t = rho.reshape((2,) * (2 * n))
    for ins in program.instructions:
        if isinstance(ins, Gate):
            u = gate_matrix(ins)
            t = _apply(t, u, ins.qubits, 0)
            t = _apply(t, u.conj(), ins.qubits, n)
        elif isinstance(ins, KrausApply):
            if ins.cptp == "violated" and not allow_noncptp:
                raise ValueError(
                    f"channel {ins.label or '<unnamed>'} violates CPTP; "
                    "pass allow_noncptp=True to apply it anyway"
                )
            t = sum(
                _apply(_apply(t, k, (ins.qubit,), 0), k.conj(), (ins.qubit,), n)
                for k in ins.operators
            )
        else:
            rho_m = partial_trace(t.reshape(2**n, 2**n), _others(ins.qubit, n), n)
            n -= 1
            t = rho_m.reshape((2,) * (2 * n))
    return t.reshape(2**n, 2**n)


def _others(q: int, n: int) -> tuple[int, ...]:
    return tuple(j for j in range(1, n + 1) if j != q)


def unitary_of(program: Program) -> np.ndarray:
    """Dense unitary of a gate-only program (register capped at 10 qubits)."""
    n = program.n_qubits
    if n > 10:
        raise ValueError("unitary reconstruction capped at 10 qubits")
    dim = 2**n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for ins in program.instructions:
        if not isinstance(ins, Gate):
            raise ValueError("unitary reconstruction supports unitary gates only")
        u = _apply(u, gate_matrix(ins), ins.qubits, 0)
    return u.reshape(dim, dim)


def partial_trace(rho: np.ndarray, keep: Sequence[int], n: int) -> np.ndarray:
    """Reduced density matrix on ``keep`` (1-based, original relative order)."""
    keep = tuple(keep)
    if len(set(keep)) != len(keep) or any(not 1 <= q <= n for q in keep):
        raise ValueError("bad keep set")
    t = np.asarray(rho, dtype=complex).reshape((2,) * (2 * n))
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = list(letters[:n])
    col = [letters[n + j] if (j + 1) in keep else row[j] for j in range(n)]
    out = "".join(row[q - 1] for q in keep) + "".join(col[q - 1] for q in keep)
    k = len(keep)
    return np.einsum("".join(row + col) + "->" + out, t).reshape(2**k, 2**k)


# --- text serialization -----------------------------------------------------


def _fmt_complex(z: complex) -> str:
    return f"{z.real:.17g}{z.imag:+.17g}j"


def _fmt_matrix_rows(m: np.ndarray, indent: str = "  ") -> list[str]:
    return [indent + " ".join(_fmt_complex(z) for z in row) for row in m]


def export_text(program: Program) -> str:
    lines = [f"# fmosim circuit, {program.n_qubits} qubit(s)", f"QUBITS {program.n_qubits}"]
    for ins in program.instructions:
        if isinstance(ins, Gate):
            targets = " ".join(str(q) for q in ins.qubits)
            if ins.kind == "UNITARY":
                lines.append(f"UNITARY {targets} :")
                lines.extend(_fmt_matrix_rows(ins.matrix))
            elif ins.angle is not None:
                lines.append(f"{ins.kind}({ins.angle:.17g}) {targets}")
            else:
                lines.append(f"{ins.kind} {targets}")
        elif isinstance(ins, KrausApply):
            head = f"KRAUS {ins.qubit} ops={len(ins.operators)} cptp={ins.cptp}"
            if ins.label:
                head += f" label={ins.label}"
            lines.append(head + " :")
            for k in ins.operators:
                lines.extend(_fmt_matrix_rows(k))
        else:
            lines.append(f"MEASURE_DISCARD {ins.qubit}")
    return "\n".join(lines) + "\n"


def _parse_matrix_rows(rows: list[str], dim: int, where: str) -> np.ndarray:
    if len(rows) != dim:
        raise ValueError(f"{where}: expected {dim} matrix rows")
    out = np.empty((dim, dim), dtype=complex)
    for i, row in enumerate(rows):
        entries = row.split()
        if len(entries) != dim:
            raise ValueError(f"{where}: row {i + 1} has {len(entries)} entries, want {dim}")
        out[i] = [complex(e) for e in entries]
    return out


def parse_text(text: str) -> Program:
    raw = [ln.split("#", 1)[0].rstrip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(raw) if ln.strip()]
    if not lines:
        raise ValueError("empty circuit text")
    head = lines[0][1].split()
    if head[0] != "QUBITS" or len(head) != 2:
        raise ValueError("first line must be a QUBITS header")
    n = int(head[1])
    instructions: list[Instruction] = []
    i = 1
    while i < len(lines):
        lineno, ln = lines[i]
        tokens = ln.split()
        name = tokens[0]
        try:
            if name == "UNITARY":
                if tokens[-1] != ":":
                    raise ValueError("UNITARY header must end with ':'")
                qubits = tuple(int(t) for t in tokens[1:-1])
                dim = 2 ** len(qubits)
                rows = [lines[i + 1 + r][1] for r in range(dim)]
                instructions.append(unitary_gate(_parse_matrix_rows(rows, dim, "UNITARY"), qubits))
                i += 1 + dim
            elif name == "KRAUS":
                if tokens[-1] != ":":
                    raise ValueError("KRAUS header must end with ':'")
                qubit = int(tokens[1])
                opts = dict(t.split("=", 1) for t in tokens[2:-1])
                n_ops = int(opts.pop("ops"))
                cptp = opts.pop("cptp", "unchecked")
                label = opts.pop("label", "")
                if opts:
                    raise ValueError(f"unknown KRAUS options {sorted(opts)}")
                ops = []
                for j in range(n_ops):
                    rows = [lines[i + 1 + 2 * j + r][1] for r in range(2)]
                    ops.append(_parse_matrix_rows(rows, 2, "KRAUS"))
                instructions.append(KrausApply(qubit, tuple(ops), cptp=cptp, label=label))
                i += 1 + 2 * n_ops
            elif name == "MEASURE_DISCARD":
                instructions.append(MeasureAndDiscard(int(tokens[1])))
                i += 1
            else:
                angle = None
                if "(" in name:
                    name, _, arg = name.partition("(")
                    if not arg.endswith(")"):
                        raise ValueError("malformed angle")
                    angle = float(arg[:-1])
                qubits = tuple(int(t) for t in tokens[1:])
                if name not in _ARITY:
                    raise ValueError(f"unknown gate {name!r}")
                instructions.append(Gate(name, qubits, angle))
                i += 1
        except (ValueError, IndexError, KeyError) as exc:
            raise ValueError(f"parse error at line {lineno}: {exc}") from exc
    return Program(n, tuple(instructions))
