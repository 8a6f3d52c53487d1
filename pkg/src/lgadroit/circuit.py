"""Time-slotted circuit grid, device rules, compiler emulation, QASM subset.

A circuit is a grid of cells (qubit, slot) with at most one gate per cell;
a CNOT occupies the same slot on both operands. Measurements are terminal:
measured qubits are read once in the z basis after the last slot.

The compiler emulation reproduces the two documented behaviors of the
target device's compiler: adjacent-HH collapse and hoisting of trailing
single-qubit gates toward the measurement. ``insert_countermeasures`` adds
the T,Tdg spacers and Id padding used to pin circuits against both.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, replace

from .qsim import ValidationError

KINDS_1Q = ("X", "Y", "Z", "H", "S", "Sdg", "T", "Tdg", "Id")
KIND_CNOT = "CNOT"
ROTATION_KINDS = ("R", "Rdg")  # exact theta rotations, ideal gateset only
TIMING_KINDS = ("Id", "T", "Tdg")  # timing delays, not pulses
ALL_KINDS = KINDS_1Q + (KIND_CNOT,) + ROTATION_KINDS

DEVICE_CNOT_TARGET = 2


@dataclass(frozen=True)
class Gate:
    """One gate on the grid. ``qubits`` is (q,) or (control, target) for CNOT."""

    kind: str
    qubits: tuple[int, ...]
    slot: int
    param: float | None = None

    def __post_init__(self):
        if self.kind not in ALL_KINDS:
            raise ValidationError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if self.kind == KIND_CNOT:
            if len(qubits) != 2 or qubits[0] == qubits[1]:
                raise ValidationError("CNOT needs exactly 2 distinct operands")
        elif len(qubits) != 1:
            raise ValidationError(f"{self.kind} needs exactly 1 operand, got {qubits}")
        if self.slot < 0:
            raise ValidationError(f"slot must be >= 0, got {self.slot}")
        if self.kind in ROTATION_KINDS and self.param is None:
            raise ValidationError(f"{self.kind} gate needs an angle parameter")
        if self.kind not in ROTATION_KINDS and self.param is not None:
            raise ValidationError(f"{self.kind} gate takes no parameter")


def _sort_key(g: Gate):
    return (g.slot, g.qubits[0], g.kind)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    n_slots: int
    gates: tuple[Gate, ...]
    measured: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.n_qubits <= 5:
            raise ValidationError(f"n_qubits must be 1..5, got {self.n_qubits}")
        if self.n_slots < 0:
            raise ValidationError(f"n_slots must be >= 0, got {self.n_slots}")
        gates = tuple(sorted(self.gates, key=_sort_key))
        object.__setattr__(self, "gates", gates)
        object.__setattr__(self, "measured", tuple(sorted(self.measured)))
        cells: dict[tuple[int, int], Gate] = {}
        for g in gates:
            if g.slot >= self.n_slots:
                raise ValidationError(f"gate {g} lies past n_slots={self.n_slots}")
            for q in g.qubits:
                if not 0 <= q < self.n_qubits:
                    raise ValidationError(f"gate {g} touches qubit {q} out of range")
                if (q, g.slot) in cells:
                    raise ValidationError(f"cell (q{q}, slot {g.slot}) is occupied twice")
                cells[(q, g.slot)] = g
        for q in self.measured:
            if not 0 <= q < self.n_qubits:
                raise ValidationError(f"measured qubit {q} out of range")
        object.__setattr__(self, "_cells", cells)

    def gate_at(self, q: int, slot: int) -> Gate | None:
        return self._cells.get((q, slot))

    def wire(self, q: int) -> list[Gate]:
        """Gates touching qubit ``q`` in slot order."""
        return [g for g in self.gates if q in g.qubits]

    def empty(self, q: int, slot: int) -> bool:
        return (q, slot) not in self._cells


@dataclass(frozen=True)
class DeviceConstraints:
    cnot_target: int | None = DEVICE_CNOT_TARGET
    allowed_kinds: tuple[str, ...] = KINDS_1Q + (KIND_CNOT,)
    max_measurements_per_qubit: int = 1

    @classmethod
    def ibm5q(cls) -> "DeviceConstraints":
        return cls()

    @classmethod
    def ideal(cls) -> "DeviceConstraints":
        return cls(cnot_target=None, allowed_kinds=ALL_KINDS)


@dataclass(frozen=True)
class Violation:
    rule: str
    message: str
    qubit: int | None = None
    slot: int | None = None


def validate(c: Circuit, d: DeviceConstraints) -> list[Violation]:
    """Device-rule check; an empty list means the circuit is device-legal."""
    out: list[Violation] = []
    for g in c.gates:
        if g.kind not in d.allowed_kinds:
            out.append(Violation("gate_kind", f"{g.kind} at slot {g.slot} is not in the gate set",
                                 qubit=g.qubits[0], slot=g.slot))
        if g.kind == KIND_CNOT and d.cnot_target is not None and g.qubits[1] != d.cnot_target:
            out.append(Violation("cnot_target",
                                 f"CNOT at slot {g.slot} targets q{g.qubits[1]}, only q{d.cnot_target} allowed",
                                 qubit=g.qubits[1], slot=g.slot))
    for q in set(c.measured):
        n = c.measured.count(q)
        if n > d.max_measurements_per_qubit:
            out.append(Violation("max_measurements", f"q{q} measured {n} times", qubit=q))
    return out


# ---------------------------------------------------------------------------
# Compiler-emulation passes
# ---------------------------------------------------------------------------

def pass_collapse_hh(c: Circuit) -> Circuit:
    """Remove H pairs on the same qubit separated only by empty cells, to fixpoint."""
    gates = list(c.gates)
    while True:
        removed: set[Gate] = set()
        for q in range(c.n_qubits):
            pending: Gate | None = None
            for g in sorted((g for g in gates if q in g.qubits), key=lambda g: g.slot):
                if g in removed:
                    continue
                if g.kind == "H":
                    if pending is not None:
                        removed.update((pending, g))
                        pending = None
                    else:
                        pending = g
                else:
                    pending = None
        if not removed:
            return replace(c, gates=tuple(g for g in gates if g not in removed))
        gates = [g for g in gates if g not in removed]
        c = replace(c, gates=tuple(gates))


def pass_hoist(c: Circuit) -> Circuit:
    """Move each trailing single-qubit gate next to its qubit's measurement.

    A gate qualifies when it is followed only by empty cells on its wire.
    Id gates hold their cell and are never moved, which is what makes Id
    padding pin timing.
    """
    gates = list(c.gates)
    changed = False
    for q in set(c.measured):
        wire = sorted((g for g in gates if q in g.qubits), key=lambda g: g.slot)
        if not wire:
            continue
        last = wire[-1]
        if last.kind in (KIND_CNOT, "Id"):
            continue
        target = c.n_slots - 1
        if last.slot >= target:
            continue
        gates.remove(last)
        gates.append(replace(last, slot=target))
        changed = True
    return replace(c, gates=tuple(gates)) if changed else c


def compile_circuit(c: Circuit) -> Circuit:
    """Alternate HH collapse and hoisting to a fixpoint.

    Terminates: collapse strictly reduces the gate count and hoisting
    strictly increases the total of occupied slots, both bounded.
    """
    while True:
        nxt = pass_hoist(pass_collapse_hh(c))
        if nxt == c:
            return c
        c = nxt


def insert_countermeasures(
    c: Circuit,
    protect: list[tuple[int, tuple[int, int]]],
    pin: list[tuple[int, tuple[int, int]]],
) -> Circuit:
    """Insert T,Tdg between protected HH pairs and Id gates into pinned windows.

    ``protect`` lists (qubit, (slot_of_first_H, slot_of_second_H)) sites with
    at least two free interior cells; ``pin`` lists (qubit, (start, end))
    windows whose empty cells are filled with Id. The result computes the
    same unitary (T Tdg = Id = identity) but survives ``compile_circuit``
    unchanged.
    """
    occupied = {(q, g.slot) for g in c.gates for q in g.qubits}
    added: list[Gate] = []

    def free(q: int, s: int) -> bool:
        return (q, s) not in occupied

    for q, (s1, s2) in protect:
        g1, g2 = c.gate_at(q, s1), c.gate_at(q, s2)
        if g1 is None or g2 is None or g1.kind != "H" or g2.kind != "H" \
                or g1.qubits != (q,) or g2.qubits != (q,):
            raise ValidationError(f"protect site (q{q}, {s1}-{s2}) is not an HH pair")
        interior = [s for s in range(s1 + 1, s2) if free(q, s)]
        if len(interior) < 2:
            raise ValidationError(f"protect site (q{q}, {s1}-{s2}) lacks two free interior cells")
        for kind, s in (("T", interior[0]), ("Tdg", interior[1])):
            added.append(Gate(kind, (q,), s))
            occupied.add((q, s))

    for q, (start, end) in pin:
        empties = [s for s in range(start, end) if free(q, s)]
        if not empties:
            raise ValidationError(f"pin window (q{q}, {start}-{end}) is already full")
        for s in empties:
            added.append(Gate("Id", (q,), s))
            occupied.add((q, s))

    return replace(c, gates=c.gates + tuple(added))


# ---------------------------------------------------------------------------
# QASM subset
# ---------------------------------------------------------------------------
#
# Grammar (one statement per line, LF newlines, // comments):
#   OPENQASM 2.0;
#   include "qelib1.inc";          (optional on input)
#   qreg q[N];                     (single register, 1 <= N <= 5)
#   creg c[N];                     (optional on input)
#   x|y|z|h|s|sdg|t|tdg|id q[i];
#   cx q[i],q[j];
#   measure q[i] -> c[i];
#
# Slots are not encoded; parsing re-schedules gates as early as possible,
# preserving per-qubit gate order and CNOT slot alignment.

_QASM_NAMES = {
    "X": "x", "Y": "y", "Z": "z", "H": "h", "S": "s", "Sdg": "sdg",
    "T": "t", "Tdg": "tdg", "Id": "id", KIND_CNOT: "cx",
}
_KIND_BY_NAME = {v: k for k, v in _QASM_NAMES.items()}

_RE_1Q = re.compile(r"^(x|y|z|h|s|sdg|t|tdg|id)\s+q\[(\d+)\]\s*;$")
_RE_CX = re.compile(r"^cx\s+q\[(\d+)\]\s*,\s*q\[(\d+)\]\s*;$")
_RE_MEASURE = re.compile(r"^measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\]\s*;$")
_RE_QREG = re.compile(r"^qreg\s+q\[(\d+)\]\s*;$")
_RE_CREG = re.compile(r"^creg\s+c\[(\d+)\]\s*;$")


class QasmError(ValidationError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


def to_qasm(c: Circuit) -> str:
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";',
             f"qreg q[{c.n_qubits}];", f"creg c[{c.n_qubits}];"]
    for g in c.gates:
        if g.kind in ROTATION_KINDS:
            raise ValidationError(f"{g.kind} is not in the QASM subset (device gates only)")
        if g.kind == KIND_CNOT:
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        else:
            lines.append(f"{_QASM_NAMES[g.kind]} q[{g.qubits[0]}];")
    for q in c.measured:
        lines.append(f"measure q[{q}] -> c[{q}];")
    return "\n".join(lines) + "\n"


def from_qasm(text: str) -> Circuit:
    n_qubits: int | None = None
    next_slot: list[int] = []
    done: set[int] = set()
    gates: list[Gate] = []
    measured: list[int] = []
    saw_header = False

    def check_q(lineno: int, q: int) -> None:
        if n_qubits is None:
            raise QasmError(lineno, "qreg declaration must come before gates")
        if q >= n_qubits:
            raise QasmError(lineno, f"q[{q}] out of range for qreg q[{n_qubits}]")
        if q in done:
            raise QasmError(lineno, f"gate after measurement of q[{q}]")

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0].strip()
        if not line:
            continue
        if line == "OPENQASM 2.0;":
            saw_header = True
            continue
        if line.startswith("include"):
            continue
        if m := _RE_QREG.match(line):
            if n_qubits is not None:
                raise QasmError(lineno, "only one qreg is supported")
            n_qubits = int(m.group(1))
            if not 1 <= n_qubits <= 5:
                raise QasmError(lineno, f"qreg size {n_qubits} outside 1..5")
            next_slot = [0] * n_qubits
            continue
        if _RE_CREG.match(line):
            continue
        if m := _RE_1Q.match(line):
            q = int(m.group(2))
            check_q(lineno, q)
            gates.append(Gate(_KIND_BY_NAME[m.group(1)], (q,), next_slot[q]))
            next_slot[q] += 1
            continue
        if m := _RE_CX.match(line):
            ctl, tgt = int(m.group(1)), int(m.group(2))
            check_q(lineno, ctl)
            check_q(lineno, tgt)
            if ctl == tgt:
                raise QasmError(lineno, "cx operands must differ")
            s = max(next_slot[ctl], next_slot[tgt])
            gates.append(Gate(KIND_CNOT, (ctl, tgt), s))
            next_slot[ctl] = next_slot[tgt] = s + 1
            continue
        if m := _RE_MEASURE.match(line):
            q = int(m.group(1))
            check_q(lineno, q)
            measured.append(q)
            done.add(q)
            continue
        raise QasmError(lineno, f"unsupported statement: {line.split()[0]!r}")

    if not saw_header:
        raise QasmError(1, 'missing "OPENQASM 2.0;" header')
    if n_qubits is None:
        raise QasmError(1, "missing qreg declaration")
    return Circuit(n_qubits, max(next_slot, default=0), tuple(gates), tuple(measured))


def canonical_schedule(c: Circuit) -> Circuit:
    """Reschedule every gate as early as possible.

    Preserves per-qubit gate order and CNOT slot alignment; two circuits
    have the same gate order iff their canonical schedules are equal.
    """
    next_slot = [0] * c.n_qubits
    gates: list[Gate] = []
    for g in c.gates:
        s = max(next_slot[q] for q in g.qubits)
        gates.append(replace(g, slot=s))
        for q in g.qubits:
            next_slot[q] = s + 1
    return Circuit(c.n_qubits, max(next_slot, default=0), tuple(gates), c.measured)
