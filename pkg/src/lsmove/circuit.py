"""Layered CNOT circuits.

Circuit text format::

    # comment
    qubits 4
    cnot 2 3
    cnot 0 1
    ---
    cnot 0 3
    cnot 2 1

``---`` closes a layer.  A source without separators is layered
as-soon-as-possible; with separators each section is taken verbatim.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field


class CircuitError(ValueError):
    pass


@dataclass(frozen=True)
class Gate:
    id: int
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise CircuitError(f"gate {self.id}: control equals target ({self.control})")

    @property
    def qubits(self) -> tuple[int, int]:
        return (self.control, self.target)


@dataclass
class LayeredCircuit:
    q: int
    layers: list[list[Gate]] = field(default_factory=list)

    @property
    def total_gates(self) -> int:
        return sum(len(layer) for layer in self.layers)

    def gates(self) -> list[Gate]:
        return [gate for layer in self.layers for gate in layer]

    def copy(self) -> LayeredCircuit:
        return LayeredCircuit(self.q, [list(layer) for layer in self.layers])

    def validate(self) -> None:
        seen = set()
        for i, layer in enumerate(self.layers):
            support: set[int] = set()
            for gate in layer:
                if gate.id in seen:
                    raise CircuitError(f"duplicate gate id {gate.id}")
                seen.add(gate.id)
                for qb in gate.qubits:
                    if not 0 <= qb < self.q:
                        raise CircuitError(f"gate {gate.id}: qubit {qb} out of range")
                    if qb in support:
                        raise CircuitError(f"layer {i}: qubit {qb} used twice")
                    support.add(qb)


def logical_depth(c: LayeredCircuit) -> int:
    return len(c.layers)


def random_circuit(q: int, g: int, d_L: int, seed: int | None = 0, dependent: bool = True) -> LayeredCircuit:
    """Sample ``d_L`` layers of ``g`` CNOTs on disjoint qubit pairs.

    With ``dependent`` set, every gate after the first layer takes one qubit
    from the previous layer's support, so the layers are exactly the
    as-soon-as-possible layering of the circuit.  Otherwise each layer is an
    independent uniform draw of ``g`` disjoint ordered pairs.
    """
    if g < 0 or d_L < 0:
        raise ValueError("g and d_L must be non-negative")
    if 2 * g > q:
        raise ValueError(f"cannot place {g} disjoint gates on {q} qubits")
    rng = random.Random(seed)
    layers = []
    gid = 0
    support: list[int] = []
    for _ in range(d_L):
        if dependent and support:
            anchors = rng.sample(support, g)
            taken = set(anchors)
            others = rng.sample([x for x in range(q) if x not in taken], g)
            pairs = [(a, b) if rng.random() < 0.5 else (b, a) for a, b in zip(anchors, others)]
        else:
            qubits = rng.sample(range(q), 2 * g)
            pairs = list(zip(qubits[::2], qubits[1::2]))
        layer = []
        for control, target in pairs:
            layer.append(Gate(gid, control, target))
            gid += 1
        layers.append(layer)
        support = sorted(qb for gate in layer for qb in gate.qubits)
    return LayeredCircuit(q, layers)


def asap_layers(gates: list[Gate]) -> list[list[Gate]]:
    """Layer gates as early as their shared-qubit dependencies allow."""
    ready: dict[int, int] = {}
    layers: list[list[Gate]] = []
    for gate in gates:
        level = max(ready.get(gate.control, 0), ready.get(gate.target, 0))
        if level == len(layers):
            layers.append([])
        layers[level].append(gate)
        ready[gate.control] = ready[gate.target] = level + 1
    return layers


def parse_circuit(text: str) -> LayeredCircuit:
    q = None
    sections: list[list[Gate]] = [[]]
    has_separator = False
    gid = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        head = tokens[0].lower()
        try:
            if head == "qubits" and len(tokens) == 2:
                if q is not None:
                    raise CircuitError("duplicate qubits header")
                q = int(tokens[1])
                if q < 1:
                    raise CircuitError("qubit count must be positive")
            elif head == "cnot" and len(tokens) == 3:
                if q is None:
                    raise CircuitError("gate before qubits header")
                control, target = int(tokens[1]), int(tokens[2])
                for qb in (control, target):
                    if not 0 <= qb < q:
                        raise CircuitError(f"qubit {qb} out of range for {q} qubits")
                sections[-1].append(Gate(gid, control, target))
                gid += 1
            elif head == "---" and len(tokens) == 1:
                has_separator = True
                sections.append([])
            else:
                raise CircuitError(f"cannot parse {raw.strip()!r}")
        except (CircuitError, ValueError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    if q is None:
        raise CircuitError("missing qubits header")
    if has_separator:
        if not sections[-1]:
            sections.pop()
        layers = sections
    else:
        layers = asap_layers(sections[0])
    circuit = LayeredCircuit(q, layers)
    try:
        circuit.validate()
    except CircuitError as exc:
        raise CircuitError(f"explicit layering is invalid: {exc}") from None
    return circuit


def serialize_circuit(c: LayeredCircuit) -> str:
    lines = [f"qubits {c.q}"]
    for i, layer in enumerate(c.layers):
        if i:
            lines.append("---")
        lines.extend(f"cnot {gate.control} {gate.target}" for gate in layer)
    return "\n".join(lines) + "\n"


def push_gate(c: LayeredCircuit, gate_id: int, from_layer: int) -> LayeredCircuit:
    """Move a gate one layer later, cascading through later gates that share a qubit."""
    out = c.copy()
    push_gate_inplace(out.layers, gate_id, from_layer)
    return out


def push_gate_inplace(layers: list[list[Gate]], gate_id: int, from_layer: int) -> None:
    try:
        layer = layers[from_layer]
        idx = next(i for i, gate in enumerate(layer) if gate.id == gate_id)
    except (IndexError, StopIteration):
        raise KeyError(f"gate {gate_id} not in layer {from_layer}") from None
    moving = [layer.pop(idx)]
    j = from_layer + 1
    while moving:
        if j == len(layers):
            layers.append([])
        support = {qb for gate in moving for qb in gate.qubits}
        staying, bumped = [], []
        for gate in layers[j]:
            (bumped if support & set(gate.qubits) else staying).append(gate)
        layers[j] = staying + moving
        moving = bumped
        j += 1
