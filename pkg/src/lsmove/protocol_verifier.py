"""Brute-force check of the measurement-based CNOT protocols.

Wires are numbered 0 (control), 1 (target) and 2 (ancilla).  A protocol
prepares the ancilla, performs two joint Pauli measurements and one
single-wire measurement, then applies Pauli corrections conditioned on
parities of the three outcomes.  Every outcome branch is simulated with
dense 8-dimensional linear algebra and its Choi matrix is compared with
the ideal CNOT, relocated onto the ancilla wire for the teleporting
variants.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np

CONTROL, TARGET, ANCILLA = 0, 1, 2
TOL = 1e-9

_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_PREP = {
    "0": np.array([1, 0], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
}

CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
    dtype=complex,
)


class ProtocolName(enum.Enum):
    STANDARD = "StandardCNOT"
    TELEPORT_TARGET = "CNOTTeleportTarget"
    TELEPORT_CONTROL = "CNOTTeleportControl"


@dataclass(frozen=True)
class Prepare:
    wire: int
    state: str


@dataclass(frozen=True)
class Measure:
    """Measurement of a Pauli product, e.g. ``{0: "Z", 2: "Z"}``."""

    paulis: tuple[tuple[int, str], ...]

    @classmethod
    def of(cls, **kw: str) -> Measure:
        names = {"c": CONTROL, "t": TARGET, "a": ANCILLA}
        return cls(tuple(sorted((names[k], v) for k, v in kw.items())))

    @property
    def wires(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.paulis)


@dataclass(frozen=True)
class Correct:
    """Apply ``pauli`` on ``wire`` iff the XOR of the listed outcomes is 1."""

    wire: int
    pauli: str
    parity: tuple[int, ...]


Step = Union[Prepare, Measure, Correct]


@dataclass(frozen=True)
class ProtocolSpec:
    """A measurement-based CNOT.

    Attributes:
        name: Which gate the protocol implements.
        steps: Preparation, measurements and corrections in execution order.
        outputs: Wires carrying the logical control and target afterwards.
        label: Human-readable variant name.
    """

    name: ProtocolName
    steps: tuple[Step, ...]
    outputs: tuple[int, int]
    label: str = ""

    def __post_init__(self):
        measures = [s for s in self.steps if isinstance(s, Measure)]
        if len(measures) != 3:
            raise ValueError(f"expected three measurements, got {len(measures)}")
        if [len(m.paulis) for m in measures].count(2) != 2:
            raise ValueError("expected two joint and one single-wire measurement")
        for s in self.steps:
            if isinstance(s, Correct) and any(not 0 <= i < 3 for i in s.parity):
                raise ValueError(f"correction references unknown outcome: {s}")

    @property
    def measured_wire(self) -> int:
        return ({CONTROL, TARGET, ANCILLA} - set(self.outputs)).pop()

    @property
    def corrections(self) -> list[Correct]:
        return [s for s in self.steps if isinstance(s, Correct)]

    @property
    def prep(self) -> Prepare:
        return next(s for s in self.steps if isinstance(s, Prepare))


def _standard() -> ProtocolSpec:
    # alpha = Z_c Z_a, beta = X_a X_t, gamma = Z_a
    return ProtocolSpec(
        ProtocolName.STANDARD,
        (
            Prepare(ANCILLA, "+"),
            Measure.of(c="Z", a="Z"),
            Measure.of(a="X", t="X"),
            Measure.of(a="Z"),
            Correct(CONTROL, "Z", (1,)),
            Correct(TARGET, "X", (0, 2)),
        ),
        (CONTROL, TARGET),
        "standard",
    )


def _standard_xx_first() -> ProtocolSpec:
    # alpha = X_a X_t, beta = Z_c Z_a, gamma = X_a
    return ProtocolSpec(
        ProtocolName.STANDARD,
        (
            Prepare(ANCILLA, "0"),
            Measure.of(a="X", t="X"),
            Measure.of(c="Z", a="Z"),
            Measure.of(a="X"),
            Correct(CONTROL, "Z", (0, 2)),
            Correct(TARGET, "X", (1,)),
        ),
        (CONTROL, TARGET),
        "standard-xx-first",
    )


def _teleport_control() -> ProtocolSpec:
    # alpha = X_a X_t, beta = Z_c Z_a, gamma = X_c; the control ends on the ancilla
    return ProtocolSpec(
        ProtocolName.TELEPORT_CONTROL,
        (
            Prepare(ANCILLA, "0"),
            Measure.of(a="X", t="X"),
            Measure.of(c="Z", a="Z"),
            Measure.of(c="X"),
            Correct(ANCILLA, "Z", (0, 2)),
            Correct(ANCILLA, "X", (1,)),
            Correct(TARGET, "X", (1,)),
        ),
        (ANCILLA, TARGET),
        "tele-control",
    )


def _teleport_target() -> ProtocolSpec:
    # alpha = Z_c Z_a, beta = X_a X_t, gamma = Z_t; the target ends on the ancilla
    return ProtocolSpec(
        ProtocolName.TELEPORT_TARGET,
        (
            Prepare(ANCILLA, "+"),
            Measure.of(c="Z", a="Z"),
            Measure.of(a="X", t="X"),
            Measure.of(t="Z"),
            Correct(CONTROL, "Z", (1,)),
            Correct(ANCILLA, "Z", (1,)),
            Correct(ANCILLA, "X", (0, 2)),
        ),
        (CONTROL, ANCILLA),
        "tele-target",
    )


PROTOCOLS: dict[str, ProtocolSpec] = {
    p.label: p for p in (_standard(), _standard_xx_first(), _teleport_control(), _teleport_target())
}
# the three gates; the XX-first ordering is an alternative encoding of the first
DEFAULT_PROTOCOLS = ("standard", "tele-control", "tele-target")


def drop_correction(p: ProtocolSpec, index: int) -> ProtocolSpec:
    """Copy of ``p`` without its ``index``-th correction (for mutation tests)."""
    corrections = p.corrections
    if not 0 <= index < len(corrections):
        raise IndexError(f"protocol {p.label} has {len(corrections)} corrections")
    victim = corrections[index]
    steps = tuple(s for s in p.steps if s is not victim)
    return replace(p, steps=steps, label=f"{p.label}-without-{index}")


def flip_correction(p: ProtocolSpec, index: int) -> ProtocolSpec:
    """Copy of ``p`` with the ``index``-th correction conditioned on the opposite parity."""
    corrections = p.corrections
    victim = corrections[index]
    flipped = _FlippedCorrect(victim.wire, victim.pauli, victim.parity)
    steps = tuple(flipped if s is victim else s for s in p.steps)
    return replace(p, steps=steps, label=f"{p.label}-flipped-{index}")


@dataclass(frozen=True)
class _FlippedCorrect(Correct):
    pass


def _on(pauli: str, wire: int) -> np.ndarray:
    factors = [_PAULI["I"]] * 3
    factors[wire] = _PAULI[pauli]
    return np.kron(np.kron(factors[0], factors[1]), factors[2])


def _pauli_product(m: Measure) -> np.ndarray:
    out = np.eye(8, dtype=complex)
    for wire, pauli in m.paulis:
        out = out @ _on(pauli, wire)
    return out


def _fires(step: Correct, outcomes: Sequence[int]) -> bool:
    bit = sum(outcomes[i] for i in step.parity) % 2
    return bool(bit ^ isinstance(step, _FlippedCorrect))


def branch_operator(p: ProtocolSpec, outcomes: Sequence[int]) -> np.ndarray:
    """8x8 operator applied after preparation: projectors, then corrections."""
    op = np.eye(8, dtype=complex)
    k = 0
    for step in p.steps:
        if isinstance(step, Measure):
            op = (np.eye(8) + (-1) ** outcomes[k] * _pauli_product(step)) / 2 @ op
            k += 1
        elif isinstance(step, Correct) and _fires(step, outcomes):
            op = _on(step.pauli, step.wire) @ op
    return op


def _embedding(p: ProtocolSpec, ancilla_prep: np.ndarray | None = None) -> np.ndarray:
    """8x4 isometry placing the (control, target) input next to the prepared ancilla."""
    prep = p.prep
    if prep.wire != ANCILLA:
        raise ValueError("only ancilla preparation is supported")
    anc = _PREP[prep.state] if ancilla_prep is None else np.asarray(ancilla_prep, dtype=complex)
    return np.kron(np.eye(4), anc.reshape(2, 1))


@dataclass
class OutcomeBranch:
    outcomes: tuple[int, int, int]
    probability: float
    operator: np.ndarray
    state: np.ndarray = field(repr=False)

    def output_state(self, p: ProtocolSpec) -> np.ndarray:
        """Two-qubit state on ``p.outputs`` (the measured wire is a product factor)."""
        psi = self.state.reshape(2, 2, 2)
        order = list(p.outputs) + [p.measured_wire]
        psi = np.transpose(psi, order).reshape(4, 2)
        col = int(np.argmax(np.linalg.norm(psi, axis=0)))
        out = psi[:, col]
        return out / np.linalg.norm(out)


def simulate_branches(
    p: ProtocolSpec,
    input_state: Sequence[complex],
    ancilla_prep: Sequence[complex] | None = None,
) -> list[OutcomeBranch]:
    """Run ``p`` on a two-qubit input over all eight outcome assignments.

    Args:
        p: Protocol to simulate.
        input_state: Normalized state of (control, target), basis order
            ``|c t>``.
        ancilla_prep: Overrides the protocol's ancilla preparation.

    Returns:
        The branches of nonzero probability, each with its renormalized
        post-correction state on all three wires.
    """
    psi = np.asarray(input_state, dtype=complex)
    if psi.shape != (4,):
        raise ValueError("input must be a 4-dimensional state vector")
    if abs(np.vdot(psi, psi).real - 1.0) > TOL:
        raise ValueError("input state is not normalized")
    full = _embedding(p, None if ancilla_prep is None else np.asarray(ancilla_prep)) @ psi
    out = []
    for outcomes in itertools.product((0, 1), repeat=3):
        op = branch_operator(p, outcomes)
        state = op @ full
        prob = float(np.vdot(state, state).real)
        if prob <= TOL:
            continue
        out.append(OutcomeBranch(outcomes, prob, op, state / np.sqrt(prob)))
    return out


def _ideal_unitary() -> np.ndarray:
    return CNOT


def branch_choi(p: ProtocolSpec, outcomes: Sequence[int]) -> tuple[np.ndarray, float]:
    """Choi matrix of one branch, normalized by its probability on a maximally mixed input.

    The measured wire is traced out and the output wires are ordered
    (logical control, logical target).
    """
    kraus = branch_operator(p, outcomes) @ _embedding(p)
    prob = float(np.trace(kraus.conj().T @ kraus).real) / 4
    order = list(p.outputs) + [p.measured_wire]
    # kraus as (out_c, out_t, measured) x input
    k = np.transpose(kraus.reshape(2, 2, 2, 4), order + [3]).reshape(4, 2, 4)
    choi = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            rho = np.einsum("amx,bmy->ab", k[:, :, i : i + 1], k[:, :, j : j + 1].conj())
            choi[i * 4 : i * 4 + 4, j * 4 : j * 4 + 4] = rho
    if prob > 0:
        choi /= prob
    return choi, prob


def ideal_choi() -> np.ndarray:
    u = _ideal_unitary()
    choi = np.zeros((16, 16), dtype=complex)
    for i in range(4):
        for j in range(4):
            choi[i * 4 : i * 4 + 4, j * 4 : j * 4 + 4] = np.outer(u[:, i], u[:, j].conj())
    return choi


@dataclass
class BranchResult:
    outcomes: tuple[int, int, int]
    probability: float
    error: float
    ok: bool

    def to_json(self) -> dict:
        return {"outcomes": list(self.outcomes), "probability": self.probability, "ok": self.ok}


@dataclass
class VerificationReport:
    protocol: str
    label: str
    passed: bool
    branches: list[BranchResult]

    @property
    def first_failure(self) -> BranchResult | None:
        return next((b for b in self.branches if not b.ok), None)

    def to_json(self) -> dict:
        out = {
            "protocol": self.protocol,
            "variant": self.label,
            "pass": self.passed,
            "branches": [b.to_json() for b in self.branches],
        }
        if self.first_failure is not None:
            out["first_failure"] = list(self.first_failure.outcomes)
        return out


def verify_protocol(p: ProtocolSpec, tol: float = TOL) -> VerificationReport:
    """Compare every branch's Choi matrix with the ideal (relocated) CNOT.

    The block structure of the Choi matrix fixes the global phase, so the
    comparison is entrywise.  A branch of zero probability fails as well,
    because every branch of a Pauli-measurement protocol must occur.
    """
    target = ideal_choi()
    total = 0.0
    results = []
    for outcomes in itertools.product((0, 1), repeat=3):
        choi, prob = branch_choi(p, outcomes)
        total += prob
        error = float(np.max(np.abs(choi - target))) if prob > tol else float("inf")
        results.append(BranchResult(outcomes, prob, error, error <= tol))
    passed = all(r.ok for r in results) and abs(total - 1.0) <= tol
    return VerificationReport(p.name.value, p.label, passed, results)


def verify_all(names: Sequence[str] = DEFAULT_PROTOCOLS) -> list[VerificationReport]:
    return [verify_protocol(PROTOCOLS[n]) for n in names]
