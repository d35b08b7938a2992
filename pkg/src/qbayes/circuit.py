"""Gate-level intermediate representation.

A :class:`Circuit` is an immutable width plus an ordered tuple of gates,
listed in time order (first gate acts first). Gates:

* ``RY(q, theta)``   rotation ``exp(-i theta Y / 2)``
* ``X(q)``           bit flip
* ``CNOT(c, t)``
* ``Phase(q, phi)``  ``diag(1, e^{i phi})``; only produced by MCZ expansion
* ``MCZ(qs)``        phase -1 iff every qubit in ``qs`` is 1 (``Z`` for one qubit)

``MCZ`` is kept as a single IR node. :func:`expand_mcz` rewrites it into
the other four primitives without ancillas, using O(k^2) gates for ``k``
qubits; :func:`gate_count` in ``"compiled"`` mode counts that expansion.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence, Union

from .errors import CircuitError

PRIMITIVE = "primitive"
COMPILED = "compiled"
MODES = (PRIMITIVE, COMPILED)


@dataclass(frozen=True)
class RY:
    q: int
    theta: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)


@dataclass(frozen=True)
class X:
    q: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)


@dataclass(frozen=True)
class CNOT:
    c: int
    t: int

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.c, self.t)


@dataclass(frozen=True)
class Phase:
    q: int
    phi: float

    @property
    def qubits(self) -> tuple[int, ...]:
        return (self.q,)


@dataclass(frozen=True)
class MCZ:
    qs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qs", tuple(sorted(self.qs)))
        if not self.qs:
            raise CircuitError("MCZ needs at least one qubit")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.qs


Gate = Union[RY, X, CNOT, Phase, MCZ]


def _check_gate(gate: Gate, width: int) -> None:
    qs = gate.qubits
    if len(set(qs)) != len(qs):
        raise CircuitError(f"repeated qubit in {gate}")
    for q in qs:
        if not 0 <= q < width:
            raise CircuitError(f"{gate} addresses qubit {q} outside width {width}")


@dataclass(frozen=True)
class Circuit:
    width: int
    gates: tuple[Gate, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.width < 0:
            raise CircuitError("negative width")
        for gate in self.gates:
            _check_gate(gate, self.width)

    def __len__(self) -> int:
        return len(self.gates)

    def __iter__(self):
        return iter(self.gates)

    def append(self, *gates: Gate) -> "Circuit":
        return Circuit(self.width, self.gates + gates)


def concat(*circuits: Circuit) -> Circuit:
    """Run ``circuits`` one after another."""
    if not circuits:
        raise CircuitError("concat needs at least one circuit")
    width = circuits[0].width
    gates: list[Gate] = []
    for c in circuits:
        if c.width != width:
            raise CircuitError(f"width mismatch: {width} vs {c.width}")
        gates.extend(c.gates)
    return Circuit(width, tuple(gates))


def _inverse_gate(gate: Gate) -> Gate:
    if isinstance(gate, RY):
        return RY(gate.q, -gate.theta)
    if isinstance(gate, Phase):
        return Phase(gate.q, -gate.phi)
    return gate


def inverse(c: Circuit) -> Circuit:
    return Circuit(c.width, tuple(_inverse_gate(g) for g in reversed(c.gates)))


# ---------------------------------------------------------------------------
# Ancilla-free MCZ expansion


def _ccz(a: int, b: int, t: int) -> list[Gate]:
    # phase polynomial pi/4 * [a + b + t - (a^b) - (a^t) - (b^t) + (a^b^t)] = pi*a*b*t
    q = math.pi / 4
    return [
        CNOT(b, t), Phase(t, -q), CNOT(a, t), Phase(t, q), CNOT(b, t), Phase(t, -q),
        CNOT(a, t), Phase(b, q), Phase(t, q), CNOT(a, b), Phase(a, q), Phase(b, -q), CNOT(a, b),
    ]


def _toffoli(a: int, b: int, t: int) -> list[Gate]:
    # X = RY(pi/2) Z RY(-pi/2), so conjugating CCZ on the target gives CCX exactly
    return [RY(t, -math.pi / 2), *_ccz(a, b, t), RY(t, math.pi / 2)]


def _mcx_vchain(controls: Sequence[int], target: int, dirty: Sequence[int]) -> list[Gate]:
    # m controls, m-2 borrowed qubits in arbitrary states; 4(m-2) Toffolis
    m = len(controls)
    anc = list(dirty[: m - 2])
    top = _toffoli(controls[-1], anc[-1], target)
    down = []
    for j in range(m - 3, 0, -1):
        down += _toffoli(controls[j + 1], anc[j - 1], anc[j])
    middle = _toffoli(controls[0], controls[1], anc[0])
    up = []
    for j in range(1, m - 2):
        up += _toffoli(controls[j + 1], anc[j - 1], anc[j])
    ladder = down + middle + up
    return top + ladder + top + ladder


def mcx(controls: Sequence[int], target: int, dirty: Sequence[int] = ()) -> list[Gate]:
    """Multi-controlled X using only borrowed (dirty, restored) qubits.

    Needs at least one borrowed qubit once there are more than two controls.
    """
    controls = list(controls)
    m = len(controls)
    if m == 0:
        return [X(target)]
    if m == 1:
        return [CNOT(controls[0], target)]
    if m == 2:
        return _toffoli(controls[0], controls[1], target)
    if len(dirty) >= m - 2:
        return _mcx_vchain(controls, target, dirty)
    if not dirty:
        raise CircuitError(f"C^{m}X needs a borrowed qubit")
    # split the controls; each half borrows the other half
    b = dirty[0]
    m1 = (m + 1) // 2
    g1, g2 = controls[:m1], controls[m1:]
    first = mcx(g1, b, g2 + [target] + list(dirty[1:]))
    second = mcx(g2 + [b], target, g1 + list(dirty[1:]))
    return first + second + first + second


def _controlled_phase(a: int, b: int, phi: float) -> list[Gate]:
    return [Phase(a, phi / 2), Phase(b, phi / 2), CNOT(a, b), Phase(b, -phi / 2), CNOT(a, b)]


def _mc_phase(qs: Sequence[int], phi: float) -> list[Gate]:
    """Phase ``e^{i phi}`` on the all-ones pattern of ``qs``, no extra qubits."""
    qs = list(qs)
    if len(qs) == 1:
        return [Phase(qs[0], phi)]
    if len(qs) == 2:
        return _controlled_phase(qs[0], qs[1], phi)
    *rest, c, t = qs
    # phi*c*t/2 - phi*(c^r)*t/2 + phi*r*t/2 = phi*c*r*t  with r = AND(rest)
    flip = mcx(rest, c, [t])
    return (
        _controlled_phase(c, t, phi / 2)
        + flip
        + _controlled_phase(c, t, -phi / 2)
        + flip
        + _mc_phase(rest + [t], phi / 2)
    )


@lru_cache(maxsize=None)
def _mcz_expansion(qs: tuple[int, ...]) -> tuple[Gate, ...]:
    return tuple(_mc_phase(qs, math.pi))


def expand_mcz(c: Circuit) -> Circuit:
    """Replace every MCZ with its ancilla-free primitive expansion."""
    gates: list[Gate] = []
    for gate in c.gates:
        if isinstance(gate, MCZ):
            gates.extend(_mcz_expansion(gate.qs))
        else:
            gates.append(gate)
    return Circuit(c.width, tuple(gates))


# ---------------------------------------------------------------------------
# Counting


@dataclass(frozen=True)
class GateCount:
    cnot: int = 0
    roty: int = 0
    x: int = 0
    phase: int = 0
    mcz_primitive: int = 0

    @property
    def total_primitive(self) -> int:
        return self.cnot + self.roty + self.x + self.phase + self.mcz_primitive

    def __add__(self, other: "GateCount") -> "GateCount":
        return GateCount(
            self.cnot + other.cnot,
            self.roty + other.roty,
            self.x + other.x,
            self.phase + other.phase,
            self.mcz_primitive + other.mcz_primitive,
        )

    def scale(self, k: int) -> "GateCount":
        return GateCount(k * self.cnot, k * self.roty, k * self.x, k * self.phase, k * self.mcz_primitive)

    def as_dict(self) -> dict[str, int]:
        return {
            "cnot": self.cnot,
            "roty": self.roty,
            "x": self.x,
            "phase": self.phase,
            "mcz": self.mcz_primitive,
            "total": self.total_primitive,
        }


def _tally(gates: Iterable[Gate]) -> GateCount:
    counts = {RY: 0, X: 0, CNOT: 0, Phase: 0, MCZ: 0}
    for gate in gates:
        counts[type(gate)] += 1
    return GateCount(counts[CNOT], counts[RY], counts[X], counts[Phase], counts[MCZ])


@lru_cache(maxsize=None)
def _mcz_cost(k: int) -> GateCount:
    return _tally(_mcz_expansion(tuple(range(k))))


def gate_count(c: Circuit, mode: str = COMPILED) -> GateCount:
    """Gate counts; in compiled mode each MCZ contributes its expansion."""
    if mode not in MODES:
        raise CircuitError(f"unknown mode {mode!r}")
    plain = _tally(g for g in c.gates if not isinstance(g, MCZ))
    mczs = [g for g in c.gates if isinstance(g, MCZ)]
    if mode == PRIMITIVE:
        return plain + GateCount(mcz_primitive=len(mczs))
    total = plain
    for gate in mczs:
        total = total + _mcz_cost(len(gate.qs))
    return total


# ---------------------------------------------------------------------------
# JSON-lines dump


def _gate_line(gate: Gate) -> str:
    if isinstance(gate, RY):
        return f'{{"g":"RY","q":{gate.q},"theta":{gate.theta + 0.0:.10f}}}'
    if isinstance(gate, X):
        return f'{{"g":"X","q":{gate.q}}}'
    if isinstance(gate, CNOT):
        return f'{{"g":"CNOT","c":{gate.c},"t":{gate.t}}}'
    if isinstance(gate, Phase):
        return f'{{"g":"P","q":{gate.q},"phi":{gate.phi + 0.0:.10f}}}'
    return '{"g":"MCZ","qs":[' + ",".join(str(q) for q in gate.qs) + "]}"


def dump(c: Circuit) -> str:
    """One JSON object per gate, one gate per line, angles to 10 decimals."""
    return "".join(_gate_line(g) + "\n" for g in c.gates)


def load(text: str, width: int) -> Circuit:
    gates: list[Gate] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            kind = rec["g"]
            if kind == "RY":
                gates.append(RY(int(rec["q"]), float(rec["theta"])))
            elif kind == "X":
                gates.append(X(int(rec["q"])))
            elif kind == "CNOT":
                gates.append(CNOT(int(rec["c"]), int(rec["t"])))
            elif kind == "P":
                gates.append(Phase(int(rec["q"]), float(rec["phi"])))
            elif kind == "MCZ":
                gates.append(MCZ(tuple(int(q) for q in rec["qs"])))
            else:
                raise CircuitError(f"unknown gate kind {kind!r}")
        except (KeyError, TypeError, ValueError) as exc:
            raise CircuitError(f"line {lineno}: {exc}") from None
    return Circuit(width, tuple(gates))
