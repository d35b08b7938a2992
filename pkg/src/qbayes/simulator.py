"""Dense statevector simulation.

Amplitudes live in a complex128 array of length ``2**n``; qubit ``i`` is
bit ``i`` of the basis index. Kernels work on cached index arrays built
from bit masks, and accept arrays of shape ``(2**n, ...)`` so the same code
builds full unitaries column by column.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuit import CNOT, COMPILED, MCZ, MODES, RY, Circuit, Phase, X, expand_mcz
from .errors import CircuitError, MeasurementError, ResourceGuardError
from .rng import SeedLike, make_rng

DEFAULT_MAX_QUBITS = 25
BRANCH_GUARD = 1e-14


def max_qubits() -> int:
    """Width guard; ``QBAYES_MAX_QUBITS`` overrides the default of 25."""
    raw = os.environ.get("QBAYES_MAX_QUBITS")
    if raw is None:
        return DEFAULT_MAX_QUBITS
    try:
        return int(raw)
    except ValueError:
        raise ResourceGuardError(f"QBAYES_MAX_QUBITS must be an integer, got {raw!r}") from None


def check_width(width: int) -> None:
    limit = max_qubits()
    if width > limit:
        raise ResourceGuardError(f"{width} qubits exceeds the simulator guard of {limit}")


@dataclass(frozen=True)
class Statevector:
    width: int
    amps: np.ndarray

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))


@dataclass(frozen=True)
class MeasurementOutcome:
    qubits: tuple[int, ...]
    bits: tuple[int, ...]
    state: Statevector


def init(width: int) -> Statevector:
    check_width(width)
    amps = np.zeros(2**width, dtype=np.complex128)
    amps[0] = 1.0
    return Statevector(width, amps)


def from_amplitudes(amps, width: int | None = None) -> Statevector:
    amps = np.asarray(amps, dtype=np.complex128)
    w = int(round(np.log2(amps.size))) if width is None else width
    if amps.size != 2**w:
        raise CircuitError(f"{amps.size} amplitudes do not form a {w}-qubit state")
    return Statevector(w, amps.copy())


# ---------------------------------------------------------------------------
# Kernels


@lru_cache(maxsize=None)
def _pairs(n: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n, dtype=np.int64)
    low = idx[(idx >> q) & 1 == 0]
    return low, low | (1 << q)


@lru_cache(maxsize=None)
def _cnot_pairs(n: int, c: int, t: int) -> tuple[np.ndarray, np.ndarray]:
    idx = np.arange(2**n, dtype=np.int64)
    low = idx[((idx >> c) & 1 == 1) & ((idx >> t) & 1 == 0)]
    return low, low | (1 << t)


@lru_cache(maxsize=None)
def _all_ones(n: int, qs: tuple[int, ...]) -> np.ndarray:
    mask = sum(1 << q for q in qs)
    idx = np.arange(2**n, dtype=np.int64)
    return idx[(idx & mask) == mask]


def apply_gate(amps: np.ndarray, gate, n: int) -> None:
    """Apply one gate to ``amps`` in place."""
    if isinstance(gate, RY):
        i0, i1 = _pairs(n, gate.q)
        c, s = np.cos(gate.theta / 2), np.sin(gate.theta / 2)
        a0, a1 = amps[i0], amps[i1]
        amps[i0] = c * a0 - s * a1
        amps[i1] = s * a0 + c * a1
    elif isinstance(gate, X):
        i0, i1 = _pairs(n, gate.q)
        amps[i0], amps[i1] = amps[i1], amps[i0]
    elif isinstance(gate, CNOT):
        i0, i1 = _cnot_pairs(n, gate.c, gate.t)
        amps[i0], amps[i1] = amps[i1], amps[i0]
    elif isinstance(gate, Phase):
        _, i1 = _pairs(n, gate.q)
        amps[i1] *= np.exp(1j * gate.phi)
    elif isinstance(gate, MCZ):
        amps[_all_ones(n, gate.qs)] *= -1
    else:
        raise CircuitError(f"unknown gate {gate!r}")


def run(c: Circuit, amps: np.ndarray, mode: str = "primitive") -> np.ndarray:
    """Apply ``c`` to a raw amplitude array (in place) and return it."""
    if mode not in MODES:
        raise CircuitError(f"unknown mode {mode!r}")
    if mode == COMPILED:
        c = expand_mcz(c)
    for gate in c.gates:
        apply_gate(amps, gate, c.width)
    return amps


def apply(c: Circuit, psi: Statevector, mode: str = "primitive") -> Statevector:
    """Return ``c|psi>``; ``psi`` itself is left untouched."""
    if c.width != psi.width:
        raise CircuitError(f"circuit width {c.width} does not match state width {psi.width}")
    return Statevector(psi.width, run(c, psi.amps.copy(), mode))


def prepare(c: Circuit, mode: str = "primitive") -> Statevector:
    return apply(c, init(c.width), mode)


def unitary(c: Circuit, mode: str = "primitive") -> np.ndarray:
    """Dense matrix of ``c``; column ``j`` is ``c|j>``."""
    check_width(c.width)
    return run(c, np.eye(2**c.width, dtype=np.complex128), mode)


# ---------------------------------------------------------------------------
# Inspection and measurement


@lru_cache(maxsize=256)
def _keys(n: int, qubits: tuple[int, ...]) -> np.ndarray:
    # pattern of ``qubits`` for every basis index; shared, never mutate
    idx = np.arange(2**n, dtype=np.int64)
    key = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << j
    return key


def evidence_mass(psi: Statevector, qubits: Sequence[int], bits: Sequence[int]) -> float:
    """Total probability of basis states whose ``qubits`` read ``bits``."""
    qubits = tuple(qubits)
    if not qubits:
        return float(np.sum(psi.probabilities))
    target = sum(int(b) << j for j, b in enumerate(bits))
    keys = _keys(psi.width, qubits)
    return float(np.sum(psi.probabilities[keys == target]))


def outcome_distribution(psi: Statevector, qubits: Sequence[int]) -> np.ndarray:
    """Born probabilities of each pattern of ``qubits`` (pattern j -> bit j of index)."""
    qubits = tuple(qubits)
    keys = _keys(psi.width, qubits)
    return np.bincount(keys, weights=psi.probabilities, minlength=2 ** len(qubits))


def measure_subset(psi: Statevector, qubits: Sequence[int], seed: SeedLike) -> MeasurementOutcome:
    """Projectively measure ``qubits``; the post-state is renormalized."""
    qubits = tuple(qubits)
    rng = make_rng(seed)
    probs = outcome_distribution(psi, qubits)
    total = probs.sum()
    # inverse-CDF draw keeps the consumed randomness to one uniform per call
    k = int(np.searchsorted(np.cumsum(probs), rng.random() * total, side="right"))
    k = min(k, probs.size - 1)
    while probs[k] <= 0.0 and k > 0:
        k -= 1
    if probs[k] < BRANCH_GUARD:
        raise MeasurementError(f"measurement branch mass {probs[k]:.3e} below guard {BRANCH_GUARD}")
    keys = _keys(psi.width, qubits)
    post = np.where(keys == k, psi.amps, 0.0) / np.sqrt(probs[k])
    bits = tuple((k >> j) & 1 for j in range(len(qubits)))
    return MeasurementOutcome(qubits, bits, Statevector(psi.width, post))
