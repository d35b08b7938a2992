"""Bayesian network -> q-sample preparation, reflections and Grover iterate.

Node ``i`` of a :class:`~qbayes.bayesnet.BayesNet` is qubit ``i``. Evidence
qubits are selected by index; nothing is ever physically permuted.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .bayesnet import BayesNet, normalize_evidence
from .circuit import CNOT, MCZ, RY, Circuit, Gate, X, concat, inverse
from .errors import CircuitError, NetworkError, ResourceGuardError

GENERAL_GUARD = 20


@dataclass(frozen=True)
class QubitLayout:
    """Node-to-qubit map. Identity under the canonical node order."""

    qubit_of: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> "QubitLayout":
        return cls(tuple(range(n)))

    def qubits(self, nodes: Sequence[int]) -> tuple[int, ...]:
        return tuple(self.qubit_of[i] for i in nodes)


def rotation_angle(p0: float, p1: float) -> float:
    """RY angle taking |0> to sqrt(p0)|0> + sqrt(p1)|1>."""
    if p0 < 0 or p1 < 0:
        raise ValueError(f"probabilities must be non-negative, got ({p0}, {p1})")
    if abs(p0 + p1 - 1.0) > 1e-9:
        raise ValueError(f"p0 + p1 must be 1, got {p0 + p1}")
    return 2.0 * math.atan2(math.sqrt(p1), math.sqrt(p0))


def gray(j: int) -> int:
    return j ^ (j >> 1)


def ucry_angles(angles: Sequence[float]) -> np.ndarray:
    """Solve ``theta_c = sum_j (-1)^{popcount(c & gray(j))} phi_j`` for ``phi``."""
    theta = np.asarray(angles, dtype=float)
    size = theta.size
    c = np.arange(size)
    signs = np.array([[(-1) ** bin(ci & gray(j)).count("1") for j in range(size)] for ci in c])
    # columns are distinct Walsh functions, so signs.T @ signs = size * I
    return signs.T @ theta / size


def decompose_ucry(angles: Sequence[float], controls: Sequence[int], target: int, width: int) -> Circuit:
    """Uniformly controlled RY as alternating RY / CNOT (Gray-code order).

    ``angles[r]`` applies when the controls read row ``r``, ``controls[0]``
    being the most significant bit. For ``k`` controls the result holds
    exactly ``2**k`` RY and ``2**k`` CNOT gates (a single RY when ``k == 0``).
    """
    k = len(controls)
    if len(angles) != 2**k:
        raise CircuitError(f"{k} controls need {2**k} angles, got {len(angles)}")
    if k == 0:
        return Circuit(width, (RY(target, float(angles[0])),))
    phi = ucry_angles(angles)
    size = 2**k
    gates: list[Gate] = []
    for j in range(size):
        gates.append(RY(target, float(phi[j])))
        bit = (gray(j) ^ gray((j + 1) % size)).bit_length() - 1
        # row bit b belongs to controls[k - 1 - b]
        gates.append(CNOT(controls[k - 1 - bit], target))
    return Circuit(width, tuple(gates))


def compile_qsample(net: BayesNet) -> Circuit:
    """Â_B: one uniformly controlled rotation per node, parents as controls."""
    blocks = []
    for i, node in enumerate(net.nodes):
        angles = [rotation_angle(1.0 - p, p) for p in node.cpt]
        blocks.append(decompose_ucry(angles, net.parent_index[i], i, net.n))
    return concat(Circuit(net.n), *blocks)


def compile_qsample_general(table: Sequence[float]) -> Circuit:
    """Â_P for an explicit joint table (basis index, bit i = variable i).

    Each variable is conditioned on every earlier one; contexts of zero
    probability get angle 0.
    """
    p = np.asarray(table, dtype=float)
    n = int(round(math.log2(p.size))) if p.size else 0
    if p.size != 2**n or n == 0:
        raise ValueError(f"table length {p.size} is not a positive power of two")
    if n > GENERAL_GUARD:
        raise ResourceGuardError(f"general preparation over {n} variables exceeds guard {GENERAL_GUARD}")
    if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("table must be non-negative and sum to 1")
    blocks = []
    for i in range(n):
        # marginal over variables 0..i, indexed by the low i+1 bits
        marg = p.reshape(-1, 2 ** (i + 1)).sum(axis=0)
        angles = []
        for row in range(2**i):
            # controls (0..i-1) with variable 0 most significant: reverse the bit order
            ctx = int(format(row, f"0{i}b")[::-1], 2) if i else 0
            p0, p1 = marg[ctx], marg[ctx | (1 << i)]
            tot = p0 + p1
            angles.append(rotation_angle(p0 / tot, p1 / tot) if tot > 0 else 0.0)
        blocks.append(decompose_ucry(angles, list(range(i)), i, n))
    return concat(Circuit(n), *blocks)


def compile_phase_flip(width: int, qubits: Sequence[int], bits: Sequence[int]) -> Circuit:
    """Ŝ_e: flip the sign of basis states whose ``qubits`` read ``bits``."""
    if not qubits:
        raise CircuitError("phase flip needs at least one evidence qubit")
    if len(qubits) != len(bits):
        raise CircuitError("one bit per evidence qubit")
    flips = tuple(X(q) for q, b in zip(qubits, bits) if not b)
    return Circuit(width, flips + (MCZ(tuple(qubits)),) + flips)


def compile_s0(width: int) -> Circuit:
    """Ŝ_0: sign flip on |0...0> only."""
    return compile_phase_flip(width, range(width), [0] * width)


def evidence_register(net: BayesNet, evidence) -> tuple[tuple[int, ...], tuple[int, ...]]:
    ev = normalize_evidence(net, evidence)
    if not ev:
        raise NetworkError("evidence must name at least one node")
    layout = QubitLayout.identity(net.n)
    return layout.qubits(list(ev)), tuple(ev.values())


def grover_from_prep(prep: Circuit, qubits: Sequence[int], bits: Sequence[int]) -> Circuit:
    """Ŝ_e, then Â†, Ŝ_0, Â in time order; the global -1 is dropped."""
    return concat(
        compile_phase_flip(prep.width, qubits, bits),
        inverse(prep),
        compile_s0(prep.width),
        prep,
    )


def compile_grover(net: BayesNet, evidence: Mapping) -> Circuit:
    qubits, bits = evidence_register(net, evidence)
    return grover_from_prep(compile_qsample(net), qubits, bits)
