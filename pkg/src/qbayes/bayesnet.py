"""Bayesian networks over binary variables.

Data model, JSON ingestion, the brute-force enumeration oracle and the
classical (ancestral + rejection) sampling baselines.

Conventions
-----------
Nodes are stored in a topological order; a node's position in that order
is its canonical index, and node ``i`` lives on qubit ``i`` / bit ``i`` of
a basis index. A node with parents ``(p_1, ..., p_k)`` (ascending canonical
index) keeps ``cpt[r] = P(node=1 | row r)`` with
``r = sum_j bit(p_j) * 2**(k - j)``, i.e. the first parent is the most
significant bit of the row.
"""
from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import ImpossibleEvidenceError, NetworkError, ResourceGuardError, SamplingBudgetError
from .rng import SeedLike, make_rng

ENUMERATION_GUARD = 25
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class NodeSpec:
    name: str
    parents: tuple[str, ...]
    cpt: tuple[float, ...]


@dataclass(frozen=True)
class BayesNet:
    """Immutable, validated network in canonical (topological) order.

    ``parent_index[i]`` lists the canonical indices of node ``i``'s parents in
    CPT row order. ``input_order`` maps each name to its position in the
    source file.
    """

    nodes: tuple[NodeSpec, ...]
    parent_index: tuple[tuple[int, ...], ...]
    index: Mapping[str, int]
    input_order: Mapping[str, int] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.nodes)

    @property
    def names(self) -> list[str]:
        return [node.name for node in self.nodes]

    @property
    def max_indegree(self) -> int:
        return max((len(p) for p in self.parent_index), default=0)

    def indegrees(self) -> list[int]:
        return [len(p) for p in self.parent_index]

    def row(self, i: int, bits: Sequence[int]) -> int:
        """CPT row of node ``i`` given a full assignment ``bits``."""
        r = 0
        for p in self.parent_index[i]:
            r = (r << 1) | int(bits[p])
        return r

    def resolve(self, names: Iterable[str]) -> list[int]:
        out = []
        for name in names:
            if name not in self.index:
                raise NetworkError(f"unknown node {name!r}")
            out.append(self.index[name])
        return out

    def to_json(self) -> str:
        payload = {
            "nodes": [
                {"name": node.name, "parents": list(node.parents), "cpt": list(node.cpt)}
                for node in self.nodes
            ]
        }
        return json.dumps(payload)


def build_net(specs: Sequence[NodeSpec | Mapping]) -> BayesNet:
    """Validate node specs and normalize them into topological order.

    Ties in the topological sort are broken by input position, so a file that
    is already topologically sorted keeps its order.
    """
    nodes: list[NodeSpec] = []
    for raw in specs:
        if isinstance(raw, NodeSpec):
            nodes.append(raw)
            continue
        try:
            name = raw["name"]
            parents = tuple(raw.get("parents", ()))
            cpt = tuple(float(p) for p in raw["cpt"])
        except (KeyError, TypeError, ValueError) as exc:
            raise NetworkError(f"malformed node entry {raw!r}: {exc}") from None
        if not isinstance(name, str) or not all(isinstance(p, str) for p in parents):
            raise NetworkError(f"node and parent names must be strings: {raw!r}")
        nodes.append(NodeSpec(name, parents, cpt))

    position: dict[str, int] = {}
    for pos, node in enumerate(nodes):
        if node.name in position:
            raise NetworkError(f"duplicate node name {node.name!r}")
        position[node.name] = pos
    for node in nodes:
        if len(set(node.parents)) != len(node.parents):
            raise NetworkError(f"node {node.name!r} lists a parent twice")
        for parent in node.parents:
            if parent not in position:
                raise NetworkError(f"node {node.name!r} references unknown parent {parent!r}")
            if parent == node.name:
                raise NetworkError(f"cycle detected: {node.name!r} is its own parent")
        k = len(node.parents)
        if len(node.cpt) != 2**k:
            raise NetworkError(
                f"node {node.name!r} has {k} parents and needs {2**k} CPT entries, got {len(node.cpt)}"
            )
        for p in node.cpt:
            if not (0.0 <= p <= 1.0) or math.isnan(p):
                raise NetworkError(f"node {node.name!r} has probability {p} outside [0, 1]")

    # Kahn's algorithm, smallest input position first
    children: dict[str, list[str]] = {node.name: [] for node in nodes}
    pending = {node.name: len(node.parents) for node in nodes}
    for node in nodes:
        for parent in node.parents:
            children[parent].append(node.name)
    heap = [position[name] for name, deg in pending.items() if deg == 0]
    heapq.heapify(heap)
    order: list[str] = []
    while heap:
        name = nodes[heapq.heappop(heap)].name
        order.append(name)
        for child in children[name]:
            pending[child] -= 1
            if pending[child] == 0:
                heapq.heappush(heap, position[child])
    if len(order) != len(nodes):
        stuck = sorted(set(position) - set(order), key=position.__getitem__)
        raise NetworkError(f"cycle detected among nodes {stuck}")

    index = {name: i for i, name in enumerate(order)}
    canonical: list[NodeSpec] = []
    parent_index: list[tuple[int, ...]] = []
    for name in order:
        node = nodes[position[name]]
        parents = tuple(sorted(node.parents, key=index.__getitem__))
        canonical.append(NodeSpec(name, parents, node.cpt))
        parent_index.append(tuple(index[p] for p in parents))
    return BayesNet(tuple(canonical), tuple(parent_index), index, dict(position))


def parse_net(text: str) -> BayesNet:
    """Parse the JSON network format ``{"nodes": [{name, parents, cpt}, ...]}``."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise NetworkError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict) or not isinstance(payload.get("nodes"), list):
        raise NetworkError('network file must be an object with a "nodes" list')
    return build_net(payload["nodes"])


def load_net(path) -> BayesNet:
    with open(path, encoding="utf-8") as fh:
        return parse_net(fh.read())


# ---------------------------------------------------------------------------
# Probabilities


def _bits_from_assignment(net: BayesNet, x) -> list[int]:
    if isinstance(x, Mapping):
        bits = [None] * net.n
        for key, value in x.items():
            i = net.index[key] if isinstance(key, str) else int(key)
            bits[i] = int(value)
        if any(b is None for b in bits):
            missing = [net.nodes[i].name for i, b in enumerate(bits) if b is None]
            raise NetworkError(f"incomplete assignment, missing {missing}")
        return bits
    bits = [int(b) for b in x]
    if len(bits) != net.n:
        raise NetworkError(f"incomplete assignment: expected {net.n} bits, got {len(bits)}")
    return bits


def joint_probability(net: BayesNet, x) -> float:
    """Product of CPT lookups for a full assignment.

    ``x`` is either a sequence of bits in canonical order or a mapping from
    node name (or canonical index) to bit.
    """
    bits = _bits_from_assignment(net, x)
    prob = 1.0
    for i, node in enumerate(net.nodes):
        p1 = node.cpt[net.row(i, bits)]
        prob *= p1 if bits[i] else 1.0 - p1
    return prob


def joint_table(net: BayesNet) -> np.ndarray:
    """All ``2**n`` joint probabilities, indexed by basis index (bit i = node i)."""
    if net.n > ENUMERATION_GUARD:
        raise ResourceGuardError(f"enumeration over {net.n} nodes exceeds guard {ENUMERATION_GUARD}")
    idx = np.arange(2**net.n, dtype=np.int64)
    table = np.ones(idx.shape, dtype=float)
    for i, node in enumerate(net.nodes):
        row = np.zeros_like(idx)
        for p in net.parent_index[i]:
            row = (row << 1) | ((idx >> p) & 1)
        p1 = np.asarray(node.cpt, dtype=float)[row]
        table *= np.where((idx >> i) & 1, p1, 1.0 - p1)
    return table


def _evidence_mask(net: BayesNet, evidence: Mapping[int, int], idx: np.ndarray) -> np.ndarray:
    keep = np.ones(idx.shape, dtype=bool)
    for i, bit in evidence.items():
        keep &= ((idx >> i) & 1) == bit
    return keep


def normalize_evidence(net: BayesNet, evidence) -> dict[int, int]:
    """Map ``{name or index: bit}`` to ``{canonical index: bit}`` with validation."""
    out: dict[int, int] = {}
    for key, value in dict(evidence or {}).items():
        i = net.resolve([key])[0] if isinstance(key, str) else int(key)
        if not 0 <= i < net.n:
            raise NetworkError(f"evidence index {i} out of range")
        if value not in (0, 1, True, False):
            raise NetworkError(f"evidence bit for {net.nodes[i].name!r} must be 0 or 1, got {value!r}")
        out[i] = int(value)
    return dict(sorted(out.items()))


def normalize_query(net: BayesNet, query, evidence: Mapping[int, int]) -> list[int]:
    """Canonical indices of the query set; ``None`` means every non-evidence node."""
    if query is None:
        return [i for i in range(net.n) if i not in evidence]
    out = sorted({net.resolve([q])[0] if isinstance(q, str) else int(q) for q in query})
    clash = [net.nodes[i].name for i in out if i in evidence]
    if clash:
        raise NetworkError(f"query and evidence overlap on {clash}")
    return out


def marginal_probability(net: BayesNet, evidence) -> float:
    """P(e): the joint summed over every non-evidence node."""
    ev = normalize_evidence(net, evidence)
    table = joint_table(net)
    idx = np.arange(table.size, dtype=np.int64)
    return float(table[_evidence_mask(net, ev, idx)].sum())


@dataclass(frozen=True)
class Distribution:
    """P(Q | e) keyed by the tuple of query bits (query nodes in canonical order)."""

    query: tuple[int, ...]
    support: Mapping[tuple[int, ...], float]

    def prob(self, bits) -> float:
        return self.support.get(tuple(int(b) for b in bits), 0.0)

    def as_vector(self) -> np.ndarray:
        """Probabilities indexed by ``sum_j bits[j] << j``."""
        vec = np.zeros(2 ** len(self.query))
        for bits, p in self.support.items():
            vec[sum(b << j for j, b in enumerate(bits))] = p
        return vec


def exact_inference(net: BayesNet, query, evidence) -> Distribution:
    """Brute-force P(Q | E=e) by enumerating all 2**n assignments."""
    ev = normalize_evidence(net, evidence)
    q = normalize_query(net, query, ev)
    table = joint_table(net)
    idx = np.arange(table.size, dtype=np.int64)
    keep = _evidence_mask(net, ev, idx)
    p_e = float(table[keep].sum())
    if p_e <= 0.0:
        raise ImpossibleEvidenceError("evidence has probability zero")
    key = np.zeros_like(idx)
    for j, i in enumerate(q):
        key |= ((idx >> i) & 1) << j
    mass = np.bincount(key[keep], weights=table[keep], minlength=2 ** len(q))
    mass = mass / mass.sum()
    support = {
        tuple((k >> j) & 1 for j in range(len(q))): float(mass[k]) for k in range(mass.size)
    }
    return Distribution(tuple(q), support)


# ---------------------------------------------------------------------------
# Classical sampling


def ancestral_batch(net: BayesNet, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` ancestral draws as a ``(count, n)`` 0/1 array."""
    out = np.zeros((count, net.n), dtype=np.int8)
    for i, node in enumerate(net.nodes):
        row = np.zeros(count, dtype=np.int64)
        for p in net.parent_index[i]:
            row = (row << 1) | out[:, p]
        p1 = np.asarray(node.cpt, dtype=float)[row]
        out[:, i] = rng.random(count) < p1
    return out


def ancestral_sample(net: BayesNet, seed: SeedLike) -> tuple[int, ...]:
    """One full assignment drawn top-down through the network."""
    rng = make_rng(seed)
    bits = [0] * net.n
    for i, node in enumerate(net.nodes):
        bits[i] = int(rng.random() < node.cpt[net.row(i, bits)])
    return tuple(bits)


@dataclass
class RejectionReport:
    """Accepted samples of a classical rejection run plus its cost counters.

    ``draws`` counts ancestral draws up to and including the last accepted
    one; each draw performs ``n`` CPT lookups and inspects ``sum_i m_i``
    parents.
    """

    query: tuple[int, ...]
    samples: list[tuple[int, ...]]
    draws: int
    cpt_lookups: int
    parent_inspections: int
    draws_per_sample: list[int]

    @property
    def mean_draws(self) -> float:
        return self.draws / len(self.samples) if self.samples else 0.0


def classical_rejection_sample(
    net: BayesNet,
    query,
    evidence,
    count: int,
    seed: SeedLike,
    max_draws: int = 10_000_000,
    batch: int = 4096,
) -> RejectionReport:
    """Rejection sampling: ancestral draws, keeping those that match ``e``.

    Raises :class:`SamplingBudgetError` when ``max_draws`` draws yield fewer
    than ``count`` accepted samples.
    """
    ev = normalize_evidence(net, evidence)
    q = normalize_query(net, query, ev)
    rng = make_rng(seed)
    ev_idx = np.array(list(ev), dtype=np.int64)
    ev_bits = np.array(list(ev.values()), dtype=np.int8)
    inspections = sum(net.indegrees())

    samples: list[tuple[int, ...]] = []
    per_sample: list[int] = []
    draws = 0
    last = -1  # global position of the previous accepted draw
    while len(samples) < count:
        if draws >= max_draws:
            partial = RejectionReport(tuple(q), samples, draws, draws * net.n, draws * inspections, per_sample)
            raise SamplingBudgetError(
                f"draw budget of {max_draws} exhausted after {len(samples)}/{count} accepted samples",
                partial,
            )
        size = min(batch, max_draws - draws)
        block = ancestral_batch(net, size, rng)
        ok = np.all(block[:, ev_idx] == ev_bits, axis=1) if ev else np.ones(size, dtype=bool)
        used = size
        for pos in np.flatnonzero(ok):
            here = draws + int(pos)
            samples.append(tuple(int(b) for b in block[pos, q]))
            per_sample.append(here - last)
            last = here
            if len(samples) == count:
                used = int(pos) + 1
                break
        draws += used
    return RejectionReport(tuple(q), samples, draws, draws * net.n, draws * inspections, per_sample)


def random_network(
    rng: np.random.Generator,
    n: int,
    max_indegree: int,
    *,
    cpt_low: float = 0.0,
    cpt_high: float = 1.0,
) -> BayesNet:
    """Random DAG on ``n`` nodes; node ``i`` draws up to ``max_indegree`` earlier parents."""
    specs = []
    for i in range(n):
        k = int(rng.integers(0, min(i, max_indegree) + 1))
        parents = sorted(rng.choice(i, size=k, replace=False).tolist()) if k else []
        cpt = rng.uniform(cpt_low, cpt_high, size=2**k)
        specs.append(NodeSpec(f"X{i}", tuple(f"X{p}" for p in parents), tuple(float(c) for c in cpt)))
    return build_net(specs)
