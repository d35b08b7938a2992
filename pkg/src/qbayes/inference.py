"""Quantum rejection sampling with exponentially growing Grover rounds.

One sample is produced by repeated rounds: prepare Â|0>, apply Ĝ some
number of times, measure the evidence qubits, and stop once they read
``e``; the query qubits of the surviving state are then measured.

Two schedules pick the iterate count of round ``k`` (starting at 0):

``paper``
    exactly ``2**k`` iterates, so even the first round applies Ĝ once.
``randomized``
    a count drawn uniformly from ``[0, ceil(growth**k))``. With
    ``growth < 4/3`` the expected cost is O(P(e)^-1/2) with a light tail;
    ``growth=2`` reproduces plain randomized doubling.

After ``max_rounds`` failed rounds the schedule starts over from ``k=0``;
more than ``max_restarts`` such resets raise :class:`SamplingBudgetError`.

Cost is counted in applications of the preparation circuit Â: each round
costs one preparation plus two per Grover iterate (Â† and Â).
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import simulator
from .bayesnet import (
    BayesNet,
    NodeSpec,
    build_net,
    classical_rejection_sample,
    marginal_probability,
    normalize_evidence,
    normalize_query,
)
from .circuit import COMPILED, MODES, PRIMITIVE, Circuit, expand_mcz
from .compiler import compile_qsample, evidence_register, grover_from_prep
from .errors import NetworkError, SamplingBudgetError
from .rng import SeedLike, make_rng, split

PAPER = "paper"
RANDOMIZED = "randomized"

DENSE_WIDTH_LIMIT = 10
ITERATE_LIMIT = 2048


@dataclass(frozen=True)
class ScheduleConfig:
    mode: str = PAPER
    max_rounds: int = 30
    max_restarts: int = 8
    growth: float = 1.2

    def __post_init__(self):
        if self.mode not in (PAPER, RANDOMIZED):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.max_rounds <= 0 or self.max_restarts < 0:
            raise ValueError("max_rounds must be positive and max_restarts non-negative")
        if self.growth <= 1.0:
            raise ValueError("growth must exceed 1")

    def iterations(self, k: int, rng: np.random.Generator) -> int:
        if self.mode == PAPER:
            return 2**k
        return int(rng.integers(0, math.ceil(self.growth**k - 1e-12)))


@dataclass(frozen=True)
class SampleCost:
    rounds: int
    grover: int
    restarts: int = 0

    @property
    def a_applications(self) -> int:
        return self.rounds + 2 * self.grover


@dataclass
class SampleReport:
    query: tuple[int, ...]
    query_names: tuple[str, ...]
    evidence: dict[int, int]
    samples: list[tuple[int, ...]] = field(default_factory=list)
    costs: list[SampleCost] = field(default_factory=list)
    config: dict = field(default_factory=dict)
    partial: bool = False

    def total(self, name: str) -> int:
        return sum(getattr(c, name) for c in self.costs)

    def mean(self, name: str) -> float:
        return self.total(name) / len(self.costs) if self.costs else 0.0

    def cost_summary(self) -> dict:
        out = {}
        for name, key in (("a_applications", "a_applications"), ("grover", "grover"), ("rounds", "rounds")):
            out[f"mean_{key}"] = self.mean(name)
        for name in ("a_applications", "grover", "rounds", "restarts"):
            out[f"total_{name}"] = self.total(name)
        return out

    def to_dict(self) -> dict:
        return {
            "samples": [dict(zip(self.query_names, bits)) for bits in self.samples],
            "cost": self.cost_summary(),
            "config": self.config,
            "partial": self.partial,
        }


class Amplifier:
    """Caches ``Ĝ^N Â|0>`` for the iterate counts a sampler asks for.

    Short gaps are bridged by applying the Ĝ circuit gate by gate; long gaps
    on small registers use powers of the dense Ĝ matrix by repeated squaring.
    """

    def __init__(self, prep: Circuit, qubits: Sequence[int], bits: Sequence[int], mcz_mode: str = PRIMITIVE):
        if mcz_mode not in MODES:
            raise ValueError(f"unknown MCZ mode {mcz_mode!r}")
        self.prep = prep
        self.qubits = tuple(qubits)
        self.bits = tuple(int(b) for b in bits)
        self.mcz_mode = mcz_mode
        self.grover = grover_from_prep(prep, self.qubits, self.bits)
        if mcz_mode == COMPILED:
            self.grover = expand_mcz(self.grover)
        self.width = prep.width
        self._states: dict[int, np.ndarray] = {0: simulator.prepare(prep, mcz_mode).amps}
        self._powers: list[np.ndarray] = []

    def _power(self, j: int) -> np.ndarray:
        if not self._powers:
            self._powers.append(simulator.unitary(self.grover))
        while len(self._powers) <= j:
            last = self._powers[-1]
            self._powers.append(last @ last)
        return self._powers[j]

    def state(self, iterations: int) -> simulator.Statevector:
        if iterations not in self._states:
            start = max(m for m in self._states if m <= iterations)
            amps = self._states[start].copy()
            gap = iterations - start
            if gap > ITERATE_LIMIT and self.width <= DENSE_WIDTH_LIMIT:
                j = 0
                while gap:
                    if gap & 1:
                        amps = self._power(j) @ amps
                    gap >>= 1
                    j += 1
            else:
                for _ in range(gap):
                    simulator.run(self.grover, amps)
            self._states[iterations] = amps
        return simulator.Statevector(self.width, self._states[iterations])


def _setup(net: BayesNet, query, evidence):
    ev = normalize_evidence(net, evidence)
    if not ev:
        raise NetworkError("quantum sampling needs at least one evidence node")
    q = normalize_query(net, query, ev)
    return ev, q


def quantum_sample(
    net: BayesNet,
    query,
    evidence,
    schedule: ScheduleConfig | None = None,
    seed: SeedLike = None,
    *,
    mcz_mode: str = PRIMITIVE,
    amplifier: Amplifier | None = None,
) -> tuple[tuple[int, ...], SampleCost]:
    """Draw one sample of the query bits given ``evidence``.

    Pass ``amplifier`` to reuse simulated states across calls.
    """
    schedule = schedule or ScheduleConfig()
    ev, q = _setup(net, query, evidence)
    if amplifier is None:
        qubits, bits = evidence_register(net, ev)
        amplifier = Amplifier(compile_qsample(net), qubits, bits, mcz_mode)
    rng = make_rng(seed)
    rounds = grover = 0
    for restart in range(schedule.max_restarts + 1):
        for k in range(schedule.max_rounds):
            n_iter = schedule.iterations(k, rng)
            rounds += 1
            grover += n_iter
            psi = amplifier.state(n_iter)
            seen = simulator.measure_subset(psi, amplifier.qubits, rng)
            if seen.bits == amplifier.bits:
                sample = simulator.measure_subset(seen.state, q, rng).bits if q else ()
                return sample, SampleCost(rounds, grover, restart)
    raise SamplingBudgetError(
        f"no accepted sample after {schedule.max_restarts} restarts of {schedule.max_rounds} rounds",
        SampleCost(rounds, grover, schedule.max_restarts),
    )


def batch_sample(
    net: BayesNet,
    query,
    evidence,
    count: int,
    schedule: ScheduleConfig | None = None,
    seed: SeedLike = None,
    *,
    mcz_mode: str = PRIMITIVE,
) -> SampleReport:
    """``count`` independent quantum samples, one derived seed each.

    On a budget failure the raised error's ``partial`` is the report so far,
    flagged ``partial=True``.
    """
    schedule = schedule or ScheduleConfig()
    ev, q = _setup(net, query, evidence)
    report = SampleReport(
        tuple(q),
        tuple(net.nodes[i].name for i in q),
        ev,
        config={"method": "quantum", "mcz": mcz_mode, "count": count, **asdict(schedule)},
    )
    if count == 0:
        return report
    qubits, bits = evidence_register(net, ev)
    amplifier = Amplifier(compile_qsample(net), qubits, bits, mcz_mode)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    for child in split(root, count):
        try:
            sample, cost = quantum_sample(net, q, ev, schedule, child, amplifier=amplifier)
        except SamplingBudgetError as exc:
            report.partial = True
            raise SamplingBudgetError(str(exc), report) from None
        report.samples.append(sample)
        report.costs.append(cost)
    return report


# ---------------------------------------------------------------------------
# Scaling experiment


def chain_family(k: int) -> tuple[BayesNet, list[str], dict[str, int]]:
    """``k`` independent fair evidence nodes plus one query node.

    Evidence is all ones, so P(e) = 2**-k exactly. The query node depends on
    the first evidence node.
    """
    if k < 1:
        raise ValueError("chain family needs k >= 1")
    specs = [NodeSpec(f"E{j}", (), (0.5,)) for j in range(1, k + 1)]
    specs.append(NodeSpec("Q", ("E1",), (0.2, 0.7)))
    return build_net(specs), ["Q"], {f"E{j}": 1 for j in range(1, k + 1)}


@dataclass(frozen=True)
class ScalingPoint:
    k: int
    p_evidence: float
    classical_mean_draws: float
    quantum_mean_a_applications: float
    quantum_mean_grover: float


@dataclass(frozen=True)
class ScalingResult:
    points: tuple[ScalingPoint, ...]
    classical_slope: float | None
    quantum_slope: float | None


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Least-squares slope of log(y) against log(x); None with fewer than two points."""
    if len(x) < 2:
        return None
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def scaling_run(
    family: Callable[[int], tuple[BayesNet, list, dict]] = chain_family,
    ks: Sequence[int] = range(1, 7),
    samples: int = 500,
    seed: int = 0,
    schedule: ScheduleConfig | None = None,
    *,
    mcz_mode: str = PRIMITIVE,
) -> ScalingResult:
    """Mean classical draws and quantum Â applications per sample across P(e)."""
    schedule = schedule or ScheduleConfig(mode=RANDOMIZED)
    ks = list(ks)
    seeds = split(seed, 2 * len(ks))
    points = []
    for idx, k in enumerate(ks):
        net, query, evidence = family(k)
        p_e = marginal_probability(net, evidence)
        classical = classical_rejection_sample(net, query, evidence, samples, seeds[2 * idx])
        quantum = batch_sample(net, query, evidence, samples, schedule, seeds[2 * idx + 1], mcz_mode=mcz_mode)
        points.append(
            ScalingPoint(k, p_e, classical.mean_draws, quantum.mean("a_applications"), quantum.mean("grover"))
        )
    p = [pt.p_evidence for pt in points]
    return ScalingResult(
        tuple(points),
        loglog_slope(p, [pt.classical_mean_draws for pt in points]),
        loglog_slope(p, [pt.quantum_mean_a_applications for pt in points]),
    )
