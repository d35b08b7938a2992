import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qbayes import bayesnet, compiler, inference, simulator
from qbayes.errors import NetworkError, SamplingBudgetError
from qbayes.inference import PAPER, RANDOMIZED, ScheduleConfig

from conftest import brute_conditional, empirical, random_evidence_case, tv_distance


def certain_net():
    return bayesnet.parse_net(
        '{"nodes":[{"name":"A","parents":[],"cpt":[1.0]},{"name":"B","parents":["A"],"cpt":[0.3,0.6]}]}'
    )


class TestSchedule:
    def test_doubling_schedule(self):
        rng = np.random.default_rng(0)
        cfg = ScheduleConfig(PAPER)
        assert [cfg.iterations(k, rng) for k in range(5)] == [1, 2, 4, 8, 16]

    def test_randomized_range(self):
        rng = np.random.default_rng(0)
        for growth in (1.2, 2.0):
            cfg = ScheduleConfig(RANDOMIZED, growth=growth)
            assert cfg.iterations(0, rng) == 0
            for k in range(1, 12):
                draws = [cfg.iterations(k, rng) for _ in range(200)]
                assert 0 <= min(draws) and max(draws) < math.ceil(growth**k)

    def test_growth_two_covers_full_range(self):
        rng = np.random.default_rng(1)
        cfg = ScheduleConfig(RANDOMIZED, growth=2.0)
        assert {cfg.iterations(3, rng) for _ in range(500)} == set(range(8))

    @pytest.mark.parametrize(
        "kwargs", [{"mode": "fast"}, {"max_rounds": 0}, {"max_restarts": -1}, {"growth": 1.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            ScheduleConfig(**kwargs)


class TestAmplifier:
    def test_states_follow_closed_form(self, seven_net):
        ev = {4: 1, 6: 0}
        qubits, bits = compiler.evidence_register(seven_net, ev)
        amp = inference.Amplifier(compiler.compile_qsample(seven_net), qubits, bits)
        p = bayesnet.marginal_probability(seven_net, ev)
        # out of order and with a dense-power jump
        for n_iter in (3, 1, 0, 7, 5000, 2):
            mass = simulator.evidence_mass(amp.state(n_iter), qubits, bits)
            assert mass == pytest.approx(math.sin((2 * n_iter + 1) * math.asin(math.sqrt(p))) ** 2, abs=1e-8)

    def test_compiled_mode_same_states(self, two_net):
        prep = compiler.compile_qsample(two_net)
        a = inference.Amplifier(prep, (1,), (1,), "primitive")
        b = inference.Amplifier(prep, (1,), (1,), "compiled")
        for n_iter in (0, 1, 4):
            np.testing.assert_allclose(a.state(n_iter).amps, b.state(n_iter).amps, atol=1e-10)


class TestQuantumSample:
    def test_quarter_round_zero(self):
        net = bayesnet.parse_net(
            '{"nodes":[{"name":"A","parents":[],"cpt":[0.25]},{"name":"B","parents":["A"],"cpt":[0.4,0.9]}]}'
        )
        for seed in range(30):
            _, cost = inference.quantum_sample(net, ["B"], {"A": 1}, ScheduleConfig(PAPER), seed)
            assert (cost.rounds, cost.grover, cost.a_applications) == (1, 1, 3)

    def test_certain_evidence_costs(self):
        net = certain_net()
        _, cost = inference.quantum_sample(net, ["B"], {"A": 1}, ScheduleConfig(RANDOMIZED), 0)
        assert cost.a_applications == 1

    def test_needs_evidence(self, two_net):
        with pytest.raises(NetworkError):
            inference.quantum_sample(two_net, ["A"], {}, seed=0)

    def test_empty_query(self, two_net):
        sample, _ = inference.quantum_sample(two_net, [], {"A": 1, "B": 1}, seed=0)
        assert sample == ()

    def test_seeded(self, seven_net):
        a = inference.quantum_sample(seven_net, None, {"X6": 1}, seed=4)
        b = inference.quantum_sample(seven_net, None, {"X6": 1}, seed=4)
        assert a == b

    def test_budget(self):
        net = bayesnet.parse_net('{"nodes":[{"name":"A","parents":[],"cpt":[0.0]},{"name":"B","parents":[],"cpt":[0.5]}]}')
        cfg = ScheduleConfig(PAPER, max_rounds=3, max_restarts=2)
        with pytest.raises(SamplingBudgetError) as info:
            inference.quantum_sample(net, ["B"], {"A": 1}, cfg, seed=0)
        cost = info.value.partial
        assert cost.rounds == 9 and cost.grover == 3 * (1 + 2 + 4)


class TestBatch:
    def test_zero_count(self, two_net):
        rep = inference.batch_sample(two_net, ["A"], {"B": 1}, 0, seed=0)
        assert rep.samples == [] and rep.total("a_applications") == 0
        assert rep.cost_summary()["mean_a_applications"] == 0.0

    def test_certain_evidence_grover_total(self):
        rep = inference.batch_sample(certain_net(), ["B"], {"A": 1}, 100, ScheduleConfig(PAPER), seed=0)
        assert rep.total("grover") == 100
        assert rep.total("rounds") == 100

    def test_posterior(self, two_net):
        rep = inference.batch_sample(two_net, ["A"], {"B": 1}, 10_000, seed=1)
        assert tv_distance(empirical(rep.samples), {(0,): 15 / 23, (1,): 8 / 23}) < 0.05

    def test_deterministic(self, seven_net):
        runs = [inference.batch_sample(seven_net, None, {"X5": 1}, 50, seed=3) for _ in range(2)]
        assert runs[0] == runs[1]

    def test_schedules_agree_on_distribution(self, seven_net):
        ev = {"X2": 0, "X6": 1}
        query = [0, 2, 4]
        exact = brute_conditional(seven_net, query, {1: 0, 5: 1})
        for mode in (PAPER, RANDOMIZED):
            rep = inference.batch_sample(seven_net, query, ev, 4000, ScheduleConfig(mode), seed=11)
            assert tv_distance(empirical(rep.samples), exact) < 0.05

    def test_chain_cost_scale(self):
        net, query, ev = inference.chain_family(6)
        target = math.pi / (4 * math.sqrt(2.0**-6))
        for mode in (PAPER, RANDOMIZED):
            rep = inference.batch_sample(net, query, ev, 1000, ScheduleConfig(mode), seed=1)
            assert target / 4 <= rep.mean("a_applications") <= target * 4

    def test_evidence_always_holds(self, seven_net, monkeypatch):
        # every query measurement must act on a state that lies entirely on e
        ev = {"X1": 1, "X7": 0}
        qubits, bits = compiler.evidence_register(seven_net, ev)
        real = simulator.measure_subset
        masses = []

        def spy(psi, measured, seed):
            if tuple(measured) != qubits:
                masses.append(simulator.evidence_mass(psi, qubits, bits))
            return real(psi, measured, seed)

        monkeypatch.setattr(simulator, "measure_subset", spy)
        rep = inference.batch_sample(seven_net, None, ev, 300, seed=2)
        assert len(masses) == 300
        assert min(masses) == pytest.approx(1.0, abs=1e-12)
        assert len(rep.samples) == 300

    def test_partial_report(self):
        net = bayesnet.parse_net('{"nodes":[{"name":"A","parents":[],"cpt":[0.0]},{"name":"B","parents":[],"cpt":[0.5]}]}')
        with pytest.raises(SamplingBudgetError) as info:
            inference.batch_sample(net, ["B"], {"A": 1}, 5, ScheduleConfig(max_rounds=2, max_restarts=0), seed=0)
        assert info.value.partial.partial is True
        assert info.value.partial.samples == []

    def test_to_dict(self, two_net):
        rep = inference.batch_sample(two_net, ["A"], {"B": 1}, 3, seed=0)
        d = rep.to_dict()
        assert set(d) == {"samples", "cost", "config", "partial"}
        assert all(set(s) == {"A"} for s in d["samples"])
        assert {"mean_a_applications", "mean_grover", "mean_rounds"} <= set(d["cost"])

    @settings(max_examples=10, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_random_small_nets(self, seed):
        rng = np.random.default_rng(seed)
        net = bayesnet.random_network(rng, 5, 2, cpt_low=0.05, cpt_high=0.95)
        query, ev = random_evidence_case(rng, net)
        rep = inference.batch_sample(net, query, ev, 3000, ScheduleConfig(RANDOMIZED), seed=seed)
        assert tv_distance(empirical(rep.samples), brute_conditional(net, query, ev)) < 0.06


class TestScaling:
    def test_chain_family(self):
        for k in (1, 3):
            net, query, ev = inference.chain_family(k)
            assert net.n == k + 1
            assert bayesnet.marginal_probability(net, ev) == pytest.approx(2.0**-k)
        with pytest.raises(ValueError):
            inference.chain_family(0)

    def test_slope_helper(self):
        assert inference.loglog_slope([1.0], [2.0]) is None
        assert inference.loglog_slope([1, 2, 4], [3, 6, 12]) == pytest.approx(1.0)

    def test_single_point(self):
        res = inference.scaling_run(ks=[1], samples=50)
        assert res.classical_slope is None and res.quantum_slope is None
        assert len(res.points) == 1

    def test_certain_evidence_point(self):
        def family(_k):
            return certain_net(), ["B"], {"A": 1}

        res = inference.scaling_run(family, ks=[0], samples=100)
        assert res.points[0].classical_mean_draws == 1.0
        assert res.points[0].quantum_mean_a_applications == 1.0

    def test_deterministic(self):
        assert inference.scaling_run(ks=range(1, 4), samples=60, seed=5) == inference.scaling_run(
            ks=range(1, 4), samples=60, seed=5
        )
