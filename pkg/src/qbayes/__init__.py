"""Quantum rejection sampling on Bayesian networks.

Compile a network into its q-sample preparation circuit and Grover
reflections, simulate the sampler on a dense statevector, and compare it
with classical rejection sampling.
"""
from .bayesnet import (
    BayesNet,
    Distribution,
    NodeSpec,
    ancestral_sample,
    classical_rejection_sample,
    exact_inference,
    joint_probability,
    load_net,
    marginal_probability,
    parse_net,
)
from .circuit import CNOT, MCZ, RY, Circuit, GateCount, Phase, X, concat, expand_mcz, gate_count, inverse
from .compiler import (
    compile_grover,
    compile_phase_flip,
    compile_qsample,
    compile_qsample_general,
    compile_s0,
    decompose_ucry,
    rotation_angle,
)
from .inference import ScheduleConfig, SampleReport, batch_sample, quantum_sample, scaling_run
from .simulator import Statevector, apply, evidence_mass, init, measure_subset

__version__ = "0.1.0"
