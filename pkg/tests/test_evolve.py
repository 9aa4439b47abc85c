import math

import numpy as np
import pytest

from sqrsim.cd import CdOptions
from sqrsim.evolve import EvolutionTrace, Scheme, fidelity, population_summary, run
from sqrsim.numerics import IntegrationError
from sqrsim.sqr import PulseConfig, QubitState, make_gate, rotation_matrix

IDENTITY = dict(chi=math.pi / 8, eta=math.pi, delta=0.0)
PAULI_X = dict(chi=math.pi / 4, eta=math.pi, delta=math.pi)


def small_cfg(**kw):
    """Cheap configuration for reference-path comparisons."""
    defaults = dict(omega0=30.0, delta_cap=0.0, T=10.0, n_out=200)
    defaults.update(kw)
    return PulseConfig(**defaults)


def test_scheme_dimensions():
    assert Scheme.BARE.dim == 4
    assert Scheme.SC1.dim == 4
    assert Scheme.SC2.dim == 5


def test_fidelity_self_overlap():
    gate = make_gate(**PAULI_X)
    psi0 = QubitState.ground()
    target = np.zeros(4, dtype=complex)
    target[:2] = rotation_matrix(gate) @ psi0.as_array()
    assert math.isclose(fidelity(target, gate, psi0), 1.0, abs_tol=1e-15)


def test_fidelity_orthogonal_subspace():
    gate = make_gate(**IDENTITY)
    state = np.zeros(4, dtype=complex)
    state[2] = 1.0  # all weight on the auxiliary level
    assert fidelity(state, gate, QubitState.ground()) == 0.0


def test_fidelity_identity_gate():
    gate = make_gate(0.7, 0.3, 0.0)
    psi0 = QubitState(0.6, 0.8j)
    state = psi0.embed(5)
    assert math.isclose(fidelity(state, gate, psi0), 1.0, abs_tol=1e-15)


def test_fidelity_global_phase_invariant():
    gate = make_gate(**PAULI_X)
    psi0 = QubitState.ground()
    target = np.zeros(4, dtype=complex)
    target[:2] = rotation_matrix(gate) @ psi0.as_array()
    rotated = np.exp(1j * 0.913) * target
    assert math.isclose(fidelity(rotated, gate, psi0), 1.0, abs_tol=1e-14)


def test_run_populations_sum_to_one():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0)
    trace = run(Scheme.BARE, gate, cfg)
    sums = trace.populations.sum(axis=1)
    assert np.max(np.abs(sums - 1.0)) <= 1e-6
    assert trace.norm_drift <= 1e-6
    assert 0.0 <= trace.fidelity <= 1.0 + 1e-9
    assert trace.times.shape == (cfg.n_out,)
    assert trace.populations.shape == (cfg.n_out, 4)
    assert np.array_equal(trace.final_state, trace.states[-1])


def test_run_deterministic():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0)
    a = run(Scheme.SC1, gate, cfg)
    b = run(Scheme.SC1, gate, cfg)
    assert np.array_equal(a.states, b.states)
    assert a.fidelity == b.fidelity
    assert a.norm_drift == b.norm_drift


def test_fast_matches_reference_bare():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0, n_out=500)
    fast = run(Scheme.BARE, gate, cfg, method="fast")
    ref = run(Scheme.BARE, gate, cfg, method="reference")
    assert abs(fast.fidelity - ref.fidelity) <= 1e-7
    assert np.max(np.abs(fast.final_state - ref.final_state)) <= 1e-6


def test_fast_matches_reference_sc1():
    gate = make_gate(**PAULI_X)
    cfg = small_cfg()
    fast = run(Scheme.SC1, gate, cfg, method="fast")
    ref = run(Scheme.SC1, gate, cfg, method="reference")
    assert abs(fast.fidelity - ref.fidelity) <= 1e-6
    assert np.max(np.abs(fast.final_state - ref.final_state)) <= 1e-5


def test_fast_matches_reference_sc2():
    gate = make_gate(**PAULI_X)
    cfg = small_cfg(omega0=40.0, delta_cap=120.0, n_out=100)
    fast = run(Scheme.SC2, gate, cfg, method="fast")
    ref = run(Scheme.SC2, gate, cfg, method="reference")
    assert abs(fast.fidelity - ref.fidelity) <= 1e-5
    assert np.max(np.abs(fast.final_state - ref.final_state)) <= 1e-4


def test_adiabatic_limit_identity():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=2500.0, delta_cap=25000.0)
    trace = run(Scheme.BARE, gate, cfg)
    assert trace.fidelity > 0.99


def test_sc1_beats_bare_and_clears_auxiliary():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=25000.0)  # diabatic regime
    bare = run(Scheme.BARE, gate, cfg)
    sc1 = run(Scheme.SC1, gate, cfg)
    assert sc1.fidelity >= 0.98
    assert sc1.fidelity > bare.fidelity
    bare_rows = population_summary(bare)
    sc1_rows = population_summary(sc1)
    assert bare_rows[2][2] > sc1_rows[2][2]  # final auxiliary population drops


def test_population_summary_shape():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0)
    trace = run(Scheme.BARE, gate, cfg)
    rows = population_summary(trace)
    assert len(rows) == 4
    for level, pmax, pfinal in rows:
        assert 1 <= level <= 4
        assert 0.0 <= pfinal <= pmax <= 1.0 + 1e-9


def test_run_custom_initial_state():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=2500.0, delta_cap=25000.0)
    psi0 = QubitState(1 / math.sqrt(2), 1j / math.sqrt(2))
    trace = run(Scheme.BARE, gate, cfg, psi0=psi0)
    assert trace.fidelity > 0.99


def test_run_rejects_unknown_method():
    gate = make_gate(**IDENTITY)
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0)
    with pytest.raises(ValueError):
        run(Scheme.BARE, gate, cfg, method="verlet")


def test_run_meta_captures_configuration():
    gate = make_gate(**IDENTITY, label="identity")
    cfg = PulseConfig(omega0=250.0, delta_cap=2500.0)
    trace = run(Scheme.BARE, gate, cfg)
    assert trace.meta["scheme"] == "bare"
    assert trace.meta["gate"]["label"] == "identity"
    assert trace.meta["config"]["omega0"] == 250.0
    assert trace.meta["config"]["delta_cap"] == 2500.0
