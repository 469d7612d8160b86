import math

import numpy as np
import pytest

from certsample import (
    Circuit,
    Gate,
    RngStream,
    StateVector,
    build_comparison,
    from_distribution,
    random_circuit,
    uniform,
    zero_state,
)
from certsample import chamiltonian as ch
from certsample.clawfree import claw_sum, gen_keypair, parity
from certsample.dist import Distribution, hellinger, point_mass
from certsample.provers import ClassicalProver, HistoryProver, QuantumProver

from oracles import random_state


def test_honest_quantum_sends_amplitude_encoding():
    prover = QuantumProver.honest(uniform(1))
    gen = RngStream(0).substream("p").gen
    for i in range(5):
        state = prover.state_for_round(i, gen)
        assert np.allclose(state.amps, [1 / math.sqrt(2), 1 / math.sqrt(2)])


def test_ensemble_component_frequencies():
    zero = zero_state(1)
    one = StateVector(1, np.array([0, 1], dtype=complex))
    prover = QuantumProver.ensemble([(0.5, zero), (0.5, one)])
    gen = RngStream(1).substream("p").gen
    picks = sum(
        1 for i in range(10_000) if prover.state_for_round(i, gen).amps[1] == 1
    )
    sigma = math.sqrt(10_000 * 0.25)
    assert abs(picks - 5000) <= 4 * sigma


def test_schedule_order_and_exhaustion():
    states = [zero_state(1), StateVector(1, np.array([0, 1], dtype=complex))]
    prover = QuantumProver.schedule(states)
    gen = RngStream(2).substream("p").gen
    assert prover.state_for_round(0, gen) is states[0]
    assert prover.state_for_round(1, gen) is states[1]
    with pytest.raises(IndexError):
        prover.state_for_round(2, gen)
    cyc = QuantumProver.schedule(states, cycle=True)
    assert cyc.state_for_round(2, gen) is states[0]


def test_implied_distribution_of_ensemble():
    prover = QuantumProver.ensemble(
        [(0.25, zero_state(1)), (0.75, StateVector(1, np.array([0, 1], dtype=complex)))]
    )
    d = prover.implied_distribution()
    assert abs(d.prob("0") - 0.25) < 1e-12
    assert abs(d.prob("1") - 0.75) < 1e-12


def _small_comp(seed=0, t=0):
    gen = RngStream(seed).substream("c").gen
    return build_comparison(random_circuit(1, t, gen))


def test_honest_history_energy_zero():
    comp = _small_comp()
    prover = HistoryProver.honest(comp, uniform(1))
    ham = ch.build_hamiltonian(comp)
    state = prover.state_for_round(0, RngStream(1).substream("r").gen)
    assert abs(ch.energy_exact(ham, state)) <= 1e-9


def test_wrong_input_keeps_energy_but_shifts_distribution():
    comp = _small_comp()
    ham = ch.build_hamiltonian(comp)
    wrong = from_distribution(point_mass("1"))
    prover = HistoryProver.corrupted(comp, wrong, mode="wrong_input")
    state = prover.state_for_round(0, RngStream(2).substream("r").gen)
    assert abs(ch.energy_exact(ham, state)) <= 1e-9
    implied = prover.implied_distribution()
    assert abs(implied.prob("1") - 1.0) < 1e-12


def test_input_violation_raises_input_penalty():
    comp = _small_comp()
    ham = ch.build_hamiltonian(comp)
    for eps in (0.2, 0.7, 1.0):
        prover = HistoryProver.corrupted(comp, zero_state(1), mode="input_violation", eps=eps)
        state = prover.state_for_round(0, RngStream(3).substream("r").gen)
        tp = ham.layout.t_prime
        in_terms = [t for t in ham.terms if t.tag == "in"]
        total = 0.0
        for t in in_terms:
            acted = ch._apply_matrix(state.amps, t.matrix, t.support, ham.layout.total)
            total += float(np.vdot(state.amps, acted).real)
        assert abs(total - eps / (tp + 1)) <= 1e-9


def test_clock_skew_shifts_marginal():
    comp = _small_comp()
    eps = 0.3
    prover = HistoryProver.corrupted(comp, zero_state(1), mode="clock_skew", eps=eps)
    state = prover.state_for_round(0, RngStream(4).substream("r").gen)
    lay = prover.layout
    table = ch.clock_value_table(lay)
    probs = state.probabilities()
    tp = lay.t_prime
    devs = [abs(probs[table == j].sum() - 1 / (tp + 1)) for j in range(tp + 1)]
    assert max(devs) > 0.01
    assert max(devs) <= 2 * eps / (tp + 1)


def test_history_ensemble_weights():
    comp = _small_comp()
    a = HistoryProver.honest(comp, uniform(1))
    b = HistoryProver.corrupted(comp, zero_state(1), mode="wrong_input")
    ens = HistoryProver.ensemble([(0.5, a), (0.5, b)])
    assert len(ens.components()) == 2
    assert abs(sum(w for w, _ in ens.components()) - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# Classical prover: block-level shortcut against the amplitude-level oracle


def _block_distribution(alpha0, alpha1, m, s, y):
    """Exact Hadamard-measurement law of alpha0 |0, y> + alpha1 |1, y xor s>."""
    dim = 2 ** (m + 1)
    amps = np.zeros(dim, dtype=complex)
    amps[(0 << m) | y] = alpha0
    amps[(1 << m) | (y ^ s)] = alpha1
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    full = np.array([1], dtype=complex)
    for _ in range(m + 1):
        full = np.kron(full, h)
    return np.abs(full @ amps) ** 2


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_equation_law_matches_block_oracle_exactly(m):
    gen = RngStream(20 + m).substream("amp").gen
    key = gen_keypair(m, RngStream(30 + m).substream("k"))
    s = key.td.s
    cs = claw_sum(key.td)
    for trial in range(5):
        raw = gen.normal(size=2) + 1j * gen.normal(size=2)
        raw /= np.linalg.norm(raw)
        y = int(gen.integers(2**m))
        oracle = _block_distribution(raw[0], raw[1], m, s, y)
        # shortcut law: P[d] = P_X[o = d . claw] / 2^m
        px0 = abs((raw[0] + raw[1]) / math.sqrt(2)) ** 2
        px1 = abs((raw[0] - raw[1]) / math.sqrt(2)) ** 2
        for d in range(2 ** (m + 1)):
            o = parity(d, cs)
            want = (px0 if o == 0 else px1) / 2**m
            assert abs(oracle[d] - want) <= 1e-12


def test_equations_uniform_on_coset():
    m = 3
    key = gen_keypair(m, RngStream(41).substream("k"))
    s = key.td.s
    cs = claw_sum(key.td)
    prover = ClassicalProver.honest(zero_state(1))
    gen = RngStream(42).substream("d").gen
    o = np.zeros((4000, 1), dtype=np.int64)
    o[2000:] = 1
    s_keys = np.full((4000, 1), s, dtype=np.int64)
    d = prover.equations(gen, m, o, s_keys)
    counts: dict[int, int] = {}
    for row in range(4000):
        val = int(d[row, 0])
        assert parity(val, cs) == int(o[row, 0])
        counts[val] = counts.get(val, 0) + 1
    # each coset has 2^m members, sampled uniformly
    per = 2000 / 2**m
    for val, cnt in counts.items():
        assert abs(cnt - per) <= 5 * math.sqrt(per)


def test_z_sampler_matches_born():
    gen = RngStream(50).substream("z").gen
    state = StateVector(2, random_state(gen, 2))
    prover = ClassicalProver.honest(state)
    idx = prover.z_index_batch(RngStream(51).substream("s").gen, 50_000)
    probs = state.probabilities()
    for k in range(4):
        freq = float(np.mean(idx == k))
        sigma = math.sqrt(max(probs[k] * (1 - probs[k]), 1e-9) / 50_000)
        assert abs(freq - probs[k]) <= 5 * sigma


def test_x_sampler_matches_hadamard_born():
    gen = RngStream(52).substream("x").gen
    state = StateVector(2, random_state(gen, 2))
    prover = ClassicalProver.honest(state)
    h = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    rotated = np.kron(h, h) @ state.amps
    probs = np.abs(rotated) ** 2
    idx = prover.x_index_batch(RngStream(53).substream("s").gen, 50_000)
    for k in range(4):
        freq = float(np.mean(idx == k))
        sigma = math.sqrt(max(probs[k] * (1 - probs[k]), 1e-9) / 50_000)
        assert abs(freq - probs[k]) <= 5 * sigma


def test_honest_preimage_tails_always_verify():
    prover = ClassicalProver.honest(zero_state(1))
    gen = RngStream(54).substream("t").gen
    b = gen.integers(0, 2, size=(100, 4))
    ys = gen.integers(0, 8, size=(100, 4))
    s_keys = gen.integers(1, 8, size=(100, 4))
    tails = prover.preimage_tails(gen, b, ys, s_keys)
    assert np.all((tails ^ (b * s_keys)) == ys)


def test_dishonest_preimage_tails_fail_at_given_rate():
    prover = ClassicalProver.dishonest_preimage(zero_state(1), 0.5)
    gen = RngStream(55).substream("t").gen
    b = gen.integers(0, 2, size=(4000, 3))
    ys = gen.integers(0, 8, size=(4000, 3))
    s_keys = gen.integers(1, 8, size=(4000, 3))
    tails = prover.preimage_tails(gen, b, ys, s_keys)
    ok_rows = np.all((tails ^ (b * s_keys)) == ys, axis=1)
    rate = float(np.mean(~ok_rows))
    assert abs(rate - 0.5) <= 4 * math.sqrt(0.25 / 4000)
