import math

import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from certsample import (
    Circuit,
    Gate,
    RngStream,
    StateVector,
    build_comparison,
    random_circuit,
    zero_state,
)
from certsample import chamiltonian as ch
from certsample.compare import accept_probability_exact
from certsample.statevec import basis_state, decompose_to_two_qubit

from oracles import hamiltonian_matrix, random_state


def small_comp(seed=0, n=1, t=1):
    gen = RngStream(seed).substream("c").gen
    return build_comparison(random_circuit(n, t, gen))


def test_layout_counts():
    comp = small_comp(t=1)
    ham = ch.build_hamiltonian(comp)
    lay = ham.layout
    # one CSWAP costs 7 two-qubit gates, so T' = 1 + 3 + 7 = 11 for n=1, T=1
    assert lay.t_prime == 11
    assert lay.total == 2 * 1 + lay.t_prime + 1
    # L = (n+1) + T' + (T'-1) = n + 2 T' <= 2 (n + T')
    assert ham.term_count == 1 + 2 * lay.t_prime
    assert ham.term_count <= 2 * (1 + lay.t_prime)
    assert all(len(t.support) <= 5 for t in ham.terms)
    assert all(t.tag in ("in", "prop", "clock") for t in ham.terms)


def test_three_qubit_gate_rejected():
    circ = Circuit(3, (Gate("CSWAP", (0, 1, 2)),))
    with pytest.raises(ValueError, match="5-local"):
        ch.reduction_from_circuit(circ, 1)


def test_history_state_energy_zero():
    rng = RngStream(5)
    for i in range(10):
        gen = rng.substream(i).gen
        comp = build_comparison(random_circuit(1, int(gen.integers(0, 4)), gen))
        ham = ch.build_hamiltonian(comp)
        psi = StateVector(1, random_state(gen, 1))
        hist = ch.history_state(comp, psi)
        assert abs(ch.energy_exact(ham, hist.state)) <= 1e-9


def test_clock_marginals_uniform():
    comp = small_comp(seed=3, t=2)
    hist = ch.history_state(comp, zero_state(1))
    lay = hist.layout
    table = ch.clock_value_table(lay)
    probs = hist.state.probabilities()
    for j in range(lay.t_prime + 1):
        assert abs(probs[table == j].sum() - 1 / (lay.t_prime + 1)) <= 1e-10
    assert probs[table == -1].sum() <= 1e-12


def test_slice_zero_event_probability():
    comp = small_comp(seed=9, t=1)
    gen = RngStream(11).substream("s").gen
    psi = StateVector(1, random_state(gen, 1))
    hist = ch.history_state(comp, psi)
    lay = hist.layout
    probs = hist.state.probabilities()
    idx = np.arange(len(probs))
    table = ch.clock_value_table(lay)
    mask = (table == 0) & (ch.bit_of(idx, lay.out, lay.total) == 0)
    for q in lay.aux:
        mask &= ch.bit_of(idx, q, lay.total) == 0
    assert abs(probs[mask].sum() - 1 / (lay.t_prime + 1)) <= 1e-10


def test_conditional_adv_distribution_is_input():
    gen = RngStream(21).substream("adv").gen
    comp = small_comp(seed=4, t=0)
    psi = StateVector(1, random_state(gen, 1))
    hist = ch.history_state(comp, psi)
    d = ch.adv_conditional_distribution(hist.state, hist.layout)
    born = np.abs(psi.amps) ** 2
    for i, p in enumerate(born):
        assert abs(d.prob(format(i, "01b")) - p) <= 1e-12


def test_conditional_out_matches_swap_law():
    rng = RngStream(31)
    for i in range(5):
        gen = rng.substream(i).gen
        comp = build_comparison(random_circuit(1, int(gen.integers(0, 3)), gen))
        psi = StateVector(1, random_state(gen, 1))
        hist = ch.history_state(comp, psi)
        lay = hist.layout
        probs = hist.state.probabilities()
        idx = np.arange(len(probs))
        table = ch.clock_value_table(lay)
        top = table == lay.t_prime
        out1 = top & (ch.bit_of(idx, lay.out, lay.total) == 1)
        p_cond = probs[out1].sum() / probs[top].sum()
        assert abs(p_cond - accept_probability_exact(comp, psi)) <= 1e-10


def test_hin_penalty_on_clock_zero_violation():
    comp = small_comp(seed=2, t=0)
    ham = ch.build_hamiltonian(comp)
    lay = ham.layout
    # basis state: clock 0, out = 1, adv/aux zero -> H_in contributes exactly 1
    bits = ["0"] * lay.total
    bits[lay.out] = "1"
    state = basis_state(lay.total, "".join(bits))
    contributions = [
        np.vdot(state.amps, ch._apply_matrix(state.amps, t.matrix, t.support, lay.total))
        for t in ham.terms
        if t.tag == "in"
    ]
    assert abs(sum(contributions).real - 1.0) <= 1e-12


def test_clock_violation_penalized():
    comp = small_comp(seed=2, t=0)
    ham = ch.build_hamiltonian(comp)
    lay = ham.layout
    bits = ["0"] * lay.total
    bits[lay.clock[1]] = "1"  # pattern 01 at the clock start: invalid
    state = basis_state(lay.total, "".join(bits))
    assert ch.energy_exact(ham, state) >= 1.0 - 1e-9


def test_energy_matches_dense_oracle():
    rng = RngStream(41)
    for i in range(5):
        gen = rng.substream(i).gen
        payload = 1
        circ = Circuit(3, tuple(random_circuit(3, 4, gen).gates))
        circ = decompose_to_two_qubit(circ)
        ham = ch.reduction_from_circuit(circ, payload)
        if ham.layout.total > 12:
            continue
        dense = hamiltonian_matrix(ham)
        state = random_state(gen, ham.layout.total)
        want = float(np.real(np.vdot(state, dense @ state)))
        got = ch.energy_exact(ham, StateVector(ham.layout.total, state))
        assert abs(got - want) <= 1e-9


def test_propagation_blocks_psd():
    # eigendecomposition of the slice-coupling tridiagonal block
    for tp in range(1, 9):
        e = np.eye(tp + 1)
        e[0, 0] = e[tp, tp] = 0.5
        for j in range(tp):
            e[j, j + 1] = e[j + 1, j] = -0.5
        assert np.linalg.eigvalsh(e).min() >= -1e-12


def test_spectrum_small_general_instances():
    # dense diagonalization at <= 12 qubits: ground energy 0, null space of
    # dimension 2^payload spanned by history states
    rng = RngStream(61)
    for i in range(3):
        gen = rng.substream(i).gen
        circ = decompose_to_two_qubit(random_circuit(3, 4, gen))
        ham = ch.reduction_from_circuit(circ, 1)
        assert ham.layout.total <= 12
        dense = hamiltonian_matrix(ham)
        evals, evecs = np.linalg.eigh(dense)
        null_dim = int(np.sum(evals < 1e-9))
        assert abs(evals[0]) <= 1e-9
        assert null_dim == 2
        basis = []
        for b in range(2):
            comp0 = np.zeros(2**circ.qubits, dtype=complex)
            comp0[b << (circ.qubits - 2)] = 1.0  # adv qubit is index 1
            basis.append(ch.history_vector(circ, comp0))
        span = np.linalg.qr(np.stack(basis).T)[0]
        null = evecs[:, :null_dim]
        resid = np.linalg.norm(null - span @ (span.conj().T @ null))
        assert resid <= 1e-9


def test_real_instance_spectrum_sparse():
    # the smallest real comparison-circuit Hamiltonian has 13 qubits after
    # gate rewriting; shift-invert Lanczos confirms the same null structure
    comp = build_comparison(Circuit(1, ()))
    ham = ch.build_hamiltonian(comp)
    assert ham.layout.total == 13
    n = ham.layout.total
    mat = sp.coo_matrix((2**n, 2**n), dtype=complex)
    rows, cols, vals = [], [], []
    for term in ham.terms:
        sub = sp.coo_matrix(term.matrix)
        k = len(term.support)
        rest = [q for q in range(n) if q not in term.support]
        rest_offsets = np.zeros(2 ** len(rest), dtype=np.int64)
        for i in range(2 ** len(rest)):
            off = 0
            for j, q in enumerate(rest):
                off |= ((i >> (len(rest) - 1 - j)) & 1) << (n - 1 - q)
            rest_offsets[i] = off
        for r, c, v in zip(sub.row, sub.col, sub.data):
            rbase = cbase = 0
            for j, q in enumerate(term.support):
                rbase |= ((int(r) >> (k - 1 - j)) & 1) << (n - 1 - q)
                cbase |= ((int(c) >> (k - 1 - j)) & 1) << (n - 1 - q)
            rows.append(rbase + rest_offsets)
            cols.append(cbase + rest_offsets)
            vals.append(np.full(len(rest_offsets), v))
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(2**n, 2**n),
    ).tocsc()
    evals = np.sort(spla.eigsh(mat, k=6, sigma=-0.05, which="LM", return_eigenvectors=False))
    assert abs(evals[0]) <= 1e-9 and abs(evals[1]) <= 1e-9
    assert evals[2] > 1e-3  # null dimension exactly 2^1


def test_pauli_projector_identity():
    term = ch.LocalTerm((0,), np.array([[0, 0], [0, 1]], dtype=complex), "in")
    strings = ch.pauli_terms(term)
    by_letters = {tuple(sorted(s.letters.items())): s.coefficient for s in strings}
    assert abs(by_letters[()] - 0.5) < 1e-12
    assert abs(by_letters[((0, "Z"),)] + 0.5) < 1e-12


def test_pauli_zz_preserved():
    zz = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
    term = ch.LocalTerm((2, 5), 0.7 * zz, "prop")
    strings = ch.pauli_terms(term)
    assert len(strings) == 1
    assert strings[0].letters == {2: "Z", 5: "Z"}
    assert abs(strings[0].coefficient - 0.7) < 1e-12


def test_pauli_round_trip_random():
    gen = RngStream(71).substream("pauli").gen
    for _ in range(10):
        raw = gen.normal(size=(4, 4)) + 1j * gen.normal(size=(4, 4))
        herm = (raw + raw.conj().T) / 2
        term = ch.LocalTerm((1, 3), herm, "prop")
        strings = ch.pauli_terms(term)
        rebuilt = np.zeros((4, 4), dtype=complex)
        paulis = {"I": np.eye(2), "X": np.array([[0, 1], [1, 0]]),
                  "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}
        for s in strings:
            first = paulis[s.letters.get(1, "I")]
            second = paulis[s.letters.get(3, "I")]
            rebuilt += s.coefficient * np.kron(first, second)
        assert np.max(np.abs(rebuilt - herm)) < 1e-10


def test_pauli_rejects_non_hermitian():
    with pytest.raises(ValueError):
        ch.LocalTerm((0,), np.array([[0, 1], [0, 0]], dtype=complex), "in")


def test_decode_clock():
    lay = ch.RegisterLayout(1, 4)
    total = lay.total
    bits = [0] * total
    assert ch.decode_clock(bits, lay) == 0
    bits[:3] = [1, 1, 1]
    assert ch.decode_clock(bits, lay) == 3
    bits = [0] * total
    bits[1] = 1
    assert ch.decode_clock(bits, lay) is None
    with pytest.raises(ValueError):
        ch.decode_clock([0] * (total - 1), lay)


def test_estimate_energy_smoke():
    comp = small_comp(seed=12, t=0)
    ham = ch.build_hamiltonian(comp)
    gen = RngStream(1).substream("sm").gen
    state = StateVector(ham.layout.total, random_state(gen, ham.layout.total))
    value = ch.estimate_energy(ham, state, 1, RngStream(2).substream("e"))
    assert math.isfinite(value)


def test_estimate_energy_unbiased():
    comp = small_comp(seed=13, t=0)
    ham = ch.build_hamiltonian(comp)
    gen = RngStream(3).substream("st").gen
    hist = ch.history_state(comp, StateVector(1, random_state(gen, 1)))
    rounds = 40_000
    est = ch.estimate_energy(ham, hist.state, rounds, RngStream(4).substream("e"))
    exact = ch.energy_exact(ham, hist.state)
    v_max = max(
        abs(ch._split_strings(t)[0]) + sum(abs(s.coefficient) for s in t.strings() if s.letters)
        for t in ham.terms
    )
    bound = 5 * ham.term_count * v_max / math.sqrt(rounds)
    assert abs(est - exact) <= bound


def test_estimate_energy_diagonal_eigenstate():
    # single-term diagonal Hamiltonian: basis states are eigenstates
    term = ch.LocalTerm((0, 1), np.diag([3.0, -1.0, 2.0, 0.5]).astype(complex), "prop")
    lay = ch.RegisterLayout(0, 2)  # fabricate a 2-qubit layout shell

    class Shell:
        layout = lay
        terms = [term]
        term_count = 1
        qubits = 2

    state = basis_state(2, "01")
    est = ch.estimate_energy(Shell, state, 3000, RngStream(5).substream("e"))
    sigma = 5 * (abs(3.0) + 1 + 2 + 0.5) / math.sqrt(3000)
    assert abs(est - (-1.0)) <= sigma


def test_estimate_energy_zero_terms_rejected():
    class Empty:
        terms = []
        term_count = 0
        qubits = 1

    with pytest.raises(ValueError):
        ch.estimate_energy(Empty, zero_state(1), 10, RngStream(0).substream("e"))


def test_hamiltonian_json_schema():
    import json

    comp = small_comp(seed=15, t=0)
    ham = ch.build_hamiltonian(comp)
    data = json.loads(ch.hamiltonian_to_json(ham))
    assert len(data) == ham.term_count
    rec = data[0]
    assert set(rec) == {"support", "matrix", "tag"}
    k = len(rec["support"])
    assert len(rec["matrix"]) == (2**k) ** 2
    flat = [complex(re, im) for re, im in rec["matrix"]]
    rebuilt = np.array(flat).reshape(2**k, 2**k)
    assert np.max(np.abs(rebuilt - ham.terms[0].matrix)) < 1e-15
