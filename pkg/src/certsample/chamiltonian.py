"""Circuit-to-Hamiltonian reduction with the output penalty dropped, history
states, exact energies, and measurement-based energy estimation.

The reduction follows the classic construction with a unary clock.  For a
computation register of 2n+1 qubits (out, adv, aux) and a gate list of length
T', the full system has n' = T' + 2n + 1 qubits laid out clock first:

* clock qubits 0 .. T'-1 encode step j as 1^j 0^(T'-j),
* out sits at T', adv at T'+1 .. T'+n, aux at T'+n+1 .. T'+2n.

Terms:

* input: |0><0| on clock qubit 0 tensored with |1><1| on each out/aux qubit,
  penalizing wrong starting values at step 0;
* propagation: for each gate j one term coupling the step j-1 <-> j clock
  transition (at most 3 clock qubits) to the gate unitary (at most 2 qubits),
  hence locality at most 5;
* clock: |01><01| on each adjacent clock pair, penalizing non-unary patterns.

Every term is positive semidefinite, so a state has energy 0 exactly when it
is a history state.  Controlled swaps in the comparison circuit are rewritten
into two-qubit gates first and the slice count T' is recomputed from the
rewritten gate list; all protocol formulas use the recomputed T'.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .compare import ComparisonCircuit
from .rng import as_generator
from .statevec import (
    Circuit,
    StateVector,
    decompose_to_two_qubit,
    measure,
    _apply_matrix,
)

_HERM_TOL = 1e-10
_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass(frozen=True)
class RegisterLayout:
    """Qubit positions of the clock/out/adv/aux registers on the full system."""

    payload: int
    t_prime: int

    @property
    def total(self) -> int:
        return self.t_prime + 2 * self.payload + 1

    @property
    def clock(self) -> tuple[int, ...]:
        return tuple(range(self.t_prime))

    @property
    def out(self) -> int:
        return self.t_prime

    @property
    def adv(self) -> tuple[int, ...]:
        return tuple(range(self.t_prime + 1, self.t_prime + 1 + self.payload))

    @property
    def aux(self) -> tuple[int, ...]:
        return tuple(
            range(self.t_prime + 1 + self.payload, self.t_prime + 1 + 2 * self.payload)
        )

    def comp(self, local: int) -> int:
        """Global index of computation qubit ``local`` (0 = out)."""
        return self.t_prime + local


@dataclass(eq=False)
class LocalTerm:
    """A Hermitian term on at most five qubits.

    ``matrix`` acts on the wires in ``support`` order.  ``tag`` records which
    part of the construction the term belongs to (in, prop, clock).
    """

    support: tuple[int, ...]
    matrix: np.ndarray
    tag: str
    _strings: list | None = field(default=None, repr=False)

    def __post_init__(self):
        self.support = tuple(int(q) for q in self.support)
        k = len(self.support)
        if k == 0 or k > 5:
            raise ValueError(f"term support size {k} outside [1, 5]")
        if len(set(self.support)) != k:
            raise ValueError("term support must be distinct")
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (2**k, 2**k):
            raise ValueError(f"term matrix shape {m.shape} does not match support {k}")
        if np.max(np.abs(m - m.conj().T)) > _HERM_TOL:
            raise ValueError("term matrix is not Hermitian")
        self.matrix = m

    def strings(self) -> list["PauliString"]:
        if self._strings is None:
            self._strings = pauli_terms(self)
        return self._strings


@dataclass(eq=False)
class LocalHamiltonian:
    """Sum of local terms over the clock + computation system."""

    layout: RegisterLayout
    terms: list[LocalTerm]
    circuit: Circuit  # two-qubit-gate computation circuit, comp-local wires

    @property
    def qubits(self) -> int:
        return self.layout.total

    @property
    def term_count(self) -> int:
        return len(self.terms)


@dataclass(eq=False)
class HistoryState:
    """Uniform superposition over time slices entangled with the unary clock."""

    state: StateVector
    layout: RegisterLayout
    input: StateVector


@dataclass
class PauliString:
    """A real coefficient times a product of Pauli letters; empty letters = identity."""

    coefficient: float
    letters: dict[int, str]

    def qubits(self) -> tuple[int, ...]:
        return tuple(sorted(self.letters))


# ---------------------------------------------------------------------------
# Construction


def _unary_pattern_matrix(pattern_target: str, pattern_source: str) -> np.ndarray:
    """|target><source| over the listed clock-qubit patterns."""
    k = len(pattern_target)
    m = np.zeros((2**k, 2**k), dtype=complex)
    m[int(pattern_target, 2), int(pattern_source, 2)] = 1.0
    return m


def _prop_clock_patterns(j: int, t_prime: int) -> tuple[tuple[int, ...], str, str]:
    """Clock support and (source, target) bit patterns for gate j (1-based)."""
    if t_prime == 1:
        return (0,), "0", "1"
    if j == 1:
        return (0, 1), "00", "10"
    if j == t_prime:
        return (t_prime - 2, t_prime - 1), "10", "11"
    return (j - 2, j - 1, j), "100", "110"


def reduction_from_circuit(circuit: Circuit, payload: int) -> LocalHamiltonian:
    """Build the local Hamiltonian for a two-qubit-gate circuit on 2*payload+1 wires.

    The circuit acts on computation wires 0 (out), 1..payload (adv),
    payload+1..2*payload (aux).  The input penalty covers out and aux.  The
    term count is payload + 2*T' - 1, which is at most 2*(payload + T').
    """
    if circuit.qubits != 2 * payload + 1:
        raise ValueError(
            f"circuit on {circuit.qubits} qubits does not match payload {payload}"
        )
    t_prime = circuit.gate_count
    if t_prime < 1:
        raise ValueError("reduction needs at least one gate")
    for g in circuit.gates:
        if len(g.qubits) > 2:
            raise ValueError(
                f"gate {g.kind} on {g.qubits} acts on more than two computation "
                "qubits and cannot be made 5-local after clock coupling; rewrite "
                "it with decompose_to_two_qubit first"
            )

    layout = RegisterLayout(payload, t_prime)
    p0 = np.array([[1, 0], [0, 0]], dtype=complex)
    p1 = np.array([[0, 0], [0, 1]], dtype=complex)
    terms: list[LocalTerm] = []

    # Input terms: clock qubit 0 reads 0 exactly on slice 0 (within the valid
    # unary subspace), where out and aux must also read 0.
    for q in (layout.out, *layout.aux):
        terms.append(LocalTerm((0, q), np.kron(p0, p1), "in"))

    # Propagation terms, one per gate.
    for j, gate in enumerate(circuit.gates, start=1):
        clock_support, src, tgt = _prop_clock_patterns(j, t_prime)
        u = gate.full_matrix()
        dim = u.shape[0]
        fwd = _unary_pattern_matrix(tgt, src)
        proj_t = _unary_pattern_matrix(tgt, tgt)
        proj_s = _unary_pattern_matrix(src, src)
        m = (
            -0.5 * np.kron(fwd, u)
            - 0.5 * np.kron(fwd.conj().T, u.conj().T)
            + 0.5 * np.kron(proj_t + proj_s, np.eye(dim, dtype=complex))
        )
        support = clock_support + tuple(layout.comp(q) for q in gate.qubits)
        terms.append(LocalTerm(support, m, "prop"))

    # Clock terms: penalize a 0 followed by a 1 anywhere in the unary register.
    for k in range(t_prime - 1):
        terms.append(LocalTerm((k, k + 1), np.kron(p0, p1), "clock"))

    return LocalHamiltonian(layout, terms, circuit)


def build_hamiltonian(comp: ComparisonCircuit) -> LocalHamiltonian:
    """Reduction of a comparison circuit after two-qubit-gate rewriting."""
    rewritten = decompose_to_two_qubit(comp.circuit)
    return reduction_from_circuit(rewritten, comp.payload)


# ---------------------------------------------------------------------------
# History states


def history_vector(
    circuit: Circuit, comp_init: np.ndarray, weights=None
) -> np.ndarray:
    """Dense amplitudes of a (possibly reweighted) history state.

    ``comp_init`` is the slice-0 computation state.  ``weights`` optionally
    reweights the slices; the default is uniform 1/sqrt(T'+1).
    """
    t_prime = circuit.gate_count
    comp_dim = 2**circuit.qubits
    if comp_init.shape != (comp_dim,):
        raise ValueError("bad slice-0 state shape")
    if weights is None:
        w = np.full(t_prime + 1, 1.0 / math.sqrt(t_prime + 1))
    else:
        w = np.asarray(weights, dtype=float)
        if w.shape != (t_prime + 1,):
            raise ValueError("need one weight per slice")
        w = w / np.linalg.norm(w)

    full = np.zeros(2 ** (t_prime + circuit.qubits), dtype=complex)
    slice_state = np.array(comp_init, dtype=complex)
    for j in range(t_prime + 1):
        if j > 0:
            g = circuit.gates[j - 1]
            slice_state = _apply_matrix(slice_state, g.full_matrix(), g.qubits, circuit.qubits)
        # Unary clock value j occupies the top t_prime index bits.
        clock_index = ((1 << j) - 1) << (t_prime - j) if j > 0 else 0
        start = clock_index * comp_dim
        full[start : start + comp_dim] = w[j] * slice_state
    return full


def history_state(comp: ComparisonCircuit, adv_state: StateVector) -> HistoryState:
    """The history state of the comparison circuit run on ``adv_state``.

    Uses the same two-qubit-gate rewriting as :func:`build_hamiltonian`, so
    the result is the exact ground state of that Hamiltonian.
    """
    n = comp.payload
    if adv_state.qubits != n:
        raise ValueError(f"adv state has {adv_state.qubits} qubits, expected {n}")
    rewritten = decompose_to_two_qubit(comp.circuit)
    out = np.zeros(2, dtype=complex)
    out[0] = 1.0
    aux = np.zeros(2**n, dtype=complex)
    aux[0] = 1.0
    comp_init = np.kron(np.kron(out, adv_state.amps), aux)
    full = history_vector(rewritten, comp_init)
    layout = RegisterLayout(n, rewritten.gate_count)
    return HistoryState(StateVector(layout.total, full), layout, adv_state)


# ---------------------------------------------------------------------------
# Energies


def energy_exact(ham: LocalHamiltonian, state: StateVector) -> float:
    """<state| H |state> summed term by term; raises if the value is not real."""
    if state.qubits != ham.qubits:
        raise ValueError(f"state on {state.qubits} qubits, Hamiltonian on {ham.qubits}")
    total = 0.0 + 0.0j
    for term in ham.terms:
        acted = _apply_matrix(state.amps, term.matrix, term.support, state.qubits)
        total += np.vdot(state.amps, acted)
    if abs(total.imag) > 1e-9:
        raise ValueError(f"energy has imaginary residue {total.imag:.3e}")
    return float(total.real)


def decode_clock(bits, layout: RegisterLayout) -> int | None:
    """Unary clock value of a full-register measurement outcome, or None.

    ``bits`` is a sequence (or string) of n' measured bits.  Valid clock
    patterns are 1^j 0^(T'-j); anything else decodes to None.
    """
    if len(bits) != layout.total:
        raise ValueError(f"expected {layout.total} bits, got {len(bits)}")
    clock_bits = [int(bits[q]) for q in layout.clock]
    j = 0
    while j < len(clock_bits) and clock_bits[j] == 1:
        j += 1
    if any(b == 1 for b in clock_bits[j:]):
        return None
    return j


# ---------------------------------------------------------------------------
# Pauli decomposition and sampling-based energy estimation


def pauli_terms(term: LocalTerm) -> list[PauliString]:
    """Decompose a term into Pauli strings over its support.

    The coefficients are real by Hermiticity and reconstruct the matrix;
    the identity component shows up as a string with no letters.
    """
    k = len(term.support)
    m = term.matrix
    if np.max(np.abs(m - m.conj().T)) > _HERM_TOL:
        raise ValueError("cannot decompose a non-Hermitian matrix")
    out: list[PauliString] = []
    dim = 2**k
    for letters in product("IXYZ", repeat=k):
        p = np.array([[1]], dtype=complex)
        for l in letters:
            p = np.kron(p, _PAULI[l])
        c = np.trace(p.conj().T @ m) / dim
        if abs(c.imag) > _HERM_TOL:
            raise ValueError("non-real Pauli coefficient; matrix not Hermitian")
        if abs(c.real) <= 1e-12:
            continue
        mapping = {
            term.support[i]: letters[i] for i in range(k) if letters[i] != "I"
        }
        out.append(PauliString(float(c.real), mapping))
    return out


def string_expectation(state: StateVector, string: PauliString) -> float:
    """Exact expectation of a Pauli string (letters only, coefficient ignored)."""
    if not string.letters:
        return 1.0
    amps = state.amps
    for q, letter in string.letters.items():
        amps = _apply_matrix(amps, _PAULI[letter], (q,), state.qubits)
    val = np.vdot(state.amps, amps)
    return float(val.real)


def _split_strings(term: LocalTerm) -> tuple[float, list[PauliString]]:
    """Identity offset and the non-identity strings of a term."""
    offset = 0.0
    rest = []
    for s in term.strings():
        if s.letters:
            rest.append(s)
        else:
            offset += s.coefficient
    return offset, rest


def measure_pauli(state: StateVector, string: PauliString, rng) -> int:
    """Sample the +-1 outcome of measuring one Pauli string on a fresh copy."""
    qubits = string.qubits()
    letters = [string.letters[q] for q in qubits]
    bits, _ = measure(state, qubits, letters, rng)
    return 1 - 2 * (sum(bits) % 2)


def estimate_energy(ham: LocalHamiltonian, state_source, rounds: int, rng) -> float:
    """Unbiased sampling estimate of the energy.

    Each round draws a term uniformly, draws one of its Pauli strings with
    probability proportional to |coefficient|, measures the string's support
    on a fresh copy of the state, and accumulates the importance-weighted
    signed outcome plus the term's identity offset.  The mean times the term
    count is an unbiased estimator of the exact energy.

    ``state_source`` is either a fixed state or a callable ``round -> state``.
    """
    if rounds < 1:
        raise ValueError("need at least one round")
    if not ham.terms:
        raise ValueError("Hamiltonian has no terms")
    gen = as_generator(rng)
    get_state = state_source if callable(state_source) else (lambda _i: state_source)

    split = [_split_strings(t) for t in ham.terms]
    weights = []
    scales = []
    for offset, rest in split:
        w = np.array([abs(s.coefficient) for s in rest])
        scales.append(float(w.sum()))
        weights.append(w / w.sum() if len(w) and w.sum() > 0 else w)

    total = 0.0
    n_terms = len(ham.terms)
    for i in range(rounds):
        state = get_state(i)
        t_idx = int(gen.integers(n_terms))
        offset, rest = split[t_idx]
        value = offset
        if rest:
            s_idx = int(gen.choice(len(rest), p=weights[t_idx]))
            string = rest[s_idx]
            outcome = measure_pauli(state, string, gen)
            value += math.copysign(scales[t_idx], string.coefficient) * outcome
        total += value
    return n_terms * total / rounds


# ---------------------------------------------------------------------------
# Vectorized register views over basis indices; shared by provers and engines.


def bit_of(indices, qubit: int, total: int):
    """Bit of ``qubit`` (qubit 0 = most significant) for an index array."""
    return (np.asarray(indices, dtype=np.int64) >> (total - 1 - qubit)) & 1


def register_value(indices, qubits, total: int):
    """Pack the listed qubits of each basis index into an integer, first qubit high."""
    idx = np.asarray(indices, dtype=np.int64)
    out = np.zeros_like(idx)
    for q in qubits:
        out = (out << 1) | bit_of(idx, q, total)
    return out


def clock_value_table(layout: RegisterLayout) -> np.ndarray:
    """Decoded clock value for every basis index; -1 marks invalid patterns."""
    n = layout.total
    tp = layout.t_prime
    idx = np.arange(2**n, dtype=np.int64)
    clock = (idx >> (n - tp)) & ((1 << tp) - 1)
    table = np.full(2**n, -1, dtype=np.int16)
    for j in range(tp + 1):
        pattern = ((1 << j) - 1) << (tp - j)
        table[clock == pattern] = j
    return table


def adv_conditional_distribution(state: StateVector, layout: RegisterLayout):
    """Distribution of the adv register conditioned on clock = 0, out = 0, aux = 0."""
    from .dist import Distribution

    n = layout.total
    probs = state.probabilities()
    idx = np.arange(len(probs), dtype=np.int64)
    tp = layout.t_prime
    clock = (idx >> (n - tp)) & ((1 << tp) - 1) if tp else np.zeros_like(idx)
    mask = clock == 0
    mask &= bit_of(idx, layout.out, n) == 0
    for q in layout.aux:
        mask &= bit_of(idx, q, n) == 0
    weight = probs[mask]
    total = weight.sum()
    if total <= 0:
        raise ValueError("state has no weight on the clock-0 harvest event")
    adv_vals = register_value(idx[mask], layout.adv, n)
    counts = np.bincount(adv_vals, weights=weight, minlength=2**layout.payload)
    counts = counts / total
    k = layout.payload
    return Distribution(
        k, {format(i, f"0{k}b"): float(p) for i, p in enumerate(counts) if p > 1e-18}
    )


# ---------------------------------------------------------------------------
# Dump format for cross-implementation diffing


def hamiltonian_to_json(ham: LocalHamiltonian) -> str:
    records = []
    for t in ham.terms:
        records.append(
            {
                "support": list(t.support),
                "matrix": [[float(v.real), float(v.imag)] for v in t.matrix.reshape(-1)],
                "tag": t.tag,
            }
        )
    return json.dumps(records)
