"""Prover strategies for the three protocol models.

Each model gets one strategy class with a fixed catalog of kinds: an honest
prover plus named, parameterized cheaters.  Soundness experiments need
reproducible adversaries, not a general adversary interface.

Mixed states never appear as density matrices: an ensemble strategy samples a
pure component per round, which reproduces the round-for-round measurement
statistics of the corresponding mixture exactly.

The classical prover does not simulate the physical n'*(m+1)-qubit system.
It holds the n'-qubit logical state and plays the block-level mechanics:

* commitments are uniform images (for the XOR-shift family the image
  measurement is uniform and independent of the logical state);
* challenge 0 measures the logical state in Z and reports the labeled
  preimage (b, y XOR b*s) per block;
* challenge 1 measures the logical state in X, then draws each equation d
  uniformly from the coset {d : d . (1, s) = o} for the observed X outcome o.

A full Hadamard measurement of the physical block alpha_0|0, x0> +
alpha_1|1, x1> yields outcome d with the relative phase (-1)^(d . (x0+x1)),
which is exactly this joint law; the test suite checks the equivalence
against an amplitude-level simulation of the block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chamiltonian as ch
from .compare import ComparisonCircuit
from .dist import Distribution, mix
from .rng import as_generator
from .statevec import StateVector, from_distribution, _apply_matrix

_HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)


def _born_cdf(state: StateVector) -> np.ndarray:
    return np.cumsum(state.probabilities())


def _sample_indices(cdf: np.ndarray, gen, count: int) -> np.ndarray:
    u = gen.random(count) * cdf[-1]
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1).astype(np.int64)


# ---------------------------------------------------------------------------
# Quantum-message provers (quantum verifier and non-iid models)


@dataclass(eq=False)
class QuantumProver:
    """Sends an n-qubit state per round.

    Kinds: ``honest`` (the amplitude encoding of the target), ``fixed_state``,
    ``ensemble`` (pure component sampled per round), ``schedule`` (a fixed
    list of per-round states, not i.i.d.).
    """

    kind: str
    iid: bool
    _components: list[tuple[float, StateVector]] | None = None
    _schedule: list[StateVector] | None = None
    _cycle: bool = False

    @classmethod
    def honest(cls, target: Distribution) -> "QuantumProver":
        state = from_distribution(target)
        return cls("honest", True, [(1.0, state)])

    @classmethod
    def fixed(cls, state: StateVector) -> "QuantumProver":
        return cls("fixed_state", True, [(1.0, state)])

    @classmethod
    def ensemble(cls, components: list[tuple[float, StateVector]]) -> "QuantumProver":
        weights = [w for w, _ in components]
        if abs(sum(weights) - 1.0) > 1e-9 or any(w < 0 for w in weights):
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        return cls("ensemble", True, list(components))

    @classmethod
    def schedule(cls, states: list[StateVector], cycle: bool = False) -> "QuantumProver":
        if not states:
            raise ValueError("empty schedule")
        return cls("schedule", False, None, list(states), cycle)

    def components(self) -> list[tuple[float, StateVector]] | None:
        return self._components

    def state_for_round(self, round_index: int, rng) -> StateVector:
        if self.kind == "schedule":
            if round_index >= len(self._schedule):
                if not self._cycle:
                    raise IndexError(f"schedule exhausted at round {round_index}")
                round_index %= len(self._schedule)
            return self._schedule[round_index]
        comps = self._components
        if len(comps) == 1:
            return comps[0][1]
        gen = as_generator(rng)
        weights = np.array([w for w, _ in comps])
        pick = int(gen.choice(len(comps), p=weights / weights.sum()))
        return comps[pick][1]

    def implied_distribution(self) -> Distribution | None:
        """The per-round output distribution, when it is round independent."""
        from .statevec import born_distribution

        if self._components is not None:
            return mix(
                [(w, born_distribution(s)) for w, s in self._components if w > 0]
            )
        return None

    def schedule_states(self) -> list[StateVector] | None:
        return self._schedule


# ---------------------------------------------------------------------------
# History-state provers (constant-memory model)


@dataclass(eq=False)
class HistoryProver:
    """Sends an n'-qubit state per round for the constant-memory verifier.

    Kinds: ``honest_history`` (exact history state of the target encoding),
    ``corrupted_history`` with modes ``wrong_input`` (history state of a wrong
    payload), ``input_violation`` (slice-0 aux qubit rotated toward |1> by
    amplitude eps) and ``clock_skew`` (slice weights 1 +- eps), and
    ``ensemble_history``.
    """

    kind: str
    layout: ch.RegisterLayout
    iid: bool = True
    _components: list[tuple[float, StateVector]] = field(default_factory=list)

    @classmethod
    def honest(cls, comp: ComparisonCircuit, target: Distribution) -> "HistoryProver":
        hist = ch.history_state(comp, from_distribution(target))
        return cls("honest_history", hist.layout, True, [(1.0, hist.state)])

    @classmethod
    def corrupted(
        cls,
        comp: ComparisonCircuit,
        payload_state: StateVector,
        mode: str,
        eps: float = 0.0,
    ) -> "HistoryProver":
        from .statevec import decompose_to_two_qubit

        circuit = decompose_to_two_qubit(comp.circuit)
        layout = ch.RegisterLayout(comp.payload, circuit.gate_count)
        n = comp.payload
        if payload_state.qubits != n:
            raise ValueError("payload state size mismatch")
        out = np.zeros(2, dtype=complex)
        out[0] = 1.0
        aux = np.zeros(2**n, dtype=complex)
        aux[0] = 1.0
        weights = None
        if mode == "wrong_input":
            comp_init = np.kron(np.kron(out, payload_state.amps), aux)
        elif mode == "input_violation":
            if not 0.0 <= eps <= 1.0:
                raise ValueError("eps must lie in [0, 1]")
            first_aux = np.array([math.sqrt(1.0 - eps), math.sqrt(eps)], dtype=complex)
            rest = np.zeros(2 ** (n - 1), dtype=complex) if n > 1 else None
            if rest is not None:
                rest[0] = 1.0
                aux_vec = np.kron(first_aux, rest)
            else:
                aux_vec = first_aux
            comp_init = np.kron(np.kron(out, payload_state.amps), aux_vec)
        elif mode == "clock_skew":
            comp_init = np.kron(np.kron(out, payload_state.amps), aux)
            weights = 1.0 + eps * np.array(
                [(-1.0) ** j for j in range(circuit.gate_count + 1)]
            )
        else:
            raise ValueError(f"unknown corruption mode {mode!r}")
        full = ch.history_vector(circuit, comp_init, weights)
        state = StateVector(layout.total, full)
        return cls(f"corrupted_{mode}", layout, True, [(1.0, state)])

    @classmethod
    def ensemble(
        cls, components: list[tuple[float, "HistoryProver | StateVector"]]
    ) -> "HistoryProver":
        flat: list[tuple[float, StateVector]] = []
        layout = None
        for w, item in components:
            if isinstance(item, HistoryProver):
                for wi, s in item._components:
                    flat.append((w * wi, s))
                layout = item.layout
            else:
                flat.append((w, item))
        if layout is None:
            raise ValueError("ensemble needs at least one HistoryProver component")
        total = sum(w for w, _ in flat)
        if abs(total - 1.0) > 1e-9:
            raise ValueError("ensemble weights must sum to 1")
        return cls("ensemble_history", layout, True, flat)

    def components(self) -> list[tuple[float, StateVector]]:
        return self._components

    def state_for_round(self, round_index: int, rng) -> StateVector:
        comps = self._components
        if len(comps) == 1:
            return comps[0][1]
        gen = as_generator(rng)
        weights = np.array([w for w, _ in comps])
        pick = int(gen.choice(len(comps), p=weights / weights.sum()))
        return comps[pick][1]

    def implied_distribution(self) -> Distribution | None:
        parts = [
            (w, ch.adv_conditional_distribution(s, self.layout))
            for w, s in self._components
            if w > 0
        ]
        return mix(parts)


# ---------------------------------------------------------------------------
# Classical provers


@dataclass(eq=False)
class ClassicalProver:
    """Block-level classical-protocol prover holding an n'-qubit logical state.

    Kinds: ``honest_classical`` (faithful mechanics), ``dishonest_preimage``
    (each challenge-0 round independently corrupts one preimage with the given
    probability), ``biased_sampler`` (honest mechanics on a wrong committed
    state; construct it with the wrong state).
    """

    kind: str
    state: StateVector
    flip_prob: float = 0.0
    iid: bool = True
    _z_cdf: np.ndarray | None = field(default=None, repr=False)
    _x_cdf: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def honest(cls, state: StateVector) -> "ClassicalProver":
        return cls("honest_classical", state)

    @classmethod
    def dishonest_preimage(cls, state: StateVector, flip_prob: float) -> "ClassicalProver":
        if not 0.0 <= flip_prob <= 1.0:
            raise ValueError("flip_prob must lie in [0, 1]")
        return cls("dishonest_preimage", state, flip_prob)

    @classmethod
    def biased_sampler(cls, state: StateVector) -> "ClassicalProver":
        return cls("biased_sampler", state)

    def _z(self) -> np.ndarray:
        if self._z_cdf is None:
            self._z_cdf = _born_cdf(self.state)
        return self._z_cdf

    def _x(self) -> np.ndarray:
        if self._x_cdf is None:
            amps = self.state.amps
            for q in range(self.state.qubits):
                amps = _apply_matrix(amps, _HADAMARD, (q,), self.state.qubits)
            self._x_cdf = np.cumsum(np.abs(amps) ** 2)
        return self._x_cdf

    def commit_batch(self, m: int, rounds: int, n_keys: int, rng) -> np.ndarray:
        """Committed images; uniform and state independent for the XOR family."""
        gen = as_generator(rng)
        return gen.integers(0, 2**m, size=(rounds, n_keys), dtype=np.int64)

    def z_index_batch(self, rng, count: int) -> np.ndarray:
        """Z-basis measurement outcomes of the logical state, one index per round."""
        return _sample_indices(self._z(), as_generator(rng), count)

    def x_index_batch(self, rng, count: int) -> np.ndarray:
        """Joint X-basis measurement outcomes of the logical state."""
        return _sample_indices(self._x(), as_generator(rng), count)

    def preimage_tails(
        self, rng, b_bits: np.ndarray, ys: np.ndarray, s_keys: np.ndarray
    ) -> np.ndarray:
        """Challenge-0 preimage tails per block: y XOR b*s, possibly corrupted."""
        tails = ys ^ (b_bits * s_keys)
        if self.flip_prob > 0.0:
            gen = as_generator(rng)
            bad_round = gen.random(tails.shape[0]) < self.flip_prob
            if np.any(bad_round):
                which = gen.integers(0, tails.shape[1], size=tails.shape[0])
                rows = np.nonzero(bad_round)[0]
                tails[rows, which[rows]] ^= 1  # flip the low tail bit
        return tails

    def equations(
        self, rng, m: int, o_bits: np.ndarray, s_keys: np.ndarray
    ) -> np.ndarray:
        """Challenge-1 equations: d uniform on the coset {d : d . (1, s) = o}.

        Returned ints carry the full m+1 bits, the label bit highest.
        """
        gen = as_generator(rng)
        d_rest = gen.integers(0, 2**m, size=o_bits.shape, dtype=np.int64)
        inner = _popcount_parity(d_rest & s_keys)
        d0 = o_bits ^ inner
        return (d0 << m) | d_rest

    def implied_distribution(self, layout: ch.RegisterLayout) -> Distribution:
        return ch.adv_conditional_distribution(self.state, layout)


def _popcount_parity(values: np.ndarray) -> np.ndarray:
    """Parity of the popcount, vectorized via progressive folding."""
    v = np.asarray(values, dtype=np.int64).copy()
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1
