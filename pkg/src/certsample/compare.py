"""The comparison circuit: a SWAP test between the prover's state and the
state generated by the reference circuit.

The circuit acts on out (qubit 0), adv (qubits 1..n) and aux (qubits
n+1..2n).  It runs the reference circuit on aux, Hadamards out, controlled
swaps adv against aux, Hadamards out again and finally negates out, so that
measuring out = 1 means "similar": the probability is
(1 + |<psi_adv|psi_ref>|^2) / 2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .statevec import (
    Circuit,
    Gate,
    StateVector,
    apply_circuit,
    inner_product,
    zero_state,
)


@dataclass(frozen=True, eq=False)
class ComparisonCircuit:
    """The comparison circuit built from a reference circuit on n qubits.

    ``circuit`` is the full gate list on 2n+1 qubits with native controlled
    swaps; ``gate_count`` is T + n + 3 where T is the reference gate count.
    """

    payload: int
    base: Circuit
    circuit: Circuit
    gate_count: int

    @property
    def out(self) -> int:
        return 0

    @property
    def adv(self) -> tuple[int, ...]:
        return tuple(range(1, self.payload + 1))

    @property
    def aux(self) -> tuple[int, ...]:
        return tuple(range(self.payload + 1, 2 * self.payload + 1))

    @property
    def slice_indices(self) -> tuple[int, ...]:
        """Gate-list positions of the marked time slices."""
        t = self.base.gate_count
        n = self.payload
        return (0, t, t + 1, t + n + 1, t + n + 3)


def build_comparison(base: Circuit) -> ComparisonCircuit:
    """Assemble the comparison circuit for a reference circuit on n >= 1 qubits."""
    n = base.qubits
    if n < 1:
        raise ValueError("reference circuit must act on at least one qubit")
    gates: list[Gate] = []
    for g in base.gates:
        shifted = tuple(q + n + 1 for q in g.qubits)
        gates.append(Gate(g.kind, shifted, g.matrix))
    gates.append(Gate("H", (0,)))
    for i in range(n):
        gates.append(Gate("CSWAP", (0, 1 + i, n + 1 + i)))
    gates.append(Gate("H", (0,)))
    gates.append(Gate("X", (0,)))
    circuit = Circuit(2 * n + 1, tuple(gates))
    return ComparisonCircuit(n, base, circuit, base.gate_count + n + 3)


def reference_state(comp: ComparisonCircuit) -> StateVector:
    """The state produced by running the reference circuit on the zero state."""
    return apply_circuit(zero_state(comp.payload), comp.base)


def initial_state(comp: ComparisonCircuit, adv_state: StateVector) -> StateVector:
    """|0>_out (x) adv_state (x) |0^n>_aux on the 2n+1 comparison wires."""
    n = comp.payload
    if adv_state.qubits != n:
        raise ValueError(f"adv state has {adv_state.qubits} qubits, expected {n}")
    out = np.zeros(2, dtype=complex)
    out[0] = 1.0
    aux = np.zeros(2**n, dtype=complex)
    aux[0] = 1.0
    amps = np.kron(np.kron(out, adv_state.amps), aux)
    return StateVector(2 * n + 1, amps)


def accept_probability_exact(comp: ComparisonCircuit, adv_state: StateVector) -> float:
    """Born weight of out = 1 after simulating the full comparison circuit."""
    final = apply_circuit(initial_state(comp, adv_state), comp.circuit)
    # Qubit 0 is the most significant index bit, so out = 1 is the upper half.
    half = final.amps[2 ** (final.qubits - 1):]
    return float(np.sum(np.abs(half) ** 2))


def accept_probability_analytic(adv_state: StateVector, ref_state: StateVector) -> float:
    """(1 + |<adv|ref>|^2) / 2 without simulating the circuit."""
    ov = inner_product(adv_state, ref_state)
    return 0.5 * (1.0 + abs(ov) ** 2)
