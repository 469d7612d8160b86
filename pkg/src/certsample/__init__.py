"""certsample: simulator and exact oracles for certified-sampling protocols.

A verifier wants samples from a distribution close (in Hellinger distance) to
a target realized by a generative circuit, while a possibly adversarial
quantum prover supplies the states.  The package implements the three
protocol models (quantum verifier, constant-memory quantum verifier via a
circuit-to-Hamiltonian reduction, and classical verifier via a toy claw-free
commitment), the prover strategy catalog, and the analytic oracles that make
every completeness and soundness claim checkable at desk scale.
"""

from .rng import RngStream
from .statevec import (
    Circuit,
    Gate,
    StateVector,
    apply_circuit,
    basis_state,
    born_distribution,
    circuit_from_json,
    circuit_to_json,
    decompose_to_two_qubit,
    from_distribution,
    inner_product,
    measure,
    random_circuit,
    zero_state,
)
from .dist import (
    Distribution,
    empirical,
    f_map,
    hellinger,
    mix,
    point_mass,
    total_variation,
    uniform,
)
from .compare import (
    ComparisonCircuit,
    accept_probability_analytic,
    accept_probability_exact,
    build_comparison,
)
from .chamiltonian import (
    HistoryState,
    LocalHamiltonian,
    LocalTerm,
    PauliString,
    RegisterLayout,
    build_hamiltonian,
    decode_clock,
    energy_exact,
    estimate_energy,
    history_state,
    pauli_terms,
)
from .clawfree import KeyPair, PublicKey, Response, Trapdoor, claw_sum, evaluate, gen_keypair, verify_response
from .provers import (
    ClassicalProver,
    HistoryProver,
    QuantumProver,
)
from .protocols import (
    ProtocolParams,
    Verdict,
    classical_accept,
    rounds_needed,
    run_classical,
    run_constant_memory,
    run_noniid_verifier,
    run_quantum_verifier,
    thresholds,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
