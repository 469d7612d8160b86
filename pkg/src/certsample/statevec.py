"""Dense state-vector simulation: gate application, measurement, Born sampling.

Conventions shared by the whole package:

* Qubit 0 is the leftmost ket factor.  Basis index ``i`` of a ``q``-qubit
  state therefore reads as the bitstring ``format(i, f"0{q}b")`` with qubit 0
  first, and ``np.kron(a, b)`` places ``a`` on the lower qubit indices.
* States are immutable values.  Every operation returns a new
  :class:`StateVector`; nothing mutates shared data, so values are safe to
  use from many threads.
* All randomness flows through an explicit stream (see :mod:`certsample.rng`),
  making transcripts reproducible bit for bit.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .rng import as_generator

#: Default ceiling on simulated qubits; dense vectors above this are refused.
MAX_QUBITS = 24

_NORM_TOL = 1e-9
_UNITARY_TOL = 1e-10
_UNDERFLOW = 1e-12

_INVSQRT2 = 1.0 / math.sqrt(2.0)

_H = np.array([[1, 1], [1, -1]], dtype=complex) * _INVSQRT2
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_S = np.array([[1, 0], [0, 1j]], dtype=complex)
_T = np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
_I2 = np.eye(2, dtype=complex)
_P0 = np.array([[1, 0], [0, 0]], dtype=complex)
_P1 = np.array([[0, 0], [0, 1]], dtype=complex)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)
# Principal square root of X; used to expand Toffoli into two-qubit gates.
_SQRT_X = 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex)
_SQRT_X_DG = _SQRT_X.conj().T

GATE_ARITY = {
    "H": 1,
    "X": 1,
    "Z": 1,
    "S": 1,
    "T": 1,
    "CNOT": 2,
    "SWAP": 2,
    "CSWAP": 3,
    "U1": 1,
    "CU1": 2,
}

_FIXED_1Q = {"H": _H, "X": _X, "Z": _Z, "S": _S, "T": _T}

# Rotations mapping the X / Y measurement bases onto Z.  For Y the state is
# hit with S-dagger first, then H.
_BASIS_ROT = {
    "Z": None,
    "X": _H,
    "Y": _H @ _S.conj().T,
}
_BASIS_ROT_INV = {
    "Z": None,
    "X": _H,
    "Y": _S @ _H,
}


def _is_unitary(m: np.ndarray, tol: float = _UNITARY_TOL) -> bool:
    m = np.asarray(m, dtype=complex)
    if m.shape != (2, 2):
        return False
    return bool(np.max(np.abs(m.conj().T @ m - _I2)) <= tol)


@dataclass(frozen=True, eq=False)
class Gate:
    """One gate of a circuit.

    ``qubits`` lists the wires the gate touches; for the controlled kinds
    (CNOT, CSWAP, CU1) the first entry is the control.  ``matrix`` is the
    2x2 unitary of a U1/CU1 gate and must be None otherwise.
    """

    kind: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in GATE_ARITY:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if len(qubits) != GATE_ARITY[self.kind]:
            raise ValueError(
                f"{self.kind} takes {GATE_ARITY[self.kind]} qubit(s), got {qubits}"
            )
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"gate qubits must be distinct, got {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError(f"gate qubits must be non-negative, got {qubits}")
        if self.kind in ("U1", "CU1"):
            if self.matrix is None:
                raise ValueError(f"{self.kind} requires a 2x2 matrix")
            m = np.array(self.matrix, dtype=complex)
            if not _is_unitary(m):
                raise ValueError(f"{self.kind} matrix is not unitary within {_UNITARY_TOL}")
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} does not take a matrix")

    def full_matrix(self) -> np.ndarray:
        """Unitary of the gate on its own wires (2^k x 2^k, wire order = self.qubits)."""
        k = self.kind
        if k in _FIXED_1Q:
            return _FIXED_1Q[k]
        if k == "U1":
            return self.matrix
        if k == "CNOT":
            return np.kron(_P0, _I2) + np.kron(_P1, _X)
        if k == "CU1":
            return np.kron(_P0, _I2) + np.kron(_P1, self.matrix)
        if k == "SWAP":
            return _SWAP
        if k == "CSWAP":
            return np.kron(_P0, np.eye(4, dtype=complex)) + np.kron(_P1, _SWAP)
        raise AssertionError(k)


@dataclass(frozen=True, eq=False)
class Circuit:
    """An ordered gate list on a fixed number of qubits."""

    qubits: int
    gates: tuple[Gate, ...]

    def __post_init__(self):
        if self.qubits < 1:
            raise ValueError("circuit needs at least one qubit")
        gates = tuple(self.gates)
        object.__setattr__(self, "gates", gates)
        for g in gates:
            if max(g.qubits) >= self.qubits:
                raise ValueError(f"gate {g.kind} on {g.qubits} exceeds {self.qubits} qubits")

    @property
    def gate_count(self) -> int:
        return len(self.gates)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized dense amplitude vector over ``qubits`` qubits."""

    qubits: int
    amps: np.ndarray

    def __post_init__(self):
        if not 1 <= self.qubits <= MAX_QUBITS:
            raise ValueError(f"qubit count {self.qubits} outside [1, {MAX_QUBITS}]")
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (2**self.qubits,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected (2^{self.qubits},)"
            )
        if not np.all(np.isfinite(amps.view(float))):
            raise ValueError("amplitudes must be finite")
        nrm = np.linalg.norm(amps)
        if abs(nrm - 1.0) > _NORM_TOL:
            raise ValueError(f"state not normalized: |norm - 1| = {abs(nrm - 1.0):.3e}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def probabilities(self) -> np.ndarray:
        """Born weights |amp|^2, indexed by basis integer."""
        return np.abs(self.amps) ** 2

    def bitstring(self, index: int) -> str:
        return format(index, f"0{self.qubits}b")


def zero_state(qubits: int) -> StateVector:
    amps = np.zeros(2**qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(qubits, amps)


def basis_state(qubits: int, bits) -> StateVector:
    """Computational basis state; ``bits`` is a bitstring or basis index."""
    if isinstance(bits, str):
        if len(bits) != qubits or set(bits) - {"0", "1"}:
            raise ValueError(f"bad bitstring {bits!r} for {qubits} qubits")
        index = int(bits, 2)
    else:
        index = int(bits)
        if not 0 <= index < 2**qubits:
            raise ValueError("basis index out of range")
    amps = np.zeros(2**qubits, dtype=complex)
    amps[index] = 1.0
    return StateVector(qubits, amps)


def _apply_matrix(amps: np.ndarray, mat: np.ndarray, targets: tuple[int, ...], nq: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the listed qubit axes of a dense vector."""
    k = len(targets)
    tensor = amps.reshape((2,) * nq)
    mat_t = np.asarray(mat, dtype=complex).reshape((2,) * (2 * k))
    tensor = np.tensordot(mat_t, tensor, axes=(tuple(range(k, 2 * k)), targets))
    tensor = np.moveaxis(tensor, tuple(range(k)), targets)
    return np.ascontiguousarray(tensor).reshape(-1)


def apply_circuit(state: StateVector, circuit: Circuit) -> StateVector:
    """Run ``circuit`` on ``state``; norm is preserved to 1e-9 or an error is raised."""
    if circuit.qubits != state.qubits:
        raise ValueError(
            f"circuit acts on {circuit.qubits} qubits but state has {state.qubits}"
        )
    amps = np.array(state.amps, dtype=complex)
    for g in circuit.gates:
        amps = _apply_matrix(amps, g.full_matrix(), g.qubits, state.qubits)
    return StateVector(state.qubits, amps)


def _normalize_basis(basis, count: int) -> list[str]:
    if isinstance(basis, str) and len(basis) == 1:
        letters = [basis] * count
    else:
        letters = [str(b) for b in basis]
    if len(letters) != count:
        raise ValueError(f"{count} measured qubits but {len(letters)} basis letters")
    for b in letters:
        if b not in _BASIS_ROT:
            raise ValueError(f"unknown measurement basis {b!r}")
    return letters


def measure(state: StateVector, qubits, basis="Z", rng=None):
    """Measure the listed qubits, each in its own Z/X/Y basis.

    Returns ``(bits, post_state)`` where ``bits[i]`` is the outcome for
    ``qubits[i]`` (0 denotes the +1 eigenvector of the rotated basis) and
    ``post_state`` is the renormalized post-measurement state in the original
    frame.  The outcome is sampled from the Born rule and is deterministic
    given the stream position of ``rng``.
    """
    qubits = [int(q) for q in qubits]
    if not qubits:
        raise ValueError("measurement needs at least one qubit")
    if len(set(qubits)) != len(qubits):
        raise ValueError("measured qubits must be distinct")
    if any(not 0 <= q < state.qubits for q in qubits):
        raise ValueError("measured qubit out of range")
    letters = _normalize_basis(basis, len(qubits))
    gen = as_generator(rng)

    nq = state.qubits
    amps = np.array(state.amps, dtype=complex)
    for q, b in zip(qubits, letters):
        rot = _BASIS_ROT[b]
        if rot is not None:
            amps = _apply_matrix(amps, rot, (q,), nq)

    k = len(qubits)
    tensor = amps.reshape((2,) * nq)
    tensor = np.moveaxis(tensor, qubits, tuple(range(k)))
    block = np.ascontiguousarray(tensor).reshape(2**k, -1)
    probs = np.sum(np.abs(block) ** 2, axis=1)
    total = float(probs.sum())
    if total < _UNDERFLOW:
        raise ValueError("state norm underflow during measurement")

    u = gen.random() * total
    outcome = int(np.searchsorted(np.cumsum(probs), u, side="right"))
    outcome = min(outcome, 2**k - 1)

    post_block = np.zeros_like(block)
    post_block[outcome] = block[outcome] / math.sqrt(probs[outcome])
    post = np.moveaxis(post_block.reshape((2,) * nq), tuple(range(k)), qubits)
    post = np.ascontiguousarray(post).reshape(-1)
    for q, b in zip(qubits, letters):
        rot = _BASIS_ROT_INV[b]
        if rot is not None:
            post = _apply_matrix(post, rot, (q,), nq)

    bits = tuple((outcome >> (k - 1 - i)) & 1 for i in range(k))
    return bits, StateVector(nq, post)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate linear in the first argument."""
    if a.qubits != b.qubits:
        raise ValueError("inner product needs equal qubit counts")
    return complex(np.vdot(a.amps, b.amps))


def from_distribution(dist) -> StateVector:
    """Amplitude encoding of a distribution: amps[x] = sqrt(D(x))."""
    amps = np.zeros(2**dist.n, dtype=complex)
    for bits, p in dist.mass.items():
        amps[int(bits, 2)] = math.sqrt(p)
    return StateVector(dist.n, amps)


def born_distribution(state: StateVector):
    """The distribution of measuring every qubit in the Z basis."""
    from .dist import Distribution

    probs = state.probabilities()
    n = state.qubits
    mass = {
        format(i, f"0{n}b"): float(p)
        for i, p in enumerate(probs)
        if p > 1e-18
    }
    return Distribution(n, mass)


# ---------------------------------------------------------------------------
# Two-qubit-gate rewriting.  CSWAP is expanded into two CNOTs conjugating a
# Toffoli, and the Toffoli into the five-gate controlled-sqrt(X) network, so
# downstream constructions only ever see gates on at most two wires.


def _toffoli_network(c1: int, c2: int, t: int) -> list[Gate]:
    return [
        Gate("CU1", (c2, t), _SQRT_X),
        Gate("CNOT", (c1, c2)),
        Gate("CU1", (c2, t), _SQRT_X_DG),
        Gate("CNOT", (c1, c2)),
        Gate("CU1", (c1, t), _SQRT_X),
    ]


def _cswap_network(c: int, a: int, b: int) -> list[Gate]:
    return [Gate("CNOT", (b, a))] + _toffoli_network(c, a, b) + [Gate("CNOT", (b, a))]


def decompose_to_two_qubit(circuit: Circuit) -> Circuit:
    """Rewrite the circuit so every gate touches at most two qubits."""
    gates: list[Gate] = []
    for g in circuit.gates:
        if g.kind == "CSWAP":
            gates.extend(_cswap_network(*g.qubits))
        else:
            gates.append(g)
    return Circuit(circuit.qubits, tuple(gates))


def random_circuit(qubits: int, gate_count: int, rng, *, matrix_gates: bool = False) -> Circuit:
    """A seeded random circuit over the native gate set (plus U1/CU1 when asked)."""
    gen = as_generator(rng)
    kinds = ["H", "X", "Z", "S", "T"]
    if matrix_gates:
        kinds.append("U1")
    if qubits >= 2:
        kinds.append("CNOT")
        if matrix_gates:
            kinds.append("CU1")
    gates = []
    for _ in range(gate_count):
        kind = kinds[gen.integers(len(kinds))]
        arity = GATE_ARITY[kind]
        targets = tuple(int(q) for q in gen.choice(qubits, size=arity, replace=False))
        if kind in ("U1", "CU1"):
            z = gen.normal(size=(2, 2)) + 1j * gen.normal(size=(2, 2))
            q, _ = np.linalg.qr(z)
            gates.append(Gate(kind, targets, q))
        else:
            gates.append(Gate(kind, targets))
    return Circuit(qubits, tuple(gates))


# ---------------------------------------------------------------------------
# Circuit file format: {"qubits": q, "gates": [{"g": kind, "q": [...], "c": control,
# "m": [[re, im] x 4]}, ...]} with "c"/"m" present only where they apply.


def circuit_to_json(circuit: Circuit) -> str:
    records = []
    for g in circuit.gates:
        rec: dict = {"g": g.kind}
        if g.kind in ("CNOT", "CSWAP", "CU1"):
            rec["c"] = g.qubits[0]
            rec["q"] = list(g.qubits[1:])
        else:
            rec["q"] = list(g.qubits)
        if g.matrix is not None:
            rec["m"] = [[float(v.real), float(v.imag)] for v in g.matrix.reshape(-1)]
        records.append(rec)
    return json.dumps({"qubits": circuit.qubits, "gates": records})


def circuit_from_json(text: str) -> Circuit:
    data = json.loads(text)
    qubits = int(data["qubits"])
    gates = []
    for rec in data["gates"]:
        kind = rec["g"]
        targets = tuple(int(q) for q in rec["q"])
        if "c" in rec:
            targets = (int(rec["c"]),) + targets
        matrix = None
        if "m" in rec:
            pairs = rec["m"]
            if len(pairs) != 4:
                raise ValueError("gate matrix must have 4 [re, im] entries")
            matrix = np.array(
                [complex(re, im) for re, im in pairs], dtype=complex
            ).reshape(2, 2)
        gates.append(Gate(kind, targets, matrix))
    return Circuit(qubits, tuple(gates))
