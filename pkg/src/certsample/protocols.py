"""The four verifier engines, round accounting, thresholds, and verdicts.

Round-count table
-----------------

All big-O round counts are pinned to explicit constants by inverting the
Chernoff-Hoeffding tail 2 exp(-eps^2 k / 2) <= delta, i.e.
k = ceil(2 ln(2/delta) / eps^2) (:func:`rounds_needed`), composed with union
bounds exactly as the correctness arguments require:

* quantum / non-iid engines (two round types): the overlap estimate must sit
  within eta^2 of its mean with failure delta/2, and both types must occur at
  least N/4 times, which fails with probability at most 2 exp(-N/32) per
  type.  Hence N = max(4 max(K, rounds_needed(eta^2, delta/2)),
  ceil(32 ln(4/delta))); the non-iid engine drops the K factor.
* constant-memory engine (three types): the energy estimate, scaled by the
  term count L, must sit within eta^2/(4 T'^3) of its mean; per-round values
  are bounded by v_max, so after rescaling to [0, 1] the accuracy target is
  eta^2 / (4 T'^3 L 2 v_max).  The output estimate needs accuracy eta^2/4 on
  rounds that pass the clock gate (rate about 1/(T'+1)), and the sample
  harvest needs about K(T'+1) qualifying rounds.  Type balance at N/6 fails
  with probability at most 2 exp(-N/72) per type.
* classical engine: same composition with per-round energy increments
  bounded by twice the largest same-basis coefficient sum and a further
  factor 2 for the challenge coin.

Acceptance predicates: the quantum, non-iid and constant-memory engines
abort in-protocol (reject) exactly at the thresholds from
:func:`thresholds`.  The classical engine returns raw estimates without
applying thresholds; apply :func:`classical_accept` post hoc.  Threshold
checks use the overlap mean over overlap-test rounds; the energy ceiling is
eta^2/(2 T'^3), the constant the correctness argument supports.

Accept, reject, and error are distinct outcomes: malformed prover behavior
(wrong state size, exhausted schedule, failed preimage check) yields an
error verdict and never counts as soundness data.

Performance: when the prover is i.i.d. and round records are not requested,
engines run in aggregate mode, drawing the sufficient statistics of the run
(type counts, per-state Bernoulli and multinomial counts) from their exact
distributions instead of looping over rounds.  This is statistically
identical to the per-round loop (the tests cross-validate the two paths) and
makes the theorem-scale default round counts affordable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import chamiltonian as ch
from .compare import (
    ComparisonCircuit,
    accept_probability_exact,
    build_comparison,
    reference_state,
)
from .dist import Distribution, hellinger, mix
from .rng import RngStream
from .statevec import Circuit, StateVector, born_distribution

DEFAULT_SAMPLE_CAP = 1_000_000


@dataclass(frozen=True)
class ProtocolParams:
    """Closeness parameter eta, failure probability delta, target sample count
    K, and an optional explicit round count N overriding the default table."""

    eta: float
    delta: float
    K: int = 1
    N: int | None = None

    def __post_init__(self):
        if not 0.0 < self.eta < 0.5:
            raise ValueError("eta must lie in (0, 0.5) so that 1 - 2 eta^2 > 1/2")
        if not 0.0 < self.delta < 1.0 / 3.0:
            raise ValueError("delta must lie in (0, 1/3)")
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.N is not None and self.N < 1:
            raise ValueError("explicit N must be positive")


@dataclass(frozen=True)
class Thresholds:
    p_min: float
    energy_max: float


def thresholds(params: ProtocolParams, t_prime: int) -> Thresholds:
    """Accept thresholds: overlap mean at least 1 - 2 eta^2 and scaled energy
    at most eta^2 / (2 T'^3)."""
    return Thresholds(
        p_min=1.0 - 2.0 * params.eta**2,
        energy_max=params.eta**2 / (2.0 * t_prime**3),
    )


def rounds_needed(epsilon: float, delta: float) -> int:
    """Smallest k with 2 exp(-eps^2 k / 2) <= delta for a [0, 1]-bounded mean."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    return math.ceil(2.0 * math.log(2.0 / delta) / epsilon**2)


def quantum_round_count(params: ProtocolParams) -> int:
    base = rounds_needed(params.eta**2, params.delta / 2.0)
    balance = math.ceil(32.0 * math.log(4.0 / params.delta))
    return max(4 * max(params.K, base), balance)


def noniid_round_count(params: ProtocolParams) -> int:
    base = rounds_needed(params.eta**2, params.delta / 2.0)
    balance = math.ceil(32.0 * math.log(4.0 / params.delta))
    return max(4 * base, balance)


def constant_memory_round_count(params: ProtocolParams, ham: ch.LocalHamiltonian) -> int:
    tp = ham.layout.t_prime
    L = ham.term_count
    v_max = _round_value_bound(ham)
    eps_energy = params.eta**2 / (4.0 * tp**3)
    eps_scaled = eps_energy / (L * 2.0 * v_max)
    n_energy = rounds_needed(eps_scaled, params.delta / 6.0)
    n_output = 2 * (tp + 1) * rounds_needed(params.eta**2 / 4.0, params.delta / 6.0)
    n_sample = 2 * params.K * (tp + 1)
    balance = math.ceil(72.0 * math.log(36.0 / params.delta))
    return max(6 * n_energy, 6 * n_output, 6 * n_sample, balance)


def classical_round_count(
    params: ProtocolParams, layout: ch.RegisterLayout, strings
) -> int:
    tp = layout.t_prime
    z_sum = sum(abs(s.coefficient) for s in strings if _letters_kind(s) == "Z")
    x_sum = sum(abs(s.coefficient) for s in strings if _letters_kind(s) == "X")
    v_max = 2.0 * max(z_sum, x_sum, 1e-12)
    eps_energy = params.eta**2 / (4.0 * tp**3)
    n_energy = rounds_needed(eps_energy / (2.0 * v_max), params.delta / 8.0)
    n_output = 2 * (tp + 1) * rounds_needed(params.eta**2 / 4.0, params.delta / 8.0)
    n_sample = 2 * params.K * (tp + 1)
    balance = math.ceil(72.0 * math.log(48.0 / params.delta))
    # Types occur at rate 1/3 and each challenge at rate 1/2.
    return max(6 * n_energy, 12 * n_output, 12 * n_sample, balance)


def _round_value_bound(ham: ch.LocalHamiltonian) -> float:
    bound = 0.0
    for term in ham.terms:
        offset, rest = ch._split_strings(term)
        scale = sum(abs(s.coefficient) for s in rest)
        bound = max(bound, abs(offset) + scale)
    return max(bound, 1e-12)


# ---------------------------------------------------------------------------
# Records and verdicts


@dataclass
class RoundRecord:
    index: int
    rtype: str
    data: dict


@dataclass
class Verdict:
    """Outcome of one protocol run.

    ``outcome`` is accept/reject for the aborting engines, ``complete`` for
    the classical engine (thresholds are applied post hoc there), or
    ``error`` for malformed runs.  ``S`` holds harvested samples up to the
    engine's cap; ``sample_count`` is the true harvest count.  ``p`` is the
    overlap estimate and ``gamma`` the scaled energy estimate where the
    protocol produces one.
    """

    model: str
    outcome: str
    N: int
    params: ProtocolParams
    S: list[str] = field(default_factory=list)
    sample_count: int = 0
    p: float | None = None
    gamma: float | None = None
    gamma_var: float | None = None
    counters: dict = field(default_factory=dict)
    x: str | None = None
    error: str | None = None
    dh_implied: float | None = None
    records: list[RoundRecord] | None = None

    @property
    def accepted(self) -> bool:
        return self.outcome == "accept"


def classical_accept(verdict: Verdict, params: ProtocolParams, t_prime: int) -> bool:
    """Post-hoc acceptance predicate for classical-engine verdicts."""
    th = thresholds(params, t_prime)
    if verdict.outcome == "error" or verdict.p is None or verdict.gamma is None:
        return False
    return verdict.gamma <= th.energy_max and verdict.p >= th.p_min


def _error(model: str, N: int, params: ProtocolParams, message: str, **extra) -> Verdict:
    return Verdict(model=model, outcome="error", N=N, params=params, error=message, **extra)


# ---------------------------------------------------------------------------
# Quantum verifier (and its non-iid variant): alternate Z-measurement rounds
# with SWAP-test rounds, then threshold the overlap mean.


def _sample_from_cdf(cdf: np.ndarray, gen, count: int = 1) -> np.ndarray:
    u = gen.random(count) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def _fig3_loop(comp, params, prover, rng, N, model, record_rounds, sample_cap):
    n = comp.payload
    p_min = thresholds(params, 1).p_min
    types = rng.substream("types").gen.integers(0, 2, size=N)
    g_meas = rng.substream("measure").gen
    g_prov = rng.substream("prover").gen
    cdf_cache: dict[int, tuple[StateVector, np.ndarray]] = {}
    acc_cache: dict[int, tuple[StateVector, float]] = {}
    born_cache: dict[int, Distribution] = {}
    S: list[str] = []
    sample_count = 0
    type0_states: list[StateVector] = []
    records: list[RoundRecord] | None = [] if record_rounds else None
    psum = 0
    n1 = 0
    for i in range(N):
        try:
            state = prover.state_for_round(i, g_prov)
        except IndexError as exc:
            return _error(model, N, params, f"prover failed in round {i}: {exc}"), None
        if state.qubits != n:
            return _error(
                model, N, params,
                f"prover sent {state.qubits} qubits, expected {n} (round {i})",
            ), None
        key = id(state)
        if types[i] == 0:
            entry = cdf_cache.get(key)
            if entry is None:
                entry = (state, np.cumsum(state.probabilities()))
                cdf_cache[key] = entry
            idx = int(_sample_from_cdf(entry[1], g_meas)[0])
            bits = format(idx, f"0{n}b")
            sample_count += 1
            if len(S) < sample_cap:
                S.append(bits)
            type0_states.append(state)
            if records is not None:
                records.append(RoundRecord(i, "sample", {"bits": bits}))
        else:
            entry = acc_cache.get(key)
            if entry is None:
                entry = (state, accept_probability_exact(comp, state))
                acc_cache[key] = entry
            bit = int(g_meas.random() < entry[1])
            psum += bit
            n1 += 1
            if records is not None:
                records.append(RoundRecord(i, "overlap", {"bit": bit}))
    if n1 == 0:
        return _error(model, N, params, "no overlap-test rounds occurred"), None
    p = psum / n1
    outcome = "accept" if p >= p_min else "reject"
    implied = None
    if type0_states:
        for s in type0_states:
            if id(s) not in born_cache:
                born_cache[id(s)] = born_distribution(s)
        w = 1.0 / len(type0_states)
        implied = mix([(w, born_cache[id(s)]) for s in type0_states])
    verdict = Verdict(
        model=model,
        outcome=outcome,
        N=N,
        params=params,
        S=S,
        sample_count=sample_count,
        p=p,
        counters={"n0": sample_count, "n1": n1},
        records=records,
    )
    return verdict, implied


def _fig3_aggregate(comp, params, prover, rng, N, model, sample_cap):
    n = comp.payload
    p_min = thresholds(params, 1).p_min
    comps = prover.components()
    for _, s in comps:
        if s.qubits != n:
            return _error(
                model, N, params, f"prover sent {s.qubits} qubits, expected {n}"
            ), None
    g = rng.substream("aggregate").gen
    weights = np.array([w for w, _ in comps], dtype=float)
    weights = weights / weights.sum()

    n1 = int(g.binomial(N, 0.5))
    n0 = N - n1
    counts1 = g.multinomial(n1, weights) if len(comps) > 1 else np.array([n1])
    psum = 0
    for cnt, (_, state) in zip(counts1, comps):
        if cnt:
            psum += int(g.binomial(int(cnt), accept_probability_exact(comp, state)))

    keep = min(n0, sample_cap)
    counts0 = g.multinomial(keep, weights) if len(comps) > 1 else np.array([keep])
    S: list[str] = []
    for cnt, (_, state) in zip(counts0, comps):
        if cnt:
            cdf = np.cumsum(state.probabilities())
            for idx in _sample_from_cdf(cdf, g, int(cnt)):
                S.append(format(int(idx), f"0{n}b"))
    if len(comps) > 1 and S:
        g.shuffle(S)
    if n1 == 0:
        return _error(model, N, params, "no overlap-test rounds occurred"), None
    p = psum / n1
    outcome = "accept" if p >= p_min else "reject"
    implied = prover.implied_distribution()
    verdict = Verdict(
        model=model,
        outcome=outcome,
        N=N,
        params=params,
        S=S,
        sample_count=n0,
        p=p,
        counters={"n0": n0, "n1": n1},
    )
    return verdict, implied


def _run_fig3(comp, params, prover, rng, N, model, record_rounds, sample_cap):
    aggregate = (
        prover.iid and not record_rounds and prover.components() is not None
    )
    if aggregate:
        verdict, implied = _fig3_aggregate(comp, params, prover, rng, N, model, sample_cap)
    else:
        verdict, implied = _fig3_loop(
            comp, params, prover, rng, N, model, record_rounds, sample_cap
        )
    if verdict.outcome != "error" and implied is not None:
        reference = born_distribution(reference_state(comp))
        verdict.dh_implied = hellinger(implied, reference)
    return verdict


def run_quantum_verifier(
    circuit: Circuit,
    params: ProtocolParams,
    prover,
    rng: RngStream,
    *,
    record_rounds: bool = False,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> Verdict:
    """Quantum-verifier engine: accept when the overlap mean reaches 1 - 2 eta^2.

    Type-0 rounds Z-measure the prover's state into the sample set; type-1
    rounds feed it to the comparison circuit and record the out bit.
    """
    comp = build_comparison(circuit)
    N = params.N if params.N is not None else quantum_round_count(params)
    return _run_fig3(comp, params, prover, rng, N, "quantum", record_rounds, sample_cap)


def run_noniid_verifier(
    circuit: Circuit,
    params: ProtocolParams,
    prover,
    rng: RngStream,
    *,
    record_rounds: bool = False,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> Verdict:
    """Single-sample variant: same loop without the K factor; on accept the
    verdict additionally carries one uniformly chosen element of S."""
    comp = build_comparison(circuit)
    N = params.N if params.N is not None else noniid_round_count(params)
    verdict = _run_fig3(comp, params, prover, rng, N, "noniid", record_rounds, sample_cap)
    if verdict.outcome == "accept":
        if not verdict.S:
            return _error(
                "noniid", N, params, "accepted run harvested no samples to return"
            )
        pick = rng.substream("select").gen.integers(len(verdict.S))
        verdict.x = verdict.S[int(pick)]
    return verdict


# ---------------------------------------------------------------------------
# Constant-memory verifier: energy sampling, sample harvest, output estimate.


class _HistoryStateCache:
    """Per-state exact statistics used by the constant-memory engine."""

    def __init__(self, state: StateVector, ham: ch.LocalHamiltonian, clock_table):
        self.state = state
        layout = ham.layout
        n = layout.total
        probs = state.probabilities()
        self.cdf = np.cumsum(probs)
        idx = np.arange(len(probs), dtype=np.int64)
        dec = clock_table
        out_bits = ch.bit_of(idx, layout.out, n)
        aux_zero = np.ones(len(probs), dtype=bool)
        for q in layout.aux:
            aux_zero &= ch.bit_of(idx, q, n) == 0
        harvest_mask = (dec == 0) & (out_bits == 0) & aux_zero
        self.q_star = float(probs[harvest_mask].sum())
        if self.q_star > 0:
            adv_vals = ch.register_value(idx[harvest_mask], layout.adv, n)
            w = probs[harvest_mask]
            self.harvest_values = adv_vals
            self.harvest_cdf = np.cumsum(w)
        else:
            self.harvest_values = np.array([], dtype=np.int64)
            self.harvest_cdf = np.array([1.0])
        top_mask = dec == layout.t_prime
        self.p_top = float(probs[top_mask].sum())
        out_top = float(probs[top_mask & (out_bits == 1)].sum())
        self.p_star = out_top / self.p_top if self.p_top > 0 else 0.0
        self._pplus: dict[tuple[int, int], float] = {}
        self._ham = ham

    def pplus(self, t_idx: int, s_idx: int) -> float:
        key = (t_idx, s_idx)
        if key not in self._pplus:
            _, rest = ch._split_strings(self._ham.terms[t_idx])
            expect = ch.string_expectation(self.state, rest[s_idx])
            self._pplus[key] = min(max(0.5 * (1.0 + expect), 0.0), 1.0)
        return self._pplus[key]

    def harvest_bits(self, gen, count: int, payload: int) -> list[str]:
        picks = _sample_from_cdf(self.harvest_cdf, gen, count)
        return [format(int(self.harvest_values[i]), f"0{payload}b") for i in picks]


def _term_tables(ham: ch.LocalHamiltonian):
    """Per term: identity offset, per-string (weight, sign, scale, string)."""
    tables = []
    for term in ham.terms:
        offset, rest = ch._split_strings(term)
        w = np.array([abs(s.coefficient) for s in rest], dtype=float)
        scale = float(w.sum())
        probs = w / scale if scale > 0 else w
        signs = np.array([math.copysign(1.0, s.coefficient) for s in rest])
        tables.append((offset, rest, probs, signs, scale))
    return tables


def run_constant_memory(
    circuit: Circuit,
    params: ProtocolParams,
    prover,
    rng: RngStream,
    *,
    record_rounds: bool = False,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
) -> Verdict:
    """Constant-memory engine over history states.

    Each round draws one of three types uniformly: (1) energy, sampling one
    Hamiltonian term and one of its Pauli strings by importance; (2) sample,
    a full Z measurement harvesting adv when the clock decodes to 0 and out
    and aux read 0; (3) output, a full Z measurement adding the out bit to
    the overlap estimate when the clock decodes to T'.  Accept requires the
    scaled energy at most eta^2/(2 T'^3) and the overlap mean at least
    1 - 2 eta^2.
    """
    comp = build_comparison(circuit)
    ham = ch.build_hamiltonian(comp)
    layout = ham.layout
    tp = layout.t_prime
    th = thresholds(params, tp)
    N = params.N if params.N is not None else constant_memory_round_count(params, ham)
    model = "history"
    L = ham.term_count
    tables = _term_tables(ham)
    clock_table = ch.clock_value_table(layout)

    aggregate = prover.iid and not record_rounds
    caches: dict[int, _HistoryStateCache] = {}

    def cache_for(state: StateVector) -> _HistoryStateCache:
        key = id(state)
        if key not in caches:
            caches[key] = _HistoryStateCache(state, ham, clock_table)
        return caches[key]

    gamma_sum = 0.0
    gamma_sq = 0.0
    n1 = n2 = n3 = 0
    psum = 0
    S: list[str] = []
    sample_count = 0
    records: list[RoundRecord] | None = [] if record_rounds else None

    comps = prover.components()
    for _, s in comps:
        if s.qubits != layout.total:
            return _error(
                model, N, params,
                f"prover sent {s.qubits} qubits, expected {layout.total}",
            )

    if aggregate:
        g = rng.substream("aggregate").gen
        weights = np.array([w for w, _ in comps], dtype=float)
        weights = weights / weights.sum()
        cells = np.outer(weights, np.full(3, 1.0 / 3.0)).reshape(-1)
        counts = g.multinomial(N, cells).reshape(len(comps), 3)
        for c_idx, (_, state) in enumerate(comps):
            cache = cache_for(state)
            e_rounds, s_rounds, o_rounds = (int(v) for v in counts[c_idx])
            # Energy rounds: term multinomial, then string multinomial, then
            # a binomial per string on its exact +1 probability.
            if e_rounds:
                n1 += e_rounds
                per_term = g.multinomial(e_rounds, np.full(L, 1.0 / L))
                for t_idx in range(L):
                    k_t = int(per_term[t_idx])
                    if k_t == 0:
                        continue
                    offset, rest, probs, signs, scale = tables[t_idx]
                    gamma_sum += k_t * offset
                    if not rest:
                        gamma_sq += k_t * offset * offset
                        continue
                    per_string = (
                        g.multinomial(k_t, probs) if len(rest) > 1 else np.array([k_t])
                    )
                    for s_idx in range(len(rest)):
                        k_ts = int(per_string[s_idx])
                        if k_ts == 0:
                            continue
                        pp = cache.pplus(t_idx, s_idx)
                        b = int(g.binomial(k_ts, pp))
                        v_plus = offset + signs[s_idx] * scale
                        v_minus = offset - signs[s_idx] * scale
                        gamma_sum += signs[s_idx] * scale * (2 * b - k_ts)
                        gamma_sq += b * v_plus**2 + (k_ts - b) * v_minus**2
            # Sample rounds.
            if s_rounds:
                n2 += s_rounds
                hits = int(g.binomial(s_rounds, cache.q_star)) if cache.q_star > 0 else 0
                sample_count += hits
                room = sample_cap - len(S)
                if hits and room > 0:
                    S.extend(cache.harvest_bits(g, min(hits, room), layout.payload))
            # Output rounds.
            if o_rounds:
                hits = int(g.binomial(o_rounds, cache.p_top)) if cache.p_top > 0 else 0
                n3 += hits
                if hits:
                    psum += int(g.binomial(hits, cache.p_star))
        if len(comps) > 1 and S:
            g.shuffle(S)
    else:
        types = rng.substream("types").gen.integers(0, 3, size=N)
        g = rng.substream("measure").gen
        g_prov = rng.substream("prover").gen
        for i in range(N):
            try:
                state = prover.state_for_round(i, g_prov)
            except IndexError as exc:
                return _error(model, N, params, f"prover failed in round {i}: {exc}")
            if state.qubits != layout.total:
                return _error(
                    model, N, params,
                    f"prover sent {state.qubits} qubits, expected {layout.total}",
                )
            cache = cache_for(state)
            rtype = int(types[i])
            if rtype == 0:
                t_idx = int(g.integers(L))
                offset, rest, probs, signs, scale = tables[t_idx]
                value = offset
                detail = {"term": t_idx}
                if rest:
                    s_idx = (
                        int(_sample_from_cdf(np.cumsum(probs), g)[0])
                        if len(rest) > 1
                        else 0
                    )
                    pp = cache.pplus(t_idx, s_idx)
                    m_out = 1 if g.random() < pp else -1
                    value += signs[s_idx] * scale * m_out
                    detail["string"] = s_idx
                    detail["outcome"] = m_out
                gamma_sum += value
                gamma_sq += value * value
                n1 += 1
                if records is not None:
                    records.append(RoundRecord(i, "energy", detail))
            else:
                idx = int(_sample_from_cdf(cache.cdf, g)[0])
                dec = int(clock_table[idx])
                n_total = layout.total
                if rtype == 1:
                    n2 += 1
                    harvested = None
                    out_bit = int(ch.bit_of(idx, layout.out, n_total))
                    aux_ok = all(
                        int(ch.bit_of(idx, q, n_total)) == 0 for q in layout.aux
                    )
                    if dec == 0 and out_bit == 0 and aux_ok:
                        adv_val = int(ch.register_value([idx], layout.adv, n_total)[0])
                        harvested = format(adv_val, f"0{layout.payload}b")
                        sample_count += 1
                        if len(S) < sample_cap:
                            S.append(harvested)
                    if records is not None:
                        records.append(
                            RoundRecord(i, "sample", {"clock": dec, "bits": harvested})
                        )
                else:
                    counted = dec == tp
                    bit = None
                    if counted:
                        bit = int(ch.bit_of(idx, layout.out, n_total))
                        psum += bit
                        n3 += 1
                    if records is not None:
                        records.append(
                            RoundRecord(i, "output", {"clock": dec, "bit": bit})
                        )

    if n1 == 0:
        return _error(model, N, params, "no energy rounds occurred")
    if n3 == 0:
        return _error(model, N, params, "no output rounds passed the clock gate")
    gamma_mean = gamma_sum / n1
    gamma_est = gamma_mean * L
    gamma_var = max(gamma_sq / n1 - gamma_mean**2, 0.0)
    p = psum / n3
    accept = gamma_est <= th.energy_max and p >= th.p_min
    verdict = Verdict(
        model=model,
        outcome="accept" if accept else "reject",
        N=N,
        params=params,
        S=S,
        sample_count=sample_count,
        p=p,
        gamma=gamma_est,
        gamma_var=gamma_var,
        counters={"n1": n1, "n2": n2, "n3": n3},
        records=records,
    )
    implied = prover.implied_distribution()
    if implied is not None:
        reference = born_distribution(reference_state(comp))
        verdict.dh_implied = hellinger(implied, reference)
    return verdict


# ---------------------------------------------------------------------------
# Classical verifier: commitments via the toy claw-free family.


def _letters_kind(string: ch.PauliString) -> str:
    kinds = {letter for letter in string.letters.values()}
    if len(kinds) != 1:
        raise ValueError(f"string must be all-Z or all-X, got {sorted(kinds)}")
    (kind,) = kinds
    if kind not in ("Z", "X"):
        raise ValueError(f"string must be all-Z or all-X, got {kind}")
    return kind


def xz_strings_from_hamiltonian(ham: ch.LocalHamiltonian) -> list[ch.PauliString]:
    """The all-Z and all-X Pauli strings of a local Hamiltonian, merged by
    support; identity components are dropped."""
    merged: dict[tuple, float] = {}
    for term in ham.terms:
        for s in term.strings():
            if not s.letters:
                continue
            kinds = set(s.letters.values())
            if kinds not in ({"Z"}, {"X"}):
                continue
            key = tuple(sorted(s.letters.items()))
            merged[key] = merged.get(key, 0.0) + s.coefficient
    return [
        ch.PauliString(c, dict(k)) for k, c in sorted(merged.items()) if abs(c) > 1e-12
    ]


def strings_energy(strings, state: StateVector) -> float:
    """Exact energy of a Pauli-string Hamiltonian on a state."""
    return float(
        sum(s.coefficient * ch.string_expectation(state, s) for s in strings)
    )


def run_classical(
    strings,
    layout: ch.RegisterLayout,
    params: ProtocolParams,
    key_bits: int,
    prover,
    rng: RngStream,
    *,
    record_rounds: bool = False,
    sample_cap: int = DEFAULT_SAMPLE_CAP,
    chunk_size: int = 65536,
) -> Verdict:
    """Classical-verifier engine over an all-Z / all-X string Hamiltonian.

    Per round: fresh key pairs, commitments, a challenge coin, then either
    the preimage check plus the typed computational-basis update (energy from
    all-Z terms with a factor 2 for the basis coin, sample harvest, or output
    estimate) or the equation collection plus the all-X energy update.  A
    failed preimage check aborts the whole run with an error verdict.  No
    acceptance predicate is applied; see :func:`classical_accept`.
    """
    model = "classical"
    n_prime = layout.total
    tp = layout.t_prime
    m = key_bits
    if prover.state.qubits != n_prime:
        return _error(
            model, 0, params,
            f"prover state has {prover.state.qubits} qubits, expected {n_prime}",
        )
    z_terms = []
    x_terms = []
    for s in strings:
        (z_terms if _letters_kind(s) == "Z" else x_terms).append(s)
    N = params.N if params.N is not None else classical_round_count(params, layout, strings)

    g = rng.substream("rounds").gen
    z_supports = [np.array(sorted(s.letters), dtype=np.int64) for s in z_terms]
    z_coeffs = np.array([s.coefficient for s in z_terms])
    x_supports = [np.array(sorted(s.letters), dtype=np.int64) for s in x_terms]
    x_coeffs = np.array([s.coefficient for s in x_terms])
    clock_cols = np.array(layout.clock, dtype=np.int64)
    aux_cols = np.array(layout.aux, dtype=np.int64)
    adv_cols = np.array(layout.adv, dtype=np.int64)

    gamma_sum = 0.0
    gamma_sq = 0.0
    psum = 0
    n1 = n2 = n3 = 0
    preimage_rounds = 0
    sample_count = 0
    S: list[str] = []
    records: list[RoundRecord] | None = [] if record_rounds else None

    def bits_matrix(indices: np.ndarray) -> np.ndarray:
        shifts = n_prime - 1 - np.arange(n_prime, dtype=np.int64)
        return ((indices[:, None] >> shifts[None, :]) & 1).astype(np.int64)

    done = 0
    while done < N:
        cnt = min(chunk_size, N - done)
        types = g.integers(1, 4, size=cnt)
        challenges = g.integers(0, 2, size=cnt)
        s_keys = g.integers(1, 2**m, size=(cnt, n_prime), dtype=np.int64)
        ys = prover.commit_batch(m, cnt, n_prime, g)

        b0 = challenges == 0
        c0 = int(b0.sum())
        if c0:
            z_idx = prover.z_index_batch(g, c0)
            b_bits = bits_matrix(z_idx)
            tails = prover.preimage_tails(g, b_bits, ys[b0], s_keys[b0])
            check = (tails ^ (b_bits * s_keys[b0])) == ys[b0]
            ok_rows = np.all(check, axis=1)
            preimage_rounds += c0
            if not np.all(ok_rows):
                local = int(np.argmin(ok_rows))
                round_index = int(np.nonzero(b0)[0][local]) + done
                return _error(
                    model, N, params,
                    f"preimage check failed in round {round_index}",
                    counters={
                        "n1": n1, "n2": n2, "n3": n3,
                        "preimage_rounds": preimage_rounds - c0 + local,
                    },
                )
            types0 = types[b0]
            # Energy rounds: every all-Z term, weight 2 for the basis coin.
            e_rows = types0 == 1
            n_e = int(e_rows.sum())
            if n_e and z_terms:
                vals = np.zeros(n_e)
                eb = b_bits[e_rows]
                for sup, coeff in zip(z_supports, z_coeffs):
                    par = eb[:, sup].sum(axis=1) & 1
                    vals += coeff * (1.0 - 2.0 * par)
                vals *= 2.0
                gamma_sum += float(vals.sum())
                gamma_sq += float((vals * vals).sum())
            if n_e:
                n1 += n_e
            # Output rounds: clock decodes to T' iff every clock bit is 1.
            o_rows = types0 == 2
            if int(o_rows.sum()):
                ob = b_bits[o_rows]
                gate = ob[:, clock_cols].sum(axis=1) == tp
                hits = int(gate.sum())
                n2 += hits
                if hits:
                    psum += int(ob[gate, layout.out].sum())
            # Sample rounds: clock 0, out 0, aux 0.
            h_rows = types0 == 3
            n_h = int(h_rows.sum())
            if n_h:
                n3 += n_h
                hb = b_bits[h_rows]
                gate = (hb[:, clock_cols].sum(axis=1) == 0) & (hb[:, layout.out] == 0)
                if len(aux_cols):
                    gate &= hb[:, aux_cols].sum(axis=1) == 0
                hits = np.nonzero(gate)[0]
                sample_count += len(hits)
                for r in hits:
                    if len(S) >= sample_cap:
                        break
                    bits = "".join(str(int(v)) for v in hb[r, adv_cols])
                    S.append(bits)
        c1 = cnt - c0
        if c1:
            x_idx = prover.x_index_batch(g, c1)
            o_bits_full = bits_matrix(x_idx)
            d = prover.equations(g, m, o_bits_full, s_keys[~b0])
            # Verifier-side parities d . (1, s) per block, via the trapdoors.
            d0 = d >> m
            inner = _popcount_parity_matrix(d & (2**m - 1), s_keys[~b0])
            parities = d0 ^ inner
            e_rows = types[~b0] == 1
            n_e = int(e_rows.sum())
            if n_e and x_terms:
                vals = np.zeros(n_e)
                eb = parities[e_rows]
                for sup, coeff in zip(x_supports, x_coeffs):
                    par = eb[:, sup].sum(axis=1) & 1
                    vals += coeff * (1.0 - 2.0 * par)
                vals *= 2.0
                gamma_sum += float(vals.sum())
                gamma_sq += float((vals * vals).sum())
            if n_e:
                n1 += n_e
        if records is not None:
            for i in range(cnt):
                records.append(
                    RoundRecord(
                        done + i,
                        {1: "energy", 2: "output", 3: "sample"}[int(types[i])],
                        {"challenge": int(challenges[i])},
                    )
                )
        done += cnt

    gamma_est = gamma_sum / n1 if n1 else None
    gamma_var = max(gamma_sq / n1 - (gamma_sum / n1) ** 2, 0.0) if n1 else None
    p_est = psum / n2 if n2 else None
    verdict = Verdict(
        model=model,
        outcome="complete",
        N=N,
        params=params,
        S=S,
        sample_count=sample_count,
        p=p_est,
        gamma=gamma_est,
        gamma_var=gamma_var,
        counters={
            "n1": n1,
            "n2": n2,
            "n3": n3,
            "preimage_rounds": preimage_rounds,
        },
        records=records,
    )
    return verdict


def _popcount_parity_matrix(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    v = (values & mask).astype(np.int64)
    for shift in (32, 16, 8, 4, 2, 1):
        v ^= v >> shift
    return v & 1
