"""Batch experiment runner and property-suite verifier.

Subcommands:

* ``simulate --config cfg.json [--seed S] [--out DIR] [--jobs N]`` runs
  ``meta_runs`` independent protocol executions and writes a JSONL transcript
  stream plus a CSV summary.  Exit code 0 on completion regardless of
  verdicts; nonzero only on configuration or internal errors.
* ``sweep`` is simulate over a parameter grid given in the config.
* ``verify --suite NAME`` executes one of the named property suites
  (swap, reduction, mixture, estimator, clawfree) with fixed seeds and
  prints one pass/fail line per check.

Config schema (JSON)::

    {
      "model": "quantum" | "noniid" | "history" | "classical",
      "seed": 1234,
      "meta_runs": 10,
      "record_rounds": false,
      "sample_cap": 1000000,
      "circuit": {"file": "circuit.json"} | {"random": {"n": 2, "T": 3, "seed": 7}},
      "target": {"uniform": 2} | {"point": "01"} | {"mass": {"00": 0.5, ...}}
                | {"file": "dist.json"} | {"circuit": true},
      "params": {"eta": 0.1, "delta": 0.1, "K": 20, "N": 4000},
      "strategy": {"kind": "honest", ...},
      "m": 4,                      # classical key tail length
      "hamiltonian": {"from_circuit": true}
                   | {"strings": [{"coeff": -1.0, "letters": {"3": "Z", "4": "Z"}}]},
      "sweep": {"params.eta": [0.05, 0.1], "strategy.eps": [0.0, 0.2]}
    }

``target: {"circuit": true}`` sets the target to the distribution generated
by the reference circuit itself.  Strategy kinds and their fields mirror the
strategy catalog in :mod:`certsample.provers`.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import chamiltonian as ch
from .compare import build_comparison, reference_state
from .dist import (
    Distribution,
    f_map,
    hellinger,
    mixture_bound_holds,
    point_mass,
    random_distribution,
    total_variation,
    uniform,
)
from .protocols import (
    ProtocolParams,
    Verdict,
    run_classical,
    run_constant_memory,
    run_noniid_verifier,
    run_quantum_verifier,
    strings_energy,
    xz_strings_from_hamiltonian,
)
from .provers import ClassicalProver, HistoryProver, QuantumProver
from .rng import RngStream
from .statevec import (
    MAX_QUBITS,
    Circuit,
    apply_circuit,
    born_distribution,
    circuit_from_json,
    from_distribution,
    random_circuit,
    zero_state,
)

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "schema_version",
    "seed",
    "run",
    "model",
    "strategy",
    "eta",
    "delta",
    "K",
    "N",
    "accepted",
    "p",
    "gamma",
    "S_size",
    "dH_implied",
]


class ConfigError(Exception):
    pass


# ---------------------------------------------------------------------------
# Config interpretation


def load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc


def _build_circuit(spec: dict) -> Circuit:
    if "file" in spec:
        path = Path(spec["file"])
        if not path.exists():
            raise ConfigError(f"circuit file {path} does not exist")
        return circuit_from_json(path.read_text())
    if "random" in spec:
        r = spec["random"]
        return random_circuit(int(r["n"]), int(r["T"]), RngStream(int(r.get("seed", 0))))
    raise ConfigError("circuit spec needs 'file' or 'random'")


def _build_distribution(spec: dict, reference: Distribution | None = None) -> Distribution:
    if spec is True or spec == {"circuit": True}:
        if reference is None:
            raise ConfigError("no reference circuit distribution available here")
        return reference
    if "uniform" in spec:
        return uniform(int(spec["uniform"]))
    if "point" in spec:
        return point_mass(str(spec["point"]))
    if "mass" in spec:
        mass = {str(k): float(v) for k, v in spec["mass"].items()}
        n = len(next(iter(mass)))
        return Distribution(n, mass)
    if "file" in spec:
        path = Path(spec["file"])
        if not path.exists():
            raise ConfigError(f"distribution file {path} does not exist")
        return Distribution.from_json(path.read_text())
    raise ConfigError(f"bad distribution spec {spec}")


def _build_params(spec: dict) -> ProtocolParams:
    try:
        return ProtocolParams(
            eta=float(spec["eta"]),
            delta=float(spec["delta"]),
            K=int(spec.get("K", 1)),
            N=int(spec["N"]) if spec.get("N") is not None else None,
        )
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"bad params: {exc}") from exc


def _build_quantum_strategy(spec: dict, target: Distribution, d_ref: Distribution):
    kind = spec.get("kind")
    if kind == "honest":
        return QuantumProver.honest(target)
    if kind == "fixed_state":
        d = _build_distribution(spec["distribution"], d_ref)
        return QuantumProver.fixed(from_distribution(d))
    if kind == "ensemble":
        comps = [
            (float(c["weight"]), from_distribution(_build_distribution(c["distribution"], d_ref)))
            for c in spec["components"]
        ]
        return QuantumProver.ensemble(comps)
    if kind == "schedule":
        states = [
            from_distribution(_build_distribution(s, d_ref)) for s in spec["distributions"]
        ]
        return QuantumProver.schedule(states, cycle=bool(spec.get("cycle", False)))
    raise ConfigError(f"unknown quantum strategy kind {kind!r}")


def _build_history_strategy(spec: dict, comp, target: Distribution, d_ref: Distribution):
    kind = spec.get("kind")
    if kind == "honest_history":
        return HistoryProver.honest(comp, target)
    if kind == "corrupted_history":
        d = _build_distribution(spec.get("distribution", {"circuit": True}), target)
        return HistoryProver.corrupted(
            comp,
            from_distribution(d),
            mode=str(spec["mode"]),
            eps=float(spec.get("eps", 0.0)),
        )
    if kind == "ensemble_history":
        comps = []
        for c in spec["components"]:
            sub = _build_history_strategy(dict(c, kind=c["kind"]), comp, target, d_ref)
            comps.append((float(c["weight"]), sub))
        return HistoryProver.ensemble(comps)
    raise ConfigError(f"unknown history strategy kind {kind!r}")


def _build_classical_strategy(spec: dict, comp, target: Distribution):
    kind = spec.get("kind")
    if kind in ("honest_classical", "dishonest_preimage"):
        state = ch.history_state(comp, from_distribution(target)).state
        if kind == "honest_classical":
            return ClassicalProver.honest(state)
        return ClassicalProver.dishonest_preimage(state, float(spec.get("flip_prob", 1.0)))
    if kind == "biased_sampler":
        d = _build_distribution(spec["distribution"], target)
        state = ch.history_state(comp, from_distribution(d)).state
        return ClassicalProver.biased_sampler(state)
    raise ConfigError(f"unknown classical strategy kind {kind!r}")


def _build_xz_strings(spec: dict | None, ham: ch.LocalHamiltonian):
    if spec is None or spec.get("from_circuit"):
        return xz_strings_from_hamiltonian(ham)
    if "strings" in spec:
        out = []
        for rec in spec["strings"]:
            letters = {int(q): str(l) for q, l in rec["letters"].items()}
            out.append(ch.PauliString(float(rec["coeff"]), letters))
        return out
    raise ConfigError("hamiltonian spec needs 'from_circuit' or 'strings'")


def run_single(config: dict, run_index: int) -> Verdict:
    """Execute one protocol run of the experiment; deterministic in
    (config, run_index)."""
    model = config.get("model")
    if model not in ("quantum", "noniid", "history", "classical"):
        raise ConfigError(f"unknown model {model!r}")
    circuit = _build_circuit(config.get("circuit", {}))
    d_ref = born_distribution(apply_circuit(zero_state(circuit.qubits), circuit))
    target = _build_distribution(config.get("target", {"circuit": True}), d_ref)
    if target.n != circuit.qubits:
        raise ConfigError(
            f"target over {target.n} bits does not match circuit on {circuit.qubits} qubits"
        )
    params = _build_params(config.get("params", {}))
    seed = int(config.get("seed", 0))
    rng = RngStream(seed).substream("run", run_index)
    record = bool(config.get("record_rounds", False))
    cap = int(config.get("sample_cap", 1_000_000))
    strategy_spec = config.get("strategy", {"kind": "honest"})

    if model in ("quantum", "noniid"):
        prover = _build_quantum_strategy(strategy_spec, target, d_ref)
        runner = run_quantum_verifier if model == "quantum" else run_noniid_verifier
        return runner(circuit, params, prover, rng, record_rounds=record, sample_cap=cap)

    comp = build_comparison(circuit)
    ham = ch.build_hamiltonian(comp)
    if ham.layout.total > MAX_QUBITS:
        raise ConfigError(
            f"full system needs {ham.layout.total} qubits, above the cap {MAX_QUBITS}"
        )
    if model == "history":
        prover = _build_history_strategy(strategy_spec, comp, target, d_ref)
        return run_constant_memory(
            circuit, params, prover, rng, record_rounds=record, sample_cap=cap
        )

    strings = _build_xz_strings(config.get("hamiltonian"), ham)
    prover = _build_classical_strategy(strategy_spec, comp, target)
    verdict = run_classical(
        strings,
        ham.layout,
        params,
        int(config.get("m", 4)),
        prover,
        rng,
        record_rounds=record,
        sample_cap=cap,
    )
    if verdict.outcome != "error":
        implied = prover.implied_distribution(ham.layout)
        verdict.dh_implied = hellinger(implied, d_ref)
    return verdict


def _worker(payload: tuple[str, int]) -> tuple[int, Verdict]:
    text, run_index = payload
    return run_index, run_single(json.loads(text), run_index)


# ---------------------------------------------------------------------------
# Output writers


def _float_cell(value) -> str:
    if value is None:
        return ""
    return repr(float(value))


def _csv_row(config: dict, run_index: int, verdict: Verdict) -> list[str]:
    accepted = "" if verdict.model == "classical" else str(verdict.accepted).lower()
    return [
        str(CSV_SCHEMA_VERSION),
        str(int(config.get("seed", 0))),
        str(run_index),
        verdict.model,
        str(config.get("strategy", {}).get("kind", "honest")),
        _float_cell(verdict.params.eta),
        _float_cell(verdict.params.delta),
        str(verdict.params.K),
        str(verdict.N),
        accepted,
        _float_cell(verdict.p),
        _float_cell(verdict.gamma),
        str(verdict.sample_count),
        _float_cell(verdict.dh_implied),
    ]


def _jsonl_lines(run_index: int, verdict: Verdict):
    if verdict.records is not None:
        for rec in verdict.records:
            yield json.dumps(
                {"run": run_index, "round": rec.index, "type": rec.rtype, "data": rec.data},
                sort_keys=True,
            )
    summary = {
        "run": run_index,
        "summary": {
            "model": verdict.model,
            "outcome": verdict.outcome,
            "N": verdict.N,
            "p": verdict.p,
            "gamma": verdict.gamma,
            "S_size": verdict.sample_count,
            "S": verdict.S if len(verdict.S) <= 10000 else verdict.S[:10000],
            "x": verdict.x,
            "counters": verdict.counters,
            "error": verdict.error,
            "dH_implied": verdict.dh_implied,
        },
    }
    yield json.dumps(summary, sort_keys=True)


def _execute_runs(config: dict, jobs: int) -> list[tuple[int, Verdict]]:
    runs = int(config.get("meta_runs", 1))
    if runs < 1:
        raise ConfigError("meta_runs must be at least 1")
    if jobs <= 1 or runs == 1:
        return [(r, run_single(config, r)) for r in range(runs)]
    text = json.dumps(config)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(_worker, [(text, r) for r in range(runs)]))
    results.sort(key=lambda rv: rv[0])
    return results


def cmd_simulate(config: dict, out_dir: str, jobs: int) -> int:
    results = _execute_runs(config, jobs)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "transcripts.jsonl", "w", encoding="utf-8") as fh:
        for run_index, verdict in results:
            for line in _jsonl_lines(run_index, verdict):
                fh.write(line + "\n")
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for run_index, verdict in results:
            writer.writerow(_csv_row(config, run_index, verdict))
    accepted = sum(1 for _, v in results if v.accepted)
    errors = sum(1 for _, v in results if v.outcome == "error")
    print(
        f"{len(results)} runs: {accepted} accepted, {errors} errors; "
        f"outputs in {out}"
    )
    return 0


def _set_path(config: dict, dotted: str, value):
    parts = dotted.split(".")
    node = config
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def cmd_sweep(config: dict, out_dir: str, jobs: int) -> int:
    grid = config.get("sweep")
    if not grid:
        raise ConfigError("sweep config needs a 'sweep' table of param lists")
    keys = sorted(grid)
    combos: list[dict] = [{}]
    for key in keys:
        combos = [dict(c, **{key: v}) for c in combos for v in grid[key]]
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows: list[list[str]] = []
    for combo_index, combo in enumerate(combos):
        sub = json.loads(json.dumps(config))
        sub.pop("sweep", None)
        for dotted, value in combo.items():
            _set_path(sub, dotted, value)
        results = _execute_runs(sub, jobs)
        for run_index, verdict in results:
            rows.append(_csv_row(sub, run_index, verdict) + [json.dumps(combo, sort_keys=True)])
        print(f"grid point {combo_index}: {combo}")
    with open(out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS + ["sweep_point"])
        writer.writerows(rows)
    print(f"{len(rows)} rows in {out / 'summary.csv'}")
    return 0


# ---------------------------------------------------------------------------
# Property suites


def _check(name: str, ok: bool, detail: str) -> tuple[str, bool, str]:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    return name, ok, detail


def _suite_swap(seed: int):
    from .compare import accept_probability_analytic, accept_probability_exact

    checks = []
    rng = RngStream(seed)
    worst = 0.0
    for i in range(60):
        gen = rng.substream("case", i).gen
        n = int(gen.integers(1, 4))
        t = int(gen.integers(0, 6))
        circuit = random_circuit(n, t, gen, matrix_gates=True)
        comp = build_comparison(circuit)
        amps = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
        psi = from_amps(amps)
        exact = accept_probability_exact(comp, psi)
        analytic = accept_probability_analytic(psi, reference_state(comp))
        worst = max(worst, abs(exact - analytic))
    checks.append(_check("swap-oracle-equivalence", worst <= 1e-9, f"max gap {worst:.2e} <= 1e-9"))

    worst = 0.0
    for i in range(40):
        gen = rng.substream("dist", i).gen
        n = int(gen.integers(1, 3))
        circuit = random_circuit(n, int(gen.integers(0, 4)), gen)
        comp = build_comparison(circuit)
        d_ref = born_distribution(reference_state(comp))
        d = random_distribution(n, gen)
        exact = accept_probability_exact(comp, from_distribution(d))
        law = f_map(hellinger(d, d_ref))
        worst = max(worst, abs(exact - law))
    checks.append(_check("swap-hellinger-law", worst <= 1e-9, f"max gap {worst:.2e} <= 1e-9"))

    gen = rng.substream("mono").gen
    circuit = random_circuit(2, 3, gen)
    comp = build_comparison(circuit)
    d_ref = born_distribution(reference_state(comp))
    pairs = []
    for _ in range(30):
        d = random_distribution(2, gen)
        pairs.append((hellinger(d, d_ref), accept_probability_exact(comp, from_distribution(d))))
    pairs.sort()
    mono = all(pairs[i][1] >= pairs[i + 1][1] - 1e-12 for i in range(len(pairs) - 1))
    checks.append(_check("swap-monotonicity", mono, "acceptance falls as distance grows"))
    return checks


def from_amps(raw: np.ndarray):
    from .statevec import StateVector

    raw = np.asarray(raw, dtype=complex)
    return StateVector(int(math.log2(len(raw))), raw / np.linalg.norm(raw))


def _suite_reduction(seed: int):
    checks = []
    rng = RngStream(seed)
    worst_e = 0.0
    worst_clock = 0.0
    worst_out = 0.0
    for i in range(6):
        gen = rng.substream("case", i).gen
        n = 1
        t = int(gen.integers(0, 3))
        circuit = random_circuit(n, t, gen)
        comp = build_comparison(circuit)
        ham = ch.build_hamiltonian(comp)
        amps = gen.normal(size=2**n) + 1j * gen.normal(size=2**n)
        psi = from_amps(amps)
        hist = ch.history_state(comp, psi)
        worst_e = max(worst_e, abs(ch.energy_exact(ham, hist.state)))
        layout = hist.layout
        table = ch.clock_value_table(layout)
        probs = hist.state.probabilities()
        tp = layout.t_prime
        for j in range(tp + 1):
            worst_clock = max(worst_clock, abs(probs[table == j].sum() - 1.0 / (tp + 1)))
        idx = np.arange(len(probs))
        top = (table == tp) & (ch.bit_of(idx, layout.out, layout.total) == 1)
        from .compare import accept_probability_exact

        p_cond = probs[top].sum() / probs[table == tp].sum()
        worst_out = max(worst_out, abs(p_cond - accept_probability_exact(comp, psi)))
    checks.append(_check("reduction-ground-energy", worst_e <= 1e-9, f"max energy {worst_e:.2e} <= 1e-9"))
    checks.append(
        _check("reduction-clock-uniformity", worst_clock <= 1e-10, f"max gap {worst_clock:.2e} <= 1e-10")
    )
    checks.append(
        _check("reduction-output-law", worst_out <= 1e-10, f"max gap {worst_out:.2e} <= 1e-10")
    )
    worst_eig = 0.0
    for tp in range(1, 9):
        e = np.zeros((tp + 1, tp + 1))
        for j in range(tp + 1):
            e[j, j] = 1.0
        e[0, 0] = 0.5
        e[tp, tp] = 0.5
        for j in range(tp):
            e[j, j + 1] = -0.5
            e[j + 1, j] = -0.5
        worst_eig = min(worst_eig, float(np.linalg.eigvalsh(e).min()))
    checks.append(
        _check("reduction-propagation-psd", worst_eig >= -1e-12, f"min eigenvalue {worst_eig:.2e} >= 0")
    )
    return checks


def _suite_mixture(seed: int, instances: int = 100_000):
    checks = []
    rng = RngStream(seed)
    gen = rng.substream("scan").gen
    violations = 0
    tightest = math.inf
    for _ in range(instances):
        n = int(gen.integers(1, 3))
        k = int(gen.integers(1, 5))
        d_ref = random_distribution(n, gen)
        comps = []
        for _ in range(k):
            if gen.random() < 0.7:
                noise = random_distribution(n, gen)
                w = gen.random() * 0.2
                from .dist import mix as _mix

                comps.append(_mix([(1 - w, d_ref), (w, noise)]))
            else:
                comps.append(random_distribution(n, gen))
        weights = gen.dirichlet(np.ones(k))
        sim = sum(w * f_map(hellinger(d_ref, d)) for w, d in zip(weights, comps))
        slack = max(1.0 - sim, 0.0)
        eta = math.sqrt(slack / 50.0) / max(gen.random(), 0.05) if slack > 0 else gen.random() * 0.1 + 1e-6
        hypothesis, dist, bound = mixture_bound_holds(weights, comps, d_ref, eta)
        if hypothesis:
            if dist > bound:
                violations += 1
            if dist > 0:
                tightest = min(tightest, bound / dist)
    checks.append(
        _check(
            "mixture-eta-quarter-bound",
            violations == 0,
            f"{violations} violations in {instances} instances; tightest margin x{tightest:.2f}",
        )
    )
    gen = rng.substream("sandwich").gen
    worst = 0.0
    ident = 0.0
    for _ in range(1000):
        n = int(gen.integers(1, 4))
        p = random_distribution(n, gen)
        q = random_distribution(n, gen)
        dh = hellinger(p, q)
        tv = total_variation(p, q)
        worst = max(worst, dh * dh - tv, tv - math.sqrt(2) * dh)
        from .dist import bhattacharyya

        ident = max(ident, abs(1 - dh * dh - bhattacharyya(p, q)))
    checks.append(_check("metric-sandwich", worst <= 1e-10, f"max violation {worst:.2e} <= 1e-10"))
    checks.append(_check("hellinger-identity", ident <= 1e-10, f"max gap {ident:.2e} <= 1e-10"))
    return checks


def _suite_estimator(seed: int):
    checks = []
    rng = RngStream(seed)
    gen = rng.substream("main").gen
    circuit = random_circuit(1, 1, gen)
    comp = build_comparison(circuit)
    ham = ch.build_hamiltonian(comp)
    amps = gen.normal(size=2) + 1j * gen.normal(size=2)
    psi = from_amps(amps)
    hist = ch.history_state(comp, psi)
    rounds = 20000
    est = ch.estimate_energy(ham, hist.state, rounds, rng.substream("est"))
    exact = ch.energy_exact(ham, hist.state)
    bound = ham.term_count * _round_value_bound_for(ham) * 5.0 / math.sqrt(rounds)
    ok = abs(est - exact) <= bound
    checks.append(
        _check("estimator-history-unbiased", ok, f"|{est:.4f} - {exact:.4f}| <= {bound:.4f}")
    )
    gen2 = rng.substream("random-state").gen
    raw = gen2.normal(size=2**ham.qubits) + 1j * gen2.normal(size=2**ham.qubits)
    state = from_amps(raw)
    est = ch.estimate_energy(ham, state, rounds, rng.substream("est2"))
    exact = ch.energy_exact(ham, state)
    ok = abs(est - exact) <= bound
    checks.append(
        _check("estimator-random-state", ok, f"|{est:.4f} - {exact:.4f}| <= {bound:.4f}")
    )
    return checks


def _round_value_bound_for(ham) -> float:
    bound = 0.0
    for term in ham.terms:
        offset, rest = ch._split_strings(term)
        bound = max(bound, abs(offset) + sum(abs(s.coefficient) for s in rest))
    return bound


def _suite_clawfree(seed: int):
    from .clawfree import (
        claw_sum,
        evaluate,
        gen_keypair,
        parity,
        recover_shift,
        Response,
        verify_response,
    )

    checks = []
    rng = RngStream(seed)
    ok = True
    for m in range(1, 11):
        key = gen_keypair(m, rng.substream("gen", m))
        seen: dict[int, list] = {}
        for b in (0, 1):
            for x in range(2**m):
                seen.setdefault(evaluate(key, b, x), []).append((b, x))
        ok &= all(len(v) == 2 for v in seen.values())
    checks.append(_check("clawfree-two-to-one", ok, "every image has exactly 2 preimages, m <= 10"))

    key = gen_keypair(3, rng.substream("resp"))
    ok = True
    for d in range(2**4):
        resp = Response(1, d, 4)
        res = verify_response(key, 0, 1, resp)
        ok &= res.parity == parity(d, claw_sum(key.td))
    checks.append(_check("clawfree-equation-classification", ok, "exhaustive m = 3"))

    key = gen_keypair(8, rng.substream("break"))
    recovered = recover_shift(key)
    checks.append(
        _check(
            "clawfree-INSECURE-BY-DESIGN",
            recovered == key.td.s,
            "two evaluations recover the trapdoor shift; this family has NO security",
        )
    )

    # Collapsing game distinguisher: the adversary learns s from evaluations,
    # then projects onto the superposed preimage pair; success rate 3/4.
    from .statevec import StateVector, measure

    gen = rng.substream("collapse").gen
    m = 3
    key = gen_keypair(m, rng.substream("collapse-key"))
    s = key.td.s
    wins = 0
    trials = 4000
    for _ in range(trials):
        y = int(gen.integers(0, 2**m))
        x0 = y
        x1 = ((1 << m) | (y ^ s))
        amps = np.zeros(2 ** (m + 1), dtype=complex)
        amps[x0] = 1 / math.sqrt(2)
        amps[x1] = 1 / math.sqrt(2)
        state = StateVector(m + 1, amps)
        collapsed = bool(gen.integers(2))
        if collapsed:
            pick = x0 if gen.random() < 0.5 else x1
            amps = np.zeros(2 ** (m + 1), dtype=complex)
            amps[pick] = 1.0
            state = StateVector(m + 1, amps)
        # Distinguisher: unitary sending (|x0> + |x1>)/sqrt(2) -> |x0>, then
        # a basis check.  Equivalent test: measure in the  {+,-}  frame of the
        # two-dimensional span.
        plus = np.zeros(2 ** (m + 1), dtype=complex)
        plus[x0] = 1 / math.sqrt(2)
        plus[x1] = 1 / math.sqrt(2)
        overlap = abs(np.vdot(plus, state.amps)) ** 2
        guess_collapsed = gen.random() > overlap
        wins += int(guess_collapsed == collapsed)
    rate = wins / trials
    checks.append(
        _check(
            "clawfree-collapsing-distinguisher",
            rate > 0.70,
            f"toy family fails the collapsing game: adversary wins {rate:.3f} >> 1/2",
        )
    )
    return checks


SUITES = {
    "swap": _suite_swap,
    "reduction": _suite_reduction,
    "mixture": _suite_mixture,
    "estimator": _suite_estimator,
    "clawfree": _suite_clawfree,
}


def cmd_verify(suite: str, seed: int) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; available: {', '.join(sorted(SUITES))}", file=sys.stderr)
        return 2
    checks = SUITES[suite](seed)
    failed = [name for name, ok, _ in checks if not ok]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
        return 1
    print(f"suite {suite}: all {len(checks)} checks passed")
    return 0


# ---------------------------------------------------------------------------


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="certsample", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a batch experiment from a config file")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_sim.add_argument("--out", default="out", help="output directory")
    p_sim.add_argument("--jobs", type=int, default=1, help="worker processes for meta-runs")

    p_sweep = sub.add_parser("sweep", help="simulate over the parameter grid in the config")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--out", default="out")
    p_sweep.add_argument("--jobs", type=int, default=1)

    p_ver = sub.add_parser("verify", help="run a named property suite")
    p_ver.add_argument("--suite", required=True)
    p_ver.add_argument("--seed", type=int, default=20240801)

    args = parser.parse_args(argv)
    try:
        if args.command == "verify":
            return cmd_verify(args.suite, args.seed)
        config = load_config(args.config)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.command == "simulate":
            return cmd_simulate(config, args.out, args.jobs)
        return cmd_sweep(config, args.out, args.jobs)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal errors exit nonzero, per contract
        print(f"internal error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
