import math

import numpy as np
import pytest

from certsample import RngStream
from certsample.clawfree import (
    KeyPair,
    PublicKey,
    Response,
    Trapdoor,
    claw_sum,
    evaluate,
    gen_keypair,
    keypair_from_json,
    keypair_to_json,
    parity,
    preimages,
    recover_shift,
    verify_response,
)


def test_gen_nonzero_shift():
    rng = RngStream(1)
    for i in range(200):
        key = gen_keypair(4, rng.substream(i))
        assert 1 <= key.td.s < 16


def test_gen_collision_rate_matches_birthday():
    # two independent draws over 7 nonzero 3-bit shifts collide w.p. 1/7
    rng = RngStream(2)
    collisions = 0
    pairs = 1000
    for i in range(pairs):
        a = gen_keypair(3, rng.substream("a", i))
        b = gen_keypair(3, rng.substream("b", i))
        collisions += a.td.s == b.td.s
    mean = pairs / 7
    sigma = math.sqrt(pairs * (1 / 7) * (6 / 7))
    assert abs(collisions - mean) <= 4 * sigma


def test_eval_xor_definition():
    key = KeyPair(PublicKey(3, 9), Trapdoor(3, 0b101, 9))
    assert evaluate(key, 1, 0b011) == 0b110
    for x in range(8):
        assert evaluate(key, 0, x) == x


def test_exactly_two_to_one():
    rng = RngStream(3)
    for m in range(1, 11):
        key = gen_keypair(m, rng.substream(m))
        images = {}
        for b in (0, 1):
            for x in range(2**m):
                images.setdefault(evaluate(key, b, x), []).append((b, x))
        assert all(len(v) == 2 for v in images.values())
        for y, pre in images.items():
            assert sorted(pre) == sorted(preimages(key, y))


def test_claw_sum_constant():
    key = KeyPair(PublicKey(3, 1), Trapdoor(3, 0b101, 1))
    assert claw_sum(key.td) == 0b1101
    rng = RngStream(4)
    for m in range(1, 9):
        key = gen_keypair(m, rng.substream(m))
        cs = claw_sum(key.td)
        assert cs >> m == 1  # first bit always set: labels differ
        for y in range(2**m):
            (b0, x0), (b1, x1) = preimages(key, y)
            full0 = (b0 << m) | x0
            full1 = (b1 << m) | x1
            assert full0 ^ full1 == cs


def test_claw_parity_formula():
    rng = RngStream(5)
    for m in range(1, 9):
        key = gen_keypair(m, rng.substream(m))
        cs = claw_sum(key.td)
        for d in range(2 ** (m + 1)):
            d0 = d >> m
            rest = d & (2**m - 1)
            assert parity(d, cs) == d0 ^ parity(rest, key.td.s)


def test_verify_preimage_responses():
    key = gen_keypair(4, RngStream(6).substream("k"))
    y = 0b1010
    (b0, x0), (b1, x1) = preimages(key, y)
    for b, x in ((b0, x0), (b1, x1)):
        resp = Response(0, (b << 4) | x, 5)
        res = verify_response(key, y, 0, resp)
        assert res.ok and res.b_label == b
    bad = Response(0, ((b1 << 4) | x1) ^ 1, 5)
    assert not verify_response(key, y, 0, bad).ok


def test_verify_equation_classification_exhaustive():
    key = gen_keypair(3, RngStream(7).substream("k"))
    cs = claw_sum(key.td)
    for d in range(16):
        res = verify_response(key, 0, 1, Response(1, d, 4))
        assert res.ok
        assert res.parity == parity(d, cs)


def test_malformed_lengths_rejected():
    key = gen_keypair(3, RngStream(8).substream("k"))
    with pytest.raises(ValueError):
        verify_response(key, 0, 0, Response(0, 0, 3))
    with pytest.raises(ValueError):
        verify_response(key, 0, 1, Response(0, 0, 4))


def test_serialization_round_trip_and_marker():
    import json

    key = gen_keypair(5, RngStream(9).substream("k"))
    text = keypair_to_json(key)
    assert json.loads(text)["insecure_toy"] is True
    back = keypair_from_json(text)
    assert back == key
    stripped = json.dumps({k: v for k, v in json.loads(text).items() if k != "insecure_toy"})
    with pytest.raises(ValueError):
        keypair_from_json(stripped)


def test_adaptive_hardcore_property_FAILS_by_design():
    # The adaptive hardcore bit property demands that no efficient adversary
    # outputs a valid preimage AND a valid claw equation together.  This toy
    # family has NO such security: evaluation access reveals the shift, after
    # which the adversary wins with certainty.  This test documents the break.
    key = gen_keypair(6, RngStream(10).substream("k"))
    s = recover_shift(key)
    assert s == key.td.s
    y = 0b101010 & (2**6 - 1)
    preimage = Response(0, (0 << 6) | y, 7)  # (0, y) is always a preimage
    d = claw_sum(key.td)  # d . (x0 + x1) = parity(claw, claw); any d works
    equation = Response(1, d, 7)
    assert verify_response(key, y, 0, preimage).ok
    assert verify_response(key, y, 1, equation).parity == parity(d, claw_sum(key.td))
    # adversary wins both challenges with probability 1, not 1/2 + negligible


def test_collapsing_game_distinguisher_exists():
    # Collapsing game: challenger either leaves the two-preimage superposition
    # intact or measures it, then hands it over.  For a collapsing family no
    # efficient adversary can tell the difference.  Here the adversary knows
    # both preimages (the family leaks its trapdoor), projects onto their
    # superposition, and wins with probability about 3/4.
    gen = RngStream(11).substream("game").gen
    m = 3
    key = gen_keypair(m, RngStream(11).substream("key"))
    wins = 0
    trials = 6000
    for _ in range(trials):
        y = int(gen.integers(2**m))
        (b0, x0), (b1, x1) = preimages(key, y)
        i0 = (b0 << m) | x0
        i1 = (b1 << m) | x1
        amps = np.zeros(2 ** (m + 1), dtype=complex)
        amps[i0] = amps[i1] = 1 / math.sqrt(2)
        collapsed = bool(gen.integers(2))
        if collapsed:
            amps = np.zeros(2 ** (m + 1), dtype=complex)
            amps[i0 if gen.random() < 0.5 else i1] = 1.0
        plus = np.zeros(2 ** (m + 1), dtype=complex)
        plus[i0] = plus[i1] = 1 / math.sqrt(2)
        survive = abs(np.vdot(plus, amps)) ** 2
        guess_collapsed = gen.random() > survive
        wins += guess_collapsed == collapsed
    rate = wins / trials
    sigma = math.sqrt(0.25 / trials)
    assert rate >= 0.75 - 4 * sigma  # far above the 1/2 + negligible ceiling
