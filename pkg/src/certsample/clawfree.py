"""Toy claw-free 2-to-1 function family for the classical-verifier protocol.

                     *** NOT CRYPTOGRAPHICALLY SECURE ***

The family is the XOR shift f(b, x) = x XOR (b * s) for a secret nonzero
shift s.  It has every structural property the protocol mechanics consume:

* f is exactly 2-to-1 with preimages (0, y) and (1, y XOR s),
* the first preimage bit is literally the label b,
* the claw sum x0 XOR x1 = (1, s) is constant across images,
* the trapdoor inverts images efficiently.

It deliberately has no security whatsoever: anyone who can evaluate the
function twice recovers s (s = f(0, x) XOR f(1, x)), so the adaptive
hardcore bit property and the collapsing property both fail.  The test suite
demonstrates both failures explicitly.  Serialized keys carry a mandatory
``"insecure_toy": true`` marker.

Bit strings of length m are carried as Python ints below; responses also
record their length so malformed shapes can be rejected.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .rng import as_generator

_MAX_M = 62  # s is carried in an int64-friendly range


@dataclass(frozen=True)
class PublicKey:
    m: int
    key_id: int

    def __post_init__(self):
        if not 1 <= self.m <= _MAX_M:
            raise ValueError(f"m must lie in [1, {_MAX_M}]")


@dataclass(frozen=True)
class Trapdoor:
    m: int
    s: int  # nonzero m-bit claw shift
    key_id: int

    def __post_init__(self):
        if not 1 <= self.m <= _MAX_M:
            raise ValueError(f"m must lie in [1, {_MAX_M}]")
        if not 0 < self.s < 2**self.m:
            raise ValueError("shift s must be a nonzero m-bit value")


@dataclass(frozen=True)
class KeyPair:
    pk: PublicKey
    td: Trapdoor

    def __post_init__(self):
        if self.pk.m != self.td.m or self.pk.key_id != self.td.key_id:
            raise ValueError("public key and trapdoor do not pair")


@dataclass(frozen=True)
class Response:
    """Either a preimage (challenge 0) or an equation vector d (challenge 1)."""

    challenge: int
    bits: int
    length: int  # m + 1

    def __post_init__(self):
        if self.challenge not in (0, 1):
            raise ValueError("challenge must be 0 or 1")
        if not 0 <= self.bits < 2**self.length:
            raise ValueError("response bits exceed declared length")


@dataclass(frozen=True)
class CheckResult:
    ok: bool
    b_label: int | None = None
    parity: int | None = None


def gen_keypair(m: int, rng) -> KeyPair:
    """Fresh key pair with a uniformly random nonzero shift."""
    if m < 1:
        raise ValueError("m must be at least 1")
    if m > _MAX_M:
        raise ValueError(f"m must be at most {_MAX_M}")
    gen = as_generator(rng)
    s = int(gen.integers(1, 2**m))
    key_id = int(gen.integers(0, 2**62))
    return KeyPair(PublicKey(m, key_id), Trapdoor(m, s, key_id))


def evaluate(key: KeyPair, b: int, x: int) -> int:
    """f(b, x) = x XOR (b * s); exactly 2-to-1 over {0,1}^(m+1)."""
    m = key.pk.m
    if b not in (0, 1):
        raise ValueError("b must be a bit")
    if not 0 <= x < 2**m:
        raise ValueError(f"x must be an {m}-bit value")
    return x ^ (key.td.s if b else 0)


def preimages(key: KeyPair, y: int) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two preimages of y, labeled by their first bit: ((0, y), (1, y XOR s))."""
    m = key.pk.m
    if not 0 <= y < 2**m:
        raise ValueError(f"y must be an {m}-bit value")
    return (0, y), (1, y ^ key.td.s)


def claw_sum(td: Trapdoor) -> int:
    """x0 XOR x1 over the full (m+1)-bit preimages: the constant (1, s)."""
    return (1 << td.m) | td.s


def parity(a: int, b: int) -> int:
    """Inner product of two bit vectors carried as ints."""
    return bin(a & b).count("1") & 1


def verify_response(key: KeyPair, y: int, challenge: int, resp: Response) -> CheckResult:
    """Check a response against a committed image.

    Challenge 0: the response is a full (m+1)-bit preimage (b, x); ok means
    f(b, x) = y, and the label is the first bit.  Challenge 1: the response is
    an equation d; any well-formed d is ok and the result carries the claw
    parity d . (x0 XOR x1), computable only with the trapdoor.
    """
    m = key.pk.m
    if resp.length != m + 1:
        raise ValueError(f"response length {resp.length} does not match m+1 = {m + 1}")
    if resp.challenge != challenge:
        raise ValueError("response does not answer the issued challenge")
    if not 0 <= y < 2**m:
        raise ValueError("malformed image")
    if challenge == 0:
        b = (resp.bits >> m) & 1
        x = resp.bits & (2**m - 1)
        return CheckResult(ok=evaluate(key, b, x) == y, b_label=b)
    return CheckResult(ok=True, parity=parity(resp.bits, claw_sum(key.td)))


def recover_shift(key: KeyPair) -> int:
    """Break the family: two evaluations reveal s.  Insecure by design."""
    x = 0
    return evaluate(key, 0, x) ^ evaluate(key, 1, x)


# ---------------------------------------------------------------------------
# Serialization: JSON with a mandatory insecurity marker.


def keypair_to_json(key: KeyPair) -> str:
    return json.dumps(
        {
            "m": key.pk.m,
            "s": format(key.td.s, "x"),
            "id": key.pk.key_id,
            "insecure_toy": True,
        }
    )


def keypair_from_json(text: str) -> KeyPair:
    data = json.loads(text)
    if data.get("insecure_toy") is not True:
        raise ValueError("refusing to load a key without the insecure_toy marker")
    m = int(data["m"])
    s = int(data["s"], 16)
    key_id = int(data["id"])
    return KeyPair(PublicKey(m, key_id), Trapdoor(m, s, key_id))
