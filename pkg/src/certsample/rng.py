"""Deterministic random streams with named substream derivation.

Every source of randomness in the package is an :class:`RngStream`.  A stream
is identified by a root seed plus a path of labels; substreams derived from
distinct labels (for example ``stream.substream(run_index, "measure")``) are
statistically independent and do not depend on the order in which they are
created, which keeps transcripts reproducible even when meta-runs execute
concurrently.  Philox is counter based, so jumping to a substream is cheap.
"""

from __future__ import annotations

import zlib

import numpy as np

_LABEL_SPACE = 2**32


def _label_to_int(label) -> int:
    if isinstance(label, (int, np.integer)):
        value = int(label)
        if not 0 <= value < _LABEL_SPACE:
            raise ValueError(f"integer labels must lie in [0, 2^32), got {value}")
        return value
    if isinstance(label, str):
        return zlib.crc32(label.encode("utf-8"))
    raise TypeError(f"substream labels must be int or str, got {type(label).__name__}")


class RngStream:
    """Seeded random stream supporting independent named substreams."""

    __slots__ = ("seed", "path", "_gen")

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        seed = int(seed)
        if seed < 0:
            raise ValueError("seed must be non-negative")
        self.seed = seed
        self.path = tuple(_path)
        self._gen: np.random.Generator | None = None

    def substream(self, *labels) -> "RngStream":
        """Derive the stream identified by appending ``labels`` to this path."""
        return RngStream(self.seed, self.path + tuple(_label_to_int(l) for l in labels))

    @property
    def gen(self) -> np.random.Generator:
        """The numpy generator of this stream, created lazily and then consumed in call order."""
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, path={self.path})"


def as_generator(rng) -> np.random.Generator:
    """Accept either an RngStream or a bare numpy Generator."""
    if isinstance(rng, RngStream):
        return rng.gen
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError("expected RngStream or numpy Generator")
