"""Deterministic random-stream plumbing.

Every stochastic routine takes an explicit :class:`RngSeed`. Substreams are
derived from integer key paths, never from global state, so results are
reproducible for any scheduling of work across workers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_U64 = 2**64


@dataclass(frozen=True)
class RngSeed:
    """A (seed, stream-id) pair naming one independent random stream.

    Identical pairs always reproduce identical draws. ``stream_id`` separates
    parallel consumers (replications, bootstrap pipelines) that share a user
    seed.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("seed", "stream_id"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or not 0 <= int(v) < _U64:
                raise ValueError(f"{name} must be an integer in [0, 2**64)")

    def generator(self) -> np.random.Generator:
        """PCG64 generator for this stream."""
        return spawn(self)

    def child(self, *keys: int) -> "RngSeed":
        """Derive a named substream.

        The key path is folded into a fresh stream id via SeedSequence so
        that ``child(a)`` and ``child(b)`` are independent for ``a != b``.
        """
        ss = np.random.SeedSequence([self.seed, self.stream_id, *map(int, keys)])
        return RngSeed(self.seed, int(ss.generate_state(1, np.uint64)[0]))


def spawn(seed: RngSeed | int, *keys: int) -> np.random.Generator:
    """Generator for ``seed`` extended by an integer key path."""
    if isinstance(seed, RngSeed):
        words = [seed.seed, seed.stream_id]
    else:
        words = [int(seed), 0]
    words.extend(int(k) for k in keys)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(words)))


def as_generator(rng: RngSeed | int | np.random.Generator) -> np.random.Generator:
    """Accept a seed-like argument or a live generator.

    A live generator is returned as-is (caller owns its state); seeds are
    expanded through :func:`spawn`.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (RngSeed, int, np.integer)):
        return spawn(rng if isinstance(rng, RngSeed) else int(rng))
    raise TypeError(f"expected RngSeed, int, or numpy Generator, got {type(rng).__name__}")
