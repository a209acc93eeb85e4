"""Named, counter-based random streams.

All randomness derives from one integer seed.  A stream name (``"instance"``,
``"sampling"``, ``"rules"``, ...) and an optional tuple of integers are hashed
into a 128-bit Philox key, so trial ``t`` of a run always sees the same draws
regardless of which worker executes it or in which order.
"""

from __future__ import annotations

import hashlib

import numpy as np

MASK64 = (1 << 64) - 1


def stream_key(seed: int, name: str, *parts: int) -> int:
    h = hashlib.blake2b(digest_size=16)
    h.update(str(int(seed) & MASK64).encode())
    h.update(b"\x00" + name.encode())
    for p in parts:
        h.update(b"\x00" + str(int(p)).encode())
    return int.from_bytes(h.digest(), "little")


def generator(seed: int, name: str, *parts: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=stream_key(seed, name, *parts)))


def trial_generator(key: int, trial: int) -> np.random.Generator:
    """Generator for one trial: fixed key, counter offset by the trial index."""
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, 0, trial]))


def partial_fisher_yates(rng: np.random.Generator, n: int, r: int) -> list[int]:
    """Uniform ``r``-subset of ``range(n)``, returned sorted.

    Runs the first ``r`` steps of a Fisher-Yates shuffle over a virtual
    identity array; only displaced slots are stored, so cost is O(r).
    """
    if not 0 <= r <= n:
        raise ValueError(f"cannot draw {r} of {n}")
    if r == 0:
        return []
    picks = rng.integers(np.arange(r), n).tolist()
    swapped: dict[int, int] = {}
    out = []
    for i, j in enumerate(picks):
        vi = swapped.get(i, i)
        vj = swapped.get(j, j)
        swapped[j] = vi
        out.append(vj)
    out.sort()
    return out
