"""Per-subsystem random streams derived from one run seed.

Each subsystem draws from its own counter-based Philox stream, and always
draws arrays of a fixed shape per occasion, so its sequence never depends on
decisions taken elsewhere (handover offsets, RACH variant, BELL on/off).
"""
import numpy as np

STREAMS = ("layout", "mobility", "shadowing", "fading", "measurement")


def stream(seed: int, name: str) -> np.random.Generator:
    if name not in STREAMS:
        raise KeyError(f"unknown random stream {name!r}")
    ss = np.random.SeedSequence(seed, spawn_key=(STREAMS.index(name),))
    return np.random.Generator(np.random.Philox(ss))
