"""Named, seedable random streams for reproducible experiments.

All randomness flows through the counter-based Philox 4x64-10 generator.
Stream splitting is by key: the 128-bit Philox key is ``[seed, stream_id]``
where ``stream_id`` indexes a fixed role table.  Two runs with the same seed
therefore produce identical draws per role, independently of draw order
across roles, and the scheme is reproducible from this description alone.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "philox4x64-10"

# Fixed role table; new roles must be appended, never renumbered.
STREAMS = {
    "input": 0,
    "scheduling": 1,
    "init": 2,
    "query_input": 3,
    "query_scheduling": 4,
    "query_init": 5,
    "trials": 6,
}


def stream(seed: int, role: int | str) -> np.random.Generator:
    """Generator for the given role under ``seed``."""
    stream_id = STREAMS[role] if isinstance(role, str) else int(role)
    return np.random.Generator(np.random.Philox(key=[int(seed), stream_id]))


def metadata(seed: int) -> dict:
    """Provenance record identifying the generator and splitting scheme."""
    return {
        "generator": GENERATOR_NAME,
        "seed": int(seed),
        "key_scheme": "key = [seed, stream_id]",
        "streams": dict(STREAMS),
    }
