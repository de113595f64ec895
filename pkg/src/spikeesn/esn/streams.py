"""Named random substreams derived from a single user seed

Every generator is built from ``numpy.random.SeedSequence(seed, spawn_key=...)``
where the first spawn key element is the fixed stream identifier below. The
mapping never changes, so a seed reproduces the same numbers on any machine.
"""

import numpy as np

STREAM_IDS = {
    "data": 0,
    "reservoir": 1,
    "encoder/train": 2,
    "encoder/test": 3,
}


def stream_rng(seed: int, name: str, *index: int) -> np.random.Generator:
    """Return the generator of a named substream

    Args:
        seed: user seed
        name: one of STREAM_IDS
        index: optional extra spawn key elements, e.g. the sample index

    """
    try:
        stream_id = STREAM_IDS[name]
    except KeyError:
        raise ValueError(f"unknown random stream {name!r}") from None
    sequence = np.random.SeedSequence(int(seed), spawn_key=(stream_id, *[int(i) for i in index]))
    return np.random.default_rng(sequence)


class EncoderStream:
    """Per-sample generators for the spike encoder

    The generator of sample ``i`` depends only on (seed, name, i), so encodings
    do not depend on evaluation order.
    """

    def __init__(self, seed: int, name: str = "encoder/train") -> None:
        """Constructor

        Args:
            seed: user seed
            name: encoder/train or encoder/test

        """
        if name not in STREAM_IDS:
            raise ValueError(f"unknown random stream {name!r}")
        self.seed = int(seed)
        self.name = name

    def for_sample(self, index: int) -> np.random.Generator:
        """Return the generator of one input sample"""
        return stream_rng(self.seed, self.name, index)
