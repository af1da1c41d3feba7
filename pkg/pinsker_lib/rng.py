"""Seeded, splittable random streams.

Stream i of a master seed is a pure function of (seed, i): it is seeded from
numpy's SeedSequence with spawn key (i,), so streams never overlap and can be
rebuilt on any worker.
"""

import json

import numpy as np

from .errors import ParameterError


class RngStream:
    """A numpy Generator bound to (master seed, spawn key)."""

    def __init__(self, seed, key=()):
        self._seed = int(seed)
        self._key = tuple(int(part) for part in key)
        sequence = np.random.SeedSequence(self._seed, spawn_key=self._key)
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    @property
    def seed(self):
        """Master seed."""
        return self._seed

    @property
    def key(self):
        """Spawn key below the master seed."""
        return self._key

    @property
    def generator(self):
        """The underlying numpy Generator."""
        return self._generator

    @property
    def lineage(self):
        """Printable identifier, e.g. 'seed=7/3/12'."""
        return "/".join(["seed=%d" % self._seed] + [str(part) for part in self._key])

    def child(self, index):
        """Independent stream below this one."""
        return RngStream(self._seed, self._key + (index,))

    def to_json(self):
        """Serialize seed, key and the current generator state."""
        return json.dumps(
            {
                "seed": self._seed,
                "key": list(self._key),
                "state": self._generator.bit_generator.state,
            },
            sort_keys=True,
        )

    @staticmethod
    def from_json(text):
        """Rebuild a stream exactly where to_json left it."""
        data = json.loads(text)
        stream = RngStream(data["seed"], data["key"])
        stream.generator.bit_generator.state = data["state"]
        return stream

    def __repr__(self):
        return "RngStream(%s)" % self.lineage


def generator_of(stream):
    """Accept an RngStream or a bare numpy Generator."""
    return getattr(stream, "generator", stream)


def rng_streams(master_seed, count):
    """Streams 0..count-1 of the master seed."""
    if count < 1:
        raise ParameterError("Need at least one stream, got %s" % count)
    return [RngStream(master_seed, (index,)) for index in range(count)]
