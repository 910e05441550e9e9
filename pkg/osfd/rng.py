"""
Seeded random streams.

Every sampler in osfd draws from a :class:`SeededRng`, a thin owner of a
:class:`~numpy.random.SeedSequence` and a :class:`~numpy.random.PCG64`
bit generator. PCG64 produces the same stream on every platform, and its
state is a small dictionary of integers, so a stream can be frozen into
JSON and resumed exactly.
"""
from typing import Any, Dict, List

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from osfd.exceptions import UsageError
from osfd.typing import SeedLike

__all__ = ["SeededRng"]


class SeededRng:
    """
    SeededRng(seed=None)

    Owner of a seeded PCG64 stream.

    Parameters
    ----------
    seed : {None, int, Sequence[int], SeedSequence}, optional
        Entropy used to initialize the stream. ``None`` pulls fresh entropy
        from the OS, which makes the stream unreproducible.

    Attributes
    ----------
    generator : numpy.random.Generator
        Generator used by all samplers.
    seed_seq : numpy.random.SeedSequence
        Seed sequence the stream was built from.

    Notes
    -----
    A generator has a single owner. Use :meth:`spawn` to hand independent
    streams to parallel workers.
    """

    def __init__(self, seed: SeedLike = None) -> None:
        if isinstance(seed, SeedSequence):
            seed_seq = seed
        else:
            if isinstance(seed, (int, np.integer)) and seed < 0:
                raise UsageError("seed must be a non-negative integer")
            seed_seq = SeedSequence(seed)
        self.seed_seq = seed_seq
        self.generator = Generator(PCG64(seed_seq))

    def __repr__(self) -> str:
        return f"SeededRng(entropy={self.seed_seq.entropy})"

    def spawn(self, n_children: int) -> List["SeededRng"]:
        """
        Independent child streams

        Parameters
        ----------
        n_children : int
            Number of children to create

        Returns
        -------
        list[SeededRng]
            Children derived from this stream's seed sequence
        """
        return [SeededRng(child) for child in self.seed_seq.spawn(n_children)]

    @property
    def state(self) -> Dict[str, Any]:
        """
        JSON-serializable snapshot of the stream

        Returns
        -------
        dict
            The seed-sequence description and the bit generator state
        """
        seed_state = self.seed_seq.state
        return {
            "entropy": seed_state["entropy"],
            "spawn_key": list(seed_state["spawn_key"]),
            "pool_size": seed_state["pool_size"],
            "n_children_spawned": seed_state["n_children_spawned"],
            "bit_generator": self.generator.bit_generator.state,
        }

    @classmethod
    def from_state(cls, state: Dict[str, Any]) -> "SeededRng":
        """
        Restore a stream from :attr:`state`

        Parameters
        ----------
        state : dict
            Snapshot produced by :attr:`state`

        Returns
        -------
        SeededRng
            Stream that continues exactly where the snapshot was taken
        """
        try:
            seed_seq = SeedSequence(
                state["entropy"],
                spawn_key=tuple(state["spawn_key"]),
                pool_size=state["pool_size"],
                n_children_spawned=state["n_children_spawned"],
            )
            out = cls(seed_seq)
            out.generator.bit_generator.state = state["bit_generator"]
        except (KeyError, TypeError, ValueError) as err:
            raise UsageError(f"invalid random state: {err}") from err
        return out
