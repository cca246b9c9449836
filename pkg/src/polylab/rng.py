"""Deterministic random-number streams for reproducible Monte Carlo runs.

Every stream is keyed by ``(master_seed, stream_index)`` and backed by numpy's
counter-based Philox generator, so the values drawn depend only on the key and
the draw counter -- never on thread scheduling, worker count, or the order in
which other streams are consumed.  Experiments derive one stream per unit of
work (for instance per ``(n, replication)`` cell), which makes results
byte-identical regardless of how the work is distributed.

``stream_index`` is a packed 63-bit integer::

    index = (tag << 48) | (slot << 24) | rep

where ``tag`` separates stream families (point clouds, projection panels,
retry draws, ...), ``slot`` usually carries the sample size ``n``, and ``rep``
the replication index.  The helpers below build the packed indices; callers
never need to unpack them.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolation

# Stream families.  POINTS carries the boundary samples of one (n, rep) cell;
# PREFIX carries the common-random-number draws shared by all n of one
# replication; PANEL seeds projection panels; RETRY is the one-shot resample
# family used after a degenerate hull; SCRATCH is for standalone consumers
# (Grassmannian sampling, tests).
TAG_POINTS = 0
TAG_PREFIX = 1
TAG_PANEL = 2
TAG_RETRY = 3
TAG_SCRATCH = 4

_SLOT_BITS = 24
_SLOT_MAX = (1 << _SLOT_BITS) - 1
_MASK64 = (1 << 64) - 1


def _pack(tag: int, slot: int, rep: int) -> int:
    if not (0 <= slot <= _SLOT_MAX and 0 <= rep <= _SLOT_MAX):
        raise ContractViolation(
            f"stream slot/rep out of range: slot={slot} rep={rep}"
        )
    return (tag << (2 * _SLOT_BITS)) | (slot << _SLOT_BITS) | rep


@dataclass
class RngStream:
    """One independent, restartable random stream.

    The underlying generator is created lazily and owns a draw counter; two
    ``RngStream`` objects with the same key always produce the same sequence.
    """

    master_seed: int
    stream_index: int = 0
    _gen: np.random.Generator | None = field(
        default=None, repr=False, compare=False
    )

    def __post_init__(self) -> None:
        if self.stream_index < 0:
            raise ContractViolation("stream_index must be non-negative")
        self.master_seed = int(self.master_seed) & _MASK64

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            seq = np.random.SeedSequence(
                self.master_seed, spawn_key=(self.stream_index,)
            )
            self._gen = np.random.Generator(np.random.Philox(seq))
        return self._gen

    def standard_normal(self, size=None) -> np.ndarray:
        return self.generator.standard_normal(size)

    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)


def point_stream(master_seed: int, n: int, rep: int) -> RngStream:
    """Stream feeding the boundary samples of one ``(n, replication)`` cell."""
    return RngStream(master_seed, _pack(TAG_POINTS, n, rep))


def prefix_stream(master_seed: int, rep: int) -> RngStream:
    """Common-random-number stream shared by all sample sizes of one replication."""
    return RngStream(master_seed, _pack(TAG_PREFIX, 0, rep))


def panel_stream(master_seed: int, ell: int) -> RngStream:
    """Stream used to generate the shared projection panel for subspace dim ``ell``."""
    return RngStream(master_seed, _pack(TAG_PANEL, ell, 0))


def retry_stream(master_seed: int, n: int, rep: int) -> RngStream:
    """One-shot resample stream used after a degenerate hull construction."""
    return RngStream(master_seed, _pack(TAG_RETRY, n, rep))


def scratch_stream(master_seed: int, slot: int = 0) -> RngStream:
    """Standalone stream for consumers outside the experiment grid."""
    return RngStream(master_seed, _pack(TAG_SCRATCH, slot, 0))
