"""Per-cell random streams.

Every sweep cell draws from numpy's Philox4x64 counter-based generator keyed
by ``SeedSequence([master_seed, cell_index])``, so a cell's draws depend on
nothing but those two integers and cells can run in any order or process.
"""
from __future__ import annotations

import numpy as np

__all__ = ["cell_rng", "cell_seed", "GENERATOR"]

GENERATOR = "numpy.random.Philox(SeedSequence([master_seed, cell_index]))"


def cell_seed(master: int, cell: int) -> int:
    """64-bit fingerprint of a cell's stream, recorded next to its results."""
    words = np.random.SeedSequence([int(master), int(cell)]).generate_state(2, np.uint32)
    return int(words[0]) | (int(words[1]) << 32)


def cell_rng(master: int, cell: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(master), int(cell)])))
