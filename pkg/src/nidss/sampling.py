"""Ancestral sampling: draw complete assignments in topological order.

Sampling is driven by pre-drawn uniforms from a seeded PCG64 generator, so
a fixed seed gives identical draws regardless of the active kernel backend.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .inference import _pack
from .network import Assignment, Dataset, Network


def sample_codes(net: Network, n: int, seed) -> np.ndarray:
    """``(n, n_vars)`` matrix of state codes, columns in `net.names` order."""
    p = _pack(net)
    rng = np.random.default_rng(seed)
    uniforms = rng.random((n, len(p.names)))
    return _kernels.sample_many(
        p.cards, p.axes_flat, p.axes_off, p.tables_flat, p.tab_off, p.topo, uniforms
    )


def sample(net: Network, seed) -> Assignment:
    """One complete assignment, deterministic for a fixed seed."""
    codes = sample_codes(net, 1, seed)[0]
    return {
        name: net.variable(name).states[int(code)]
        for name, code in zip(net.names, codes)
    }


def sample_dataset(net: Network, n: int, seed) -> Dataset:
    """`n` complete assignments as a Dataset over all network variables."""
    codes = sample_codes(net, n, seed)
    states = [net.variable(name).states for name in net.names]
    rows = [
        {name: states[j][int(codes[i, j])] for j, name in enumerate(net.names)}
        for i in range(n)
    ]
    return Dataset(tuple(net.names), rows)
