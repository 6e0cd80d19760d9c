"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

Two operations dominate runtime: building the full joint probability table
of a network (the brute-force enumeration route) and ancestral sampling of
many complete assignments. Both are implemented twice, over one packed
array layout, and produce bit-identical results: the sampler consumes
pre-drawn uniforms, so the backend choice never changes a sampled cohort.

Backend selection: numba when importable, unless the environment variable
``NIDSS_NUMBA`` is set to ``0``/``false``/``off`` (compare
``benchmarks/bench_kernels.py`` for the speed difference).
"""

from __future__ import annotations

import os

import numpy as np

_FLAG = os.environ.get("NIDSS_NUMBA", "1").strip().lower()
_WANT_NUMBA = _FLAG not in ("0", "false", "off", "no")

if _WANT_NUMBA:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _HAVE_NUMBA = False
else:
    _HAVE_NUMBA = False


def backend() -> str:
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if _HAVE_NUMBA else "numpy"


# --- packed network layout ---------------------------------------------------
# cards[v]            cardinality of variable v
# axes_flat/axes_off  per variable, its CPT axes as global indices, parents
#                     first and the child itself last (CSR-style offsets)
# tables_flat/tab_off per variable, its CPT table flattened in C order


def pack_tables(cards, axes_per_var, tables):
    cards = np.asarray(cards, dtype=np.int64)
    axes_off = np.zeros(len(axes_per_var) + 1, dtype=np.int64)
    tab_off = np.zeros(len(tables) + 1, dtype=np.int64)
    for i, (axes, tab) in enumerate(zip(axes_per_var, tables)):
        axes_off[i + 1] = axes_off[i] + len(axes)
        tab_off[i + 1] = tab_off[i] + tab.size
    axes_flat = np.concatenate(
        [np.asarray(a, dtype=np.int64) for a in axes_per_var] or [np.zeros(0, dtype=np.int64)]
    )
    tables_flat = np.concatenate(
        [np.ascontiguousarray(t, dtype=np.float64).ravel() for t in tables]
        or [np.zeros(0, dtype=np.float64)]
    )
    return cards, axes_flat, axes_off, tables_flat, tab_off


def _strides_c(cards):
    strides = np.ones(len(cards), dtype=np.int64)
    for i in range(len(cards) - 2, -1, -1):
        strides[i] = strides[i + 1] * cards[i + 1]
    return strides


def _joint_table_numpy(cards, axes_flat, axes_off, tables_flat, tab_off):
    n = len(cards)
    joint = np.ones(tuple(int(c) for c in cards), dtype=np.float64)
    for v in range(n):
        axes = axes_flat[axes_off[v]:axes_off[v + 1]]
        shape = tuple(int(cards[a]) for a in axes)
        tab = tables_flat[tab_off[v]:tab_off[v + 1]].reshape(shape)
        order = np.argsort(axes, kind="stable")
        tab = np.transpose(tab, tuple(order))
        full_shape = [1] * n
        for a in axes:
            full_shape[int(a)] = int(cards[a])
        joint *= tab.reshape(full_shape)
    return joint


def _sample_many_numpy(cards, axes_flat, axes_off, tables_flat, tab_off, topo, uniforms):
    n = uniforms.shape[0]
    codes = np.zeros((n, len(cards)), dtype=np.int64)
    for v in topo:
        axes = axes_flat[axes_off[v]:axes_off[v + 1]]
        card = int(cards[v])
        idx = np.zeros(n, dtype=np.int64)
        for a in axes[:-1]:
            idx = idx * int(cards[a]) + codes[:, int(a)]
        start = tab_off[v] + idx * card
        rows = tables_flat[start[:, None] + np.arange(card)]
        cum = np.cumsum(rows, axis=1)
        u = uniforms[:, v]
        state = (cum <= u[:, None]).sum(axis=1)
        codes[:, v] = np.minimum(state, card - 1)
    return codes


if _HAVE_NUMBA:

    @njit(cache=True)
    def _joint_table_numba(cards, axes_flat, axes_off, tables_flat, tab_off):
        # single C-order pass; per-variable table offsets are maintained
        # incrementally (odometer) instead of decoding every state index
        n = len(cards)
        n_slots = len(axes_flat)
        total = 1
        for i in range(n):
            total *= cards[i]

        lstrides = np.zeros(n_slots, dtype=np.int64)
        owner = np.zeros(n_slots, dtype=np.int64)
        for v in range(n):
            s = 1
            for a in range(axes_off[v + 1] - 1, axes_off[v] - 1, -1):
                lstrides[a] = s
                s *= cards[axes_flat[a]]
                owner[a] = v

        # slots grouped by the global axis they read
        ax_off = np.zeros(n + 1, dtype=np.int64)
        for a in range(n_slots):
            ax_off[axes_flat[a] + 1] += 1
        for i in range(n):
            ax_off[i + 1] += ax_off[i]
        ax_slot = np.zeros(n_slots, dtype=np.int64)
        fill = ax_off[:-1].copy()
        for a in range(n_slots):
            ax = axes_flat[a]
            ax_slot[fill[ax]] = a
            fill[ax] += 1

        digits = np.zeros(n, dtype=np.int64)
        idx = np.zeros(n, dtype=np.int64)
        out = np.empty(total, dtype=np.float64)
        for s in range(total):
            p = 1.0
            for v in range(n):
                p *= tables_flat[tab_off[v] + idx[v]]
            out[s] = p
            ax = n - 1
            while ax >= 0:
                digits[ax] += 1
                if digits[ax] < cards[ax]:
                    for k in range(ax_off[ax], ax_off[ax + 1]):
                        a = ax_slot[k]
                        idx[owner[a]] += lstrides[a]
                    break
                digits[ax] = 0
                back = (cards[ax] - 1)
                for k in range(ax_off[ax], ax_off[ax + 1]):
                    a = ax_slot[k]
                    idx[owner[a]] -= back * lstrides[a]
                ax -= 1
        return out

    @njit(cache=True)
    def _sample_many_numba(cards, axes_flat, axes_off, tables_flat, tab_off, topo, uniforms):
        n = uniforms.shape[0]
        nv = len(cards)
        codes = np.zeros((n, nv), dtype=np.int64)
        for i in range(n):
            for k in range(len(topo)):
                v = topo[k]
                idx = 0
                for a in range(axes_off[v], axes_off[v + 1] - 1):
                    ax = axes_flat[a]
                    idx = idx * cards[ax] + codes[i, ax]
                card = cards[v]
                base = tab_off[v] + idx * card
                u = uniforms[i, v]
                acc = 0.0
                state = card - 1
                for c in range(card):
                    acc += tables_flat[base + c]
                    if u < acc:
                        state = c
                        break
                codes[i, v] = state
        return codes


def joint_table(cards, axes_flat, axes_off, tables_flat, tab_off) -> np.ndarray:
    """Full joint probability table, shaped by the variable cardinalities."""
    if _HAVE_NUMBA:
        flat = _joint_table_numba(cards, axes_flat, axes_off, tables_flat, tab_off)
        return flat.reshape(tuple(int(c) for c in cards))
    return _joint_table_numpy(cards, axes_flat, axes_off, tables_flat, tab_off)


def sample_many(cards, axes_flat, axes_off, tables_flat, tab_off, topo, uniforms) -> np.ndarray:
    """Ancestral samples as an ``(n, n_vars)`` state-code matrix.

    ``uniforms`` is an ``(n, n_vars)`` matrix indexed by global variable
    position; identical uniforms give identical codes on either backend.
    """
    topo = np.asarray(topo, dtype=np.int64)
    uniforms = np.ascontiguousarray(uniforms, dtype=np.float64)
    if _HAVE_NUMBA:
        return _sample_many_numba(cards, axes_flat, axes_off, tables_flat, tab_off, topo, uniforms)
    return _sample_many_numpy(cards, axes_flat, axes_off, tables_flat, tab_off, topo, uniforms)
