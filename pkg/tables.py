"""
Shared helpers for Cayley-style operation tables.

Tables are read-only numpy integer arrays indexed by dense element indices.
Each ``*_violation`` helper returns the lexicographically least witness of a
failed axiom, or None when the axiom holds.
"""

from typing import Optional, Tuple

import numpy as np


def frozen_table(table, name: str = "table") -> np.ndarray:
    """Return a read-only int64 copy of a square table, checking entries are in range."""
    arr = np.array(table, dtype=np.int64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
        raise ValueError(f"{name} must be a non-empty square table, got shape {arr.shape}")
    n = arr.shape[0]
    if arr.min() < 0 or arr.max() >= n:
        bad = tuple(int(v) for v in np.argwhere((arr < 0) | (arr >= n))[0])
        raise ValueError(f"{name} entry at {bad} is out of range 0..{n - 1}")
    arr.flags.writeable = False
    return arr


def frozen_vector(values, bound: int, name: str = "map") -> np.ndarray:
    arr = np.array(values, dtype=np.int64).reshape(-1)
    if arr.size and (arr.min() < 0 or arr.max() >= bound):
        bad = int(np.flatnonzero((arr < 0) | (arr >= bound))[0])
        raise ValueError(f"{name}[{bad}] = {int(arr[bad])} is out of range 0..{bound - 1}")
    arr.flags.writeable = False
    return arr


def check_index(x: int, size: int, name: str = "element"):
    if not 0 <= x < size:
        raise ValueError(f"{name} {x} is out of range 0..{size - 1}")


def _first(mask: np.ndarray) -> Optional[Tuple[int, ...]]:
    hits = np.argwhere(mask)
    if hits.size == 0:
        return None
    return tuple(int(v) for v in hits[0])


def idempotence_violation(table: np.ndarray) -> Optional[Tuple[int, ...]]:
    n = table.shape[0]
    return _first(np.diag(table) != np.arange(n))


def commutativity_violation(table: np.ndarray) -> Optional[Tuple[int, ...]]:
    return _first(table != table.T)


def associativity_violation(table: np.ndarray) -> Optional[Tuple[int, ...]]:
    n = table.shape[0]
    # left[x, y, z] = (x.y).z, right[x, y, z] = x.(y.z)
    left = table[table]
    right = table[np.arange(n)[:, None, None], table[None, :, :]]
    return _first(left != right)


def neutral_violation(table: np.ndarray, zero: int) -> Optional[Tuple[int, ...]]:
    n = table.shape[0]
    return _first(table[zero] != np.arange(n))


def absorbing_violation(table: np.ndarray, unit: int) -> Optional[Tuple[int, ...]]:
    return _first(table[unit] != unit)


def homomorphism_violation(mapping: np.ndarray, source: np.ndarray, target: np.ndarray) -> Optional[Tuple[int, ...]]:
    """First pair (x, y) with f(x.y) != f(x).f(y)."""
    lhs = mapping[source]
    rhs = target[mapping[:, None], mapping[None, :]]
    return _first(lhs != rhs)


def table_key(*parts) -> bytes:
    """Stable byte key for hashing and equality of table-backed values."""
    chunks = []
    for part in parts:
        if isinstance(part, np.ndarray):
            chunks.append(str(part.shape).encode())
            chunks.append(np.ascontiguousarray(part, dtype=np.int64).tobytes())
        else:
            chunks.append(repr(part).encode())
    return b"|".join(chunks)
