from typing import Optional

import numpy as np

from ..config import resolve_cap
from ..errors import EnumerationCapError


def ensure_within_cap(what: str, size: int, cap: Optional[int] = None) -> int:
    """Raise if an exhaustive enumeration of `size` states is over the cap."""
    limit = resolve_cap(cap)
    if size > limit:
        raise EnumerationCapError(what, size, limit)
    return size


def all_blocks(alphabet_size: int, length: int, cap: Optional[int] = None) -> np.ndarray:
    """Every block of `length` symbols, one per row, in lexicographic order.

    Row r is the base-`alphabet_size` expansion of r with the first symbol most
    significant, so row indices coincide with `block_index`.
    """
    total = ensure_within_cap(f"blocks of length {length}", alphabet_size ** length, cap)
    if length == 0:
        return np.zeros((1, 0), dtype=np.int64)
    idx = np.arange(total, dtype=np.int64)
    powers = alphabet_size ** np.arange(length - 1, -1, -1, dtype=np.int64)
    return (idx[:, None] // powers[None, :]) % alphabet_size


def block_index(blocks: np.ndarray, alphabet_size: int) -> np.ndarray:
    """Lexicographic index of each row of a 2-D block array."""
    blocks = np.asarray(blocks, dtype=np.int64)
    out = np.zeros(blocks.shape[0], dtype=np.int64)
    for j in range(blocks.shape[1]):
        out = out * alphabet_size + blocks[:, j]
    return out


def window_indices(symbols: np.ndarray, alphabet_size: int, width: int) -> np.ndarray:
    """Lexicographic index of every overlapping window of `width` symbols.

    `symbols` is (rows, n); the result is (rows, n - width + 1).
    """
    symbols = np.atleast_2d(np.asarray(symbols, dtype=np.int64))
    count = symbols.shape[1] - width + 1
    out = np.zeros((symbols.shape[0], max(count, 0)), dtype=np.int64)
    if count <= 0:
        return out
    for j in range(width):
        out = out * alphabet_size + symbols[:, j:j + count]
    return out
