"""Nearest-neighbor descriptor matching with the ratio test."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .features import Descriptor

_CHUNK = 256


@dataclass(frozen=True)
class MatchPair:
    query_idx: int
    train_idx: int
    distance: float


def stack_descriptors(descs: Sequence[Descriptor]) -> np.ndarray:
    if len(descs) == 0:
        return np.empty((0, 32), dtype=np.uint8)
    return np.stack([d.bits for d in descs])


def hamming_matrix(query: np.ndarray, train: np.ndarray) -> np.ndarray:
    """(Nq, Nt) pairwise Hamming distances between packed descriptor rows."""
    q = np.ascontiguousarray(query).view(np.uint64)
    t = np.ascontiguousarray(train).view(np.uint64)
    nq = q.shape[0]
    out = np.empty((nq, t.shape[0]), dtype=np.uint16)
    for lo in range(0, nq, _CHUNK):
        hi = min(lo + _CHUNK, nq)
        acc = np.bitwise_count(q[lo:hi, 0, None] ^ t[None, :, 0]).astype(np.uint16)
        for w in range(1, q.shape[1]):
            acc += np.bitwise_count(q[lo:hi, w, None] ^ t[None, :, w])
        out[lo:hi] = acc
    return out


def match_descriptors(
    query: Sequence[Descriptor] | np.ndarray,
    train: Sequence[Descriptor] | np.ndarray,
    ratio: float = 0.75,
) -> list[MatchPair]:
    """Best-neighbor matches whose distance beats ratio times the runner-up.

    Each query index appears at most once. A query whose two nearest train
    descriptors are equidistant is rejected by the strict ratio comparison.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"ratio must be in (0, 1), got {ratio}")
    q = query if isinstance(query, np.ndarray) else stack_descriptors(query)
    t = train if isinstance(train, np.ndarray) else stack_descriptors(train)
    if q.shape[0] == 0 or t.shape[0] == 0:
        return []

    dist = hamming_matrix(q, t)
    best_idx = np.argmin(dist, axis=1)
    rows = np.arange(q.shape[0])
    best = dist[rows, best_idx].astype(np.float64)
    if t.shape[0] == 1:
        accepted = np.ones(q.shape[0], dtype=bool)
    else:
        spoiled = dist.astype(np.float64)
        spoiled[rows, best_idx] = np.inf
        second = spoiled.min(axis=1)
        accepted = best < ratio * second

    return [
        MatchPair(int(i), int(best_idx[i]), float(best[i]))
        for i in np.nonzero(accepted)[0]
    ]
