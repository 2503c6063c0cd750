"""Robust homography estimation: RANSAC over 4-point samples plus a DLT refit."""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from ..geometry import Homography
from .features import Keypoint
from .matching import MatchPair


class DegenerateConfiguration(RuntimeError):
    """No sample produced the required number of inliers."""


def _normalization(pts: np.ndarray) -> np.ndarray:
    c = pts.mean(axis=0)
    d = np.sqrt(((pts - c) ** 2).sum(axis=1)).mean()
    s = math.sqrt(2.0) / max(d, 1e-12)
    return np.array([[s, 0.0, -s * c[0]], [0.0, s, -s * c[1]], [0.0, 0.0, 1.0]])


def _apply3(m: np.ndarray, pts: np.ndarray) -> np.ndarray:
    q = pts @ m[:2, :2].T + m[:2, 2]
    w = pts @ m[2, :2] + m[2, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        return q / w[:, None]


def dlt_homography(src: np.ndarray, dst: np.ndarray) -> np.ndarray | None:
    """Direct linear transform with Hartley normalization; None if degenerate."""
    t_src = _normalization(src)
    t_dst = _normalization(dst)
    s = _apply3(t_src, src)
    d = _apply3(t_dst, dst)
    n = len(src)
    a = np.zeros((2 * n, 9))
    a[0::2, 0] = s[:, 0]
    a[0::2, 1] = s[:, 1]
    a[0::2, 2] = 1.0
    a[0::2, 6] = -d[:, 0] * s[:, 0]
    a[0::2, 7] = -d[:, 0] * s[:, 1]
    a[0::2, 8] = -d[:, 0]
    a[1::2, 3] = s[:, 0]
    a[1::2, 4] = s[:, 1]
    a[1::2, 5] = 1.0
    a[1::2, 6] = -d[:, 1] * s[:, 0]
    a[1::2, 7] = -d[:, 1] * s[:, 1]
    a[1::2, 8] = -d[:, 1]
    try:
        _, sv, vt = np.linalg.svd(a)
    except np.linalg.LinAlgError:
        return None
    hn = vt[-1].reshape(3, 3)
    h = np.linalg.inv(t_dst) @ hn @ t_src
    if not np.all(np.isfinite(h)) or abs(np.linalg.det(h)) < 1e-15:
        return None
    return h / np.linalg.norm(h)


def _has_collinear_triple(pts: np.ndarray) -> bool:
    scale = max(pts.max() - pts.min(), 1e-9)
    for i in range(4):
        sub = np.delete(pts, i, axis=0)
        u = sub[1] - sub[0]
        v = sub[2] - sub[0]
        if abs(u[0] * v[1] - u[1] * v[0]) < 1e-6 * scale * scale:
            return True
    return False


def reprojection_errors(h: np.ndarray, src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    proj = _apply3(h, src)
    err = np.linalg.norm(proj - dst, axis=1)
    return np.where(np.isfinite(err), err, np.inf)


def estimate_homography(
    matches: Sequence[MatchPair],
    query_kps: Sequence[Keypoint],
    train_kps: Sequence[Keypoint],
    threshold_px: float = 3.0,
    max_iters: int = 1000,
    *,
    seed: int = 0,
    min_inliers: int = 15,
    confidence: float = 0.99,
) -> tuple[Homography, int]:
    """Query->train homography from tentative matches.

    Samples 4-point minimal sets, keeps the consensus-best model, and returns
    the DLT refit over that model's inlier set together with the inlier count.
    Exits early once the running best makes further samples pointless at the
    configured confidence.
    """
    if len(matches) < 4:
        raise DegenerateConfiguration(f"need at least 4 matches, got {len(matches)}")

    src = np.array([[query_kps[m.query_idx].position.x, query_kps[m.query_idx].position.y] for m in matches])
    dst = np.array([[train_kps[m.train_idx].position.x, train_kps[m.train_idx].position.y] for m in matches])
    n = len(matches)
    rng = np.random.default_rng(seed)

    best_count = 0
    best_mask = None
    needed = max_iters
    it = 0
    while it < min(max_iters, needed):
        it += 1
        idx = rng.choice(n, size=4, replace=False)
        if _has_collinear_triple(src[idx]) or _has_collinear_triple(dst[idx]):
            continue
        h = dlt_homography(src[idx], dst[idx])
        if h is None:
            continue
        inl = reprojection_errors(h, src, dst) < threshold_px
        count = int(inl.sum())
        if count > best_count:
            best_count = count
            best_mask = inl
            w = count / n
            if w >= 1.0:
                break
            denom = math.log(max(1.0 - w**4, 1e-15))
            needed = min(max_iters, int(math.ceil(math.log(1.0 - confidence) / denom)))

    if best_count < min_inliers or best_mask is None:
        raise DegenerateConfiguration(
            f"best sample has {best_count} inliers, below the {min_inliers} minimum"
        )

    refit = dlt_homography(src[best_mask], dst[best_mask])
    if refit is None:
        raise DegenerateConfiguration("inlier set is degenerate for the final refit")
    return Homography(refit), best_count
