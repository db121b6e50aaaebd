"""Compressed-domain video decomposition.

Videos are tiled into clips of a keyframe plus up to ``gop - 1``
subsequent frames. For every non-key frame a motion field is estimated
by exhaustive block matching: each 16x16 macroblock of the current
frame is matched against the previous frame within a search window,
minimizing the sum of absolute differences (SAD). The chosen offset
(i, j) means the current block at (p, q) matches the previous frame at
(p - i, q - j).

Ties are broken deterministically: smallest |i| + |j| first, then
lexicographic (i, j) — biased toward zero motion, as codecs do.
Candidate offsets whose reference block falls outside the (padded)
previous frame are excluded rather than clamped.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .errors import EmptyVideo, ShapeMismatch

MACROBLOCK = 16
DEFAULT_GOP = 12
DEFAULT_SEARCH_RADIUS = 8

# BT.601 luma weights for 8-bit RGB.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True)
class MotionVectorField:
    """Per-macroblock integer (row, col) offsets for one frame pair."""

    rows: int
    cols: int
    vectors: np.ndarray  # (rows, cols, 2) int16
    search_radius: int

    def to_json(self) -> list:
        return self.vectors.reshape(-1, 2).tolist()


@dataclass(frozen=True)
class ClipDecomposition:
    """A keyframe index plus motion fields for its subsequent frames."""

    keyframe_index: int
    motion_fields: tuple[MotionVectorField, ...]

    def to_json(self) -> dict:
        return {
            "keyframe": self.keyframe_index,
            "fields": [f.to_json() for f in self.motion_fields],
        }


def to_luma(rgb_frame: np.ndarray) -> np.ndarray:
    """Convert an 8-bit RGB frame to BT.601 integer luma (round half up)."""
    rgb = np.asarray(rgb_frame)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ShapeMismatch(f"expected (H, W, 3) RGB, got shape {rgb.shape}")
    r, g, b = (rgb[..., k].astype(np.float64) for k in range(3))
    y = _LUMA_WEIGHTS[0] * r + _LUMA_WEIGHTS[1] * g + _LUMA_WEIGHTS[2] * b
    return np.floor(y + 0.5).astype(np.uint8)


def pad_to_macroblocks(frame: np.ndarray, block: int = MACROBLOCK) -> np.ndarray:
    """Edge-replicate so both dimensions are multiples of the block size."""
    h, w = frame.shape
    ph = (-h) % block
    pw = (-w) % block
    if ph == 0 and pw == 0:
        return frame
    return np.pad(frame, ((0, ph), (0, pw)), mode="edge")


def _candidate_offsets(search_radius: int) -> np.ndarray:
    """All window offsets sorted in tie-break order (|i|+|j|, i, j)."""
    r = search_radius
    offsets = [(i, j) for i in range(-r, r + 1) for j in range(-r, r + 1)]
    offsets.sort(key=lambda o: (abs(o[0]) + abs(o[1]), o[0], o[1]))
    return np.asarray(offsets, dtype=np.int64).reshape(-1, 2)


@numba.njit(cache=True)
def _block_search(cur, prev, block, offsets, out):  # pragma: no cover - jitted
    height, width = cur.shape
    n_rows = height // block
    n_cols = width // block
    for bi in range(n_rows):
        for bj in range(n_cols):
            r0 = bi * block
            c0 = bj * block
            best = np.int64(1) << 60
            best_i = np.int64(0)
            best_j = np.int64(0)
            for k in range(offsets.shape[0]):
                i = offsets[k, 0]
                j = offsets[k, 1]
                rr = r0 - i
                cc = c0 - j
                if rr < 0 or cc < 0 or rr + block > height or cc + block > width:
                    continue
                sad = np.int64(0)
                for r in range(block):
                    for c in range(block):
                        d = np.int64(cur[r0 + r, c0 + c]) - np.int64(
                            prev[rr + r, cc + c]
                        )
                        sad += d if d >= 0 else -d
                    if sad >= best:
                        break
                # Strict < plus tie-break-ordered candidates: exact argmin.
                if sad < best:
                    best = sad
                    best_i = i
                    best_j = j
                    if best == 0:
                        break
            out[bi, bj, 0] = best_i
            out[bi, bj, 1] = best_j


def estimate_motion(
    cur: np.ndarray,
    prev: np.ndarray,
    block: int = MACROBLOCK,
    search_radius: int = DEFAULT_SEARCH_RADIUS,
) -> MotionVectorField:
    """Exhaustive SAD block matching of ``cur`` against ``prev``."""
    cur = np.ascontiguousarray(cur, dtype=np.uint8)
    prev = np.ascontiguousarray(prev, dtype=np.uint8)
    if cur.shape != prev.shape:
        raise ShapeMismatch(f"frame shapes differ: {cur.shape} vs {prev.shape}")
    if search_radius < 0:
        raise ValueError(f"search radius must be >= 0, got {search_radius}")
    cur_p = pad_to_macroblocks(cur, block)
    prev_p = pad_to_macroblocks(prev, block)
    rows = cur_p.shape[0] // block
    cols = cur_p.shape[1] // block
    out = np.empty((rows, cols, 2), dtype=np.int64)
    _block_search(cur_p, prev_p, block, _candidate_offsets(search_radius), out)
    return MotionVectorField(
        rows=rows,
        cols=cols,
        vectors=out.astype(np.int16),
        search_radius=search_radius,
    )


def decompose(
    frames: list[np.ndarray],
    gop: int = DEFAULT_GOP,
    block: int = MACROBLOCK,
    search_radius: int = DEFAULT_SEARCH_RADIUS,
) -> list[ClipDecomposition]:
    """Tile a luma frame list into keyframe + motion-field clips."""
    if len(frames) == 0:
        raise EmptyVideo("cannot decompose a video with no frames")
    if gop < 1:
        raise ValueError(f"gop must be >= 1, got {gop}")
    shape = frames[0].shape
    for t, f in enumerate(frames):
        if f.shape != shape:
            raise ShapeMismatch(f"frame {t} shape {f.shape} differs from {shape}")
    clips = []
    for start in range(0, len(frames), gop):
        end = min(start + gop, len(frames))
        fields = tuple(
            estimate_motion(frames[t], frames[t - 1], block, search_radius)
            for t in range(start + 1, end)
        )
        clips.append(ClipDecomposition(keyframe_index=start, motion_fields=fields))
    return clips


def clips_to_json(
    clips: list[ClipDecomposition],
    original_height: int,
    original_width: int,
    block: int = MACROBLOCK,
) -> dict:
    """Wire form of a decomposition, with the original size recorded."""
    rows = -(-original_height // block)
    cols = -(-original_width // block)
    return {
        "height": original_height,
        "width": original_width,
        "block": block,
        "field_rows": rows,
        "field_cols": cols,
        "clips": [c.to_json() for c in clips],
    }
