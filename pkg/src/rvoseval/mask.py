"""Binary mask representation and pixel-level operations.

Masks are 2D boolean numpy arrays. The on-disk / wire form is a
column-major run-length encoding (COCO uncompressed style): alternating
run lengths starting with a background run, so a mask whose first pixel
(column-major scan) is foreground starts with a zero-length run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MalformedRle, ShapeMismatch

# IoU assigned to a frame where both prediction and ground truth are
# empty. The reference DAVIS tooling scores total agreement on absence
# as perfect; a frame where exactly one side is empty scores 0.
EMPTY_AGREEMENT_IOU = 1.0


@dataclass(frozen=True)
class RleMask:
    """Column-major run-length encoded binary mask."""

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self):
        _validate_counts(self.height, self.width, self.counts)

    @property
    def foreground_area(self) -> int:
        return int(sum(self.counts[1::2]))

    def to_json(self) -> dict:
        return {"size": [self.height, self.width], "counts": list(self.counts)}

    @classmethod
    def from_json(cls, obj: dict) -> "RleMask":
        try:
            h, w = obj["size"]
            counts = tuple(int(c) for c in obj["counts"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedRle(f"bad RLE object: {exc}") from exc
        return cls(int(h), int(w), counts)


def _validate_counts(height: int, width: int, counts: tuple[int, ...]) -> None:
    if height <= 0 or width <= 0:
        raise MalformedRle(f"mask dimensions must be positive, got {height}x{width}")
    if any(c < 0 for c in counts):
        raise MalformedRle("negative run length")
    if any(c == 0 for c in counts[1:]):
        raise MalformedRle("zero-length run after the first")
    total = sum(counts)
    if total != height * width:
        raise MalformedRle(
            f"runs sum to {total}, expected {height * width} for {height}x{width}"
        )


def rle_encode(mask: np.ndarray) -> RleMask:
    """Encode a dense boolean mask into canonical column-major runs."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2 or mask.size == 0:
        raise MalformedRle(f"expected a non-empty 2D mask, got shape {mask.shape}")
    h, w = mask.shape
    flat = mask.ravel(order="F")
    changes = np.flatnonzero(flat[1:] != flat[:-1]) + 1
    bounds = np.concatenate(([0], changes, [flat.size]))
    runs = np.diff(bounds).tolist()
    if flat[0]:
        runs = [0] + runs
    return RleMask(h, w, tuple(int(r) for r in runs))


def rle_decode(rle: RleMask) -> np.ndarray:
    """Decode runs back into a dense boolean mask (inverse of rle_encode)."""
    values = np.arange(len(rle.counts)) % 2 == 1
    flat = np.repeat(values, rle.counts)
    return flat.reshape((rle.height, rle.width), order="F")


def presence(mask: np.ndarray) -> bool:
    """True iff the mask has at least one foreground pixel."""
    return bool(np.any(mask))


def region_iou(a: np.ndarray, b: np.ndarray) -> float:
    """Intersection-over-union of two same-shape masks.

    Both-empty pairs score EMPTY_AGREEMENT_IOU; exactly one empty
    scores 0 (the intersection is empty while the union is not).
    """
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ShapeMismatch(f"mask shapes differ: {a.shape} vs {b.shape}")
    union = int(np.count_nonzero(a | b))
    if union == 0:
        return EMPTY_AGREEMENT_IOU
    inter = int(np.count_nonzero(a & b))
    return inter / union


def extract_boundary(mask: np.ndarray) -> np.ndarray:
    """Inner 4-connectivity boundary; the frame border counts as background."""
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ShapeMismatch(f"expected a 2D mask, got shape {mask.shape}")
    padded = np.pad(mask, 1, constant_values=False)
    has_bg_neighbor = (
        ~padded[:-2, 1:-1]
        | ~padded[2:, 1:-1]
        | ~padded[1:-1, :-2]
        | ~padded[1:-1, 2:]
    )
    return mask & has_bg_neighbor
