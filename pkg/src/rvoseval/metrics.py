"""Sequence-level metrics: J, F, J&F over frames, temporal IoU and volume IoU.

Temporal IoU is the cardinality ratio |T_i| / |T_u| of the intersection
and union of the frame sets where prediction and ground truth are
non-empty. Volume IoU sums per-frame region IoUs over the temporal
intersection and normalizes by |T_u|. When both sequences are entirely
absent (T_u empty) both metrics score 1.0: total absence predicted
correctly is perfect agreement.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import ndimage

from .errors import SequenceMismatch, ShapeMismatch
from .mask import EMPTY_AGREEMENT_IOU, RleMask, extract_boundary, region_iou, rle_decode

DEFAULT_BOUNDARY_FACTOR = 0.008


@dataclass(eq=False)
class MaskSequence:
    """Frame-indexed masks for one (video, object-or-expression) pair.

    ``frames`` maps frame index to an RLE mask; a missing entry means an
    empty mask on that frame. Treated as immutable after construction.
    """

    video_id: str
    subject_id: str
    num_frames: int
    frames: dict[int, RleMask] = field(default_factory=dict)

    def __post_init__(self):
        for t, rle in self.frames.items():
            if not 0 <= t < self.num_frames:
                raise SequenceMismatch(
                    f"frame index {t} outside [0, {self.num_frames}) "
                    f"for {self.video_id}/{self.subject_id}"
                )
        shapes = {(r.height, r.width) for r in self.frames.values()}
        if len(shapes) > 1:
            raise ShapeMismatch(
                f"masks of {self.video_id}/{self.subject_id} have mixed shapes {shapes}"
            )

    @property
    def shape(self) -> tuple[int, int] | None:
        for rle in self.frames.values():
            return (rle.height, rle.width)
        return None

    @cached_property
    def presence_set(self) -> frozenset[int]:
        """Frame indices whose mask has at least one foreground pixel."""
        return frozenset(
            t for t, rle in self.frames.items() if rle.foreground_area > 0
        )

    def dense(self, t: int, shape: tuple[int, int]) -> np.ndarray:
        rle = self.frames.get(t)
        if rle is None:
            return np.zeros(shape, dtype=bool)
        return rle_decode(rle)


@dataclass(frozen=True)
class PresenceSets:
    """The frame-index sets behind temporal IoU."""

    t_pred: frozenset[int]
    t_gt: frozenset[int]

    @property
    def t_i(self) -> frozenset[int]:
        return self.t_pred & self.t_gt

    @property
    def t_u(self) -> frozenset[int]:
        return self.t_pred | self.t_gt


@dataclass(frozen=True)
class ExpressionMetrics:
    """All per-expression scores plus per-frame traces for bucket reports."""

    j: float
    f: float
    jf: float
    tiou: float
    viou: float
    per_frame_j: tuple[float, ...]
    per_frame_f: tuple[float, ...]


def _check_aligned(pred: MaskSequence, gt: MaskSequence) -> None:
    if pred.video_id != gt.video_id:
        raise SequenceMismatch(
            f"video ids differ: {pred.video_id!r} vs {gt.video_id!r}"
        )
    if pred.num_frames != gt.num_frames:
        raise SequenceMismatch(
            f"frame counts differ for {pred.video_id}: "
            f"{pred.num_frames} vs {gt.num_frames}"
        )


def _common_shape(pred: MaskSequence, gt: MaskSequence) -> tuple[int, int] | None:
    sp, sg = pred.shape, gt.shape
    if sp is not None and sg is not None and sp != sg:
        raise ShapeMismatch(f"sequence mask shapes differ: {sp} vs {sg}")
    return sp or sg


def temporal_iou(pred: MaskSequence, gt: MaskSequence) -> float:
    _check_aligned(pred, gt)
    sets = PresenceSets(pred.presence_set, gt.presence_set)
    t_u = sets.t_u
    if not t_u:
        return 1.0
    return len(sets.t_i) / len(t_u)


def volume_iou(pred: MaskSequence, gt: MaskSequence) -> float:
    _check_aligned(pred, gt)
    shape = _common_shape(pred, gt)
    sets = PresenceSets(pred.presence_set, gt.presence_set)
    t_u = sets.t_u
    if not t_u:
        return 1.0
    # fsum in sorted frame order: deterministic regardless of scheduling.
    total = math.fsum(
        region_iou(pred.dense(t, shape), gt.dense(t, shape))
        for t in sorted(sets.t_i)
    )
    return total / len(t_u)


def default_boundary_tolerance(
    height: int, width: int, factor: float = DEFAULT_BOUNDARY_FACTOR
) -> int:
    """Pixel tolerance for F: ceil(factor * image diagonal)."""
    return math.ceil(factor * math.hypot(height, width))


def _chebyshev_dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    # Square structuring element, separable into two 1D max filters.
    size = 2 * radius + 1
    out = ndimage.maximum_filter1d(mask.astype(np.uint8), size, axis=0)
    return ndimage.maximum_filter1d(out, size, axis=1) > 0


def contour_f(pred: np.ndarray, gt: np.ndarray, tolerance_px: int) -> float:
    """Boundary F-measure under a Chebyshev pixel tolerance.

    Precision is the fraction of predicted boundary pixels within
    Chebyshev distance <= tolerance_px of a ground-truth boundary pixel;
    recall is symmetric.
    """
    if pred.shape != gt.shape:
        raise ShapeMismatch(f"mask shapes differ: {pred.shape} vs {gt.shape}")
    if tolerance_px < 0:
        raise ValueError(f"tolerance must be non-negative, got {tolerance_px}")
    pred_b = extract_boundary(pred)
    gt_b = extract_boundary(gt)
    n_pred = int(np.count_nonzero(pred_b))
    n_gt = int(np.count_nonzero(gt_b))
    if n_pred == 0 and n_gt == 0:
        return 1.0
    if n_pred == 0 or n_gt == 0:
        return 0.0
    if tolerance_px == 0:
        pred_zone, gt_zone = pred_b, gt_b
    else:
        pred_zone = _chebyshev_dilate(pred_b, tolerance_px)
        gt_zone = _chebyshev_dilate(gt_b, tolerance_px)
    precision = int(np.count_nonzero(pred_b & gt_zone)) / n_pred
    recall = int(np.count_nonzero(gt_b & pred_zone)) / n_gt
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def _frame_tolerance(
    shape: tuple[int, int] | None,
    tolerance_px: int | None,
    boundary_factor: float,
) -> int:
    if tolerance_px is not None:
        return tolerance_px
    if shape is None:
        return 0
    return default_boundary_tolerance(*shape, factor=boundary_factor)


def sequence_jf(
    pred: MaskSequence,
    gt: MaskSequence,
    tolerance_px: int | None = None,
    boundary_factor: float = DEFAULT_BOUNDARY_FACTOR,
) -> tuple[float, float, float]:
    """Mean J, mean F and their average over ALL frames of the sequence.

    Frames empty on both sides score EMPTY_AGREEMENT_IOU for both J and F.
    """
    metrics = evaluate_expression(pred, gt, tolerance_px, boundary_factor)
    return metrics.j, metrics.f, metrics.jf


def evaluate_expression(
    pred: MaskSequence,
    gt: MaskSequence,
    tolerance_px: int | None = None,
    boundary_factor: float = DEFAULT_BOUNDARY_FACTOR,
) -> ExpressionMetrics:
    """Compute all five metrics for one (prediction, ground-truth) pair."""
    _check_aligned(pred, gt)
    shape = _common_shape(pred, gt)
    tol = _frame_tolerance(shape, tolerance_px, boundary_factor)

    sets = PresenceSets(pred.presence_set, gt.presence_set)
    t_i, t_u = sets.t_i, sets.t_u

    per_j: list[float] = []
    per_f: list[float] = []
    viou_sum = []
    for t in range(pred.num_frames):
        if pred.frames.get(t) is None and gt.frames.get(t) is None:
            per_j.append(EMPTY_AGREEMENT_IOU)
            per_f.append(EMPTY_AGREEMENT_IOU)
            if t in t_i:  # stored-but-empty on both sides never lands here
                viou_sum.append(EMPTY_AGREEMENT_IOU)
            continue
        p = pred.dense(t, shape)
        g = gt.dense(t, shape)
        j_t = region_iou(p, g)
        per_j.append(j_t)
        per_f.append(contour_f(p, g, tol))
        if t in t_i:
            viou_sum.append(j_t)

    n = pred.num_frames
    j = math.fsum(per_j) / n
    f = math.fsum(per_f) / n
    tiou = 1.0 if not t_u else len(t_i) / len(t_u)
    viou = 1.0 if not t_u else math.fsum(viou_sum) / len(t_u)
    return ExpressionMetrics(
        j=j,
        f=f,
        jf=(j + f) / 2,
        tiou=tiou,
        viou=viou,
        per_frame_j=tuple(per_j),
        per_frame_f=tuple(per_f),
    )
