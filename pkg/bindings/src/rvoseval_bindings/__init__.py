"""Researcher-facing bindings over the rvoseval core.

Everything here marshals inputs into core types and delegates; no metric
or codec logic is reimplemented, so results are bit-identical to the
core CLI. Dense masks are accepted from anything the buffer interface
can expose as an array (numpy arrays, memoryviews, nested lists).
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

import rvoseval as _core
from rvoseval import (
    EmptyVideo,
    MalformedRle,
    RvosEvalError,
    SequenceMismatch,
    ShapeMismatch,
)

__all__ = [
    "BoundMaskSequence",
    "EmptyVideo",
    "MalformedRle",
    "RvosEvalError",
    "SequenceMismatch",
    "ShapeMismatch",
    "decompose",
    "evaluate",
    "evaluate_run",
    "rle_decode",
    "rle_encode",
]

__version__ = "0.1.0"


def rle_encode(mask) -> dict:
    """Dense boolean mask -> RLE JSON dict."""
    return _core.rle_encode(np.asarray(mask, dtype=bool)).to_json()


def rle_decode(rle: dict) -> np.ndarray:
    """RLE JSON dict -> dense boolean numpy array."""
    return _core.rle_decode(_core.RleMask.from_json(rle))


class BoundMaskSequence:
    """A mask sequence built from dense arrays or RLE dicts.

    Accepted inputs:
      * a (T, H, W) boolean array (any buffer-interface object),
      * a mapping frame_index -> RLE dict (or None for empty frames),
        which requires ``num_frames``,
      * an existing core MaskSequence.
    """

    def __init__(self, masks, num_frames=None, video_id="video", subject_id="subject"):
        if isinstance(masks, _core.MaskSequence):
            self._seq = masks
            return
        if isinstance(masks, dict):
            if num_frames is None:
                raise ValueError("num_frames is required for RLE-dict input")
            frames = {}
            for key, rle in masks.items():
                if rle is None:
                    continue
                frames[int(key)] = _core.RleMask.from_json(rle)
            self._seq = _core.MaskSequence(video_id, subject_id, num_frames, frames)
            return
        stack = np.asarray(masks, dtype=bool)
        if stack.ndim != 3:
            raise ShapeMismatch(f"expected (T, H, W) masks, got shape {stack.shape}")
        if num_frames is not None and num_frames != stack.shape[0]:
            raise SequenceMismatch(
                f"num_frames {num_frames} != stack length {stack.shape[0]}"
            )
        frames = {
            t: _core.rle_encode(stack[t]) for t in range(stack.shape[0]) if stack[t].any()
        }
        self._seq = _core.MaskSequence(video_id, subject_id, stack.shape[0], frames)

    @property
    def core(self) -> _core.MaskSequence:
        return self._seq

    @property
    def num_frames(self) -> int:
        return self._seq.num_frames

    def to_rle_dicts(self) -> dict[int, dict]:
        return {t: r.to_json() for t, r in self._seq.frames.items()}


def _as_sequence(value, num_frames, video_id, subject_id) -> _core.MaskSequence:
    if isinstance(value, BoundMaskSequence):
        return value.core
    return BoundMaskSequence(value, num_frames, video_id, subject_id).core


def evaluate(pred, gt, num_frames=None, video_id="video", **metric_kwargs) -> dict:
    """All five metrics for one (prediction, ground-truth) pair.

    Returns {"J", "F", "JF", "tIoU", "vIoU"}, bit-identical to the core.
    """
    pred_seq = _as_sequence(pred, num_frames, video_id, "pred")
    gt_seq = _as_sequence(gt, num_frames, video_id, "gt")
    m = _core.evaluate_expression(pred_seq, gt_seq, **metric_kwargs)
    return {"J": m.j, "F": m.f, "JF": m.jf, "tIoU": m.tiou, "vIoU": m.viou}


def evaluate_run(gt_manifest, predictions_dir, **config_kwargs) -> dict:
    """Batch evaluation; returns the core report as a plain dict."""
    config = _core.EvalConfig(**config_kwargs)
    report = _core.evaluate_run(Path(gt_manifest), Path(predictions_dir), config)
    return report.to_dict()


def decompose(frames, gop=12, block=16, search_radius=8) -> dict:
    """Decompose a (T, H, W) luma stack; returns the core clips JSON dict."""
    stack = np.asarray(frames, dtype=np.uint8)
    if stack.ndim != 3:
        if stack.ndim == 1 and stack.size == 0:
            raise EmptyVideo("cannot decompose a video with no frames")
        raise ShapeMismatch(f"expected (T, H, W) frames, got shape {stack.shape}")
    clips = _core.decompose(
        [stack[t] for t in range(stack.shape[0])],
        gop=gop, block=block, search_radius=search_radius,
    )
    return _core.clips_to_json(clips, stack.shape[1], stack.shape[2], block=block)
