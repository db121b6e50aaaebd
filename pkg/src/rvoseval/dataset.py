"""Manifest ingestion, validation, dataset statistics and bucketing.

The manifest is a single versioned JSON document: ``{"schema_version": 1,
"videos": [...]}``. The formal JSON Schema ships in
``docs/manifest_schema.json``; structural validation runs against it and
semantic rules (reference resolution, mask shapes, frame bounds) are
checked afterwards with JSON-pointer locations in every error.
"""

from __future__ import annotations

import enum
import json
import math
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .errors import MissingBoxes, ParseError, SchemaViolation
from .mask import MalformedRle, RleMask
from .metrics import MaskSequence

MIN_DURATION_S = 20.0
MIN_OBJECTS = 2
LRA_GAP_FRAMES = 100
RATIO_RANGE = (0.5, 2.0)

# The paper names "then", "finally", "ultimately" as examples only; the
# default list adds common sequencers and is configurable.
DEFAULT_EVENT_KEYWORDS = ("then", "finally", "ultimately", "after", "before", "later")

SPLITS = ("train", "valid", "test")


class DescriptionType(str, enum.Enum):
    STATIC = "Static"
    DYNAMIC = "Dynamic"
    HYBRID = "Hybrid"


class EventComplexity(str, enum.Enum):
    SINGLE = "Single"
    TWO = "Two"
    MULTI = "Multi"


class LengthBucket(str, enum.Enum):
    SHORT = "<10"
    MID = "[10, 20]"
    LONG = ">20"


@dataclass(frozen=True)
class ExpressionRecord:
    id: str
    object_id: str
    text: str
    type: DescriptionType


@dataclass(eq=False)
class ObjectRecord:
    id: str
    category: str
    masks: MaskSequence
    boxes: dict[int, tuple[float, float, float, float]] | None = None


@dataclass(eq=False)
class VideoRecord:
    id: str
    fps: float
    num_frames: int
    width: int
    height: int
    source_tag: str = ""
    split: str | None = None
    objects: list[ObjectRecord] = field(default_factory=list)
    expressions: list[ExpressionRecord] = field(default_factory=list)

    @property
    def duration_s(self) -> float:
        return self.num_frames / self.fps

    def object_by_id(self, object_id: str) -> ObjectRecord:
        for obj in self.objects:
            if obj.id == object_id:
                return obj
        raise KeyError(object_id)


@dataclass(frozen=True)
class AttributeTags:
    """Per-object challenge attributes. None means not determinable."""

    poc: bool | None = None
    foc: bool | None = None
    ov: bool | None = None
    lra: bool | None = None
    vc: bool | None = None
    arc: bool | None = None
    sv: bool | None = None
    cm: bool | None = None
    mb: bool | None = None


@dataclass(eq=False)
class DatasetIndex:
    videos: list[VideoRecord]

    def __post_init__(self):
        self.video_by_id = {v.id: v for v in self.videos}
        self.expression_index: dict[str, tuple[VideoRecord, ExpressionRecord]] = {}
        for v in self.videos:
            for e in v.expressions:
                self.expression_index[e.id] = (v, e)

    def select_split(self, split: str | None) -> list[VideoRecord]:
        if split is None:
            return self.videos
        return [v for v in self.videos if v.split == split]


def _manifest_schema() -> dict:
    # docs/manifest_schema.json in the repo is a published copy of this file.
    ref = resources.files("rvoseval").joinpath("manifest_schema.json")
    return json.loads(ref.read_text())


@lru_cache(maxsize=1)
def _runtime_validator() -> jsonschema.Draft202012Validator:
    """Validator with per-frame entries relaxed; descending into every RLE
    with jsonschema is quadratically slow on large manifests, and
    _build_object re-checks mask and box contents with better errors."""
    schema = _manifest_schema()
    obj_props = schema["$defs"]["object"]["properties"]
    obj_props["masks"] = {"type": "object"}
    obj_props["boxes"] = {"type": ["object", "null"]}
    return jsonschema.Draft202012Validator(schema)


def load_manifest(path: str | Path) -> DatasetIndex:
    """Parse, schema-check and semantically validate a manifest file."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    return build_index(raw)


def build_index(raw: dict) -> DatasetIndex:
    """Validate an already-parsed manifest object and build the index."""
    validator = _runtime_validator()
    errors = sorted(validator.iter_errors(raw), key=lambda e: e.json_path)
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SchemaViolation(pointer, e.message)

    videos = []
    for vi, vraw in enumerate(raw["videos"]):
        videos.append(_build_video(vraw, f"/videos/{vi}"))

    seen_video_ids: set[str] = set()
    for vi, v in enumerate(videos):
        if v.id in seen_video_ids:
            raise SchemaViolation(f"/videos/{vi}/id", f"duplicate video id {v.id!r}")
        seen_video_ids.add(v.id)

    seen_expr_ids: set[str] = set()
    for vi, v in enumerate(videos):
        for ei, e in enumerate(v.expressions):
            if e.id in seen_expr_ids:
                raise SchemaViolation(
                    f"/videos/{vi}/expressions/{ei}/id",
                    f"duplicate expression id {e.id!r}",
                )
            seen_expr_ids.add(e.id)
    return DatasetIndex(videos)


def _build_video(vraw: dict, loc: str) -> VideoRecord:
    object_ids = set()
    objects = []
    for oi, oraw in enumerate(vraw["objects"]):
        obj = _build_object(oraw, vraw, f"{loc}/objects/{oi}")
        if obj.id in object_ids:
            raise SchemaViolation(f"{loc}/objects/{oi}/id", f"duplicate object id {obj.id!r}")
        object_ids.add(obj.id)
        objects.append(obj)

    expressions = []
    for ei, eraw in enumerate(vraw["expressions"]):
        eloc = f"{loc}/expressions/{ei}"
        if eraw["object_id"] not in object_ids:
            raise SchemaViolation(
                f"{eloc}/object_id", f"unknown object id {eraw['object_id']!r}"
            )
        expressions.append(
            ExpressionRecord(
                id=str(eraw["id"]),
                object_id=str(eraw["object_id"]),
                text=eraw["text"],
                type=DescriptionType(eraw["type"]),
            )
        )

    return VideoRecord(
        id=str(vraw["id"]),
        fps=float(vraw["fps"]),
        num_frames=int(vraw["num_frames"]),
        width=int(vraw["width"]),
        height=int(vraw["height"]),
        source_tag=vraw.get("source_tag", ""),
        split=vraw.get("split"),
        objects=objects,
        expressions=expressions,
    )


def _build_object(oraw: dict, vraw: dict, loc: str) -> ObjectRecord:
    num_frames = int(vraw["num_frames"])
    frames: dict[int, RleMask] = {}
    for key, rle_json in oraw["masks"].items():
        floc = f"{loc}/masks/{key}"
        try:
            t = int(key)
        except ValueError:
            raise SchemaViolation(floc, f"frame key {key!r} is not an integer") from None
        if not 0 <= t < num_frames:
            raise SchemaViolation(floc, f"frame {t} outside [0, {num_frames})")
        if rle_json is None:
            continue
        try:
            rle = RleMask.from_json(rle_json)
        except MalformedRle as exc:
            raise SchemaViolation(floc, str(exc)) from exc
        if (rle.height, rle.width) != (int(vraw["height"]), int(vraw["width"])):
            raise SchemaViolation(
                floc,
                f"mask size {rle.height}x{rle.width} differs from video "
                f"{vraw['height']}x{vraw['width']}",
            )
        frames[t] = rle

    masks = MaskSequence(
        video_id=str(vraw["id"]),
        subject_id=str(oraw["id"]),
        num_frames=num_frames,
        frames=frames,
    )

    boxes = None
    if oraw.get("boxes") is not None:
        boxes = {}
        for key, box in oraw["boxes"].items():
            bloc = f"{loc}/boxes/{key}"
            try:
                t = int(key)
                x, y, w, h = (float(c) for c in box)
            except (TypeError, ValueError) as exc:
                raise SchemaViolation(bloc, f"bad box entry: {exc}") from exc
            if not 0 <= t < num_frames:
                raise SchemaViolation(bloc, f"frame {t} outside [0, {num_frames})")
            if t not in masks.presence_set:
                raise SchemaViolation(
                    bloc, f"box on frame {t} without a foreground mask"
                )
            if w <= 0 or h <= 0:
                raise SchemaViolation(bloc, f"degenerate box {box}")
            boxes[t] = (x, y, w, h)

    return ObjectRecord(
        id=str(oraw["id"]),
        category=oraw.get("category", ""),
        masks=masks,
        boxes=boxes,
    )


# --- selection criteria -------------------------------------------------


def check_selection_criteria(video: VideoRecord) -> list[str]:
    """Violation codes for the benchmark's video/object selection rules."""
    violations = []
    if not video.duration_s > MIN_DURATION_S:
        violations.append("DurationTooShort")
    if len(video.objects) < MIN_OBJECTS:
        violations.append("TooFewObjects")
    all_frames = set(range(video.num_frames))
    if not any(set(o.masks.presence_set) != all_frames for o in video.objects):
        violations.append("NoDiscontinuousObject")
    return violations


# --- statistics ---------------------------------------------------------

DURATION_BIN_S = 10.0


@dataclass(frozen=True)
class Statistics:
    num_videos: int
    num_objects: int
    num_expressions: int
    num_masks: int
    mean_duration_s: float
    mean_frames: float
    type_counts: dict[str, int]
    split_videos: dict[str, int]
    split_expressions: dict[str, int]
    video_duration_hist: dict[str, object]
    object_duration_hist: dict[str, object]
    objects_per_video: dict[int, int]
    descriptions_per_object: dict[int, int]

    @property
    def type_percent(self) -> dict[str, float]:
        total = sum(self.type_counts.values())
        if total == 0:
            return {k: 0.0 for k in self.type_counts}
        return {k: 100.0 * v / total for k, v in self.type_counts.items()}

    def to_dict(self) -> dict:
        return {
            "num_videos": self.num_videos,
            "num_objects": self.num_objects,
            "num_expressions": self.num_expressions,
            "num_masks": self.num_masks,
            "mean_duration_s": self.mean_duration_s,
            "mean_frames": self.mean_frames,
            "type_counts": dict(sorted(self.type_counts.items())),
            "type_percent": dict(sorted(self.type_percent.items())),
            "split_videos": dict(sorted(self.split_videos.items())),
            "split_expressions": dict(sorted(self.split_expressions.items())),
            "video_duration_hist": self.video_duration_hist,
            "object_duration_hist": self.object_duration_hist,
            "objects_per_video": {
                str(k): v for k, v in sorted(self.objects_per_video.items())
            },
            "descriptions_per_object": {
                str(k): v for k, v in sorted(self.descriptions_per_object.items())
            },
        }


def _histogram(values: list[float], bin_width: float) -> dict[str, object]:
    if not values:
        return {"bin_width_s": bin_width, "counts": []}
    n_bins = int(max(values) // bin_width) + 1
    counts = [0] * n_bins
    for v in values:
        counts[int(v // bin_width)] += 1
    return {"bin_width_s": bin_width, "counts": counts}


def compute_statistics(index: DatasetIndex) -> Statistics:
    video_durations = []
    object_durations = []
    objects_per_video: dict[int, int] = {}
    descriptions_per_object: dict[int, int] = {}
    type_counts = {t.value: 0 for t in DescriptionType}
    split_videos: dict[str, int] = {}
    split_expressions: dict[str, int] = {}
    num_objects = 0
    num_expressions = 0
    num_masks = 0
    total_frames = 0

    for v in index.videos:
        video_durations.append(v.duration_s)
        total_frames += v.num_frames
        objects_per_video[len(v.objects)] = objects_per_video.get(len(v.objects), 0) + 1
        if v.split is not None:
            split_videos[v.split] = split_videos.get(v.split, 0) + 1
            split_expressions[v.split] = (
                split_expressions.get(v.split, 0) + len(v.expressions)
            )
        exprs_by_object: dict[str, int] = {o.id: 0 for o in v.objects}
        for e in v.expressions:
            type_counts[e.type.value] += 1
            exprs_by_object[e.object_id] += 1
            num_expressions += 1
        for o in v.objects:
            num_objects += 1
            num_masks += len(o.masks.presence_set)
            object_durations.append(len(o.masks.presence_set) / v.fps)
            n = exprs_by_object[o.id]
            descriptions_per_object[n] = descriptions_per_object.get(n, 0) + 1

    n_videos = len(index.videos)
    return Statistics(
        num_videos=n_videos,
        num_objects=num_objects,
        num_expressions=num_expressions,
        num_masks=num_masks,
        mean_duration_s=math.fsum(video_durations) / n_videos if n_videos else 0.0,
        mean_frames=total_frames / n_videos if n_videos else 0.0,
        type_counts=type_counts,
        split_videos=split_videos,
        split_expressions=split_expressions,
        video_duration_hist=_histogram(video_durations, DURATION_BIN_S),
        object_duration_hist=_histogram(object_durations, DURATION_BIN_S),
        objects_per_video=objects_per_video,
        descriptions_per_object=descriptions_per_object,
    )


# --- attributes and buckets ---------------------------------------------


def occlusion_rate(obj: ObjectRecord, num_frames: int) -> float:
    """Fraction of frames on which the object's mask is empty."""
    return 1.0 - len(obj.masks.presence_set) / num_frames


def _has_long_gap(presence: frozenset[int], gap: int = LRA_GAP_FRAMES) -> bool:
    ordered = sorted(presence)
    return any(b - a - 1 >= gap for a, b in zip(ordered, ordered[1:]))


def _ratio_outside(values: list[float], lo: float, hi: float) -> bool:
    if len(values) < 2:
        return False
    ratio = max(values) / min(values)
    return not lo <= ratio <= hi


def tag_attributes(
    obj: ObjectRecord,
    video: VideoRecord,
    manual: dict[str, bool] | None = None,
    compute_box_tags: bool = True,
) -> AttributeTags:
    """Derive rule-based attribute tags; copy perception tags from ``manual``.

    lra/ov/foc come from the mask presence pattern; arc/sv from box
    aspect-ratio and area ratios (outside [0.5, 2] over any pair of
    annotated frames). poc, vc, cm, mb cannot be computed and are taken
    from ``manual`` when given.
    """
    manual = manual or {}
    presence = obj.masks.presence_set
    lra = _has_long_gap(presence)
    absent_somewhere = len(presence) < video.num_frames
    ov = bool(presence) and absent_somewhere
    foc = manual.get("foc", ov)

    arc = sv = None
    if compute_box_tags:
        if obj.boxes is None:
            raise MissingBoxes(
                f"object {obj.id} of video {video.id} has no boxes for arc/sv"
            )
        aspects = [w / h for (_, _, w, h) in obj.boxes.values()]
        areas = [w * h for (_, _, w, h) in obj.boxes.values()]
        arc = _ratio_outside(aspects, *RATIO_RANGE)
        sv = _ratio_outside(areas, *RATIO_RANGE)

    return AttributeTags(
        poc=manual.get("poc"),
        foc=foc,
        ov=ov,
        lra=lra,
        vc=manual.get("vc"),
        arc=arc,
        sv=sv,
        cm=manual.get("cm"),
        mb=manual.get("mb"),
    )


def event_complexity(
    text: str, keywords: tuple[str, ...] = DEFAULT_EVENT_KEYWORDS
) -> EventComplexity:
    """Bucket a description by how many sequencing keywords it contains."""
    pattern = r"\b(?:" + "|".join(re.escape(k) for k in keywords) + r")\b"
    n = len(re.findall(pattern, text, flags=re.IGNORECASE))
    if n == 0:
        return EventComplexity.SINGLE
    if n == 1:
        return EventComplexity.TWO
    return EventComplexity.MULTI


def length_bucket(text: str) -> LengthBucket:
    """Bucket a description by whitespace-token count."""
    n = len(text.split())
    if n < 10:
        return LengthBucket.SHORT
    if n <= 20:
        return LengthBucket.MID
    return LengthBucket.LONG
