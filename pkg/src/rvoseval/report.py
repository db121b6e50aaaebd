"""Batch evaluation driver and report assembly.

One evaluation task per (video, expression) pair; tasks fan out across
worker processes and results are reduced in canonical
(video_id, expression_id) order, so the report is byte-identical for
any worker count. The JSON report is the canonical artifact; the table
renderer mirrors the benchmark's per-type x per-metric grid with
percent values at one decimal.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .dataset import (
    DatasetIndex,
    DescriptionType,
    EventComplexity,
    LengthBucket,
    event_complexity,
    length_bucket,
    load_manifest,
    occlusion_rate,
)
from .errors import (
    MissingPrediction,
    ParseError,
    RvosEvalError,
    SchemaViolation,
)
from .mask import MalformedRle, RleMask
from .metrics import (
    DEFAULT_BOUNDARY_FACTOR,
    ExpressionMetrics,
    MaskSequence,
    evaluate_expression,
)

METRIC_KEYS = ("J", "F", "JF", "tIoU", "vIoU")

# Bracket notation follows the benchmark's occlusion table; 0.25 appears
# in both of the first two brackets, so assignment takes the first match.
OCCLUSION_BRACKETS = ("[0, 0.25]", "[0.25, 0.5)", "[0.5, 0.75)", "[0.75, 1]")
LENGTH_BRACKETS = tuple(b.value for b in LengthBucket)
EVENT_BRACKETS = tuple(b.value for b in EventComplexity)

BUCKET_KINDS = ("occlusion", "length", "events")


def occlusion_bracket(rate: float) -> str:
    if rate <= 0.25:
        return OCCLUSION_BRACKETS[0]
    if rate < 0.5:
        return OCCLUSION_BRACKETS[1]
    if rate < 0.75:
        return OCCLUSION_BRACKETS[2]
    return OCCLUSION_BRACKETS[3]


@dataclass(frozen=True)
class EvalConfig:
    split: str | None = None
    allow_missing: bool = False
    strict: bool = False
    threads: int | None = None
    boundary_factor: float = DEFAULT_BOUNDARY_FACTOR
    buckets: tuple[str, ...] = ()

    def resolved_threads(self) -> int:
        if self.threads is not None:
            return max(1, self.threads)
        env = os.environ.get("RVOSEVAL_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1

    def to_dict(self) -> dict:
        return {
            "split": self.split,
            "allow_missing": self.allow_missing,
            "strict": self.strict,
            "boundary_factor": self.boundary_factor,
            "buckets": list(self.buckets),
        }


@dataclass(eq=False)
class EvalReport:
    per_expression: dict[str, dict]
    overall: dict[str, float]
    per_type: dict[str, dict]
    buckets: dict[str, dict]
    errors: list[dict]
    run_meta: dict

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "overall": self.overall,
            "per_type": self.per_type,
            "buckets": self.buckets,
            "per_expression": self.per_expression,
            "errors": self.errors,
            "run_meta": self.run_meta,
        }

    @classmethod
    def from_dict(cls, obj: dict) -> "EvalReport":
        return cls(
            per_expression=obj["per_expression"],
            overall=obj["overall"],
            per_type=obj["per_type"],
            buckets=obj["buckets"],
            errors=obj["errors"],
            run_meta=obj["run_meta"],
        )


@dataclass(frozen=True)
class _Task:
    video_id: str
    expression_id: str
    type: str
    text: str
    occlusion: float
    pred: MaskSequence
    gt: MaskSequence
    boundary_factor: float


def _run_task(task: _Task) -> tuple[str, ExpressionMetrics | str]:
    try:
        m = evaluate_expression(
            task.pred, task.gt, boundary_factor=task.boundary_factor
        )
        return (task.expression_id, m)
    except RvosEvalError as exc:
        return (task.expression_id, f"{type(exc).__name__}: {exc}")


def _load_prediction_file(path: Path) -> dict:
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict) or "expression_id" not in obj:
        raise SchemaViolation(str(path), "prediction must carry an expression_id")
    return obj


def _prediction_sequence(
    obj: dict, video_id: str, expression_id: str, num_frames: int, path: Path
) -> MaskSequence:
    frames = {}
    for key, rle_json in obj.get("masks", {}).items():
        if rle_json is None:
            continue
        try:
            t = int(key)
            frames[t] = RleMask.from_json(rle_json)
        except (ValueError, MalformedRle) as exc:
            raise SchemaViolation(f"{path}:masks/{key}", str(exc)) from exc
    return MaskSequence(
        video_id=video_id,
        subject_id=expression_id,
        num_frames=num_frames,
        frames=frames,
    )


def load_predictions(pred_dir: str | Path) -> dict[str, tuple[Path, dict]]:
    """Index prediction JSON files in a directory by expression id."""
    pred_dir = Path(pred_dir)
    found: dict[str, tuple[Path, dict]] = {}
    for path in sorted(pred_dir.glob("*.json")):
        obj = _load_prediction_file(path)
        eid = str(obj["expression_id"])
        if eid in found:
            raise SchemaViolation(str(path), f"duplicate prediction for {eid!r}")
        found[eid] = (path, obj)
    return found


def _aggregate(rows: list[dict]) -> dict:
    agg: dict[str, float | int] = {"count": len(rows)}
    for key in METRIC_KEYS:
        agg[key] = (
            math.fsum(r[key] for r in rows) / len(rows) if rows else None
        )
    return agg


def evaluate_run(
    gt: DatasetIndex | str | Path,
    predictions_dir: str | Path,
    config: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Score every expression of the selected split against predictions."""
    index = gt if isinstance(gt, DatasetIndex) else load_manifest(gt)
    videos = index.select_split(config.split)

    preds = load_predictions(predictions_dir)

    tasks: list[_Task] = []
    collected_errors: list[dict] = []
    for video in sorted(videos, key=lambda v: v.id):
        for expr in sorted(video.expressions, key=lambda e: e.id):
            gt_seq = video.object_by_id(expr.object_id).masks
            entry = preds.get(expr.id)
            if entry is None:
                if not config.allow_missing:
                    raise MissingPrediction(
                        f"no prediction for expression {expr.id!r} "
                        f"(video {video.id!r}); pass allow_missing to score "
                        "it as an always-empty sequence"
                    )
                pred_seq = MaskSequence(video.id, expr.id, video.num_frames, {})
            else:
                path, obj = entry
                declared = str(obj.get("video_id", video.id))
                if declared != video.id:
                    err = SchemaViolation(
                        str(path),
                        f"prediction video_id {declared!r} != {video.id!r}",
                    )
                    if config.strict:
                        raise err
                    collected_errors.append(
                        {"expression_id": expr.id, "error": str(err)}
                    )
                    continue
                pred_seq = _prediction_sequence(
                    obj, video.id, expr.id, video.num_frames, path
                )
            tasks.append(
                _Task(
                    video_id=video.id,
                    expression_id=expr.id,
                    type=expr.type.value,
                    text=expr.text,
                    occlusion=occlusion_rate(
                        video.object_by_id(expr.object_id), video.num_frames
                    ),
                    pred=pred_seq,
                    gt=gt_seq,
                    boundary_factor=config.boundary_factor,
                )
            )

    n_workers = config.resolved_threads()
    if n_workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            outcomes = list(pool.map(_run_task, tasks, chunksize=8))
    else:
        outcomes = [_run_task(t) for t in tasks]

    per_expression: dict[str, dict] = {}
    rows: list[dict] = []
    for task, (eid, result) in zip(tasks, outcomes):
        if isinstance(result, str):
            if config.strict:
                raise RvosEvalError(f"expression {eid}: {result}")
            collected_errors.append({"expression_id": eid, "error": result})
            continue
        row = {
            "video_id": task.video_id,
            "type": task.type,
            "J": result.j,
            "F": result.f,
            "JF": result.jf,
            "tIoU": result.tiou,
            "vIoU": result.viou,
        }
        per_expression[eid] = row
        rows.append(
            {
                **row,
                "expression_id": eid,
                "occlusion": task.occlusion,
                "text": task.text,
            }
        )

    per_type = {
        t.value: _aggregate([r for r in rows if r["type"] == t.value])
        for t in DescriptionType
    }
    buckets = _bucket_aggregates(rows, config.buckets)

    report = EvalReport(
        per_expression=per_expression,
        overall=_aggregate(rows),
        per_type=per_type,
        buckets=buckets,
        errors=sorted(collected_errors, key=lambda e: e["expression_id"]),
        run_meta={"config": config.to_dict(), "num_videos": len(videos)},
    )
    return report


def _bucket_aggregates(rows: list[dict], kinds: tuple[str, ...]) -> dict:
    out: dict[str, dict] = {}
    for kind in kinds:
        if kind not in BUCKET_KINDS:
            raise ValueError(f"unknown bucket kind {kind!r}; choose from {BUCKET_KINDS}")
        if kind == "occlusion":
            labels = OCCLUSION_BRACKETS
            assign = lambda r: occlusion_bracket(r["occlusion"])  # noqa: E731
        elif kind == "length":
            labels = LENGTH_BRACKETS
            assign = lambda r: length_bucket(r["text"]).value  # noqa: E731
        else:
            labels = EVENT_BRACKETS
            assign = lambda r: event_complexity(r["text"]).value  # noqa: E731
        out[kind] = {
            label: _aggregate([r for r in rows if assign(r) == label])
            for label in labels
        }
    return out


# --- rendering ----------------------------------------------------------


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report.to_dict(), indent=2, sort_keys=True)


def _pct(value: float | None) -> str:
    return "—" if value is None else f"{100.0 * value:.1f}"


def _render_grid(title: str, columns: dict[str, dict]) -> list[str]:
    lines = [title]
    header = f"{'':<14}" + "".join(f"{k:>8}" for k in METRIC_KEYS) + f"{'count':>8}"
    lines.append(header)
    for name, agg in columns.items():
        row = f"{name:<14}" + "".join(f"{_pct(agg[k]):>8}" for k in METRIC_KEYS)
        row += f"{agg['count']:>8}"
        lines.append(row)
    return lines


def render_report(report: EvalReport, format: str = "table") -> str:
    if format == "json":
        return report_to_json(report)
    if format == "csv":
        lines = ["expression_id,video_id,type,J,F,JF,tIoU,vIoU"]
        for eid in sorted(report.per_expression):
            r = report.per_expression[eid]
            vals = ",".join(repr(r[k]) for k in METRIC_KEYS)
            lines.append(f"{eid},{r['video_id']},{r['type']},{vals}")
        agg = report.overall
        vals = ",".join("" if agg[k] is None else repr(agg[k]) for k in METRIC_KEYS)
        lines.append(f"OVERALL,,,{vals}")
        return "\n".join(lines) + "\n"
    if format == "table":
        columns = {**report.per_type, "Overall": report.overall}
        lines = _render_grid("Per-type results (%)", columns)
        for kind, groups in report.buckets.items():
            lines.append("")
            lines.extend(_render_grid(f"{kind.capitalize()} buckets (%)", groups))
        if report.errors:
            lines.append("")
            lines.append(f"{len(report.errors)} expression(s) failed to evaluate")
        return "\n".join(lines) + "\n"
    raise ValueError(f"unknown format {format!r}")
