"""Command-line interface: evaluate, stats, validate, decompose, rle."""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import dataset as ds
from . import report as rp
from .errors import ParseError, RvosEvalError, SchemaViolation
from .mask import RleMask, rle_decode, rle_encode
from .motion import clips_to_json, decompose, to_luma


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


@click.group()
def main():
    """Evaluation engine and dataset toolkit for long-term RVOS."""


@main.command()
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--pred", "pred_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--split", type=click.Choice(ds.SPLITS), default=None)
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table")
@click.option("--out", type=click.Path(), default=None)
@click.option("--threads", type=int, default=None, envvar="RVOSEVAL_THREADS")
@click.option("--buckets", default="", help="Comma list of occlusion,length,events.")
@click.option("--allow-missing", is_flag=True)
@click.option("--strict", is_flag=True, help="Abort on the first per-expression error.")
@click.option("--boundary-th", type=float, default=rp.DEFAULT_BOUNDARY_FACTOR,
              show_default=True, help="Boundary tolerance as a fraction of the image diagonal.")
@click.option("--figures", "figures_dir", type=click.Path(), default=None,
              help="Also render report figures into this directory.")
def evaluate(gt_path, pred_dir, split, fmt, out, threads, buckets,
             allow_missing, strict, boundary_th, figures_dir):
    """Score a directory of prediction files against a manifest."""
    bucket_kinds = tuple(b for b in buckets.split(",") if b)
    config = rp.EvalConfig(
        split=split,
        allow_missing=allow_missing,
        strict=strict,
        threads=threads,
        boundary_factor=boundary_th,
        buckets=bucket_kinds,
    )
    start = time.perf_counter()
    try:
        report = rp.evaluate_run(gt_path, pred_dir, config)
        rendered = rp.render_report(report, fmt)
    except (RvosEvalError, ValueError) as exc:
        _fail(exc)
    elapsed = time.perf_counter() - start
    _write_out(rendered, out)
    if figures_dir:
        from .figures import render_report_figures

        for path in render_report_figures(report, figures_dir):
            click.echo(f"wrote {path}", err=True)
    click.echo(
        f"evaluated {len(report.per_expression)} expressions in {elapsed:.2f}s "
        f"({config.resolved_threads()} worker(s))",
        err=True,
    )


def _stats_csv(stats: ds.Statistics) -> str:
    lines = ["key,value"]
    d = stats.to_dict()
    for key in ("num_videos", "num_objects", "num_expressions", "num_masks",
                "mean_duration_s", "mean_frames"):
        lines.append(f"{key},{d[key]}")
    for t, pct in d["type_percent"].items():
        lines.append(f"type_percent.{t},{pct}")
    for split, n in d["split_videos"].items():
        lines.append(f"split_videos.{split},{n}")
    for split, n in d["split_expressions"].items():
        lines.append(f"split_expressions.{split},{n}")
    for k, v in d["objects_per_video"].items():
        lines.append(f"objects_per_video.{k},{v}")
    for k, v in d["descriptions_per_object"].items():
        lines.append(f"descriptions_per_object.{k},{v}")
    return "\n".join(lines) + "\n"


def _stats_table(stats: ds.Statistics) -> str:
    d = stats.to_dict()
    lines = [
        f"videos        {d['num_videos']}",
        f"objects       {d['num_objects']}",
        f"descriptions  {d['num_expressions']}",
        f"masks         {d['num_masks']}",
        f"mean duration {d['mean_duration_s']:.1f}s",
        f"mean frames   {d['mean_frames']:.1f}",
        "type split    "
        + "  ".join(f"{t} {p:.2f}%" for t, p in d["type_percent"].items()),
    ]
    if d["split_videos"]:
        lines.append(
            "splits        "
            + "  ".join(
                f"{s} {n} videos / {d['split_expressions'].get(s, 0)} descriptions"
                for s, n in d["split_videos"].items()
            )
        )
    return "\n".join(lines) + "\n"


@main.command()
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--format", "fmt", type=click.Choice(["table", "csv", "json"]), default="table")
@click.option("--out", type=click.Path(), default=None)
@click.option("--figures", "figures_dir", type=click.Path(), default=None,
              help="Also render distribution figures into this directory.")
def stats(gt_path, fmt, out, figures_dir):
    """Dataset statistics for a manifest."""
    try:
        index = ds.load_manifest(gt_path)
    except RvosEvalError as exc:
        _fail(exc)
    bundle = ds.compute_statistics(index)
    if fmt == "json":
        rendered = json.dumps(bundle.to_dict(), indent=2, sort_keys=True)
    elif fmt == "csv":
        rendered = _stats_csv(bundle)
    else:
        rendered = _stats_table(bundle)
    _write_out(rendered, out)
    if figures_dir:
        from .figures import render_stats_figures

        for path in render_stats_figures(bundle, figures_dir):
            click.echo(f"wrote {path}", err=True)


@main.command()
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
def validate(gt_path):
    """Validate a manifest and report selection-criteria violations."""
    try:
        index = ds.load_manifest(gt_path)
    except (ParseError, SchemaViolation) as exc:
        _fail(exc)
    any_violation = False
    for video in index.videos:
        violations = ds.check_selection_criteria(video)
        if violations:
            any_violation = True
            click.echo(f"{video.id}: {', '.join(violations)}")
    if any_violation:
        sys.exit(1)
    click.echo(f"{len(index.videos)} video(s) valid")


def _load_frames(source: Path) -> list[np.ndarray]:
    if source.is_dir():
        from PIL import Image

        paths = sorted(
            p for p in source.iterdir()
            if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp")
        )
        if not paths:
            raise ParseError(f"no image frames found in {source}")
        frames = []
        for p in paths:
            img = np.asarray(Image.open(p).convert("RGB"))
            frames.append(to_luma(img))
        return frames
    # Raw planar-luma file with a sidecar descriptor next to it.
    sidecar = source.with_suffix(".json")
    if not sidecar.exists():
        raise ParseError(f"raw input needs a sidecar descriptor at {sidecar}")
    desc = json.loads(sidecar.read_text())
    w, h, n = int(desc["width"]), int(desc["height"]), int(desc["num_frames"])
    data = np.fromfile(source, dtype=np.uint8)
    if data.size < w * h * n:
        raise ParseError(
            f"{source} holds {data.size} bytes, expected {w * h * n}"
        )
    return [data[i * w * h:(i + 1) * w * h].reshape(h, w) for i in range(n)]


@main.command("decompose")
@click.option("--frames", "source", required=True, type=click.Path(exists=True))
@click.option("--gop", type=int, default=12, show_default=True)
@click.option("--block", type=int, default=16, show_default=True)
@click.option("--search", type=int, default=8, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def decompose_cmd(source, gop, block, search, out):
    """Decompose a video into keyframe + motion-vector clips."""
    try:
        frames = _load_frames(Path(source))
        clips = decompose(frames, gop=gop, block=block, search_radius=search)
    except RvosEvalError as exc:
        _fail(exc)
    h, w = frames[0].shape
    obj = clips_to_json(clips, h, w, block=block)
    obj["gop"] = gop
    obj["search_radius"] = search
    _write_out(json.dumps(obj, sort_keys=True), out)


@main.group()
def rle():
    """Encode or decode a single mask."""


@rle.command("encode")
@click.argument("file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def rle_encode_cmd(file, out):
    """Encode {"mask": [[0/1,...],...]} JSON into RLE JSON."""
    try:
        obj = json.loads(Path(file).read_text())
        mask = np.asarray(obj["mask"], dtype=bool)
        rendered = json.dumps(rle_encode(mask).to_json(), sort_keys=True)
    except (RvosEvalError, KeyError, ValueError, json.JSONDecodeError) as exc:
        _fail(exc)
    _write_out(rendered, out)


@rle.command("decode")
@click.argument("file", type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def rle_decode_cmd(file, out):
    """Decode RLE JSON back into {"mask": ...} JSON."""
    try:
        rle_obj = RleMask.from_json(json.loads(Path(file).read_text()))
        mask = rle_decode(rle_obj)
        rendered = json.dumps({"mask": mask.astype(int).tolist()}, sort_keys=True)
    except (RvosEvalError, json.JSONDecodeError) as exc:
        _fail(exc)
    _write_out(rendered, out)


if __name__ == "__main__":
    main()
