import json
import math
import shutil

import pytest

from conftest import FIXTURES
from rvoseval import (
    EvalConfig,
    EvalReport,
    MissingPrediction,
    evaluate_run,
    load_manifest,
    occlusion_bracket,
    render_report,
)
from rvoseval.report import METRIC_KEYS, report_to_json

GOLDEN = json.loads((FIXTURES / "golden_report.json").read_text())


def run_fixture(**kwargs):
    return evaluate_run(
        FIXTURES / "eval_manifest.json",
        FIXTURES / "preds",
        EvalConfig(threads=1, **kwargs),
    )


def test_report_matches_golden_oracle():
    report = run_fixture()
    for eid, expected in GOLDEN["per_expression"].items():
        got = report.per_expression[eid]
        for key in METRIC_KEYS:
            assert got[key] == pytest.approx(expected[key], abs=1e-9), (eid, key)
    for key in METRIC_KEYS:
        assert report.overall[key] == pytest.approx(
            GOLDEN["overall"][key], abs=1e-9
        )
        for t, agg in GOLDEN["per_type"].items():
            assert report.per_type[t][key] == pytest.approx(agg[key], abs=1e-9)


def test_identity_predictions_score_one(tmp_path):
    # Predictions that repeat the GT masks exactly.
    index = load_manifest(FIXTURES / "eval_manifest.json")
    pred_dir = tmp_path / "preds"
    pred_dir.mkdir()
    for video in index.videos:
        for expr in video.expressions:
            masks = video.object_by_id(expr.object_id).masks
            obj = {
                "video_id": video.id,
                "expression_id": expr.id,
                "masks": {str(t): r.to_json() for t, r in masks.frames.items()},
            }
            (pred_dir / f"{expr.id}.json").write_text(json.dumps(obj))
    report = evaluate_run(index, pred_dir, EvalConfig(threads=1))
    for key in METRIC_KEYS:
        assert report.overall[key] == 1.0


def test_all_missing_with_allow_missing(tmp_path):
    pred_dir = tmp_path / "empty"
    pred_dir.mkdir()
    report = evaluate_run(
        FIXTURES / "eval_manifest.json", pred_dir,
        EvalConfig(threads=1, allow_missing=True),
    )
    # every gt object is present somewhere in the fixture, so temporal
    # agreement of an always-empty prediction is 0
    assert report.overall["tIoU"] == 0.0
    assert report.overall["vIoU"] == 0.0


def test_missing_prediction_strict_by_default(tmp_path):
    pred_dir = tmp_path / "empty"
    pred_dir.mkdir()
    with pytest.raises(MissingPrediction):
        evaluate_run(FIXTURES / "eval_manifest.json", pred_dir, EvalConfig(threads=1))


def test_thread_determinism():
    a = report_to_json(run_fixture(buckets=("occlusion", "length", "events")))
    b = report_to_json(
        evaluate_run(
            FIXTURES / "eval_manifest.json",
            FIXTURES / "preds",
            EvalConfig(threads=4, buckets=("occlusion", "length", "events")),
        )
    )
    assert a == b


def test_overall_recomputable_from_per_expression():
    report = run_fixture()
    rows = list(report.per_expression.values())
    for key in METRIC_KEYS:
        mean = math.fsum(r[key] for r in rows) / len(rows)
        assert abs(report.overall[key] - mean) < 1e-12
    for t, agg in report.per_type.items():
        sub = [r for r in rows if r["type"] == t]
        assert agg["count"] == len(sub)
        if sub:
            for key in METRIC_KEYS:
                mean = math.fsum(r[key] for r in sub) / len(sub)
                assert abs(agg[key] - mean) < 1e-12


def test_bucket_partition():
    report = run_fixture(buckets=("occlusion", "length", "events"))
    total = len(report.per_expression)
    for kind, groups in report.buckets.items():
        assert sum(g["count"] for g in groups.values()) == total, kind


def test_occlusion_bracket_assignment():
    assert occlusion_bracket(0.0) == "[0, 0.25]"
    assert occlusion_bracket(0.25) == "[0, 0.25]"  # first matching bracket
    assert occlusion_bracket(0.3) == "[0.25, 0.5)"
    assert occlusion_bracket(0.5) == "[0.5, 0.75)"
    assert occlusion_bracket(0.75) == "[0.75, 1]"
    assert occlusion_bracket(1.0) == "[0.75, 1]"


def test_json_round_trip():
    report = run_fixture(buckets=("occlusion",))
    text = render_report(report, "json")
    back = EvalReport.from_dict(json.loads(text))
    assert back.to_dict() == report.to_dict()


def test_table_render_shape():
    report = run_fixture(buckets=("occlusion",))
    text = render_report(report, "table")
    assert "Static" in text and "Overall" in text
    for key in METRIC_KEYS:
        assert key in text
    # empty buckets render as an em dash
    if any(g["count"] == 0 for g in report.buckets["occlusion"].values()):
        assert "—" in text


def test_csv_render():
    report = run_fixture()
    text = render_report(report, "csv")
    lines = text.strip().splitlines()
    assert lines[0].startswith("expression_id,")
    assert lines[-1].startswith("OVERALL")
    assert len(lines) == len(report.per_expression) + 2


def test_corrupt_prediction_collected_not_fatal(tmp_path):
    pred_dir = tmp_path / "preds"
    shutil.copytree(FIXTURES / "preds", pred_dir)
    # plant a prediction with the wrong video id
    target = sorted(pred_dir.glob("*.json"))[0]
    obj = json.loads(target.read_text())
    obj["video_id"] = "not-a-video"
    target.write_text(json.dumps(obj))
    report = evaluate_run(
        FIXTURES / "eval_manifest.json", pred_dir, EvalConfig(threads=1)
    )
    assert len(report.errors) == 1
    assert len(report.per_expression) == len(GOLDEN["per_expression"]) - 1
