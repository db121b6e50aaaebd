"""Generate the committed test fixtures and their golden expected values.

Run from the repo root:  python3 tests/gen_fixtures.py

All expected values come from the brute-force oracles in oracles.py and
from generator-side bookkeeping; nothing here imports the package under
test. Outputs land in tests/fixtures/ and are committed.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

import oracles

FIXTURES = Path(__file__).parent / "fixtures"
RNG = np.random.default_rng(20250825)

MASK_H, MASK_W = 16, 16


def random_blob(rng) -> np.ndarray:
    mask = np.zeros((MASK_H, MASK_W), dtype=bool)
    n_rects = rng.integers(1, 4)
    for _ in range(n_rects):
        r0 = rng.integers(0, MASK_H - 2)
        c0 = rng.integers(0, MASK_W - 2)
        rh = rng.integers(1, MASK_H - r0 + 1)
        cw = rng.integers(1, MASK_W - c0 + 1)
        mask[r0:r0 + rh, c0:c0 + cw] = True
    return mask


def random_sequence(rng, num_frames, density=0.7):
    frames = []
    for _ in range(num_frames):
        frames.append(random_blob(rng) if rng.random() < density else None)
    return frames


def seq_to_rle_map(frames):
    out = {}
    for t, m in enumerate(frames):
        if m is not None and m.any():
            out[str(t)] = oracles.rle_encode_brute(m)
    return out


def make_pairs():
    """20 (pred, gt) pairs with oracle golden metrics."""
    pairs = []
    golden = []
    tol = oracles.default_tolerance_brute(MASK_H, MASK_W)
    for k in range(20):
        num_frames = int(RNG.integers(3, 11))
        gt = random_sequence(RNG, num_frames)
        if k == 0:
            pred = list(gt)  # identity pair
        elif k == 1:
            pred = [None] * num_frames  # fully absent prediction
        else:
            pred = random_sequence(RNG, num_frames)
            # sometimes reuse the gt mask with a perturbation
            for t in range(num_frames):
                if gt[t] is not None and RNG.random() < 0.3:
                    shifted = np.roll(gt[t], int(RNG.integers(-2, 3)), axis=1)
                    pred[t] = shifted
        j, f, jf = oracles.jf_brute(pred, gt, (MASK_H, MASK_W), tol)
        golden.append(
            {
                "pair": k,
                "num_frames": num_frames,
                "J": j,
                "F": f,
                "JF": jf,
                "tIoU": oracles.tiou_brute(pred, gt),
                "vIoU": oracles.viou_brute(pred, gt),
            }
        )
        pairs.append(
            {
                "pair": k,
                "num_frames": num_frames,
                "height": MASK_H,
                "width": MASK_W,
                "pred": seq_to_rle_map(pred),
                "gt": seq_to_rle_map(gt),
            }
        )
    (FIXTURES / "pairs.json").write_text(json.dumps(pairs, indent=1))
    (FIXTURES / "golden_metrics.json").write_text(json.dumps(golden, indent=1))
    return pairs, golden


TYPE_CYCLE = ("Static", "Dynamic", "Hybrid")
TEXTS = [
    "the red cat on the left",
    "the man who picks up a cup then drinks from it",
    "a dog running after the ball then jumping and finally resting near the fence",
    "the tall person in a blue jacket standing quietly beside the open door of the car",
    "the bird",
]


def make_eval_fixture(pairs, golden):
    """GT manifest + prediction files + golden report aggregates."""
    videos = []
    preds_dir = FIXTURES / "preds"
    preds_dir.mkdir(exist_ok=True)
    rows = []
    for p, g in zip(pairs, golden):
        k = p["pair"]
        vid = f"video_{k:02d}"
        eid = f"expr_{k:02d}"
        dtype = TYPE_CYCLE[k % 3]
        text = TEXTS[k % len(TEXTS)]
        videos.append(
            {
                "id": vid,
                "fps": 5.0,
                "num_frames": p["num_frames"],
                "width": MASK_W,
                "height": MASK_H,
                "split": "test",
                "objects": [{"id": f"obj_{k:02d}", "category": "thing",
                             "masks": p["gt"]}],
                "expressions": [{"id": eid, "object_id": f"obj_{k:02d}",
                                 "text": text, "type": dtype}],
            }
        )
        (preds_dir / f"{eid}.json").write_text(
            json.dumps(
                {"video_id": vid, "expression_id": eid, "masks": p["pred"]},
                indent=1,
            )
        )
        rows.append({"expression_id": eid, "type": dtype, **{
            m: g[m] for m in ("J", "F", "JF", "tIoU", "vIoU")}})

    manifest = {"schema_version": 1, "videos": videos}
    (FIXTURES / "eval_manifest.json").write_text(json.dumps(manifest, indent=1))

    def mean(sel, key):
        vals = [r[key] for r in rows if sel(r)]
        return sum(vals) / len(vals) if vals else None

    report = {
        "overall": {m: mean(lambda r: True, m) for m in ("J", "F", "JF", "tIoU", "vIoU")},
        "per_type": {
            t: {m: mean(lambda r, t=t: r["type"] == t, m)
                for m in ("J", "F", "JF", "tIoU", "vIoU")}
            for t in TYPE_CYCLE
        },
        "per_expression": {r["expression_id"]: {m: r[m] for m in
                                                ("J", "F", "JF", "tIoU", "vIoU")}
                           for r in rows},
    }
    (FIXTURES / "golden_report.json").write_text(json.dumps(report, indent=1))


def solid_mask_rle(h, w):
    return {"size": [h, w], "counts": [0, h * w]}


def make_stats_fixture():
    """5-video manifest with hand-tracked expected statistics."""
    mask_h, mask_w = 4, 4
    solid = solid_mask_rle(mask_h, mask_w)

    def obj(oid, present_frames):
        return {
            "id": oid,
            "category": "thing",
            "masks": {str(t): solid for t in present_frames},
        }

    def expr(eid, oid, text, dtype):
        return {"id": eid, "object_id": oid, "text": text, "type": dtype}

    videos = [
        {   # 150 frames @ 5 fps = 30 s, 2 objects, one discontinuous
            "id": "sv0", "fps": 5.0, "num_frames": 150, "width": mask_w,
            "height": mask_h, "split": "train",
            "objects": [obj("o0", range(150)), obj("o1", range(0, 150, 2))],
            "expressions": [
                expr("e0", "o0", "the left box", "Static"),
                expr("e1", "o1", "the box that moves right then stops", "Dynamic"),
                expr("e2", "o1", "the small box on the right that moves", "Hybrid"),
            ],
        },
        {   # 120 frames @ 4 fps = 30 s
            "id": "sv1", "fps": 4.0, "num_frames": 120, "width": mask_w,
            "height": mask_h, "split": "train",
            "objects": [obj("o0", range(120)), obj("o1", range(60)),
                        obj("o2", range(30, 120))],
            "expressions": [
                expr("e3", "o1", "the vanishing square", "Dynamic"),
                expr("e4", "o2", "the late square", "Static"),
            ],
        },
        {   # 125 frames @ 5 fps = 25 s
            "id": "sv2", "fps": 5.0, "num_frames": 125, "width": mask_w,
            "height": mask_h, "split": "valid",
            "objects": [obj("o0", range(125)), obj("o1", range(100))],
            "expressions": [
                expr("e5", "o0", "the steady one", "Static"),
                expr("e6", "o0", "the one that stays put the whole time", "Hybrid"),
                expr("e7", "o1", "the one that leaves", "Dynamic"),
            ],
        },
        {   # 220 frames @ 10 fps = 22 s
            "id": "sv3", "fps": 10.0, "num_frames": 220, "width": mask_w,
            "height": mask_h, "split": "test",
            "objects": [obj("o0", range(220)), obj("o1", range(110, 220))],
            "expressions": [
                expr("e8", "o1", "the newcomer", "Dynamic"),
            ],
        },
        {   # 300 frames @ 6 fps = 50 s
            "id": "sv4", "fps": 6.0, "num_frames": 300, "width": mask_w,
            "height": mask_h, "split": "test",
            "objects": [obj("o0", range(300)), obj("o1", range(150)),
                        obj("o2", range(150, 300)), obj("o3", range(0, 300, 3))],
            "expressions": [
                expr("e9", "o0", "the anchor", "Static"),
                expr("e10", "o2", "the replacement", "Hybrid"),
                expr("e11", "o3", "the blinker", "Hybrid"),
            ],
        },
    ]
    manifest = {"schema_version": 1, "videos": videos}
    (FIXTURES / "stats_manifest.json").write_text(json.dumps(manifest, indent=1))

    # Hand-tracked construction facts.
    durations = [30.0, 30.0, 25.0, 22.0, 50.0]
    object_presence = {
        "sv0": [150, 75],
        "sv1": [120, 60, 90],
        "sv2": [125, 100],
        "sv3": [220, 110],
        "sv4": [300, 150, 150, 100],
    }
    fps = {"sv0": 5.0, "sv1": 4.0, "sv2": 5.0, "sv3": 10.0, "sv4": 6.0}
    object_durations = [
        n / fps[vid] for vid, counts in object_presence.items() for n in counts
    ]
    video_hist = [0] * (int(max(durations) // 10) + 1)
    for d in durations:
        video_hist[int(d // 10)] += 1
    obj_hist = [0] * (int(max(object_durations) // 10) + 1)
    for d in object_durations:
        obj_hist[int(d // 10)] += 1

    expected = {
        "num_videos": 5,
        "num_objects": 13,
        "num_expressions": 12,
        "num_masks": sum(sum(v) for v in object_presence.values()),
        "mean_duration_s": sum(durations) / 5,
        "mean_frames": (150 + 120 + 125 + 220 + 300) / 5,
        "type_counts": {"Dynamic": 4, "Hybrid": 4, "Static": 4},
        "type_percent": {"Dynamic": 400 / 12, "Hybrid": 400 / 12,
                         "Static": 400 / 12},
        "split_videos": {"test": 2, "train": 2, "valid": 1},
        "split_expressions": {"test": 4, "train": 5, "valid": 3},
        "video_duration_hist": {"bin_width_s": 10.0, "counts": video_hist},
        "object_duration_hist": {"bin_width_s": 10.0, "counts": obj_hist},
        # objects per video: 2,3,2,2,4
        "objects_per_video": {"2": 3, "3": 1, "4": 1},
        # descriptions per object, counted object by object:
        # sv0: o0=1,o1=2; sv1: o0=0,o1=1,o2=1; sv2: o0=2,o1=1;
        # sv3: o0=0,o1=1; sv4: o0=1,o1=0,o2=1,o3=1
        "descriptions_per_object": {"0": 3, "1": 8, "2": 2},
    }
    (FIXTURES / "stats_expected.json").write_text(json.dumps(expected, indent=1))


def make_invalid_fixtures():
    mask_h = mask_w = 4
    solid = solid_mask_rle(mask_h, mask_w)
    # Schema-level break: expression points at a missing object.
    broken = {
        "schema_version": 1,
        "videos": [{
            "id": "bv0", "fps": 5.0, "num_frames": 10, "width": mask_w,
            "height": mask_h,
            "objects": [{"id": "o0", "masks": {"0": solid}}],
            "expressions": [{"id": "e0", "object_id": "ghost",
                             "text": "the missing one", "type": "Static"}],
        }],
    }
    (FIXTURES / "broken_manifest.json").write_text(json.dumps(broken, indent=1))

    # Schema-valid but violating every selection criterion somewhere.
    bad_criteria = {
        "schema_version": 1,
        "videos": [
            {   # 10 s: too short; single object; always visible
                "id": "cv0", "fps": 5.0, "num_frames": 50, "width": mask_w,
                "height": mask_h,
                "objects": [{"id": "o0",
                             "masks": {str(t): solid for t in range(50)}}],
                "expressions": [{"id": "ce0", "object_id": "o0",
                                 "text": "the only one", "type": "Static"}],
            },
            {   # 25 s, 2 objects, both always visible
                "id": "cv1", "fps": 4.0, "num_frames": 100, "width": mask_w,
                "height": mask_h,
                "objects": [
                    {"id": "o0", "masks": {str(t): solid for t in range(100)}},
                    {"id": "o1", "masks": {str(t): solid for t in range(100)}},
                ],
                "expressions": [{"id": "ce1", "object_id": "o0",
                                 "text": "one of two", "type": "Static"}],
            },
        ],
    }
    (FIXTURES / "criteria_manifest.json").write_text(json.dumps(bad_criteria, indent=1))


def main():
    FIXTURES.mkdir(exist_ok=True)
    pairs, golden = make_pairs()
    make_eval_fixture(pairs, golden)
    make_stats_fixture()
    make_invalid_fixtures()
    print("fixtures written to", FIXTURES)


if __name__ == "__main__":
    main()
