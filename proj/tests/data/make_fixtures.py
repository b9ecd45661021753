#!/usr/bin/env python3
"""Regenerates the CLI fixture inputs under tests/data (deterministic).

rule/    detections, vocabulary, manifest and 8-bit PNG frames
spread/  embeddings and a manifest with train annotations and test truth

Golden outputs in tests/data/golden are produced by the CLI itself and are
not touched here.
"""

import json
from pathlib import Path

import numpy as np
from PIL import Image

ROOT = Path(__file__).resolve().parent


def scene_image(rng, w, h, base):
    yy, xx = np.mgrid[0:h, 0:w].astype(float)
    img = np.full((h, w), base)
    for _ in range(5):
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        r = rng.uniform(2, w / 4)
        img += rng.uniform(-0.3, 0.3) * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * r * r))
    return np.clip(img, 0, 1)


def box(rng):
    x, y = (int(v) for v in rng.integers(0, 40, 2))
    w, h = (int(v) for v in rng.integers(2, 20, 2))
    return [x, y, x + w, y + h]


def rule_fixture():
    out = ROOT / "rule"
    (out / "img").mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240601)
    sequences, lines = [], []
    for s, (n, night_seq) in enumerate([(24, False), (20, True), (16, False)]):
        seq = f"seq{s}"
        frames = []
        base_img = None
        for i in range(n):
            if i % 6 == 0:
                base_img = scene_image(rng, 48, 32, 0.1 if night_seq else 0.6)
            img = np.clip(base_img + rng.uniform(-0.04, 0.04, base_img.shape), 0, 1)
            name = f"img/{seq}_{i:03d}.png"
            Image.fromarray(np.round(img * 255).astype(np.uint8), mode="L").save(out / name)
            frame = {"idx": i, "image": name}
            # Half the frames carry an explicit flag; the rest use image luminance.
            if i % 2 == 0:
                frame["night"] = int(night_seq)
            frames.append(frame)

            dets = []
            phase = (i // 5 + s) % 4
            cars = [0, 1, 4, 6][phase]
            people = [2, 0, 0, 1][phase]
            for _ in range(cars):
                dets.append({"cls": str(rng.choice(["car", "truck", "bus"])), "score": round(float(rng.uniform(0.22, 0.99)), 3),
                             "bbox": box(rng)})
            for _ in range(people):
                dets.append({"cls": "person", "score": round(float(rng.uniform(0.22, 0.99)), 3),
                             "bbox": box(rng)})
            dets.append({"cls": "car", "score": 0.1, "bbox": [0, 0, 1, 1]})  # under the floor
            lines.append(json.dumps({"seq": seq, "idx": i, "dets": dets}))
        sequences.append({"id": seq, "split": "test", "frames": frames})
    (out / "detections.jsonl").write_text("\n".join(lines) + "\n")
    (out / "manifest.json").write_text(json.dumps({"sequences": sequences}, indent=1) + "\n")
    (out / "vocabulary.json").write_text(json.dumps({"pedestrian": ["person"], "vehicle": ["car", "truck", "bus"]}) + "\n")


def spread_fixture():
    out = ROOT / "spread"
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(7)
    dim = 16
    tags = [[0, 0, 0], [0, 0, 1], [0, 1, 4], [1, 0, 2]]
    centres = rng.normal(0, 1, (len(tags), dim))
    centres *= 4.0 / np.linalg.norm(centres, axis=1, keepdims=True)
    sequences, lines = [], []
    for s in range(8):
        seq = f"v{s}"
        split = "train" if s < 4 else "test"
        frames = []
        for i in range(15):
            k = (s + i // 5) % len(tags)
            vec = centres[k] + rng.normal(0, 1.2, dim)
            lines.append(json.dumps({"seq": seq, "idx": i, "vec": [round(float(v), 6) for v in vec]}))
            frames.append({"idx": i, "tag": tags[k]})
        sequences.append({"id": seq, "split": split, "frames": frames})
    (out / "embeddings.jsonl").write_text("\n".join(lines) + "\n")
    (out / "manifest.json").write_text(json.dumps({"sequences": sequences}, indent=1) + "\n")


if __name__ == "__main__":
    rule_fixture()
    spread_fixture()
