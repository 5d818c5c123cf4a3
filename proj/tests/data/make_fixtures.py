#!/usr/bin/env python3
"""Regenerates the synthetic detection fixtures in this directory.

Output is deterministic (fixed seeds), so re-running leaves the checked-in files unchanged.

    python3 tests/data/make_fixtures.py
"""
import json
import random
from pathlib import Path

HERE = Path(__file__).resolve().parent


def box(x1, y1, x2, y2):
    return [round(x1, 2), round(y1, 2), round(x2, 2), round(y2, 2)]


def samples(rng, hue, n=16):
    out = []
    for _ in range(n):
        h = (hue + rng.uniform(-8.0, 8.0)) % 360.0
        out.append([round(h, 3), round(rng.uniform(0.55, 0.7), 3), round(rng.uniform(0.55, 0.7), 3)])
    return out


def person(rng, track, b, depth, hue):
    return {"track_id": track, "bbox": b, "mean_depth": depth, "pixel_samples": samples(rng, hue)}


def action(track, label, conf, b):
    return {"track_id": track, "label": label, "confidence": conf, "bbox": b}


def obj(label, b, depth, source="detector"):
    return {"label": label, "bbox": b, "mean_depth": depth, "source": source}


def write(name, meta, frames):
    lines = [json.dumps(meta, sort_keys=True)]
    lines += [json.dumps(f, sort_keys=True) for f in frames]
    (HERE / name).write_text("\n".join(lines) + "\n")


def synthetic_300():
    """Two people, a short tracker dropout, a long exit/re-entry, noisy actions and clutter."""
    rng = random.Random(7)
    meta = {"video_id": "synthetic_300", "fps": 30.0, "width": 640, "height": 480, "scene_label": "classroom"}
    frames = []
    for f in range(300):
        persons, actions, objects = [], [], []
        # Person A: track 1, lost for frames 120..124, re-detected as track 3 slightly shifted.
        ax = 80 + 0.1 * f
        a_box = box(ax, 120, ax + 120, 420)
        a_track = 1 if f < 120 else (3 if f >= 125 else None)
        if a_track is not None:
            persons.append(person(rng, a_track, a_box, 0.42, 10.0))
            if f < 150:
                actions.append(action(a_track, "read", round(rng.uniform(0.8, 0.95), 3), a_box))
            elif f >= 160:
                actions.append(action(a_track, "write", round(rng.uniform(0.8, 0.95), 3), a_box))
            actions.append(action(a_track, "sit", round(rng.uniform(0.76, 0.79), 3), a_box))
            if rng.random() < 0.3:
                actions.append(action(a_track, "stand", round(rng.uniform(0.4, 0.7), 3), a_box))
        # Person B: track 2 for frames 40..159, leaves, returns as track 4 for 220..299.
        b_track = 2 if 40 <= f < 160 else (4 if f >= 220 else None)
        if b_track is not None:
            bx = 420 if b_track == 2 else 380
            b_box = box(bx, 100, bx + 110, 430)
            persons.append(person(rng, b_track, b_box, 0.55, 230.0))
            label = "walk" if b_track == 2 else "talk to"
            actions.append(action(b_track, label, round(rng.uniform(0.78, 0.93), 3), b_box))
        # An isolated spurious detection that voting removes.
        if f in (30, 200) and a_track is not None:
            actions.append(action(a_track, "dance", 0.99, a_box))
        objects.append(obj("book", box(ax + 60, 300, ax + 140, 360), 0.44))
        objects.append(obj("chair", box(ax - 10, 260, ax + 110, 470), 0.45, "segmentation"))
        objects.append(obj("cup", box(ax + 100, 280, ax + 125, 310), 0.9))
        objects.append(obj("whiteboard", box(200, 10, 600, 110), 0.95, "segmentation"))
        if f >= 160:
            objects.append(obj("pen", box(ax + 90, 320, ax + 150, 350), 0.43))
        if b_track is not None:
            objects.append(obj("backpack", box(430, 200, 500, 330), 0.56))
        frames.append({"frame_index": f, "persons": persons, "actions": actions, "objects": objects})
    write("synthetic_300.ndjson", meta, frames)


def golden_two_actor():
    """Person A reads, then writes; person B walks in on the far side while A is writing."""
    rng = random.Random(11)
    meta = {"video_id": "golden_two_actor", "fps": 30.0, "width": 1280, "height": 720, "scene_label": "classroom"}
    frames = []
    for f in range(600):
        persons, actions, objects = [], [], []
        a_box = box(100, 200, 300, 650)
        persons.append(person(rng, 1, a_box, 0.40, 20.0))
        if f <= 149:
            actions.append(action(1, "read", 0.91, a_box))
            objects.append(obj("book", box(180, 420, 330, 500), 0.41))
        elif f >= 160:
            actions.append(action(1, "write", 0.88, a_box))
            objects.append(obj("notebook", box(170, 430, 320, 520), 0.42))
            objects.append(obj("pen", box(250, 430, 290, 470), 0.41))
        if f % 3 == 0:
            actions.append(action(1, "stand", 0.6, a_box))
        if f in (75, 300):
            actions.append(action(1, "jump", 0.97, a_box))
        if f >= 400:
            bx = 1160 - 0.4 * (f - 400)
            b_box = box(bx, 180, bx + 110, 640)
            persons.append(person(rng, 2, b_box, 0.60, 240.0))
            actions.append(action(2, "walk", 0.86, b_box))
            objects.append(obj("door", box(1150, 100, 1280, 660), 0.95, "segmentation"))
        objects.append(obj("desk", box(60, 450, 420, 700), 0.45, "segmentation"))
        objects.append(obj("window", box(500, 40, 800, 300), 0.98, "segmentation"))
        frames.append({"frame_index": f, "persons": persons, "actions": actions, "objects": objects})
    write("golden_two_actor.ndjson", meta, frames)


if __name__ == "__main__":
    synthetic_300()
    golden_two_actor()
