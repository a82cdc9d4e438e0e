"""Regenerate the playback fixtures for the UI conformance tests.

Writes plans.json, poses.jsonl (1000 scripted tool poses), and
expected_frames.jsonl (the guidance frame each pose must produce, in the
exact wire format the serve mode emits). Run from this directory:

    python3 generate_playback.py
"""
import json
from pathlib import Path

import numpy as np

from surgnav.guidance import ToolPose, TrajectoryPlan, guidance_frame
from surgnav.io import write_plans
from surgnav.server import frame_message

HERE = Path(__file__).parent
N_POSES = 1000


def main() -> None:
    plans = [
        TrajectoryPlan(skin_entry=(40.0, 25.0, 60.0),
                       bone_entry=(38.0, 24.0, 57.0),
                       target=(10.0, 10.0, 15.0)),
        TrajectoryPlan(skin_entry=(-35.0, 30.0, 55.0),
                       bone_entry=(-33.5, 29.0, 52.5),
                       target=(-8.0, 12.0, 10.0)),
    ]
    write_plans(HERE / "plans.json", plans, ids=["R1", "L1"])

    # The serve mode guides against the first plan in insertion mode by
    # default; the script plays poses scattered around that trajectory,
    # including retractions, strong lateral offsets, and a few near-oblique
    # directions that invalidate the plane offsets.
    plan = plans[0]
    d = plan.direction
    rng = np.random.default_rng(20260823)
    poses = []
    for i in range(N_POSES):
        depth = rng.uniform(-80.0, 30.0)
        lateral = rng.normal(scale=8.0, size=3)
        lateral -= (lateral @ d) * d
        tip = plan.skin_entry + depth * d + lateral
        if i % 97 == 0:
            # Tool almost perpendicular to the planned path.
            axis = np.cross(d, [0.0, 0.0, 1.0])
            axis /= np.linalg.norm(axis)
            c, s = np.cos(np.radians(89.6)), np.sin(np.radians(89.6))
            direction = c * d + s * axis
        else:
            direction = d + rng.normal(scale=0.05, size=3)
        direction = direction / np.linalg.norm(direction)
        poses.append((tip, direction))

    with open(HERE / "poses.jsonl", "w") as fh:
        for tip, direction in poses:
            fh.write(json.dumps({"kind": "pose", "tip": list(tip),
                                 "direction": list(direction)}) + "\n")

    with open(HERE / "expected_frames.jsonl", "w") as fh:
        for tip, direction in poses:
            frame = guidance_frame(plan, ToolPose(tip, direction), mode="insertion")
            fh.write(json.dumps(frame_message(frame)) + "\n")


if __name__ == "__main__":
    main()
