"""Grasp-type classification and the robot-versus-human match matrix.

Types are ordered by escalation from fingertip pinches to full-palm power
grasps.  The robot's programmed motion always curls the coupled PIP/DIP
joints, so the straight-finger surface grasp can only appear in human labels.
"""

from __future__ import annotations

import csv
from enum import IntEnum
from pathlib import Path

import numpy as np


class GraspType(IntEnum):
    FINGER_SURFACE = 0  # human-only
    FINGERTIP = 1
    TIP_AND_THUMB = 2
    POWER_SMALL = 3
    POWER_LARGE = 4

    @classmethod
    def from_label(cls, label):
        key = label.strip().upper().replace(" ", "_").replace("-", "_")
        aliases = {"POWER(SMALL)": "POWER_SMALL", "POWER(LARGE)": "POWER_LARGE"}
        key = aliases.get(key, key)
        return cls[key]


class GraspClassificationError(ValueError):
    pass


MIN_CONTACT_FORCE = 0.05  # N, ignores feather-light grazes
DEFAULT_DIAMETER_THRESHOLD = 60.0  # mm, splits the two power grasps


def classify_grasp(state, obj, min_force=MIN_CONTACT_FORCE,
                   diameter_threshold=DEFAULT_DIAMETER_THRESHOLD) -> GraspType:
    """Rule cascade over which hand parts hold the object."""
    body_id = f"object:{obj.name}"
    parts = set()
    for c in state.contacts:
        if c.body_id != body_id or c.penetration <= 0 or c.normal < min_force:
            continue
        part = c.link_id.split("/")[0] if "/" in c.link_id else c.link_id
        if part == "palm":
            parts.add("palm")
        else:
            link = c.link_id.split("/")[1]
            parts.add({"link0": "proximal", "link1": "middle", "link2": "distal"}[link])
    if not parts:
        raise GraspClassificationError(f"no contacts on {obj.name}: not a grasp")
    if "palm" in parts:
        diameter = obj.geometry_summary["width"]
        return GraspType.POWER_LARGE if diameter > diameter_threshold \
            else GraspType.POWER_SMALL
    if parts & {"middle", "proximal"}:
        return GraspType.TIP_AND_THUMB
    return GraspType.FINGERTIP


class MatchMatrix:
    """5x5 robot-versus-human grasp-type counts."""

    def __init__(self, counts):
        self.counts = np.asarray(counts, dtype=int)
        if self.counts.shape != (5, 5):
            raise ValueError("match matrix must be 5x5")

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def diagonal_fraction(self):
        return float(np.trace(self.counts)) / self.total

    @property
    def adjacency_fraction(self):
        adj = sum(int(self.counts[i, j]) for i in range(5) for j in range(5)
                  if abs(i - j) == 1)
        return adj / self.total

    def as_dict(self):
        return {"counts": self.counts.tolist(),
                "total": self.total,
                "diagonal_fraction": self.diagonal_fraction,
                "adjacency_fraction": self.adjacency_fraction}


def grasp_match_matrix(robot_labels: dict, human_labels: dict) -> MatchMatrix:
    """Counts over object keys present in both label sets; keys must match."""
    if set(robot_labels) != set(human_labels):
        missing = set(robot_labels) ^ set(human_labels)
        raise KeyError(f"label sets disagree on keys: {sorted(missing)}")
    counts = np.zeros((5, 5), dtype=int)
    for key in sorted(robot_labels):
        r = GraspType(robot_labels[key])
        h = GraspType(human_labels[key])
        counts[int(r), int(h)] += 1
    return MatchMatrix(counts)


def load_human_labels(path=None):
    """Authored human grasp labels (a transcription, not ground truth)."""
    from ..hand import data_path
    path = Path(path) if path else data_path("labels", "human_grasps.csv")
    out = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out[row["grasp_key"]] = GraspType.from_label(row["grasp_type"])
    return out
