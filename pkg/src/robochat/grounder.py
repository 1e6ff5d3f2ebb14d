"""Perception stub: scene reports and object grounding from map truth.

Real detection is out of scope. Every object geometrically visible from
the observer pose is reported, each annotated with bearing and distance;
an optional label-noise model drops each label independently with
probability q (seeded) so imperfect-perception scenarios stay
reproducible.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .world import (
    SENSOR_HALF_ANGLE,
    SENSOR_RANGE_M,
    Pose2D,
    WorldMap,
    visible_objects,
)


@dataclass(frozen=True)
class SceneLabel:
    name: str
    bearing_rad: float
    distance_m: float


@dataclass(frozen=True)
class SceneReport:
    observer_pose: Pose2D
    labels: tuple[SceneLabel, ...]
    backend_id: str = "ground-truth"
    error: str | None = None

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(label.name for label in self.labels)


def describe_scene(world_map: WorldMap, pose: Pose2D, q: float = 0.0,
                   seed: int = 0, range_m: float = SENSOR_RANGE_M,
                   half_angle: float = SENSOR_HALF_ANGLE) -> SceneReport:
    """Visible objects minus seeded per-label dropout with probability q.

    q=0 is exact ground truth for the pose; the metrics layer uses that as
    the scoring reference.
    """
    if not 0.0 <= q <= 1.0:
        raise ValueError("dropout q must be in [0, 1]")
    labels = []
    for obj in visible_objects(world_map, pose, range_m, half_angle):
        if q > 0.0:
            rng = random.Random(f"{seed}/{obj.name.lower()}")
            if rng.random() < q:
                continue
        labels.append(SceneLabel(
            name=obj.name,
            bearing_rad=pose.bearing_to(obj.pose),
            distance_m=pose.distance_to(obj.pose),
        ))
    return SceneReport(pose, tuple(labels))


def ground_object(name: str, world_map: WorldMap) -> Pose2D | None:
    """Exact, case-insensitive match against map objects; None if absent."""
    obj = world_map.find_object(name)
    return obj.pose if obj is not None else None
