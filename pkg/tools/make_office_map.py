#!/usr/bin/env python3
"""Generate the shipped office map: 18 x 20 m at 0.5 m/cell.

Five rooms (kitchen, office, storage, lab, lounge) around a central
east-west corridor, with 1.5 m doorways so the robot fits through after
one cell of obstacle inflation. Run from the repo root:

    python3 tools/make_office_map.py

Rewrites src/robochat/data/office_map.json and sanity-checks that every
named location is reachable from "start".
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from robochat.world import Pose2D, WorldMap, astar  # noqa: E402

COLS, ROWS = 36, 40  # 18 m x 20 m at 0.5 m/cell
RES = 0.5

# wall rows bounding the corridor (corridor itself is rows 18..21)
SOUTH_WALL_ROW = 17
NORTH_WALL_ROW = 22
# doorway column spans (inclusive) cut into those walls
SOUTH_DOORS = [(5, 7), (16, 18), (28, 30)]   # kitchen, office, storage
NORTH_DOORS = [(8, 10), (25, 27)]            # lab, lounge
# vertical walls separating rooms within each half
SOUTH_DIVIDERS = [11, 23]
NORTH_DIVIDER = 17

LOCATIONS = {
    "start": [8.75, 9.75, 0.0],     # corridor, facing east
    "kitchen": [2.75, 4.25, 0.0],
    "office": [8.75, 4.25, 0.0],
    "storage": [14.75, 4.25, 0.0],
    "lab": [4.25, 15.25, 0.0],
    "lounge": [13.25, 15.25, 0.0],
    "dock": [16.25, 9.75, 0.0],     # corridor east end
}

OBJECTS = [
    {"name": "chair", "kind": "chair", "x": 7.25, "y": 3.25},
    {"name": "table", "kind": "table", "x": 3.75, "y": 5.25},
    {"name": "mug", "kind": "mug", "x": 1.75, "y": 2.75},
    {"name": "plant", "kind": "plant", "x": 11.25, "y": 10.25},
    {"name": "box", "kind": "box", "x": 3.25, "y": 9.75},
    {"name": "printer", "kind": "printer", "x": 15.75, "y": 6.25},
    {"name": "sofa", "kind": "sofa", "x": 12.25, "y": 16.75},
    {"name": "whiteboard", "kind": "whiteboard", "x": 2.75, "y": 18.25},
]


def build_grid() -> list[str]:
    grid = [[0] * COLS for _ in range(ROWS)]

    def wall(row: int, col: int):
        grid[row][col] = 1

    for col in range(COLS):
        wall(0, col)
        wall(ROWS - 1, col)
    for row in range(ROWS):
        wall(row, 0)
        wall(row, COLS - 1)

    for col in range(1, COLS - 1):
        if not any(lo <= col <= hi for lo, hi in SOUTH_DOORS):
            wall(SOUTH_WALL_ROW, col)
        if not any(lo <= col <= hi for lo, hi in NORTH_DOORS):
            wall(NORTH_WALL_ROW, col)

    for divider in SOUTH_DIVIDERS:
        for row in range(1, SOUTH_WALL_ROW):
            wall(row, divider)
    for row in range(NORTH_WALL_ROW + 1, ROWS - 1):
        wall(row, NORTH_DIVIDER)

    return ["".join(str(v) for v in row) for row in grid]


def main():
    data = {
        "name": "office",
        "resolution": RES,
        "grid": build_grid(),
        "locations": LOCATIONS,
        "objects": OBJECTS,
    }
    world_map = WorldMap.from_dict(data)  # runs the invariant checks

    start = world_map.find_location("start")
    for name, pose in world_map.locations.items():
        if name == "start":
            continue
        result = astar(world_map, (start.x, start.y), (pose.x, pose.y))
        assert result is not None, f"{name} unreachable from start"
        print(f"start -> {name}: {result.cost_m:.1f} m")
    for obj in world_map.objects:
        assert world_map.is_free(obj.pose.x, obj.pose.y)

    out = (Path(__file__).resolve().parents[1]
           / "src" / "robochat" / "data" / "office_map.json")
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(data, indent=1), encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
