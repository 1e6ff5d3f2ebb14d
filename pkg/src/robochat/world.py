"""2D world model: poses, occupancy map, kinematics, planning, visibility.

Conventions used throughout:
  - metric frame: x right, y up, heading theta in radians, theta in (-pi, pi]
  - grid frame: row 0 is the y=0 edge, cell (row, col) covers the metric
    square [col*res, (col+1)*res) x [row*res, (row+1)*res)
  - paths are cell-center polylines; costs are metric metres
"""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable

import numpy as np

SQRT2 = math.sqrt(2.0)


def normalize_angle(theta: float) -> float:
    """Wrap into (-pi, pi]. remainder() returns [-pi, pi]; fold -pi up."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "theta", normalize_angle(self.theta))

    def distance_to(self, other: "Pose2D") -> float:
        return math.hypot(other.x - self.x, other.y - self.y)

    def bearing_to(self, other: "Pose2D") -> float:
        """Relative bearing of `other` from this pose, in (-pi, pi]."""
        return normalize_angle(
            math.atan2(other.y - self.y, other.x - self.x) - self.theta
        )


@dataclass(frozen=True)
class SceneObject:
    name: str
    kind: str
    pose: Pose2D


class MapError(Exception):
    """Malformed or inconsistent map definition."""


@dataclass
class WorldMap:
    """Occupancy grid plus named locations and scene objects."""

    grid: np.ndarray  # bool, shape (rows, cols); True = occupied
    resolution: float  # metres per cell
    locations: dict[str, Pose2D]
    objects: list[SceneObject]
    name: str = "unnamed"

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=bool)
        if self.grid.ndim != 2 or self.grid.size == 0:
            raise MapError("grid must be a non-empty 2D array")
        if self.resolution <= 0:
            raise MapError("resolution must be positive")
        self.validate()

    # -- geometry ---------------------------------------------------------

    @property
    def rows(self) -> int:
        return self.grid.shape[0]

    @property
    def cols(self) -> int:
        return self.grid.shape[1]

    @property
    def width_m(self) -> float:
        return self.cols * self.resolution

    @property
    def height_m(self) -> float:
        return self.rows * self.resolution

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(y // self.resolution), int(x // self.resolution))

    def center_of(self, row: int, col: int) -> tuple[float, float]:
        return ((col + 0.5) * self.resolution, (row + 0.5) * self.resolution)

    def in_bounds(self, row: int, col: int) -> bool:
        return 0 <= row < self.rows and 0 <= col < self.cols

    def is_free(self, x: float, y: float) -> bool:
        row, col = self.cell_of(x, y)
        return self.in_bounds(row, col) and not self.grid[row, col]

    # -- consistency ------------------------------------------------------

    def validate(self) -> None:
        seen_locations: set[str] = set()
        for name, pose in self.locations.items():
            key = name.lower()
            if key in seen_locations:
                raise MapError(f"duplicate location name {name!r}")
            seen_locations.add(key)
            if not self.is_free(pose.x, pose.y):
                raise MapError(f"location {name!r} is not on a free cell")
        seen_objects: set[str] = set()
        for obj in self.objects:
            key = obj.name.lower()
            if key in seen_objects:
                raise MapError(f"duplicate object name {obj.name!r}")
            seen_objects.add(key)
            if not self.is_free(obj.pose.x, obj.pose.y):
                raise MapError(f"object {obj.name!r} is not on a free cell")

    # -- (de)serialization --------------------------------------------------

    @classmethod
    def from_dict(cls, raw: dict) -> "WorldMap":
        """Parse the map-file shape: grid rows are "0"/"1" strings, row 0
        is the y=0 edge."""
        try:
            rows = raw["grid"]
            if not rows or any(len(r) != len(rows[0]) for r in rows):
                raise MapError("grid rows must be nonempty and equal length")
            if any(ch not in "01" for r in rows for ch in r):
                raise MapError("grid rows may contain only '0' and '1'")
            grid = np.array([[ch == "1" for ch in r] for r in rows], dtype=bool)
            locations = {
                name: Pose2D(float(p[0]), float(p[1]),
                             float(p[2]) if len(p) > 2 else 0.0)
                for name, p in raw["locations"].items()
            }
            objects = [
                SceneObject(
                    o["name"], o.get("kind", "object"),
                    Pose2D(float(o["x"]), float(o["y"]),
                           float(o.get("theta", 0.0))),
                )
                for o in raw.get("objects", [])
            ]
            return cls(
                grid=grid,
                resolution=float(raw["resolution"]),
                locations=locations,
                objects=objects,
                name=raw.get("name", "unnamed"),
            )
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MapError(f"bad map definition: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "WorldMap":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "resolution": self.resolution,
            "grid": ["".join("1" if v else "0" for v in row)
                     for row in self.grid],
            "locations": {
                name: [pose.x, pose.y, pose.theta]
                for name, pose in self.locations.items()
            },
            "objects": [
                {"name": o.name, "kind": o.kind,
                 "x": o.pose.x, "y": o.pose.y, "theta": o.pose.theta}
                for o in self.objects
            ],
        }

    # -- lookup -------------------------------------------------------------

    def find_location(self, name: str) -> Pose2D | None:
        want = name.strip().lower()
        for key, pose in self.locations.items():
            if key.lower() == want:
                return pose
        return None

    def find_object(self, name: str) -> SceneObject | None:
        want = name.strip().lower()
        for obj in self.objects:
            if obj.name.lower() == want:
                return obj
        return None


# ---------------------------------------------------------------------------
# robot state + dynamics

V_MAX = 0.8  # m/s
W_MAX = 1.5  # rad/s


class RobotStatus(str, Enum):
    IDLE = "idle"
    EXECUTING = "executing"
    FAILED = "failed"


@dataclass(frozen=True)
class RobotState:
    pose: Pose2D
    linear_v: float = 0.0  # m/s
    angular_v: float = 0.0  # rad/s
    status: RobotStatus = RobotStatus.IDLE
    sim_time: float = 0.0

    def __post_init__(self):
        if abs(self.linear_v) > V_MAX + 1e-9:
            raise ValueError(f"|linear_v| exceeds {V_MAX} m/s")
        if abs(self.angular_v) > W_MAX + 1e-9:
            raise ValueError(f"|angular_v| exceeds {W_MAX} rad/s")


def step(state: RobotState, v: float, w: float, dt: float,
         world_map: WorldMap) -> RobotState:
    """One forward-Euler unicycle step; commands are clamped to the limits.

    Motion that would enter an occupied or out-of-bounds cell freezes the
    pose and flips status to FAILED. The nominal stepping interval is
    0.05 s, but any positive dt integrates (pure rotation over long dt is
    exact, and tests lean on that).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    v = max(-V_MAX, min(V_MAX, v))
    w = max(-W_MAX, min(W_MAX, w))
    p = state.pose
    nx = p.x + v * math.cos(p.theta) * dt
    ny = p.y + v * math.sin(p.theta) * dt
    ntheta = normalize_angle(p.theta + w * dt)
    t = state.sim_time + dt
    if not world_map.is_free(nx, ny):
        return replace(state, linear_v=0.0, angular_v=0.0,
                       status=RobotStatus.FAILED, sim_time=t)
    return replace(state, pose=Pose2D(nx, ny, ntheta),
                   linear_v=v, angular_v=w, sim_time=t)


# ---------------------------------------------------------------------------
# planning

def inflate(grid: np.ndarray, margin_cells: int = 1) -> np.ndarray:
    """Chebyshev dilation: occupied spreads margin_cells in all 8 dirs."""
    out = np.array(grid, dtype=bool)
    for _ in range(margin_cells):
        g = out
        out = g.copy()
        out[1:, :] |= g[:-1, :]
        out[:-1, :] |= g[1:, :]
        out[:, 1:] |= g[:, :-1]
        out[:, :-1] |= g[:, 1:]
        out[1:, 1:] |= g[:-1, :-1]
        out[1:, :-1] |= g[:-1, 1:]
        out[:-1, 1:] |= g[1:, :-1]
        out[:-1, :-1] |= g[1:, 1:]
    return out


_NEIGHBORS = (
    (-1, 0, 1.0), (1, 0, 1.0), (0, -1, 1.0), (0, 1, 1.0),
    (-1, -1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (1, 1, SQRT2),
)


def _octile(a: tuple[int, int], b: tuple[int, int]) -> float:
    dr = abs(a[0] - b[0])
    dc = abs(a[1] - b[1])
    return max(dr, dc) + (SQRT2 - 1.0) * min(dr, dc)


@dataclass(frozen=True)
class PlanResult:
    path: list[tuple[float, float]]  # metric waypoints, start..goal centers
    cost_m: float
    cells: list[tuple[int, int]] = field(default_factory=list)


def astar(world_map: WorldMap, start_xy: tuple[float, float],
          goal_xy: tuple[float, float], margin_cells: int = 1,
          smooth: bool = True) -> PlanResult | None:
    """8-connected A* on the inflated grid; None when unreachable.

    Diagonal moves may not cut corners: both orthogonal neighbours of a
    diagonal step must be free. Path cost is in metres on the raw cell
    polyline (before smoothing).
    """
    blocked = inflate(world_map.grid, margin_cells)
    start = world_map.cell_of(*start_xy)
    goal = world_map.cell_of(*goal_xy)
    for cell in (start, goal):
        if not world_map.in_bounds(*cell) or blocked[cell]:
            return None
    if start == goal:
        return PlanResult([world_map.center_of(*start)], 0.0, [start])

    g_cost: dict[tuple[int, int], float] = {start: 0.0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    open_heap: list[tuple[float, int, tuple[int, int]]] = []
    counter = 0  # tiebreaker keeps heap comparisons off the tuples
    heapq.heappush(open_heap, (_octile(start, goal), counter, start))
    closed: set[tuple[int, int]] = set()

    while open_heap:
        _, _, current = heapq.heappop(open_heap)
        if current in closed:
            continue
        if current == goal:
            break
        closed.add(current)
        cr, cc = current
        for dr, dc, move_cost in _NEIGHBORS:
            nr, nc = cr + dr, cc + dc
            if not (0 <= nr < blocked.shape[0] and 0 <= nc < blocked.shape[1]):
                continue
            if blocked[nr, nc]:
                continue
            if dr and dc and (blocked[cr + dr, cc] or blocked[cr, cc + dc]):
                continue  # corner cut
            tentative = g_cost[current] + move_cost
            if tentative < g_cost.get((nr, nc), math.inf) - 1e-12:
                g_cost[(nr, nc)] = tentative
                came[(nr, nc)] = current
                counter += 1
                heapq.heappush(
                    open_heap,
                    (tentative + _octile((nr, nc), goal), counter, (nr, nc)),
                )
    else:
        return None
    if goal not in g_cost:
        return None

    cells = [goal]
    while cells[-1] != start:
        cells.append(came[cells[-1]])
    cells.reverse()
    cost_m = g_cost[goal] * world_map.resolution
    waypoints = [world_map.center_of(r, c) for r, c in cells]
    if smooth:
        waypoints = smooth_path(waypoints, world_map, blocked)
    return PlanResult(waypoints, cost_m, cells)


def _segment_free(a: tuple[float, float], b: tuple[float, float],
                  world_map: WorldMap, blocked: np.ndarray) -> bool:
    length = math.hypot(b[0] - a[0], b[1] - a[1])
    if length == 0:
        return True
    steps = max(2, int(length / (world_map.resolution * 0.25)) + 1)
    for i in range(steps + 1):
        t = i / steps
        x = a[0] + t * (b[0] - a[0])
        y = a[1] + t * (b[1] - a[1])
        row, col = world_map.cell_of(x, y)
        if not world_map.in_bounds(row, col) or blocked[row, col]:
            return False
    return True


def smooth_path(waypoints: list[tuple[float, float]], world_map: WorldMap,
                blocked: np.ndarray) -> list[tuple[float, float]]:
    """Greedy string-pull: keep a waypoint only where line of sight breaks."""
    if len(waypoints) <= 2:
        return list(waypoints)
    out = [waypoints[0]]
    anchor = 0
    k = 1
    while k < len(waypoints) - 1:
        if not _segment_free(waypoints[anchor], waypoints[k + 1],
                             world_map, blocked):
            out.append(waypoints[k])
            anchor = k
        k += 1
    out.append(waypoints[-1])
    return out


def plan_path(world_map: WorldMap, start: Pose2D, goal: Pose2D,
              margin_cells: int = 1) -> list[Pose2D] | None:
    """Pose-level wrapper over astar: metric waypoints, each oriented
    along the segment it starts (goal waypoint keeps the goal heading)."""
    result = astar(world_map, (start.x, start.y), (goal.x, goal.y),
                   margin_cells=margin_cells)
    if result is None:
        return None
    pts = result.path
    poses: list[Pose2D] = []
    for i, (x, y) in enumerate(pts):
        if i + 1 < len(pts):
            nxt = pts[i + 1]
            theta = math.atan2(nxt[1] - y, nxt[0] - x)
        else:
            theta = goal.theta
        poses.append(Pose2D(x, y, theta))
    return poses


# ---------------------------------------------------------------------------
# visibility

SENSOR_RANGE_M = 4.0
SENSOR_HALF_ANGLE = math.radians(60.0)


def _ray_clear(world_map: WorldMap, x0: float, y0: float,
               x1: float, y1: float) -> bool:
    """Amanatides & Woo voxel traversal; occupied end cells still count as
    blocking only strictly between the endpoints."""
    r0, c0 = world_map.cell_of(x0, y0)
    r1, c1 = world_map.cell_of(x1, y1)
    if (r0, c0) == (r1, c1):
        return True
    res = world_map.resolution
    dx = x1 - x0
    dy = y1 - y0
    step_c = 1 if dx > 0 else -1 if dx < 0 else 0
    step_r = 1 if dy > 0 else -1 if dy < 0 else 0
    t_max_c = math.inf
    t_delta_c = math.inf
    if dx != 0:
        next_cx = (c0 + (1 if dx > 0 else 0)) * res
        t_max_c = (next_cx - x0) / dx
        t_delta_c = abs(res / dx)
    t_max_r = math.inf
    t_delta_r = math.inf
    if dy != 0:
        next_ry = (r0 + (1 if dy > 0 else 0)) * res
        t_max_r = (next_ry - y0) / dy
        t_delta_r = abs(res / dy)
    row, col = r0, c0
    while True:
        if t_max_c < t_max_r:
            col += step_c
            t_max_c += t_delta_c
        else:
            row += step_r
            t_max_r += t_delta_r
        if (row, col) == (r1, c1):
            return True
        if not world_map.in_bounds(row, col) or world_map.grid[row, col]:
            return False


def visible_objects(world_map: WorldMap, pose: Pose2D,
                    range_m: float = SENSOR_RANGE_M,
                    half_angle: float = SENSOR_HALF_ANGLE) -> list[SceneObject]:
    """Objects within range, inside the view cone, with clear line of sight.

    Ordered nearest-first; ties broken by name for determinism.
    """
    hits: list[tuple[float, str, SceneObject]] = []
    for obj in world_map.objects:
        d = pose.distance_to(obj.pose)
        if d > range_m:
            continue
        if abs(pose.bearing_to(obj.pose)) > half_angle + 1e-12:
            continue
        if not _ray_clear(world_map, pose.x, pose.y, obj.pose.x, obj.pose.y):
            continue
        hits.append((d, obj.name.lower(), obj))
    hits.sort(key=lambda t: (t[0], t[1]))
    return [obj for _, _, obj in hits]


def iter_free_cells(world_map: WorldMap) -> Iterable[tuple[int, int]]:
    free_rows, free_cols = np.nonzero(~world_map.grid)
    return zip(free_rows.tolist(), free_cols.tolist())
