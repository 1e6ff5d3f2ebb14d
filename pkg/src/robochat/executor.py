"""Intent -> ActionPlan -> simulated execution.

plan() is pure mapping; execute() owns the robot state and the world
stepping loop (fixed dt), reporting state snapshots and replies through
callbacks so the pipeline layer can forward them onto bus topics.
"""

from __future__ import annotations

import math
import time
import uuid
from dataclasses import dataclass, replace
from enum import Enum
from typing import Callable

import numpy as np

from .grounder import SceneReport, describe_scene, ground_object
from .intents import CommandIntent, IntentLabel
from .world import (
    Pose2D,
    RobotState,
    RobotStatus,
    WorldMap,
    plan_path,
    step,
)

SIM_DT = 0.05  # s of simulated time per tick
PLAN_TIMEOUT_SIM_S = 60.0
GOAL_TOLERANCE_M = 0.3
WAYPOINT_TOLERANCE_M = 0.15
HEADING_TOLERANCE_RAD = 0.1
CRUISE_V = 0.6  # m/s
TURN_W = 1.0  # rad/s while aligning
SEGMENT_SPEED = 0.5  # m/s and rad/s for relative-motion segments


# ---------------------------------------------------------------------------
# plan primitives

@dataclass(frozen=True)
class DriveSegment:
    v: float
    w: float
    duration_s: float


@dataclass(frozen=True)
class FollowPath:
    waypoints: tuple[Pose2D, ...]

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("FollowPath needs at least one waypoint")


@dataclass(frozen=True)
class Reply:
    text: str
    objects: tuple[str, ...] = ()  # names the reply asserts were identified


Primitive = DriveSegment | FollowPath | Reply


@dataclass(frozen=True)
class ActionPlan:
    plan_id: str
    intent_ref: CommandIntent
    primitives: tuple[Primitive, ...]
    created_time: float

    def __post_init__(self):
        if not self.primitives:
            raise ValueError("plan needs at least one primitive")


class PlanResultKind(str, Enum):
    SUCCESS = "success"
    FAILURE = "failure"
    PREEMPTED = "preempted"


@dataclass(frozen=True)
class ExecutionOutcome:
    plan_id: str
    result: PlanResultKind
    final_pose: Pose2D
    action_initiated_time: float | None
    completed_time: float
    detail: str = ""

    def __post_init__(self):
        if (self.action_initiated_time is not None
                and self.completed_time < self.action_initiated_time):
            raise ValueError("completed_time precedes action_initiated_time")


class NoPathError(Exception):
    """Target resolved to a pose the planner cannot reach."""

    def __init__(self, target: str):
        super().__init__(f"no path to {target!r}")
        self.target = target


# ---------------------------------------------------------------------------
# planning

_CANNED_CHAT = "Hello! Tell me where to go, or ask what I can see."
_REPHRASE = "Sorry, I didn't understand that. Could you rephrase?"

ChatBackend = Callable[[str], str]


def _new_plan(intent: CommandIntent, *primitives: Primitive) -> ActionPlan:
    return ActionPlan(uuid.uuid4().hex[:12], intent, tuple(primitives),
                      time.monotonic())


def render_pose(pose: Pose2D) -> str:
    return f"x={pose.x:.2f}, y={pose.y:.2f}, heading={pose.theta:.2f} rad"


def plan(intent: CommandIntent, state: RobotState, world_map: WorldMap,
         scene: SceneReport | None = None,
         chat_backend: ChatBackend | None = None) -> ActionPlan:
    """Map one intent to a plan. Raises NoPathError when navigation has a
    known target but no route; every other case yields a plan (queries and
    unknowns become Reply plans)."""
    label = intent.label
    slots = intent.slots

    if label is IntentLabel.NAVIGATE_TO:
        target = slots["target"]
        goal = world_map.find_location(target)
        if goal is None:
            obj = world_map.find_object(target)
            goal = obj.pose if obj is not None else None
        if goal is None:
            return _new_plan(intent, Reply(f"I don't know {target}."))
        waypoints = plan_path(world_map, state.pose, goal)
        if waypoints is None:
            raise NoPathError(target)
        # steer to the actual goal point, not its cell center
        waypoints[-1] = Pose2D(goal.x, goal.y, goal.theta)
        return _new_plan(intent, FollowPath(tuple(waypoints)))

    if label is IntentLabel.MOVE_REL:
        direction = slots["direction"]
        distance = float(slots.get("distance_m", 0.5))
        duration = distance / SEGMENT_SPEED
        if direction == "forward":
            return _new_plan(intent, DriveSegment(SEGMENT_SPEED, 0.0, duration))
        if direction == "backward":
            return _new_plan(intent, DriveSegment(-SEGMENT_SPEED, 0.0, duration))
        # strafe becomes a quarter turn then a forward leg
        turn = SEGMENT_SPEED if direction == "left" else -SEGMENT_SPEED
        quarter = (math.pi / 2) / SEGMENT_SPEED
        return _new_plan(
            intent,
            DriveSegment(0.0, turn, quarter),
            DriveSegment(SEGMENT_SPEED, 0.0, duration),
        )

    if label is IntentLabel.ROTATE:
        angle_rad = math.radians(float(slots.get("angle_deg", 90.0)))
        w = SEGMENT_SPEED if slots["direction"] == "left" else -SEGMENT_SPEED
        return _new_plan(intent, DriveSegment(0.0, w, angle_rad / SEGMENT_SPEED))

    if label is IntentLabel.STOP:
        return _new_plan(intent, DriveSegment(0.0, 0.0, SIM_DT))

    if label is IntentLabel.QUERY_POSE:
        return _new_plan(intent, Reply(render_pose(state.pose)))

    if label is IntentLabel.QUERY_SCENE:
        if scene is None:
            scene = describe_scene(world_map, state.pose)
        return _new_plan(intent, Reply(_scene_sentence(scene), scene.names))

    if label is IntentLabel.FIND_OBJECT:
        target = slots["target"]
        pose = ground_object(target, world_map)
        if pose is None:
            return _new_plan(intent, Reply(f"I don't know {target}."))
        return _new_plan(
            intent,
            Reply(f"The {target} is at x={pose.x:.2f}, y={pose.y:.2f}.",
                  (target,)),
        )

    if label is IntentLabel.CHAT:
        text = slots.get("text", "")
        reply = chat_backend(text) if chat_backend else _CANNED_CHAT
        return _new_plan(intent, Reply(reply))

    return _new_plan(intent, Reply(_REPHRASE))


def _scene_sentence(scene: SceneReport) -> str:
    if not scene.labels:
        return "I don't see anything."
    parts = [
        f"{label.name} ({label.distance_m:.1f} m)" for label in scene.labels
    ]
    if len(parts) == 1:
        return f"I can see {parts[0]}."
    return f"I can see {', '.join(parts[:-1])} and {parts[-1]}."


# ---------------------------------------------------------------------------
# execution

OnState = Callable[[RobotState], None]
OnReply = Callable[[Reply], None]
PreemptCheck = Callable[[], bool]


class Executor:
    """Owns the robot state and steps the world while running plans."""

    def __init__(self, world_map: WorldMap, state: RobotState | None = None,
                 dt: float = SIM_DT, timeout_sim_s: float = PLAN_TIMEOUT_SIM_S,
                 on_state: OnState | None = None,
                 on_reply: OnReply | None = None,
                 clock: Callable[[], float] = time.monotonic):
        self.world_map = world_map
        self.state = state or RobotState(_default_start(world_map))
        self.dt = dt
        self.timeout_sim_s = timeout_sim_s
        self.on_state = on_state
        self.on_reply = on_reply
        self.clock = clock

    # -- internals ---------------------------------------------------------

    def _emit_state(self):
        if self.on_state:
            self.on_state(self.state)

    def _tick(self, v: float, w: float, dt: float | None = None) -> bool:
        """Advance one step; False on collision-freeze."""
        self.state = step(self.state, v, w, dt or self.dt, self.world_map)
        self._emit_state()
        return self.state.status is not RobotStatus.FAILED

    def _drive_segment(self, seg: DriveSegment, budget: float,
                       preempt: PreemptCheck | None) -> tuple[str, float]:
        """Returns (status, sim_time_used): ok | blocked | timeout | preempted."""
        remaining = seg.duration_s
        used = 0.0
        while remaining > 1e-12:
            if preempt and preempt():
                return "preempted", used
            if used >= budget:
                return "timeout", used
            dt = min(self.dt, remaining)
            remaining -= dt
            used += dt
            if not self._tick(seg.v, seg.w, dt):
                return "blocked", used
        return "ok", used

    def _follow_path(self, prim: FollowPath, budget: float,
                     preempt: PreemptCheck | None) -> tuple[str, float]:
        used = 0.0
        for waypoint in prim.waypoints:
            while True:
                pose = self.state.pose
                if pose.distance_to(waypoint) <= WAYPOINT_TOLERANCE_M:
                    break
                if preempt and preempt():
                    return "preempted", used
                if used >= budget:
                    return "timeout", used
                err = pose.bearing_to(waypoint)
                if abs(err) >= HEADING_TOLERANCE_RAD:
                    ok = self._tick(0.0, TURN_W if err > 0 else -TURN_W)
                else:
                    ok = self._tick(CRUISE_V, 0.0)
                used += self.dt
                if not ok:
                    return "blocked", used
        return "ok", used

    # -- public ------------------------------------------------------------

    def execute(self, action_plan: ActionPlan,
                preempt: PreemptCheck | None = None) -> ExecutionOutcome:
        """Run primitives in order; exactly one outcome per plan."""
        initiated: float | None = None
        budget = self.timeout_sim_s
        self.state = replace(self.state, status=RobotStatus.EXECUTING)
        goal: Pose2D | None = None

        def fail(detail: str) -> ExecutionOutcome:
            self.state = replace(self.state, linear_v=0.0, angular_v=0.0,
                                 status=RobotStatus.FAILED)
            self._emit_state()
            return self._outcome(action_plan, PlanResultKind.FAILURE,
                                 initiated, detail)

        for prim in action_plan.primitives:
            if isinstance(prim, Reply):
                if initiated is None:
                    initiated = self.clock()
                if self.on_reply:
                    self.on_reply(prim)
                continue
            if initiated is None:
                initiated = self.clock()
            if isinstance(prim, DriveSegment):
                status, used = self._drive_segment(prim, budget, preempt)
            else:
                goal = prim.waypoints[-1]
                status, used = self._follow_path(prim, budget, preempt)
            budget -= used
            if status == "blocked":
                return fail("blocked")
            if status == "timeout":
                return fail("timeout")
            if status == "preempted":
                self.state = replace(self.state, linear_v=0.0, angular_v=0.0,
                                     status=RobotStatus.IDLE)
                self._emit_state()
                return self._outcome(action_plan, PlanResultKind.PREEMPTED,
                                     initiated, "preempted")

        if goal is not None and self.state.pose.distance_to(goal) > GOAL_TOLERANCE_M:
            return fail("goal tolerance exceeded")
        self.state = replace(self.state, linear_v=0.0, angular_v=0.0,
                             status=RobotStatus.IDLE)
        self._emit_state()
        return self._outcome(action_plan, PlanResultKind.SUCCESS, initiated, "")

    def handle(self, intent: CommandIntent,
               scene: SceneReport | None = None,
               chat_backend: ChatBackend | None = None,
               preempt: PreemptCheck | None = None) -> ExecutionOutcome:
        """plan + execute with the no-path case folded into an outcome, so
        every intent yields exactly one outcome."""
        try:
            action_plan = plan(intent, self.state, self.world_map,
                               scene=scene, chat_backend=chat_backend)
        except NoPathError:
            now = self.clock()
            return ExecutionOutcome(
                plan_id=uuid.uuid4().hex[:12],
                result=PlanResultKind.FAILURE,
                final_pose=self.state.pose,
                action_initiated_time=None,
                completed_time=now,
                detail="unreachable",
            )
        return self.execute(action_plan, preempt=preempt)

    def _outcome(self, action_plan: ActionPlan, result: PlanResultKind,
                 initiated: float | None, detail: str) -> ExecutionOutcome:
        return ExecutionOutcome(
            plan_id=action_plan.plan_id,
            result=result,
            final_pose=self.state.pose,
            action_initiated_time=initiated,
            completed_time=self.clock(),
            detail=detail,
        )


def _default_start(world_map: WorldMap) -> Pose2D:
    start = world_map.find_location("start")
    if start is not None:
        return start
    free = np.argwhere(~world_map.grid)
    row, col = free[len(free) // 2]
    x, y = world_map.center_of(int(row), int(col))
    return Pose2D(x, y, 0.0)
