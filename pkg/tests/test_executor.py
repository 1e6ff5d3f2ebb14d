import math
from itertools import count

import pytest

from robochat.executor import (
    DriveSegment,
    Executor,
    FollowPath,
    GOAL_TOLERANCE_M,
    NoPathError,
    PlanResultKind,
    Reply,
    plan,
    render_pose,
)
from robochat.grounder import describe_scene
from robochat.intents import CommandIntent, IntentLabel, unknown_intent
from robochat.world import (
    Pose2D,
    RobotState,
    RobotStatus,
    V_MAX,
    W_MAX,
    WorldMap,
)


def _intent(label, **slots):
    return CommandIntent(label, slots)


def _state(x=10.0, y=10.0, theta=0.0):
    return RobotState(Pose2D(x, y, theta))


def _fake_clock():
    ticker = count()
    return lambda: float(next(ticker))


# -- plan mapping -----------------------------------------------------------------

def test_plan_navigate_known_location(empty_map):
    intent = _intent(IntentLabel.NAVIGATE_TO, target="start")
    out = plan(intent, _state(2.2, 2.2), empty_map)
    (prim,) = out.primitives
    assert isinstance(prim, FollowPath)
    goal = empty_map.locations["start"]
    last = prim.waypoints[-1]
    assert (last.x, last.y) == (goal.x, goal.y)  # exact goal point, not cell center


def test_plan_navigate_resolves_objects(office_map):
    intent = _intent(IntentLabel.NAVIGATE_TO, target="chair")
    out = plan(intent, RobotState(office_map.locations["office"]), office_map)
    (prim,) = out.primitives
    assert isinstance(prim, FollowPath)


def test_plan_navigate_unknown_name(empty_map):
    intent = _intent(IntentLabel.NAVIGATE_TO, target="atlantis")
    (prim,) = plan(intent, _state(), empty_map).primitives
    assert prim == Reply("I don't know atlantis.")


def test_plan_navigate_unreachable_raises():
    wm = WorldMap.from_dict({
        "grid": ["00100", "00100", "00100"],
        "resolution": 1.0,
        "locations": {"island": [4.5, 1.5, 0.0]},
        "objects": [],
    })
    intent = _intent(IntentLabel.NAVIGATE_TO, target="island")
    with pytest.raises(NoPathError):
        plan(intent, _state(0.5, 1.5), wm)


def test_plan_move_forward_arithmetic(empty_map):
    intent = _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=1.0)
    (seg,) = plan(intent, _state(), empty_map).primitives
    assert seg == DriveSegment(0.5, 0.0, 2.0)


def test_plan_move_backward_negative_velocity(empty_map):
    intent = _intent(IntentLabel.MOVE_REL, direction="backward", distance_m=0.5)
    (seg,) = plan(intent, _state(), empty_map).primitives
    assert seg == DriveSegment(-0.5, 0.0, 1.0)


def test_plan_move_left_turns_then_drives(empty_map):
    intent = _intent(IntentLabel.MOVE_REL, direction="left", distance_m=1.0)
    turn, drive = plan(intent, _state(), empty_map).primitives
    assert turn.v == 0.0 and turn.w == 0.5
    assert turn.duration_s == pytest.approx((math.pi / 2) / 0.5)
    assert drive == DriveSegment(0.5, 0.0, 2.0)


def test_plan_rotate(empty_map):
    intent = _intent(IntentLabel.ROTATE, direction="right", angle_deg=90.0)
    (seg,) = plan(intent, _state(), empty_map).primitives
    assert seg.v == 0.0 and seg.w == -0.5
    assert seg.duration_s == pytest.approx((math.pi / 2) / 0.5)


def test_plan_stop_is_one_zero_velocity_tick(empty_map):
    (seg,) = plan(_intent(IntentLabel.STOP), _state(), empty_map).primitives
    assert seg.v == 0.0 and seg.w == 0.0
    assert seg.duration_s == pytest.approx(0.05)


def test_plan_query_pose_formatting(empty_map):
    state = RobotState(Pose2D(1.25, 3.5, 0.0))
    (reply,) = plan(_intent(IntentLabel.QUERY_POSE), state, empty_map).primitives
    assert reply == Reply("x=1.25, y=3.50, heading=0.00 rad")
    assert render_pose(Pose2D(-1.0, 2.0, math.pi)) == \
        f"x=-1.00, y=2.00, heading={math.pi:.2f} rad"


def test_plan_query_scene_uses_provided_report(office_map):
    pose = office_map.locations["kitchen"]
    scene = describe_scene(office_map, pose)
    (reply,) = plan(_intent(IntentLabel.QUERY_SCENE), RobotState(pose),
                    office_map, scene=scene).primitives
    assert reply.objects == scene.names
    for name in scene.names:
        assert name in reply.text


def test_plan_query_scene_falls_back_to_local_view(empty_map):
    (reply,) = plan(_intent(IntentLabel.QUERY_SCENE), _state(),
                    empty_map).primitives
    assert reply == Reply("I don't see anything.")


def test_plan_find_object(office_map):
    intent = _intent(IntentLabel.FIND_OBJECT, target="mug")
    (reply,) = plan(intent, _state(), office_map).primitives
    mug = office_map.find_object("mug").pose
    assert reply.text == f"The mug is at x={mug.x:.2f}, y={mug.y:.2f}."
    assert reply.objects == ("mug",)


def test_plan_find_object_unknown(office_map):
    intent = _intent(IntentLabel.FIND_OBJECT, target="unicorn")
    (reply,) = plan(intent, _state(), office_map).primitives
    assert reply == Reply("I don't know unicorn.")
    assert reply.objects == ()


def test_plan_chat_backends(empty_map):
    intent = _intent(IntentLabel.CHAT, text="hello")
    (canned,) = plan(intent, _state(), empty_map).primitives
    assert canned.text  # canned fallback says something
    (custom,) = plan(intent, _state(), empty_map,
                     chat_backend=lambda text: f"echo: {text}").primitives
    assert custom.text == "echo: hello"


def test_plan_unknown_asks_to_rephrase(empty_map):
    (reply,) = plan(unknown_intent("gibberish"), _state(), empty_map).primitives
    assert "rephrase" in reply.text.lower()


def test_alignment_motion_labels_move_query_labels_reply(office_map):
    """Motion intents plan motion primitives; query intents plan replies."""
    state = RobotState(office_map.locations["start"])
    motion = [
        _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=0.5),
        _intent(IntentLabel.ROTATE, direction="left", angle_deg=90.0),
        _intent(IntentLabel.NAVIGATE_TO, target="kitchen"),
        _intent(IntentLabel.STOP),
    ]
    talk = [
        _intent(IntentLabel.QUERY_POSE),
        _intent(IntentLabel.QUERY_SCENE),
        _intent(IntentLabel.FIND_OBJECT, target="mug"),
        _intent(IntentLabel.CHAT, text="hi"),
        unknown_intent(),
    ]
    for intent in motion:
        prims = plan(intent, state, office_map).primitives
        assert all(isinstance(p, (DriveSegment, FollowPath)) for p in prims), intent
    for intent in talk:
        prims = plan(intent, state, office_map).primitives
        assert all(isinstance(p, Reply) for p in prims), intent


# -- execution ----------------------------------------------------------------------

def test_reply_only_plan_succeeds_without_motion(empty_map):
    replies = []
    ex = Executor(empty_map, _state(), on_reply=replies.append,
                  clock=_fake_clock())
    outcome = ex.handle(_intent(IntentLabel.QUERY_POSE))
    assert outcome.result is PlanResultKind.SUCCESS
    assert outcome.action_initiated_time is not None
    assert outcome.completed_time >= outcome.action_initiated_time
    assert replies and replies[0].text.startswith("x=")
    assert ex.state.pose == Pose2D(10.0, 10.0, 0.0)
    assert ex.state.status is RobotStatus.IDLE


def test_move_forward_executes_exact_distance(empty_map):
    ex = Executor(empty_map, _state())
    outcome = ex.handle(
        _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=1.0))
    assert outcome.result is PlanResultKind.SUCCESS
    assert ex.state.pose.x == pytest.approx(11.0)
    assert ex.state.pose.y == pytest.approx(10.0)
    assert ex.state.linear_v == 0.0 and ex.state.angular_v == 0.0


def test_rotate_executes_exact_angle(empty_map):
    ex = Executor(empty_map, _state())
    outcome = ex.handle(
        _intent(IntentLabel.ROTATE, direction="left", angle_deg=90.0))
    assert outcome.result is PlanResultKind.SUCCESS
    assert ex.state.pose.theta == pytest.approx(math.pi / 2)


def test_navigation_reaches_goal_within_tolerance(office_map):
    ex = Executor(office_map, RobotState(office_map.locations["start"]))
    outcome = ex.handle(_intent(IntentLabel.NAVIGATE_TO, target="kitchen"))
    assert outcome.result is PlanResultKind.SUCCESS, outcome.detail
    goal = office_map.locations["kitchen"]
    assert ex.state.pose.distance_to(goal) <= GOAL_TOLERANCE_M
    assert ex.state.status is RobotStatus.IDLE


def test_velocities_never_exceed_limits_during_navigation(office_map):
    seen = []
    ex = Executor(office_map, RobotState(office_map.locations["start"]),
                  on_state=seen.append)
    ex.handle(_intent(IntentLabel.NAVIGATE_TO, target="dock"))
    assert seen
    assert all(abs(s.linear_v) <= V_MAX + 1e-9 for s in seen)
    assert all(abs(s.angular_v) <= W_MAX + 1e-9 for s in seen)


def test_blocked_motion_fails(empty_map):
    # start near the east wall, drive straight into it
    ex = Executor(empty_map, _state(19.6, 10.0, 0.0))
    outcome = ex.handle(
        _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=3.0))
    assert outcome.result is PlanResultKind.FAILURE
    assert outcome.detail == "blocked"
    assert ex.state.status is RobotStatus.FAILED


def test_timeout_fails(empty_map):
    ex = Executor(empty_map, _state(), timeout_sim_s=0.5)
    outcome = ex.handle(
        _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=5.0))
    assert outcome.result is PlanResultKind.FAILURE
    assert outcome.detail == "timeout"


def test_unreachable_target_is_a_failure_outcome():
    wm = WorldMap.from_dict({
        "grid": ["00100", "00100", "00100"],
        "resolution": 1.0,
        "locations": {"island": [4.5, 1.5, 0.0]},
        "objects": [],
    })
    ex = Executor(wm, RobotState(Pose2D(0.5, 1.5, 0.0)), clock=_fake_clock())
    outcome = ex.handle(_intent(IntentLabel.NAVIGATE_TO, target="island"))
    assert outcome.result is PlanResultKind.FAILURE
    assert outcome.detail == "unreachable"
    assert outcome.action_initiated_time is None  # nothing was ever actuated
    assert outcome.final_pose == Pose2D(0.5, 1.5, 0.0)


def test_preemption_stops_cleanly(office_map):
    ticks = count()
    ex = Executor(office_map, RobotState(office_map.locations["start"]))
    outcome = ex.handle(_intent(IntentLabel.NAVIGATE_TO, target="kitchen"),
                        preempt=lambda: next(ticks) >= 20)
    assert outcome.result is PlanResultKind.PREEMPTED
    assert ex.state.linear_v == 0.0 and ex.state.angular_v == 0.0
    assert ex.state.status is RobotStatus.IDLE
    # preemption interrupted the route well short of the goal
    assert ex.state.pose.distance_to(office_map.locations["kitchen"]) > 1.0


def test_every_intent_yields_exactly_one_outcome(office_map):
    ex = Executor(office_map, RobotState(office_map.locations["start"]))
    intents = [
        _intent(IntentLabel.QUERY_POSE),
        _intent(IntentLabel.MOVE_REL, direction="forward", distance_m=0.5),
        _intent(IntentLabel.CHAT, text="hi"),
        _intent(IntentLabel.NAVIGATE_TO, target="nowhere"),
        unknown_intent(),
        _intent(IntentLabel.STOP),
    ]
    outcomes = [ex.handle(i) for i in intents]
    assert len(outcomes) == len(intents)
    assert all(o.plan_id for o in outcomes)
    assert len({o.plan_id for o in outcomes}) == len(outcomes)


def test_outcome_timestamps_are_ordered(empty_map):
    ex = Executor(empty_map, _state(), clock=_fake_clock())
    outcome = ex.handle(
        _intent(IntentLabel.ROTATE, direction="left", angle_deg=45.0))
    assert outcome.action_initiated_time is not None
    assert outcome.completed_time >= outcome.action_initiated_time
