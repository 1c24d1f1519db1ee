"""The shipped task templates: five one-ball and five two-ball families.

Every builder returns (world, goal, authored solution); the solution is a
closed-form function of the sampled parameters and is required to be a
*stable* solution of the generated task (checked by the build tooling and
again by the test suite).

Scene conventions: a black floor bar spans the bottom unless a template
says otherwise; goal subjects are green dynamic balls; goal objects are
purple when static and blue when dynamic. Rolling templates put the
subject on an inclined runway so it keeps regaining speed, and pits are
sized from the authored plug radius so the plug sits flush by
construction.
"""

from __future__ import annotations

import math

from . import world
from .geometry import Box, Circle
from .simulation import Action, MIN_ACTION_RADIUS
from .tasks import InstanceRejected, TaskTemplate, register_archetype
from .world import BodyKind, Goal, Role, WorldState, body_from_vocabulary

SIZE = world.WORLD_SIZE
R_MAX = world.BALL_RADIUS_MAX
FLOOR_TOP = 6.0


def _unit(x: float, y: float, r: float) -> tuple[float, float, float]:
    if not (MIN_ACTION_RADIUS <= r <= R_MAX):
        raise InstanceRejected(f"authored ball radius {r} out of range")
    u = (x / SIZE, y / SIZE, r / R_MAX)
    if not all(0.0 <= v <= 1.0 for v in u):
        raise InstanceRejected(f"authored ball {x, y, r} outside the world")
    return u


class _Scene:
    """Incremental scene builder with auto ids."""

    def __init__(self):
        self.w = WorldState()

    def bar(self, x, y_center, half_len, *, angle=0.0, role=Role.CONFOUNDING,
            thickness=3.0, dynamic=False):
        b = world.make_body(self.w.next_id(), Box(half_len, thickness),
                            (x, y_center, angle), dynamic=dynamic, role=role,
                            kind=BodyKind.BAR)
        self.w.add(b)
        return b

    def floor(self, role=Role.CONFOUNDING):
        return self.bar(SIZE / 2, FLOOR_TOP - 3.0, SIZE / 2, role=role)

    def ball(self, r, x, y_center, *, role, dynamic=True):
        b = world.make_body(self.w.next_id(), Circle(r), (x, y_center, 0.0),
                            dynamic=dynamic, role=role, kind=BodyKind.BALL)
        self.w.add(b)
        return b

    def stick(self, x, y_bottom, half_h, *, role=Role.CONFOUNDING,
              dynamic=False, half_w=3.0):
        b = world.make_body(self.w.next_id(), Box(half_w, half_h),
                            (x, y_bottom + half_h, 0.0), dynamic=dynamic,
                            role=role, kind=BodyKind.STANDING_STICK)
        self.w.add(b)
        return b

    def jar(self, scale, x, y_bottom, *, role=Role.CONFOUNDING, dynamic=True):
        width = scale * world.JAR_WIDTH_MAX
        b = body_from_vocabulary(self.w.next_id(), BodyKind.JAR, scale,
                                 (x, y_bottom + width / 2.0),
                                 dynamic=dynamic, role=role)
        self.w.add(b)
        return b


# --------- inclined runway scaffold (rolling templates) ---------

def _line_fn(start_y: float, theta: float):
    t = math.tan(theta)

    def line_y(x):
        return start_y - t * (x - 4.0)

    return line_y


def _runway(s: _Scene, start_y: float, theta: float, gaps,
            target_role=Role.GOAL_OBJECT):
    """Bars along a line descending to the right, with gaps cut out; the
    last segment is the goal target. gaps: ascending [(x_left, width)]."""
    c = math.cos(theta)
    line_y = _line_fn(start_y, theta)
    xs = [4.0]
    for gx, gw in gaps:
        xs.append(gx)
        xs.append(gx + gw)
    xs.append(SIZE - 4.0)
    target = None
    n_seg = len(xs) // 2
    for i in range(n_seg):
        xa, xb = xs[2 * i], xs[2 * i + 1]
        if xb - xa < 18.0:
            raise InstanceRejected("runway segment too short")
        cx = (xa + xb) / 2.0
        role = target_role if i == n_seg - 1 else Role.CONFOUNDING
        bar = s.bar(cx, line_y(cx) - 3.0, (xb - xa) / 2.0 / c, angle=-theta,
                    role=role)
        if i == n_seg - 1:
            target = bar
    return target


def _pit_walls(s: _Scene, line_y, gap_x: float, gap_w: float, pit_top: float):
    """Solid side walls under the gap edges, so a plug ball cannot be
    shoved sideways into the open space beneath the runway."""
    for wx in (gap_x - 3.0, gap_x + gap_w + 3.0):
        top = line_y(wx) - 4.0
        half_h = (top - pit_top) / 2.0
        if half_h > 1.0:
            s.stick(wx, pit_top, half_h)


def _plugged_gap(s: _Scene, line_y, gap_x: float, rp: float, slack: float,
                 subject_r: float):
    """Cut-out gap sized for a plug ball of radius rp whose top will sit
    nearly flush with the runway; returns (gap tuple, plug action coords).

    The pit depth is derived from the plug radius, so the authored plug is
    flush by construction; random plugs get a few units of tolerance
    because the subject arrives fast on the incline.
    """
    gap_w = 2.0 * rp + slack
    if gap_w < 2.0 * subject_r + 5.0:
        raise InstanceRejected("subject would not fall into the open gap")
    depth = 2.0 * rp - 0.4
    center = gap_x + gap_w / 2.0
    pit_top = line_y(center) - depth
    if pit_top - 6.0 < FLOOR_TOP + 2.0:
        raise InstanceRejected("pit floor would sink into the ground floor")
    s.bar(center, pit_top - 3.0, gap_w / 2.0 + 8.0)
    _pit_walls(s, line_y, gap_x, gap_w, pit_top)
    return (gap_x, gap_w), _unit(center, pit_top + rp + 3.0, rp)


def _runway_subject(s: _Scene, line_y, r: float, x: float):
    return s.ball(r, x, line_y(x) + r + 0.8, role=Role.GOAL_SUBJECT)


# --------- tier B ---------

@register_archetype("knock_off_ledge")
def build_knock_off_ledge(p, rng):
    """Green ball perched on a ledge; the whole floor is the purple target.

    Anything that dislodges the ball solves the task.
    """
    s = _Scene()
    floor = s.floor(role=Role.GOAL_OBJECT)
    half = p["ledge_half"]
    cx = min(max(p["ledge_x"], half + 4.0), SIZE - half - 4.0)
    ledge_top = p["ledge_y"]
    s.bar(cx, ledge_top - 3.0, half)
    r = p["subject_r"]
    sx = cx + p["subject_offset"] * (half - r - 4.0)
    subject = s.ball(r, sx, ledge_top + r, role=Role.GOAL_SUBJECT)
    goal = Goal(subject_id=subject.id, object_id=floor.id)
    # drop on the flank closer to the nearest ledge edge
    direction = 1.0 if p["subject_offset"] >= 0 else -1.0
    rs = 8.0
    hit_x = sx + direction * (r + rs) * 0.7
    hit_y = min(ledge_top + 2 * r + rs + p["drop_height"], SIZE - rs - 2.0)
    return s.w, goal, Action("B", _unit(hit_x, hit_y, rs))


@register_archetype("plug_the_gap")
def build_plug_the_gap(p, rng):
    """Green ball rolls down an inclined runway toward a gap; plugged, it
    crosses onto the purple end segment; unplugged, it drops into the pit."""
    s = _Scene()
    s.floor()
    line_y = _line_fn(p["start_y"], p["theta"])
    gap, plug_coords = _plugged_gap(s, line_y, p["gap_x"], p["plug_r"],
                                    p["gap_slack"], p["subject_r"])
    target = _runway(s, p["start_y"], p["theta"], [gap])
    subject = _runway_subject(s, line_y, p["subject_r"], p["start_x"])
    goal = Goal(subject_id=subject.id, object_id=target.id)
    return s.w, goal, Action("B", plug_coords)


@register_archetype("topple_the_carrier")
def build_topple_the_carrier(p, rng):
    """Green ball balanced on a standing stick over a purple floor; topple
    the stick (or strike the ball) and the ball lands on the floor."""
    s = _Scene()
    floor = s.floor(role=Role.GOAL_OBJECT)
    half_h = p["stick_half_h"]
    x = p["stick_x"]
    s.stick(x, FLOOR_TOP, half_h, dynamic=True)
    r = p["subject_r"]
    subject = s.ball(r, x, FLOOR_TOP + 2 * half_h + r, role=Role.GOAL_SUBJECT)
    goal = Goal(subject_id=subject.id, object_id=floor.id)
    # strike the ball's flank toward the open side so it lands clear of the
    # toppled stick instead of on top of it
    direction = 1.0 if x <= SIZE / 2.0 else -1.0
    rs = 9.0
    hit_x = x + direction * (r + rs) * 0.8
    hit_y = min(FLOOR_TOP + 2 * half_h + 2 * r + rs + p["drop_height"] + 20.0,
                SIZE - rs - 2.0)
    return s.w, goal, Action("B", _unit(hit_x, hit_y, rs))


@register_archetype("knock_into_jar")
def build_knock_into_jar(p, rng):
    """Green ball on a ledge beside a jar; make them touch (usually by
    knocking the ball off the ledge into or onto the jar)."""
    s = _Scene()
    s.floor()
    jar_scale = p["jar_scale"]
    jar_w = jar_scale * world.JAR_WIDTH_MAX
    ledge_half = p["ledge_half"]
    ledge_top = p["ledge_y"]
    side = 1.0 if p["mirror"] >= 0.5 else -1.0
    if side > 0:
        ledge_cx = p["edge_margin"] + ledge_half
        jar_x = ledge_cx + ledge_half + p["jar_offset"] + jar_w / 2.0
    else:
        ledge_cx = SIZE - p["edge_margin"] - ledge_half
        jar_x = ledge_cx - ledge_half - p["jar_offset"] - jar_w / 2.0
    if not jar_w / 2.0 + 4.0 <= jar_x <= SIZE - jar_w / 2.0 - 4.0:
        raise InstanceRejected("jar does not fit")
    s.bar(ledge_cx, ledge_top - 3.0, ledge_half)
    jar = s.jar(jar_scale, jar_x, FLOOR_TOP, role=Role.GOAL_OBJECT)
    r = p["subject_r"]
    sx = ledge_cx + side * (ledge_half - r - 3.0)
    subject = s.ball(r, sx, ledge_top + r, role=Role.GOAL_SUBJECT)
    goal = Goal(subject_id=subject.id, object_id=jar.id)
    # gentle, nearly-vertical nudge on the inland flank: the ball only has
    # to slip off the edge and fall onto the jar right beside the ledge
    rs = 6.0
    hit_x = sx - side * (r + rs) * 0.4
    hit_y = min(ledge_top + 2 * r + rs + 12.0, SIZE - rs - 2.0)
    return s.w, goal, Action("B", _unit(hit_x, hit_y, rs))


@register_archetype("push_to_the_post")
def build_push_to_the_post(p, rng):
    """Green ball on the floor; roll it against the purple post and hold."""
    s = _Scene()
    s.floor()
    side = 1.0 if p["mirror"] >= 0.5 else -1.0
    post_half_h = p["post_half_h"]
    if side > 0:
        post_x = p["post_margin"]
    else:
        post_x = SIZE - p["post_margin"]
    post = s.stick(post_x, FLOOR_TOP, post_half_h, role=Role.GOAL_OBJECT)
    r = p["subject_r"]
    sx = post_x + side * p["distance"]
    if not r + 4.0 <= sx <= SIZE - r - 4.0:
        raise InstanceRejected("subject does not fit")
    subject = s.ball(r, sx, FLOOR_TOP + r, role=Role.GOAL_SUBJECT)
    goal = Goal(subject_id=subject.id, object_id=post.id)
    rs = p["pusher_r"]
    hit_x = sx + side * (r + rs) * 0.72
    hit_y = min(FLOOR_TOP + 2 * r + rs + p["drop_height"], SIZE - rs - 2.0)
    if not rs + 2.0 <= hit_x <= SIZE - rs - 2.0:
        raise InstanceRejected("pusher does not fit")
    return s.w, goal, Action("B", _unit(hit_x, hit_y, rs))


# --------- tier 2B ---------

def _funnel(s: _Scene, bottom_y: float, angle: float) -> float:
    """Two tilted bars guiding everything to the scene center.

    Returns the y of the funnel mouth (top edge at the walls).
    """
    c, t = math.cos(angle), math.tan(angle)
    span = SIZE / 2.0 - 4.0
    half = span / c / 2.0 + 2.0  # slight overlap closes the center seam
    cy = bottom_y + (span / 2.0) * t
    s.bar(4.0 + span / 2.0, cy, half, angle=-angle)
    s.bar(SIZE - 4.0 - span / 2.0, cy, half, angle=angle)
    return bottom_y + span * t + 3.0 / c


def _funnel_stage(s: _Scene, p, carrier_dynamic: bool):
    """Funnel plus a ball-on-carrier at each side; returns everything the
    two funnel archetypes need to author their drops."""
    angle = p["funnel_angle"]
    mouth_y = _funnel(s, 12.0, angle)
    half_h = p["carrier_half_h"]
    r_g = p["subject_r"]
    r_b = p["object_r"]
    lx = p["left_x"]
    rx = SIZE - p["right_x"]
    plat_y = mouth_y + p["plat_clearance"]
    # the freed balls roll inward on the arms, under their own platform;
    # make sure the biggest ball fits through with margin
    inner_clear = p["plat_clearance"] - 3.0 + (min(lx, SIZE - rx) + 11.0) * math.tan(angle)
    if inner_clear < 2.0 * max(r_g, r_b) + 4.0:
        raise InstanceRejected("platform sits too low over the funnel arm")
    s.bar(lx, plat_y - 3.0, 15.0)
    s.bar(rx, plat_y - 3.0, 15.0)
    s.stick(lx, plat_y, half_h, dynamic=carrier_dynamic)
    s.stick(rx, plat_y, half_h, dynamic=carrier_dynamic)
    subject = s.ball(r_g, lx, plat_y + 2 * half_h + r_g, role=Role.GOAL_SUBJECT)
    object_ = s.ball(r_b, rx, plat_y + 2 * half_h + r_b, role=Role.GOAL_OBJECT)
    top_g = plat_y + 2 * half_h + 2 * r_g
    top_b = plat_y + 2 * half_h + 2 * r_b
    return subject, object_, (lx, top_g), (rx, top_b)


def _funnel_drops(p, lx, top_g, rx, top_b):
    """Strike both carriers' outer flanks so the balls fall inward."""
    rs = 7.0
    r_g = p["subject_r"]
    r_b = p["object_r"]
    y1 = min(top_g + rs + p["drop_height"], SIZE - rs - 2.0)
    y2 = min(top_b + rs + p["drop_height"], SIZE - rs - 2.0)
    return (*_unit(lx - (r_g + rs) * 0.6, y1, rs),
            *_unit(rx + (r_b + rs) * 0.6, y2, rs))


@register_archetype("meet_in_the_middle")
def build_meet_in_the_middle(p, rng):
    """Green and blue balls on pedestals above a funnel; knock both off and
    the funnel brings them together."""
    s = _Scene()
    subject, object_, (lx, top_g), (rx, top_b) = _funnel_stage(s, p, carrier_dynamic=False)
    goal = Goal(subject_id=subject.id, object_id=object_.id)
    return s.w, goal, Action("2B", _funnel_drops(p, lx, top_g, rx, top_b))


@register_archetype("double_plug")
def build_double_plug(p, rng):
    """A rolling green ball must cross two gaps; each needs its own plug."""
    s = _Scene()
    s.floor()
    line_y = _line_fn(p["start_y"], p["theta"])
    rp = p["plug_r"]
    g1, plug1 = _plugged_gap(s, line_y, p["gap1_x"], rp, p["gap_slack"],
                             p["subject_r"])
    g2, plug2 = _plugged_gap(s, line_y, p["gap2_x"], rp, p["gap_slack"],
                             p["subject_r"])
    if p["gap2_x"] < p["gap1_x"] + g1[1] + 30.0:
        raise InstanceRejected("gaps too close")
    target = _runway(s, p["start_y"], p["theta"], [g1, g2])
    subject = _runway_subject(s, line_y, p["subject_r"], p["start_x"])
    goal = Goal(subject_id=subject.id, object_id=target.id)
    return s.w, goal, Action("2B", (*plug1, *plug2))


@register_archetype("double_topple")
def build_double_topple(p, rng):
    """Both balls ride toppleable standing sticks above a funnel."""
    s = _Scene()
    subject, object_, (lx, top_g), (rx, top_b) = _funnel_stage(s, p, carrier_dynamic=True)
    goal = Goal(subject_id=subject.id, object_id=object_.id)
    return s.w, goal, Action("2B", _funnel_drops(p, lx, top_g, rx, top_b))


@register_archetype("knock_and_plug")
def build_knock_and_plug(p, rng):
    """Knock the green ball off its ledge AND plug the gap in its runway;
    either alone fails."""
    s = _Scene()
    s.floor()
    line_y = _line_fn(p["start_y"], p["theta"])
    gap, plug_coords = _plugged_gap(s, line_y, p["gap_x"], p["plug_r"],
                                    p["gap_slack"], p["subject_r"])
    target = _runway(s, p["start_y"], p["theta"], [gap])
    # ledge above the runway's left stretch, holding the subject
    ledge_half = p["ledge_half"]
    ledge_cx = p["edge_margin"] + ledge_half
    ledge_top = p["ledge_y"]
    if ledge_top - 6.0 < line_y(ledge_cx + ledge_half) + 24.0:
        raise InstanceRejected("ledge must sit clearly above the runway")
    if ledge_cx + ledge_half > p["gap_x"] - 24.0:
        raise InstanceRejected("ledge overhangs the gap")
    s.bar(ledge_cx, ledge_top - 3.0, ledge_half)
    r = p["subject_r"]
    sx = ledge_cx + (ledge_half - r - 3.0)
    subject = s.ball(r, sx, ledge_top + r, role=Role.GOAL_SUBJECT)
    goal = Goal(subject_id=subject.id, object_id=target.id)
    rs = 8.0
    hit_y = min(ledge_top + 2 * r + rs + p["drop_height"], SIZE - rs - 2.0)
    coords = (*_unit(sx - (r + rs) * 0.72, hit_y, rs), *plug_coords)
    return s.w, goal, Action("2B", coords)


@register_archetype("meet_in_the_pit")
def build_meet_in_the_pit(p, rng):
    """Green and blue balls on twin platforms flanking a shared pit; roll
    each toward the center and both drop in and rest together."""
    s = _Scene()
    s.floor()
    r_g = p["subject_r"]
    r_b = p["object_r"]
    plat_top = p["plat_y"]
    pit_w = 2.0 * (r_g + r_b) + p["pit_slack"]
    pit_x = SIZE / 2.0 + p["pit_shift"] - pit_w / 2.0
    depth = plat_top - FLOOR_TOP  # the ground floor is the pit floor
    if depth < max(r_g, r_b) + 6.0:
        raise InstanceRejected("pit too shallow to hold the balls")
    left_half = (pit_x - 4.0) / 2.0
    right_half = (SIZE - 4.0 - pit_x - pit_w) / 2.0
    s.bar(4.0 + left_half, plat_top - 3.0, left_half)
    s.bar(pit_x + pit_w + right_half, plat_top - 3.0, right_half)
    # solid pit walls so nothing squeezes under the platform edges
    for wx in (pit_x - 3.0, pit_x + pit_w + 3.0):
        s.stick(wx, FLOOR_TOP, (plat_top - 4.0 - FLOOR_TOP) / 2.0)
    sx = pit_x - p["left_dist"]
    ox = pit_x + pit_w + p["right_dist"]
    if sx - r_g < 6.0 or ox + r_b > SIZE - 6.0:
        raise InstanceRejected("balls do not fit on the platforms")
    subject = s.ball(r_g, sx, plat_top + r_g, role=Role.GOAL_SUBJECT)
    object_ = s.ball(r_b, ox, plat_top + r_b, role=Role.GOAL_OBJECT)
    goal = Goal(subject_id=subject.id, object_id=object_.id)
    rs = p["pusher_r"]
    y1 = min(plat_top + 2 * r_g + rs + p["drop_height"], SIZE - rs - 2.0)
    y2 = min(plat_top + 2 * r_b + rs + p["drop_height"], SIZE - rs - 2.0)
    h1 = sx - (r_g + rs) * 0.72
    h2 = ox + (r_b + rs) * 0.72
    if h1 - rs < 2.0 or h2 + rs > SIZE - 2.0:
        raise InstanceRejected("pusher drop would leave the world")
    coords = (*_unit(h1, y1, rs), *_unit(h2, y2, rs))
    return s.w, goal, Action("2B", coords)


# --------- the shipped set ---------

def builtin_templates(count: int = 20) -> list[TaskTemplate]:
    return [
        TaskTemplate(id="b01", tier="B", archetype="knock_off_ledge", count=count, time_limit=10.0,
                     generator_params={
                         "ledge_y": (110.0, 170.0), "ledge_half": (36.0, 56.0),
                         "ledge_x": (60.0, 196.0), "subject_r": (6.0, 10.0),
                         "subject_offset": (-0.6, 0.6), "drop_height": (24.0, 60.0),
                     }),
        TaskTemplate(id="b02", tier="B", archetype="plug_the_gap", count=count, time_limit=12.0,
                     generator_params={
                         "theta": (0.07, 0.11), "start_y": (70.0, 105.0),
                         "gap_x": (110.0, 168.0), "plug_r": (8.0, 11.5),
                         "gap_slack": (2.0, 4.0), "subject_r": (5.0, 7.0),
                         "start_x": (14.0, 40.0),
                     }),
        TaskTemplate(id="b03", tier="B", archetype="topple_the_carrier", count=count, time_limit=10.0,
                     generator_params={
                         "stick_half_h": (28.0, 52.0), "stick_x": (52.0, 204.0),
                         "subject_r": (6.0, 10.0), "drop_height": (20.0, 50.0),
                     }),
        TaskTemplate(id="b04", tier="B", archetype="knock_into_jar", count=count, time_limit=10.0,
                     generator_params={
                         "jar_scale": (0.55, 0.85), "ledge_half": (30.0, 44.0),
                         "ledge_y": (100.0, 150.0), "edge_margin": (6.0, 30.0),
                         "jar_offset": (2.0, 14.0), "subject_r": (5.5, 8.5),
                         "mirror": (0.0, 1.0), "drop_height": (24.0, 56.0),
                     }),
        TaskTemplate(id="b05", tier="B", archetype="push_to_the_post", count=count, time_limit=10.0,
                     generator_params={
                         "post_half_h": (14.0, 26.0), "post_margin": (10.0, 26.0),
                         "distance": (46.0, 110.0), "subject_r": (6.0, 10.0),
                         "pusher_r": (8.0, 12.0), "mirror": (0.0, 1.0),
                         "drop_height": (24.0, 64.0),
                     }),
        TaskTemplate(id="t01", tier="2B", archetype="meet_in_the_middle", count=count, time_limit=10.0,
                     generator_params={
                         "funnel_angle": (0.14, 0.22), "subject_r": (6.0, 9.0),
                         "object_r": (6.0, 9.0), "carrier_half_h": (22.0, 40.0),
                         "left_x": (30.0, 58.0), "right_x": (30.0, 58.0),
                         "plat_clearance": (10.0, 20.0), "drop_height": (20.0, 44.0),
                     }),
        TaskTemplate(id="t02", tier="2B", archetype="double_plug", count=count, time_limit=12.0,
                     generator_params={
                         "theta": (0.10, 0.14), "start_y": (100.0, 130.0),
                         "gap1_x": (80.0, 104.0), "gap2_x": (165.0, 192.0),
                         "plug_r": (7.5, 10.0), "gap_slack": (2.0, 3.5),
                         "subject_r": (5.0, 6.5), "start_x": (12.0, 28.0),
                     }),
        TaskTemplate(id="t03", tier="2B", archetype="double_topple", count=count, time_limit=10.0,
                     generator_params={
                         "funnel_angle": (0.14, 0.20), "subject_r": (6.0, 9.0),
                         "object_r": (6.0, 9.0), "carrier_half_h": (20.0, 34.0),
                         "left_x": (30.0, 58.0), "right_x": (30.0, 58.0),
                         "plat_clearance": (10.0, 20.0), "drop_height": (18.0, 40.0),
                     }),
        TaskTemplate(id="t04", tier="2B", archetype="knock_and_plug", count=count, time_limit=12.0,
                     generator_params={
                         "theta": (0.07, 0.10), "start_y": (52.0, 72.0),
                         "gap_x": (120.0, 168.0), "plug_r": (8.0, 11.0),
                         "gap_slack": (2.0, 4.0), "subject_r": (5.5, 7.5),
                         "ledge_y": (120.0, 168.0), "ledge_half": (26.0, 40.0),
                         "edge_margin": (6.0, 22.0), "drop_height": (22.0, 46.0),
                     }),
        TaskTemplate(id="t05", tier="2B", archetype="meet_in_the_pit", count=count, time_limit=10.0,
                     generator_params={
                         "plat_y": (26.0, 40.0), "pit_shift": (-30.0, 30.0),
                         "pit_slack": (-2.0, 0.5), "subject_r": (6.0, 9.0),
                         "object_r": (6.0, 9.0), "left_dist": (30.0, 90.0),
                         "right_dist": (30.0, 90.0), "pusher_r": (8.0, 11.0),
                         "drop_height": (24.0, 60.0),
                     }),
    ]


import functools


@functools.lru_cache(maxsize=8)
def _builtin_tasks_cached(count: int, tier: str | None):
    from .tasks import instantiate_all

    out = []
    for t in builtin_templates(count):
        if tier and t.tier != tier:
            continue
        out.extend(instantiate_all(t))
    return tuple(out)


def builtin_tasks(count: int = 20, tier: str | None = None):
    """Instantiate the shipped templates (cached; tasks are treated as
    immutable by every consumer)."""
    return list(_builtin_tasks_cached(count, tier))
