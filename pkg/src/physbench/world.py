"""Scene model: bodies, roles, the body vocabulary, and scene JSON.

Coordinates are world units in [0, 256] x [0, 256] with y pointing up; the
rasterizer maps one world unit to one pixel. A body's pose is its center
of mass (compound shapes are re-centered at construction), so the physics
engine can integrate rotation about the pose point directly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

from . import geometry
from .geometry import Box, Circle, Compound, CompoundPart, Shape

WORLD_SIZE = 256.0
UNIT_DENSITY = 1.0
# Largest placeable ball radius; vocabulary scales map linearly onto it.
BALL_RADIUS_MAX = 32.0
BAR_HALF_LENGTH_MAX = 128.0
BAR_HALF_THICKNESS = 3.0
STICK_HALF_HEIGHT_MAX = 64.0
STICK_HALF_THICKNESS = 3.0
JAR_WIDTH_MAX = 64.0
JAR_WALL_FRACTION = 0.15


class OutOfBounds(ValueError):
    """Body extent crosses the world boundary."""


class BadScale(ValueError):
    """Vocabulary scale outside (0, 1]."""


class Role(str, enum.Enum):
    GOAL_SUBJECT = "goal_subject"
    GOAL_OBJECT = "goal_object"
    CONFOUNDING = "confounding"
    USER_PLACED = "user_placed"


class BodyKind(str, enum.Enum):
    BALL = "ball"
    BAR = "bar"
    STANDING_STICK = "standing_stick"
    JAR = "jar"


@dataclass(frozen=True)
class Body:
    id: int
    shape: Shape
    pose: tuple[float, float, float]          # x, y, angle; point = center of mass
    velocity: tuple[float, float, float]      # vx, vy, omega
    dynamic: bool
    mass: float
    inertia: float                            # about the COM, derived from shape
    role: Role
    kind: BodyKind | None = None              # set when built from the vocabulary
    scale: float | None = None

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError(f"body {self.id}: mass must be positive")
        if not all(math.isfinite(v) for v in self.pose):
            raise ValueError(f"body {self.id}: pose must be finite")
        if not self.dynamic and any(v != 0.0 for v in self.velocity):
            raise ValueError(f"body {self.id}: static bodies must have zero velocity")

    def aabb(self) -> tuple[float, float, float, float]:
        return geometry.shape_aabb(self.shape, self.pose)


def make_body(body_id: int, shape: Shape, pose, *, dynamic: bool, role: Role,
              velocity=(0.0, 0.0, 0.0), kind: BodyKind | None = None,
              scale: float | None = None, check_bounds: bool = True) -> Body:
    """Build a body with mass properties derived from its shape.

    Compound shapes are re-centered so the pose point is the COM; the pose
    is shifted to keep the occupied region where the caller put it.
    """
    x, y, angle = pose
    if isinstance(shape, Compound):
        _, (cx, cy), _ = geometry.mass_properties(shape)
        if cx != 0.0 or cy != 0.0:
            shape = geometry.recentered(shape)
            c, s = math.cos(angle), math.sin(angle)
            x += c * cx - s * cy
            y += s * cx + c * cy
    area, _, unit_inertia = geometry.mass_properties(shape)
    body = Body(
        id=body_id, shape=shape, pose=(x, y, angle), velocity=tuple(velocity),
        dynamic=dynamic, mass=area * UNIT_DENSITY, inertia=unit_inertia * UNIT_DENSITY,
        role=role, kind=kind, scale=scale,
    )
    if check_bounds:
        lo_x, lo_y, hi_x, hi_y = body.aabb()
        if lo_x < 0.0 or lo_y < 0.0 or hi_x > WORLD_SIZE or hi_y > WORLD_SIZE:
            raise OutOfBounds(
                f"body {body_id} extent [{lo_x:.2f},{lo_y:.2f},{hi_x:.2f},{hi_y:.2f}] "
                f"leaves the {WORLD_SIZE:g}-unit world")
    return body


def vocabulary_shape(kind: BodyKind, scale: float) -> Shape:
    if not (0.0 < scale <= 1.0):
        raise BadScale(f"scale must be in (0, 1], got {scale}")
    if kind == BodyKind.BALL:
        return Circle(scale * BALL_RADIUS_MAX)
    if kind == BodyKind.BAR:
        return Box(scale * BAR_HALF_LENGTH_MAX, BAR_HALF_THICKNESS)
    if kind == BodyKind.STANDING_STICK:
        return Box(STICK_HALF_THICKNESS, scale * STICK_HALF_HEIGHT_MAX)
    # Jar: open-top U of three boxes. Local frame here has the jar bottom
    # at y=0; make_body re-centers onto the COM.
    width = scale * JAR_WIDTH_MAX
    height = width
    t = JAR_WALL_FRACTION * width
    wall_h = (height - t) / 2.0
    return Compound((
        CompoundPart(Box(width / 2.0, t / 2.0), (0.0, t / 2.0)),
        CompoundPart(Box(t / 2.0, wall_h), (-(width - t) / 2.0, t + wall_h)),
        CompoundPart(Box(t / 2.0, wall_h), ((width - t) / 2.0, t + wall_h)),
    ))


def body_from_vocabulary(body_id: int, kind: BodyKind, scale: float, position,
                         angle: float = 0.0, *, dynamic: bool, role: Role,
                         velocity=(0.0, 0.0, 0.0)) -> Body:
    """Construct a vocabulary body whose shape AABB-center sits at `position`.

    For balls, bars and sticks that center is also the COM; for jars the
    COM sits lower, and the conversion happens here so callers can think
    in terms of the visible footprint.
    """
    shape = vocabulary_shape(kind, scale)
    x, y = position
    if isinstance(shape, Compound):
        lo_x, lo_y, hi_x, hi_y = geometry.shape_aabb(shape, (0.0, 0.0, 0.0))
        box_cx = (lo_x + hi_x) / 2.0
        box_cy = (lo_y + hi_y) / 2.0
        c, s = math.cos(angle), math.sin(angle)
        x -= c * box_cx - s * box_cy
        y -= s * box_cx + c * box_cy
    return make_body(body_id, shape, (x, y, angle), dynamic=dynamic, role=role,
                     velocity=velocity, kind=kind, scale=scale)


@dataclass
class WorldState:
    bodies: list[Body] = field(default_factory=list)
    bounds: tuple[float, float] = (WORLD_SIZE, WORLD_SIZE)
    time: float = 0.0

    def __post_init__(self):
        ids = [b.id for b in self.bodies]
        if len(ids) != len(set(ids)):
            raise ValueError("body ids must be unique")

    def body(self, body_id: int) -> Body:
        for b in self.bodies:
            if b.id == body_id:
                return b
        raise KeyError(f"no body with id {body_id}")

    def next_id(self) -> int:
        return max((b.id for b in self.bodies), default=-1) + 1

    def add(self, body: Body) -> None:
        if any(b.id == body.id for b in self.bodies):
            raise ValueError(f"duplicate body id {body.id}")
        self.bodies.append(body)

    def copy(self) -> "WorldState":
        # Body is frozen, so sharing instances is safe.
        return WorldState(bodies=list(self.bodies), bounds=self.bounds, time=self.time)


@dataclass(frozen=True)
class Goal:
    subject_id: int
    object_id: int
    relation: str = "touching"
    dwell: float = 3.0

    def __post_init__(self):
        if self.subject_id == self.object_id:
            raise ValueError("goal subject and object must differ")
        if self.relation != "touching":
            raise ValueError(f"unsupported relation {self.relation!r}")

    def validate(self, world_state: WorldState) -> None:
        world_state.body(self.subject_id)
        world_state.body(self.object_id)


def overlap(a: Body, b: Body) -> bool:
    """True iff the bodies interpenetrate beyond the touch tolerance."""
    return geometry.shapes_overlap(a.shape, a.pose, b.shape, b.pose)


def body_gap(a: Body, b: Body) -> float:
    """Signed separation between two bodies (negative = overlap depth)."""
    return geometry.shape_gap(a.shape, a.pose, b.shape, b.pose)


# --------- scene JSON ---------

def shape_to_dict(shape: Shape) -> dict:
    if isinstance(shape, Circle):
        return {"type": "circle", "radius": shape.radius}
    if isinstance(shape, Box):
        return {"type": "box", "half_width": shape.half_width,
                "half_height": shape.half_height}
    return {"type": "compound", "parts": [
        {"half_width": p.box.half_width, "half_height": p.box.half_height,
         "offset": list(p.offset)} for p in shape.parts]}


def shape_from_dict(d: dict) -> Shape:
    t = d["type"]
    if t == "circle":
        return Circle(d["radius"])
    if t == "box":
        return Box(d["half_width"], d["half_height"])
    if t == "compound":
        return Compound(tuple(
            CompoundPart(Box(p["half_width"], p["half_height"]), tuple(p["offset"]))
            for p in d["parts"]))
    raise ValueError(f"unknown shape type {t!r}")


def body_to_dict(b: Body) -> dict:
    return {
        "id": b.id,
        "kind": b.kind.value if b.kind else None,
        "scale": b.scale,
        "shape": shape_to_dict(b.shape),
        "pose": list(b.pose),
        "velocity": list(b.velocity),
        "dynamic": b.dynamic,
        "mass": b.mass,
        "role": b.role.value,
    }


def body_from_dict(d: dict) -> Body:
    shape = shape_from_dict(d["shape"])
    area, _, unit_inertia = geometry.mass_properties(shape)
    return Body(
        id=d["id"], shape=shape, pose=tuple(d["pose"]), velocity=tuple(d["velocity"]),
        dynamic=d["dynamic"], mass=d.get("mass", area * UNIT_DENSITY),
        inertia=unit_inertia * UNIT_DENSITY, role=Role(d["role"]),
        kind=BodyKind(d["kind"]) if d.get("kind") else None, scale=d.get("scale"),
    )


def scene_to_dict(w: WorldState) -> dict:
    return {"bounds": list(w.bounds), "time": w.time,
            "bodies": [body_to_dict(b) for b in w.bodies]}


def scene_from_dict(d: dict) -> WorldState:
    return WorldState(bodies=[body_from_dict(bd) for bd in d["bodies"]],
                      bounds=tuple(d["bounds"]), time=d["time"])


def goal_to_dict(g: Goal) -> dict:
    return {"subject_id": g.subject_id, "relation": g.relation,
            "object_id": g.object_id, "dwell": g.dwell}


def goal_from_dict(d: dict) -> Goal:
    return Goal(subject_id=d["subject_id"], object_id=d["object_id"],
                relation=d.get("relation", "touching"), dwell=d.get("dwell", 3.0))
