"""Agent-facing environment: action encoding, attempts, and observations.

An action is a point in the unit cube: (x, y, r) per placed ball, one ball
for tier "B" and two for tier "2B". x/y map onto the 256-unit world and r
maps linearly onto the placeable radius range. Invalid placements (out of
bounds, overlapping, degenerate) are rejected; by protocol they cost the
agent nothing.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from . import engine, geometry, world
from .world import Role, WorldState

if TYPE_CHECKING:
    from .tasks import Task

TIER_DIMS = {"B": 3, "2B": 6}
# smallest placeable ball; uniform r below this is rejected as degenerate
MIN_ACTION_RADIUS = 0.5

BACKGROUND = 7
CATEGORY_NAMES = {
    1: "dynamic goal object",
    2: "static goal object",
    3: "dynamic goal subject",
    4: "static confounding body",
    5: "dynamic confounding body",
    6: "user-placed body",
    7: "background",
}


class TierMismatch(ValueError):
    """Action tier does not match the task tier."""


class InvalidAction(ValueError):
    """attempt() was called with an action that fails validation."""


@dataclass(frozen=True)
class Action:
    tier: str
    coords: tuple[float, ...]

    def __post_init__(self):
        dims = TIER_DIMS.get(self.tier)
        if dims is None:
            raise ValueError(f"unknown tier {self.tier!r}")
        if len(self.coords) != dims:
            raise ValueError(f"tier {self.tier} takes {dims} coords, got {len(self.coords)}")
        if not all(0.0 <= c <= 1.0 for c in self.coords):
            raise ValueError(f"coords must lie in [0, 1]: {self.coords}")

    def balls(self) -> list[tuple[float, float, float]]:
        """Decode to world-space (x, y, radius) per placed ball."""
        out = []
        for i in range(0, len(self.coords), 3):
            x, y, r = self.coords[i:i + 3]
            out.append((x * world.WORLD_SIZE, y * world.WORLD_SIZE,
                        r * world.BALL_RADIUS_MAX))
        return out


@dataclass(frozen=True)
class Validity:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


VALID = Validity(True)


def validate_action(task: "Task", a: Action) -> Validity:
    """Check bounds, scene overlap and (2B) mutual overlap of placed balls."""
    if a.tier != task.tier:
        raise TierMismatch(f"action tier {a.tier} vs task tier {task.tier}")
    balls = a.balls()
    size = world.WORLD_SIZE
    for x, y, r in balls:
        if r < MIN_ACTION_RADIUS:
            return Validity(False, "degenerate_radius")
        if x - r < 0.0 or x + r > size or y - r < 0.0 or y + r > size:
            return Validity(False, "out_of_bounds")
    for x, y, r in balls:
        for body in task.initial_world.bodies:
            if geometry.shapes_overlap(geometry.Circle(r), (x, y, 0.0),
                                       body.shape, body.pose):
                return Validity(False, "overlaps_body")
    if len(balls) == 2:
        (x1, y1, r1), (x2, y2, r2) = balls
        if geometry.circle_circle_gap(x1, y1, r1, x2, y2, r2) < -geometry.OVERLAP_EPS:
            return Validity(False, "self_overlap")
    return VALID


def materialize(task: "Task", a: Action) -> WorldState:
    """Initial world plus the action's balls as user-placed dynamic bodies."""
    w = task.initial_world.copy()
    next_id = w.next_id()
    for x, y, r in a.balls():
        w.add(world.make_body(next_id, geometry.Circle(r), (x, y, 0.0),
                              dynamic=True, role=Role.USER_PLACED))
        next_id += 1
    return w


@dataclass(frozen=True)
class AttemptResult:
    reward: int
    observations: tuple["ObservationImage", ...]
    end_time: float


def attempt(task: "Task", a: Action, include_observations: bool = True,
            frame_stride: int = engine.FRAME_STRIDE_DEFAULT) -> AttemptResult:
    """Run one attempt; a pure function of (task, action).

    Callers must validate first; an invalid action raises InvalidAction and,
    by the budget rule, must not be counted by harnesses.
    """
    v = validate_action(task, a)
    if not v:
        raise InvalidAction(v.reason)
    w = materialize(task, a)
    res = engine.simulate(w, task.goal, time_limit=task.time_limit,
                          frame_stride=frame_stride,
                          keep_frames=include_observations)
    observations = ()
    if include_observations:
        observations = tuple(rasterize(f, task.goal) for f in res.frames)
    return AttemptResult(reward=int(res.solved), observations=observations,
                         end_time=res.end_time)


def attempt_reward(task: "Task", a: Action) -> int:
    """Reward only, skipping observation rasterization (harness fast path)."""
    return attempt(task, a, include_observations=False).reward


# --------- rasterizer ---------

@dataclass(frozen=True)
class ObservationImage:
    """256x256 category grid; grid[iy, ix] covers cell center (ix+.5, iy+.5),
    row 0 at the bottom of the world."""

    grid: np.ndarray

    def __eq__(self, other):
        return isinstance(other, ObservationImage) and np.array_equal(self.grid, other.grid)

    def __hash__(self):  # pragma: no cover - not used as dict key in hot paths
        return hash(self.grid.tobytes())


def body_category(b: world.Body) -> int:
    if b.role == Role.USER_PLACED:
        return 6
    if b.role == Role.GOAL_SUBJECT:
        return 3 if b.dynamic else 2
    if b.role == Role.GOAL_OBJECT:
        return 1 if b.dynamic else 2
    return 5 if b.dynamic else 4


_PAINT_ORDER = {Role.CONFOUNDING: 0, Role.GOAL_OBJECT: 1,
                Role.GOAL_SUBJECT: 2, Role.USER_PLACED: 3}

_CELLS = np.arange(256, dtype=np.float64) + 0.5


def rasterize(w: WorldState, g: world.Goal) -> ObservationImage:
    """Category per cell center; overlap precedence: user-placed over goal
    subject over goal object over confounding; ties go to the later body."""
    g.validate(w)
    size = int(w.bounds[0])
    xs = _CELLS if size == 256 else np.arange(size, dtype=np.float64) + 0.5
    X = xs[None, :]
    Y = xs[:, None]
    grid = np.full((size, size), BACKGROUND, dtype=np.uint8)
    order = sorted(range(len(w.bodies)),
                   key=lambda i: (_PAINT_ORDER[w.bodies[i].role], i))
    for i in order:
        b = w.bodies[i]
        cat = body_category(b)
        mask = None
        for kind, v in geometry.world_parts(b.shape, *b.pose):
            if kind == "circle":
                cx, cy, r = v
                m = (X - cx) ** 2 + (Y - cy) ** 2 <= r * r
            else:
                bx, by, c, s, hw, hh = v
                dx = X - bx
                dy = Y - by
                m = (np.abs(dx * c + dy * s) <= hw) & (np.abs(-dx * s + dy * c) <= hh)
            mask = m if mask is None else (mask | m)
        grid[mask] = cat
    return ObservationImage(grid=grid)


def encode_onehot(o: ObservationImage) -> np.ndarray:
    """Category grid -> 7-channel one-hot grid, channel c for category c+1."""
    return np.stack([(o.grid == c).astype(np.uint8) for c in range(1, 8)])


def decode_onehot(channels: np.ndarray) -> ObservationImage:
    if channels.shape[0] != 7:
        raise ValueError(f"expected 7 channels, got {channels.shape}")
    grid = (np.argmax(channels, axis=0) + 1).astype(np.uint8)
    return ObservationImage(grid=grid)


# white background, then categories 1..7 in display colors
_PALETTE = {
    1: (0, 91, 255),      # dynamic goal object: blue
    2: (128, 0, 128),     # static goal object: purple
    3: (32, 201, 81),     # dynamic goal subject: green
    4: (0, 0, 0),         # static confounding: black
    5: (128, 128, 128),   # dynamic confounding: gray
    6: (235, 33, 45),     # user-placed: red
    7: (255, 255, 255),   # background: white
}


def observation_to_png(o: ObservationImage, path) -> None:
    """Indexed-color PNG with row 0 at the top (image convention)."""
    from PIL import Image

    img = Image.fromarray(o.grid[::-1], mode="P")
    palette = [0] * 768
    for cat, (r, gg, b) in _PALETTE.items():
        palette[cat * 3:cat * 3 + 3] = [r, gg, b]
    img.putpalette(palette)
    img.save(path)
