"""Deterministic fixed-timestep rigid-body stepper.

All tuning constants live here and are stamped into results files so a
run is reproducible from its outputs alone. A simulation owns its state
and runs single-threaded; different simulations never share anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import engine_core
from .world import Body, Goal, WorldState

DT = 1.0 / 60.0
GRAVITY = 300.0            # world-units / s^2, downward
SOLVER_ITERATIONS = 10
RESTITUTION = 0.2
FRICTION = 0.5
SPEED_CAP = 500.0          # no-tunneling guarantee at DT
EPS_TOUCH = 0.5            # goal "touching" tolerance (half a pixel)
SLOP = 0.05                # penetration allowed before positional correction
CORRECTION = 0.2           # positional correction strength
RESTITUTION_THRESHOLD = 10.0  # min approach speed for a bounce, > g*DT
TIME_LIMIT_DEFAULT = 16.0
FRAME_STRIDE_DEFAULT = 15  # 0.25 s between captured frames

ENGINE_CONSTANTS = {
    "dt": DT, "gravity": GRAVITY, "solver_iterations": SOLVER_ITERATIONS,
    "restitution": RESTITUTION, "friction": FRICTION, "speed_cap": SPEED_CAP,
    "eps_touch": EPS_TOUCH, "slop": SLOP, "correction": CORRECTION,
    "restitution_threshold": RESTITUTION_THRESHOLD,
}


class NumericalDivergence(RuntimeError):
    """A body coordinate became non-finite; indicates an engine bug."""


@dataclass(frozen=True)
class Contact:
    body_a: int
    body_b: int
    point: tuple[float, float]
    normal: tuple[float, float]   # unit vector, a -> b
    penetration: float


@dataclass(frozen=True)
class SimulationResult:
    solved: bool
    end_time: float
    frames: tuple[WorldState, ...]
    first_satisfied_at: float | None


class _Packed:
    """Flat array mirror of a WorldState for the kernel."""

    __slots__ = ("bodies", "bounds", "px", "py", "ang", "vx", "vy", "om",
                 "invm", "invi", "rbound", "pb", "pkind", "pr1", "pr2",
                 "pox", "poy")

    def __init__(self, w: WorldState):
        from . import geometry

        n = len(w.bodies)
        self.bodies = w.bodies
        self.bounds = w.bounds
        self.px = np.empty(n)
        self.py = np.empty(n)
        self.ang = np.empty(n)
        self.vx = np.empty(n)
        self.vy = np.empty(n)
        self.om = np.empty(n)
        self.invm = np.empty(n)
        self.invi = np.empty(n)
        self.rbound = np.empty(n)
        parts = []
        for i, b in enumerate(w.bodies):
            self.px[i], self.py[i], self.ang[i] = b.pose
            self.vx[i], self.vy[i], self.om[i] = b.velocity
            self.invm[i] = 1.0 / b.mass if b.dynamic else 0.0
            self.invi[i] = 1.0 / b.inertia if b.dynamic else 0.0
            bound = 0.0
            for kind, v in geometry.world_parts(b.shape, 0.0, 0.0, 0.0):
                if kind == "circle":
                    _, _, r = v
                    parts.append((i, 0, r, 0.0, 0.0, 0.0))
                    bound = max(bound, r)
                else:
                    bx, by, _, _, hw, hh = v
                    parts.append((i, 1, hw, hh, bx, by))
                    bound = max(bound, math.hypot(bx, by) + math.hypot(hw, hh))
            self.rbound[i] = bound
        self.pb = np.array([p[0] for p in parts], dtype=np.int64)
        self.pkind = np.array([p[1] for p in parts], dtype=np.int64)
        self.pr1 = np.array([p[2] for p in parts])
        self.pr2 = np.array([p[3] for p in parts])
        self.pox = np.array([p[4] for p in parts])
        self.poy = np.array([p[5] for p in parts])

    def state_args(self):
        return (self.px, self.py, self.ang, self.vx, self.vy, self.om,
                self.invm, self.invi, self.rbound,
                self.pb, self.pkind, self.pr1, self.pr2, self.pox, self.poy)

    def unpack(self, time: float) -> WorldState:
        from dataclasses import replace

        bodies = []
        for i, b in enumerate(self.bodies):
            if b.dynamic:
                b = replace(b, pose=(self.px[i], self.py[i], self.ang[i]),
                            velocity=(self.vx[i], self.vy[i], self.om[i]))
            bodies.append(b)
        return WorldState(bodies=bodies, bounds=self.bounds, time=time)

    def state_at(self, snapshot: np.ndarray, time: float) -> WorldState:
        from dataclasses import replace

        bodies = []
        for i, b in enumerate(self.bodies):
            if b.dynamic:
                b = replace(b, pose=(snapshot[i, 0], snapshot[i, 1], snapshot[i, 2]),
                            velocity=(snapshot[i, 3], snapshot[i, 4], snapshot[i, 5]))
            bodies.append(b)
        return WorldState(bodies=bodies, bounds=self.bounds, time=time)


def _step_args():
    return (DT, GRAVITY, SOLVER_ITERATIONS, RESTITUTION, RESTITUTION_THRESHOLD,
            FRICTION, SLOP, CORRECTION, SPEED_CAP)


def contacts(w: WorldState) -> list[Contact]:
    """All body pairs within EPS_TOUCH of contact, sorted by (id_a, id_b)."""
    p = _Packed(w)
    mc = engine_core.MAX_CONTACTS
    ca = np.empty(mc, dtype=np.int64)
    cb = np.empty(mc, dtype=np.int64)
    cpx = np.empty(mc)
    cpy = np.empty(mc)
    cnx = np.empty(mc)
    cny = np.empty(mc)
    cgap = np.empty(mc)
    cpair = np.empty(mc, dtype=np.int64)
    nc = engine_core._collect_contacts(
        *p.state_args()[:6], p.invm, p.rbound,
        p.pb, p.pkind, p.pr1, p.pr2, p.pox, p.poy,
        DT, 0.0, w.bounds[0], w.bounds[1], EPS_TOUCH,
        ca, cb, cpx, cpy, cnx, cny, cgap, cpair)
    out = []
    for k in range(nc):
        if cgap[k] > EPS_TOUCH:
            continue
        out.append(Contact(
            body_a=w.bodies[ca[k]].id, body_b=w.bodies[cb[k]].id,
            point=(cpx[k], cpy[k]), normal=(cnx[k], cny[k]),
            penetration=-cgap[k]))
    out.sort(key=lambda c: (c.body_a, c.body_b))
    return out


def step(w: WorldState, dt: float = DT) -> WorldState:
    """Advance one fixed step; pure (returns a new world)."""
    if abs(dt - DT) > 1e-12:
        raise ValueError(f"step runs at the fixed DT={DT}, got {dt}")
    p = _Packed(w)
    status = engine_core._step(*p.state_args(), *_step_args(),
                               w.bounds[0], w.bounds[1])
    if status != 0:
        raise NumericalDivergence("non-finite body state after step")
    return p.unpack(w.time + DT)


def simulate(w: WorldState, g: Goal, time_limit: float = TIME_LIMIT_DEFAULT,
             frame_stride: int = FRAME_STRIDE_DEFAULT,
             keep_frames: bool = True) -> SimulationResult:
    """Step until the goal holds for its dwell time or the limit elapses.

    The goal is satisfied when subject and object stay within EPS_TOUCH for
    `g.dwell` seconds of consecutive steps; any separation resets the clock.
    """
    g.validate(w)
    p = _Packed(w)
    subject = next(i for i, b in enumerate(w.bodies) if b.id == g.subject_id)
    obj = next(i for i, b in enumerate(w.bodies) if b.id == g.object_id)
    total_steps = int(round(time_limit / DT))
    dwell_steps = int(round(g.dwell / DT))
    n = len(w.bodies)
    max_frames = total_steps // frame_stride + 3
    frames_buf = np.empty((max_frames, n, 6))
    frame_steps = np.empty(max_frames, dtype=np.int64)
    status, solved, end_step, first_step, nf = engine_core._simulate(
        *p.state_args(), subject, obj, EPS_TOUCH, dwell_steps, total_steps,
        frame_stride, *_step_args(), w.bounds[0], w.bounds[1],
        frames_buf, frame_steps)
    if status != 0:
        raise NumericalDivergence("non-finite body state during simulation")
    frames: tuple[WorldState, ...] = ()
    if keep_frames:
        frames = tuple(p.state_at(frames_buf[i], w.time + frame_steps[i] * DT)
                       for i in range(nf))
    return SimulationResult(
        solved=bool(solved),
        end_time=w.time + end_step * DT,
        frames=frames,
        first_satisfied_at=w.time + first_step * DT if solved else None,
    )


def total_energy(w: WorldState) -> float:
    """Kinetic plus gravitational potential energy of the dynamic bodies."""
    e = 0.0
    for b in w.bodies:
        if not b.dynamic:
            continue
        vx, vy, om = b.velocity
        e += 0.5 * b.mass * (vx * vx + vy * vy) + 0.5 * b.inertia * om * om
        e += b.mass * GRAVITY * b.pose[1]
    return e


def warmup() -> None:
    """Compile the numba kernels ahead of time."""
    engine_core.warmup()
