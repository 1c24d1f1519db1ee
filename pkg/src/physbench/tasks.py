"""Tasks and parameterized task templates.

A template is a named archetype (a scene builder registered in content.py)
plus uniform parameter ranges and a count. Instantiation is a pure function
of (template id, index, base seed): parameters come from a counter-keyed
generator, and draws that violate task invariants are rejected and redrawn
with a bumped retry counter, so results never depend on call order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from . import engine, world
from .rng import keyed_rng
from .simulation import Action, validate_action
from .world import Goal, WorldState

MAX_RETRIES = 100
DEFAULT_TIME_LIMIT = engine.TIME_LIMIT_DEFAULT
# p0 for the per-tier solvability requirement (appendix defaults)
TIER_P0 = {"B": 1e-5, "2B": 1e-6}
# coarser p0 for the is-it-single-ball-solvable side check on 2B templates
# (proving "no single-ball solution" at 1e-6 would need millions of samples)
SINGLE_BALL_P0 = 0.02


class InvalidInstance(RuntimeError):
    """Template kept producing invariant-violating draws (authoring bug)."""


class InstanceRejected(Exception):
    """Raised by builders for parameter draws that cannot make a scene."""


class BudgetExhausted(RuntimeError):
    """Solvability classification ran out of samples for some task."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class Task:
    id: str
    initial_world: WorldState
    goal: Goal
    tier: str
    time_limit: float = DEFAULT_TIME_LIMIT
    solution: Action | None = None   # authored stable solution

    @property
    def template_id(self) -> str:
        return self.id.split(":", 1)[0]


@dataclass(frozen=True)
class TaskTemplate:
    id: str
    tier: str
    archetype: str
    generator_params: dict[str, tuple[float, float]]
    count: int
    base_seed: int = 0
    time_limit: float = DEFAULT_TIME_LIMIT

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("template count must be >= 1")
        if self.tier not in TIER_P0:
            raise ValueError(f"unknown tier {self.tier!r}")


# archetype name -> builder(params, rng) -> (WorldState, Goal, solution Action)
ARCHETYPES: dict[str, Callable] = {}


def register_archetype(name: str):
    def deco(fn):
        ARCHETYPES[name] = fn
        return fn
    return deco


def check_task_invariants(w: WorldState, goal: Goal, time_limit: float) -> None:
    """Raise InstanceRejected unless the scene is a well-formed, unsolved task."""
    goal.validate(w)
    bodies = w.bodies
    for i, a in enumerate(bodies):
        for b in bodies[i + 1:]:
            # static scenery may interpenetrate (e.g. bars forming a funnel
            # seam); anything dynamic must start clear
            if (a.dynamic or b.dynamic) and world.overlap(a, b):
                raise InstanceRejected(f"bodies {a.id} and {b.id} overlap")
    res = engine.simulate(w, goal, time_limit=time_limit, keep_frames=False)
    if res.solved:
        raise InstanceRejected("goal satisfied with no action")


def instantiate_template(t: TaskTemplate, index: int) -> Task:
    """Deterministically build task `index`; same inputs -> identical task."""
    if not 0 <= index < t.count:
        raise IndexError(f"task index {index} outside [0, {t.count})")
    builder = ARCHETYPES.get(t.archetype)
    if builder is None:
        raise KeyError(f"unknown archetype {t.archetype!r}; is content imported?")
    for retry in range(MAX_RETRIES):
        rng = keyed_rng("task", t.id, t.base_seed, index, retry)
        params = {name: float(rng.uniform(lo, hi))
                  for name, (lo, hi) in sorted(t.generator_params.items())}
        try:
            w, goal, solution = builder(params, rng)
            check_task_invariants(w, goal, t.time_limit)
        except (InstanceRejected, world.OutOfBounds, world.BadScale):
            continue
        if solution is not None and solution.tier != t.tier:
            raise InvalidInstance(f"{t.id}: authored solution tier mismatch")
        task = Task(id=f"{t.id}:task{index:03d}", initial_world=w, goal=goal,
                    tier=t.tier, time_limit=t.time_limit, solution=solution)
        if solution is not None:
            # authoring requirement: every shipped task carries a known
            # stable solution; draws whose closed-form solution turns out
            # marginal under this engine are rejected like any other
            # invariant violation
            from .solvability import is_stable_solution

            if not (validate_action(task, solution)
                    and is_stable_solution(task, solution)):
                continue
        return task
    raise InvalidInstance(
        f"template {t.id} produced no valid draw for index {index} "
        f"after {MAX_RETRIES} retries")


def instantiate_all(t: TaskTemplate) -> list[Task]:
    return [instantiate_template(t, i) for i in range(t.count)]


# --------- template validation ---------

@dataclass
class TemplateReport:
    template_id: str
    tier: str
    verdicts: dict = field(default_factory=dict)          # task id -> verdict name
    samples_used: dict = field(default_factory=dict)      # task id -> int
    solve_probability: dict = field(default_factory=dict)  # task id -> estimate
    single_ball: dict = field(default_factory=dict)       # task id -> verdict name (2B)
    fraction_single_ball_solvable: float | None = None
    valid: bool = False

    def undecided(self) -> list[str]:
        out = [tid for tid, v in self.verdicts.items() if v == "Undecided"]
        out += [tid for tid, v in self.single_ball.items() if v == "Undecided"]
        return out


def validate_template(t: TaskTemplate, p0: float | None = None,
                      budget: int | None = None, strict: bool = False,
                      progress: Callable[[str], None] | None = None) -> TemplateReport:
    """Classify every task's in-tier solvability; 2B templates additionally
    get the single-ball-solvable fraction (must stay below one half)."""
    from . import solvability

    if p0 is None:
        p0 = TIER_P0[t.tier]
    if not 0.0 < p0 < 0.1:
        raise ValueError(f"p0 must be in (0, 0.1), got {p0}")
    report = TemplateReport(template_id=t.id, tier=t.tier)
    for i in range(t.count):
        task = instantiate_template(t, i)
        verdict = solvability.classify_solvability(
            task, p0=p0, rng_seed=t.base_seed, cap=budget)
        report.verdicts[task.id] = verdict.verdict
        report.samples_used[task.id] = verdict.samples_used
        report.solve_probability[task.id] = (
            verdict.stable_solutions_found / verdict.samples_used
            if verdict.samples_used else 0.0)
        if t.tier == "2B":
            sb = solvability.classify_solvability(
                task, p0=SINGLE_BALL_P0, rng_seed=t.base_seed, cap=budget,
                action_tier="B")
            report.single_ball[task.id] = sb.verdict
        if progress:
            progress(f"{task.id}: {verdict.verdict} ({verdict.samples_used} samples)")
    if t.tier == "2B":
        n_single = sum(1 for v in report.single_ball.values() if v == "Solvable")
        report.fraction_single_ball_solvable = n_single / t.count
    undecided = report.undecided()
    if undecided and strict:
        raise BudgetExhausted(f"{t.id}: undecided tasks {undecided}", report)
    report.valid = (
        all(v == "Solvable" for v in report.verdicts.values())
        and (report.fraction_single_ball_solvable is None
             or report.fraction_single_ball_solvable < 0.5))
    return report


# --------- JSON files ---------

def template_to_dict(t: TaskTemplate) -> dict:
    return {
        "id": t.id, "tier": t.tier, "archetype": t.archetype,
        "params": {k: list(v) for k, v in t.generator_params.items()},
        "count": t.count, "base_seed": t.base_seed, "time_limit": t.time_limit,
    }


def template_from_dict(d: dict) -> TaskTemplate:
    return TaskTemplate(
        id=d["id"], tier=d["tier"], archetype=d["archetype"],
        generator_params={k: tuple(v) for k, v in d["params"].items()},
        count=d["count"], base_seed=d.get("base_seed", 0),
        time_limit=d.get("time_limit", DEFAULT_TIME_LIMIT),
    )


def task_to_dict(task: Task) -> dict:
    return {
        "id": task.id,
        "tier": task.tier,
        "time_limit": task.time_limit,
        "scene": world.scene_to_dict(task.initial_world),
        "goal": world.goal_to_dict(task.goal),
        "solution": list(task.solution.coords) if task.solution else None,
        "engine": engine.ENGINE_CONSTANTS,
    }


def task_from_dict(d: dict) -> Task:
    recorded = d.get("engine")
    if recorded is not None:
        current = engine.ENGINE_CONSTANTS
        drift = {k: (v, current[k]) for k, v in recorded.items()
                 if k in current and not math.isclose(v, current[k])}
        if drift:
            raise ValueError(f"task {d['id']} was built under different "
                             f"engine constants: {drift}")
    solution = None
    if d.get("solution") is not None:
        solution = Action(tier=d["tier"], coords=tuple(d["solution"]))
    return Task(id=d["id"], initial_world=world.scene_from_dict(d["scene"]),
                goal=world.goal_from_dict(d["goal"]), tier=d["tier"],
                time_limit=d["time_limit"], solution=solution)


def write_task(task: Task, directory: Path) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / (task.id.replace(":", "__") + ".json")
    path.write_text(json.dumps(task_to_dict(task), indent=1))
    return path


def read_task(path: Path) -> Task:
    return task_from_dict(json.loads(Path(path).read_text()))


def read_task_dir(directory: Path) -> list[Task]:
    return [read_task(p) for p in sorted(Path(directory).glob("*.json"))]
