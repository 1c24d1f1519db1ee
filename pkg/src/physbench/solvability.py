"""Statistical task-solvability machinery.

A task's solvability level is the probability that a uniformly random
*valid* action is a *stable* solution (solves the task and keeps solving it
under all eight half-unit translations). Tasks are classified by a Wald
sequential probability ratio test between s = p0 and s = 2*p0 with
alpha = beta = 0.05: crossing the upper boundary rejects "s <= p0"
(Solvable), the lower rejects "s >= 2*p0" (Unsolvable), and hitting the
sample cap leaves the task Undecided (never silently passed).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .rng import keyed_rng
from .simulation import Action, InvalidAction, TIER_DIMS, attempt_reward, validate_action
from .tasks import Task, TaskTemplate, instantiate_all
from .world import WORLD_SIZE

ALPHA = 0.05
BETA = 0.05
UPPER_BOUNDARY = math.log((1.0 - BETA) / ALPHA)    # ~= 2.944
LOWER_BOUNDARY = math.log(BETA / (1.0 - ALPHA))    # ~= -2.944

# the eight compass shifts, in world units
STABILITY_SHIFTS = (
    (0.5, 0.0), (-0.5, 0.0), (0.0, 0.5), (0.0, -0.5),
    (0.5, 0.5), (0.5, -0.5), (-0.5, 0.5), (-0.5, -0.5),
)


class NoValidActions(RuntimeError):
    """Rejection sampling could not find valid actions (degenerate task)."""


@dataclass(frozen=True)
class SolvabilityVerdict:
    verdict: str                 # "Solvable" | "Unsolvable" | "Undecided"
    samples_used: int
    stable_solutions_found: int
    raw_draws: int
    log_likelihood_ratio: float


def shifted_action(a: Action, dx: float, dy: float) -> Action | None:
    """Translate every placed ball by (dx, dy) world units; None if that
    pushes any coordinate out of the unit cube (an invalid perturbation)."""
    ux, uy = dx / WORLD_SIZE, dy / WORLD_SIZE
    coords = list(a.coords)
    for i in range(0, len(coords), 3):
        coords[i] += ux
        coords[i + 1] += uy
        if not (0.0 <= coords[i] <= 1.0 and 0.0 <= coords[i + 1] <= 1.0):
            return None
    return Action(tier=a.tier, coords=tuple(coords))


def is_stable_solution(task: Task, a: Action) -> bool:
    """Solves, and still solves under all eight half-unit translations.

    A perturbation that becomes invalid counts as a failure.
    """
    if not validate_action(task, a):
        raise InvalidAction(f"action {a.coords} is invalid for {task.id}")
    if attempt_reward(task, a) != 1:
        return False
    for dx, dy in STABILITY_SHIFTS:
        shifted = shifted_action(a, dx, dy)
        if shifted is None or not validate_action(task, shifted):
            return False
        if attempt_reward(task, shifted) != 1:
            return False
    return True


def sample_caps(p0: float, cap: int | None) -> tuple[int, int]:
    soft = cap if cap is not None else math.ceil(1.0 / (32.0 * p0))
    hard = max(soft, math.ceil(4.0 / p0))
    return soft, hard


def classify_solvability(task: Task, p0: float, rng_seed: int = 0,
                         cap: int | None = None, action_tier: str | None = None,
                         outcome_fn=None) -> SolvabilityVerdict:
    """SPRT classification of the task's solvability level.

    action_tier overrides the sampled action space (used for the single-ball
    side check on two-ball tasks). outcome_fn replaces the stable-solution
    check for synthetic calibration oracles; it receives the Action and must
    return a bool.
    """
    if not 0.0 < p0 < 0.1:
        raise ValueError(f"p0 must be in (0, 0.1), got {p0}")
    tier = action_tier or task.tier
    if tier != task.tier:
        # e.g. the single-ball side check on a two-ball task
        from dataclasses import replace
        task = replace(task, tier=tier, solution=None)
    dims = TIER_DIMS[tier]
    _, hard_cap = sample_caps(p0, cap)
    raw_cap = 100 * hard_cap
    rng = keyed_rng("solvability", task.id, rng_seed, tier)

    step_success = math.log(2.0)   # log((2 p0) / p0)
    step_failure = math.log((1.0 - 2.0 * p0) / (1.0 - p0))

    llr = 0.0
    samples = 0
    successes = 0
    raw = 0
    while samples < hard_cap:
        coords = tuple(rng.uniform(0.0, 1.0, size=dims).tolist())
        raw += 1
        if raw > raw_cap:
            raise NoValidActions(
                f"{task.id}: no decision after {raw - 1} raw draws "
                f"({samples} valid samples)")
        action = Action(tier=tier, coords=coords)
        if not validate_action(task, action):
            continue
        samples += 1
        if outcome_fn is not None:
            ok = bool(outcome_fn(action))
        else:
            ok = is_stable_solution(task, action)
        if ok:
            successes += 1
            llr += step_success
        else:
            llr += step_failure
        if llr >= UPPER_BOUNDARY:
            return SolvabilityVerdict("Solvable", samples, successes, raw, llr)
        if llr <= LOWER_BOUNDARY:
            return SolvabilityVerdict("Unsolvable", samples, successes, raw, llr)
    return SolvabilityVerdict("Undecided", samples, successes, raw, llr)


@dataclass(frozen=True)
class DiversityHistogram:
    counts: dict[int, int]    # tasks-solved-per-action -> number of actions
    n_samples: int

    def to_rows(self):
        return [(k, self.counts[k]) for k in sorted(self.counts)]


def diversity_histogram(t: TaskTemplate, n_samples: int, seed: int = 0,
                        tasks: list[Task] | None = None) -> DiversityHistogram:
    """How many tasks of the template each sampled action solves (plain
    solve, not stable). Actions invalid for every task are excluded."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if tasks is None:
        tasks = instantiate_all(t)
    dims = TIER_DIMS[t.tier]
    rng = keyed_rng("diversity", t.id, seed)
    counts: dict[int, int] = {}
    for _ in range(n_samples):
        coords = tuple(rng.uniform(0.0, 1.0, size=dims).tolist())
        action = Action(tier=t.tier, coords=coords)
        solved = 0
        any_valid = False
        for task in tasks:
            if not validate_action(task, action):
                continue
            any_valid = True
            if attempt_reward(task, action) == 1:
                solved += 1
        if any_valid:
            counts[solved] = counts.get(solved, 0) + 1
    return DiversityHistogram(counts=counts, n_samples=n_samples)
