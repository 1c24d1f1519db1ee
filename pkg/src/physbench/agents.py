"""Baseline agents and the protocol that runs any ranker over test tasks.

An agent exposes rank(task) -> ordered actions and, optionally,
on_task_end(task, log) which fires between tasks (that is where online
agents learn). The harness walks the ranking top-down, skipping invalid
actions without consuming budget, until the task solves or the budget of
valid attempts is spent.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .evaluation import AttemptEntry, AttemptLog, CROSS_TEMPLATE, WITHIN_TEMPLATE
from .rng import keyed_rng
from .simulation import Action, TIER_DIMS, attempt_reward, validate_action
from .tasks import Task


class UnknownTemplate(KeyError):
    """Within-template ranking asked for a template never seen in training."""


@dataclass(frozen=True)
class ActionSet:
    tier: str
    seed: int
    actions: tuple[Action, ...]


def sample_actions(tier: str, n: int, seed: int = 0) -> ActionSet:
    """First n points of the keyed uniform stream over the action cube.

    The stream depends only on (tier, seed), so a smaller set is always a
    prefix of a larger one (rank-size sweeps compare nested sets).
    """
    if n < 1:
        raise ValueError("need n >= 1")
    dims = TIER_DIMS[tier]
    rng = keyed_rng("action-set", tier, seed)
    coords = rng.uniform(0.0, 1.0, size=(n, dims))
    return ActionSet(tier=tier, seed=seed,
                     actions=tuple(Action(tier=tier, coords=tuple(row.tolist()))
                                   for row in coords))


class SimCache:
    """Memoized (task, action) -> (valid, reward) evaluations.

    The big shared action grid gets reused by MEM training, the oracle
    ranker, and online updates; attempts are pure so caching is sound.
    """

    def __init__(self):
        self._data: dict[tuple[str, tuple[float, ...]], tuple[bool, int | None]] = {}
        self.hits = 0
        self.misses = 0

    def evaluate(self, task: Task, action: Action) -> tuple[bool, int | None]:
        key = (task.id, action.coords)
        hit = self._data.get(key)
        if hit is not None:
            self.hits += 1
            return hit
        self.misses += 1
        if validate_action(task, action):
            out = (True, attempt_reward(task, action))
        else:
            out = (False, None)
        self._data[key] = out
        return out


# --------- memorization agent ---------

@dataclass
class MemPolicy:
    """Per-action trial/success counts; per-template tables in the
    within-template setting, one global table cross-template."""

    actions: ActionSet
    setting: str
    n: dict[str, np.ndarray] = field(default_factory=dict)   # key "" = global
    c: dict[str, np.ndarray] = field(default_factory=dict)

    def table_key(self, task: Task) -> str:
        return task.template_id if self.setting == WITHIN_TEMPLATE else ""

    def scores(self, key: str) -> np.ndarray:
        if key not in self.n:
            raise UnknownTemplate(key)
        n = self.n[key]
        c = self.c[key]
        with np.errstate(invalid="ignore", divide="ignore"):
            p = np.where(n > 0, c / np.maximum(n, 1e-300), 0.0)
        return p

    def copy(self) -> "MemPolicy":
        return MemPolicy(actions=self.actions, setting=self.setting,
                         n={k: v.copy() for k, v in self.n.items()},
                         c={k: v.copy() for k, v in self.c.items()})


def mem_train(actions: ActionSet, train_tasks: Sequence[Task], setting: str,
              cache: SimCache | None = None) -> MemPolicy:
    """Simulate every (action, task) pair; n counts valid trials, c solves."""
    if not actions.actions or not train_tasks:
        raise ValueError("need a non-empty action set and training tasks")
    cache = cache or SimCache()
    policy = MemPolicy(actions=actions, setting=setting)
    size = len(actions.actions)
    for task in train_tasks:
        key = policy.table_key(task)
        if key not in policy.n:
            policy.n[key] = np.zeros(size)
            policy.c[key] = np.zeros(size)
        n = policy.n[key]
        c = policy.c[key]
        for i, action in enumerate(actions.actions):
            valid, reward = cache.evaluate(task, action)
            if valid:
                n[i] += 1.0
                c[i] += float(reward)
    return policy


def mem_rank(policy: MemPolicy, task: Task) -> list[Action]:
    """Actions by solve fraction, highest first; ties by action index."""
    scores = policy.scores(policy.table_key(task))
    order = np.argsort(-scores, kind="stable")
    return [policy.actions.actions[i] for i in order]


def mem_update_online(policy: MemPolicy, task: Task,
                      attempted: Iterable[tuple[Action, int]], w: float) -> MemPolicy:
    """Blend observed rewards into the counts with weight w (0 = offline)."""
    if w < 0:
        raise ValueError("online weight must be >= 0")
    if w == 0.0:
        return policy
    key = policy.table_key(task)
    if key not in policy.n:
        raise UnknownTemplate(key)
    index = {a.coords: i for i, a in enumerate(policy.actions.actions)}
    for action, reward in attempted:
        i = index.get(action.coords)
        if i is None:
            continue
        policy.n[key][i] += w
        policy.c[key][i] += w * float(reward)
    return policy


class MemAgent:
    """Non-parametric ranker; set online_weight > 0 for the online variant."""

    def __init__(self, policy: MemPolicy, online_weight: float = 0.0):
        self.policy = policy.copy()
        self.online_weight = online_weight

    def rank(self, task: Task) -> list[Action]:
        return mem_rank(self.policy, task)

    def on_task_end(self, task: Task, log: AttemptLog) -> None:
        if self.online_weight == 0.0:
            return
        attempted = [(e.action, e.reward) for e in log.entries if e.valid]
        mem_update_online(self.policy, task, attempted, self.online_weight)


# --------- random + oracle agents ---------

class RandomAgent:
    """Uniform i.i.d. actions at test time, keyed per task."""

    def __init__(self, tier: str, seed: int = 0, n_draws: int = 4000):
        self.tier = tier
        self.seed = seed
        self.n_draws = n_draws

    def rank(self, task: Task) -> list[Action]:
        rng = keyed_rng("rand-agent", self.tier, self.seed, task.id)
        coords = rng.uniform(0.0, 1.0, size=(self.n_draws, TIER_DIMS[self.tier]))
        return [Action(tier=self.tier, coords=tuple(row.tolist())) for row in coords]


def oracle_rank(task: Task, actions: Sequence[Action],
                cache: SimCache | None = None) -> list[Action]:
    """Actions that solve the task first (stable), then the rest."""
    cache = cache or SimCache()
    solving = []
    rest = []
    for a in actions:
        valid, reward = cache.evaluate(task, a)
        if valid and reward == 1:
            solving.append(a)
        else:
            rest.append(a)
    return solving + rest


class OracleAgent:
    """Upper bound on what ranking the given set can achieve."""

    def __init__(self, actions: ActionSet, cache: SimCache | None = None):
        self.actions = actions
        self.cache = cache or SimCache()

    def rank(self, task: Task) -> list[Action]:
        return oracle_rank(task, self.actions.actions, self.cache)


# --------- the evaluation protocol ---------

def task_order(tasks: Sequence[Task], seed: int = 0) -> list[Task]:
    """Deterministic shuffled order in which test tasks are attempted."""
    ordered = sorted(tasks, key=lambda t: t.id)
    perm = keyed_rng("task-order", seed).permutation(len(ordered))
    return [ordered[i] for i in perm]


def run_agent(agent, test_tasks: Sequence[Task], budget: int = 100,
              seed: int = 0, cache: SimCache | None = None) -> dict[str, AttemptLog]:
    """Attempt each task's ranked actions top-down.

    Invalid actions are logged but consume no budget; online agents get
    on_task_end between tasks, so the task order (a seeded shuffle) matters
    for them and is part of the run's identity.
    """
    cache = cache or SimCache()
    logs: dict[str, AttemptLog] = {}
    for task in task_order(test_tasks, seed):
        log = AttemptLog(task_id=task.id)
        rank = 0
        for action in agent.rank(task):
            valid, reward = cache.evaluate(task, action)
            if not valid:
                log.entries.append(AttemptEntry(action=action, valid=False, reward=None))
                continue
            rank += 1
            log.entries.append(AttemptEntry(action=action, valid=True, reward=reward))
            if reward == 1:
                log.solved_at = rank
                break
            if rank >= budget:
                break
        logs[task.id] = log
        if hasattr(agent, "on_task_end"):
            agent.on_task_end(task, log)
    return logs


def tune_online_weight(make_agent: Callable[[float], object],
                       val_tasks: Sequence[Task], candidates: Sequence[float],
                       budget: int = 100, seed: int = 0,
                       cache: SimCache | None = None) -> tuple[float, dict[float, float]]:
    """Pick the update weight with the best validation AUCCESS (first wins ties)."""
    from .evaluation import auccess, success_curve

    cache = cache or SimCache()
    results: dict[float, float] = {}
    best_w = None
    best = -1.0
    for w in candidates:
        logs = run_agent(make_agent(w), val_tasks, budget=budget, seed=seed, cache=cache)
        score = auccess(success_curve(logs.values(), budget=budget))
        results[w] = score
        if score > best:
            best = score
            best_w = w
    return best_w, results
