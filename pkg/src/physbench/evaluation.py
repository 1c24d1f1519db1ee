"""Folds, success curves, AUCCESS, and the paired fold comparison test.

AUCCESS is the log-weighted average of the cumulative success percentages
over attempts 1..100 (weights log(k+1) - log(k)), which concentrates about
half of the total weight on the first ten attempts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .rng import keyed_rng
from .simulation import Action
from .tasks import Task

WITHIN_TEMPLATE = "within"
CROSS_TEMPLATE = "cross"
SETTINGS = (WITHIN_TEMPLATE, CROSS_TEMPLATE)
DEFAULT_BUDGET = 100
# decision threshold for agent comparisons
COMPARISON_P = 0.01


class TooFewTasks(ValueError):
    pass


class TooFewTemplates(ValueError):
    pass


@dataclass(frozen=True)
class FoldSplit:
    fold_index: int
    setting: str
    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]

    def all_ids(self) -> set[str]:
        return set(self.train) | set(self.val) | set(self.test)


def _split_sizes(n: int) -> tuple[int, int, int]:
    """80/10/10 with each part at least 1 (needs n >= 3)."""
    n_val = max(1, math.floor(0.1 * n))
    n_test = max(1, math.floor(0.1 * n))
    return n - n_val - n_test, n_val, n_test


def make_folds(tasks: Sequence[Task], setting: str, n_folds: int = 10,
               seed: int = 0) -> list[FoldSplit]:
    """Deterministic train/val/test splits per fold.

    Within-template: each template's tasks are split 80/10/10 by a
    permutation keyed on (seed, fold, template). Cross-template: whole
    templates are assigned to the three parts, so no template leaks.
    """
    if setting not in SETTINGS:
        raise ValueError(f"setting must be one of {SETTINGS}")
    by_template: dict[str, list[Task]] = {}
    for t in tasks:
        by_template.setdefault(t.template_id, []).append(t)
    folds = []
    for fold in range(n_folds):
        train: list[str] = []
        val: list[str] = []
        test: list[str] = []
        if setting == WITHIN_TEMPLATE:
            for tpl_id in sorted(by_template):
                group = sorted(t.id for t in by_template[tpl_id])
                if len(group) < 3:
                    raise TooFewTasks(f"template {tpl_id} has {len(group)} tasks; need >= 3")
                n_train, n_val, n_test = _split_sizes(len(group))
                perm = keyed_rng("folds", setting, seed, fold, tpl_id).permutation(len(group))
                ordered = [group[i] for i in perm]
                test += ordered[:n_test]
                val += ordered[n_test:n_test + n_val]
                train += ordered[n_test + n_val:]
        else:
            tpl_ids = sorted(by_template)
            if len(tpl_ids) < 3:
                raise TooFewTemplates(f"need >= 3 templates, have {len(tpl_ids)}")
            n_train, n_val, n_test = _split_sizes(len(tpl_ids))
            perm = keyed_rng("folds", setting, seed, fold).permutation(len(tpl_ids))
            ordered = [tpl_ids[i] for i in perm]
            for tpl_id in ordered[:n_test]:
                test += sorted(t.id for t in by_template[tpl_id])
            for tpl_id in ordered[n_test:n_test + n_val]:
                val += sorted(t.id for t in by_template[tpl_id])
            for tpl_id in ordered[n_test + n_val:]:
                train += sorted(t.id for t in by_template[tpl_id])
        folds.append(FoldSplit(fold_index=fold, setting=setting,
                               train=tuple(sorted(train)), val=tuple(sorted(val)),
                               test=tuple(sorted(test))))
    return folds


@dataclass(frozen=True)
class AttemptEntry:
    action: Action
    valid: bool
    reward: int | None   # None for invalid entries (they carry no reward)


@dataclass
class AttemptLog:
    task_id: str
    entries: list[AttemptEntry] = field(default_factory=list)
    solved_at: int | None = None   # 1-based rank counting only valid attempts

    def valid_attempts(self) -> int:
        return sum(1 for e in self.entries if e.valid)


@dataclass(frozen=True)
class SuccessCurve:
    s: tuple[float, ...]   # percentages, s[k-1] = success within k attempts

    def __post_init__(self):
        prev = 0.0
        for v in self.s:
            if not 0.0 <= v <= 100.0 or v < prev - 1e-12:
                raise ValueError("success curve must be non-decreasing in [0, 100]")
            prev = v


def success_curve(logs: Iterable[AttemptLog], budget: int = DEFAULT_BUDGET) -> SuccessCurve:
    logs = list(logs)
    if not logs:
        raise ValueError("no attempt logs")
    n = len(logs)
    counts = [0] * (budget + 1)
    for log in logs:
        if log.solved_at is not None and log.solved_at <= budget:
            counts[log.solved_at] += 1
    total = 0
    s = []
    for k in range(1, budget + 1):
        total += counts[k]
        s.append(100.0 * total / n)
    return SuccessCurve(s=tuple(s))


def auccess_weights(budget: int = DEFAULT_BUDGET) -> list[float]:
    return [math.log(k + 1) - math.log(k) for k in range(1, budget + 1)]


def auccess(c: SuccessCurve) -> float:
    """Sum_k w_k s_k / sum_k w_k with w_k = log(k+1) - log(k)."""
    w = auccess_weights(len(c.s))
    return sum(wk * sk for wk, sk in zip(w, c.s)) / sum(w)


def _rank_absolute(values: Sequence[float]) -> list[float]:
    """Ranks of |values| with average ranks for ties."""
    order = sorted(range(len(values)), key=lambda i: abs(values[i]))
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and abs(values[order[j + 1]]) == abs(values[order[i]]):
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def wilcoxon_one_sided(a: Sequence[float], b: Sequence[float]) -> float:
    """P-value for the one-sided alternative "a greater than b", paired.

    Zero differences are discarded; all-zero input gives p = 1.0 by
    convention. Exact conditional null distribution (over sign flips of the
    observed ranks) for n <= 15, normal approximation without continuity
    correction beyond.
    """
    if len(a) != len(b):
        raise ValueError("paired samples must have equal length")
    d = [x - y for x, y in zip(a, b) if x - y != 0.0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = _rank_absolute(d)
    w_plus = sum(r for r, diff in zip(ranks, d) if diff > 0)
    if n <= 15:
        # integer DP over doubled ranks (ties make half-integer ranks)
        ranks2 = [int(round(2 * r)) for r in ranks]
        total = sum(ranks2)
        dist = [0] * (total + 1)
        dist[0] = 1
        for r in ranks2:
            nxt = dist[:]
            for w in range(total - r + 1):
                if dist[w]:
                    nxt[w + r] += dist[w]
            dist = nxt
        threshold = int(round(2 * w_plus))
        count = sum(c for w, c in enumerate(dist) if w >= threshold)
        return count / (1 << n)
    mean = n * (n + 1) / 4.0
    # tie correction on the variance
    seen: dict[float, int] = {}
    for r in ranks:
        seen[r] = seen.get(r, 0) + 1
    tie_term = sum(t ** 3 - t for t in seen.values()) / 48.0
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_term
    z = (w_plus - mean) / math.sqrt(var)
    return 0.5 * math.erfc(z / math.sqrt(2.0))
