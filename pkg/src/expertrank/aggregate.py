"""Markov-chain rank aggregation over full or partial lists, and greedy
selection of which rankings to fuse by training ap@20.

Each input list induces a chain where state x steps uniformly to the items
that list ranks at least as high as x. Rows are averaged over exactly the
lists containing the state, then a uniform teleport keeps the chain ergodic;
the stationary distribution orders the fused list.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import ranking as rk
from .centrality import ConvergenceError
from .evaluation import average_precision_at
from .ranking import Ranking, from_scores

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransitionMatrix:
    states: tuple[str, ...]
    rows: np.ndarray

    def __post_init__(self) -> None:
        n = len(self.states)
        if self.rows.shape != (n, n):
            raise ValueError(f"matrix shape {self.rows.shape} != ({n}, {n})")
        if np.any(self.rows < 0):
            raise ValueError("negative transition probability")
        sums = self.rows.sum(axis=1)
        worst = float(np.abs(sums - 1.0).max()) if n else 0.0
        if worst > 1e-12:
            raise ValueError(f"rows are not stochastic (off by {worst:.3e})")


@dataclass(frozen=True)
class AggregateScore:
    states: tuple[str, ...]
    x: np.ndarray


def _as_names(lst: Ranking | Sequence[str]) -> list[str]:
    return list(lst.names()) if isinstance(lst, Ranking) else list(lst)


def list_transition(items: Sequence[str], states: Sequence[str]) -> dict[str, np.ndarray]:
    """Rows of one list's chain: the item at position i moves uniformly over
    the i+1 items ranked at or above it. Items outside the list have no row
    here; combine() averages them from the lists that do contain them."""
    index = {s: j for j, s in enumerate(states)}
    if len(set(items)) != len(items):
        raise ValueError("duplicate items in ranked list")
    missing = [it for it in items if it not in index]
    if missing:
        raise ValueError(f"list items missing from the state universe: {missing[:3]}")
    rows: dict[str, np.ndarray] = {}
    positions: list[int] = []
    for i, item in enumerate(items):
        positions.append(index[item])
        row = np.zeros(len(states))
        row[positions] = 1.0 / (i + 1)
        rows[item] = row
    return rows


def combine(
    lists: Sequence[Ranking | Sequence[str]],
    states: Sequence[str],
    alpha: float = 0.01,
) -> TransitionMatrix:
    """Mean of the per-list rows, each state averaging only the lists that
    contain it, then blended with the uniform distribution by alpha."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must be in [0, 1), got {alpha}")
    states = tuple(states)
    n = len(states)
    index = {s: j for j, s in enumerate(states)}
    R = np.zeros((n, n))
    counts = np.zeros(n)
    for lst in lists:
        for item, row in list_transition(_as_names(lst), states).items():
            i = index[item]
            R[i] += row
            counts[i] += 1
    if np.any(counts == 0):
        orphan = states[int(np.argmax(counts == 0))]
        raise ValueError(f"state {orphan!r} appears in no input list")
    R /= counts[:, None]
    R = (1.0 - alpha) * R + alpha / n
    return TransitionMatrix(states=states, rows=R)


def stationary(
    matrix: TransitionMatrix, tol: float = 1e-10, max_iter: int = 100000
) -> AggregateScore:
    """Power-iterated fixed point of x = R^T x with sum(x) = 1."""
    n = len(matrix.states)
    if n == 0:
        raise ValueError("empty state universe")
    RT = matrix.rows.T.copy()
    x = np.full(n, 1.0 / n)
    residual = np.inf
    for _ in range(max_iter):
        nxt = RT @ x
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - x).sum())
        x = nxt
        if residual < tol:
            return AggregateScore(states=matrix.states, x=x)
    raise ConvergenceError("stationary", residual, max_iter)


def mc2(
    lists: Sequence[Ranking | Sequence[str]], alpha: float = 0.01
) -> Ranking:
    """Fuse the lists: stationary mass orders the union of their items."""
    if not lists:
        raise ValueError("no lists to aggregate")
    universe: set[str] = set()
    for lst in lists:
        universe.update(_as_names(lst))
    states = tuple(sorted(universe))
    score = stationary(combine(lists, states, alpha))
    return from_scores(dict(zip(score.states, score.x)), rk.KIND_AGGREGATE)


def greedy_fuse(
    candidates: Sequence[Ranking],
    train_experts: Iterable[str],
    depth: int = 20,
    alpha: float = 0.01,
) -> tuple[tuple[Ranking, ...], Ranking]:
    """Start from the best single ranking by ap@depth on the training experts
    and keep adding whichever candidate raises the fused score most, stopping
    at the first round with no strict gain. A single chosen ranking is
    returned as-is rather than run through the chain."""
    if not candidates:
        raise ValueError("no candidate rankings")
    experts = set(train_experts)
    if not experts:
        raise ValueError("empty training expert set")

    def ap(r: Ranking) -> float:
        return average_precision_at(r, experts, depth)

    singles = [ap(c) for c in candidates]
    best = 0
    for i in range(1, len(candidates)):
        if singles[i] > singles[best]:
            best = i
    chosen = [candidates[best]]
    fused = candidates[best]
    current = ap(fused)
    remaining = [c for i, c in enumerate(candidates) if i != best]
    log.info("fuse: start %s ap@%d=%.4f", fused.kind, depth, current)
    while remaining:
        trials = [(c, mc2(chosen + [c], alpha)) for c in remaining]
        gains = [ap(f) for _, f in trials]
        pick = int(np.argmax(gains))
        if gains[pick] <= current:
            break
        cand, fused = trials[pick]
        chosen.append(cand)
        current = gains[pick]
        remaining = [c for c in remaining if c is not cand]
        log.info("fuse: add %s ap@%d=%.4f", cand.kind, depth, current)
    return tuple(chosen), fused
