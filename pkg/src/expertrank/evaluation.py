"""Expert-list splits and ranked-retrieval metrics: p@N, ap@N, MAP."""
from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import IO, Iterable, Mapping, Sequence

from .corpus import normalize_author
from .ranking import Ranking

EVAL_NS: tuple[int, ...] = tuple(range(5, 55, 5))


@dataclass(frozen=True)
class ExpertSplit:
    field: str
    train: frozenset[str]
    test: frozenset[str]
    seed: int

    def __post_init__(self) -> None:
        if self.train & self.test:
            raise ValueError("train and test sets overlap")


def split_experts(experts: Iterable[str], seed: int, field: str = "") -> ExpertSplit:
    """Half/half random split, deterministic per seed; an odd count puts the
    extra expert in train."""
    names = sorted(set(experts))
    if len(names) < 2:
        raise ValueError(f"need at least 2 experts to split, got {len(names)}")
    random.Random(seed).shuffle(names)
    cut = math.ceil(len(names) / 2)
    return ExpertSplit(
        field=field, train=frozenset(names[:cut]), test=frozenset(names[cut:]),
        seed=seed,
    )


def read_expert_list(fh: IO[str]) -> list[str]:
    """One author name per line; blanks skipped, names whitespace-normalized."""
    seen: dict[str, None] = {}
    for line in fh:
        name = normalize_author(line)
        if name:
            seen.setdefault(name, None)
    return list(seen)


# ---------- metrics ----------

def filter_ranking(ranking: Ranking, excluded: Iterable[str]) -> Ranking:
    """Drop the excluded authors, keeping the relative order of the rest."""
    drop = set(excluded)
    items = tuple(it for it in ranking.items if it[0] not in drop)
    return Ranking(items=items, kind=ranking.kind, partial=ranking.partial)


def _names(ranking: Ranking | Sequence[str]) -> Sequence[str]:
    return ranking.names() if isinstance(ranking, Ranking) else ranking


def precision_at(ranking: Ranking | Sequence[str], experts: Iterable[str], n: int) -> float:
    """Experts among the first n entries, divided by n. The denominator stays
    n for lists shorter than n, so truncated lists cannot score 1."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    names = _names(ranking)
    expert_set = set(experts)
    hits = sum(1 for name in names[:n] if name in expert_set)
    return hits / n


def average_precision_at(
    ranking: Ranking | Sequence[str], experts: Iterable[str], n: int
) -> float:
    """sum of p@i over the expert positions i <= n, divided by the total
    number of experts R (not by the hits), so ap@N tops out below 1 whenever
    R exceeds N."""
    if n < 1:
        raise ValueError(f"N must be >= 1, got {n}")
    expert_set = set(experts)
    if not expert_set:
        raise ValueError("empty expert set")
    names = _names(ranking)
    total = 0.0
    hits = 0
    for i, name in enumerate(names[:n], start=1):
        if name in expert_set:
            hits += 1
            total += hits / i
    return total / len(expert_set)


def map_at(field_scores: Iterable[float]) -> float:
    scores = list(field_scores)
    if not scores:
        raise ValueError("no fields to average")
    return sum(scores) / len(scores)


# ---------- report ----------

@dataclass(frozen=True)
class EvalReport:
    """ap@N per field and ranking kind, for N in EVAL_NS, plus the kinds each
    field's aggregate fused (in selection order)."""

    kinds: tuple[str, ...]
    per_field: Mapping[str, Mapping[str, Mapping[int, float]]]
    chosen: Mapping[str, tuple[str, ...]]
    ns: tuple[int, ...] = EVAL_NS

    def fields(self) -> list[str]:
        return sorted(self.per_field)

    def map_score(self, kind: str, n: int) -> float:
        return map_at(self.per_field[f][kind][n] for f in self.fields())

    def to_json(self) -> str:
        payload = {
            "ns": list(self.ns),
            "kinds": list(self.kinds),
            "fields": {
                f: {k: {str(n): v for n, v in by_n.items()} for k, by_n in by_kind.items()}
                for f, by_kind in self.per_field.items()
            },
            "chosen": {f: list(ks) for f, ks in self.chosen.items()},
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        payload = json.loads(text)
        return cls(
            kinds=tuple(payload["kinds"]),
            per_field={
                f: {k: {int(n): v for n, v in by_n.items()} for k, by_n in by_kind.items()}
                for f, by_kind in payload["fields"].items()
            },
            chosen={f: tuple(ks) for f, ks in payload["chosen"].items()},
            ns=tuple(payload["ns"]),
        )


def evaluate_rankings(
    rankings: Mapping[str, Ranking],
    experts: Iterable[str],
    ns: Sequence[int] = EVAL_NS,
) -> dict[str, dict[int, float]]:
    """ap@N for every ranking kind against one expert set."""
    expert_set = set(experts)
    return {
        kind: {n: average_precision_at(r, expert_set, n) for n in ns}
        for kind, r in rankings.items()
    }
