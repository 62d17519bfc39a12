"""Ranked author lists: the value type every scorer produces and its CSV forms."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Iterable, Mapping

KIND_TOPIC = "topic"
KIND_CITATION = "citation"
KIND_BETWEENNESS = "betweenness"
KIND_CLOSENESS = "closeness"
KIND_PAGERANK = "pagerank"
KIND_DEGREE = "degree"
KIND_INFLUENCE = "influence"
KIND_HUBSCORE = "hubscore"
KIND_AGGREGATE = "aggregate"

KINDS = (
    KIND_TOPIC,
    KIND_CITATION,
    KIND_BETWEENNESS,
    KIND_CLOSENESS,
    KIND_PAGERANK,
    KIND_DEGREE,
    KIND_INFLUENCE,
    KIND_HUBSCORE,
    KIND_AGGREGATE,
)

COLUMN_LABELS = {
    KIND_TOPIC: "Topic",
    KIND_CITATION: "Cit.",
    KIND_BETWEENNESS: "Bet.",
    KIND_CLOSENESS: "Cls",
    KIND_PAGERANK: "PR",
    KIND_DEGREE: "Dgr",
    KIND_INFLUENCE: "Inf.",
    KIND_HUBSCORE: "HS",
    KIND_AGGREGATE: "MC2",
}


@dataclass(frozen=True)
class Ranking:
    """Authors with scores in non-increasing score order.

    ``partial`` marks lists that deliberately omit unranked authors (the
    influence ranking keeps only the selected seeds).
    """

    items: tuple[tuple[str, float], ...]
    kind: str
    partial: bool = False

    def __post_init__(self) -> None:
        seen = set()
        prev = None
        for name, score in self.items:
            if name in seen:
                raise ValueError(f"duplicate author {name!r} in ranking")
            seen.add(name)
            if prev is not None and score > prev:
                raise ValueError("ranking scores must be non-increasing")
            prev = score

    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.items)

    def scores(self) -> dict[str, float]:
        return dict(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def top(self, n: int) -> tuple[str, ...]:
        return self.names()[:n]


def from_scores(
    scores: Mapping[str, float] | Iterable[tuple[str, float]],
    kind: str,
    partial: bool = False,
) -> Ranking:
    """Sort score-descending; ties break lexicographically by author name."""
    pairs = scores.items() if isinstance(scores, Mapping) else scores
    ordered = sorted(pairs, key=lambda kv: (-kv[1], kv[0]))
    return Ranking(items=tuple((n, float(s)) for n, s in ordered), kind=kind, partial=partial)


# ---------- delimited forms ----------

def write_ranking_csv(ranking: Ranking, fh: IO[str]) -> None:
    """Columns rank, author, score, kind; rank starts at 1."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["rank", "author", "score", "kind"])
    for rank, (name, score) in enumerate(ranking.items, start=1):
        writer.writerow([rank, name, repr(score), ranking.kind])


def read_ranking_csv(fh: Iterable[str]) -> Ranking:
    reader = csv.reader(fh)
    header = next(reader, None)
    if header != ["rank", "author", "score", "kind"]:
        raise ValueError("not a ranking file")
    items = []
    kind = ""
    for row in reader:
        if not row:
            continue
        _, name, score, kind = row
        items.append((name, float(score)))
    return Ranking(items=tuple(items), kind=kind, partial=kind == KIND_INFLUENCE)


def write_scores_csv(rankings: Iterable[Ranking], fh: IO[str]) -> None:
    """Flat score dump across kinds: author, kind, score, rank."""
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["author", "kind", "score", "rank"])
    for ranking in rankings:
        for rank, (name, score) in enumerate(ranking.items, start=1):
            writer.writerow([name, ranking.kind, repr(score), rank])
