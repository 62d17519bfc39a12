"""Synthetic benchmark corpus with planted fields and known experts.

Three fields with disjoint vocabularies; per field, ten designated experts
write and co-write most documents and attract most citations, while fringe
authors contribute a handful each. The designated experts are therefore the
ground truth a retrieval-plus-graph pipeline should recover.
"""
from __future__ import annotations

import argparse
import random
from pathlib import Path

from .corpus import Document

SYNTH_FIELDS: tuple[tuple[str, str], ...] = (
    ("KB", "kernel boosting"),
    ("GP", "graph percolation"),
    ("TR", "topic retrieval"),
)

DOCS_PER_FIELD = 200
EXPERTS_PER_FIELD = 10
FRINGE_PER_FIELD = 40


def field_authors(abbrev: str) -> tuple[list[str], list[str]]:
    experts = [f"{abbrev} Expert {i:02d}" for i in range(EXPERTS_PER_FIELD)]
    fringe = [f"{abbrev} Author {i:02d}" for i in range(FRINGE_PER_FIELD)]
    return experts, fringe


def _field_terms(abbrev: str, phrase: str) -> list[str]:
    return phrase.split() + [f"{abbrev.lower()}term{j:02d}" for j in range(20)]


def generate(seed: int = 0) -> tuple[list[Document], dict[str, list[str]]]:
    """Documents plus the per-field expert ground truth."""
    rng = random.Random(seed)
    docs: list[Document] = []
    experts_by_field: dict[str, list[str]] = {}
    next_id = 0
    for abbrev, phrase in SYNTH_FIELDS:
        experts, fringe = field_authors(abbrev)
        experts_by_field[abbrev] = experts
        terms = _field_terms(abbrev, phrase)
        field_ids: list[str] = []
        led_by_experts: list[str] = []
        for d in range(DOCS_PER_FIELD):
            doc_id = str(next_id)
            next_id += 1
            if rng.random() < 0.9:
                authors = rng.sample(experts, rng.randint(2, 3))
                if rng.random() < 0.5:
                    authors.append(rng.choice(fringe))
                led_by_experts.append(doc_id)
            else:
                authors = rng.sample(fringe, rng.randint(2, 3))
            title = f"{phrase} {' '.join(rng.sample(terms, 3))}"
            abstract = ""
            if rng.random() < 0.8:
                abstract = " ".join(rng.choice(terms) for _ in range(20))
            cited: tuple[str, ...] = ()
            if field_ids:
                pool = led_by_experts if (led_by_experts and rng.random() < 0.8) else field_ids
                n_refs = min(rng.randint(0, 4), len(pool))
                cited = tuple(sorted(rng.sample(pool, n_refs)))
            docs.append(Document(
                doc_id=doc_id,
                title=title,
                authors=tuple(authors),
                year=1996 + d % 15,
                venue=f"Conf{abbrev}",
                abstract=abstract,
                references=cited,
            ))
            field_ids.append(doc_id)
    return docs, experts_by_field


def write_arnetminer(docs: list[Document], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for doc in docs:
            fh.write(f"#index {doc.doc_id}\n")
            fh.write(f"#* {doc.title}\n")
            fh.write(f"#@ {', '.join(doc.authors)}\n")
            fh.write(f"#t {doc.year}\n")
            fh.write(f"#c {doc.venue}\n")
            for ref in doc.references:
                fh.write(f"#% {ref}\n")
            if doc.abstract:
                fh.write(f"#! {doc.abstract}\n")
            fh.write("\n")


_CONFIG = """\
[corpus]
path = corpus.txt

[experts]
dir = experts
fields = KB GP TR
{queries}

[model]
kind = lsi
k = 6 12
rho = 0.001 0.01
gamma = 0.0 0.3 0.6
mode = binary

[cascade]
p = 0.05
reps = 100
seeds = 100

[run]
seed = {seed}
cache_dir = cache
out_dir = out
threads = 1
"""


def write_benchmark(out_dir: str | Path, seed: int = 0) -> Path:
    """Corpus file, expert lists, and a ready-to-run config under out_dir;
    returns the config path."""
    out = Path(out_dir)
    (out / "experts").mkdir(parents=True, exist_ok=True)
    docs, experts_by_field = generate(seed)
    write_arnetminer(docs, out / "corpus.txt")
    for abbrev, experts in experts_by_field.items():
        text = "\n".join(experts) + "\n"
        (out / "experts" / f"{abbrev}.txt").write_text(text, encoding="utf-8")
    queries = "\n".join(
        f"query.{abbrev.lower()} = {phrase}" for abbrev, phrase in SYNTH_FIELDS
    )
    config = out / "config.ini"
    config.write_text(_CONFIG.format(queries=queries, seed=seed), encoding="utf-8")
    return config


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="python -m expertrank.synth",
        description="Write the synthetic benchmark corpus, expert lists, "
                    "and config.",
    )
    parser.add_argument("out_dir", help="directory to create the benchmark in")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    config = write_benchmark(args.out_dir, args.seed)
    print(f"config: {config}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
