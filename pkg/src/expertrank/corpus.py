"""Author-publication corpus: prefixed-record parsing plus author and citation indices.

Input records follow the DBLP/Arnetminer v5 convention: one record per blank-line
separated block, with ``#*`` title, ``#@`` comma-separated authors, ``#t`` year,
``#c`` venue, ``#index`` document id, ``#%`` one cited id per line, and ``#!``
abstract. A canonical JSON-lines export is used for caching.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass
from typing import IO, Iterable, Iterator

log = logging.getLogger(__name__)

_WS = re.compile(r"\s+")


class DataError(ValueError):
    """Malformed or inconsistent input data."""


def normalize_author(name: str) -> str:
    """Trim and collapse internal whitespace; the result is the author's identity."""
    return _WS.sub(" ", name.strip())


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    authors: tuple[str, ...]
    year: int = 0
    venue: str = ""
    abstract: str = ""
    references: tuple[str, ...] = ()


@dataclass
class ParseStats:
    records: int = 0
    parsed: int = 0
    skipped_no_title: int = 0
    skipped_no_authors: int = 0
    skipped_no_id: int = 0
    skipped_bad_year: int = 0

    @property
    def skipped(self) -> int:
        return (
            self.skipped_no_title
            + self.skipped_no_authors
            + self.skipped_no_id
            + self.skipped_bad_year
        )


class Corpus:
    """Documents plus derived indices: author -> doc ids and per-document citation counts.

    Citation counts are in-corpus in-degrees: citation_count[d] is the number of
    corpus documents whose reference list includes d. References pointing outside
    the corpus stay in the document but never contribute to a count.
    """

    def __init__(self, documents: Iterable[Document]):
        self.documents: list[Document] = list(documents)
        self._by_id: dict[str, Document] = {}
        for doc in self.documents:
            if not doc.doc_id:
                raise DataError("document with empty id")
            if doc.doc_id in self._by_id:
                raise DataError(f"duplicate document id {doc.doc_id!r}")
            if not doc.authors:
                raise DataError(f"document {doc.doc_id!r} has no authors")
            if doc.doc_id in doc.references:
                raise DataError(f"document {doc.doc_id!r} references itself")
            self._by_id[doc.doc_id] = doc

        self.author_index: dict[str, list[str]] = {}
        for doc in self.documents:
            for author in doc.authors:
                self.author_index.setdefault(author, []).append(doc.doc_id)

        self.citation_count: dict[str, int] = {d.doc_id: 0 for d in self.documents}
        for doc in self.documents:
            for ref in doc.references:
                if ref in self._by_id:
                    self.citation_count[ref] += 1

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def document(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise KeyError(f"unknown document id {doc_id!r}") from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def authors(self) -> list[str]:
        return list(self.author_index)

    def author_documents(self, author: str) -> list[Document]:
        return [self._by_id[d] for d in self.author_index.get(author, [])]

    def total_citations(self, author: str, restrict_to: Iterable[str] = ()) -> int:
        """Sum of citation counts over the author's documents.

        An empty ``restrict_to`` means no restriction; otherwise only documents
        whose id is in the set are counted.
        """
        allowed = set(restrict_to)
        total = 0
        for doc_id in self.author_index.get(author, []):
            if allowed and doc_id not in allowed:
                continue
            total += self.citation_count[doc_id]
        return total


# ---------- record format ----------

_PREFIXES = ("#index", "#*", "#@", "#t", "#c", "#%", "#!")


def parse_records(stream: Iterable[str], stats: ParseStats | None = None) -> Corpus:
    """Parse prefixed records from an iterable of lines.

    Records missing a title, authors, or an id are skipped and counted in
    ``stats``; a malformed year skips the record too. Duplicate ids raise
    DataError. Authors are comma-split, whitespace-normalized, and de-duplicated
    within a record; self references are dropped.
    """
    stats = stats if stats is not None else ParseStats()
    docs: list[Document] = []
    fields: dict[str, str] = {}
    refs: list[str] = []
    record_line = 0

    def flush() -> None:
        if not fields and not refs:
            return
        stats.records += 1
        title = fields.get("#*", "")
        doc_id = fields.get("#index", "")
        if not title:
            stats.skipped_no_title += 1
            log.warning("line %d: record skipped, no title", record_line)
        elif not doc_id:
            stats.skipped_no_id += 1
            log.warning("line %d: record skipped, no id", record_line)
        else:
            authors: list[str] = []
            for raw in fields.get("#@", "").split(","):
                name = normalize_author(raw)
                if name and name not in authors:
                    authors.append(name)
            if not authors:
                stats.skipped_no_authors += 1
                log.warning("line %d: record skipped, no authors", record_line)
            else:
                year_text = fields.get("#t", "")
                try:
                    year = int(year_text) if year_text else 0
                except ValueError:
                    stats.skipped_bad_year += 1
                    log.warning(
                        "line %d: record skipped, bad year %r",
                        record_line, year_text,
                    )
                else:
                    references: list[str] = []
                    for ref in refs:
                        if ref and ref != doc_id and ref not in references:
                            references.append(ref)
                    docs.append(
                        Document(
                            doc_id=doc_id,
                            title=title,
                            authors=tuple(authors),
                            year=year,
                            venue=fields.get("#c", ""),
                            abstract=fields.get("#!", ""),
                            references=tuple(references),
                        )
                    )
                    stats.parsed += 1
        fields.clear()
        refs.clear()

    for lineno, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip():
            flush()
            continue
        if not fields and not refs:
            record_line = lineno
        for prefix in _PREFIXES:
            if line.startswith(prefix):
                value = line[len(prefix):].strip()
                if prefix == "#%":
                    refs.append(value)
                else:
                    fields[prefix] = value
                break
    flush()
    return Corpus(docs)


# ---------- canonical export ----------

def write_canonical(corpus: Corpus, fh: IO[str]) -> None:
    """One JSON object per line, keyed index/title/authors/year/venue/references/abstract."""
    for doc in corpus:
        fh.write(
            json.dumps(
                {
                    "index": doc.doc_id,
                    "title": doc.title,
                    "authors": list(doc.authors),
                    "year": doc.year,
                    "venue": doc.venue,
                    "references": list(doc.references),
                    "abstract": doc.abstract,
                },
                sort_keys=True,
            )
        )
        fh.write("\n")


def read_canonical(fh: Iterable[str]) -> Corpus:
    docs = []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataError(f"bad canonical record: {exc}") from exc
        docs.append(
            Document(
                doc_id=rec["index"],
                title=rec["title"],
                authors=tuple(rec["authors"]),
                year=int(rec["year"]),
                venue=rec.get("venue", ""),
                abstract=rec.get("abstract", ""),
                references=tuple(rec.get("references", ())),
            )
        )
    return Corpus(docs)


def load_corpus(path: str, stats: ParseStats | None = None) -> Corpus:
    """Read either format by extension: .jsonl is canonical, anything else prefixed records."""
    with open(path, encoding="utf-8", errors="replace") as fh:
        if str(path).endswith(".jsonl"):
            return read_canonical(fh)
        return parse_records(fh, stats)
