"""Text preparation: tokens, stems, n-grams, vocabulary, and the term-document matrix.

Documents contribute terms from title and abstract. Tokens are lowercased,
split on non-alphanumerics, and dropped when shorter than two characters;
stop words are removed on the surface form before stemming, and any n-gram
whose constituents include a stop word is discarded. Terms are unigrams and
space-joined bigrams over Porter stems. A term enters the vocabulary when its
document frequency is at least rho * corpus size.
"""
from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Mapping, Sequence

import numpy as np
from scipy import sparse

from .corpus import Corpus, DataError, Document
from .porter import porter_stem

_TOKEN = re.compile(r"[a-z0-9]+")

MODES = ("binary", "tfidf")


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if len(t) >= 2]


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Read one stop word per line; defaults to the packaged English IR list."""
    if path is None:
        data = resources.files("expertrank.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        data = Path(path).read_text("utf-8")
    return frozenset(w.strip().lower() for w in data.splitlines() if w.strip())


def preprocess(text: str, stopwords: frozenset[str] = frozenset()) -> list[str]:
    return [porter_stem(t) for t in tokenize(text) if t not in stopwords]


def extract_ngrams(tokens: Sequence[str], max_n: int = 2) -> Counter[str]:
    """Multiset of contiguous 1..max_n-grams; longer grams join on a single space."""
    grams: Counter[str] = Counter(tokens)
    for n in range(2, max_n + 1):
        for i in range(len(tokens) - n + 1):
            grams[" ".join(tokens[i : i + n])] += 1
    return grams


def document_terms(
    doc: Document, stopwords: frozenset[str] = frozenset(), max_n: int = 2
) -> Counter[str]:
    """Term counts for one document; n-grams never span the title/abstract boundary."""
    terms = extract_ngrams(preprocess(doc.title, stopwords), max_n)
    terms.update(extract_ngrams(preprocess(doc.abstract, stopwords), max_n))
    if stopwords:
        # a stem may collide with a stop word; drop any gram with such a part
        for term in [t for t in terms if any(p in stopwords for p in t.split(" "))]:
            del terms[term]
    return terms


def corpus_terms(
    corpus: Corpus, stopwords: frozenset[str] = frozenset(), max_n: int = 2
) -> list[Counter[str]]:
    return [document_terms(doc, stopwords, max_n) for doc in corpus]


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    term_index: dict[str, int]
    doc_freq: tuple[int, ...]
    corpus_size: int

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.term_index


def build_vocabulary(
    corpus: Corpus,
    rho: float,
    stopwords: frozenset[str] = frozenset(),
    max_n: int = 2,
    doc_terms: Sequence[Counter[str]] | None = None,
) -> Vocabulary:
    """Admit terms with doc_freq / m >= rho; terms are sorted lexicographically."""
    if not 0.0 < rho <= 1.0:
        raise ValueError(f"rho must be in (0, 1], got {rho}")
    m = len(corpus)
    if m == 0:
        raise DataError("empty corpus")
    if doc_terms is None:
        doc_terms = corpus_terms(corpus, stopwords, max_n)
    df: Counter[str] = Counter()
    for terms in doc_terms:
        df.update(set(terms))
    admitted = sorted(t for t, n in df.items() if n / m >= rho)
    return Vocabulary(
        terms=tuple(admitted),
        term_index={t: i for i, t in enumerate(admitted)},
        doc_freq=tuple(df[t] for t in admitted),
        corpus_size=m,
    )


@dataclass(frozen=True)
class TermDocMatrix:
    """Sparse terms x documents matrix; column j belongs to doc_ids[j]."""

    vocabulary: Vocabulary
    doc_ids: tuple[str, ...]
    mode: str
    matrix: sparse.csc_array

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape


def _idf(vocab: Vocabulary) -> np.ndarray:
    m = vocab.corpus_size
    return np.log(m / np.asarray(vocab.doc_freq, dtype=float))


def build_matrix(
    corpus: Corpus,
    vocab: Vocabulary,
    mode: str = "binary",
    stopwords: frozenset[str] = frozenset(),
    max_n: int = 2,
    doc_terms: Sequence[Counter[str]] | None = None,
) -> TermDocMatrix:
    """Binary: entry 1 iff the term occurs in the document. tfidf: the term
    frequency is normalized by the document's own maximum count (1 for an
    empty document) and multiplied by ln(m / doc_freq)."""
    if mode not in MODES:
        raise ValueError(f"unknown matrix mode {mode!r}")
    if doc_terms is None:
        doc_terms = corpus_terms(corpus, stopwords, max_n)
    idf = _idf(vocab) if mode == "tfidf" else None
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    for j, terms in enumerate(doc_terms):
        present = [(vocab.term_index[t], c) for t, c in terms.items() if t in vocab.term_index]
        if not present:
            continue
        if mode == "binary":
            for i, _ in present:
                rows.append(i)
                cols.append(j)
                vals.append(1.0)
        else:
            max_count = max(c for _, c in present)
            for i, c in present:
                v = (c / max_count) * idf[i]
                if v != 0.0:
                    rows.append(i)
                    cols.append(j)
                    vals.append(v)
    matrix = sparse.csc_array(
        (vals, (rows, cols)), shape=(len(vocab), len(corpus)), dtype=np.float64
    )
    return TermDocMatrix(
        vocabulary=vocab,
        doc_ids=tuple(d.doc_id for d in corpus),
        mode=mode,
        matrix=matrix,
    )


def text_vector(
    text: str,
    vocab: Vocabulary,
    stopwords: frozenset[str] = frozenset(),
    mode: str = "binary",
    max_n: int = 2,
) -> np.ndarray:
    """Dense vocabulary-sized vector for free text, weighted like the matrix."""
    if mode not in MODES:
        raise ValueError(f"unknown matrix mode {mode!r}")
    terms = extract_ngrams(preprocess(text, stopwords), max_n)
    if stopwords:
        for term in [t for t in terms if any(p in stopwords for p in t.split(" "))]:
            del terms[term]
    vec = np.zeros(len(vocab), dtype=np.float64)
    present = [(vocab.term_index[t], c) for t, c in terms.items() if t in vocab.term_index]
    if not present:
        return vec
    if mode == "binary":
        for i, _ in present:
            vec[i] = 1.0
    else:
        idf = _idf(vocab)
        max_count = max(c for _, c in present)
        for i, c in present:
            vec[i] = (c / max_count) * idf[i]
    return vec


# ---------- matrix cache ----------

def save_matrix(tdm: TermDocMatrix, path: str | Path) -> None:
    """Triplet file (term index, doc index, value) plus a .vocab sidecar."""
    path = Path(path)
    coo = tdm.matrix.tocoo()
    order = np.lexsort((coo.row, coo.col))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{tdm.mode}\t{tdm.shape[0]}\t{tdm.shape[1]}\n")
        fh.write("\t".join(tdm.doc_ids) + "\n")
        for idx in order:
            fh.write(f"{coo.row[idx]}\t{coo.col[idx]}\t{float(coo.data[idx])!r}\n")
    with open(path.with_suffix(path.suffix + ".vocab"), "w", encoding="utf-8") as fh:
        fh.write(f"{tdm.vocabulary.corpus_size}\n")
        for term, df in zip(tdm.vocabulary.terms, tdm.vocabulary.doc_freq):
            fh.write(f"{term}\t{df}\n")


def load_matrix(path: str | Path) -> TermDocMatrix:
    path = Path(path)
    with open(path.with_suffix(path.suffix + ".vocab"), encoding="utf-8") as fh:
        corpus_size = int(fh.readline())
        terms: list[str] = []
        dfs: list[int] = []
        for line in fh:
            if not line.strip():
                continue
            term, df = line.rstrip("\n").split("\t")
            terms.append(term)
            dfs.append(int(df))
    vocab = Vocabulary(
        terms=tuple(terms),
        term_index={t: i for i, t in enumerate(terms)},
        doc_freq=tuple(dfs),
        corpus_size=corpus_size,
    )
    with open(path, encoding="utf-8") as fh:
        mode, n_terms, n_docs = fh.readline().rstrip("\n").split("\t")
        doc_line = fh.readline().rstrip("\n")
        doc_ids = tuple(doc_line.split("\t")) if doc_line else ()
        rows, cols, vals = [], [], []
        for line in fh:
            if not line.strip():
                continue
            i, j, v = line.rstrip("\n").split("\t")
            rows.append(int(i))
            cols.append(int(j))
            vals.append(float(v))
    matrix = sparse.csc_array(
        (vals, (rows, cols)), shape=(int(n_terms), int(n_docs)), dtype=np.float64
    )
    if len(terms) != int(n_terms):
        raise DataError("matrix/vocabulary size mismatch")
    return TermDocMatrix(vocabulary=vocab, doc_ids=doc_ids, mode=mode, matrix=matrix)
