"""Field-query retrieval: match documents above a cosine threshold, score and
select candidate authors, and pick model parameters by training-expert coverage.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import ranking as rk
from .corpus import Corpus
from .textprep import TermDocMatrix, Vocabulary, build_matrix, build_vocabulary, corpus_terms, text_vector
from .topics import LsiModel, TopicModel, lda_fit, lda_project, lsi_project, randomized_svd

log = logging.getLogger(__name__)

# Expert-list field abbreviations; files in an expert directory are named
# <abbreviation>.txt and the query text is the category name.
FIELDS: dict[str, str] = {
    "BS": "Boosting",
    "CV": "Computer Vision",
    "CRY": "Cryptography",
    "DM": "Data Mining",
    "IE": "Information Extraction",
    "IA": "Intelligent Agents",
    "ML": "Machine Learning",
    "NLP": "Natural Language Processing",
    "NN": "Neural Networks",
    "OA": "Ontology Alignment",
    "PL": "Planning",
    "SW": "Semantic Web",
    "SVM": "Support Vector Machines",
}


@dataclass(frozen=True)
class ModelParams:
    """A grid point: topic model family plus its retrieval knobs."""

    model_kind: str
    k: int
    rho: float
    gamma: float

    def __post_init__(self) -> None:
        if self.model_kind not in ("lsi", "lda"):
            raise ValueError(f"unknown model kind {self.model_kind!r}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")


@dataclass(frozen=True)
class QueryResult:
    field: str
    matches: tuple[tuple[str, float], ...]
    author_scores: Mapping[str, float]
    candidates: tuple[str, ...]


# ---------- embedding ----------

def _document_embeddings(model: TopicModel) -> np.ndarray:
    if isinstance(model, LsiModel):
        return model.Q
    return model.doc_topic


def _embed_query(model: TopicModel, vec: np.ndarray) -> np.ndarray:
    if isinstance(model, LsiModel):
        return lsi_project(model, vec)
    return lda_project(model, vec)


# ---------- query ----------

def query_documents(
    model: TopicModel,
    matrix: TermDocMatrix,
    query_text: str,
    gamma: float,
    stopwords: frozenset[str] = frozenset(),
) -> list[tuple[str, float]]:
    """Documents with cosine similarity strictly above gamma, most similar
    first. The query goes through the same preprocessing as the documents;
    a query with no in-vocabulary terms matches nothing (logged).
    """
    vec = text_vector(query_text, matrix.vocabulary, stopwords, mode=matrix.mode)
    if not vec.any():
        log.warning("query %r has no in-vocabulary terms", query_text)
        return []
    q = _embed_query(model, vec)
    emb = _document_embeddings(model)
    doc_norms = np.linalg.norm(emb, axis=1)
    q_norm = float(np.linalg.norm(q))
    if q_norm == 0.0:
        log.warning("query %r embeds to the zero vector", query_text)
        return []
    sims = np.zeros(emb.shape[0])
    nz = doc_norms > 0.0
    sims[nz] = (emb[nz] @ q) / (doc_norms[nz] * q_norm)
    picked = [
        (matrix.doc_ids[i], float(sims[i]))
        for i in np.flatnonzero(sims > gamma)
    ]
    picked.sort(key=lambda t: (-t[1], t[0]))
    return picked


def score_authors(
    corpus: Corpus, matches: Sequence[tuple[str, float]]
) -> dict[str, float]:
    """Sum each author's matched-document similarities; a coauthored match
    counts fully for every listed author."""
    scores: dict[str, float] = {}
    for doc_id, sim in matches:
        for author in corpus.document(doc_id).authors:
            scores[author] = scores.get(author, 0.0) + sim
    return scores


def select_candidates(scores: Mapping[str, float], x: int) -> list[str]:
    """Top-x authors by score, ties broken by name. Fewer than x scored
    authors returns them all (logged)."""
    if x < 1:
        raise ValueError(f"x must be >= 1, got {x}")
    ordered = sorted(scores, key=lambda a: (-scores[a], a))
    if len(ordered) < x:
        log.warning("only %d candidate authors for limit %d", len(ordered), x)
    return ordered[:x]


def candidate_limit(n_train_experts: int, multiplier: int = 10) -> int:
    if n_train_experts < 1:
        raise ValueError("need at least one training expert")
    return multiplier * n_train_experts


def coverage(candidates: Iterable[str], experts: Iterable[str]) -> float:
    """Fraction of the expert set present among the candidates."""
    expert_set = set(experts)
    if not expert_set:
        raise ValueError("empty expert set")
    return len(set(candidates) & expert_set) / len(expert_set)


def run_query(
    corpus: Corpus,
    model: TopicModel,
    matrix: TermDocMatrix,
    field: str,
    gamma: float,
    x: int,
    stopwords: frozenset[str] = frozenset(),
) -> QueryResult:
    matches = query_documents(model, matrix, field, gamma, stopwords)
    scores = score_authors(corpus, matches)
    cands = select_candidates(scores, x)
    return QueryResult(
        field=field,
        matches=tuple(matches),
        author_scores=scores,
        candidates=tuple(cands),
    )


def topic_ranking(result: QueryResult) -> rk.Ranking:
    """The candidate list as a ranking, the no-graph baseline order."""
    items = tuple((a, result.author_scores[a]) for a in result.candidates)
    return rk.Ranking(items=items, kind=rk.KIND_TOPIC, partial=True)


# ---------- model selection ----------

def fit_model(
    kind: str, matrix: TermDocMatrix, k: int, seed: int = 0
) -> TopicModel:
    if kind == "lsi":
        return randomized_svd(matrix.matrix, k, seed=seed)
    if kind == "lda":
        return lda_fit(matrix.matrix, k, seed=seed)
    raise ValueError(f"unknown model kind {kind!r}")


def model_select(
    corpus: Corpus,
    grid: Sequence[ModelParams],
    train_by_field: Mapping[str, set[str]],
    stopwords: frozenset[str] = frozenset(),
    mode: str = "binary",
    multiplier: int = 10,
    seed: int = 0,
    fit: Callable[[str, TermDocMatrix, int, int], TopicModel] = fit_model,
) -> ModelParams:
    """Grid point maximizing the total number of training experts recovered
    among the candidates, summed over fields; ties go to smaller k, then
    larger rho, then smaller gamma. Vocabulary and fitted models are shared
    across grid points that agree on rho (and on k).
    """
    if not grid:
        raise ValueError("empty parameter grid")
    if not train_by_field:
        raise ValueError("no fields to select over")
    doc_terms = corpus_terms(corpus, stopwords)
    vocabs: dict[float, Vocabulary] = {}
    matrices: dict[float, TermDocMatrix] = {}
    models: dict[tuple[str, float, int], TopicModel] = {}

    def covered(params: ModelParams) -> int:
        if params.rho not in matrices:
            vocabs[params.rho] = build_vocabulary(
                corpus, params.rho, stopwords, doc_terms=doc_terms
            )
            matrices[params.rho] = build_matrix(
                corpus, vocabs[params.rho], mode=mode, doc_terms=doc_terms
            )
        matrix = matrices[params.rho]
        key = (params.model_kind, params.rho, params.k)
        if key not in models:
            models[key] = fit(params.model_kind, matrix, params.k, seed)
        model = models[key]
        total = 0
        for field, experts in train_by_field.items():
            x = candidate_limit(len(experts), multiplier)
            res = run_query(
                corpus, model, matrix, field, params.gamma, x, stopwords
            )
            total += len(set(res.candidates) & experts)
        return total

    scored = [(covered(p), p) for p in grid]
    best = max(c for c, _ in scored)
    winners = [p for c, p in scored if c == best]
    winners.sort(key=lambda p: (p.k, -p.rho, p.gamma))
    choice = winners[0]
    log.info(
        "model selection: %s k=%d rho=%g gamma=%g covers %d training experts",
        choice.model_kind, choice.k, choice.rho, choice.gamma, best,
    )
    return choice
