"""End-to-end orchestration: config, stage caching, and the per-field run.

Stages are cached content-addressed: each cache file name embeds a SHA-256
over the stage inputs and parameters, so editing any upstream input or knob
invalidates exactly the stages that depend on it. All randomness flows from
the seeds in the config, making reruns byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, replace
from configparser import ConfigParser
from pathlib import Path
from typing import Iterator, Mapping

from . import ranking as rk
from .aggregate import greedy_fuse, mc2
from .centrality import (
    CascadeParams,
    betweenness,
    celf_select,
    citation_scores,
    closeness,
    degree_scores,
    hub_scores,
    pagerank,
)
from .corpus import Corpus, DataError, ParseStats, load_corpus, read_canonical, write_canonical
from .evaluation import (
    EVAL_NS,
    EvalReport,
    ExpertSplit,
    average_precision_at,
    evaluate_rankings,
    filter_ranking,
    read_expert_list,
    split_experts,
)
from .graph import DistanceView, build_graph
from .ranking import Ranking, write_ranking_csv
from .report import write_report
from .retrieval import (
    FIELDS,
    ModelParams,
    candidate_limit,
    fit_model,
    model_select,
    run_query,
    topic_ranking,
)
from .textprep import (
    TermDocMatrix,
    build_matrix,
    build_vocabulary,
    load_matrix,
    load_stopwords,
    save_matrix,
)
from .topics import TopicModel, load_lda, load_lsi, save_lda, save_lsi

log = logging.getLogger(__name__)


# ---------- configuration ----------

def _split_values(raw: str) -> list[str]:
    return raw.replace(",", " ").split()


@dataclass(frozen=True)
class PipelineConfig:
    corpus_path: Path
    expert_dir: Path
    fields: tuple[str, ...]
    queries: Mapping[str, str]
    model_kind: str
    k_grid: tuple[int, ...]
    rho_grid: tuple[float, ...]
    gamma_grid: tuple[float, ...]
    mode: str
    ngrams: int
    multiplier: int
    cascade: CascadeParams
    damping: float
    alpha: float
    fuse_depth: int
    split_seed: int
    seed: int
    cache_dir: Path
    out_dir: Path
    threads: int

    def validate(self) -> None:
        if not self.corpus_path.exists():
            raise DataError(f"corpus file not found: {self.corpus_path}")
        if not self.expert_dir.is_dir():
            raise DataError(f"expert directory not found: {self.expert_dir}")
        if not self.fields:
            raise DataError("no fields configured")
        for field in self.fields:
            path = expert_file(self.expert_dir, field)
            if not path.exists():
                raise DataError(f"expert list not found: {path}")
        if self.model_kind not in ("lsi", "lda"):
            raise DataError(f"unknown model kind {self.model_kind!r}")
        if not (self.k_grid and self.rho_grid and self.gamma_grid):
            raise DataError("empty parameter grid")
        if self.mode not in ("binary", "tfidf"):
            raise DataError(f"unknown matrix mode {self.mode!r}")

    def effective_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def expert_file(expert_dir: Path, field: str) -> Path:
    return expert_dir / f"{field}.txt"


def load_config(
    path: str | Path, overrides: Mapping[str, str] | None = None
) -> PipelineConfig:
    """Read the INI config; `overrides` maps "section.key" to replacement
    values (the CLI's --section.key flags). Relative paths resolve against
    the config file's directory."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    parser = ConfigParser()
    parser.read(path, encoding="utf-8")
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        if not section or not key:
            raise DataError(f"bad override key {dotted!r}, expected section.key")
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key, value)

    base = path.parent

    def resolve(raw: str) -> Path:
        p = Path(raw)
        return p if p.is_absolute() else base / p

    def get(section: str, key: str, default: str | None = None) -> str:
        if parser.has_option(section, key):
            return parser.get(section, key)
        if default is None:
            raise DataError(f"config is missing [{section}] {key}")
        return default

    seed = int(get("run", "seed", "0"))
    fields = tuple(_split_values(get("experts", "fields")))
    queries = {
        f: parser.get("experts", f"query.{f.lower()}",
                      fallback=FIELDS.get(f.upper(), f))
        for f in fields
    }
    cascade = CascadeParams(
        p=float(get("cascade", "p", "0.05")),
        reps=int(get("cascade", "reps", "100")),
        seeds_k=int(get("cascade", "seeds", "100")),
        rng_seed=int(get("cascade", "seed", str(seed))),
    )
    cfg = PipelineConfig(
        corpus_path=resolve(get("corpus", "path")),
        expert_dir=resolve(get("experts", "dir")),
        fields=fields,
        queries=queries,
        model_kind=get("model", "kind", "lsi"),
        k_grid=tuple(int(v) for v in _split_values(get("model", "k", "100 200 300 400 500 600"))),
        rho_grid=tuple(float(v) for v in _split_values(get("model", "rho", "1e-3 1e-4"))),
        gamma_grid=tuple(float(v) for v in _split_values(
            get("model", "gamma", "0.0 0.1 0.2 0.3 0.4 0.5 0.6 0.7 0.8 0.9"))),
        mode=get("model", "mode", "binary"),
        ngrams=int(get("model", "ngrams", "2")),
        multiplier=int(get("candidates", "multiplier", "10")),
        cascade=cascade,
        damping=float(get("pagerank", "damping", "0.85")),
        alpha=float(get("aggregate", "alpha", "0.01")),
        fuse_depth=int(get("aggregate", "depth", "20")),
        split_seed=int(get("eval", "split_seed", str(seed))),
        seed=seed,
        cache_dir=resolve(get("run", "cache_dir", "cache")),
        out_dir=resolve(get("run", "out_dir", "out")),
        threads=int(get("run", "threads", "0")),
    )
    return cfg


# ---------- caching ----------

def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _key(*parts: str) -> str:
    return hashlib.sha256("\x1f".join(parts).encode("utf-8")).hexdigest()


@contextmanager
def _stage(name: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    except Exception as exc:
        log.error("stage %s failed: %s", name, exc)
        raise
    log.info("stage %-10s %6.2fs", name, time.perf_counter() - start)


def ensure_corpus(cfg: PipelineConfig) -> tuple[Corpus, str]:
    corpus_key = _sha256_file(cfg.corpus_path)
    cached = cfg.cache_dir / f"corpus-{corpus_key[:16]}.jsonl"
    if cached.exists():
        log.info("corpus: cache hit %s", cached.name)
        with open(cached, encoding="utf-8") as fh:
            return read_canonical(fh), corpus_key
    stats = ParseStats()
    corpus = load_corpus(str(cfg.corpus_path), stats)
    if stats.skipped:
        log.warning("corpus: skipped %d of %d records", stats.skipped, stats.records)
    cfg.cache_dir.mkdir(parents=True, exist_ok=True)
    with open(cached, "w", encoding="utf-8") as fh:
        write_canonical(corpus, fh)
    return corpus, corpus_key


def _stopwords_key(stopwords: frozenset[str]) -> str:
    return _key("stopwords", *sorted(stopwords))


def ensure_matrix(
    cfg: PipelineConfig,
    corpus: Corpus,
    corpus_key: str,
    rho: float,
    stopwords: frozenset[str],
) -> tuple[TermDocMatrix, str]:
    key = _key("matrix", corpus_key, cfg.mode, repr(rho), str(cfg.ngrams),
               _stopwords_key(stopwords))
    path = cfg.cache_dir / f"matrix-{key[:16]}.txt"
    if path.exists():
        log.info("matrix: cache hit %s", path.name)
        return load_matrix(path), key
    vocab = build_vocabulary(corpus, rho, stopwords, cfg.ngrams)
    matrix = build_matrix(corpus, vocab, mode=cfg.mode, stopwords=stopwords,
                          max_n=cfg.ngrams)
    cfg.cache_dir.mkdir(parents=True, exist_ok=True)
    save_matrix(matrix, path)
    return matrix, key


def ensure_model(
    cfg: PipelineConfig, matrix: TermDocMatrix, matrix_key: str, params: ModelParams
) -> TopicModel:
    key = _key("model", matrix_key, params.model_kind, str(params.k), str(cfg.seed))
    path = cfg.cache_dir / f"model-{key[:16]}.{params.model_kind}"
    if path.exists():
        log.info("model: cache hit %s", path.name)
        return load_lsi(path) if params.model_kind == "lsi" else load_lda(path)
    model = fit_model(params.model_kind, matrix, params.k, cfg.seed)
    cfg.cache_dir.mkdir(parents=True, exist_ok=True)
    if params.model_kind == "lsi":
        save_lsi(model, path)
    else:
        save_lda(model, path)
    return model


def load_splits(cfg: PipelineConfig) -> dict[str, ExpertSplit]:
    splits = {}
    for field in cfg.fields:
        with open(expert_file(cfg.expert_dir, field), encoding="utf-8") as fh:
            experts = read_expert_list(fh)
        if len(experts) < 2:
            raise DataError(f"field {field}: need at least 2 experts")
        splits[field] = split_experts(experts, cfg.split_seed, field)
    return splits


def select_params(
    cfg: PipelineConfig,
    corpus: Corpus,
    corpus_key: str,
    splits: Mapping[str, ExpertSplit],
    stopwords: frozenset[str],
) -> ModelParams:
    grid = [
        ModelParams(cfg.model_kind, k, rho, gamma)
        for k in cfg.k_grid for rho in cfg.rho_grid for gamma in cfg.gamma_grid
    ]
    if len(grid) == 1:
        return grid[0]
    train_by_field = {cfg.queries[f]: set(splits[f].train) for f in cfg.fields}
    key = _key(
        "select", corpus_key, cfg.model_kind, repr(cfg.k_grid), repr(cfg.rho_grid),
        repr(cfg.gamma_grid), cfg.mode, str(cfg.ngrams), str(cfg.multiplier),
        str(cfg.seed), _stopwords_key(stopwords),
        json.dumps({f: sorted(s) for f, s in train_by_field.items()}, sort_keys=True),
    )
    path = cfg.cache_dir / f"select-{key[:16]}.json"
    if path.exists():
        log.info("select: cache hit %s", path.name)
        payload = json.loads(path.read_text(encoding="utf-8"))
        return ModelParams(**payload)
    params = model_select(
        corpus, grid, train_by_field, stopwords,
        mode=cfg.mode, multiplier=cfg.multiplier, seed=cfg.seed,
    )
    cfg.cache_dir.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps({
            "model_kind": params.model_kind, "k": params.k,
            "rho": params.rho, "gamma": params.gamma,
        }, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return params


# ---------- per-field run ----------

@dataclass(frozen=True)
class FieldResult:
    field: str
    candidates: tuple[str, ...]
    rankings: Mapping[str, Ranking]
    chosen_kinds: tuple[str, ...]
    ap_test: Mapping[str, Mapping[int, float]]
    ap20_train: Mapping[str, float]
    fused_ap20_train: float


def run_field(
    cfg: PipelineConfig,
    corpus: Corpus,
    model: TopicModel,
    matrix: TermDocMatrix,
    params: ModelParams,
    field: str,
    split: ExpertSplit,
    stopwords: frozenset[str],
) -> FieldResult:
    x = candidate_limit(len(split.train), cfg.multiplier)
    result = run_query(corpus, model, matrix, cfg.queries[field], params.gamma,
                       x, stopwords)
    if not result.candidates:
        raise DataError(f"field {field}: query matched no candidate authors")

    graph = build_graph(corpus, result.candidates)
    view = DistanceView.from_graph(graph)
    ic = replace(cfg.cascade, seeds_k=min(cfg.cascade.seeds_k, graph.n))

    rankings: dict[str, Ranking] = {
        rk.KIND_TOPIC: topic_ranking(result),
        rk.KIND_CITATION: citation_scores(corpus, result.candidates),
        rk.KIND_BETWEENNESS: betweenness(view, cfg.effective_threads()),
        rk.KIND_CLOSENESS: closeness(view),
        rk.KIND_PAGERANK: pagerank(graph, cfg.damping),
        rk.KIND_DEGREE: degree_scores(graph),
        rk.KIND_INFLUENCE: celf_select(graph, ic),
        rk.KIND_HUBSCORE: hub_scores(graph),
    }

    # fusion is chosen on the training side, with test experts masked out
    singles = [rankings[k] for k in rk.KINDS if k != rk.KIND_AGGREGATE]
    masked = [filter_ranking(r, split.test) for r in singles]
    chosen, fused_train = greedy_fuse(masked, split.train, cfg.fuse_depth, cfg.alpha)
    chosen_kinds = tuple(c.kind for c in chosen)
    if len(chosen_kinds) == 1:
        aggregate_rank = rankings[chosen_kinds[0]]
    else:
        aggregate_rank = mc2([rankings[k] for k in chosen_kinds], cfg.alpha)
    rankings[rk.KIND_AGGREGATE] = aggregate_rank

    ap20_train = {
        r.kind: average_precision_at(r, split.train, cfg.fuse_depth) for r in masked
    }
    fused_ap20 = average_precision_at(fused_train, split.train, cfg.fuse_depth)
    ap_test = evaluate_rankings(
        {k: filter_ranking(r, split.train) for k, r in rankings.items()},
        split.test,
    )
    return FieldResult(
        field=field,
        candidates=result.candidates,
        rankings=rankings,
        chosen_kinds=chosen_kinds,
        ap_test=ap_test,
        ap20_train=ap20_train,
        fused_ap20_train=fused_ap20,
    )


def write_field_artifacts(cfg: PipelineConfig, res: FieldResult) -> Path:
    field_dir = cfg.out_dir / "fields" / res.field
    field_dir.mkdir(parents=True, exist_ok=True)
    for kind, ranking in res.rankings.items():
        with open(field_dir / f"{kind}.csv", "w", encoding="utf-8", newline="") as fh:
            write_ranking_csv(ranking, fh)
    fuse_record = {
        "field": res.field,
        "chosen": list(res.chosen_kinds),
        "train_ap20": {k: v for k, v in sorted(res.ap20_train.items())},
        "fused_train_ap20": res.fused_ap20_train,
    }
    (field_dir / "fuse.json").write_text(
        json.dumps(fuse_record, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    return field_dir


# ---------- full run ----------

def run_pipeline(cfg: PipelineConfig) -> EvalReport:
    cfg.validate()
    stopwords = load_stopwords()
    with _stage("ingest"):
        corpus, corpus_key = ensure_corpus(cfg)
    with _stage("experts"):
        splits = load_splits(cfg)
    with _stage("select"):
        params = select_params(cfg, corpus, corpus_key, splits, stopwords)
        log.info("select: %s k=%d rho=%g gamma=%g", params.model_kind,
                 params.k, params.rho, params.gamma)
    with _stage("matrix"):
        matrix, matrix_key = ensure_matrix(cfg, corpus, corpus_key, params.rho,
                                           stopwords)
    with _stage("fit"):
        model = ensure_model(cfg, matrix, matrix_key, params)

    per_field: dict[str, dict[str, dict[int, float]]] = {}
    chosen: dict[str, tuple[str, ...]] = {}
    results: list[FieldResult] = []
    for field in cfg.fields:
        with _stage(field):
            res = run_field(cfg, corpus, model, matrix, params, field,
                            splits[field], stopwords)
            results.append(res)
            per_field[field] = {k: dict(v) for k, v in res.ap_test.items()}
            chosen[field] = res.chosen_kinds

    report = EvalReport(kinds=rk.KINDS, per_field=per_field, chosen=chosen,
                        ns=EVAL_NS)
    with _stage("report"):
        for res in results:
            write_field_artifacts(cfg, res)
        write_report(report, cfg.out_dir / "report")
    return report
