"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data/config error, 3 an iterative
solver failed to converge. Logs (including per-stage timing) go to stderr;
tables requested on stdout stay clean of logging.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import pipeline as pl
from .centrality import ConvergenceError
from .corpus import DataError
from .evaluation import EvalReport
from .graph import build_graph, write_graph
from .ranking import write_ranking_csv
from .report import render_csv, render_markdown, save_figures, write_report
from .textprep import load_stopwords

log = logging.getLogger("expertrank")


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the published contract is 1
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


_CONFIG_KEYS = (
    "corpus.path",
    "experts.dir",
    "experts.fields",
    "model.kind",
    "model.k",
    "model.rho",
    "model.gamma",
    "model.mode",
    "model.ngrams",
    "candidates.multiplier",
    "cascade.p",
    "cascade.reps",
    "cascade.seeds",
    "cascade.seed",
    "pagerank.damping",
    "aggregate.alpha",
    "aggregate.depth",
    "eval.split_seed",
    "run.seed",
    "run.cache_dir",
    "run.out_dir",
    "run.threads",
)

_SHORTHAND = {
    "--ic-p": "cascade.p",
    "--ic-reps": "cascade.reps",
    "--ic-seeds": "cascade.seeds",
    "--seed": "run.seed",
    "--threads": "run.threads",
    "--out": "run.out_dir",
}


def _dest(dotted: str) -> str:
    return dotted.replace(".", "__")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", required=True, help="INI config file")
    for dotted in _CONFIG_KEYS:
        p.add_argument(f"--{dotted}", dest=_dest(dotted), metavar="VALUE",
                       help=argparse.SUPPRESS)
    for flag, dotted in _SHORTHAND.items():
        p.add_argument(flag, dest=_dest(dotted), metavar="VALUE",
                       help=f"shorthand for --{dotted}")
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config key")


def _overrides(args: argparse.Namespace) -> dict[str, str]:
    out: dict[str, str] = {}
    for dotted in _CONFIG_KEYS:
        value = getattr(args, _dest(dotted), None)
        if value is not None:
            out[dotted] = value
    for item in args.set:
        key, sep, value = item.partition("=")
        if not sep or "." not in key:
            raise DataError(f"bad --set {item!r}, expected section.key=value")
        out[key] = value
    return out


def _load_config(args: argparse.Namespace) -> pl.PipelineConfig:
    return pl.load_config(args.config, _overrides(args))


def _prepare(cfg: pl.PipelineConfig):
    cfg.validate()
    stopwords = load_stopwords()
    corpus, corpus_key = pl.ensure_corpus(cfg)
    splits = pl.load_splits(cfg)
    params = pl.select_params(cfg, corpus, corpus_key, splits, stopwords)
    matrix, matrix_key = pl.ensure_matrix(cfg, corpus, corpus_key, params.rho,
                                          stopwords)
    model = pl.ensure_model(cfg, matrix, matrix_key, params)
    return corpus, splits, params, matrix, model, stopwords


def _field_of(args: argparse.Namespace, cfg: pl.PipelineConfig) -> str:
    if args.field not in cfg.fields:
        raise DataError(f"field {args.field!r} is not configured "
                        f"(have: {', '.join(cfg.fields)})")
    return args.field


# ---------- subcommands ----------

def cmd_ingest(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    cfg.validate()
    corpus, _ = pl.ensure_corpus(cfg)
    if not len(corpus):
        raise DataError(f"no records parsed from {cfg.corpus_path}")
    abstracts = sum(1 for doc in corpus if doc.abstract)
    print(f"documents {len(corpus)}")
    print(f"authors {len(corpus.author_index)}")
    print(f"abstracts {abstracts}")
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    _, _, params, matrix, model, _ = _prepare(cfg)
    print(json.dumps({
        "model_kind": params.model_kind, "k": params.k,
        "rho": params.rho, "gamma": params.gamma,
        "terms": len(matrix.vocabulary.terms), "docs": len(matrix.doc_ids),
    }, sort_keys=True))
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    from .retrieval import candidate_limit, run_query, topic_ranking

    cfg = _load_config(args)
    corpus, splits, params, matrix, model, stopwords = _prepare(cfg)
    field = _field_of(args, cfg)
    split = splits[field]
    x = candidate_limit(len(split.train), cfg.multiplier)
    result = run_query(corpus, model, matrix, cfg.queries[field], params.gamma,
                       x, stopwords)
    write_ranking_csv(topic_ranking(result), sys.stdout)
    return 0


def cmd_rank(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    corpus, splits, params, matrix, model, stopwords = _prepare(cfg)
    field = _field_of(args, cfg)
    res = pl.run_field(cfg, corpus, model, matrix, params, field,
                       splits[field], stopwords)
    field_dir = pl.write_field_artifacts(cfg, res)
    graph = build_graph(corpus, res.candidates)
    write_graph(graph, field_dir / "graph.txt")
    for kind, ranking in res.rankings.items():
        top = ranking.items[0][0] if ranking.items else "(empty)"
        print(f"{kind}\t{len(ranking)}\t{top}")
    print(f"artifacts: {field_dir}")
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    corpus, splits, params, matrix, model, stopwords = _prepare(cfg)
    field = _field_of(args, cfg)
    res = pl.run_field(cfg, corpus, model, matrix, params, field,
                       splits[field], stopwords)
    pl.write_field_artifacts(cfg, res)
    print(json.dumps({
        "field": field,
        "chosen": list(res.chosen_kinds),
        "fused_train_ap20": res.fused_ap20_train,
    }, sort_keys=True))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    report = pl.run_pipeline(cfg)
    sys.stdout.write(render_csv(report))
    return 0


def cmd_pipeline(args: argparse.Namespace) -> int:
    cfg = _load_config(args)
    pl.run_pipeline(cfg)
    print(f"report: {cfg.out_dir / 'report'}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    reports = []
    for run in args.run:
        run_dir = Path(run)
        path = run_dir / "report" / "report.json"
        if not path.exists():
            raise DataError(f"no report found under {run_dir}")
        reports.append((run, EvalReport.from_json(path.read_text(encoding="utf-8"))))
    if args.out:
        if len(reports) > 1:
            raise DataError("--out takes a single --run")
        write_report(reports[0][1], args.out)
        print(f"report: {args.out}")
        return 0
    for pos, (run, report) in enumerate(reports):
        if pos:
            sys.stdout.write("\n")
        if len(reports) > 1:
            sys.stdout.write(f"# run: {run}\n")
        sys.stdout.write(render_csv(report))
        sys.stdout.write("\n")
        sys.stdout.write(render_markdown(report))
    return 0


# ---------- entry point ----------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="expertrank",
                     description="Find and rank domain experts from an "
                                 "author-publication corpus.")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("ingest", cmd_ingest, "parse and cache the corpus", True, False),
        ("fit", cmd_fit, "select parameters and fit the topic model", True, False),
        ("query", cmd_query, "rank candidate authors for one field", True, True),
        ("rank", cmd_rank, "compute all rankings for one field", True, True),
        ("fuse", cmd_fuse, "greedy rank aggregation for one field", True, True),
        ("eval", cmd_eval, "run everything and print the MAP table", True, False),
        ("pipeline", cmd_pipeline, "run everything and write all artifacts", True, False),
    ]
    for name, handler, help_text, takes_config, takes_field in specs:
        p = sub.add_parser(name, help=help_text)
        if takes_config:
            _add_config_args(p)
        if takes_field:
            p.add_argument("--field", required=True, help="field to process")
        p.set_defaults(handler=handler)

    p = sub.add_parser("report", help="render one or more finished runs")
    p.add_argument("--run", action="append", required=True,
                   help="pipeline output directory (repeatable)")
    p.add_argument("--out", help="write files here instead of stdout "
                                 "(single run only)")
    p.set_defaults(handler=cmd_report)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname).1s %(message)s",
    )
    try:
        return args.handler(args)
    except ConvergenceError as exc:
        log.error("%s", exc)
        return 3
    except DataError as exc:
        log.error("%s", exc)
        return 2
    except (ValueError, OSError) as exc:
        log.error("%s", exc)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
