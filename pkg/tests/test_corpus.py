import io
import json

import pytest
from hypothesis import given, strategies as st

from expertrank import corpus as co

RECORDS = """\
#index 1
#* Kernel methods for structured data
#@ Ada Lovelace,  Alan  Turing
#t 2001
#c ICML
#! Learning with kernels on graphs.

#index 2
#* Spectral graph mining
#@ Alan Turing
#t 2002
#c KDD
#% 1
#% 1
#% 2
#% 99

#* No id here
#@ Someone

#index 4
#@ No Title
#t 2003

#index 5
#* Bad year record
#@ Bo Peep
#t 20x3

#index 7
#* Authorless paper

#index 3
#* Deep parsing models
#@ Ada Lovelace
#t 2005
#% 1
"""


def parse(text, stats=None):
    return co.parse_records(io.StringIO(text), stats)


def test_normalize_author_collapses_whitespace():
    assert co.normalize_author("  Alan \t Turing ") == "Alan Turing"
    assert co.normalize_author("") == ""


def test_parse_counts_and_fields():
    stats = co.ParseStats()
    corpus = parse(RECORDS, stats)
    assert stats.records == 7
    assert stats.parsed == 3
    assert stats.skipped == 4
    assert stats.skipped_no_title == 1
    assert stats.skipped_no_id == 1
    assert stats.skipped_no_authors == 1
    assert stats.skipped_bad_year == 1
    assert len(corpus) == 3

    doc = corpus.document("1")
    assert doc.title == "Kernel methods for structured data"
    assert doc.authors == ("Ada Lovelace", "Alan Turing")
    assert doc.year == 2001
    assert doc.venue == "ICML"
    assert doc.abstract == "Learning with kernels on graphs."


def test_parse_warnings_carry_line_numbers(caplog):
    with caplog.at_level("WARNING", logger="expertrank.corpus"):
        parse(RECORDS)
    messages = [rec.getMessage() for rec in caplog.records]
    assert "line 18: record skipped, no id" in messages
    assert "line 21: record skipped, no title" in messages
    assert "line 25: record skipped, bad year '20x3'" in messages
    assert "line 30: record skipped, no authors" in messages


def test_parse_reference_cleanup():
    corpus = parse(RECORDS)
    # duplicate of "1" collapsed, self reference "2" dropped, dangling "99" kept
    assert corpus.document("2").references == ("1", "99")
    assert corpus.document("3").references == ("1",)


def test_citation_count_is_in_corpus_in_degree():
    corpus = parse(RECORDS)
    assert corpus.citation_count == {"1": 2, "2": 0, "3": 0}


def test_author_index_and_lookups():
    corpus = parse(RECORDS)
    assert corpus.authors() == ["Ada Lovelace", "Alan Turing"]
    assert [d.doc_id for d in corpus.author_documents("Ada Lovelace")] == ["1", "3"]
    assert corpus.author_documents("Nobody") == []
    assert "1" in corpus
    assert "99" not in corpus
    with pytest.raises(KeyError):
        corpus.document("99")


def test_total_citations_with_restriction():
    corpus = parse(RECORDS)
    assert corpus.total_citations("Ada Lovelace") == 2
    assert corpus.total_citations("Ada Lovelace", restrict_to=("1",)) == 2
    assert corpus.total_citations("Ada Lovelace", restrict_to=("3",)) == 0
    assert corpus.total_citations("Nobody") == 0


def test_duplicate_id_rejected():
    text = RECORDS + "\n#index 1\n#* Again\n#@ Ada Lovelace\n"
    with pytest.raises(co.DataError, match="duplicate"):
        parse(text)


def test_direct_construction_guards():
    good = co.Document(doc_id="1", title="t", authors=("A",))
    with pytest.raises(co.DataError):
        co.Corpus([good, co.Document(doc_id="", title="t", authors=("A",))])
    with pytest.raises(co.DataError):
        co.Corpus([good, co.Document(doc_id="2", title="t", authors=())])
    with pytest.raises(co.DataError):
        co.Corpus([good, co.Document(doc_id="2", title="t", authors=("A",),
                                     references=("2",))])
    with pytest.raises(co.DataError):
        co.Corpus([good, co.Document(doc_id="1", title="t", authors=("B",))])


def test_empty_stream_parses_to_empty_corpus():
    stats = co.ParseStats()
    corpus = parse("", stats)
    assert len(corpus) == 0
    assert stats.records == 0


def test_canonical_round_trip_and_stability():
    corpus = parse(RECORDS)
    first = io.StringIO()
    co.write_canonical(corpus, first)
    second = io.StringIO()
    co.write_canonical(corpus, second)
    assert first.getvalue() == second.getvalue()

    back = co.read_canonical(io.StringIO(first.getvalue()))
    assert back.documents == corpus.documents

    row = json.loads(first.getvalue().splitlines()[0])
    assert list(row) == sorted(row)


def test_read_canonical_rejects_bad_json():
    with pytest.raises(co.DataError):
        co.read_canonical(io.StringIO("not json\n"))


def test_load_corpus_dispatches_on_extension(tmp_path):
    corpus = parse(RECORDS)
    raw = tmp_path / "corpus.txt"
    raw.write_text(RECORDS, encoding="utf-8")
    canon = tmp_path / "corpus.jsonl"
    with canon.open("w", encoding="utf-8") as fh:
        co.write_canonical(corpus, fh)

    assert co.load_corpus(raw).documents == corpus.documents
    assert co.load_corpus(canon).documents == corpus.documents


_POOL = ["Ada", "Bo", "Cy", "Dee", "Ed"]


@st.composite
def corpora(draw):
    n = draw(st.integers(min_value=1, max_value=10))
    docs = []
    for i in range(n):
        authors = draw(st.lists(st.sampled_from(_POOL), min_size=1,
                                max_size=4, unique=True))
        others = [str(j) for j in range(n) if j != i]
        refs = draw(st.lists(st.sampled_from(others), max_size=3,
                             unique=True)) if others else []
        docs.append(co.Document(doc_id=str(i), title=f"title {i}",
                                authors=tuple(authors),
                                references=tuple(refs)))
    return co.Corpus(docs)


@given(corpora())
def test_author_document_handshake(corpus):
    by_author = sum(len(corpus.author_documents(a)) for a in corpus.authors())
    by_doc = sum(len(doc.authors) for doc in corpus)
    assert by_author == by_doc


@given(corpora())
def test_citations_total_matches_reference_count(corpus):
    assert sum(corpus.citation_count.values()) == sum(
        len(doc.references) for doc in corpus
    )


@given(corpora())
def test_canonical_round_trip_identity(corpus):
    buf = io.StringIO()
    co.write_canonical(corpus, buf)
    assert co.read_canonical(io.StringIO(buf.getvalue())).documents == corpus.documents
