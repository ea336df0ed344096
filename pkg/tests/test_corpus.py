from __future__ import annotations

import copy
import json
from datetime import date

import pytest

from conftest import make_paper
from reviewlab.corpus import (
    BenchmarkSet,
    PaperRecord,
    RawReview,
    RelevantPaperRef,
    load_corpus,
    record_to_dict,
    save_corpus,
    split_benchmark,
    validate_record,
)
from reviewlab.errors import CapacityError, DataError


def write_corpus(tmp_path, rows):
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(rows) + ("\n" if rows else ""), encoding="utf-8")
    return path


def test_load_empty_file(tmp_path):
    assert load_corpus(write_corpus(tmp_path, [])) == []


def test_load_single_record(tmp_path):
    path = write_corpus(tmp_path, [json.dumps(record_to_dict(make_paper("p-1")))])
    records = load_corpus(path)
    assert len(records) == 1
    assert records[0].id == "p-1"


def test_load_missing_title_names_line_and_keeps_nothing(tmp_path):
    rows = [
        json.dumps(record_to_dict(make_paper("p-1"))),
        json.dumps({k: v for k, v in record_to_dict(make_paper("p-2")).items() if k != "title"}),
        json.dumps(record_to_dict(make_paper("p-3"))),
    ]
    path = write_corpus(tmp_path, rows)
    with pytest.raises(DataError, match=r":2: .*title"):
        load_corpus(path)


def test_load_malformed_json_carries_line_number(tmp_path):
    path = write_corpus(tmp_path, [json.dumps(record_to_dict(make_paper("p-1"))), "{not json"])
    with pytest.raises(DataError, match=":2: malformed JSON"):
        load_corpus(path)


def test_load_duplicate_id_rejected(tmp_path):
    row = json.dumps(record_to_dict(make_paper("p-1")))
    with pytest.raises(DataError, match="duplicate id"):
        load_corpus(write_corpus(tmp_path, [row, row]))


def test_load_unreadable_path_is_data_error(tmp_path):
    with pytest.raises(DataError, match="cannot read"):
        load_corpus(tmp_path / "nope.jsonl")


def test_validate_record_valid():
    paper = make_paper("p-1", reviews=(RawReview("r", "fine work"),), meta_review="meta")
    assert validate_record(paper) == []


def test_validate_record_too_many_relevant_papers():
    ref = RelevantPaperRef("t", "a", date(2024, 1, 1), 0.5)
    paper = make_paper("p-1")
    paper = PaperRecord(**{**paper.__dict__, "relevant_papers": (ref, ref, ref)})
    violations = validate_record(paper)
    assert len(violations) == 1
    assert "relevant_papers" in violations[0]


def test_validate_record_postdated_relevant_paper():
    ref = RelevantPaperRef("t", "a", date(2024, 5, 1), 0.5)
    paper = make_paper("p-1", submission_date=date(2024, 4, 1))
    paper = PaperRecord(**{**paper.__dict__, "relevant_papers": (ref,)})
    violations = validate_record(paper)
    assert len(violations) == 1
    assert "postdates" in violations[0]


def build_decided_corpus(n_accept: int, n_reject: int):
    papers = [make_paper(f"a-{i}", decision="accept") for i in range(n_accept)]
    papers += [make_paper(f"r-{i}", decision="reject") for i in range(n_reject)]
    papers += [make_paper("u-0", decision="unknown")]
    return papers


def test_split_benchmark_ratio_three_to_seven():
    corpus = build_decided_corpus(40, 80)
    split = split_benchmark(corpus, total=100, accept_ratio=3 / 10, seed=42)
    assert split.accept_count == 30
    assert split.reject_count == 70
    assert len(split.entries) == 100
    accepts = [e for e in split.entries if e.startswith("a-")]
    rejects = [e for e in split.entries if e.startswith("r-")]
    assert len(accepts) == 30 and len(rejects) == 70
    assert "u-0" not in split.entries


def test_split_benchmark_total_zero():
    split = split_benchmark(build_decided_corpus(1, 1), total=0, accept_ratio=0.3, seed=1)
    assert split == BenchmarkSet(entries=(), accept_count=0, reject_count=0, seed=1)


def test_split_benchmark_deterministic():
    corpus = build_decided_corpus(40, 80)
    first = split_benchmark(corpus, 50, 0.3, seed=9)
    second = split_benchmark(corpus, 50, 0.3, seed=9)
    assert first.entries == second.entries
    different = split_benchmark(corpus, 50, 0.3, seed=10)
    assert different.entries != first.entries


def test_split_benchmark_capacity_error_reports_counts():
    corpus = build_decided_corpus(5, 80)
    with pytest.raises(CapacityError, match="need 30 accepted papers, corpus has 5") as info:
        split_benchmark(corpus, 100, 0.3, seed=0)
    assert info.value.available == 5
    assert info.value.required == 30


def test_round_trip_save_load(tmp_path):
    papers = [
        make_paper("p-1", decision="accept",
                   reviews=(RawReview("r1", "nice", True),), meta_review="meta text"),
        make_paper("p-2", decision="reject"),
    ]
    papers[0] = PaperRecord(
        **{
            **papers[0].__dict__,
            "relevant_papers": (RelevantPaperRef("t", "a", date(2024, 1, 2), 0.75),),
        }
    )
    path = tmp_path / "out.jsonl"
    save_corpus(papers, path)
    assert load_corpus(path) == papers


def test_operations_do_not_mutate_inputs():
    corpus = build_decided_corpus(10, 10)
    snapshot = copy.deepcopy(corpus)
    split_benchmark(corpus, 10, 0.3, seed=3)
    validate_record(corpus[0])
    assert corpus == snapshot
