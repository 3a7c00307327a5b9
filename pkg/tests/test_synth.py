"""Synthetic corpus generator: determinism, validity, shape."""

import pytest

from wikirec.corpus import write_corpus
from wikirec.synth import ORIGIN, generate_synthetic
from datetime import timedelta


def test_same_seed_same_bytes(tmp_path):
    a = generate_synthetic(60, 4, 8, 5, seed=123)
    b = generate_synthetic(60, 4, 8, 5, seed=123)
    write_corpus(a, tmp_path / "a")
    write_corpus(b, tmp_path / "b")
    for name in ("editors.jsonl", "edits.jsonl", "articles.jsonl",
                 "projects.jsonl", "interactions.jsonl", "meta.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_different_seed_differs(tmp_path):
    a = generate_synthetic(60, 4, 8, 5, seed=1)
    b = generate_synthetic(60, 4, 8, 5, seed=2)
    write_corpus(a, tmp_path / "a")
    write_corpus(b, tmp_path / "b")
    assert (tmp_path / "a" / "edits.jsonl").read_bytes() != (tmp_path / "b" / "edits.jsonl").read_bytes()


def test_generated_corpus_is_valid():
    corpus = generate_synthetic(120, 5, 10, 6, seed=77)
    corpus.validate()


def test_counts_and_as_of():
    corpus = generate_synthetic(80, 3, 6, 4, seed=5)
    counts = corpus.counts()
    assert counts["editors"] == 80
    assert counts["projects"] == 3
    assert counts["articles"] >= 30
    assert corpus.as_of == ORIGIN + timedelta(days=28)


def test_every_project_has_organizer_within_members():
    corpus = generate_synthetic(150, 6, 8, 6, seed=8)
    for p in corpus.projects.values():
        assert p.organizers
        assert p.organizers <= p.members


def test_events_respect_registration():
    corpus = generate_synthetic(100, 4, 8, 6, seed=13)
    for e in corpus.edits:
        assert e.timestamp >= corpus.editors[e.editor_id]
        assert e.timestamp < corpus.as_of
    for i in corpus.interactions:
        assert i.timestamp >= corpus.editors[i.source]
        assert i.timestamp >= corpus.editors[i.target]
        assert i.source != i.target


def test_rejects_nonpositive_sizes():
    with pytest.raises(ValueError):
        generate_synthetic(0, 3, 5, 4, seed=1)
    with pytest.raises(ValueError):
        generate_synthetic(10, 0, 5, 4, seed=1)
    with pytest.raises(ValueError):
        generate_synthetic(10, 3, 5, 0, seed=1)
