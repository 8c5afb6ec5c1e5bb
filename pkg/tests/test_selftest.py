import json
import random
from pathlib import Path

import pytest

from src.noriq import selftest
from src.noriq.pairtop import ComplexError, relative_cohomology

SMALL = selftest.CorpusSizes(
    suspension_pairs=2,
    matrices=2,
    triples=2,
    single_object=2,
    mixed_quivers=2,
    map_families=2,
    commutators=2,
    presentations=3,
    geometric_presentations=1,
)


def test_random_pair_has_marked_vertices():
    rng = random.Random(7)
    for _ in range(10):
        pair = selftest.random_pair(rng)
        assert pair.sub.simplices
        assert len(pair.sub.vertices) < len(pair.total.vertices)


def test_random_mixed_quiver_stays_small():
    rng = random.Random(11)
    for _ in range(5):
        rep = selftest.random_mixed_quiver(rng)
        assert rep.total_dim <= 8


def test_build_corpus_is_deterministic():
    first = selftest.build_corpus(3, sizes=SMALL)
    second = selftest.build_corpus(3, sizes=SMALL)
    assert first.fingerprint() == second.fingerprint()
    assert len(first.pairs) == 2
    assert [kind for _, kind in first.presentations] == ["regular", "zero", "object", "regular"]


def test_run_suite_on_small_corpus():
    def rebuild():
        return selftest.build_corpus(3, sizes=SMALL)

    def render(results):
        return "\n".join(f"{r.name} {r.cases} {r.passed}" for r in results)

    results = selftest.run_suite(rebuild(), rebuild=rebuild, render=render)
    assert [r.name for r in results][-1] == "determinism"
    assert results[-1].cases == 1
    assert len(results) == 10
    failures = [f for r in results for f in r.failures]
    assert failures == []
    summary = selftest.summarize(results)
    assert summary["checks"] == 10
    assert summary["failed"] == 0


def test_determinism_compares_rendered_reports():
    calls = []

    def render(results):
        calls.append(len(results))
        return str(len(calls))

    corpus = selftest.build_corpus(3, sizes=SMALL)
    results = selftest.run_suite(corpus, rebuild=lambda: selftest.build_corpus(3, sizes=SMALL), render=render)
    assert calls == [9, 9]
    assert results[-1].failures == ("report differs between runs",)


def test_commutator_cases_cover_wedges_of_circles():
    sizes = selftest.CorpusSizes(
        suspension_pairs=1,
        matrices=0,
        triples=0,
        single_object=0,
        mixed_quivers=0,
        map_families=0,
        commutators=9,
        presentations=0,
        geometric_presentations=0,
    )
    corpus = selftest.build_corpus(2, sizes=sizes)
    ranks = {relative_cohomology(p, 1).dim for p, _, _ in corpus.commutators}
    assert ranks == {1, 2, 3, 4}


def test_random_geometric_quiver_is_geometric():
    rng = random.Random(5)
    for _ in range(6):
        rep = selftest.random_geometric_quiver(rng)
        assert all(obj.is_geometric for obj in rep.objects)
        assert all(m.matrix is None for m in rep.morphisms)


def test_run_collects_failures():
    def check(case):
        if case == 2:
            raise ComplexError("broken")
        return "odd" if case % 2 else None

    result = selftest._run("sample", [0, 1, 2], check)
    assert result.cases == 3
    assert not result.passed
    assert result.failures == ("case 1: odd", "case 2: ComplexError: broken")


def test_run_does_not_swallow_unexpected_errors():
    def check(case):
        raise KeyError(case)

    with pytest.raises(KeyError):
        selftest._run("sample", [0], check)


def test_extend_from_manifest(tmp_path: Path):
    (tmp_path / "circle.json").write_text(
        json.dumps({"vertices": ["0", "1"], "simplices": [["0", "1"]], "sub": [["0"], ["1"]]})
    )
    (tmp_path / "quiver.json").write_text(json.dumps({"objects": [{"id": "A", "dim": 2}]}))
    manifest = tmp_path / "manifest.json"
    manifest.write_text(
        json.dumps(
            {
                "version": "1",
                "entries": [
                    {"name": "circle", "kind": "pair", "path": "circle.json"},
                    {"name": "matrices", "kind": "quiver", "path": "quiver.json"},
                ],
            }
        )
    )
    corpus = selftest.extend_from_manifest(selftest.Corpus(0), manifest)
    assert len(corpus.pairs) == 1
    assert len(corpus.endo_cases) == 1
    assert corpus.presentations[0][1] == "regular"
    results = selftest.run_suite(corpus)
    assert all(r.passed for r in results)
    assert results[-1].cases == 0
