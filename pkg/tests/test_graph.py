"""Citation graph construction: edge views, self-citations, external references."""

from raimpact.corpus import PaperCorpus
from raimpact.graph import build_citation_graph
from raimpact.records import PaperRecord


def make_corpus(refs_by_id):
    records = [
        PaperRecord(paper_id=pid, title="t", year=2020, outgoing_refs=tuple(refs))
        for pid, refs in refs_by_id.items()
    ]
    return PaperCorpus(records)


def test_both_adjacency_views_agree():
    graph = build_citation_graph(make_corpus({"a": ["b", "c"], "b": ["c"], "c": []}))
    assert graph.n_edges == 3
    for citer, cited in graph.edges():
        assert cited in graph.references_of(citer)
        assert citer in graph.citers_of(cited)
    assert graph.citers_of("c") == frozenset({"a", "b"})
    assert graph.references_of("a") == frozenset({"b", "c"})


def test_self_citations_dropped_and_counted():
    graph = build_citation_graph(make_corpus({"a": ["a", "b"], "b": []}))
    assert graph.self_citations == 1
    assert graph.references_of("a") == frozenset({"b"})
    assert graph.n_edges == 1


def test_external_references_kept_out_but_counted():
    graph = build_citation_graph(make_corpus({"a": ["zz", "b"], "b": ["yy"]}))
    assert graph.external_refs == 2
    assert graph.references_of("a") == frozenset({"b"})
    assert graph.citers_of("zz") == frozenset()


def test_repeated_references_collapse_to_one_edge():
    graph = build_citation_graph(make_corpus({"a": ["b", "b", "b"], "b": []}))
    assert graph.n_edges == 1
    assert graph.references_of("a") == frozenset({"b"})


def test_edges_iterate_in_sorted_order():
    graph = build_citation_graph(make_corpus({"c": ["a"], "a": ["b"], "b": ["a"]}))
    assert list(graph.edges()) == [("a", "b"), ("b", "a"), ("c", "a")]


def test_unknown_paper_has_empty_views():
    graph = build_citation_graph(make_corpus({"a": []}))
    assert graph.references_of("ghost") == frozenset()
    assert graph.citers_of("ghost") == frozenset()
