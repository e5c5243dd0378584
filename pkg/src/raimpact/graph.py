"""In-corpus citation graph with mutually consistent edge views."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator

from .corpus import PaperCorpus


@dataclass
class CitationGraph:
    """Directed citation edges (citer -> cited) restricted to the corpus.

    Both adjacency views are built from the same edge set, so for every edge
    ``u -> v`` the pair appears in ``references_of(u)`` and ``citers_of(v)``.
    References pointing outside the corpus are kept out of the graph but
    counted; self-citations are dropped and counted.
    """

    _outgoing: dict[str, frozenset[str]] = field(default_factory=dict)
    _incoming: dict[str, frozenset[str]] = field(default_factory=dict)
    n_edges: int = 0
    external_refs: int = 0
    self_citations: int = 0

    def references_of(self, paper_id: str) -> frozenset[str]:
        """Papers that ``paper_id`` cites (resolved within the corpus)."""
        return self._outgoing.get(paper_id, frozenset())

    def citers_of(self, paper_id: str) -> frozenset[str]:
        """Papers that cite ``paper_id``."""
        return self._incoming.get(paper_id, frozenset())

    def edges(self) -> Iterator[tuple[str, str]]:
        for citer in sorted(self._outgoing):
            for cited in sorted(self._outgoing[citer]):
                yield citer, cited


def build_citation_graph(corpus: PaperCorpus) -> CitationGraph:
    outgoing: dict[str, set[str]] = {}
    incoming: dict[str, set[str]] = {}
    n_edges = 0
    external = 0
    selfcite = 0
    for paper in corpus:
        for ref in paper.outgoing_refs:
            if ref == paper.paper_id:
                selfcite += 1
                continue
            if ref not in corpus:
                external += 1
                continue
            if ref not in outgoing.setdefault(paper.paper_id, set()):
                outgoing[paper.paper_id].add(ref)
                incoming.setdefault(ref, set()).add(paper.paper_id)
                n_edges += 1
    return CitationGraph(
        _outgoing={k: frozenset(v) for k, v in outgoing.items()},
        _incoming={k: frozenset(v) for k, v in incoming.items()},
        n_edges=n_edges,
        external_refs=external,
        self_citations=selfcite,
    )
