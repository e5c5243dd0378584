"""Topic assignment by keyword-embedding similarity, plus corpus retention.

Every paper gets exactly one topic: the topic of its most similar keyword
variant.  Each keyword is queried in two variants, with "artificial
intelligence" and "machine learning" prepended, and the keyword's evidence is
the max over its variants.  Retention then keeps assignments strictly above a
percentile cutoff, removes duplicate titles, and drops papers whose citations
have not kept pace with their age.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .corpus import PaperCorpus
from .records import PaperRecord
from .vectors import VectorStore, percentile_threshold

TOPICS = ("Fairness", "Privacy", "Explainability", "Accountability", "Sustainability")

QUERY_PREFIXES = ("artificial intelligence", "machine learning")


@dataclass(frozen=True)
class KeywordQuery:
    topic: str
    keyword: str
    variants: tuple[str, ...]


@dataclass(frozen=True)
class TopicAssignment:
    paper_id: str
    topic: str
    best_keyword: str
    best_variant: str
    score: float


@dataclass(frozen=True)
class RaiCorpus:
    """Assignments retained above the percentile cutoff, with the cutoff used."""

    assignments: tuple[TopicAssignment, ...]
    threshold: float
    percentile: float

    def __len__(self) -> int:
        return len(self.assignments)

    def __iter__(self):
        return iter(self.assignments)

    @property
    def paper_ids(self) -> tuple[str, ...]:
        return tuple(a.paper_id for a in self.assignments)

    def topic_of(self) -> dict[str, str]:
        return {a.paper_id: a.topic for a in self.assignments}


def default_keyword_table() -> list[tuple[str, str]]:
    """The bundled (topic, keyword) table: 25 keywords over five topics."""
    text = resources.files("raimpact.keywords").joinpath("rai_keywords.tsv").read_text("utf-8")
    return _parse_table(text.splitlines())


def load_keyword_table(path: str | Path) -> list[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        return _parse_table(fh)


def _parse_table(lines: Iterable[str]) -> list[tuple[str, str]]:
    rows = []
    for line in lines:
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        topic, _, keyword = line.partition("\t")
        topic, keyword = topic.strip(), keyword.strip()
        if not topic or not keyword:
            raise ValueError(f"bad keyword table row: {line!r}")
        rows.append((topic, keyword))
    return rows


def build_keyword_queries(table: Sequence[tuple[str, str]] | None = None) -> list[KeywordQuery]:
    """Expand a (topic, keyword) table into prefixed query variants.

    Each keyword yields exactly one variant per prefix; a keyword appearing
    under two topics would make assignment ambiguous and is rejected.
    """
    if table is None:
        table = default_keyword_table()
    if not table:
        raise ValueError("keyword table is empty")
    seen: dict[str, str] = {}
    queries = []
    for topic, keyword in table:
        if keyword in seen:
            raise ValueError(f"keyword {keyword!r} listed under both {seen[keyword]!r} and {topic!r}")
        seen[keyword] = topic
        variants = tuple(f"{prefix} {keyword}" for prefix in QUERY_PREFIXES)
        queries.append(KeywordQuery(topic=topic, keyword=keyword, variants=variants))
    return queries


def query_variant_texts(queries: Sequence[KeywordQuery]) -> list[str]:
    """All variant strings, in table order; these are the store keys."""
    return [v for q in queries for v in q.variants]


def assign_topic(paper_id: str, store: VectorStore, queries: Sequence[KeywordQuery]) -> TopicAssignment:
    """Most similar keyword variant for one paper, ties to the smallest key."""
    if not queries:
        raise ValueError("no keyword queries")
    paper_vec = store.get(paper_id).astype(np.float64)
    variant_keys = sorted(query_variant_texts(queries))
    scores = store.matrix(variant_keys).astype(np.float64) @ paper_vec
    best = int(np.argmax(scores))  # keys sorted, so first max is the smallest key
    best_variant = variant_keys[best]
    topic, keyword = _variant_owner(best_variant, queries)
    return TopicAssignment(
        paper_id=paper_id,
        topic=topic,
        best_keyword=keyword,
        best_variant=best_variant,
        score=float(np.clip(scores[best], -1.0, 1.0)),
    )


def _variant_owner(variant: str, queries: Sequence[KeywordQuery]) -> tuple[str, str]:
    for q in queries:
        if variant in q.variants:
            return q.topic, q.keyword
    raise KeyError(f"variant {variant!r} not generated by any query")


def assign_topics(
    paper_ids: Iterable[str], store: VectorStore, queries: Sequence[KeywordQuery]
) -> list[TopicAssignment]:
    """Assign every paper independently; output order follows input order."""
    variant_keys = sorted(query_variant_texts(queries))
    owner = {v: (q.topic, q.keyword) for q in queries for v in q.variants}
    variant_matrix = store.matrix(variant_keys).astype(np.float64)
    out = []
    for pid in paper_ids:
        scores = variant_matrix @ store.get(pid).astype(np.float64)
        best = int(np.argmax(scores))
        variant = variant_keys[best]
        topic, keyword = owner[variant]
        out.append(
            TopicAssignment(
                paper_id=pid,
                topic=topic,
                best_keyword=keyword,
                best_variant=variant,
                score=float(np.clip(scores[best], -1.0, 1.0)),
            )
        )
    return out


def select_rai(assignments: Sequence[TopicAssignment], p: float = 99.0) -> RaiCorpus:
    """Keep assignments scoring strictly above the nearest-rank percentile.

    With all scores equal nothing clears the cutoff and the result is empty;
    that degenerate case is intentional, not an error.
    """
    if not assignments:
        raise ValueError("assignments must be non-empty")
    threshold = percentile_threshold([a.score for a in assignments], p)
    kept = tuple(a for a in assignments if a.score > threshold)
    return RaiCorpus(assignments=kept, threshold=threshold, percentile=p)


def quality_filter(papers: Iterable[PaperRecord], reference_year: int = 2023) -> list[PaperRecord]:
    """Keep papers whose citation count is at least their age in years."""
    papers = list(papers)
    if papers:
        newest = max(p.year for p in papers)
        if reference_year < newest:
            raise ValueError(f"reference_year {reference_year} precedes newest paper year {newest}")
    return [p for p in papers if p.citation_count >= reference_year - p.year]


_PUNCT_RE = re.compile(r"[^a-z0-9]+")


def normalized_title(title: str) -> str:
    return _PUNCT_RE.sub(" ", title.lower()).strip()


def dedupe(papers: Iterable[PaperRecord]) -> list[PaperRecord]:
    """One survivor per normalized-title group.

    Survivor order: highest citation count, then earliest year, then smallest
    paper id.  Output preserves the input order of the survivors.
    """
    groups: dict[str, PaperRecord] = {}
    order: list[str] = []
    for p in papers:
        key = normalized_title(p.title)
        cur = groups.get(key)
        if cur is None:
            groups[key] = p
            order.append(key)
        elif (-p.citation_count, p.year, p.paper_id) < (-cur.citation_count, cur.year, cur.paper_id):
            groups[key] = p
    return [groups[k] for k in order]


def retain_rai_papers(
    corpus: PaperCorpus,
    store: VectorStore,
    queries: Sequence[KeywordQuery] | None = None,
    percentile: float = 99.0,
    reference_year: int = 2023,
) -> tuple[RaiCorpus, list[TopicAssignment]]:
    """Full retention pipeline: assign, cut at the percentile, dedupe, age-filter.

    Returns the retained corpus and the raw assignments for all papers (the
    latter feed score-distribution reports).
    """
    if queries is None:
        queries = build_keyword_queries()
    ordered_ids = sorted(p.paper_id for p in corpus)
    assignments = assign_topics(ordered_ids, store, queries)
    selected = select_rai(assignments, percentile)
    surviving = dedupe(corpus[a.paper_id] for a in selected)
    surviving = quality_filter(surviving, reference_year)
    keep_ids = {p.paper_id for p in surviving}
    final = tuple(a for a in selected if a.paper_id in keep_ids)
    return (
        RaiCorpus(assignments=final, threshold=selected.threshold, percentile=percentile),
        assignments,
    )
