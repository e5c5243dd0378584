"""Paper-to-patent and paper-to-repository linkage.

Patent linkage runs in three steps: fuzzy title match between patent
non-patent-literature reference strings and paper titles (cosine distance over
title embeddings), threshold selection (fixed, or data-driven via the elbow of
the match-count curve), and author verification with a normalized Levenshtein
similarity.  Repository linkage joins an external paper-to-repo table.  Both
produce edges plus per-paper years-to-first-event with right censoring at a
horizon year.
"""

from __future__ import annotations

import json
import logging
import math
import re
import unicodedata
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .records import PaperRecord, PatentRecord, RepoLink
from .vectors import VectorStore

logger = logging.getLogger(__name__)

DEFAULT_TITLE_THRESHOLD = 0.06
DEFAULT_AUTHOR_THRESHOLD = 0.8
DEFAULT_HORIZON_YEAR = 2022
_COLLINEAR_TOL = 1e-12

_WS_RE = re.compile(r"\s+")


class LinkageError(ValueError):
    """Raised for invalid linkage configuration or degenerate inputs."""


def normalized_levenshtein(a: str, b: str) -> float:
    """Similarity 1 - editdistance(a, b) / max(|a|, |b|); two empty strings -> 1."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i] + [0] * len(b)
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            current[j] = min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + cost)
        previous = current
    return 1.0 - previous[-1] / max(len(a), len(b))


def normalize_person_name(name: str) -> str:
    """Lowercase, fold diacritics, collapse whitespace.  No initial expansion."""
    decomposed = unicodedata.normalize("NFKD", name)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    return _WS_RE.sub(" ", stripped.lower()).strip()


@dataclass(frozen=True, slots=True)
class CandidateMatch:
    """One (patent reference, paper) title match, before or after verification."""

    reference: tuple[str, int]  # (patent_id, index into npl_refs)
    paper_id: str
    title_distance: float
    author_similarity: float = 0.0
    verified: bool = False
    flags: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class ElbowCurve:
    """Match counts along an ordered threshold grid (counts non-decreasing)."""

    grid: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.counts):
            raise LinkageError("grid and counts must have equal length")
        for a, b in zip(self.counts, self.counts[1:]):
            if b < a:
                raise LinkageError("counts must be non-decreasing along the grid")


def detect_elbow(curve: ElbowCurve) -> float:
    """Grid point farthest (perpendicular) from the chord joining the endpoints.

    Both axes are min-max normalized first so the answer is scale-free.
    A collinear curve has no knee and raises.
    """
    if len(curve.grid) < 3:
        raise LinkageError("elbow detection needs at least 3 grid points")
    if len(set(curve.counts)) == 1:
        raise LinkageError("no elbow: counts are constant along the grid")
    g0, g1 = curve.grid[0], curve.grid[-1]
    c0, c1 = curve.counts[0], curve.counts[-1]
    if g0 == g1:
        raise LinkageError("degenerate grid")
    best_idx = -1
    best_dist = 0.0
    for i, (g, c) in enumerate(zip(curve.grid, curve.counts)):
        x = (g - g0) / (g1 - g0)
        y = (c - c0) / (c1 - c0) if c1 != c0 else 0.0
        # Chord runs (0,0)->(1,1) after normalization, so the perpendicular
        # distance is |x - y| / sqrt(2); the constant factor cannot change argmax.
        dist = abs(x - y)
        if dist > best_dist + _COLLINEAR_TOL:
            best_dist = dist
            best_idx = i
    if best_idx < 0 or best_dist <= _COLLINEAR_TOL:
        raise LinkageError("no elbow: curve is collinear")
    return curve.grid[best_idx]


def ref_vector_key(patent_id: str, index: int) -> str:
    """Store key for the title vector of one patent reference string."""
    return f"{patent_id}#{index}"


def match_titles(
    refs: Sequence[tuple[str, int]],
    paper_ids: Sequence[str],
    store: VectorStore,
    distance_threshold: float,
) -> tuple[list[CandidateMatch], int]:
    """All (ref, paper) pairs with cosine title distance <= threshold.

    Candidates for one reference are ordered nearest paper first.  References
    without a vector are skipped; the skip count is returned alongside.
    """
    usable_papers = sorted(p for p in paper_ids if p in store)
    missing_papers = len(paper_ids) - len(usable_papers)
    if missing_papers:
        logger.warning("match_titles: %d papers have no title vector", missing_papers)
    if not usable_papers:
        return [], len(refs)
    matrix = np.stack([store.get(p) for p in usable_papers]).astype(np.float64)
    matrix /= np.linalg.norm(matrix, axis=1, keepdims=True)

    candidates: list[CandidateMatch] = []
    skipped = 0
    for patent_id, index in refs:
        key = ref_vector_key(patent_id, index)
        if key not in store:
            skipped += 1
            continue
        q = store.get(key).astype(np.float64)
        q /= np.linalg.norm(q)
        distances = 1.0 - matrix @ q
        hits = sorted(
            (float(distances[i]), usable_papers[i])
            for i in np.flatnonzero(distances <= distance_threshold)
        )
        for dist, paper_id in hits:
            candidates.append(
                CandidateMatch(reference=(patent_id, index), paper_id=paper_id, title_distance=dist)
            )
    return candidates, skipped


def verify_authors(
    candidate: CandidateMatch,
    paper_authors: Sequence[str],
    ref_authors: Sequence[str],
    sim_threshold: float = DEFAULT_AUTHOR_THRESHOLD,
) -> CandidateMatch:
    """Attach the best cross-list author similarity; verified iff strictly above.

    The rule is "any author pair above threshold": the maximum similarity over
    all (paper author, reference author) pairs on normalized names decides.
    An empty list on either side cannot verify and is flagged.
    """
    if not paper_authors or not ref_authors:
        return replace(
            candidate,
            author_similarity=0.0,
            verified=False,
            flags=candidate.flags + ("empty-author-list",),
        )
    best = 0.0
    for pa in paper_authors:
        npa = normalize_person_name(pa)
        for ra in ref_authors:
            best = max(best, normalized_levenshtein(npa, normalize_person_name(ra)))
    return replace(candidate, author_similarity=best, verified=best > sim_threshold)


@dataclass(frozen=True, slots=True)
class LinkageConfig:
    """Thresholds (numeric or "auto"), grids, and the censoring horizon."""

    title_threshold: float | str = DEFAULT_TITLE_THRESHOLD
    author_threshold: float | str = DEFAULT_AUTHOR_THRESHOLD
    title_grid_start: float = 0.0
    title_grid_stop: float = 0.20
    title_grid_step: float = 0.01
    author_grid_start: float = 0.95
    author_grid_stop: float = 0.05
    author_grid_step: float = 0.05
    horizon_year: int = DEFAULT_HORIZON_YEAR

    def __post_init__(self) -> None:
        for value, name in (
            (self.title_threshold, "title_threshold"),
            (self.author_threshold, "author_threshold"),
        ):
            if isinstance(value, str) and value != "auto":
                raise LinkageError(f"{name} must be a number or 'auto', got {value!r}")

    def title_grid(self) -> tuple[float, ...]:
        n = round((self.title_grid_stop - self.title_grid_start) / self.title_grid_step)
        return tuple(round(self.title_grid_start + i * self.title_grid_step, 10) for i in range(n + 1))

    def author_grid(self) -> tuple[float, ...]:
        n = round((self.author_grid_start - self.author_grid_stop) / self.author_grid_step)
        return tuple(round(self.author_grid_start - i * self.author_grid_step, 10) for i in range(n + 1))

    @classmethod
    def from_json(cls, text: str) -> "LinkageConfig":
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise LinkageError(f"invalid linkage config: {exc}") from exc
        if not isinstance(payload, dict):
            raise LinkageError("linkage config must be a JSON object")
        known = {f for f in cls.__dataclass_fields__}  # type: ignore[attr-defined]
        unknown = set(payload) - known
        if unknown:
            raise LinkageError(f"unknown linkage config keys: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def load(cls, path: str | Path) -> "LinkageConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True, slots=True)
class LinkageResult:
    """Verified edges plus per-paper first-event / censoring times in years."""

    kind: str  # "patents" | "repositories"
    edges: frozenset[tuple[str, str]]
    edge_scores: dict[tuple[str, str], tuple[float, float]] = field(default_factory=dict)
    first_event: dict[str, int] = field(default_factory=dict)
    censored_at: dict[str, int] = field(default_factory=dict)
    skipped: int = 0
    clamped: int = 0
    title_threshold: float | None = None
    author_threshold: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("patents", "repositories"):
            raise LinkageError(f"unknown linkage kind: {self.kind!r}")
        overlap = set(self.first_event) & set(self.censored_at)
        if overlap:
            raise LinkageError(f"papers both linked and censored: {sorted(overlap)[:3]}")

    def linked_paper_ids(self) -> frozenset[str]:
        return frozenset(paper_id for paper_id, _ in self.edges)

    def survival_rows(self) -> list[tuple[int, bool]]:
        """(time, is_event) rows for the Kaplan-Meier estimator."""
        rows = [(t, True) for t in self.first_event.values()]
        rows += [(t, False) for t in self.censored_at.values()]
        return sorted(rows)


def _resolve_threshold(
    setting: float | str,
    curve_builder,
    default: float,
    label: str,
) -> float:
    if setting != "auto":
        return float(setting)
    curve = curve_builder()
    try:
        chosen = detect_elbow(curve)
    except LinkageError as exc:
        logger.warning("auto %s threshold: %s; falling back to %.2f", label, exc, default)
        return default
    logger.info("auto %s threshold via elbow: %.4f", label, chosen)
    return chosen


def link_patents(
    papers: Mapping[str, PaperRecord],
    patents: Mapping[str, PatentRecord],
    store: VectorStore,
    cfg: LinkageConfig | None = None,
) -> LinkageResult:
    """Verified paper-to-patent citation edges and first-citation times."""
    cfg = cfg or LinkageConfig()
    refs: list[tuple[str, int]] = []
    ref_authors: dict[tuple[str, int], tuple[str, ...]] = {}
    for patent_id in sorted(patents):
        for index, ref in enumerate(patents[patent_id].npl_refs):
            if not ref.linkable:
                continue
            refs.append((patent_id, index))
            ref_authors[(patent_id, index)] = ref.extracted_authors

    paper_ids = sorted(papers)
    grid = cfg.title_grid()
    loose_candidates, skipped = match_titles(refs, paper_ids, store, grid[-1])

    def title_curve() -> ElbowCurve:
        distances = sorted(c.title_distance for c in loose_candidates)
        counts = tuple(sum(1 for d in distances if d <= g) for g in grid)
        return ElbowCurve(grid=grid, counts=counts)

    title_thr = _resolve_threshold(
        cfg.title_threshold, title_curve, DEFAULT_TITLE_THRESHOLD, "title"
    )

    within = [c for c in loose_candidates if c.title_distance <= title_thr]
    scored = [
        verify_authors(c, [a.name for a in papers[c.paper_id].authors], ref_authors[c.reference], 0.0)
        for c in within
    ]

    def author_curve() -> ElbowCurve:
        agrid = cfg.author_grid()
        sims = sorted(c.author_similarity for c in scored)
        counts = tuple(sum(1 for s in sims if s > g) for g in agrid)
        return ElbowCurve(grid=agrid, counts=counts)

    author_thr = _resolve_threshold(
        cfg.author_threshold, author_curve, DEFAULT_AUTHOR_THRESHOLD, "author"
    )
    verified = [
        replace(c, verified=True)
        for c in scored
        if c.author_similarity > author_thr and "empty-author-list" not in c.flags
    ]

    edges: set[tuple[str, str]] = set()
    edge_scores: dict[tuple[str, str], tuple[float, float]] = {}
    event_year: dict[str, int] = {}
    for cand in verified:
        patent_id = cand.reference[0]
        edge = (cand.paper_id, patent_id)
        score = (cand.title_distance, cand.author_similarity)
        if edge not in edge_scores or score < edge_scores[edge]:
            edge_scores[edge] = score
        edges.add(edge)
        year = patents[patent_id].year
        if cand.paper_id not in event_year or year < event_year[cand.paper_id]:
            event_year[cand.paper_id] = year

    first_event: dict[str, int] = {}
    censored_at: dict[str, int] = {}
    clamped = 0
    for paper_id, paper in papers.items():
        if paper_id in event_year:
            lag = event_year[paper_id] - paper.year
            if lag < 0:
                logger.warning(
                    "patent event precedes paper %s (%d < %d); clamping to 0",
                    paper_id,
                    event_year[paper_id],
                    paper.year,
                )
                clamped += 1
                lag = 0
            first_event[paper_id] = lag
        else:
            censored_at[paper_id] = max(cfg.horizon_year - paper.year, 0)

    return LinkageResult(
        kind="patents",
        edges=frozenset(edges),
        edge_scores=edge_scores,
        first_event=first_event,
        censored_at=censored_at,
        skipped=skipped,
        clamped=clamped,
        title_threshold=title_thr,
        author_threshold=author_thr,
    )


def link_repos(
    papers: Mapping[str, PaperRecord],
    repo_links: Iterable[RepoLink],
    horizon_year: int = DEFAULT_HORIZON_YEAR,
) -> LinkageResult:
    """Paper-to-repository edges with first star/fork (or creation) times."""
    edges: set[tuple[str, str]] = set()
    event_year: dict[str, int] = {}
    skipped = 0
    for link in repo_links:
        if link.paper_id not in papers:
            skipped += 1
            continue
        edges.add((link.paper_id, link.repo_url))
        year = link.first_event_year
        if link.paper_id not in event_year or year < event_year[link.paper_id]:
            event_year[link.paper_id] = year
    if skipped:
        logger.warning("link_repos: %d rows referenced unknown papers", skipped)

    first_event: dict[str, int] = {}
    censored_at: dict[str, int] = {}
    clamped = 0
    for paper_id, paper in papers.items():
        if paper_id in event_year:
            lag = event_year[paper_id] - paper.year
            if lag < 0:
                logger.warning(
                    "repo event precedes paper %s (%d < %d); clamping to 0",
                    paper_id,
                    event_year[paper_id],
                    paper.year,
                )
                clamped += 1
                lag = 0
            first_event[paper_id] = lag
        else:
            censored_at[paper_id] = max(horizon_year - paper.year, 0)

    return LinkageResult(
        kind="repositories",
        edges=frozenset(edges),
        first_event=first_event,
        censored_at=censored_at,
        skipped=skipped,
        clamped=clamped,
    )


def write_edges(result: LinkageResult, path: str | Path) -> None:
    """Delimited edge file: paper_id, target_id, kind, scores, event_time."""
    lines = ["paper_id\ttarget_id\tkind\ttitle_distance\tauthor_similarity\tevent_time"]
    for paper_id, target_id in sorted(result.edges):
        title_d, author_s = result.edge_scores.get((paper_id, target_id), (math.nan, math.nan))
        score_a = "" if math.isnan(title_d) else f"{title_d:.6f}"
        score_b = "" if math.isnan(author_s) else f"{author_s:.6f}"
        event = result.first_event.get(paper_id, "")
        lines.append(f"{paper_id}\t{target_id}\t{result.kind}\t{score_a}\t{score_b}\t{event}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
