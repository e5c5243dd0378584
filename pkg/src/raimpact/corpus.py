"""Corpus ingestion, filtering, and the studied/complement partition.

Loaders consume line-delimited record files in a single pass, apply the
configured filters, and report a per-reason tally of rejected rows.  The
resulting corpus objects are immutable snapshots: downstream metric code only
ever reads them, so they are safe to share across threads.
"""

from __future__ import annotations

import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator, Mapping

from .records import (
    PaperRecord,
    PatentRecord,
    RecordError,
    RepoLink,
)

logger = logging.getLogger(__name__)

# Metadata fields whose presence the upstream export guaranteed; a filter
# config may require any subset of these beyond the always-required core
# (paper_id, title, year).
FULL_METADATA_FIELDS = (
    "venue",
    "title",
    "year",
    "citation_count",
    "outgoing_refs",
    "doi",
    "arxiv",
    "authors",
    "is_open_access",
    "abstract",
)

DEFAULT_REQUIRED_FIELDS = ("title", "abstract", "venue", "year", "authors", "citation_count")


class IngestError(ValueError):
    """Raised on malformed input in strict mode, or on duplicate ids."""


@dataclass(frozen=True)
class FilterConfig:
    """Row filters applied during ingestion.

    ``year_min``/``year_max`` bound the publication year (inclusive);
    ``required_fields`` lists metadata fields that must be present and
    non-empty; ``language`` is a metadata tag check (no detection);
    ``venue_blocklist``/``id_blocklist`` drop non-research material
    (benchmarks, tutorials, surveys) by venue or record id.
    """

    year_min: int = 1980
    year_max: int = 2022
    required_fields: tuple[str, ...] = DEFAULT_REQUIRED_FIELDS
    language: str | None = None
    venue_blocklist: frozenset[str] = frozenset()
    id_blocklist: frozenset[str] = frozenset()
    strict: bool = False

    def __post_init__(self) -> None:
        if self.year_min > self.year_max:
            raise ValueError("year_min must not exceed year_max")
        unknown = set(self.required_fields) - set(FULL_METADATA_FIELDS)
        if unknown:
            raise ValueError(f"unknown required fields: {sorted(unknown)}")

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "FilterConfig":
        return cls(
            year_min=int(obj.get("year_min", 1980)),
            year_max=int(obj.get("year_max", 2022)),
            required_fields=tuple(obj.get("required_fields", DEFAULT_REQUIRED_FIELDS)),
            language=obj.get("language"),
            venue_blocklist=frozenset(obj.get("venue_blocklist", ())),
            id_blocklist=frozenset(obj.get("id_blocklist", ())),
            strict=bool(obj.get("strict", False)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "FilterConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass
class IngestReport:
    """Outcome of one ingestion pass: retained count plus rejections by reason."""

    retained: int = 0
    rejected: Counter = field(default_factory=Counter)

    @property
    def total_seen(self) -> int:
        return self.retained + sum(self.rejected.values())

    def to_json(self) -> dict[str, Any]:
        return {"retained": self.retained, "rejected": dict(sorted(self.rejected.items()))}


def _iter_lines(source: str | Path | Iterable[str]) -> Iterator[tuple[int, str]]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                yield lineno, line
    else:
        for lineno, line in enumerate(source, start=1):
            yield lineno, line


def _field_present(record: PaperRecord, name: str) -> bool:
    value = getattr(record, name)
    if value is None:
        return False
    if isinstance(value, (str, tuple)):
        return len(value) > 0
    return True


class PaperCorpus:
    """Immutable id-keyed collection of retained papers."""

    def __init__(self, papers: Iterable[PaperRecord], report: IngestReport | None = None):
        self._papers: dict[str, PaperRecord] = {}
        for p in papers:
            if p.paper_id in self._papers:
                raise IngestError(f"duplicate paper_id {p.paper_id!r}")
            self._papers[p.paper_id] = p
        self.report = report or IngestReport(retained=len(self._papers))

    def __len__(self) -> int:
        return len(self._papers)

    def __iter__(self) -> Iterator[PaperRecord]:
        return iter(self._papers.values())

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._papers

    def __getitem__(self, paper_id: str) -> PaperRecord:
        return self._papers[paper_id]

    def get(self, paper_id: str) -> PaperRecord | None:
        return self._papers.get(paper_id)

    @property
    def ids(self) -> Iterator[str]:
        return iter(self._papers.keys())

    def venue_of(self, paper_id: str) -> str | None:
        record = self._papers.get(paper_id)
        return record.venue if record is not None else None

    def subset(self, paper_ids: Iterable[str]) -> "PaperCorpus":
        wanted = set(paper_ids)
        return PaperCorpus([p for p in self if p.paper_id in wanted])

    def serialize(self, path: str | Path) -> None:
        write_records(path, self)


class PatentCorpus:
    def __init__(self, patents: Iterable[PatentRecord], report: IngestReport | None = None):
        self._patents: dict[str, PatentRecord] = {}
        for p in patents:
            if p.patent_id in self._patents:
                raise IngestError(f"duplicate patent_id {p.patent_id!r}")
            self._patents[p.patent_id] = p
        self.report = report or IngestReport(retained=len(self._patents))

    def __len__(self) -> int:
        return len(self._patents)

    def __iter__(self) -> Iterator[PatentRecord]:
        return iter(self._patents.values())

    def __contains__(self, patent_id: str) -> bool:
        return patent_id in self._patents

    def __getitem__(self, patent_id: str) -> PatentRecord:
        return self._patents[patent_id]

    def linkable_reference_count(self) -> int:
        return sum(1 for p in self for r in p.npl_refs if r.linkable)

    def serialize(self, path: str | Path) -> None:
        write_records(path, self)


@dataclass
class RepoLinkTable:
    """Repository links grouped by paper, with the ingest report."""

    links: tuple[RepoLink, ...]
    report: IngestReport

    def by_paper(self) -> dict[str, list[RepoLink]]:
        grouped: dict[str, list[RepoLink]] = {}
        for link in self.links:
            grouped.setdefault(link.paper_id, []).append(link)
        return grouped

    def __len__(self) -> int:
        return len(self.links)

    def __iter__(self) -> Iterator[RepoLink]:
        return iter(self.links)

    def serialize(self, path: str | Path) -> None:
        write_records(path, self)


def load_papers(source: str | Path | Iterable[str], cfg: FilterConfig | None = None) -> PaperCorpus:
    """Load papers from a line-delimited file, keeping rows that pass all filters.

    Malformed rows are counted and skipped (aborted in strict mode); a
    duplicate ``paper_id`` among retained rows is always an error.
    """
    cfg = cfg or FilterConfig()
    report = IngestReport()
    retained: dict[str, PaperRecord] = {}
    for lineno, line in _iter_lines(source):
        line = line.strip()
        if not line:
            continue
        try:
            record = PaperRecord.from_json(json.loads(line))
        except (json.JSONDecodeError, RecordError) as exc:
            if cfg.strict:
                raise IngestError(f"line {lineno}: {exc}") from exc
            report.rejected["malformed"] += 1
            continue
        reason = _paper_reject_reason(record, cfg)
        if reason is not None:
            report.rejected[reason] += 1
            continue
        if record.paper_id in retained:
            raise IngestError(f"line {lineno}: duplicate paper_id {record.paper_id!r}")
        retained[record.paper_id] = record
        report.retained += 1
    return PaperCorpus(retained.values(), report)


def _paper_reject_reason(record: PaperRecord, cfg: FilterConfig) -> str | None:
    if not (cfg.year_min <= record.year <= cfg.year_max):
        return "year"
    for name in cfg.required_fields:
        if not _field_present(record, name):
            return "missing-field"
    if cfg.language is not None and record.language != cfg.language:
        return "language"
    if record.paper_id in cfg.id_blocklist:
        return "blocklist"
    if record.venue is not None and record.venue in cfg.venue_blocklist:
        return "blocklist"
    return None


def load_patents(source: str | Path | Iterable[str], cfg: FilterConfig | None = None) -> PatentCorpus:
    """Load patents, filtering on publication year and the id blocklist."""
    cfg = cfg or FilterConfig()
    report = IngestReport()
    retained: dict[str, PatentRecord] = {}
    for lineno, line in _iter_lines(source):
        line = line.strip()
        if not line:
            continue
        try:
            record = PatentRecord.from_json(json.loads(line))
        except (json.JSONDecodeError, RecordError) as exc:
            if cfg.strict:
                raise IngestError(f"line {lineno}: {exc}") from exc
            report.rejected["malformed"] += 1
            continue
        if not (cfg.year_min <= record.year <= cfg.year_max):
            report.rejected["year"] += 1
            continue
        if record.patent_id in cfg.id_blocklist:
            report.rejected["blocklist"] += 1
            continue
        if record.patent_id in retained:
            raise IngestError(f"line {lineno}: duplicate patent_id {record.patent_id!r}")
        retained[record.patent_id] = record
        report.retained += 1
    return PatentCorpus(retained.values(), report)


def load_repo_links(source: str | Path | Iterable[str], strict: bool = False) -> RepoLinkTable:
    """Load paper-repository links; malformed rows are counted and skipped."""
    report = IngestReport()
    links: list[RepoLink] = []
    for lineno, line in _iter_lines(source):
        line = line.strip()
        if not line:
            continue
        try:
            link = RepoLink.from_json(json.loads(line))
        except (json.JSONDecodeError, RecordError) as exc:
            if strict:
                raise IngestError(f"line {lineno}: {exc}") from exc
            report.rejected["malformed"] += 1
            continue
        links.append(link)
        report.retained += 1
    return RepoLinkTable(links=tuple(links), report=report)


def write_records(path: str | Path, records: Iterable[Any]) -> None:
    """Write records to a line-delimited file in canonical form."""
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(record.to_line())
            fh.write("\n")


@dataclass(frozen=True)
class CorpusPartition:
    """Disjoint split of the corpus into studied venues and their complement.

    ``citing_kind`` tags which citing-entity set (patents or repositories)
    downstream ratios are computed against.
    """

    studied: frozenset[str]
    complement: frozenset[str]
    citing_kind: str | None = None

    def __post_init__(self) -> None:
        if self.studied & self.complement:
            raise ValueError("partition sets must be disjoint")

    @property
    def universe(self) -> frozenset[str]:
        return self.studied | self.complement

    def with_kind(self, kind: str) -> "CorpusPartition":
        if kind not in ("patents", "repositories"):
            raise ValueError(f"unknown citing kind {kind!r}")
        return CorpusPartition(self.studied, self.complement, kind)


def partition(corpus: PaperCorpus, venue_set: Iterable[str]) -> CorpusPartition:
    """Split papers into those from ``venue_set`` and all others."""
    venues = frozenset(venue_set)
    if not venues:
        raise ValueError("venue_set must be non-empty")
    studied = frozenset(p.paper_id for p in corpus if p.venue in venues)
    complement = frozenset(p.paper_id for p in corpus) - studied
    if not studied:
        logger.warning("no paper matched any of the %d selected venues", len(venues))
    return CorpusPartition(studied=studied, complement=complement)
