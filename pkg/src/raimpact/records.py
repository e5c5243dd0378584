"""Bibliographic record types and their canonical line-delimited JSON form.

One record per line, UTF-8, canonical form = sorted keys, compact separators,
``None``-valued optional fields omitted.  ``parse -> serialize`` of a canonical
line reproduces it byte for byte, which is what makes corpus snapshots
content-addressable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from typing import Any, Mapping


class RecordError(ValueError):
    """A record line could not be parsed into a valid record."""


def canonical_json_line(obj: Mapping[str, Any]) -> str:
    """Serialize a mapping as one canonical JSON line (without newline)."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def _require(obj: Mapping[str, Any], key: str, kind: type) -> Any:
    if key not in obj or obj[key] is None:
        raise RecordError(f"missing required field {key!r}")
    value = obj[key]
    if kind is int and isinstance(value, bool):
        raise RecordError(f"field {key!r} must be {kind.__name__}, got bool")
    if not isinstance(value, kind):
        raise RecordError(f"field {key!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _opt_str(obj: Mapping[str, Any], key: str) -> str | None:
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, str):
        raise RecordError(f"field {key!r} must be str or null")
    return value


def _parse_date(raw: Any, key: str) -> date:
    if not isinstance(raw, str):
        raise RecordError(f"field {key!r} must be an ISO date string")
    try:
        return date.fromisoformat(raw)
    except ValueError as exc:
        raise RecordError(f"field {key!r} is not a valid ISO date: {raw!r}") from exc


@dataclass(frozen=True, slots=True)
class Author:
    name: str
    institutions: tuple[str, ...] = ()

    @classmethod
    def from_json(cls, obj: Any) -> "Author":
        if isinstance(obj, str):
            return cls(name=obj)
        if not isinstance(obj, dict):
            raise RecordError("author entries must be objects or strings")
        name = _require(obj, "name", str)
        insts = obj.get("institutions", [])
        if not isinstance(insts, list) or not all(isinstance(i, str) for i in insts):
            raise RecordError("author institutions must be a list of strings")
        return cls(name=name, institutions=tuple(insts))

    def to_json(self) -> dict[str, Any]:
        return {"name": self.name, "institutions": list(self.institutions)}


@dataclass(frozen=True, slots=True)
class PaperRecord:
    """A research paper as ingested from a line-delimited export."""

    paper_id: str
    title: str
    year: int
    venue: str | None = None
    abstract: str | None = None
    authors: tuple[Author, ...] = ()
    citation_count: int = 0
    outgoing_refs: tuple[str, ...] = ()
    is_open_access: bool | None = None
    doi: str | None = None
    arxiv: str | None = None
    language: str | None = None

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "PaperRecord":
        paper_id = _require(obj, "paper_id", str)
        if not paper_id:
            raise RecordError("paper_id must be non-empty")
        title = _require(obj, "title", str)
        year = _require(obj, "year", int)
        citation_count = obj.get("citation_count", 0)
        if citation_count is None:
            citation_count = 0
        if isinstance(citation_count, bool) or not isinstance(citation_count, int):
            raise RecordError("citation_count must be an integer")
        if citation_count < 0:
            raise RecordError("citation_count must be non-negative")
        authors_raw = obj.get("authors", [])
        if not isinstance(authors_raw, list):
            raise RecordError("authors must be a list")
        refs_raw = obj.get("outgoing_refs", [])
        if not isinstance(refs_raw, list) or not all(isinstance(r, str) for r in refs_raw):
            raise RecordError("outgoing_refs must be a list of strings")
        is_oa = obj.get("is_open_access")
        if is_oa is not None and not isinstance(is_oa, bool):
            raise RecordError("is_open_access must be a boolean or null")
        return cls(
            paper_id=paper_id,
            title=title,
            year=year,
            venue=_opt_str(obj, "venue"),
            abstract=_opt_str(obj, "abstract"),
            authors=tuple(Author.from_json(a) for a in authors_raw),
            citation_count=citation_count,
            outgoing_refs=tuple(refs_raw),
            is_open_access=is_oa,
            doi=_opt_str(obj, "doi"),
            arxiv=_opt_str(obj, "arxiv"),
            language=_opt_str(obj, "language"),
        )

    def to_json(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "paper_id": self.paper_id,
            "title": self.title,
            "year": self.year,
            "authors": [a.to_json() for a in self.authors],
            "citation_count": self.citation_count,
            "outgoing_refs": list(self.outgoing_refs),
        }
        for key in ("venue", "abstract", "is_open_access", "doi", "arxiv", "language"):
            value = getattr(self, key)
            if value is not None:
                obj[key] = value
        return obj

    def to_line(self) -> str:
        return canonical_json_line(self.to_json())


@dataclass(frozen=True, slots=True)
class ReferenceString:
    """A non-patent-literature reference as extracted from a patent."""

    raw: str
    extracted_title: str
    extracted_authors: tuple[str, ...] = ()

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "ReferenceString":
        if not isinstance(obj, dict):
            raise RecordError("npl_refs entries must be objects")
        raw = obj.get("raw", "")
        if not isinstance(raw, str):
            raise RecordError("reference raw text must be a string")
        title = obj.get("extracted_title", "")
        if not isinstance(title, str):
            raise RecordError("extracted_title must be a string")
        authors = obj.get("extracted_authors", [])
        if not isinstance(authors, list) or not all(isinstance(a, str) for a in authors):
            raise RecordError("extracted_authors must be a list of strings")
        return cls(raw=raw, extracted_title=title, extracted_authors=tuple(authors))

    def to_json(self) -> dict[str, Any]:
        return {
            "raw": self.raw,
            "extracted_title": self.extracted_title,
            "extracted_authors": list(self.extracted_authors),
        }

    @property
    def linkable(self) -> bool:
        """Only references with a non-empty extracted title can be matched."""
        return bool(self.extracted_title)


@dataclass(frozen=True, slots=True)
class PatentRecord:
    patent_id: str
    pub_date: date
    country_code: str = ""
    inventors: tuple[str, ...] = ()
    title: str = ""
    abstract: str = ""
    npl_refs: tuple[ReferenceString, ...] = ()

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "PatentRecord":
        patent_id = _require(obj, "patent_id", str)
        if not patent_id:
            raise RecordError("patent_id must be non-empty")
        pub_date = _parse_date(obj.get("pub_date"), "pub_date")
        inventors = obj.get("inventors", [])
        if not isinstance(inventors, list) or not all(isinstance(i, str) for i in inventors):
            raise RecordError("inventors must be a list of strings")
        refs_raw = obj.get("npl_refs", [])
        if not isinstance(refs_raw, list):
            raise RecordError("npl_refs must be a list")
        return cls(
            patent_id=patent_id,
            pub_date=pub_date,
            country_code=obj.get("country_code", "") or "",
            inventors=tuple(inventors),
            title=obj.get("title", "") or "",
            abstract=obj.get("abstract", "") or "",
            npl_refs=tuple(ReferenceString.from_json(r) for r in refs_raw),
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "patent_id": self.patent_id,
            "pub_date": self.pub_date.isoformat(),
            "country_code": self.country_code,
            "inventors": list(self.inventors),
            "title": self.title,
            "abstract": self.abstract,
            "npl_refs": [r.to_json() for r in self.npl_refs],
        }

    def to_line(self) -> str:
        return canonical_json_line(self.to_json())

    @property
    def year(self) -> int:
        return self.pub_date.year


@dataclass(frozen=True, slots=True)
class RepoLink:
    """Association between a paper and a code repository."""

    paper_id: str
    repo_url: str
    created_at: date
    first_star_or_fork_at: date | None = None

    @classmethod
    def from_json(cls, obj: Mapping[str, Any]) -> "RepoLink":
        paper_id = _require(obj, "paper_id", str)
        repo_url = _require(obj, "repo_url", str)
        created_at = _parse_date(obj.get("created_at"), "created_at")
        first_event = obj.get("first_star_or_fork_at")
        return cls(
            paper_id=paper_id,
            repo_url=repo_url,
            created_at=created_at,
            first_star_or_fork_at=(
                _parse_date(first_event, "first_star_or_fork_at") if first_event is not None else None
            ),
        )

    def to_json(self) -> dict[str, Any]:
        obj: dict[str, Any] = {
            "paper_id": self.paper_id,
            "repo_url": self.repo_url,
            "created_at": self.created_at.isoformat(),
        }
        if self.first_star_or_fork_at is not None:
            obj["first_star_or_fork_at"] = self.first_star_or_fork_at.isoformat()
        return obj

    def to_line(self) -> str:
        return canonical_json_line(self.to_json())

    @property
    def first_event_year(self) -> int:
        """Year of the first star/fork, falling back to repo creation."""
        if self.first_star_or_fork_at is not None:
            return self.first_star_or_fork_at.year
        return self.created_at.year
