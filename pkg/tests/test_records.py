"""Record parsing, validation, and canonical line round-trips."""

import json
from datetime import date

import pytest

from raimpact.records import (
    Author,
    PaperRecord,
    PatentRecord,
    RecordError,
    ReferenceString,
    RepoLink,
)


def paper_obj(**overrides):
    obj = {
        "paper_id": "p1",
        "title": "A Study of Things",
        "year": 2019,
        "venue": "conf-a",
        "abstract": "We study things.",
        "authors": [{"name": "Ada One", "institutions": ["inst-a"]}],
        "citation_count": 4,
        "outgoing_refs": ["p0"],
    }
    obj.update(overrides)
    return obj


class TestPaperRecord:
    def test_round_trip_is_byte_identical(self):
        record = PaperRecord.from_json(paper_obj())
        line = record.to_line()
        assert PaperRecord.from_json(json.loads(line)).to_line() == line

    def test_canonical_line_sorts_keys_and_uses_compact_separators(self):
        line = PaperRecord.from_json(paper_obj()).to_line()
        keys = list(json.loads(line))
        assert keys == sorted(keys)
        assert ": " not in line and ", " not in line

    def test_none_valued_optionals_are_omitted(self):
        record = PaperRecord.from_json({"paper_id": "p1", "title": "T", "year": 2020})
        obj = json.loads(record.to_line())
        assert "venue" not in obj and "abstract" not in obj and "doi" not in obj
        assert record.venue is None

    @pytest.mark.parametrize("missing", ["paper_id", "title", "year"])
    def test_missing_required_field_raises(self, missing):
        obj = paper_obj()
        del obj[missing]
        with pytest.raises(RecordError, match=missing):
            PaperRecord.from_json(obj)

    def test_bool_is_not_a_valid_year(self):
        with pytest.raises(RecordError):
            PaperRecord.from_json(paper_obj(year=True))

    def test_negative_citation_count_rejected(self):
        with pytest.raises(RecordError, match="citation_count"):
            PaperRecord.from_json(paper_obj(citation_count=-1))

    def test_null_citation_count_defaults_to_zero(self):
        assert PaperRecord.from_json(paper_obj(citation_count=None)).citation_count == 0

    def test_empty_paper_id_rejected(self):
        with pytest.raises(RecordError, match="paper_id"):
            PaperRecord.from_json(paper_obj(paper_id=""))

    def test_author_string_shorthand(self):
        record = PaperRecord.from_json(paper_obj(authors=["Bo Two"]))
        assert record.authors == (Author(name="Bo Two"),)

    def test_bad_author_entry_rejected(self):
        with pytest.raises(RecordError):
            PaperRecord.from_json(paper_obj(authors=[42]))


class TestPatentRecord:
    def test_round_trip_and_year(self):
        obj = {
            "patent_id": "pt1",
            "pub_date": "2021-03-15",
            "country_code": "US",
            "inventors": ["Cy Three"],
            "title": "Device",
            "abstract": "A device.",
            "npl_refs": [{"raw": "r", "extracted_title": "A Study", "extracted_authors": ["Ada One"]}],
        }
        record = PatentRecord.from_json(obj)
        assert record.year == 2021
        assert record.pub_date == date(2021, 3, 15)
        line = record.to_line()
        assert PatentRecord.from_json(json.loads(line)).to_line() == line

    def test_bad_date_rejected(self):
        with pytest.raises(RecordError, match="pub_date"):
            PatentRecord.from_json({"patent_id": "pt1", "pub_date": "2021-13-01"})

    def test_missing_date_rejected(self):
        with pytest.raises(RecordError, match="pub_date"):
            PatentRecord.from_json({"patent_id": "pt1"})

    def test_reference_linkable_requires_extracted_title(self):
        assert ReferenceString(raw="x", extracted_title="T").linkable
        assert not ReferenceString(raw="x", extracted_title="").linkable


class TestRepoLink:
    def test_first_event_year_prefers_star_or_fork(self):
        link = RepoLink.from_json(
            {
                "paper_id": "p1",
                "repo_url": "https://example.org/r",
                "created_at": "2019-05-01",
                "first_star_or_fork_at": "2020-02-01",
            }
        )
        assert link.first_event_year == 2020

    def test_first_event_year_falls_back_to_creation(self):
        link = RepoLink.from_json(
            {"paper_id": "p1", "repo_url": "https://example.org/r", "created_at": "2019-05-01"}
        )
        assert link.first_star_or_fork_at is None
        assert link.first_event_year == 2019

    def test_round_trip_omits_absent_event_date(self):
        link = RepoLink.from_json(
            {"paper_id": "p1", "repo_url": "https://example.org/r", "created_at": "2019-05-01"}
        )
        line = link.to_line()
        assert "first_star_or_fork_at" not in json.loads(line)
        assert RepoLink.from_json(json.loads(line)).to_line() == line
