"""Pipeline orchestration: ingest -> classify -> link -> metrics -> conventionality.

Each stage persists its artifacts under ``<output_dir>/work`` and report files
under ``<output_dir>/report``, so stages can be rerun independently; a stage
invoked without its prerequisites on disk computes them first.  A run is fully
determined by the config (hashed into the manifest) and the input files:
rerunning produces byte-identical output, regardless of worker count.

On stage failure a ``STALE`` marker is left in the output directory so partial
bundles are never mistaken for complete ones.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal, Mapping, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from . import __version__
from .classify import (
    RaiCorpus,
    TOPICS,
    TopicAssignment,
    build_keyword_queries,
    load_keyword_table,
    query_variant_texts,
    retain_rai_papers,
)
from .conventionality import ConventionalityReport, score_corpus
from .corpus import (
    CorpusPartition,
    FilterConfig,
    PaperCorpus,
    PatentCorpus,
    RepoLinkTable,
    load_papers,
    load_patents,
    load_repo_links,
)
from .graph import build_citation_graph
from .linkage import (
    LinkageConfig,
    LinkageResult,
    link_patents,
    link_repos,
    ref_vector_key,
    write_edges,
)
from .metrics import MetricError, impact_ratio, rank_institutions, two_proportion_z_test
from .records import PaperRecord
from .survival import kaplan_meier
from .vectors import MockTextEmbedder, VectorStore, load_vectors, percentile_threshold, save_vectors

logger = logging.getLogger(__name__)

STAGES = ("ingest", "classify", "link", "metrics", "conventionality", "report")

WORK_DIR = "work"
REPORT_DIR = "report"
STALE_MARKER = "STALE"

REPORT_FILES = (
    "rq1_impact.tsv",
    "survival.tsv",
    "yearly_counts.tsv",
    "institutions.tsv",
    "conventionality.tsv",
    "conventionality_summary.tsv",
)


class ConfigError(ValueError):
    """Configuration invalid or referenced inputs missing (exit code 2)."""


class StageFailure(RuntimeError):
    """A pipeline stage failed after validation passed (exit code 3)."""

    def __init__(self, stage: str, cause: str):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


class PipelineConfig(BaseModel):
    """Everything a run depends on; hashing this pins the whole bundle."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    papers_path: str
    patents_path: str
    repo_links_path: str
    output_dir: str
    seed: int
    filter_config_path: str | None = None
    keyword_table_path: str | None = None
    abstract_vectors_path: str | None = None
    title_vectors_path: str | None = None
    embedding_dim: int = Field(default=256, gt=0)
    classifier_percentile: float = Field(default=99.0, gt=0.0, le=100.0)
    quality_reference_year: int = 2023
    title_threshold: Union[Literal["auto"], float] = 0.06
    author_threshold: Union[Literal["auto"], float] = 0.8
    title_grid_start: float = Field(default=0.0, ge=0.0)
    title_grid_stop: float = Field(default=0.20, gt=0.0, le=2.0)
    title_grid_step: float = Field(default=0.01, gt=0.0)
    horizon_year: int = 2022
    iterations: int = Field(default=1000, ge=2)
    include_self_pairs: bool = False
    workers: int = Field(default=1, ge=1)

    @field_validator("title_threshold", "author_threshold")
    @classmethod
    def _threshold_range(cls, v):
        if v != "auto" and not 0.0 <= float(v) <= 2.0:
            raise ValueError("numeric thresholds must lie in [0, 2]")
        return v

    @classmethod
    def from_payload(cls, payload: Mapping[str, Any]) -> "PipelineConfig":
        try:
            return cls.model_validate(dict(payload))
        except ValidationError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_payload(payload)

    def check_paths(self) -> None:
        required = {
            "papers_path": self.papers_path,
            "patents_path": self.patents_path,
            "repo_links_path": self.repo_links_path,
        }
        optional = {
            "filter_config_path": self.filter_config_path,
            "keyword_table_path": self.keyword_table_path,
            "abstract_vectors_path": self.abstract_vectors_path,
            "title_vectors_path": self.title_vectors_path,
        }
        missing = [f"{name}: {value}" for name, value in required.items() if not Path(value).is_file()]
        missing += [
            f"{name}: {value}"
            for name, value in optional.items()
            if value is not None and not Path(value).is_file()
        ]
        if missing:
            raise ConfigError("missing input files: " + "; ".join(missing))

    def config_hash(self) -> str:
        # workers is an execution detail and output_dir is only a location:
        # bundle content must be identical at any worker count and relocatable,
        # so neither may perturb the hash.
        payload = self.model_dump(mode="json", exclude={"workers", "output_dir"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def work_dir(self) -> Path:
        return Path(self.output_dir) / WORK_DIR

    def report_dir(self) -> Path:
        return Path(self.output_dir) / REPORT_DIR


@dataclass
class IngestArtifacts:
    papers: PaperCorpus
    patents: PatentCorpus
    repos: RepoLinkTable


@dataclass
class ClassifyArtifacts:
    rai: RaiCorpus
    assignments: list[TopicAssignment]
    rai_papers: dict[str, PaperRecord]


@dataclass
class LinkArtifacts:
    patents: LinkageResult
    repos: LinkageResult


def _fmt(x: float) -> str:
    return repr(float(x))


def _write(path: Path, lines: list[str]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


# --------------------------------------------------------------------------- ingest


def stage_ingest(cfg: PipelineConfig) -> IngestArtifacts:
    filter_cfg = (
        FilterConfig.load(cfg.filter_config_path) if cfg.filter_config_path else FilterConfig()
    )
    papers = load_papers(cfg.papers_path, filter_cfg)
    patents = load_patents(cfg.patents_path, filter_cfg)
    repos = load_repo_links(cfg.repo_links_path)
    if len(papers) == 0:
        raise StageFailure("ingest", "no papers survived ingestion filters")

    work = cfg.work_dir()
    work.mkdir(parents=True, exist_ok=True)
    papers.serialize(work / "papers.jsonl")
    patents.serialize(work / "patents.jsonl")
    repos.serialize(work / "repo_links.jsonl")
    report = {
        "papers": papers.report.to_json(),
        "patents": patents.report.to_json(),
        "repo_links": repos.report.to_json(),
    }
    _write(work / "ingest_report.json", [json.dumps(report, sort_keys=True, indent=2)])
    return IngestArtifacts(papers=papers, patents=patents, repos=repos)


def load_ingest(cfg: PipelineConfig) -> IngestArtifacts:
    work = cfg.work_dir()
    for name in ("papers.jsonl", "patents.jsonl", "repo_links.jsonl"):
        if not (work / name).is_file():
            raise StageFailure("ingest", f"missing artifact {work / name}; run the ingest stage")
    filter_cfg = (
        FilterConfig.load(cfg.filter_config_path) if cfg.filter_config_path else FilterConfig()
    )
    return IngestArtifacts(
        papers=load_papers(work / "papers.jsonl", filter_cfg),
        patents=load_patents(work / "patents.jsonl", filter_cfg),
        repos=load_repo_links(work / "repo_links.jsonl"),
    )


def _have_ingest(cfg: PipelineConfig) -> bool:
    work = cfg.work_dir()
    return all((work / n).is_file() for n in ("papers.jsonl", "patents.jsonl", "repo_links.jsonl"))


# --------------------------------------------------------------------------- classify


def _keyword_queries(cfg: PipelineConfig):
    table = load_keyword_table(cfg.keyword_table_path) if cfg.keyword_table_path else None
    return build_keyword_queries(table)


def _abstract_store(cfg: PipelineConfig, ingest: IngestArtifacts, queries) -> VectorStore:
    variants = sorted(query_variant_texts(queries))
    paper_ids = sorted(p.paper_id for p in ingest.papers)
    if cfg.abstract_vectors_path:
        store = load_vectors(cfg.abstract_vectors_path)
        missing = [k for k in variants + paper_ids if k not in store]
        if missing:
            raise StageFailure(
                "classify",
                f"abstract vector file lacks {len(missing)} keys (first: {missing[0]!r})",
            )
        return store
    embedder = MockTextEmbedder(dim=cfg.embedding_dim, seed=cfg.seed)
    items = [(v, v) for v in variants]
    items += [(pid, ingest.papers[pid].abstract) for pid in paper_ids]
    store = embedder.build_store(items)
    save_vectors(store, cfg.work_dir() / "vectors_abstracts.rvec")
    return store


def stage_classify(cfg: PipelineConfig, ingest: IngestArtifacts) -> ClassifyArtifacts:
    queries = _keyword_queries(cfg)
    store = _abstract_store(cfg, ingest, queries)
    rai, assignments = retain_rai_papers(
        ingest.papers,
        store,
        queries,
        percentile=cfg.classifier_percentile,
        reference_year=cfg.quality_reference_year,
    )
    rai_papers = {pid: ingest.papers[pid] for pid in rai.paper_ids}

    work = cfg.work_dir()
    work.mkdir(parents=True, exist_ok=True)
    header = "paper_id\ttopic\tbest_keyword\tbest_variant\tscore"
    _write(
        work / "assignments_all.tsv",
        [header]
        + [
            f"{a.paper_id}\t{a.topic}\t{a.best_keyword}\t{a.best_variant}\t{_fmt(a.score)}"
            for a in assignments
        ],
    )
    _write(
        work / "rai_assignments.tsv",
        [header]
        + [
            f"{a.paper_id}\t{a.topic}\t{a.best_keyword}\t{a.best_variant}\t{_fmt(a.score)}"
            for a in rai.assignments
        ],
    )
    lines = [rai_papers[pid].to_line() for pid in sorted(rai_papers)]
    _write(work / "rai_corpus.jsonl", lines if lines else [""])
    topic_counts = {t: 0 for t in TOPICS}
    for a in rai.assignments:
        topic_counts[a.topic] += 1
    meta = {
        "threshold": rai.threshold,
        "percentile": rai.percentile,
        "n_scored": len(assignments),
        "n_retained": len(rai),
        "topic_counts": topic_counts,
    }
    _write(work / "classify_meta.json", [json.dumps(meta, sort_keys=True, indent=2)])
    return ClassifyArtifacts(rai=rai, assignments=assignments, rai_papers=rai_papers)


def load_classify(cfg: PipelineConfig, ingest: IngestArtifacts) -> ClassifyArtifacts:
    work = cfg.work_dir()
    for name in ("rai_assignments.tsv", "assignments_all.tsv", "classify_meta.json"):
        if not (work / name).is_file():
            raise StageFailure("classify", f"missing artifact {work / name}; run the classify stage")

    def read_assignments(path: Path) -> list[TopicAssignment]:
        rows = []
        for line in path.read_text(encoding="utf-8").splitlines()[1:]:
            pid, topic, keyword, variant, score = line.split("\t")
            rows.append(TopicAssignment(pid, topic, keyword, variant, float(score)))
        return rows

    meta = json.loads((work / "classify_meta.json").read_text(encoding="utf-8"))
    retained = read_assignments(work / "rai_assignments.tsv")
    rai = RaiCorpus(
        assignments=tuple(retained),
        threshold=float(meta["threshold"]),
        percentile=float(meta["percentile"]),
    )
    rai_papers = {a.paper_id: ingest.papers[a.paper_id] for a in retained}
    return ClassifyArtifacts(
        rai=rai,
        assignments=read_assignments(work / "assignments_all.tsv"),
        rai_papers=rai_papers,
    )


def _have_classify(cfg: PipelineConfig) -> bool:
    work = cfg.work_dir()
    return all(
        (work / n).is_file()
        for n in ("rai_assignments.tsv", "assignments_all.tsv", "classify_meta.json")
    )


# --------------------------------------------------------------------------- link


def _title_store(cfg: PipelineConfig, ingest: IngestArtifacts) -> VectorStore:
    if cfg.title_vectors_path:
        return load_vectors(cfg.title_vectors_path)
    embedder = MockTextEmbedder(dim=cfg.embedding_dim, seed=cfg.seed)
    items = [(p.paper_id, p.title) for p in sorted(ingest.papers, key=lambda p: p.paper_id)]
    for patent in sorted(ingest.patents, key=lambda p: p.patent_id):
        for index, ref in enumerate(patent.npl_refs):
            if ref.linkable:
                items.append((ref_vector_key(patent.patent_id, index), ref.extracted_title))
    store = embedder.build_store(items)
    save_vectors(store, cfg.work_dir() / "vectors_titles.rvec")
    return store


def stage_link(cfg: PipelineConfig, ingest: IngestArtifacts) -> LinkArtifacts:
    store = _title_store(cfg, ingest)
    lcfg = LinkageConfig(
        title_threshold=cfg.title_threshold,
        author_threshold=cfg.author_threshold,
        title_grid_start=cfg.title_grid_start,
        title_grid_stop=cfg.title_grid_stop,
        title_grid_step=cfg.title_grid_step,
        horizon_year=cfg.horizon_year,
    )
    papers_map = {p.paper_id: p for p in ingest.papers}
    patents_map = {p.patent_id: p for p in ingest.patents}
    result_patents = link_patents(papers_map, patents_map, store, lcfg)
    result_repos = link_repos(papers_map, list(ingest.repos), cfg.horizon_year)

    work = cfg.work_dir()
    work.mkdir(parents=True, exist_ok=True)
    write_edges(result_patents, work / "edges_patents.tsv")
    write_edges(result_repos, work / "edges_repositories.tsv")
    for result, name in ((result_patents, "events_patents.tsv"), (result_repos, "events_repositories.tsv")):
        rows = ["paper_id\ttime\tevent"]
        for pid in sorted(result.first_event):
            rows.append(f"{pid}\t{result.first_event[pid]}\t1")
        for pid in sorted(result.censored_at):
            rows.append(f"{pid}\t{result.censored_at[pid]}\t0")
        _write(work / name, rows)
    meta = {
        "patents": {
            "title_threshold": result_patents.title_threshold,
            "author_threshold": result_patents.author_threshold,
            "edges": len(result_patents.edges),
            "skipped_refs": result_patents.skipped,
            "clamped_times": result_patents.clamped,
        },
        "repositories": {
            "edges": len(result_repos.edges),
            "skipped_rows": result_repos.skipped,
            "clamped_times": result_repos.clamped,
        },
    }
    _write(work / "link_meta.json", [json.dumps(meta, sort_keys=True, indent=2)])
    return LinkArtifacts(patents=result_patents, repos=result_repos)


def load_link(cfg: PipelineConfig) -> LinkArtifacts:
    work = cfg.work_dir()
    needed = ("edges_patents.tsv", "edges_repositories.tsv", "events_patents.tsv",
              "events_repositories.tsv", "link_meta.json")
    for name in needed:
        if not (work / name).is_file():
            raise StageFailure("link", f"missing artifact {work / name}; run the link stage")
    meta = json.loads((work / "link_meta.json").read_text(encoding="utf-8"))

    def read(kind: str, edges_name: str, events_name: str, thresholds: tuple) -> LinkageResult:
        edges = set()
        scores = {}
        for line in (work / edges_name).read_text(encoding="utf-8").splitlines()[1:]:
            pid, target, _kind, d_title, d_author, _event = line.split("\t")
            edges.add((pid, target))
            if d_title and d_author:
                scores[(pid, target)] = (float(d_title), float(d_author))
        first_event: dict[str, int] = {}
        censored_at: dict[str, int] = {}
        for line in (work / events_name).read_text(encoding="utf-8").splitlines()[1:]:
            pid, time, event = line.split("\t")
            (first_event if event == "1" else censored_at)[pid] = int(time)
        return LinkageResult(
            kind=kind,
            edges=frozenset(edges),
            edge_scores=scores,
            first_event=first_event,
            censored_at=censored_at,
            title_threshold=thresholds[0],
            author_threshold=thresholds[1],
        )

    pat_meta = meta.get("patents", {})
    return LinkArtifacts(
        patents=read(
            "patents",
            "edges_patents.tsv",
            "events_patents.tsv",
            (pat_meta.get("title_threshold"), pat_meta.get("author_threshold")),
        ),
        repos=read("repositories", "edges_repositories.tsv", "events_repositories.tsv", (None, None)),
    )


def _have_link(cfg: PipelineConfig) -> bool:
    work = cfg.work_dir()
    return all(
        (work / n).is_file()
        for n in ("edges_patents.tsv", "edges_repositories.tsv", "events_patents.tsv",
                  "events_repositories.tsv", "link_meta.json")
    )


# --------------------------------------------------------------------------- metrics


def yearly_counts(rai: RaiCorpus, papers: Mapping[str, PaperRecord]) -> dict[tuple[str, int], int]:
    """Retained-paper counts per (topic, year); they sum to the corpus size."""
    counts: dict[tuple[str, int], int] = {}
    for a in rai.assignments:
        key = (a.topic, papers[a.paper_id].year)
        counts[key] = counts.get(key, 0) + 1
    return counts


def stage_metrics(
    cfg: PipelineConfig,
    ingest: IngestArtifacts,
    classify: ClassifyArtifacts,
    link: LinkArtifacts,
) -> None:
    report_dir = cfg.report_dir()
    papers_map = {p.paper_id: p for p in ingest.papers}
    topic_of = classify.rai.topic_of()
    all_ids = frozenset(papers_map)

    # Topic-by-topic linked shares and citation shares, with a studied-vs-rest
    # two-proportion z where the pool is non-degenerate.
    rows = [
        "topic\tpapers\tinto_patents\tpct_into_patents\tinto_repos\tpct_into_repos"
        "\tcitations\tcitations_into_patents\tpct_citations_into_patents"
        "\tcitations_into_repos\tpct_citations_into_repos\tz_patents_vs_rest\tp_patents_vs_rest"
    ]
    for topic in TOPICS:
        studied = frozenset(pid for pid, t in topic_of.items() if t == topic)
        if not studied:
            continue
        part = CorpusPartition(studied=studied, complement=all_ids - studied)
        ratios_pat = impact_ratio(part.with_kind("patents"), link.patents, papers_map)
        ratios_repo = impact_ratio(part.with_kind("repositories"), link.repos, papers_map)
        try:
            ztest = two_proportion_z_test(
                ratios_pat.n_studied_linked,
                ratios_pat.n_studied,
                ratios_pat.n_complement_linked,
                ratios_pat.n_complement,
            )
            z_cell, p_cell = _fmt(ztest.statistic), _fmt(ztest.p_value)
        except MetricError:
            z_cell, p_cell = "", ""
        rows.append(
            f"{topic}\t{ratios_pat.n_studied}"
            f"\t{ratios_pat.n_studied_linked}\t{100 * ratios_pat.ratio_studied:.1f}"
            f"\t{ratios_repo.n_studied_linked}\t{100 * ratios_repo.ratio_studied:.1f}"
            f"\t{ratios_pat.citations_studied}"
            f"\t{ratios_pat.citations_studied_linked}\t{100 * ratios_pat.citation_ratio:.1f}"
            f"\t{ratios_repo.citations_studied_linked}\t{100 * ratios_repo.citation_ratio:.1f}"
            f"\t{z_cell}\t{p_cell}"
        )
    _write(report_dir / "rq1_impact.tsv", rows)

    surv_rows = ["kind\ttopic\ttime\tat_risk\tevents\tcensored\tsurvival"]
    for result in (link.patents, link.repos):
        for topic in TOPICS:
            topic_ids = sorted(pid for pid, t in topic_of.items() if t == topic)
            subject_rows = []
            for pid in topic_ids:
                if pid in result.first_event:
                    subject_rows.append((result.first_event[pid], True))
                elif pid in result.censored_at:
                    subject_rows.append((result.censored_at[pid], False))
            if not subject_rows:
                continue
            curve = kaplan_meier(subject_rows)
            for point in curve.points:
                surv_rows.append(
                    f"{result.kind}\t{topic}\t{point.time}\t{point.at_risk}"
                    f"\t{point.events}\t{point.censored}\t{_fmt(point.survival)}"
                )
    _write(report_dir / "survival.tsv", surv_rows)

    counts = yearly_counts(classify.rai, papers_map)
    year_rows = ["topic\tyear\tcount"]
    for (topic, year), count in sorted(counts.items()):
        year_rows.append(f"{topic}\t{year}\t{count}")
    _write(report_dir / "yearly_counts.tsv", year_rows)

    ranked = rank_institutions(
        classify.rai_papers,
        topic_of,
        link.patents.linked_paper_ids(),
        link.repos.linked_paper_ids(),
        top_n=50,
    )
    inst_rows = [
        "rank\tinstitution\tpapers_into_patents\tpapers_into_repos\ttotal_linked"
        "\ttotal_rai_papers\ttopic_diversity"
    ]
    for rank, row in enumerate(ranked, start=1):
        inst_rows.append(
            f"{rank}\t{row.institution}\t{row.papers_into_patents}\t{row.papers_into_repos}"
            f"\t{row.total_linked}\t{row.total_rai_papers}\t{_fmt(row.topic_diversity)}"
        )
    _write(report_dir / "institutions.tsv", inst_rows)


# --------------------------------------------------------------- conventionality


def stage_conventionality(
    cfg: PipelineConfig,
    ingest: IngestArtifacts,
    classify: ClassifyArtifacts,
) -> ConventionalityReport:
    graph = build_citation_graph(ingest.papers)
    venue_of = {p.paper_id: p.venue for p in ingest.papers if p.venue}
    report = score_corpus(
        classify.rai_papers,
        graph,
        venue_of,
        iterations=cfg.iterations,
        seed=cfg.seed,
        workers=cfg.workers,
        include_self_pairs=cfg.include_self_pairs,
    )

    report_dir = cfg.report_dir()
    rows = ["paper_id\ttenth_percentile_z\tn_pairs\tn_excluded"]
    for score in report.scores:
        cell = _fmt(score.tenth_percentile_z) if score.defined else ""
        rows.append(f"{score.paper_id}\t{cell}\t{len(score.z_scores)}\t{score.n_excluded}")
    _write(report_dir / "conventionality.tsv", rows)

    topic_of = classify.rai.topic_of()
    summary = ["topic\tn_scored\tn_undefined\tmean_z\tp10_z\tmedian_z\tp90_z"]
    for topic in TOPICS:
        topic_scores = [
            s.tenth_percentile_z
            for s in report.scores
            if topic_of.get(s.paper_id) == topic and s.defined
        ]
        undefined = sum(
            1 for s in report.scores if topic_of.get(s.paper_id) == topic and not s.defined
        )
        if not topic_scores:
            summary.append(f"{topic}\t0\t{undefined}\t\t\t\t")
            continue
        mean = math.fsum(topic_scores) / len(topic_scores)
        summary.append(
            f"{topic}\t{len(topic_scores)}\t{undefined}\t{_fmt(mean)}"
            f"\t{_fmt(percentile_threshold(topic_scores, 10))}"
            f"\t{_fmt(percentile_threshold(topic_scores, 50))}"
            f"\t{_fmt(percentile_threshold(topic_scores, 90))}"
        )
    _write(report_dir / "conventionality_summary.tsv", summary)
    return report


# --------------------------------------------------------------------------- report


def stage_report(cfg: PipelineConfig) -> dict[str, Any]:
    """Manifest over every artifact in the bundle: config hash, seed, checksums."""
    report_dir = cfg.report_dir()
    missing = [n for n in REPORT_FILES if not (report_dir / n).is_file()]
    if missing:
        raise StageFailure("report", f"report files missing: {missing}; run earlier stages")
    out_root = Path(cfg.output_dir)
    files: dict[str, str] = {}
    for path in sorted(out_root.rglob("*")):
        if not path.is_file():
            continue
        rel = path.relative_to(out_root).as_posix()
        if rel == f"{REPORT_DIR}/manifest.json" or rel == STALE_MARKER:
            continue
        files[rel] = hashlib.sha256(path.read_bytes()).hexdigest()
    manifest = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "version": __version__,
        "files": files,
    }
    _write(report_dir / "manifest.json", [json.dumps(manifest, sort_keys=True, indent=2)])
    return manifest


# ------------------------------------------------------------------------ drivers


def _mark_stale(cfg: PipelineConfig, stage: str, cause: str) -> None:
    try:
        Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
        (Path(cfg.output_dir) / STALE_MARKER).write_text(
            f"stage: {stage}\nerror: {cause}\n", encoding="utf-8"
        )
    except OSError:  # the marker is best-effort; the raised failure still propagates
        logger.exception("could not write stale marker")


def _clear_stale(cfg: PipelineConfig) -> None:
    marker = Path(cfg.output_dir) / STALE_MARKER
    if marker.exists():
        marker.unlink()


def run(cfg: PipelineConfig) -> dict[str, Any]:
    """Run every stage in order and return the manifest."""
    cfg.check_paths()
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    _clear_stale(cfg)
    stage = "ingest"
    try:
        ingest = stage_ingest(cfg)
        stage = "classify"
        classify = stage_classify(cfg, ingest)
        stage = "link"
        link = stage_link(cfg, ingest)
        stage = "metrics"
        stage_metrics(cfg, ingest, classify, link)
        stage = "conventionality"
        stage_conventionality(cfg, ingest, classify)
        stage = "report"
        return stage_report(cfg)
    except StageFailure as exc:
        _mark_stale(cfg, exc.stage, exc.cause)
        raise
    except ConfigError:
        raise
    except Exception as exc:  # anything below is a stage-level failure, not bad config
        _mark_stale(cfg, stage, str(exc))
        raise StageFailure(stage, str(exc)) from exc


def run_stage(cfg: PipelineConfig, name: str) -> dict[str, Any]:
    """Run one stage, loading (or computing) whatever it needs first."""
    if name not in STAGES:
        raise ConfigError(f"unknown stage {name!r}; expected one of {STAGES}")
    cfg.check_paths()
    Path(cfg.output_dir).mkdir(parents=True, exist_ok=True)
    stage = name
    try:
        if name == "report":
            return {"stage": name, "manifest": stage_report(cfg)}
        if name == "ingest":
            art = stage_ingest(cfg)
            return {"stage": name, "papers": len(art.papers), "patents": len(art.patents),
                    "repo_links": len(art.repos)}

        ingest = load_ingest(cfg) if _have_ingest(cfg) else stage_ingest(cfg)
        if name == "classify":
            art = stage_classify(cfg, ingest)
            return {"stage": name, "retained": len(art.rai), "threshold": art.rai.threshold}
        if name == "link":
            art = stage_link(cfg, ingest)
            return {"stage": name, "patent_edges": len(art.patents.edges),
                    "repo_edges": len(art.repos.edges)}

        classify = load_classify(cfg, ingest) if _have_classify(cfg) else stage_classify(cfg, ingest)
        if name == "metrics":
            link = load_link(cfg) if _have_link(cfg) else stage_link(cfg, ingest)
            stage_metrics(cfg, ingest, classify, link)
            return {"stage": name, "files": ["rq1_impact.tsv", "survival.tsv",
                                             "yearly_counts.tsv", "institutions.tsv"]}
        report = stage_conventionality(cfg, ingest, classify)
        return {"stage": name, "scored": len(report.scores),
                "zero_variance_pairs": report.n_zero_variance_pairs}
    except StageFailure as exc:
        _mark_stale(cfg, exc.stage, exc.cause)
        raise
    except ConfigError:
        raise
    except Exception as exc:
        _mark_stale(cfg, stage, str(exc))
        raise StageFailure(stage, str(exc)) from exc
