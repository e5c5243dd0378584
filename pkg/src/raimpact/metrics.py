"""Impact ratios, statistical tests, institution rankings, and coverage curves.

Ratios and diversity indices are evaluated in exact rational arithmetic and
converted to float at the edge, so identities like "uniform over five topics
gives 0.8" hold exactly rather than to within rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence, AbstractSet

from .corpus import CorpusPartition
from .graph import CitationGraph
from .linkage import LinkageResult
from .records import PaperRecord
from .stats import normal_two_sided, student_t_two_sided


class MetricError(ValueError):
    """Raised for undefined metrics (empty groups, degenerate samples)."""


@dataclass(frozen=True, slots=True)
class TestResult:
    statistic: float
    p_value: float
    df: float | None = None


@dataclass(frozen=True, slots=True)
class ImpactRatios:
    """Linked-paper proportions for a partition, with the counts behind them."""

    kind: str
    n_studied: int
    n_studied_linked: int
    n_complement: int
    n_complement_linked: int
    citations_studied: int
    citations_studied_linked: int

    def __post_init__(self) -> None:
        if self.n_studied_linked > self.n_studied:
            raise MetricError("linked count exceeds group size")
        if self.n_complement_linked > self.n_complement:
            raise MetricError("linked count exceeds complement size")
        if self.citations_studied_linked > self.citations_studied:
            raise MetricError("linked citations exceed group citations")

    @property
    def ratio_studied(self) -> float:
        return float(Fraction(self.n_studied_linked, self.n_studied))

    @property
    def ratio_complement(self) -> float:
        if self.n_complement == 0:
            return math.nan
        return float(Fraction(self.n_complement_linked, self.n_complement))

    @property
    def citation_ratio(self) -> float:
        if self.citations_studied == 0:
            return math.nan
        return float(Fraction(self.citations_studied_linked, self.citations_studied))


def _citations(
    paper_id: str,
    papers: Mapping[str, PaperRecord] | None,
    graph: CitationGraph | None,
) -> int:
    if graph is not None:
        return len(graph.citers_of(paper_id))
    if papers is not None:
        return papers[paper_id].citation_count
    return 0


def impact_ratio(
    partition: CorpusPartition,
    linkage: LinkageResult,
    papers: Mapping[str, PaperRecord] | None = None,
    graph: CitationGraph | None = None,
) -> ImpactRatios:
    """Proportion of studied (and complement) papers with at least one link.

    Citation sums come from the citation graph's in-degrees when a graph is
    given, else from stored citation counts when ``papers`` is given, else
    they stay zero and only the count ratios are meaningful.
    """
    if linkage.kind != partition.citing_kind:
        raise MetricError(
            f"linkage kind {linkage.kind!r} does not match partition kind {partition.citing_kind!r}"
        )
    if not partition.studied:
        raise MetricError("studied group is empty")
    linked = linkage.linked_paper_ids()
    studied_linked = sorted(partition.studied & linked)
    complement_linked = len(partition.complement & linked)
    return ImpactRatios(
        kind=linkage.kind,
        n_studied=len(partition.studied),
        n_studied_linked=len(studied_linked),
        n_complement=len(partition.complement),
        n_complement_linked=complement_linked,
        citations_studied=sum(_citations(p, papers, graph) for p in sorted(partition.studied)),
        citations_studied_linked=sum(_citations(p, papers, graph) for p in studied_linked),
    )


def citation_weighted_ratio(
    partition: CorpusPartition,
    linkage: LinkageResult,
    papers: Mapping[str, PaperRecord] | None = None,
    graph: CitationGraph | None = None,
) -> float:
    """Share of the studied group's citations held by its linked papers."""
    if papers is None and graph is None:
        raise MetricError("citation-weighted ratio needs papers or a citation graph")
    ratios = impact_ratio(partition, linkage, papers, graph)
    if ratios.citations_studied == 0:
        raise MetricError("studied group has zero citations")
    return ratios.citation_ratio


def two_proportion_z_test(k1: int, n1: int, k2: int, n2: int) -> TestResult:
    """Pooled two-proportion z-test, two-sided."""
    if n1 <= 0 or n2 <= 0:
        raise MetricError("group sizes must be positive")
    if not (0 <= k1 <= n1 and 0 <= k2 <= n2):
        raise MetricError("successes must lie in [0, n]")
    pooled = Fraction(k1 + k2, n1 + n2)
    if pooled == 0 or pooled == 1:
        raise MetricError("degenerate pool: pooled proportion is 0 or 1")
    p1 = k1 / n1
    p2 = k2 / n2
    se = math.sqrt(float(pooled) * float(1 - pooled) * (1.0 / n1 + 1.0 / n2))
    z = (p1 - p2) / se
    return TestResult(statistic=z, p_value=normal_two_sided(z))


def _mean_var(sample: Sequence[float]) -> tuple[float, float]:
    n = len(sample)
    mean = math.fsum(sample) / n
    var = math.fsum((x - mean) ** 2 for x in sample) / (n - 1)
    return mean, var


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> TestResult:
    """Welch's unequal-variance t-test with Welch-Satterthwaite df, two-sided."""
    if len(sample_a) < 2 or len(sample_b) < 2:
        raise MetricError("each sample needs at least 2 observations")
    mean_a, var_a = _mean_var(sample_a)
    mean_b, var_b = _mean_var(sample_b)
    if var_a == 0.0 and var_b == 0.0:
        if mean_a == mean_b:
            return TestResult(statistic=0.0, p_value=1.0, df=float(len(sample_a) + len(sample_b) - 2))
        raise MetricError("both samples have zero variance with unequal means")
    na, nb = len(sample_a), len(sample_b)
    sa, sb = var_a / na, var_b / nb
    t = (mean_a - mean_b) / math.sqrt(sa + sb)
    df = (sa + sb) ** 2 / (sa**2 / (na - 1) + sb**2 / (nb - 1))
    return TestResult(statistic=t, p_value=student_t_two_sided(t, df), df=df)


def gini_simpson(counts: Sequence[int]) -> float:
    """Diversity 1 - sum((c_i / total)^2), exact before the final float cast."""
    if any(c < 0 for c in counts):
        raise MetricError("counts must be non-negative")
    total = sum(counts)
    if total == 0:
        raise MetricError("all counts are zero")
    return float(1 - Fraction(sum(c * c for c in counts), total * total))


def pearson(x: Sequence[float], y: Sequence[float]) -> TestResult:
    """Sample Pearson correlation with a two-sided p via the t transform."""
    if len(x) != len(y):
        raise MetricError("samples must have equal length")
    n = len(x)
    if n < 3:
        raise MetricError("need at least 3 points")
    mean_x = math.fsum(x) / n
    mean_y = math.fsum(y) / n
    sxx = math.fsum((a - mean_x) ** 2 for a in x)
    syy = math.fsum((b - mean_y) ** 2 for b in y)
    if sxx == 0.0 or syy == 0.0:
        raise MetricError("zero variance")
    sxy = math.fsum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    r = sxy / math.sqrt(sxx * syy)
    r = max(-1.0, min(1.0, r))
    df = n - 2
    if abs(r) == 1.0:
        return TestResult(statistic=r, p_value=0.0, df=float(df))
    t = r * math.sqrt(df / (1.0 - r * r))
    return TestResult(statistic=r, p_value=student_t_two_sided(t, df), df=float(df))


UNKNOWN_INSTITUTION = "__unknown__"


@dataclass(frozen=True, slots=True)
class InstitutionRow:
    institution: str
    papers_into_patents: int
    papers_into_repos: int
    total_rai_papers: int
    topic_diversity: float

    @property
    def total_linked(self) -> int:
        return self.papers_into_patents + self.papers_into_repos

    @property
    def mean_linked_share(self) -> float:
        pat = Fraction(self.papers_into_patents, self.total_rai_papers)
        rep = Fraction(self.papers_into_repos, self.total_rai_papers)
        return float((pat + rep) / 2)


def tally_institutions(
    papers: Mapping[str, PaperRecord],
    topics: Mapping[str, str],
    patent_linked: AbstractSet[str],
    repo_linked: AbstractSet[str],
) -> list[InstitutionRow]:
    """Whole-count tallies per institution; a paper credits each of its
    authors' distinct institutions once.  Papers without any institution fall
    into the reserved ``__unknown__`` bucket."""
    per_inst: dict[str, dict[str, int]] = {}
    linked_pat: dict[str, int] = {}
    linked_repo: dict[str, int] = {}
    for paper_id, paper in papers.items():
        institutions = sorted({inst for a in paper.authors for inst in a.institutions})
        if not institutions:
            institutions = [UNKNOWN_INSTITUTION]
        topic = topics.get(paper_id)
        for inst in institutions:
            by_topic = per_inst.setdefault(inst, {})
            if topic is not None:
                by_topic[topic] = by_topic.get(topic, 0) + 1
            else:
                by_topic[""] = by_topic.get("", 0) + 1
            if paper_id in patent_linked:
                linked_pat[inst] = linked_pat.get(inst, 0) + 1
            if paper_id in repo_linked:
                linked_repo[inst] = linked_repo.get(inst, 0) + 1

    rows = []
    for inst in sorted(per_inst):
        by_topic = per_inst[inst]
        total = sum(by_topic.values())
        topical = [c for t, c in sorted(by_topic.items()) if t]
        diversity = gini_simpson(topical) if topical else 0.0
        rows.append(
            InstitutionRow(
                institution=inst,
                papers_into_patents=linked_pat.get(inst, 0),
                papers_into_repos=linked_repo.get(inst, 0),
                total_rai_papers=total,
                topic_diversity=diversity,
            )
        )
    return rows


def rank_institutions(
    papers: Mapping[str, PaperRecord],
    topics: Mapping[str, str],
    patent_linked: AbstractSet[str],
    repo_linked: AbstractSet[str],
    top_n: int = 50,
) -> list[InstitutionRow]:
    """Top institutions by paper volume, ordered by mean linked share.

    The candidate pool is the ``top_n`` institutions by total paper count;
    within the pool, ranking is by the average of the patent and repository
    linked percentages, ties broken by more papers, then institution id.
    The unknown bucket never ranks.
    """
    rows = [r for r in tally_institutions(papers, topics, patent_linked, repo_linked)
            if r.institution != UNKNOWN_INSTITUTION]
    pool = sorted(rows, key=lambda r: (-r.total_rai_papers, r.institution))[:top_n]
    return sorted(pool, key=lambda r: (-r.mean_linked_share, -r.total_rai_papers, r.institution))


def venue_citation_coverage(venue_totals: Mapping[str, int]) -> list[tuple[str, float]]:
    """Cumulative citation share by venue rank (descending by citations)."""
    if any(v < 0 for v in venue_totals.values()):
        raise MetricError("citation totals must be non-negative")
    total = sum(venue_totals.values())
    if total == 0:
        raise MetricError("all venue totals are zero")
    ordered = sorted(venue_totals.items(), key=lambda kv: (-kv[1], kv[0]))
    out: list[tuple[str, float]] = []
    running = 0
    for venue, count in ordered:
        running += count
        out.append((venue, float(Fraction(running, total))))
    return out
