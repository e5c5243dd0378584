"""Citation conventionality via a year-preserving permutation null model.

Each paper contributes unordered venue pairs from its bibliography, tagged
with the paper's publication year.  The null model shuffles the venue_j
column within each year stratum, preserving both the citation-volume and
year distributions exactly.  Per-pair z-scores compare the observed
co-occurrence count against the permutation mean/stddev, and a paper's
conventionality score is the nearest-rank 10th percentile of its pair z's.

Null tallies are integer sums and sums of squares merged by addition, so
results are bit-identical regardless of worker count or merge order; each
iteration draws from its own generator spawned from the master seed.
"""

from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import CitationGraph
from .records import PaperRecord
from .vectors import percentile_threshold

logger = logging.getLogger(__name__)

DEFAULT_ITERATIONS = 1000
SCORE_PERCENTILE = 10

PairKey = tuple[str, str]


class ConventionalityError(ValueError):
    """Raised for invalid permutation parameters or degenerate inputs."""


@dataclass(frozen=True, slots=True)
class VenuePairObservation:
    """One co-cited venue pair from one citing paper (canonically ordered)."""

    venue_i: str
    venue_j: str
    year: int
    count: int = 1

    def __post_init__(self) -> None:
        if self.venue_i > self.venue_j:
            raise ConventionalityError("venue pair must be canonically ordered")
        if self.count < 1:
            raise ConventionalityError("count must be >= 1")

    @property
    def pair(self) -> PairKey:
        return (self.venue_i, self.venue_j)


@dataclass(frozen=True, slots=True)
class NullDistribution:
    pair: PairKey
    iterations: int
    mean: float
    stddev: float


@dataclass(frozen=True, slots=True)
class ConventionalityScore:
    paper_id: str
    z_scores: tuple[float, ...]
    tenth_percentile_z: float | None
    n_excluded: int

    @property
    def defined(self) -> bool:
        return self.tenth_percentile_z is not None


def extract_venue_pairs(
    paper: PaperRecord,
    graph: CitationGraph,
    venue_of: Mapping[str, str],
    include_self_pairs: bool = False,
) -> list[VenuePairObservation]:
    """Unordered pairs over the distinct venues cited by ``paper``.

    References that do not resolve to a venue are skipped.  Fewer than two
    resolvable venues yields no pairs.  Self-pairs (venue cited at least
    twice) are off by default.
    """
    cited_venues: list[str] = []
    for ref in graph.references_of(paper.paper_id):
        venue = venue_of.get(ref)
        if venue:
            cited_venues.append(venue)
    distinct = sorted(set(cited_venues))
    pairs = [
        VenuePairObservation(venue_i=a, venue_j=b, year=paper.year)
        for i, a in enumerate(distinct)
        for b in distinct[i + 1 :]
    ]
    if include_self_pairs:
        multiplicity = Counter(cited_venues)
        pairs += [
            VenuePairObservation(venue_i=v, venue_j=v, year=paper.year)
            for v in distinct
            if multiplicity[v] >= 2
        ]
    return pairs


def collect_observations(
    papers: Mapping[str, PaperRecord],
    graph: CitationGraph,
    venue_of: Mapping[str, str],
    include_self_pairs: bool = False,
) -> tuple[list[VenuePairObservation], dict[str, list[PairKey]], int]:
    """All observations corpus-wide plus each paper's own pair list.

    Also counts references that could not be resolved to a venue.
    """
    observations: list[VenuePairObservation] = []
    per_paper: dict[str, list[PairKey]] = {}
    unresolved = 0
    for paper_id in sorted(papers):
        paper = papers[paper_id]
        unresolved += sum(
            1 for ref in graph.references_of(paper_id) if not venue_of.get(ref)
        )
        pairs = extract_venue_pairs(paper, graph, venue_of, include_self_pairs)
        observations.extend(pairs)
        per_paper[paper_id] = [p.pair for p in pairs]
    if unresolved:
        logger.info("%d references did not resolve to a venue", unresolved)
    return observations, per_paper, unresolved


def observed_pair_counts(observations: Iterable[VenuePairObservation]) -> Counter:
    """Co-occurrence counts aggregated corpus-wide over all years."""
    counts: Counter = Counter()
    for obs in observations:
        counts[obs.pair] += obs.count
    return counts


def iteration_rngs(seed: int, iterations: int) -> list[np.random.Generator]:
    """Independent per-iteration generators spawned from the master seed."""
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(iterations)]


@dataclass(frozen=True, slots=True)
class _Strata:
    venues: tuple[str, ...]
    years: tuple[int, ...]
    venue_i: dict[int, np.ndarray]
    venue_j: dict[int, np.ndarray]


def _build_strata(observations: Sequence[VenuePairObservation]) -> _Strata:
    vocabulary = sorted({o.venue_i for o in observations} | {o.venue_j for o in observations})
    index = {v: i for i, v in enumerate(vocabulary)}
    by_year_i: dict[int, list[int]] = {}
    by_year_j: dict[int, list[int]] = {}
    for obs in observations:
        for _ in range(obs.count):
            by_year_i.setdefault(obs.year, []).append(index[obs.venue_i])
            by_year_j.setdefault(obs.year, []).append(index[obs.venue_j])
    years = tuple(sorted(by_year_i))
    return _Strata(
        venues=tuple(vocabulary),
        years=years,
        venue_i={y: np.asarray(by_year_i[y], dtype=np.int64) for y in years},
        venue_j={y: np.asarray(by_year_j[y], dtype=np.int64) for y in years},
    )


def permute_strata(
    observations: Sequence[VenuePairObservation],
    rng: np.random.Generator,
) -> list[tuple[int, str, str]]:
    """One permuted draw: (year, venue_i, shuffled venue_j) rows.

    Within each year stratum the venue_j multiset is shuffled against the
    fixed venue_i column; the multiset itself is preserved exactly.
    """
    strata = _build_strata(observations)
    rows: list[tuple[int, str, str]] = []
    for year in strata.years:
        permuted = rng.permutation(strata.venue_j[year])
        rows += [
            (year, strata.venues[a], strata.venues[b])
            for a, b in zip(strata.venue_i[year].tolist(), permuted.tolist())
        ]
    return rows


def _iteration_counts(
    strata: _Strata,
    rng: np.random.Generator,
    observed_keys: np.ndarray,
    n_venues: int,
) -> np.ndarray:
    """Per-observed-pair counts for one permutation draw (int64 vector)."""
    chunks = []
    for year in strata.years:
        vi = strata.venue_i[year]
        vj = rng.permutation(strata.venue_j[year])
        a = np.minimum(vi, vj)
        b = np.maximum(vi, vj)
        chunks.append(a * n_venues + b)
    keys, counts = np.unique(np.concatenate(chunks), return_counts=True)
    out = np.zeros(len(observed_keys), dtype=np.int64)
    positions = np.searchsorted(observed_keys, keys)
    valid = (positions < len(observed_keys)) & (observed_keys[np.minimum(positions, len(observed_keys) - 1)] == keys)
    out[positions[valid]] = counts[valid]
    return out


def permute_null(
    observations: Sequence[VenuePairObservation],
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    workers: int = 1,
) -> dict[PairKey, NullDistribution]:
    """Null mean/stddev of the co-occurrence count for every observed pair.

    Sums and sums of squares are accumulated as exact integers, so the result
    does not depend on ``workers`` or on merge order.
    """
    if iterations < 2:
        raise ConventionalityError("need at least 2 iterations")
    if not observations:
        raise ConventionalityError("no observations")
    strata = _build_strata(observations)
    n_venues = len(strata.venues)
    index = {v: i for i, v in enumerate(strata.venues)}

    observed = observed_pair_counts(observations)
    pair_list = sorted(observed)
    observed_keys = np.asarray(
        [index[a] * n_venues + index[b] for a, b in pair_list], dtype=np.int64
    )
    order = np.argsort(observed_keys)
    observed_keys = observed_keys[order]
    pair_list = [pair_list[i] for i in order]

    rngs = iteration_rngs(seed, iterations)
    sum_c = np.zeros(len(pair_list), dtype=np.int64)
    sum_sq = np.zeros(len(pair_list), dtype=np.int64)

    def run(rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        counts = _iteration_counts(strata, rng, observed_keys, n_venues)
        return counts, counts * counts

    if workers <= 1:
        for rng in rngs:
            counts, squares = run(rng)
            sum_c += counts
            sum_sq += squares
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for counts, squares in pool.map(run, rngs):
                sum_c += counts
                sum_sq += squares

    nulls: dict[PairKey, NullDistribution] = {}
    for i, pair in enumerate(pair_list):
        s, q = int(sum_c[i]), int(sum_sq[i])
        var_numerator = iterations * q - s * s  # iterations^2 * population variance
        nulls[pair] = NullDistribution(
            pair=pair,
            iterations=iterations,
            mean=s / iterations,
            stddev=sqrt(var_numerator) / iterations if var_numerator > 0 else 0.0,
        )
    return nulls


def pair_z(observed_count: int, null: NullDistribution) -> float:
    """z = (observed - null mean) / null stddev; undefined at zero stddev."""
    if null.stddev == 0.0:
        raise ConventionalityError(f"zero-variance null for pair {null.pair}")
    return (observed_count - null.mean) / null.stddev


def paper_score(paper_id: str, z_scores: Sequence[float], n_excluded: int = 0) -> ConventionalityScore:
    """Nearest-rank 10th percentile of a paper's pair z-scores."""
    if not z_scores:
        logger.warning("paper %s has no scorable venue pairs", paper_id)
        return ConventionalityScore(
            paper_id=paper_id, z_scores=(), tenth_percentile_z=None, n_excluded=n_excluded
        )
    return ConventionalityScore(
        paper_id=paper_id,
        z_scores=tuple(z_scores),
        tenth_percentile_z=percentile_threshold(list(z_scores), SCORE_PERCENTILE),
        n_excluded=n_excluded,
    )


@dataclass(frozen=True, slots=True)
class ConventionalityReport:
    scores: tuple[ConventionalityScore, ...]
    iterations: int
    n_pairs: int
    n_zero_variance_pairs: int
    n_unresolved_refs: int


def score_corpus(
    papers: Mapping[str, PaperRecord],
    graph: CitationGraph,
    venue_of: Mapping[str, str],
    iterations: int = DEFAULT_ITERATIONS,
    seed: int = 0,
    workers: int = 1,
    include_self_pairs: bool = False,
) -> ConventionalityReport:
    """End-to-end scoring: extract pairs, build the null, score every paper."""
    observations, per_paper, unresolved = collect_observations(
        papers, graph, venue_of, include_self_pairs
    )
    if not observations:
        raise ConventionalityError("no venue pairs in corpus")
    observed = observed_pair_counts(observations)
    nulls = permute_null(observations, iterations=iterations, seed=seed, workers=workers)
    zero_variance = {pair for pair, null in nulls.items() if null.stddev == 0.0}

    scores = []
    for paper_id in sorted(per_paper):
        zs = []
        excluded = 0
        for pair in per_paper[paper_id]:
            if pair in zero_variance:
                excluded += 1
                continue
            zs.append(pair_z(observed[pair], nulls[pair]))
        scores.append(paper_score(paper_id, zs, excluded))
    return ConventionalityReport(
        scores=tuple(scores),
        iterations=iterations,
        n_pairs=len(observed),
        n_zero_variance_pairs=len(zero_variance),
        n_unresolved_refs=unresolved,
    )
