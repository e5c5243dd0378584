"""Impact ratios, hypothesis tests, diversity, rankings, and coverage curves."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest
import scipy.stats

from raimpact.corpus import CorpusPartition, PaperCorpus
from raimpact.graph import build_citation_graph
from raimpact.linkage import LinkageResult
from raimpact.metrics import (
    UNKNOWN_INSTITUTION,
    ImpactRatios,
    MetricError,
    citation_weighted_ratio,
    gini_simpson,
    impact_ratio,
    pearson,
    rank_institutions,
    tally_institutions,
    two_proportion_z_test,
    venue_citation_coverage,
    welch_t_test,
)
from raimpact.records import Author, PaperRecord


def _paper(pid, citations=0, institutions=(), refs=(), year=2020):
    """institutions: one tuple of institution names per author."""
    authors = tuple(
        Author(name=f"author {i}", institutions=tuple(insts))
        for i, insts in enumerate(institutions)
    )
    return PaperRecord(
        paper_id=pid,
        title=f"title {pid}",
        year=year,
        citation_count=citations,
        authors=authors,
        outgoing_refs=tuple(refs),
    )


def _linkage(kind, paper_ids):
    return LinkageResult(
        kind=kind, edges=frozenset((p, f"ext-{p}") for p in paper_ids)
    )


class TestImpactRatio:
    def test_counts_and_ratios(self):
        partition = CorpusPartition(
            studied=frozenset({"p1", "p2", "p3", "p4"}),
            complement=frozenset({"q1", "q2", "q3", "q4", "q5", "q6"}),
            citing_kind="patents",
        )
        linkage = _linkage("patents", ["p1", "p2", "q1", "q2", "q3"])
        ratios = impact_ratio(partition, linkage)
        assert ratios.n_studied == 4
        assert ratios.n_studied_linked == 2
        assert ratios.n_complement == 6
        assert ratios.n_complement_linked == 3
        assert ratios.ratio_studied == 0.5
        assert ratios.ratio_complement == 0.5

    def test_multiple_edges_per_paper_count_once(self):
        partition = CorpusPartition(
            studied=frozenset({"p1", "p2"}), complement=frozenset(), citing_kind="patents"
        )
        linkage = LinkageResult(
            kind="patents",
            edges=frozenset({("p1", "pat-a"), ("p1", "pat-b"), ("p1", "pat-c")}),
        )
        ratios = impact_ratio(partition, linkage)
        assert ratios.n_studied_linked == 1
        assert ratios.ratio_studied == 0.5

    def test_published_style_percentage_arithmetic(self):
        ratios = ImpactRatios(
            kind="patents",
            n_studied=557,
            n_studied_linked=27,
            n_complement=0,
            n_complement_linked=0,
            citations_studied=23829,
            citations_studied_linked=6066,
        )
        assert ratios.ratio_studied == float(Fraction(27, 557))
        assert round(100 * ratios.ratio_studied, 1) == 4.8
        assert round(100 * ratios.citation_ratio, 1) == 25.5

    def test_kind_mismatch_rejected(self):
        partition = CorpusPartition(
            studied=frozenset({"p1"}), complement=frozenset(), citing_kind="patents"
        )
        linkage = _linkage("repositories", ["p1"])
        with pytest.raises(MetricError, match="kind"):
            impact_ratio(partition, linkage)

    def test_empty_studied_group_rejected(self):
        partition = CorpusPartition(
            studied=frozenset(), complement=frozenset({"q1"}), citing_kind="patents"
        )
        with pytest.raises(MetricError, match="empty"):
            impact_ratio(partition, _linkage("patents", []))

    def test_empty_complement_ratio_is_nan(self):
        partition = CorpusPartition(
            studied=frozenset({"p1"}), complement=frozenset(), citing_kind="patents"
        )
        ratios = impact_ratio(partition, _linkage("patents", ["p1"]))
        assert math.isnan(ratios.ratio_complement)

    def test_citations_from_stored_counts(self):
        papers = {
            "p1": _paper("p1", citations=10),
            "p2": _paper("p2", citations=30),
            "p3": _paper("p3", citations=60),
        }
        partition = CorpusPartition(
            studied=frozenset(papers), complement=frozenset(), citing_kind="patents"
        )
        ratios = impact_ratio(partition, _linkage("patents", ["p1", "p3"]), papers=papers)
        assert ratios.citations_studied == 100
        assert ratios.citations_studied_linked == 70
        assert ratios.citation_ratio == 0.7

    def test_citations_from_graph_override_stored_counts(self):
        # p1 is cited by p2 and p3 in-corpus; its stored count says 99.
        corpus = PaperCorpus(
            [
                _paper("p1", citations=99),
                _paper("p2", refs=["p1"]),
                _paper("p3", refs=["p1"]),
            ]
        )
        graph = build_citation_graph(corpus)
        partition = CorpusPartition(
            studied=frozenset({"p1", "p2", "p3"}),
            complement=frozenset(),
            citing_kind="patents",
        )
        ratios = impact_ratio(partition, _linkage("patents", ["p1"]), graph=graph)
        assert ratios.citations_studied == 2
        assert ratios.citations_studied_linked == 2

    def test_inconsistent_counts_rejected(self):
        with pytest.raises(MetricError):
            ImpactRatios(
                kind="patents",
                n_studied=5,
                n_studied_linked=6,
                n_complement=0,
                n_complement_linked=0,
                citations_studied=0,
                citations_studied_linked=0,
            )


class TestCitationWeightedRatio:
    def test_share_of_citations_held_by_linked_papers(self):
        papers = {
            "p1": _paper("p1", citations=10),
            "p2": _paper("p2", citations=30),
            "p3": _paper("p3", citations=60),
        }
        partition = CorpusPartition(
            studied=frozenset(papers), complement=frozenset(), citing_kind="patents"
        )
        value = citation_weighted_ratio(
            partition, _linkage("patents", ["p1", "p3"]), papers=papers
        )
        assert value == 0.7

    def test_needs_a_citation_source(self):
        partition = CorpusPartition(
            studied=frozenset({"p1"}), complement=frozenset(), citing_kind="patents"
        )
        with pytest.raises(MetricError, match="needs"):
            citation_weighted_ratio(partition, _linkage("patents", ["p1"]))

    def test_zero_total_citations_rejected(self):
        papers = {"p1": _paper("p1", citations=0)}
        partition = CorpusPartition(
            studied=frozenset({"p1"}), complement=frozenset(), citing_kind="patents"
        )
        with pytest.raises(MetricError, match="zero"):
            citation_weighted_ratio(partition, _linkage("patents", ["p1"]), papers=papers)


class TestTwoProportionZ:
    def test_equal_proportions_give_zero(self):
        result = two_proportion_z_test(10, 100, 10, 100)
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_hand_worked_example(self):
        result = two_proportion_z_test(30, 100, 20, 100)
        assert round(result.statistic, 2) == 1.63

    def test_antisymmetric_in_group_order(self):
        a = two_proportion_z_test(30, 100, 20, 100)
        b = two_proportion_z_test(20, 100, 30, 100)
        assert a.statistic == -b.statistic
        assert a.p_value == b.p_value

    @pytest.mark.parametrize("k1,n1,k2,n2", [(0, 10, 0, 10), (10, 10, 10, 10)])
    def test_degenerate_pool_rejected(self, k1, n1, k2, n2):
        with pytest.raises(MetricError, match="degenerate"):
            two_proportion_z_test(k1, n1, k2, n2)

    def test_invalid_counts_rejected(self):
        with pytest.raises(MetricError):
            two_proportion_z_test(1, 0, 1, 10)
        with pytest.raises(MetricError):
            two_proportion_z_test(11, 10, 1, 10)

    def test_against_pooled_formula_and_scipy_tail(self):
        rng = random.Random(4242)
        for _ in range(50):
            n1 = rng.randint(2, 500)
            n2 = rng.randint(2, 500)
            k1 = rng.randint(0, n1)
            k2 = rng.randint(0, n2)
            if (k1 + k2) in (0, n1 + n2):
                continue
            result = two_proportion_z_test(k1, n1, k2, n2)
            pool = (k1 + k2) / (n1 + n2)
            se = math.sqrt(pool * (1 - pool) * (1 / n1 + 1 / n2))
            expected_z = (k1 / n1 - k2 / n2) / se
            assert result.statistic == pytest.approx(expected_z, abs=1e-12)
            expected_p = 2 * scipy.stats.norm.sf(abs(expected_z))
            assert result.p_value == pytest.approx(expected_p, abs=1e-12)


class TestWelchT:
    def test_hand_worked_example(self):
        result = welch_t_test([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
        assert result.statistic == pytest.approx(-3.6742346141747673, abs=1e-12)
        assert result.df == pytest.approx(4.0, abs=1e-12)
        assert result.p_value == pytest.approx(0.021311641128756727, abs=1e-12)

    def test_swapping_samples_negates_statistic(self):
        a = welch_t_test([1.0, 2.0, 3.0], [4.0, 5.0, 7.0])
        b = welch_t_test([4.0, 5.0, 7.0], [1.0, 2.0, 3.0])
        assert a.statistic == -b.statistic
        assert a.df == b.df
        assert a.p_value == b.p_value

    def test_identical_constant_samples(self):
        result = welch_t_test([2.0, 2.0, 2.0], [2.0, 2.0])
        assert result.statistic == 0.0
        assert result.p_value == 1.0
        assert result.df == 3.0

    def test_distinct_constant_samples_rejected(self):
        with pytest.raises(MetricError, match="zero variance"):
            welch_t_test([2.0, 2.0], [3.0, 3.0])

    def test_small_samples_rejected(self):
        with pytest.raises(MetricError):
            welch_t_test([1.0], [2.0, 3.0])

    def test_against_scipy(self):
        rng = random.Random(99)
        for _ in range(30):
            a = [rng.gauss(0, 1) for _ in range(rng.randint(3, 40))]
            b = [rng.gauss(0.5, 2) for _ in range(rng.randint(3, 40))]
            result = welch_t_test(a, b)
            expected = scipy.stats.ttest_ind(a, b, equal_var=False)
            assert result.statistic == pytest.approx(expected.statistic, abs=1e-10)
            assert result.p_value == pytest.approx(expected.pvalue, abs=1e-10)


class TestGiniSimpson:
    def test_uniform_over_five_is_exactly_point_eight(self):
        assert gini_simpson([7, 7, 7, 7, 7]) == 0.8

    def test_single_category_is_exactly_zero(self):
        assert gini_simpson([123]) == 0.0

    def test_hand_worked_example(self):
        assert gini_simpson([3, 2, 1]) == float(Fraction(11, 18))

    def test_zero_counts_do_not_contribute(self):
        assert gini_simpson([5, 0, 0]) == 0.0
        assert gini_simpson([3, 3, 0]) == gini_simpson([3, 3])

    def test_scale_invariant(self):
        assert gini_simpson([2, 2, 2]) == gini_simpson([70, 70, 70])

    def test_invalid_counts_rejected(self):
        with pytest.raises(MetricError):
            gini_simpson([3, -1])
        with pytest.raises(MetricError):
            gini_simpson([0, 0])
        with pytest.raises(MetricError):
            gini_simpson([])


class TestPearson:
    def test_perfect_positive_correlation(self):
        x = [1.0, 2.0, 3.0, 4.0]
        result = pearson(x, [2 * v + 1 for v in x])
        assert result.statistic == 1.0
        assert result.p_value == 0.0
        assert result.df == 2.0

    def test_perfect_negative_correlation(self):
        x = [1.0, 2.0, 3.0]
        result = pearson(x, [-v for v in x])
        assert result.statistic == -1.0
        assert result.p_value == 0.0

    def test_invalid_inputs_rejected(self):
        with pytest.raises(MetricError, match="equal length"):
            pearson([1.0, 2.0], [1.0, 2.0, 3.0])
        with pytest.raises(MetricError, match="at least 3"):
            pearson([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(MetricError, match="zero variance"):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_against_scipy(self):
        rng = random.Random(2718)
        for _ in range(30):
            n = rng.randint(3, 60)
            x = [rng.gauss(0, 1) for _ in range(n)]
            y = [0.4 * v + rng.gauss(0, 1) for v in x]
            result = pearson(x, y)
            expected = scipy.stats.pearsonr(x, y)
            assert result.statistic == pytest.approx(expected.statistic, abs=1e-10)
            assert result.p_value == pytest.approx(expected.pvalue, abs=1e-10)


class TestTallyInstitutions:
    def test_paper_credits_each_distinct_institution_once(self):
        papers = {"p1": _paper("p1", institutions=[("inst-a",), ("inst-b",)])}
        rows = tally_institutions(papers, {"p1": "Privacy"}, frozenset(), frozenset())
        assert [(r.institution, r.total_rai_papers) for r in rows] == [
            ("inst-a", 1),
            ("inst-b", 1),
        ]

    def test_repeated_institution_collapses(self):
        papers = {"p1": _paper("p1", institutions=[("inst-a",), ("inst-a", "inst-b")])}
        rows = tally_institutions(papers, {}, frozenset(), frozenset())
        by_name = {r.institution: r.total_rai_papers for r in rows}
        assert by_name == {"inst-a": 1, "inst-b": 1}

    def test_missing_institutions_fall_into_unknown_bucket(self):
        papers = {"p1": _paper("p1")}
        rows = tally_institutions(papers, {}, frozenset(), frozenset())
        assert [r.institution for r in rows] == [UNKNOWN_INSTITUTION]

    def test_linked_counts_follow_credit(self):
        papers = {
            "p1": _paper("p1", institutions=[("inst-a",)]),
            "p2": _paper("p2", institutions=[("inst-a",), ("inst-b",)]),
        }
        rows = tally_institutions(
            papers, {}, patent_linked=frozenset({"p2"}), repo_linked=frozenset({"p1", "p2"})
        )
        by_name = {r.institution: r for r in rows}
        assert by_name["inst-a"].papers_into_patents == 1
        assert by_name["inst-a"].papers_into_repos == 2
        assert by_name["inst-b"].papers_into_patents == 1
        assert by_name["inst-b"].papers_into_repos == 1

    def test_topic_diversity_over_topical_papers_only(self):
        papers = {
            "p1": _paper("p1", institutions=[("inst-a",)]),
            "p2": _paper("p2", institutions=[("inst-a",)]),
            "p3": _paper("p3", institutions=[("inst-a",)]),
        }
        # Two topical papers split across two topics; p3 has no topic.
        rows = tally_institutions(
            papers, {"p1": "Privacy", "p2": "Fairness"}, frozenset(), frozenset()
        )
        (row,) = rows
        assert row.total_rai_papers == 3
        assert row.topic_diversity == 0.5

    def test_no_topical_papers_gives_zero_diversity(self):
        papers = {"p1": _paper("p1", institutions=[("inst-a",)])}
        (row,) = tally_institutions(papers, {}, frozenset(), frozenset())
        assert row.topic_diversity == 0.0


class TestRankInstitutions:
    @staticmethod
    def _three_institutions():
        # inst-a: 2 papers, both patent-linked          -> share (1 + 0)/2 = 0.5
        # inst-b: 2 papers, 1 patent- and 1 repo-linked -> share (0.5 + 0.5)/2 = 0.5
        # inst-c: 1 paper, repo-linked                  -> share (0 + 1)/2 = 0.5
        papers = {
            "a1": _paper("a1", institutions=[("inst-a",)]),
            "a2": _paper("a2", institutions=[("inst-a",)]),
            "b1": _paper("b1", institutions=[("inst-b",)]),
            "b2": _paper("b2", institutions=[("inst-b",)]),
            "c1": _paper("c1", institutions=[("inst-c",)]),
        }
        patent_linked = frozenset({"a1", "a2", "b1"})
        repo_linked = frozenset({"b2", "c1"})
        return papers, patent_linked, repo_linked

    def test_tie_on_share_breaks_by_volume_then_name(self):
        papers, pat, rep = self._three_institutions()
        ranked = rank_institutions(papers, {}, pat, rep)
        assert [r.institution for r in ranked] == ["inst-a", "inst-b", "inst-c"]

    def test_pool_restricted_to_largest_by_volume(self):
        papers, pat, rep = self._three_institutions()
        ranked = rank_institutions(papers, {}, pat, rep, top_n=2)
        assert [r.institution for r in ranked] == ["inst-a", "inst-b"]

    def test_higher_share_outranks_larger_volume(self):
        papers = {
            "a1": _paper("a1", institutions=[("inst-a",)]),
            "a2": _paper("a2", institutions=[("inst-a",)]),
            "a3": _paper("a3", institutions=[("inst-a",)]),
            "b1": _paper("b1", institutions=[("inst-b",)]),
        }
        # inst-a: 1/3 of papers patent-linked; inst-b: its only paper is linked.
        ranked = rank_institutions(papers, {}, frozenset({"a1", "b1"}), frozenset())
        assert [r.institution for r in ranked] == ["inst-b", "inst-a"]

    def test_unknown_bucket_never_ranks(self):
        papers = {
            "p1": _paper("p1"),
            "p2": _paper("p2", institutions=[("inst-a",)]),
        }
        ranked = rank_institutions(papers, {}, frozenset({"p1"}), frozenset({"p1"}))
        assert [r.institution for r in ranked] == ["inst-a"]

    def test_mean_linked_share_property(self):
        papers = {
            "p1": _paper("p1", institutions=[("inst-a",)]),
            "p2": _paper("p2", institutions=[("inst-a",)]),
            "p3": _paper("p3", institutions=[("inst-a",)]),
        }
        (row,) = rank_institutions(papers, {}, frozenset({"p1"}), frozenset({"p1", "p2"}))
        assert row.mean_linked_share == 0.5
        assert row.total_linked == 3


class TestVenueCitationCoverage:
    def test_equal_venues_accumulate_linearly(self):
        coverage = venue_citation_coverage({"v1": 10, "v2": 10, "v3": 10, "v4": 10})
        assert [share for _, share in coverage] == [0.25, 0.5, 0.75, 1.0]

    def test_descending_by_citations_then_name(self):
        coverage = venue_citation_coverage({"v-low": 1, "v-b": 5, "v-a": 5})
        assert [venue for venue, _ in coverage] == ["v-a", "v-b", "v-low"]

    def test_final_share_is_exactly_one(self):
        coverage = venue_citation_coverage({"v1": 3, "v2": 7, "v3": 13})
        assert coverage[-1][1] == 1.0

    def test_invalid_totals_rejected(self):
        with pytest.raises(MetricError):
            venue_citation_coverage({"v1": -1})
        with pytest.raises(MetricError):
            venue_citation_coverage({"v1": 0, "v2": 0})
