"""Translational-impact analytics for responsible-AI research corpora.

The package classifies papers into responsible-AI topics by embedding
similarity, links them to patents and code repositories, and quantifies
translation through impact ratios, Kaplan-Meier time-to-uptake curves,
institution rankings, and citation-conventionality scores against a
permutation null model.
"""

__version__ = "0.1.0"

from .classify import TOPICS, retain_rai_papers, select_rai
from .conventionality import score_corpus
from .corpus import load_papers, load_patents, load_repo_links, partition
from .graph import build_citation_graph
from .linkage import link_patents, link_repos, normalized_levenshtein
from .metrics import (
    citation_weighted_ratio,
    gini_simpson,
    impact_ratio,
    pearson,
    rank_institutions,
    two_proportion_z_test,
    venue_citation_coverage,
    welch_t_test,
)
from .pipeline import PipelineConfig, run, run_stage
from .survival import kaplan_meier, median_crossing
from .vectors import MockTextEmbedder, load_vectors, percentile_threshold, save_vectors

__all__ = [
    "__version__",
    "TOPICS",
    "retain_rai_papers",
    "select_rai",
    "score_corpus",
    "load_papers",
    "load_patents",
    "load_repo_links",
    "partition",
    "build_citation_graph",
    "link_patents",
    "link_repos",
    "normalized_levenshtein",
    "citation_weighted_ratio",
    "gini_simpson",
    "impact_ratio",
    "pearson",
    "rank_institutions",
    "two_proportion_z_test",
    "venue_citation_coverage",
    "welch_t_test",
    "PipelineConfig",
    "run",
    "run_stage",
    "kaplan_meier",
    "median_crossing",
    "MockTextEmbedder",
    "load_vectors",
    "percentile_threshold",
    "save_vectors",
]
