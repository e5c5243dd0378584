"""Shared fixtures: bundled corpus paths, config payloads, one completed run."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from raimpact.pipeline import PipelineConfig, run

DATA_DIR = Path(__file__).parent / "data"

FIXTURE_INPUTS = {
    "papers_path": DATA_DIR / "fixture_papers.jsonl",
    "patents_path": DATA_DIR / "fixture_patents.jsonl",
    "repo_links_path": DATA_DIR / "fixture_repo_links.jsonl",
}


@pytest.fixture(scope="session")
def fixture_truth() -> dict:
    return json.loads((DATA_DIR / "fixture_truth.json").read_text(encoding="utf-8"))


def fixture_config_payload(output_dir: Path, **overrides) -> dict:
    """The bundled corpus config with absolute paths and a caller-chosen output."""
    payload = json.loads((DATA_DIR / "fixture_config.json").read_text(encoding="utf-8"))
    for key, path in FIXTURE_INPUTS.items():
        payload[key] = str(path)
    payload["output_dir"] = str(output_dir)
    payload.update(overrides)
    return payload


@pytest.fixture()
def config_payload(tmp_path: Path) -> dict:
    return fixture_config_payload(tmp_path / "out")


@pytest.fixture(scope="session")
def completed_run(tmp_path_factory: pytest.TempPathFactory) -> tuple[PipelineConfig, dict]:
    """One full pipeline run over the bundled corpus, shared by read-only tests."""
    out = tmp_path_factory.mktemp("bundle") / "out"
    cfg = PipelineConfig.from_payload(fixture_config_payload(out))
    manifest = run(cfg)
    return cfg, manifest
