"""Command-line client for the pipeline service.

Every subcommand issues HTTP requests.  By default the service app is mounted
in-process (no socket, no separate server); ``--server`` points the same
commands at a remote instance instead.

Exit codes: 0 success, 2 invalid config or arguments, 3 stage failure.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path
from typing import Any

import click
import httpx

from . import __version__

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_STAGE = 3

_STAGE_COMMANDS = ("ingest", "classify", "link", "metrics", "conventionality", "report")


def _request(server: str | None, path: str, payload: dict[str, Any]) -> httpx.Response:
    """POST one request, either to a remote server or the in-process app."""
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=payload)
    from .service.app import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://raimpact.internal", timeout=600.0
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _load_config(path: str, overrides: dict[str, Any]) -> dict[str, Any]:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        click.echo(f"error: cannot read config {path}: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except json.JSONDecodeError as exc:
        click.echo(f"error: config {path} is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    if not isinstance(payload, dict):
        click.echo("error: config must be a JSON object", err=True)
        sys.exit(EXIT_VALIDATION)
    payload.update({k: v for k, v in overrides.items() if v is not None})
    return payload


def _post(server: str | None, path: str, payload: dict[str, Any]) -> None:
    try:
        response = _request(server, path, payload)
    except httpx.HTTPError as exc:
        click.echo(f"error: request failed: {exc}", err=True)
        sys.exit(EXIT_STAGE)
    try:
        body = response.json()
    except ValueError:
        body = {"detail": response.text}
    if response.status_code == 200:
        click.echo(json.dumps(body, sort_keys=True, indent=2))
        return
    detail = body.get("detail", body)
    if response.status_code >= 500:
        click.echo(f"error: {json.dumps(detail, sort_keys=True)}", err=True)
        sys.exit(EXIT_STAGE)
    click.echo(f"error: {json.dumps(detail, sort_keys=True)}", err=True)
    sys.exit(EXIT_VALIDATION)


def _common_options(fn):
    fn = click.option("--workers", type=int, default=None, help="Override worker count.")(fn)
    fn = click.option("--seed", type=int, default=None, help="Override the config seed.")(fn)
    fn = click.option("--output-dir", type=str, default=None, help="Override the output directory.")(fn)
    fn = click.option("--server", type=str, default=None, help="Remote service URL (default: in-process).")(fn)
    fn = click.option("--config", "config_path", required=True, type=click.Path(), help="Pipeline config JSON.")(fn)
    return fn


@click.group()
@click.version_option(version=__version__, prog_name="raimpact")
def main() -> None:
    """Translational-impact analytics over a responsible-AI paper corpus."""


@main.command()
@_common_options
def validate(config_path: str, server: str | None, output_dir: str | None,
             seed: int | None, workers: int | None) -> None:
    """Check the config and its referenced inputs without running anything."""
    payload = _load_config(config_path, {"output_dir": output_dir, "seed": seed, "workers": workers})
    try:
        response = _request(server, "/validate", {"config": payload})
    except httpx.HTTPError as exc:
        click.echo(f"error: request failed: {exc}", err=True)
        sys.exit(EXIT_STAGE)
    body = response.json()
    if response.status_code != 200:
        click.echo(f"error: {json.dumps(body.get('detail', body), sort_keys=True)}", err=True)
        sys.exit(EXIT_VALIDATION)
    if not body.get("valid"):
        for err in body.get("errors", []):
            click.echo(f"invalid: {err}", err=True)
        sys.exit(EXIT_VALIDATION)
    click.echo(json.dumps(body, sort_keys=True, indent=2))


@main.command()
@_common_options
def run(config_path: str, server: str | None, output_dir: str | None,
        seed: int | None, workers: int | None) -> None:
    """Run every stage and write the full report bundle."""
    payload = _load_config(config_path, {"output_dir": output_dir, "seed": seed, "workers": workers})
    _post(server, "/run", {"config": payload})


def _make_stage_command(stage: str):
    @_common_options
    def _cmd(config_path: str, server: str | None, output_dir: str | None,
             seed: int | None, workers: int | None, _stage: str = stage) -> None:
        payload = _load_config(
            config_path, {"output_dir": output_dir, "seed": seed, "workers": workers}
        )
        _post(server, f"/stages/{_stage}", {"config": payload})

    _cmd.__doc__ = f"Run the {stage} stage (computing missing prerequisites first)."
    return main.command(name=stage)(_cmd)


for _stage_name in _STAGE_COMMANDS:
    _make_stage_command(_stage_name)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host: str, port: int) -> None:
    """Serve the pipeline API over HTTP."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
