"""HTTP service wrapping the analytics pipeline."""

from .app import create_app

__all__ = ["create_app"]
