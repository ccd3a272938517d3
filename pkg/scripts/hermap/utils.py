from __future__ import annotations

from pathlib import Path

from rich.console import Console

# stdout carries the JSON report; everything human-readable goes to stderr.
console = Console(stderr=True)


def repo_root() -> Path:
    return Path(__file__).resolve().parents[2]


def data_path(name: str) -> Path:
    return repo_root() / "scripts" / name
