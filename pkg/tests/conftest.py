from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import pytest
from hypothesis import strategies as st

from hermap.config import ToleranceConfig

DIMENSIONS = st.sampled_from([2, 3, 4])
SEEDS = st.integers(min_value=0, max_value=2**32 - 1)


@pytest.fixture
def tol() -> ToleranceConfig:
    return ToleranceConfig()


@pytest.fixture
def write_document(tmp_path: Path) -> Callable[[dict[str, Any]], Path]:
    counter = iter(range(1_000_000))

    def write(document: dict[str, Any]) -> Path:
        path = tmp_path / f"map-{next(counter)}.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write
