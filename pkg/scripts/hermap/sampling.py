"""Seeded random maps and inputs for verification runs and tests."""

from __future__ import annotations

import numpy as np

from .choi import HermitianMapSpec, choi_from_kraus, spec_from_choi
from .errors import ArgumentError
from .tensor import ComplexMatrix


def rng_for(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_matrix(rng: np.random.Generator, rows: int, cols: int) -> ComplexMatrix:
    """Entries with independent standard normal real and imaginary parts."""
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_hermitian(rng: np.random.Generator, d: int) -> ComplexMatrix:
    g = random_matrix(rng, d, d)
    return (g + g.conj().T) / 2


def random_inputs(rng: np.random.Generator, m: int, count: int) -> list[ComplexMatrix]:
    """General (non-Hermitian) m×m inputs."""
    if count < 1:
        raise ArgumentError(f"sample count must be >= 1, got {count}")
    return [random_matrix(rng, m, m) for _ in range(count)]


def random_hermitian_map(
    rng: np.random.Generator, m: int, n: int, terms: int | None = None
) -> HermitianMapSpec:
    """Σ λᵢ vec(Aᵢ)vec(Aᵢ)* with standard normal weights λᵢ; ``terms`` defaults to m·n."""
    count = m * n if terms is None else terms
    if count < 1:
        raise ArgumentError(f"number of terms must be >= 1, got {count}")
    weights = [float(w) for w in rng.standard_normal(count)]
    operators = [random_matrix(rng, n, m) for _ in range(count)]
    return spec_from_choi(choi_from_kraus(weights, operators, m, n), m, n)


def random_cp_map(rng: np.random.Generator, m: int, n: int, terms: int | None = None) -> HermitianMapSpec:
    count = m * n if terms is None else terms
    if count < 1:
        raise ArgumentError(f"number of terms must be >= 1, got {count}")
    operators = [random_matrix(rng, n, m) for _ in range(count)]
    return spec_from_choi(choi_from_kraus([1.0] * count, operators, m, n), m, n)
