from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from numpy.testing import assert_allclose

from hermap.builtins import build_builtin
from hermap.choi import spec_from_choi
from hermap.config import ToleranceConfig
from hermap.errors import ArgumentError, DomainError
from hermap.jordan import (
    approximation_expansion,
    audit_decomposition,
    best_cp_approximation,
    cp_distance,
    jordan_decompose,
    lambda_min_multiplicity,
    negative_part_bound,
    negative_part_energy,
    trace_shift_decomposition,
)
from hermap.sampling import random_cp_map, random_hermitian_map, random_matrix, rng_for
from hermap.tensor import hermitian_eig

from conftest import DIMENSIONS, SEEDS

SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=np.complex128)


def test_transpose_jordan_parts():
    parts = jordan_decompose(build_builtin("transpose"))
    assert_allclose(parts.eigenvalues, [1, 1, 1, -1], atol=1e-12)
    assert_allclose(parts.c_minus, (np.eye(4) - SWAP) / 2, atol=1e-12)
    assert_allclose(parts.c_plus, (np.eye(4) + SWAP) / 2, atol=1e-12)
    assert parts.dcp == pytest.approx(1.0)
    assert parts.multiplicity_k == 1
    assert parts.bound == pytest.approx(1.0)
    assert parts.hs_minus == pytest.approx(1.0)
    assert not parts.is_cp


def test_displayed_higher_multiplicity_choi():
    spec = build_builtin("highmult")
    parts = jordan_decompose(spec)
    assert_allclose(parts.eigenvalues, [2, 2, 1, -1], atol=1e-12)
    w = np.array([0, 1, 1, 0]) / math.sqrt(2)
    assert_allclose(parts.c_minus, np.outer(w, w), atol=1e-12)
    assert parts.multiplicity_k == 1
    assert parts.bound == pytest.approx(1.0)


def test_spectral_higher_multiplicity_attains_bound():
    parts = jordan_decompose(build_builtin("highmult", {"variant": "spectral"}))
    assert_allclose(parts.eigenvalues, [2, 2, -1, -1], atol=1e-12)
    assert_allclose(parts.c_minus, np.diag([0, 1, 1, 0]), atol=1e-12)
    assert parts.multiplicity_k == 2
    assert parts.bound == pytest.approx(math.sqrt(2))
    assert parts.hs_minus == pytest.approx(math.sqrt(2))
    assert negative_part_energy(parts) == pytest.approx(2.0)


def test_formula_higher_multiplicity_is_cp():
    spec = build_builtin("highmult", {"variant": "formula"})
    parts = jordan_decompose(spec)
    assert parts.is_cp
    assert parts.dcp <= 1e-12
    assert parts.bound <= 1e-12
    assert_allclose(parts.c_minus, np.zeros((4, 4)), atol=1e-12)
    assert cp_distance(spec) <= 1e-12


def test_exactly_psd_map_has_no_multiplicity():
    spec = build_builtin("trace")
    parts = jordan_decompose(spec)
    assert parts.dcp == 0.0
    assert parts.multiplicity_k is None
    assert parts.bound == 0.0
    assert negative_part_bound(spec) == 0.0
    with pytest.raises(DomainError, match="multiplicity undefined"):
        lambda_min_multiplicity(spec)


def test_cp_distance_is_not_rounded_to_the_zero_threshold():
    spec = spec_from_choi(np.diag([1.0, -5e-10]), 1, 2)
    strict = jordan_decompose(spec, ToleranceConfig(psd_slack=0.0))
    assert strict.dcp == pytest.approx(5e-10, rel=1e-12)
    assert strict.multiplicity_k == 1
    assert not strict.is_cp
    assert cp_distance(spec) == pytest.approx(5e-10, rel=1e-12)

    lenient = jordan_decompose(spec)
    assert lenient.is_cp
    assert lenient.dcp == pytest.approx(5e-10, rel=1e-12)
    assert_allclose(lenient.c_minus, np.zeros((2, 2)))
    assert lenient.hs_minus >= lenient.bound - 1e-9


def test_negative_trace_bound_has_multiplicity_four():
    spec = build_builtin("scaled_trace", {"k": -1})
    assert_allclose(spec.choi, -np.eye(4))
    assert cp_distance(spec) == pytest.approx(1.0)
    assert lambda_min_multiplicity(spec) == 4
    assert negative_part_bound(spec) == pytest.approx(2.0)
    assert jordan_decompose(spec).hs_minus == pytest.approx(2.0)


def test_jordan_rejects_non_hermitian():
    choi = np.zeros((4, 4), dtype=np.complex128)
    choi[1, 2] = 1.0
    with pytest.raises(DomainError):
        jordan_decompose(spec_from_choi(choi, 2, 2))


@settings(max_examples=200, deadline=None)
@given(seed=SEEDS, m=DIMENSIONS, n=DIMENSIONS)
def test_jordan_parts_are_orthogonal_psd_and_bounded(seed, m, n):
    spec = random_hermitian_map(rng_for(seed), m, n)
    parts = jordan_decompose(spec)
    scale = 1e-9 * (1 + np.max(np.abs(parts.eigenvalues)))
    assert_allclose(parts.c_plus - parts.c_minus, spec.choi, atol=1e-8)
    assert np.max(np.abs(parts.c_plus @ parts.c_minus)) <= 1e-8 * (1 + np.max(np.abs(parts.eigenvalues)) ** 2)
    assert hermitian_eig(parts.c_plus).lambda_min >= -scale
    assert hermitian_eig(parts.c_minus).lambda_min >= -scale
    assert parts.hs_minus >= parts.bound - 1e-9
    assert parts.hs_minus**2 == pytest.approx(negative_part_energy(parts), rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seed=SEEDS, m=DIMENSIONS, n=DIMENSIONS)
def test_best_cp_approximation_beats_random_cp_maps(seed, m, n):
    rng = rng_for(seed)
    spec = random_hermitian_map(rng, m, n)
    approximation, distance = best_cp_approximation(spec)
    assert distance == pytest.approx(jordan_decompose(spec).hs_minus)
    assert np.linalg.norm(spec.choi - approximation.choi) == pytest.approx(distance, rel=1e-9, abs=1e-12)

    for _ in range(3):
        psi = random_cp_map(rng, m, n, terms=2)
        expansion = approximation_expansion(spec, psi.choi)
        assert expansion.cross_term >= -1e-9
        assert expansion.expanded == pytest.approx(expansion.distance_sq, rel=1e-9)
        assert math.sqrt(expansion.distance_sq) >= distance - 1e-9


def test_approximation_expansion_checks_shape():
    with pytest.raises(ArgumentError):
        approximation_expansion(build_builtin("transpose"), np.eye(3))


def test_jordan_decomposition_passes_its_own_audit():
    spec = build_builtin("highmult", {"variant": "spectral"})
    parts = jordan_decompose(spec)
    audit = audit_decomposition(spec, parts.c_plus, parts.c_minus)
    assert audit.valid
    assert audit.reasons == []
    assert audit.satisfied
    assert audit.lowner_minimal
    assert audit.gap == pytest.approx(0.0, abs=1e-9)


def test_trace_shift_audit_of_transpose():
    spec = build_builtin("transpose")
    c1, c2 = trace_shift_decomposition(spec, 1.0)
    assert_allclose(c2, np.eye(4))
    audit = audit_decomposition(spec, c1, c2)
    assert audit.valid
    assert audit.hs_c2 == pytest.approx(2.0)
    assert audit.bound == pytest.approx(1.0)
    assert audit.satisfied
    assert audit.gap == pytest.approx(1.0)


def test_small_trace_shift_is_not_a_decomposition():
    spec = build_builtin("transpose")
    audit = audit_decomposition(spec, *trace_shift_decomposition(spec, 0.5))
    assert not audit.valid
    assert any(reason.startswith("c1 not PSD") for reason in audit.reasons)
    assert audit.lowner_minimal is None


def test_audit_reports_mismatched_difference():
    spec = build_builtin("transpose")
    parts = jordan_decompose(spec)
    audit = audit_decomposition(spec, parts.c_plus, parts.c_minus + 0.25 * np.eye(4))
    assert not audit.valid
    assert any("differs from the Choi matrix" in reason for reason in audit.reasons)
    assert audit.difference_error == pytest.approx(0.25)


def test_audit_flags_decomposition_that_is_not_lowner_minimal():
    spec = spec_from_choi(np.diag([1.0, -1.0]), 1, 2)
    c2 = np.array([[1.0, 1.2], [1.2, 2.0]])
    audit = audit_decomposition(spec, spec.choi + c2, c2)
    assert audit.valid
    assert audit.satisfied
    assert audit.lowner_minimal is False
    assert any(reason.startswith("c2 - c_minus not PSD") for reason in audit.reasons)


def test_audit_rejects_wrong_shapes():
    with pytest.raises(ArgumentError):
        audit_decomposition(build_builtin("transpose"), np.eye(3), np.eye(3))


def test_best_cp_approximation_of_negative_trace_is_zero_map():
    approximation, distance = best_cp_approximation(build_builtin("scaled_trace", {"k": -1}))
    assert (approximation.m, approximation.n) == (2, 2)
    assert_allclose(approximation.choi, np.zeros((4, 4)), atol=1e-12)
    assert distance == pytest.approx(2.0)


def _psd_floor(matrix) -> float:
    return -1e-8 * (1 + hermitian_eig(matrix).spectral_norm)


@settings(max_examples=200, deadline=None)
@given(seed=SEEDS, m=DIMENSIONS, n=DIMENSIONS)
def test_negative_part_is_below_every_completing_psd_matrix(seed, m, n):
    rng = rng_for(seed)
    spec = random_hermitian_map(rng, m, n)
    parts = jordan_decompose(spec)
    side = spec.side

    r = random_matrix(rng, side, side)
    shifted = parts.c_minus + r.conj().T @ r
    assert hermitian_eig(spec.choi + shifted).lambda_min >= _psd_floor(spec.choi + shifted)
    assert hermitian_eig(shifted - parts.c_minus).lambda_min >= _psd_floor(shifted)

    s = random_matrix(rng, side, side)
    scalar = parts.dcp * (1 + rng.random()) * np.eye(side) + s.conj().T @ s
    assert hermitian_eig(spec.choi + scalar).lambda_min >= _psd_floor(spec.choi + scalar)
    assert hermitian_eig(scalar - parts.c_minus).lambda_min >= _psd_floor(scalar)


@settings(max_examples=200, deadline=None)
@given(seed=SEEDS, m=DIMENSIONS, n=DIMENSIONS)
def test_shifted_decompositions_respect_the_bound(seed, m, n):
    rng = rng_for(seed)
    spec = random_hermitian_map(rng, m, n)
    parts = jordan_decompose(spec)
    g = random_matrix(rng, spec.side, spec.side)
    shift = g @ g.conj().T
    audit = audit_decomposition(spec, parts.c_plus + shift, parts.c_minus + shift)
    assert audit.valid, audit.reasons
    assert audit.satisfied
    assert audit.hs_c2 >= parts.bound - 1e-9
    assert audit.lowner_minimal

    if np.count_nonzero(parts.eigenvalues < -parts.zero_tol) == parts.multiplicity_k:
        assert parts.hs_minus == pytest.approx(parts.bound, rel=1e-9)
