"""Jordan decomposition of Hermitian maps, CP-distance and CP approximation."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .choi import HermitianMapSpec, require_hermitian
from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import DomainError
from .tensor import (
    ComplexMatrix,
    RealVector,
    SpectralDecomposition,
    as_matrix,
    hermitian_eig,
    hs_norm,
    max_asymmetry,
    require_shape,
)


@dataclass(frozen=True, eq=False)
class JordanParts:
    """C_Φ = c_plus − c_minus with orthogonal PSD parts.

    ``dcp`` is max(0, −λ_min) exactly; ``multiplicity_k`` is ``None`` when it
    is 0. ``is_cp`` compares λ_min with the PSD slack, so a map within the
    slack of the cone reports ``is_cp`` with a tiny positive ``dcp``.
    """

    c_plus: ComplexMatrix
    c_minus: ComplexMatrix
    eigenvalues: RealVector
    zero_tol: float
    dcp: float
    multiplicity_k: int | None
    bound: float
    hs_plus: float
    hs_minus: float
    lambda_min: float
    is_cp: bool
    rank: int


@dataclass(frozen=True)
class DecompositionAudit:
    """Structural validity and the √k·d_CP bound of a decomposition C_Φ = c1 − c2.

    ``valid`` covers structure only (PSD parts, difference equal to C_Φ);
    ``satisfied`` is the bound check. ``lowner_minimal`` is filled in for
    valid decompositions only.
    """

    valid: bool
    reasons: list[str]
    hs_c2: float
    bound: float
    satisfied: bool
    gap: float
    difference_error: float
    lowner_minimal: bool | None = None


@dataclass(frozen=True)
class ApproximationExpansion:
    """‖C_Φ − C_Ψ‖² split as ‖c_plus − C_Ψ‖² + ‖c_minus‖² + 2·tr(c_minus·C_Ψ)."""

    distance_sq: float
    positive_gap_sq: float
    negative_sq: float
    cross_term: float

    @property
    def expanded(self) -> float:
        return self.positive_gap_sq + self.negative_sq + 2.0 * self.cross_term


def _spectrum(spec: HermitianMapSpec, tol: ToleranceConfig) -> SpectralDecomposition:
    require_hermitian(spec, tol)
    return hermitian_eig(spec.choi, tol)


def _dcp(spectrum: SpectralDecomposition) -> float:
    return max(0.0, -spectrum.lambda_min)


def jordan_decompose(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> JordanParts:
    return jordan_from_spectrum(_spectrum(spec, tol), tol)


def jordan_from_spectrum(spectrum: SpectralDecomposition, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> JordanParts:
    """Jordan parts from an already computed eigendecomposition of C_Φ."""
    c_plus = spectrum.reconstruct(spectrum.positive)
    c_minus = -spectrum.reconstruct(spectrum.negative)

    dcp = _dcp(spectrum)
    k = spectrum.multiplicity(spectrum.lambda_min) if dcp > 0 else None
    return JordanParts(
        c_plus=c_plus,
        c_minus=c_minus,
        eigenvalues=spectrum.eigenvalues,
        zero_tol=spectrum.zero_tol,
        dcp=dcp,
        multiplicity_k=k,
        bound=math.sqrt(k) * dcp if k else 0.0,
        hs_plus=hs_norm(c_plus),
        hs_minus=hs_norm(c_minus),
        lambda_min=spectrum.lambda_min,
        is_cp=spectrum.lambda_min >= -tol.psd_threshold(spectrum.spectral_norm),
        rank=spectrum.rank,
    )


def cp_distance(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    return _dcp(_spectrum(spec, tol))


def lambda_min_multiplicity(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> int:
    spectrum = _spectrum(spec, tol)
    if _dcp(spectrum) == 0.0:
        raise DomainError("map is CP; multiplicity undefined")
    return spectrum.multiplicity(spectrum.lambda_min)


def negative_part_bound(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> float:
    spectrum = _spectrum(spec, tol)
    dcp = _dcp(spectrum)
    if dcp == 0.0:
        return 0.0
    return math.sqrt(spectrum.multiplicity(spectrum.lambda_min)) * dcp


def negative_part_energy(parts: JordanParts) -> float:
    """Σ λ² over the negative eigenvalues, counted with multiplicity."""
    negative = parts.eigenvalues[parts.eigenvalues < -parts.zero_tol]
    return float(np.sum(negative**2))


def best_cp_approximation(
    spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> tuple[HermitianMapSpec, float]:
    """The CP map closest to Φ in Hilbert–Schmidt norm, with its distance."""
    parts = jordan_decompose(spec, tol)
    return HermitianMapSpec(spec.m, spec.n, parts.c_plus, True), parts.hs_minus


def approximation_expansion(
    spec: HermitianMapSpec, c_psi: npt.ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> ApproximationExpansion:
    psi = as_matrix(c_psi, "C_Psi")
    require_shape(psi, spec.side, spec.side, "C_Psi")
    parts = jordan_decompose(spec, tol)
    return ApproximationExpansion(
        distance_sq=hs_norm(spec.choi - psi) ** 2,
        positive_gap_sq=hs_norm(parts.c_plus - psi) ** 2,
        negative_sq=parts.hs_minus**2,
        cross_term=float(np.trace(parts.c_minus @ psi).real),
    )


def trace_shift_decomposition(spec: HermitianMapSpec, shift: float) -> tuple[ComplexMatrix, ComplexMatrix]:
    """(C_Φ + s·I, s·I); s·I is the Choi matrix of A ↦ s·tr(A)·I_n."""
    shifted = shift * np.eye(spec.side, dtype=np.complex128)
    return spec.choi + shifted, shifted


def _psd_violation(name: str, matrix: ComplexMatrix, tol: ToleranceConfig) -> str | None:
    asymmetry = max_asymmetry(matrix)
    if asymmetry > tol.recon:
        return f"{name} not Hermitian (max asymmetry {asymmetry:.3e})"
    spectrum = hermitian_eig(matrix, tol)
    if spectrum.lambda_min < -tol.psd_threshold(spectrum.spectral_norm):
        return f"{name} not PSD (lambda_min {spectrum.lambda_min:.6g})"
    return None


def audit_decomposition(
    spec: HermitianMapSpec,
    c1: npt.ArrayLike,
    c2: npt.ArrayLike,
    tol: ToleranceConfig = DEFAULT_TOLERANCE,
) -> DecompositionAudit:
    first = as_matrix(c1, "c1")
    second = as_matrix(c2, "c2")
    require_shape(first, spec.side, spec.side, "c1")
    require_shape(second, spec.side, spec.side, "c2")
    parts = jordan_decompose(spec, tol)

    reasons = [
        reason
        for reason in (_psd_violation("c1", first, tol), _psd_violation("c2", second, tol))
        if reason is not None
    ]
    difference_error = float(np.max(np.abs(first - second - spec.choi)))
    if difference_error > tol.recon:
        reasons.append(f"c1 - c2 differs from the Choi matrix (max error {difference_error:.3e})")
    valid = not reasons

    hs_c2 = hs_norm(second)
    satisfied = hs_c2 >= parts.bound - tol.recon

    lowner_minimal: bool | None = None
    if valid:
        excess = (second + second.conj().T) / 2 - parts.c_minus
        spectrum = hermitian_eig(excess, tol)
        lowner_minimal = spectrum.lambda_min >= -tol.psd_threshold(spectrum.spectral_norm)
        if not lowner_minimal:
            reasons.append(f"c2 - c_minus not PSD (lambda_min {spectrum.lambda_min:.6g})")
        if not satisfied:
            reasons.append(f"hs_norm(c2) = {hs_c2:.6g} below bound {parts.bound:.6g}")

    return DecompositionAudit(
        valid=valid,
        reasons=reasons,
        hs_c2=hs_c2,
        bound=parts.bound,
        satisfied=satisfied,
        gap=hs_c2 - parts.bound,
        difference_error=difference_error,
        lowner_minimal=lowner_minimal,
    )
