"""The Choi–Jamiołkowski isomorphism between maps M_m → M_n and M_m ⊗ M_n."""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import ArgumentError, DomainError
from .tensor import (
    ComplexMatrix,
    as_matrix,
    hermitian_eig,
    hs_norm,
    kron,
    matrix_unit,
    max_asymmetry,
    partial_trace_first,
    require_shape,
    vec,
)


@dataclass(frozen=True, eq=False)
class HermitianMapSpec:
    """A map Φ: M_m → M_n held as its Choi matrix.

    ``choi`` is an m×m grid of n×n blocks with block (i, j) equal to Φ(E_ij).
    ``hermitian`` records whether the Choi matrix passed the Hermitian check
    when the map was built.
    """

    m: int
    n: int
    choi: ComplexMatrix
    hermitian: bool = True

    def __post_init__(self) -> None:
        if self.m < 1 or self.n < 1:
            raise ArgumentError(f"map dimensions must be >= 1, got m={self.m}, n={self.n}")
        side = self.m * self.n
        require_shape(self.choi, side, side, "Choi matrix")

    @property
    def side(self) -> int:
        return self.m * self.n


@dataclass(frozen=True, eq=False)
class MapAction:
    """Images of the matrix units: ``images[i, j]`` is Φ(E_ij) (0-based)."""

    m: int
    n: int
    images: npt.NDArray[np.complex128]

    def __post_init__(self) -> None:
        expected = (self.m, self.m, self.n, self.n)
        if self.images.shape != expected:
            raise ArgumentError(f"map action needs images of shape {expected}, got {self.images.shape}")

    @classmethod
    def from_callable(cls, m: int, n: int, fn: Callable[[ComplexMatrix], npt.ArrayLike]) -> MapAction:
        if m < 1 or n < 1:
            raise ArgumentError(f"map dimensions must be >= 1, got m={m}, n={n}")
        images = np.zeros((m, m, n, n), dtype=np.complex128)
        for i in range(m):
            for j in range(m):
                image = as_matrix(fn(matrix_unit(m, i + 1, j + 1)), f"image of E_{i + 1}{j + 1}")
                require_shape(image, n, n, f"image of E_{i + 1}{j + 1}")
                images[i, j] = image
        return cls(m, n, images)


def spec_from_choi(
    choi: npt.ArrayLike, m: int, n: int, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> HermitianMapSpec:
    mat = as_matrix(choi, "Choi matrix")
    if mat.shape[0] != mat.shape[1]:
        raise ArgumentError(f"Choi matrix must be square, got {mat.shape[0]}x{mat.shape[1]}")
    return HermitianMapSpec(m, n, mat, max_asymmetry(mat) <= tol.recon)


def choi_from_action(action: MapAction, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> HermitianMapSpec:
    m, n = action.m, action.n
    # Σ_ij E_ij ⊗ Φ(E_ij): entry ((i, k), (j, l)) is images[i, j, k, l].
    choi = action.images.transpose(0, 2, 1, 3).reshape(m * n, m * n).copy()
    return spec_from_choi(choi, m, n, tol)


def choi_from_kraus(
    weights: Sequence[float], operators: Sequence[npt.ArrayLike], m: int, n: int
) -> ComplexMatrix:
    """Σ λᵢ vec(Aᵢ)vec(Aᵢ)* for n×m operators Aᵢ."""
    if len(weights) != len(operators):
        raise ArgumentError(f"{len(weights)} weights for {len(operators)} operators")
    choi = np.zeros((m * n, m * n), dtype=np.complex128)
    for weight, op in zip(weights, operators):
        mat = as_matrix(op, "Kraus operator")
        require_shape(mat, n, m, "Kraus operator")
        u = vec(mat)
        choi += weight * np.outer(u, u.conj())
    return choi


def apply_via_choi(spec: HermitianMapSpec, x: npt.ArrayLike) -> ComplexMatrix:
    """Φ(X) = tr₁[(Xᵀ ⊗ I_n) C_Φ]."""
    mat = as_matrix(x, "X")
    require_shape(mat, spec.m, spec.m, "X")
    return partial_trace_first(kron(mat.T, np.eye(spec.n)) @ spec.choi, spec.m, spec.n)


def apply_direct(action: MapAction, x: npt.ArrayLike) -> ComplexMatrix:
    """Φ(X) = Σ X[j, k]·Φ(E_jk), evaluated by linearity over the matrix units."""
    mat = as_matrix(x, "X")
    require_shape(mat, action.m, action.m, "X")
    return np.einsum("jk,jkab->ab", mat, action.images)


def is_hermitian_preserving(
    spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> tuple[bool, float]:
    asymmetry = max_asymmetry(spec.choi)
    return asymmetry <= tol.recon, asymmetry


def require_hermitian(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> None:
    ok, asymmetry = is_hermitian_preserving(spec, tol)
    if not ok:
        raise DomainError(
            f"map is not Hermitian-preserving: Choi max asymmetry {asymmetry:.3e} exceeds {tol.recon:.3e}"
        )


def is_cp(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> tuple[bool, float]:
    require_hermitian(spec, tol)
    spectrum = hermitian_eig(spec.choi, tol)
    lam = spectrum.lambda_min
    return lam >= -tol.psd_threshold(spectrum.spectral_norm), lam


def hs_norm_of_map(spec: HermitianMapSpec) -> float:
    return hs_norm(spec.choi)
