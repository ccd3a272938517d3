"""Dense complex matrix algebra with a fixed index convention.

Tensor products are ordered as in ``numpy.kron``: for ``X`` in M_m ⊗ M_n the
row index ``(j, k)`` (first factor ``j``, second factor ``k``) sits at
position ``j * n + k``. ``vec`` stacks columns, so
``kron(M, N) @ vec(C) == vec(N @ C @ M.T)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt
import scipy.linalg

from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import ArgumentError, DomainError, NumericError

type ComplexMatrix = npt.NDArray[np.complex128]
type RealVector = npt.NDArray[np.float64]

# Floor for the eigendecomposition residual check; recon may be 0.
EIG_ROUNDOFF = 64 * float(np.finfo(np.float64).eps)


def as_matrix(value: npt.ArrayLike, name: str = "matrix") -> ComplexMatrix:
    arr = np.asarray(value, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ArgumentError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ArgumentError(f"{name} has NaN or infinite entries")
    return arr


def require_shape(matrix: ComplexMatrix, rows: int, cols: int, name: str = "matrix") -> None:
    if matrix.shape != (rows, cols):
        raise ArgumentError(f"{name} must be {rows}x{cols}, got {matrix.shape[0]}x{matrix.shape[1]}")


def matrix_unit(d: int, i: int, j: int) -> ComplexMatrix:
    """E_ij in M_d with 1-based ``i`` and ``j``."""
    if d < 1:
        raise ArgumentError(f"dimension must be >= 1, got {d}")
    if not (1 <= i <= d and 1 <= j <= d):
        raise ArgumentError(f"matrix unit index ({i}, {j}) out of range for dimension {d}")
    unit = np.zeros((d, d), dtype=np.complex128)
    unit[i - 1, j - 1] = 1.0
    return unit


def kron(a: npt.ArrayLike, b: npt.ArrayLike) -> ComplexMatrix:
    return np.kron(as_matrix(a, "A"), as_matrix(b, "B"))


def vec(a: npt.ArrayLike) -> npt.NDArray[np.complex128]:
    """Column-stacking vectorization: component ``j * rows + i`` is ``a[i, j]``."""
    return as_matrix(a).T.reshape(-1).copy()


def unvec(v: npt.ArrayLike, n: int, m: int) -> ComplexMatrix:
    """Inverse of :func:`vec` producing an ``n x m`` matrix."""
    flat = np.asarray(v, dtype=np.complex128).reshape(-1)
    if n < 1 or m < 1:
        raise ArgumentError(f"unvec dimensions must be >= 1, got {n}x{m}")
    if flat.size != n * m:
        raise ArgumentError(f"vector of length {flat.size} cannot be reshaped to {n}x{m}")
    return flat.reshape(m, n).T.copy()


def _require_bipartite(x: ComplexMatrix, m: int, n: int) -> None:
    if m < 1 or n < 1:
        raise ArgumentError(f"factor dimensions must be >= 1, got m={m}, n={n}")
    side = m * n
    if x.shape != (side, side):
        raise ArgumentError(f"expected a {side}x{side} matrix for m={m}, n={n}, got {x.shape[0]}x{x.shape[1]}")


def partial_trace_first(x: npt.ArrayLike, m: int, n: int) -> ComplexMatrix:
    """tr₁: M_m ⊗ M_n → M_n, summing the diagonal n×n blocks."""
    mat = as_matrix(x)
    _require_bipartite(mat, m, n)
    return np.einsum("jkjl->kl", mat.reshape(m, n, m, n))


def partial_trace_second(x: npt.ArrayLike, m: int, n: int) -> ComplexMatrix:
    """tr₂: M_m ⊗ M_n → M_m, replacing each n×n block by its trace."""
    mat = as_matrix(x)
    _require_bipartite(mat, m, n)
    return np.einsum("ikjk->ij", mat.reshape(m, n, m, n))


def hs_norm(matrix: npt.ArrayLike) -> float:
    return float(np.linalg.norm(as_matrix(matrix), "fro"))


def max_asymmetry(matrix: ComplexMatrix) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues in descending order with the matching eigenvectors as columns."""

    eigenvalues: RealVector
    eigenvectors: ComplexMatrix
    zero_tol: float

    @property
    def dimension(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def lambda_min(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def spectral_norm(self) -> float:
        return float(np.max(np.abs(self.eigenvalues)))

    @property
    def positive(self) -> npt.NDArray[np.bool_]:
        return self.eigenvalues > self.zero_tol

    @property
    def negative(self) -> npt.NDArray[np.bool_]:
        return self.eigenvalues < -self.zero_tol

    @property
    def rank(self) -> int:
        return int(np.count_nonzero(self.positive | self.negative))

    def cluster(self, value: float) -> npt.NDArray[np.bool_]:
        return np.abs(self.eigenvalues - value) <= self.zero_tol * (1.0 + abs(value))

    def multiplicity(self, value: float) -> int:
        """Dimension of the eigenspace of ``value`` (0 if it is not an eigenvalue)."""
        return int(np.count_nonzero(self.cluster(value)))

    def cluster_projection(self, value: float) -> ComplexMatrix:
        """Orthogonal projection onto the eigenspace of ``value``."""
        basis = self.eigenvectors[:, self.cluster(value)]
        return basis @ basis.conj().T

    def reconstruct(self, mask: npt.NDArray[np.bool_] | None = None) -> ComplexMatrix:
        values, vectors = self.eigenvalues, self.eigenvectors
        if mask is not None:
            values, vectors = values[mask], vectors[:, mask]
        return (vectors * values) @ vectors.conj().T


def hermitian_eig(h: npt.ArrayLike, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> SpectralDecomposition:
    mat = as_matrix(h)
    d = mat.shape[0]
    if mat.shape[1] != d:
        raise ArgumentError(f"eigendecomposition needs a square matrix, got {mat.shape[0]}x{mat.shape[1]}")

    asymmetry = max_asymmetry(mat)
    if asymmetry > tol.recon:
        raise DomainError(f"matrix is not Hermitian: max asymmetry {asymmetry:.3e} exceeds {tol.recon:.3e}")
    sym = (mat + mat.conj().T) / 2

    try:
        values, vectors = scipy.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver did not converge: {exc}") from exc
    values = np.ascontiguousarray(values[::-1], dtype=np.float64)
    vectors = np.ascontiguousarray(vectors[:, ::-1])

    norm = float(np.max(np.abs(values)))
    limit = d * max(tol.recon, EIG_ROUNDOFF) * (1.0 + norm)
    residual = float(np.max(np.abs((vectors * values) @ vectors.conj().T - sym)))
    orthogonality = float(np.max(np.abs(vectors.conj().T @ vectors - np.eye(d))))
    if residual > limit or orthogonality > limit:
        raise NumericError(
            f"eigendecomposition misses tolerance: residual {residual:.3e},"
            f" orthogonality {orthogonality:.3e}, limit {limit:.3e}"
        )

    return SpectralDecomposition(values, vectors, tol.eig_threshold(norm))

