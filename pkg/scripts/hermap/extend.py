"""Kraus terms of Hermitian maps and CP extensions on an auxiliary space C^k.

An extension represents Φ(X) = tr_k[Ψ(X ⊗ I_k)(I_n ⊗ Q)] where Ψ has Kraus
operators √|λ|·(A ⊗ E_jj) and Q is a diagonal sign matrix. Auxiliary
indices are 1-based, like the matrix units in :mod:`hermap.tensor`.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from itertools import accumulate

import numpy as np
import numpy.typing as npt
import scipy.sparse
import scipy.sparse.csgraph

from .choi import HermitianMapSpec, MapAction, apply_via_choi, require_hermitian
from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import ArgumentError, DomainError
from .tensor import (
    ComplexMatrix,
    SpectralDecomposition,
    as_matrix,
    hermitian_eig,
    kron,
    matrix_unit,
    partial_trace_second,
    require_shape,
    unvec,
)


@dataclass(frozen=True, eq=False)
class KrausTerm:
    """One eigenpair of C_Φ as (λ, A) with vec(A) the unit eigenvector."""

    weight: float
    operator: ComplexMatrix


@dataclass(frozen=True, eq=False)
class AuxiliaryTerm:
    magnitude: float
    operator: ComplexMatrix
    aux_index: int
    sign: int


@dataclass(frozen=True, eq=False)
class CpExtension:
    """A CP map Ψ on M_m ⊗ M_k with sign matrix Q that contracts back to Φ.

    ``claimed_k`` is the auxiliary dimension max(rᵢ) stated for the block
    reduction; it is recorded for comparison only and is ``None`` for
    unreduced extensions.
    """

    m: int
    n: int
    k: int
    terms: tuple[AuxiliaryTerm, ...]
    q: ComplexMatrix
    claimed_k: int | None = None
    block_ranks: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ArgumentError(f"auxiliary dimension must be >= 1, got {self.k}")
        require_shape(self.q, self.k, self.k, "Q")
        diagonal = np.diag(self.q)
        if np.any(self.q - np.diag(diagonal)) or np.any(diagonal.imag) or not np.all(
            np.isin(diagonal.real, (-1.0, 0.0, 1.0))
        ):
            raise ArgumentError("Q must be a real diagonal matrix with entries in {-1, 0, 1}")
        for term in self.terms:
            if not 1 <= term.aux_index <= self.k:
                raise ArgumentError(f"auxiliary index {term.aux_index} out of range 1..{self.k}")
            if term.sign not in (-1, 1) or term.magnitude <= 0:
                raise ArgumentError(f"term needs a sign of +-1 and a positive magnitude, got {term.sign}, {term.magnitude}")
            if diagonal[term.aux_index - 1].real != term.sign:
                raise ArgumentError(
                    f"auxiliary index {term.aux_index} carries sign {diagonal[term.aux_index - 1].real:+.0f}"
                    f" but a term of sign {term.sign:+d} is assigned to it"
                )
            require_shape(term.operator, self.n, self.m, "extension operator")

    @property
    def q_diag(self) -> list[int]:
        return [int(v) for v in np.diag(self.q).real]


@dataclass(frozen=True)
class BlockPartition:
    """Contiguous blocks of input indices (sizes m₁..m_b) paired with output blocks (n₁..n_b)."""

    input_sizes: tuple[int, ...]
    output_sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.input_sizes or len(self.input_sizes) != len(self.output_sizes):
            raise ArgumentError(
                f"partition needs the same positive number of input and output blocks, got {self}"
            )
        if any(size < 1 for size in (*self.input_sizes, *self.output_sizes)):
            raise ArgumentError(f"partition block sizes must be >= 1, got {self}")

    def __str__(self) -> str:
        return f"{','.join(map(str, self.input_sizes))}/{','.join(map(str, self.output_sizes))}"

    @classmethod
    def parse(cls, text: str) -> BlockPartition:
        """Read ``"m1,m2,.../n1,n2,..."``."""
        try:
            left, right = text.split("/")
            inputs = tuple(int(part) for part in left.split(","))
            outputs = tuple(int(part) for part in right.split(","))
        except ValueError as exc:
            raise ArgumentError(f"partition must look like 'm1,m2/n1,n2', got {text!r}") from exc
        return cls(inputs, outputs)

    @classmethod
    def single(cls, m: int, n: int) -> BlockPartition:
        return cls((m,), (n,))

    @property
    def blocks(self) -> int:
        return len(self.input_sizes)

    def validate(self, m: int, n: int) -> None:
        if sum(self.input_sizes) != m or sum(self.output_sizes) != n:
            raise ArgumentError(
                f"partition {self} sums to {sum(self.input_sizes)}/{sum(self.output_sizes)}, map is {m}/{n}"
            )

    def input_offsets(self) -> list[int]:
        return [0, *accumulate(self.input_sizes)]

    def output_offsets(self) -> list[int]:
        return [0, *accumulate(self.output_sizes)]

    def input_labels(self) -> npt.NDArray[np.int_]:
        return np.repeat(np.arange(self.blocks), self.input_sizes)

    def output_labels(self) -> npt.NDArray[np.int_]:
        return np.repeat(np.arange(self.blocks), self.output_sizes)


def _terms_from_spectrum(spectrum: SpectralDecomposition, n: int, m: int, zero_tol: float) -> list[KrausTerm]:
    keep = np.abs(spectrum.eigenvalues) > zero_tol
    return [
        KrausTerm(float(weight), unvec(vector, n, m))
        for weight, vector in zip(spectrum.eigenvalues[keep], spectrum.eigenvectors[:, keep].T)
    ]


def kraus_terms(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> list[KrausTerm]:
    """Weighted Kraus terms in descending weight order; Φ(X) = Σ λᵢ AᵢXAᵢ*."""
    require_hermitian(spec, tol)
    spectrum = hermitian_eig(spec.choi, tol)
    return _terms_from_spectrum(spectrum, spec.n, spec.m, spectrum.zero_tol)


def apply_kraus(terms: Iterable[KrausTerm], x: npt.ArrayLike, n: int) -> ComplexMatrix:
    """Σ λᵢ AᵢXAᵢ* as an n×n matrix (zero for an empty term list)."""
    mat = as_matrix(x, "X")
    result = np.zeros((n, n), dtype=np.complex128)
    for term in terms:
        result += term.weight * (term.operator @ mat @ term.operator.conj().T)
    return result


def _sign_matrix(signs: Sequence[float]) -> ComplexMatrix:
    return np.diag(np.asarray(signs, dtype=np.complex128))


def build_extension(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> CpExtension:
    """Extension with k = rank(C_Φ) and Q = diag(sgn λ₁, …, sgn λ_r)."""
    terms = kraus_terms(spec, tol)
    if not terms:
        raise DomainError("rank 0; extension trivial/undefined")
    aux_terms = tuple(
        AuxiliaryTerm(abs(term.weight), term.operator, index, 1 if term.weight > 0 else -1)
        for index, term in enumerate(terms, start=1)
    )
    return CpExtension(
        m=spec.m,
        n=spec.n,
        k=len(aux_terms),
        terms=aux_terms,
        q=_sign_matrix([term.sign for term in aux_terms]),
    )


def contract_auxiliary(
    terms: Iterable[AuxiliaryTerm], q: ComplexMatrix, x: npt.ArrayLike, m: int, n: int, k: int
) -> ComplexMatrix:
    """tr_k[Ψ(X ⊗ I_k)(I_n ⊗ Q)] evaluated on the full tensor product."""
    mat = as_matrix(x, "X")
    require_shape(mat, m, m, "X")
    require_shape(q, k, k, "Q")
    lifted = kron(mat, np.eye(k))
    image = np.zeros((n * k, n * k), dtype=np.complex128)
    for term in terms:
        op = kron(term.operator, matrix_unit(k, term.aux_index, term.aux_index))
        image += term.magnitude * (op @ lifted @ op.conj().T)
    return partial_trace_second(image @ kron(np.eye(n), q), n, k)


def apply_extension(ext: CpExtension, x: npt.ArrayLike, *, literal: bool = False) -> ComplexMatrix:
    mat = as_matrix(x, "X")
    require_shape(mat, ext.m, ext.m, "X")
    if literal:
        return contract_auxiliary(ext.terms, ext.q, mat, ext.m, ext.n, ext.k)
    result = np.zeros((ext.n, ext.n), dtype=np.complex128)
    for term in ext.terms:
        sign = ext.q[term.aux_index - 1, term.aux_index - 1].real
        result += term.magnitude * sign * (term.operator @ mat @ term.operator.conj().T)
    return result


def extension_kraus_operators(ext: CpExtension) -> list[tuple[float, ComplexMatrix]]:
    """Kraus pairs (|λ|, A ⊗ E_jj) of Ψ: M_m ⊗ M_k → M_n ⊗ M_k."""
    return [
        (term.magnitude, kron(term.operator, matrix_unit(ext.k, term.aux_index, term.aux_index)))
        for term in ext.terms
    ]


def extension_map(ext: CpExtension) -> MapAction:
    pairs = extension_kraus_operators(ext)

    def psi(y: ComplexMatrix) -> ComplexMatrix:
        image = np.zeros((ext.n * ext.k, ext.n * ext.k), dtype=np.complex128)
        for magnitude, op in pairs:
            image += magnitude * (op @ y @ op.conj().T)
        return image

    return MapAction.from_callable(ext.m * ext.k, ext.n * ext.k, psi)


def reconstruction_error(
    spec: HermitianMapSpec, ext: CpExtension, inputs: Iterable[npt.ArrayLike], *, literal: bool = False
) -> float:
    """Max-entry error of the extension against the Choi action over ``inputs``."""
    worst = 0.0
    for x in inputs:
        delta = apply_extension(ext, x, literal=literal) - apply_via_choi(spec, x)
        worst = max(worst, float(np.max(np.abs(delta))))
    return worst


def _block_index_labels(spec: HermitianMapSpec, partition: BlockPartition) -> npt.NDArray[np.int_]:
    """Block of each Choi index (a, b), or -1 when a and b lie in different blocks."""
    rows = np.repeat(partition.input_labels(), spec.n)
    cols = np.tile(partition.output_labels(), spec.m)
    return np.where(rows == cols, rows, -1)


def _require_block_diagonal(spec: HermitianMapSpec, partition: BlockPartition, tol: ToleranceConfig) -> None:
    labels = _block_index_labels(spec, partition)
    same = (labels[:, None] == labels[None, :]) & (labels[:, None] >= 0)
    stray = np.where(same, 0.0, np.abs(spec.choi))
    worst = float(stray.max())
    if worst <= tol.recon:
        return
    row, col = np.unravel_index(int(np.argmax(stray)), stray.shape)
    in_labels, out_labels = partition.input_labels(), partition.output_labels()

    def where(index: int) -> str:
        a, b = divmod(index, spec.n)
        return f"(input block {in_labels[a] + 1}, output block {out_labels[b] + 1})"

    raise DomainError(
        f"Choi matrix is not block-diagonal for partition {partition}: entry {worst:.3e}"
        f" couples {where(int(row))} with {where(int(col))}"
    )


def _block_terms(
    spec: HermitianMapSpec, partition: BlockPartition, tol: ToleranceConfig
) -> list[list[KrausTerm]]:
    """Per-block Kraus terms with operators zero-padded into n×m."""
    require_hermitian(spec, tol)
    partition.validate(spec.m, spec.n)
    _require_block_diagonal(spec, partition, tol)

    labels = _block_index_labels(spec, partition)
    spectra: list[SpectralDecomposition] = []
    for block in range(partition.blocks):
        index = np.flatnonzero(labels == block)
        spectra.append(hermitian_eig(spec.choi[np.ix_(index, index)], tol))
    # One threshold for all blocks: the spectrum of C_Φ is the union of the block spectra.
    zero_tol = tol.eig_threshold(max(spectrum.spectral_norm for spectrum in spectra))

    in_off, out_off = partition.input_offsets(), partition.output_offsets()
    blocks: list[list[KrausTerm]] = []
    for block, spectrum in enumerate(spectra):
        m_i, n_i = partition.input_sizes[block], partition.output_sizes[block]
        padded: list[KrausTerm] = []
        for term in _terms_from_spectrum(spectrum, n_i, m_i, zero_tol):
            op = np.zeros((spec.n, spec.m), dtype=np.complex128)
            op[out_off[block] : out_off[block] + n_i, in_off[block] : in_off[block] + m_i] = term.operator
            padded.append(KrausTerm(term.weight, op))
        blocks.append(padded)
    return blocks


def block_reduce(
    spec: HermitianMapSpec, partition: BlockPartition, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> CpExtension:
    """Extension sharing one auxiliary space across the diagonal blocks of C_Φ.

    Positive terms of every block use indices 1..pᵢ and negative terms
    P+1..P+qᵢ with P = max pᵢ, so each index carries a single sign and
    k = max pᵢ + max qᵢ.
    """
    blocks = _block_terms(spec, partition, tol)
    positives = [[term for term in terms if term.weight > 0] for terms in blocks]
    negatives = [[term for term in terms if term.weight < 0] for terms in blocks]
    top_p = max(len(terms) for terms in positives)
    top_q = max(len(terms) for terms in negatives)
    if top_p + top_q == 0:
        raise DomainError("rank 0; extension trivial/undefined")

    aux_terms: list[AuxiliaryTerm] = []
    for pos, neg in zip(positives, negatives):
        aux_terms.extend(
            AuxiliaryTerm(term.weight, term.operator, index, 1) for index, term in enumerate(pos, start=1)
        )
        aux_terms.extend(
            AuxiliaryTerm(-term.weight, term.operator, index, -1)
            for index, term in enumerate(neg, start=top_p + 1)
        )

    ranks = tuple(len(terms) for terms in blocks)
    return CpExtension(
        m=spec.m,
        n=spec.n,
        k=top_p + top_q,
        terms=tuple(aux_terms),
        q=_sign_matrix([1] * top_p + [-1] * top_q),
        claimed_k=max(ranks),
        block_ranks=ranks,
    )


def summed_block_signs(
    spec: HermitianMapSpec, partition: BlockPartition, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> tuple[list[AuxiliaryTerm], ComplexMatrix]:
    """Block terms on indices 1..rᵢ with Q = Σᵢ VᵢQᵢVᵢ*, k = max rᵢ.

    Indices shared by blocks of different signs get summed (or cancelled)
    entries in Q, so contracting with this Q does not reproduce Φ in general.
    Kept to measure that failure next to :func:`block_reduce`.
    """
    blocks = _block_terms(spec, partition, tol)
    k = max(len(terms) for terms in blocks)
    if k == 0:
        raise DomainError("rank 0; extension trivial/undefined")
    q = np.zeros((k, k), dtype=np.complex128)
    aux_terms: list[AuxiliaryTerm] = []
    for terms in blocks:
        for index, term in enumerate(terms, start=1):
            sign = 1 if term.weight > 0 else -1
            q[index - 1, index - 1] += sign
            aux_terms.append(AuxiliaryTerm(abs(term.weight), term.operator, index, sign))
    return aux_terms, q


def detect_block_partition(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> BlockPartition:
    """Finest contiguous partition with no Choi entry above ``tol.recon`` between blocks.

    Input index a and output index b are linked whenever Φ(E_ac) or Φ(E_ca)
    has support on row/column b; blocks are closed under those links. Indices
    with no link at all become singleton blocks, and whatever is left on the
    longer side joins the last block.
    """
    require_hermitian(spec, tol)
    m, n = spec.m, spec.n
    rows, cols = np.nonzero(np.abs(spec.choi) > tol.recon)
    a, b = np.divmod(rows, n)
    c, d = np.divmod(cols, n)
    heads = np.concatenate([a, a, c])
    tails = np.concatenate([c, m + b, m + d])
    graph = scipy.sparse.coo_matrix((np.ones(heads.size), (heads, tails)), shape=(m + n, m + n))
    count, component = scipy.sparse.csgraph.connected_components(graph, directed=False)

    sizes = np.bincount(component, minlength=count)
    in_comp, out_comp = component[:m], component[m:]
    in_max = np.full(count, -1)
    out_max = np.full(count, -1)
    np.maximum.at(in_max, in_comp, np.arange(m))
    np.maximum.at(out_max, out_comp, np.arange(n))

    input_sizes: list[int] = []
    output_sizes: list[int] = []
    i0 = o0 = 0
    while i0 < m and o0 < n:
        hi_i, hi_o = i0, o0
        while True:
            touched = np.union1d(in_comp[i0 : hi_i + 1], out_comp[o0 : hi_o + 1])
            touched = touched[sizes[touched] > 1]
            new_i = max(hi_i, int(in_max[touched].max(initial=-1)))
            new_o = max(hi_o, int(out_max[touched].max(initial=-1)))
            if (new_i, new_o) == (hi_i, hi_o):
                break
            hi_i, hi_o = new_i, new_o
        input_sizes.append(hi_i - i0 + 1)
        output_sizes.append(hi_o - o0 + 1)
        i0, o0 = hi_i + 1, hi_o + 1

    input_sizes[-1] += m - i0
    output_sizes[-1] += n - o0
    return BlockPartition(tuple(input_sizes), tuple(output_sizes))
