"""Named maps from the worked examples, addressable from map documents."""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass

import numpy as np

from .choi import HermitianMapSpec, MapAction, choi_from_action, spec_from_choi
from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import ArgumentError
from .tensor import ComplexMatrix

type Param = int | float | str


@dataclass(frozen=True)
class Builtin:
    name: str
    description: str
    build: Callable[..., HermitianMapSpec]


def _from_action(d_in: int, d_out: int, fn: Callable[[ComplexMatrix], ComplexMatrix]) -> HermitianMapSpec:
    return choi_from_action(MapAction.from_callable(d_in, d_out, fn))


def _dimension(d: int) -> int:
    if isinstance(d, bool) or not isinstance(d, int) or d < 1:
        raise ArgumentError(f"dimension d must be a positive integer, got {d!r}")
    return d


def transpose(d: int = 2) -> HermitianMapSpec:
    return _from_action(_dimension(d), d, lambda x: x.T)


def highmult(variant: str = "displayed") -> HermitianMapSpec:
    """The map of the higher-multiplicity example on M_2.

    The formula, the displayed Choi matrix and the stated spectrum of this example
    describe three different maps, so each is available as a variant:

    - ``displayed``: Choi [[2,0,0,0],[0,0,-1,0],[0,-1,0,0],[0,0,0,2]],
      spectrum (2, 2, 1, -1);
    - ``spectral``: A ↦ diag(2a₁₁ − a₂₂, 2a₂₂ − a₁₁), spectrum (2, 2, -1, -1);
    - ``formula``: A ↦ [[a₁₁+a₂₂, −a₁₂], [−a₂₁, a₁₁+a₂₂]], spectrum (2, 1, 1, 0).
    """
    if variant == "displayed":
        choi = np.array([[2, 0, 0, 0], [0, 0, -1, 0], [0, -1, 0, 0], [0, 0, 0, 2]], dtype=np.complex128)
        return spec_from_choi(choi, 2, 2)
    if variant == "spectral":
        return _from_action(
            2, 2, lambda a: np.diag([2 * a[0, 0] - a[1, 1], 2 * a[1, 1] - a[0, 0]]).astype(np.complex128)
        )
    if variant == "formula":
        return _from_action(
            2,
            2,
            lambda a: np.array(
                [[a[0, 0] + a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0] + a[1, 1]]], dtype=np.complex128
            ),
        )
    raise ArgumentError(f"unknown highmult variant {variant!r} (expected displayed, spectral or formula)")


def scaled_trace(k: float = -1.0, d: int = 2) -> HermitianMapSpec:
    """A ↦ k·tr(A)·I_d."""
    if isinstance(k, bool) or not isinstance(k, (int, float)):
        raise ArgumentError(f"scale k must be a number, got {k!r}")
    d = _dimension(d)
    return _from_action(d, d, lambda a: k * np.trace(a) * np.eye(d, dtype=np.complex128))


def trace(d: int = 2) -> HermitianMapSpec:
    """A ↦ tr(A)·I_d; its Choi matrix is the identity."""
    return scaled_trace(1.0, d)


def hermitize(d: int = 2) -> HermitianMapSpec:
    """X ↦ X + X*."""
    return _from_action(_dimension(d), d, lambda x: x + x.conj().T)


def antihermitize(d: int = 2) -> HermitianMapSpec:
    """X ↦ X − X*."""
    return _from_action(_dimension(d), d, lambda x: x - x.conj().T)


def offdiag_transpose(d: int = 2) -> HermitianMapSpec:
    """X ↦ Xᵀ with the diagonal removed; rank 2 with eigenvalues ±1 on M_2."""
    d = _dimension(d)
    return _from_action(d, d, lambda x: x.T - np.diag(np.diag(x)))


def direct_sum(*specs: HermitianMapSpec) -> HermitianMapSpec:
    """Φ(X) = ⊕ Φᵢ(Xᵢ) where Xᵢ are the diagonal blocks of X; off-diagonal blocks are dropped."""
    m = sum(spec.m for spec in specs)
    n = sum(spec.n for spec in specs)
    images = np.zeros((m, m, n, n), dtype=np.complex128)
    in_off = out_off = 0
    for spec in specs:
        # Choi entry ((i, k), (j, l)) of a block is Φᵢ(E_ij)[k, l].
        block = spec.choi.reshape(spec.m, spec.n, spec.m, spec.n).transpose(0, 2, 1, 3)
        images[
            in_off : in_off + spec.m, in_off : in_off + spec.m, out_off : out_off + spec.n, out_off : out_off + spec.n
        ] = block
        in_off += spec.m
        out_off += spec.n
    return choi_from_action(MapAction(m, n, images))


BLOCK_SECONDS: Mapping[str, Callable[[], HermitianMapSpec]] = {
    "offdiag_transpose": offdiag_transpose,
    "antihermitize": antihermitize,
}


def block_example(second: str = "offdiag_transpose") -> HermitianMapSpec:
    """hermitize(2) ⊕ ``second`` on M_4.

    The default second block is the rank-2 map with the eigenpairs listed for
    the block example; ``antihermitize`` is X − X* itself, whose Choi matrix
    has rank 4.
    """
    if second not in BLOCK_SECONDS:
        raise ArgumentError(f"unknown second block {second!r} (expected one of {', '.join(BLOCK_SECONDS)})")
    return direct_sum(hermitize(2), BLOCK_SECONDS[second]())


BUILTINS: dict[str, Builtin] = {
    builtin.name: builtin
    for builtin in (
        Builtin("transpose", "A -> A^T on M_d (params: d)", transpose),
        Builtin("highmult", "higher-multiplicity example on M_2 (params: variant)", highmult),
        Builtin("scaled_trace", "A -> k tr(A) I_d (params: k, d)", scaled_trace),
        Builtin("trace", "A -> tr(A) I_d (params: d)", trace),
        Builtin("hermitize", "X -> X + X* on M_d (params: d)", hermitize),
        Builtin("antihermitize", "X -> X - X* on M_d (params: d)", antihermitize),
        Builtin("offdiag_transpose", "X -> X^T without its diagonal (params: d)", offdiag_transpose),
        Builtin("block_example", "hermitize(2) (+) second block on M_4 (params: second)", block_example),
    )
}


def builtin_registry() -> list[Builtin]:
    return list(BUILTINS.values())


def build_builtin(
    name: str, params: Mapping[str, Param] | None = None, tol: ToleranceConfig = DEFAULT_TOLERANCE
) -> HermitianMapSpec:
    builtin = BUILTINS.get(name)
    if builtin is None:
        raise ArgumentError(f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTINS))}")
    try:
        spec = builtin.build(**dict(params or {}))
    except TypeError as exc:
        raise ArgumentError(f"bad parameters for builtin {name!r}: {exc}") from exc
    return spec_from_choi(spec.choi, spec.m, spec.n, tol)
