"""JSON interchange: map documents in, reports out, and the worked-examples file."""

from __future__ import annotations

import json
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from functools import cache
from pathlib import Path
from typing import Any

import jsonschema.exceptions
import jsonschema.validators
import numpy as np

from .builtins import BUILTINS, build_builtin
from .choi import HermitianMapSpec, is_hermitian_preserving, require_hermitian, spec_from_choi
from .config import DEFAULT_TOLERANCE, ToleranceConfig
from .errors import ArgumentError, DocumentError
from .extend import CpExtension, KrausTerm
from .jordan import DecompositionAudit, jordan_from_spectrum
from .tensor import ComplexMatrix, hermitian_eig, hs_norm
from .utils import data_path

MAP_SCHEMA = "map-document.schema.json"
EXAMPLES_FILE = "worked-examples.json"
EXAMPLES_SCHEMA = "worked-examples.schema.json"

type Json = dict[str, Any]


@dataclass(frozen=True, eq=False)
class MapDocument:
    spec: HermitianMapSpec
    tol_overrides: dict[str, float] = field(default_factory=dict)
    decomposition: tuple[ComplexMatrix, ComplexMatrix] | None = None
    relative: bool | None = None

    def tolerance(self, base: ToleranceConfig = DEFAULT_TOLERANCE) -> ToleranceConfig:
        return base.with_overrides(**self.tol_overrides, relative=self.relative)


@dataclass(frozen=True)
class AnalysisReport:
    eigenvalues: list[float]
    dcp: float
    multiplicity_k: int | None
    bound: float
    hs_norm: float
    hs_minus: float
    is_cp: bool
    is_hermitian: bool
    max_asymmetry: float
    lambda_min: float
    rank: int


@cache
def load_schema(name: str) -> Json:
    with open(data_path(name), encoding="utf-8") as f:
        return json.load(f)


def schema_errors(data: object, schema: Json) -> list[jsonschema.exceptions.ValidationError]:
    validator_cls = jsonschema.validators.validator_for(schema)
    return sorted(validator_cls(schema).iter_errors(data), key=lambda e: e.json_path)


def validate_document(data: object, schema_name: str = MAP_SCHEMA) -> None:
    """Raise DocumentError at the JSON path of the most relevant schema violation."""
    error = jsonschema.exceptions.best_match(schema_errors(data, load_schema(schema_name)))
    if error is not None:
        raise DocumentError(error.message, error.json_path)


def _parse_matrix(obj: Mapping[str, Any], path: str) -> ComplexMatrix:
    try:
        re = np.asarray(obj["re"], dtype=np.float64)
        im = np.asarray(obj["im"], dtype=np.float64)
    except ValueError as exc:
        raise DocumentError(f"rows must all have the same length ({exc})", path) from exc
    if re.shape != im.shape:
        raise DocumentError(f"re has shape {re.shape} but im has shape {im.shape}", path)
    return re + 1j * im


def parse_map_document(text: str, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> MapDocument:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    validate_document(data)

    m, n = data["m"], data["n"]
    tol_section = dict(data.get("tol", {}))
    relative: bool | None = tol_section.pop("relative", None)
    overrides: dict[str, float] = {key: float(value) for key, value in tol_section.items()}
    effective = tol.with_overrides(**overrides, relative=relative)

    if "choi" in data:
        choi = _parse_matrix(data["choi"], "$.choi")
        side = m * n
        if choi.shape != (side, side):
            raise DocumentError(
                f"Choi matrix must be {side}x{side} for m={m}, n={n}, got {choi.shape[0]}x{choi.shape[1]}",
                "$.choi",
            )
        spec = spec_from_choi(choi, m, n, effective)
    else:
        params = dict(data["builtin"])
        name = params.pop("name")
        spec = build_builtin(name, params, effective)
        if (spec.m, spec.n) != (m, n):
            raise DocumentError(
                f"builtin {name!r} maps M_{spec.m} -> M_{spec.n}, document says m={m}, n={n}", "$.builtin"
            )

    decomposition = None
    if "decomposition" in data:
        parts = data["decomposition"]
        decomposition = (
            _parse_matrix(parts["c1"], "$.decomposition.c1"),
            _parse_matrix(parts["c2"], "$.decomposition.c2"),
        )
    return MapDocument(spec, overrides, decomposition, relative)


def serialize_matrix(matrix: ComplexMatrix) -> Json:
    mat = np.asarray(matrix, dtype=np.complex128)
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def serialize_spec(spec: HermitianMapSpec) -> Json:
    return {"m": spec.m, "n": spec.n, "choi": serialize_matrix(spec.choi)}


def analysis_report(spec: HermitianMapSpec, tol: ToleranceConfig = DEFAULT_TOLERANCE) -> AnalysisReport:
    """One eigendecomposition of C_Φ feeds every figure; non-Hermitian maps raise DomainError."""
    hermitian, asymmetry = is_hermitian_preserving(spec, tol)
    require_hermitian(spec, tol)
    parts = jordan_from_spectrum(hermitian_eig(spec.choi, tol), tol)
    return AnalysisReport(
        eigenvalues=[float(v) for v in parts.eigenvalues],
        dcp=parts.dcp,
        multiplicity_k=parts.multiplicity_k,
        bound=parts.bound,
        hs_norm=hs_norm(spec.choi),
        hs_minus=parts.hs_minus,
        is_cp=parts.is_cp,
        is_hermitian=hermitian,
        max_asymmetry=asymmetry,
        lambda_min=parts.lambda_min,
        rank=parts.rank,
    )


def kraus_report(terms: list[KrausTerm]) -> Json:
    return {
        "rank": len(terms),
        "terms": [{"weight": term.weight, "operator": serialize_matrix(term.operator)} for term in terms],
    }


def extension_report(ext: CpExtension) -> Json:
    report: Json = {
        "m": ext.m,
        "n": ext.n,
        "k": ext.k,
        "q_diag": ext.q_diag,
        "terms": [
            {
                "magnitude": term.magnitude,
                "sign": term.sign,
                "aux_index": term.aux_index,
                "operator": serialize_matrix(term.operator),
            }
            for term in ext.terms
        ],
    }
    if ext.claimed_k is not None:
        report["claimed_k"] = ext.claimed_k
        report["block_ranks"] = list(ext.block_ranks)
    return report


def audit_report(audit: DecompositionAudit, source: str) -> Json:
    return {
        "source": source,
        "valid": audit.valid,
        "reasons": audit.reasons,
        "hs_c2": audit.hs_c2,
        "bound": audit.bound,
        "satisfied": audit.satisfied,
        "gap": audit.gap,
        "difference_error": audit.difference_error,
        "lowner_minimal": audit.lowner_minimal,
    }


def validate_json_file(
    json_path: Path,
    schema_path: Path,
    *,
    extra_validator: Callable[[list[Any], list[str]], None] | None = None,
    array_key: str | None = None,
) -> list[str]:
    """Every schema violation in ``json_path`` as ``"<json path>: <message>"``."""
    try:
        with open(json_path, encoding="utf-8") as f:
            data = json.load(f)
    except (json.JSONDecodeError, OSError) as exc:
        return [f"cannot load {json_path.name}: {exc}"]

    try:
        with open(schema_path, encoding="utf-8") as f:
            schema = json.load(f)
    except (json.JSONDecodeError, OSError) as exc:
        return [f"cannot load schema: {exc}"]

    errors = [f"{error.json_path}: {error.message}" for error in schema_errors(data, schema)]

    if extra_validator and array_key and isinstance(data, dict):
        items = data.get(array_key)
        if isinstance(items, list):
            extra_validator(items, errors)

    return errors


def validate_examples_file(path: Path | None = None) -> list[str]:
    def _extra_validator(items: list[Any], errors: list[str]) -> None:
        seen: dict[str, int] = {}
        for i, item in enumerate(items):
            if not isinstance(item, dict):
                continue
            name = item.get("name", "")
            if name in seen:
                errors.append(f"examples[{i}]: duplicate name '{name}' (first at examples[{seen[name]}])")
            else:
                seen[name] = i

            document = item.get("document")
            try:
                validate_document(document)
            except DocumentError as exc:
                errors.append(f"examples[{i}].document: {exc}")
                continue
            builtin = document.get("builtin", {}).get("name")
            if builtin is not None and builtin not in BUILTINS:
                errors.append(f"examples[{i}].document: unknown builtin '{builtin}'")

    return validate_json_file(
        path or data_path(EXAMPLES_FILE),
        data_path(EXAMPLES_SCHEMA),
        array_key="examples",
        extra_validator=_extra_validator,
    )


def load_examples(path: Path | None = None) -> list[Json]:
    errors = validate_examples_file(path)
    if errors:
        raise ArgumentError(f"{EXAMPLES_FILE} is invalid: " + "; ".join(errors))
    with open(path or data_path(EXAMPLES_FILE), encoding="utf-8") as f:
        return json.load(f)["examples"]


def check_json_formatting(file_path: Path) -> bool:
    with open(file_path, encoding="utf-8") as f:
        raw = f.read()
    data = json.loads(raw)
    expected = json.dumps(data, indent=2) + "\n"
    return raw == expected
