from __future__ import annotations

import json
from collections.abc import Callable, Iterator, Sequence
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

import numpy as np
import typer
from rich.markup import escape

from .builtins import builtin_registry
from .choi import HermitianMapSpec, apply_via_choi, choi_from_action, is_cp, is_hermitian_preserving
from .config import ToleranceConfig
from .documents import (
    EXAMPLES_FILE,
    MapDocument,
    analysis_report,
    audit_report,
    check_json_formatting,
    extension_report,
    kraus_report,
    load_examples,
    parse_map_document,
    serialize_matrix,
    serialize_spec,
    validate_examples_file,
)
from .errors import ArgumentError, HermapError
from .extend import (
    BlockPartition,
    CpExtension,
    apply_extension,
    block_reduce,
    build_extension,
    contract_auxiliary,
    detect_block_partition,
    extension_map,
    kraus_terms,
    reconstruction_error,
    summed_block_signs,
)
from .jordan import (
    audit_decomposition,
    best_cp_approximation,
    jordan_decompose,
    negative_part_energy,
    trace_shift_decomposition,
)
from .sampling import random_inputs, rng_for
from .tensor import ComplexMatrix, matrix_unit
from .utils import console, data_path

EXIT_USAGE = 1
EXIT_ERROR = 2
EXIT_TOLERANCE = 3

# Ψ's Choi matrix is (mk)(nk) square; beyond this side the CP check is skipped.
PSI_CHECK_MAX_SIDE = 256
EXAMPLE_TOLERANCE = 1e-10

app = typer.Typer(
    add_completion=False,
    help="Analyze Hermitian-preserving maps: Choi matrices, distance to CP maps, CP approximation and CP extensions.",
)


@dataclass(frozen=True)
class Session:
    input_file: Path | None
    tol: float | None
    tol_eig: float | None
    tol_psd: float | None
    tol_recon: float | None
    absolute: bool
    verbose: bool

    def read_document(self) -> MapDocument:
        if self.input_file is None:
            text = typer.get_text_stream("stdin").read()
        else:
            try:
                text = self.input_file.read_text(encoding="utf-8")
            except OSError as exc:
                raise ArgumentError(f"cannot read {self.input_file}: {exc.strerror}") from exc
        return parse_map_document(text)

    def tolerance(self, document: MapDocument) -> ToleranceConfig:
        """Document ``tol`` first, then ``--tol``, then the individual flags."""
        tol = document.tolerance()
        relative = tol.relative and not self.absolute
        if self.tol is not None:
            tol = ToleranceConfig.uniform(self.tol, relative=relative)
        return tol.with_overrides(
            eig_zero=self.tol_eig, psd_slack=self.tol_psd, recon=self.tol_recon, relative=relative
        )

    def load(self) -> tuple[HermitianMapSpec, ToleranceConfig, MapDocument]:
        document = self.read_document()
        return document.spec, self.tolerance(document), document


@contextmanager
def reported_errors() -> Iterator[None]:
    try:
        yield
    except HermapError as exc:
        console.print(f"[red]ERROR[/red]   {escape(str(exc))}")
        raise typer.Exit(EXIT_ERROR) from exc


def emit(report: dict[str, Any]) -> None:
    typer.echo(json.dumps(report))


def status(ok: bool, text: str) -> None:
    if ok:
        console.print(f"[green]OK[/green]      {escape(text)}")
    else:
        console.print(f"[red]FAIL[/red]    {escape(text)}")


def session_of(ctx: typer.Context) -> Session:
    return ctx.obj


@app.callback(invoke_without_command=True)
def callback(
    ctx: typer.Context,
    input_file: Path | None = typer.Option(
        None, "--input", "-i", dir_okay=False, help="Map document (JSON); standard input when omitted."
    ),
    tol: float | None = typer.Option(None, "--tol", min=0.0, help="Set all three tolerances."),
    tol_eig: float | None = typer.Option(None, "--tol-eig", min=0.0, help="Eigenvalue zero threshold."),
    tol_psd: float | None = typer.Option(None, "--tol-psd", min=0.0, help="PSD slack."),
    tol_recon: float | None = typer.Option(None, "--tol-recon", min=0.0, help="Absolute reconstruction tolerance."),
    absolute: bool = typer.Option(
        False, "--absolute", help="Use eig_zero and psd_slack as absolute thresholds, unscaled by the matrix norm."
    ),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Print checks to stderr."),
) -> None:
    ctx.obj = Session(input_file, tol, tol_eig, tol_psd, tol_recon, absolute, verbose)
    if ctx.invoked_subcommand:
        return
    typer.echo(ctx.get_help())


@app.command()
def choi(ctx: typer.Context) -> None:
    """Print the Choi matrix of the map."""
    with reported_errors():
        spec, tol, _ = session_of(ctx).load()
        hermitian, asymmetry = is_hermitian_preserving(spec, tol)
        emit({**serialize_spec(spec), "is_hermitian": hermitian, "max_asymmetry": asymmetry})


@app.command()
def analyze(ctx: typer.Context) -> None:
    """Spectrum, distance to the CP cone, multiplicity and the √k·d_CP bound."""
    session = session_of(ctx)
    with reported_errors():
        spec, tol, _ = session.load()
        report = analysis_report(spec, tol)
    if session.verbose:
        console.rule("[bold]Analysis[/bold]", align="left", style="dim")
        status(report.is_hermitian, "Hermitian-preserving")
        status(report.is_cp, f"completely positive (lambda_min {report.lambda_min:.6g})")
        console.print()
    emit(asdict(report))


@app.command()
def jordan(ctx: typer.Context) -> None:
    """Jordan decomposition C = c_plus - c_minus."""
    with reported_errors():
        spec, tol, _ = session_of(ctx).load()
        parts = jordan_decompose(spec, tol)
    emit(
        {
            "c_plus": serialize_matrix(parts.c_plus),
            "c_minus": serialize_matrix(parts.c_minus),
            "eigenvalues": [float(v) for v in parts.eigenvalues],
            "dcp": parts.dcp,
            "multiplicity_k": parts.multiplicity_k,
            "bound": parts.bound,
            "hs_plus": parts.hs_plus,
            "hs_minus": parts.hs_minus,
            "negative_energy": negative_part_energy(parts),
        }
    )


@app.command()
def approx(ctx: typer.Context) -> None:
    """Best CP approximation in Hilbert-Schmidt norm."""
    with reported_errors():
        spec, tol, _ = session_of(ctx).load()
        approximation, distance = best_cp_approximation(spec, tol)
    emit({"approximation": serialize_spec(approximation), "distance": distance})


@app.command()
def kraus(ctx: typer.Context) -> None:
    """Weighted Kraus terms from the eigendecomposition of the Choi matrix."""
    with reported_errors():
        spec, tol, _ = session_of(ctx).load()
        terms = kraus_terms(spec, tol)
    emit(kraus_report(terms))


def psi_check(ext: CpExtension, tol: ToleranceConfig) -> tuple[bool | None, float | None]:
    """CP check of Ψ through its Choi matrix; ``(None, None)`` when Ψ is too large."""
    if ext.m * ext.n * ext.k * ext.k > PSI_CHECK_MAX_SIDE:
        return None, None
    return is_cp(choi_from_action(extension_map(ext), tol), tol)


@app.command()
def extend(
    ctx: typer.Context,
    check_psi: bool = typer.Option(False, "--check-psi", help="Also check that Ψ is CP via its Choi matrix."),
) -> None:
    """CP extension with k = rank(C) and Q = diag(signs of the eigenvalues)."""
    session = session_of(ctx)
    with reported_errors():
        spec, tol, _ = session.load()
        ext = build_extension(spec, tol)
        report = extension_report(ext)
        if check_psi:
            report["psi_is_cp"], report["psi_lambda_min"] = psi_check(ext, tol)
    emit(report)


def resolve_partition(
    spec: HermitianMapSpec, partition: str | None, tol: ToleranceConfig
) -> tuple[BlockPartition, bool]:
    if partition is None or partition == "auto":
        return detect_block_partition(spec, tol), True
    return BlockPartition.parse(partition), False


def basis_error(spec: HermitianMapSpec, apply: Callable[[ComplexMatrix], ComplexMatrix]) -> float:
    """Max-entry error of ``apply`` against the Choi action over every matrix unit."""
    worst = 0.0
    for i in range(1, spec.m + 1):
        for j in range(1, spec.m + 1):
            unit = matrix_unit(spec.m, i, j)
            worst = max(worst, float(np.max(np.abs(apply(unit) - apply_via_choi(spec, unit)))))
    return worst


@app.command()
def reduce(
    ctx: typer.Context,
    partition: str | None = typer.Option(
        None, "--partition", "-p", help="Block sizes 'm1,m2/n1,n2'; detected from the Choi matrix when omitted."
    ),
) -> None:
    """CP extension sharing the auxiliary space across the diagonal blocks of C."""
    session = session_of(ctx)
    with reported_errors():
        spec, tol, _ = session.load()
        blocks, detected = resolve_partition(spec, partition, tol)
        ext = block_reduce(spec, blocks, tol)
        summed_terms, summed_q = summed_block_signs(spec, blocks, tol)
        k = summed_q.shape[0]
        report = extension_report(ext)
        report.update(
            partition=str(blocks),
            detected=detected,
            max_error=basis_error(spec, lambda x: apply_extension(ext, x, literal=True)),
            summed_q_diag=[int(v) for v in np.diag(summed_q).real],
            summed_max_error=basis_error(
                spec, lambda x: contract_auxiliary(summed_terms, summed_q, x, spec.m, spec.n, k)
            ),
        )
    if session.verbose:
        console.rule("[bold]Block reduction[/bold]", align="left", style="dim")
        status(report["max_error"] <= tol.recon, f"reduced extension, k = {ext.k}")
        status(report["summed_max_error"] <= tol.recon, f"summed block signs, k = {k}")
        console.print()
    emit(report)


@app.command()
def audit(
    ctx: typer.Context,
    trace_shift: float | None = typer.Option(
        None, "--trace-shift", help="Audit C = (C + sI) - sI instead of the document's decomposition."
    ),
) -> None:
    """Check a decomposition C = c1 - c2 against the √k·d_CP bound."""
    session = session_of(ctx)
    with reported_errors():
        spec, tol, document = session.load()
        if trace_shift is not None:
            c1, c2 = trace_shift_decomposition(spec, trace_shift)
            source = "trace-shift"
        elif document.decomposition is not None:
            c1, c2 = document.decomposition
            source = "document"
        else:
            parts = jordan_decompose(spec, tol)
            c1, c2 = parts.c_plus, parts.c_minus
            source = "jordan"
        result = audit_decomposition(spec, c1, c2, tol)
    if session.verbose:
        console.rule(f"[bold]Audit ({source})[/bold]", align="left", style="dim")
        status(result.valid, "c1, c2 PSD with c1 - c2 = C")
        status(result.satisfied, f"hs_norm(c2) = {result.hs_c2:.6g} >= bound {result.bound:.6g}")
        for reason in result.reasons:
            console.print(f"        [yellow]note:[/yellow] [dim]{escape(reason)}[/dim]")
        console.print()
    emit(audit_report(result, source))


@app.command()
def verify(
    ctx: typer.Context,
    samples: int = typer.Option(100, "--samples", "-n", min=1, help="Number of random inputs."),
    seed: int = typer.Option(0, "--seed", help="Seed for the random inputs."),
    partition: str | None = typer.Option(
        None, "--partition", "-p", help="Verify the block-reduced extension ('m1,m2/n1,n2' or 'auto')."
    ),
) -> None:
    """Check the extension against the Choi action on seeded random inputs."""
    session = session_of(ctx)
    with reported_errors():
        spec, tol, _ = session.load()
        if partition is None:
            ext = build_extension(spec, tol)
        else:
            blocks, _ = resolve_partition(spec, partition, tol)
            ext = block_reduce(spec, blocks, tol)
        inputs = random_inputs(rng_for(seed), spec.m, samples)
        fast = reconstruction_error(spec, ext, inputs)
        literal = reconstruction_error(spec, ext, inputs, literal=True)
        psi_cp, psi_lambda_min = psi_check(ext, tol)

    passed = fast <= tol.recon and literal <= tol.recon and psi_cp is not False
    if session.verbose or not passed:
        console.rule("[bold]Extension reconstruction[/bold]", align="left", style="dim")
        status(fast <= tol.recon, f"sum form, max error {fast:.3e} over {samples} inputs")
        status(literal <= tol.recon, f"partial-trace form, max error {literal:.3e}")
        if psi_cp is not None:
            status(psi_cp, f"Psi completely positive (lambda_min {psi_lambda_min:.6g})")
        console.print()
    emit(
        {
            "samples": samples,
            "seed": seed,
            "k": ext.k,
            "max_error": fast,
            "literal_max_error": literal,
            "tolerance": tol.recon,
            "psi_is_cp": psi_cp,
            "passed": passed,
        }
    )
    if not passed:
        raise typer.Exit(EXIT_TOLERANCE)


@app.command("list")
def list_builtins() -> None:
    """List the builtin maps a document can name."""
    emit({"builtins": [{"name": b.name, "description": b.description} for b in builtin_registry()]})


def _matches(expected: Any, actual: Any) -> bool:
    if isinstance(expected, list):
        return (
            isinstance(actual, list)
            and len(actual) == len(expected)
            and all(_matches(e, a) for e, a in zip(expected, actual))
        )
    if expected is None or isinstance(expected, (bool, str)) or isinstance(actual, bool):
        return expected == actual
    return actual is not None and abs(float(expected) - float(actual)) <= EXAMPLE_TOLERANCE


def example_figures(example: dict[str, Any], tol: ToleranceConfig | None = None) -> dict[str, Any]:
    """Compute every figure named in ``example["expect"]``."""
    expect = example["expect"]
    document = parse_map_document(json.dumps(example["document"]))
    spec = document.spec
    tol = tol or document.tolerance()

    figures: dict[str, Any] = asdict(analysis_report(spec, tol))
    if {"extension_k", "q_diag"} & expect.keys():
        ext = build_extension(spec, tol)
        figures.update(extension_k=ext.k, q_diag=ext.q_diag)
    block_keys = {"partition", "reduced_k", "reduced_q_diag", "block_ranks", "claimed_k", "summed_q_diag"}
    if block_keys & expect.keys():
        blocks = detect_block_partition(spec, tol)
        reduced = block_reduce(spec, blocks, tol)
        _, summed_q = summed_block_signs(spec, blocks, tol)
        figures.update(
            partition=str(blocks),
            reduced_k=reduced.k,
            reduced_q_diag=reduced.q_diag,
            block_ranks=list(reduced.block_ranks),
            claimed_k=reduced.claimed_k,
            summed_q_diag=[int(v) for v in np.diag(summed_q).real],
        )
    return {key: figures[key] for key in expect}


@app.command()
def examples(
    ctx: typer.Context,
    file: Path | None = typer.Option(None, "--file", dir_okay=False, help=f"Examples file (default scripts/{EXAMPLES_FILE})."),
) -> None:
    """Recompute the worked examples and compare them with their expected figures."""
    path = file or data_path(EXAMPLES_FILE)
    ok = fail = 0
    results: list[dict[str, Any]] = []

    console.rule("[bold]Examples file[/bold]", align="left", style="dim")
    errors = validate_examples_file(path)
    for err in errors:
        status(False, err)
    if errors:
        emit({"passed": 0, "failed": len(errors), "examples": []})
        raise typer.Exit(EXIT_TOLERANCE)
    if check_json_formatting(path):
        status(True, f"{path.name} formatted")
        ok += 1
    else:
        status(False, f"{path.name} not formatted (run: python3 -m json.tool --indent 2)")
        fail += 1
    console.print()

    for example in load_examples(path):
        name = example["name"]
        console.rule(f"[bold]{escape(name)}[/bold]", align="left", style="dim")
        failures: list[str] = []
        try:
            figures = example_figures(example)
        except HermapError as exc:
            failures.append(str(exc))
            status(False, str(exc))
        else:
            for key, expected in example["expect"].items():
                actual = figures[key]
                if _matches(expected, actual):
                    status(True, f"{key} = {actual}")
                else:
                    status(False, f"{key} = {actual}, expected {expected}")
                    failures.append(f"{key}: expected {expected}, got {actual}")
        if failures:
            fail += 1
        else:
            ok += 1
        results.append({"name": name, "failures": failures})
        console.print()

    console.rule("[bold]Summary[/bold]", align="left", style="dim")
    console.print(f"[green]{ok} passed[/green], [red]{fail} failed[/red]")
    emit({"passed": ok, "failed": fail, "examples": results})
    if fail:
        raise typer.Exit(EXIT_TOLERANCE)


def _click_error_class() -> type[Exception]:
    """ClickException of the click build typer runs on (its own copy in newer releases)."""
    return next(cls for cls in typer.BadParameter.__mro__ if cls.__name__ == "ClickException")


ClickError = _click_error_class()


def main(argv: Sequence[str] | None = None) -> int:
    """Run the app and return its exit code; usage errors map to 1."""
    try:
        result = app(args=list(argv) if argv is not None else None, prog_name="hermap", standalone_mode=False)
    except typer.Abort:
        return EXIT_USAGE
    except ClickError as exc:
        exc.show()  # pyright: ignore[reportAttributeAccessIssue]
        return EXIT_USAGE
    return result if isinstance(result, int) else 0
