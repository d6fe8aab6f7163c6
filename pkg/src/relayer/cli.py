"""Command-line front end.

Subcommands: validate, reconstruct, check, migrate, experiment,
export-dot. All runs are reproducible: behavior depends only on flags
(seed included), never on environment variables or wall-clock time.

Exit codes
    0  success (validate: no diagnostics; check: no violations;
       migrate: violations reached zero)
    1  validation diagnostics / violations found
    2  unreadable or malformed input, unknown experiment name
    3  migration plateaued above zero violations
    4  architecture does not cover the model's units
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import ArchitectureMismatch, ParseError, ValidationError
from .graph import to_dot, unit_dependency_graph
from .lab import reconstruction_experiment, refactoring_experiment
from .model import load_model, serialize
from .quality import (FitnessConfig, assess_edges, assignment_from_doc,
                      assignment_to_doc, check_covers_model,
                      edge_resolvability, evaluate_quality, report_to_doc)
from .reconstruct import ReconstructionConfig, reconstruct
from .refactor import MigrationConfig, log_to_doc, log_to_table, migrate
from .util import format_table


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, f"error: cannot read {path}: {exc.strerror or exc}")


def _load_model_or_exit(path: str):
    text = _read_text(path)
    try:
        return load_model(text)
    except ParseError as exc:
        _fail(2, f"error: {path}: {exc}")
    except ValidationError as exc:
        for d in exc.diagnostics:
            click.echo(f"{path}: {d}", err=True)
        sys.exit(1)


def _load_architecture_or_exit(path: str, model):
    text = _read_text(path)
    try:
        doc = json.loads(text)
        assignment = assignment_from_doc(doc)
    except (json.JSONDecodeError, ParseError) as exc:
        _fail(2, f"error: {path}: {exc}")
    except (ValueError, Exception) as exc:  # Empty layers etc.
        _fail(2, f"error: {path}: {exc}")
    try:
        check_covers_model(assignment, model)
    except ArchitectureMismatch as exc:
        _fail(4, f"error: {exc}")
    return assignment


def _dump_json(doc) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def _factor_header(cfg) -> str:
    return (f"factors: resolvable={cfg.factor_resolvable:g} "
            f"unresolvable={cfg.factor_unresolvable:g}")


_seed_option = click.option("--seed", type=int, default=0, show_default=True,
                            help="Deterministic run seed.")
_layers_option = click.option("--max-layers", type=int, default=3,
                              show_default=True)
_factor_options = (
    click.option("--factor-resolvable", type=float, default=0.25,
                 show_default=True,
                 help="Coupling factor for resolvable violations."),
    click.option("--factor-unresolvable", type=float, default=2.0,
                 show_default=True,
                 help="Coupling factor for unresolvable violations."),
)


def _add_options(options):
    def wrap(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return wrap


@click.group()
def main():
    """Reconstruct layered architectures and migrate code models."""


@main.command()
@click.argument("model_path", type=click.Path())
def validate(model_path):
    """Check a model document; diagnostics go to stderr."""
    _load_model_or_exit(model_path)


@main.command("reconstruct")
@click.argument("model_path", type=click.Path())
@_seed_option
@_layers_option
@click.option("--restarts", type=int, default=5, show_default=True)
@_add_options(_factor_options)
@click.option("--max-hill-steps", type=int, default=10_000, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "structured", "dot"]),
              default="text", show_default=True)
@click.option("--out-dir", type=click.Path(), default=".", show_default=True,
              help="Where architecture.json and violations.json are written.")
def reconstruct_cmd(model_path, seed, max_layers, restarts, factor_resolvable,
                    factor_unresolvable, max_hill_steps, fmt, out_dir):
    """Reconstruct a layered architecture for a model."""
    model = _load_model_or_exit(model_path)
    config = ReconstructionConfig(
        max_layers=max_layers, restarts=restarts, seed=seed,
        factor_resolvable=factor_resolvable,
        factor_unresolvable=factor_unresolvable,
        max_hill_steps=max_hill_steps)
    result = reconstruct(model, config)

    out = Path(out_dir)
    _write(out / "architecture.json",
           _dump_json(assignment_to_doc(result.architecture)))
    _write(out / "violations.json",
           _dump_json(report_to_doc(result.report, config.fitness())))

    summary = (f"layers={result.architecture.layer_count} "
               f"violations={result.report.violation_count} "
               f"quality={result.quality.value:.5f}")
    if fmt == "structured":
        click.echo(_dump_json({
            "schema_version": 1,
            "factor_resolvable": factor_resolvable,
            "factor_unresolvable": factor_unresolvable,
            "layers": result.architecture.layer_count,
            "violations": result.report.violation_count,
            "quality": result.quality.value,
            "architecture": assignment_to_doc(result.architecture),
        }), nl=False)
    elif fmt == "dot":
        graph = unit_dependency_graph(model)
        click.echo(to_dot(graph, result.report), nl=False)
    else:
        click.echo(_factor_header(config))
        for idx, layer in enumerate(result.architecture.layers, start=1):
            click.echo(f"layer {idx}: {' '.join(layer)}")
        click.echo(summary)


@main.command()
@click.argument("model_path", type=click.Path())
@click.argument("architecture_path", type=click.Path())
@_layers_option
@_add_options(_factor_options)
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]),
              default="text", show_default=True)
def check(model_path, architecture_path, max_layers, factor_resolvable,
          factor_unresolvable, fmt):
    """Report violations of a model against a given architecture."""
    model = _load_model_or_exit(model_path)
    assignment = _load_architecture_or_exit(architecture_path, model)
    config = FitnessConfig(max_layers=max(max_layers, assignment.layer_count),
                           factor_resolvable=factor_resolvable,
                           factor_unresolvable=factor_unresolvable)
    graph = unit_dependency_graph(model)
    report = assess_edges(model, graph, assignment)
    score = evaluate_quality(graph, assignment,
                             edge_resolvability(model, graph), config)
    if fmt == "structured":
        doc = report_to_doc(report, config)
        doc["quality"] = score.value
        click.echo(_dump_json(doc), nl=False)
    else:
        click.echo(_factor_header(config))
        rows = [(a.edge.from_unit, a.edge.to_unit, f"{a.edge.weight:g}",
                 a.from_layer, a.to_layer, a.classification,
                 ",".join(a.transformations) or "-")
                for a in report.edges]
        click.echo(format_table(
            ["From", "To", "Weight", "FromLayer", "ToLayer",
             "Classification", "Transformations"], rows), nl=False)
        click.echo(f"violations={report.violation_count} "
                   f"quality={score.value:.5f}")
    sys.exit(0 if report.violation_count == 0 else 1)


@main.command("migrate")
@click.argument("model_path", type=click.Path())
@click.argument("architecture_path", type=click.Path())
@_layers_option
@_add_options(_factor_options)
@click.option("--max-generations", type=int, default=100, show_default=True)
@click.option("--max-candidates", type=int, default=10_000, show_default=True)
@click.option("--emit-models", type=click.Path(), default=None,
              help="Directory for each generation's chosen model document.")
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]),
              default="text", show_default=True)
@click.option("--out-dir", type=click.Path(), default=".", show_default=True,
              help="Where migrated_model.json and migration_log.json go.")
def migrate_cmd(model_path, architecture_path, max_layers, factor_resolvable,
                factor_unresolvable, max_generations, max_candidates,
                emit_models, fmt, out_dir):
    """Migrate a model toward a given architecture."""
    model = _load_model_or_exit(model_path)
    assignment = _load_architecture_or_exit(architecture_path, model)
    config = MigrationConfig(
        max_generations=max_generations, max_candidates=max_candidates,
        max_layers=max_layers, factor_resolvable=factor_resolvable,
        factor_unresolvable=factor_unresolvable)
    final_model, log = migrate(model, assignment, config)

    out = Path(out_dir)
    _write(out / "migrated_model.json", serialize(final_model))
    _write(out / "migration_log.json", _dump_json(log_to_doc(log, config)))
    if emit_models:
        for entry in log.entries:
            _write(Path(emit_models) / f"generation_{entry.generation:03d}.json",
                   serialize(entry.model))

    if fmt == "structured":
        click.echo(_dump_json(log_to_doc(log, config)), nl=False)
    else:
        click.echo(_factor_header(config))
        click.echo(log_to_table(log), nl=False)
    sys.exit(0 if log.final_violations == 0 else 3)


@main.command()
@click.argument("name")
@_seed_option
@click.option("--format", "fmt", type=click.Choice(["text", "structured"]),
              default="text", show_default=True)
def experiment(name, seed, fmt):
    """Run a canned experiment: 'reconstruction' or 'refactoring'."""
    if name == "reconstruction":
        rows = reconstruction_experiment(seed=seed)
        if fmt == "structured":
            click.echo(_dump_json({
                "schema_version": 1,
                "experiment": "reconstruction",
                "seed": seed,
                "rows": [vars(r) for r in rows],
            }), nl=False)
        else:
            click.echo(format_table(
                ["Injected", "Layers", "Misplaced", "Violations", "Quality"],
                [(r.injected, r.layers, r.misplaced, r.violations,
                  f"{r.quality:.5f}") for r in rows]), nl=False)
    elif name == "refactoring":
        log = refactoring_experiment(seed=seed)
        if fmt == "structured":
            doc = log_to_doc(log)
            doc["experiment"] = "refactoring"
            doc["seed"] = seed
            click.echo(_dump_json(doc), nl=False)
        else:
            click.echo(log_to_table(log), nl=False)
    else:
        _fail(2, f"error: unknown experiment {name!r} "
                 "(expected 'reconstruction' or 'refactoring')")


@main.command("export-dot")
@click.argument("model_path", type=click.Path())
@click.option("--architecture", "architecture_path", type=click.Path(),
              default=None, help="Color violating edges against this layering.")
def export_dot(model_path, architecture_path):
    """Emit the unit dependency graph as DOT (edges labeled w=<weight>)."""
    model = _load_model_or_exit(model_path)
    graph = unit_dependency_graph(model)
    assessment = None
    if architecture_path:
        assignment = _load_architecture_or_exit(architecture_path, model)
        assessment = assess_edges(model, graph, assignment)
    click.echo(to_dot(graph, assessment), nl=False)


if __name__ == "__main__":
    main()
