"""Command-line entry point: learn, predict, evaluate, simulate, serve.

All data goes to files or standard output; diagnostics go to the error
stream. Exit code 0 means success, anything else carries an error message.
JSON outputs are pretty-printed, UTF-8 and newline-terminated.
"""

from __future__ import annotations

import json
import sys

import click

from .clinical import default_schema, ingest, load_schema, to_dataset
from .dbn import fit_dbn, load_spec, predict_trajectory, restrict_timeline, save_spec
from .errors import NidssError
from .evaluation import ConfusionMatrix, evaluate_model, metrics, write_histogram_csv
from .models import default_ground_truth, default_structure
from .synth import CohortConfig, generate_cohort


def _echo_json(data, out=None):
    text = json.dumps(data, indent=2) + "\n"
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


def _load_schema_opt(path):
    return load_schema(path) if path else default_schema()


def _ingest_or_fail(fixed, daily, schema, strict=False):
    records, report = ingest(fixed, daily, schema)
    if report.rows_dropped:
        detail = "; ".join(f"{pid} {fld}: {reason}" for pid, fld, reason in report.corrections[:20])
        if strict:
            raise click.ClickException(
                f"{report.rows_dropped} rows violate the schema: {detail}"
            )
        click.echo(f"dropped {report.rows_dropped} rows during cleaning", err=True)
        for pid, fld, reason in report.corrections[:20]:
            click.echo(f"  {pid} {fld}: {reason}", err=True)
    return records, report


@click.group()
def main():
    """Daily hospital-acquired infection risk: learn, predict, evaluate,
    simulate, serve."""


@main.command()
@click.option("--structure", type=click.Path(exists=True), default=None,
              help="Model structure JSON (default: built-in clinical structure).")
@click.option("--fixed", required=True, type=click.Path(exists=True), help="Fixed-attribute CSV.")
@click.option("--daily", required=True, type=click.Path(exists=True), help="Daily observation CSV.")
@click.option("--alpha", default=1.0, show_default=True, help="Additive smoothing pseudo-count.")
@click.option("--out", required=True, type=click.Path(), help="Output model JSON path.")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None,
              help="Clinical schema JSON (default: built-in).")
def learn(structure, fixed, daily, alpha, out, schema_path):
    """Fit model parameters from a training cohort."""
    try:
        schema = _load_schema_opt(schema_path)
        spec = load_spec(structure) if structure else default_structure(schema)
        records, report = _ingest_or_fail(fixed, daily, schema)
        if not records:
            raise click.ClickException("no usable patient records in the training files")
        data = to_dataset(records, schema)
        fitted, fit_report = fit_dbn(spec, data.static_data.rows, data.slice_rows, alpha)
        save_spec(fitted, out)
        click.echo(f"patients: {len(records)}", err=True)
        click.echo(f"slice rows: {len(data.slice_rows)}", err=True)
        for child, used in sorted(fit_report.rows_used.items()):
            click.echo(f"rows used for {child}: {used}", err=True)
        if fit_report.uniform_rows:
            click.echo(f"uniform-row fallbacks: {len(fit_report.uniform_rows)}", err=True)
            for child, given in fit_report.uniform_rows:
                click.echo(f"  {child} given {given}", err=True)
        click.echo(f"model written to {out}", err=True)
    except NidssError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--model", required=True, type=click.Path(exists=True), help="Fitted model JSON.")
@click.option("--fixed", required=True, type=click.Path(exists=True), help="Fixed-attribute CSV.")
@click.option("--daily", required=True, type=click.Path(exists=True), help="Daily observation CSV.")
@click.option("--out", type=click.Path(), default=None, help="Write the trajectories here instead of stdout.")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
def predict(model, fixed, daily, out, schema_path):
    """Per-day infection probability trajectory for each patient."""
    try:
        schema = _load_schema_opt(schema_path)
        spec = load_spec(model)
        # prediction refuses unclean input: silently ignoring a patient's
        # observations could mislead, unlike bulk training where dropped
        # rows are reported and tolerated
        records, _ = _ingest_or_fail(fixed, daily, schema, strict=True)
        data = to_dataset(records, schema)
        result = []
        for pid, timeline in data.timelines:
            trace = predict_trajectory(spec, restrict_timeline(timeline, spec))
            result.append({"patient_id": pid, "trajectory": trace.as_dicts()})
        _echo_json(result, out)
    except NidssError as exc:
        raise click.ClickException(str(exc)) from exc


def _parse_matrix(text):
    try:
        tn, fp, fn, tp = (int(x) for x in text.split(","))
        return ConfusionMatrix(tn=tn, fp=fp, fn=fn, tp=tp)
    except ValueError as exc:
        raise click.ClickException(f"--matrix expects 'tn,fp,fn,tp', got {text!r}") from exc


@main.command()
@click.option("--model", type=click.Path(exists=True), default=None, help="Fitted model JSON.")
@click.option("--fixed", type=click.Path(exists=True), default=None, help="Test fixed-attribute CSV.")
@click.option("--daily", type=click.Path(exists=True), default=None, help="Test daily observation CSV.")
@click.option("--test", "test_dir", type=click.Path(exists=True, file_okay=False), default=None,
              help="Cohort directory holding fixed.csv and daily.csv (alternative to --fixed/--daily).")
@click.option("--threshold", default=0.5, show_default=True, help="Alarm threshold on the per-day probability.")
@click.option("--horizon", type=click.Choice(["per-stay", "per-day"]), default="per-stay", show_default=True)
@click.option("--matrix", default=None, help="Skip prediction; score a given 'tn,fp,fn,tp' matrix.")
@click.option("--out", type=click.Path(), default=None, help="Write the metrics JSON here instead of stdout.")
@click.option("--histogram", type=click.Path(), default=None,
              help="Also write observed-vs-predicted counts as CSV.")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
def evaluate(model, fixed, daily, test_dir, threshold, horizon, matrix, out, histogram, schema_path):
    """Confusion matrix and metric suite on a test cohort."""
    try:
        if matrix is not None:
            cm = _parse_matrix(matrix)
            report = metrics(cm, threshold=None)
        else:
            if test_dir:
                fixed = fixed or f"{test_dir}/fixed.csv"
                daily = daily or f"{test_dir}/daily.csv"
            if not (model and fixed and daily):
                raise click.ClickException(
                    "provide --model plus --fixed/--daily (or --test DIR), or --matrix"
                )
            schema = _load_schema_opt(schema_path)
            spec = load_spec(model)
            records, _ = _ingest_or_fail(fixed, daily, schema)
            if not records:
                raise click.ClickException("no usable patient records in the test files")
            report, cm, _ = evaluate_model(spec, records, schema, threshold, horizon)
        payload = {"confusion": cm.as_dict(), "metrics": report.as_dict()}
        _echo_json(payload, out)
        click.echo(report.as_text(), err=True)
        if histogram:
            write_histogram_csv(cm, histogram)
    except NidssError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--structure", type=click.Path(exists=True), default=None,
              help="Ground-truth model JSON (default: built-in ground truth).")
@click.option("--patients", required=True, type=int, help="Cohort size.")
@click.option("--seed", required=True, type=int, help="Random seed.")
@click.option("--out", required=True, type=click.Path(), help="Output directory.")
@click.option("--stays", default=None,
              help="Comma-separated stay lengths to draw uniformly (default 3..10).")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
def simulate(structure, patients, seed, out, stays, schema_path):
    """Sample a synthetic cohort from a known model."""
    try:
        schema = _load_schema_opt(schema_path)
        spec = load_spec(structure) if structure else default_ground_truth(schema)
        lengths = tuple(int(x) for x in stays.split(",")) if stays else CohortConfig.__dataclass_fields__["stay_lengths"].default
        cfg = CohortConfig(spec, patients, seed=seed, stay_lengths=lengths, schema=schema)
        _, manifest = generate_cohort(cfg, out_dir=out)
        click.echo(f"wrote {manifest['n_patients']} patients "
                   f"({manifest['n_slices']} slices) to {out}", err=True)
    except NidssError as exc:
        raise click.ClickException(str(exc)) from exc


@main.command()
@click.option("--model", required=True, type=click.Path(exists=True), help="Fitted model JSON.")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--threshold", default=0.5, show_default=True, help="Alarm threshold surfaced to clients.")
@click.option("--db", "db_path", type=click.Path(), default=None,
              help="Session store path (default: sessions.db next to the model).")
@click.option("--ui-dir", type=click.Path(file_okay=False), default=None,
              help="Static UI bundle to serve at / (default: ./frontend/dist when present).")
@click.option("--schema", "schema_path", type=click.Path(exists=True), default=None)
def serve(model, port, host, threshold, db_path, ui_dir, schema_path):
    """Run the decision-support HTTP service until terminated."""
    try:
        import uvicorn

        from .service import create_app

        app = create_app(model, schema_path=schema_path, threshold=threshold,
                         db_path=db_path, ui_dir=ui_dir)
        uvicorn.run(app, host=host, port=port, log_level="warning")
    except NidssError as exc:
        raise click.ClickException(str(exc)) from exc


if __name__ == "__main__":
    main(sys.argv[1:])
