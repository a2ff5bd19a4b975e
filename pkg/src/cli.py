"""heartprint command line.

Exit codes: 0 success, 1 usage or configuration error, 2 data error. Logs go to
standard error; data goes to files or standard output.
"""

from collections.abc import Sequence
from pathlib import Path
from typing import Annotated, Any

import click
import pandas as pd
import structlog
import typer
from pydantic import ValidationError

from src.classifiers.registry import make_spec, parse_method_names, parse_param_overrides
from src.experiments.protocols import (
    HALF_HOUR_S,
    ProtocolOptions,
    drug_protocol,
    evaluate_datasets,
    holter_drift,
    lead_sweep,
)
from src.experiments.report import ExperimentReport, ReportFormat
from src.experiments.splits import Scheme
from src.experiments.synth import SynthConfig, synth_database
from src.ingest.base import RecordSource
from src.ingest.csv_records import load_csv
from src.ingest.database import open_database
from src.ingest.wfdb import load_record
from src.processing.beat_detect import DetectorConfig, detect_r_peaks
from src.processing.features import fragment_stream, read_dataset, write_dataset
from src.processing.pipeline import PipelineConfig, extract_beat_track
from src.utils.config import Settings, configure_logging, get_settings
from src.utils.exceptions import (
    ClassifierError,
    ConfigurationError,
    EmptyDataset,
    ExperimentError,
    FeatureError,
    InvalidHyperparameter,
    RecordError,
    SignalError,
    StatsError,
)
from src.utils.models import Dataset, FeatureVector, FragmentSource, SignalRecord

logger = structlog.get_logger()

DATA_ERRORS = (RecordError, SignalError, FeatureError, ExperimentError, ClassifierError, StatsError)

REPORT_STEMS = {
    Scheme.LEAD_SWEEP: "lead_sweep",
    Scheme.HOLTER_DRIFT: "holter_drift",
    Scheme.DRUG_EFFECT: "drug",
    Scheme.EVAL: "eval",
}

app = typer.Typer(
    name="heartprint",
    help="ECG subject identification: ingestion, features, classifiers and experiments.",
    no_args_is_help=True,
    add_completion=False,
)
experiment_app = typer.Typer(help="Run an evaluation protocol.", no_args_is_help=True)
app.add_typer(experiment_app, name="experiment")

# ─────────────────────────────────────────────────────────────────
# Shared options
# ─────────────────────────────────────────────────────────────────

DbOption = Annotated[
    Path | None, typer.Option("--db", help="Database directory (default: DATABASE_ROOT)")
]
MethodsOption = Annotated[
    str, typer.Option("--methods", help="Comma-separated method names, or 'all'")
]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Master seed")]
OutOption = Annotated[Path, typer.Option("--out", help="Output directory")]
JobsOption = Annotated[
    int | None, typer.Option("--jobs", min=1, help="Worker threads (default: all cores)")
]
FormatOption = Annotated[str, typer.Option("--format", help="csv or markdown")]
StandardizeOption = Annotated[
    bool | None,
    typer.Option("--standardize/--no-standardize", help="Z-score features on the training set"),
]
ParamOption = Annotated[
    list[str] | None, typer.Option("--param", help="Hyperparameter override METHOD.KEY=VALUE")
]
CsvFsOption = Annotated[
    float | None, typer.Option("--csv-fs", help="Read CSV records at this sampling rate (Hz)")
]
LeadOption = Annotated[
    str | None, typer.Option("--lead", help="Lead name (default: first channel)")
]


def _settings(ctx: typer.Context) -> Settings:
    cfg = ctx.obj
    if not isinstance(cfg, Settings):
        raise ConfigurationError("settings were not initialised")
    return cfg


def _format(value: str) -> ReportFormat:
    if value not in ("csv", "markdown"):
        raise click.BadParameter(f"expected csv or markdown, got '{value}'", param_hint="--format")
    return "csv" if value == "csv" else "markdown"


def _source(cfg: Settings, db: Path | None, csv_fs: float | None) -> RecordSource:
    root = db if db is not None else cfg.require_database_root()
    if not root.is_dir():
        raise ConfigurationError(f"database directory not found: {root}")
    return open_database(root, csv_fs)


def _options(
    cfg: Settings,
    methods: str,
    seed: int | None,
    jobs: int | None,
    standardize: bool | None,
    params: list[str] | None,
    dataset: str = "",
) -> ProtocolOptions:
    values: dict[str, Any] = {
        "methods": tuple(parse_method_names(methods)),
        "overrides": parse_param_overrides(params or []),
        "dataset": dataset,
    }
    if seed is not None:
        values["seed"] = seed
    if jobs is not None:
        values["jobs"] = jobs
    if standardize is not None:
        values["standardize"] = standardize
    for method in values["overrides"]:
        try:
            make_spec(method, values["overrides"])
        except InvalidHyperparameter as e:
            raise click.BadParameter(str(e), param_hint="--param") from e
    return ProtocolOptions.from_settings(cfg, **values)


def _write(report: ExperimentReport, out: Path, fmt: str) -> None:
    for path in report.write_all(out, REPORT_STEMS[report.scheme], _format(fmt)):
        typer.echo(str(path))


def _load_any(path: Path, csv_fs: float | None) -> SignalRecord:
    if path.suffix.lower() == ".csv":
        if csv_fs is None:
            raise click.BadParameter("CSV records need --csv-fs", param_hint="--csv-fs")
        return load_csv(path, csv_fs)
    return load_record(path)


@app.callback()
def _main(ctx: typer.Context) -> None:
    """Load settings and route logs to standard error."""
    cfg = get_settings()
    configure_logging(cfg)
    ctx.obj = cfg


# ─────────────────────────────────────────────────────────────────
# Records and features
# ─────────────────────────────────────────────────────────────────


@app.command()
def inspect(
    record: Annotated[Path, typer.Argument(help="Record base path (or .csv file)")],
    csv_fs: CsvFsOption = None,
) -> None:
    """Print sampling rate, channels and header comments of a record."""
    rec = _load_any(record, csv_fs)
    typer.echo(f"record={rec.record_name}")
    typer.echo(f"fs={rec.fs:g} Hz")
    typer.echo(f"channels={len(rec.channel_names)}")
    typer.echo(f"samples={rec.n_samples} ({rec.duration_s:.2f} s)")
    typer.echo(f"leads={','.join(rec.channel_names)}")
    for comment in rec.header.comments:
        typer.echo(f"# {comment}")


@app.command()
def detect(
    ctx: typer.Context,
    record: Annotated[Path, typer.Argument(help="Record base path (or .csv file)")],
    lead: LeadOption = None,
    out: Annotated[Path | None, typer.Option("--out", help="CSV file (default: stdout)")] = None,
    csv_fs: CsvFsOption = None,
) -> None:
    """Detect R peaks on one lead and emit sample indices and times."""
    cfg = _settings(ctx)
    rec = _load_any(record, csv_fs)
    channel = rec.channel(lead or rec.channel_names[0])
    peaks = detect_r_peaks(channel, rec.fs, DetectorConfig.from_settings(cfg))
    frame = pd.DataFrame({"r_index": peaks, "r_seconds": peaks / rec.fs})
    if out is None:
        typer.echo(frame.to_csv(index=False, lineterminator="\n", float_format="%.6f"), nl=False)
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, lineterminator="\n", float_format="%.6f")
    typer.echo(str(out))


@app.command()
def featurize(
    ctx: typer.Context,
    out: Annotated[Path, typer.Option("--out", help="Feature CSV to write")],
    lead: Annotated[str, typer.Option("--lead", help="Lead name")],
    db: DbOption = None,
    stride: Annotated[
        int | None, typer.Option("--stride", min=1, help="Beats between fragments")
    ] = None,
    csv_fs: CsvFsOption = None,
) -> None:
    """Write fragment vectors of every record in a database to CSV.

    Unreadable records and leads without detectable beats are logged and left out.
    """
    cfg = _settings(ctx)
    source = _source(cfg, db, csv_fs)
    pipeline = PipelineConfig.from_settings(cfg)
    step = stride or pipeline.fragment_len
    vectors: list[FeatureVector] = []
    for ref in source.list_records():
        try:
            track = extract_beat_track(
                source.load(ref), lead, ref.subject_id, ref.record_id, cfg=pipeline
            )
        except (RecordError, SignalError) as e:
            logger.warning("Record skipped", record=ref.record_id, lead=lead, error=str(e))
            continue
        for i, values in enumerate(fragment_stream(track.features, pipeline.fragment_len, step)):
            vectors.append(
                FeatureVector(
                    values=values,
                    subject_id=ref.subject_id,
                    source=FragmentSource(
                        record_id=ref.record_id, lead=track.lead, start_beat=i * step
                    ),
                )
            )
    if not vectors:
        raise EmptyDataset(f"no fragments of lead {lead} in {source.name}")
    write_dataset(Dataset(vectors=tuple(vectors)), out)
    typer.echo(str(out))


@app.command(name="eval")
def evaluate(
    ctx: typer.Context,
    train: Annotated[Path, typer.Option("--train", help="Training feature CSV")],
    validate: Annotated[Path, typer.Option("--validate", help="Validation feature CSV")],
    out: OutOption,
    methods: MethodsOption = "all",
    seed: SeedOption = None,
    jobs: JobsOption = None,
    fmt: FormatOption = "csv",
    standardize: StandardizeOption = None,
    param: ParamOption = None,
    models: Annotated[
        Path | None, typer.Option("--models", help="Save fitted models to this directory")
    ] = None,
) -> None:
    """Train on one feature CSV and report accuracy on another."""
    cfg = _settings(ctx)
    _format(fmt)
    options = _options(cfg, methods, seed, jobs, standardize, param, dataset=train.stem)
    report = evaluate_datasets(read_dataset(train), read_dataset(validate), options, models)
    _write(report, out, fmt)


# ─────────────────────────────────────────────────────────────────
# Experiments
# ─────────────────────────────────────────────────────────────────


@experiment_app.command(name="lead-sweep")
def lead_sweep_command(
    ctx: typer.Context,
    out: OutOption,
    db: DbOption = None,
    methods: MethodsOption = "all",
    seed: SeedOption = None,
    jobs: JobsOption = None,
    fmt: FormatOption = "csv",
    standardize: StandardizeOption = None,
    param: ParamOption = None,
    csv_fs: CsvFsOption = None,
) -> None:
    """Accuracy per method on each of the 12 conventional leads."""
    cfg = _settings(ctx)
    _format(fmt)
    source = _source(cfg, db, csv_fs)
    options = _options(cfg, methods, seed, jobs, standardize, param)
    _write(lead_sweep(source, options), out, fmt)


@experiment_app.command(name="holter-drift")
def holter_drift_command(
    ctx: typer.Context,
    out: OutOption,
    db: DbOption = None,
    lead: LeadOption = None,
    slot_minutes: Annotated[
        float, typer.Option("--slot-minutes", min=0.001, help="Validation slot length")
    ] = HALF_HOUR_S / 60.0,
    methods: MethodsOption = "all",
    seed: SeedOption = None,
    jobs: JobsOption = None,
    fmt: FormatOption = "csv",
    standardize: StandardizeOption = None,
    param: ParamOption = None,
    csv_fs: CsvFsOption = None,
) -> None:
    """Accuracy over a long recording, one validation fragment per slot."""
    cfg = _settings(ctx)
    _format(fmt)
    source = _source(cfg, db, csv_fs)
    options = _options(cfg, methods, seed, jobs, standardize, param)
    _write(holter_drift(source, options, lead=lead, slot_s=slot_minutes * 60.0), out, fmt)


@experiment_app.command(name="drug")
def drug_command(
    ctx: typer.Context,
    out: OutOption,
    db: DbOption = None,
    lead: LeadOption = None,
    arm: Annotated[
        str | None, typer.Option("--arm", help="Restrict post-dose records to one arm")
    ] = None,
    metadata: Annotated[
        Path | None, typer.Option("--metadata", help="Clinical table (default: in --db)")
    ] = None,
    methods: MethodsOption = "all",
    seed: SeedOption = None,
    jobs: JobsOption = None,
    fmt: FormatOption = "csv",
    standardize: StandardizeOption = None,
    param: ParamOption = None,
    csv_fs: CsvFsOption = None,
) -> None:
    """Accuracy before and after drug intake, with and without enriched training."""
    cfg = _settings(ctx)
    _format(fmt)
    source = _source(cfg, db, csv_fs)
    root = db if db is not None else cfg.require_database_root()
    table = metadata if metadata is not None else root / cfg.drug_metadata_file
    options = _options(cfg, methods, seed, jobs, standardize, param)
    report = drug_protocol(source, table, options, lead=lead, arm=arm, app_settings=cfg)
    _write(report, out, fmt)


# ─────────────────────────────────────────────────────────────────
# Synthetic data and reports
# ─────────────────────────────────────────────────────────────────


@app.command()
def synth(
    ctx: typer.Context,
    out: OutOption,
    subjects: Annotated[int, typer.Option("--subjects", min=1)] = 10,
    duration: Annotated[float, typer.Option("--duration", help="Seconds per record")] = 120.0,
    seed: SeedOption = None,
    fs: Annotated[float, typer.Option("--fs", help="Sampling rate (Hz)")] = 500.0,
    heart_rate: Annotated[float, typer.Option("--heart-rate", help="Mean bpm")] = 60.0,
    heart_rate_std: Annotated[float, typer.Option("--heart-rate-std", help="bpm")] = 2.0,
    noise: Annotated[float, typer.Option("--noise", help="Noise RMS (mV)")] = 0.01,
    leads: Annotated[int, typer.Option("--leads", min=1, max=12)] = 1,
    sessions: Annotated[int, typer.Option("--sessions", min=1)] = 1,
    post_sessions: Annotated[
        int, typer.Option("--post-sessions", min=0, help="Post-dose sessions per subject")
    ] = 0,
    t_shift: Annotated[float, typer.Option("--t-shift", help="Post-dose T shift (ms)")] = 0.0,
    t_scale: Annotated[float, typer.Option("--t-scale", help="Post-dose T scale")] = 1.0,
    drift: Annotated[float, typer.Option("--drift", help="Baseline drift (mV/min)")] = 0.0,
    drift_onset: Annotated[float, typer.Option("--drift-onset", help="Seconds")] = 0.0,
) -> None:
    """Write a synthetic WFDB database with ground-truth files."""
    cfg = _settings(ctx)
    try:
        synth_cfg = SynthConfig(
            n_subjects=subjects,
            duration_s=duration,
            fs=fs,
            heart_rate_bpm=heart_rate,
            heart_rate_std_bpm=heart_rate_std,
            noise_rms_mv=noise,
            n_leads=leads,
            drift_mv_per_min=drift,
            drift_onset_s=drift_onset,
        )
    except ValueError as e:
        raise click.BadParameter(str(e)) from e
    refs = synth_database(
        synth_cfg,
        seed if seed is not None else cfg.default_seed,
        out,
        sessions=sessions,
        post_sessions=post_sessions,
        post_t_shift_ms=t_shift,
        post_t_scale=t_scale,
        app_settings=cfg,
    )
    typer.echo(f"{len(refs)} records written to {out}")


@app.command()
def report(
    grid: Annotated[Path, typer.Argument(help="Grid CSV written by an experiment")],
    scheme: Annotated[str, typer.Option("--scheme", help="lead-sweep, holter-drift, drug, eval")],
    out: Annotated[Path | None, typer.Option("--out", help="File (default: stdout)")] = None,
    fmt: FormatOption = "markdown",
) -> None:
    """Re-render a grid CSV as Markdown (or normalised CSV)."""
    try:
        kind = Scheme(scheme)
    except ValueError as e:
        raise click.BadParameter(f"unknown scheme '{scheme}'", param_hint="--scheme") from e
    loaded = ExperimentReport.from_csv(grid, kind)
    if _format(fmt) == "csv":
        if out is None:
            typer.echo(loaded.render_csv(), nl=False)
            return
        typer.echo(str(loaded.to_csv(out)))
        return
    if out is None:
        typer.echo(loaded.render_markdown(), nl=False)
        return
    typer.echo(str(loaded.to_markdown(out)))


# ─────────────────────────────────────────────────────────────────
# Entry points
# ─────────────────────────────────────────────────────────────────


def run(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and map outcomes to exit codes."""
    command = typer.main.get_command(app)
    try:
        result = command.main(
            args=list(argv) if argv is not None else None,
            prog_name="heartprint",
            standalone_mode=False,
        )
    except click.UsageError as e:
        e.show()
        return 1
    except click.Abort:
        typer.echo("aborted", err=True)
        return 1
    except (ConfigurationError, ValidationError) as e:
        logger.error("Configuration error", error=str(e))
        typer.echo(f"error: {e}", err=True)
        return 1
    except DATA_ERRORS as e:
        logger.error("Data error", error=str(e), kind=type(e).__name__)
        typer.echo(f"error: {e}", err=True)
        return 2
    return result if isinstance(result, int) else 0


def main() -> None:
    raise SystemExit(run())
