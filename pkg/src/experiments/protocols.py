"""Evaluation protocols: lead sweep, 24-hour drift and drug effect.

Each protocol builds one SplitPlan per grid condition, checks it for shared beats,
standardises on the training fragments only and hands the (method x condition) cells
to the GridRunner.
"""

from collections.abc import Mapping, Sequence
from pathlib import Path

import numpy as np
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.classifiers.base import HyperValue, accuracy, fit
from src.classifiers.persistence import save_model
from src.classifiers.registry import DEFAULT_METHODS, is_excluded, make_spec, parse_method_names
from src.experiments.report import (
    CellValue,
    CorrelationRow,
    ExperimentReport,
    Marker,
    ReportMetadata,
    SeriesPoint,
)
from src.experiments.runner import GridCell, GridRunner, plan_cells
from src.experiments.splits import (
    BeatStream,
    FragmentSelector,
    Scheme,
    SplitPlan,
    track_fragment,
    validation_candidates,
)
from src.ingest.base import RecordRef, RecordSource
from src.ingest.database import annotate_drug_phases, group_by_subject
from src.processing.features import apply_standardizer, fit_standardizer
from src.processing.pipeline import BeatTrack, PipelineConfig, extract_beat_track
from src.stats.correlation import CorrelationMethod, correlate
from src.stats.tables import MIN_COLUMN, SPREAD_COLUMN, accuracy_table
from src.utils.config import Settings, settings
from src.utils.exceptions import (
    ExperimentError,
    InsufficientBeats,
    RecordError,
    SignalError,
    StatsError,
    SubjectMissingArm,
)
from src.utils.models import CONVENTIONAL_LEADS, Dataset, FeatureVector
from src.utils.seeding import derive_rng, derive_seed

logger = structlog.get_logger()

HALF_HOUR_S = 1800.0

PRE = "pre"
POST = "post"
REDUCTION = "reduction"
ENRICHED = "enriched"
DRUG_CONDITIONS = (PRE, POST, REDUCTION, ENRICHED)
EVAL_CONDITION = "validation"


class ProtocolOptions(BaseModel):
    """Parameters shared by every protocol run."""

    model_config = ConfigDict(frozen=True)

    methods: tuple[str, ...] = DEFAULT_METHODS
    seed: int = Field(default=42, ge=0)
    overrides: dict[str, dict[str, HyperValue]] = Field(default_factory=dict)
    standardize: bool = True
    jobs: int = Field(default=1, ge=1)
    permutations: int = Field(default=10_000, ge=1)
    pipeline: PipelineConfig = Field(default_factory=PipelineConfig)
    dataset: str = ""

    @field_validator("methods", mode="before")
    @classmethod
    def _known_methods(cls, value: object) -> tuple[str, ...]:
        if isinstance(value, Sequence):
            return tuple(parse_method_names(value))
        return value  # type: ignore[return-value]

    @classmethod
    def from_settings(cls, cfg: Settings = settings, **overrides: object) -> "ProtocolOptions":
        values: dict[str, object] = {
            "seed": cfg.default_seed,
            "standardize": cfg.standardize,
            "jobs": cfg.effective_jobs,
            "permutations": cfg.permutations,
            "pipeline": PipelineConfig.from_settings(cfg),
        }
        values.update(overrides)
        return cls.model_validate(values)

    @property
    def fragment_len(self) -> int:
        return self.pipeline.fragment_len

    @property
    def implemented(self) -> list[str]:
        return [m for m in self.methods if not is_excluded(m)]


# ─────────────────────────────────────────────────────────────────
# Shared plumbing
# ─────────────────────────────────────────────────────────────────


def extract_tracks(
    source: RecordSource,
    refs: Sequence[RecordRef],
    leads: Sequence[str] | None,
    pipeline: PipelineConfig,
) -> dict[tuple[str, str], BeatTrack]:
    """Load each record once and extract one beat track per lead.

    With leads=None the first channel of every record is used and keyed under its own name.
    Unreadable records and undetectable leads are logged and left out.
    """
    tracks: dict[tuple[str, str], BeatTrack] = {}
    for ref in refs:
        try:
            record = source.load(ref)
        except RecordError as e:
            logger.warning("Record skipped", record=ref.record_id, error=str(e))
            continue
        wanted = list(leads) if leads is not None else [record.channel_names[0]]
        for lead in wanted:
            if not record.has_lead(lead):
                logger.debug("Lead missing", record=ref.record_id, lead=lead)
                continue
            try:
                track = extract_beat_track(
                    record,
                    lead,
                    subject_id=ref.subject_id,
                    record_id=ref.record_id,
                    cfg=pipeline,
                )
            except SignalError as e:
                logger.warning("Lead skipped", record=ref.record_id, lead=lead, error=str(e))
                continue
            tracks[(ref.record_id, lead)] = track
    return tracks


def _log_excluded(subject: str, condition: str, error: Exception) -> str:
    logger.warning(
        "Subject excluded",
        subject=subject,
        lead=condition,
        reason=type(error).__name__,
        detail=str(error),
    )
    return f"{subject}:{condition}"


def _prepare(train: Dataset, validation: Dataset, standardize: bool) -> tuple[Dataset, Dataset]:
    """Standardise with training statistics only; empty training sets pass through."""
    if not standardize or len(train) == 0:
        return train, validation
    scaler = fit_standardizer(train)
    return apply_standardizer(scaler, train), apply_standardizer(scaler, validation)


def _run_grid(
    options: ProtocolOptions,
    datasets: Mapping[str, tuple[Dataset, Dataset]],
    seed_keys: Mapping[str, str] | None = None,
    models_dir: Path | None = None,
) -> dict[tuple[str, str], CellValue]:
    """Fit and score every implemented method on every prepared condition."""

    def score(cell: GridCell) -> float:
        train, validation = datasets[cell.condition]
        spec = make_spec(cell.method, options.overrides, cell.seed)
        model = fit(spec, train)
        if models_dir is not None:
            save_model(model, models_dir / f"{cell.method}-{cell.condition}.npz")
        return accuracy(model, validation)

    cells = plan_cells(options.implemented, list(datasets), options.seed, seed_keys)
    results = GridRunner(options.jobs).run(cells, score)
    for method in options.methods:
        if is_excluded(method):
            for condition in datasets:
                results[(method, condition)] = Marker.NOT_IMPLEMENTED.value
    return results


def _correlations(
    label: str,
    x: Sequence[float | None],
    y: Sequence[float | None],
    options: ProtocolOptions,
) -> list[CorrelationRow]:
    """Spearman and Kendall tau-b over the methods where both values are numeric."""
    pairs = [
        (a, b)
        for a, b in zip(x, y, strict=True)
        if a is not None and b is not None and np.isfinite(a) and np.isfinite(b)
    ]
    rows = []
    for method in CorrelationMethod:
        try:
            result = correlate(
                method,
                [a for a, _ in pairs],
                [b for _, b in pairs],
                permutations=options.permutations,
                seed=derive_seed(options.seed, "correlation", label, method.value),
            )
        except StatsError as e:
            logger.warning("Correlation skipped", label=label, method=method.value, error=str(e))
            continue
        rows.append(CorrelationRow.from_result(label, result))
    return rows


def _as_float(value: object) -> float | None:
    return float(value) if isinstance(value, int | float) else None


def _dataset(vectors: Sequence[FeatureVector]) -> Dataset:
    return Dataset(vectors=tuple(vectors))


# ─────────────────────────────────────────────────────────────────
# Lead sweep
# ─────────────────────────────────────────────────────────────────


def _lead_sweep_fragments(
    subject: str,
    subject_refs: Sequence[RecordRef],
    lead: str,
    tracks: Mapping[tuple[str, str], BeatTrack],
    options: ProtocolOptions,
) -> tuple[tuple[FeatureVector, FragmentSelector], tuple[FeatureVector, FragmentSelector]]:
    n = options.fragment_len
    first = tracks.get((subject_refs[0].record_id, lead))
    if first is None or len(first) < n:
        raise InsufficientBeats(
            f"first record {subject_refs[0].record_id} has "
            f"{0 if first is None else len(first)} beats on lead {lead}",
            subject_id=subject,
            n_beats=0 if first is None else len(first),
        )
    train = track_fragment(first, 0, n)

    subject_tracks = [
        t for ref in subject_refs if (t := tracks.get((ref.record_id, lead))) is not None
    ]
    candidates = validation_candidates(subject_tracks, n, set(train[1].beats))
    if not candidates:
        raise InsufficientBeats(
            f"no {n}-beat validation fragment outside the training beats on lead {lead}",
            subject_id=subject,
            n_beats=sum(len(t) for t in subject_tracks),
        )
    rng = derive_rng(options.seed, "validation", lead, subject)
    pos, start = candidates[int(rng.integers(len(candidates)))]
    return train, track_fragment(subject_tracks[pos], start, n)


def lead_sweep(
    source: RecordSource,
    options: ProtocolOptions,
    refs: Sequence[RecordRef] | None = None,
    leads: Sequence[str] = CONVENTIONAL_LEADS,
) -> ExperimentReport:
    """Identification accuracy per (method, lead).

    Per lead, each subject trains on the first fragment of its first record and is validated
    on one seeded random fragment from any of its records that shares no training beat.
    """
    refs = list(refs) if refs is not None else source.list_records()
    subjects = group_by_subject(refs)
    tracks = extract_tracks(source, refs, leads, options.pipeline)

    datasets: dict[str, tuple[Dataset, Dataset]] = {}
    excluded: list[str] = []
    for lead in leads:
        train_vecs, val_vecs = [], []
        train_sel, val_sel = [], []
        for subject, subject_refs in subjects.items():
            try:
                train, val = _lead_sweep_fragments(subject, subject_refs, lead, tracks, options)
            except InsufficientBeats as e:
                excluded.append(_log_excluded(subject, lead, e))
                continue
            train_vecs.append(train[0])
            train_sel.append(train[1])
            val_vecs.append(val[0])
            val_sel.append(val[1])
        SplitPlan(
            scheme=Scheme.LEAD_SWEEP,
            condition=lead,
            lead=lead,
            seed=options.seed,
            train=tuple(train_sel),
            validation=tuple(val_sel),
        ).assert_disjoint()
        datasets[lead] = _prepare(_dataset(train_vecs), _dataset(val_vecs), options.standardize)

    cells = _run_grid(options, datasets)
    table = accuracy_table(cells, options.methods, list(leads))
    correlations = _correlations(
        f"{MIN_COLUMN} vs {SPREAD_COLUMN}",
        [_as_float(v) for v in table[MIN_COLUMN]],
        [_as_float(v) for v in table[SPREAD_COLUMN]],
        options,
    )
    return ExperimentReport(
        scheme=Scheme.LEAD_SWEEP,
        methods=options.methods,
        conditions=tuple(leads),
        cells=cells,
        correlations=tuple(correlations),
        metadata=ReportMetadata(
            seed=options.seed,
            dataset=options.dataset or source.name,
            fragment_len=options.fragment_len,
            standardize=options.standardize,
            excluded_subjects=tuple(excluded),
        ),
    )


# ─────────────────────────────────────────────────────────────────
# 24-hour drift
# ─────────────────────────────────────────────────────────────────


def slot_label(slot_hours: float) -> str:
    return f"{slot_hours:g}h"


def slot_fragment_start(
    track: BeatTrack, boundary_s: float, slot_s: float, length: int
) -> int | None:
    """First fragment starting at or after the boundary, clear of the training beats.

    None when the slot holds fewer than `length` such beats.
    """
    start = max(track.first_beat_at_or_after(boundary_s), length)
    end = start + length
    if end > len(track) or track.r_seconds[end - 1] >= boundary_s + slot_s:
        return None
    return start


def holter_drift(
    source: RecordSource,
    options: ProtocolOptions,
    refs: Sequence[RecordRef] | None = None,
    lead: str | None = None,
    slot_s: float = HALF_HOUR_S,
) -> ExperimentReport:
    """Accuracy over time: train on each record's first fragment, validate per slot.

    Slot k (k = 1, 2, ...) starts at k * slot_s while that is inside the record; its
    validation fragment is the first run of beats after the boundary. A slot where no
    record has enough beats is marked skipped for every method.
    """
    if slot_s <= 0:
        raise ExperimentError(f"slot length must be positive, got {slot_s}")
    refs = list(refs) if refs is not None else source.list_records()
    tracks = extract_tracks(source, refs, [lead] if lead else None, options.pipeline)
    by_record = {record_id: track for (record_id, _), track in tracks.items()}
    n = options.fragment_len

    train_vecs: list[FeatureVector] = []
    train_sel: list[FragmentSelector] = []
    slots: dict[int, list[tuple[FeatureVector, FragmentSelector]]] = {}
    n_slots = 0
    excluded: list[str] = []
    for ref in refs:
        track = by_record.get(ref.record_id)
        if track is None or len(track) < n:
            error = InsufficientBeats(
                f"record {ref.record_id} has {0 if track is None else len(track)} beats",
                subject_id=ref.subject_id,
            )
            excluded.append(_log_excluded(ref.subject_id, lead or "", error))
            continue
        vector, selector = track_fragment(track, 0, n)
        train_vecs.append(vector)
        train_sel.append(selector)

        k = 1
        while k * slot_s < track.duration_s:
            start = slot_fragment_start(track, k * slot_s, slot_s, n)
            if start is None:
                logger.debug("Slot short of beats", record=ref.record_id, slot=k)
            else:
                slots.setdefault(k, []).append(track_fragment(track, start, n))
            n_slots = max(n_slots, k)
            k += 1

    train = _dataset(train_vecs)
    datasets: dict[str, tuple[Dataset, Dataset]] = {}
    conditions = []
    skipped = []
    for k in range(1, n_slots + 1):
        label = slot_label(k * slot_s / 3600.0)
        conditions.append(label)
        entries = slots.get(k, [])
        if not entries:
            logger.info("Slot skipped", slot=label)
            skipped.append(label)
            continue
        SplitPlan(
            scheme=Scheme.HOLTER_DRIFT,
            condition=label,
            lead=lead or "",
            seed=options.seed,
            train=tuple(train_sel),
            validation=tuple(sel for _, sel in entries),
        ).assert_disjoint()
        datasets[label] = _prepare(
            train, _dataset([vec for vec, _ in entries]), options.standardize
        )

    cells = _run_grid(options, datasets) if datasets else {}
    for label in skipped:
        for method in options.methods:
            cells[(method, label)] = Marker.SKIPPED.value

    series = [
        SeriesPoint(method=method, slot_hours=k * slot_s / 3600.0, accuracy=value)
        for method in options.methods
        for k, label in enumerate(conditions, start=1)
        if isinstance(value := cells[(method, label)], float)
    ]
    first_lead = next(iter(by_record.values())).lead if by_record else lead
    return ExperimentReport(
        scheme=Scheme.HOLTER_DRIFT,
        methods=options.methods,
        conditions=tuple(conditions),
        cells=cells,
        series=tuple(series),
        metadata=ReportMetadata(
            seed=options.seed,
            dataset=options.dataset or source.name,
            lead=first_lead,
            fragment_len=n,
            standardize=options.standardize,
            excluded_subjects=tuple(excluded),
        ),
    )


# ─────────────────────────────────────────────────────────────────
# Drug effect
# ─────────────────────────────────────────────────────────────────


class DrugFragments(BaseModel):
    """The four fragments one subject contributes to the drug protocol."""

    model_config = ConfigDict(frozen=True)

    train_pre: tuple[FeatureVector, FragmentSelector]
    validate_pre: tuple[FeatureVector, FragmentSelector]
    train_post: tuple[FeatureVector, FragmentSelector]
    validate_post: tuple[FeatureVector, FragmentSelector]


def _phase_order(ref: RecordRef) -> tuple[float, str]:
    return (ref.timepoint_hours if ref.timepoint_hours is not None else 0.0, ref.record_id)


def _drug_fragments(
    subject: str,
    subject_refs: Sequence[RecordRef],
    tracks: Mapping[str, BeatTrack],
    n: int,
) -> DrugFragments:
    pre_refs = sorted((r for r in subject_refs if r.phase == "pre"), key=_phase_order)
    post_refs = sorted((r for r in subject_refs if r.phase == "post"), key=_phase_order)
    if not pre_refs or not post_refs:
        missing = "pre-dose" if not pre_refs else "post-dose"
        raise SubjectMissingArm(f"subject {subject} has no {missing} records")

    pre = BeatStream(subject, [tracks[r.record_id] for r in pre_refs if r.record_id in tracks])
    post = BeatStream(subject, [tracks[r.record_id] for r in post_refs if r.record_id in tracks])
    return DrugFragments(
        train_pre=pre.fragment(0, n),
        validate_pre=pre.fragment(n, n),
        train_post=post.fragment(0, n),
        validate_post=post.fragment(n, n),
    )


def drug_protocol(
    source: RecordSource,
    metadata_path: str | Path,
    options: ProtocolOptions,
    refs: Sequence[RecordRef] | None = None,
    lead: str | None = None,
    arm: str | None = None,
    app_settings: Settings = settings,
) -> ExperimentReport:
    """Identification before and after drug intake.

    pre: train on pre-dose, validate on a later pre-dose fragment. post: same training set,
    validate on post-dose. enriched: add one post-dose fragment per subject to training and
    validate on a different post-dose fragment. reduction = pre - post.
    """
    listed = list(refs) if refs is not None else source.list_records()
    annotated = annotate_drug_phases(listed, Path(metadata_path), arm, app_settings)
    tracks = extract_tracks(source, annotated, [lead] if lead else None, options.pipeline)
    by_record = {record_id: track for (record_id, _), track in tracks.items()}
    n = options.fragment_len

    fragments: dict[str, DrugFragments] = {}
    excluded: list[str] = []
    for subject, subject_refs in group_by_subject(annotated).items():
        try:
            fragments[subject] = _drug_fragments(subject, subject_refs, by_record, n)
        except (SubjectMissingArm, InsufficientBeats) as e:
            excluded.append(_log_excluded(subject, lead or "", e))

    def part(name: str) -> list[tuple[FeatureVector, FragmentSelector]]:
        return [getattr(f, name) for f in fragments.values()]

    splits = {
        PRE: (part("train_pre"), part("validate_pre")),
        POST: (part("train_pre"), part("validate_post")),
        ENRICHED: (part("train_pre") + part("train_post"), part("validate_post")),
    }
    datasets: dict[str, tuple[Dataset, Dataset]] = {}
    for condition, (train, validation) in splits.items():
        SplitPlan(
            scheme=Scheme.DRUG_EFFECT,
            condition=condition,
            lead=lead or "",
            seed=options.seed,
            train=tuple(sel for _, sel in train),
            validation=tuple(sel for _, sel in validation),
        ).assert_disjoint()
        datasets[condition] = _prepare(
            _dataset([v for v, _ in train]),
            _dataset([v for v, _ in validation]),
            options.standardize,
        )

    # pre and post share the training set, so they share the fitted model too
    cells = _run_grid(options, datasets, seed_keys={PRE: PRE, POST: PRE})
    for method in options.methods:
        a, b = cells[(method, PRE)], cells[(method, POST)]
        if isinstance(a, float) and isinstance(b, float):
            cells[(method, REDUCTION)] = a - b
        else:
            cells[(method, REDUCTION)] = a if isinstance(a, str) else b

    column_a = [_as_float(cells[(m, PRE)]) for m in options.methods]
    correlations = _correlations(
        "pre vs post", column_a, [_as_float(cells[(m, POST)]) for m in options.methods], options
    ) + _correlations(
        "pre vs enriched",
        column_a,
        [_as_float(cells[(m, ENRICHED)]) for m in options.methods],
        options,
    )
    first_lead = next(iter(by_record.values())).lead if by_record else lead
    return ExperimentReport(
        scheme=Scheme.DRUG_EFFECT,
        methods=options.methods,
        conditions=DRUG_CONDITIONS,
        cells=cells,
        summarized=False,
        correlations=tuple(correlations),
        metadata=ReportMetadata(
            seed=options.seed,
            dataset=options.dataset or source.name,
            lead=first_lead,
            fragment_len=n,
            standardize=options.standardize,
            excluded_subjects=tuple(excluded),
        ),
    )


# ─────────────────────────────────────────────────────────────────
# Arbitrary feature datasets
# ─────────────────────────────────────────────────────────────────


def evaluate_datasets(
    train: Dataset,
    validation: Dataset,
    options: ProtocolOptions,
    models_dir: Path | None = None,
) -> ExperimentReport:
    """Accuracy of every method trained on one feature set and validated on another.

    Fitted models are saved to models_dir when given.
    """
    datasets = {EVAL_CONDITION: _prepare(train, validation, options.standardize)}
    cells = _run_grid(options, datasets, models_dir=models_dir)
    return ExperimentReport(
        scheme=Scheme.EVAL,
        methods=options.methods,
        conditions=(EVAL_CONDITION,),
        cells=cells,
        summarized=False,
        metadata=ReportMetadata(
            seed=options.seed,
            dataset=options.dataset,
            fragment_len=options.fragment_len,
            standardize=options.standardize,
        ),
    )
