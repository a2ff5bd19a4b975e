"""Evaluation protocols, grid execution, reports and the synthetic ECG generator."""

from src.experiments.protocols import (
    ProtocolOptions,
    drug_protocol,
    evaluate_datasets,
    extract_tracks,
    holter_drift,
    lead_sweep,
)
from src.experiments.report import ExperimentReport, Marker, ReportMetadata
from src.experiments.runner import GridCell, GridRunner, plan_cells
from src.experiments.splits import FragmentSelector, Scheme, SplitPlan
from src.experiments.synth import SynthConfig, synth_database, synth_generate

__all__ = [
    "ExperimentReport",
    "FragmentSelector",
    "GridCell",
    "GridRunner",
    "Marker",
    "ProtocolOptions",
    "ReportMetadata",
    "Scheme",
    "SplitPlan",
    "SynthConfig",
    "drug_protocol",
    "evaluate_datasets",
    "extract_tracks",
    "holter_drift",
    "lead_sweep",
    "plan_cells",
    "synth_database",
    "synth_generate",
]
