"""Experiment harness: lemma suites, experiment runners, reports and the command line."""

from .experiments import ExperimentSpec, SpecError, run_experiment
from .report import canonical_json, read_report, write_report
