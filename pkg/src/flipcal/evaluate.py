"""Run named pipelines over averaged predictions and score each one."""

from __future__ import annotations

from typing import Mapping, Sequence

from flipcal.core import Label, SampleRecord
from flipcal.ensemble import AveragedPrediction
from flipcal.errors import InputError
from flipcal.fallback import FallbackModel
from flipcal.methods import PIPELINES, PipelineConfig, run_named_pipeline
from flipcal.metrics import DEFAULT_BIN_WIDTH, CalibrationReport, build_report


def evaluate_pipelines(
    averaged: Sequence[AveragedPrediction],
    labels: Mapping[str, Label],
    pipelines: Sequence[str] = tuple(PIPELINES),
    config: PipelineConfig = PipelineConfig(),
    bin_width: float = DEFAULT_BIN_WIDTH,
    fallback_model: FallbackModel | None = None,
    originals: Mapping[str, SampleRecord] | None = None,
) -> list[tuple[str, CalibrationReport, dict]]:
    """Return ``(pipeline, report, metadata)`` for each requested pipeline."""
    try:
        truth = [labels[a.sample_id] for a in averaged]
    except KeyError as exc:
        raise InputError(f"no label for sample {exc.args[0]!r}") from None
    runs_used = sorted({a.runs_used for a in averaged})
    out = []
    for name in pipelines:
        result = run_named_pipeline(name, averaged, config, fallback_model, originals)
        report = build_report(list(result.decisions), None, truth, bin_width)
        primary, continuation = PIPELINES[name]
        decided_by: dict[str, int] = {}
        for d in result.decisions:
            decided_by[d.decided_by] = decided_by.get(d.decided_by, 0) + 1
        metadata = {
            "primary": primary,
            "continuation": continuation,
            "beta": config.beta,
            "bin_width": bin_width,
            "mc_runs": runs_used[0] if len(runs_used) == 1 else runs_used,
            "rejected_before_continuation": len(result.rejected_ids),
            "decided_by": dict(sorted(decided_by.items())),
        }
        if fallback_model is not None and "fallback" in (primary, continuation):
            metadata["fallback"] = fallback_model.kind
        out.append((name, report, metadata))
    return out
