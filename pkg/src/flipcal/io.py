"""Text file formats.

All tables are comma-separated UTF-8 with a header line and ``\\n`` line
endings. Floats are written with ``repr`` so that reading and re-writing a
file reproduces it byte for byte.

samples      sample_id, label, variable_index, t_0 ... t_{L-1}
runs         sample_id, variant_index, run_index, p1, p2
external     sample_id, p1, p2
sweep        beta, rejected_fraction, accuracy_of_accepted, n_rejected, n_accepted, neutralized_fraction
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from flipcal.core import Label, PredictionTensor, SampleRecord
from flipcal.errors import EmptyReport, InputError
from flipcal.metrics import CalibrationReport, ConfidenceBin, Flag, format_table

SAMPLES_HEADER = ["sample_id", "label", "variable_index"]
RUNS_HEADER = ["sample_id", "variant_index", "run_index", "p1", "p2"]
EXTERNAL_HEADER = ["sample_id", "p1", "p2"]
SWEEP_HEADER = [
    "beta",
    "rejected_fraction",
    "accuracy_of_accepted",
    "n_rejected",
    "n_accepted",
    "neutralized_fraction",
]


def _fmt(x: float) -> str:
    return repr(float(x))


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _open_write(path: Path):
    return open(path, "w", encoding="utf-8", newline="")


def _read_rows(path: Path, header_prefix: Sequence[str]) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except (UnicodeDecodeError, csv.Error) as exc:
        raise InputError(f"{path}: {exc}") from exc
    if not rows:
        raise InputError(f"{path}: empty file")
    header = rows[0]
    if header[: len(header_prefix)] != list(header_prefix):
        raise InputError(f"{path}: expected header starting with {','.join(header_prefix)}")
    return header, rows[1:]


def _parse_float(text: str, path: Path, line: int) -> float:
    try:
        value = float(text)
    except ValueError:
        raise InputError(f"{path}:{line}: not a number: {text!r}") from None
    if not math.isfinite(value):
        raise InputError(f"{path}:{line}: non-finite value {text!r}")
    return value


def _parse_int(text: str, path: Path, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise InputError(f"{path}:{line}: not an integer: {text!r}") from None


# samples


def write_samples(path: str | Path, samples: Sequence[SampleRecord]) -> None:
    if not samples:
        raise InputError("no samples to write")
    L = samples[0].length
    with _open_write(Path(path)) as fh:
        w = _writer(fh)
        w.writerow(SAMPLES_HEADER + [f"t_{t}" for t in range(L)])
        for s in samples:
            if s.length != L:
                raise InputError(f"sample {s.id!r} has length {s.length}, expected {L}")
            for v in range(s.n_variables):
                w.writerow([s.id, int(s.label), v] + [_fmt(x) for x in s.sequences[v]])


def read_samples(path: str | Path) -> list[SampleRecord]:
    path = Path(path)
    header, rows = _read_rows(path, SAMPLES_HEADER)
    L = len(header) - len(SAMPLES_HEADER)
    if L < 1:
        raise InputError(f"{path}: no time-step columns")
    grouped: dict[str, tuple[int, dict[int, list[float]]]] = {}
    for i, row in enumerate(rows, start=2):
        if len(row) != len(header):
            raise InputError(f"{path}:{i}: expected {len(header)} fields, got {len(row)}")
        sid, label_text, var_text = row[:3]
        label = _parse_int(label_text, path, i)
        if label not in (0, 1):
            raise InputError(f"{path}:{i}: label must be 0 or 1, got {label}")
        var = _parse_int(var_text, path, i)
        values = [_parse_float(x, path, i) for x in row[3:]]
        prev_label, seqs = grouped.setdefault(sid, (label, {}))
        if prev_label != label:
            raise InputError(f"{path}:{i}: sample {sid!r} has conflicting labels")
        if var in seqs:
            raise InputError(f"{path}:{i}: sample {sid!r} repeats variable {var}")
        seqs[var] = values
    samples = []
    n_vars = None
    for sid, (label, seqs) in grouped.items():
        if sorted(seqs) != list(range(len(seqs))):
            raise InputError(f"{path}: sample {sid!r} has variables {sorted(seqs)}, expected 0..V-1")
        if n_vars is None:
            n_vars = len(seqs)
        elif len(seqs) != n_vars:
            raise InputError(f"{path}: sample {sid!r} has {len(seqs)} variables, expected {n_vars}")
        samples.append(SampleRecord(sid, np.array([seqs[v] for v in range(len(seqs))]), Label(label)))
    if not samples:
        raise InputError(f"{path}: no samples")
    return samples


# prediction runs


def write_runs(path: str | Path, tensors: Sequence[PredictionTensor]) -> None:
    with _open_write(Path(path)) as fh:
        w = _writer(fh)
        w.writerow(RUNS_HEADER)
        for t in tensors:
            for v in range(t.n_variants):
                for r in range(t.n_runs):
                    p1, p2 = t.runs[r, v]
                    w.writerow([t.sample_id, v, r, _fmt(p1), _fmt(p2)])


def read_run_rows(path: str | Path) -> list[tuple[str, int, int, float, float]]:
    path = Path(path)
    header, rows = _read_rows(path, RUNS_HEADER)
    if len(header) != len(RUNS_HEADER):
        raise InputError(f"{path}: unexpected columns {header[len(RUNS_HEADER):]}")
    out = []
    for i, row in enumerate(rows, start=2):
        if len(row) != len(RUNS_HEADER):
            raise InputError(f"{path}:{i}: expected {len(RUNS_HEADER)} fields, got {len(row)}")
        out.append(
            (
                row[0],
                _parse_int(row[1], path, i),
                _parse_int(row[2], path, i),
                _parse_float(row[3], path, i),
                _parse_float(row[4], path, i),
            )
        )
    return out


# external fallback predictions


def write_external(path: str | Path, rows: Iterable[tuple[str, float, float]]) -> None:
    with _open_write(Path(path)) as fh:
        w = _writer(fh)
        w.writerow(EXTERNAL_HEADER)
        for sid, p1, p2 in rows:
            w.writerow([sid, _fmt(p1), _fmt(p2)])


def read_external_rows(path: str | Path) -> list[tuple[str, float, float]]:
    path = Path(path)
    header, rows = _read_rows(path, EXTERNAL_HEADER)
    out = []
    for i, row in enumerate(rows, start=2):
        if len(row) != len(EXTERNAL_HEADER):
            raise InputError(f"{path}:{i}: expected {len(EXTERNAL_HEADER)} fields, got {len(row)}")
        out.append((row[0], _parse_float(row[1], path, i), _parse_float(row[2], path, i)))
    return out


# beta sweep


def write_sweep(path: str | Path, rows) -> None:
    with _open_write(Path(path)) as fh:
        w = _writer(fh)
        w.writerow(SWEEP_HEADER)
        for r in rows:
            w.writerow(
                [
                    _fmt(r.beta),
                    _fmt(r.rejected_fraction),
                    _fmt(r.accuracy_of_accepted),
                    r.n_rejected,
                    r.n_accepted,
                    _fmt(r.neutralized_fraction),
                ]
            )


# reports


def report_to_dict(name: str, report: CalibrationReport, metadata: dict[str, Any] | None = None) -> dict:
    return {
        "pipeline": name,
        "metadata": dict(metadata or {}),
        "metrics": {
            "ece": report.ece,
            "mce": report.mce,
            "mc": report.mc,
            "ma": report.ma,
            "nll": report.nll,
            "bsl": report.bsl,
            "rs": report.rs,
            "flag": report.flag.value,
            "n_samples": report.n_samples,
            "bin_width": report.bin_width,
        },
        "bins": [
            {
                "lower": b.lower,
                "upper": b.upper,
                "center": b.center,
                "count": b.count,
                "correct": b.correct,
                "accuracy": b.accuracy,
                "mean_confidence": b.mean_confidence,
            }
            for b in report.bins
        ],
    }


def report_from_dict(data: dict) -> tuple[str, CalibrationReport, dict]:
    try:
        m = data["metrics"]
        bins = tuple(
            ConfidenceBin(
                lower=float(b["lower"]),
                upper=float(b["upper"]),
                count=int(b["count"]),
                correct=int(b["correct"]),
                mean_confidence=None if b["mean_confidence"] is None else float(b["mean_confidence"]),
            )
            for b in data["bins"]
        )
        report = CalibrationReport(
            bins=bins,
            ece=float(m["ece"]),
            mce=float(m["mce"]),
            mc=float(m["mc"]),
            ma=float(m["ma"]),
            nll=float(m["nll"]),
            bsl=float(m["bsl"]),
            rs=float(m["rs"]),
            flag=Flag(m["flag"]),
            n_samples=int(m["n_samples"]),
            bin_width=float(m["bin_width"]),
        )
        return str(data["pipeline"]), report, dict(data.get("metadata", {}))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed report entry: {exc!r}") from exc


def dumps_reports(entries: Sequence[tuple[str, CalibrationReport, dict]]) -> str:
    doc = {"reports": [report_to_dict(n, r, md) for n, r, md in entries]}
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_reports_json(path: str | Path, entries: Sequence[tuple[str, CalibrationReport, dict]]) -> None:
    with _open_write(Path(path)) as fh:
        fh.write(dumps_reports(entries))


def read_reports_json(path: str | Path) -> list[tuple[str, CalibrationReport, dict]]:
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg})") from exc
    reports = doc.get("reports") if isinstance(doc, dict) else None
    if not reports:
        raise EmptyReport(f"{path}: no reports")
    return [report_from_dict(entry) for entry in reports]


def _kv_block(name: str, report: CalibrationReport, metadata: dict) -> list[str]:
    lines = [f"[{name}]"]
    for key in sorted(metadata):
        lines.append(f"{key} = {metadata[key]}")
    lines += [
        f"n_samples = {report.n_samples}",
        f"ece = {report.ece!r}",
        f"mce = {report.mce!r}",
        f"mc = {report.mc!r}",
        f"ma = {report.ma!r}",
        f"nll = {report.nll!r}",
        f"bsl = {report.bsl!r}",
        f"flag = {report.flag.value}",
        f"rs = {report.rs!r}",
        "",
        "lower,upper,center,count,correct,accuracy,mean_confidence",
    ]
    for b in report.bins:
        acc = "" if b.accuracy is None else repr(b.accuracy)
        mconf = "" if b.mean_confidence is None else repr(b.mean_confidence)
        lines.append(f"{b.lower!r},{b.upper!r},{b.center!r},{b.count},{b.correct},{acc},{mconf}")
    return lines


def dumps_reports_text(entries: Sequence[tuple[str, CalibrationReport, dict]]) -> str:
    parts = [format_table([(n, r) for n, r, _ in entries])]
    for n, r, md in entries:
        parts.append("\n".join(_kv_block(n, r, md)) + "\n")
    return "\n".join(parts)


def write_reports_text(path: str | Path, entries: Sequence[tuple[str, CalibrationReport, dict]]) -> None:
    with _open_write(Path(path)) as fh:
        fh.write(dumps_reports_text(entries))
