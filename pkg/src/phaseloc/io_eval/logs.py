"""Phase-log files: delimited text with one read per row.

Schema (UTF-8, comma-separated, header required)::

    tag_id,ant_x,ant_y,ant_z,freq_hz,phase,phase_unit

phase_unit is ``radians`` or ``ticks`` (one tick = 2*pi/4096, the usual
reader quantization); an optional trailing ``timestamp`` column is kept
but unused.  Floats are written with repr so a synthesize -> export ->
ingest round trip reproduces the samples bit-for-bit.  The log schema
carries no per-read sigma; ingestion fills sigma_hint from the
``sigma_default`` option.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

from ..phase_model import TWO_PI, CarrierConfig, PhaseSample, Position3D, wrap_2pi

LOG_FIELDS = ("tag_id", "ant_x", "ant_y", "ant_z", "freq_hz", "phase", "phase_unit")
TICKS_PER_TURN = 4096
TICK_RADIANS = TWO_PI / TICKS_PER_TURN
_UNITS = ("radians", "ticks")


class LogFormatError(ValueError):
    """Malformed phase-log content; the message carries the line number."""


@dataclass(frozen=True)
class PhaseLogRecord:
    """One parsed log row, before conversion into a PhaseSample."""

    tag_id: str
    ant_x: float
    ant_y: float
    ant_z: float
    freq_hz: float
    phase_raw: float
    phase_unit: str
    timestamp: str | None = None
    lineno: int = 0


def export_phase_log(
    samples_by_tag: dict[str, list[PhaseSample]],
    path: str | Path,
    unit: str = "radians",
) -> None:
    """Write per-tag sample streams as one log file, tag by tag in dict
    order.  With unit="ticks" phases are quantized to 2*pi/4096."""
    if unit not in _UNITS:
        raise ValueError(f"unknown phase unit {unit!r}")
    lines = [",".join(LOG_FIELDS)]
    for tag_id, samples in samples_by_tag.items():
        for s in samples:
            if unit == "ticks":
                phase = str(int(round(s.phase_wrapped / TICK_RADIANS)) % TICKS_PER_TURN)
            else:
                phase = repr(s.phase_wrapped)
            pose = s.antenna_pose
            lines.append(
                ",".join(
                    [
                        tag_id,
                        repr(pose.x),
                        repr(pose.y),
                        repr(pose.z),
                        repr(s.carrier.frequency),
                        phase,
                        unit,
                    ]
                )
            )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _parse_float(value: str, column: str, lineno: int) -> float:
    try:
        out = float(value)
    except ValueError as exc:
        raise LogFormatError(f"line {lineno}: {column} is not a number: {value!r}") from exc
    if not math.isfinite(out):
        raise LogFormatError(f"line {lineno}: {column} must be finite, got {value!r}")
    return out


def read_log_records(path: str | Path, unit_override: str | None = None) -> list[PhaseLogRecord]:
    """Parse a log file into rows without any phase conversion."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise LogFormatError("empty file: missing header") from None
        header = [h.strip() for h in header]
        has_unit_column = "phase_unit" in header
        required = [f for f in LOG_FIELDS if f != "phase_unit" or has_unit_column]
        missing = [f for f in required if f not in header]
        if missing:
            raise LogFormatError(f"header is missing columns: {', '.join(missing)}")
        if not has_unit_column and unit_override is None:
            raise LogFormatError("no phase_unit column; pass an explicit unit")
        col = {name: header.index(name) for name in header}

        records = []
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < len(header):
                raise LogFormatError(f"line {lineno}: expected {len(header)} fields, got {len(row)}")
            unit = unit_override or row[col["phase_unit"]].strip()
            if unit not in _UNITS:
                raise LogFormatError(f"line {lineno}: unknown phase unit {unit!r}")
            records.append(
                PhaseLogRecord(
                    tag_id=row[col["tag_id"]].strip(),
                    ant_x=_parse_float(row[col["ant_x"]], "ant_x", lineno),
                    ant_y=_parse_float(row[col["ant_y"]], "ant_y", lineno),
                    ant_z=_parse_float(row[col["ant_z"]], "ant_z", lineno),
                    freq_hz=_parse_float(row[col["freq_hz"]], "freq_hz", lineno),
                    phase_raw=_parse_float(row[col["phase"]], "phase", lineno),
                    phase_unit=unit,
                    timestamp=row[col["timestamp"]].strip() if "timestamp" in col else None,
                    lineno=lineno,
                )
            )
    return records


def ingest_log(
    path: str | Path,
    sign_flip: bool = False,
    unit: str | None = None,
    sigma_default: float | None = None,
    auto_wrap: bool = False,
) -> dict[str, list[PhaseSample]]:
    """Load a phase log into per-tag PhaseSample lists, in record order.

    Unit conversion happens first; a converted phase outside [0, 2*pi) is
    rejected with its line number unless auto_wrap folds it.  sign_flip
    then maps phase -> wrap(-phase) for readers reporting the conjugate
    convention.
    """
    records = read_log_records(path, unit_override=unit)
    out: dict[str, list[PhaseSample]] = {}
    for rec in records:
        phase = rec.phase_raw * TICK_RADIANS if rec.phase_unit == "ticks" else rec.phase_raw
        if not (0.0 <= phase < TWO_PI):
            if not auto_wrap:
                raise LogFormatError(
                    f"line {rec.lineno}: phase {phase!r} outside [0, 2*pi); "
                    "pass auto_wrap to fold it"
                )
            phase = wrap_2pi(phase)
        if sign_flip:
            phase = wrap_2pi(-phase)
        samples = out.setdefault(rec.tag_id, [])
        samples.append(
            PhaseSample(
                antenna_pose=Position3D(rec.ant_x, rec.ant_y, rec.ant_z),
                carrier=CarrierConfig(frequency=rec.freq_hz),
                phase_wrapped=phase,
                sample_index=len(samples),
                tag_id=rec.tag_id,
                sigma_hint=sigma_default,
            )
        )
    return out
