"""Measurement table types, CSV ingestion and validation of the RQT space."""

from __future__ import annotations

import csv
import io
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, fields
from enum import Enum
from typing import Iterable

log = logging.getLogger(__name__)

DEFAULT_RESOLUTIONS: tuple[int, ...] = (360, 540, 720, 1080, 1440, 2160)
DEFAULT_QPS: tuple[int, ...] = tuple(range(10, 51, 2))
DEFAULT_TARGETS_KBPS: tuple[float, ...] = (
    145.0, 300.0, 600.0, 900.0, 1600.0, 2400.0,
    3400.0, 4500.0, 5800.0, 8100.0, 11600.0, 16800.0,
)

CSV_COLUMNS = (
    "sequence_id", "resolution", "qp", "bitrate_kbps", "psnr_db",
    "xpsnr_db", "vmaf", "decode_time_s", "decode_energy_j",
)


class LadderError(Exception):
    """Base class for errors raised by this package."""


class MeasurementError(LadderError, ValueError):
    """A measurement row or table violates the ingestion contract."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class MissingMetricError(LadderError, KeyError):
    """An operation needs a quality (or energy) field that is absent."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing metric"


class QualityMetric(str, Enum):
    PSNR = "psnr"
    XPSNR = "xpsnr"
    VMAF = "vmaf"

    @classmethod
    def parse(cls, value: "str | QualityMetric") -> "QualityMetric":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ValueError(f"unknown quality metric {value!r}; expected one of "
                             f"{', '.join(m.value for m in cls)}") from None

    @property
    def label(self) -> str:
        return {"psnr": "PSNR", "xpsnr": "XPSNR", "vmaf": "VMAF"}[self.value]


@dataclass(frozen=True, slots=True)
class MeasurementPoint:
    """One encoded representation (resolution, QP) and what was measured on it."""

    sequence_id: str
    resolution: int
    qp: int
    bitrate: float
    decode_time: float
    psnr: float | None = None
    xpsnr: float | None = None
    vmaf: float | None = None
    decode_energy: float | None = None

    def __post_init__(self):
        if not (self.bitrate > 0 and math.isfinite(self.bitrate)):
            raise MeasurementError(f"bitrate must be positive, got {self.bitrate!r}")
        if not (self.decode_time > 0 and math.isfinite(self.decode_time)):
            raise MeasurementError(f"decode_time must be positive, got {self.decode_time!r}")
        if self.decode_energy is not None and not (
                self.decode_energy > 0 and math.isfinite(self.decode_energy)):
            raise MeasurementError(f"decode_energy must be positive, got {self.decode_energy!r}")
        if self.vmaf is not None and not 0.0 <= self.vmaf <= 100.0:
            raise MeasurementError(f"vmaf must lie in [0, 100], got {self.vmaf!r}")
        if self.psnr is None and self.xpsnr is None and self.vmaf is None:
            raise MeasurementError("at least one quality score is required")

    @property
    def key(self) -> tuple[int, int]:
        return (self.resolution, self.qp)

    def quality(self, metric: QualityMetric | str) -> float:
        metric = QualityMetric.parse(metric)
        value = getattr(self, metric.value)
        if value is None:
            raise MissingMetricError(
                f"{metric.label} missing for sequence {self.sequence_id} "
                f"at {self.resolution}p QP{self.qp}")
        return value

    def has(self, metric: QualityMetric | str) -> bool:
        return getattr(self, QualityMetric.parse(metric).value) is not None


def tie_key(point: MeasurementPoint) -> tuple:
    """Preference order among otherwise equivalent points: cheaper to decode first."""
    return (point.decode_time, point.bitrate, point.resolution, -point.qp)


@dataclass(frozen=True)
class ParameterSpace:
    sequence_id: str
    points: tuple[MeasurementPoint, ...]
    resolutions: tuple[int, ...] = DEFAULT_RESOLUTIONS
    qps: tuple[int, ...] = DEFAULT_QPS

    def __post_init__(self):
        seen = set()
        for p in self.points:
            if p.key in seen:
                raise MeasurementError(
                    f"duplicate (resolution, qp) = {p.key} in sequence {self.sequence_id}")
            seen.add(p.key)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def at_resolution(self, resolution: int) -> list[MeasurementPoint]:
        return [p for p in self.points if p.resolution == resolution]

    def require(self, metric: QualityMetric | str) -> None:
        metric = QualityMetric.parse(metric)
        missing = [p for p in self.points if not p.has(metric)]
        if missing:
            raise MissingMetricError(
                f"{metric.label} missing on {len(missing)} of {len(self.points)} points "
                f"in sequence {self.sequence_id}")

    def map(self, **scale: float) -> "ParameterSpace":
        """Copy with every point's bitrate/decode_time/decode_energy multiplied."""
        out = []
        for p in self.points:
            kw = {}
            for name, c in scale.items():
                v = getattr(p, name)
                kw[name] = None if v is None else v * c
            out.append(_replace(p, **kw))
        return ParameterSpace(self.sequence_id, tuple(out), self.resolutions, self.qps)


def _replace(point: MeasurementPoint, **changes) -> MeasurementPoint:
    values = {f.name: getattr(point, f.name) for f in fields(point)}
    values.update(changes)
    return MeasurementPoint(**values)


@dataclass(frozen=True)
class TargetBitrateSet:
    targets: tuple[float, ...] = DEFAULT_TARGETS_KBPS

    def __post_init__(self):
        t = tuple(float(x) for x in self.targets)
        object.__setattr__(self, "targets", t)
        if not t:
            raise ValueError("at least one target bitrate is required")
        if any(not (x > 0 and math.isfinite(x)) for x in t):
            raise ValueError("target bitrates must be positive")
        if any(b <= a for a, b in zip(t, t[1:])):
            raise ValueError("target bitrates must be strictly increasing")

    def __iter__(self):
        return iter(self.targets)

    def __len__(self) -> int:
        return len(self.targets)

    @classmethod
    def parse(cls, text: str) -> "TargetBitrateSet":
        return cls(tuple(float(x) for x in text.split(",") if x.strip()))

    def scaled(self, c: float) -> "TargetBitrateSet":
        return TargetBitrateSet(tuple(x * c for x in self.targets))


@dataclass
class ValidationOptions:
    strict: bool = False
    resolutions: tuple[int, ...] = DEFAULT_RESOLUTIONS
    qps: tuple[int, ...] = DEFAULT_QPS


@dataclass(frozen=True)
class Finding:
    severity: str  # "warning" | "error"
    code: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.message}"


def _optional_float(cell: str | None, name: str, row: int) -> float | None:
    if cell is None or cell.strip() == "":
        return None
    try:
        return float(cell)
    except ValueError:
        raise MeasurementError(f"column {name}: not a number: {cell!r}", row) from None


def _required(cell: str | None, name: str, row: int, conv=float):
    if cell is None or cell.strip() == "":
        raise MeasurementError(f"column {name} is empty", row)
    try:
        if conv is int:
            value = float(cell)
            if not value.is_integer():
                raise ValueError
            return int(value)
        return conv(cell)
    except ValueError:
        raise MeasurementError(f"column {name}: cannot parse {cell!r}", row) from None


def parse_measurements(
    csv_text: str, options: ValidationOptions | None = None
) -> dict[str, ParameterSpace]:
    """Parse a measurement CSV into one :class:`ParameterSpace` per sequence.

    Row numbers in errors count the header as row 1. Rates given in a
    ``bitrate_mbps`` column are converted to kbps.
    """
    options = options or ValidationOptions()
    reader = csv.DictReader(io.StringIO(csv_text))
    header = [h.strip() for h in (reader.fieldnames or [])]
    reader.fieldnames = header
    required = {"sequence_id", "resolution", "qp", "decode_time_s"}
    missing = required - set(header)
    if missing:
        raise MeasurementError(f"missing required columns: {', '.join(sorted(missing))}", 1)
    if "bitrate_kbps" in header:
        rate_col, rate_scale = "bitrate_kbps", 1.0
    elif "bitrate_mbps" in header:
        rate_col, rate_scale = "bitrate_mbps", 1000.0
    else:
        raise MeasurementError("missing bitrate column (bitrate_kbps or bitrate_mbps)", 1)

    grid_r, grid_q = set(options.resolutions), set(options.qps)
    grouped: dict[str, list[MeasurementPoint]] = defaultdict(list)
    keys: dict[str, dict[tuple[int, int], int]] = defaultdict(dict)
    for rowno, rec in enumerate(reader, start=2):
        if None in rec:
            raise MeasurementError("more cells than header columns", rowno)
        seq = (rec.get("sequence_id") or "").strip()
        if not seq:
            raise MeasurementError("column sequence_id is empty", rowno)
        resolution = _required(rec.get("resolution"), "resolution", rowno, int)
        qp = _required(rec.get("qp"), "qp", rowno, int)
        try:
            point = MeasurementPoint(
                sequence_id=seq,
                resolution=resolution,
                qp=qp,
                bitrate=_required(rec.get(rate_col), rate_col, rowno) * rate_scale,
                decode_time=_required(rec.get("decode_time_s"), "decode_time_s", rowno),
                psnr=_optional_float(rec.get("psnr_db"), "psnr_db", rowno),
                xpsnr=_optional_float(rec.get("xpsnr_db"), "xpsnr_db", rowno),
                vmaf=_optional_float(rec.get("vmaf"), "vmaf", rowno),
                decode_energy=_optional_float(rec.get("decode_energy_j"), "decode_energy_j", rowno),
            )
        except MeasurementError as exc:
            if exc.row is not None:
                raise
            raise MeasurementError(str(exc), rowno) from None
        if point.key in keys[seq]:
            raise MeasurementError(
                f"duplicate (resolution, qp) = {point.key} for sequence {seq} "
                f"(first seen on row {keys[seq][point.key]})", rowno)
        if resolution not in grid_r or qp not in grid_q:
            if options.strict:
                raise MeasurementError(
                    f"(resolution, qp) = {point.key} outside the configured grid", rowno)
            log.warning("row %d: (resolution, qp) = %s outside the configured grid",
                        rowno, point.key)
        keys[seq][point.key] = rowno
        grouped[seq].append(point)

    return {
        seq: ParameterSpace(seq, tuple(pts), tuple(options.resolutions), tuple(options.qps))
        for seq, pts in sorted(grouped.items())
    }


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def to_csv(spaces: Iterable[ParameterSpace]) -> str:
    """Serialize spaces in the ingestion format (kbps). Floats use shortest round-trip repr."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for space in spaces:
        for p in space.points:
            writer.writerow([
                p.sequence_id, p.resolution, p.qp, _fmt(float(p.bitrate)), _fmt(p.psnr),
                _fmt(p.xpsnr), _fmt(p.vmaf), _fmt(float(p.decode_time)), _fmt(p.decode_energy),
            ])
    return buf.getvalue()


def validate_space(space: ParameterSpace) -> list[Finding]:
    """Report quality gaps, empty resolutions, off-grid points and rate-vs-QP anomalies."""
    findings: list[Finding] = []
    if not space.points:
        findings.append(Finding("error", "empty", f"sequence {space.sequence_id} has no points"))
        return findings
    n = len(space.points)
    for metric in QualityMetric:
        have = sum(p.has(metric) for p in space.points)
        if have == 0:
            findings.append(Finding("warning", "metric-unavailable",
                                    f"{metric.label} unavailable"))
        elif have < n:
            findings.append(Finding("warning", "metric-partial",
                                    f"{metric.label} missing on {n - have} of {n} points"))
    energy = sum(p.decode_energy is not None for p in space.points)
    if 0 < energy < n:
        findings.append(Finding("warning", "energy-partial",
                                f"decode energy missing on {n - energy} of {n} points"))

    present = {p.resolution for p in space.points}
    for r in space.resolutions:
        if r not in present:
            findings.append(Finding("warning", "empty-resolution", f"no points at {r}p"))
    grid_r, grid_q = set(space.resolutions), set(space.qps)
    off = [p.key for p in space.points if p.resolution not in grid_r or p.qp not in grid_q]
    if off:
        findings.append(Finding("warning", "off-grid",
                                f"{len(off)} point(s) outside the configured grid, e.g. {off[0]}"))

    for r in sorted(present):
        pts = sorted(space.at_resolution(r), key=lambda p: p.qp)
        for lo, hi in zip(pts, pts[1:]):
            if hi.bitrate >= lo.bitrate:
                findings.append(Finding(
                    "warning", "rate-qp-anomaly",
                    f"{r}p: bitrate {hi.bitrate:g} kbps at QP{hi.qp} is not below "
                    f"{lo.bitrate:g} kbps at QP{lo.qp}"))
    return findings


def read_pairs(text: str) -> dict[float, int]:
    """Parse a ``target_kbps,resolution`` CSV into a target -> resolution map."""
    reader = csv.DictReader(io.StringIO(text))
    if not reader.fieldnames or {"target_kbps", "resolution"} - set(reader.fieldnames):
        raise MeasurementError("pairs file needs columns target_kbps,resolution", 1)
    pairs = {}
    for rowno, rec in enumerate(reader, start=2):
        pairs[_required(rec["target_kbps"], "target_kbps", rowno)] = _required(
            rec["resolution"], "resolution", rowno, int)
    return pairs


def default_pairs() -> dict[float, int]:
    from importlib.resources import files

    return read_pairs(files("rqtladder").joinpath("data/fixed_pairs.csv").read_text())
