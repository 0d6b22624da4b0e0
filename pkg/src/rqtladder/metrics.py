"""Bjontegaard-delta metrics, decode-time delta, correlation and ladder comparison."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from scipy.interpolate import PchipInterpolator

from .ladder import Ladder
from .model import LadderError, QualityMetric


class BdError(LadderError):
    """A BD computation cannot be carried out for the given curves."""


@dataclass(frozen=True)
class RqCurve:
    """Paired (rate, quality) samples.

    For ``axis="energy"`` the first coordinate holds decode energy in joules
    instead of a bitrate; the BD mechanics are the same.
    """

    rates: tuple[float, ...]
    qualities: tuple[float, ...]
    axis: str = "quality"

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(float(x) for x in self.rates))
        object.__setattr__(self, "qualities", tuple(float(x) for x in self.qualities))
        if len(self.rates) != len(self.qualities):
            raise ValueError("rates and qualities differ in length")
        if self.axis not in ("quality", "energy"):
            raise ValueError(f"unknown axis {self.axis!r}")
        if any(not (r > 0 and math.isfinite(r)) for r in self.rates):
            raise ValueError("rates must be positive and finite")

    @classmethod
    def from_pairs(cls, pairs, axis: str = "quality") -> "RqCurve":
        pairs = list(pairs)
        return cls(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs), axis)

    def __len__(self) -> int:
        return len(self.rates)

    def filtered(self) -> tuple["RqCurve", int]:
        """Keep only points that raise quality over every cheaper point.

        Returns the filtered curve (rates and qualities both strictly
        increasing) and the number of dropped samples.
        """
        order = sorted(zip(self.rates, self.qualities), key=lambda rq: (rq[0], -rq[1]))
        kept = []
        for r, q in order:
            if not kept or q > kept[-1][1]:
                if kept and r == kept[-1][0]:
                    continue
                kept.append((r, q))
        return RqCurve.from_pairs(kept, self.axis), len(self) - len(kept)


@dataclass(frozen=True)
class BdResult:
    value: float
    degraded: bool  # fewer than 4 usable points on either curve
    dropped: int  # samples removed by the monotone filter, both curves


class _Fit:
    """Interpolant with a closed-form definite integral."""

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.degraded = len(x) < 4
        if len(x) == 3:
            self._poly = np.polynomial.Polynomial.fit(x, y, 2).convert()
            self._anti = self._poly.integ()
            self._pchip = None
        else:
            self._pchip = PchipInterpolator(x, y, extrapolate=False)

    def integrate(self, a: float, b: float) -> float:
        if self._pchip is not None:
            return float(self._pchip.integrate(a, b))
        return float(self._anti(b) - self._anti(a))

    def __call__(self, x):
        if self._pchip is not None:
            return self._pchip(x)
        return self._poly(x)


def _usable(curve: RqCurve) -> tuple[RqCurve, int]:
    filt, dropped = curve.filtered()
    if len(filt) < 2:
        raise BdError(f"need at least 2 usable points, got {len(filt)}")
    return filt, dropped


def _mean_gap(x_t, y_t, x_r, y_r) -> tuple[float, bool]:
    lo = max(x_t[0], x_r[0])
    hi = min(x_t[-1], x_r[-1])
    if not hi > lo:
        raise BdError("curves do not overlap")
    ft, fr = _Fit(x_t, y_t), _Fit(x_r, y_r)
    gap = (ft.integrate(lo, hi) - fr.integrate(lo, hi)) / (hi - lo)
    return float(gap), ft.degraded or fr.degraded


def _rate_delta(test: RqCurve, reference: RqCurve) -> BdResult:
    t, dt = _usable(test)
    r, dr = _usable(reference)
    gap, degraded = _mean_gap(np.array(t.qualities), np.log10(t.rates),
                              np.array(r.qualities), np.log10(r.rates))
    return BdResult(100.0 * (10.0 ** gap - 1.0), degraded, dt + dr)


def bd_rate_detail(test: RqCurve, reference: RqCurve) -> BdResult:
    if test.axis != "quality" or reference.axis != "quality":
        raise BdError("bd_rate expects rate-quality curves")
    return _rate_delta(test, reference)


def bd_quality_detail(test: RqCurve, reference: RqCurve) -> BdResult:
    t, dt = _usable(test)
    r, dr = _usable(reference)
    gap, degraded = _mean_gap(np.log10(t.rates), np.array(t.qualities),
                              np.log10(r.rates), np.array(r.qualities))
    return BdResult(gap, degraded, dt + dr)


def bdde_detail(test: RqCurve, reference: RqCurve) -> BdResult:
    if test.axis != "energy" or reference.axis != "energy":
        raise BdError("bdde expects energy-quality curves")
    return _rate_delta(test, reference)


def bd_rate(test: RqCurve, reference: RqCurve) -> float:
    """Average bitrate change (percent) at equal quality; negative means savings."""
    return bd_rate_detail(test, reference).value


def bd_quality(test: RqCurve, reference: RqCurve) -> float:
    """Average quality change at equal log-rate; positive means a gain."""
    return bd_quality_detail(test, reference).value


def bdde(test: RqCurve, reference: RqCurve) -> float:
    """Average decode-energy change (percent) at equal quality."""
    return bdde_detail(test, reference).value


def delta_decode_time(method_times: Sequence[float], reference_times: Sequence[float]) -> float:
    ref = math.fsum(reference_times)
    if not ref > 0:
        raise ValueError(f"reference decode-time sum must be positive, got {ref!r}")
    return 100.0 * (math.fsum(method_times) - ref) / ref


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson coefficient.

    Sums run in exact rational arithmetic and only r**2 and its root are
    rounded, so linearly related inputs give exactly +-1.0 rather than a
    value a few ulps short.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ValueError("pearson needs two equal-length sequences of at least 2 values")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("pearson needs finite values")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("pearson is undefined for a constant sequence")
    fx = [Fraction(float(v)) for v in x]
    fy = [Fraction(float(v)) for v in y]
    mx, my = sum(fx) / len(fx), sum(fy) / len(fy)
    dx = [v - mx for v in fx]
    dy = [v - my for v in fy]
    sxy = sum(a * b for a, b in zip(dx, dy))
    r2 = sxy * sxy / (sum(a * a for a in dx) * sum(b * b for b in dy))
    return math.copysign(min(1.0, math.sqrt(float(r2))), float(sxy)) if sxy else 0.0


# -- ladder comparison -----------------------------------------------------

_QUALITY_FIELDS = {
    QualityMetric.PSNR: ("bdr_psnr", "bd_psnr"),
    QualityMetric.XPSNR: ("bdr_xpsnr", "bd_xpsnr"),
    QualityMetric.VMAF: ("bdr_vmaf", "bd_vmaf"),
}
FIELDS = ("bdr_psnr", "bdr_xpsnr", "bdr_vmaf", "bd_psnr", "bd_xpsnr", "bd_vmaf",
          "bdde", "delta_t_d")
_ENERGY_AXIS_ORDER = (QualityMetric.XPSNR, QualityMetric.PSNR, QualityMetric.VMAF)


@dataclass
class SequenceComparison:
    sequence_id: str
    values: dict[str, float | None]
    degraded: list[str] = field(default_factory=list)
    dropped: int = 0

    def to_dict(self) -> dict:
        d = {"sequence_id": self.sequence_id}
        d.update({k: self.values.get(k) for k in FIELDS})
        d["degraded"] = list(self.degraded)
        d["dropped_points"] = self.dropped
        return d


@dataclass
class ComparisonReport:
    method: dict
    reference: dict
    sequences: list[SequenceComparison]
    aggregate: dict[str, dict]
    failures: list[dict]
    notes: list[str] = field(default_factory=list)
    method_rungs: list[dict] = field(default_factory=list)

    def mean(self, name: str) -> float | None:
        return self.aggregate[name]["mean"]

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "reference": self.reference,
            "sequences": [s.to_dict() for s in self.sequences],
            "aggregate": self.aggregate,
            "failures": self.failures,
            "notes": self.notes,
            "method_rungs": self.method_rungs,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["sequence_id", "metric", "value"])
        for s in self.sequences:
            for k in FIELDS:
                v = s.values.get(k)
                w.writerow([s.sequence_id, k, "" if v is None else repr(v)])
        return buf.getvalue()


def ladder_label(ladder: Ladder) -> dict:
    return {"strategy": ladder.strategy, "metric": ladder.metric.value,
            "params": dict(ladder.params)}


def _curve(ladder: Ladder, metric: QualityMetric) -> RqCurve | None:
    pts = [r.point for r in ladder.rungs]
    if not pts or not all(p.has(metric) for p in pts):
        return None
    return RqCurve.from_pairs((p.bitrate, p.quality(metric)) for p in pts)


def _energy_curve(ladder: Ladder, metric: QualityMetric) -> RqCurve | None:
    pts = [r.point for r in ladder.rungs]
    if not pts or any(p.decode_energy is None or not p.has(metric) for p in pts):
        return None
    return RqCurve.from_pairs(((p.decode_energy, p.quality(metric)) for p in pts), "energy")


def compare_sequence(method: Ladder, reference: Ladder,
                     failures: list[dict], notes: list[str]) -> SequenceComparison:
    seq = method.sequence_id
    values: dict[str, float | None] = dict.fromkeys(FIELDS)
    degraded: list[str] = []
    dropped = 0

    def run(name, fn, a, b):
        nonlocal dropped
        try:
            res = fn(a, b)
        except (BdError, ValueError) as exc:
            failures.append({"sequence_id": seq, "metric": name, "reason": str(exc)})
            return
        values[name] = res.value
        dropped += res.dropped
        if res.degraded:
            degraded.append(name)

    for metric, (rate_name, quality_name) in _QUALITY_FIELDS.items():
        a, b = _curve(method, metric), _curve(reference, metric)
        if a is None or b is None:
            notes.append(f"{seq}: {metric.label} unavailable, {rate_name}/{quality_name} null")
            continue
        run(rate_name, bd_rate_detail, a, b)
        run(quality_name, bd_quality_detail, a, b)

    axis = next((m for m in _ENERGY_AXIS_ORDER
                 if _energy_curve(method, m) is not None
                 and _energy_curve(reference, m) is not None), None)
    if axis is None:
        notes.append(f"{seq}: decode energy unavailable, bdde null")
    else:
        run("bdde", bdde_detail, _energy_curve(method, axis), _energy_curve(reference, axis))

    try:
        values["delta_t_d"] = delta_decode_time([r.decode_time for r in method.rungs],
                                                [r.decode_time for r in reference.rungs])
    except ValueError as exc:
        failures.append({"sequence_id": seq, "metric": "delta_t_d", "reason": str(exc)})
    return SequenceComparison(seq, values, degraded, dropped)


def compare(method_ladders: Mapping[str, Ladder],
            reference_ladders: Mapping[str, Ladder]) -> ComparisonReport:
    """Compare a method's ladders to reference ladders sequence by sequence."""
    common = sorted(set(method_ladders) & set(reference_ladders))
    if not common:
        raise LadderError("method and reference ladders share no sequence ids")
    failures: list[dict] = []
    notes: list[str] = []
    only = sorted(set(method_ladders) ^ set(reference_ladders))
    if only:
        notes.append(f"{len(only)} sequence(s) present on one side only: {', '.join(only)}")
    records = [compare_sequence(method_ladders[s], reference_ladders[s], failures, notes)
               for s in common]

    aggregate = {}
    for name in FIELDS:
        vals = [r.values[name] for r in records if r.values[name] is not None]
        aggregate[name] = {"mean": math.fsum(vals) / len(vals) if vals else None,
                           "count": len(vals)}

    first_m, first_r = method_ladders[common[0]], reference_ladders[common[0]]
    rungs = []
    for s in common:
        for i, r in enumerate(method_ladders[s].rungs, start=1):
            row = {"sequence_id": s, "rung": i}
            row.update(r.to_dict())
            rungs.append(row)
    return ComparisonReport(ladder_label(first_m), ladder_label(first_r), records,
                            aggregate, failures, notes, rungs)
