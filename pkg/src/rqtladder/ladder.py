"""Bitrate ladder construction from fronts, plus the benchmark ladders."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Mapping

from .model import (
    LadderError,
    MeasurementPoint,
    ParameterSpace,
    QualityMetric,
    TargetBitrateSet,
    tie_key,
)
from .pareto import FrontPoint, ParetoFront, Strategy

MONOTONIC_STRATEGIES = ("jqt", "jrqt", "dynres", "fixed", "default", "timecap")
STRATEGIES = MONOTONIC_STRATEGIES + ("jrqt-nonmono",)


@dataclass(frozen=True)
class Rung:
    target_bitrate: float
    point: MeasurementPoint
    quality: float
    carried: bool = False
    overshoot: bool = False

    @property
    def achieved_bitrate(self) -> float:
        return self.point.bitrate

    @property
    def resolution(self) -> int:
        return self.point.resolution

    @property
    def qp(self) -> int:
        return self.point.qp

    @property
    def decode_time(self) -> float:
        return self.point.decode_time

    @property
    def decode_energy(self) -> float | None:
        return self.point.decode_energy

    def to_dict(self) -> dict:
        p = self.point
        d = {
            "target_kbps": self.target_bitrate,
            "achieved_kbps": p.bitrate,
            "resolution": p.resolution,
            "qp": p.qp,
            "quality": self.quality,
            "decode_time_s": p.decode_time,
        }
        if p.decode_energy is not None:
            d["decode_energy_j"] = p.decode_energy
        d["carried"] = self.carried
        if self.overshoot:
            d["overshoot"] = True
        # all available scores, so ladders can be compared under any metric
        for name, key in (("psnr", "psnr_db"), ("xpsnr", "xpsnr_db"), ("vmaf", "vmaf")):
            if getattr(p, name) is not None:
                d[key] = getattr(p, name)
        return d

    @classmethod
    def from_dict(cls, d: Mapping, sequence_id: str) -> "Rung":
        point = MeasurementPoint(
            sequence_id=sequence_id,
            resolution=int(d["resolution"]),
            qp=int(d["qp"]),
            bitrate=float(d["achieved_kbps"]),
            decode_time=float(d["decode_time_s"]),
            psnr=d.get("psnr_db"),
            xpsnr=d.get("xpsnr_db"),
            vmaf=d.get("vmaf"),
            decode_energy=d.get("decode_energy_j"),
        )
        return cls(float(d["target_kbps"]), point, float(d["quality"]),
                   bool(d.get("carried", False)), bool(d.get("overshoot", False)))


@dataclass(frozen=True)
class Ladder:
    sequence_id: str
    strategy: str
    metric: QualityMetric
    rungs: tuple[Rung, ...]
    params: dict = field(default_factory=dict)
    omitted_targets: tuple[float, ...] = ()

    def __len__(self) -> int:
        return len(self.rungs)

    def __iter__(self):
        return iter(self.rungs)

    @property
    def monotonic(self) -> bool:
        return not self.strategy.endswith("-nonmono")

    def qualities(self) -> list[float]:
        return [r.quality for r in self.rungs]

    def representations(self) -> list[tuple[float, int, int]]:
        return [(r.target_bitrate, r.resolution, r.qp) for r in self.rungs]

    def check(self) -> list[str]:
        """Violations of rate ordering and, for monotonic strategies, quality ordering."""
        problems = []
        t = [r.target_bitrate for r in self.rungs]
        if any(b <= a for a, b in zip(t, t[1:])):
            problems.append("target bitrates not strictly increasing")
        if self.monotonic:
            q = self.qualities()
            for i, (a, b) in enumerate(zip(q, q[1:]), start=2):
                if b < a:
                    problems.append(f"rung {i} quality {b} below rung {i - 1} quality {a}")
        return problems

    def to_dict(self) -> dict:
        return {
            "sequence_id": self.sequence_id,
            "strategy": self.strategy,
            "metric": self.metric.value,
            "params": dict(self.params),
            "rungs": [r.to_dict() for r in self.rungs],
            "omitted_targets": list(self.omitted_targets),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: Mapping) -> "Ladder":
        seq = str(d["sequence_id"])
        return cls(
            sequence_id=seq,
            strategy=str(d["strategy"]),
            metric=QualityMetric.parse(d["metric"]),
            rungs=tuple(Rung.from_dict(r, seq) for r in d.get("rungs", ())),
            params=dict(d.get("params", {})),
            omitted_targets=tuple(float(x) for x in d.get("omitted_targets", ())),
        )

    @classmethod
    def from_json(cls, text: str) -> "Ladder":
        return cls.from_dict(json.loads(text))


def _selection_key(front: ParetoFront):
    # sorts best-first
    if front.strategy is Strategy.JQT:
        return lambda fp: (-fp.objective, fp.point.bitrate, tie_key(fp.point))
    return lambda fp: (-fp.quality, fp.objective, tie_key(fp.point))


def build_ladder(front: ParetoFront, targets: TargetBitrateSet,
                 monotonic: bool = True) -> Ladder:
    """Sample a front at each target: the best front point whose bitrate fits the budget.

    With ``monotonic`` set, candidates below the previous rung's quality are
    discarded; if none remain, the previous representation is carried over.
    Targets reached before any point fits are omitted.
    """
    if not front.points:
        raise LadderError("cannot build a ladder from an empty front")
    key = _selection_key(front)
    rungs: list[Rung] = []
    omitted: list[float] = []
    for target in targets:
        cands = [fp for fp in front.points if fp.point.bitrate <= target]
        if monotonic and rungs:
            cands = [fp for fp in cands if fp.quality >= rungs[-1].quality]
        if cands:
            best: FrontPoint = min(cands, key=key)
            rungs.append(Rung(target, best.point, best.quality))
        elif rungs:
            rungs.append(replace(rungs[-1], target_bitrate=target, carried=True, overshoot=False))
        else:
            omitted.append(target)

    strategy = front.strategy.value
    if strategy == "rq":
        strategy = "dynres"
    if not monotonic:
        strategy += "-nonmono"
    params = front.params.as_dict() if front.params is not None else {}
    return Ladder(front.points[0].point.sequence_id, strategy, front.metric,
                  tuple(rungs), params, tuple(omitted))


def enforce_quality_monotonicity(rungs) -> list[Rung]:
    """Replace every rung whose quality dips below its predecessor by a carry of it."""
    out: list[Rung] = []
    for r in rungs:
        if out and r.quality < out[-1].quality:
            r = replace(out[-1], target_bitrate=r.target_bitrate, carried=True, overshoot=False)
        out.append(r)
    return out


def _prepare(space: ParameterSpace, metric: QualityMetric | str) -> QualityMetric:
    metric = QualityMetric.parse(metric)
    if not space.points:
        raise LadderError(f"sequence {space.sequence_id}: empty parameter space")
    space.require(metric)
    return metric


def ladder_fixed(space: ParameterSpace, targets: TargetBitrateSet, pairs: Mapping[float, int],
                 metric: QualityMetric | str = QualityMetric.XPSNR, *,
                 monotonic: bool = True, pairs_name: str = "custom") -> Ladder:
    """One pinned resolution per target; the highest bitrate at that resolution within budget.

    Falls back to the cheapest point at the pinned resolution (flagged as
    overshoot) when nothing fits.
    """
    metric = _prepare(space, metric)
    pins = {float(k): int(v) for k, v in pairs.items()}
    rungs = []
    for target in targets:
        if target not in pins:
            raise LadderError(f"no pinned resolution for target {target:g} kbps")
        res = pins[target]
        pts = space.at_resolution(res)
        if not pts:
            raise LadderError(f"sequence {space.sequence_id}: pinned resolution {res}p absent")
        fits = [p for p in pts if p.bitrate <= target]
        if fits:
            best = min(fits, key=lambda p: (-p.bitrate, tie_key(p)))
            rungs.append(Rung(target, best, best.quality(metric)))
        else:
            best = min(pts, key=lambda p: (p.bitrate, tie_key(p)))
            rungs.append(Rung(target, best, best.quality(metric), overshoot=True))
    if monotonic:
        rungs = enforce_quality_monotonicity(rungs)
    return Ladder(space.sequence_id, "fixed", metric, tuple(rungs), {"pairs": pairs_name})


def ladder_default(space: ParameterSpace, targets: TargetBitrateSet,
                   metric: QualityMetric | str = QualityMetric.XPSNR, *,
                   monotonic: bool = True) -> Ladder:
    """Every rung at the top configured resolution; targets nothing fits are omitted."""
    metric = _prepare(space, metric)
    top = max(space.resolutions)
    pts = space.at_resolution(top)
    if not pts:
        raise LadderError(f"sequence {space.sequence_id}: top resolution {top}p absent")
    rungs, omitted = [], []
    for target in targets:
        fits = [p for p in pts if p.bitrate <= target]
        if not fits:
            omitted.append(target)
            continue
        best = min(fits, key=lambda p: (-p.bitrate, tie_key(p)))
        rungs.append(Rung(target, best, best.quality(metric)))
    if monotonic:
        rungs = enforce_quality_monotonicity(rungs)
    return Ladder(space.sequence_id, "default", metric, tuple(rungs),
                  {"resolution": top}, tuple(omitted))


def _best_quality_ladder(space, targets, metric, points, strategy, params) -> Ladder:
    rungs, omitted = [], []
    for target in targets:
        fits = [p for p in points if p.bitrate <= target]
        if not fits:
            omitted.append(target)
            continue
        best = min(fits, key=lambda p: (-p.quality(metric), p.bitrate, tie_key(p)))
        rungs.append(Rung(target, best, best.quality(metric)))
    return Ladder(space.sequence_id, strategy, metric, tuple(rungs), params, tuple(omitted))


def ladder_dynres(space: ParameterSpace, targets: TargetBitrateSet,
                  metric: QualityMetric | str) -> Ladder:
    """Highest-quality representation within each budget, any resolution."""
    metric = _prepare(space, metric)
    return _best_quality_ladder(space, targets, metric, space.points, "dynres", {})


def ladder_time_capped(space: ParameterSpace, targets: TargetBitrateSet,
                       metric: QualityMetric | str, tau_limit: float) -> Ladder:
    """As :func:`ladder_dynres`, restricted to points decoding within ``tau_limit`` seconds."""
    if not tau_limit > 0:
        raise ValueError(f"tau_limit must be positive, got {tau_limit!r}")
    metric = _prepare(space, metric)
    allowed = [p for p in space.points if p.decode_time <= tau_limit]
    params = {"tau_limit": tau_limit if math.isfinite(tau_limit) else None}
    return _best_quality_ladder(space, targets, metric, allowed, "timecap", params)
