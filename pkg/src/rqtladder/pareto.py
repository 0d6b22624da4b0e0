"""Dominance relations and 2-D non-dominated set extraction."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

from .model import LadderError, MeasurementPoint, ParameterSpace, QualityMetric, tie_key
from .objective import JqtParams, MParams, compute_j, compute_m


class Strategy(str, Enum):
    JQT = "jqt"
    JRQT = "jrqt"
    RQ = "rq"  # plain rate-quality hull, objective is the bitrate
    QT = "qt"  # quality-decode-time hull, objective is the decode time


@dataclass(frozen=True)
class FrontPoint:
    point: MeasurementPoint
    objective: float
    quality: float


@dataclass(frozen=True)
class ParetoFront:
    strategy: Strategy
    params: JqtParams | MParams | None
    metric: QualityMetric
    points: tuple[FrontPoint, ...]

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def keys(self) -> set[tuple[int, int]]:
        return {fp.point.key for fp in self.points}

    def to_records(self) -> list[dict]:
        return [
            {
                "resolution": fp.point.resolution,
                "qp": fp.point.qp,
                "bitrate_kbps": fp.point.bitrate,
                "quality": fp.quality,
                "objective": fp.objective,
                "decode_time_s": fp.point.decode_time,
            }
            for fp in self.points
        ]

    def to_json(self) -> str:
        return json.dumps(self.to_records(), indent=2) + "\n"


def dominates_jqt(a: tuple[float, float], c: tuple[float, float]) -> bool:
    """``a = (J, b)`` dominates ``c``: J no lower, bitrate no higher, one strictly."""
    ja, ba = a
    jc, bc = c
    return ja >= jc and ba <= bc and (ja > jc or ba < bc)


def dominates_jrqt(a: tuple[float, float], c: tuple[float, float]) -> bool:
    """``a = (M, v)`` dominates ``c``: M no higher, quality no lower, one strictly."""
    ma, va = a
    mc, vc = c
    return ma <= mc and va >= vc and (ma < mc or va > vc)


def skyline(items: Iterable, cost: Callable, gain: Callable, tiebreak: Callable) -> list:
    """Items not dominated under (minimise ``cost``, maximise ``gain``).

    Items with identical (cost, gain) collapse onto the one with the smallest
    ``tiebreak`` key. Output is ordered by ascending cost.
    """
    best: dict[tuple[float, float], tuple] = {}
    for it in items:
        k = (cost(it), gain(it))
        cur = best.get(k)
        if cur is None or tiebreak(it) < tiebreak(cur):
            best[k] = it
    ordered = sorted(best.items(), key=lambda kv: (kv[0][0], -kv[0][1]))
    out = []
    running = float("-inf")
    for (_, g), it in ordered:
        if g > running:
            out.append(it)
            running = g
    return out


def _check(space: ParameterSpace, metric: QualityMetric) -> None:
    if not space.points:
        raise LadderError(f"sequence {space.sequence_id}: empty parameter space")
    space.require(metric)


def front_jqt(space: ParameterSpace, metric: QualityMetric | str,
              params: JqtParams) -> ParetoFront:
    metric = QualityMetric.parse(metric)
    _check(space, metric)
    cands = [FrontPoint(p, compute_j(p.quality(metric), p.decode_time, params), p.quality(metric))
             for p in space.points]
    kept = skyline(cands, cost=lambda f: f.point.bitrate, gain=lambda f: f.objective,
                   tiebreak=lambda f: tie_key(f.point))
    return ParetoFront(Strategy.JQT, params, metric, tuple(kept))


def front_jrqt(space: ParameterSpace, metric: QualityMetric | str,
               params: MParams) -> ParetoFront:
    metric = QualityMetric.parse(metric)
    _check(space, metric)
    cands = [FrontPoint(p, compute_m(p.decode_time, p.bitrate, params), p.quality(metric))
             for p in space.points]
    kept = skyline(cands, cost=lambda f: f.objective, gain=lambda f: f.quality,
                   tiebreak=lambda f: tie_key(f.point))
    return ParetoFront(Strategy.JRQT, params, metric, tuple(kept))


def front_rate_quality(space: ParameterSpace, metric: QualityMetric | str) -> ParetoFront:
    """Classic rate-quality hull (min bitrate, max quality); objective is the bitrate."""
    metric = QualityMetric.parse(metric)
    _check(space, metric)
    cands = [FrontPoint(p, p.bitrate, p.quality(metric)) for p in space.points]
    kept = skyline(cands, cost=lambda f: f.point.bitrate, gain=lambda f: f.quality,
                   tiebreak=lambda f: tie_key(f.point))
    return ParetoFront(Strategy.RQ, None, metric, tuple(kept))


def front_quality_time(space: ParameterSpace, metric: QualityMetric | str) -> ParetoFront:
    """Non-dominated set under (min decode time, max quality); objective is the decode time."""
    metric = QualityMetric.parse(metric)
    _check(space, metric)
    cands = [FrontPoint(p, p.decode_time, p.quality(metric)) for p in space.points]
    kept = skyline(cands, cost=lambda f: f.point.decode_time, gain=lambda f: f.quality,
                   tiebreak=lambda f: tie_key(f.point))
    return ParetoFront(Strategy.QT, None, metric, tuple(kept))
