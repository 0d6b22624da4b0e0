"""Composite objectives: quality penalised by decode time (J), and weighted log cost (M)."""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class JqtParams:
    alpha_j: float = 2.5

    def __post_init__(self):
        if not (self.alpha_j >= 0 and math.isfinite(self.alpha_j)):
            raise ValueError(f"alpha_j must be a finite non-negative number, got {self.alpha_j!r}")

    def as_dict(self) -> dict:
        return {"alpha_j": self.alpha_j}


@dataclass(frozen=True)
class MParams:
    alpha_m: float = 0.75

    def __post_init__(self):
        if not 0.0 <= self.alpha_m <= 1.0:
            raise ValueError(f"alpha_m must lie in [0, 1], got {self.alpha_m!r}")

    def as_dict(self) -> dict:
        return {"alpha_m": self.alpha_m}


def compute_j(v: float, decode_time: float, params: JqtParams) -> float:
    """Quality minus ``alpha_j * log10(decode_time)``; higher is better."""
    if not decode_time > 0:
        raise ValueError(f"decode_time must be positive, got {decode_time!r}")
    if params.alpha_j == 0:
        return float(v)
    return v - params.alpha_j * math.log10(decode_time)


def compute_m(decode_time: float, bitrate: float, params: MParams) -> float:
    """Weighted sum of log10 decode time and log10 bitrate; lower is better."""
    if not decode_time > 0:
        raise ValueError(f"decode_time must be positive, got {decode_time!r}")
    if not bitrate > 0:
        raise ValueError(f"bitrate must be positive, got {bitrate!r}")
    a = params.alpha_m
    if a == 0:
        return math.log10(bitrate)
    if a == 1:
        return math.log10(decode_time)
    return a * math.log10(decode_time) + (1.0 - a) * math.log10(bitrate)
