"""Deterministic synthetic RQT parameter spaces.

The surfaces are hand-shaped so that bitrate, quality and decode time move
the way real encodes do: rate falls and distortion grows with QP, lower
resolutions pay an upscaling penalty that only matters at high rates (so
rate-quality curves of neighbouring resolutions cross), and decode time
grows with pixel count and bitrate. Only the energy column is noisy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import DEFAULT_QPS, DEFAULT_RESOLUTIONS, MeasurementPoint, ParameterSpace

PEAK = 255.0 ** 2
NATIVE = 2160


@dataclass(frozen=True)
class SynthProfile:
    seed: int = 0
    resolutions: tuple[int, ...] = DEFAULT_RESOLUTIONS
    qps: tuple[int, ...] = DEFAULT_QPS
    spatial_complexity: float = 0.5
    temporal_complexity: float = 0.5
    luminance: float = 0.5
    time_energy_slope: float = 28.0  # joules per second of decoding
    noise_level: float = 0.05
    sequence_id: str | None = None

    def __post_init__(self):
        for name in ("spatial_complexity", "temporal_complexity", "luminance"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v!r}")
        if not self.time_energy_slope > 0:
            raise ValueError("time_energy_slope must be positive")
        if not 0.0 <= self.noise_level < 0.25:
            raise ValueError("noise_level must lie in [0, 0.25)")
        if not self.resolutions or not self.qps:
            raise ValueError("resolutions and qps must be non-empty")

    @property
    def name(self) -> str:
        return self.sequence_id if self.sequence_id is not None else f"{self.seed:04d}"


def random_profile(seed: int, **overrides) -> SynthProfile:
    """Profile with content knobs drawn from ``seed``; ``overrides`` win."""
    rng = np.random.default_rng([seed, 1])
    knobs = dict(
        seed=seed,
        spatial_complexity=float(rng.uniform(0.05, 0.95)),
        temporal_complexity=float(rng.uniform(0.05, 0.95)),
        luminance=float(rng.uniform(0.2, 0.8)),
    )
    knobs.update(overrides)
    return SynthProfile(**knobs)


def _bitrate(res: int, qp: int, s: float, t: float) -> float:
    area = (res / NATIVE) ** 2
    return 42000.0 * area ** 0.78 * 2.0 ** (-(qp - 10) / 6.2) * (0.35 + 1.3 * s) * (0.55 + 0.9 * t)


def _coding_mse(res: int, qp: int, s: float) -> float:
    # upscaling smooths part of the coding error of small pictures
    area = (res / NATIVE) ** 2
    return 1.1 * (0.4 + s) * 2.0 ** ((qp - 10) / 5.6) * area ** 0.12


def _scaling_mse(res: int, s: float) -> float:
    lost = 1.0 - math.sqrt(res / NATIVE)
    return 100.0 * (0.15 + 1.7 * s) * lost ** 1.6


def _decode_time(res: int, bitrate: float, t: float) -> float:
    area = (res / NATIVE) ** 2
    return (0.6 + 50.0 * area ** 1.1 + 0.2 * bitrate / 1000.0) * (0.75 + 0.5 * t)


def generate_space(profile: SynthProfile) -> ParameterSpace:
    s, t, lum = profile.spatial_complexity, profile.temporal_complexity, profile.luminance
    rng = np.random.default_rng([profile.seed, 2])
    points = []
    for res in sorted(profile.resolutions):
        for qp in sorted(profile.qps):
            b = _bitrate(res, qp, s, t)
            code, scale = _coding_mse(res, qp, s), _scaling_mse(res, s)
            psnr = 10.0 * math.log10(PEAK / (code + scale)) + 2.0 * (0.5 - lum)
            # XPSNR weighs coding noise less in busy, moving content and blur more
            xpsnr = 10.0 * math.log10(PEAK / ((0.85 - 0.3 * t) * code + 1.25 * scale)) - 1.0
            vmaf = 100.0 / (1.0 + math.exp(-(xpsnr - 31.0 - 2.0 * lum) / 3.2))
            tau = _decode_time(res, b, t)
            if profile.noise_level > 0:
                jitter = float(np.clip(rng.normal(0.0, profile.noise_level),
                                       -2 * profile.noise_level, 2 * profile.noise_level))
            else:
                jitter = 0.0
            energy = profile.time_energy_slope * tau * (1.0 + jitter)
            points.append(MeasurementPoint(
                sequence_id=profile.name, resolution=res, qp=qp, bitrate=b,
                decode_time=tau, psnr=psnr, xpsnr=xpsnr, vmaf=vmaf, decode_energy=energy,
            ))
    return ParameterSpace(profile.name, tuple(points), tuple(sorted(profile.resolutions)),
                          tuple(sorted(profile.qps)))


def generate_corpus(count: int, seed: int = 0, **overrides) -> list[ParameterSpace]:
    """``count`` spaces with content knobs drawn from seeds ``seed .. seed+count-1``."""
    return [generate_space(random_profile(seed + i, **overrides)) for i in range(count)]
