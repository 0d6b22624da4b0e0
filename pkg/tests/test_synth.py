import math

import numpy as np
import pytest

from rqtladder.metrics import pearson
from rqtladder.model import DEFAULT_QPS, DEFAULT_RESOLUTIONS, to_csv, validate_space
from rqtladder.synth import SynthProfile, generate_corpus, generate_space, random_profile


def test_deterministic():
    a = generate_corpus(5, seed=42)
    b = generate_corpus(5, seed=42)
    assert to_csv(a) == to_csv(b)
    assert to_csv(a) != to_csv(generate_corpus(5, seed=43))


def test_grid_and_names():
    space = generate_space(SynthProfile(seed=7))
    assert space.sequence_id == "0007"
    assert len(space.points) == len(DEFAULT_RESOLUTIONS) * len(DEFAULT_QPS)
    assert space.resolutions == DEFAULT_RESOLUTIONS
    named = generate_space(SynthProfile(seed=7, sequence_id="park"))
    assert {p.sequence_id for p in named.points} == {"park"}


def test_overrides_win():
    prof = random_profile(3, spatial_complexity=0.9)
    assert prof.spatial_complexity == 0.9
    assert prof.temporal_complexity == random_profile(3).temporal_complexity


@pytest.mark.parametrize("kwargs", [
    {"spatial_complexity": 1.5}, {"luminance": -0.1}, {"noise_level": 0.3},
    {"time_energy_slope": 0.0}, {"qps": ()},
])
def test_profile_validation(kwargs):
    with pytest.raises(ValueError):
        SynthProfile(**kwargs)


def test_noise_free_energy_is_linear_in_time():
    for seed in range(10):
        space = generate_space(random_profile(seed, noise_level=0.0))
        t = [p.decode_time for p in space.points]
        e = [p.decode_energy for p in space.points]
        assert all(ei == 28.0 * ti for ti, ei in zip(t, e))
        assert pearson(t, e) == 1.0


def test_default_noise_correlation(small_corpus):
    for space in small_corpus:
        r = pearson([p.decode_time for p in space.points],
                    [p.decode_energy for p in space.points])
        assert 0.96 <= r < 1.0


def test_validation_clean(small_corpus):
    for space in small_corpus:
        assert validate_space(space) == []


def test_rate_quality_monotone_per_resolution(small_corpus):
    for space in small_corpus:
        for res in space.resolutions:
            pts = sorted(space.at_resolution(res), key=lambda p: p.qp)
            b = [p.bitrate for p in pts]
            assert all(x > y for x, y in zip(b, b[1:]))
            for m in ("psnr", "xpsnr", "vmaf", "decode_time"):
                v = [getattr(p, m) for p in pts]
                assert all(x > y for x, y in zip(v, v[1:])), m


def _quality_at(space, res, rate, metric="xpsnr"):
    pts = sorted(space.at_resolution(res), key=lambda p: p.bitrate)
    return float(np.interp(math.log10(rate), [math.log10(p.bitrate) for p in pts],
                           [p.quality(metric) for p in pts]))


def test_neighbouring_resolutions_cross():
    # the lower resolution wins at low rates and loses at high ones
    for s in (0.5, 0.7, 0.9):
        space = generate_space(SynthProfile(spatial_complexity=s))
        lo = _quality_at(space, 720, 300) - _quality_at(space, 1080, 300)
        hi = _quality_at(space, 720, 6000) - _quality_at(space, 1080, 6000)
        assert lo > 0 > hi


def test_decode_time_grows_with_resolution(small_corpus):
    for space in small_corpus:
        for qp in space.qps:
            t = [p.decode_time for p in sorted(space.points, key=lambda p: p.resolution)
                 if p.qp == qp]
            assert t == sorted(t)
