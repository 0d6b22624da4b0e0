import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rqtladder.model import (
    DEFAULT_QPS,
    DEFAULT_RESOLUTIONS,
    MeasurementError,
    MissingMetricError,
    ParameterSpace,
    QualityMetric,
    TargetBitrateSet,
    ValidationOptions,
    default_pairs,
    parse_measurements,
    read_pairs,
    to_csv,
    validate_space,
)
from rqtladder.synth import SynthProfile, generate_space

from conftest import point, space_of

HEADER = "sequence_id,resolution,qp,bitrate_kbps,psnr_db,xpsnr_db,vmaf,decode_time_s,decode_energy_j\n"


def test_single_row():
    spaces = parse_measurements(HEADER + "0263,1080,30,1500,38.1,39.2,80.5,4.2,120\n")
    assert list(spaces) == ["0263"]
    (p,) = spaces["0263"].points
    assert (p.resolution, p.qp, p.bitrate, p.vmaf, p.decode_energy) == (1080, 30, 1500.0, 80.5, 120.0)


def test_duplicate_row_names_row():
    text = HEADER + "a,1080,30,1500,38,39,80,4,\na,1080,30,1400,38,39,80,4,\n"
    with pytest.raises(MeasurementError, match="row 3") as exc:
        parse_measurements(text)
    assert exc.value.row == 3


def test_partition_by_sequence():
    text = HEADER + "".join(
        f"{s},{r},30,{1000 + r},38,39,,4,\n" for s in ("0263", "0276") for r in (720, 1080))
    spaces = parse_measurements(text)
    assert sorted(spaces) == ["0263", "0276"]
    assert all(len(s) == 2 for s in spaces.values())
    assert all(p.sequence_id == k for k, s in spaces.items() for p in s.points)


def test_mbps_header_converted():
    text = ("sequence_id,resolution,qp,bitrate_mbps,xpsnr_db,decode_time_s\n"
            "x,2160,22,16.8,44.0,30.0\n")
    (p,) = parse_measurements(text)["x"].points
    assert p.bitrate == pytest.approx(16800.0)


def test_column_order_and_extras_ignored():
    text = "decode_time_s,qp,extra,resolution,sequence_id,bitrate_kbps,vmaf\n3,40,zz,540,q,300,55\n"
    (p,) = parse_measurements(text)["q"].points
    assert (p.resolution, p.qp, p.vmaf, p.psnr) == (540, 40, 55.0, None)


@pytest.mark.parametrize("row, match", [
    ("a,1080,30,0,38,39,80,4,", "bitrate"),
    ("a,1080,30,-5,38,39,80,4,", "bitrate"),
    ("a,1080,30,100,38,39,80,0,", "decode_time"),
    ("a,1080,30,100,38,39,80,2,-1", "decode_energy"),
    ("a,1080,30,100,38,39,101,2,", "vmaf"),
    ("a,1080,30,100,,,,2,", "quality"),
    ("a,1080,x,100,38,39,80,2,", "qp"),
    ("a,1080,30,abc,38,39,80,2,", "bitrate"),
])
def test_malformed_rows(row, match):
    with pytest.raises(MeasurementError, match=match) as exc:
        parse_measurements(HEADER + row + "\n")
    assert exc.value.row == 2


def test_missing_columns():
    with pytest.raises(MeasurementError, match="bitrate"):
        parse_measurements("sequence_id,resolution,qp,decode_time_s\n")
    with pytest.raises(MeasurementError, match="qp"):
        parse_measurements("sequence_id,resolution,bitrate_kbps,decode_time_s\n")


def test_off_grid_warns_by_default_and_fails_strict(caplog):
    text = HEADER + "a,1000,31,100,38,39,80,2,\n"
    parse_measurements(text)
    assert "outside the configured grid" in caplog.text
    with pytest.raises(MeasurementError, match="outside"):
        parse_measurements(text, ValidationOptions(strict=True))
    assert parse_measurements(
        text, ValidationOptions(strict=True, resolutions=(1000,), qps=(31,)))


def test_validate_complete_grid_is_clean():
    space = ParameterSpace("g", tuple(
        point(r, q, bitrate=1e5 * r / (q + 1), psnr=40.0, vmaf=80.0, decode_energy=1.0)
        for r in DEFAULT_RESOLUTIONS for q in DEFAULT_QPS))
    assert len(space) == 126
    assert validate_space(space) == []


def test_validate_reports_missing_vmaf():
    space = ParameterSpace("g", tuple(
        point(r, q, bitrate=1e5 * r / (q + 1), psnr=40.0, decode_energy=1.0)
        for r in DEFAULT_RESOLUTIONS for q in DEFAULT_QPS))
    messages = [f.message for f in validate_space(space)]
    assert messages == ["VMAF unavailable"]


def test_validate_rate_qp_anomaly():
    space = space_of(point(1080, 30, bitrate=1000.0), point(1080, 32, bitrate=1200.0))
    codes = [f.code for f in validate_space(space)]
    assert "rate-qp-anomaly" in codes
    assert "empty-resolution" in codes  # only 1080 present
    assert len(space) == 2  # reporting never mutates


def test_quality_accessor():
    p = point(xpsnr=41.0)
    assert p.quality("xpsnr") == 41.0
    with pytest.raises(MissingMetricError, match="VMAF"):
        p.quality(QualityMetric.VMAF)
    with pytest.raises(MissingMetricError):
        space_of(p).require("vmaf")


def test_targets():
    t = TargetBitrateSet()
    assert t.targets[0] == 145.0 and t.targets[-1] == 16800.0 and len(t) == 12
    assert TargetBitrateSet.parse("100, 200,400").targets == (100.0, 200.0, 400.0)
    for bad in ((200, 100), (100, 100), (0, 10), ()):
        with pytest.raises(ValueError):
            TargetBitrateSet(bad)


def test_default_pairs_cover_default_targets():
    pairs = default_pairs()
    assert set(pairs) == set(TargetBitrateSet().targets)
    res = [pairs[t] for t in sorted(pairs)]
    assert res == sorted(res) and res[0] == 360 and res[-1] == 2160
    assert read_pairs("target_kbps,resolution\n145,360\n") == {145.0: 360}


def test_round_trip_synthetic():
    spaces = [generate_space(SynthProfile(seed=s)) for s in (1, 2)]
    text = to_csv(spaces)
    again = parse_measurements(text)
    assert [again[s.sequence_id] for s in spaces] == spaces
    assert to_csv(again.values()) == text


finite = dict(allow_nan=False, allow_infinity=False)
rows = st.lists(
    st.tuples(
        st.sampled_from(["a", "b", "c"]),
        st.sampled_from(DEFAULT_RESOLUTIONS),
        st.sampled_from(DEFAULT_QPS),
        st.floats(1e-3, 1e6, **finite),
        st.one_of(st.none(), st.floats(0, 80, **finite)),
        st.floats(0, 80, **finite),
        st.one_of(st.none(), st.floats(0, 100, **finite)),
        st.floats(1e-4, 1e4, **finite),
        st.one_of(st.none(), st.floats(1e-3, 1e5, **finite)),
    ),
    min_size=1, max_size=40, unique_by=lambda r: (r[0], r[1], r[2]),
)


@settings(max_examples=60, deadline=None)
@given(rows)
def test_round_trip_and_partition(rs):
    spaces = [
        ParameterSpace(seq, tuple(
            point(r, q, bitrate=b, decode_time=t, seq=seq, psnr=ps, xpsnr=x, vmaf=vm,
                  decode_energy=e)
            for s, r, q, b, ps, x, vm, t, e in rs if s == seq))
        for seq in sorted({r[0] for r in rs})
    ]
    parsed = parse_measurements(to_csv(spaces))
    assert list(parsed.values()) == spaces
    keys = [(p.sequence_id, p.key) for s in parsed.values() for p in s.points]
    assert sorted(keys) == sorted((r[0], (r[1], r[2])) for r in rs)
    assert len(set(keys)) == len(keys)
