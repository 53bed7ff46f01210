"""Data model, CSV ingestion, gap filling, unwrapping and scaling."""

import numpy as np
import pytest

from pagerec import (
    AllMissingChannel,
    ChannelKind,
    ChannelSeries,
    ConfigError,
    CsvSchema,
    Dataset,
    FillPolicy,
    FormatError,
    ScalingPolicy,
    ShapeError,
    fill_missing,
    ingest_csv,
    scale_dataset,
    unwrap_angles,
    unwrap_degrees,
    write_csv,
)


def make_series(values, mask=None, kind=ChannelKind.GENERIC, cid="c0"):
    values = np.asarray(values, dtype=float)
    mask = np.ones(len(values), bool) if mask is None else np.asarray(mask, bool)
    return ChannelSeries(cid, kind, np.arange(len(values), dtype=float), values, mask)


def brute_force_unwrap(values):
    """Independent oracle: adjust each successive difference into (-180, 180]
    by whole turns, then accumulate."""
    out = [values[0]]
    for i in range(1, len(values)):
        d = values[i] - values[i - 1]
        while d > 180.0:
            d -= 360.0
        while d <= -180.0:
            d += 360.0
        out.append(out[-1] + d)
    return np.array(out)


# ---------------------------------------------------------------------------
# ChannelSeries / Dataset validation
# ---------------------------------------------------------------------------

def test_series_length_mismatch_rejected():
    with pytest.raises(ShapeError):
        ChannelSeries("x", ChannelKind.GENERIC, np.arange(3.0), np.zeros(2), np.ones(3, bool))


def test_series_nonuniform_timestamps_rejected():
    with pytest.raises(ShapeError):
        ChannelSeries("x", ChannelKind.GENERIC, np.array([0.0, 1.0, 3.0]), np.zeros(3), np.ones(3, bool))


def test_series_arrays_immutable():
    s = make_series([1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        s.values[0] = 9.0


def test_dataset_requires_shared_timebase():
    a = make_series([1.0, 2.0], cid="a")
    b = ChannelSeries("b", ChannelKind.GENERIC, np.array([0.0, 2.0]), np.zeros(2), np.ones(2, bool))
    with pytest.raises(ShapeError):
        Dataset((a, b))


def test_dataset_duplicate_ids_rejected():
    a = make_series([1.0, 2.0], cid="a")
    with pytest.raises(ShapeError):
        Dataset((a, a))


def test_dataset_rate_derived_from_step():
    t = np.arange(5) / 60.0
    a = ChannelSeries("a", ChannelKind.GENERIC, t, np.zeros(5), np.ones(5, bool))
    assert Dataset((a,)).rate_fps == pytest.approx(60.0)


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------

def test_ingest_basic_missing_cell(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,v\n0,1.0\n1,\n2,3.0\n")
    ds = ingest_csv(p)
    v = ds.channel("v")
    assert list(v.mask) == [True, False, True]
    assert v.values[0] == 1.0 and v.values[2] == 3.0
    assert np.isnan(v.values[1])
    assert ds.rate_fps == pytest.approx(1.0)


def test_ingest_nan_literal_is_missing(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,v\n0,NaN\n1,2.0\n2,nan\n")
    ds = ingest_csv(p)
    assert list(ds.channel("v").mask) == [False, True, False]


def test_ingest_all_missing_channel_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,v,w\n0,,1\n1,,2\n")
    with pytest.raises(AllMissingChannel):
        ingest_csv(p)


def test_ingest_ragged_row_names_line(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,v\n0,1.0\n1,2.0,extra\n")
    with pytest.raises(FormatError, match=":3:"):
        ingest_csv(p)


def test_ingest_nonuniform_timestamps_rejected(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("t,v\n0,1\n1,2\n3,3\n")
    with pytest.raises(FormatError):
        ingest_csv(p)


def test_ingest_large_file_shape(tmp_path):
    # 54000 rows, 12 channels
    n, c = 54000, 12
    header = "t," + ",".join(f"ch{i}" for i in range(c))
    rows = [header]
    for i in range(n):
        rows.append(f"{i}," + ",".join("1.5" for _ in range(c)))
    p = tmp_path / "big.csv"
    p.write_text("\n".join(rows) + "\n")
    ds = ingest_csv(p)
    assert len(ds.channels) == c
    assert len(ds) == n


def test_csv_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    t = np.arange(40) / 30.0
    chans = []
    for i in range(3):
        mask = rng.random(40) > 0.2
        mask[0] = True
        vals = rng.normal(0, 1, 40)
        vals[~mask] = np.nan
        chans.append(ChannelSeries(f"c{i}", ChannelKind.GENERIC, t, vals, mask))
    ds = Dataset(tuple(chans))
    p = tmp_path / "round.csv"
    write_csv(ds, p)
    back = ingest_csv(p)
    assert back.ids == ds.ids
    assert np.array_equal(back.timestamps, ds.timestamps)
    assert back.rate_fps == pytest.approx(ds.rate_fps)
    for cid in ds.ids:
        a, b = ds.channel(cid), back.channel(cid)
        assert np.array_equal(a.mask, b.mask)
        assert np.array_equal(a.values[a.mask], b.values[b.mask])


def test_ingest_schema_kinds_and_timestamp_column(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("va,time,f\n10,0,60.0\n11,1,60.1\n")
    schema = CsvSchema(timestamp="time", kinds={"va": ChannelKind.VOLTAGE_ANGLE,
                                                "f": ChannelKind.FREQUENCY})
    ds = ingest_csv(p, schema)
    assert ds.channel("va").kind is ChannelKind.VOLTAGE_ANGLE
    assert ds.channel("f").kind is ChannelKind.FREQUENCY


# ---------------------------------------------------------------------------
# fill_missing
# ---------------------------------------------------------------------------

def test_fill_locf_interior_gap():
    s = make_series([1.0, np.nan, np.nan, 4.0], mask=[True, False, False, True])
    assert list(fill_missing(s).values) == [1.0, 1.0, 1.0, 4.0]


def test_fill_leading_gap_backfills():
    s = make_series([np.nan, 2.0, 3.0], mask=[False, True, True])
    assert list(fill_missing(s).values) == [2.0, 2.0, 3.0]


def test_fill_fully_observed_identity():
    s = make_series([5.0, 6.0, 7.0])
    out = fill_missing(s)
    assert np.array_equal(out.values, s.values)
    assert np.array_equal(out.mask, s.mask)


def test_fill_all_missing_raises():
    s = make_series([np.nan, np.nan], mask=[False, False])
    with pytest.raises(AllMissingChannel):
        fill_missing(s)


def test_fill_never_touches_observed():
    rng = np.random.default_rng(42)
    for case in range(100):
        n = rng.integers(2, 60)
        mask = rng.random(n) > rng.uniform(0.1, 0.9)
        if not mask.any():
            mask[rng.integers(n)] = True
        vals = rng.normal(0, 10, n)
        vals[~mask] = np.nan
        s = make_series(vals, mask=mask)
        out = fill_missing(s, FillPolicy.LOCF)
        assert np.array_equal(out.values[mask], vals[mask])
        assert np.array_equal(out.mask, mask)
        assert np.isfinite(out.values).all()


# ---------------------------------------------------------------------------
# unwrap_angles
# ---------------------------------------------------------------------------

def test_unwrap_single_crossing():
    s = make_series([179.0, -179.0], kind=ChannelKind.VOLTAGE_ANGLE)
    assert list(unwrap_angles(s).values) == [179.0, 181.0]


def test_unwrap_monotone_ramp_unchanged():
    vals = np.linspace(-170.0, 170.0, 20)
    s = make_series(vals, kind=ChannelKind.VOLTAGE_ANGLE)
    assert np.allclose(unwrap_angles(s).values, vals)


def test_unwrap_double_jump_matches_oracle():
    # oracle (and numpy's reference unwrap) both give [170, 190, 150]
    vals = [170.0, -170.0, 150.0]
    expected = brute_force_unwrap(vals)
    assert np.allclose(expected, [170.0, 190.0, 150.0])
    assert np.allclose(np.unwrap(vals, period=360), expected)
    s = make_series(vals, kind=ChannelKind.VOLTAGE_ANGLE)
    assert np.allclose(unwrap_angles(s).values, expected)


def test_unwrap_matches_oracle_randomized():
    rng = np.random.default_rng(7)
    for _ in range(100):
        true_angle = np.cumsum(rng.uniform(-179.0, 179.0, 30))
        wrapped = (true_angle + 180.0) % 360.0 - 180.0
        out = unwrap_degrees(wrapped)
        assert np.allclose(out, brute_force_unwrap(wrapped), atol=1e-9)
        # output differs from input by exact multiples of 360
        k = (out - wrapped) / 360.0
        assert np.allclose(k, np.round(k), atol=1e-9)
        d = np.diff(out)
        assert ((d > -180.0 - 1e-9) & (d <= 180.0 + 1e-9)).all()


def test_unwrap_wrong_kind_rejected():
    s = make_series([1.0, 2.0], kind=ChannelKind.FREQUENCY)
    with pytest.raises(ConfigError):
        unwrap_angles(s)


# ---------------------------------------------------------------------------
# scale_dataset
# ---------------------------------------------------------------------------

def _pmu_dataset():
    t = np.arange(6, dtype=float)
    mag = ChannelSeries("vm", ChannelKind.VOLTAGE_MAGNITUDE, t,
                        np.full(6, 345.0), np.ones(6, bool))
    ang_ref = ChannelSeries("ref", ChannelKind.VOLTAGE_ANGLE, t,
                            np.array([0.0, 10.0, 20.0, 30.0, 40.0, 50.0]), np.ones(6, bool))
    ang = ChannelSeries("va", ChannelKind.VOLTAGE_ANGLE, t,
                        np.array([5.0, 15.0, 25.0, 35.0, 45.0, 55.0]), np.ones(6, bool))
    freq = ChannelSeries("f", ChannelKind.FREQUENCY, t,
                         np.array([60.05, 60.0, 59.95, 60.0, 60.05, 60.0]), np.ones(6, bool))
    return Dataset((mag, ang_ref, ang, freq))


def test_scale_frequency_gain():
    ds = _pmu_dataset()
    policy = ScalingPolicy(base_kv={"vm": 345.0}, reference_channel="ref")
    scaled, _ = scale_dataset(ds, policy)
    assert scaled.channel("f").values[0] == pytest.approx(0.5)  # (60.05-60)*10
    assert scaled.channel("f").values[1] == pytest.approx(0.0)


def test_scale_magnitude_per_unit():
    ds = _pmu_dataset()
    scaled, _ = scale_dataset(ds, ScalingPolicy(base_kv={"vm": 345.0}))
    assert np.allclose(scaled.channel("vm").values, 1.0)


def test_scale_reference_channel_become_zero():
    ds = _pmu_dataset()
    scaled, _ = scale_dataset(ds, ScalingPolicy(base_kv={"vm": 345.0},
                                                reference_channel="ref"))
    assert np.allclose(scaled.channel("ref").values, 0.0)
    assert np.allclose(scaled.channel("va").values, 5.0)


def test_scale_missing_base_rejected():
    ds = _pmu_dataset()
    with pytest.raises(ConfigError):
        scale_dataset(ds, ScalingPolicy())


def test_scale_bad_reference_rejected():
    ds = _pmu_dataset()
    with pytest.raises(ConfigError):
        scale_dataset(ds, ScalingPolicy(base_kv={"vm": 345.0}, reference_channel="f"))
    with pytest.raises(ConfigError):
        scale_dataset(ds, ScalingPolicy(base_kv={"vm": 345.0}, reference_channel="nope"))


def test_scale_default_reference_fewest_missing():
    t = np.arange(4, dtype=float)
    a = ChannelSeries("a", ChannelKind.VOLTAGE_ANGLE, t,
                      np.array([1.0, np.nan, 3.0, 4.0]),
                      np.array([True, False, True, True]))
    b = ChannelSeries("b", ChannelKind.VOLTAGE_ANGLE, t,
                      np.array([2.0, 3.0, 4.0, 5.0]), np.ones(4, bool))
    filled_a = fill_missing(a)
    ds = Dataset((filled_a, b))
    scaled, transform = scale_dataset(ds, ScalingPolicy())
    assert transform.reference_channel == "b"
    assert np.allclose(scaled.channel("b").values, 0.0)


def test_scale_round_trip_within_1e12():
    ds = _pmu_dataset()
    policy = ScalingPolicy(base_kv={"vm": 345.0}, reference_channel="ref")
    scaled, transform = scale_dataset(ds, policy)
    back = transform.invert(scaled)
    for cid in ds.ids:
        orig = ds.channel(cid).values
        rec = back.channel(cid).values
        denom = np.maximum(np.abs(orig), 1.0)
        assert (np.abs(rec - orig) / denom).max() < 1e-12
