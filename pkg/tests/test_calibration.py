import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcxplan.cable import CableLayout, CableRow, CableSpec
from lcxplan.calibration import (MeasurementRecord, MeasurementSet, apply_calibration, error_table,
                                 estimate_coupling_loss, nearest_rank, rssi_table, synthesize_measurements)
from lcxplan.environment import Environment
from lcxplan.errors import CalibrationError, DomainError
from lcxplan.linkbudget import Frequency, LinkBudgetParams, received_power
from lcxplan.propagation import EngineConfig, simulate

GHz = Frequency.from_ghz
LAYOUT = CableLayout(np.array([[0.0, 0.0], [20.0, 0.0]]))


def mset(records, rig, layout=LAYOUT):
    return MeasurementSet(records=tuple(records), rig=rig, layout=layout, source="test")


def noise_free(spec_alpha, lc, rig, f, d_lons, d_lat=2.0):
    return [MeasurementRecord(d, d_lat, f, (received_power(rig, spec_alpha * d, lc, d_lat),)) for d in d_lons]


def test_noise_free_round_trip(flat_spec, rig):
    f = GHz(0.9)
    result = estimate_coupling_loss(mset(noise_free(0.06, 70.0, rig, f, range(1, 20)), rig), flat_spec)
    e = result.entries[f]
    assert e.lc50_est == pytest.approx(70.0, abs=1e-9)
    assert e.lc95_est == pytest.approx(70.0, abs=1e-9)
    assert e.sample_count == 19


@settings(max_examples=40, deadline=None)
@given(p=st.floats(1.0, 4.0), l_con=st.floats(0, 6), g_r=st.floats(-3, 8), alpha=st.floats(0, 0.3),
       lc=st.floats(40, 90))
def test_round_trip_any_rig(p, l_con, g_r, alpha, lc):
    rig = LinkBudgetParams(18.0, p, l_con, g_r)
    f = GHz(1.0)
    spec = CableSpec("s", (CableRow(f, alpha, 50.0, 60.0),))
    result = estimate_coupling_loss(mset(noise_free(alpha, lc, rig, f, np.arange(0, 20, 0.5)), rig), spec)
    assert abs(result.entries[f].lc50_est - lc) < 0.01


def test_nearest_rank_twenty_values(rig):
    losses = list(range(60, 80))
    assert nearest_rank(losses, 0.5) == 69
    assert nearest_rank(losses, 0.95) == 78
    # the same through the estimator: pick samples that invert to 60..79 dB
    f = GHz(1.0)
    spec = CableSpec("lossless", (CableRow(f, 0.0, 60.0, 70.0),))
    recs = [MeasurementRecord(1.0, 2.0, f, [received_power(rig, 0.0, lc, 2.0) for lc in losses[::-1]])]
    e = estimate_coupling_loss(mset(recs, rig), spec).entries[f]
    assert e.lc50_est == pytest.approx(69.0, abs=1e-9)
    assert e.lc95_est == pytest.approx(78.0, abs=1e-9)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=50), st.sampled_from([0.5, 0.95, 1.0, 0.01]))
def test_nearest_rank_is_an_order_statistic(values, q):
    v = nearest_rank(values, q)
    assert v in values
    assert sum(x <= v for x in values) >= q * len(values) - 1e-9


def test_quantile_estimates_ordered(rig):
    rng = np.random.default_rng(3)
    f = GHz(2.4)
    spec = CableSpec("s", (CableRow(f, 0.1, 60.0, 70.0),))
    recs = [MeasurementRecord(d, 2.0, f, rng.normal(-50, 4, size=30)) for d in range(0, 20, 2)]
    e = estimate_coupling_loss(mset(recs, rig), spec).entries[f]
    assert e.lc95_est >= e.lc50_est


def test_short_cable_warning(rig):
    f = GHz(0.1)
    lay = CableLayout(np.array([[0.0, 0.0], [2.0, 0.0]]))
    spec = CableSpec("s", (CableRow(f, 0.02, 60.0, 70.0),))
    with pytest.warns(UserWarning, match="short-cable"):
        result = estimate_coupling_loss(mset(noise_free(0.02, 65, rig, f, [1.0]), rig, lay), spec)
    assert len(result.flags) == 1 and "short-cable" in result.flags[0]


def test_no_warning_for_long_cable(flat_spec, rig):
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        result = estimate_coupling_loss(mset(noise_free(0.06, 65, rig, GHz(5.9), [3.0]), rig), flat_spec)
    assert result.flags == ()


def test_missing_reference_distance(flat_spec, rig):
    recs = noise_free(0.06, 65, rig, GHz(0.9), [3.0]) + noise_free(0.06, 65, rig, GHz(5.9), [3.0], d_lat=4.0)
    with pytest.raises(CalibrationError, match="5.9"):
        estimate_coupling_loss(mset(recs, rig), flat_spec)
    with pytest.raises(CalibrationError):
        estimate_coupling_loss(mset([], rig), flat_spec)


def test_reference_tolerance(flat_spec, rig):
    recs = noise_free(0.06, 65, rig, GHz(0.9), [3.0], d_lat=2.009)
    assert estimate_coupling_loss(mset(recs, rig), flat_spec).entries[GHz(0.9)].sample_count == 1


def test_apply_calibration_locality(flat_spec, rig):
    f = GHz(0.9)
    result = estimate_coupling_loss(mset(noise_free(0.06, 66.5, rig, f, [3.0, 4.0]), rig), flat_spec)
    new = apply_calibration(flat_spec, result)
    assert new.rows[0] == flat_spec.rows[0] and new.rows[2] == flat_spec.rows[2]
    assert (new.rows[1].lc50, new.rows[1].lc95) == pytest.approx((66.5, 66.5))
    assert flat_spec.rows[1].lc50 == 60.0
    empty = type(result)(entries={})
    assert apply_calibration(flat_spec, empty) is flat_spec


def test_apply_calibration_inserts_new_frequency(flat_spec, rig):
    f = GHz(2.4)
    result = estimate_coupling_loss(mset(noise_free(0.06, 64.0, rig, f, [3.0]), rig), flat_spec)
    new = apply_calibration(flat_spec, result)
    assert [r.frequency for r in new.rows] == sorted([*(r.frequency for r in flat_spec.rows), f])
    row = next(r for r in new.rows if r.frequency == f)
    assert row.alpha == pytest.approx(0.06) and row.lc50 == pytest.approx(64.0)


def test_measurement_set_invariants(rig):
    with pytest.raises(DomainError):
        MeasurementRecord(1.0, 2.0, GHz(1), ())
    with pytest.raises(DomainError):
        MeasurementRecord(1.0, 0.0, GHz(1), (-50,))
    with pytest.raises(DomainError):
        mset([MeasurementRecord(25.0, 2.0, GHz(1), (-50,))], rig)


# --------------------------------------------------------- error tables ---

def field_maps(spec, rig, env, freqs):
    return [simulate(LAYOUT, spec, env, f, rig, EngineConfig("spl")) for f in freqs]


@pytest.fixture
def env20():
    return Environment((0.0, -0.5), (20.0, 34.0), 1.0)


def test_error_table_self_consistent(flat_spec, rig, env20):
    freqs = [GHz(0.1), GHz(0.9), GHz(5.9)]
    maps = field_maps(flat_spec, rig, env20, freqs)
    d_lats = [1, 2, 4, 8, 16, 32]
    ms = synthesize_measurements(maps, LAYOUT, rig, np.arange(1.0, 20.0, 0.7), d_lats)
    table = error_table(ms, maps)
    assert table.entries.shape == (6, 3)
    assert np.all(table.entries == 0.0)
    assert np.all(table.counts == len(np.arange(1.0, 20.0, 0.7)))


def test_error_table_shift(flat_spec, rig, env20):
    maps = field_maps(flat_spec, rig, env20, [GHz(0.9)])
    ms = synthesize_measurements(maps, LAYOUT, rig, [2.0, 5.5, 9.0], [1.0, 3.3])
    shifted = MeasurementSet(tuple(MeasurementRecord(r.d_lon, r.d_lat, r.frequency,
                                                     [s - 3.0 for s in r.samples]) for r in ms.records),
                             rig, LAYOUT)
    table = error_table(shifted, maps)
    assert np.allclose(table.entries, 3.0, atol=1e-12)


def test_error_table_sinusoidal_fading(flat_spec, rig, env20):
    maps = field_maps(flat_spec, rig, env20, [GHz(0.9)])
    d_lons = np.arange(0.0, 20.0, 1.0)
    d_lats = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0]
    clean = synthesize_measurements(maps, LAYOUT, rig, d_lons, d_lats)
    recs, oracle = [], {}
    for r in clean.records:
        phase = d_lats.index(r.d_lat)
        fade = 7.0 * math.sin(2 * math.pi * r.d_lon / 7.3 + phase)
        recs.append(MeasurementRecord(r.d_lon, r.d_lat, r.frequency, [r.samples[0] + fade]))
        oracle.setdefault(r.d_lat, []).append(-fade)
    table = error_table(MeasurementSet(tuple(recs), rig, LAYOUT), maps)
    for d_lat, diffs in oracle.items():
        assert table.entry(d_lat, GHz(0.9)) == pytest.approx(sum(diffs) / len(diffs), abs=1e-9)
    assert np.all(np.abs(table.entries) <= 7.4)


def test_error_table_skips_outside_records(flat_spec, rig):
    env = Environment((0.0, -0.5), (20.0, 5.0), 1.0)
    maps = field_maps(flat_spec, rig, env, [GHz(0.9)])
    recs = [MeasurementRecord(5.0, 2.0, GHz(0.9), (-60.0,)), MeasurementRecord(5.0, 16.0, GHz(0.9), (-60.0,))]
    with pytest.warns(UserWarning, match="outside"):
        table = error_table(MeasurementSet(tuple(recs), rig, LAYOUT), maps)
    assert len(table.skipped) == 1 and table.skipped[0].d_lat == 16.0
    assert np.isnan(table.entry(16.0, GHz(0.9)))
    assert table.counts[table.d_lats.index(16.0), 0] == 0


def test_error_table_needs_matching_map(flat_spec, rig, env20):
    maps = field_maps(flat_spec, rig, env20, [GHz(0.9)])
    recs = [MeasurementRecord(5.0, 2.0, GHz(5.9), (-60.0,))]
    with pytest.raises(DomainError):
        error_table(MeasurementSet(tuple(recs), rig, LAYOUT), maps)


# ----------------------------------------------------------- rssi table ---

def test_rssi_mean_and_verdict(rig):
    f = GHz(5.9)
    recs = [MeasurementRecord(2.0, 2.0, f, (-40.0, -44.0)), MeasurementRecord(7.0, 2.0, f, (-80.0,))]
    table = rssi_table(mset(recs, rig), -95.0)
    assert table.means[0, 0] == -42.0
    assert table.verdict
    recs.append(MeasurementRecord(12.0, 50.0, f, (-96.0,)))
    assert not rssi_table(mset(recs, rig), -95.0).verdict
    assert rssi_table(mset(recs, rig), -96.0).verdict


def test_rssi_rejects_empty_and_multi_frequency(rig):
    with pytest.raises(DomainError):
        rssi_table(mset([], rig), -95.0)
    recs = [MeasurementRecord(2.0, 2.0, GHz(5.9), (-40.0,)), MeasurementRecord(2.0, 2.0, GHz(2.4), (-40.0,))]
    with pytest.raises(DomainError):
        rssi_table(mset(recs, rig), -95.0)
