import math

import numpy as np
import pytest

from lcxplan import formats
from lcxplan.environment import CoverageMap, Environment
from lcxplan.errors import ParseError
from lcxplan.linkbudget import Frequency


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def const_map(value, shape=(2, 2), res=1.0):
    ny, nx = shape
    env = Environment((0, 0), (nx * res, ny * res), res)
    return CoverageMap(env, Frequency.from_ghz(5.9), "spl", np.full(shape, float(value)))


# ---------------------------------------------------------------- inputs ---

def test_minimal_cable_spec(tmp_path):
    spec = formats.parse_cable_spec(write(tmp_path, "c.txt", "lcx-cable 1\nrow 0.9 0.06 68 76\n"))
    assert len(spec.rows) == 1
    assert spec.rows[0].frequency == Frequency.from_ghz(0.9)
    assert spec.reference_lateral_distance == 2.0


def test_cable_spec_invariant_named(tmp_path):
    with pytest.raises(ParseError, match="lc95 >= lc50") as exc:
        formats.parse_cable_spec(write(tmp_path, "c.txt", "lcx-cable 1\n# comment\nrow 0.9 0.06 76 68\n"))
    assert exc.value.line == 3
    assert "c.txt:3:" in str(exc.value)


@pytest.mark.parametrize("text,needle", [
    ("lcx-cable 1\nrow 0.9 0.06 68\n", "expects 4"),
    ("lcx-cable 1\nrow 0.9 x 68 70\n", "non-numeric"),
    ("lcx-cable 1\nrows 0.9 0.06 68 70\n", "unknown key"),
    ("lcx-cable 1\nrow 1.8 0.06 68 70\nrow 0.9 0.06 68 70\n", "increasing"),
    ("lcx-cable 1\n", "at least one"),
    ("row 0.9 0.06 68 70\n", "header"),
    ("", "header"),
])
def test_cable_spec_errors(tmp_path, text, needle):
    with pytest.raises(ParseError, match=needle):
        formats.parse_cable_spec(write(tmp_path, "c.txt", text))


@pytest.mark.parametrize("kind,parser", [("lcx-cable", formats.parse_cable_spec),
                                         ("lcx-layout", formats.parse_layout),
                                         ("lcx-environment", formats.parse_environment)])
def test_unknown_schema_version_rejected(tmp_path, kind, parser):
    with pytest.raises(ParseError, match="version"):
        parser(write(tmp_path, "x.txt", f"{kind} 2\n"))


def test_missing_file():
    with pytest.raises(ParseError, match="cannot read"):
        formats.parse_layout("/nonexistent/layout.txt")


def test_layout_and_environment(tmp_path):
    lay = formats.parse_layout(write(tmp_path, "l.txt",
                                     "lcx-layout 1\nvertex 0 0\nvertex 3 4\nfeed_end end\nmount_height 0.5\n"))
    assert lay.length == 5.0 and lay.feed_end == "end"
    env = formats.parse_environment(write(tmp_path, "e.txt",
                                          "lcx-environment 1\ngrid_origin 0 0\ngrid_extent 4 2\n"
                                          "grid_resolution 0.5\nbarrier 0 0 4 0 -1.5\n"
                                          "obstacle 12 1 1 2 1 2 2 1 2\n"))
    assert env.shape == (4, 8)
    assert env.barriers[0].reflection_gain == -1.5
    assert env.obstacles[0].penetration_loss == 12.0


@pytest.mark.parametrize("body,needle", [
    ("vertex 0 0\n", "invariant"),
    ("vertex 0 0\nvertex 0 0\nvertex 1 0\n", "invariant"),
    ("vertex 0 0\nvertex 1 0\nfeed_end middle\n", "invariant"),
])
def test_layout_invariants(tmp_path, body, needle):
    with pytest.raises(ParseError, match=needle):
        formats.parse_layout(write(tmp_path, "l.txt", "lcx-layout 1\n" + body))


def test_environment_obstacle_errors(tmp_path):
    base = "lcx-environment 1\ngrid_origin 0 0\ngrid_extent 4 2\ngrid_resolution 1\n"
    with pytest.raises(ParseError, match="convex"):
        formats.parse_environment(write(tmp_path, "e.txt", base + "obstacle 3 0 0 4 0 2 1 4 4 0 4\n"))
    with pytest.raises(ParseError, match="grid_resolution"):
        formats.parse_environment(write(tmp_path, "e.txt", "lcx-environment 1\ngrid_origin 0 0\ngrid_extent 4 2\n"))


def test_measurements(tmp_path):
    write(tmp_path, "l.txt", "lcx-layout 1\nvertex 0 0\nvertex 20 0\n")
    ms = formats.parse_measurements(write(tmp_path, "m.txt",
                                          "lcx-measurements 1\nlayout l.txt\ntransmit_power 18\n"
                                          "2 2 5.9 -37 -39\n7 2 5.9 -48\n"))
    assert len(ms.records) == 2
    assert ms.records[0].samples == (-37.0, -39.0)
    assert ms.rig.loss_exponent == 2.0
    with pytest.raises(ParseError, match="at least one sample"):
        formats.parse_measurements(write(tmp_path, "m.txt", "lcx-measurements 1\nlayout l.txt\n"
                                                            "transmit_power 18\n2 2 5.9\n"))
    with pytest.raises(ParseError, match="exceeds cable length"):
        formats.parse_measurements(write(tmp_path, "m.txt", "lcx-measurements 1\nlayout l.txt\n"
                                                            "transmit_power 18\n30 2 5.9 -50\n"))


def test_scenario_frequency_must_be_positive(tmp_path, data_dir):
    head = (f"lcx-scenario 1\ncable {data_dir / 'synthetic_cable.txt'}\n"
            f"layout {data_dir / 'testfield_layout.txt'}\n"
            f"environment {data_dir / 'testfield_environment.txt'}\ntransmit_power 18\n")
    for line in ("frequency 0\n", "frequency_hz -5\n"):
        with pytest.raises(ParseError, match="> 0"):
            formats.parse_scenario(write(tmp_path, "s.txt", head + line))
    with pytest.raises(ParseError, match="frequency list is empty"):
        formats.parse_scenario(write(tmp_path, "s.txt", head))
    cfg = formats.parse_scenario(write(tmp_path, "s.txt", head + "frequency 0.9 5.9\n"))
    assert [f.ghz for f in cfg.frequencies] == [0.9, 5.9]
    assert cfg.engines == ["spl"]


# ------------------------------------------------------- shipped fixtures ---

def test_test_field_fixture(data_dir):
    lay = formats.parse_layout(data_dir / "testfield_layout.txt")
    env = formats.parse_environment(data_dir / "testfield_environment.txt")
    assert lay.length == pytest.approx(100.0, abs=1e-6)
    assert env.grid_extent == (50.0, 100.0)
    assert env.shape == (100, 50)
    cfg = formats.parse_scenario(data_dir / "testfield_scenario.txt")
    assert cfg.frequencies == [Frequency.from_ghz(5.9)]
    assert cfg.params.transmit_power == 18.0
    spec = formats.parse_cable_spec(cfg.cable)
    assert [r.frequency for r in spec.rows] == formats.preset_frequencies()
    assert spec.lc_tolerance == 10.0


def test_rssi_fixture(data_dir):
    ms = formats.parse_measurements(data_dir / "testfield_rssi.txt")
    assert len(ms.records) == 15
    by_pos = {(r.d_lat, r.d_lon): r.mean for r in ms.records}
    assert by_pos[(2.0, 2.0)] == -37.0
    assert by_pos[(50.0, 2.0)] == -68.0
    assert [by_pos[(2.0, d)] for d in (2.0, 7.0, 12.0)] == [-37.0, -48.0, -37.0]


def test_preset_frequencies():
    assert [f.ghz for f in formats.preset_frequencies()] == [0.1, 0.2, 0.9, 1.8, 2.4, 3.6, 5.9]


# ---------------------------------------------------------------- outputs ---

def test_pgm_midpoint_rounds_half_up():
    pgm = formats.pgm_text(const_map(-70.0))
    lines = pgm.splitlines()
    assert lines[0] == "P2" and lines[2] == "2 2" and lines[3] == "255"
    assert lines[4:] == ["128 128", "128 128"]


def test_heatmap_clamping():
    pix = formats.heatmap_pixels(np.array([-120.0, -20.0, -150.0, 0.0, -119.9]))
    assert pix.tolist() == [0, 255, 0, 255, 0]


def test_pgm_is_north_up():
    cells = np.array([[-120.0, -120.0], [-20.0, -20.0]])  # row 0 is the lowest y
    cmap = CoverageMap(Environment((0, 0), (2, 2), 1.0), Frequency.from_ghz(1), "spl", cells)
    assert formats.pgm_text(cmap).splitlines()[4:] == ["255 255", "0 0"]


def test_emit_is_deterministic(tmp_path):
    cmap = const_map(-63.456, shape=(3, 4))
    a = formats.emit_coverage(cmap, tmp_path / "a")
    b = formats.emit_coverage(cmap, tmp_path / "b")
    for pa, pb in zip(a, b):
        assert pa.read_bytes() == pb.read_bytes()
    assert not list((tmp_path / "a").glob("*.tmp"))


def test_grid_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    env = Environment((-3.0, 2.5), (7.0, 5.0), 0.5)
    cmap = CoverageMap(env, Frequency.from_ghz(2.4), "coherent", rng.uniform(-130, -10, env.shape))
    formats.emit_coverage(cmap, tmp_path)
    back = formats.parse_grid(tmp_path / "grid.csv")
    assert back.environment.shape == env.shape
    assert back.environment.grid_origin == env.grid_origin
    assert back.frequency == cmap.frequency and back.engine == "coherent"
    assert np.max(np.abs(back.cells - cmap.cells)) <= 0.005 + 1e-12


def test_band_files(tmp_path):
    cmap = CoverageMap(Environment((0, 0), (2, 1), 1.0), Frequency.from_ghz(1), "spl",
                       np.array([[-50.0, -60.0]]), lc_tolerance=10.0)
    formats.emit_coverage(cmap, tmp_path, band=True)
    best = formats.parse_grid(tmp_path / "grid_best.csv")
    worst = formats.parse_grid(tmp_path / "grid_worst.csv")
    assert best.cells.tolist() == [[-40.0, -50.0]]
    assert worst.cells.tolist() == [[-60.0, -70.0]]


def test_grid_rejects_wrong_shape(tmp_path):
    text = ("lcx-grid 1\nengine spl\nfrequency_hz 1e9\ngrid_origin 0 0\ngrid_resolution 1\n"
            "shape 2 2\n-1.00,-2.00\n")
    with pytest.raises(ParseError, match="shape"):
        formats.parse_grid(write(tmp_path, "g.csv", text))


def test_cable_spec_text_round_trip(tmp_path, data_dir):
    spec = formats.parse_cable_spec(data_dir / "synthetic_cable.txt")
    again = formats.parse_cable_spec(write(tmp_path, "c.txt", formats.cable_spec_text(spec)))
    assert again == spec


def test_table_text_marks_missing_entries():
    from lcxplan.calibration import ErrorTable
    t = ErrorTable((2.0, 4.0), (Frequency.from_ghz(5.9),), np.array([[1.234], [math.nan]]),
                   np.array([[3], [0]]))
    text = formats.error_table_text(t)
    assert "1.23" in text
    assert len(text.strip().splitlines()) == 3
