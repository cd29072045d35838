import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from foamfab.errors import EmissionError, GCodeParseError, GeometryError
from foamfab.gcode import (
    emit_injection,
    emit_marking,
    fmt,
    motion_targets,
    parse,
    simulate,
)
from foamfab.geometry import Column, Contour, FoamBlock, build_grid
from foamfab.plan import MachineParams, build_motion_sets, divide_jobs, order_columns

FOAM = FoamBlock(60.0, 60.0, 50.0)
MP = MachineParams(foam=FOAM, inject_speed=1000)
GRID = build_grid(FOAM, 2.0)


def one_column(segs=((0.0, 50.0),)):
    return build_motion_sets([Column((0, 0), GRID.center(0, 0), tuple(segs))], MP)


def lines(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith(";")]


def test_fmt():
    assert fmt(0) == "0.000"
    assert fmt(-0.0001) == "0.000"
    assert fmt(12.3456) == "12.346"


def test_single_column_lines():
    out = lines(emit_injection(one_column(), MP, 2.0))
    assert "G1 Z0.000 F500" in out
    assert out[0:2] == ["G21", "G90"]
    assert out[-1] == "M2"
    travel = [ln for ln in out if ln.startswith("G0")]
    assert travel and all(ln.endswith("F5000") for ln in travel)
    assert out.count("M3") == out.count("M5") == 1
    assert "G1 Z50.000 F1000" in out


def test_empty_plan_is_header_and_footer():
    out = lines(emit_injection([], MP, 2.0))
    assert out == ["G21", "G90", "G0 Z55.000 F5000", "M2"]
    assert simulate(parse(emit_injection([], MP, 2.0)), MP).ok


def test_gap_column_toggles_valve_twice():
    out = lines(emit_injection(one_column(((0.0, 20.0), (30.0, 50.0))), MP, 2.0))
    assert out.count("M3") == 2 and out.count("M5") == 2
    i = out.index("G1 Z20.000 F1000")
    assert out[i + 1] == "M5" and out[i + 2] == "G1 Z30.000 F1000" and out[i + 3] == "M3"


def test_emission_out_of_bounds():
    ms = build_motion_sets([Column((0, 0), (70.0, 10.0), ((0.0, 10.0),))], MP)
    with pytest.raises(EmissionError):
        emit_injection(ms, MP, 2.0)


def square(x0, y0, x1, y1, hole=False):
    return Contour(((x0, y0), (x1, y0), (x1, y1), (x0, y1), (x0, y0)), hole)


def test_marking_rectangle():
    out = lines(emit_marking([square(15, 15, 45, 45)], MP))
    assert "G0 X15.000 Y15.000 Z55.000 F5000" in out
    assert "G1 Z50.000 F500" in out
    edges = [ln for ln in out if ln.startswith("G1 X")]
    assert edges == [
        "G1 X45.000 Y15.000 F1000",
        "G1 X45.000 Y45.000 F1000",
        "G1 X15.000 Y45.000 F1000",
        "G1 X15.000 Y15.000 F1000",
    ]
    assert simulate(parse("\n".join(out)), MP).ok


def test_marking_two_contours():
    out = lines(emit_marking([square(5, 5, 20, 20), square(30, 30, 50, 50)], MP))
    assert sum(ln.startswith("G0 X") for ln in out) == 2
    assert out.count("G1 Z50.000 F500") == 2


def test_marking_rejects_far_outside():
    with pytest.raises(EmissionError):
        emit_marking([square(-5, 5, 20, 20)], MP)
    with pytest.raises(GeometryError):
        Contour(((0, 0), (1, 0), (1, 1)), False)


@pytest.mark.parametrize(
    "text,line",
    [
        ("G21\nG1 X5\n", 2),
        ("G21\nG0 X1 Y2\nG7\n", 3),
        ("g0 X1\n", 1),
        ("G0 X1..2\n", 1),
        ("G0 Q5\n", 1),
        ("G0 X1 X2\n", 1),
        ("M3 X1\n", 1),
        ("X5\n", 1),
        ("G0 F0\n", 1),
    ],
)
def test_parse_errors(text, line):
    with pytest.raises(GCodeParseError, match=f"^line {line}:") as exc:
        parse(text)
    assert exc.value.line == line


def test_parse_modal_state():
    cmds = parse("G0 X1 Y2 Z3 F5000\n; hi\nG1 Z1 F500\n")
    assert cmds[1].kind == "comment"
    assert cmds[2].target == (1, 2, 1) and cmds[2].feed == 500


def round_trip_check(motion_sets, mp):
    cmds = [c for c in parse(emit_injection(motion_sets, mp, 2.0)) if c.kind in ("G0", "G1")]
    expected = motion_targets(motion_sets, mp)
    assert len(cmds) == len(expected)
    for c, ((x, y, z), f) in zip(cmds, expected):
        if x is not None:
            assert abs(c.x - x) <= 1e-6 and abs(c.y - y) <= 1e-6
        assert abs(c.z - z) <= 1e-6
        assert c.feed == f


def random_plan(rng, n):
    cells = {(rng.randint(-8, 8), rng.randint(-8, 8)) for _ in range(n)}
    cols = []
    for q, r in cells:
        a = round(rng.uniform(0, 20), 3)
        b = round(rng.uniform(a + 1, 50), 3)
        segs = [(a, b)]
        if b < 45 and rng.random() < 0.3:
            segs.append((round(b + 2, 3), 50.0))
        cols.append(Column((q, r), GRID.center(q, r), tuple(segs)))
    return order_columns(cols, GRID)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 60))
def test_round_trip_and_lint(seed, n):
    rng = random.Random(seed)
    order = random_plan(rng, n)
    for pf in divide_jobs(order, 2.0, 800.0) or []:
        ms = pf.motion_sets(MP)
        round_trip_check(ms, MP)
        sim = simulate(parse(emit_injection(ms, MP, pf.cell_area)), MP, cell_area=pf.cell_area, capacity=800.0)
        assert sim.ok, sim.report()
        assert sim.volume == pytest.approx(pf.volume, rel=1e-6)


def test_simulator_flags_low_travel():
    text = "G21\nG90\nG0 Z52 F5000\nG0 X10 Y10 F5000\nM2\n"
    sim = simulate(parse(text), MP)
    assert [d.line for d in sim.diagnostics] == [4]
    assert "below safe height" in sim.diagnostics[0].message


def test_simulator_flags_inside_foam_and_dispense_rules():
    text = "\n".join([
        "G0 X10 Y10 Z55 F5000",
        "G1 Z10 F500",
        "M3",
        "G1 X12 F500",
        "G1 Z5 F500",
        "G1 Z30 F700",
        "G0 Z55 F5000",
        "M2",
        "G0 Z55 F5000",
    ])
    msgs = [str(d) for d in simulate(parse(text), MP, cell_area=2.0).diagnostics]
    assert any(m.startswith("line 4: dispense during horizontal") for m in msgs)
    assert any(m.startswith("line 4: horizontal move inside the foam") for m in msgs)
    assert any(m.startswith("line 5: dispense during descent") for m in msgs)
    assert any(m.startswith("line 6: feed F700") for m in msgs)
    assert any(m.startswith("line 7: dispense during rapid") for m in msgs)
    assert any(m.startswith("line 8: program ends with the dispense valve open") for m in msgs)
    assert any(m.startswith("line 9: command after M2") for m in msgs)


def test_simulator_missing_m2():
    sim = simulate(parse("G0 Z55 F5000\n"), MP)
    assert "does not end with M2" in sim.diagnostics[0].message


def test_simulator_capacity():
    text = emit_injection(one_column(), MP, 2.0, {"syringe_capacity_mm3": "50.000"})
    sim = simulate(parse(text), MP, cell_area=2.0)
    assert sim.volume == pytest.approx(100)
    assert "exceeds syringe capacity" in sim.diagnostics[-1].message
    assert simulate(parse(text), MP, cell_area=2.0, capacity=100).ok


def test_volume_agreement_gap_column():
    ms = one_column(((0.0, 20.0), (30.0, 50.0)))
    sim = simulate(parse(emit_injection(ms, MP, 2.5)), MP, cell_area=2.5)
    assert sim.ok
    assert sim.volume == pytest.approx(2.5 * 40, rel=1e-12)
