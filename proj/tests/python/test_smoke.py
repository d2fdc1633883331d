import json
import math

import pytest

import ionsim


PROGRAM = """
experiment smoke {
  prep S nbar axial 0
  pulse carrier 7us
  scan duration 0us..20us step 2us
  shots 50
}
"""


def test_default_config_round_trips():
    text = ionsim.default_config()
    cfg = json.loads(text)
    assert cfg["bfield"]["b0_gauss"] == 2.4
    assert cfg["laser"]["sigma_shot_hz"] == 240.0
    assert cfg["modes"]["axial"]["eta"] == 0.068
    # The hash is stable for the same document and sensitive to changes.
    assert ionsim.config_hash(text) == ionsim.config_hash(text)
    cfg["laser"]["sigma_shot_hz"] = 100.0
    assert ionsim.config_hash(json.dumps(cfg)) != ionsim.config_hash(text)


def test_config_rejects_unknown_and_missing_keys():
    cfg = json.loads(ionsim.default_config())
    cfg["unexpected"] = 1
    with pytest.raises(ValueError):
        ionsim.config_hash(json.dumps(cfg))
    del cfg["unexpected"]
    del cfg["laser"]
    with pytest.raises(ValueError):
        ionsim.config_hash(json.dumps(cfg))


def test_parse_and_pretty_print():
    canon = ionsim.parse_program(PROGRAM)
    assert "pulse carrier 7us" in canon
    # Canonical form is a fixed point.
    assert ionsim.parse_program(canon) == canon
    with pytest.raises(ValueError):
        ionsim.parse_program("experiment broken {")


def test_validate_program():
    blocks = ionsim.validate_program(PROGRAM)
    assert len(blocks) == 1
    block = blocks[0]
    assert block["name"] == "smoke"
    assert block["axis"] == "duration"
    assert block["points"] == 11
    assert block["shots"] == 50
    assert block["warnings"] == []


def test_run_program_is_deterministic():
    a = ionsim.run_program(PROGRAM, seed=7)
    b = ionsim.run_program(PROGRAM, seed=7)
    assert a == b
    block = a[0]
    assert block["name"] == "smoke"
    points = block["points"]
    assert len(points) == 11
    values = [p[0] for p in points]
    stats = [p[1] for p in points]
    assert values[0] == 0.0 and values[-1] == 20.0
    # The flop leaves |S> at t = 0 and approaches |D> near the 7 us pi time.
    assert stats[0] == 0.0
    assert stats[3] > 0.8  # t = 6 us
    c = ionsim.run_program(PROGRAM, seed=8)
    assert c != a


def test_run_program_workers_agree():
    a = ionsim.run_program(PROGRAM, seed=3, workers=1)
    b = ionsim.run_program(PROGRAM, seed=3, workers=4)
    assert a == b


def test_fit_helpers():
    pts = [(x, 0.1 + 0.5 * x, 0.05) for x in range(8)]
    rep = ionsim.fit("linear", pts)
    assert rep["model"] == "linear"
    assert math.isclose(rep["params"]["slope"], 0.5, rel_tol=1e-9)
    assert math.isclose(rep["params"]["intercept"], 0.1, rel_tol=1e-6, abs_tol=1e-9)
    assert rep["converged"]
    with pytest.raises(ValueError):
        ionsim.fit("no-such-model", pts)
    with pytest.raises(ValueError):
        ionsim.fit("line-center", pts)  # needs tau_us > 0


def test_susceptibility_and_coupling():
    assert math.isclose(
        ionsim.susceptibility_khz_per_mgauss("S", -1, "S", +1), 2.799248, rel_tol=1e-12)
    assert math.isclose(
        abs(ionsim.susceptibility_khz_per_mgauss("S", -1, "D", -5)), 2.799248, rel_tol=1e-12)
    assert math.isclose(
        ionsim.motional_element("carrier", 0.068, 0), 0.9976906706134507, rel_tol=1e-12)
    assert ionsim.motional_element("red", 0.068, 0) == 0.0
    with pytest.raises(Exception):
        ionsim.motional_element("sideways", 0.068, 0)


def test_figures_registry():
    names = ionsim.figure_names()
    assert "fig3" in names and "fig8" in names
    assert len(names) == 9


def test_run_figure_smoke():
    res = ionsim.run_figure("fig9")
    assert res["name"] == "fig9"
    assert "slope_axial" in res["meta"]
    assert res["tables"]
    for table in res["tables"].values():
        assert table["columns"]
        for row in table["rows"]:
            assert len(row) == len(table["columns"])
    assert res["fits"]
    assert res["summary"]
