import csv
import io
import json
import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from paneitzlab.output import (ConfigError, ResultEnvelope, RunConfig, dumps, load_config,
                               parse_config_text, plain, svg_line_chart, to_csv)


def test_plain_converts_numpy_and_nonfinite():
    out = plain({"a": np.float64(1.5), "b": np.arange(3), "c": math.inf, "d": math.nan,
                 "e": np.bool_(True), "f": (1, -math.inf)})
    assert out == {"a": 1.5, "b": [0, 1, 2], "c": "inf", "d": "nan", "e": True,
                   "f": [1, "-inf"]}


def test_float_round_trip_is_exact():
    values = [0.1, 1 / 3, 2 ** -1074, 1.7976931348623157e308, -2.5e-17, math.pi ** 3]
    back = json.loads(dumps({"x": values}))["x"]
    assert back == values


def test_envelope_round_trip():
    env = ResultEnvelope(command="verify", config=RunConfig().snapshot(),
                         rows=[{"check": "a", "value": 1e-13, "passed": True}],
                         version="0.1.0", provenance=["paneitz.paneitz_apply"],
                         summary={"passed": True}, timestamp={"wall": "x", "elapsed_s": 0.1})
    again = ResultEnvelope.from_json(env.to_json())
    assert again == env
    assert again.to_json() == env.to_json()


def test_csv_header_units_and_provenance():
    rows = [{"eps": 0.9, "volume": 605.59, "ok": True}, {"eps": 0.99, "volume": math.nan, "ok": False}]
    text = to_csv(rows, ["eps", "volume", "ok"], {"volume": "sigma_n"}, ["op1", "op2"])
    table = list(csv.reader(io.StringIO(text)))
    assert table[0] == ["operation", "eps [1]", "volume [sigma_n]", "ok [1]"]
    assert table[1] == ["op1", "0.90000000000000002", "605.59000000000003", "true"]
    assert table[2][2] == "nan"
    assert text.endswith("\n") and "\r" not in text


def test_config_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# settings\nK = 64\nlmax = 4\nformats = json, csv\n")
    cfg = load_config(path, {"lmax": 6, "n": None})
    assert (cfg.n, cfg.K, cfg.lmax) == (5, 64, 6)
    assert cfg.formats == ("json", "csv")
    assert load_config().K == 128


def test_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        parse_config_text("nonsense")
    with pytest.raises(ConfigError, match="unknown"):
        parse_config_text("colour = red")
    with pytest.raises(ConfigError):
        load_config(overrides={"K": 4})
    with pytest.raises(ConfigError):
        load_config(overrides={"formats": "pdf"})
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.cfg")


def test_svg_is_well_formed():
    svg = svg_line_chart([0, 1, 2], {"a": [1, 10, 100], "b & c": [2, math.nan, 4]},
                         title="t<1>", logy=True)
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert svg.count("<polyline") >= 2
