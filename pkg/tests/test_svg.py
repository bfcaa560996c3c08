import numpy as np
import pytest

from evanshock.bounds import g_eval
from evanshock.model import ShockParams
from evanshock.svg import EmptyDatasetError, emit_svg


def _g_data():
    p = ShockParams(2.0, 1e-4)
    v = np.geomspace(1.01e-4, 0.99, 200)
    return {"v": v, "g": g_eval(v, p), "gamma": 2.0, "v_plus": 1e-4}


def test_g_curve_deterministic(tmp_path):
    a = emit_svg(_g_data(), "g_curve", tmp_path / "a.svg", {"gamma": 2.0})
    b = emit_svg(_g_data(), "g_curve", None, {"gamma": 2.0})
    assert a == b
    assert (tmp_path / "a.svg").read_text() == a
    assert '<!-- evanshock g_curve; config: {"gamma": 2.0} -->' in a
    assert a.lstrip().startswith("<?xml") and "</svg>" in a


def test_config_changes_bytes():
    assert emit_svg(_g_data(), "g_curve", config={"x": 1}) != emit_svg(_g_data(), "g_curve", config={"x": 2})


def test_comment_is_well_formed():
    text = emit_svg(_g_data(), "g_curve", config={"flag": "--a"})
    comment = text.split("<!--", 1)[1].split("-->", 1)[0]
    assert "--" not in comment


def test_boundary_map():
    g = np.linspace(1.05, 3, 10)
    data = {"gamma": g, "vplus_sharp": 0.1 / g, "vplus_mn": 0.2 / g, "iso_mach": {2.0: 0.3 / g}}
    text = emit_svg(data, "boundary_map")
    assert "M = 2" in text


def test_contour_pair_and_snapshots():
    t = np.linspace(0, 2 * np.pi, 20)
    assert "winding = 0" in emit_svg({"lambda": np.exp(1j * t), "D": 2 + np.exp(1j * t),
                                      "winding": 0}, "contour_pair")
    x = np.linspace(-1, 1, 5)
    panel = [(k * 1.0, x, x, -x) for k in range(4)]
    text = emit_svg({"snapshots": panel}, "snapshot_panel")
    assert text.count("t = ") == 4


def test_errors():
    with pytest.raises(EmptyDatasetError):
        emit_svg({"v": []}, "g_curve")
    with pytest.raises(ValueError):
        emit_svg(_g_data(), "pie")
