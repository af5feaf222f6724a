"""Smoke test for the adelic_gabor_py extension module.

Install it first, either with

    pip install --no-build-isolation ./crates/python

(needs maturin) or by copying the built library next to this script:

    cargo build --release -p adelic-gabor-python --features extension-module
    cp target/release/libadelic_gabor_py.so python/adelic_gabor_py.so
    python3 python/smoke_test.py
"""
import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import adelic_gabor_py as ag


def main():
    g = ag.Window("gaussian")
    assert abs(g.eval(0.0) - 1.0) < 1e-15
    assert abs(g.norm() - 2 ** -0.25) < 1e-14

    lat = ag.Lattice("adele", "sqrt:1/2")
    assert abs(lat.density - 0.5) < 1e-15
    lower, upper = ag.frame_bounds(g, lat)
    assert 0 < lower <= upper

    h = ag.canonical_dual(g, lat)
    rep = ag.wexler_raz_check(g, h, lat)
    assert rep["verdict"] == "dual", rep["verdict"]
    assert rep["max_residual"] < 1e-8
    assert ag.wexler_raz_check(g, g, lat)["verdict"] == "not-dual"

    again = ag.Window.from_json(h.to_json())
    assert abs(again.eval(0.3) - h.eval(0.3)) == 0.0

    turns, _ = ag.character_pair("1/2", "1/2", alpha="1")
    assert turns == "0/1"
    turns, _ = ag.character_pair("1/3", "1/4", alpha="2/5", beta="5/2")
    assert turns == "0/1"

    ball = ag.char_ball_integral(3, "1", "0", -1)
    assert abs(ball["re"]) < 1e-15 and abs(ball["im"]) < 1e-15
    ball = ag.char_ball_integral(3, "3", "0", -1)
    assert abs(ball["re"] - 3.0) < 1e-15

    proj = ag.projection_check(ag.Window("box:1"), ag.Lattice("adele", "1"))
    assert proj["verdict"] == "projection"
    assert ag.projection_check(g, ag.Lattice("adele", "1"))["verdict"] == "not-a-frame"

    text, code = ag.run("pair", q="1/2", r="1/2")
    report = json.loads(text)
    assert code == 0 and report["schema"] == "adelic-gabor/1"
    assert report["result"]["exactly_one"] is True

    try:
        ag.Window("hat")
    except ValueError:
        pass
    else:
        raise AssertionError("bad window spec accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
