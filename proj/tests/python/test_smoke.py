"""Smoke tests for the python bindings."""

import json
import math

import pytest

import monofield as mf


def test_builtin_and_values():
    f = mf.builtin_field("linear", 33)
    assert f.nx == 33 and f.ny == 33
    assert f.h == pytest.approx(1.0 / 32)
    values = f.values()
    assert len(values) == 33 * 33
    assert values[0] == 0.0
    assert values[32] == 1.0
    assert f.min() == 0.0 and f.max() == 1.0


def test_masked_field_roundtrip():
    f = mf.builtin_field("radial-annulus", 33)
    values = f.values()
    assert values[0] is None  # corner is outside the annulus
    g = mf.field_from_values(f.nx, f.ny, f.h, *f.origin, values)
    assert g.values() == values
    h = mf.field_from_json(f.to_json())
    assert h.values() == values


def test_monotonicity():
    assert mf.is_monotone(mf.builtin_field("linear", 33))["monotone"]
    assert mf.is_monotone(mf.builtin_field("saddle", 33))["monotone"]
    report = mf.is_monotone(mf.builtin_field("bowl-disk", 33))
    assert not report["monotone"]
    (i, j) = report["witnesses"][0]["node"]
    assert (i, j) == (16, 16)  # the origin node
    assert not mf.is_strictly_monotone(mf.builtin_field("bowl-disk", 33))["monotone"]
    assert mf.local_extremal_values(mf.builtin_field("bowl-disk", 33)) == [0.0]


def test_level_sets():
    ring = mf.extract_level_set(mf.builtin_field("radial-annulus", 129), 0.5)
    assert ring["regular"]
    [circle] = ring["components"]
    assert circle["class"] == "JordanCurve"
    assert circle["length"] == pytest.approx(math.pi, rel=0.01)

    saddle = mf.extract_level_set(mf.builtin_field("saddle", 128), 0.0)
    assert saddle["junctions"] >= 1

    [t] = mf.select_regular_levels(mf.builtin_field("saddle", 128), [0.0], 0.05)
    assert t != 0.0


def test_coarea_and_energy():
    ann = mf.builtin_field("radial-annulus", 129)
    report = mf.coarea_check(ann, 64)
    assert report["rel_error"] <= 0.02
    assert mf.p_energy(mf.builtin_field("linear", 65), 2.0) == pytest.approx(1.0)

    lin = mf.builtin_field("linear", 33)
    assert mf.sup_distance(lin, lin) == 0.0


def test_approximate():
    result = mf.approximate(mf.builtin_field("radial-annulus", 65), eps=0.3, p=2.0)
    assert result["all_pass"]
    assert result["sup_dist"] < 0.3
    assert result["p_harmonic_fraction"] > 0.5
    report = json.loads(result["report"])
    assert report["stages"][0]["name"] == "step1-band-replace"


def test_errors_surface_as_python_exceptions():
    with pytest.raises(mf.MonofieldError):
        mf.builtin_field("no-such-field", 33)
    with pytest.raises(mf.MonofieldError):
        mf.approximate(mf.builtin_field("bowl-disk", 33), eps=0.2, p=2.0)
