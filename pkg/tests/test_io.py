import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vessel_lab.errors import ArgumentError
from vessel_lab.io import (csv_lines, dumps, fmt, jsonable, load_vessel, matrix_from_json,
                           matrix_to_json, params_from_dict, save_vessel, vessel_from_dict,
                           vessel_to_dict)
from vessel_lab.params import VesselParameters
from vessel_lab.vessel import standard_construction, vessel_residuals


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_fmt_round_trips(x):
    assert float(fmt(x)) == x + 0.0


def test_fmt_examples():
    assert fmt(2.0) == "2"
    assert fmt(-0.0) == "0"
    assert fmt(0.1) == "0.1"
    assert fmt(float("inf")) == "inf" and fmt(float("nan")) == "nan"


@given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_matrix_json_round_trip(r, c, seed):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(r, c)) + 1j * rng.normal(size=(r, c))
    data = json.loads(json.dumps(matrix_to_json(M)))
    assert np.array_equal(matrix_from_json(data, r, c), M)


def test_matrix_from_flat_pairs():
    M = matrix_from_json([[1, 0], [0, 1], [2, 0], [0, 0]], 2, 2)
    assert np.array_equal(M, [[1, 1j], [2, 0]])
    with pytest.raises(ArgumentError):
        matrix_from_json([1, 2, 3, 4], 2, 2)


@pytest.mark.parametrize("name", ["rank1", "zero", "diag", "curve8", "nls", "nls4", "canonical"])
def test_vessel_round_trip(request, name, tmp_path):
    v = request.getfixturevalue(name)
    path = tmp_path / "v.json"
    save_vessel(v, str(path))
    w = load_vessel(str(path))
    for x in (0.0, 3.0, 7.5):
        a, b = vessel_residuals(v, x).max(), vessel_residuals(w, x).max()
        assert abs(a - b) <= 1e-12
    assert dumps(vessel_to_dict(w)) == path.read_text()


def test_infinite_interval_is_null(nls):
    d = vessel_to_dict(nls)
    assert d["interval"] == [None, None]
    assert params_from_dict(d).interval == (-math.inf, math.inf)


def test_custom_family_round_trip():
    s1 = np.array([[1, 0], [0, -1]], dtype=complex)
    p = VesselParameters(2, s1, np.eye(2), np.zeros((2, 2)), None, (0.0, math.inf), "Custom")
    v = standard_construction(p, [[1j]], [[1.0, 1.0]], [[1.0]], span=(0.0, 2.0))
    w = vessel_from_dict(json.loads(dumps(vessel_to_dict(v))))
    assert np.array_equal(w.params.s1(0), s1)
    assert np.allclose(w.B(1.0), v.B(1.0))


def test_missing_fields():
    with pytest.raises(ArgumentError):
        vessel_from_dict({"dim_H": 1})
    with pytest.raises(ArgumentError):
        params_from_dict({"dim_E": 2, "family": "Custom"})
    with pytest.raises(ArgumentError):
        params_from_dict({"dim_E": 4, "family": "SL"})


def test_bad_json_file(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    with pytest.raises(ArgumentError):
        load_vessel(str(p))


def test_csv_and_jsonable():
    assert csv_lines(["a", "b"], [[1.0, 0.5]]) == "a,b\n1,0.5\n"
    out = jsonable({"z": 1 + 2j, "a": np.arange(2), "n": np.float64("nan"), "b": np.bool_(True)})
    assert out == {"z": [1.0, 2.0], "a": [0, 1], "n": "nan", "b": True}
