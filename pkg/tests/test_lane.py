import json
import math

import numpy as np
import pytest
from hypothesis import given

from conftest import lanes
from restime.errors import BiasOutOfRangeError, ValidationError
from restime.lane import (
    HomogeneousParams,
    Lane,
    ModelA,
    ModelB,
    ModelC,
    ModelD,
    Static,
    StaticDefect,
    apply_static_defect,
    lane_from_json,
    lane_to_json,
    load_lane,
    make_homogeneous_lane,
    resolve_length,
)


@pytest.mark.parametrize("L", [0, 1, -3])
def test_lane_rejects_short(L):
    with pytest.raises(ValidationError):
        Lane(L, np.full(max(L - 1, 0), 0.5))


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_lane_rejects_closed_probabilities(bad):
    with pytest.raises(ValidationError):
        Lane(4, [0.5, bad, 0.5])


def test_lane_rejects_wrong_size():
    with pytest.raises(ValidationError):
        Lane(5, [0.5, 0.5])


def test_lane_is_immutable():
    lane = make_homogeneous_lane(5, 0.3)
    with pytest.raises(ValueError):
        lane.p[0] = 0.9
    np.testing.assert_allclose(lane.q, 0.7)
    assert lane.n_transient == 4
    assert lane.is_homogeneous()


def test_lane_copies_input():
    p = np.array([0.2, 0.4])
    lane = Lane(3, p)
    p[0] = 0.9
    assert lane.p[0] == 0.2


@given(lanes())
def test_reflection_is_an_involution(lane):
    twice = lane.reflected().reflected()
    assert twice.L == lane.L
    np.testing.assert_allclose(twice.p, lane.p, rtol=0, atol=1e-16)
    np.testing.assert_array_equal(lane.reflected().p, (1 - lane.p)[::-1])


def test_resolve_length():
    assert resolve_length(length=102) == (102, "length")
    assert resolve_length(transient=101) == (102, "transient")
    assert resolve_length(default=102) == (102, "default")
    with pytest.raises(ValidationError):
        resolve_length(length=3, transient=2)
    with pytest.raises(ValidationError):
        resolve_length()


def test_homogeneous_params():
    hp = HomogeneousParams(0.6)
    assert hp.q == pytest.approx(0.4)
    assert hp.drift == pytest.approx(0.2)
    assert hp.A == pytest.approx(2 / 3)
    assert not hp.symmetric
    assert HomogeneousParams(0.5).symmetric
    with pytest.raises(ValidationError):
        HomogeneousParams(1.0)


def test_static_defect_applied():
    lane = apply_static_defect(make_homogeneous_lane(6, 0.5), StaticDefect(3, 0.2))
    np.testing.assert_allclose(lane.p, [0.5, 0.5, 0.7, 0.5, 0.5])


@pytest.mark.parametrize("d", [1, 5, 0])
def test_static_defect_site_bounds(d):
    with pytest.raises(ValidationError):
        apply_static_defect(make_homogeneous_lane(6, 0.5), StaticDefect(d, 0.1))


@pytest.mark.parametrize("eps", [0.5, -0.5, 0.7])
def test_static_defect_bias_bounds(eps):
    with pytest.raises(BiasOutOfRangeError):
        apply_static_defect(make_homogeneous_lane(6, 0.5), StaticDefect(3, eps))


def test_dynamics_validation():
    ModelA(3, 0.2, 0.5).validate(6)
    with pytest.raises(ValidationError):
        ModelA(3, 0.2, 1.5).validate(6)
    with pytest.raises(ValidationError):
        ModelB(3, 0.2, 0.0, 1.0).validate(6)
    assert ModelB(3, 0.2, 3.0, 1.0).attached_fraction == 0.75
    with pytest.raises(ValidationError):
        ModelD(3, 0.2, 2).validate(10)
    with pytest.raises(ValidationError):
        ModelD(7, 0.2, 2).validate(10)
    ModelD(5, 0.2, 3).validate(10)
    ModelC(0.3).validate(2)
    with pytest.raises(ValidationError):
        Static(1, 0.1).validate(10)


@given(lanes())
def test_json_round_trip(lane):
    assert lane_from_json(lane_to_json(lane)) == lane


def test_load_lane(tmp_path):
    path = tmp_path / "lane.json"
    path.write_text(json.dumps({"L": 3, "p": [0.25, 0.75]}))
    assert load_lane(path) == Lane(3, [0.25, 0.75])


@pytest.mark.parametrize("text", ["{", '{"L": 3}', '{"L": 3, "p": [0.5]}', "[]"])
def test_lane_json_malformed(text):
    with pytest.raises(ValidationError):
        lane_from_json(text)
