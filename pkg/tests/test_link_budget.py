import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from satsec.link_budget import (SPEED_OF_LIGHT, GroundChannelParams, LinkBudget, db_to_linear,
                                ground_pathloss_db, linear_to_db, max_doppler_hz, noise_power)


def test_db_anchors():
    assert db_to_linear(0.0) == 1.0
    assert db_to_linear(30.0) == pytest.approx(1000.0, rel=1e-12)
    assert db_to_linear(31.46) == pytest.approx(1399.5873225726177, rel=1e-12)


@given(st.floats(-200, 200))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-9)


def test_db_rejects_bad_input():
    with pytest.raises(ValueError):
        db_to_linear(float("nan"))
    with pytest.raises(ValueError):
        linear_to_db(0.0)
    with pytest.raises(ValueError):
        linear_to_db(float("inf"))


def test_db_arrays_stay_arrays():
    out = db_to_linear(np.array([0.0, 10.0]))
    np.testing.assert_allclose(out, [1.0, 10.0])


@pytest.mark.parametrize("temp, watts, dbw", [(290, 2.524768123407949e-16, -155.97778501643765),
                                              (321, 2.794657129703281e-16, -155.5367146713785)])
def test_noise_power(temp, watts, dbw):
    p = noise_power(-226.8, temp, 41670)
    assert p == pytest.approx(watts, rel=1e-12)
    assert linear_to_db(p) == pytest.approx(dbw, abs=1e-9)


def test_noise_power_rejects_zero_bandwidth():
    with pytest.raises(ValueError):
        noise_power(-226.8, 290, 0)
    with pytest.raises(ValueError):
        noise_power(-226.8, 0, 41670)


def test_ground_pathloss_value():
    assert ground_pathloss_db(2000, 1.616e9, 3.7) == pytest.approx(158.75472019022203, abs=1e-9)
    assert ground_pathloss_db(2000, 1.616e9, 3.7) == pytest.approx(158.8, abs=0.05)


@given(st.floats(0.5, 6.0))
def test_ground_pathloss_unit_distance(gamma):
    lam = SPEED_OF_LIGHT / 1.616e9
    assert ground_pathloss_db(1.0, 1.616e9, gamma) == pytest.approx(20 * math.log10(4 * math.pi / lam))


def test_ground_pathloss_free_space():
    lam = SPEED_OF_LIGHT / 1.62e9
    friis = 20 * math.log10(4 * math.pi * 1000 / lam)
    assert ground_pathloss_db(1000, 1.62e9, 2.0) == pytest.approx(friis, abs=1e-10)


def test_ground_pathloss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        ground_pathloss_db(0.0, 1.616e9, 3.7)


def test_doppler():
    assert max_doppler_hz(10, 1.616e9) == pytest.approx(53.90395778402137, rel=1e-12)
    assert max_doppler_hz(0, 1.616e9) == 0.0
    with pytest.raises(ValueError):
        max_doppler_hz(-1, 1.616e9)


def test_table_defaults():
    lb = LinkBudget()
    assert lb.sat_doppler_hz == 270.0
    assert lb.fl_tx_power_dbw == 7.65
    assert lb.total_sat_power_w == pytest.approx(1399.587, rel=1e-6)
    assert lb.sat_link_gains_db == pytest.approx(-123.2)
    assert lb.ground_gains_db == pytest.approx(7.0)
    nm = lb.noise_model()
    assert nm.sigma2_sat == pytest.approx(2.524768123407949e-16, rel=1e-12)
    assert nm.sigma2_u1 == nm.sigma2_e2 == pytest.approx(2.794657129703281e-16, rel=1e-12)


def test_link_budget_validation():
    with pytest.raises(ValueError):
        LinkBudget(fl_freq_hz=2.0e9)
    with pytest.raises(ValueError):
        LinkBudget(carrier_bandwidth_hz=0.0)
    with pytest.raises(ValueError):
        LinkBudget(sat_noise_temp_k=float("nan"))


def test_link_budget_file_round_trip(tmp_path):
    lb = LinkBudget(fl_tx_power_dbw=4.0)
    path = tmp_path / "lb.json"
    path.write_text(json.dumps(lb.to_dict()))
    assert LinkBudget.from_file(path) == lb
    with pytest.raises(ValueError):
        LinkBudget.from_dict({"bogus": 1})
    with pytest.raises(OSError, match="missing.json"):
        LinkBudget.from_file(tmp_path / "missing.json")


def test_ground_params_validation():
    with pytest.raises(ValueError):
        GroundChannelParams(eve_distance_range_m=(2500.0, 2000.0))
    with pytest.raises(ValueError):
        GroundChannelParams(pathloss_exponent=1.5)
