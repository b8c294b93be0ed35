import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catwatt.params import (
    TWO_PI,
    CodeConfig,
    ConfigError,
    Level,
    OperatingPoint,
    config_from_mapping,
    config_to_mapping,
    default_config_path,
    derived_kappa2,
    dump_config,
    epsilon_d,
    load_config,
    parse_config_text,
)


def test_bundled_config_matches_reference_constants(cfg):
    pc, mf = cfg.pc, cfg.mf
    assert pc.kappa1 == pytest.approx(TWO_PI * 25e3)
    assert pc.kappa_b == pytest.approx(TWO_PI * 40e3)
    assert (pc.nth_m, pc.nth_b) == (0.2, 0.02)
    assert (pc.p_const, pc.d_const, pc.z_const, pc.c_const) == (1.35e-21, 3.0e-32, 1.1e-27, 1.2e-19)
    assert pc.g_l == pytest.approx(TWO_PI * 5e9)
    assert (pc.a1, pc.a2, pc.a3) == (2.7, 1.0, 2.8)
    assert (mf.M_p, mf.M_d, mf.M_z, mf.M_c, mf.M_l) == (1.26e6, 1.5e10, 1.5e8, 1.26e6, 1.26e6)
    assert pc.l_const == pc.p_const / 4


@pytest.mark.parametrize("ratio,mhz", [(1000, 25.0), (100, 2.5), (1500, 37.5)])
def test_derived_kappa2(cfg, ratio, mhz):
    op = OperatingPoint(3.0, ratio, 1.0, 1.0)
    assert derived_kappa2(cfg.pc, op) / TWO_PI == pytest.approx(mhz * 1e6, rel=1e-14)


def test_epsilon_d_reference_value(cfg):
    op = OperatingPoint(3.0, 1000.0, 1.0, 1.0)
    k2 = 1000 * cfg.pc.kappa1
    expect = (9 + 0.001) * math.sqrt(cfg.pc.kappa_b * k2) / 2
    assert epsilon_d(cfg.pc, op) == pytest.approx(expect, rel=1e-14)


def test_epsilon_d_small_alpha_limit(cfg):
    op = OperatingPoint(1e-9, 100.0, 1.0, 1.0)
    k2 = 100 * cfg.pc.kappa1
    assert epsilon_d(cfg.pc, op) == pytest.approx((0.01 + 1e-18) * math.sqrt(cfg.pc.kappa_b * k2) / 2, rel=1e-12)


def test_epsilon_d_dominant_term_scales_sqrt2(cfg):
    a = epsilon_d(cfg.pc, OperatingPoint(3.0, 1000.0, 1.0, 1.0))
    b = epsilon_d(cfg.pc, OperatingPoint(3.0, 2000.0, 1.0, 1.0))
    assert b / a == pytest.approx(math.sqrt(2), rel=1e-4)


def test_epsilon_d_increasing_in_alpha(cfg):
    alphas = np.linspace(0.5, 6, 50)
    vals = epsilon_d(cfg.pc, OperatingPoint(alphas, 1000.0, 1.0, 1.0))
    assert np.all(np.diff(vals) > 0)


def test_even_distance_rejected_with_key(tmp_path):
    text = dump_config(load_config(default_config_path())).replace("d_c = 5", "d_c = 4")
    p = tmp_path / "c.cfg"
    p.write_text(text)
    with pytest.raises(ConfigError) as e:
        load_config(p)
    assert e.value.key == "d_c"


def test_missing_eta_names_eta():
    values = parse_config_text(default_config_path().read_text())
    values.pop("eta")
    with pytest.raises(ConfigError) as e:
        config_from_mapping(values)
    assert e.value.key == "eta"


@pytest.mark.parametrize("key,bad", [("kappa1_over_2pi_hz", "-1"), ("M_p", "0.5"), ("kappa2_ratio", "50"),
                                     ("eta", "1.5"), ("alpha", "0")])
def test_invalid_values_name_their_key(key, bad):
    values = parse_config_text(default_config_path().read_text())
    values[key] = float(bad)
    with pytest.raises(ConfigError) as e:
        config_from_mapping(values)
    assert e.value.key == key


def test_code_config_rules():
    with pytest.raises(ConfigError):
        CodeConfig(2)
    with pytest.raises(ConfigError):
        CodeConfig(3, 0, True)
    assert CodeConfig(5, None, True).n_b is None


def test_level_aliases():
    assert Level.parse("MICRO") is Level.MICRO
    assert Level.parse(Level.BILLED) is Level.BILLED
    with pytest.raises(ValueError):
        Level.parse("nano")


def test_unit_discipline(cfg):
    for ratio in (100.0, 777.0, 50000.0):
        op = OperatingPoint(3.0, ratio, 1.0, 1.0)
        assert derived_kappa2(cfg.pc, op) / TWO_PI == pytest.approx(ratio * 25e3, rel=1e-14)


def test_round_trip_is_bit_exact(cfg):
    again = config_from_mapping(parse_config_text(dump_config(cfg)))
    assert config_to_mapping(again) == config_to_mapping(cfg)
    assert again.pc == cfg.pc and again.mf == cfg.mf and again.code == cfg.code
    assert again.op.epsilon_z == cfg.op.epsilon_z


@settings(max_examples=200, deadline=None)
@given(k1=st.floats(1e2, 1e7), eps=st.floats(1e4, 1e9), g=st.floats(1e3, 1e9), ratio=st.floats(100, 1e6),
       nth=st.floats(0, 3), mp=st.floats(1, 1e12))
def test_round_trip_random_values(cfg, k1, eps, g, ratio, nth, mp):
    m = config_to_mapping(cfg)
    m.update(kappa1_over_2pi_hz=k1, epsilon_z_over_2pi_hz=eps, g_cnot_over_2pi_hz=g, kappa2_ratio=ratio,
             nth_m=nth, M_p=mp)
    a = config_from_mapping(m)
    b = config_from_mapping(parse_config_text(dump_config(a)))
    assert b.pc == a.pc and b.mf == a.mf
    assert b.op.epsilon_z == a.op.epsilon_z and b.op.g_cnot == a.op.g_cnot
    assert b.op.kappa2_ratio == a.op.kappa2_ratio
