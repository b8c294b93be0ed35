import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catwatt.circuit import build_logical_qft, build_physical_qft
from catwatt.fidelity import (
    average_fidelity,
    compose_channel,
    logical_suppression,
    qubit_fidelity,
    total_fidelity,
)
from catwatt.gates import GateTable
from catwatt.model import evaluate
from catwatt.params import TWO_PI, CodeConfig, OperatingPoint

probs = st.floats(0.0, 0.5, allow_nan=False)


def test_single_gate_channel():
    assert compose_channel([0.123])[1] == pytest.approx(0.123, rel=1e-15)


def test_two_gate_channel():
    lam, p = compose_channel([0.1, 0.1])
    assert lam == pytest.approx(0.64, rel=1e-15) and p == pytest.approx(0.18, rel=1e-15)


def test_exact_channel_with_fractions():
    lam, p = compose_channel([Fraction(1, 10), Fraction(1, 10)])
    assert lam == Fraction(16, 25) and p == Fraction(9, 50)


def test_channel_rejects_bad_probability():
    with pytest.raises(ValueError):
        compose_channel([0.6])


@settings(max_examples=300, deadline=None)
@given(a=st.lists(probs, max_size=8), b=st.lists(probs, max_size=8))
def test_compose_is_associative_and_order_free(a, b):
    whole = compose_channel(a + b)[1]
    halves = compose_channel([compose_channel(a)[1], compose_channel(b)[1]])[1]
    assert whole == pytest.approx(halves, abs=1e-14)
    assert compose_channel(list(reversed(a + b)))[1] == pytest.approx(whole, abs=1e-14)


def test_suppression_reference():
    assert logical_suppression(Fraction(1, 10), 3) == Fraction(28, 1000)
    assert logical_suppression(0.1, 3) == pytest.approx(0.028, rel=1e-14)
    assert logical_suppression(0.3, 1) == 0.3


@pytest.mark.parametrize("d", [1, 3, 5, 7, 15, 25])
def test_suppression_fixed_point_at_half(d):
    assert logical_suppression(Fraction(1, 2), d) == Fraction(1, 2)
    assert logical_suppression(0.5, d) == pytest.approx(0.5, rel=1e-14)
    assert logical_suppression(0.0, d) == 0.0


@settings(max_examples=300, deadline=None)
@given(p=st.floats(1e-6, 0.4999), d=st.sampled_from([3, 5, 7, 9, 11, 25]))
def test_suppression_below_physical_error(p, d):
    assert logical_suppression(p, d) < p


def test_suppression_float_matches_exact():
    for d in range(1, 26, 2):
        for p in (0.001, 0.05, 0.2, 0.45):
            exact = logical_suppression(Fraction(p), d)
            assert logical_suppression(p, d) == pytest.approx(float(exact), rel=1e-12)


def test_suppression_rejects_even_distance():
    with pytest.raises(ValueError):
        logical_suppression(0.1, 4)


def test_zero_error_gives_unit_fidelity():
    (p,) = build_physical_qft(1)
    rep = qubit_fidelity(p, None, lambda g: 0.0)
    assert rep.avg_fidelity == 1.0 and rep.p_total == 0.0


def test_physical_report_matches_channel(cfg, op):
    table = GateTable(cfg.pc, cfg.mf, op)
    p = build_physical_qft(4)[3]
    rep = qubit_fidelity(p, None, table)
    lam, pt = compose_channel([table.pz(g) for s in p.steps if s.kind.value != "prep" for g in s.channel])
    assert rep.p_total == pytest.approx(pt, rel=1e-14)
    assert len(rep.segments) == 1
    assert rep.avg_fidelity == pytest.approx(1 - 2 * pt / 3, rel=1e-15)


def test_two_segment_hand_value():
    progs, _ = build_logical_qft(2, CodeConfig(3, 1, True))
    p = progs[1]  # one rotation, one QEC round, then the measurement
    rot, meas = p.steps[4], p.steps[-1]
    pz = {}
    for g in rot.channel:
        pz[g] = 0.0
    pz[rot.channel[1]] = 0.1
    for g in meas.channel:
        pz.setdefault(g, 0.0)
    pz[meas.channel[0]] = 0.1  # measurement's Z(pi/2); same gate kind as the rotation
    rep = qubit_fidelity(p, CodeConfig(3, 1, True), pz)
    assert [s.p_corrected for s in rep.segments] == pytest.approx([0.028, 0.028], rel=1e-12)
    assert rep.p_total == pytest.approx((1 - (1 - 0.056) ** 2) / 2, rel=1e-12)
    assert rep.p_total == pytest.approx(0.05443, abs=1e-5)
    assert rep.avg_fidelity == pytest.approx(0.96371, abs=1e-5)


def test_distance_one_logical_equals_channel(cfg, op):
    table = GateTable(cfg.pc, cfg.mf, op)
    a = qubit_fidelity(build_physical_qft(5)[4], None, table)
    progs, _ = build_logical_qft(5, CodeConfig(1, None, True))
    b = qubit_fidelity(progs[4], CodeConfig(1, None, True), table)
    assert a.p_total == b.p_total


def test_total_fidelity_products():
    class R:
        def __init__(self, f):
            self.avg_fidelity = f

    assert total_fidelity([R(1.0), R(1.0)]) == 1.0
    assert total_fidelity([R(0.9), R(0.9)]) == pytest.approx(0.81)


def test_average_fidelity_range():
    assert average_fidelity(0.5) == pytest.approx(2 / 3)


def test_underflow_is_flagged():
    last = build_physical_qft(60)[-1]  # 64 channel gates
    rep = qubit_fidelity(last, None, lambda g: 0.49999)  # lambda = (2e-5)^64 ~ 1e-301
    assert rep.underflow and rep.lam == 0.0 and rep.p_total == 0.5
    rep = qubit_fidelity(last, None, lambda g: 0.49)
    assert not rep.underflow and rep.lam > 0


def test_fig4_decay_rate(cfg):
    from catwatt.analysis import physical_decay_curve
    from catwatt.fitting import FitModel, fit

    f = fit(FitModel.EXP_DECAY, physical_decay_curve(range(2, 31), cfg))
    assert 0.25 <= f["b"] <= 0.34


@pytest.mark.parametrize("code", [CodeConfig(), CodeConfig(5, 1, True), CodeConfig(3, 2, True)])
def test_last_qubit_is_least_faithful(cfg, code):
    K = np.geomspace(100, 50000, 9)[:, None]
    E = TWO_PI * np.linspace(0.5e6, 40.5e6, 9)[None, :]
    op = OperatingPoint(3.0, K, E, 1.0)
    ev = evaluate(8, code, cfg.pc, cfg.mf, op, cfg.options, levels=())
    for r in ev.reports[:-1]:
        assert np.all(ev.fidelity_last <= r.avg_fidelity + 1e-15)
    assert np.array_equal(ev.fidelity_min, ev.fidelity_last)


def test_logical_beats_physical_cellwise(cfg):
    K = np.geomspace(100, 50000, 15)[:, None]
    E = TWO_PI * np.linspace(0.5e6, 40.5e6, 15)[None, :]
    op = OperatingPoint(3.0, K, E, 1.0)
    phys = evaluate(10, CodeConfig(), cfg.pc, cfg.mf, op, cfg.options, levels=())
    logi = evaluate(10, CodeConfig(5, 1, True), cfg.pc, cfg.mf, op, cfg.options, levels=())
    assert np.all(logi.fidelity_total > phys.fidelity_total)


def test_readout_option_scales_fidelity(cfg, op):
    table = GateTable(cfg.pc, cfg.mf, op)
    p = build_physical_qft(3)[2]
    a = qubit_fidelity(p, None, table)
    b = qubit_fidelity(p, None, table, include_readout=True)
    from catwatt.gates import readout_fidelity, readout_optimal_time

    assert b.avg_fidelity == pytest.approx(a.avg_fidelity * float(readout_fidelity(readout_optimal_time(cfg.pc),
                                                                                   cfg.pc)))


def test_fidelity_non_increasing_in_n(cfg):
    K = np.geomspace(100, 50000, 7)[:, None]
    E = TWO_PI * np.linspace(0.5e6, 40.5e6, 7)[None, :]
    op = OperatingPoint(3.0, K, E, 1.0)
    for code in (CodeConfig(), CodeConfig(5, 1, True)):
        prev = None
        for n in range(1, 16):
            f = evaluate(n, code, cfg.pc, cfg.mf, op, cfg.options, levels=()).fidelity_total
            if prev is not None:
                assert np.all(f <= prev)
            prev = f
