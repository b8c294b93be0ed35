import pytest

from catwatt.analysis import billed_curves, billed_for, gate_flop_ratios, physical_decay_curve, verify_suite
from catwatt.optimizer import SearchSpace, optimize, scaling_curve
from catwatt.params import BilledScenario, Level, Scenario


@pytest.fixture(scope="module")
def macro_optimum(cfg):
    return optimize(10, 0.9, SearchSpace.restricted(5, 1, 41), Level.MACRO, cfg)


@pytest.mark.parametrize("field,reference", [("z_energy", 5e3), ("cnot_energy", 3e4), ("z_time", 1e7),
                                             ("cnot_time", 8e7)])
def test_gate_to_flop_ratios_within_factor_three(cfg, macro_optimum, field, reference):
    value = getattr(gate_flop_ratios(macro_optimum, cfg), field)
    assert reference / 3 <= value <= reference * 3, f"{field}={value:.3g}"


def test_billed_curve_matches_timeline_path(cfg, macro_optimum):
    sc = BilledScenario(Scenario.CURRENT, 7.0)
    (n, e), = billed_curves([(10, macro_optimum)], [sc])["current"]
    assert e == pytest.approx(billed_for(10, macro_optimum, cfg, sc).total_energy, rel=1e-12)


def test_billed_curves_keep_scenario_order(cfg):
    curve = scaling_curve([2, 4, 6], 0.9, SearchSpace.restricted(5, 1, 11), Level.MACRO, cfg)
    sc = [BilledScenario(s, p) for s, p in zip(Scenario, (300.0, 30.0, 3.0))]
    out = billed_curves(curve, sc)
    for i in range(3):
        a, b, c = (out[s.value][i][1] for s in Scenario)
        assert a >= b >= c


def test_decay_curve_shape(cfg):
    pts = physical_decay_curve(range(2, 8), cfg)
    ys = [y for _, y in pts]
    assert all(a > b for a, b in zip(ys, ys[1:]))


def test_verify_suite_passes(cfg):
    checks = verify_suite("all", 200_000, 2024, cfg)
    assert len(checks) > 40
    assert all(c.passed for c in checks), [c.line() for c in checks if not c.passed]


def test_verify_unknown_suite(cfg):
    with pytest.raises(ValueError):
        verify_suite("nope", 10, 0, cfg)
