import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from catwatt.classical import (
    EL_CAPITAN,
    KAIROS,
    Branch,
    Mode,
    beta_for,
    classical_energy,
    classical_time,
    compare,
    crossover_closed_form,
    crossover_numeric,
    fft_flops,
    lambert_w,
)


def test_fft_flop_counts():
    assert fft_flops(8) == 120
    assert fft_flops(2) == 10
    assert fft_flops(2**26) == 5 * 2**26 * 26
    for bad in (0, 1, 3, 12):
        with pytest.raises(ValueError):
            fft_flops(bad)


def test_energy_per_flop_values():
    assert f"{KAIROS.energy_per_flop:.4g}" == "1.365e-11"
    assert f"{EL_CAPITAN.energy_per_flop:.4g}" == "1.641e-11"


def test_classical_reference_energy():
    assert classical_energy(KAIROS, 8) == pytest.approx(120 * KAIROS.energy_per_flop)
    assert classical_energy(KAIROS, 8) == pytest.approx(1.638e-9, rel=1e-3)
    assert classical_time(EL_CAPITAN, 8) == pytest.approx(120 / 1.809e18)


def test_lambert_w_special_values():
    assert lambert_w(Branch.PRINCIPAL, 0.0) == 0.0
    assert lambert_w(Branch.PRINCIPAL, math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w(Branch.MINUS_ONE, -1 / math.e) == -1.0
    assert lambert_w(0, -1 / math.e) == -1.0


def test_lambert_w_domain():
    with pytest.raises(ValueError):
        lambert_w(Branch.PRINCIPAL, -0.5)
    with pytest.raises(ValueError):
        lambert_w(Branch.MINUS_ONE, 0.1)


@settings(max_examples=500, deadline=None)
@given(y=st.floats(-1 / math.e, 1e300))
def test_principal_branch_identity(y):
    w = lambert_w(Branch.PRINCIPAL, y)
    assert w >= -1
    assert abs(w * math.exp(w) - y) <= 1e-12 * max(abs(y), 1e-300)


@settings(max_examples=500, deadline=None)
@given(y=st.floats(-1 / math.e, -1e-300))
def test_minus_one_branch_identity(y):
    w = lambert_w(Branch.MINUS_ONE, y)
    assert w <= -1
    assert abs(w * math.exp(w) - y) <= 1e-12 * abs(y)


def test_reference_energy_crossover():
    r = crossover_closed_form(6.994e-6, 5 * 1.365e-11, 3.061)
    assert 24 <= r.x_closed_form <= 32
    assert r.x_closed_form == pytest.approx(r.x_numeric, rel=1e-6)
    assert r.branch_used is Branch.MINUS_ONE
    assert r.n_crossover == math.ceil(r.x_closed_form)


def test_reference_time_crossover():
    r = crossover_closed_form(1.396e-6, beta_for(EL_CAPITAN, Mode.TIME), 1.78)
    assert 40 <= r.x_closed_form <= 48
    assert r.x_closed_form == pytest.approx(r.x_numeric, rel=1e-6)


def test_energy_crossover_precedes_time_crossover():
    e = crossover_closed_form(6.994e-6, 5 * 1.365e-11, 3.061).x_closed_form
    t = crossover_closed_form(1.396e-6, beta_for(EL_CAPITAN, Mode.TIME), 1.78).x_closed_form
    assert e < t


@pytest.mark.parametrize("n", [1.8, 2.0, 3.061, 5.0])  # tangency inside the [1, 512] bracket
def test_tangent_curves(n):
    m = n - 1
    ratio = (math.e * math.log(2) / m) ** m  # W argument exactly -1/e
    r = crossover_closed_form(ratio, 1.0, n)
    assert r.x_closed_form == pytest.approx(m / math.log(2), rel=1e-6)
    assert r.x_closed_form == pytest.approx(r.x_numeric, rel=1e-6)


def test_no_crossing_reported():
    with pytest.raises(ValueError):
        crossover_closed_form(1.0, 1.0, 1.1)
    with pytest.raises(ValueError):
        crossover_numeric(1.0, 1.0, 1.1)
    with pytest.raises(ValueError):
        crossover_closed_form(1.0, 1.0, 1.0)


def test_compare_first_advantage():
    curve = [(n, 1e-3 * n**3) for n in range(2, 40)]
    c = compare(curve, KAIROS, Mode.ENERGY)
    assert c.bracketed
    first = c.first_advantage
    assert all(r.quantum < r.classical for r in c.rows if r.n >= first)
    assert any(r.quantum >= r.classical for r in c.rows if r.n == first - 1)


def test_identical_curves_have_no_crossover():
    curve = [(n, classical_energy(KAIROS, 2**n)) for n in range(2, 30)]
    assert compare(curve, KAIROS, "energy").first_advantage is None


def test_unbracketed_curve_flagged():
    curve = [(n, 1e-30) for n in range(2, 10)]
    c = compare(curve, KAIROS, Mode.TIME)
    assert c.first_advantage == 2 and not c.bracketed
