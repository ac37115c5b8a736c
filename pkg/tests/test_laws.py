import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dgweno.laws import (
    KPP,
    Burgers,
    Euler,
    InvalidStateError,
    LinearAdvection,
    conserved_from_primitive,
    hll_flux,
    llf_flux,
    max_wavespeed_normal,
    physical_flux,
    pressure,
)

SOD_L = np.array([1.0, 0.0, 2.5])
SOD_R = np.array([0.125, 0.0, 0.25])


def test_burgers_flux():
    assert physical_flux(Burgers(), [2.0])[0, 0] == 2.0


def test_kpp_flux_at_zero():
    assert np.allclose(physical_flux(KPP(), [0.0])[0], [0.0, 1.0])


def test_euler_flux_sod_left():
    F = physical_flux(Euler(), SOD_L)[:, 0]
    assert np.allclose(F, [0.0, 1.0, 0.0], atol=1e-15)


def test_euler_flux_rejects_bad_state():
    with pytest.raises(InvalidStateError):
        physical_flux(Euler(), [1.0, 0.0, -1.0])
    with pytest.raises(InvalidStateError):
        physical_flux(Euler(), [-1.0, 0.0, 1.0])


@pytest.mark.parametrize("U, p", [(SOD_L, 1.0), (SOD_R, 0.1), ([1.0, 1.0, 1.0], 0.2)])
def test_pressure(U, p):
    assert pressure(U) == pytest.approx(p, abs=1e-15)


def test_pressure_nonpositive():
    with pytest.raises(InvalidStateError):
        pressure([1.0, 2.0, 1.0])


def test_wavespeeds():
    adv = LinearAdvection(velocity=np.array([1.0]))
    assert max_wavespeed_normal(adv, [3.0], [-7.0], [1.0]) == 1.0
    assert max_wavespeed_normal(Burgers(), [1.0], [-0.5], [1.0]) == 1.0
    assert max_wavespeed_normal(Euler(), SOD_L, SOD_R, [1.0]) == pytest.approx(math.sqrt(1.4), abs=1e-4)
    assert max_wavespeed_normal(KPP(), [0.3], [2.0], [0.6, 0.8]) == 1.0


def test_llf_burgers_value():
    assert llf_flux(Burgers(), [1.0], [0.0], [1.0])[0] == pytest.approx(0.75)


def test_llf_consistency_and_swap():
    U = np.array([0.8, 0.3, 2.0])
    V = np.array([0.5, -0.1, 1.2])
    n = np.array([1.0])
    law = Euler()
    assert np.allclose(llf_flux(law, U, U, n), law.normal_flux(U, n))
    assert np.allclose(llf_flux(law, U, V, n), -llf_flux(law, V, U, -n))


def test_hll_branches():
    law = Euler()
    U = conserved_from_primitive(1.0, 0.5, 1.0)
    n = np.array([1.0])
    assert np.allclose(hll_flux(law, U, U, n), law.normal_flux(U, n))
    # supersonic flow to the right: s- > 0 selects the left flux exactly
    UL = conserved_from_primitive(1.0, 5.0, 1.0)
    UR = conserved_from_primitive(0.5, 4.0, 0.8)
    assert np.array_equal(hll_flux(law, UL, UR, n), law.normal_flux(UL, n))
    UL2 = conserved_from_primitive(1.0, -5.0, 1.0)
    UR2 = conserved_from_primitive(0.5, -4.0, 0.8)
    assert np.array_equal(hll_flux(law, UL2, UR2, n), law.normal_flux(UR2, n))


def test_hll_sod_middle_branch_by_hand():
    sm, sp = -math.sqrt(1.4), math.sqrt(1.4)
    FL = np.array([0.0, 1.0, 0.0])
    FR = np.array([0.0, 0.1, 0.0])
    expect = (sp * FL - sm * FR + sm * sp * (SOD_R - SOD_L)) / (sp - sm)
    assert np.allclose(hll_flux(Euler(), SOD_L, SOD_R, [1.0]), expect, atol=1e-15)


def test_hll_needs_euler():
    with pytest.raises(TypeError):
        hll_flux(Burgers(), [1.0], [0.0], [1.0])


def test_law_component_counts():
    assert Euler(dim=1).m == 3 and Euler(dim=2).m == 4
    assert Burgers().m == KPP().m == 1
    with pytest.raises(ValueError):
        Euler(gamma=1.0)


def test_variable_velocity():
    def rot(x):
        return np.stack([0.5 - x[..., 1], x[..., 0] - 0.5], axis=-1)

    law = LinearAdvection(velocity=rot, dim=2)
    x = np.array([[0.5, 0.0]])
    F = law.flux(np.array([[2.0]]), x)
    assert np.allclose(F[0, 0], [1.0, 0.0])


prim = st.tuples(st.floats(0.05, 20), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.05, 50))


@given(prim, prim, st.floats(0, 2 * np.pi), st.sampled_from([llf_flux, hll_flux]))
@settings(max_examples=200, deadline=None)
def test_flux_identities_2d(a, b, angle, flux):
    law = Euler(dim=2)
    UL = conserved_from_primitive(a[0], [a[1], a[2]], a[3])
    UR = conserved_from_primitive(b[0], [b[1], b[2]], b[3])
    n = np.array([math.cos(angle), math.sin(angle)])
    scale = 1.0 + np.abs(law.normal_flux(UL, n)).max()
    assert np.max(np.abs(flux(law, UL, UL, n) - law.normal_flux(UL, n))) < 1e-13 * scale
    H = flux(law, UL, UR, n)
    assert np.max(np.abs(H + flux(law, UR, UL, -n))) < 1e-13 * (1.0 + np.abs(H).max())
