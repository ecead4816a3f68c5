import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from nanoshell.errors import DomainError, RangeError
from nanoshell.specfun import bessel_table, riccati, riccati_scaled

import oracles

GOLD_N = 0.248 + 2.986j
K0_595 = 2 * math.pi / 595.0


def stable_wronskian_residual(tab):
    """|z^2 W(j, y) - 1| evaluated through the independent h1 family.

    W(j, y) = -i (j h1' - j' h1): products of one small and one large factor,
    so the check stays meaningful in strongly absorbing media where forming
    j*y' - j'*y directly cancels e^{2 Im z}-sized terms.
    """
    z = tab.argument
    w = -1j * (tab.j * tab.dh1 - tab.dj * tab.h1)
    return np.abs(z * z * w - 1.0)


def test_closed_form_order_zero():
    tab = bessel_table(1, 1.0)
    assert_allclose(tab.j[0], 0.841470984807897, rtol=1e-12)
    assert_allclose(tab.h1[0], 0.841470984807897 - 0.540302305868140j, rtol=1e-12)


def test_wronskian_at_two():
    tab = bessel_table(8, 2.0 + 0j)
    w = tab.j * tab.dy - tab.dj * tab.y
    assert_allclose(w, 0.25, rtol=1e-12)


def test_h1_matches_sum_for_real_argument():
    for z in (0.7, 2.0, 13.4, 61.0):
        tab = bessel_table(25, z)
        rel = np.abs(tab.h1 - (tab.j + 1j * tab.y)) / np.abs(tab.h1)
        assert rel.max() < 1e-10


def test_riccati_psi0_is_sin():
    tab = riccati(1, 1.0)
    assert_allclose(tab.psi[0], math.sin(1.0), rtol=1e-14)


def test_riccati_wronskian_is_unit():
    # with chi = -z*y the Riccati pair satisfies psi' chi - psi chi' = 1
    for z in (1.0, 0.5 + 0.5j, 3.0 - 0.2j):
        tab = riccati(6, z)
        w = tab.dpsi * tab.chi - tab.psi * tab.dchi
        assert_allclose(w, 1.0, rtol=1e-10)


def test_riccati_consistent_with_bessel_table():
    z = 0.5 + 0.5j
    rt = riccati(10, z)
    bt = bessel_table(10, z)
    assert_allclose(rt.psi, z * bt.j, rtol=1e-12)
    assert_allclose(rt.chi, -z * bt.y, rtol=1e-12)
    assert_allclose(rt.xi, z * bt.h1, rtol=1e-12)


def test_zero_argument_rejected():
    with pytest.raises(DomainError):
        bessel_table(5, 0.0)
    with pytest.raises(DomainError):
        riccati(5, 1e-12)


def test_bad_order_rejected():
    with pytest.raises(DomainError):
        bessel_table(0, 1.0)


def test_overflow_names_failing_order():
    with pytest.raises(RangeError, match="order l="):
        bessel_table(400, 0.5)


def test_scaled_tables_stay_finite_far_beyond_double_range():
    t = riccati_scaled(2000, 2.1)
    assert np.all(np.isfinite(t.xi)) and np.all(np.isfinite(t.xi_e))
    assert np.all(np.isfinite(t.psi)) and np.all(np.isfinite(t.psi_e))
    # xi_l at small argument dwarfs double range; the log scale carries it
    assert t.xi_e[-1] > 800


def test_derivative_matches_finite_difference():
    h = 1e-6
    for z in (1.7, 2.0 + 1.1j):
        lo = bessel_table(6, z - h)
        hi = bessel_table(6, z + h)
        mid = bessel_table(6, z)
        fd = (hi.j - lo.j) / (2 * h)
        assert_allclose(mid.dj, fd, rtol=1e-8, atol=1e-12)
        fd = (hi.h1 - lo.h1) / (2 * h)
        assert_allclose(mid.dh1, fd, rtol=1e-8, atol=1e-12)


@st.composite
def arguments(draw):
    mag = draw(st.floats(min_value=0.1, max_value=500.0))
    # passive-media quadrant with bounded anisotropy |Im z| <= 5 |Re z|
    ratio = draw(st.floats(min_value=0.0, max_value=5.0))
    re = mag / math.hypot(1.0, ratio)
    return complex(re, ratio * re)


@given(z=arguments(), l_max=st.integers(min_value=1, max_value=60))
@settings(max_examples=60, deadline=None)
def test_wronskian_property(z, l_max):
    tab = bessel_table(l_max, z)
    assert stable_wronskian_residual(tab).max() < 1e-10


@given(z=arguments(), l_max=st.integers(min_value=2, max_value=60))
@settings(max_examples=60, deadline=None)
def test_recurrence_property(z, l_max):
    tab = bessel_table(l_max, z)
    ls = np.arange(1, l_max)
    for fam in (tab.j, tab.y, tab.h1):
        lhs = (2 * ls + 1) / z * fam[1:-1]
        rhs = fam[:-2] + fam[2:]
        scale = np.maximum(np.abs(lhs), np.maximum(np.abs(fam[:-2]), np.abs(fam[2:])))
        assert (np.abs(lhs - rhs) / scale).max() < 1e-10


def test_strongly_absorbing_wronskian():
    rng = np.random.default_rng(7)
    for _ in range(25):
        re = rng.uniform(4.0, 60.0)
        im = rng.uniform(5.0, 20.0)
        tab = bessel_table(40, complex(re, im))
        assert stable_wronskian_residual(tab).max() < 1e-10


def test_direct_sum_would_lose_h1_in_absorbing_media():
    # j + i*y cancels catastrophically once e^{2 Im z} eats the mantissa;
    # the independent recurrence keeps full precision (checked vs mpmath)
    z = GOLD_N * K0_595 * 650.0
    tab = bessel_table(60, z)
    for l in (0, 1, 5, 20, 40, 60):
        _, _, h_ref = oracles.mp_spherical(l, z)
        assert abs(tab.h1[l] - h_ref) / abs(h_ref) < 1e-8


@pytest.mark.parametrize("r_nm", [30.0, 150.0, 420.0, 700.0])
def test_gold_arguments_h1_accuracy(r_nm):
    z = GOLD_N * K0_595 * r_nm
    tab = bessel_table(60, z)
    for l in (0, 1, 2, 7, 19, 37, 60):
        j_ref, y_ref, h_ref = oracles.mp_spherical(l, z)
        assert abs(tab.h1[l] - h_ref) <= 1e-8 * abs(h_ref)
        assert abs(tab.j[l] - j_ref) <= 1e-10 * abs(j_ref)
        assert abs(tab.y[l] - y_ref) <= 1e-10 * abs(y_ref)


def test_tables_finite_over_spec_domain():
    rng = np.random.default_rng(11)
    for _ in range(40):
        mag = 10 ** rng.uniform(math.log10(0.1), math.log10(500.0))
        ratio = rng.uniform(0.0, 5.0)
        re = mag / math.hypot(1.0, ratio)
        tab = bessel_table(60, complex(re, ratio * re))
        for fam in (tab.j, tab.y, tab.h1, tab.dj, tab.dy, tab.dh1):
            assert np.all(np.isfinite(fam))
