import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, special

from floquetkit.errors import DomainError
from floquetkit.specfun import (carlson_rf, elliptic_F, elliptic_K, jacobi_am,
                                jacobi_derivatives, jacobi_sn_cn_dn)


def quad_F(w, k):
    val, _ = integrate.quad(lambda th: 1.0 / math.sqrt(1 - (k * math.sin(th)) ** 2), 0, w,
                            epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_K_values():
    assert elliptic_K(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert elliptic_K(0.5) == pytest.approx(quad_F(math.pi / 2, 0.5), rel=1e-13)
    assert elliptic_K(0.5) == pytest.approx(1.685750354812596, rel=1e-14)
    with pytest.raises(DomainError):
        elliptic_K(1.0)
    with pytest.raises(DomainError):
        elliptic_K(-0.1)


def test_K_against_scipy_and_monotone():
    ks = np.linspace(0, 0.999, 60)
    vals = [elliptic_K(k) for k in ks]
    np.testing.assert_allclose(vals, special.ellipk(ks ** 2), rtol=1e-13)
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_F_values():
    assert elliptic_F(0.0, 0.7) == 0.0
    assert elliptic_F(math.pi / 2, 0.7) == pytest.approx(elliptic_K(0.7), rel=1e-14)
    assert elliptic_F(1.234, 0.0) == pytest.approx(1.234, rel=1e-15)
    for w in (0.3, 2.0, 5.0, -4.0, 11.0):
        assert elliptic_F(w, 0.8) == pytest.approx(quad_F(w, 0.8), rel=1e-12)
        assert elliptic_F(w, 0.8) == pytest.approx(special.ellipkinc(w, 0.64), rel=1e-13)


def test_carlson_symmetric_values():
    assert carlson_rf(1.0, 1.0, 1.0) == pytest.approx(1.0)
    # R_F(0, 1, 1) = pi/2
    assert carlson_rf(0.0, 1.0, 1.0) == pytest.approx(math.pi / 2, rel=1e-14)
    assert carlson_rf(2.0, 3.0, 4.0) == pytest.approx(carlson_rf(4.0, 2.0, 3.0), rel=1e-15)


def test_sn_cn_dn_special_cases():
    assert jacobi_sn_cn_dn(0.0, 0.6) == pytest.approx((0.0, 1.0, 1.0))
    z = 1.7
    assert jacobi_sn_cn_dn(z, 0.0) == pytest.approx((math.sin(z), math.cos(z), 1.0), abs=1e-15)
    sech = 1 / math.cosh(z)
    assert jacobi_sn_cn_dn(z, 1.0) == pytest.approx((math.tanh(z), sech, sech), abs=1e-15)


def test_against_scipy_ellipj():
    rng = np.random.default_rng(11)
    for _ in range(300):
        z, k = rng.uniform(-30, 30), rng.uniform(0, 0.999)
        sn, cn, dn, _ = special.ellipj(z, k * k)
        assert jacobi_sn_cn_dn(z, k) == pytest.approx((sn, cn, dn), abs=1e-12)


def test_am_inverts_F():
    rng = np.random.default_rng(5)
    for _ in range(200):
        w, k = rng.uniform(-6, 6), rng.uniform(0, 0.99)
        assert jacobi_am(elliptic_F(w, k), k) == pytest.approx(w, abs=1e-12)


def test_periodicity_in_4K():
    k = 0.5
    K = elliptic_K(k)
    for z in (0.1, 1.0, 2.7):
        assert jacobi_sn_cn_dn(z + 4 * K, k) == pytest.approx(jacobi_sn_cn_dn(z, k), abs=1e-13)


def test_derivative_special_cases():
    assert jacobi_derivatives(0.0, 0.4) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)
    z = 0.9
    assert jacobi_derivatives(z, 0.0) == pytest.approx((math.cos(z), -math.sin(z), 0.0),
                                                       abs=1e-15)


def test_elliptic_identities_1000_samples():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for z, k in zip(rng.uniform(-50, 50, 1000), rng.uniform(0, 1, 1000)):
        sn, cn, dn = jacobi_sn_cn_dn(z, k)
        worst = max(worst, abs(sn * sn + cn * cn - 1), abs(dn * dn + k * k * sn * sn - 1))
    assert worst <= 1e-12


@settings(max_examples=300, deadline=None)
@given(st.floats(-20, 20), st.floats(0, 0.995))
def test_derivatives_match_finite_differences(z, k):
    h = 1e-6
    plus = np.array(jacobi_sn_cn_dn(z + h, k))
    minus = np.array(jacobi_sn_cn_dn(z - h, k))
    fd = (plus - minus) / (2 * h)
    assert np.max(np.abs(fd - np.array(jacobi_derivatives(z, k)))) <= 1e-8
