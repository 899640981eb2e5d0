"""Unit tests for the moment transforms and their quadrature cross-routes."""

import math

import numpy as np
import pytest

from bmobell import (
    DomainError,
    QuadratureSpec,
    SingularityError,
    gamma_fn,
    k_fn,
    m_fn,
    quad_k,
    quad_m,
)

from _frozen import MK_TABLE

EPS_SET = (0.5, 1.0, 2.0)
P_SET = (1.0, 1.5, 2.5, 3.0)


def u_grid(eps, lo=0.0):
    return np.linspace(lo, lo + 6.0 * eps, 25)


# ---------------------------------------------------------------- closed forms


def test_m_order1_is_constant_one():
    for eps in EPS_SET:
        vals = m_fn(1.0, eps, u_grid(eps))
        np.testing.assert_allclose(vals, 1.0, rtol=1e-12)


def test_m_order2_is_affine():
    for eps in EPS_SET:
        u = u_grid(eps)
        np.testing.assert_allclose(m_fn(2.0, eps, u), 2.0 * (u + eps), rtol=1e-12)


def test_k_order2_is_affine():
    for eps in EPS_SET:
        u = u_grid(eps, lo=eps)
        np.testing.assert_allclose(k_fn(2.0, eps, u), 2.0 * (u - eps), rtol=1e-12)


def test_k_exponential_closed_form():
    # k at power 1 integrates to 1 - exp((eps-u)/eps)
    for eps in EPS_SET:
        u = u_grid(eps, lo=eps)
        want = 1.0 - np.exp((eps - u) / eps)
        np.testing.assert_allclose(k_fn(1.0, eps, u), want, rtol=1e-12, atol=1e-15)


def test_k_vanishes_at_left_endpoint():
    for eps in EPS_SET:
        for p in P_SET:
            assert abs(float(k_fn(p, eps, eps))) <= 1e-13


def test_k_slope_at_left_endpoint():
    for eps in EPS_SET:
        for p in P_SET:
            want = p * eps ** (p - 2.0)
            got = float(k_fn(p, eps, eps, order=1))
            assert abs(got - want) <= 1e-11 * abs(want)


def test_m_at_origin_is_gamma_factorial():
    for eps in EPS_SET:
        for p in P_SET:
            want = eps ** (p - 1.0) * gamma_fn(p + 1.0)
            got = float(m_fn(p, eps, 0.0))
            assert abs(got - want) <= 1e-11 * abs(want)


def test_gamma_fn_matches_math_gamma():
    for a in (1.0, 2.5, 3.0, 4.5, 7.0):
        assert gamma_fn(a) == pytest.approx(math.gamma(a), rel=1e-14)


# ------------------------------------------------------------- frozen oracles


def test_transforms_match_frozen_reference_table():
    worst = 0.0
    for (kind, p, eps, u, order), want in MK_TABLE.items():
        fn = m_fn if kind == "m" else k_fn
        got = float(fn(p, eps, u, order))
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    assert worst <= 1e-11


def test_quad_routes_match_frozen_reference_table():
    # the adaptive cross-route must hit the same table independently
    worst = 0.0
    for (kind, p, eps, u, order), want in MK_TABLE.items():
        fn = quad_m if kind == "m" else quad_k
        got = float(fn(p, eps, np.array([u]), order)[0])
        worst = max(worst, abs(got - want) / max(1.0, abs(want)))
    assert worst <= 1e-9


def test_large_argument_branch_is_seamless():
    # the far-field evaluation switches strategy around u/eps = 30
    for p in (1.5, 2.5, 4.0):
        u = np.linspace(29.0, 31.0, 161)
        vals = m_fn(p, 1.0, u)
        d2 = np.diff(vals, 2)
        assert np.all(np.abs(d2) < 1e-6 * np.abs(vals[1:-1]).max())
        ref = quad_m(p, 1.0, np.array([29.5, 30.5]), 0)
        got = m_fn(p, 1.0, np.array([29.5, 30.5]))
        np.testing.assert_allclose(got, ref, rtol=1e-9)


# ------------------------------------------------------------------ behaviour


def test_scalar_and_array_shapes_agree():
    u = np.array([0.4, 1.1, 2.0])
    arr = m_fn(2.5, 1.0, u)
    assert arr.shape == (3,)
    for i, ui in enumerate(u):
        assert float(m_fn(2.5, 1.0, float(ui))) == arr[i]
    scal = k_fn(2.5, 1.0, 1.3)
    assert np.ndim(scal) == 0


def test_transforms_increase_along_u():
    for p in (1.5, 2.5, 4.0):
        u = np.linspace(0.1, 8.0, 60)
        assert np.all(np.diff(m_fn(p, 1.0, u)) > 0)
        uk = np.linspace(1.0, 9.0, 60)
        assert np.all(np.diff(k_fn(p, 1.0, uk)) > 0)


def test_domain_guards():
    with pytest.raises(DomainError):
        m_fn(0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        m_fn(1.5, 1.0, -0.1)
    with pytest.raises(DomainError):
        k_fn(1.5, 1.0, 0.5)  # below the left endpoint eps = 1
    with pytest.raises(DomainError):
        m_fn(1.5, -1.0, 1.0)
    with pytest.raises(DomainError):
        m_fn(1.5, 1.0, 1.0, order=3)


def test_singularity_guard_at_origin():
    for order in (1, 2):
        with pytest.raises(SingularityError):
            m_fn(1.5, 1.0, 0.0, order=order)
    # p >= 2 has no singular factor, orders stay finite
    assert np.isfinite(float(m_fn(2.5, 1.0, 0.0, order=2)))


def test_quadrature_spec_validation():
    with pytest.raises(DomainError):
        QuadratureSpec(node_count=0)
    with pytest.raises(DomainError):
        QuadratureSpec(node_count=-4)


def test_reference_comparison_has_teeth():
    # a 1e-6 shove of the argument must blow the table tolerance by a wide
    # margin, otherwise the frozen comparisons above prove nothing
    fails = 0
    for (kind, p, eps, u, order), want in MK_TABLE.items():
        if order != 0 or u <= 0.0:
            continue
        fn = m_fn if kind == "m" else k_fn
        got = float(fn(p, eps, u + 1e-6, order))
        if abs(got - want) / max(1.0, abs(want)) > 1e-9:
            fails += 1
    assert fails > 0.9 * sum(
        1 for (kind, p, eps, u, order) in MK_TABLE if order == 0 and u > 0.0
    )
