from __future__ import annotations

import cmath

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from elliptic_face.errors import ConfigError, PoleError
from elliptic_face.theta import (
    ModelParams,
    phi,
    phi_lemma_terms,
    quasi_periodicity_defect,
    theta,
    theta_prime0,
    three_term_terms,
)

from conftest import complex_in_box

# Values of [u] at tau = i from an independent 40-digit product with 200 factors.
FROZEN = [
    (0.3, 0.368598581859340798821918084654j),
    (0.3 + 0.1j, -0.0864657682957963224590267241592 + 0.386825610885586581559932424852j),
    (-0.41 + 0.27j, -0.125352361539897862171659592723 - 0.60862620537070542609907846814j),
]
FROZEN_PRIME0 = 1.42434730199389365803999252856j


def _rel(a, b):
    return abs(a - b) / (1 + max(abs(a), abs(b)))


@pytest.mark.parametrize("u, expected", FROZEN)
def test_theta_matches_frozen_values(params, u, expected):
    assert _rel(complex(theta(u, params)), expected) < 1e-13


def test_theta_prime_at_origin_matches_frozen_value(params):
    assert _rel(theta_prime0(params), FROZEN_PRIME0) < 1e-13


@given(u=complex_in_box(1.0, 0.6), im_tau=st.floats(0.5, 2.0), re_tau=st.floats(-0.5, 0.5))
def test_theta_agrees_with_mpmath_jacobi_theta(u, im_tau, re_tau):
    p = ModelParams(tau=complex(re_tau, im_tau))
    q = mpmath.exp(1j * mpmath.pi * p.tau)
    expected = complex(0.5j * mpmath.jtheta(1, mpmath.pi * u, q))
    assert _rel(complex(theta(u, p)), expected) < 1e-12


def test_theta_vanishes_at_origin(params):
    assert theta(0.0, params) == 0


@given(u=complex_in_box())
def test_theta_is_odd(params, u):
    assert abs(theta(u, params) + theta(-u, params)) <= 1e-14 * (1 + abs(theta(u, params)))


@given(u=complex_in_box(), m=st.integers(-2, 2))
def test_quasi_periodicity(params, u, m):
    # near a zero the tau shift is evaluated with cancellation in one product factor
    assume(abs(theta(u, params)) > 1e-3)
    real_shift, tau_shift = quasi_periodicity_defect(u, m, params)
    scale = abs(theta(u, params)) * abs(cmath.exp(-1j * cmath.pi * m * m * params.tau - 2j * cmath.pi * m * u))
    assert abs(real_shift) / (1 + abs(theta(u, params))) < 1e-11
    assert abs(tau_shift) / (1 + scale) < 1e-11


def test_quasi_periodicity_other_modulus():
    p = ModelParams(tau=0.8j, truncation_M=60)
    real_shift, tau_shift = quasi_periodicity_defect(0.37 - 0.05j, -2, p)
    assert abs(real_shift) < 1e-12
    assert abs(tau_shift) < 1e-10 * abs(theta(0.37 - 0.05j - 1.6j, p))


def test_quasi_periodicity_zero_shift_is_exact(params):
    assert quasi_periodicity_defect(0.2 + 0.3j, 0, params) == (0, 0)


@given(u=complex_in_box(), v=complex_in_box(), x=complex_in_box(), y=complex_in_box())
def test_three_term_identity(params, u, v, x, y):
    a, b, c = three_term_terms(u, v, x, y, params)
    assert abs(a - b - c) / (1 + max(abs(a), abs(b), abs(c))) < 1e-12


@given(u=complex_in_box(0.45, 0.4))
def test_log_derivative_second_difference(params, u):
    if min(abs(theta(u + s, params)) for s in (0, params.hbar, -params.hbar)) < 1e-3:
        return
    lhs, rhs = phi_lemma_terms(u, params.hbar, params)
    assert abs(lhs - rhs) / (1 + max(abs(lhs), abs(rhs))) < 1e-10


@given(u=complex_in_box(0.45, 0.4))
def test_log_derivative_matches_mpmath(params, u):
    if abs(theta(u, params)) < 1e-3:
        return
    q = mpmath.exp(1j * mpmath.pi * params.tau)
    expected = complex(mpmath.pi * mpmath.jtheta(1, mpmath.pi * u, q, 1) / mpmath.jtheta(1, mpmath.pi * u, q))
    assert _rel(complex(phi(u, params)), expected) < 1e-11


@given(u=complex_in_box(0.45, 0.4))
def test_log_derivative_is_odd(params, u):
    if abs(theta(u, params)) < 1e-3:
        return
    assert abs(phi(u, params) + phi(-u, params)) < 1e-10 * (1 + abs(phi(u, params)))


def test_log_derivative_raises_at_lattice_point(params):
    with pytest.raises(PoleError):
        phi(1.0 + params.tau, params)


def test_truncation_converges(params):
    u = np.array([0.3, 0.3 + 0.1j, -0.41 + 0.27j])
    ref = theta(u, params.replace(truncation_M=60))
    for m in (4, 8, 12):
        p = params.replace(truncation_M=m)
        assert np.max(np.abs(theta(u, p) - ref) / np.abs(ref)) < 4 * p.tail_bound() + 1e-12


def test_broadcasts_over_arrays(params):
    u = np.array([[0.1, 0.2], [0.3 + 0.1j, -0.2j]])
    out = theta(u, params)
    assert out.shape == (2, 2)
    assert abs(out[1, 0] - theta(0.3 + 0.1j, params)) < 1e-15


def test_crossing_parameter(params):
    assert params.crossing_c == -3 * params.hbar
    assert ModelParams(rank_n=3).crossing_c == -4 * ModelParams().hbar


@pytest.mark.parametrize(
    "fields",
    [dict(tau=-1j), dict(tau=0.5), dict(hbar=0), dict(rank_n=1), dict(rank_n=2.5), dict(truncation_M=0)],
)
def test_invalid_params_rejected(fields):
    with pytest.raises(ConfigError):
        ModelParams(**fields)


def test_eighth_root_branch_only_rescales(params):
    other = params.replace(p8_branch=3)
    ratio = theta(0.3 + 0.1j, other) / theta(0.3 + 0.1j, params)
    assert abs(ratio - cmath.exp(2j * cmath.pi * 3 / 8)) < 1e-14
