from __future__ import annotations

import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptic_face.errors import AdmissibilityError, BranchWarning
from elliptic_face.gauge import (
    _principal_sqrt,
    gauge_weight,
    gauged_ybe_residuals,
    jmo_pattern,
    jmo_sign_table,
    jmo_weight_direct,
    jmo_weight_from_gauge,
    s_factor,
    sign_square_patterns,
)
from elliptic_face.weights import FaceSquare, admissible_squares, face_weight, pattern_label

from conftest import random_points, random_spectral


def test_pattern_classification():
    assert jmo_pattern((1, 0), (0, 1), (0, 1)) == "oc"
    assert jmo_pattern((1, 0), (0, 1), (-1, 0)) == "od"
    assert jmo_pattern((1, 0), (-1, 0), (-1, 0)) == "od"
    assert jmo_pattern((1, 0), (1, 0), (1, 0)) is None
    patterns = {jmo_pattern(*sq) for sq in sign_square_patterns(2)}
    assert patterns == {"oc", "od"}


def test_first_step_has_unit_corner_factor(params):
    lam = random_points(70, 3)
    assert np.allclose(s_factor(lam, (1, 0), params), 1)
    with pytest.raises(AdmissibilityError):
        s_factor(lam, (1, 1), params)


def test_weights_without_square_roots_are_unchanged(params):
    lam, u = random_points(71, 10), random_spectral(72, 10)
    for sq in admissible_squares(2):
        if pattern_label(*sq) == "2-5a":
            assert np.allclose(gauge_weight(lam, *sq, u, params), face_weight(lam, *sq, u, params), rtol=1e-13)
        if jmo_pattern(*sq) is None:
            assert np.allclose(jmo_weight_direct(lam, *sq, u, params), face_weight(lam, *sq, u, params))


def test_gauged_weights_satisfy_ybe(params):
    lam, u, v = random_points(73, 10), random_spectral(74, 10), random_spectral(75, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        assert np.max(gauged_ybe_residuals(lam, u, v, params)) < 1e-9


def test_gauged_weights_satisfy_ybe_rank3(params3):
    lam, u, v = random_points(76, 2, 3), random_spectral(77, 2), random_spectral(78, 2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        assert np.max(gauged_ybe_residuals(lam, u, v, params3)) < 1e-9


@given(seed=st.integers(0, 2**32 - 1))
def test_gauged_and_direct_agree_up_to_sign(params, seed):
    lam, u = random_points(seed, 4), random_spectral(seed + 1, 4)
    for sq in sign_square_patterns(2):
        g = gauge_weight(lam, *sq, u, params)
        d = jmo_weight_direct(lam, *sq, u, params)
        assert np.max(np.abs(np.abs(g) - np.abs(d)) / (1 + np.abs(d))) < 1e-9
        assert np.max(np.abs((g / d) ** 2 - 1)) < 1e-9


def test_square_interface(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    sq = FaceSquare.from_steps(lam, (1, 0), (0, 1), (0, 1), 0.2, params)
    assert jmo_weight_from_gauge(sq, params) == gauge_weight(lam, (1, 0), (0, 1), (0, 1), 0.2, params)
    with pytest.raises(AdmissibilityError):
        jmo_weight_from_gauge(FaceSquare.from_steps(lam, (1, 1), (0, 0), (0, 0), 0.2, params, (2, 2)), params)


def test_sign_table_over_sweep(params):
    table = jmo_sign_table(100, params, seed=3)
    assert table.max_sigma_sq_defect < 1e-9
    assert table.max_modulus_defect < 1e-9
    assert table.unexplained_flips == 0
    assert set(table.sign_counts()) == {"oc", "od"}
    assert all(abs(abs(s) - 1) < 1e-9 for s in table.fiducial_sigmas.values())


def test_empty_sweep_has_no_rows(params):
    table = jmo_sign_table(0, params)
    assert table.rows == [] and table.max_sigma_sq_defect == 0


def test_branch_cut_warning():
    with pytest.warns(BranchWarning):
        _principal_sqrt(np.array([-2.0 + 0j]))
    with warnings.catch_warnings():
        warnings.simplefilter("error", BranchWarning)
        _principal_sqrt(np.array([2.0 + 0.5j]))
