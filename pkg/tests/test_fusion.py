from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from elliptic_face.errors import ProjectionError, UnlistedPatternError
from elliptic_face.fusion import (
    FusionEngine,
    PathVector,
    apply_w11_op,
    fused_basis_vector,
    fused_weight_composed,
    fused_weight_explicit,
    fused_weight_listed,
    fused_ybe_residuals,
    fusion_projector,
    intertwining_residual,
    listed_pattern,
    listed_squares,
    path_vector,
    random_path_vector,
    v_ratio_defect,
    zero_coefficient_via_w21,
    zero_deg_lemma_residual,
)
from elliptic_face.weights import FaceSquare, pattern_label, unit_steps, zero_step

from conftest import random_points, random_spectral

ZERO = (0, 0)
ALL_TAGS = {
    (2, 1): {"W21-1", "W21-2", "ex1", "ex2", "ex3", "W21-6"},
    (1, 2): {"W12-1", "W12-2", "sign1", "W12-4", "W12-5", "W12-6"},
    (2, 2): {"deg2part", "degzero"},
}


def _rel(a, b):
    return np.abs(a - b) / (1 + np.maximum(np.abs(a), np.abs(b)))


def test_projector_has_rank_five(params):
    lam, u = random_points(20, 30), random_spectral(21, 30)
    mat, paths = fusion_projector(lam, u, params)
    assert mat.shape == (30, 16, 16) and len(paths) == 16
    s = np.linalg.svd(mat, compute_uv=False)
    assert np.all(np.sum(s > 1e-8 * s[:, :1], axis=-1) == 5)


def test_fused_basis_vectors_span_projector_image(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    u = 0.2 + 0.05j
    mat, paths = fusion_projector(lam, u, params)
    image = np.linalg.svd(mat)[0][:, :5]
    for r in [(1, 1), (1, -1), (-1, 1), (-1, -1), (0, 0)]:
        vec = fused_basis_vector(lam, r, u, params)
        x = np.array([complex(vec.coefficient(p)) for p in paths])
        resid = x - image @ (image.conj().T @ x)
        assert np.linalg.norm(resid) < 1e-10 * np.linalg.norm(x)


@pytest.mark.parametrize("types", [(2, 1), (1, 2), (2, 2)])
def test_listed_tags(types):
    assert {tag for tag, *_ in listed_squares(types)} == ALL_TAGS[types]


@pytest.mark.parametrize("types", [(2, 1), (1, 2), (2, 2)])
def test_closed_forms_match_composition(params, types):
    lam, u = random_points(22, 40), random_spectral(23, 40)
    engine = FusionEngine(lam, params)
    for tag, top, left, right in listed_squares(types):
        a = engine.weight(types, ZERO, top, left, right, u)
        b = fused_weight_listed(lam, types, top, left, right, u, params)
        assert np.max(_rel(a, b)) < 1e-9, tag
    assert engine.max_residual < 1e-8


@given(seed=st.integers(0, 2**32 - 1), index=st.integers(0, 13))
def test_closed_forms_match_composition_on_squares(params, seed, index):
    choices = listed_squares((2, 1)) + listed_squares((1, 2)) + listed_squares((2, 2))
    tag, top, left, right = choices[index % len(choices)]
    types = next(t for t, tags in ALL_TAGS.items() if tag in tags)
    lam, u = random_points(seed, 1)[0], complex(random_spectral(seed + 1, 1)[0])
    sq = FaceSquare.from_steps(lam, top, left, right, u, params, types)
    a, b = fused_weight_explicit(sq, params), fused_weight_composed(sq, params)
    assert _rel(a, b) < 1e-9


def test_fused_weights_reduce_to_vector_weights(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    sq = FaceSquare.from_steps(lam, (1, 0), (0, 1), (0, 1), 0.2, params)
    engine = FusionEngine(lam, params)
    assert fused_weight_composed(sq, params, engine) == engine.w11(ZERO, (1, 0), (0, 1), (0, 1), 0.2)


def test_unlisted_pattern_raises(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    assert listed_pattern((2, 2), (1, 1), (1, 1), (1, 1)) is None
    with pytest.raises(UnlistedPatternError):
        fused_weight_listed(lam, (2, 2), (1, 1), (1, 1), (1, 1), 0.2, params)


def test_zero_degree_identity(params):
    lam, u = random_points(24, 50), random_spectral(25, 50)
    for p in unit_steps(2):
        assert np.max(zero_deg_lemma_residual(lam, p, u, params).relative) < 1e-10


def test_two_expressions_for_the_mixed_coefficient_agree(params):
    lam, u = random_points(26, 20), random_spectral(27, 20)
    for p in unit_steps(2):
        for q in unit_steps(2):
            if q[0] * p[0] + q[1] * p[1] != 0:
                continue
            diff, scale = v_ratio_defect(lam, p, q, u, params)
            assert np.max(np.abs(diff) / (1 + scale)) < 1e-10


def test_zero_coefficient_from_two_mixed_weights(params):
    lam, u = random_points(28, 10), random_spectral(29, 10)
    engine = FusionEngine(lam, params)
    direct = engine.weight((2, 2), ZERO, ZERO, ZERO, ZERO, u)
    for p in unit_steps(2):
        assert np.max(_rel(zero_coefficient_via_w21(lam, p, u, params, engine), direct)) < 1e-9


@pytest.mark.parametrize("which", ["W21", "W12"])
def test_fused_subspace_is_preserved(params, which):
    lam, u, v = random_points(30, 10), random_spectral(31, 10), random_spectral(32, 10)
    res = intertwining_residual(lam, which, u, v, params, np.random.default_rng(1))
    assert np.max(res.relative) < 1e-8


def test_braid_relation_holds_for_arbitrary_labels(params):
    lam, u, v = random_points(33, 4), random_spectral(34, 4), random_spectral(35, 4)
    engine = FusionEngine(lam, params)
    vec = random_path_vector(engine, (u - 0.7 * params.hbar, u, v), np.random.default_rng(2))
    lhs, rhs = vec, vec
    for pos in (0, 1, 0):
        lhs = engine.apply_w11(lhs, pos)
    for pos in (1, 0, 1):
        rhs = engine.apply_w11(rhs, pos)
    assert np.max((lhs - rhs).norm() / (1 + np.maximum(lhs.norm(), rhs.norm()))) < 1e-10


@pytest.mark.parametrize("types", [(2, 1, 1), (1, 2, 1), (1, 1, 2), (2, 2, 1), (1, 2, 2), (2, 1, 2), (2, 2, 2)])
def test_mixed_type_ybe(params, types):
    lam = random_points(36, 1)
    u, v, w = random_spectral(37, 1), random_spectral(38, 1), random_spectral(39, 1)
    res = fused_ybe_residuals(lam, types, u, v, w, params)
    assert res
    assert max(float(np.max(r)) for r in res.values()) < 1e-8


def test_apply_w11_checks_and_swaps_labels(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    vec = path_vector(lam, {((1, 0), (0, 1)): 1.0}, (0.3, 0.1))
    out = apply_w11_op(0, 0.2, vec, params)
    assert np.allclose(out.labels, (0.1, 0.3))
    assert set(out.terms) <= {((1, 0), (0, 1)), ((0, 1), (1, 0))}
    with pytest.raises(ValueError):
        apply_w11_op(0, 0.5, vec, params)
    with pytest.raises(IndexError):
        apply_w11_op(1, None, vec, params)


def test_apply_w11_at_zero_difference_is_identity(params):
    lam = np.array([0.31 + 0.02j, 0.17 - 0.01j])
    vec = path_vector(lam, {((1, 0), (0, 1)): 2.0, ((0, 1), (0, -1)): -1.0}, (0.3, 0.3))
    out = apply_w11_op(0, None, vec, params)
    assert (out - vec).norm() < 1e-13


def test_path_vector_arithmetic():
    lam = np.zeros(2, dtype=complex)
    a = PathVector(lam, ZERO, (0.1,), {((1, 0),): 1.0, ((0, 1),): 0.0})
    assert set(a.terms) == {((1, 0),)}
    b = PathVector(lam, ZERO, (0.1,), {((1, 0),): 2.0})
    assert (a + b).coefficient(((1, 0),)) == 3.0
    assert (b - 2 * a).terms == {}
    assert a.end(((1, 0),)) == (1, 0)
    with pytest.raises(ValueError):
        a + PathVector(lam, ZERO, (0.2,), {})
    with pytest.raises(ValueError):
        PathVector(lam, ZERO, (0.1,), {((1, 0), (0, 1)): 1.0})


def test_projection_error_on_inconsistent_weights(params):
    lam = random_points(40, 2)

    class Broken(FusionEngine):
        def w11(self, offset, top, left, right, u):
            val = super().w11(offset, top, left, right, u)
            return 1.5 * val if pattern_label(top, left, right) == "2-5d" else val

    engine = Broken(lam, params)
    with pytest.raises(ProjectionError):
        for tag, top, left, right in listed_squares((2, 1)):
            engine.weight((2, 1), ZERO, top, left, right, random_spectral(41, 2))


def test_operator_positions():
    assert FusionEngine.operator_positions((2, 1)) == [1, 0]
    assert FusionEngine.operator_positions((1, 2)) == [0, 1]
    assert FusionEngine.operator_positions((2, 2)) == [1, 0, 2, 1]


def test_fused_weight_rejects_non_member_steps(params):
    engine = FusionEngine(np.array([0.31 + 0.02j, 0.17 - 0.01j]), params)
    assert engine.weight((2, 1), zero_step(2), (1, 0), (1, 0), (1, 0), 0.2) == 0
