"""Difference operators built from diagonal fused weights, rank 2.

``M_d(u)`` shifts by the weights of the representation of type ``d``
with coefficient the diagonal fused weight ``W_d2``; ``M~_d`` are the
spectral-parameter-free operators they factor through.  Commutativity is
checked at the level of coefficients through the trace matrices ``A_t``,
``B_t`` and the intertwiner ``W_t``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .fusion import FusionEngine, G_factor, zero_mode_sum
from .theta import ModelParams, checked_theta, theta
from .weights import Residual, Step, act, add, pairing, shift, steps_of_type, sub, unit_steps, zero_step

Coefficient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class DifferenceOperator:
    """``(Op f)(lam) = sum_t coeff_t(lam) f(lam + 2 hbar t)``."""

    terms: Mapping[Step, Coefficient]
    params: ModelParams

    @property
    def shifts(self) -> list[Step]:
        return sorted(self.terms)

    def coefficient(self, t: Step, lam):
        lam = np.asarray(lam, dtype=complex)
        fn = self.terms.get(tuple(t))
        if fn is None:
            return np.zeros(lam.shape[:-1], dtype=complex)
        return np.asarray(fn(lam), dtype=complex) + np.zeros(lam.shape[:-1], dtype=complex)

    def apply(self, f: Callable, lam):
        return apply(self, f, lam)

    def __matmul__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        """Composition: ``(AB)_t(lam) = sum_{r+s=t} A_r(lam) B_s(lam + 2 hbar r)``."""
        params = self.params
        pairs: dict[Step, list[tuple[Step, Step]]] = {}
        for r in self.terms:
            for s in other.terms:
                pairs.setdefault(add(r, s), []).append((r, s))

        def make(plist):
            def coeff(lam):
                total = 0.0
                for r, s in plist:
                    total = total + self.terms[r](lam) * other.terms[s](shift(lam, r, params))
                return total

            return coeff

        return DifferenceOperator({t: make(pl) for t, pl in pairs.items()}, params)

    def __sub__(self, other: "DifferenceOperator") -> "DifferenceOperator":
        terms = dict(self.terms)
        for t, g in other.terms.items():
            f = terms.get(t)
            terms[t] = (lambda lam, g=g: -g(lam)) if f is None else (lambda lam, f=f, g=g: f(lam) - g(lam))
        return DifferenceOperator(terms, self.params)


def apply(op: DifferenceOperator, f: Callable, lam):
    """Evaluate ``(op f)(lam)``; ``f`` maps coordinate arrays to values."""
    lam = np.asarray(lam, dtype=complex)
    total = np.zeros(lam.shape[:-1], dtype=complex)
    for t, coeff in op.terms.items():
        total = total + coeff(lam) * f(shift(lam, t, op.params))
    return total


# -- scalar factors -----------------------------------------------------------


def F_factor(u, params: ModelParams):
    t = lambda z: theta(z, params)  # noqa: E731
    h = params.hbar
    u = np.asarray(u, dtype=complex)
    return t(u) * t(u + 2 * h) ** 2 * t(u + 4 * h) / (t(-3 * h) ** 2 * t(h) ** 2)


def H_factor(u, params: ModelParams):
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h = params.hbar
    u = np.asarray(u, dtype=complex)
    return t(u + 6 * h) * t(u - 3 * h) * t(2 * h) / (d(u) * d(u + 3 * h) * d(6 * h))


def C_pq(lam, p: Step, q: Step, params: ModelParams):
    """Zero-shift summand of ``M~_2`` for ``p = +-eps_1``, ``q = +-eps_2``."""
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h = params.hbar
    lam = np.asarray(lam, dtype=complex)
    lp, lq, x = pairing(lam, p), pairing(lam, q), pairing(lam, add(p, q))
    return (
        t(2 * h) / d(6 * h)
        * t(2 * lp + 2 * h) / d(2 * lp)
        * t(2 * lq + 2 * h) / d(2 * lq)
        * t(x - 5 * h) / d(x + h)
        * t(x + 2 * h) / d(x)
    )


# -- the operators ------------------------------------------------------------


def build_Md(u, d: int, params: ModelParams) -> DifferenceOperator:
    """``M_d(u)`` with coefficients from the composed fused weights."""
    _require_rank2(params)
    zero = zero_step(2)

    def make(p):
        return lambda lam: FusionEngine(lam, params).weight((d, 2), zero, p, zero, zero, u)

    return DifferenceOperator({p: make(p) for p in steps_of_type(d, 2)}, params)


def build_Mtilde(d: int, params: ModelParams) -> DifferenceOperator:
    """The spectral-parameter-free operators ``M~_1`` and ``M~_2``."""
    _require_rank2(params)
    h = params.hbar
    t = lambda z: theta(z, params)  # noqa: E731
    dd = lambda z: checked_theta(z, params)  # noqa: E731
    terms: dict[Step, Coefficient] = {}
    if d == 1:
        for p in unit_steps(2):
            others = [q for q in unit_steps(2) if q != p and q != tuple(-c for c in p)]

            def coeff(lam, p=p, others=others):
                out = 1.0
                for q in others:
                    x = pairing(lam, add(p, q))
                    out = out * t(x - h) / dd(x)
                return out

            terms[p] = coeff
    elif d == 2:
        for r in steps_of_type(2, 2):
            if r == zero_step(2):
                terms[r] = lambda lam: t(2 * h) / dd(6 * h) * zero_mode_sum(lam, params)
            else:
                terms[r] = lambda lam, r=r: t(pairing(lam, r) - h) / dd(pairing(lam, r) + h)
    else:
        raise ValueError(f"d must be 1 or 2, got {d}")
    return DifferenceOperator(terms, params)


def _require_rank2(params: ModelParams) -> None:
    if params.rank_n != 2:
        raise ValueError("the difference operators are defined for rank 2 only")


def theorem1ii_residual(u, d: int, lam, params: ModelParams) -> Residual:
    """Largest coefficient mismatch between ``M_d(u)`` and its factorised form."""
    lam = np.asarray(lam, dtype=complex)
    u = np.asarray(u, dtype=complex)
    md = build_Md(u, d, params)
    mt = build_Mtilde(d, params)
    defect = np.zeros(np.broadcast_shapes(lam.shape[:-1], u.shape))
    scale = np.zeros_like(defect)
    for s in md.shifts:
        lhs = md.coefficient(s, lam)
        if d == 1:
            rhs = F_factor(u, params) * mt.coefficient(s, lam)
        else:
            corr = H_factor(u, params) if s == zero_step(2) else 0.0
            rhs = G_factor(u, params) * (mt.coefficient(s, lam) - corr)
        defect = np.maximum(defect, np.abs(lhs - rhs))
        scale = np.maximum(scale, np.maximum(np.abs(lhs), np.abs(rhs)))
    return Residual(defect, scale)


def theorem1ii_defect(u, d: int, lam, params: ModelParams):
    return theorem1ii_residual(u, d, lam, params).defect


# -- trace matrices -----------------------------------------------------------


def index_set(t: Step, d: int, dp: int) -> list[tuple[Step, Step]]:
    return [(p, q) for p in steps_of_type(d, 2) for q in steps_of_type(dp, 2) if add(p, q) == tuple(t)]


def total_shifts(d: int, dp: int) -> list[Step]:
    return sorted({add(p, q) for p in steps_of_type(d, 2) for q in steps_of_type(dp, 2)})


@dataclass(frozen=True)
class TraceMatrices:
    """``A_t``, ``B_t`` and ``W_t`` with rows and columns ordered as ``index``.

    Entry ``[i, j]`` holds the matrix element with superscript ``index[j]`` and
    subscript ``index[i]``, so that ``W_t A_t = B_t W_t``.
    """

    index: list
    A: np.ndarray
    B: np.ndarray
    W: np.ndarray


def trace_matrices(t: Step, lam, u, v, d: int, dp: int, params: ModelParams,
                   engine: FusionEngine | None = None) -> TraceMatrices:
    lam = np.asarray(lam, dtype=complex)
    engine = engine if engine is not None else FusionEngine(lam, params)
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    t = tuple(t)
    zero = zero_step(2)
    index = index_set(t, d, dp)
    k = len(index)
    batch = np.broadcast_shapes(lam.shape[:-1], u.shape, v.shape)
    A = np.zeros(batch + (k, k), dtype=complex)
    B = np.zeros_like(A)
    W = np.zeros_like(A)
    w = engine.weight
    for j, (p, q) in enumerate(index):
        for i, (r, s) in enumerate(index):
            A[..., i, j] = w((d, 2), zero, p, zero, sub(r, p), u) * w((dp, 2), p, q, sub(r, p), zero, v)
            B[..., i, j] = w((dp, 2), zero, q, zero, sub(s, q), v) * w((d, 2), q, p, sub(s, q), zero, u)
            W[..., i, j] = w((d, dp), zero, p, s, q, u - v)
    return TraceMatrices(index, A, B, W)


def commutativity_trace_defect(t: Step, lam, u, v, d: int, dp: int, params: ModelParams,
                               engine: FusionEngine | None = None) -> Residual:
    """``tr A_t - tr B_t`` with the larger trace as scale."""
    tm = trace_matrices(t, lam, u, v, d, dp, params, engine)
    ta = np.trace(tm.A, axis1=-2, axis2=-1)
    tb = np.trace(tm.B, axis1=-2, axis2=-1)
    return Residual(ta - tb, np.maximum(np.abs(ta), np.abs(tb)))


def intertwining_defect(t: Step, lam, u, v, d: int, dp: int, params: ModelParams,
                        engine: FusionEngine | None = None):
    """``(W_t A_t - B_t W_t, scale, smallest singular value of W_t)``."""
    tm = trace_matrices(t, lam, u, v, d, dp, params, engine)
    lhs = tm.W @ tm.A
    rhs = tm.B @ tm.W
    scale = np.maximum(np.abs(lhs).max(axis=(-2, -1)), np.abs(rhs).max(axis=(-2, -1)))
    smin = np.linalg.svd(tm.W, compute_uv=False)[..., -1]
    return lhs - rhs, scale, smin


# -- checks on functions ------------------------------------------------------


def trig_function(rng: np.random.Generator, n_terms: int = 4, max_freq: int = 2):
    """Random trigonometric polynomial ``sum_k a_k exp(2 pi i (k, x))``."""
    return trig_family(rng, 1, n_terms, max_freq, squeeze=True)


def trig_family(rng: np.random.Generator, count: int, n_terms: int = 4, max_freq: int = 2, squeeze: bool = False):
    """``count`` random trigonometric polynomials evaluated together.

    The returned ``f`` takes coordinates of shape ``(count, ..., 2)`` and
    evaluates member ``i`` on slice ``i``; with ``squeeze`` a single member
    accepts any shape.
    """
    freqs = rng.integers(-max_freq, max_freq + 1, size=(count, n_terms, 2))
    amps = rng.normal(size=(count, n_terms)) + 1j * rng.normal(size=(count, n_terms))

    def f(lam):
        lam = np.asarray(lam, dtype=complex)
        if squeeze:
            return np.sum(amps[0] * np.exp(2j * np.pi * (lam @ freqs[0].T)), axis=-1)
        extra = lam.ndim - 2
        fr = freqs.reshape((count,) + (1,) * extra + (n_terms, 2))
        am = amps.reshape((count,) + (1,) * extra + (n_terms,))
        phase = np.sum(lam[..., None, :] * fr, axis=-1)
        return np.sum(am * np.exp(2j * np.pi * phase), axis=-1)

    return f


def commutator_residual(f: Callable, lam, u, v, d: int, dp: int, params: ModelParams) -> Residual:
    """``M_d(u) M_d'(v) f - M_d'(v) M_d(u) f`` evaluated by nested application."""
    a, b = build_Md(u, d, params), build_Md(v, dp, params)
    ab = apply(a, lambda x: apply(b, f, x), lam)
    ba = apply(b, lambda x: apply(a, f, x), lam)
    return Residual(ab - ba, np.maximum(np.abs(ab), np.abs(ba)))


def weyl_covariance_defect(op: DifferenceOperator, lam, w: np.ndarray):
    """Largest ``|coeff_t(w lam) - coeff_{w^-1 t}(lam)|`` over shifts ``t``."""
    lam = np.asarray(lam, dtype=complex)
    winv = w.T
    worst = np.zeros(lam.shape[:-1])
    for t in op.shifts:
        diff = op.coefficient(t, act(w, lam)) - op.coefficient(act(winv, t), lam)
        worst = np.maximum(worst, np.abs(diff))
    return worst
