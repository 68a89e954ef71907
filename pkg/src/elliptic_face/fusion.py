"""Path spaces, the fusion projector and the fused face weights of rank 2.

A path is a tuple of vector-representation steps starting at a weight; a
:class:`PathVector` is a finite linear combination of paths that share a
starting point and a tuple of spectral labels, one label per step.  The
second fundamental representation at spectral parameter ``u`` is realised
inside two-step paths labelled ``(u, u - hbar)`` as the image of the fusion
projector.

Fused weights ``W_dd'`` are available two ways:

* :meth:`FusionEngine.weight` composes type-(1,1) operators on path space and
  reads off matrix coefficients by least squares (every pattern);
* :func:`fused_weight_listed` evaluates the closed forms for the patterns that
  have one, multiplied back by their common factor so both agree exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import AdmissibilityError, ProjectionError, UnlistedPatternError
from .theta import ModelParams, checked_theta, theta
from .weights import (
    FaceSquare,
    Step,
    WeightCache,
    add,
    neg,
    pairing,
    rank2_steps,
    shift,
    steps_of_type,
    sub,
    unit_steps,
    zero_step,
)

Path = tuple[Step, ...]

PROJECTION_TOL = 1e-8


def _ukey(u) -> tuple:
    a = np.asarray(u, dtype=complex)
    return (a.shape, a.tobytes())


def _same_label(a, b) -> bool:
    return np.shape(a) == np.shape(b) and bool(np.all(np.asarray(a) == np.asarray(b)))


@dataclass(frozen=True)
class PathVector:
    """Linear combination of paths from ``base + 2 hbar * start``.

    ``labels[i]`` is the spectral parameter carried by step ``i``.
    Coefficients may be numpy arrays broadcasting over a batch of base points.
    """

    base: np.ndarray
    start: Step
    labels: tuple
    terms: Mapping[Path, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        kept = {k: v for k, v in self.terms.items() if np.any(np.asarray(v) != 0)}
        for k in kept:
            if len(k) != len(self.labels):
                raise ValueError("path length does not match the number of labels")
        object.__setattr__(self, "terms", kept)

    def _check_compatible(self, other: "PathVector") -> None:
        if self.start != other.start or len(self.labels) != len(other.labels):
            raise ValueError("path vectors live in different path spaces")
        if not all(_same_label(a, b) for a, b in zip(self.labels, other.labels)):
            raise ValueError("path vectors carry different spectral labels")

    def __add__(self, other: "PathVector") -> "PathVector":
        self._check_compatible(other)
        terms = dict(self.terms)
        for k, v in other.terms.items():
            terms[k] = terms.get(k, 0) + v
        return PathVector(self.base, self.start, self.labels, terms)

    def __mul__(self, scalar) -> "PathVector":
        return PathVector(self.base, self.start, self.labels, {k: scalar * v for k, v in self.terms.items()})

    __rmul__ = __mul__

    def __sub__(self, other: "PathVector") -> "PathVector":
        return self + (-1.0) * other

    def coefficient(self, path: Path):
        return self.terms.get(tuple(path), 0.0)

    def norm(self):
        total = 0.0
        for v in self.terms.values():
            total = total + np.abs(v) ** 2
        return np.sqrt(total)

    def end(self, path: Path) -> Step:
        return add(self.start, *path) if path else self.start


class FusionEngine(WeightCache):
    """Type-(1,1) weights plus the composed fused weights, all memoised.

    Every vertex is addressed by an integer offset from ``base``; rank must be 2
    for anything involving the fused representation.
    """

    def __init__(self, base, params: ModelParams):
        super().__init__(base, params)
        self._columns: dict = {}
        self.max_residual = 0.0

    # -- path-space primitives -------------------------------------------
    def apply_w11(self, vec: PathVector, pos: int) -> PathVector:
        if not 0 <= pos < len(vec.labels) - 1:
            raise IndexError(f"no adjacent factors at position {pos}")
        P = unit_steps(self.n)
        x = np.asarray(vec.labels[pos], dtype=complex) - np.asarray(vec.labels[pos + 1], dtype=complex)
        out: dict = {}
        for path, coeff in vec.terms.items():
            a, b = path[pos], path[pos + 1]
            offset = add(vec.start, *path[:pos]) if pos else vec.start
            total = add(a, b)
            for c in P:
                rest = sub(total, c)
                if rest not in P:
                    continue
                w = self.w11(offset, a, c, b, x)
                key = path[:pos] + (c, rest) + path[pos + 2 :]
                out[key] = out.get(key, 0) + coeff * w
        labels = list(vec.labels)
        labels[pos], labels[pos + 1] = labels[pos + 1], labels[pos]
        return PathVector(vec.base, vec.start, tuple(labels), out)

    def fbar_terms(self, offset: Step, r: Step) -> dict:
        """Two-step expansion of the fused basis vector from ``offset`` to ``offset + r``."""
        if self.n != 2:
            raise ValueError("the fused representation is only realised for rank 2")
        lam = self.vertex(offset)
        h = self.params.hbar
        t = lambda z: theta(z, self.params)  # noqa: E731
        if r == (0, 0):
            return {(p, neg(p)): t(2 * pairing(lam, p) + 2 * h) for p in unit_steps(2)}
        if r not in rank2_steps():
            raise AdmissibilityError(f"{r} is not a weight of the second fundamental representation")
        p, q = (r[0], 0), (0, r[1])
        return {
            (p, q): t(pairing(lam, sub(p, q)) + h),
            (q, p): t(pairing(lam, sub(q, p)) + h),
        }

    def basis_vector(self, start: Step, kinds, steps, labels) -> PathVector:
        """Tensor product of basis elements ``g`` of the given kinds (1 or 2)."""
        partial = {(): 1.0}
        for d, s in zip(kinds, steps):
            nxt: dict = {}
            for path, coeff in partial.items():
                offset = add(start, *path) if path else start
                if d == 1:
                    nxt[path + (s,)] = coeff
                else:
                    for seg, w in self.fbar_terms(offset, s).items():
                        nxt[path + seg] = coeff * w
            partial = nxt
        return PathVector(self.base, start, tuple(labels), partial)

    # -- fused operators ---------------------------------------------------
    def _labels(self, d: int, x) -> tuple:
        x = np.asarray(x, dtype=complex)
        return (x,) if d == 1 else (x, x - self.params.hbar)

    @staticmethod
    def operator_positions(types) -> list[int]:
        """Positions of the type-(1,1) factors, in order of application."""
        k, l = types
        return [j + i for j in range(l) for i in reversed(range(k))]

    def apply_fused(self, vec: PathVector, types) -> PathVector:
        for pos in self.operator_positions(types):
            vec = self.apply_w11(vec, pos)
        return vec

    def column(self, offset: Step, types, top: Step, right: Step, u):
        """Coefficients ``{left: W}`` of the fused operator on one input path.

        The second spectral parameter is set to zero so ``u`` is the difference.
        """
        key = (offset, tuple(types), top, right, _ukey(u))
        hit = self._columns.get(key)
        if hit is not None:
            return hit
        d, dp = types
        u = np.asarray(u, dtype=complex)
        zero = np.zeros_like(u)
        in_labels = self._labels(d, u) + self._labels(dp, zero)
        out_labels = self._labels(dp, zero) + self._labels(d, u)
        vec = self.basis_vector(offset, (d, dp), (top, right), in_labels)
        image = self.apply_fused(vec, types)
        Pd = set(steps_of_type(d, self.n))
        lefts = [s for s in steps_of_type(dp, self.n) if sub(add(top, right), s) in Pd]
        basis = [self.basis_vector(offset, (dp, d), (s, sub(add(top, right), s)), out_labels) for s in lefts]
        coeffs, residual = _least_squares(image, basis)
        self.max_residual = max(self.max_residual, float(np.max(residual)))
        if np.any(residual > PROJECTION_TOL):
            raise ProjectionError(
                f"image of {types} input {top, right} leaves the fused subspace (residual {np.max(residual):.3g})"
            )
        result = (dict(zip(lefts, coeffs)), residual)
        self._columns[key] = result
        return result

    def weight(self, types, offset: Step, top: Step, left: Step, right: Step, u):
        """``W_dd'`` at the square ``(top, left, right)`` from vertex ``offset``."""
        types = tuple(types)
        if types == (1, 1):
            return self.w11(offset, top, left, right, u)
        d, dp = types
        Pd, Pdp = set(steps_of_type(d, self.n)), set(steps_of_type(dp, self.n))
        bottom = sub(add(top, right), left)
        shape = np.broadcast_shapes(self.base.shape[:-1], np.shape(u))
        if top not in Pd or bottom not in Pd or left not in Pdp or right not in Pdp:
            return np.zeros(shape, dtype=complex)
        coeffs, _ = self.column(offset, types, top, right, u)
        return coeffs[left] + np.zeros(shape, dtype=complex)

    __call__ = weight


def _least_squares(target: PathVector, basis: list[PathVector]):
    """Coefficients of ``target`` on ``basis`` and the relative residual."""
    paths = sorted(set(target.terms).union(*(b.terms for b in basis)))
    arrays = [target.terms.get(p, 0.0) for p in paths]
    for b in basis:
        arrays.extend(b.terms.get(p, 0.0) for p in paths)
    batch = np.broadcast_shapes(*(np.shape(a) for a in arrays))
    npath, k = len(paths), len(basis)
    if npath == 0:
        return [np.zeros(batch, dtype=complex) for _ in basis], np.zeros(batch)
    rhs = np.zeros(batch + (npath,), dtype=complex)
    for i, p in enumerate(paths):
        rhs[..., i] = target.terms.get(p, 0.0)
    if k == 0:
        return [], np.where(np.linalg.norm(rhs, axis=-1) > 0, 1.0, 0.0)
    mat = np.zeros(batch + (npath, k), dtype=complex)
    for j, b in enumerate(basis):
        for i, p in enumerate(paths):
            mat[..., i, j] = b.terms.get(p, 0.0)
    sol = (np.linalg.pinv(mat) @ rhs[..., None])[..., 0]
    fitted = (mat @ sol[..., None])[..., 0]
    bnorm = np.linalg.norm(rhs, axis=-1)
    resid = np.linalg.norm(fitted - rhs, axis=-1) / np.where(bnorm > 0, bnorm, 1.0)
    return [sol[..., j] for j in range(k)], resid


# -- free-function surface ------------------------------------------------


def apply_w11_op(pos: int, u_minus_v, vec: PathVector, params: ModelParams, engine: FusionEngine | None = None) -> PathVector:
    """Apply the type-(1,1) operator to factors ``pos, pos+1`` of ``vec``.

    The spectral difference is ``labels[pos] - labels[pos+1]``; passing
    ``u_minus_v=None`` reads it from the labels, otherwise it must agree with
    them.  The two labels are exchanged in the result.
    """
    if u_minus_v is not None:
        x = np.asarray(vec.labels[pos]) - np.asarray(vec.labels[pos + 1])
        if not np.allclose(x, u_minus_v, rtol=0, atol=1e-12):
            raise ValueError("spectral difference disagrees with the path labels")
    if engine is None or not np.array_equal(engine.base, vec.base):
        engine = FusionEngine(vec.base, params)
    return engine.apply_w11(vec, pos)


def path_vector(lam, paths: Mapping[Path, complex], labels, start: Step | None = None) -> PathVector:
    lam = np.asarray(lam, dtype=complex)
    return PathVector(lam, start or zero_step(lam.shape[-1]), tuple(np.asarray(x, dtype=complex) for x in labels), dict(paths))


def two_step_paths(n: int = 2) -> list[Path]:
    P = unit_steps(n)
    return [(a, b) for a in P for b in P]


def fusion_projector(lam, u, params: ModelParams):
    """Matrix of the fusion projector on the two-step paths from ``lam``.

    Columns index input paths labelled ``(u - hbar, u)``, rows output paths
    labelled ``(u, u - hbar)``, both in the order of :func:`two_step_paths`.
    """
    lam = np.asarray(lam, dtype=complex)
    engine = FusionEngine(lam, params)
    paths = two_step_paths(engine.n)
    u = np.asarray(u, dtype=complex)
    labels = (u - params.hbar, u)
    batch = np.broadcast_shapes(lam.shape[:-1], u.shape)
    mat = np.zeros(batch + (len(paths), len(paths)), dtype=complex)
    index = {p: i for i, p in enumerate(paths)}
    for j, p in enumerate(paths):
        image = engine.apply_w11(path_vector(lam, {p: 1.0}, labels), 0)
        for q, coeff in image.terms.items():
            mat[..., index[q], j] = coeff
    return mat, paths


def fused_basis_vector(lam, r: Step, u, params: ModelParams) -> PathVector:
    """The vector ``fbar`` from ``lam`` to ``lam + 2 hbar r`` labelled ``(u, u - hbar)``."""
    lam = np.asarray(lam, dtype=complex)
    engine = FusionEngine(lam, params)
    u = np.asarray(u, dtype=complex)
    return engine.basis_vector(zero_step(2), (2,), (tuple(r),), (u, u - params.hbar))


def _square_steps(square: FaceSquare, params: ModelParams):
    steps = square.steps(params)
    if steps is None:
        raise AdmissibilityError(f"square is not admissible for type {square.type_dd}")
    return steps


def fused_weight_composed(square: FaceSquare, params: ModelParams, engine: FusionEngine | None = None):
    top, left, right, _ = _square_steps(square, params)
    engine = engine if engine is not None else FusionEngine(square.lam, params)
    return engine.weight(square.type_dd, zero_step(engine.n), top, left, right, square.u)


# -- closed forms -----------------------------------------------------------


def _perp(p: Step) -> list[Step]:
    return [q for q in unit_steps(len(p)) if q != p and q != neg(p)]


def fused_common_factor(types, u, params: ModelParams):
    """Factor dropped from the closed-form lists of each fused type."""
    t = lambda z: theta(z, params)  # noqa: E731
    h = params.hbar
    u = np.asarray(u, dtype=complex)
    if tuple(types) == (2, 1):
        return t(u - h) * t(u + h) * t(u + 3 * h) / (t(-3 * h) ** 2 * t(h))
    if tuple(types) == (1, 2):
        return t(u) * t(u + 2 * h) * t(u + 4 * h) / (t(-3 * h) ** 2 * t(h))
    if tuple(types) == (2, 2):
        return G_factor(u, params)
    raise ValueError(f"no common factor for type {types}")


def G_factor(u, params: ModelParams):
    t = lambda z: theta(z, params)  # noqa: E731
    h = params.hbar
    u = np.asarray(u, dtype=complex)
    num = t(u - h) * t(u) ** 2 * t(u + h) * t(u + 2 * h) * t(u + 3 * h) ** 2 * t(u + 4 * h)
    return num / (t(-3 * h) ** 4 * t(h) ** 4)


def zero_mode_sum(lam, params: ModelParams):
    """``sum_{r=+-e1, s=+-e2} C_{r,s}(lam)`` without the ``[2h]/[6h]`` prefactor."""
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h = params.hbar
    total = 0.0
    for r in ((1, 0), (-1, 0)):
        for s in ((0, 1), (0, -1)):
            lr, ls, lrs = pairing(lam, r), pairing(lam, s), pairing(lam, add(r, s))
            total = total + (
                t(2 * lr + 2 * h) * t(2 * ls + 2 * h) / (d(2 * lr) * d(2 * ls))
                * t(lrs - 5 * h) * t(lrs + 2 * h) / (d(lrs) * d(lrs + h))
            )
    return total


def listed_pattern(types, top: Step, left: Step, right: Step) -> str | None:
    """Tag of the closed form covering this fused square, or None."""
    return _match_listed(tuple(types), top, left, right)[0]


def _match_listed(types, top, left, right):
    if types == (2, 1):
        q = left
        if q not in unit_steps(2):
            return None, None
        for p in _perp(q):
            table = {
                (add(p, q), q, q): "W21-1",
                (sub(p, q), q, q): "W21-2",
                ((0, 0), q, q): "ex1",
                (sub(q, p), q, p): "ex2",
                ((0, 0), q, p): "ex3",
                (add(p, q), q, neg(q)): "W21-6",
            }
            tag = table.get((top, left, right))
            if tag:
                return tag, (p, q)
    elif types == (1, 2):
        p = top
        if p not in unit_steps(2):
            return None, None
        for q in _perp(p):
            table = {
                (p, add(p, q), add(p, q)): "W12-1",
                (p, sub(q, p), sub(q, p)): "W12-2",
                (p, (0, 0), (0, 0)): "sign1",
                (p, (0, 0), sub(q, p)): "W12-4",
                (p, sub(p, q), (0, 0)): "W12-5",
                (p, add(p, q), sub(q, p)): "W12-6",
            }
            tag = table.get((top, left, right))
            if tag:
                return tag, (p, q)
    elif types == (2, 2):
        if left == (0, 0) and right == (0, 0) and top in rank2_steps():
            return ("degzero" if top == (0, 0) else "deg2part"), (top, None)
    return None, None


def fused_weight_listed(lam, types, top: Step, left: Step, right: Step, u, params: ModelParams):
    """Closed-form fused weight, including its common factor."""
    types = tuple(types)
    tag, pq = _match_listed(types, tuple(top), tuple(left), tuple(right))
    if tag is None:
        raise UnlistedPatternError(f"no closed form for type {types} square {top, left, right}")
    lam = np.asarray(lam, dtype=complex)
    u = np.asarray(u, dtype=complex)
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h = params.hbar
    lp = lambda s: pairing(lam, s)  # noqa: E731
    p, q = pq
    if tag == "W21-1":
        val = t(u + 2 * h) / d(h)
    elif tag == "W21-2":
        val = t(u) / d(h) * t(2 * lp(q) + 2 * h) / d(2 * lp(q)) * t(lp(sub(p, q)) - h) / d(lp(sub(p, q)) + h)
    elif tag == "ex1":
        val = t(u + h) / d(h)
        for r in _perp(q):
            val = val * t(lp(add(q, r)) + 2 * h) / d(lp(add(q, r)) + h)
    elif tag == "ex2":
        val = t(lp(sub(q, p)) - u) * t(lp(add(q, p)) + 2 * h) / (d(2 * lp(p)) * d(lp(sub(q, p)) + h))
    elif tag == "ex3":
        val = (
            t(2 * h) / d(h) * t(lp(sub(q, p)) - h - u) * t(2 * lp(q) + 2 * h)
            / (d(lp(sub(q, p)) - h) * d(lp(add(q, p)) + h))
        )
    elif tag == "W21-6":
        val = t(2 * h) / d(h) * t(2 * lp(q) - u) * t(lp(sub(p, q)) - h) / (d(2 * lp(q)) * d(lp(add(p, q)) + h))
    elif tag == "W12-1":
        val = t(u + 3 * h) / d(h)
    elif tag == "W12-2":
        val = t(u + h) / d(h) * t(2 * lp(p) - 2 * h) / d(2 * lp(p)) * t(lp(sub(q, p)) + 2 * h) / d(lp(sub(q, p)))
    elif tag == "sign1":
        val = t(u + 2 * h) / d(h)
        for r in _perp(p):
            val = val * t(lp(add(p, r)) - h) / d(lp(add(p, r)))
    elif tag == "W12-4":
        val = t(u + 2 * h - lp(sub(p, q))) * t(lp(add(p, q)) - h) / (d(2 * lp(p)) * d(lp(sub(q, p))))
    elif tag == "W12-5":
        val = (
            t(2 * h) / d(h) * t(u + h - lp(sub(p, q))) * t(2 * lp(q) - 2 * h)
            / (d(lp(sub(q, p))) * d(lp(add(p, q))))
        )
    elif tag == "W12-6":
        val = t(2 * h) / d(h) * t(2 * lp(p) - h - u) * t(lp(add(p, q)) + 2 * h) / (d(2 * lp(p)) * d(lp(sub(q, p))))
    elif tag == "deg2part":
        r = p
        val = t(lp(r) - h) / d(lp(r) + h)
    else:  # degzero
        val = t(2 * h) / d(6 * h) * (
            zero_mode_sum(lam, params) - t(u + 6 * h) * t(u - 3 * h) / (d(u) * d(u + 3 * h))
        )
    return val * fused_common_factor(types, u, params)


def fused_weight_explicit(square: FaceSquare, params: ModelParams):
    top, left, right, _ = _square_steps(square, params)
    return fused_weight_listed(square.lam, square.type_dd, top, left, right, square.u, params)


def listed_squares(types) -> list[tuple[str, Step, Step, Step]]:
    """Every (tag, top, left, right) with a closed form, for rank 2."""
    d, dp = types
    out = []
    for top in steps_of_type(d, 2):
        for left in steps_of_type(dp, 2):
            for right in steps_of_type(dp, 2):
                tag = listed_pattern(types, top, left, right)
                if tag:
                    out.append((tag, top, left, right))
    return out


# -- identities used in the construction ------------------------------------


def zero_deg_lemma_residual(lam, p: Step, u, params: ModelParams):
    from .weights import Residual

    lam = np.asarray(lam, dtype=complex)
    u = np.asarray(u, dtype=complex)
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h = params.hbar
    lp = lambda s: pairing(lam, s)  # noqa: E731
    first = t(u + h) * t(u + 2 * h) / (d(2 * h) * d(-3 * h))
    for q in _perp(p):
        x = lp(add(p, q))
        first = first * t(x - h) / d(x) * t(x + 2 * h) / d(x + h)
    second = 0.0
    for q in _perp(p):
        x, y = lp(add(p, q)), lp(sub(p, q))
        second = second + (
            t(2 * lp(q) - 2 * h) / d(2 * lp(q)) * t(x + 2 * h + u) * t(x - h - u) * t(y - h)
            / (d(x) * d(x - h) * d(y + h))
        )
    second = t(h) / d(-3 * h) * second
    rhs1 = t(u) * t(u + 3 * h) / (d(6 * h) * d(-3 * h)) * zero_mode_sum(lam, params)
    rhs2 = -t(u + 6 * h) * t(u - 3 * h) / (d(6 * h) * d(-3 * h))
    terms = [first, second, rhs1, rhs2]
    scale = np.max(np.abs(np.stack(np.broadcast_arrays(*terms))), axis=0)
    return Residual(first + second - rhs1 - rhs2, scale)


def zero_deg_lemma_defect(lam, p: Step, u, params: ModelParams):
    return zero_deg_lemma_residual(lam, tuple(p), u, params).defect


def v_coefficient(engine: FusionEngine, q: Step, s: Step, t_: Step, p: Step, u):
    """``V_q(lam; s, t; u)`` from the fused W21 derivation, at the engine base."""
    h = engine.params.hbar
    zero = zero_step(2)
    lam = engine.base
    total = 0.0
    for r in unit_steps(2):
        coeff = theta(2 * pairing(lam, r) + 2 * h, engine.params)
        first = engine.w11(zero, r, q, sub(add(q, s), r), u)
        second = engine.w11(r, neg(r), sub(add(q, s), r), p, np.asarray(u) - h)
        total = total + coeff * first * second
    return total


def v_ratio_defect(lam, p: Step, q: Step, u, params: ModelParams):
    """Difference of the two ratios ``V_q / [.]`` that must agree for ``q != +-p``."""
    engine = FusionEngine(lam, params)
    h = params.hbar
    lamq = shift(engine.base, q, params)
    a = v_coefficient(engine, q, p, neg(q), p, u) / theta(pairing(lamq, add(p, q)) + h, params)
    b = v_coefficient(engine, q, neg(q), p, p, u) / theta(pairing(lamq, neg(add(q, p))) + h, params)
    return a - b, np.maximum(np.abs(a), np.abs(b))


def zero_coefficient_via_w21(lam, p: Step, u, params: ModelParams, engine: FusionEngine | None = None):
    """Coefficient of ``W22 f^lam_lam (x) f^lam_lam`` on itself from two W21 weights."""
    engine = engine if engine is not None else FusionEngine(lam, params)
    h = params.hbar
    zero = zero_step(2)
    u = np.asarray(u, dtype=complex)
    lam = engine.base
    total = 0.0
    for r in unit_steps(2):
        first = engine.weight((2, 1), zero, zero, p, r, u)
        second = engine.weight((2, 1), p, sub(r, p), neg(p), neg(r), u + h)
        total = total + theta(2 * pairing(lam, r) + 2 * h, params) * first * second
    return total / theta(2 * pairing(lam, p) + 2 * h, params)


# -- operator identities on path space ----------------------------------------

# Start labels as functions of (u, v, hbar), then the positions applied on each side.
_INTERTWINERS = {
    "W21": (lambda u, v, h: (u - h, u, v), (0, 1, 0), (1, 0, 1)),
    "W12": (lambda u, v, h: (u, v - h, v), (1, 0, 1), (0, 1, 0)),
}


def random_path_vector(engine: FusionEngine, labels, rng: np.random.Generator) -> PathVector:
    """Random combination of every path of ``len(labels)`` steps from the engine base."""
    P = unit_steps(engine.n)
    paths = [()]
    for _ in labels:
        paths = [p + (s,) for p in paths for s in P]
    batch = engine.base.shape[:-1]
    terms = {p: rng.normal(size=batch) + 1j * rng.normal(size=batch) for p in paths}
    return PathVector(engine.base, zero_step(engine.n), tuple(np.asarray(x, dtype=complex) for x in labels), terms)


def intertwining_residual(lam, which: str, u, v, params: ModelParams, rng: np.random.Generator | None = None):
    """Both sides of the projector-intertwining relation ``which`` on a random vector.

    ``which`` is ``"W21"`` (projector on the first two factors moves to the last
    two) or ``"W12"`` (the reverse).  Each side is a sequence of type-(1,1)
    operators whose spectral differences follow from the labels.
    """
    from .weights import Residual

    rng = rng if rng is not None else np.random.default_rng(0)
    start, lhs_ops, rhs_ops = _INTERTWINERS[which]
    engine = FusionEngine(lam, params)
    vec = random_path_vector(engine, start(np.asarray(u, dtype=complex), np.asarray(v, dtype=complex), params.hbar), rng)
    lhs, rhs = vec, vec
    for pos in lhs_ops:
        lhs = engine.apply_w11(lhs, pos)
    for pos in rhs_ops:
        rhs = engine.apply_w11(rhs, pos)
    diff = lhs - rhs
    scale = np.maximum(lhs.norm(), rhs.norm())
    return Residual(diff.norm(), scale)


def fused_ybe_residuals(lam, types, u, v, w, params: ModelParams, engine: FusionEngine | None = None):
    """Relative Yang-Baxter defects over every admissible hexagon of the given types."""
    from .weights import admissible_hexagons, ybe_residual

    engine = engine if engine is not None else FusionEngine(lam, params)
    out = {}
    for hexagon in admissible_hexagons(tuple(types), engine.n):
        res = ybe_residual(engine, hexagon, tuple(types), u, v, w, engine.n)
        out[hexagon] = res.relative
    return out
