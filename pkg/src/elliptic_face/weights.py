"""Weight-space combinatorics for C_n and the vector-representation face weights.

Points of the weight space are coordinate arrays ``x`` (last axis of length n)
standing for ``sum_j x_j eps_j``; the form is ``(eps_j, eps_k) = delta_jk / 2``.
Steps are integer tuples, e.g. ``(1, 0)`` for ``eps_1`` and ``(0, -1)`` for
``-eps_2``.  A step ``p`` moves a weight by ``2 hbar p``.

Face weights use the box convention: ``top`` goes from the top-left corner
``lam`` to the top-right ``mu``, ``left`` from ``lam`` to the bottom-left
``kap``, ``right`` from ``mu`` to the bottom-right ``nu``; the bottom step is
``top + right - left``.  Every routine broadcasts over leading axes of
``lam`` and over array-valued spectral parameters.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import AdmissibilityError
from .theta import ModelParams, checked_theta, theta

Step = tuple[int, ...]


def zero_step(n: int) -> Step:
    return (0,) * n


def unit_steps(n: int) -> list[Step]:
    """The weights ``{+-eps_j}`` of the vector representation, ordered
    ``eps_1, ..., eps_n, -eps_n, ..., -eps_1``."""
    pos = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    neg = [tuple(-c for c in s) for s in reversed(pos)]
    return pos + neg


def rank2_steps() -> list[Step]:
    """The weights ``{+-eps_1 +- eps_2, 0}`` of the second fundamental representation of C_2."""
    return [(1, 1), (1, -1), (-1, 1), (-1, -1), (0, 0)]


def steps_of_type(d: int, n: int) -> list[Step]:
    if d == 1:
        return unit_steps(n)
    if d == 2:
        if n != 2:
            raise ValueError("type-2 steps are only defined for rank 2")
        return rank2_steps()
    raise ValueError(f"step type must be 1 or 2, got {d}")


def add(*steps: Step) -> Step:
    return tuple(int(sum(c)) for c in zip(*steps))


def neg(s: Step) -> Step:
    return tuple(-c for c in s)


def sub(a: Step, b: Step) -> Step:
    return add(a, neg(b))


def weyl_group(n: int) -> list[np.ndarray]:
    """The ``2^n n!`` signed permutation matrices acting on coordinates."""
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            m = np.zeros((n, n), dtype=int)
            for i, (j, s) in enumerate(zip(perm, signs)):
                m[i, j] = s
            out.append(m)
    return out


def act(w: np.ndarray, x):
    """Image ``w x`` of a coordinate array (or integer step) under ``w``."""
    if isinstance(x, tuple):
        return tuple(int(c) for c in w @ np.asarray(x))
    return np.asarray(x) @ w.T


def pairing(lam, v) -> np.ndarray:
    """``(lam, v)`` for coordinate arrays; ``lam_p`` when ``v`` is a step."""
    lam = np.asarray(lam, dtype=complex)
    return 0.5 * (lam @ np.asarray(v, dtype=complex))


def shift(lam, step, params: ModelParams) -> np.ndarray:
    """``lam + 2 hbar step``."""
    return np.asarray(lam, dtype=complex) + 2 * params.hbar * np.asarray(step, dtype=float)


def decode_step(lam, mu, params: ModelParams, allowed: Sequence[Step], atol: float = 1e-9) -> Step | None:
    """Return the step ``s`` in ``allowed`` with ``mu = lam + 2 hbar s``, else None."""
    diff = (np.asarray(mu, dtype=complex) - np.asarray(lam, dtype=complex)) / (2 * params.hbar)
    for s in allowed:
        if np.allclose(diff, np.asarray(s, dtype=float), rtol=0, atol=atol):
            return s
    return None


@dataclass(frozen=True)
class FaceSquare:
    """Corners ``(lam, mu; kap, nu)`` of a face, its spectral parameter and type."""

    lam: np.ndarray
    mu: np.ndarray
    kap: np.ndarray
    nu: np.ndarray
    u: complex
    type_dd: tuple[int, int] = (1, 1)

    def steps(self, params: ModelParams) -> tuple[Step, Step, Step, Step] | None:
        """(top, left, right, bottom), or None if the square is not admissible."""
        d, dp = self.type_dd
        n = np.shape(self.lam)[-1]
        top = decode_step(self.lam, self.mu, params, steps_of_type(d, n))
        left = decode_step(self.lam, self.kap, params, steps_of_type(dp, n))
        right = decode_step(self.mu, self.nu, params, steps_of_type(dp, n))
        bottom = decode_step(self.kap, self.nu, params, steps_of_type(d, n))
        if None in (top, left, right, bottom):
            return None
        return top, left, right, bottom

    @classmethod
    def from_steps(cls, lam, top, left, right, u, params: ModelParams, type_dd=(1, 1)) -> "FaceSquare":
        mu = shift(lam, top, params)
        return cls(
            lam=np.asarray(lam, dtype=complex),
            mu=mu,
            kap=shift(lam, left, params),
            nu=shift(mu, right, params),
            u=u,
            type_dd=tuple(type_dd),
        )


def _zeros(lam, u) -> np.ndarray:
    shape = np.broadcast_shapes(np.shape(lam)[:-1], np.shape(u))
    out = np.zeros(shape, dtype=complex)
    return out[()] if out.ndim == 0 else out


def face_weight(lam, top: Step, left: Step, right: Step, u, params: ModelParams):
    """Type-(1,1) face weight in box form; zero for non-admissible squares."""
    n = np.shape(lam)[-1]
    P = unit_steps(n)
    bottom = sub(add(top, right), left)
    if top not in P or left not in P or right not in P or bottom not in P:
        return _zeros(lam, u)
    u = np.asarray(u, dtype=complex)
    h = params.hbar
    c = params.crossing_c
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    lp = lambda s: pairing(lam, s)  # noqa: E731

    a = top
    if a == left:
        if right == a:
            return t(c - u) * t(u + h) / (d(c) * d(h)) + _zeros(lam, u)
        if right == neg(a):
            p = a
            x = 2 * lp(p) + h
            first = t(c - u) * t(x - u) / (d(c) * d(x))
            prod = 1.0
            for q in P:
                if q != p and q != neg(p):
                    prod = prod * t(lp(add(p, q)) + h) / d(lp(add(p, q)))
            second = t(u) * t(x + c - u) / (d(c) * d(x)) * t(2 * lp(p) + 2 * h) / d(2 * lp(p)) * prod
            return first - second
        p, q = a, right
        x = lp(sub(p, q))
        return t(c - u) * t(x - u) / (d(c) * d(x))
    if right == neg(a):
        # top q, left p, right -q, bottom -p  (p != q)
        q, p = a, left
        x = lp(add(p, q)) + h
        num = 1.0
        for r in P:
            if r != p and r != neg(p):
                num = num * t(lp(add(p, r)) + h)
        den = 1.0
        for r in P:
            if r != q and r != neg(q):
                den = den * d(lp(add(q, r)))
        return -(t(u) * t(x + c - u) / (d(c) * d(x)) * t(2 * lp(p) + 2 * h) / d(2 * lp(q)) * num / den)
    if right == left:
        # top q, left p, right p, bottom q  (p != +-q)
        q, p = a, left
        x = lp(sub(p, q))
        return t(c - u) * t(u) * t(x + h) / (d(c) * d(h) * d(x))
    raise AssertionError(f"unclassified admissible square {top, left, right}")  # pragma: no cover


def w11(square: FaceSquare, params: ModelParams):
    """Face weight of an explicit square of weights."""
    if tuple(square.type_dd) != (1, 1):
        raise ValueError("w11 handles type (1,1) squares only")
    steps = square.steps(params)
    if steps is None:
        return _zeros(square.lam, square.u)
    top, left, right, _ = steps
    return face_weight(square.lam, top, left, right, square.u, params)


def pattern_label(top: Step, left: Step, right: Step) -> str | None:
    """Name of the closed-form expression that covers this square, if admissible."""
    n = len(top)
    P = unit_steps(n)
    if sub(add(top, right), left) not in P or not {top, left, right} <= set(P):
        return None
    if top == left:
        if right == top:
            return "2-5a"
        if right == neg(top):
            return "2-5e"
        return "2-5b"
    if right == neg(top):
        return "2-5d"
    return "2-5c"


def admissible_squares(n: int) -> list[tuple[Step, Step, Step]]:
    """All (top, left, right) with every edge in the vector representation."""
    P = unit_steps(n)
    return [(a, b, c) for a in P for b in P for c in P if sub(add(a, c), b) in P]


def g_factor_step(lam, p: Step, params: ModelParams):
    h = params.hbar
    lp = lambda s: pairing(lam, s)  # noqa: E731
    out = -theta(2 * lp(p) + 2 * h, params) / checked_theta(2 * lp(p), params)
    for r in unit_steps(len(p)):
        if r != p and r != neg(p):
            out = out * theta(lp(add(p, r)) + h, params) / checked_theta(lp(add(p, r)), params)
    return out


def g_factor(lam, p: Step, params: ModelParams):
    """``G_{lam p} = -[2 lam_p + 2h]/[2 lam_p] prod_{r != +-p} [lam_{p+r} + h]/[lam_{p+r}]``."""
    if tuple(p) not in unit_steps(np.shape(lam)[-1]):
        raise AdmissibilityError(f"{p} is not a vector-representation weight")
    return g_factor_step(lam, tuple(p), params)


def crossing_g_step(lam, p: Step, params: ModelParams):
    """``g(lam, lam + 2 hbar p) = [2 mu_p] prod_{q != +-p} [mu_{p+q}]``."""
    mu = shift(lam, p, params)
    out = theta(2 * pairing(mu, p), params)
    for q in unit_steps(len(p)):
        if q != p and q != neg(p):
            out = out * theta(pairing(mu, add(p, q)), params)
    return out


def crossing_g(lam, mu, params: ModelParams):
    p = decode_step(lam, mu, params, unit_steps(np.shape(lam)[-1]))
    if p is None:
        raise AdmissibilityError("mu - lam is not 2 hbar times a vector weight")
    return crossing_g_step(lam, p, params)


class Residual(NamedTuple):
    """An identity check: ``lhs - rhs`` together with the size of its terms."""

    defect: np.ndarray
    scale: np.ndarray

    @property
    def relative(self) -> np.ndarray:
        return np.abs(self.defect) / (1 + self.scale)


def _residual(lhs_terms, rhs_terms) -> Residual:
    lhs = sum(lhs_terms)
    rhs = sum(rhs_terms)
    scale = 0.0
    for term in list(lhs_terms) + list(rhs_terms):
        scale = np.maximum(scale, np.abs(term))
    return Residual(np.asarray(lhs - rhs), np.asarray(scale))


def _delta(a: Step, b: Step) -> float:
    return 1.0 if a == b else 0.0


def initial_residual(lam, top: Step, left: Step, right: Step, params: ModelParams) -> Residual:
    w = face_weight(lam, top, left, right, 0.0, params)
    return _residual([w], [_delta(top, left) + _zeros(lam, 0.0)])


def inversion_residual(lam, top: Step, left: Step, total: Step, u, params: ModelParams) -> Residual:
    """Sum over the middle corner of W(u) W(-u) against the diagonal factor."""
    P = unit_steps(np.shape(lam)[-1])
    terms = []
    for e in P:
        if sub(total, e) not in P or sub(total, top) not in P or sub(total, left) not in P:
            continue
        terms.append(
            face_weight(lam, e, left, sub(total, e), u, params)
            * face_weight(lam, top, e, sub(total, top), -np.asarray(u), params)
        )
    t = lambda z: theta(z, params)  # noqa: E731
    c, h = params.crossing_c, params.hbar
    factor = t(c + u) * t(c - u) * t(h + u) * t(h - u) / (t(c) ** 2 * t(h) ** 2)
    return _residual(terms or [_zeros(lam, u)], [_delta(top, left) * factor + _zeros(lam, u)])


def identity_iii_residual(lam, p: Step, q: Step, u, params: ModelParams) -> Residual:
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    c, h = params.crossing_c, params.hbar
    u = np.asarray(u, dtype=complex)
    lp, lq = pairing(lam, p), pairing(lam, q)
    lhs = []
    for r in unit_steps(np.shape(lam)[-1]):
        lr = pairing(lam, r)
        lhs.append(
            t(lp + lr + h + c - u) * t(lq + lr + h + c + u) / (d(lp + lr + h) * d(lq + lr + h))
            * g_factor_step(lam, r, params)
        )
    rhs = []
    if p == q:
        rhs.append(
            t(c - u) * t(c + u) * t(2 * lp) * t(2 * lq + 2 * h)
            / (d(h) ** 2 * d(2 * lp + h) ** 2) / g_factor_step(lam, p, params)
        )
    # boundary terms carry 2 lam_q on the [c+u] term and 2 lam_p on the [c-u] term
    rhs.append(t(c + u) * t(2 * lq + h + u) * t(lp + lq + h + c - u) / (d(u) * d(2 * lq + h) * d(lp + lq + h)))
    rhs.append(-t(c - u) * t(2 * lp + h - u) * t(lp + lq + h + c + u) / (d(u) * d(2 * lp + h) * d(lp + lq + h)))
    return _residual(lhs, rhs)


def crossing_residual(lam, top: Step, left: Step, right: Step, u, params: ModelParams) -> Residual:
    bottom = sub(add(top, right), left)
    lhs = face_weight(lam, top, left, right, u, params)
    kap = shift(lam, left, params)
    mu = shift(lam, top, params)
    ratio = crossing_g_step(lam, left, params) / crossing_g_step(mu, right, params)
    rhs = ratio * face_weight(kap, neg(left), bottom, top, params.crossing_c - np.asarray(u), params)
    return _residual([lhs], [rhs])


def reflection_residual(lam, top: Step, left: Step, right: Step, u, params: ModelParams) -> Residual:
    bottom = sub(add(top, right), left)
    lhs = face_weight(lam, top, left, right, u, params)
    kap = shift(lam, left, params)
    mu = shift(lam, top, params)
    ratio = (
        crossing_g_step(lam, left, params) * crossing_g_step(kap, bottom, params)
        / (crossing_g_step(lam, top, params) * crossing_g_step(mu, right, params))
    )
    rhs = ratio * face_weight(lam, left, top, bottom, u, params)
    return _residual([lhs], [rhs])


def _square_steps(lam, mu, kap, nu, params: ModelParams):
    sq = FaceSquare(np.asarray(lam, dtype=complex), mu, kap, nu, 0.0)
    steps = sq.steps(params)
    if steps is None:
        raise AdmissibilityError("square is not admissible")
    return steps


def initial_defect(lam, mu, kap, nu, params: ModelParams):
    top, left, right, _ = _square_steps(lam, mu, kap, nu, params)
    return initial_residual(lam, top, left, right, params).defect


def inversion_defect(lam, mu, kap, nu, u, params: ModelParams):
    P = unit_steps(np.shape(lam)[-1])
    top = decode_step(lam, mu, params, P)
    left = decode_step(lam, kap, params, P)
    total = decode_step(lam, nu, params, [add(a, b) for a in P for b in P])
    if None in (top, left, total):
        raise AdmissibilityError("boundary is not admissible")
    return inversion_residual(lam, top, left, total, u, params).defect


def identity_iii_defect(lam, p: Step, q: Step, u, params: ModelParams):
    return identity_iii_residual(lam, tuple(p), tuple(q), u, params).defect


def crossing_defect(square: FaceSquare, params: ModelParams):
    top, left, right, _ = _square_steps(square.lam, square.mu, square.kap, square.nu, params)
    return crossing_residual(square.lam, top, left, right, square.u, params).defect


def reflection_defect(square: FaceSquare, params: ModelParams):
    top, left, right, _ = _square_steps(square.lam, square.mu, square.kap, square.nu, params)
    return reflection_residual(square.lam, top, left, right, square.u, params).defect


# --- Yang-Baxter equation -------------------------------------------------

WeightFn = Callable[[tuple[int, int], Step, Step, Step, Step, object], np.ndarray]


class WeightCache:
    """Memoised type-(1,1) weights at vertices ``base + 2 hbar * offset``.

    Vertices are addressed by integer offsets from one base point so that
    repeated visits hit the cache exactly.  Instances are callable with the
    :data:`WeightFn` signature ``(types, offset, top, left, right, u)``.
    """

    def __init__(self, base, params: ModelParams):
        self.base = np.asarray(base, dtype=complex)
        self.params = params
        self.n = self.base.shape[-1]
        self._w11: dict = {}
        self._vertex: dict = {}

    @staticmethod
    def _ukey(u) -> tuple:
        a = np.asarray(u, dtype=complex)
        return (a.shape, a.tobytes())

    def vertex(self, offset: Step) -> np.ndarray:
        lam = self._vertex.get(offset)
        if lam is None:
            lam = shift(self.base, offset, self.params)
            self._vertex[offset] = lam
        return lam

    def w11(self, offset: Step, top: Step, left: Step, right: Step, u):
        key = (offset, top, left, right, self._ukey(u))
        val = self._w11.get(key)
        if val is None:
            val = face_weight(self.vertex(offset), top, left, right, u, self.params)
            self._w11[key] = val
        return val

    def __call__(self, types, offset, top, left, right, u):
        if tuple(types) != (1, 1):
            raise ValueError(f"{type(self).__name__} only provides type (1,1) weights")
        return self.w11(offset, top, left, right, u)


def admissible_hexagons(types: tuple[int, int, int], n: int) -> list[tuple[Step, ...]]:
    """Boundary steps ``(a, b, c, x, y, z)`` of every admissible hexagon.

    The hexagon is ``lam -a-> mu -b-> nu -c-> kap`` and
    ``lam -x-> rho -y-> sig -z-> kap`` with ``a, z`` of type ``d``,
    ``b, y`` of type ``d'`` and ``c, x`` of type ``d''``.
    """
    d, dp, dpp = types
    Pd, Pdp, Pdpp = (steps_of_type(k, n) for k in (d, dp, dpp))
    Pd_set = set(Pd)
    out = []
    for a, b, c, x, y in itertools.product(Pd, Pdp, Pdpp, Pdpp, Pdp):
        z = sub(add(a, b, c), add(x, y))
        if z in Pd_set:
            out.append((a, b, c, x, y, z))
    return out


def ybe_residual(
    weight: WeightFn,
    hexagon: tuple[Step, ...],
    types: tuple[int, int, int],
    u,
    v,
    w,
    n: int,
) -> Residual:
    """Both sides of the Yang-Baxter equation in face form for one hexagon."""
    d, dp, dpp = types
    a, b, c, x, y, z = hexagon
    Pd, Pdp, Pdpp = (set(steps_of_type(k, n)) for k in (d, dp, dpp))
    total = add(a, b, c)
    u, v, w = (np.asarray(s, dtype=complex) for s in (u, v, w))
    lhs = []
    for e in Pd:
        m1 = sub(add(x, e), a)  # mu -> eta
        m2 = sub(total, add(x, e))  # eta -> kap
        if m1 not in Pdpp or m2 not in Pdp:
            continue
        lhs.append(
            weight((d, dp), x, e, y, m2, u - v)
            * weight((d, dpp), zero_step(n), a, x, m1, u - w)
            * weight((dp, dpp), a, b, m1, c, v - w)
        )
    rhs = []
    for e in Pdp:
        m1 = sub(add(x, y), e)  # eta -> sig
        m2 = sub(add(a, b), e)  # eta -> nu
        if m1 not in Pdpp or m2 not in Pd:
            continue
        rhs.append(
            weight((dp, dpp), zero_step(n), e, x, m1, v - w)
            * weight((d, dpp), e, m2, m1, c, u - w)
            * weight((d, dp), zero_step(n), a, e, b, u - v)
        )
    zero = np.zeros(np.broadcast_shapes(np.shape(u), np.shape(v)), dtype=complex)
    return _residual(lhs or [zero], rhs or [zero])


def ybe11_defect(lam, mu, nu, kap, sig, rho, u, v, params: ModelParams, weight: WeightFn | None = None):
    """LHS minus RHS of the face Yang-Baxter equation with spectral
    differences ``u - v``, ``u`` and ``v`` (third parameter set to zero)."""
    P = unit_steps(np.shape(lam)[-1])
    n = len(P[0])
    path = [lam, mu, nu, kap]
    other = [lam, rho, sig, kap]
    steps = []
    for seq in (path, other):
        for s, t in zip(seq, seq[1:]):
            st = decode_step(s, t, params, P)
            if st is None:
                raise AdmissibilityError("hexagon boundary is not admissible")
            steps.append(st)
    hexagon = tuple(steps)
    cache = weight if weight is not None else WeightCache(lam, params)
    return ybe_residual(cache, hexagon, (1, 1, 1), u, v, 0.0, n).defect
