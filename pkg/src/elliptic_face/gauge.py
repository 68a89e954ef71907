"""Similarity transformation to the symmetric (square-root) form of the weights.

The symmetric weights differ from :func:`weights.face_weight` on two patterns,
where they carry square roots of theta ratios.  Both forms are related by
corner factors ``s(lam, mu)``; every square root is the principal branch of
a single theta value, so the relation holds up to a sign ``sigma`` that is
tracked explicitly.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import AdmissibilityError, BranchWarning
from .theta import ModelParams, checked_theta, theta
from .weights import (
    FaceSquare,
    Step,
    WeightCache,
    add,
    admissible_hexagons,
    face_weight,
    g_factor,
    neg,
    pairing,
    shift,
    sub,
    unit_steps,
    ybe_residual,
)

BRANCH_MARGIN = 1e-6


def _principal_sqrt(z):
    z = np.asarray(z, dtype=complex)
    near_cut = (z.real < 0) & (np.abs(z.imag) <= BRANCH_MARGIN * np.abs(z))
    if np.any(near_cut):
        warnings.warn("square-root argument lies on the negative real axis", BranchWarning, stacklevel=3)
    return np.sqrt(z)


def s_factor(lam, q: Step, params: ModelParams):
    """``s(lam, lam + 2 hbar q) = prod_{p before q} [lam_{p-q}]^{-1/2} [mu_{p-q}]^{-1/2}``.

    The order on steps is that of :func:`weights.unit_steps`.
    """
    lam = np.asarray(lam, dtype=complex)
    P = unit_steps(lam.shape[-1])
    if tuple(q) not in P:
        raise AdmissibilityError(f"{q} is not a vector weight")
    mu = shift(lam, q, params)
    out = np.ones(lam.shape[:-1], dtype=complex)
    for p in P[: P.index(tuple(q))]:
        r = sub(p, q)
        out = out / (
            _principal_sqrt(checked_theta(pairing(lam, r), params))
            * _principal_sqrt(checked_theta(pairing(mu, r), params))
        )
    return out


def gauge_ratio(lam, top: Step, left: Step, right: Step, params: ModelParams):
    """``s(lam,kap) s(kap,nu) / (s(lam,mu) s(mu,nu))`` for the square with these steps."""
    lam = np.asarray(lam, dtype=complex)
    bottom = sub(add(top, right), left)
    mu, kap = shift(lam, top, params), shift(lam, left, params)
    return s_factor(lam, left, params) * s_factor(kap, bottom, params) / (
        s_factor(lam, top, params) * s_factor(mu, right, params)
    )


def jmo_weight_from_gauge(square: FaceSquare, params: ModelParams):
    steps = square.steps(params)
    if steps is None or tuple(square.type_dd) != (1, 1):
        raise AdmissibilityError("gauge transformation needs an admissible type-(1,1) square")
    top, left, right, _ = steps
    return gauge_weight(square.lam, top, left, right, square.u, params)


def gauge_weight(lam, top: Step, left: Step, right: Step, u, params: ModelParams):
    """Symmetric weight obtained from :func:`face_weight` by the corner factors."""
    return face_weight(lam, top, left, right, u, params) * gauge_ratio(lam, top, left, right, params)


def jmo_pattern(top: Step, left: Step, right: Step) -> str | None:
    """``"oc"`` or ``"od"`` for the two patterns with square roots, else None."""
    if top != left and right == left and left != neg(top):
        return "oc"
    if top != left and right == neg(top):
        return "od"
    return None


def jmo_weight_direct(lam, top: Step, left: Step, right: Step, u, params: ModelParams):
    """Symmetric weights evaluated from their own formulas with principal square roots."""
    lam = np.asarray(lam, dtype=complex)
    u = np.asarray(u, dtype=complex)
    pattern = jmo_pattern(top, left, right)
    if pattern is None:
        return face_weight(lam, top, left, right, u, params)
    t = lambda z: theta(z, params)  # noqa: E731
    d = lambda z: checked_theta(z, params)  # noqa: E731
    h, c = params.hbar, params.crossing_c
    q, p = top, left
    if pattern == "oc":
        x = pairing(lam, sub(p, q))
        root = _principal_sqrt(t(x + h) * t(x - h) / d(x) ** 2)
        return t(c - u) * t(u) / (d(c) * d(h)) * root
    x = pairing(lam, add(p, q)) + h
    root = _principal_sqrt(g_factor(lam, p, params) * g_factor(lam, q, params))
    return t(u) * t(x + c - u) / (d(c) * d(x)) * root


def _sqrt_arguments(lam, top: Step, left: Step, right: Step, params: ModelParams) -> np.ndarray:
    """Every value whose principal square root enters ``sigma`` for this square."""
    lam = np.asarray(lam, dtype=complex)
    P = unit_steps(lam.shape[-1])
    bottom = sub(add(top, right), left)
    mu, kap = shift(lam, top, params), shift(lam, left, params)
    args = []
    for corner, q in ((lam, left), (kap, bottom), (lam, top), (mu, right)):
        nxt = shift(corner, q, params)
        for p in P[: P.index(q)]:
            r = sub(p, q)
            args += [theta(pairing(corner, r), params), theta(pairing(nxt, r), params)]
    pattern = jmo_pattern(top, left, right)
    q, p = top, left
    if pattern == "oc":
        x = pairing(lam, sub(p, q))
        h = params.hbar
        args.append(theta(x + h, params) * theta(x - h, params) / theta(x, params) ** 2)
    elif pattern == "od":
        args.append(g_factor(lam, p, params) * g_factor(lam, q, params))
    return np.stack(np.broadcast_arrays(*args))


class GaugedWeights(WeightCache):
    """Type-(1,1) weights after the similarity transformation, memoised."""

    def w11(self, offset: Step, top: Step, left: Step, right: Step, u):
        key = (offset, top, left, right, self._ukey(u))
        val = self._w11.get(key)
        if val is None:
            lam = self.vertex(offset)
            P = unit_steps(self.n)
            bottom = sub(add(top, right), left)
            if any(s not in P for s in (top, left, right, bottom)):
                val = face_weight(lam, top, left, right, u, self.params)
            else:
                val = gauge_weight(lam, top, left, right, u, self.params)
            self._w11[key] = val
        return val


def gauged_ybe_residuals(lam, u, v, params: ModelParams) -> np.ndarray:
    """Relative Yang-Baxter defects of the gauged weights on every admissible hexagon."""
    lam = np.asarray(lam, dtype=complex)
    n = lam.shape[-1]
    cache = GaugedWeights(lam, params)
    return np.array([
        np.max(ybe_residual(cache, hexagon, (1, 1, 1), u, v, 0.0, n).relative)
        for hexagon in admissible_hexagons((1, 1, 1), n)
    ])


# -- sign bookkeeping -----------------------------------------------------------------


@dataclass
class SignTable:
    """``sigma = gauged / direct`` on the two square-root patterns over a sweep."""

    rows: list = field(default_factory=list)  # (pattern, steps, sigma array)
    max_sigma_sq_defect: float = 0.0
    max_modulus_defect: float = 0.0
    fiducial_sigmas: dict = field(default_factory=dict)
    path_flips: int = 0
    unexplained_flips: int = 0
    branch_warnings: int = 0

    def sign_counts(self) -> dict:
        out: dict = {}
        for pattern, _, sigma in self.rows:
            plus = int(np.sum(np.real(sigma) > 0))
            prev = out.get(pattern, (0, 0))
            out[pattern] = (prev[0] + plus, prev[1] + np.size(sigma) - plus)
        return out


def sign_square_patterns(n: int = 2):
    P = unit_steps(n)
    out = []
    for top in P:
        for left in P:
            for right in P:
                if jmo_pattern(top, left, right) and sub(add(top, right), left) in P:
                    out.append((top, left, right))
    return out


def jmo_sign_table(sweep: int, params: ModelParams, seed: int = 0, fiducial=None, path_steps: int = 64) -> SignTable:
    """Tabulate ``sigma`` over ``sweep`` random ``(lam, u)`` and along a straight path.

    ``fiducial`` is a real point on the real-``lam`` slice whose sign is
    reported separately; the path from it to a generic point counts sign flips
    of every pattern.
    """
    rng = np.random.default_rng(seed)
    n = params.rank_n
    lam = (rng.normal(size=(sweep, n)) + 1j * rng.normal(size=(sweep, n))) * 0.3
    u = rng.normal(size=sweep) * 0.3 + 1j * rng.normal(size=sweep) * 0.2
    table = SignTable()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", BranchWarning)
        for steps in sign_square_patterns(n):
            if sweep == 0:
                break
            gauged = gauge_weight(lam, *steps, u, params)
            direct = jmo_weight_direct(lam, *steps, u, params)
            sigma = gauged / direct
            table.rows.append((jmo_pattern(*steps), steps, sigma))
            table.max_sigma_sq_defect = max(table.max_sigma_sq_defect, float(np.max(np.abs(sigma**2 - 1))))
            mod = np.abs(np.abs(gauged) - np.abs(direct)) / np.maximum(1.0, np.abs(direct))
            table.max_modulus_defect = max(table.max_modulus_defect, float(np.max(mod)))
        fid = np.asarray(fiducial if fiducial is not None else [0.31, 0.17, 0.11][:n], dtype=complex)
        u0 = 0.2 + 0.0j
        for steps in sign_square_patterns(n):
            table.fiducial_sigmas[steps] = complex(
                gauge_weight(fid, *steps, u0, params) / jmo_weight_direct(fid, *steps, u0, params)
            )
        start, end = fid + 0.05j, fid + 0.3 + 0.25j
        s = np.linspace(0, 1, path_steps)[:, None]
        path = start + s * (end - start)
        for steps in sign_square_patterns(n):
            sig = gauge_weight(path, *steps, u0, params) / jmo_weight_direct(path, *steps, u0, params)
            sgn = np.sign(np.real(sig))
            flips = sgn[1:] != sgn[:-1]
            args = _sqrt_arguments(path, *steps, params)
            crossed = np.any((args.real[:, 1:] < 0) & (np.sign(args.imag[:, 1:]) != np.sign(args.imag[:, :-1])), axis=0)
            table.path_flips += int(np.sum(flips))
            table.unexplained_flips += int(np.sum(flips & ~crossed))
    table.branch_warnings = sum(1 for w in caught if issubclass(w.category, BranchWarning))
    return table
