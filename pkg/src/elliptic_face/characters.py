"""Heisenberg shift operators and the Weyl-invariant level-one theta functions.

Coordinates are those of :mod:`weights`: ``(x, y) = sum_j x_j y_j / 2``.  The
coroot lattice is ``2Z x 2Z`` and the coweight lattice adds ``(1, 1)``.  The
invariant theta space is spanned by lattice sums over the four cosets of the
coroot lattice in ``Z^2``, symmetrised over the Weyl group.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, PoleError
from .operators import C_pq, DifferenceOperator, apply, build_Md, build_Mtilde
from .theta import ModelParams, theta
from .weights import Residual, Step, act, add, pairing, shift, weyl_group

__all__ = [
    "ShiftOperator",
    "apply_shift",
    "heisenberg_defect",
    "ThetaCharacter",
    "InvariantTheta",
    "thw_basis",
    "weyl_group",
    "is_coroot",
    "is_coweight",
    "sample_points",
    "span_residual",
    "theorem2_membership_residual",
    "perturbed_operator",
    "lemma_SM_residual",
    "lemma_SM_defect",
    "pole_cancellation_check",
    "cpq_periodicity_defect",
    "weyl_invariance_defect",
]

CONVERGENCE_TOL = 1e-12


def is_coroot(beta) -> bool:
    b = np.asarray(beta)
    return bool(np.all(b == np.round(b)) and np.all(np.round(b).astype(int) % 2 == 0))


def is_coweight(beta) -> bool:
    b = np.asarray(beta)
    if not np.all(b == np.round(b)):
        return False
    r = np.round(b).astype(int) % 2
    return bool(np.all(r == r[0]))


@dataclass(frozen=True)
class ShiftOperator:
    """``S_beta`` (``kind="plain"``) or ``S_{tau beta}`` (``kind="tau"``)."""

    kind: str
    beta: tuple

    def __post_init__(self) -> None:
        if self.kind not in ("plain", "tau"):
            raise ValueError(f"kind must be 'plain' or 'tau', got {self.kind!r}")

    def __call__(self, f: Callable, params: ModelParams) -> Callable:
        return lambda lam: apply_shift(self, f, lam, params)


def apply_shift(op: ShiftOperator, f: Callable, lam, params: ModelParams):
    lam = np.asarray(lam, dtype=complex)
    beta = np.asarray(op.beta, dtype=float)
    if op.kind == "plain":
        return f(lam + beta)
    phase = np.exp(2j * np.pi * (pairing(lam, beta) + params.tau * pairing(beta, beta) / 2))
    return phase * f(lam + params.tau * beta)


def heisenberg_defect(gamma, beta, f: Callable, lam, params: ModelParams) -> Residual:
    """``S_gamma S_{tau beta} f - e^{2 pi i (gamma, beta)} S_{tau beta} S_gamma f`` with its scale."""
    sg = ShiftOperator("plain", tuple(gamma))
    st = ShiftOperator("tau", tuple(beta))
    lhs = sg(st(f, params), params)(lam)
    rhs = np.exp(2j * np.pi * pairing(np.asarray(gamma, float), np.asarray(beta, float))) * st(sg(f, params), params)(lam)
    return Residual(lhs - rhs, np.maximum(np.abs(lhs), np.abs(rhs)))


# -- theta functions ------------------------------------------------------------


def _one_dim_sum(a: int, x, tau: complex, cutoff: int):
    """``sum_{k in a + 2Z, |k| <= cutoff + 2} exp(pi i tau k^2 / 2 + pi i k x)`` and the
    same sum without its outermost terms."""
    ks = np.arange(-cutoff - 3, cutoff + 4)
    ks = ks[(ks - a) % 2 == 0]
    ks = ks[np.abs(ks) <= cutoff + 2]
    x = np.asarray(x, dtype=complex)[..., None]
    terms = np.exp(1j * np.pi * tau * ks**2 / 2 + 1j * np.pi * ks * x)
    inner = np.abs(ks) <= cutoff
    return terms.sum(axis=-1), terms[..., inner].sum(axis=-1)


@dataclass(frozen=True)
class ThetaCharacter:
    """``Theta_mu(lam) = sum_{gamma in mu + Q} exp(pi i tau (gamma,gamma) + 2 pi i (gamma,lam))``."""

    mu: tuple
    params: ModelParams
    cutoff: int = 6

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=complex)
        full = np.ones(lam.shape[:-1], dtype=complex)
        trunc = np.ones(lam.shape[:-1], dtype=complex)
        for j, a in enumerate(self.mu):
            f, t = _one_dim_sum(int(a) % 2, lam[..., j], self.params.tau, self.cutoff)
            full, trunc = full * f, trunc * t
        change = np.abs(full - trunc) / np.maximum(1.0, np.abs(full))
        if np.any(change > CONVERGENCE_TOL):
            raise ConvergenceError(
                f"lattice sum not converged at cutoff {self.cutoff} (change {np.max(change):.3g})"
            )
        return trunc


@dataclass(frozen=True)
class InvariantTheta:
    """Sum of characters over a Weyl orbit of characteristics."""

    characters: tuple
    name: str

    def __call__(self, lam):
        total = 0.0
        for c in self.characters:
            total = total + c(lam)
        return total


def thw_basis(params: ModelParams, cutoff_R: int = 6) -> list[InvariantTheta]:
    """``[Theta_0, Theta_e1 + Theta_e2, Theta_{e1+e2}]``."""
    ch = lambda mu: ThetaCharacter(mu, params, cutoff_R)  # noqa: E731
    return [
        InvariantTheta((ch((0, 0)),), "theta_0"),
        InvariantTheta((ch((1, 0)), ch((0, 1))), "theta_e1+theta_e2"),
        InvariantTheta((ch((1, 1)),), "theta_e1+e2"),
    ]


# -- sampling away from the singular lines ---------------------------------------

_ROOTS = [(2, 0), (0, 2), (1, 1), (1, -1)]
_SHORT = [(1, 1), (1, -1), (-1, 1), (-1, -1)]


def _divisor_distance(lam, params: ModelParams):
    """Smallest ``|[.]|`` over the linear forms whose zeros are the singular lines."""
    lam = np.asarray(lam, dtype=complex)
    h = params.hbar
    vals = [np.abs(theta(pairing(lam, a), params)) for a in _ROOTS]
    vals += [np.abs(theta(pairing(lam, q) + h, params)) for q in _SHORT]
    return np.min(np.stack(vals), axis=0)


def sample_points(count: int, params: ModelParams, seed: int = 0, margin: float = 0.05) -> np.ndarray:
    """Generic points with every singular-line theta value above ``margin``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        lam = rng.uniform(0, 2, size=2) + 1j * rng.uniform(-0.4, 0.4, size=2)
        if _divisor_distance(lam, params) > margin:
            out.append(lam)
    return np.array(out)


def _check_generic(lam, params: ModelParams, tol: float = 1e-8) -> None:
    if np.any(_divisor_distance(lam, params) < tol):
        raise PoleError("sample point lies on a singular line of the operator coefficients")


def span_residual(values: np.ndarray, basis_values: np.ndarray) -> float:
    """Relative least-squares residual of ``values`` against columns of ``basis_values``."""
    coeffs, *_ = np.linalg.lstsq(basis_values, values, rcond=None)
    return float(np.linalg.norm(basis_values @ coeffs - values) / np.linalg.norm(values))


def theorem2_membership_residual(d: int, params: ModelParams, n_points: int = 16, seed: int = 0,
                                 operator: DifferenceOperator | None = None, cutoff_R: int = 6) -> float:
    """Largest span residual of ``M~_d Theta_i`` over the three basis functions."""
    if n_points < 12:
        raise ValueError("at least 12 sample points are required")
    op = operator if operator is not None else build_Mtilde(d, params)
    basis = thw_basis(params, cutoff_R)
    lam = sample_points(n_points, params, seed)
    _check_generic(lam, params)
    B = np.stack([f(lam) for f in basis], axis=-1)
    return max(span_residual(apply(op, f, lam), B) for f in basis)


def perturbed_operator(op: DifferenceOperator, t: Step, factor: complex = 1.5) -> DifferenceOperator:
    """``op`` with the coefficient of shift ``t`` scaled, which breaks Weyl covariance."""
    terms = dict(op.terms)
    g = terms[tuple(t)]
    terms[tuple(t)] = lambda lam: factor * g(lam)
    return DifferenceOperator(terms, op.params)


def lemma_SM_residual(beta, d: int, u, f: Callable, lam, params: ModelParams, kind: str = "tau") -> Residual:
    """``(S M_d(u) f - M_d(u) S f)(lam)`` for ``S = S_beta`` or ``S_{tau beta}``."""
    s = ShiftOperator(kind, tuple(beta))
    m = build_Md(u, d, params)
    lhs = s(lambda x: apply(m, f, x), params)(lam)
    rhs = apply(m, s(f, params), lam)
    return Residual(lhs - rhs, np.maximum(np.abs(lhs), np.abs(rhs)))


def lemma_SM_defect(beta, d: int, u, f: Callable, lam, params: ModelParams, kind: str = "tau"):
    return lemma_SM_residual(beta, d, u, f, lam, params, kind).defect


def pole_cancellation_check(p: Step, q: Step, f: Callable, params: ModelParams, seed: int = 0,
                            distances=(1e-2, 1e-3, 1e-4)) -> float:
    """Growth exponent of the ``p+q`` part of ``M~_2 f`` approaching ``(lam, p+q) = -hbar``.

    Returns the slope of ``log |value|`` against ``log distance``: about 0 when
    the residue cancels, about -1 when a simple pole survives.
    """
    h = params.hbar
    r = add(p, q)
    base = sample_points(1, params, seed)[0]
    lam0 = base - (pairing(base, r) + h) * np.asarray(r, dtype=float)
    direction = np.exp(0.7j) * np.asarray(r, dtype=float)
    dist = np.asarray(distances, dtype=float)
    lam = lam0 + dist[:, None] * direction
    x = pairing(lam, r)
    value = theta(x - h, params) / theta(x + h, params) * f(shift(lam, r, params)) + C_pq(lam, p, q, params) * f(lam)
    slope = np.polyfit(np.log(dist), np.log(np.abs(value)), 1)[0]
    return float(slope)


def cpq_periodicity_defect(lam, p: Step, q: Step, beta, params: ModelParams):
    """Largest relative change of ``C_{p,q}`` under ``lam -> lam + beta`` and ``lam + tau beta``."""
    base = C_pq(lam, p, q, params)
    b = np.asarray(beta, dtype=float)
    out = 0.0
    for moved in (np.asarray(lam) + b, np.asarray(lam) + params.tau * b):
        out = np.maximum(out, np.abs(C_pq(moved, p, q, params) - base) / (1 + np.abs(base)))
    return out


def weyl_invariance_defect(f: Callable, lam):
    lam = np.asarray(lam, dtype=complex)
    ref = f(lam)
    return max(float(np.max(np.abs(f(act(w, lam)) - ref))) for w in weyl_group(lam.shape[-1]))
