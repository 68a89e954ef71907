"""Jacobi theta function ``[u]`` and the identities it satisfies.

The normalisation is

    [u] = i p^(1/8) sin(pi u) prod_{m>=1} (1 - 2 p^m cos(2 pi u) + p^(2m)) (1 - p^m)

with nome ``p = exp(2 pi i tau)``.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ConfigError, PoleError

POLE_TOL = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """Elliptic modulus, step and rank of the face model.

    ``p8_branch`` selects the eighth root used for ``p^(1/8)``:
    ``exp(2 pi i (tau + k) / 8)``.  Every weight is a ratio with as many
    theta factors up as down, so the choice only rescales ``[u]``.
    """

    tau: complex = 1j
    hbar: complex = 0.123 + 0.0456j
    rank_n: int = 2
    truncation_M: int = 24
    p8_branch: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "hbar", complex(self.hbar))
        if not self.tau.imag > 0:
            raise ConfigError(f"Im(tau) must be positive, got tau={self.tau}")
        if self.hbar == 0 or not cmath.isfinite(self.hbar):
            raise ConfigError(f"hbar must be finite and nonzero, got {self.hbar}")
        if int(self.rank_n) != self.rank_n or self.rank_n < 2:
            raise ConfigError(f"rank_n must be an integer >= 2, got {self.rank_n}")
        if int(self.truncation_M) != self.truncation_M or self.truncation_M < 1:
            raise ConfigError(f"truncation_M must be an integer >= 1, got {self.truncation_M}")

    @property
    def nome_p(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @property
    def crossing_c(self) -> complex:
        return -(self.rank_n + 1) * self.hbar

    @cached_property
    def _p_powers(self) -> np.ndarray:
        return self.nome_p ** np.arange(1, self.truncation_M + 1)

    @cached_property
    def _prefactor(self) -> complex:
        return 1j * cmath.exp(2j * math.pi * (self.tau + self.p8_branch) / 8)

    def tail_bound(self) -> float:
        """Bound on the relative size of the dropped product factors."""
        a = abs(self.nome_p)
        return a ** (self.truncation_M + 1) / (1 - a)

    def replace(self, **changes) -> "ModelParams":
        fields = dict(
            tau=self.tau,
            hbar=self.hbar,
            rank_n=self.rank_n,
            truncation_M=self.truncation_M,
            p8_branch=self.p8_branch,
        )
        fields.update(changes)
        return ModelParams(**fields)


def theta(u, params: ModelParams):
    """Evaluate ``[u]``; scalars in, scalar out."""
    u = np.asarray(u, dtype=complex)
    c = np.cos(2 * np.pi * u)
    prod = np.ones_like(u)
    for pm in params._p_powers:
        prod = prod * ((1 - 2 * pm * c + pm * pm) * (1 - pm))
    out = params._prefactor * np.sin(np.pi * u) * prod
    return out[()] if out.ndim == 0 else out


def theta_prime0(params: ModelParams) -> complex:
    """``[0]'``, the derivative of ``[u]`` at the origin."""
    pm = params._p_powers
    return complex(params._prefactor * np.pi * np.prod((1 - pm) ** 3))


def checked_theta(u, params: ModelParams):
    """``[u]`` for use in a denominator; raises :class:`PoleError` near a zero."""
    val = theta(u, params)
    if np.any(np.abs(val) < POLE_TOL * (1 + np.abs(u))):
        raise PoleError(f"theta vanishes at u={u!r}")
    return val


def phi(u, params: ModelParams):
    """Logarithmic derivative ``d/du log [u]`` from the termwise derivative."""
    u = np.asarray(u, dtype=complex)
    checked_theta(u, params)
    s = np.sin(2 * np.pi * u)
    c = np.cos(2 * np.pi * u)
    out = np.pi * np.cos(np.pi * u) / np.sin(np.pi * u)
    for pm in params._p_powers:
        out = out + 4 * np.pi * pm * s / (1 - 2 * pm * c + pm * pm)
    return out[()] if out.ndim == 0 else out


def quasi_periodicity_defect(u, m: int, params: ModelParams):
    """Residuals of ``[u+m] = (-1)^m [u]`` and the ``tau`` shift rule."""
    u = np.asarray(u, dtype=complex)
    sign = -1.0 if m % 2 else 1.0
    tu = theta(u, params)
    real_shift = theta(u + m, params) - sign * tu
    factor = np.exp(-1j * np.pi * m * m * params.tau - 2j * np.pi * m * u)
    tau_shift = theta(u + m * params.tau, params) - sign * factor * tu
    return real_shift, tau_shift


def three_term_terms(u, v, x, y, params: ModelParams):
    """The three products entering the three-term identity."""
    t = lambda z: theta(z, params)  # noqa: E731
    a = t(u + x) * t(u - x) * t(v + y) * t(v - y)
    b = t(u + y) * t(u - y) * t(v + x) * t(v - x)
    c = t(x + y) * t(x - y) * t(u + v) * t(u - v)
    return a, b, c


def three_term_defect(u, v, x, y, params: ModelParams):
    a, b, c = three_term_terms(u, v, x, y, params)
    return a - b - c


def phi_lemma_terms(u, h, params: ModelParams):
    """Both sides of phi(u+h) + phi(u-h) - 2 phi(u) = [h]^2 [2u] [0]' / ([u]^2 [u-h] [u+h])."""
    lhs = phi(u + h, params) + phi(u - h, params) - 2 * phi(u, params)
    t = lambda z: theta(z, params)  # noqa: E731
    rhs = t(h) ** 2 * t(2 * u) * theta_prime0(params) / (t(u) ** 2 * t(u - h) * t(u + h))
    return lhs, rhs


def phi_lemma_defect(u, params: ModelParams, h=None):
    lhs, rhs = phi_lemma_terms(u, params.hbar if h is None else h, params)
    return lhs - rhs
