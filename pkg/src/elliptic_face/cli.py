"""Command-line verification harness.

``elliptic-face run --suite NAME`` executes the invariant sweeps of one module
(or ``all``) and writes a line-delimited ``key=value`` report: one record per
check, sorted by suite and case id, then a summary block.  The exit status is
nonzero iff some check fails.  ``elliptic-face tables`` dumps the weights and
operator coefficients at a single point, and ``elliptic-face defaults`` prints
the embedded configuration in the config-file format.
"""

from __future__ import annotations

import argparse
import hashlib
import os
import sys
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable

import numpy as np

from .errors import BranchWarning, ConfigError, ConvergenceError, EllipticFaceError, PoleError, ProjectionError
from .theta import ModelParams, phi_lemma_terms, quasi_periodicity_defect, theta, three_term_terms

SUITES = ("theta", "weights", "ybe", "fusion", "fused_ybe", "operators", "characters", "gauge")

DEFAULT_SWEEP = {
    "theta": 1000,
    "weights": 100,
    "ybe": 200,
    "fusion": 20,
    "fused_ybe": 2,
    "operators": 10,
    "characters": 16,
    "gauge": 100,
}

DEFAULT_TOL = {
    "theta": 1e-11,
    "weights": 1e-10,
    "ybe": 1e-9,
    "fusion": 1e-9,
    "fused_ybe": 1e-8,
    "operators": 1e-9,
    "characters": 1e-8,
    "gauge": 1e-9,
}

THREADS_ENV = "ELLIPTIC_FACE_THREADS"


# -- configuration ----------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """Accept ``a+bi``, ``a+bj`` or ``re,im``."""
    s = str(text).strip().replace(" ", "")
    try:
        if "," in s:
            re_, im_ = s.split(",")
            return complex(float(re_), float(im_))
        return complex(s.replace("i", "j"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse complex value {text!r}") from exc


def format_complex(z: complex) -> str:
    z = complex(z)
    return f"{z.real:.17g}{z.imag:+.17g}i"


@dataclass(frozen=True)
class SuiteConfig:
    tau: complex = 1j
    hbar: complex = 0.123 + 0.0456j
    rank: int = 2
    truncation: int = 24
    seed: int = 0
    sweep: dict = field(default_factory=lambda: dict(DEFAULT_SWEEP))
    tol: dict = field(default_factory=lambda: dict(DEFAULT_TOL))
    out: str = "-"

    def __post_init__(self) -> None:
        for name, table in (("sweep", self.sweep), ("tol", self.tol)):
            unknown = set(table) - set(SUITES)
            if unknown:
                raise ConfigError(f"unknown suite in {name}: {sorted(unknown)}")
        if any(int(v) != v or v < 0 for v in self.sweep.values()):
            raise ConfigError("sweep sizes must be non-negative integers")
        if any(not v > 0 for v in self.tol.values()):
            raise ConfigError("tolerances must be positive")
        if int(self.seed) != self.seed:
            raise ConfigError(f"seed must be an integer, got {self.seed}")
        self.params  # validates the model fields

    @property
    def params(self) -> ModelParams:
        return ModelParams(tau=self.tau, hbar=self.hbar, rank_n=self.rank, truncation_M=self.truncation)

    def to_text(self) -> str:
        lines = [
            f"tau={format_complex(self.tau)}",
            f"hbar={format_complex(self.hbar)}",
            f"rank={self.rank}",
            f"truncation={self.truncation}",
            f"seed={self.seed}",
            f"out={self.out}",
        ]
        lines += [f"sweep.{k}={self.sweep[k]}" for k in SUITES if k in self.sweep]
        lines += [f"tol.{k}={self.tol[k]!r}" for k in SUITES if k in self.tol]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str, base: "SuiteConfig | None" = None) -> "SuiteConfig":
        cfg = base if base is not None else cls()
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected key=value, got {raw!r}")
            key, value = (s.strip() for s in line.split("=", 1))
            cfg = cfg.with_field(key, value)
        return cfg

    def with_field(self, key: str, value: str) -> "SuiteConfig":
        try:
            if key in ("tau", "hbar"):
                return replace(self, **{key: parse_complex(value)})
            if key in ("rank", "truncation", "seed"):
                return replace(self, **{key: int(value)})
            if key == "out":
                return replace(self, out=value)
            if key == "sweep":
                return replace(self, sweep=_suite_map(value, int, self.sweep))
            if key == "tol":
                return replace(self, tol=_suite_map(value, float, self.tol))
            if key.startswith(("sweep.", "tol.")):
                kind, suite = key.split(".", 1)
                table = dict(getattr(self, kind))
                table[suite] = (int if kind == "sweep" else float)(value)
                return replace(self, **{kind: table})
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
        raise ConfigError(f"unknown config key {key!r}")


def _suite_map(text: str, conv: Callable, current: dict) -> dict:
    """``N`` sets every suite; ``name=N,name=N`` sets the named ones."""
    out = dict(current)
    if "=" not in text:
        return {k: conv(text) for k in SUITES}
    for item in text.split(","):
        name, value = (s.strip() for s in item.split("=", 1))
        out[name] = conv(value)
    return out


# -- records and reports ------------------------------------------------------------


@dataclass(frozen=True)
class Record:
    suite: str
    case: str
    digest: str
    defect: float
    tol: float
    expect: str  # "below": pass iff defect <= tol; "above": pass iff defect > tol
    passed: bool
    reason: str

    def line(self) -> str:
        status = "pass" if self.passed else "fail"
        return (
            f"suite={self.suite} case={self.case} digest={self.digest} defect={self.defect:.3e} "
            f"tol={self.tol:.1e} expect={self.expect} status={status} reason={self.reason}"
        )


@dataclass
class SuiteReport:
    suites: tuple
    records: list
    wall_time: float = 0.0

    @property
    def failed(self) -> int:
        return sum(not r.passed for r in self.records)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def body(self) -> str:
        """Records and summary; independent of timing and execution order."""
        recs = sorted(self.records, key=lambda r: (r.suite, r.case))
        lines = [r.line() for r in recs]
        lines.append("[summary]")
        lines.append("suites=" + ",".join(self.suites))
        for name in self.suites:
            mine = [r for r in recs if r.suite == name]
            bad = sum(not r.passed for r in mine)
            lines.append(f"suite={name} checks={len(mine)} failed={bad} status={'pass' if bad == 0 else 'fail'}")
        lines.append(f"scope=total checks={len(recs)} failed={self.failed} status={'pass' if self.ok else 'fail'}")
        return "\n".join(lines) + "\n"

    def render(self) -> str:
        return self.body() + f"wall_time_s={self.wall_time:.2f}\n"


def _digest(*arrays) -> str:
    h = hashlib.sha256()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=complex)).tobytes())
    return h.hexdigest()[:12]


def _fmt(step) -> str:
    return "(" + ",".join(str(c) for c in step) + ")"


class _Collector:
    """Runs one check at a time, turning library errors into failed records."""

    def __init__(self, suite: str, config: SuiteConfig) -> None:
        self.suite = suite
        self.tol = config.tol.get(suite, DEFAULT_TOL[suite])
        self.records: list[Record] = []

    def check(self, case: str, inputs: Iterable, fn: Callable, tol: float | None = None, expect: str = "below") -> None:
        tol = self.tol if tol is None else tol
        digest = _digest(*inputs)
        reason = "-"
        try:
            value = float(np.max(np.abs(fn())))
        except PoleError:
            value, reason = float("nan"), "pole"
        except ProjectionError:
            value, reason = float("nan"), "projection"
        except ConvergenceError:
            value, reason = float("nan"), "convergence"
        if reason == "-" and not np.isfinite(value):
            reason = "nonfinite"
        if reason == "-":
            passed = value <= tol if expect == "below" else value > tol
            if not passed:
                reason = "exceeds_tol" if expect == "below" else "control_not_detected"
        else:
            passed = False
        self.records.append(Record(self.suite, case, digest, value, tol, expect, bool(passed), reason))


def _points(rng: np.random.Generator, count: int, n: int, scale: float = 0.3) -> np.ndarray:
    return (rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))) * scale


def _spectral(rng: np.random.Generator, count: int) -> np.ndarray:
    return rng.normal(size=count) * 0.3 + 1j * rng.normal(size=count) * 0.2


def _relative(defect, *terms):
    scale = 0.0
    for t in terms:
        scale = np.maximum(scale, np.abs(t))
    return np.abs(defect) / (1 + scale)


# -- suites ------------------------------------------------------------------------


def _suite_theta(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    def z(k):
        return rng.uniform(-1, 1, size=k) + 1j * rng.uniform(-0.5, 0.5, size=k)

    u, v, x, y = z(count), z(count), z(count), z(count)
    t = lambda w: theta(w, params)  # noqa: E731
    col.check("oddness", [u], lambda: _relative(t(u) + t(-u), t(u)))
    for m in (1, -1, 2, -3):
        def quasi(m=m):
            real_shift, tau_shift = quasi_periodicity_defect(u, m, params)
            scale = np.abs(t(u)) * np.abs(np.exp(-1j * np.pi * m * m * params.tau - 2j * np.pi * m * u))
            return np.maximum(_relative(real_shift, t(u)), np.abs(tau_shift) / (1 + scale))
        col.check(f"quasi_periodicity:m={m}", [u], quasi)

    def three():
        a, b, c = three_term_terms(u, v, x, y, params)
        return _relative(a - b - c, a, b, c)

    col.check("three_term", [u, v, x, y], three)

    def lemma():
        lhs, rhs = phi_lemma_terms(u, params.hbar, params)
        return _relative(lhs - rhs, lhs, rhs)

    col.check("phi_second_difference", [u], lemma)


def _suite_weights(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .weights import (
        add,
        admissible_squares,
        crossing_residual,
        identity_iii_residual,
        initial_residual,
        inversion_residual,
        pattern_label,
        reflection_residual,
        sub,
        unit_steps,
    )

    n = params.rank_n
    lam, u = _points(rng, count, n), _spectral(rng, count)
    P = unit_steps(n)
    for top, left, right in admissible_squares(n):
        tag = f"{pattern_label(top, left, right)}:{_fmt(top)}{_fmt(left)}{_fmt(right)}"
        col.check(f"initial:{tag}", [lam], lambda: initial_residual(lam, top, left, right, params).relative)
        col.check(f"crossing:{tag}", [lam, u], lambda: crossing_residual(lam, top, left, right, u, params).relative)
        col.check(f"reflection:{tag}", [lam, u], lambda: reflection_residual(lam, top, left, right, u, params).relative)
    for top in P:
        for left in P:
            for total in sorted({add(top, x) for x in P}):
                if sub(total, left) not in P:
                    continue
                col.check(
                    f"inversion:{_fmt(top)}{_fmt(left)}{_fmt(total)}", [lam, u],
                    lambda top=top, left=left, total=total: inversion_residual(lam, top, left, total, u, params).relative,
                )
    for p in P:
        for q in P:
            col.check(f"identity_iii:{_fmt(p)}{_fmt(q)}", [lam, u],
                      lambda p=p, q=q: identity_iii_residual(lam, p, q, u, params).relative)


def _ybe_sweep(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int, label: str,
               by_path: bool) -> None:
    """One record per upper boundary path (or per total shift when ``by_path`` is off)."""
    from .weights import WeightCache, add, admissible_hexagons, ybe_residual

    n = params.rank_n
    lam, u, v = _points(rng, count, n), _spectral(rng, count), _spectral(rng, count)
    cache = WeightCache(lam, params)
    groups: dict = {}
    for hexagon in admissible_hexagons((1, 1, 1), n):
        key = "".join(map(_fmt, hexagon[:3])) if by_path else _fmt(add(*hexagon[:3]))
        groups.setdefault(key, []).append(hexagon)
    for key, hexagons in groups.items():
        def worst(hexagons=hexagons):
            return max(float(np.max(ybe_residual(cache, h, (1, 1, 1), u, v, 0.0, n).relative)) for h in hexagons)
        col.check(f"{label}:{'path' if by_path else 'shift'}={key}", [lam, u, v], worst)


def _suite_ybe(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    _ybe_sweep(col, params, rng, count, f"n={params.rank_n}", by_path=params.rank_n == 2)
    if params.rank_n == 2:
        _ybe_sweep(col, params.replace(rank_n=3), rng, max(1, count // 20), "n=3", by_path=False)


def _rank2(params: ModelParams) -> ModelParams:
    return params if params.rank_n == 2 else params.replace(rank_n=2)


def _suite_fusion(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .fusion import (
        FusionEngine,
        fused_weight_listed,
        fusion_projector,
        intertwining_residual,
        listed_squares,
        v_ratio_defect,
        zero_deg_lemma_residual,
    )
    from .weights import neg, unit_steps, zero_step

    params = _rank2(params)
    lam, u = _points(rng, count, 2), _spectral(rng, count)

    def rank_defect():
        mat, _ = fusion_projector(lam, u, params)
        s = np.linalg.svd(mat, compute_uv=False)
        ranks = np.sum(s > 1e-8 * s[..., :1], axis=-1)
        return np.abs(ranks - 5)

    col.check("projector_rank", [lam, u], rank_defect, tol=0.5)
    engine = FusionEngine(lam, params)
    zero = zero_step(2)
    for types in ((2, 1), (1, 2), (2, 2)):
        for tag, top, left, right in listed_squares(types):
            def agree(types=types, top=top, left=left, right=right):
                a = engine.weight(types, zero, top, left, right, u)
                b = fused_weight_listed(lam, types, top, left, right, u, params)
                return _relative(a - b, a, b)
            col.check(f"explicit_vs_composed:W{types[0]}{types[1]}:{tag}:{_fmt(top)}{_fmt(left)}{_fmt(right)}",
                      [lam, u], agree)
    col.check("composition_residual", [lam, u], lambda: engine.max_residual, tol=1e-8)
    for p in unit_steps(2):
        col.check(f"zero_degree_identity:{_fmt(p)}", [lam, u],
                  lambda p=p: zero_deg_lemma_residual(lam, p, u, params).relative, tol=1e-10)
        for q in unit_steps(2):
            if q in (p, neg(p)):
                continue
            def ratio(p=p, q=q):
                diff, scale = v_ratio_defect(lam, p, q, u, params)
                return np.abs(diff) / (1 + scale)
            col.check(f"v_ratio:{_fmt(p)}{_fmt(q)}", [lam, u], ratio)
    v = _spectral(rng, count)
    for which in ("W21", "W12"):
        col.check(f"subspace_preserved:{which}", [lam, u, v],
                  lambda which=which: intertwining_residual(lam, which, u, v, params, np.random.default_rng(0)).relative,
                  tol=1e-8)


def _suite_fused_ybe(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .fusion import FusionEngine, fused_ybe_residuals

    params = _rank2(params)
    lam = _points(rng, count, 2)
    u, v, w = _spectral(rng, count), _spectral(rng, count), _spectral(rng, count)
    engine = FusionEngine(lam, params)
    for types in ((2, 1, 1), (1, 2, 1), (1, 1, 2), (2, 2, 1), (2, 1, 2), (1, 2, 2), (2, 2, 2)):
        def worst(types=types):
            res = fused_ybe_residuals(lam, types, u, v, w, params, engine)
            return max(float(np.max(r)) for r in res.values())
        col.check(f"types={''.join(map(str, types))}", [lam, u, v, w], worst)


def _suite_operators(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .fusion import FusionEngine
    from .operators import (
        build_Mtilde,
        commutativity_trace_defect,
        commutator_residual,
        intertwining_defect,
        theorem1ii_residual,
        total_shifts,
        trig_family,
        weyl_covariance_defect,
    )
    from .weights import weyl_group

    params = _rank2(params)
    lam, u, v = _points(rng, count, 2), _spectral(rng, count), _spectral(rng, count)
    for d in (1, 2):
        col.check(f"factorisation:d={d}", [lam, u], lambda d=d: theorem1ii_residual(u, d, lam, params).relative,
                  tol=1e-10)
    engine = FusionEngine(lam, params)
    for d, dp in ((1, 1), (1, 2), (2, 1), (2, 2)):
        for t in total_shifts(d, dp):
            tag = f"d={d},{dp}:t={_fmt(t)}"
            col.check(f"trace:{tag}", [lam, u, v],
                      lambda t=t, d=d, dp=dp: commutativity_trace_defect(t, lam, u, v, d, dp, params, engine).relative)
            inter = intertwining_defect(t, lam, u, v, d, dp, params, engine)
            col.check(f"intertwiner:{tag}", [lam, u, v],
                      lambda inter=inter: np.abs(inter[0]).max(axis=(-2, -1)) / (1 + inter[1]))
            col.check(f"intertwiner_smin:{tag}", [lam, u, v], lambda inter=inter: np.min(inter[2]), tol=1e-6,
                      expect="above")
    for d in (1, 2):
        op = build_Mtilde(d, params)
        col.check(f"weyl_covariance:d={d}", [lam],
                  lambda op=op: max(float(np.max(weyl_covariance_defect(op, lam, w))) for w in weyl_group(2)))
    f = trig_family(np.random.default_rng(int(rng.integers(2**31))), count)
    u0, v0 = complex(u[0]), complex(v[0])
    for d, dp in ((1, 1), (1, 2), (2, 2)):
        col.check(f"commutator:d={d},{dp}", [lam, u0, v0],
                  lambda d=d, dp=dp: commutator_residual(f, lam, u0, v0, d, dp, params).relative, tol=1e-8)


def _suite_characters(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .characters import (
        build_Mtilde,
        cpq_periodicity_defect,
        heisenberg_defect,
        lemma_SM_residual,
        perturbed_operator,
        pole_cancellation_check,
        sample_points,
        theorem2_membership_residual,
        thw_basis,
        weyl_invariance_defect,
    )
    from .operators import trig_function
    from .weights import add, neg, unit_steps

    params = _rank2(params)
    seed = int(rng.integers(2**31))
    n_points = max(12, count)
    lam = sample_points(n_points, params, seed)
    for d in (1, 2):
        col.check(f"span_membership:d={d}", [lam], lambda d=d: theorem2_membership_residual(d, params, n_points, seed))
        control = perturbed_operator(build_Mtilde(d, params), (1, 0) if d == 1 else (1, 1))
        col.check(f"span_membership_control:d={d}", [lam],
                  lambda control=control, d=d: theorem2_membership_residual(d, params, n_points, seed, control),
                  tol=1e-3, expect="above")
    f = trig_function(np.random.default_rng(seed))
    u = complex(_spectral(rng, 1)[0])
    for beta in ((2, 0), (0, 2), (1, 1)):
        for kind in ("tau", "plain"):
            for d in (1, 2):
                col.check(f"shift_commutes:{kind}:beta={_fmt(beta)}:d={d}", [lam, u],
                          lambda beta=beta, kind=kind, d=d: lemma_SM_residual(beta, d, u, f, lam, params, kind).relative,
                          tol=1e-10)
    for gamma, beta in (((1, 0), (2, 0)), ((1, 1), (0, 2)), ((2, 1), (1, 1))):
        col.check(f"heisenberg:gamma={_fmt(gamma)}:beta={_fmt(beta)}", [lam],
                  lambda gamma=gamma, beta=beta: heisenberg_defect(gamma, beta, f, lam, params).relative, tol=1e-10)
    basis = thw_basis(params)
    P = unit_steps(2)
    for i, g in enumerate(basis):
        col.check(f"weyl_invariance:{g.name}", [lam], lambda g=g: weyl_invariance_defect(g, lam))
        for p in P:
            for q in P:
                if q in (p, neg(p)) or P.index(q) < P.index(p):
                    continue
                col.check(f"pole_cancels:{g.name}:{_fmt(add(p, q))}", [lam],
                          lambda g=g, p=p, q=q: pole_cancellation_check(p, q, g, params, seed), tol=0.1)
    col.check("pole_cancels_control", [lam], lambda: pole_cancellation_check((1, 0), (0, 1), f, params, seed),
              tol=0.5, expect="above")
    for p in P:
        for q in P:
            if q in (p, neg(p)):
                continue
            for beta in ((2, 0), (1, 1)):
                col.check(f"cpq_periodic:{_fmt(p)}{_fmt(q)}:beta={_fmt(beta)}", [lam],
                          lambda p=p, q=q, beta=beta: cpq_periodicity_defect(lam, p, q, beta, params), tol=1e-10)


def _suite_gauge(col: _Collector, params: ModelParams, rng: np.random.Generator, count: int) -> None:
    from .gauge import gauged_ybe_residuals, jmo_sign_table

    seed = int(rng.integers(2**31))
    table = jmo_sign_table(count, params, seed)
    col.check("sigma_squared", [seed], lambda: table.max_sigma_sq_defect)
    col.check("modulus", [seed], lambda: table.max_modulus_defect)
    col.check("path_flips_unexplained", [seed], lambda: table.unexplained_flips, tol=0.5)
    k = max(1, min(count, 20))
    lam, u, v = _points(rng, k, params.rank_n), _spectral(rng, k), _spectral(rng, k)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", BranchWarning)
        col.check("gauged_ybe", [lam, u, v], lambda: np.max(gauged_ybe_residuals(lam, u, v, params)))


_RUNNERS = {
    "theta": _suite_theta,
    "weights": _suite_weights,
    "ybe": _suite_ybe,
    "fusion": _suite_fusion,
    "fused_ybe": _suite_fused_ybe,
    "operators": _suite_operators,
    "characters": _suite_characters,
    "gauge": _suite_gauge,
}


def _suite_seed(seed: int, name: str) -> int:
    return int.from_bytes(hashlib.sha256(f"{seed}:{name}".encode()).digest()[:8], "little")


def _run_one(name: str, config: SuiteConfig) -> list[Record]:
    count = int(config.sweep.get(name, DEFAULT_SWEEP[name]))
    col = _Collector(name, config)
    if count == 0:
        return []
    rng = np.random.default_rng(_suite_seed(config.seed, name))
    try:
        _RUNNERS[name](col, config.params, rng, count)
    except EllipticFaceError as exc:
        col.records.append(Record(name, "setup", "-", float("nan"), col.tol, "below", False, type(exc).__name__))
    return col.records


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, min(len(SUITES), os.cpu_count() or 1))
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be positive, got {value}")
    return value


def run_suite(name: str, config: SuiteConfig | None = None) -> SuiteReport:
    """Run one suite (or ``all``) and collect its records."""
    config = config if config is not None else SuiteConfig()
    if name == "all":
        names = SUITES
    elif name in SUITES:
        names = (name,)
    else:
        raise ConfigError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda s: _run_one(s, config), names))
    records = [r for rs in results for r in rs]
    return SuiteReport(tuple(names), records, time.perf_counter() - start)


# -- tables -------------------------------------------------------------------------


def _value_or_reason(fn: Callable) -> str:
    try:
        return format_complex(fn())
    except PoleError:
        return "unavailable:pole"
    except ProjectionError:
        return "unavailable:projection"


def print_tables(config: SuiteConfig, lam=None, u=None) -> str:
    """Weights at one point with the tag of the closed form each row uses."""
    from .fusion import FusionEngine, fused_weight_listed, listed_squares
    from .operators import build_Mtilde
    from .weights import admissible_squares, face_weight, pattern_label, steps_of_type, zero_step

    params = _rank2(config.params)
    lam = np.asarray(lam if lam is not None else [0.31 + 0.02j, 0.17 - 0.01j], dtype=complex)
    u = complex(u if u is not None else 0.2 + 0.05j)
    fz = format_complex
    lines = [f"point lam={','.join(fz(x) for x in lam)} u={fz(u)}"]
    for top, left, right in admissible_squares(2):
        value = face_weight(lam, top, left, right, u, params)
        lines.append(f"table=W11 tag={pattern_label(top, left, right)} top={_fmt(top)} left={_fmt(left)} "
                     f"right={_fmt(right)} value={fz(value)}")
    engine = FusionEngine(lam, params)
    zero = zero_step(2)
    for types in ((2, 1), (1, 2), (2, 2)):
        for tag, top, left, right in listed_squares(types):
            # at isolated spectral values a closed form has a pole or the composition degenerates
            listed = _value_or_reason(lambda: fused_weight_listed(lam, types, top, left, right, u, params))
            composed = _value_or_reason(lambda: engine.weight(types, zero, top, left, right, u))
            lines.append(f"table=W{types[0]}{types[1]} tag={tag} top={_fmt(top)} left={_fmt(left)} "
                         f"right={_fmt(right)} value={listed} composed={composed}")
    for d in (1, 2):
        op = build_Mtilde(d, params)
        for t in steps_of_type(d, 2):
            lines.append(f"table=Mtilde{d} shift={_fmt(t)} value={fz(op.coefficient(t, lam))}")
    return "\n".join(lines) + "\n"


# -- argument parsing ---------------------------------------------------------------


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key=value file; flags override it")
    p.add_argument("--tau", help="elliptic modulus, e.g. 0+1i or 0,1")
    p.add_argument("--hbar", help="step parameter, e.g. 0.123+0.0456i")
    p.add_argument("--rank", type=int)
    p.add_argument("--truncation", type=int, help="number of product factors in [u]")
    p.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="elliptic-face", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run verification suites")
    _add_config_flags(run)
    run.add_argument("--suite", default="all", choices=SUITES + ("all",))
    run.add_argument("--sweep", help="N for every suite, or name=N,name=N")
    run.add_argument("--tol", help="tolerance for every suite, or name=X,name=X")
    run.add_argument("--out", help="report path, '-' for stdout")
    tables = sub.add_parser("tables", help="print weights and operator coefficients at one point")
    _add_config_flags(tables)
    tables.add_argument("--lam", help="comma-separated pair of complex coordinates, e.g. 0.31+0.02i,0.17-0.01i")
    tables.add_argument("--u", help="spectral parameter")
    defaults = sub.add_parser("defaults", help="print the configuration in config-file format")
    _add_config_flags(defaults)
    return parser


def config_from_args(args: argparse.Namespace) -> SuiteConfig:
    cfg = SuiteConfig()
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = SuiteConfig.from_text(fh.read(), cfg)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
    for key in ("tau", "hbar", "rank", "truncation", "seed", "sweep", "tol", "out"):
        value = getattr(args, key, None)
        if value is not None:
            cfg = cfg.with_field(key, str(value))
    return cfg


def _parse_lam(text: str) -> list[complex]:
    parts = [s for s in text.replace(" ", "").split(",") if s]
    if len(parts) != 2:
        raise ConfigError("--lam needs two complex coordinates in a+bi form")
    return [parse_complex(s) for s in parts]


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.command == "defaults":
            sys.stdout.write(cfg.to_text())
            return 0
        if args.command == "tables":
            lam = _parse_lam(args.lam) if args.lam else None
            u = parse_complex(args.u) if args.u else None
            sys.stdout.write(print_tables(cfg, lam, u))
            return 0
        report = run_suite(args.suite, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = report.render()
    if cfg.out == "-":
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0 if report.ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
