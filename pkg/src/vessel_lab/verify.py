"""Verification suites over a constructed vessel, collected into a report."""
from __future__ import annotations

import os
import time
import warnings
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ArgumentError
from .numerics import grid_derivative
from .sturm_liouville import (check_h_identities, gl_kernels, gl_residual, lambda_from_s,
                              q_from_K)
from .tau import check_gamma_star_formula, fit_bounds, potential
from .transfer import (check_intertwine, check_symmetry, det_S, gram_K1, gram_K2,
                       min_gram_eigenvalue, spectral_distance)
from .vessel import Vessel, classify, standard_construction, vessel_residuals

SUITES = ("axioms", "symmetry", "det", "intertwine", "kernels", "tau", "gl", "jost", "bounds")

DEFAULT_TOL = {
    "axioms": 1e-6,
    "symmetry": 1e-6,
    "det": 1e-7,
    "intertwine": 1e-5,
    "kernels": 1e-9,
    "tau": 1e-6,
    "gl": 1e-7,
    "jost": 1e-5,
    "bounds": 10.0,
}

LAMBDA_RE = (-2.0, 2.0)
LAMBDA_IM = (1.5, 3.5)
MIN_SPECTRAL_GAP = 0.1


@dataclass(frozen=True)
class CheckRecord:
    suite: str
    name: str
    location: dict
    residual: float
    tolerance: float
    passed: bool


@dataclass
class VerificationReport:
    suites: list
    checks: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    timings: dict | None = None

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.checks)

    @property
    def passed(self) -> bool:
        return self.n_failed == 0

    def summary(self) -> dict:
        return {"total": len(self.checks), "passed": len(self.checks) - self.n_failed,
                "failed": self.n_failed, "skipped": len(self.skipped)}

    def max_residual(self, suite: str | None = None) -> float:
        vals = [c.residual for c in self.checks if suite is None or c.suite == suite]
        return max(vals, default=0.0)

    def to_dict(self) -> dict:
        d = {"suites": list(self.suites), "summary": self.summary(),
             "checks": [asdict(c) for c in self.checks], "skipped": list(self.skipped)}
        if self.timings is not None:
            d["timings"] = dict(self.timings)
        return d


class _Ctx:
    def __init__(self, v: Vessel, suite: str, seed: int, tol: float | None):
        self.v = v
        self.suite = suite
        self.rng = np.random.default_rng([seed, zlib.crc32(suite.encode())])
        self.tol = DEFAULT_TOL[suite] if tol is None else tol
        self.records: list[CheckRecord] = []
        self.skips: list[dict] = []

    def record(self, name, residual, location=None, tol=None):
        tol = self.tol if tol is None else tol
        residual = float(residual)
        self.records.append(CheckRecord(self.suite, name, dict(location or {}), residual, tol,
                                        bool(residual <= tol)))

    def skip(self, reason):
        self.skips.append({"suite": self.suite, "reason": reason})


def _range(v: Vessel):
    lo, hi = v.valid_range
    return max(lo, v.span[0]), min(hi, v.span[1])


def _snap(v: Vessel, x: float) -> float:
    return v.x0 + round((x - v.x0) * v.density) / v.density


def _sample_xs(v: Vessel, n: int, width: float | None = None):
    lo, hi = _range(v)
    if width is not None:
        hi = min(hi, max(v.x0, lo) + width)
    return [_snap(v, t) for t in np.linspace(lo, hi, n)]


def _lambda_grid(v: Vessel, n: int = 5):
    out = []
    for re in np.linspace(*LAMBDA_RE, n):
        for im in np.linspace(*LAMBDA_IM, n):
            lam = complex(re, im)
            if spectral_distance(v, lam) >= MIN_SPECTRAL_GAP and \
                    spectral_distance(v, -np.conj(lam)) >= MIN_SPECTRAL_GAP:
                out.append(lam)
    return out


def _draw_lambda(ctx: _Ctx):
    while True:
        lam = complex(ctx.rng.uniform(*LAMBDA_RE), ctx.rng.uniform(*LAMBDA_IM))
        if spectral_distance(ctx.v, lam) >= MIN_SPECTRAL_GAP:
            return lam


def _loc(**kw):
    out = {}
    for k, val in kw.items():
        if isinstance(val, complex):
            out[k] = [val.real, val.imag]
        else:
            out[k] = float(val)
    return out


def _is_sl(ctx: _Ctx) -> bool:
    if ctx.v.params.family != "SL":
        ctx.skip(f"defined for SL vessels only (family {ctx.v.params.family})")
        return False
    return True


# -- suites ---------------------------------------------------------------------

def suite_axioms(ctx: _Ctx):
    v = ctx.v
    for x in _sample_xs(v, 6):
        r = vessel_residuals(v, x)
        for name, val in r.as_dict().items():
            ctx.record(name, val, _loc(x=x))
    bad = v.params.violations(_sample_xs(v, 6))
    ctx.record("parameter_invariants", len(bad), tol=0)


def suite_symmetry(ctx: _Ctx):
    v = ctx.v
    lams = _lambda_grid(v)
    for x in _sample_xs(v, 3):
        for lam in lams:
            ctx.record("symmetry", check_symmetry(v, lam, x), _loc(lam=lam, x=x))


def suite_det(ctx: _Ctx):
    v = ctx.v
    xs = _sample_xs(v, 20)
    for lam in (complex(LAMBDA_RE[0], LAMBDA_IM[0]), complex(0, LAMBDA_IM[1]),
                complex(LAMBDA_RE[1], LAMBDA_IM[1])):
        if spectral_distance(v, lam) < MIN_SPECTRAL_GAP:
            continue
        prof = det_S(v, lam, xs)
        ctx.record("det_stdev", float(np.std(prof.values)), _loc(lam=lam))
    for im in (0.5, 5.0):
        lam = complex(0, im)
        if spectral_distance(v, lam) < MIN_SPECTRAL_GAP:
            continue
        prof = det_S(v, lam, xs)
        ctx.record("det_unimodular", prof.unimodular_error, _loc(lam=lam))


def suite_intertwine(ctx: _Ctx):
    v = ctx.v
    lo, hi = _range(v)
    hi = min(hi, lo + 3.0)
    sl = v.params.family == "SL"
    for _ in range(10):
        lam = _draw_lambda(ctx)
        u0 = ctx.rng.normal(size=v.dim_E) + 1j * ctx.rng.normal(size=v.dim_E)
        u0 /= np.linalg.norm(u0)
        x = _snap(v, ctx.rng.uniform(lo, hi))
        ctx.record("output_lde", check_intertwine(v, lam, x, u0), _loc(lam=lam, x=x))
        if sl:
            ctx.record("schrodinger", schrodinger_check(v, lam, x, u0), _loc(lam=lam, x=x))


def schrodinger_check(v: Vessel, lam: complex, x: float, u0) -> float:
    """``|-y1'' + q y1 + i lam y1|`` for ``y = S Phi u0`` with q from the tau profile."""
    from .numerics import derivative
    from .transfer import S_matrix, input_fundamental

    cache = {}

    def y1(t):
        if t not in cache:
            cache[t] = complex((S_matrix(v, lam, t) @ input_fundamental(v, lam, t) @ u0)[0])
        return cache[t]

    lo, hi = _range(v)
    d2 = derivative(y1, x, v.h, order=2, lo=lo, hi=hi)
    q = float(potential(v, [x]).q[0])
    return abs(-d2 + q * y1(x) + 1j * lam * y1(x))


def suite_kernels(ctx: _Ctx):
    v = ctx.v
    if not classify(v).dissipative:
        ctx.skip("kernel positivity needs a dissipative vessel")
        return
    for x in _sample_xs(v, 2, width=3.0):
        for _ in range(3):
            lams = [_draw_lambda(ctx) for _ in range(4)]
            loc = {"x": x, "lams": [[z.real, z.imag] for z in lams]}
            for name, gram in (("K1_gram", gram_K1), ("K2_gram", gram_K2)):
                ctx.record(name, max(0.0, -min_gram_eigenvalue(gram(v, lams, x))), loc)


def suite_tau(ctx: _Ctx):
    v = ctx.v
    sl = v.params.family == "SL"
    s = v.valid_slice
    xs = v.valid_grid
    sel = xs <= v.x0 + 10.0 + 1e-9
    if sel.sum() >= 6:
        _, ld = np.linalg.slogdet(v.X_grid[s][sel])
        dlog = grid_derivative(ld, v.h)
        W = v.W_grid[sel]
        p = v.params
        if p.is_constant:
            L = np.einsum("ij,kji->k", p.s2(0.0), W).real
        else:
            L = np.array([np.trace(p.s2(t) @ w).real for t, w in zip(xs[sel], W)])
        ctx.record("trace_identity", float(np.max(np.abs(L - dlog))),
                   {"x_min": float(xs[sel][0]), "x_max": float(xs[sel][-1])})
    else:
        ctx.skip("sweep too short for the trace identity")
    if sl:
        for x in _sample_xs(v, 5, width=10.0):
            ctx.record("gamma_star_formula", check_gamma_star_formula(v, x), _loc(x=x))
        grid = _sample_xs(v, 41, width=10.0)
        prof = potential(v, grid)
        ctx.record("q_cross_check", prof.cross_check, tol=1e-5)


def suite_gl(ctx: _Ctx):
    if not _is_sl(ctx):
        return
    v = ctx.v
    kern = gl_kernels(v)
    pts = _sample_xs(v, 10, width=4.0)
    for x in pts:
        for y in pts:
            if y <= x:
                ctx.record("gl_equation", gl_residual(kern, v, x, y, 48), _loc(x=x, y=y))
    xs = _sample_xs(v, 5, width=4.0)
    prof = potential(v, xs)
    for x, q in zip(xs, prof.q):
        ctx.record("q_from_K", abs(q_from_K(kern, x) - q), _loc(x=x), tol=1e-5)


def suite_jost(ctx: _Ctx):
    if not _is_sl(ctx):
        return
    v = ctx.v
    m_A = float(np.max(v.eigenvalues.imag)) if v.dim_H else 0.0
    lo, hi = _range(v)
    hi = min(hi, lo + 5.0)
    for _ in range(8):
        s = complex(ctx.rng.choice([-1, 1]) * ctx.rng.uniform(0.1, 1.0),
                    ctx.rng.uniform(m_A + 0.5, m_A + 2.0))
        x = _snap(v, ctx.rng.uniform(lo, hi))
        if spectral_distance(v, lambda_from_s(s)) < MIN_SPECTRAL_GAP:
            continue
        r = check_h_identities(v, s, x)
        loc = _loc(s=s, x=x)
        ctx.record("h_symmetry", r.symmetry, loc)
        ctx.record("h_energy", r.energy, loc)
        ctx.record("h_phase", r.phase, loc)


BOUNDS_WINDOW = (5.0, 50.0)
BOUNDS_Q_WINDOW = (10.0, 100.0)


def suite_bounds(ctx: _Ctx):
    if not _is_sl(ctx):
        return
    v = ctx.v
    eig = v.eigenvalues
    cls = classify(v)
    if not cls.minimal:
        ctx.skip("bounds need a minimal vessel")
        return
    if not cls.dissipative or np.any(np.abs(eig.real) > 1e-8) or np.any(eig.imag <= 0):
        ctx.skip("bounds need a dissipative vessel with spectrum on the positive imaginary axis")
        return
    ext = v
    need = v.x0 + BOUNDS_Q_WINDOW[1]
    if v.span[1] < need:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            ext = standard_construction(v.params, v.A, v.B0, v.X0, v.x0, span=(v.x0, need),
                                        density=v.density)
    fit = fit_bounds(ext, BOUNDS_WINDOW, BOUNDS_Q_WINDOW)
    ctx.record("trace_slope_shortfall", max(0.0, 1e-6 - fit.T1), {"T1": fit.T1, "T2": fit.T2}, tol=0.0)
    ctx.record("inverse_bound_shortfall", max(0.0, 1e-6 - fit.c1), {"c1": fit.c1, "c2": fit.c2},
               tol=0.0)
    ctx.record("q_times_x", fit.q_bound, {"x_min": BOUNDS_Q_WINDOW[0], "x_max": BOUNDS_Q_WINDOW[1]},
               tol=ctx.tol * max(1, v.dim_H) if ctx.tol == DEFAULT_TOL["bounds"] else ctx.tol)


SUITE_FUNCS = {
    "axioms": suite_axioms,
    "symmetry": suite_symmetry,
    "det": suite_det,
    "intertwine": suite_intertwine,
    "kernels": suite_kernels,
    "tau": suite_tau,
    "gl": suite_gl,
    "jost": suite_jost,
    "bounds": suite_bounds,
}


def parse_suites(text: str) -> list[str]:
    names = [s.strip() for s in text.split(",") if s.strip()]
    if names == ["all"]:
        return list(SUITES)
    unknown = [n for n in names if n not in SUITE_FUNCS]
    if unknown or not names:
        raise ArgumentError(f"unknown suite(s) {unknown}; choose from {list(SUITES)}")
    return names


def thread_count() -> int:
    raw = os.environ.get("VESSEL_LAB_THREADS", "1")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ArgumentError(f"VESSEL_LAB_THREADS must be an integer >= 1, got {raw!r}") from exc
    if n < 1:
        raise ArgumentError(f"VESSEL_LAB_THREADS must be >= 1, got {n}")
    return n


def run_suites(v: Vessel, suites, seed: int = 0, tol: float | None = None,
               timings: bool = False, threads: int | None = None) -> VerificationReport:
    """Run the named suites; records come back in suite order whatever the thread count."""
    suites = list(suites)
    for s in suites:
        if s not in SUITE_FUNCS:
            raise ArgumentError(f"unknown suite {s!r}")
    threads = thread_count() if threads is None else threads

    def run(name):
        ctx = _Ctx(v, name, seed, tol)
        t0 = time.perf_counter()
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            SUITE_FUNCS[name](ctx)
        return ctx, time.perf_counter() - t0

    if threads > 1 and len(suites) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, suites))
    else:
        results = [run(s) for s in suites]
    report = VerificationReport(suites)
    for ctx, _ in results:
        report.checks.extend(ctx.records)
        report.skipped.extend(ctx.skips)
    if timings:
        report.timings = {name: dt for name, (_, dt) in zip(suites, results)}
    return report
