"""Sampling, identity checks and the verification report.

Every comparison check evaluates a LEFT side by running the plain geometry
pipeline on the changed metric and a RIGHT side from closed forms in the
original geometry, then records

    abs error = max |LEFT - RIGHT|,  rel error = abs / max(|LEFT|, |RIGHT|, 1)

over all tensor slots and points.  A check passes when the worst relative
error is within ``rel_tol`` or the worst absolute error within ``abs_tol``.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import fncalc as fc
from .concurrent import check_concurrent, lemma_identities
from .config import KROPINA_CHECKS, Config, SampleSpec
from .errors import AcceptanceTooLow, FinslerError, UnknownCheck
from .geometry import ChartPoint, field_jets, local_geometry
from .kropina import (
    circle_path,
    context,
    degeneracy_scale,
    fhat_model,
    nondegeneracy_scalar,
    predicted,
    predicted_hcov,
)

REPORT_VERSION = 1


# -- sampling ---------------------------------------------------------------

def sample(model, spec: SampleSpec, predicate=None, rng=None) -> list:
    """Uniform draws from ``spec.box`` kept when every guard exceeds the margin.

    ``predicate`` can reject further points.  Deterministic for a given seed.
    """
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    lo = np.array([a for a, _ in spec.box])
    hi = np.array([b for _, b in spec.box])
    points = []
    attempts = 0
    while len(points) < spec.count and attempts < spec.max_attempts:
        attempts += 1
        p = ChartPoint.from_z(rng.uniform(lo, hi))
        if not model.admissible(p, spec.guard_margin):
            continue
        if predicate is not None and not predicate(p):
            continue
        points.append(p)
    if len(points) < spec.count:
        raise AcceptanceTooLow(
            f"accepted {len(points)} of {spec.count} points after {attempts} draws")
    return points


def random_polynomial(rng, n: int, terms: int = 3, degree: int = 2) -> str:
    """Random polynomial in x1..xn, y1..yn as expression text."""
    names = [f"x{k + 1}" for k in range(n)] + [f"y{k + 1}" for k in range(n)]
    parts = []
    for _ in range(terms):
        coef = round(float(rng.uniform(-2.0, 2.0)), 3)
        mono = [names[i] for i in rng.integers(0, 2 * n, int(rng.integers(0, degree + 1)))]
        parts.append(f"({coef})" + "".join(f"*{v}" for v in mono))
    return " + ".join(parts)


def random_field(rng, n: int, components: int) -> list:
    return [random_polynomial(rng, n) for _ in range(components)]


# -- results ----------------------------------------------------------------

@dataclass
class CheckResult:
    name: str
    status: str
    points_evaluated: int = 0
    max_abs_err: float | None = None
    max_rel_err: float | None = None
    worst_point: dict | None = None
    rel_tol: float | None = None
    abs_tol: float | None = None
    m: float | None = None
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def as_dict(self) -> dict:
        return {"name": self.name, "m": self.m, "status": self.status, "pass": self.passed,
                "points_evaluated": self.points_evaluated, "max_abs_err": self.max_abs_err,
                "max_rel_err": self.max_rel_err, "worst_point": self.worst_point,
                "rel_tol": self.rel_tol, "abs_tol": self.abs_tol, "notes": self.notes}

    def line(self) -> str:
        m = "" if self.m is None else f"[m={self.m:g}]"
        err = "" if self.max_rel_err is None else f" rel={self.max_rel_err:.2e}"
        return f"{self.status.upper():<20} {self.name}{m}{err} ({self.points_evaluated} pts)"


@dataclass
class VerificationReport:
    model: dict
    tolerances: dict
    checks: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks if c.status != "skipped")

    def find(self, name: str, m: float | None = None) -> CheckResult:
        for c in self.checks:
            if c.name == name and (m is None or c.m == m):
                return c
        raise KeyError(name)

    def as_dict(self, timestamp: str | None = None) -> dict:
        out = {"version": REPORT_VERSION, "model": self.model, "tolerances": self.tolerances,
               "checks": [c.as_dict() for c in self.checks], "pass": self.passed}
        if timestamp is not None:
            out["timestamp"] = timestamp
        return out

    def to_json(self, timestamp: str | None = None) -> str:
        return json.dumps(_clean(self.as_dict(timestamp)), indent=2, allow_nan=False) + "\n"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


class _Errors:
    def __init__(self):
        self.abs = 0.0
        self.rel = 0.0
        self.worst = None
        self.points = set()

    def add(self, point, left, right):
        left = np.asarray(left, dtype=float).ravel()
        right = np.asarray(right, dtype=float).ravel()
        diff = float(np.max(np.abs(left - right))) if left.size else 0.0
        scale = max(1.0, float(np.max(np.abs(left), initial=0.0)),
                    float(np.max(np.abs(right), initial=0.0)))
        rel = diff / scale
        if not np.isfinite(rel):
            rel = diff = float("inf")
        self.points.add(point)
        self.abs = max(self.abs, diff)
        if rel > self.rel or self.worst is None:
            self.rel = max(rel, self.rel)
            self.worst = point

    def result(self, name, rel_tol, abs_tol, m=None, notes=None) -> CheckResult:
        ok = self.rel <= rel_tol or self.abs <= abs_tol
        return CheckResult(name, "pass" if ok else "fail", len(self.points), self.abs, self.rel,
                           None if self.worst is None else self.worst.as_dict(),
                           rel_tol, abs_tol, m, notes or {})


# -- the verifier -----------------------------------------------------------

@functools.lru_cache(maxsize=4096)
def _predicted(model, point, m, sigma, phi_sign):
    ctx = context(model, point, m, sigma, phi_sign)
    return ctx, predicted(model, point, ctx)


class Verifier:
    """Resolved state of one verification run (sign of c, samples, caches)."""

    def __init__(self, cfg: Config):
        self.cfg = cfg
        self.tol = cfg.tolerances
        self.model = cfg.model()
        self.points = sample(self.model, cfg.sample)
        self._kpoints = {}
        self._concurrency = None

    # concurrency and normalisation -------------------------------------

    @property
    def concurrency(self):
        if self._concurrency is None:
            rep = check_concurrent(self.model, self.points, self.tol.concurrency,
                                   self.tol.cartan)
            normalized = bool(self.cfg.phi_sign_normalization and rep.c > 0)
            nmodel = self.model.negated_phi() if normalized else self.model
            self._concurrency = (rep, normalized, nmodel)
        return self._concurrency

    @property
    def nmodel(self):
        return self.concurrency[2]

    @property
    def c_effective(self) -> float:
        rep, normalized, _ = self.concurrency
        return -rep.c if normalized else rep.c

    @functools.cached_property
    def phi_sign(self) -> int:
        Phi = local_geometry(self.nmodel, self.points[0], 2).Phi_jet.value
        return 1 if Phi > 0 else -1

    def kpoints(self, m: float) -> list:
        """Sample points where the change with exponent m is defined and non-degenerate."""
        if m not in self._kpoints:
            idx = self.cfg.exponents.index(m) if m in self.cfg.exponents else len(self.cfg.exponents)
            rng = np.random.default_rng([self.cfg.sample.seed, 1 + idx])
            self._kpoints[m] = sample(self.nmodel, self.cfg.sample,
                                      functools.partial(self._kropina_ok, m), rng)
        return self._kpoints[m]

    def _kropina_ok(self, m, p) -> bool:
        try:
            loc = local_geometry(self.nmodel, p, 4)
            loc.g_inv
            F, Phi, nsq = loc.F, loc.Phi_jet.value, loc.norm_sq_jet.value
        except FinslerError:
            return False
        if not self.phi_sign * Phi > self.cfg.sample.guard_margin:
            return False
        D = nondegeneracy_scalar(m, F, Phi, nsq)
        return abs(D) >= self.cfg.degeneracy_margin * degeneracy_scale(m, F, Phi, nsq)

    def hat(self, m):
        return fhat_model(self.nmodel, m, self.phi_sign)

    def pred(self, p, m, sigma=None):
        sigma = self.cfg.sigma if sigma is None else sigma
        return _predicted(self.nmodel, p, float(m), int(sigma), self.phi_sign)

    # dispatch ------------------------------------------------------------

    def run_check(self, name: str, m: float | None = None, sigma: int | None = None) -> CheckResult:
        if name not in CHECKS:
            raise UnknownCheck(name)
        fn, kropina = CHECKS[name]
        if kropina and m is None:
            m = self.cfg.exponents[0]
        if name in KROPINA_CHECKS and name != "concurrency":
            rep = self.concurrency[0]
            if not rep.passed:
                return CheckResult(name, "precondition-failed", m=m if kropina else None,
                                   notes={"reason": "vector field is not concurrent",
                                          "c": rep.c, "h_residual": rep.h_residual})
        try:
            if kropina:
                return fn(self, float(m), sigma)
            return fn(self)
        except FinslerError as exc:
            return CheckResult(name, "error", m=m if kropina else None,
                               notes={"error": type(exc).__name__, "message": str(exc)})

    def run(self) -> VerificationReport:
        results = []
        for name in self.cfg.checks:
            if CHECKS[name][1]:
                for m in self.cfg.exponents:
                    results.append(self.run_check(name, m))
            else:
                results.append(self.run_check(name))
        tol = {k: getattr(self.tol, k) for k in self.tol.__dataclass_fields__}
        return VerificationReport(self.cfg.echo(), tol, results)


def run_suite(cfg: Config) -> VerificationReport:
    return Verifier(cfg).run()


def run_check(name: str, cfg: Config, m: float | None = None,
              sigma: int | None = None) -> CheckResult:
    return Verifier(cfg).run_check(name, m, sigma)


# -- base-geometry checks ---------------------------------------------------

def _check_concurrency(v: Verifier) -> CheckResult:
    rep, normalized, _ = v.concurrency
    notes = {"c": rep.c, "v_residual": rep.v_residual,
             "cartan_contraction": rep.cartan_contraction,
             "normalized_phi": normalized,
             "c_effective": v.c_effective}
    if normalized:
        notes["normalization"] = "c = +1 found; phi replaced by -phi so that D_{beta W} phi = -W"
    return CheckResult("concurrency", "pass" if rep.passed else "fail", rep.points_checked,
                       rep.h_residual, rep.h_residual, None, v.tol.concurrency, v.tol.concurrency,
                       None, notes)


def _check_fundamental(v: Verifier) -> CheckResult:
    err = _Errors()
    n = v.model.n
    parts = {}
    for p in v.points:
        loc = local_geometry(v.model, p, 4)
        y = np.array(p.y)
        F = loc.F
        g2 = local_geometry(v.model, p.scaled(2.0), 4)
        dg = np.array([[[loc.g_jets[i][j].diff(loc.yv(k)).value for k in range(n)]
                        for j in range(n)] for i in range(n)])
        items = {
            "g y y = F^2": (y @ loc.g @ y, F * F),
            "l y = F": (loc.ell @ y, F),
            "hbar y = 0": (loc.hbar @ y, np.zeros(n)),
            "C y = 0": (loc.cartan @ y, np.zeros((n, n))),
            "1/2 dg/dy = C": (0.5 * dg, loc.cartan),
            "g symmetric": (loc.g, loc.g.T),
            "g(x, 2y) = g(x, y)": (g2.g, loc.g),
            "G(x, 2y) = 4 G(x, y)": (g2.spray, 4.0 * loc.spray),
            "N y = 2 G": (loc.nonlinear @ y, 2.0 * loc.spray),
            "Berwald symmetric": (loc.berwald, loc.berwald.transpose(0, 2, 1)),
            "R antisymmetric": (loc.curvature, -loc.curvature.transpose(0, 2, 1)),
            "y_|j = 0": (loc.hcov([s.truncate(1) for s in loc.seeds[n:]])[0], np.zeros((n, n))),
        }
        for key, (left, right) in items.items():
            err.add(p, left, right)
            e = _Errors()
            e.add(p, left, right)
            parts[key] = max(parts.get(key, 0.0), e.rel)
    return err.result("fundamental", v.tol.selftest, v.tol.abs, notes={"max_rel_by_identity": parts})


def _fd_geometry(model, p: ChartPoint, h: float = 1e-5):
    """g, G, N by central differences (g, G from values of F^2; N from jet G)."""
    n = model.n
    z = p.z

    def f2(zz):
        return model.metric_value(ChartPoint.from_z(zz)) ** 2

    def d1(a):
        e = np.zeros(2 * n)
        e[a] = h
        return (f2(z + e) - f2(z - e)) / (2 * h)

    def d2(a, b):
        ea = np.zeros(2 * n)
        eb = np.zeros(2 * n)
        ea[a] = h
        eb[b] = h
        return (f2(z + ea + eb) - f2(z + ea - eb) - f2(z - ea + eb) + f2(z - ea - eb)) / (4 * h * h)

    g = np.array([[0.5 * d2(n + i, n + j) for j in range(n)] for i in range(n)])
    w = np.array([sum(p.y[k] * d2(k, n + l) for k in range(n)) - d1(l) for l in range(n)])
    G = 0.25 * np.linalg.solve(g, w)
    N = np.empty((n, n))
    for j in range(n):
        e = np.zeros(2 * n)
        e[n + j] = h
        Gp = local_geometry(model, ChartPoint.from_z(z + e), 2).spray
        Gm = local_geometry(model, ChartPoint.from_z(z - e), 2).spray
        N[:, j] = (Gp - Gm) / (2 * h)
    return g, G, N


def _check_fd(v: Verifier) -> CheckResult:
    err = _Errors()
    for p in v.points[:v.cfg.fd_points]:
        loc = local_geometry(v.model, p, 4)
        g, G, N = _fd_geometry(v.model, p)
        err.add(p, loc.g, g)
        err.add(p, loc.spray, G)
        err.add(p, loc.nonlinear, N)
    return err.result("fd-oracle", v.tol.fd, 0.0, notes={"step": 1e-5, "objects": ["g", "G", "N"]})


def _check_lemma(v: Verifier) -> CheckResult:
    err = _Errors()
    c = float(np.sign(v.c_effective))
    parts = {}
    for p in v.points:
        for key, (left, right) in lemma_identities(v.nmodel, p, c).items():
            err.add(p, left, right)
            e = _Errors()
            e.add(p, left, right)
            parts[key] = max(parts.get(key, 0.0), e.rel)
    return err.result("lemma", v.tol.algebraic, v.tol.abs,
                      notes={"c": c, "max_rel_by_identity": parts})


def _check_fn_selftest(v: Verifier) -> CheckResult:
    rng = np.random.default_rng([v.cfg.sample.seed, 999])
    return fn_selftest(v.model, v.points[:5], rng, v.tol.selftest,
                       hat=v.hat(v.cfg.exponents[0]) if v.concurrency[0].passed else None)


def fn_selftest(model, points, rng, tol: float = 1e-9, hat=None) -> CheckResult:
    """Frolicher-Nijenhuis and projector identities on random polynomial fields."""
    n = model.n
    err = _Errors()
    parts = {}
    J = fc.vertical_endomorphism(n)
    h, vv, Gam = (fc.horizontal_projector(model), fc.vertical_projector(model),
                  fc.barthel_form(model))
    I = np.eye(2 * n)

    def add(key, p, left, right):
        err.add(p, left, right)
        e = _Errors()
        e.add(p, left, right)
        parts[key] = max(parts.get(key, 0.0), e.rel)

    for p in points:
        W = fc.field_from_strings(random_field(rng, n, 2 * n), n)
        Z = fc.field_from_strings(random_field(rng, n, 2 * n), n)
        JW, JZ = fc.apply_field(J, W), fc.apply_field(J, Z)
        zero = np.zeros(2 * n)
        add("N_J = 0", p, fc.nijenhuis(J, W, Z, p), zero)
        add("[J, J] = 2 N_J", p, fc.fn_bracket(J, J, W, Z, p), 2 * fc.nijenhuis(J, W, Z, p))
        add("[JW, JZ] = J[W, JZ] + J[JW, Z]", p, fc.lie_bracket(JW, JZ, p),
            fc.apply_form(J, fc.bracket_field(W, JZ), p)
            + fc.apply_form(J, fc.bracket_field(JW, Z), p))
        add("[J, h] = [h, J]", p, fc.fn_bracket(J, h, W, Z, p), fc.fn_bracket(h, J, W, Z, p))
        add("N_I = 0", p, fc.nijenhuis(fc.identity_form(n), W, Z, p), zero)
        cf = fc.canonical_forms(model, p)
        add("J^2 = 0", p, cf.J @ cf.J, np.zeros_like(I))
        add("J C = 0", p, cf.J @ cf.C_field, zero)
        add("h^2 = h", p, cf.h @ cf.h, cf.h)
        add("v^2 = v", p, cf.v @ cf.v, cf.v)
        add("h + v = I", p, cf.h + cf.v, I)
        add("h v = 0", p, cf.h @ cf.v, np.zeros_like(I))
        add("J Gamma = J", p, cf.J @ cf.Gamma, cf.J)
        add("Gamma J = -J", p, cf.Gamma @ cf.J, -cf.J)
        for label, mod in (("F", model), ("F_hat", hat)):
            if mod is None:
                continue
            try:
                S = fc.spray_field(mod)
                add(f"J S = C ({label})", p, fc.apply_form(J, S, p), cf.C_field)
                add(f"[C, S] = S ({label})", p, fc.lie_bracket(fc.liouville(n), S, p),
                    fc.apply_form(fc.identity_form(n), S, p))
            except FinslerError:
                continue
        add("-1/2 [h, h] = R", p, fc.curvature_from_projector(model, p),
            local_geometry(model, p, 4).curvature)
    return err.result("fn-selftest", tol, 0.0, notes={"max_rel_by_identity": parts})


# -- Kropina checks ---------------------------------------------------------

def _kropina_compare(v: Verifier, name, m, getter, rel_tol, sigma=None, points=None, notes=None):
    err = _Errors()
    K = v.hat(m)
    for p in (v.kpoints(m) if points is None else points):
        ctx, P = v.pred(p, m, sigma)
        left, right = getter(local_geometry(K, p, 4), local_geometry(v.nmodel, p, 4), P, ctx, p)
        err.add(p, left, right)
    notes = dict(notes or {})
    notes.setdefault("phi_sign", v.phi_sign)
    return err.result(name, rel_tol, v.tol.abs, m, notes)


def _simple(name, getter, tol_attr="rel"):
    def check(v: Verifier, m, sigma):
        return _kropina_compare(v, name, m, getter, getattr(v.tol, tol_attr), sigma)
    return check


def _check_barthel(v: Verifier, m, sigma):
    sigma = v.cfg.sigma if sigma is None else sigma
    return _kropina_compare(
        v, "barthel", m,
        lambda L, B, P, ctx, p: (-2.0 * (L.nonlinear - B.nonlinear), P.FF),
        v.tol.rel, sigma, notes={"sigma": sigma})


def _check_curvature(v: Verifier, m, sigma):
    sigma = v.cfg.sigma if sigma is None else sigma
    FF = fc.kropina_difference_form(v.nmodel, m, sigma)
    return _kropina_compare(
        v, "curvature", m,
        lambda L, B, P, ctx, p: (L.curvature, B.curvature + fc.curvature_change(v.nmodel, FF, p)),
        v.tol.rel, sigma, points=v.kpoints(m)[:v.cfg.curvature_points],
        notes={"sigma": sigma, "right": "R - 1/2 [h, FF] - 1/4 N_FF"})


def _berwald_fields(v: Verifier):
    rng = np.random.default_rng([v.cfg.sample.seed, 777])
    return [random_field(rng, v.model.n, v.model.n) for _ in range(v.cfg.berwald_fields)]


def _check_berwald_h(v: Verifier, m, sigma):
    err = _Errors()
    K = v.hat(m)
    fields = _berwald_fields(v)
    for p in v.kpoints(m)[:v.cfg.curvature_points]:
        ctx, _ = v.pred(p, m, sigma)
        for Y in fields:
            Yj = field_jets(v.nmodel, p, Y, order=1)
            err.add(p, local_geometry(K, p, 4).hcov(Yj)[0], predicted_hcov(v.nmodel, p, ctx, Yj))
    return err.result("berwald-horizontal", v.tol.rel, v.tol.abs, m, {"fields": fields})


def _check_berwald_v(v: Verifier, m, sigma):
    err = _Errors()
    K = v.hat(m)
    fields = _berwald_fields(v)
    for p in v.kpoints(m)[:v.cfg.curvature_points]:
        for Y in fields:
            Yj = field_jets(v.nmodel, p, Y, order=1)
            err.add(p, local_geometry(K, p, 4).hcov(Yj)[1],
                    local_geometry(v.nmodel, p, 4).hcov(Yj)[1])
    return err.result("berwald-vertical", 1e-12, 1e-12, m,
                      {"fields": fields, "structural": "vertical derivatives are plain d/dy in both"})


def _check_nondegeneracy(v: Verifier, m, sigma):
    err = _Errors()
    K = v.hat(m)
    for p in v.kpoints(m):
        _, P = v.pred(p, m, sigma)
        err.add(p, np.linalg.det(local_geometry(K, p, 4).g), P.det_g_hat)
    res = err.result("nondegeneracy", v.tol.rel, v.tol.abs, m,
                     {"det_formula": "(m+1)^(n-1) (F/|Phi|)^(2mn) det g D / Phi^2"})
    if v.cfg.scan is not None:
        scan = scan_nondegeneracy(v.nmodel, v.cfg.scan, m, v.phi_sign)
        res.notes["scan"] = scan
        res.points_evaluated += scan["points"]
        if not scan["pass"]:
            res.status = "fail"
    return res


def scan_nondegeneracy(model, scan, m, phi_sign) -> dict:
    """Correlate det g_hat with D along the configured circle of directions."""
    K = fhat_model(model, m, phi_sign)
    ts = np.linspace(scan.t_min, scan.t_max, scan.steps)

    def at(t):
        return circle_path(scan.x, scan.y0, scan.y1, [t])[0][1]

    def D_and_scale(t):
        loc = local_geometry(model, at(t), 2)
        args = (m, loc.F, loc.Phi_jet.value, loc.norm_sq_jet.value)
        return nondegeneracy_scalar(*args), degeneracy_scale(*args)

    def det(t):
        return float(np.linalg.det(local_geometry(K, at(t), 2).g))

    usable = [t for t in ts if K.admissible(at(t))]
    Ds = [D_and_scale(t)[0] for t in usable]
    dets = [det(t) for t in usable]

    def roots(f, values):
        out = []
        for k in range(len(usable) - 1):
            a, b = values[k], values[k + 1]
            if a == 0.0:
                out.append(float(usable[k]))
            elif a * b < 0.0:
                out.append(float(brentq(f, usable[k], usable[k + 1], xtol=1e-15, rtol=1e-15)))
        return out

    roots_D = roots(lambda t: D_and_scale(t)[0], Ds)
    roots_det = roots(det, dets)
    probe = list(usable) + roots_D + roots_det
    violations = []
    for t in probe:
        D, scale = D_and_scale(t)
        d = abs(det(t))
        if abs(D) < scan.d_small * scale and not d < scan.det_small:
            violations.append({"t": float(t), "D": D, "det": d, "rule": "small D, det not small"})
        if abs(D) > scan.d_large * scale and not d > scan.det_large:
            violations.append({"t": float(t), "D": D, "det": d, "rule": "large D, det small"})
    paired = (len(roots_D) == len(roots_det)
              and all(abs(a - b) <= 1e-8 for a, b in zip(roots_D, roots_det)))
    return {"points": len(probe), "roots_D": roots_D, "roots_det": roots_det,
            "roots_paired": paired, "violations": violations[:10],
            "pass": paired and not violations}


def _check_projective(v: Verifier, m, sigma):
    K = v.hat(m)
    worst = None
    min_ratio = float("inf")
    count = skipped = 0
    for p in v.kpoints(m):
        B = local_geometry(v.nmodel, p, 4)
        y = np.array(p.y)
        phi = B.phi
        cross = np.linalg.norm(np.outer(phi, y) - np.outer(y, phi))
        if cross <= 1e-6 * np.linalg.norm(phi) * np.linalg.norm(y):
            skipped += 1
            continue
        d = local_geometry(K, p, 4).spray - B.spray
        perp = d - (y @ B.g @ d) / (y @ B.g @ y) * y
        ratio = float(np.linalg.norm(perp) / np.linalg.norm(d))
        count += 1
        if ratio < min_ratio:
            min_ratio, worst = ratio, p
    ok = count > 0 and min_ratio >= v.tol.projective
    return CheckResult("projective", "pass" if ok else "fail", count, None, None,
                       None if worst is None else worst.as_dict(), None, None, m,
                       {"min_transverse_ratio": min_ratio, "threshold": v.tol.projective,
                        "skipped_collinear": skipped})


def _check_not_concurrent(v: Verifier, m, sigma):
    rep = check_concurrent(v.hat(m), v.kpoints(m), v.tol.concurrency, v.tol.cartan)
    # either phi_|j is not a multiple of the identity, or the multiple is not +-1
    spread = rep.h_residual > v.tol.not_concurrent
    off_unit = abs(abs(rep.c) - 1.0) > v.tol.not_concurrent
    ok = spread or off_unit
    return CheckResult("not-concurrent", "pass" if ok else "fail", rep.points_checked,
                       None, None, None, None, None, m,
                       {"c_hat": rep.c, "h_residual_hat": rep.h_residual,
                        "threshold": v.tol.not_concurrent,
                        "reason": ("h_residual" if spread else "c") if ok else None,
                        "expectation": "phi is not concurrent for the changed metric"})


CHECKS = {
    "concurrency": (_check_concurrency, False),
    "fundamental": (_check_fundamental, False),
    "fd-oracle": (_check_fd, False),
    "lemma": (_check_lemma, False),
    "fn-selftest": (_check_fn_selftest, False),
    "kropina-metric": (_simple("kropina-metric", lambda L, B, P, c, p: (L.g, P.g_hat)), True),
    "kropina-ell": (_simple("kropina-ell", lambda L, B, P, c, p: (L.ell, P.ell_hat)), True),
    "kropina-hbar": (_simple("kropina-hbar", lambda L, B, P, c, p: (L.hbar, P.hbar_hat)), True),
    "kropina-cartan": (_simple("kropina-cartan",
                               lambda L, B, P, c, p: (L.cartan, P.cartan_hat)), True),
    "kropina-spray": (_simple("kropina-spray", lambda L, B, P, c, p: (L.spray, P.spray_hat)), True),
    "kropina-nonlinear": (_simple("kropina-nonlinear",
                                  lambda L, B, P, c, p: (L.nonlinear, P.nonlinear_hat)), True),
    "barthel": (_check_barthel, True),
    "curvature": (_check_curvature, True),
    "berwald-horizontal": (_check_berwald_h, True),
    "berwald-vertical": (_check_berwald_v, True),
    "nondegeneracy": (_check_nondegeneracy, True),
    "projective": (_check_projective, True),
    "not-concurrent": (_check_not_concurrent, True),
    "ar-factorization": (_simple("ar-factorization",
                                 lambda L, B, P, c, p: (L.g, P.zeta_hat * P.a_hat),
                                 "algebraic"), True),
}
