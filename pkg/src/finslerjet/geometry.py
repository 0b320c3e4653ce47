"""Fundamental objects of a Finsler metric at a chart point of TM.

Everything is computed in induced coordinates (x, y) from a jet of F in the
2n chart variables; variable k < n is x^{k+1}, variable n + k is y^{k+1}.

Conventions::

    g_ij   = 1/2 d^2 F^2 / dy^i dy^j          l_i = dF/dy^i
    C_ijk  = 1/4 d^3 F^2 / dy^i dy^j dy^k      hbar = g - l (x) l
    G^i    = 1/4 g^il (y^k d^2F^2/dx^k dy^l - dF^2/dx^l)   (spray y d_x - 2 G d_y)
    N^i_j  = dG^i/dy^j          G^i_jk = dN^i_j/dy^k
    R^i_jk = delta_j N^i_k - delta_k N^i_j,    delta_j = d_xj - N^l_j d_yl
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Sequence

import numpy as np

from . import expr as ex
from . import jets
from .errors import (
    ConfigError,
    DomainError,
    FinslerError,
    GuardViolation,
    InvalidExponent,
    SingularConstantMatrix,
    SingularMetric,
)
from .jets import Jet


@dataclass(frozen=True)
class ChartPoint:
    x: tuple
    y: tuple

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))
        object.__setattr__(self, "y", tuple(float(v) for v in self.y))
        if len(self.x) != len(self.y):
            raise ValueError("x and y must have the same dimension")

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def z(self) -> np.ndarray:
        return np.array(self.x + self.y)

    @classmethod
    def from_z(cls, z) -> "ChartPoint":
        z = [float(v) for v in z]
        n = len(z) // 2
        return cls(tuple(z[:n]), tuple(z[n:]))

    def scaled(self, lam: float) -> "ChartPoint":
        return ChartPoint(self.x, tuple(lam * v for v in self.y))

    def as_dict(self) -> dict:
        return {"x": list(self.x), "y": list(self.y)}


class _ModelMixin:
    """Guard and vector-field plumbing shared by plain and derived models."""

    def env(self, point: ChartPoint, order: int | None = None) -> dict:
        if order is None:
            return ex.chart_env(point.x, point.y)
        seeds = jets.seed_all(point.x + point.y, order)
        return ex.chart_env(seeds[:self.n], seeds[self.n:])

    def guard_values(self, point: ChartPoint) -> list:
        env = self.env(point)
        return [g.value(env) for g in self.guards]

    def admissible(self, point: ChartPoint, margin: float = 0.0) -> bool:
        if not any(point.y):
            return False
        try:
            return all(v > margin for v in self.guard_values(point))
        except FinslerError:
            return False

    def check_admissible(self, point: ChartPoint):
        if not any(point.y):
            raise GuardViolation("direction y must be non-zero")
        env = self.env(point)
        for g in self.guards:
            try:
                v = g.value(env)
            except FinslerError as exc:
                raise GuardViolation(f"guard {g.text or ex.pretty(g.expr)} undefined: {exc}") from exc
            if not v > 0.0:
                raise GuardViolation(
                    f"guard {g.text or ex.pretty(g.expr)} > 0 violated at {point.as_dict()} (value {v:g})")

    def phi_jets(self, point: ChartPoint, order: int) -> list:
        env = self.env(point, order)
        return [ex.evaluate(a, env) for a in self.phi]

    def phi_values(self, point: ChartPoint) -> np.ndarray:
        env = self.env(point)
        return np.array([ex.evaluate(a, env) for a in self.phi], dtype=float)


@dataclass(frozen=True)
class FinslerModel(_ModelMixin):
    """Metric function F(x, y), optional vector field phi(x), guards and exponent m."""

    n: int
    F: ex.Ast
    phi: tuple = ()
    guards: tuple = ()
    m: float | None = None
    name: str = ""
    metric_text: str = field(default="", compare=False)
    phi_text: tuple = field(default=(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        object.__setattr__(self, "guards", tuple(self.guards))
        if self.m is not None and float(self.m) in (0.0, -1.0):
            raise InvalidExponent(f"Kropina exponent m must differ from 0 and -1, got {self.m}")
        if self.phi and len(self.phi) != self.n:
            raise ConfigError(f"vector field needs {self.n} components, got {len(self.phi)}")
        for k, a in enumerate(self.phi):
            ys = {v for v in ex.free_variables(a) if v.startswith("y")}
            if ys:
                raise ConfigError(f"vector field component {k + 1} depends on {sorted(ys)}")

    @classmethod
    def from_strings(cls, n: int, metric: str, vector_field: Sequence[str] = (),
                     domain: Sequence[str] = (), m: float | None = None, name: str = ""):
        F = ex.parse(metric, n)
        phi = tuple(ex.parse(t, n) for t in vector_field)
        guards = tuple(ex.Guard(ex.parse(t, n), t) for t in domain)
        return cls(n, F, phi, guards, m, name, metric, tuple(vector_field))

    def metric_jet(self, point: ChartPoint, order: int) -> Jet:
        return ex.evaluate(self.F, self.env(point, order))

    def metric_value(self, point: ChartPoint) -> float:
        return float(ex.evaluate(self.F, self.env(point)))

    def with_phi(self, phi_asts) -> "FinslerModel":
        return replace(self, phi=tuple(phi_asts),
                       phi_text=tuple(ex.pretty(a) for a in phi_asts))

    def negated_phi(self) -> "FinslerModel":
        return self.with_phi([ex.Neg(a) for a in self.phi])


def as_point(point) -> ChartPoint:
    if isinstance(point, ChartPoint):
        return point
    x, y = point
    return ChartPoint(tuple(x), tuple(y))


class LocalGeometry:
    """Jets of all metric objects around one chart point, at F-jet order ``order``.

    Objects are built lazily; each one consumes derivatives of F^2 so its own
    jet order is lower (g: order-2, N: order-3, Berwald/curvature: need order 4).
    """

    def __init__(self, model, point: ChartPoint, order: int = jets.DEFAULT_ORDER):
        self.model = model
        self.point = as_point(point)
        self.order = order
        self.n = model.n
        model.check_admissible(self.point)
        F = model.metric_jet(self.point, order)
        if F.value <= 0.0:
            raise DomainError(f"metric function is not positive at {self.point.as_dict()}")
        self.F_jet = F

    # variable positions
    def xv(self, i):
        return i

    def yv(self, i):
        return self.n + i

    def _need(self, k, what):
        if self.order < k:
            raise jets.OrderError(f"{what} needs F-jet order >= {k}, have {self.order}")

    @cached_property
    def seeds(self) -> list:
        return jets.seed_all(self.point.x + self.point.y, self.order)

    @cached_property
    def F2_jet(self) -> Jet:
        return self.F_jet * self.F_jet

    @cached_property
    def _dF2_y(self):
        return [self.F2_jet.diff(self.yv(i)) for i in range(self.n)]

    @cached_property
    def g_jets(self):
        self._need(2, "metric tensor")
        n = self.n
        g = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(i, n):
                g[i][j] = g[j][i] = self._dF2_y[i].diff(self.yv(j)) * 0.5
        return g

    @cached_property
    def g(self) -> np.ndarray:
        return jets.values(self.g_jets)

    @cached_property
    def g_inv_jets(self):
        n = self.n
        k = self.order - 2
        eye = [[Jet.constant(1.0 if i == j else 0.0, 2 * n, k) for j in range(n)] for i in range(n)]
        try:
            return jets.jet_linear_solve(self.g_jets, eye)
        except SingularConstantMatrix as exc:
            raise SingularMetric(f"metric tensor singular at {self.point.as_dict()}") from exc

    @cached_property
    def g_inv(self) -> np.ndarray:
        return jets.values(self.g_inv_jets)

    @cached_property
    def ell_jets(self):
        return [self.F_jet.diff(self.yv(i)) for i in range(self.n)]

    @property
    def F(self) -> float:
        return self.F_jet.value

    @cached_property
    def ell(self) -> np.ndarray:
        return jets.values(self.ell_jets)

    @cached_property
    def hbar(self) -> np.ndarray:
        return self.g - np.outer(self.ell, self.ell)

    @cached_property
    def cartan(self) -> np.ndarray:
        self._need(3, "Cartan tensor")
        n = self.n
        C = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                d2 = self._dF2_y[i].diff(self.yv(j))
                for k in range(n):
                    C[i, j, k] = 0.25 * d2.diff(self.yv(k)).value
        return C

    @cached_property
    def spray_jets(self):
        self._need(2, "spray")
        n = self.n
        dF2_x = [self.F2_jet.diff(self.xv(l)) for l in range(n)]
        w = []
        for l in range(n):
            acc = -dF2_x[l]
            for k in range(n):
                acc = acc + self.seeds[self.yv(k)] * self._dF2_y[l].diff(self.xv(k))
            w.append(acc)
        G = []
        for i in range(n):
            acc = self.g_inv_jets[i][0] * w[0]
            for l in range(1, n):
                acc = acc + self.g_inv_jets[i][l] * w[l]
            G.append(acc * 0.25)
        return G

    @cached_property
    def spray(self) -> np.ndarray:
        return jets.values(self.spray_jets)

    @cached_property
    def nonlinear_jets(self):
        self._need(3, "nonlinear connection")
        return [[Gi.diff(self.yv(j)) for j in range(self.n)] for Gi in self.spray_jets]

    @cached_property
    def nonlinear(self) -> np.ndarray:
        return jets.values(self.nonlinear_jets)

    @cached_property
    def berwald(self) -> np.ndarray:
        self._need(4, "Berwald coefficients")
        n = self.n
        B = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    B[i, j, k] = self.nonlinear_jets[i][j].diff(self.yv(k)).value
        return B

    def delta(self, f: Jet, j: int) -> Jet:
        """Horizontal derivative delta_j f = d_xj f - N^l_j d_yl f."""
        out = f.diff(self.xv(j))
        for l in range(self.n):
            out = out - self.nonlinear_jets[l][j] * f.diff(self.yv(l))
        return out

    def delta_value(self, f: Jet, j: int) -> float:
        grad = f.gradient()
        return float(grad[self.xv(j)] - self.nonlinear[:, j] @ grad[self.n:])

    @cached_property
    def curvature(self) -> np.ndarray:
        self._need(4, "curvature")
        n = self.n
        R = np.empty((n, n, n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    R[i, j, k] = (self.delta_value(self.nonlinear_jets[i][k], j)
                                  - self.delta_value(self.nonlinear_jets[i][j], k))
        return R

    # -- vector field apparatus -------------------------------------------

    @cached_property
    def phi_jets(self):
        return self.model.phi_jets(self.point, self.order)

    @cached_property
    def phi(self) -> np.ndarray:
        return jets.values(self.phi_jets)

    @cached_property
    def phi_form_jets(self):
        n = self.n
        out = []
        for i in range(n):
            acc = self.g_jets[i][0] * self.phi_jets[0]
            for j in range(1, n):
                acc = acc + self.g_jets[i][j] * self.phi_jets[j]
            out.append(acc)
        return out

    @cached_property
    def phi_form(self) -> np.ndarray:
        return jets.values(self.phi_form_jets)

    @cached_property
    def Phi_jet(self) -> Jet:
        acc = self.phi_form_jets[0] * self.seeds[self.yv(0)]
        for i in range(1, self.n):
            acc = acc + self.phi_form_jets[i] * self.seeds[self.yv(i)]
        return acc

    @cached_property
    def norm_sq_jet(self) -> Jet:
        acc = self.phi_form_jets[0] * self.phi_jets[0]
        for i in range(1, self.n):
            acc = acc + self.phi_form_jets[i] * self.phi_jets[i]
        return acc

    def hcov(self, V_jets):
        """Berwald horizontal and vertical derivatives of a pi-vector field."""
        n = self.n
        B = self.berwald
        Vv = jets.values(V_jets)
        h = np.empty((n, n))
        v = np.empty((n, n))
        for i in range(n):
            grad = V_jets[i].gradient()
            for j in range(n):
                h[i, j] = grad[self.xv(j)] - self.nonlinear[:, j] @ grad[n:] + Vv @ B[i, :, j]
                v[i, j] = grad[self.yv(j)]
        return h, v


@functools.lru_cache(maxsize=8192)
def local_geometry(model, point: ChartPoint, order: int = jets.DEFAULT_ORDER) -> LocalGeometry:
    """Memoised :class:`LocalGeometry` (models and points are hashable values)."""
    return LocalGeometry(model, as_point(point), order)


@dataclass(frozen=True)
class FundamentalForms:
    F: float
    E: float
    g: np.ndarray
    g_inv: np.ndarray
    ell: np.ndarray
    hbar: np.ndarray
    cartan: np.ndarray


@dataclass(frozen=True)
class SprayConnection:
    spray: np.ndarray
    nonlinear: np.ndarray
    berwald: np.ndarray


@dataclass(frozen=True)
class TensorBundle:
    F: float
    E: float
    g: np.ndarray
    g_inv: np.ndarray
    ell: np.ndarray
    hbar: np.ndarray
    cartan: np.ndarray
    spray: np.ndarray
    nonlinear: np.ndarray
    berwald: np.ndarray
    curvature: np.ndarray

    def as_dict(self) -> dict:
        return {k: (v.tolist() if isinstance(v, np.ndarray) else v)
                for k, v in self.__dict__.items()}


def metric_tensor(model, point) -> np.ndarray:
    """g_ij only; no inversion, so degenerate points are allowed."""
    return local_geometry(model, as_point(point), 2).g


def fundamental_forms(model, point) -> FundamentalForms:
    # order 4 (not the minimal 3) so the cached geometry is shared with the other objects
    loc = local_geometry(model, as_point(point), 4)
    return FundamentalForms(loc.F, 0.5 * loc.F ** 2, loc.g, loc.g_inv, loc.ell,
                            loc.hbar, loc.cartan)


def spray_and_connection(model, point) -> SprayConnection:
    loc = local_geometry(model, as_point(point), 4)
    return SprayConnection(loc.spray, loc.nonlinear, loc.berwald)


def curvature(model, point) -> np.ndarray:
    return local_geometry(model, as_point(point), 4).curvature


def tensor_bundle(model, point) -> TensorBundle:
    loc = local_geometry(model, as_point(point), 4)
    return TensorBundle(loc.F, 0.5 * loc.F ** 2, loc.g, loc.g_inv, loc.ell, loc.hbar,
                        loc.cartan, loc.spray, loc.nonlinear, loc.berwald, loc.curvature)


def field_jets(model, point: ChartPoint, V, order: int = 1) -> list:
    """Jets of a pi-vector field given as expression strings, ASTs or a callable.

    A callable receives the list of 2n seeded coordinate jets and returns n jets.
    """
    seeds = jets.seed_all(point.x + point.y, order)
    if callable(V):
        out = V(seeds)
    else:
        env = ex.chart_env(seeds[:model.n], seeds[model.n:])
        out = [ex.evaluate(ex.parse(v, model.n) if isinstance(v, str) else v, env) for v in V]
    return [jets.as_jet(v, seeds[0]) for v in out]


def hcov_vector(model, point, V):
    """(V^i_{|j}, dV^i/dy^j) for the Berwald connection of ``model``."""
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    return loc.hcov(field_jets(model, point, V))
