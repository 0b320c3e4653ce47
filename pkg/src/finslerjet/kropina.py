"""The change F -> Fhat = F^(m+1) Phi^(-m) and closed forms for its objects.

Phi only needs to be non-zero.  A model fixes a sign ``s`` with s*Phi > 0 on
the domain and evaluates Fhat = F^(m+1) (s Phi)^(-m); the closed forms below
use q = F/|Phi| for every power of Phi that carries m, and r = F/Phi (signed)
for the remaining odd powers.  For s = +1 this is literally F^(m+1) Phi^(-m).

The closed forms assume phi is concurrent with c = -1 (D_{beta W} phi = -W).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import jets
from .errors import DegenerateChange, DomainError, InvalidExponent, ZeroPhi
from .geometry import ChartPoint, _ModelMixin, as_point, local_geometry
from .jets import Jet

DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class KropinaModel(_ModelMixin):
    """Derived model whose metric function is F^(m+1) (s Phi)^(-m)."""

    base: object
    m: float
    phi_sign: int = 1

    def __post_init__(self):
        if float(self.m) in (0.0, -1.0):
            raise InvalidExponent(f"Kropina exponent m must differ from 0 and -1, got {self.m}")
        if self.phi_sign not in (1, -1):
            raise ValueError("phi_sign must be +1 or -1")

    @property
    def n(self):
        return self.base.n

    @property
    def phi(self):
        return self.base.phi

    @property
    def guards(self):
        return self.base.guards

    @property
    def name(self):
        return f"{self.base.name or 'model'}^kropina(m={self.m:g})"

    def signed_Phi(self, point: ChartPoint) -> float:
        return self.phi_sign * local_geometry(self.base, point, 2).Phi_jet.value

    def admissible(self, point: ChartPoint, margin: float = 0.0) -> bool:
        if not self.base.admissible(point, margin):
            return False
        try:
            return self.signed_Phi(point) > margin
        except Exception:
            return False

    def check_admissible(self, point: ChartPoint):
        self.base.check_admissible(point)
        if not self.signed_Phi(point) > 0.0:
            raise DomainError(f"guard {'' if self.phi_sign > 0 else '-'}Phi > 0 violated at "
                              f"{point.as_dict()}")

    def metric_jet(self, point: ChartPoint, order: int) -> Jet:
        loc = local_geometry(self.base, point, order + 2)
        F = loc.F_jet.truncate(order)
        Phi = loc.Phi_jet * float(self.phi_sign)
        if not Phi.value > 0.0:
            raise DomainError(f"signed Phi = {Phi.value:g} is not positive at {point.as_dict()}")
        m = float(self.m)
        return jets.power(F, m + 1.0) * jets.power(Phi, -m)

    def metric_value(self, point: ChartPoint) -> float:
        return self.metric_jet(as_point(point), 0).value


def fhat_model(model, m: float | None = None, phi_sign: int = 1) -> KropinaModel:
    if m is None:
        m = model.m
    if m is None:
        raise InvalidExponent("no Kropina exponent given")
    return KropinaModel(model, float(m), phi_sign)


def phi_sign_at(model, point) -> int:
    Phi = local_geometry(model, as_point(point), 2).Phi_jet.value
    if Phi == 0.0:
        raise ZeroPhi(f"Phi vanishes at {as_point(point).as_dict()}")
    return 1 if Phi > 0 else -1


def nondegeneracy_scalar(m, F, Phi, norm_sq):
    """D = m F^2 |phi|^2 - (m-1) Phi^2, over floats or jets."""
    return m * (F * F) * norm_sq - (m - 1.0) * (Phi * Phi)


def degeneracy_scale(m, F, Phi, norm_sq) -> float:
    return abs(m) * F * F * abs(norm_sq) + abs(m - 1.0) * Phi * Phi


def psi_jets(m, F: Jet, Phi: Jet, norm_sq: Jet):
    D = nondegeneracy_scalar(m, F, Phi, norm_sq)
    F2 = F * F
    return (2.0 * m) * Phi * F2 / D, m * (F2 * F2) / D


@dataclass(frozen=True)
class KropinaContext:
    m: float
    F: float
    Phi: float
    norm_sq: float
    D: float
    Psi1: float
    Psi2: float
    sigma: int = 1
    phi_sign: int = 1
    Psi1_jet: Jet = field(default=None, repr=False, compare=False)
    Psi2_jet: Jet = field(default=None, repr=False, compare=False)

    @property
    def q(self) -> float:
        return self.F / abs(self.Phi)

    @property
    def r(self) -> float:
        return self.F / self.Phi


def context(model, point, m: float | None = None, sigma: int = 1, phi_sign: int = 1,
            rtol: float = DEGENERACY_RTOL) -> KropinaContext:
    """Scalars of the change at ``point``: D, Psi1, Psi2 (and their jets, order 2)."""
    if m is None:
        m = model.m
    m = float(m)
    if m in (0.0, -1.0):
        raise InvalidExponent(f"Kropina exponent m must differ from 0 and -1, got {m}")
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    F = loc.F_jet.truncate(2)
    Phi, norm_sq = loc.Phi_jet, loc.norm_sq_jet
    if abs(Phi.value) <= 1e-14 * max(1.0, loc.F * np.sqrt(abs(norm_sq.value))):
        raise ZeroPhi(f"Phi vanishes at {point.as_dict()}")
    D = nondegeneracy_scalar(m, F.value, Phi.value, norm_sq.value)
    if abs(D) <= rtol * degeneracy_scale(m, F.value, Phi.value, norm_sq.value):
        raise DegenerateChange(f"D = {D:g} vanishes at {point.as_dict()}")
    P1, P2 = psi_jets(m, F, Phi, norm_sq)
    return KropinaContext(m, F.value, Phi.value, norm_sq.value, D, P1.value, P2.value,
                          sigma, phi_sign, P1, P2)


@dataclass(frozen=True)
class PredictedTensors:
    ell_hat: np.ndarray
    hbar_hat: np.ndarray
    g_hat: np.ndarray
    cartan_hat: np.ndarray
    spray_hat: np.ndarray
    nonlinear_hat: np.ndarray
    FF: np.ndarray
    zeta_hat: float
    a_hat: np.ndarray
    det_g_hat: float


def _sym(a, b):
    return np.outer(a, b) + np.outer(b, a)


def predicted(model, point, ctx: KropinaContext) -> PredictedTensors:
    """Closed-form hatted objects from the geometry of ``model`` at ``point``."""
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    n = loc.n
    m, F, Phi = ctx.m, ctx.F, ctx.Phi
    q, r = ctx.q, ctx.r
    q2m = q ** (2 * m)
    ell, hbar, g = loc.ell, loc.hbar, loc.g
    phi, pf = loc.phi, loc.phi_form
    y = np.array(point.y)

    ell_hat = q ** m * ((m + 1) * ell - m * r * pf)
    hbar_hat = (m + 1) * q2m * (hbar + m * np.outer(ell, ell)
                                + m * r * (r * np.outer(pf, pf) - _sym(pf, ell)))

    # g_hat = a g + b phi phi + c (phi l + l phi) + d l l; each coefficient is
    # f(F, Phi) = k F^alpha |Phi|^(-2m) Phi^(-j), so d f/dy = f (alpha l/F - (2m+j) phi/Phi)
    coeffs = [  # (k, alpha, j, tensor)
        ((m + 1), 2 * m, 0, g),
        (m * (2 * m + 1), 2 * m + 2, 2, np.outer(pf, pf)),
        (-2 * m * (m + 1), 2 * m + 1, 1, _sym(pf, ell)),
        (2 * m * (m + 1), 2 * m, 0, np.outer(ell, ell)),
    ]
    g_hat = np.zeros((n, n))
    cartan2 = np.zeros((n, n, n))
    for k, alpha, j, T in coeffs:
        f = k * F ** alpha * abs(Phi) ** (-2 * m) * Phi ** (-j)
        df = f * (alpha * ell / F - (2 * m + j) * pf / Phi)
        g_hat += f * T
        cartan2 += np.einsum("ij,k->ijk", T, df)
    a_coef, _, _, _ = coeffs[0]
    a = a_coef * q2m
    c = coeffs[2][0] * q2m * r
    d = coeffs[3][0] * q2m
    cartan2 += 2 * a * loc.cartan
    cartan2 += c / F * (np.einsum("i,jk->ijk", pf, hbar) + np.einsum("j,ik->ijk", pf, hbar))
    cartan2 += d / F * (np.einsum("ik,j->ijk", hbar, ell) + np.einsum("jk,i->ijk", hbar, ell))
    cartan_hat = 0.5 * cartan2

    dPsi1 = ctx.Psi1_jet.gradient()[n:]
    dPsi2 = ctx.Psi2_jet.gradient()[n:]
    spray_hat = loc.spray + 0.5 * ctx.Psi1 * y - 0.5 * ctx.Psi2 * phi
    nonlinear_hat = loc.nonlinear + 0.5 * (ctx.Psi1 * np.eye(n) + np.outer(y, dPsi1)
                                           - np.outer(phi, dPsi2))
    FF = -ctx.Psi1 * np.eye(n) - np.outer(y, dPsi1) + ctx.sigma * np.outer(phi, dPsi2)

    zeta_hat = m * (m + 1) * q2m
    a_hat = (g / m + (2 * m + 1) / (m + 1) * r ** 2 * np.outer(pf, pf)
             + 2 * np.outer(ell, ell) - 2 * r * _sym(pf, ell))
    det_g_hat = ((m + 1) ** (n - 1) * q ** (2 * m * n) * np.linalg.det(g) * ctx.D / Phi ** 2)
    return PredictedTensors(ell_hat, hbar_hat, g_hat, cartan_hat, spray_hat, nonlinear_hat,
                            FF, zeta_hat, a_hat, det_g_hat)


def predicted_hcov(model, point, ctx: KropinaContext, Y_jets) -> np.ndarray:
    """Berwald horizontal derivative of Y in the changed geometry, from the old one.

    Row i, column j is the i-th component of Dhat_{beta-hat e_j} Y.
    """
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    n = loc.n
    h, v = loc.hcov(Y_jets)
    Y = jets.values(Y_jets)
    y = np.array(point.y)
    phi = loc.phi
    dP1 = ctx.Psi1_jet.gradient()[n:]
    dP2 = ctx.Psi2_jet.gradient()[n:]
    hess1 = np.array([[ctx.Psi1_jet.diff(n + a).diff(n + b).value for b in range(n)]
                      for a in range(n)])
    hess2 = np.array([[ctx.Psi2_jet.diff(n + a).diff(n + b).value for b in range(n)]
                      for a in range(n)])
    out = h.copy()
    out -= 0.5 * (ctx.Psi1 * v
                  + np.outer(v @ y, dP1)          # d_J Psi1(beta X) D_{gamma eta} Y
                  - np.outer(Y, dP1)
                  - (Y @ dP1) * np.eye(n)
                  - np.outer(v @ phi, dP2))
    out += 0.5 * (np.outer(y, hess1 @ Y) - np.outer(phi, hess2 @ Y))
    return out


def nondegeneracy_scan(model, path, m: float | None = None, phi_sign: int = 1):
    """[(t, D, det g_hat)] along ``path`` = iterable of (t, ChartPoint)."""
    khat = fhat_model(model, m, phi_sign)
    m = khat.m
    out = []
    for t, point in path:
        point = as_point(point)
        loc = local_geometry(model, point, 2)
        D = nondegeneracy_scalar(m, loc.F, loc.Phi_jet.value, loc.norm_sq_jet.value)
        g_hat = local_geometry(khat, point, 2).g
        out.append((float(t), float(D), float(np.linalg.det(g_hat))))
    return out


def circle_path(x, y0, y1, ts):
    """Points (x, cos t y0 + sin t y1) for t in ``ts``."""
    y0, y1 = np.asarray(y0, float), np.asarray(y1, float)
    return [(t, ChartPoint(tuple(x), tuple(np.cos(t) * y0 + np.sin(t) * y1))) for t in ts]
