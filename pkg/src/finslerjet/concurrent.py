"""Concurrency of a vector field phi(x) and the scalar apparatus built on it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import jets
from .errors import NoAdmissiblePoints
from .geometry import as_point, local_geometry
from .jets import Jet

CONCURRENCY_TOL = 1e-8


@dataclass(frozen=True)
class PhiScalars:
    phi_form: np.ndarray
    Phi: float
    norm_sq: float
    Phi_jet: Jet
    norm_sq_jet: Jet


def phi_scalars(model, point, order: int = jets.DEFAULT_ORDER) -> PhiScalars:
    """phi_i = g_ij phi^j, Phi = phi_i y^i and |phi|^2 = g_ij phi^i phi^j at ``point``."""
    loc = local_geometry(model, as_point(point), order)
    return PhiScalars(loc.phi_form, loc.Phi_jet.value, loc.norm_sq_jet.value,
                      loc.Phi_jet, loc.norm_sq_jet)


@dataclass(frozen=True)
class ConcurrencyReport:
    c: float
    h_residual: float
    v_residual: float
    cartan_contraction: float
    points_checked: int
    tol: float = CONCURRENCY_TOL
    cartan_tol: float = 1e-10

    @property
    def passed(self) -> bool:
        return (self.h_residual <= self.tol
                and abs(abs(self.c) - 1.0) <= self.tol
                and self.v_residual == 0.0
                and self.cartan_contraction <= self.cartan_tol)

    def as_dict(self) -> dict:
        return {"c": self.c, "h_residual": self.h_residual, "v_residual": self.v_residual,
                "cartan_contraction": self.cartan_contraction,
                "points_checked": self.points_checked, "pass": self.passed}


def covariant_phi(model, point):
    """(phi^i_{|j}, d phi^i / dy^j) at ``point``."""
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    return loc.hcov([p.truncate(1) for p in model.phi_jets(point, 1)])


def check_concurrent(model, sample, tol: float = CONCURRENCY_TOL,
                     cartan_tol: float = 1e-10) -> ConcurrencyReport:
    """Estimate c in phi^i_{|j} = c delta^i_j and the residuals over ``sample``.

    c is the mean diagonal at the first point.  Concurrency in the sense
    D_{beta W} phi = -W corresponds to c = -1.
    """
    points = [as_point(p) for p in sample]
    if not points:
        raise NoAdmissiblePoints("concurrency check needs at least one point")
    n = model.n
    c = None
    h_res = v_res = cart = 0.0
    for p in points:
        h, v = covariant_phi(model, p)
        if c is None:
            c = float(np.trace(h) / n)
        h_res = max(h_res, float(np.max(np.abs(h - c * np.eye(n)))))
        v_res = max(v_res, float(np.max(np.abs(v))))
        loc = local_geometry(model, p, 4)
        cart = max(cart, float(np.max(np.abs(np.einsum("i,ijk->jk", loc.phi, loc.cartan)))))
    return ConcurrencyReport(c, h_res, v_res, cart, len(points), tol, cartan_tol)


def _rel(left, right) -> float:
    left = np.atleast_1d(np.asarray(left, dtype=float))
    right = np.atleast_1d(np.asarray(right, dtype=float))
    scale = max(1.0, float(np.max(np.abs(left))), float(np.max(np.abs(right))))
    return float(np.max(np.abs(left - right))) / scale


def lemma_identities(model, point, c: float = -1.0) -> dict:
    """Left/right sides of the concurrency identities at ``point``.

    Returns ``{name: (left, right)}``.  ``c`` is the concurrency constant; the
    identities that follow from concurrency carry the factor -c, so with
    c = -1 they take their usual form (e.g. delta_j Phi = -F l_j).
    """
    point = as_point(point)
    loc = local_geometry(model, point, 4)
    n = loc.n
    F = loc.F
    Phi = loc.Phi_jet
    ell, phi_form = loc.ell, loc.phi_form
    grad_Phi = Phi.gradient()
    y = np.array(point.y)

    out = {}
    out["a: dPhi/dy = phi_form"] = (grad_Phi[n:], phi_form)
    out["c: delta Phi = c F l"] = ([loc.delta_value(Phi, j) for j in range(n)], c * F * ell)
    S_Phi = y @ grad_Phi[:n] - 2.0 * loc.spray @ grad_Phi[n:]
    out["c: dPhi(G) = c F^2"] = ([S_Phi], [c * F ** 2])
    out["d: delta F = 0"] = ([loc.delta_value(loc.F_jet, j) for j in range(n)], np.zeros(n))
    dl = np.array([[loc.ell_jets[i].diff(loc.yv(j)).value for j in range(n)] for i in range(n)])
    out["e: dl/dy = hbar/F"] = (dl, loc.hbar / F)
    B = loc.berwald
    D_ell = np.array([[loc.delta_value(loc.ell_jets[i], j) - ell @ B[:, i, j] for j in range(n)]
                      for i in range(n)])
    out["e: D_G l = 0"] = (D_ell @ y, np.zeros(n))
    f = loc.F2_jet / Phi
    Pv = Phi.value
    f_F, f_Phi = 2.0 * F / Pv, -F ** 2 / Pv ** 2
    out["f: d f(F,Phi)/dy chain rule"] = (f.gradient()[n:], f_F * ell + f_Phi * phi_form)
    out["norm: d|phi|^2/dy = 0"] = (loc.norm_sq_jet.gradient()[n:], np.zeros(n))
    return out


def lemma_suite(model, point, c: float = -1.0) -> dict:
    """Per-identity residual |L - R| / max(1, |L|, |R|) at ``point``."""
    return {k: _rel(l, r) for k, (l, r) in lemma_identities(model, point, c).items()}
