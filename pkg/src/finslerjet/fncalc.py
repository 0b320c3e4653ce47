"""Vector fields and vector 1-forms on the chart of TM, with their brackets.

A vector field is a callable ``(point, order) -> 2n jets`` and a vector 1-form
is a callable ``(point, order) -> 2n x 2n matrix of jets`` acting on column
vectors in the frame (d_x1..d_xn, d_y1..d_yn).  Jets of order 1 carry all the
derivative information a single bracket needs, so the brackets below evaluate
their arguments at order 1 and return plain vectors.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import expr as ex
from . import jets
from .geometry import ChartPoint, as_point, local_geometry
from .jets import Jet
from .kropina import psi_jets

Field = Callable[[ChartPoint, int], list]
Form = Callable[[ChartPoint, int], list]


def _lift(v, n_vars: int, order: int) -> Jet:
    if isinstance(v, Jet):
        return v.truncate(order) if v.order > order else v
    return Jet.constant(float(v), n_vars, order)


def _lift_vec(vec, n_vars, order):
    return [_lift(v, n_vars, order) for v in vec]


def _lift_mat(mat, n_vars, order):
    return [_lift_vec(row, n_vars, order) for row in mat]


# -- constructors -----------------------------------------------------------

def field_from_seeds(fn) -> Field:
    """Field from a function of the 2n seeded chart jets."""
    def field(point, order):
        point = as_point(point)
        return fn(jets.seed_all(point.x + point.y, order))
    return field


def field_from_strings(components, n: int) -> Field:
    """Field whose 2n components are expressions in x1..xn, y1..yn."""
    asts = [ex.parse(c, n) for c in components]

    def field(point, order):
        point = as_point(point)
        seeds = jets.seed_all(point.x + point.y, order)
        env = ex.chart_env(seeds[:n], seeds[n:])
        return [ex.evaluate(a, env) for a in asts]
    return field


def coordinate_field(a: int, n: int) -> Field:
    """The coordinate field d/dz^a (a < n: d_x, a >= n: d_y)."""
    def field(point, order):
        return [1.0 if b == a else 0.0 for b in range(2 * n)]
    return field


def liouville(n: int) -> Field:
    """C = y^i d_yi."""
    return field_from_seeds(lambda s: [0.0] * n + s[n:])


def spray_field(model) -> Field:
    """S = y^i d_xi - 2 G^i d_yi."""
    n = model.n

    def field(point, order):
        point = as_point(point)
        loc = local_geometry(model, point, order + 2)
        seeds = jets.seed_all(point.x + point.y, order)
        return seeds[n:] + [G * -2.0 for G in loc.spray_jets]
    return field


def constant_form(matrix) -> Form:
    matrix = np.asarray(matrix, dtype=float)
    return lambda point, order: matrix.tolist()


def form_from_seeds(fn) -> Form:
    def form(point, order):
        point = as_point(point)
        return fn(jets.seed_all(point.x + point.y, order))
    return form


def vertical_endomorphism(n: int) -> Form:
    """J = [[0, 0], [I, 0]]: d_xi -> d_yi, d_yi -> 0."""
    J = np.zeros((2 * n, 2 * n))
    J[n:, :n] = np.eye(n)
    return constant_form(J)


def identity_form(n: int) -> Form:
    return constant_form(np.eye(2 * n))


def _N_block(model, point, order):
    loc = local_geometry(model, as_point(point), order + 3)
    return loc.nonlinear_jets


def horizontal_projector(model) -> Form:
    """h = [[I, 0], [-N, 0]]."""
    n = model.n

    def form(point, order):
        N = _N_block(model, point, order)
        M = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            M[i][i] = 1.0
            for j in range(n):
                M[n + i][j] = -N[i][j]
        return M
    return form


def vertical_projector(model) -> Form:
    """v = [[0, 0], [N, I]]."""
    n = model.n

    def form(point, order):
        N = _N_block(model, point, order)
        M = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            M[n + i][n + i] = 1.0
            for j in range(n):
                M[n + i][j] = N[i][j]
        return M
    return form


def barthel_form(model) -> Form:
    """Gamma = 2h - I = [[I, 0], [-2N, -I]]."""
    n = model.n

    def form(point, order):
        N = _N_block(model, point, order)
        M = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            M[i][i] = 1.0
            M[n + i][n + i] = -1.0
            for j in range(n):
                M[n + i][j] = N[i][j] * -2.0
        return M
    return form


def kropina_difference_form(model, m: float, sigma: int = 1) -> Form:
    """Predicted Gamma_hat - Gamma for the change F^(m+1) Phi^(-m).

    Only the block from horizontal to vertical is non-zero; its column j is
    -Psi1 e_j - (d_yj Psi1) y + sigma (d_yj Psi2) phi.
    """
    n = model.n
    m = float(m)

    def form(point, order):
        point = as_point(point)
        loc = local_geometry(model, point, order + 3)
        F = loc.F_jet.truncate(order + 1)
        P1, P2 = psi_jets(m, F, loc.Phi_jet, loc.norm_sq_jet)
        dP1 = [P1.diff(n + j) for j in range(n)]
        dP2 = [P2.diff(n + j) for j in range(n)]
        seeds = jets.seed_all(point.x + point.y, order)
        phi = [p.truncate(order) for p in loc.phi_jets]
        M = [[0.0] * (2 * n) for _ in range(2 * n)]
        for i in range(n):
            for j in range(n):
                e = -P1.truncate(order) if i == j else 0.0
                M[n + i][j] = e - seeds[n + i] * dP1[j] + float(sigma) * phi[i] * dP2[j]
        return M
    return form


def difference_form(A: Form, B: Form) -> Form:
    def form(point, order):
        a, b = A(point, order), B(point, order)
        return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
    return form


def sum_form(A: Form, B: Form) -> Form:
    def form(point, order):
        a, b = A(point, order), B(point, order)
        return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]
    return form


def scaled_form(c: float, A: Form) -> Form:
    return lambda point, order: [[v * float(c) for v in row] for row in A(point, order)]


# -- jet-level operations ---------------------------------------------------

def _apply(M, W):
    out = []
    for row in M:
        acc = row[0] * W[0]
        for a in range(1, len(W)):
            acc = acc + row[a] * W[a]
        out.append(acc)
    return out


def _bracket(W, Z):
    """[W, Z]^a = W^b d_b Z^a - Z^b d_b W^a at the expansion point (order-0 jets)."""
    dim = len(W)
    out = []
    for a in range(dim):
        gZ = Z[a].gradient()
        gW = W[a].gradient()
        acc = None
        for b in range(dim):
            term = W[b].truncate(0) * float(gZ[b]) - Z[b].truncate(0) * float(gW[b])
            acc = term if acc is None else acc + term
        out.append(acc)
    return out


def _prep(point, order, n_vars, *objs):
    out = []
    for kind, obj in objs:
        v = obj(point, order)
        out.append(_lift_mat(v, n_vars, order) if kind == "form" else _lift_vec(v, n_vars, order))
    return out


def _values(vec):
    return np.array([jets.value_of(v) for v in vec])


def apply_field(K: Form, W: Field) -> Field:
    """The field K W."""
    def field(point, order):
        nv = 2 * as_point(point).n
        return _apply(_lift_mat(K(point, order), nv, order), _lift_vec(W(point, order), nv, order))
    return field


def bracket_field(W: Field, Z: Field) -> Field:
    """The field [W, Z]; evaluating it at order k evaluates W and Z at order k + 1."""
    def field(point, order):
        nv = 2 * as_point(point).n
        Wj = _lift_vec(W(point, order + 1), nv, order + 1)
        Zj = _lift_vec(Z(point, order + 1), nv, order + 1)
        out = []
        for a in range(nv):
            acc = None
            for b in range(nv):
                term = Wj[b] * Zj[a].diff(b) - Zj[b] * Wj[a].diff(b)
                acc = term if acc is None else acc + term
            out.append(acc)
        return out
    return field


# -- public evaluators ------------------------------------------------------

def lie_bracket(W: Field, Z: Field, point) -> np.ndarray:
    point = as_point(point)
    nv = 2 * point.n
    Wj, Zj = _prep(point, 1, nv, ("field", W), ("field", Z))
    return _values(_bracket(Wj, Zj))


def apply_form(K: Form, W: Field, point) -> np.ndarray:
    point = as_point(point)
    nv = 2 * point.n
    Kj, Wj = _prep(point, 0, nv, ("form", K), ("field", W))
    return _values(_apply(Kj, Wj))


def fn_bracket(K: Form, L: Form, W: Field, Z: Field, point) -> np.ndarray:
    """[K, L](W, Z) by the eight-term expansion

    [KW,LZ] + [LW,KZ] + KL[W,Z] + LK[W,Z] - K[LW,Z] - K[W,LZ] - L[KW,Z] - L[W,KZ].
    """
    point = as_point(point)
    nv = 2 * point.n
    Kj, Lj, Wj, Zj = _prep(point, 1, nv, ("form", K), ("form", L), ("field", W), ("field", Z))
    K0 = _lift_mat(Kj, nv, 0)
    L0 = _lift_mat(Lj, nv, 0)
    KW, LW, KZ, LZ = _apply(Kj, Wj), _apply(Lj, Wj), _apply(Kj, Zj), _apply(Lj, Zj)
    WZ = _bracket(Wj, Zj)
    out = (_values(_bracket(KW, LZ)) + _values(_bracket(LW, KZ))
           + _values(_apply(K0, _apply(L0, WZ))) + _values(_apply(L0, _apply(K0, WZ)))
           - _values(_apply(K0, _bracket(LW, Zj))) - _values(_apply(K0, _bracket(Wj, LZ)))
           - _values(_apply(L0, _bracket(KW, Zj))) - _values(_apply(L0, _bracket(Wj, KZ))))
    return out


def nijenhuis(L: Form, W: Field, Z: Field, point) -> np.ndarray:
    """N_L(W, Z) = [LW, LZ] + L^2 [W, Z] - L[LW, Z] - L[W, LZ]."""
    point = as_point(point)
    nv = 2 * point.n
    Lj, Wj, Zj = _prep(point, 1, nv, ("form", L), ("field", W), ("field", Z))
    L0 = _lift_mat(Lj, nv, 0)
    LW, LZ = _apply(Lj, Wj), _apply(Lj, Zj)
    return (_values(_bracket(LW, LZ)) + _values(_apply(L0, _apply(L0, _bracket(Wj, Zj))))
            - _values(_apply(L0, _bracket(LW, Zj))) - _values(_apply(L0, _bracket(Wj, LZ))))


@dataclass(frozen=True)
class CanonicalForms:
    J: np.ndarray
    C_field: np.ndarray
    h: np.ndarray
    v: np.ndarray
    Gamma: np.ndarray


def canonical_forms(model, point) -> CanonicalForms:
    """Matrices of J, h, v, Gamma and the components of C in the (d_x, d_y) frame."""
    point = as_point(point)
    n = model.n
    val = lambda F: np.array([[jets.value_of(v) for v in row] for row in F(point, 0)])
    return CanonicalForms(val(vertical_endomorphism(n)),
                          np.concatenate([np.zeros(n), point.y]),
                          val(horizontal_projector(model)),
                          val(vertical_projector(model)),
                          val(barthel_form(model)))


def curvature_from_projector(model, point) -> np.ndarray:
    """R^i_jk as the vertical part of -1/2 [h, h](d_xj, d_xk)."""
    point = as_point(point)
    n = model.n
    h = horizontal_projector(model)
    R = np.empty((n, n, n))
    for j in range(n):
        for k in range(n):
            out = -0.5 * fn_bracket(h, h, coordinate_field(j, n), coordinate_field(k, n), point)
            R[:, j, k] = out[n:]
    return R


def curvature_change(model, FF: Form, point) -> np.ndarray:
    """Vertical part of (-1/2 [h, FF] - 1/4 N_FF)(d_xj, d_xk), as an n x n x n array."""
    point = as_point(point)
    n = model.n
    h = horizontal_projector(model)
    out = np.empty((n, n, n))
    for j in range(n):
        for k in range(n):
            W, Z = coordinate_field(j, n), coordinate_field(k, n)
            v = -0.5 * fn_bracket(h, FF, W, Z, point) - 0.25 * nijenhuis(FF, W, Z, point)
            out[:, j, k] = v[n:]
    return out
