import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerjet import jets
from finslerjet.errors import (DivisionBySingularJet, DomainError, OrderError,
                               SingularConstantMatrix)
from finslerjet.jets import Jet, partial, seed_all, seed_variable


def test_seed_variable_coefficients():
    j = seed_variable(0, 3.0, 2, 2)
    assert j.coefficient((0, 0)) == 3.0
    assert j.coefficient((1, 0)) == 1.0
    nonzero = {mi for mi, c in zip(j.basis.multi_indices, j.coeffs) if c}
    assert nonzero == {(0, 0), (1, 0)}


def test_seed_partial_is_one():
    j = seed_variable(1, -1.0, 3, 4)
    assert partial(j, (0, 1, 0)) == 1.0
    assert partial(j, (1, 0, 0)) == 0.0


def test_sum_of_seeds():
    u, v = seed_all([2.0, 5.0], 3)
    s = u + v
    assert s.value == 7.0
    assert list(s.gradient()) == [1.0, 1.0]


def test_seed_rejects_bad_index():
    with pytest.raises(IndexError):
        seed_variable(2, 0.0, 2, 2)


def test_square_second_derivative():
    (u,) = seed_all([1.0], 2)
    assert partial(u * u, (2,)) == 2.0


def test_sqrt_first_derivative():
    (v,) = seed_all([4.0], 3)
    assert partial(jets.sqrt(v), (1,)) == pytest.approx(0.25, rel=1e-15)


def test_mixed_partial_uv2():
    u, v = seed_all([1.0, 2.0], 3)
    assert partial(u * v * v, (1, 1)) == pytest.approx(4.0, rel=1e-15)


def test_fourth_power_fourth_derivative():
    (u,) = seed_all([1.0], 4)
    assert partial(u ** 4, (4,)) == pytest.approx(24.0, rel=1e-15)


def test_constant_partials():
    c = Jet.constant(3.5, 2, 3)
    assert partial(c, (0, 0)) == 3.5
    for mi in [(1, 0), (0, 2), (1, 2)]:
        assert partial(c, mi) == 0.0


def test_partial_order_error():
    (u,) = seed_all([1.0], 2)
    with pytest.raises(OrderError):
        partial(u, (3,))


def test_division_by_singular_jet():
    u, v = seed_all([1.0, 0.0], 2)
    with pytest.raises(DivisionBySingularJet):
        u / v


def test_domain_errors():
    (u,) = seed_all([-1.0], 2)
    with pytest.raises(DomainError):
        jets.sqrt(u)
    with pytest.raises(DomainError):
        jets.power(u, 0.5)
    # integer powers of negative bases are fine
    assert jets.power(u, 3).value == -1.0


def test_negative_real_power():
    (u,) = seed_all([2.0], 3)
    r = jets.power(u, -1.5)
    # d/du u^-1.5 = -1.5 u^-2.5, d2 = 3.75 u^-3.5
    assert partial(r, (1,)) == pytest.approx(-1.5 * 2 ** -2.5, rel=1e-14)
    assert partial(r, (2,)) == pytest.approx(3.75 * 2 ** -3.5, rel=1e-14)


def test_power_float_matches_jet_constant_term():
    (u,) = seed_all([1.7], 4)
    for p in [2, 3, 7, -2, 0.5, 1.5, -2.5]:
        assert jets.power(u, p).value == jets.power(1.7, p)


def test_mixed_order_truncates():
    a = seed_variable(0, 1.0, 2, 4)
    b = seed_variable(1, 2.0, 2, 2)
    assert (a * b).order == 2


def test_numpy_scalar_defers_to_jet():
    (u,) = seed_all([2.0], 2)
    r = np.float64(3.0) * u
    assert isinstance(r, Jet) and r.value == 6.0
    r = np.float64(1.0) / u
    assert isinstance(r, Jet) and partial(r, (1,)) == pytest.approx(-0.25)


# -- linear solve -------------------------------------------------------------

def _const(v, n=2, order=2):
    return Jet.constant(v, n, order)


def test_solve_identity():
    u, v = seed_all([1.0, 2.0], 2)
    A = [[_const(1.0), _const(0.0)], [_const(0.0), _const(1.0)]]
    x = jets.jet_linear_solve(A, [u, v * v])
    assert np.allclose(x[0].coeffs, u.coeffs)
    assert np.allclose(x[1].coeffs, (v * v).coeffs)


def test_solve_scalar_system():
    A = [[_const(2.0), _const(0.0)], [_const(0.0), _const(2.0)]]
    x = jets.jet_linear_solve(A, [_const(1.0), _const(1.0)])
    assert [xi.value for xi in x] == [0.5, 0.5]


def test_solve_flat_metric(flat, flat_points):
    from finslerjet.geometry import local_geometry
    loc = local_geometry(flat, flat_points[0], 4)
    n = 3
    for i in range(n):
        e = [Jet.constant(float(i == k), 6, 2) for k in range(n)]
        x = jets.jet_linear_solve(loc.g_jets, e)
        assert np.allclose([xi.value for xi in x], np.eye(n)[i], atol=1e-14)


def test_solve_singular():
    A = [[_const(1.0), _const(2.0)], [_const(2.0), _const(4.0)]]
    with pytest.raises(SingularConstantMatrix):
        jets.jet_linear_solve(A, [_const(1.0), _const(1.0)])


# -- properties ---------------------------------------------------------------

coef = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


N_VARS, ORDER = 2, 3
SIZE = jets.n_coeffs(N_VARS, ORDER)
jet_st = st.lists(coef, min_size=SIZE, max_size=SIZE).map(
    lambda c: Jet(N_VARS, ORDER, np.array(c)))


def _sub_indices(mi):
    return itertools.product(*[range(e + 1) for e in mi])


@settings(max_examples=60, deadline=None)
@given(jet_st, jet_st)
def test_leibniz(a, b):
    ab = a * b
    for mi in ab.basis.multi_indices:
        expect = 0.0
        for nu in _sub_indices(mi):
            rest = tuple(m - k for m, k in zip(mi, nu))
            binom = math.prod(math.comb(m, k) for m, k in zip(mi, nu))
            expect += binom * partial(a, nu) * partial(b, rest)
        got = partial(ab, mi)
        assert abs(got - expect) <= 1e-10 * max(1.0, abs(expect))


@settings(max_examples=60, deadline=None)
@given(jet_st, jet_st, jet_st)
def test_ring_laws(a, b, c):
    tol = 1e-12 * max(1.0, a.scale(), b.scale(), c.scale()) ** 3
    assert np.allclose((a + b).coeffs, (b + a).coeffs, atol=1e-12)
    assert np.allclose((a * b).coeffs, (b * a).coeffs, atol=tol)
    assert np.allclose(((a + b) + c).coeffs, (a + (b + c)).coeffs, atol=1e-12)
    assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=tol)
    assert np.allclose((a * (b + c)).coeffs, (a * b + a * c).coeffs, atol=tol)


@settings(max_examples=60, deadline=None)
@given(jet_st)
def test_reciprocal(a):
    if abs(a.value) < 0.5:
        a = a + (1.0 if a.value >= 0 else -1.0)
    one = a * (1.0 / a)
    expect = Jet.constant(1.0, N_VARS, ORDER).coeffs
    assert np.allclose(one.coeffs, expect, atol=1e-10 * max(1.0, a.scale()) ** 4)


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_solve_then_multiply(seed):
    rng = np.random.default_rng(seed)
    n, nv, order = 3, 2, 3
    size = jets.n_coeffs(nv, order)
    A = []
    for i in range(n):
        row = []
        for k in range(n):
            c = rng.normal(size=size) * 0.3
            c[0] += 3.0 if i == k else 0.0
            row.append(Jet(nv, order, c))
        A.append(row)
    b = [Jet(nv, order, rng.normal(size=size)) for _ in range(n)]
    x = jets.jet_linear_solve(A, b)
    for i in range(n):
        acc = A[i][0] * x[0] + A[i][1] * x[1] + A[i][2] * x[2]
        assert np.allclose(acc.coeffs, b[i].coeffs, atol=1e-9)


def _fd_first(f, z, a, h=1e-5):
    e = np.zeros_like(z)
    e[a] = h
    return (f(z + e) - f(z - e)) / (2 * h)


def _fd_second(f, z, a, b, h=1e-5):
    ea = np.zeros_like(z)
    eb = np.zeros_like(z)
    ea[a] = h
    eb[b] = h
    return (f(z + ea + eb) - f(z + ea - eb) - f(z - ea + eb) + f(z - ea - eb)) / (4 * h * h)


@pytest.mark.parametrize("text", [
    "sqrt((y1)^2 + (x1)^2*(y2)^3/y1)",
    "x1*y1 + (x2)^2/(1 + (y2)^2)",
    "((y1)^2 + (y2)^2)^(3/4) * x1",
    "1/sqrt(x1 + y1^2)",
])
def test_fd_agreement(text):
    from finslerjet import expr as ex
    ast = ex.parse(text, 2)
    z0 = np.array([1.2, 0.3, 0.8, 1.1])

    def f(z):
        return ex.evaluate(ast, ex.chart_env(z[:2], z[2:]))

    seeds = seed_all(z0, 2)
    j = ex.evaluate(ast, ex.chart_env(seeds[:2], seeds[2:]))
    for a in range(4):
        fd = _fd_first(f, z0, a)
        mi = tuple(int(k == a) for k in range(4))
        assert partial(j, mi) == pytest.approx(fd, rel=1e-5, abs=1e-8)
        for b in range(4):
            fd2 = _fd_second(f, z0, a, b)
            mi2 = tuple(int(k == a) + int(k == b) for k in range(4))
            assert partial(j, mi2) == pytest.approx(fd2, rel=1e-5, abs=1e-5)
