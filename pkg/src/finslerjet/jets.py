"""Truncated multivariate Taylor polynomials ("jets").

A :class:`Jet` stores the Taylor coefficients of a function of ``n_vars``
variables around a fixed point, for every multi-index of total degree at most
``order``.  Coefficients are kept in a dense array indexed by graded
lexicographic rank, so the coefficients of degree <= d always form a prefix of
the array and truncation is a slice.

Arithmetic is exact up to the truncation order.  Elementary functions (sqrt,
real powers, reciprocals) are applied by composing their univariate Taylor
series at the constant term with the nilpotent remainder of the input.
"""
from __future__ import annotations

import functools
import itertools
import math
from numbers import Real

import numpy as np

from .errors import (
    DivisionBySingularJet,
    DomainError,
    OrderError,
    SingularConstantMatrix,
)

DEFAULT_ORDER = 4
SINGULAR_RTOL = 1e-12


class _Basis:
    """Index tables for all monomials of ``n_vars`` variables up to ``order``."""

    def __init__(self, n_vars: int, order: int):
        self.n_vars = n_vars
        self.order = order
        mis = []
        for d in range(order + 1):
            # reverse lexicographic within a degree: (d,0,..) first
            level = [mi for mi in itertools.product(range(d + 1), repeat=n_vars)
                     if sum(mi) == d]
            level.sort(reverse=True)
            mis.extend(level)
        self.multi_indices = mis
        self.index = {mi: k for k, mi in enumerate(mis)}
        self.size = len(mis)
        self.factorials = np.array(
            [math.prod(math.factorial(e) for e in mi) for mi in mis], dtype=float)
        self._pairs = None
        self._diff = {}

    @property
    def pairs(self):
        # (i, j, k) with mi_i + mi_j = mi_k, degree <= order
        if self._pairs is None:
            ii, jj, kk = [], [], []
            degs = [sum(mi) for mi in self.multi_indices]
            for i, a in enumerate(self.multi_indices):
                for j, b in enumerate(self.multi_indices):
                    if degs[i] + degs[j] > self.order:
                        continue
                    ii.append(i)
                    jj.append(j)
                    kk.append(self.index[tuple(p + q for p, q in zip(a, b))])
            self._pairs = (np.array(ii), np.array(jj), np.array(kk))
        return self._pairs

    def diff_map(self, var: int):
        """Source indices and factors realising d/dv_var, into basis(order - 1)."""
        if var not in self._diff:
            lower = basis(self.n_vars, self.order - 1)
            src = np.empty(lower.size, dtype=int)
            fac = np.empty(lower.size)
            for t, mi in enumerate(lower.multi_indices):
                up = list(mi)
                up[var] += 1
                src[t] = self.index[tuple(up)]
                fac[t] = up[var]
            self._diff[var] = (src, fac)
        return self._diff[var]


@functools.lru_cache(maxsize=None)
def basis(n_vars: int, order: int) -> _Basis:
    return _Basis(n_vars, order)


def n_coeffs(n_vars: int, order: int) -> int:
    return math.comb(n_vars + order, order)


class Jet:
    """Truncated Taylor polynomial in ``n_vars`` variables.

    ``coeffs[k]`` is the Taylor coefficient (partial derivative divided by the
    multi-index factorial) of the k-th multi-index of ``basis(n_vars, order)``.
    Instances are treated as immutable.
    """

    __slots__ = ("n_vars", "order", "coeffs")
    __array_ufunc__ = None  # numpy scalars defer to our reflected operators

    def __init__(self, n_vars: int, order: int, coeffs):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (n_coeffs(n_vars, order),):
            raise ValueError(
                f"expected {n_coeffs(n_vars, order)} coefficients, got {coeffs.shape}")
        self.n_vars = n_vars
        self.order = order
        self.coeffs = coeffs

    # -- construction -------------------------------------------------------

    @classmethod
    def constant(cls, value: float, n_vars: int, order: int) -> "Jet":
        c = np.zeros(n_coeffs(n_vars, order))
        c[0] = value
        return cls(n_vars, order, c)

    @classmethod
    def variable(cls, index: int, value: float, n_vars: int, order: int) -> "Jet":
        return seed_variable(index, value, n_vars, order)

    # -- inspection ---------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    @property
    def basis(self) -> _Basis:
        return basis(self.n_vars, self.order)

    def coefficient(self, mi) -> float:
        mi = tuple(mi)
        if sum(mi) > self.order:
            return 0.0
        return float(self.coeffs[self.basis.index[mi]])

    def partial(self, mi) -> float:
        return partial(self, mi)

    def gradient(self) -> np.ndarray:
        if self.order < 1:
            raise OrderError("gradient needs order >= 1")
        idx = [self.basis.index[_unit(v, self.n_vars)] for v in range(self.n_vars)]
        return self.coeffs[idx].copy()

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise OrderError(f"cannot raise jet order {self.order} to {order}")
        return Jet(self.n_vars, order, self.coeffs[:n_coeffs(self.n_vars, order)])

    def diff(self, var: int) -> "Jet":
        """Derivative with respect to variable ``var``; the order drops by one."""
        if self.order < 1:
            raise OrderError("cannot differentiate an order-0 jet")
        src, fac = self.basis.diff_map(var)
        return Jet(self.n_vars, self.order - 1, self.coeffs[src] * fac)

    def scale(self) -> float:
        return float(np.max(np.abs(self.coeffs)))

    def __repr__(self):
        terms = []
        for mi, c in zip(self.basis.multi_indices, self.coeffs):
            if c != 0.0:
                terms.append(f"{mi}: {c:.6g}")
        return f"Jet(n_vars={self.n_vars}, order={self.order}, {{{', '.join(terms)}}})"

    # -- arithmetic ---------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Jet):
            if other.n_vars != self.n_vars:
                raise ValueError("jets over different variable counts")
            k = min(self.order, other.order)
            return self.truncate(k), other.truncate(k)
        if isinstance(other, (Real, np.floating, np.integer)):
            return self, Jet.constant(float(other), self.n_vars, self.order)
        return None

    def __add__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.n_vars, a.order, a.coeffs + b.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.n_vars, self.order, -self.coeffs)

    def __pos__(self):
        return self

    def __sub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.n_vars, a.order, a.coeffs - b.coeffs)

    def __rsub__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return Jet(a.n_vars, a.order, b.coeffs - a.coeffs)

    def __mul__(self, other):
        if isinstance(other, (Real, np.floating, np.integer)):
            return Jet(self.n_vars, self.order, self.coeffs * float(other))
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        if a.order == 0:
            return Jet(a.n_vars, 0, a.coeffs * b.coeffs)
        ii, jj, kk = a.basis.pairs
        out = np.bincount(kk, weights=a.coeffs[ii] * b.coeffs[jj], minlength=a.basis.size)
        return Jet(a.n_vars, a.order, out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (Real, np.floating, np.integer)):
            other = float(other)
            if other == 0.0:
                raise DivisionBySingularJet("division by zero scalar")
            return Jet(self.n_vars, self.order, self.coeffs / other)
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        return _divide(*pair)

    def __rtruediv__(self, other):
        pair = self._coerce(other)
        if pair is None:
            return NotImplemented
        a, b = pair
        return _divide(b, a)

    def __pow__(self, exponent):
        return power(self, exponent)

    def sqrt(self) -> "Jet":
        return sqrt(self)

    def reciprocal(self) -> "Jet":
        return 1.0 / self


def _unit(v: int, n: int) -> tuple:
    return tuple(1 if k == v else 0 for k in range(n))


def _check_divisor(b: Jet):
    c0 = b.coeffs[0]
    if abs(c0) <= SINGULAR_RTOL * max(b.scale(), 1e-300):
        raise DivisionBySingularJet(f"divisor constant term {c0!r} is singular")


def _divide(a: Jet, b: Jet) -> Jet:
    _check_divisor(b)
    b0 = float(b.coeffs[0])
    h = Jet(b.n_vars, b.order, np.concatenate(([0.0], b.coeffs[1:])))
    # fixed-point q = (a - h q) / b0 gains one degree per sweep
    q = Jet(a.n_vars, a.order, a.coeffs / b0)
    for _ in range(a.order):
        q = Jet(a.n_vars, a.order, (a - h * q).coeffs / b0)
    return q


def _compose(x: Jet, series) -> Jet:
    """Evaluate sum_k series[k] * (x - x0)^k by Horner's rule."""
    h = Jet(x.n_vars, x.order, np.concatenate(([0.0], x.coeffs[1:])))
    out = Jet.constant(series[-1], x.n_vars, x.order)
    for a_k in series[-2::-1]:
        out = out * h
        c = out.coeffs.copy()
        c[0] += a_k
        out = Jet(x.n_vars, x.order, c)
    return out


def _binomial_series(p: float, c0: float, order: int):
    """Taylor coefficients of t -> t**p at t = c0 up to ``order``."""
    coeffs = [c0 ** p]
    binom = 1.0
    for k in range(1, order + 1):
        binom *= (p - k + 1) / k
        coeffs.append(binom * c0 ** (p - k))
    return coeffs


def _is_integer(p) -> bool:
    return float(p).is_integer()


def _int_pow(v, k: int):
    """v**k for integer k >= 0 by binary exponentiation; used for floats and jets alike."""
    result = None
    base = v
    while k:
        if k & 1:
            result = base if result is None else result * base
        k >>= 1
        if k:
            base = base * base
    return 1.0 if result is None else result


def power(v, p):
    """Real power with the same algorithm for floats and jets."""
    p = float(p)
    if _is_integer(p):
        k = int(p)
        if k >= 0:
            out = _int_pow(v, k)
            if isinstance(v, Jet) and not isinstance(out, Jet):
                return Jet.constant(out, v.n_vars, v.order)
            return out
        denom = _int_pow(v, -k)
        if isinstance(denom, Jet):
            return 1.0 / denom
        if denom == 0.0:
            raise DivisionBySingularJet("zero base raised to a negative power")
        return 1.0 / denom
    if isinstance(v, Jet):
        c0 = float(v.coeffs[0])
        if not c0 > 0.0:
            raise DomainError(f"non-integer power {p} of non-positive base {c0!r}")
        return _compose(v, _binomial_series(p, c0, v.order))
    v = float(v)
    if not v > 0.0:
        raise DomainError(f"non-integer power {p} of non-positive base {v!r}")
    return v ** p


def sqrt(v):
    if isinstance(v, Jet):
        c0 = float(v.coeffs[0])
        if not c0 > 0.0:
            raise DomainError(f"sqrt of non-positive base {c0!r}")
        series = _binomial_series(0.5, c0, v.order)
        series[0] = math.sqrt(c0)
        return _compose(v, series)
    v = float(v)
    if not v > 0.0:
        raise DomainError(f"sqrt of non-positive base {v!r}")
    return math.sqrt(v)


def divide(a, b):
    """a / b for floats or jets; a zero float divisor raises DivisionBySingularJet."""
    if not isinstance(a, Jet) and not isinstance(b, Jet):
        if float(b) == 0.0:
            raise DivisionBySingularJet("division by zero")
        return float(a) / float(b)
    return a / b


def seed_variable(index: int, value: float, n_vars: int, order: int = DEFAULT_ORDER) -> Jet:
    """Jet of the coordinate function v_index at the point where it equals ``value``."""
    if not 0 <= index < n_vars:
        raise IndexError(f"variable index {index} out of range for {n_vars} variables")
    if order < 0:
        raise ValueError("order must be non-negative")
    c = np.zeros(n_coeffs(n_vars, order))
    c[0] = value
    if order >= 1:
        c[basis(n_vars, order).index[_unit(index, n_vars)]] = 1.0
    return Jet(n_vars, order, c)


def seed_all(values, order: int = DEFAULT_ORDER) -> list:
    values = [float(v) for v in values]
    return [seed_variable(k, v, len(values), order) for k, v in enumerate(values)]


def partial(j: Jet, mi) -> float:
    """Mixed partial derivative of ``j`` for multi-index ``mi``."""
    mi = tuple(int(e) for e in mi)
    if len(mi) != j.n_vars or min(mi, default=0) < 0:
        raise ValueError(f"bad multi-index {mi} for {j.n_vars} variables")
    if sum(mi) > j.order:
        raise OrderError(f"derivative of degree {sum(mi)} exceeds jet order {j.order}")
    k = j.basis.index[mi]
    return float(j.coeffs[k] * j.basis.factorials[k])


def as_jet(v, template: Jet) -> Jet:
    if isinstance(v, Jet):
        return v
    return Jet.constant(float(v), template.n_vars, template.order)


def value_of(v) -> float:
    return v.value if isinstance(v, Jet) else float(v)


def values(matrix) -> np.ndarray:
    """Constant terms of a (nested) list of jets as an array."""
    return np.vectorize(value_of, otypes=[float])(np.array(matrix, dtype=object))


def jet_linear_solve(A, b):
    """Solve A x = b over the jet ring by Gaussian elimination.

    ``A`` is a square list of lists of jets; ``b`` is a list of jets (one
    right-hand side) or a list of lists (several right-hand sides as columns of
    a matrix).  Pivoting is partial, on the magnitude of constant terms.
    """
    n = len(A)
    multi = isinstance(b[0], (list, tuple))
    rhs = [list(row) for row in b] if multi else [[v] for v in b]
    M = [list(row) + rhs[i] for i, row in enumerate(A)]
    width = len(M[0])
    scale = max((abs(value_of(v)) for row in A for v in row), default=0.0)
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(value_of(M[r][col])))
        if abs(value_of(M[piv][col])) <= SINGULAR_RTOL * max(scale, 1e-300):
            raise SingularConstantMatrix(f"constant-term matrix is singular at column {col}")
        M[col], M[piv] = M[piv], M[col]
        inv = 1.0 / M[col][col]
        M[col] = [M[col][c] * inv for c in range(width)]
        for r in range(n):
            if r == col:
                continue
            f = M[r][col]
            if isinstance(f, Jet) and not np.any(f.coeffs):
                continue
            M[r] = [M[r][c] - f * M[col][c] for c in range(width)]
    sol = [row[n:] for row in M]
    return sol if multi else [row[0] for row in sol]
