"""Truncated multivariate Taylor arithmetic (forward-mode jets).

A Jet stores the Taylor coefficients (partial derivatives divided by
multi-index factorials) of a scalar function at a basepoint, truncated at a
fixed total degree.  All arithmetic is exact at the stored order, so every
derivative the engine consumes downstream (Christoffel symbols, curvature,
exterior derivatives, Nijenhuis tensors) is a coefficient extraction, never a
finite difference.

Coefficients sit in a dense float64 array indexed by graded-lexicographic
multi-index order.  The per-(num_vars, order) index tables are cached in a
JetAlgebra; multiplication is a precomputed sparse convolution.

The elementary-function helpers (sin, cos, exp, ...) dispatch on type so the
same component code can run on plain floats, which is what the independent
finite-difference oracles in the test suite rely on.
"""

from __future__ import annotations

import math
from functools import lru_cache
from itertools import product as _iproduct

import numpy as np

__all__ = [
    "Jet",
    "JetAlgebra",
    "algebra",
    "compose",
    "constant",
    "variable",
    "seed_point",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "powc",
    "value_of",
]


class JetError(ValueError):
    pass


def _monomials(num_vars: int, order: int) -> list[tuple[int, ...]]:
    """All exponent tuples with total degree <= order, graded-lex order."""
    out = []
    for deg in range(order + 1):
        block = [m for m in _iproduct(range(deg + 1), repeat=num_vars) if sum(m) == deg]
        block.sort(reverse=True)
        out.extend(block)
    return out


class JetAlgebra:
    """Cached index tables for jets with a fixed (num_vars, order)."""

    def __init__(self, num_vars: int, order: int):
        if num_vars < 1 or order < 0:
            raise JetError(f"invalid jet shape ({num_vars}, {order})")
        self.num_vars = num_vars
        self.order = order
        self.monomials = _monomials(num_vars, order)
        self.size = len(self.monomials)
        self.index = {m: i for i, m in enumerate(self.monomials)}
        self.degree = np.array([sum(m) for m in self.monomials])

        # Sparse convolution table: coefficient k of a*b accumulates a[i]*b[j]
        # over all monomial pairs with m_i + m_j = m_k.  Pairs are stored
        # symmetrized (i < j handled as a[i]b[j] + a[j]b[i]) so that a*b and
        # b*a produce bitwise-identical coefficient arrays.
        I, J, K = [], [], []
        D, KD = [], []
        for i, mi in enumerate(self.monomials):
            di = sum(mi)
            for j, mj in enumerate(self.monomials[i:], start=i):
                if di + sum(mj) > order:
                    continue
                mk = tuple(a + b for a, b in zip(mi, mj))
                if i == j:
                    D.append(i)
                    KD.append(self.index[mk])
                else:
                    I.append(i)
                    J.append(j)
                    K.append(self.index[mk])
        self._mul_i = np.array(I, dtype=np.intp)
        self._mul_j = np.array(J, dtype=np.intp)
        self._mul_k = np.array(K, dtype=np.intp)
        self._mul_d = np.array(D, dtype=np.intp)
        self._mul_kd = np.array(KD, dtype=np.intp)

        # factorial(alpha) per monomial, for partial-derivative extraction
        self.fact = np.array(
            [math.prod(math.factorial(e) for e in m) for m in self.monomials],
            dtype=np.float64,
        )

        # Derivative tables: (src index, dst index, factor) per axis
        self._deriv: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
        if order >= 1:
            lower = algebra(num_vars, order - 1)
            for axis in range(num_vars):
                src, dst, fac = [], [], []
                for k, m in enumerate(lower.monomials):
                    up = list(m)
                    up[axis] += 1
                    src.append(self.index[tuple(up)])
                    dst.append(k)
                    fac.append(up[axis])
                self._deriv.append(
                    (np.array(src, dtype=np.intp), np.array(dst, dtype=np.intp),
                     np.array(fac, dtype=np.float64))
                )

    def mul(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        out = np.zeros(self.size)
        if self._mul_k.size:
            out += np.bincount(
                self._mul_k,
                weights=a[self._mul_i] * b[self._mul_j] + a[self._mul_j] * b[self._mul_i],
                minlength=self.size,
            )
        out += np.bincount(self._mul_kd, weights=a[self._mul_d] * b[self._mul_d],
                           minlength=self.size)
        return out


@lru_cache(maxsize=None)
def algebra(num_vars: int, order: int) -> JetAlgebra:
    return JetAlgebra(num_vars, order)


class Jet:
    """Immutable truncated Taylor polynomial of a scalar at a basepoint."""

    __slots__ = ("alg", "c")

    def __init__(self, alg: JetAlgebra, coeffs: np.ndarray):
        self.alg = alg
        self.c = coeffs

    # -- constructors ------------------------------------------------------

    @staticmethod
    def constant(value: float, num_vars: int, order: int) -> "Jet":
        alg = algebra(num_vars, order)
        c = np.zeros(alg.size)
        c[0] = value
        return Jet(alg, c)

    @staticmethod
    def variable(index: int, value: float, num_vars: int, order: int) -> "Jet":
        if not 0 <= index < num_vars:
            raise JetError(f"variable index {index} out of range for {num_vars} vars")
        alg = algebra(num_vars, order)
        c = np.zeros(alg.size)
        c[0] = value
        if order >= 1:
            unit = tuple(1 if i == index else 0 for i in range(num_vars))
            c[alg.index[unit]] = 1.0
        return Jet(alg, c)

    # -- inspection --------------------------------------------------------

    @property
    def value(self) -> float:
        return float(self.c[0])

    @property
    def num_vars(self) -> int:
        return self.alg.num_vars

    @property
    def order(self) -> int:
        return self.alg.order

    def coeff(self, multi_index) -> float:
        key = tuple(multi_index)
        if key not in self.alg.index:
            raise JetError(f"multi-index {key} beyond order {self.order}")
        return float(self.c[self.alg.index[key]])

    def partial(self, multi_index) -> float:
        """Raw partial derivative: alpha! times the Taylor coefficient."""
        key = tuple(multi_index)
        if key not in self.alg.index:
            raise JetError(f"multi-index {key} beyond order {self.order}")
        k = self.alg.index[key]
        return float(self.c[k] * self.alg.fact[k])

    def gradient(self) -> np.ndarray:
        """First-order coefficients as a vector."""
        g = np.zeros(self.num_vars)
        if self.order >= 1:
            for i in range(self.num_vars):
                unit = tuple(1 if j == i else 0 for j in range(self.num_vars))
                g[i] = self.c[self.alg.index[unit]]
        return g

    def __repr__(self):
        return f"Jet({self.num_vars}v,o{self.order}; value={self.value:.6g})"

    # -- structure ---------------------------------------------------------

    def _check(self, other: "Jet"):
        if self.alg is not other.alg:
            raise JetError(
                f"jet shape mismatch: ({self.num_vars},{self.order}) vs "
                f"({other.num_vars},{other.order})"
            )

    def truncate(self, order: int) -> "Jet":
        if order == self.order:
            return self
        if order > self.order:
            raise JetError("cannot extend a jet to higher order")
        alg = algebra(self.num_vars, order)
        return Jet(alg, self.c[: alg.size].copy())

    def deriv(self, axis: int) -> "Jet":
        """Partial derivative along one axis, one order lower."""
        if self.order < 1:
            raise JetError("jet order exhausted: cannot differentiate order-0 jet")
        src, dst, fac = self.alg._deriv[axis]
        lower = algebra(self.num_vars, self.order - 1)
        c = np.zeros(lower.size)
        c[dst] = self.c[src] * fac
        return Jet(lower, c)

    def eval_shift(self, delta) -> float:
        """Evaluate the Taylor polynomial at basepoint + delta."""
        delta = np.asarray(delta, dtype=float)
        total = 0.0
        for k, m in enumerate(self.alg.monomials):
            term = self.c[k]
            for i, e in enumerate(m):
                if e:
                    term *= delta[i] ** e
            total += term
        return float(total)

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.alg, self.c + other.c)
        c = self.c.copy()
        c[0] += other
        return Jet(self.alg, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet(self.alg, -self.c)

    def __sub__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.alg, self.c - other.c)
        c = self.c.copy()
        c[0] -= other
        return Jet(self.alg, c)

    def __rsub__(self, other):
        c = -self.c
        c[0] += other
        return Jet(self.alg, c)

    def __mul__(self, other):
        if isinstance(other, Jet):
            self._check(other)
            return Jet(self.alg, self.alg.mul(self.c, other.c))
        return Jet(self.alg, self.c * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other._reciprocal()
        return Jet(self.alg, self.c / other)

    def __rtruediv__(self, other):
        return self._reciprocal() * other

    def __pow__(self, p):
        if isinstance(p, int):
            if p < 0:
                return self._reciprocal() ** (-p)
            out = Jet.constant(1.0, self.num_vars, self.order)
            base = self
            k = p
            while k:
                if k & 1:
                    out = out * base
                base = base * base
                k >>= 1
            return out
        return powc(self, float(p))

    def _reciprocal(self) -> "Jet":
        u0 = self.value
        if u0 == 0.0:
            raise ZeroDivisionError("division by jet with zero constant term")
        coeffs = [(-1.0) ** k / u0 ** (k + 1) for k in range(self.order + 1)]
        return _apply_series(self, coeffs)


def _apply_series(u: Jet, coeffs) -> Jet:
    """Compose the univariate series sum(coeffs[k] * (u - u0)^k) with u."""
    du = Jet(u.alg, u.c.copy())
    du.c[0] = 0.0
    out = Jet.constant(coeffs[-1], u.num_vars, u.order)
    for k in range(len(coeffs) - 2, -1, -1):
        out = out * du + coeffs[k]
    return out


# -- elementary functions (float / Jet dispatch) ---------------------------

def sin(x):
    if not isinstance(x, Jet):
        return math.sin(x)
    u0 = x.value
    s, c = math.sin(u0), math.cos(u0)
    cycle = [s, c, -s, -c]
    coeffs = [cycle[k % 4] / math.factorial(k) for k in range(x.order + 1)]
    return _apply_series(x, coeffs)


def cos(x):
    if not isinstance(x, Jet):
        return math.cos(x)
    u0 = x.value
    s, c = math.sin(u0), math.cos(u0)
    cycle = [c, -s, -c, s]
    coeffs = [cycle[k % 4] / math.factorial(k) for k in range(x.order + 1)]
    return _apply_series(x, coeffs)


def exp(x):
    if not isinstance(x, Jet):
        return math.exp(x)
    e0 = math.exp(x.value)
    coeffs = [e0 / math.factorial(k) for k in range(x.order + 1)]
    return _apply_series(x, coeffs)


def log(x):
    if not isinstance(x, Jet):
        if x <= 0:
            raise JetError(f"log of non-positive value {x}")
        return math.log(x)
    u0 = x.value
    if u0 <= 0:
        raise JetError(f"log of jet with non-positive value {u0}")
    coeffs = [math.log(u0)]
    coeffs += [(-1.0) ** (k + 1) / (k * u0 ** k) for k in range(1, x.order + 1)]
    return _apply_series(x, coeffs)


def sqrt(x):
    return powc(x, 0.5)


def powc(x, p: float):
    """x ** p for constant real p."""
    if not isinstance(x, Jet):
        return float(x) ** p
    u0 = x.value
    if u0 <= 0:
        raise JetError(f"powc needs positive value, got {u0}")
    coeffs = []
    binom = 1.0
    for k in range(x.order + 1):
        coeffs.append(binom * u0 ** (p - k))
        binom *= (p - k) / (k + 1)
    return _apply_series(x, coeffs)


def value_of(x) -> float:
    return x.value if isinstance(x, Jet) else float(x)


def constant(value: float, num_vars: int, order: int) -> Jet:
    return Jet.constant(value, num_vars, order)


def variable(index: int, value: float, num_vars: int, order: int) -> Jet:
    return Jet.variable(index, value, num_vars, order)


def seed_point(point, order: int) -> list[Jet]:
    """Seed one jet variable per coordinate of a point."""
    point = list(point)
    n = len(point)
    return [Jet.variable(i, float(point[i]), n, order) for i in range(n)]


def compose(f: Jet, inner: list[Jet]) -> Jet:
    """Truncated composition: substitute inner jets into f's polynomial.

    inner[i].value must equal the i-th coordinate of f's basepoint; the
    result is the jet of f(g(y)) in the inner variables.
    """
    if len(inner) != f.num_vars:
        raise JetError("compose: wrong number of inner jets")
    alg_in = inner[0].alg
    order = min(f.order, alg_in.order)
    shifted = []
    for g in inner:
        dg = Jet(g.alg, g.c.copy())
        dg.c[0] = 0.0
        shifted.append(dg.truncate(order))
    # power cache: shifted[i] ** k
    powers = []
    for dg in shifted:
        row = [Jet.constant(1.0, dg.num_vars, order), dg]
        for _ in range(2, order + 1):
            row.append(row[-1] * dg)
        powers.append(row)
    out = Jet.constant(0.0, alg_in.num_vars, order)
    for k, m in enumerate(f.alg.monomials):
        ck = f.c[k]
        if ck == 0.0 or sum(m) > order:
            continue
        term = None
        for i, e in enumerate(m):
            if e:
                term = powers[i][e] if term is None else term * powers[i][e]
        out = out + ck if term is None else out + term * ck
    return out
