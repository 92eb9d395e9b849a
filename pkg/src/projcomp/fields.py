"""Chart-local tensor fields and the connection/curvature toolkit.

Fields are component functions evaluated into jets at a point.  Every
component function accepts a list of coordinate scalars (jets or floats)
and returns an object array of the same scalar type; derived fields
(Levi-Civita coefficients, Ricci, Schouten, ...) re-seed the coordinates
internally at a higher jet order, so a caller always receives components
exact to the order it asked for.

Curvature convention, fixed once for the whole engine:

    R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb
              + Gamma^a_ce Gamma^e_db - Gamma^a_de Gamma^e_cb
    Ric_bd  = R^a_bad

which makes the unit round sphere satisfy Ric = (m-1) gamma with positive
sign.  Connection coefficients are stored as Gamma[a, b, c] = Gamma^a_bc,
symmetric in (b, c) for torsion-free connections.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import jets
from .jets import Jet

__all__ = [
    "Chart",
    "TensorField",
    "MetricField",
    "ConnectionField",
    "ChartMap",
    "SingularMetricError",
    "ChartExitError",
    "levi_civita",
    "projective_change",
    "riemann",
    "ricci",
    "ricci_field",
    "einstein_residual",
    "projective_schouten",
    "projective_weyl",
    "covariant_derivative",
    "exterior_derivative",
    "transform_tensor",
    "transform_connection",
    "geodesic_integrate",
    "jet_matrix_inverse",
]


class SingularMetricError(ValueError):
    pass


class ChartExitError(RuntimeError):
    pass


# Evaluated symmetry assertions on TensorField (slow; used by tests)
DEBUG_SYMMETRY = False
_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class Chart:
    """Coordinate names plus a closed sampling box for randomized checks."""

    names: tuple
    box: tuple
    exclude: Optional[Callable] = None  # predicate: point -> True to reject

    def __post_init__(self):
        if len(self.names) != len(self.box) or len(self.names) < 1:
            raise ValueError("chart needs one (lo, hi) interval per coordinate")
        if len(set(self.names)) != len(self.names):
            raise ValueError("coordinate names must be distinct")
        for lo, hi in self.box:
            if not lo < hi:
                raise ValueError("empty sampling interval")

    @property
    def dim(self) -> int:
        return len(self.names)

    def seed(self, point, order: int) -> list:
        return jets.seed_point(point, order)

    def sample(self, rng, count: int = 1) -> np.ndarray:
        """Uniform points in the box, rejecting excluded loci."""
        lo = np.array([b[0] for b in self.box])
        hi = np.array([b[1] for b in self.box])
        out = []
        attempts = 0
        while len(out) < count:
            p = rng.uniform(lo, hi)
            attempts += 1
            if attempts > 1000 * count:
                raise RuntimeError("sampler rejection rate too high")
            if self.exclude is not None and self.exclude(p):
                continue
            out.append(p)
        return np.array(out)


def _as_object_array(comps) -> np.ndarray:
    if isinstance(comps, np.ndarray) and comps.dtype == object:
        return comps
    shape = np.shape(comps)
    arr = np.empty(shape, dtype=object)
    for idx in np.ndindex(shape):
        item = comps
        for i in idx:
            item = item[i]
        arr[idx] = item
    return arr


def _values(comps: np.ndarray) -> np.ndarray:
    out = np.empty(comps.shape)
    for idx in np.ndindex(comps.shape):
        out[idx] = jets.value_of(comps[idx])
    return out


@dataclass
class TensorField:
    """Chart-local tensor with jet-valued components.

    valence = (r, s): component array carries the r contravariant slots
    first, then the s covariant slots.  symmetric/antisymmetric flags refer
    to the full index block and are asserted on evaluation when
    fields.DEBUG_SYMMETRY is set.
    """

    chart: Chart
    valence: tuple
    func: Callable
    symmetric: bool = False
    antisymmetric: bool = False
    name: str = ""

    @property
    def rank(self) -> int:
        return self.valence[0] + self.valence[1]

    def at(self, point, order: int = 3) -> np.ndarray:
        comps = self.func(self.chart.seed(point, order))
        comps = _as_object_array(comps)
        if DEBUG_SYMMETRY and self.rank == 2 and (self.symmetric or self.antisymmetric):
            v = _values(comps)
            dev = np.max(np.abs(v - v.T)) if self.symmetric else np.max(np.abs(v + v.T))
            if dev > _SYMMETRY_TOL:
                raise AssertionError(f"declared symmetry violated by {dev:.3e} ({self.name})")
        return comps

    def values(self, point) -> np.ndarray:
        return _values(self.at(point, order=0))


@dataclass
class MetricField(TensorField):
    """Symmetric nondegenerate (0,2) field."""

    def __init__(self, chart, func, name=""):
        super().__init__(chart=chart, valence=(0, 2), func=func,
                         symmetric=True, name=name)

    def check_nondegenerate(self, rng, count: int = 100, tol: float = 1e-10) -> float:
        """Smallest |det g| over sampled points; raises if below tol."""
        worst = np.inf
        for p in self.chart.sample(rng, count):
            d = abs(np.linalg.det(self.values(p)))
            worst = min(worst, d)
        if worst <= tol:
            raise SingularMetricError(f"metric degenerate on box: |det| = {worst:.3e}")
        return worst


@dataclass
class ConnectionField:
    """Affine connection coefficients Gamma^a_bc on a chart."""

    chart: Chart
    func: Callable
    torsion_free: bool = True
    name: str = ""

    def coeffs(self, point, order: int = 1) -> np.ndarray:
        return _as_object_array(self.func(self.chart.seed(point, order)))

    def values(self, point) -> np.ndarray:
        return _values(self.coeffs(point, order=0))


def _reseed(coords, order: int) -> list:
    return jets.seed_point([c.value for c in coords], order)


def jet_matrix_inverse(G: np.ndarray) -> np.ndarray:
    """Invert a square object-array of jets by Gauss-Jordan elimination."""
    n = G.shape[0]
    A = [[G[i, j] for j in range(n)] for i in range(n)]
    proto = G[0, 0]
    one = Jet.constant(1.0, proto.num_vars, proto.order)
    zero = Jet.constant(0.0, proto.num_vars, proto.order)
    B = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(A[r][col].value))
        if abs(A[piv][col].value) < 1e-13:
            raise SingularMetricError("singular matrix in jet inversion")
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            B[col], B[piv] = B[piv], B[col]
        inv = one / A[col][col]
        A[col] = [inv * a for a in A[col]]
        B[col] = [inv * b for b in B[col]]
        for r in range(n):
            if r == col:
                continue
            f = A[r][col]
            if np.all(f.c == 0.0):
                continue
            A[r] = [a - f * p for a, p in zip(A[r], A[col])]
            B[r] = [b - f * p for b, p in zip(B[r], B[col])]
    out = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            out[i, j] = B[i][j]
    return out


# -- Levi-Civita and projective operations ----------------------------------


def levi_civita(g: MetricField) -> ConnectionField:
    """Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij)."""
    n = g.chart.dim

    def func(coords):
        o = coords[0].order
        up = _reseed(coords, o + 1)
        G = _as_object_array(g.func(up))
        Ginv = jet_matrix_inverse(G)
        dG = np.empty((n, n, n), dtype=object)  # dG[a,b,c] = d_a g_bc
        for b in range(n):
            for c in range(n):
                for a in range(n):
                    dG[a, b, c] = G[b, c].deriv(a)
        gamma = np.empty((n, n, n), dtype=object)
        for k in range(n):
            for i in range(n):
                for j in range(i, n):
                    acc = None
                    for l in range(n):
                        term = Ginv[k, l].truncate(o) * (dG[i, j, l] + dG[j, i, l] - dG[l, i, j])
                        acc = term if acc is None else acc + term
                    gamma[k, i, j] = acc * 0.5
                    gamma[k, j, i] = gamma[k, i, j]
        return gamma

    return ConnectionField(chart=g.chart, func=func, torsion_free=True,
                           name=f"LC({g.name})")


def projective_change(conn: ConnectionField, upsilon: TensorField) -> ConnectionField:
    """Gamma^k_ij + delta^k_i Y_j + delta^k_j Y_i for a one-form Y."""
    n = conn.chart.dim

    def func(coords):
        gamma = _as_object_array(conn.func(coords))
        U = _as_object_array(upsilon.func(coords))
        out = np.empty((n, n, n), dtype=object)
        for k in range(n):
            for i in range(n):
                for j in range(n):
                    t = gamma[k, i, j]
                    if k == i:
                        t = t + U[j]
                    if k == j:
                        t = t + U[i]
                    out[k, i, j] = t
        return out

    return ConnectionField(chart=conn.chart, func=func,
                           torsion_free=conn.torsion_free,
                           name=f"{conn.name}+proj")


def riemann(conn: ConnectionField, point) -> np.ndarray:
    """Curvature values R^a_bcd at a point."""
    n = conn.chart.dim
    gamma = conn.coeffs(point, order=1)
    gv = _values(gamma)
    dg = np.empty((n, n, n, n))  # dg[c,a,d,b] = d_c Gamma^a_db
    for c in range(n):
        for a in range(n):
            for d in range(n):
                for b in range(n):
                    dg[c, a, d, b] = gamma[a, d, b].deriv(c).value
    R = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(c + 1, n):
                    val = dg[c, a, d, b] - dg[d, a, c, b]
                    val += np.dot(gv[a, c, :], gv[:, d, b]) - np.dot(gv[a, d, :], gv[:, c, b])
                    R[a, b, c, d] = val
                    R[a, b, d, c] = -val
    return R


def ricci(conn: ConnectionField, point) -> np.ndarray:
    """Ric_bd = R^a_bad; no symmetry assumed."""
    R = riemann(conn, point)
    return np.einsum("abad->bd", R)


def ricci_field(conn: ConnectionField) -> TensorField:
    """Ricci tensor as a jet-valued (0,2) field."""
    n = conn.chart.dim

    def func(coords):
        o = coords[0].order
        gamma = _as_object_array(conn.func(_reseed(coords, o + 1)))
        ric = np.empty((n, n), dtype=object)
        for b in range(n):
            for d in range(n):
                acc = None
                for a in range(n):
                    t = gamma[a, d, b].deriv(a) - gamma[a, a, b].deriv(d)
                    for e in range(n):
                        t = t + (gamma[a, a, e] * gamma[e, d, b]
                                 - gamma[a, d, e] * gamma[e, a, b]).truncate(o)
                    acc = t if acc is None else acc + t
                ric[b, d] = acc
        return ric

    return TensorField(chart=conn.chart, valence=(0, 2), func=func,
                       name=f"Ric({conn.name})")


def einstein_residual(g: MetricField, points) -> tuple:
    """Fit the Einstein constant and report the worst residual.

    Returns (lam, max residual of ||Ric - lam g||_inf / ||g||_inf, lam spread).
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if len(points) < 2:
        raise ValueError("einstein_residual needs at least 2 points")
    conn = levi_civita(g)
    gs, rics, lams = [], [], []
    for p in points:
        gv = g.values(p)
        ric = ricci(conn, p)
        lams.append(np.trace(np.linalg.solve(gv, ric)) / g.chart.dim)
        gs.append(gv)
        rics.append(ric)
    lam = float(np.mean(lams))
    resid = max(
        np.max(np.abs(ric - lam * gv)) / np.max(np.abs(gv))
        for gv, ric in zip(gs, rics)
    )
    return lam, float(resid), float(np.ptp(lams))


def projective_schouten(conn: ConnectionField) -> TensorField:
    """P = Ric_sym/(n-1) - Ric_antisym/(n+1); solves Ric_ab = n P_ba - P_ab."""
    n = conn.chart.dim
    if n < 2:
        raise ValueError("projective Schouten tensor needs dimension >= 2")
    ric = ricci_field(conn)

    def func(coords):
        R = _as_object_array(ric.func(coords))
        P = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                sym = (R[i, j] + R[j, i]) * 0.5
                anti = (R[i, j] - R[j, i]) * 0.5
                P[i, j] = sym * (1.0 / (n - 1)) - anti * (1.0 / (n + 1))
        return P

    return TensorField(chart=conn.chart, valence=(0, 2), func=func,
                       name=f"P({conn.name})")


def projective_weyl(conn: ConnectionField, point) -> np.ndarray:
    """Totally trace-free curvature part W^a_bcd (projective invariant)."""
    n = conn.chart.dim
    R = riemann(conn, point)
    P = _values(projective_schouten(conn).at(point, order=0))
    W = R.copy()
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    if a == c:
                        W[a, b, c, d] -= P[d, b]
                    if a == d:
                        W[a, b, c, d] += P[c, b]
                    if a == b:
                        W[a, b, c, d] += P[c, d] - P[d, c]
    return W


def covariant_derivative(conn: ConnectionField, field: TensorField) -> TensorField:
    """nabla T as a (r, s+1) field; the new covariant slot comes first."""
    n = field.chart.dim
    r, s = field.valence

    def func(coords):
        o = coords[0].order
        up = _reseed(coords, o + 1)
        T = _as_object_array(field.func(up))
        gamma = _as_object_array(conn.func(_reseed(coords, o)))
        shape = (n,) + T.shape
        out = np.empty(shape, dtype=object)
        for c in range(n):
            for idx in np.ndindex(T.shape):
                acc = T[idx].deriv(c)
                for slot in range(r + s):
                    for e in range(n):
                        swapped = idx[:slot] + (e,) + idx[slot + 1:]
                        t = T[swapped].truncate(o)
                        if slot < r:
                            acc = acc + gamma[idx[slot], c, e] * t
                        else:
                            acc = acc - gamma[e, c, idx[slot]] * t
                out[(c,) + idx] = acc
        return out

    return TensorField(chart=field.chart, valence=(r, s + 1), func=func,
                       name=f"D({field.name})")


def exterior_derivative(omega: TensorField) -> TensorField:
    """(d omega)_{a0..ak} = (k+1) d_[a0 omega_a1..ak]."""
    if omega.valence[0] != 0:
        raise ValueError("exterior derivative needs a covariant form")
    k = omega.valence[1]
    n = omega.chart.dim
    if k >= n:
        raise ValueError("form degree exceeds chart dimension")

    def func(coords):
        o = coords[0].order
        W = _as_object_array(omega.func(_reseed(coords, o + 1)))
        out = np.empty((n,) * (k + 1), dtype=object)
        for idx in np.ndindex(out.shape):
            acc = None
            for j in range(k + 1):
                rest = idx[:j] + idx[j + 1:]
                term = W[rest].deriv(idx[j]) if k else W[()].deriv(idx[j])
                if j % 2 == 1:
                    term = -term
                acc = term if acc is None else acc + term
            out[idx] = acc
        return out

    return TensorField(chart=omega.chart, valence=(0, k + 1), func=func,
                       antisymmetric=True, name=f"d({omega.name})")


# -- chart maps --------------------------------------------------------------


@dataclass
class ChartMap:
    """Invertible map between charts, jet-evaluable both ways."""

    source: Chart
    target: Chart
    fwd: Callable  # source coords -> target coords
    inv: Callable  # target coords -> source coords


def _map_jets(cmap: ChartMap, target_point, order: int):
    """Source coordinates and Jacobian d(source)/d(target) as jets at a
    target-chart point."""
    ty = jets.seed_point(target_point, order + 1)
    xs = cmap.inv(ty)
    x0 = [x.value for x in xs]
    n = len(xs)
    Jac = np.empty((n, n), dtype=object)  # Jac[a, mu] = d x^a / d y^mu
    for a in range(n):
        for mu in range(n):
            Jac[a, mu] = xs[a].deriv(mu)
    return xs, x0, Jac


def transform_tensor(field: TensorField, cmap: ChartMap, target_point,
                     order: int = 1) -> np.ndarray:
    """Components of a source-chart tensor in the target chart at a point.

    Standard pushforward/pullback: one inverse-Jacobian factor per upper
    index, one Jacobian factor per lower index.  Output jets carry the
    requested order.
    """
    n = field.chart.dim
    r, s = field.valence
    xs, x0, Jac = _map_jets(cmap, target_point, order)
    piv = np.abs(_values(Jac))
    if np.linalg.matrix_rank(piv) < n or abs(np.linalg.det(_values(Jac))) < 1e-12:
        raise SingularMetricError("singular Jacobian in chart map")
    JacInv = jet_matrix_inverse(Jac)  # JacInv[mu, a] = d y^mu / d x^a
    comps_src = _as_object_array(field.func(jets.seed_point(x0, order)))
    # re-express source components as jets in the target coordinates
    comps = np.empty(comps_src.shape, dtype=object)
    inner = [x.truncate(order) for x in xs]
    for idx in np.ndindex(comps_src.shape):
        comps[idx] = jets.compose(comps_src[idx], inner)
    Jt = np.empty((n, n), dtype=object)
    Ji = np.empty((n, n), dtype=object)
    for i in range(n):
        for q in range(n):
            Jt[i, q] = Jac[i, q].truncate(order)
            Ji[i, q] = JacInv[i, q].truncate(order)
    out = np.empty(comps.shape, dtype=object)
    for oidx in np.ndindex(out.shape):
        acc = None
        for sidx in np.ndindex(comps.shape):
            factor = None
            for slot in range(r + s):
                f = (Ji[oidx[slot], sidx[slot]] if slot < r
                     else Jt[sidx[slot], oidx[slot]])
                factor = f if factor is None else factor * f
            term = comps[sidx] * factor if factor is not None else comps[sidx]
            acc = term if acc is None else acc + term
        out[oidx] = acc
    return out


def transform_connection(conn: ConnectionField, cmap: ChartMap, target_point,
                         order: int = 0) -> np.ndarray:
    """Connection coefficients in the target chart (with the inhomogeneous
    second-derivative term)."""
    n = conn.chart.dim
    xs, x0, Jac = _map_jets(cmap, target_point, order + 1)
    JacInv = jet_matrix_inverse(Jac)
    gamma_src = _as_object_array(conn.func(jets.seed_point(x0, order)))
    inner = [x.truncate(order) for x in xs]
    gamma = np.empty((n, n, n), dtype=object)
    for idx in np.ndindex((n, n, n)):
        gamma[idx] = jets.compose(gamma_src[idx], inner)
    B = np.empty((n, n), dtype=object)   # B[c, mu] = d x^c/d y^mu at order+1
    A = np.empty((n, n), dtype=object)   # A[gam, c] = d y^gam/d x^c
    for i in range(n):
        for q in range(n):
            B[i, q] = Jac[i, q]
            A[i, q] = JacInv[i, q].truncate(order)
    out = np.empty((n, n, n), dtype=object)
    for gam in range(n):
        for mu in range(n):
            for nu in range(n):
                acc = None
                for c in range(n):
                    inner_acc = B[c, mu].deriv(nu)  # d^2 x^c / dy^mu dy^nu
                    for a in range(n):
                        for b in range(n):
                            inner_acc = inner_acc + gamma[c, a, b] * (
                                B[a, mu].truncate(order) * B[b, nu].truncate(order))
                    term = A[gam, c] * inner_acc
                    acc = term if acc is None else acc + term
                out[gam, mu, nu] = acc
    return out


# -- geodesics ---------------------------------------------------------------


def geodesic_integrate(conn: ConnectionField, x0, v0, steps: int,
                       step_size: float, check_box: bool = True) -> np.ndarray:
    """Classical RK4 for x'' + Gamma(x)(x', x') = 0.

    Returns an array of shape (steps+1, 2*dim): positions then velocities.
    """
    n = conn.chart.dim
    lo = np.array([b[0] for b in conn.chart.box])
    hi = np.array([b[1] for b in conn.chart.box])

    def acc(x, v):
        G = conn.values(x)
        return -np.einsum("abc,b,c->a", G, v, v)

    def rhs(state):
        x, v = state[:n], state[n:]
        return np.concatenate([v, acc(x, v)])

    state = np.concatenate([np.asarray(x0, float), np.asarray(v0, float)])
    traj = [state.copy()]
    h = step_size
    for _ in range(steps):
        if check_box and (np.any(state[:n] < lo - 1e-9) or np.any(state[:n] > hi + 1e-9)):
            raise ChartExitError(f"geodesic left the chart box at {state[:n]}")
        k1 = rhs(state)
        k2 = rhs(state + 0.5 * h * k1)
        k3 = rhs(state + 0.5 * h * k2)
        k4 = rhs(state + h * k3)
        state = state + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        traj.append(state.copy())
    return np.array(traj)
