"""Para-complex layer: J, the Libermann connection, Nijenhuis tensor, the
boundary contact data, and the full compactification check for the
canonical neutral Einstein metrics.

Orientation conventions (recorded, then validated exactly by the flat
model):

* J solves Omega(X, Y) = g(JX, Y), i.e. J^a_b = g^ac Omega_bc.  With the
  catalog's Omega materialization this is the involution that equals +1 on
  the horizontal distribution, and both stated forms of theta agree:
  theta_a = (dT o J)_a = Omega_ac g^bc d_b T.
* The boundary Levi form is normalized as
      levi(U, V) = -1/2 * dtheta0(J_D U, V)
  with dtheta0 in the engine's (k+1) d_[..] convention and J_D the
  boundary projection of J (substitute dY -> theta0/2 - Z_A dX^A, discard
  theta0 terms).  The -1/2 is the unique global constant making the flat
  model exact; it is a convention bridge, not a fitted number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import jets
from .fields import (Chart, ChartMap, ConnectionField, MetricField,
                     TensorField, covariant_derivative, exterior_derivative,
                     jet_matrix_inverse, levi_civita)
from .compactify import CompactificationSpec, ExtensionVerdict, extend_to_boundary
from .catalog import (ProjectiveStructure, dm_boundary_chart, dm_boundary_map,
                      dm_metric)
from .jets import Jet

__all__ = [
    "ParaHermitianTriple",
    "j_from_g_omega",
    "para_hermitian_residuals",
    "libermann",
    "nijenhuis",
    "para_c_projective_change",
    "theta_field",
    "h_tc_field",
    "pullback_field",
    "dm_boundary_fields",
    "boundary_t_coordinate",
    "boundary_data",
    "boundary_theta_closed",
    "boundary_h_closed",
    "levi_compatibility_check",
    "contact_nondegeneracy",
    "nijenhuis_tangential_check",
    "full_compactification_check",
]

LEVI_BRIDGE = -0.5  # levi = LEVI_BRIDGE * dtheta0(J_D ., .)


class ParaCompatibilityError(ValueError):
    pass


@dataclass
class ParaHermitianTriple:
    """A compatible (g, Omega, J): J^2 = Id, g(J., J.) = -g, Omega = g(J., .)."""

    g: MetricField
    omega: TensorField
    j: TensorField

    @staticmethod
    def from_pair(g: MetricField, omega: TensorField, probe=None) -> "ParaHermitianTriple":
        return ParaHermitianTriple(g=g, omega=omega,
                                   j=j_from_g_omega(g, omega, probe=probe))

    def residuals(self, points) -> dict:
        return para_hermitian_residuals(self.g, self.omega, self.j, points)


# -- J, invariants, Libermann -------------------------------------------------


def j_from_g_omega(g: MetricField, omega: TensorField,
                   probe=None) -> TensorField:
    """The endomorphism with Omega(X, Y) = g(JX, Y); fails loudly when no
    index pairing of (g, Omega) yields an involution."""
    n = g.chart.dim

    def func(coords):
        G = np.asarray(g.func(coords), dtype=object)
        W = np.asarray(omega.func(coords), dtype=object)
        Ginv = jet_matrix_inverse(G)
        J = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                acc = None
                for c in range(n):
                    t = Ginv[a, c] * W[b, c]
                    acc = t if acc is None else acc + t
                J[a, b] = acc
        return J

    jf = TensorField(chart=g.chart, valence=(1, 1), func=func,
                     name=f"J({g.name})")
    if probe is None:
        probe = [0.5 * (lo + hi) for lo, hi in g.chart.box]
    Jv = np.asarray(jf.values(probe))
    dev = np.max(np.abs(Jv @ Jv - np.eye(n)))
    if dev > 1e-8:
        dev2 = np.max(np.abs((-Jv) @ (-Jv) - np.eye(n)))
        raise ParaCompatibilityError(
            f"no index pairing yields J^2 = Id (residuals {dev:.2e}, {dev2:.2e})")
    return jf


def para_hermitian_residuals(g: MetricField, omega: TensorField,
                             jf: TensorField, points) -> dict:
    """Pointwise residuals of the para-Hermitian triple identities."""
    n = g.chart.dim
    eye = np.eye(n)
    out = {"involution": 0.0, "anti_isometry": 0.0, "pairing": 0.0}
    for p in np.atleast_2d(points):
        G = g.values(p)
        W = omega.values(p)
        J = jf.values(p)
        out["involution"] = max(out["involution"], np.max(np.abs(J @ J - eye)))
        out["anti_isometry"] = max(out["anti_isometry"], np.max(np.abs(J.T @ G @ J + G)))
        out["pairing"] = max(out["pairing"], np.max(np.abs(J.T @ G - W)))
    domega = exterior_derivative(omega)
    out["closed"] = max(
        float(np.max(np.abs(_values_of(domega.at(p, order=0)))))
        for p in np.atleast_2d(points))
    return out


def libermann(g: MetricField, omega: TensorField) -> ConnectionField:
    """The minimal-torsion connection preserving g and J:

        GammaL^c_ab = Gamma(g)^c_ab - 1/2 Omega^cd nabla^g_a Omega_bd,

    equivalently Gamma(g) + 1/2 J (nabla^g_a J) as an endomorphism.  The
    correction is -1/2 Omega^cd nabla Omega with the derivative along the
    connection direction and the second form slot contracted; this is the
    unique index arrangement that makes nabla^L g = nabla^L J = 0 hold
    identically, with torsion T^c_ab = -1/2 N^c_ab (recorded constant).
    """
    n = g.chart.dim
    conn_g = levi_civita(g)
    nabla_omega = covariant_derivative(conn_g, omega)

    def func(coords):
        gamma = np.asarray(conn_g.func(coords), dtype=object)
        W = np.asarray(omega.func(coords), dtype=object)
        Winv = jet_matrix_inverse(W)
        NO = np.asarray(nabla_omega.func(coords), dtype=object)  # [d][a][b]
        out = np.empty((n, n, n), dtype=object)
        for c in range(n):
            for a in range(n):
                for b in range(n):
                    acc = None
                    for d in range(n):
                        t = Winv[c, d] * NO[a, b, d]
                        acc = t if acc is None else acc + t
                    out[c, a, b] = gamma[c, a, b] - 0.5 * acc
        return out

    return ConnectionField(chart=g.chart, func=func, torsion_free=False,
                           name=f"Libermann({g.name})")


def nijenhuis(jf: TensorField) -> TensorField:
    """N^a_bc = J^d_[b d_|d| J^a_c] - J^d_[b d_c] J^a_d (antisymmetrized
    with the 1/2 convention)."""
    n = jf.chart.dim

    def func(coords):
        o = coords[0].order
        up = jets.seed_point([c.value for c in coords], o + 1)
        J = np.asarray(jf.func(up), dtype=object)
        dJ = np.empty((n, n, n), dtype=object)  # dJ[d][a][b] = d_d J^a_b
        for d in range(n):
            for a in range(n):
                for b in range(n):
                    dJ[d, a, b] = J[a, b].deriv(d)
        Jt = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                Jt[a, b] = J[a, b].truncate(o)
        N = np.empty((n, n, n), dtype=object)
        for a in range(n):
            for b in range(n):
                for c in range(b, n):
                    acc = None
                    for d in range(n):
                        t = (Jt[d, b] * dJ[d, a, c] - Jt[d, c] * dJ[d, a, b]
                             - Jt[d, b] * dJ[c, a, d] + Jt[d, c] * dJ[b, a, d])
                        acc = t if acc is None else acc + t
                    N[a, b, c] = acc * 0.5
                    N[a, c, b] = -N[a, b, c]
        return N

    return TensorField(chart=jf.chart, valence=(1, 2), func=func,
                       name=f"N({jf.name})")


def para_c_projective_change(conn: ConnectionField, upsilon: TensorField,
                             jf: TensorField) -> ConnectionField:
    """Gamma + Y(X)Y-sym + Y(JX)J-sym change (the symmetric reading of the
    para-complex projective transformation)."""
    n = conn.chart.dim

    def func(coords):
        gamma = np.asarray(conn.func(coords), dtype=object)
        U = np.asarray(upsilon.func(coords), dtype=object)
        J = np.asarray(jf.func(coords), dtype=object)
        UJ = np.empty(n, dtype=object)  # (UJ)_a = U_d J^d_a
        for a in range(n):
            acc = None
            for d in range(n):
                t = U[d] * J[d, a]
                acc = t if acc is None else acc + t
            UJ[a] = acc
        out = np.empty((n, n, n), dtype=object)
        for c in range(n):
            for a in range(n):
                for b in range(n):
                    t = gamma[c, a, b]
                    if c == b:
                        t = t + U[a]
                    if c == a:
                        t = t + U[b]
                    t = t + J[c, b] * UJ[a] + J[c, a] * UJ[b]
                    out[c, a, b] = t
        return out

    return ConnectionField(chart=conn.chart, func=func,
                           torsion_free=conn.torsion_free,
                           name=f"{conn.name}+pc-proj")


# -- theta and the asymptotic h ----------------------------------------------


def theta_field(g: MetricField, omega: TensorField, t_func: Callable) -> TensorField:
    """theta_a = Omega_ac g^bc d_b T  (equivalently dT o J)."""
    n = g.chart.dim

    def func(coords):
        o = coords[0].order
        up = jets.seed_point([c.value for c in coords], o + 1)
        T = t_func(up)
        dT = [T.deriv(a) for a in range(n)]
        G = np.asarray(g.func(coords), dtype=object)
        W = np.asarray(omega.func(coords), dtype=object)
        Ginv = jet_matrix_inverse(G)
        grad = []
        for c in range(n):
            acc = None
            for b in range(n):
                t = Ginv[c, b] * dT[b]
                acc = t if acc is None else acc + t
            grad.append(acc)
        theta = []
        for a in range(n):
            acc = None
            for c in range(n):
                t = W[a, c] * grad[c]
                acc = t if acc is None else acc + t
            theta.append(acc)
        return theta

    return TensorField(chart=g.chart, valence=(0, 1), func=func,
                       name=f"theta({g.name})")


def h_tc_field(g: MetricField, omega: TensorField, t_func: Callable,
               C: float = 0.25) -> TensorField:
    """h_{T,C} = T g + (C/T)(dT^2 - theta^2), squares taken without 1/2:
    components T g_ab + (2C/T)(d_a T d_b T - theta_a theta_b)."""
    n = g.chart.dim
    theta = theta_field(g, omega, t_func)

    def func(coords):
        o = coords[0].order
        up = jets.seed_point([c.value for c in coords], o + 1)
        Tfull = t_func(up)
        T = Tfull.truncate(o)
        dT = [Tfull.deriv(a) for a in range(n)]
        G = np.asarray(g.func(coords), dtype=object)
        th = np.asarray(theta.func(coords), dtype=object)
        scale = (2.0 * C) / T
        H = np.empty((n, n), dtype=object)
        for a in range(n):
            for b in range(a, n):
                H[a, b] = T * G[a, b] + scale * (dT[a] * dT[b] - th[a] * th[b])
                H[b, a] = H[a, b]
        return H

    return TensorField(chart=g.chart, valence=(0, 2), func=func,
                       symmetric=True, name=f"h({g.name})")


# -- boundary-chart pullbacks --------------------------------------------------


def pullback_field(field: TensorField, cmap: ChartMap) -> TensorField:
    """Covariant field re-expressed on the target chart by evaluating the
    closed-form components along the inverse map (no composition step;
    valid because catalog component functions accept arbitrary jets)."""
    r, s = field.valence
    if r != 0:
        raise ValueError("direct pullback implemented for covariant fields")
    n = field.chart.dim

    def func(coords):
        o = coords[0].order
        up = jets.seed_point([c.value for c in coords], o + 1)
        xs = cmap.inv(up)
        Jac = np.empty((n, n), dtype=object)  # d x^a / d y^mu, order o
        for a in range(n):
            for mu in range(n):
                Jac[a, mu] = xs[a].deriv(mu)
        comps = np.asarray(field.func([x.truncate(o) for x in xs]), dtype=object)
        out = np.empty(comps.shape, dtype=object)
        for oidx in np.ndindex(out.shape):
            acc = None
            for sidx in np.ndindex(comps.shape):
                factor = None
                for slot in range(s):
                    f = Jac[sidx[slot], oidx[slot]]
                    factor = f if factor is None else factor * f
                term = comps[sidx] * factor if factor is not None else comps[sidx]
                acc = term if acc is None else acc + term
            out[oidx] = acc
        return out

    return TensorField(chart=cmap.target, valence=field.valence, func=func,
                       symmetric=field.symmetric,
                       antisymmetric=field.antisymmetric,
                       name=f"{field.name}|bnd")


def dm_boundary_fields(ps: ProjectiveStructure):
    """(g, Omega, J, chart) of the canonical metric in the (T, Z, X, Y)
    boundary chart."""
    n = ps.n
    g, omega = dm_metric(ps)
    cmap = dm_boundary_map(n)
    gb_t = pullback_field(g, cmap)
    gb = MetricField(cmap.target, gb_t.func, name=f"dm({ps.label})|bnd")
    omb = pullback_field(omega, cmap)
    probe = np.array([0.05] + [0.2] * (n - 1) + [0.3] * (n - 1) + [1.0])
    jb = j_from_g_omega(gb, omb, probe=probe)
    return gb, omb, jb, cmap.target


def boundary_t_coordinate(coords):
    """Defining function of the boundary chart: its first coordinate."""
    return coords[0]


# -- boundary data (contact form, Theta, h_D) ----------------------------------


def _gamma_contracted(ps: ProjectiveStructure, xs, Z, i, j):
    """c_ij = Gamma^C_ij Z_C + Gamma^n_ij at base coordinates xs."""
    n = ps.n
    acc = ps.gamma_poly(n - 1, i, j)(xs)
    for Cc in range(n - 1):
        acc = acc + ps.gamma_poly(Cc, i, j)(xs) * Z[Cc]
    return acc


def boundary_data(ps: ProjectiveStructure):
    """Contact form theta0 = 2(dY + Z_A dX^A) and the distribution metric
    h_D = (dZ_A - Theta_AB dX^B) sym dX^A on the boundary chart.

    Returns (theta0 field, h_D field, Theta callable).  Theta(point)
    returns the (n-1)x(n-1) matrix
        Theta_AB = Gamma^C_AB Z_C + Gamma^n_AB
                   + (Gamma^C_nn Z_C + Gamma^n_nn) Z_A Z_B
                   - 2 (Gamma^C_An Z_C + Gamma^n_An) Z_B
    with coefficient functions evaluated at the base point (X, Y).
    """
    n = ps.n
    chart = dm_boundary_chart(n)
    m = n - 1

    def theta_comps(coords):
        Z = coords[1:n]
        zero = coords[0] * 0.0
        out = [zero] * (2 * n)
        for a in range(m):
            out[n + a] = 2.0 * Z[a]
        out[2 * n - 1] = zero + 2.0
        return out

    def theta_mat(point):
        Z = list(point[1:n])
        xs = list(point[n:2 * n - 1]) + [point[-1]]
        Th = np.empty((m, m), dtype=object)
        for A in range(m):
            for B in range(m):
                t = _gamma_contracted(ps, xs, Z, A, B)
                t = t + _gamma_contracted(ps, xs, Z, n - 1, n - 1) * (Z[A] * Z[B])
                t = t - 2.0 * _gamma_contracted(ps, xs, Z, A, n - 1) * Z[B]
                Th[A, B] = t
        return Th

    def hd_comps(coords):
        zero = coords[0] * 0.0
        Th = theta_mat(coords)
        H = np.empty((2 * n, 2 * n), dtype=object)
        H[...] = zero
        for A in range(m):
            H[1 + A, n + A] = zero + 1.0
            H[n + A, 1 + A] = H[1 + A, n + A]
        for A in range(m):
            for B in range(m):
                H[n + A, n + B] = H[n + A, n + B] - (Th[A, B] + Th[B, A])
        return H

    theta0 = TensorField(chart=chart, valence=(0, 1), func=theta_comps,
                         name="theta0")
    h_d = TensorField(chart=chart, valence=(0, 2), func=hd_comps,
                      symmetric=True, name="h_D")
    return theta0, h_d, theta_mat


def _embed_schouten(ps: ProjectiveStructure, coords):
    """Schouten of the base structure at x = (X..., Y) as boundary-chart
    scalars (jets or floats)."""
    n = ps.n
    xs = list(coords[n:2 * n - 1]) + [coords[-1]]
    sch = ps.schouten()
    if not isinstance(coords[0], Jet):
        Pv = np.asarray(sch.func(jets.seed_point([float(x) for x in xs], 0)))
        return np.vectorize(lambda j: j.value)(Pv)
    o = coords[0].order
    x0 = [x.value for x in xs]
    Pn = np.asarray(sch.func(jets.seed_point(x0, o)))
    inner = [x.truncate(o) for x in xs]
    P = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(n):
            P[i, j] = jets.compose(Pn[i, j], inner)
    return P


def boundary_theta_closed(ps: ProjectiveStructure) -> TensorField:
    """The one-form theta of the curved structure in boundary coordinates,
    assembled from its closed form (Schouten and connection contributions
    entering at order T^2 and T).

    theta = 2T(1-T) xi_i dx^i - dT + 2T^2 (P_ij - Gamma^k_ij xi_k) x^i dx^j
    with P in the engine orientation (Ric_ab = n P_ba - P_ab).
    """
    n = ps.n
    m = n - 1
    chart = dm_boundary_chart(n)

    def func(coords):
        T = coords[0]
        Z = coords[1:n]
        X = coords[n:2 * n - 1]
        Y = coords[-1]
        xs = list(X) + [Y]
        K = Y
        for a in range(m):
            K = K + Z[a] * X[a]
        P = _embed_schouten(ps, coords)
        zero = T * 0.0
        th = [zero] * (2 * n)
        th[0] = zero - 1.0
        pref = 2.0 * (1.0 - T) / K
        TK = T * K
        T2 = T * T
        for B in range(m):
            acc = pref * Z[B]
            for A in range(m):
                acc = acc + 2.0 * T2 * (P[A, B] - _gamma_contracted(ps, xs, Z, A, B) / TK) * X[A]
            acc = acc + 2.0 * T2 * (P[n - 1, B] - _gamma_contracted(ps, xs, Z, n - 1, B) / TK) * Y
            th[n + B] = acc
        acc = pref * 1.0
        for A in range(m):
            acc = acc + 2.0 * T2 * (P[A, n - 1] - _gamma_contracted(ps, xs, Z, A, n - 1) / TK) * X[A]
        acc = acc + 2.0 * T2 * (P[n - 1, n - 1] - _gamma_contracted(ps, xs, Z, n - 1, n - 1) / TK) * Y
        th[2 * n - 1] = acc
        return th

    return TensorField(chart=chart, valence=(0, 1), func=func,
                       name="theta-closed")


def boundary_h_closed(ps: ProjectiveStructure,
                      curvature_cross_terms: bool = True) -> TensorField:
    """Closed form of h = T g + (dT^2 - theta^2)/(4T) on the boundary chart,
    assembled independently of the jet pipeline used by h_tc_field.

    With omega := dY + Z_A dX^A, c_ij := Gamma^C_ij Z_C + Gamma^n_ij,
    ctil_j := c_ij x^i, ptil_j := P_ij x^i (base point x = (X, Y)), all as
    one-forms in the base differentials:

        h = 2(1-T)/K^2 omega(x)omega - SYM(omega, dT)/K + SYM(dZ_A, dX^A)/K
            - X^A SYM(dZ_A, omega)/K^2
            - (2/K) c_ij dx^i (x) dx^j + 2T P_(ij) dx^i (x) dx^j
            [curvature cross terms:]
            - 2T(1-T)/K SYM(omega, ptil) + 2(1-T)/K^2 SYM(omega, ctil)
            + T SYM(ptil, dT) - SYM(ctil, dT)/K
            - 2T^3 ptil(x)ptil + 2T^2/K SYM(ptil, ctil) - 2T/K^2 ctil(x)ctil

    The bracketed cross terms vanish on the contact distribution at T = 0
    but are required for the exact identity at interior points; without
    them the expression reproduces only the structure of the boundary
    restriction (set curvature_cross_terms=False to get that reading).
    """
    n = ps.n
    m = n - 1
    chart = dm_boundary_chart(n)
    dim = 2 * n
    iT, iY = 0, 2 * n - 1

    def func(coords):
        T = coords[0]
        Z = coords[1:n]
        X = coords[n:2 * n - 1]
        Y = coords[-1]
        xs = list(X) + [Y]
        K = Y
        for a in range(m):
            K = K + Z[a] * X[a]
        P = _embed_schouten(ps, coords)
        zero = T * 0.0
        one = T * 0.0 + 1.0

        # one-form component vectors over (T, Z, X, Y)
        omega = [zero] * dim
        omega[iY] = one
        for a in range(m):
            omega[n + a] = Z[a] + zero
        dT = [zero] * dim
        dT[iT] = one
        dxb = []  # base differentials dx^j, j = 0..n-1
        for a in range(m):
            e = [zero] * dim
            e[n + a] = one
            dxb.append(e)
        e = [zero] * dim
        e[iY] = one
        dxb.append(e)

        c = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(i, n):
                c[i, j] = _gamma_contracted(ps, xs, Z, i, j)
                c[j, i] = c[i, j]
        ctil = [None] * n
        ptil = [None] * n
        for j in range(n):
            a1 = None
            a2 = None
            for i in range(n):
                t1 = c[j, i] * xs[i]
                t2 = P[i, j] * xs[i]
                a1 = t1 if a1 is None else a1 + t1
                a2 = t2 if a2 is None else a2 + t2
            ctil[j] = a1
            ptil[j] = a2
        cform = [None] * dim
        pform = [None] * dim
        for a in range(dim):
            accc = zero
            accp = zero
            for j in range(n):
                accc = accc + ctil[j] * dxb[j][a]
                accp = accp + ptil[j] * dxb[j][a]
            cform[a] = accc
            pform[a] = accp

        H = np.empty((dim, dim), dtype=object)
        H[...] = zero
        invK = 1.0 / K

        def add_sym(u, v, w):
            for a in range(dim):
                for b in range(dim):
                    H[a, b] = H[a, b] + w * (u[a] * v[b] + u[b] * v[a])

        def add_outer(u, w):
            for a in range(dim):
                for b in range(dim):
                    H[a, b] = H[a, b] + w * (u[a] * u[b])

        add_outer(omega, 2.0 * (1.0 - T) * invK * invK)
        add_sym(omega, dT, -invK)
        for a in range(m):
            dZa = [zero] * dim
            dZa[1 + a] = one
            add_sym(dZa, dxb[a], invK)
            add_sym(dZa, omega, -X[a] * invK * invK)
        for i in range(n):
            for j in range(n):
                w = -2.0 * invK * c[i, j] + T * (P[i, j] + P[j, i])
                for aa in range(dim):
                    for bb in range(dim):
                        H[aa, bb] = H[aa, bb] + w * (dxb[i][aa] * dxb[j][bb])
        if curvature_cross_terms:
            add_sym(omega, pform, -2.0 * T * (1.0 - T) * invK)
            add_sym(omega, cform, 2.0 * (1.0 - T) * invK * invK)
            add_sym(pform, dT, T)
            add_sym(cform, dT, -invK)
            add_outer(pform, -2.0 * T * T * T)
            add_sym(pform, cform, 2.0 * T * T * invK)
            add_outer(cform, -2.0 * T * invK * invK)
        return H

    return TensorField(chart=chart, valence=(0, 2), func=func, symmetric=True,
                       name="h-closed")


# -- boundary checks -----------------------------------------------------------


def _dtheta0_matrix(n: int) -> np.ndarray:
    dim = 2 * n
    M = np.zeros((dim, dim))
    for A in range(n - 1):
        M[1 + A, n + A] = 2.0
        M[n + A, 1 + A] = -2.0
    return M


def _distribution_basis(n: int, point) -> list:
    """Vectors annihilated by theta0 and dT at a boundary point:
    e_A = d/dX^A - Z_A d/dY and f_A = d/dZ_A."""
    Z = point[1:n]
    dim = 2 * n
    basis = []
    for A in range(n - 1):
        e = np.zeros(dim)
        e[n + A] = 1.0
        e[2 * n - 1] = -Z[A]
        basis.append(e)
    for A in range(n - 1):
        f = np.zeros(dim)
        f[1 + A] = 1.0
        basis.append(f)
    return basis


def _extrapolate_matrix(field: TensorField, point0, ladder, order=3) -> np.ndarray:
    """Extrapolate a jet-valued matrix field to T = 0 above a boundary point
    (the point's T entry is replaced by each rung)."""
    best = None
    prev = None
    best_gap = math.inf
    for eps in ladder:
        p = np.array(point0, dtype=float)
        p[0] = eps
        comps = np.asarray(field.at(p, order=order), dtype=object)
        vals = np.empty(comps.shape)
        delta = np.zeros(field.chart.dim)
        delta[0] = -eps
        for idx in np.ndindex(comps.shape):
            vals[idx] = comps[idx].eval_shift(delta)
        if prev is not None:
            gap = float(np.max(np.abs(vals - prev)))
            if gap < best_gap:
                best_gap = gap
                best = vals
        prev = vals
    return best if best is not None else prev


def project_j_to_distribution(J0: np.ndarray, n: int, point) -> np.ndarray:
    """Substitute dY -> theta0/2 - Z_A dX^A and discard theta0 terms."""
    Z = point[1:n]
    JD = J0.copy()
    iY = 2 * n - 1
    for A in range(n - 1):
        JD[:, n + A] = JD[:, n + A] - Z[A] * J0[:, iY]
    JD[:, iY] = 0.0
    return JD


def levi_compatibility_check(ps: ProjectiveStructure, rng, count: int = 10,
                             ladder=(1e-2, 1e-3, 1e-4),
                             boundary_fields=None) -> float:
    """max |h_D(U, V) - levi(U, V)| over distribution basis pairs at
    boundary points, with levi = -1/2 dtheta0(J_D U, V)."""
    n = ps.n
    if boundary_fields is None:
        gb, omb, jb, chart = dm_boundary_fields(ps)
    else:
        gb, omb, jb, chart = boundary_fields
    _, h_d, _ = boundary_data(ps)
    M = _dtheta0_matrix(n)
    resid = 0.0
    for p in chart.sample(rng, count):
        p0 = np.array(p)
        p0[0] = 0.0
        J0 = _extrapolate_matrix(jb, p0, ladder)
        JD = project_j_to_distribution(J0, n, p0)
        H = h_d.values(p0)
        for u in _distribution_basis(n, p0):
            for v in _distribution_basis(n, p0):
                levi = LEVI_BRIDGE * float((JD @ u) @ M @ v)
                resid = max(resid, abs(float(u @ H @ v) - levi))
    return resid


def contact_nondegeneracy(ps: ProjectiveStructure, rng, count: int = 10) -> float:
    """min |det| of the bordered contact matrix [[0, theta0], [-theta0,
    dtheta0]] on the boundary tangent space; nonzero iff theta0 ^
    (dtheta0)^(n-1) does not vanish."""
    n = ps.n
    chart = dm_boundary_chart(n)
    theta0, _, _ = boundary_data(ps)
    M = _dtheta0_matrix(n)
    tang = list(range(1, 2 * n))  # Z, X, Y rows of the boundary
    worst = math.inf
    for p in chart.sample(rng, count):
        p0 = np.array(p)
        p0[0] = 0.0
        th = theta0.values(p0)
        dim = len(tang) + 1
        B = np.zeros((dim, dim))
        B[0, 1:] = th[tang]
        B[1:, 0] = -th[tang]
        B[1:, 1:] = M[np.ix_(tang, tang)]
        worst = min(worst, abs(np.linalg.det(B)))
    return worst


def nijenhuis_tangential_check(ps: ProjectiveStructure, rng, count: int = 6,
                               ladder=(1e-2, 1e-3, 1e-4),
                               tolerance: float = 1e-6,
                               boundary_fields=None) -> ExtensionVerdict:
    """Extrapolated boundary value of N^a_bc d_a T (the T row of the
    Nijenhuis tensor in boundary coordinates)."""
    n = ps.n
    if boundary_fields is None:
        gb, omb, jb, chart = dm_boundary_fields(ps)
    else:
        gb, omb, jb, chart = boundary_fields
    N = nijenhuis(jb)

    def t_row(coords):
        full = np.asarray(N.func(coords), dtype=object)
        return full[0]

    spec = CompactificationSpec(chart=chart, ladder=ladder)
    tps = spec.boundary_points(rng, count)
    verdict = extend_to_boundary(t_row, spec, tps, tolerance=tolerance, order=2)
    if verdict.passed and float(np.max(np.abs(verdict.limits))) > tolerance:
        verdict.passed = False
        verdict.detail = (f"boundary value {np.max(np.abs(verdict.limits)):.3e} "
                          f"exceeds {tolerance:.1e}")
    return verdict


def full_compactification_check(ps: ProjectiveStructure, rng, count: int = 5,
                                ladder=(1e-2, 1e-3, 1e-4)) -> dict:
    """Orchestrated boundary certification for one projective structure.

    Returns a dict of named sub-results; see the CLI for serialization.
    """
    n = ps.n
    gb, omb, jb, chart = dm_boundary_fields(ps)
    bundle = (gb, omb, jb, chart)
    spec = CompactificationSpec(chart=chart, ladder=ladder)
    tps = spec.boundary_points(rng, count)
    out = {}

    # h_{T,1/4} extends, and matches the closed form on interior slices
    h_engine = h_tc_field(gb, omb, boundary_t_coordinate, C=0.25)
    out["h_extension"] = extend_to_boundary(h_engine.func, spec, tps,
                                            tolerance=1e-6)
    h_closed = boundary_h_closed(ps)
    worst = 0.0
    for tp in tps[:3]:
        for eps in ladder[:2]:
            p = np.concatenate([[eps], tp])
            dev = np.max(np.abs(_values_of(h_engine.at(p, order=0))
                                - _values_of(h_closed.at(p, order=0))))
            worst = max(worst, float(dev))
    out["h_closed_form_residual"] = worst

    # theta matches its closed form
    th_engine = theta_field(gb, omb, boundary_t_coordinate)
    th_closed = boundary_theta_closed(ps)
    worst = 0.0
    for tp in tps[:3]:
        for eps in ladder[:2]:
            p = np.concatenate([[eps], tp])
            dev = np.max(np.abs(_values_of(th_engine.at(p, order=0))
                                - _values_of(th_closed.at(p, order=0))))
            worst = max(worst, float(dev))
    out["theta_closed_form_residual"] = worst

    # boundary value of h against the boundary closed form at T = 0
    def h_at_zero(tp):
        p0 = np.concatenate([[0.0], tp])
        return _values_of(h_closed.at(p0, order=0))

    out["h_boundary_match"] = extend_to_boundary(
        h_engine.func, spec, tps[:3], tolerance=1e-6, closed_form=h_at_zero)

    # Levi compatibility and contact nondegeneracy
    out["levi_residual"] = levi_compatibility_check(
        ps, rng, count=min(count, 6), ladder=ladder, boundary_fields=bundle)
    out["contact_min_det"] = contact_nondegeneracy(ps, rng, count=min(count, 6))

    # Nijenhuis tangentiality
    out["nijenhuis_tangential"] = nijenhuis_tangential_check(
        ps, rng, count=min(count, 4), ladder=ladder, boundary_fields=bundle)

    # the changed Libermann connection extends
    lib = libermann(gb, omb)
    ups = TensorField(chart=chart, valence=(0, 1),
                      func=lambda coords: [
                          (0.5 / coords[0]) if a == 0 else coords[0] * 0.0
                          for a in range(2 * n)],
                      name="dT/2T")
    changed = para_c_projective_change(lib, ups, jb)
    out["connection_extension"] = extend_to_boundary(
        changed.func, spec, tps[:3], tolerance=1e-5, order=2)
    return out


def _values_of(comps) -> np.ndarray:
    comps = np.asarray(comps, dtype=object)
    out = np.empty(comps.shape)
    for idx in np.ndindex(comps.shape):
        out[idx] = jets.value_of(comps[idx])
    return out
