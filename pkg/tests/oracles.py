"""Independent finite-difference oracles.

These never touch the jet machinery: they evaluate component functions on
plain floats and differentiate with central differences.  They exist to
pin expected values for the engine (Christoffel symbols, curvature, the
Einstein constant of the canonical neutral metric) from a second route.
"""

from __future__ import annotations

import numpy as np

# 4th-order central difference stencils
_D1_OFFSETS = np.array([-2, -1, 1, 2])
_D1_WEIGHTS = np.array([1.0, -8.0, 8.0, -1.0]) / 12.0

# 4th-order stencils on a 7-point line, per derivative degree 0..3
_LINE = np.arange(-3, 4)
_W7 = {
    0: np.array([0.0, 0, 0, 1, 0, 0, 0]),
    1: np.array([-1.0, 9, -45, 0, 45, -9, 1]) / 60.0,
    2: np.array([2.0, -27, 270, -490, 270, -27, 2]) / 180.0,
    3: np.array([1.0, -8, 13, 0, -13, 8, -1]) / 8.0,
}


def fd_all_partials(f, x, order=3, h=2e-2, richardson=True):
    """All mixed partials of f at x up to total degree `order`.

    Evaluates f once on a 7^n lattice (per grid scale) and contracts with
    per-axis 4th-order stencils; Richardson extrapolation in h removes the
    leading error.  Returns {multi-index: value}.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)

    def grid_partials(hh):
        shape = (len(_LINE),) * n
        vals = np.empty(shape)
        for idx in np.ndindex(shape):
            q = x + hh * np.array([_LINE[i] for i in idx])
            vals[idx] = f(q)
        out = {}
        for alpha in np.ndindex(*(order + 1,) * n):
            if sum(alpha) > order:
                continue
            acc = vals
            for axis in range(n - 1, -1, -1):
                w = _W7[alpha[axis]] / hh ** alpha[axis]
                acc = np.tensordot(acc, w, axes=([axis], [0]))
            out[alpha] = float(acc)
        return out

    coarse = grid_partials(h)
    if not richardson:
        return coarse
    fine = grid_partials(h / 2.0)
    return {k: (16.0 * fine[k] - coarse[k]) / 15.0 for k in coarse}


def _fd_partial_raw(f, x, axes, h):
    if not axes:
        return f(np.asarray(x, dtype=float))
    axis, rest = axes[0], axes[1:]
    total = 0.0
    for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
        q = np.array(x, dtype=float)
        q[axis] += off * h
        total += w * _fd_partial_raw(f, q, rest, h)
    return total / h


def fd_partial(f, x, axes, h=2e-2):
    """Mixed partial of scalar f at x along the given axis list.

    4th-order central stencils applied recursively per axis, Richardson
    extrapolated in h (leading error h^4 -> h^6).
    """
    coarse = _fd_partial_raw(f, x, axes, h)
    fine = _fd_partial_raw(f, x, axes, h / 2.0)
    return (16.0 * fine - coarse) / 15.0


def fd_gradient(f, x, h=1e-2):
    x = np.asarray(x, dtype=float)
    return np.array([fd_partial(f, x, [i], h=h) for i in range(len(x))])


def fd_metric_derivs(metric_fn, x, h=1e-2):
    """(g, dg) with dg[a,b,c] = d_a g_bc, via finite differences."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    g = np.asarray(metric_fn(x), dtype=float)
    dg = np.zeros((n, n, n))
    for a in range(n):
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            q = x.copy()
            q[a] += off * h
            dg[a] += (w / h) * np.asarray(metric_fn(q), dtype=float)
    return g, dg


def fd_christoffel(metric_fn, x, h=1e-2):
    """Levi-Civita coefficients Gamma^a_bc from finite differences only."""
    g, dg = fd_metric_derivs(metric_fn, x, h=h)
    ginv = np.linalg.inv(g)
    n = len(g)
    gamma = np.zeros((n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                s = 0.0
                for d in range(n):
                    s += ginv[a, d] * (dg[b, c, d] + dg[c, b, d] - dg[d, b, c])
                gamma[a, b, c] = 0.5 * s
    return gamma


def fd_riemann(metric_fn, x, h=1e-2):
    """R^a_bcd = d_c Gamma^a_db - d_d Gamma^a_cb + Gamma Gamma terms."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    gamma = fd_christoffel(metric_fn, x, h=h)
    dgamma = np.zeros((n, n, n, n))  # dgamma[e,a,b,c] = d_e Gamma^a_bc
    for e in range(n):
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            q = x.copy()
            q[e] += off * h
            dgamma[e] += (w / h) * fd_christoffel(metric_fn, q, h=h)
    riem = np.zeros((n, n, n, n))
    for a in range(n):
        for b in range(n):
            for c in range(n):
                for d in range(n):
                    val = dgamma[c, a, d, b] - dgamma[d, a, c, b]
                    for e in range(n):
                        val += gamma[a, c, e] * gamma[e, d, b]
                        val -= gamma[a, d, e] * gamma[e, c, b]
                    riem[a, b, c, d] = val
    return riem


def fd_ricci(metric_fn, x, h=1e-2):
    riem = fd_riemann(metric_fn, x, h=h)
    return np.einsum("abad->bd", riem)


def fd_ricci_of_connection(gamma_fn, x, h=1e-2):
    """Ricci of an arbitrary coefficient field gamma_fn(x) -> Gamma^a_bc."""
    x = np.asarray(x, dtype=float)
    n = len(x)
    gamma = np.asarray(gamma_fn(x), dtype=float)
    dgamma = np.zeros((n, n, n, n))
    for e in range(n):
        for off, w in zip(_D1_OFFSETS, _D1_WEIGHTS):
            q = x.copy()
            q[e] += off * h
            dgamma[e] += (w / h) * np.asarray(gamma_fn(q), dtype=float)
    ric = np.zeros((n, n))
    for b in range(n):
        for d in range(n):
            val = 0.0
            for a in range(n):
                val += dgamma[a, a, d, b] - dgamma[d, a, a, b]
                for e in range(n):
                    val += gamma[a, a, e] * gamma[e, d, b]
                    val -= gamma[a, d, e] * gamma[e, a, b]
            ric[b, d] = val
    return ric


def fd_einstein_constant(metric_fn, points, h=1e-2):
    """Mean of tr(g^-1 Ric)/dim over sample points."""
    lams = []
    for x in points:
        g = np.asarray(metric_fn(np.asarray(x, dtype=float)), dtype=float)
        ric = fd_ricci(metric_fn, x, h=h)
        lams.append(np.trace(np.linalg.solve(g, ric)) / len(g))
    return float(np.mean(lams)), float(np.ptp(lams))
