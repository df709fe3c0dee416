"""Shared numerical machinery: quadrature rules, finite differences, extrapolation."""

from __future__ import annotations

import numpy as np

from .errors import ConvergenceError


def gauss_legendre_panels(a: float, b: float, n_nodes: int, panel: int = 8):
    """Composite Gauss-Legendre rule on [a, b] with `n_nodes` total nodes.

    Nodes come in `panel`-point blocks; n_nodes must be a multiple of panel.
    Returns (nodes, weights), nodes strictly increasing.
    """
    if n_nodes % panel != 0:
        raise ValueError(f"n_nodes={n_nodes} not a multiple of panel={panel}")
    n_panels = n_nodes // panel
    xg, wg = np.polynomial.legendre.leggauss(panel)
    edges = np.linspace(a, b, n_panels + 1)
    nodes = np.empty(n_nodes)
    weights = np.empty(n_nodes)
    for k in range(n_panels):
        lo, hi = edges[k], edges[k + 1]
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        nodes[k * panel:(k + 1) * panel] = mid + half * xg
        weights[k * panel:(k + 1) * panel] = half * wg
    return nodes, weights


def fornberg_weights(x0: float, nodes, order: int):
    """Finite-difference weights for d^order/dx^order at x0 on arbitrary nodes.

    Classic Fornberg recursion; returns weights for derivatives 0..order,
    shape (order+1, len(nodes)).
    """
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    c = np.zeros((order + 1, n))
    c1 = 1.0
    c4 = nodes[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, order)
        c2 = 1.0
        c5 = c4
        c4 = nodes[i] - x0
        for j in range(i):
            c3 = nodes[i] - nodes[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[k, i] = c1 * (k * c[k - 1, i - 1] - c5 * c[k, i - 1]) / c2
                c[0, i] = -c1 * c5 * c[0, i - 1] / c2
            for k in range(mn, 0, -1):
                c[k, j] = (c4 * c[k, j] - k * c[k - 1, j]) / c3
            c[0, j] = c4 * c[0, j] / c3
        c1 = c2
    return c


def derivative_matrix(nodes, order: int, stencil: int = 7):
    """Dense differentiation matrix on arbitrary 1d nodes (per-row Fornberg stencil)."""
    nodes = np.asarray(nodes, dtype=float)
    n = len(nodes)
    if stencil > n:
        stencil = n
    D = np.zeros((n, n))
    for i in range(n):
        lo = min(max(i - stencil // 2, 0), n - stencil)
        sl = slice(lo, lo + stencil)
        D[i, sl] = fornberg_weights(nodes[i], nodes[sl], order)[order]
    return D


def richardson(eps, vals):
    """Neville extrapolation of vals(eps) to eps = 0.

    eps: decreasing or increasing positive levels, shape (m,).
    vals: shape (m, ...).  Returns (value, err_estimate) with the estimate
    taken as the difference of the two deepest extrapolants.
    """
    eps = np.asarray(eps, dtype=float)
    vals = np.asarray(vals)
    m = len(eps)
    if vals.shape[0] != m:
        raise ValueError("vals first axis must match eps")
    T = [vals.astype(complex)]
    for j in range(1, m):
        prev = T[-1]
        cur = np.empty((m - j,) + vals.shape[1:], dtype=complex)
        for i in range(m - j):
            num = eps[i] * prev[i + 1] - eps[i + j] * prev[i]
            cur[i] = num / (eps[i] - eps[i + j])
        T.append(cur)
    value = T[-1][0]
    if m >= 2:
        err = np.abs(T[-1][0] - T[-2][0])
    else:
        err = np.full(vals.shape[1:], np.nan)
    return value, err


def adaptive_panel_integral(f, a: float, b: float, rtol: float = 1e-10,
                            panel: int = 32, max_depth: int = 12):
    """Integrate f on [a,b] by dyadic refinement of composite Gauss-Legendre.

    f must accept an array of nodes.  Stops when two successive levels agree
    to rtol; raises ConvergenceError (with the achieved tolerance) otherwise.
    """
    prev = None
    for depth in range(max_depth):
        n_panels = 2 ** depth
        nodes, weights = gauss_legendre_panels(a, b, panel * n_panels, panel)
        cur = np.sum(weights * f(nodes))
        if prev is not None:
            scale = max(abs(cur), 1e-300)
            if abs(cur - prev) <= rtol * scale:
                return cur
        prev = cur
    achieved = abs(cur - prev) / max(abs(cur), 1e-300)
    raise ConvergenceError(
        f"panel refinement stalled at relative change {achieved:.3e} (requested {rtol:.1e})",
        achieved=achieved,
    )
