"""Krein-space completion of the massless pairing.

The indefinite form <.,.> degenerates on multiples of h (a real function
with unit integral and vanishing self-pairing) and misses the constant
direction entirely.  The repaired inner product adds a rank-two correction
built from h and its metric partner v0 = -4 pi R^2 box(h):

    (f, g) = <f0, g0> + <f, h><h, g> + conj(int f) int g,

where f = f0 + (int f) h.  The fundamental symmetry eta swaps h and v0 and
acts as the identity on the zero-integral complement.

All products in a session are served by `PairingTable`, which runs the
expensive double-quadrature sweep once on basis + {h, v0} and evaluates
every Krein product algebraically from that Gram matrix.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditionedError, NormalizationError
from .geometry import DsParams, DsPoint
from .kernels import FOUR_PI, KernelConvention
from .testfn import (ChartGrid, TestFunction, construct_h, indef_gram, integral,
                     laplace_beltrami)

PINV_CUTOFF = 1e-8


@dataclass
class KreinContext:
    """Holds h, v0 and the pairing configuration for one session."""

    grid: ChartGrid
    conv: KernelConvention = KernelConvention.SERIES_LIMIT
    h: TestFunction = None
    v0: TestFunction = None
    h_report: dict = field(default_factory=dict)
    eps_levels: tuple = None

    @classmethod
    def build(cls, grid: ChartGrid, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
              seed_center: DsPoint = None, eps_levels=None) -> "KreinContext":
        if seed_center is None:
            seed_center = DsPoint(0.0, 1.0, grid.geom)
        h, report = construct_h(seed_center, grid, conv, eps_levels=eps_levels)
        R = grid.geom.R
        v0 = (-FOUR_PI * R * R) * laplace_beltrami(h)
        v0.is_real = True
        return cls(grid, conv, h, v0, report, eps_levels)

    @property
    def geom(self) -> DsParams:
        return self.grid.geom

    def table(self, basis) -> "PairingTable":
        return PairingTable.build(self, basis)


class PairingTable:
    """One Gram sweep over basis + {h, v0}; everything else is linear algebra.

    Entry order: the caller's basis functions first, then h, then v0.
    """

    def __init__(self, ctx: KreinContext, funcs, gram, ints):
        self.ctx = ctx
        self.funcs = list(funcs)
        self.gram = np.asarray(gram, dtype=complex)
        self.ints = np.asarray(ints, dtype=complex)
        self.n_basis = len(funcs) - 2
        self.i_h = self.n_basis
        self.i_v0 = self.n_basis + 1

    @classmethod
    def build(cls, ctx: KreinContext, basis) -> "PairingTable":
        funcs = list(basis) + [ctx.h, ctx.v0]
        gram = indef_gram(funcs, funcs, ctx.conv, eps_levels=ctx.eps_levels)
        ints = np.array([integral(f) for f in funcs])
        return cls(ctx, funcs, gram, ints)

    def indef(self, i: int, j: int) -> complex:
        return complex(self.gram[i, j])

    def krein(self, i: int, j: int) -> complex:
        """(f_i, f_j) from the stored indefinite Gram and integrals."""
        G, c = self.gram, self.ints
        ih = self.i_h
        # <f0, g0> with f0 = f - c_f h expands into four stored entries.
        f0g0 = (G[i, j] - np.conj(c[i]) * G[ih, j] - c[j] * G[i, ih]
                + np.conj(c[i]) * c[j] * G[ih, ih])
        return complex(f0g0 + G[i, ih] * G[ih, j] + np.conj(c[i]) * c[j])

    def zero_gram(self):
        """Indefinite Gram of the reduced basis f0_i = f_i - (int f_i) h.

        Pure linear algebra over the stored sweep; no new quadrature.
        """
        n = self.n_basis
        ih = self.i_h
        G, c = self.gram, self.ints
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = (G[i, j] - np.conj(c[i]) * G[ih, j]
                             - c[j] * G[i, ih] + np.conj(c[i]) * c[j] * G[ih, ih])
        return out

    def krein_matrix(self):
        n = len(self.funcs)
        out = np.empty((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = self.krein(i, j)
        return out

    def indef_matrix(self):
        return self.gram.copy()


def krein_product(ctx: KreinContext, f: TestFunction, g: TestFunction) -> complex:
    """(f, g) for a single pair; batch through PairingTable when possible."""
    table = PairingTable.build(ctx, [f, g])
    return table.krein(0, 1)


def nihil_norm(ctx: KreinContext, table: PairingTable = None) -> dict:
    """Normalization scoreboard for h and v0."""
    if table is None:
        table = PairingTable.build(ctx, [])
    ih, iv = table.i_h, table.i_v0
    return {
        "indef_h_h": table.indef(ih, ih),
        "indef_v0_v0": table.indef(iv, iv),
        "krein_h_h": table.krein(ih, ih),
        "krein_v0_v0": table.krein(iv, iv),
        "krein_h_v0": table.krein(ih, iv),
        "int_h": complex(table.ints[ih]),
        "int_v0": complex(table.ints[iv]),
    }


def functional_check(ctx: KreinContext, fs, table: PairingTable = None):
    """<v0, f> should reproduce int f; returns (measured, expected) arrays."""
    if table is None:
        table = PairingTable.build(ctx, list(fs))
    iv = table.i_v0
    measured = np.array([table.indef(iv, j) for j in range(len(fs))])
    expected = np.array([integral(f) for f in fs])
    return measured, expected


def krein_metric(table: PairingTable, cutoff: float = PINV_CUTOFF):
    """Matrix of eta on span(basis + {h, v0}): eta = pinv(G_krein) G_indef.

    The completed product (f, g) = <f, eta g> determines eta on the span.
    Raises when the Krein Gram is too ill-conditioned to invert reliably.
    """
    Gk = table.krein_matrix()
    Gi = table.indef_matrix()
    s = np.linalg.svd(Gk, compute_uv=False)
    if s[-1] < cutoff * s[0]:
        raise IllConditionedError(
            f"Krein Gram condition {s[0] / s[-1]:.2e} exceeds pinv cutoff budget")
    eta = np.linalg.pinv(Gk, rcond=cutoff) @ Gi
    return eta


def eta_involution_defect(table: PairingTable, eta=None) -> float:
    """|eta^2 - 1| on the span, as a sup of matrix entries."""
    if eta is None:
        eta = krein_metric(table)
    return float(np.max(np.abs(eta @ eta - np.eye(eta.shape[0]))))


def eta_swap_defect(table: PairingTable, eta=None) -> float:
    """How far eta is from exchanging the h and v0 coordinates.

    In basis coordinates eta should send e_h -> e_v0 and e_v0 -> e_h while
    fixing zero-integral, h-orthogonal directions.
    """
    if eta is None:
        eta = krein_metric(table)
    n = eta.shape[0]
    ih, iv = table.i_h, table.i_v0
    e_h = np.zeros(n)
    e_h[ih] = 1.0
    e_v = np.zeros(n)
    e_v[iv] = 1.0
    d1 = np.max(np.abs(eta @ e_h - e_v))
    d2 = np.max(np.abs(eta @ e_v - e_h))
    return float(max(d1, d2))


def v0_invariance(ctx: KreinContext, g, fs) -> dict:
    """Compare <v0, f> before and after transporting f by a group element.

    The functional f -> int f is invariant, so <v0, alpha_g f> must agree
    with <v0, f> whenever the transported support stays inside the window.
    """
    from .testfn import transport
    moved = [transport(g, f) for f in fs]
    table = PairingTable.build(ctx, list(fs) + moved)
    iv = table.i_v0
    n = len(fs)
    before = np.array([table.indef(iv, j) for j in range(n)])
    after = np.array([table.indef(iv, n + j) for j in range(n)])
    ints_before = np.array([integral(f) for f in fs])
    ints_after = np.array([integral(f) for f in moved])
    return {
        "pair_before": before,
        "pair_after": after,
        "int_before": ints_before,
        "int_after": ints_after,
        "max_pair_shift": float(np.max(np.abs(after - before))) if n else 0.0,
        "max_int_shift": float(np.max(np.abs(ints_after - ints_before))) if n else 0.0,
    }


@dataclass
class GramPair:
    """Indefinite and Krein Gram matrices over one basis, with export."""

    table: PairingTable

    @property
    def indefinite(self):
        return self.table.indef_matrix()

    @property
    def krein(self):
        return self.table.krein_matrix()

    def to_json_dict(self) -> dict:
        def pack(M):
            return [[[float(v.real), float(v.imag)] for v in row] for row in np.asarray(M)]
        return {
            "n_basis": self.table.n_basis,
            "order": "basis functions, then h, then v0",
            "indefinite": pack(self.indefinite),
            "krein": pack(self.krein),
            "integrals": [[float(v.real), float(v.imag)] for v in self.table.ints],
        }
