"""Truncated Fock representation over the Krein one-particle space.

The one-particle space is spanned by h, v0 and a whitened family of
zero-integral functions orthogonal to h, all orthonormal for the completed
product.  In these coordinates the fundamental symmetry is the exact
two-by-two swap of the (h, v0) block plus the identity, and the smeared
field splits as phi(f) = a_dag(f) + a(f) with

    a_dag(f) = sum_k f_k b_k_dag,      a(f) = sum_k conj((eta f)_k) b_k,

so that [a(f), a_dag(g)] = <f, g> = f_bar^T eta g reproduces the indefinite
pairing.  Occupation numbers are truncated at a fixed total, and operator
identities are checked on guarded sectors that the truncation cannot leak
out of.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import IllConditionedError
from .krein import KreinContext, PairingTable

NULL_CUTOFF = 1e-10


# ---------------------------------------------------------------------------
# One-particle space


@dataclass
class OneParticleSpace:
    """Krein-orthonormal mode coordinates over a pairing table.

    `coeffs[:, k]` expresses mode k in the table's function list (basis
    functions, then h, then v0).  Mode 0 is h, mode 1 is v0; the rest span
    zero-integral functions with vanishing h-pairing.  `eta` is the exact
    swap-plus-identity symmetry; `eta_measured` is the same matrix read off
    the quadrature Grams, kept for certification.
    """

    table: PairingTable
    coeffs: np.ndarray
    eta: np.ndarray
    eta_measured: np.ndarray
    gram_krein: np.ndarray

    @property
    def dim(self) -> int:
        return self.coeffs.shape[1]

    def coords_of(self, i_func: int):
        """Mode coordinates of the i-th table function (exact if in span)."""
        kr = np.array([self.table.krein(a, i_func) for a in range(len(self.table.funcs))])
        return self.coeffs.conj().T @ kr

    def indef(self, u, v) -> complex:
        """<u, v> = u_bar^T eta v in mode coordinates."""
        return complex(np.conj(u) @ self.eta @ v)


def one_particle_space(table: PairingTable, null_cutoff: float = NULL_CUTOFF,
                       exact_eta: bool = True) -> OneParticleSpace:
    """Whiten the table basis into Krein-orthonormal modes.

    h and v0 are kept verbatim as the first two modes.  Basis functions are
    reduced to the zero-integral, h-orthogonal complement, then whitened by
    an eigenvalue decomposition of their Krein Gram; directions below the
    null cutoff (near-dependent inputs) are dropped.
    """
    n_all = len(table.funcs)
    nb = table.n_basis
    ih, iv = table.i_h, table.i_v0

    # Reduction r_i = f_i - (int f_i) h - <h, f_i - (int f_i) h> v0 in the
    # coordinates of the full function list.
    red = np.zeros((n_all, nb), dtype=complex)
    for j in range(nb):
        red[j, j] = 1.0
        cj = table.ints[j]
        red[ih, j] = -cj
        hp = table.indef(ih, j) - cj * table.indef(ih, ih)
        red[iv, j] = -hp

    Gk_full = table.krein_matrix()
    Gr = red.conj().T @ Gk_full @ red
    Gr = 0.5 * (Gr + Gr.conj().T)
    evals, evecs = np.linalg.eigh(Gr)
    if np.any(evals < -null_cutoff * max(float(evals[-1]), 1.0)):
        raise IllConditionedError("reduced Krein Gram has a significant negative direction")
    keep = evals > null_cutoff * max(float(evals[-1]), 1.0)
    white = evecs[:, keep] / np.sqrt(evals[keep])[None, :]

    dim = 2 + int(np.sum(keep))
    coeffs = np.zeros((n_all, dim), dtype=complex)
    coeffs[ih, 0] = 1.0
    coeffs[iv, 1] = 1.0
    coeffs[:, 2:] = red @ white

    Gi_full = table.indef_matrix()
    eta_meas = coeffs.conj().T @ Gi_full @ coeffs
    gram_k = coeffs.conj().T @ Gk_full @ coeffs

    eta_exact = np.eye(dim, dtype=complex)
    eta_exact[0, 0] = eta_exact[1, 1] = 0.0
    eta_exact[0, 1] = eta_exact[1, 0] = 1.0

    eta = eta_exact if exact_eta else eta_meas
    return OneParticleSpace(table, coeffs, eta, eta_meas, gram_k)


# ---------------------------------------------------------------------------
# Occupation-number representation


@dataclass
class FockRep:
    """Dense truncated Fock space over `space` with total occupation <= n_max."""

    space: OneParticleSpace
    n_max: int = 4
    states: list = field(init=False)
    index: dict = field(init=False)

    def __post_init__(self):
        modes = self.space.dim
        self.states = [s for s in _occupations(modes, self.n_max)]
        self.index = {s: i for i, s in enumerate(self.states)}
        self._b = [self._lowering(k) for k in range(modes)]

    @property
    def dim(self) -> int:
        return len(self.states)

    @property
    def n_modes(self) -> int:
        return self.space.dim

    def _lowering(self, k: int):
        B = np.zeros((self.dim, self.dim))
        for i, s in enumerate(self.states):
            if s[k] == 0:
                continue
            t = s[:k] + (s[k] - 1,) + s[k + 1:]
            B[self.index[t], i] = math.sqrt(s[k])
        return B

    def b(self, k: int):
        return self._b[k]

    def b_dag(self, k: int):
        return self._b[k].T

    def vacuum(self):
        v = np.zeros(self.dim)
        v[self.index[(0,) * self.n_modes]] = 1.0
        return v

    def number_op(self, k: int):
        return np.diag([float(s[k]) for s in self.states])

    def total_number(self):
        return np.diag([float(sum(s)) for s in self.states])

    def sector_projector(self, max_total: int):
        """Projector onto total occupation <= max_total (truncation guard)."""
        return np.diag([1.0 if sum(s) <= max_total else 0.0 for s in self.states])

    # -- field operators --
    def a_dag(self, f):
        f = np.asarray(f, dtype=complex)
        return sum(f[k] * self.b_dag(k) for k in range(self.n_modes))

    def a(self, f):
        c = np.conj(self.space.eta @ np.asarray(f, dtype=complex))
        return sum(c[k] * self.b(k) for k in range(self.n_modes))

    def field_op(self, f):
        """phi(f) = a_dag(f) + a(f) for mode coordinates f."""
        return self.a_dag(f) + self.a(f)


def _occupations(modes: int, n_max: int):
    for total in range(n_max + 1):
        for c in itertools.combinations_with_replacement(range(modes), total):
            s = [0] * modes
            for k in c:
                s[k] += 1
            yield tuple(s)


# ---------------------------------------------------------------------------
# Charge, gauge flow, physical subspace


E_H = 0
E_V0 = 1


def charge(rep: FockRep):
    """Global gauge charge Q = (i/2)(a_dag(v0) - a(v0)).

    Normalized so that [Q, phi(f)] = -i Re(int f) for the mode coordinates
    of a real test function f; on phi(h) this gives commutator -i/2 after
    the constant-shift split phi = phi_plus + phi_minus.
    """
    v0 = np.zeros(rep.n_modes)
    v0[E_V0] = 1.0
    return 0.5j * (rep.a_dag(v0) - rep.a(v0))


def field_shift_parts(rep: FockRep):
    """(phi_plus, phi_minus) = ((1/2) a_dag(v0), (1/2) a(v0)): the constant
    zero mode of the field, split into creation and annihilation halves."""
    v0 = np.zeros(rep.n_modes)
    v0[E_V0] = 1.0
    return 0.5 * rep.a_dag(v0), 0.5 * rep.a(v0)


def gauge_unitary(rep: FockRep, lam: float):
    """exp(i lam Q); eta-unitary generator, truncated to the Fock cutoff."""
    return expm(1j * lam * charge(rep))


def physical_projector(rep: FockRep):
    """Projector onto states with no h-mode excitation.

    The physical subspace is annihilated by a(h)-type constraints; in the
    occupation basis it is exactly the n_h = 0 sector.
    """
    return np.diag([1.0 if s[E_H] == 0 else 0.0 for s in rep.states])


def eta_fock(rep: FockRep):
    """Second quantization of eta, built column by column on occupation states.

    Gamma(eta)|n> = prod_k (a_dag(eta e_k))^{n_k} / sqrt(n_k!) |0>, which for
    the exact swap symmetry exchanges h and v0 occupation numbers.
    """
    eta = rep.space.eta
    dim = rep.dim
    out = np.zeros((dim, dim), dtype=complex)
    bdag_eta = [sum(eta[j, k] * rep.b_dag(j) for j in range(rep.n_modes))
                for k in range(rep.n_modes)]
    for i, s in enumerate(rep.states):
        v = rep.vacuum().astype(complex)
        for k, nk in enumerate(s):
            for _ in range(nk):
                v = bdag_eta[k] @ v
            if nk:
                v /= math.sqrt(math.factorial(nk))
        out[:, i] = v
    return out


def eta_adjoint_defect(rep: FockRep, A, guard: int = None) -> float:
    """sup-norm of (eta_F A eta_F - A^dag) on a guarded occupation sector."""
    etaF = eta_fock(rep)
    D = etaF @ A @ etaF - A.conj().T
    if guard is not None:
        P = rep.sector_projector(guard)
        D = P @ D @ P
    return float(np.max(np.abs(D)))
