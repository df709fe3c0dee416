"""The two-point kernel family on X2.

Massive kernel  W_alpha(lambda) = Gamma(1-alpha) Gamma(alpha) / (4 pi)
                                  * F(1-alpha, alpha; 1; (1-lambda)/2),
its renormalized zero-mass limit, the general-d kernel from the Legendre
integral, the flat-equation Remark solution ln((1-lambda)/(1+lambda)),
and epsilon-prescribed boundary values with the commutator function.

The massless kernel carries two additive-constant conventions:
  series_limit      W0 = -(1/4pi) ln((1+lambda)/2)
  paper_closed_form W0 = -(1/4pi) ln(2(1+lambda))
which differ by the constant ln(4)/(4 pi) and are physically equivalent on
zero-integral test functions.  The bridge identity (z-z')^2/R^2 = -2(1+lambda)
connects both to the squared ambient separation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import CutError, PoleError
from .geometry import DsParams, DsPoint, embed, invariant_lambda, minkowski_dot
from .quadrature import richardson

FOUR_PI = 4.0 * math.pi


@dataclass(frozen=True)
class MassParam:
    """Principal-series mass parameter alpha = 1/2 - i nu, mu^2 R^2 = alpha(1-alpha)."""

    alpha: complex

    def __post_init__(self):
        a = complex(self.alpha)
        object.__setattr__(self, "alpha", a)

    @classmethod
    def from_nu(cls, nu: float) -> "MassParam":
        return cls(alpha=0.5 - 1j * nu)

    @property
    def nu(self) -> complex:
        return (0.5 - self.alpha) / 1j

    @property
    def mu2R2(self) -> complex:
        return self.alpha * (1.0 - self.alpha)


class KernelConvention(enum.Enum):
    """Additive-constant scheme of the renormalized massless kernel."""

    SERIES_LIMIT = "series"
    PAPER_CLOSED_FORM = "paper"


def subtraction_constant(m: MassParam) -> complex:
    """The alpha-pole constant removed in the massless limit: Gamma(1-a)Gamma(a)/(4 pi)."""
    if m.alpha == 0:
        raise PoleError("subtraction constant has a pole at alpha = 0")
    return specfun.gamma_c(1.0 - m.alpha) * specfun.gamma_c(m.alpha) / FOUR_PI


def massive_w(m: MassParam, lam):
    """Principal-series two-point kernel as a function of the invariant lambda."""
    x = (1.0 - np.asarray(lam, dtype=complex)) / 2.0
    return subtraction_constant(m) * specfun.hyp2f1_log1(m.alpha, x)


def massless_w(lam, conv: KernelConvention = KernelConvention.SERIES_LIMIT):
    """Renormalized massless kernel; principal branch off the cut lambda <= -1."""
    lam = np.asarray(lam, dtype=complex)
    on_cut = (lam.imag == 0.0) & (lam.real <= -1.0)
    if np.any(on_cut):
        raise CutError("massless kernel evaluated on the coincidence cut with no epsilon")
    if conv is KernelConvention.SERIES_LIMIT:
        vals = -np.log((1.0 + lam) / 2.0) / FOUR_PI
    else:
        vals = -np.log(2.0 * (1.0 + lam)) / FOUR_PI
    return complex(vals) if vals.ndim == 0 else vals


def general_w(d: int, nu: float, lam, params: DsParams) -> complex:
    """General-dimension principal-series kernel (Legendre-integral route)."""
    # The e^{pi nu} of the prefactor cancels against the e^{-pi nu} in c_{d,nu}.
    coef = (specfun.gamma_c((d - 1) / 2.0 + 1j * nu) * specfun.gamma_c((d - 1) / 2.0 - 1j * nu)
            / (2.0 ** d * math.pi ** (d / 2.0) * params.R ** (d - 1) * specfun.gamma_c(d / 2.0)))
    return coef * specfun.legendre_p_int(d, nu, lam)


def flat_remark_f(lam):
    """ln((1-lambda)/(1+lambda)): the rejected wave-equation solution of the Remark.

    Principal branch; cut on both (-inf, -1] and [1, inf).  Its discontinuity
    across (1, inf) - spacelike-separated antipodal pairs - is the locality
    violation the Remark points out.
    """
    lam = np.asarray(lam, dtype=complex)
    on_cut = (lam.imag == 0.0) & (np.abs(lam.real) >= 1.0)
    if np.any(on_cut):
        raise CutError("flat-case solution evaluated on a cut with no epsilon")
    vals = np.log(1.0 - lam) - np.log(1.0 + lam)
    return complex(vals) if vals.ndim == 0 else vals


def lambda_eps(x: DsPoint, xp: DsPoint, eps: float) -> complex:
    """Invariant of the tube-shifted pair: tau -> tau - i eps, tau' -> tau' + i eps."""
    R = x.params.R
    z = embed(x.tau - 1j * eps, x.theta, R)
    zp = embed(xp.tau + 1j * eps, xp.theta, R)
    return complex(minkowski_dot(z, zp)) / R**2


DEFAULT_EPS_LEVELS = tuple(1e-2 * 0.5 ** k for k in range(6))


def boundary_value_w(x: DsPoint, xp: DsPoint, eps_levels=None,
                     conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                     tol: float = 1e-8, kernel=None):
    """Boundary value of the kernel at a real pair via epsilon extrapolation.

    Evaluates the kernel at lambda(x_eps, x'_eps) on a decreasing ladder of
    epsilon levels and Richardson-extrapolates to eps = 0.  Returns
    (value, err_estimate).  `kernel` defaults to the massless kernel with the
    chosen convention; pass a callable lam -> W for other kernels.
    """
    if x.tau == xp.tau and x.theta == xp.theta:
        raise CutError("boundary value requested at coincident points")
    if eps_levels is None:
        eps_levels = DEFAULT_EPS_LEVELS
    eps_levels = np.asarray(sorted(eps_levels, reverse=True), dtype=float)
    if kernel is None:
        kernel = lambda lam: massless_w(lam, conv)
    vals = np.array([kernel(lambda_eps(x, xp, e)) for e in eps_levels])
    value, err = richardson(eps_levels, vals[:, None])
    value, err = complex(value[0]), float(err[0])
    from .errors import ConvergenceError
    if err > 10.0 * tol:
        raise ConvergenceError(
            f"epsilon extrapolation did not settle: estimate {err:.3e} vs tol {tol:.1e}",
            achieved=err)
    return value, err


def commutator_w(x: DsPoint, xp: DsPoint, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                 **kw) -> complex:
    """The c-number commutator function W(x,x') - W(x',x).

    Vanishes at spacelike separation; equals -(i/2) sign(tau - tau') at
    timelike separation (sign frozen by the development-time oracle).
    """
    a, _ = boundary_value_w(x, xp, conv=conv, **kw)
    b, _ = boundary_value_w(xp, x, conv=conv, **kw)
    return a - b


def conformal_wave_operator(func, x: DsPoint, h: float = 0.01, order: int = 6):
    """Apply the chart wave operator cos^2(tau/R)(d^2_tau - R^-2 d^2_theta) by FD.

    `func` maps (tau, theta) arrays to values; used for pointwise probes of
    the wave equation on kernel slices.
    """
    from .quadrature import fornberg_weights
    R = x.params.R
    n = order + 1
    offs = (np.arange(n) - order // 2) * h
    w2 = fornberg_weights(0.0, offs, 2)[2]
    ft = func(x.tau + offs, np.full(n, x.theta))
    fth = func(np.full(n, x.tau), x.theta + offs)
    d2t = np.sum(w2 * ft)
    d2th = np.sum(w2 * fth)
    return math.cos(x.tau / R) ** 2 * (d2t - d2th / R**2)
