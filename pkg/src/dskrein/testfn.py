"""Test functions on X2: grids, measure, Laplacian, smearing and pairings.

Functions live on a fixed conformal-chart grid: composite Gauss-Legendre
nodes in tau over a window bounded away from conformal infinity, uniform
periodic nodes in theta.  Smooth compactly supported bumps carry analytic
partial-derivative evaluators, so the Laplace-Beltrami operator can be
applied exactly (twice, where needed); grid-only functions fall back to FFT
differentiation in theta and high-order stencils in tau.

The indefinite pairing <f,g> = int int conj(f) W0 g dsigma dsigma' is
evaluated by epsilon-regularized double quadrature with Richardson
extrapolation in epsilon; `indef_gram` batches a whole Gram matrix through
one sweep of the kernel matrix per epsilon level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DsKreinError, NormalizationError, SupportError
from .geometry import DsParams, DsPoint, GroupElement, embed
from .kernels import FOUR_PI, KernelConvention, massive_w, massless_w
from .quadrature import derivative_matrix, gauss_legendre_panels, richardson

DEFAULT_WINDOW_FRACTION = 0.8
MARGIN_CELLS = 4


# ---------------------------------------------------------------------------
# Grid and measure


@dataclass(frozen=True)
class ChartGrid:
    """Quadrature grid on the conformal chart window."""

    geom: DsParams = field(default_factory=DsParams)
    n_tau: int = 128
    n_theta: int = 96
    window_fraction: float = DEFAULT_WINDOW_FRACTION
    panel: int = 8

    @property
    def tau_max(self) -> float:
        return self.window_fraction * math.pi * self.geom.R / 2.0

    @cached_property
    def _tau_rule(self):
        return gauss_legendre_panels(-self.tau_max, self.tau_max, self.n_tau, self.panel)

    @property
    def tau(self):
        return self._tau_rule[0]

    @property
    def tau_weights(self):
        return self._tau_rule[1]

    @cached_property
    def theta(self):
        return np.arange(self.n_theta) * (2.0 * math.pi / self.n_theta)

    @property
    def d_theta(self) -> float:
        return 2.0 * math.pi / self.n_theta

    @cached_property
    def mesh(self):
        return np.meshgrid(self.tau, self.theta, indexing="ij")

    @cached_property
    def measure(self):
        """dsigma weights: GL weight x R/cos^2(tau/R) x dtheta, shape (n_tau, n_theta)."""
        R = self.geom.R
        w_tau = self.tau_weights * R / np.cos(self.tau / R) ** 2
        return np.outer(w_tau, np.full(self.n_theta, self.d_theta))

    @property
    def max_spacing(self) -> float:
        return max(float(np.max(np.diff(self.tau))), self.geom.R * self.d_theta)

    def embedded(self, eps: float = 0.0):
        """Flattened embedding coordinates with tau -> tau + i*eps, shape (N, 3)."""
        TAU, THETA = self.mesh
        tau = TAU if eps == 0.0 else TAU + 1j * eps
        return embed(tau, THETA, self.geom.R).reshape(-1, 3)

    @cached_property
    def d1_tau(self):
        return derivative_matrix(self.tau, 1, stencil=7)

    @cached_property
    def d2_tau(self):
        return derivative_matrix(self.tau, 2, stencil=7)

    @cached_property
    def theta_wavenumbers(self):
        return np.fft.fftfreq(self.n_theta, d=1.0 / self.n_theta) * 1j

    def dtheta_fft(self, values, order: int = 1):
        k = self.theta_wavenumbers ** order
        return np.fft.ifft(np.fft.fft(values, axis=1) * k[None, :], axis=1)

    def with_resolution(self, factor: float) -> "ChartGrid":
        n_tau = max(self.panel, int(round(self.n_tau * factor / self.panel)) * self.panel)
        n_theta = max(8, int(round(self.n_theta * factor / 2)) * 2)
        return ChartGrid(self.geom, n_tau, n_theta, self.window_fraction, self.panel)

    def default_eps_levels(self, base_factor: float = 1.0, n_levels: int = 4):
        e0 = base_factor * self.max_spacing
        return tuple(e0 * 2.0 ** k for k in range(n_levels))


@dataclass(frozen=True)
class MeasureGrid:
    """The invariant-measure weights of a chart grid (spec-facing wrapper)."""

    grid: ChartGrid

    @property
    def weights(self):
        return self.grid.measure

    def total(self) -> float:
        return float(np.sum(self.weights))

    def analytic_total(self) -> float:
        R = self.grid.geom.R
        tmax = self.grid.tau_max
        return R * 2.0 * math.pi * R * (math.tan(tmax / R) - math.tan(-tmax / R))


# ---------------------------------------------------------------------------
# Analytic generators

DEFAULT_BUMP_ORDER = 6


def _bump_profile_derivs(s, k: int, m: int = DEFAULT_BUMP_ORDER):
    """k-th derivative of the profile cos^{2m}(pi s / 2) on |s| < 1, zero outside.

    The profile has a zero of order 2m at the support edge, so it is
    C^{2m-1} across it, and inside the support it is a finite cosine sum

        cos^{2m}(x) = 4^{-m} [ C(2m, m) + 2 sum_j C(2m, m-j) cos(2 j x) ],

    which differentiates exactly to any order.  Compared with the classic
    exp(-1/(1 - s^2)) bump this trades genuine C-infinity for quadrature
    error that actually decays at the grid resolutions in use: fixed-order
    smoothness is invisible at the working tolerances while the exponential
    bump's edge layers are not.
    """
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    if not np.any(inside):
        return out
    si = s[inside]
    acc = np.zeros_like(si)
    if k == 0:
        acc += math.comb(2 * m, m)
    half_pi_k = k * math.pi / 2.0
    for j in range(1, m + 1):
        w = j * math.pi
        acc += 2.0 * math.comb(2 * m, m - j) * w ** k * np.cos(w * si + half_pi_k)
    out[inside] = acc / 4.0 ** m
    return out


def _wrap_angle(dtheta):
    return (np.asarray(dtheta) + math.pi) % (2.0 * math.pi) - math.pi


class ProductBump:
    """amplitude * phi((tau-tau_c)/w_tau) * phi(wrap(theta-theta_c)/w_theta)."""

    def __init__(self, amplitude, tau_c, theta_c, w_tau, w_theta,
                 order: int = DEFAULT_BUMP_ORDER):
        self.amplitude = complex(amplitude)
        self.tau_c = float(tau_c)
        self.theta_c = float(theta_c)
        self.w_tau = float(w_tau)
        self.w_theta = float(w_theta)
        self.order = int(order)
        if self.w_theta >= math.pi:
            raise SupportError("theta width must stay below pi for a single-valued bump")

    def partial(self, a: int, b: int, tau, theta):
        s_tau = (np.asarray(tau, dtype=float) - self.tau_c) / self.w_tau
        s_th = _wrap_angle(np.asarray(theta) - self.theta_c) / self.w_theta
        return (self.amplitude
                * _bump_profile_derivs(s_tau, a, self.order) / self.w_tau ** a
                * _bump_profile_derivs(s_th, b, self.order) / self.w_theta ** b)

    def __call__(self, tau, theta):
        return self.partial(0, 0, tau, theta)

    @property
    def max_order(self):
        # derivatives past 2m-1 hit the finite smoothness at the support edge
        return 2 * self.order - 4


class LinComb:
    """Linear combination of generators."""

    def __init__(self, terms):
        self.terms = [(complex(c), g) for c, g in terms if c != 0]

    def __call__(self, tau, theta):
        return self.partial(0, 0, tau, theta)

    def partial(self, a, b, tau, theta):
        out = None
        for c, g in self.terms:
            v = c * g.partial(a, b, tau, theta)
            out = v if out is None else out + v
        if out is None:
            out = np.zeros(np.broadcast(np.asarray(tau), np.asarray(theta)).shape, dtype=complex)
        return out

    @property
    def max_order(self):
        return min((g.max_order for _, g in self.terms), default=2 * DEFAULT_BUMP_ORDER - 4)


class LapGen:
    """Laplace-Beltrami of an inner generator: cos^2(tau/R)(f_tt - f_hh / R^2).

    Provides its own partials up to second order (enough for one more
    Laplacian), consuming inner partials up to fourth order.
    """

    def __init__(self, inner, R: float):
        self.inner = inner
        self.R = R
        self.max_order = inner.max_order - 2

    def _u(self, a, b, tau, theta):
        return (self.inner.partial(a + 2, b, tau, theta)
                - self.inner.partial(a, b + 2, tau, theta) / self.R ** 2)

    def __call__(self, tau, theta):
        return self.partial(0, 0, tau, theta)

    def partial(self, a, b, tau, theta):
        if a + b > self.max_order:
            raise DsKreinError("analytic derivative depth exhausted")
        R = self.R
        tau = np.asarray(tau, dtype=float)
        c = np.cos(tau / R) ** 2
        if (a, b) == (0, 0):
            return c * self._u(0, 0, tau, theta)
        if (a, b) == (0, 1):
            return c * self._u(0, 1, tau, theta)
        if (a, b) == (0, 2):
            return c * self._u(0, 2, tau, theta)
        cp = -np.sin(2.0 * tau / R) / R
        if (a, b) == (1, 0):
            return cp * self._u(0, 0, tau, theta) + c * self._u(1, 0, tau, theta)
        if (a, b) == (1, 1):
            return cp * self._u(0, 1, tau, theta) + c * self._u(1, 1, tau, theta)
        cpp = -2.0 * np.cos(2.0 * tau / R) / R ** 2
        if (a, b) == (2, 0):
            return (cpp * self._u(0, 0, tau, theta)
                    + 2.0 * cp * self._u(1, 0, tau, theta)
                    + c * self._u(2, 0, tau, theta))
        raise DsKreinError(f"LapGen partial ({a},{b}) not supported")


class TransportedGen:
    """Pullback of a generator along a group element: x -> f(g^{-1} x)."""

    def __init__(self, inner, g: GroupElement, params: DsParams):
        self.inner = inner
        self.Minv = g.inverse().M
        self.params = params
        # A pure rotation is a theta shift; analytic partials survive it.
        self._is_rotation = bool(np.allclose(self.Minv[0], [1.0, 0.0, 0.0], atol=1e-14)
                                 and np.allclose(self.Minv[:, 0], [1.0, 0.0, 0.0], atol=1e-14))
        self.max_order = inner.max_order if self._is_rotation else 0

    def _pullback(self, tau, theta):
        R = self.params.R
        vec = embed(np.asarray(tau, dtype=float), np.asarray(theta, dtype=float), R)
        w = vec @ self.Minv.T
        tau_p = R * np.arctan(w[..., 0] / R)
        theta_p = np.arctan2(w[..., 2], w[..., 1])
        return tau_p, theta_p

    def __call__(self, tau, theta):
        return self.inner(*self._pullback(tau, theta))

    def partial(self, a, b, tau, theta):
        if (a, b) == (0, 0):
            return self(tau, theta)
        if not self._is_rotation:
            raise DsKreinError("analytic partials unavailable for boosted pullbacks")
        return self.inner.partial(a, b, *self._pullback(tau, theta))


# ---------------------------------------------------------------------------
# TestFunction


@dataclass
class TestFunction:
    """A smooth compactly supported function sampled on a chart grid."""

    grid: ChartGrid
    values: np.ndarray
    generator: object = None
    is_real: bool = False

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n_tau, self.grid.n_theta):
            raise DsKreinError("values shape does not match the grid")

    # -- algebra (generators compose) --
    def __add__(self, other: "TestFunction") -> "TestFunction":
        gen = None
        if self.generator is not None and other.generator is not None:
            gen = LinComb([(1.0, self.generator), (1.0, other.generator)])
        return TestFunction(self.grid, self.values + other.values, gen,
                            self.is_real and other.is_real)

    def __sub__(self, other: "TestFunction") -> "TestFunction":
        return self + (-1.0) * other

    def __mul__(self, c) -> "TestFunction":
        gen = LinComb([(c, self.generator)]) if self.generator is not None else None
        real = self.is_real and complex(c).imag == 0.0
        return TestFunction(self.grid, self.values * c, gen, real)

    __rmul__ = __mul__

    def margin_defect(self) -> float:
        m = MARGIN_CELLS
        edge = np.concatenate([self.values[:m].ravel(), self.values[-m:].ravel()])
        return float(np.max(np.abs(edge))) if edge.size else 0.0

    def validate(self, tol: float = 1e-14):
        scale = max(float(np.max(np.abs(self.values))), 1.0)
        if self.margin_defect() > tol * scale:
            raise SupportError("test function does not vanish in the tau boundary margin")
        if self.generator is not None:
            TAU, THETA = self.grid.mesh
            resampled = np.asarray(self.generator(TAU, THETA), dtype=complex)
            if np.max(np.abs(resampled - self.values)) > 1e-12 * scale:
                raise DsKreinError("grid values disagree with the generator samples")

    # -- serialization --
    def to_json(self) -> str:
        return json.dumps({
            "n_tau": self.grid.n_tau,
            "n_theta": self.grid.n_theta,
            "window_fraction": self.grid.window_fraction,
            "R": self.grid.geom.R,
            "is_real": self.is_real,
            "values": [[float(v.real), float(v.imag)] for v in self.values.ravel()],
        })

    @classmethod
    def from_json(cls, text: str) -> "TestFunction":
        d = json.loads(text)
        grid = ChartGrid(DsParams(d["R"]), d["n_tau"], d["n_theta"], d["window_fraction"])
        flat = np.array([complex(re, im) for re, im in d["values"]])
        return cls(grid, flat.reshape(d["n_tau"], d["n_theta"]), None, d["is_real"])


def from_generator(gen, grid: ChartGrid, is_real: bool = False) -> TestFunction:
    TAU, THETA = grid.mesh
    vals = np.asarray(gen(TAU, THETA), dtype=complex)
    return TestFunction(grid, vals, gen, is_real)


def bump(center: DsPoint, widths, amplitude, grid: ChartGrid,
         order: int = DEFAULT_BUMP_ORDER) -> TestFunction:
    """A smooth compactly supported product bump with analytic derivatives."""
    w_tau, w_theta = widths
    m = MARGIN_CELLS
    lo, hi = grid.tau[m], grid.tau[-1 - m]
    if not (lo < center.tau - w_tau and center.tau + w_tau < hi):
        raise SupportError(
            f"bump support [{center.tau - w_tau:.3f}, {center.tau + w_tau:.3f}] "
            f"escapes the margin-reduced window [{lo:.3f}, {hi:.3f}]")
    gen = ProductBump(amplitude, center.tau, center.theta, w_tau, w_theta, order)
    is_real = complex(amplitude).imag == 0.0
    return from_generator(gen, grid, is_real)


def integral(f: TestFunction) -> complex:
    return complex(np.sum(f.values * f.grid.measure))


def norm_l1(f: TestFunction) -> float:
    return float(np.sum(np.abs(f.values) * f.grid.measure))


def laplace_beltrami(f: TestFunction) -> TestFunction:
    """Apply cos^2(tau/R)(d^2_tau - R^-2 d^2_theta); analytic route when possible."""
    grid = f.grid
    R = grid.geom.R
    gen = f.generator
    if gen is not None and getattr(gen, "max_order", 0) >= 2:
        return from_generator(LapGen(gen, R), grid, f.is_real)
    d2t = grid.d2_tau @ f.values
    d2h = grid.dtheta_fft(f.values, order=2)
    TAU, _ = grid.mesh
    vals = np.cos(TAU / R) ** 2 * (d2t - d2h / R ** 2)
    return TestFunction(grid, vals, None, f.is_real)


def transport(g: GroupElement, f: TestFunction) -> TestFunction:
    """alpha_g f = f o g^{-1}, with a support-escape check at the window margin."""
    grid = f.grid
    if f.generator is not None:
        gen = TransportedGen(f.generator, g, grid.geom)
        out = from_generator(gen, grid, f.is_real)
    else:
        out = _transport_grid(g, f)
    scale = max(float(np.max(np.abs(f.values))), 1e-300)
    if out.margin_defect() > 1e-9 * scale:
        raise SupportError("transported support escapes the tau window margin")
    return out


def _transport_grid(g: GroupElement, f: TestFunction) -> TestFunction:
    from scipy.interpolate import RectBivariateSpline
    grid = f.grid
    R = grid.geom.R
    Minv = g.inverse().M
    TAU, THETA = grid.mesh
    vec = embed(TAU, THETA, R)
    w = vec @ Minv.T
    tau_p = R * np.arctan(w[..., 0] / R)
    theta_p = np.arctan2(w[..., 2], w[..., 1]) % (2.0 * math.pi)
    pad = 4
    th_ext = np.concatenate([grid.theta[-pad:] - 2 * math.pi, grid.theta,
                             grid.theta[:pad] + 2 * math.pi])
    vals_ext = np.concatenate([f.values[:, -pad:], f.values, f.values[:, :pad]], axis=1)
    out = np.zeros_like(f.values)
    inside = (tau_p >= grid.tau[0]) & (tau_p <= grid.tau[-1])
    for part, target in ((vals_ext.real, "re"), (vals_ext.imag, "im")):
        sp = RectBivariateSpline(grid.tau, th_ext, part, kx=3, ky=3)
        vals = sp.ev(tau_p[inside], theta_p[inside])
        if target == "re":
            out[inside] += vals
        else:
            out[inside] += 1j * vals
    return TestFunction(grid, out, None, f.is_real)


def decompose(f: TestFunction, h: TestFunction):
    """f = f0 + (int f) h with int f0 = 0; requires int h = 1."""
    ih = integral(h)
    if abs(ih - 1.0) > 1e-10:
        raise NormalizationError(f"h is not normalized: int h = {ih}")
    c = integral(f)
    f0 = f - c * h
    return f0, c


# ---------------------------------------------------------------------------
# Pairing engine
#
# For the massless log kernel the theta dependence enters only through
# theta - theta', and the angular Fourier series is exact:
#
#   ln(2(cos a - cos d)) = -i a - 2 sum_m e^{i a m} cos(m d) / m,  Im a > 0,
#
# with a = (tau' - tau)/R + 2 i eps/R.  With 1 + lambda =
# (cos a - cos d)/(cos t cos t') this turns the double quadrature into an
# exact theta convolution plus rank-one tau kernels per mode: the light-cone
# singularity is resummed analytically and eps can be taken to zero outright.
# The position-space eps-ladder engine below is kept for non-log kernels and
# as an independent cross-check.


def fourier_gram(fs, gs, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                 eps: float = 0.0):
    """Cross Gram <f_a, g_b> of the massless kernel via angular Fourier modes."""
    if not fs or not gs:
        return np.zeros((len(fs), len(gs)), dtype=complex)
    grid = fs[0].grid
    for tf in list(fs) + list(gs):
        if tf.grid is not grid and tf.grid != grid:
            raise DsKreinError("all pairing operands must share one grid")
    R = grid.geom.R
    t = grid.tau / R
    et = eps / R
    w1 = grid.tau_weights * R / np.cos(t) ** 2
    dth = grid.d_theta

    Fh = np.stack([np.fft.fft(tf.values, axis=1) for tf in fs])   # (nf, n_tau, n_theta)
    Gh = np.stack([np.fft.fft(tf.values, axis=1) for tf in gs])
    modes = np.rint(np.fft.fftfreq(grid.n_theta, 1.0 / grid.n_theta)).astype(int)
    absm = np.abs(modes)

    # m != 0: W_m = e^{i a |m|} / (4 pi |m|), rank one in (tau, tau')
    phase_f = np.exp(-1j * np.outer(t, absm))          # (n_tau, n_m)
    phase_g = np.exp(+1j * np.outer(t, absm))
    Sf = np.einsum("ati,ti,t->ai", np.conj(Fh), phase_f, w1)
    Sg = np.einsum("bti,ti,t->bi", Gh, phase_g, w1)
    nz = absm != 0
    coef = np.zeros(len(modes))
    coef[nz] = np.exp(-2.0 * et * absm[nz]) / (FOUR_PI * absm[nz])
    gram = np.einsum("ai,bi,i->ab", Sf, Sg, coef)

    # m = 0: W_0 = (1/4pi)[ i(t'-t) - 2 eps + ln(4 cos(t-i eps) cos(t'+i eps)) ],
    # separable into an f-side and a g-side piece
    lcf = np.log(np.cos(t - 1j * et))
    lcg = np.log(np.cos(t + 1j * et))
    const = math.log(4.0) if conv is KernelConvention.SERIES_LIMIT else 0.0
    side_f = (-1j * t - 2.0 * et + const + lcf) / FOUR_PI
    side_g = 1j * t / FOUR_PI + lcg / FOUR_PI
    f0 = np.einsum("at,t->a", np.conj(Fh[:, :, 0]), w1)
    g0 = np.einsum("bt,t->b", Gh[:, :, 0], w1)
    f0s = np.einsum("at,t,t->a", np.conj(Fh[:, :, 0]), side_f, w1)
    g0s = np.einsum("bt,t,t->b", Gh[:, :, 0], side_g, w1)
    gram += np.outer(f0s, g0) + np.outer(f0, g0s)
    return gram * dth ** 2


def fourier_smear(g: TestFunction, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                  eps: float = 0.0):
    """u(x) = int W0(x, x') g(x') dsigma' via the exact theta convolution."""
    grid = g.grid
    R = grid.geom.R
    t = grid.tau / R
    et = eps / R
    w1 = grid.tau_weights * R / np.cos(t) ** 2
    Gh = np.fft.fft(g.values, axis=1)
    modes = np.rint(np.fft.fftfreq(grid.n_theta, 1.0 / grid.n_theta)).astype(int)
    absm = np.abs(modes)

    uh = np.zeros((grid.n_tau, grid.n_theta), dtype=complex)
    nz = absm != 0
    coef = np.exp(-2.0 * et * absm[nz]) / (FOUR_PI * absm[nz])
    sg = np.einsum("ti,ti,t->i", Gh[:, nz], np.exp(1j * np.outer(t, absm[nz])), w1)
    uh[:, nz] = np.exp(-1j * np.outer(t, absm[nz])) * (coef * sg)[None, :]

    lcf = np.log(np.cos(t - 1j * et))
    lcg = np.log(np.cos(t + 1j * et))
    const = math.log(4.0) if conv is KernelConvention.SERIES_LIMIT else 0.0
    side_f = (-1j * t - 2.0 * et + const + lcf) / FOUR_PI
    side_g = 1j * t / FOUR_PI + lcg / FOUR_PI
    g0 = np.sum(Gh[:, 0] * w1)
    g0s = np.sum(Gh[:, 0] * side_g * w1)
    uh[:, 0] += side_f * g0 + g0s
    return np.fft.ifft(uh * grid.d_theta, axis=1) * grid.n_theta


def _massless_kernel(conv: KernelConvention):
    if conv is KernelConvention.SERIES_LIMIT:
        ln2 = math.log(2.0)
        return lambda lam: -(np.log(1.0 + lam) - ln2) / FOUR_PI
    ln2 = math.log(2.0)
    return lambda lam: -(np.log(1.0 + lam) + ln2) / FOUR_PI


def massive_kernel(m):
    """Array kernel lam -> W_alpha(lam) for use in the pairing engine."""
    return lambda lam: massive_w(m, lam)


def indef_gram(fs, gs, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
               kernel=None, eps_levels=None, block_rows: int = 1024,
               method: str = None):
    """Cross Gram matrix <f_a, g_b> of the smeared kernel pairing.

    The massless kernel defaults to the Fourier-mode engine (exact in theta,
    eps = 0); explicit kernels or method="direct" use the position-space
    sweep with the eps ladder.  The invariant depends on theta only through
    theta - theta', so each sweep evaluates the kernel on a (tau, tau',
    delta-theta) slab and contracts with the test functions as a circular
    convolution, which keeps kernel evaluations at n_tau^2 n_theta per level.
    """
    if not fs or not gs:
        return np.zeros((len(fs), len(gs)), dtype=complex)
    if method is None:
        method = "direct" if kernel is not None else "fourier"
    if method == "fourier":
        if kernel is not None:
            raise DsKreinError("the Fourier engine serves only the massless kernel")
        return fourier_gram(fs, gs, conv)
    grid = fs[0].grid
    for t in list(fs) + list(gs):
        if t.grid is not grid and t.grid != grid:
            raise DsKreinError("all pairing operands must share one grid")
    if eps_levels is None:
        eps_levels = grid.default_eps_levels()
    eps_levels = np.asarray(sorted(eps_levels, reverse=True), dtype=float)
    if kernel is None:
        kernel = _massless_kernel(conv)

    R = grid.geom.R
    t = grid.tau / R
    d = np.arange(grid.n_theta) * grid.d_theta
    cos_d = np.cos(d)
    wrow = grid.measure[:, 0]
    Fh = np.stack([np.conj(np.fft.fft(f.values, axis=1)) * wrow[:, None] for f in fs])
    Gh = np.stack([np.fft.fft(g.values, axis=1) * wrow[:, None] for g in gs])

    grams = np.empty((len(eps_levels), len(fs), len(gs)), dtype=complex)
    for k, eps in enumerate(eps_levels):
        a = t[:, None] - 1j * eps / R
        b = t[None, :] + 1j * eps / R
        lam = (np.tan(a)[..., None] * np.tan(b)[..., None]
               - (1.0 / (np.cos(a) * np.cos(b)))[..., None] * cos_d[None, None, :])
        Wm = np.fft.fft(kernel(lam), axis=2)
        grams[k] = np.einsum('atm,tsm,bsm->ab', Fh, Wm, Gh) / grid.n_theta
    value, _err = richardson(eps_levels, grams)
    return value


def pair_indef(f: TestFunction, g: TestFunction,
               conv: KernelConvention = KernelConvention.SERIES_LIMIT,
               kernel=None, eps_levels=None, method: str = None) -> complex:
    """<f, g> = int int conj(f(x)) W(x, x') g(x') dsigma dsigma'."""
    return complex(indef_gram([f], [g], conv, kernel, eps_levels, method=method)[0, 0])


def smear_field(g: TestFunction, conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                eps_levels=None, block_rows: int = 1024, method: str = None):
    """u(x) = int W0(x, x') g(x') dsigma(x') on the function's own grid."""
    if method in (None, "fourier"):
        return fourier_smear(g, conv)
    grid = g.grid
    if eps_levels is None:
        eps_levels = grid.default_eps_levels()
    eps_levels = np.asarray(sorted(eps_levels, reverse=True), dtype=float)
    kernel = _massless_kernel(conv)
    R2 = grid.geom.R ** 2
    w = grid.measure.reshape(-1)
    Gw = g.values.reshape(-1) * w
    N = w.size
    us = np.empty((len(eps_levels), N), dtype=complex)
    for k, eps in enumerate(eps_levels):
        Em = grid.embedded(-eps)
        Ep = grid.embedded(+eps)
        P = np.ascontiguousarray((Ep * np.array([1.0, -1.0, -1.0])).T)
        for lo in range(0, N, block_rows):
            sl = slice(lo, min(lo + block_rows, N))
            lam = (Em[sl] @ P) / R2
            us[k, sl] = kernel(lam) @ Gw
    u, _err = richardson(eps_levels, us)
    return u.reshape(grid.n_tau, grid.n_theta)


# ---------------------------------------------------------------------------
# Construction of the reference function h


def construct_h(seed_center: DsPoint, grid: ChartGrid,
                conv: KernelConvention = KernelConvention.SERIES_LIMIT,
                widths=(0.55, 1.3), aux_widths=(0.9, 2.2), eps_levels=None):
    """Build a real h with int h = 1 and <h, h> = 0.

    Starts from a normalized bump h1 and corrects along the null direction
    box(g): the anomaly makes <h1, box(g)> = -1/(4 pi R^2) (int g) while
    <box(g), box(g)> = 0, so a real shift beta kills the norm.  Returns
    (h, report) with the measured pairings and both beta determinations.
    The tau widths are given at unit radius and scale with R, matching the
    window so the bumps stay equally well resolved at any radius.
    """
    R = grid.geom.R
    widths = (widths[0] * R, widths[1])
    aux_widths = (aux_widths[0] * R, aux_widths[1])
    b1 = bump(seed_center, widths, 1.0, grid)
    h1 = b1 * (1.0 / integral(b1).real)
    aux_center = DsPoint(seed_center.tau, seed_center.theta + 0.5, grid.geom)
    b2 = bump(aux_center, aux_widths, 1.0, grid)
    g = b2 * (1.0 / integral(b2).real)
    lg = laplace_beltrami(g)

    A = indef_gram([h1, lg], [h1, lg], conv, eps_levels=eps_levels)
    n11 = A[0, 0].real
    cross = A[0, 1]
    null = A[1, 1]
    if abs(cross) < 1e-12:
        raise NormalizationError("degenerate auxiliary g: anomaly cross term vanished")

    c = cross.real
    a2 = null.real
    # <h1,h1> + 2 beta c + beta^2 a2 = 0; a2 is a numerical zero.
    if abs(a2) * abs(n11) < 1e-6 * c * c:
        beta = -n11 / (2.0 * c)
    else:
        disc = math.sqrt(max(c * c - a2 * n11, 0.0))
        beta = (-c + math.copysign(disc, c)) / a2
        if abs(beta) > abs(n11 / c):
            beta = -n11 / (2.0 * c)
    beta_closed_form = 2.0 * math.pi * R ** 2 * n11

    h = h1 + beta * lg
    h.is_real = True
    report = {
        "beta": beta,
        "beta_closed_form": beta_closed_form,
        "pair_h1_h1": complex(A[0, 0]),
        "cross_term": complex(cross),
        "null_term": complex(null),
        "integral_h": complex(np.sum(h.values * grid.measure)),
    }
    return h, report
