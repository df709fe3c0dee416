"""Complex special functions needed by the two-point kernels.

gamma_c / loggamma use the Lanczos shifted series with reflection; the
hypergeometric family F(1-alpha, alpha; 1; x) is continued over the whole
cut plane by combining the defining series, the Pfaff transformation, the
logarithmic c-a-b=0 connection at x=1 and the large-x connection (with an
AGM fast path at alpha=1/2, where the function is a complete elliptic
integral).  All hypergeometric routines accept numpy arrays.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import ConvergenceError, CutError, PoleError
from .quadrature import gauss_legendre_panels

# Lanczos coefficients, g=7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Bernoulli B_{2n}/(2n) for the digamma asymptotic tail.
_DIGAMMA_TAIL = np.array([
    1.0 / 12.0, -1.0 / 120.0, 1.0 / 252.0, -1.0 / 240.0,
    1.0 / 132.0, -691.0 / 32760.0, 1.0 / 12.0,
])

_MAX_TERMS = 600


def _is_nonpositive_integer(z: complex) -> bool:
    return z.imag == 0.0 and z.real <= 0.0 and z.real == round(z.real)


def gamma_c(z) -> complex:
    """Gamma function for complex argument (Lanczos; reflection for Re z < 1/2)."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma pole at z = {z}")
    if z.real < 0.5:
        # Gamma(z) Gamma(1-z) = pi / sin(pi z)
        return math.pi / (np.sin(math.pi * z) * gamma_c(1.0 - z))
    zz = z - 1.0
    x = _LANCZOS[0]
    for k in range(1, len(_LANCZOS)):
        x = x + _LANCZOS[k] / (zz + k)
    t = zz + _LANCZOS_G + 0.5
    return _SQRT_2PI * t ** (zz + 0.5) * np.exp(-t) * x


def digamma_c(z) -> complex:
    """Digamma for complex argument: upward recurrence, then asymptotic series."""
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"digamma pole at z = {z}")
    acc = 0.0 + 0.0j
    while z.real < 10.0:
        acc -= 1.0 / z
        z = z + 1.0
    w = 1.0 / (z * z)
    tail = 0.0 + 0.0j
    p = w
    for c in _DIGAMMA_TAIL[:6]:
        tail += c * p
        p *= w
    return acc + np.log(z) - 0.5 / z - tail


def _series_2f1(a, b, c, x, max_terms=_MAX_TERMS, tol=1e-16):
    """Defining Gauss series, vectorized over x (requires |x| < 1)."""
    x = np.asarray(x, dtype=complex)
    total = np.ones_like(x)
    term = np.ones_like(x)
    for n in range(max_terms):
        term = term * ((a + n) * (b + n)) / ((c + n) * (1.0 + n)) * x
        total = total + term
        if np.max(np.abs(term)) <= tol * max(1.0, np.max(np.abs(total))):
            return total
    raise ConvergenceError(
        f"2F1 series did not converge (max_terms={max_terms}, max|x|={np.max(np.abs(x)):.3f})")


def _log_connection_c_eq_ab(a, b, x, max_terms=_MAX_TERMS, tol=1e-16):
    """F(a,b;a+b;x) near x=1 via the logarithmic connection formula.

    Valid for |1-x| < 1; the only case used here has a+b = 1.
    """
    x = np.asarray(x, dtype=complex)
    u = 1.0 - x
    pref = gamma_c(a + b) / (gamma_c(a) * gamma_c(b))
    lnu = np.log(u)
    coef = 1.0 + 0.0j
    total = np.zeros_like(x)
    for k in range(max_terms):
        kern = 2.0 * digamma_c(k + 1.0) - digamma_c(a + k) - digamma_c(b + k)
        term = coef * (kern - lnu)
        total = total + term
        if np.max(np.abs(term)) <= tol * max(1.0, np.max(np.abs(total))) and k > 2:
            break
        coef = coef * ((a + k) * (b + k)) / ((k + 1.0) ** 2) * u
    else:
        raise ConvergenceError("logarithmic 2F1 connection did not converge")
    return pref * total


def _agm(a0, b0, max_iter=64, tol=4e-16):
    a = np.asarray(a0, dtype=complex).copy()
    b = np.asarray(b0, dtype=complex).copy()
    for _ in range(max_iter):
        an = 0.5 * (a + b)
        bn = np.sqrt(a * b)
        # Branch choice: keep bn in the half plane of an (standard "good" AGM).
        flip = (an * np.conj(bn)).real < 0
        bn = np.where(flip, -bn, bn)
        a, b = an, bn
        if np.max(np.abs(a - b)) <= tol * np.max(np.abs(a)):
            return a
    raise ConvergenceError("complex AGM did not converge")


def _ellipk_agm(m):
    """Complete elliptic integral K(m) (parameter convention) via complex AGM."""
    return 0.5 * math.pi / _agm(np.ones_like(np.asarray(m, dtype=complex)), np.sqrt(1.0 - np.asarray(m, dtype=complex)))


def _large_x_generic(a, b, x):
    """DLMF 15.8.2 for c=1, b-a not an integer."""
    x = np.asarray(x, dtype=complex)
    t1 = gamma_c(b - a) / (gamma_c(b) * gamma_c(1.0 - a)) * (-x) ** (-a) \
        * _series_2f1(a, a, a - b + 1.0, 1.0 / x)
    t2 = gamma_c(a - b) / (gamma_c(a) * gamma_c(1.0 - b)) * (-x) ** (-b) \
        * _series_2f1(b, b, b - a + 1.0, 1.0 / x)
    return t1 + t2


def hyp2f1_log1(alpha, x):
    """F(1-alpha, alpha; 1; x), analytically continued over the cut plane.

    alpha is a scalar with 0 < Re alpha <= 1 (the c - a - b = 0 logarithmic
    class); x may be a scalar or array, anywhere off the cut [1, inf).
    Points exactly on the cut (real x >= 1, zero imaginary part) raise CutError.
    """
    alpha = complex(alpha)
    a, b = 1.0 - alpha, alpha
    x_in = np.asarray(x, dtype=complex)
    scalar = x_in.ndim == 0
    x_arr = np.atleast_1d(x_in).astype(complex)

    on_cut = (x_arr.imag == 0.0) & (x_arr.real >= 1.0)
    if np.any(on_cut):
        raise CutError("2F1 requested exactly on the cut [1, inf) with no epsilon")

    if alpha == 0.5:
        # F(1/2,1/2;1;x) = (2/pi) K(x): quadratically convergent and vectorized.
        out = (2.0 / math.pi) * _ellipk_agm(x_arr)
        return complex(out[0]) if scalar else out.reshape(x_in.shape)

    out = np.empty_like(x_arr)
    absx = np.abs(x_arr)
    abs1mx = np.abs(1.0 - x_arr)

    m_series = absx <= 0.8
    m_log1 = (~m_series) & (abs1mx <= 0.8)
    rest = ~(m_series | m_log1)

    if np.any(m_series):
        out[m_series] = _series_2f1(a, b, 1.0, x_arr[m_series])
    if np.any(m_log1):
        out[m_log1] = _log_connection_c_eq_ab(a, b, x_arr[m_log1])
    if np.any(rest):
        xr = x_arr[rest]
        w = xr / (xr - 1.0)
        res = np.empty_like(xr)
        m_ws = np.abs(w) <= 0.8
        if np.any(m_ws):
            # Pfaff: F(a,b;1;x) = (1-x)^(-a) F(a, 1-b; 1; x/(x-1)); 1-b = a here.
            res[m_ws] = (1.0 - xr[m_ws]) ** (-a) * _series_2f1(a, a, 1.0, w[m_ws])
        if np.any(~m_ws):
            d = b - a
            if abs(d.imag) < 1e-8 and abs(d.real - round(d.real)) < 1e-8:
                raise ConvergenceError(
                    "large-x connection degenerate for b-a near an integer "
                    f"(alpha={alpha}); only alpha=1/2 is special-cased")
            res[~m_ws] = _large_x_generic(a, b, xr[~m_ws])
        out[rest] = res
    return complex(out[0]) if scalar else out.reshape(x_in.shape)


def legendre_p_int(d: int, nu: float, lam, rtol: float = 1e-10) -> complex:
    """Generalized Legendre function P^{(d+1)}_{-(d-1)/2 + i nu}(lambda).

    Evaluated from its integral representation
        P = Gamma(d/2)/(sqrt(pi) Gamma((d-1)/2))
            * int_0^pi (lam + sqrt(lam^2-1) cos t)^{-(d-1)/2 + i nu} sin^{d-2} t dt
    by dyadically refined composite Gauss-Legendre quadrature.  The branch of
    sqrt(lam^2-1) and of the complex power is continuous from real lam > 1.
    """
    if d < 2:
        raise ValueError("d >= 2 required (the sin^(d-2) weight degenerates at d=1)")
    lam = complex(lam)
    if lam.imag == 0.0 and lam.real <= -1.0:
        raise CutError("Legendre integral requested on the cut (-inf, -1]")
    if lam.real <= 0.0:
        # Continuing the integrand branch in lambda past the imaginary axis
        # pinches a zero of the base; the representation no longer evaluates P.
        raise CutError("integral representation only used for Re lambda > 0")
    s = np.sqrt(lam - 1.0) * np.sqrt(lam + 1.0)
    sigma = -(d - 1) / 2.0 + 1j * nu
    pref = gamma_c(d / 2.0) / (math.sqrt(math.pi) * gamma_c((d - 1) / 2.0))

    prev = None
    for depth in range(10):
        n_panels = 2 ** (depth + 1)
        nodes, weights = gauss_legendre_panels(0.0, math.pi, 16 * n_panels, 16)
        w = lam + s * np.cos(nodes)
        # Phase-continuous log along the (ordered) integration path; the
        # principal angle at the first node is the branch continuous from
        # lam > 1, where lam + s > 0.
        phase = np.unwrap(np.angle(w))
        logw = np.log(np.abs(w)) + 1j * phase
        integrand = np.exp(sigma * logw) * np.sin(nodes) ** (d - 2)
        cur = np.sum(weights * integrand)
        if prev is not None and abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
            return pref * cur
        prev = cur
    achieved = abs(cur - prev) / max(abs(cur), 1e-300)
    raise ConvergenceError(
        f"Legendre integral refinement stalled at relative change {achieved:.3e}",
        achieved=achieved)
