"""The two-dimensional de Sitter hyperboloid, its charts and isometries.

The manifold is the one-sheeted hyperboloid x0^2 - x1^2 - x2^2 = -R^2 in
3d Minkowski ambient space.  The canonical chart is conformal time tau in
(-pi R/2, pi R/2) and the angle theta on the spatial circle:

    x0 = R tan(tau/R),  x1 = R cos(theta)/cos(tau/R),  x2 = R sin(theta)/cos(tau/R)

with metric (d tau^2 - R^2 d theta^2)/cos^2(tau/R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DsKreinError

AMBIENT_METRIC = np.diag([1.0, -1.0, -1.0])

_HYPERBOLOID_RTOL = 1e-12
_GROUP_TOL = 1e-12


@dataclass(frozen=True)
class DsParams:
    """Global parameters: the de Sitter radius R."""

    R: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.R) and self.R > 0):
            raise DsKreinError(f"de Sitter radius must be positive and finite, got {self.R}")


def minkowski_dot(u, v):
    """Ambient Lorentzian product u0 v0 - u1 v1 - u2 v2 (vectorized over last axis)."""
    u = np.asarray(u)
    v = np.asarray(v)
    return u[..., 0] * v[..., 0] - u[..., 1] * v[..., 1] - u[..., 2] * v[..., 2]


def embed(tau, theta, R):
    """Embedding coordinates (..., 3) from conformal coordinates.

    Works for complex tau, which is how the i-epsilon tube shift enters.
    """
    tau = np.asarray(tau)
    theta = np.asarray(theta)
    sec = 1.0 / np.cos(tau / R)
    x0 = R * np.tan(tau / R)
    x1 = R * np.cos(theta) * sec
    x2 = R * np.sin(theta) * sec
    return np.stack(np.broadcast_arrays(x0, x1, x2), axis=-1)


@dataclass(frozen=True)
class DsPoint:
    """A real point of X2, carrying both conformal and embedding coordinates."""

    tau: float
    theta: float
    params: DsParams = field(default_factory=DsParams)

    def __post_init__(self):
        R = self.params.R
        if not abs(self.tau) < math.pi * R / 2:
            raise DsKreinError(f"conformal time {self.tau} outside (-pi R/2, pi R/2)")
        object.__setattr__(self, "theta", self.theta % (2 * math.pi))

    @property
    def vec(self):
        return embed(self.tau, self.theta, self.params.R)

    @property
    def x0(self):
        return self.vec[0]

    @property
    def x1(self):
        return self.vec[1]

    @property
    def x2(self):
        return self.vec[2]

    @classmethod
    def from_embedding(cls, vec, params: DsParams):
        vec = np.asarray(vec, dtype=float)
        R = params.R
        norm = minkowski_dot(vec, vec)
        if abs(norm + R * R) > _HYPERBOLOID_RTOL * R * R * 100:
            raise DsKreinError(f"point does not lie on the hyperboloid: x.x = {norm}, expected {-R*R}")
        tau = R * math.atan(vec[0] / R)
        theta = math.atan2(vec[2], vec[1])
        return cls(tau=tau, theta=theta, params=params)

    def antipode(self) -> "DsPoint":
        return DsPoint.from_embedding(-self.vec, self.params)

    def complexify(self, eps: float) -> "ComplexDsPoint":
        """Shift tau -> tau - i*eps (eps > 0 lands in the backward tube)."""
        z = embed(self.tau - 1j * eps, self.theta, self.params.R)
        return ComplexDsPoint(vec=tuple(z), params=self.params)


@dataclass(frozen=True)
class ComplexDsPoint:
    """A point of the complex hyperboloid, tagged by the tube it sits in."""

    vec: tuple
    params: DsParams = field(default_factory=DsParams)

    def __post_init__(self):
        z = np.asarray(self.vec, dtype=complex)
        R = self.params.R
        norm = minkowski_dot(z, z)
        if abs(norm + R * R) > 1e-10 * R * R:
            raise DsKreinError(f"complex point off the hyperboloid: z.z = {norm}")

    @property
    def array(self):
        return np.asarray(self.vec, dtype=complex)

    @property
    def tube_tag(self) -> str:
        y = self.array.imag
        cone = minkowski_dot(y, y)
        if cone > 0 and y[0] > 0:
            return "forward"
        if cone > 0 and y[0] < 0:
            return "backward"
        return "real"


@dataclass(frozen=True)
class GroupElement:
    """An element of SO_0(1,2) acting on the ambient space."""

    M: np.ndarray

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        object.__setattr__(self, "M", M)
        if M.shape != (3, 3):
            raise DsKreinError("group element must be a 3x3 matrix")
        defect = M.T @ AMBIENT_METRIC @ M - AMBIENT_METRIC
        if np.max(np.abs(defect)) > _GROUP_TOL * 10:
            raise DsKreinError("matrix does not preserve the ambient metric")
        if abs(np.linalg.det(M) - 1.0) > 1e-10:
            raise DsKreinError("matrix is not in SO(1,2): det != 1")
        if M[0, 0] <= 0:
            raise DsKreinError("matrix is not orthochronous: M[0,0] <= 0")

    def inverse(self) -> "GroupElement":
        # J M^T J is the Lorentzian inverse.
        return GroupElement(AMBIENT_METRIC @ self.M.T @ AMBIENT_METRIC)

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.M @ other.M)


def generators(kind: str, parameter: float) -> GroupElement:
    """One-parameter subgroups: spatial rotation and the two ambient boosts."""
    c, s = math.cos(parameter), math.sin(parameter)
    ch, sh = math.cosh(parameter), math.sinh(parameter)
    if kind == "rotation":
        M = [[1, 0, 0], [0, c, -s], [0, s, c]]
    elif kind == "boost01":
        M = [[ch, sh, 0], [sh, ch, 0], [0, 0, 1]]
    elif kind == "boost02":
        M = [[ch, 0, sh], [0, 1, 0], [sh, 0, ch]]
    else:
        raise DsKreinError(f"unknown generator kind {kind!r}")
    return GroupElement(np.array(M, dtype=float))


def group_action(g: GroupElement, x: DsPoint) -> DsPoint:
    return DsPoint.from_embedding(g.M @ x.vec, x.params)


def invariant_lambda(z, zp, params: DsParams) -> complex:
    """The two-point invariant lambda = z.z'/R^2.

    Accepts DsPoint, ComplexDsPoint or raw coordinate arrays; vectorizes over
    leading axes of arrays.
    """
    a = _coords(z)
    b = _coords(zp)
    return minkowski_dot(a, b) / params.R**2


def _coords(p):
    if isinstance(p, DsPoint):
        return p.vec
    if isinstance(p, ComplexDsPoint):
        return p.array
    return np.asarray(p)


def causal_class(x: DsPoint, xp: DsPoint, tol: float = 1e-10) -> str:
    """Pairwise causal type from the sign of (x-x')^2 = -2 R^2 (1+lambda)."""
    lam = invariant_lambda(x, xp, x.params).real
    if lam < -1 - tol:
        return "timelike"
    if lam > -1 + tol:
        return "spacelike"
    return "lightlike"
