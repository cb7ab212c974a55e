"""Closed-form differential geometry of a bent tube surface.

The tube has radius ``a`` and length ``L`` along arclength, with hard walls
at both ends.  Its axis follows a hyperbolic-cosine profile

    f(u) = -(1/kappa0) * cosh(kappa0 * (u - u0))

which makes the arclength map analytically invertible and gives the axis
curvature in closed form,

    kappa(s) = -kappa0 / (1 + [kappa0 * (s - s0)]^2),

peaking (in magnitude) at the turning point ``s0``.  Every quantity the
Hamiltonian needs (surface measure factor, principal/mean/Gauss curvatures,
attractive squeezing potential) derives from ``kappa(s)`` directly, so the
axial coordinate ``u`` only ever appears in the 3-space embedding.

Units are fixed repo-wide: lengths in nm, energies in meV, curvatures in
1/nm.  All functions broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

#: hbar^2 / (2 m_e) in eV nm^2.  Configurable per geometry; this default
#: reproduces the reference straight-tube energies to about 0.003 meV.
DEFAULT_HBAR2_OVER_2ME = 0.0380998

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TubeGeometry:
    """Immutable parameter set for one tube.

    Attributes
    ----------
    a : tube radius (nm), > 0.
    L : tube length along arclength (nm), > 0.
    kappa0 : curvature parameter (1/nm), >= 0; 0 means a straight tube.
    s0 : arclength turning point (nm), in [0, L]; ignored when kappa0 == 0.
    mass_ratio : effective mass m*/m_e, > 0.
    hbar2_over_2me : hbar^2/(2 m_e) in eV nm^2.
    """

    a: float
    L: float
    kappa0: float = 0.0
    s0: float = 0.0
    mass_ratio: float = 1.0
    hbar2_over_2me: float = DEFAULT_HBAR2_OVER_2ME

    def __post_init__(self) -> None:
        if not self.a > 0:
            raise ValueError(f"tube radius must be positive, got a={self.a}")
        if not self.L > 0:
            raise ValueError(f"tube length must be positive, got L={self.L}")
        if self.kappa0 < 0:
            raise ValueError(f"curvature parameter must be >= 0, got {self.kappa0}")
        if self.a * self.kappa0 >= 1.0:
            raise ValueError(
                f"a*kappa0 = {self.a * self.kappa0:g} >= 1: the surface measure "
                "would degenerate (need a*kappa0 < 1)"
            )
        if self.kappa0 > 0 and not (0.0 <= self.s0 <= self.L):
            raise ValueError(f"turning point s0={self.s0} outside [0, {self.L}]")
        if not self.mass_ratio > 0:
            raise ValueError(f"mass ratio must be positive, got {self.mass_ratio}")
        if not self.hbar2_over_2me > 0:
            raise ValueError("hbar2_over_2me must be positive")

    @property
    def hb2_2m(self) -> float:
        """hbar^2/(2 m*) in meV nm^2."""
        return 1000.0 * self.hbar2_over_2me / self.mass_ratio

    @property
    def u0(self) -> float:
        """Axial coordinate of the turning point, with u(s=0) = 0."""
        if self.kappa0 == 0:
            return self.s0
        return math.asinh(self.kappa0 * self.s0) / self.kappa0

    @property
    def straight(self) -> bool:
        return self.kappa0 == 0


@dataclass(frozen=True)
class SurfacePoint:
    """A point on the tube surface: angle theta (rad) and arclength s (nm).

    theta is normalized into [0, 2*pi) on construction.
    """

    theta: float
    s: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.theta) or not math.isfinite(self.s):
            raise ValueError(f"non-finite surface point ({self.theta}, {self.s})")
        object.__setattr__(self, "theta", self.theta % TWO_PI)


def shape_profile(geom: TubeGeometry, u):
    """Axis profile f(u) = -(1/kappa0) cosh(kappa0 (u - u0)).  Needs kappa0 > 0."""
    if geom.kappa0 == 0:
        raise ValueError("straight tube has no shape profile (kappa0 = 0)")
    k0 = geom.kappa0
    return -np.cosh(k0 * (np.asarray(u, dtype=float) - geom.u0)) / k0


def arclength_of_u(geom: TubeGeometry, u):
    """Arclength s(u) = s0 + sinh(kappa0 (u - u0)) / kappa0."""
    if geom.kappa0 == 0:
        raise ValueError("arclength map is the identity for a straight tube")
    k0 = geom.kappa0
    return geom.s0 + np.sinh(k0 * (np.asarray(u, dtype=float) - geom.u0)) / k0


def u_of_arclength(geom: TubeGeometry, s):
    """Exact inverse of :func:`arclength_of_u`."""
    if geom.kappa0 == 0:
        raise ValueError("arclength map is the identity for a straight tube")
    k0 = geom.kappa0
    return geom.u0 + np.arcsinh(k0 * (np.asarray(s, dtype=float) - geom.s0)) / k0


def axis_curvature(geom: TubeGeometry, s):
    """Signed axis curvature kappa(s); identically 0 for the straight tube."""
    s = np.asarray(s, dtype=float)
    if geom.kappa0 == 0:
        return np.zeros_like(s)
    x = geom.kappa0 * (s - geom.s0)
    return -geom.kappa0 / (1.0 + x * x)


def axis_curvature_derivative(geom: TubeGeometry, s):
    """d kappa / d s, the analytic derivative of :func:`axis_curvature`."""
    s = np.asarray(s, dtype=float)
    if geom.kappa0 == 0:
        return np.zeros_like(s)
    x = geom.kappa0 * (s - geom.s0)
    return 2.0 * geom.kappa0**3 * (s - geom.s0) / (1.0 + x * x) ** 2


def lambda_factor(geom: TubeGeometry, theta, s):
    """Surface measure factor lambda = 1 - a kappa(s) cos(theta).

    Strictly positive for valid geometries; the area element is
    a * lambda dtheta ds.
    """
    return 1.0 - geom.a * axis_curvature(geom, s) * np.cos(theta)


def principal_curvatures(geom: TubeGeometry, theta, s):
    """Principal curvatures (k1, k2) of the surface at (theta, s).

    k1 = 1/a around the tube; k2 = -kappa cos(theta) / lambda along it.
    """
    k = axis_curvature(geom, s)
    lam = 1.0 - geom.a * k * np.cos(theta)
    k1 = np.full_like(lam, 1.0 / geom.a)
    k2 = -k * np.cos(theta) / lam
    return k1, k2


def mean_gauss_curvature(geom: TubeGeometry, theta, s):
    """Mean and Gauss curvatures (H, K) = ((k1+k2)/2, k1*k2)."""
    k1, k2 = principal_curvatures(geom, theta, s)
    return 0.5 * (k1 + k2), k1 * k2


def distortion_potential(geom: TubeGeometry, theta, s):
    """Attractive squeezing potential in meV.

    V(theta, s) = -hbar^2 / (8 m* a^2) * lambda^{-2}, equal to
    -(hbar^2/2m*) (H^2 - K).  Always negative; deepest where the measure
    factor is smallest (inner side of the bend at the turning point).
    """
    lam = lambda_factor(geom, theta, s)
    return -geom.hb2_2m / (4.0 * geom.a**2) / (lam * lam)


def axis_point(geom: TubeGeometry, s):
    """3-space position of the tube axis at arclength s."""
    s = np.asarray(s, dtype=float)
    if geom.kappa0 == 0:
        return s, np.zeros_like(s), np.zeros_like(s)
    u = u_of_arclength(geom, s)
    return u, shape_profile(geom, u), np.zeros_like(s)


def embed(geom: TubeGeometry, theta, s):
    """Embed a surface point into 3-space, returning (x, y, z) in nm.

    For the straight tube this is the cylinder (s, a cos theta, a sin theta).
    """
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)
    if geom.kappa0 == 0:
        return (s * np.ones_like(theta),
                geom.a * np.cos(theta),
                geom.a * np.sin(theta))
    u = u_of_arclength(geom, s)
    w = geom.kappa0 * (u - geom.u0)
    f = shape_profile(geom, u)
    fu = -np.sinh(w)
    alpha = 1.0 / np.cosh(w)        # (1 + fu^2)^(-1/2)
    beta = fu * alpha
    x = u - geom.a * beta * np.cos(theta)
    y = f + geom.a * alpha * np.cos(theta)
    z = geom.a * np.sin(theta)
    return x, y, z


def surface_normal(geom: TubeGeometry, theta, s):
    """Outward unit normal of the surface at (theta, s)."""
    theta = np.asarray(theta, dtype=float)
    if geom.kappa0 == 0:
        zero = np.zeros_like(theta)
        return zero, np.cos(theta), np.sin(theta)
    w = geom.kappa0 * (u_of_arclength(geom, s) - geom.u0)
    alpha = 1.0 / np.cosh(w)
    beta = -np.sinh(w) * alpha
    return (-beta * np.cos(theta), alpha * np.cos(theta), np.sin(theta))
