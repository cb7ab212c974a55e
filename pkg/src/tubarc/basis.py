"""Primitive trial basis on the tube surface and the analytic Hamiltonian action.

The trial space is spanned by (2M+1)*N separable functions

    xi_{mn}(theta, s) = A_m(theta) * sin(n pi s / L)

with hard-wall nodes at s = 0 and s = L.  Two angular families share the
same (m, n) index grid:

* ``complex`` (default): A_m = exp(i m theta), m = -M..M.
* ``real``: A_m = cos(m theta) for m >= 0, sin(|m| theta) for m < 0.

Both span the same space; the real family makes every surface matrix
real-symmetric.  Flat indices j = 1..(2M+1)N enumerate (m, n) with m
varying fastest: j=1 is (m=-M, n=1), j=2M+2 is (m=-M, n=2), and so on.

The surface Hamiltonian applied to a basis function is evaluated in closed
form (no numeric differentiation):

    H xi = -(hb2/2m*) [ (1/a^2)(A'' L + dln(lambda)/dtheta A' L)
                        + (1/lambda^2)(A L'' - dln(lambda)/ds A L') ]
           + V_D A L

where A'' = -m^2 A for either family and L(s) = sin(n pi s / L).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TubeGeometry, axis_curvature, axis_curvature_derivative, \
    distortion_potential, lambda_factor

FAMILIES = ("complex", "real")


@dataclass(frozen=True)
class BasisSpec:
    """Basis truncation: angular indices -M..M, longitudinal indices 1..N."""

    M: int
    N: int
    L: float
    family: str = "complex"

    def __post_init__(self) -> None:
        if self.M < 0 or int(self.M) != self.M:
            raise ValueError(f"M must be a non-negative integer, got {self.M}")
        if self.N < 1 or int(self.N) != self.N:
            raise ValueError(f"N must be a positive integer, got {self.N}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if self.family not in FAMILIES:
            raise ValueError(f"family must be one of {FAMILIES}, got {self.family!r}")

    @property
    def size(self) -> int:
        return (2 * self.M + 1) * self.N

    def indices(self) -> list["BasisIndex"]:
        """All basis indices in flat order."""
        return [index_map(self, j) for j in range(1, self.size + 1)]


@dataclass(frozen=True)
class BasisIndex:
    """One basis function: flat index j (1-based) and quantum numbers (m, n)."""

    j: int
    m: int
    n: int


def index_map(spec: BasisSpec, j: int) -> BasisIndex:
    """Flat index j (1-based) -> (m, n), with m varying fastest."""
    if not 1 <= j <= spec.size:
        raise IndexError(f"flat index {j} outside 1..{spec.size}")
    width = 2 * spec.M + 1
    n = (j - 1) // width + 1
    m = (j - 1) % width - spec.M
    return BasisIndex(j=j, m=m, n=n)


def flat_index(spec: BasisSpec, m: int, n: int) -> int:
    """Inverse of :func:`index_map`."""
    if not -spec.M <= m <= spec.M:
        raise IndexError(f"angular index {m} outside -{spec.M}..{spec.M}")
    if not 1 <= n <= spec.N:
        raise IndexError(f"longitudinal index {n} outside 1..{spec.N}")
    return (n - 1) * (2 * spec.M + 1) + (m + spec.M) + 1


def _angular(spec: BasisSpec, m: int, theta):
    """Angular factor A_m(theta) and its derivative A_m'(theta)."""
    theta = np.asarray(theta, dtype=float)
    if spec.family == "complex":
        val = np.exp(1j * m * theta)
        return val, 1j * m * val
    if m == 0:
        one = np.ones_like(theta)
        return one, np.zeros_like(theta)
    if m > 0:
        return np.cos(m * theta), -m * np.sin(m * theta)
    k = -m
    return np.sin(k * theta), k * np.cos(k * theta)


def eval_xi(spec: BasisSpec, index: BasisIndex | int, theta, s):
    """Value of basis function ``index`` at (theta, s); broadcasts arrays."""
    idx = index_map(spec, index) if isinstance(index, int) else index
    ang, _ = _angular(spec, idx.m, theta)
    return ang * np.sin(idx.n * np.pi * np.asarray(s, dtype=float) / spec.L)


def eval_H_xi(geom: TubeGeometry, spec: BasisSpec, index: BasisIndex | int,
              theta, s):
    """Surface Hamiltonian applied to basis function ``index`` at (theta, s).

    Closed-form: angular and longitudinal derivatives of the basis function
    and the logarithmic derivatives of the measure factor are all analytic.
    Units meV times the basis-function value.
    """
    idx = index_map(spec, index) if isinstance(index, int) else index
    theta = np.asarray(theta, dtype=float)
    s = np.asarray(s, dtype=float)

    ang, dang = _angular(spec, idx.m, theta)
    qn = idx.n * np.pi / spec.L
    lon = np.sin(qn * s)
    dlon = qn * np.cos(qn * s)

    lam = lambda_factor(geom, theta, s)
    kap = axis_curvature(geom, s)
    dkap = axis_curvature_derivative(geom, s)
    dlnlam_dtheta = geom.a * kap * np.sin(theta) / lam
    dlnlam_ds = -geom.a * dkap * np.cos(theta) / lam

    lap = ((-(idx.m**2) * ang * lon + dlnlam_dtheta * dang * lon) / geom.a**2
           + (-(qn**2) * ang * lon - dlnlam_ds * ang * dlon) / lam**2)
    return -geom.hb2_2m * lap + distortion_potential(geom, theta, s) * ang * lon


def basis_values(spec: BasisSpec, theta, s) -> np.ndarray:
    """All basis functions evaluated on broadcast (theta, s); leading axis j."""
    shape = np.broadcast(np.asarray(theta, dtype=float),
                         np.asarray(s, dtype=float)).shape
    dtype = complex if spec.family == "complex" else float
    out = np.empty((spec.size,) + shape, dtype=dtype)
    for idx in spec.indices():
        out[idx.j - 1] = eval_xi(spec, idx, theta, s)
    return out


def h_basis_values(geom: TubeGeometry, spec: BasisSpec, theta, s) -> np.ndarray:
    """Hamiltonian action on every basis function over broadcast (theta, s)."""
    shape = np.broadcast(np.asarray(theta, dtype=float),
                         np.asarray(s, dtype=float)).shape
    dtype = complex if spec.family == "complex" else float
    out = np.empty((spec.size,) + shape, dtype=dtype)
    for idx in spec.indices():
        out[idx.j - 1] = eval_H_xi(geom, spec, idx, theta, s)
    return out


def reflection_matrix(spec: BasisSpec) -> np.ndarray:
    """Matrix of the reflection theta -> -theta in the basis-coefficient space.

    For the complex family this permutes m <-> -m; for the real family it is
    diagonal with +1 on cosine rows and -1 on sine rows.  Real, orthogonal,
    and an involution for both families.
    """
    n = spec.size
    R = np.zeros((n, n))
    for idx in spec.indices():
        if spec.family == "complex":
            R[flat_index(spec, -idx.m, idx.n) - 1, idx.j - 1] = 1.0
        else:
            R[idx.j - 1, idx.j - 1] = 1.0 if idx.m >= 0 else -1.0
    return R


def to_real_coefficients(spec: BasisSpec, coeffs: np.ndarray) -> np.ndarray:
    """Re-express a coefficient vector in the real angular family.

    Output follows the same flat (m, n) ordering, with m > 0 rows holding
    cos(m theta) amplitudes and m < 0 rows sin(|m| theta) amplitudes.  For
    the complex family: cos amplitude c_m + c_{-m}, sin amplitude
    i (c_m - c_{-m}).  For the real family this is the identity.
    """
    coeffs = np.asarray(coeffs)
    if spec.family == "real":
        return coeffs.astype(complex)
    out = np.empty(spec.size, dtype=complex)
    for idx in spec.indices():
        if idx.m == 0:
            out[idx.j - 1] = coeffs[idx.j - 1]
        elif idx.m > 0:
            out[idx.j - 1] = (coeffs[idx.j - 1]
                              + coeffs[flat_index(spec, -idx.m, idx.n) - 1])
        else:
            out[idx.j - 1] = 1j * (coeffs[flat_index(spec, -idx.m, idx.n) - 1]
                                   - coeffs[idx.j - 1])
    return out
