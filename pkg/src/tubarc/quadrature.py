"""Tensor-product integration over the tube surface with measure a*lambda dtheta ds.

Angular direction: uniform periodic rule (equal weights 2*pi/N_theta), which
is spectrally exact for trigonometric polynomials of degree < N_theta.

Longitudinal direction: composite Gauss-Legendre panels over [0, L].  For a
bent tube the integrands carry inverse powers of the measure factor, whose
analytic continuation has poles a distance  d = sqrt(1 - a*kappa0)/kappa0
from the real axis near the turning point.  Uniform panels cannot resolve
that feature once d is sub-nm, so the uniform base panels are refined
dyadically toward s0 until the local panel width is at most max(d, distance
to s0).  The refinement rule depends only on the geometry parameters, so a
given (geometry, resolution) pair always produces the identical grid.

All reductions are ordinary numpy sums over arrays laid out with s as the
leading (slow) axis, so the accumulation order is fixed regardless of thread
count and results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import TWO_PI, TubeGeometry, lambda_factor

DEFAULT_N_THETA = 128
DEFAULT_PANELS = 16
DEFAULT_POINTS_PER_PANEL = 16

# Hard floor on dyadic refinement, relative to L.  Never reached for valid
# geometries (a*kappa0 < 1 bounds the pole distance away from zero).
_MIN_PANEL_FRACTION = 2.0**-40


@dataclass(frozen=True)
class QuadratureGrid:
    """Immutable tensor-product grid on [0, 2*pi) x [0, L]."""

    theta_nodes: np.ndarray      # (n_theta,), uniform in [0, 2*pi)
    theta_weight: float          # single uniform weight, 2*pi / n_theta
    s_nodes: np.ndarray          # (n_s,), ascending
    s_weights: np.ndarray        # (n_s,), positive
    panel_edges: tuple           # longitudinal panel boundaries
    L: float

    @property
    def n_theta(self) -> int:
        return self.theta_nodes.size

    @property
    def n_s(self) -> int:
        return self.s_nodes.size


def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_edges(geom: TubeGeometry, panels: int) -> list[float]:
    """Uniform base panels, dyadically refined toward the turning point."""
    base = np.linspace(0.0, geom.L, panels + 1)
    if geom.kappa0 == 0:
        return list(base)
    scale = np.sqrt(1.0 - geom.a * geom.kappa0) / geom.kappa0
    floor = geom.L * _MIN_PANEL_FRACTION
    s0 = geom.s0
    segments: list[tuple[float, float]] = []

    def refine(lo: float, hi: float) -> None:
        width = hi - lo
        dist = 0.0 if lo <= s0 <= hi else min(abs(lo - s0), abs(hi - s0))
        if width <= scale or width <= dist or width <= floor:
            segments.append((lo, hi))
            return
        mid = 0.5 * (lo + hi)
        refine(lo, mid)
        refine(mid, hi)

    for i in range(panels):
        refine(base[i], base[i + 1])
    segments.sort()
    return [segments[0][0]] + [hi for _, hi in segments]


def build_grid(geom: TubeGeometry,
               n_theta: int = DEFAULT_N_THETA,
               panels: int = DEFAULT_PANELS,
               points_per_panel: int = DEFAULT_POINTS_PER_PANEL) -> QuadratureGrid:
    """Construct the surface quadrature grid for a geometry.

    ``panels`` is the uniform base count before bend refinement;
    ``points_per_panel`` is the Gauss-Legendre order inside each panel.
    """
    if n_theta < 8 or n_theta % 2 != 0:
        raise ValueError(f"n_theta must be even and >= 8, got {n_theta}")
    if panels < 1:
        raise ValueError(f"panels must be >= 1, got {panels}")
    if points_per_panel < 2:
        raise ValueError(f"points_per_panel must be >= 2, got {points_per_panel}")

    theta = TWO_PI * np.arange(n_theta) / n_theta
    edges = _panel_edges(geom, panels)
    x, w = _gauss_legendre(points_per_panel)
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        half = 0.5 * (hi - lo)
        nodes.append(half * x + 0.5 * (lo + hi))
        weights.append(half * w)
    grid = QuadratureGrid(
        theta_nodes=theta,
        theta_weight=TWO_PI / n_theta,
        s_nodes=np.concatenate(nodes),
        s_weights=np.concatenate(weights),
        panel_edges=tuple(edges),
        L=geom.L,
    )
    grid.theta_nodes.setflags(write=False)
    grid.s_nodes.setflags(write=False)
    grid.s_weights.setflags(write=False)
    return grid


def measure_weights(geom: TubeGeometry, grid: QuadratureGrid) -> np.ndarray:
    """Combined quadrature-and-measure weights, shape (n_s, n_theta).

    Entry (i, j) is w_s[i] * w_theta * a * lambda(theta[j], s[i]); summing
    f(theta, s) against this array integrates f over the surface.
    """
    lam = lambda_factor(geom, grid.theta_nodes[None, :], grid.s_nodes[:, None])
    return grid.s_weights[:, None] * grid.theta_weight * geom.a * lam


def grid_mesh(grid: QuadratureGrid):
    """Broadcastable (theta, s) views of the grid, shapes (1, n_theta), (n_s, 1)."""
    return grid.theta_nodes[None, :], grid.s_nodes[:, None]


def surface_inner_product(geom: TubeGeometry, grid: QuadratureGrid, f, g):
    """Inner product <f, g> = integral of conj(f) g over the surface.

    ``f`` and ``g`` may be callables f(theta, s) that broadcast, or value
    arrays of shape (n_s, n_theta).  Conjugate symmetry holds exactly:
    the summand of <g, f> is the elementwise conjugate of that of <f, g>
    and the summation order is fixed (s-major).
    """
    theta, s = grid_mesh(grid)
    fv = f(theta, s) if callable(f) else np.asarray(f)
    gv = g(theta, s) if callable(g) else np.asarray(g)
    w = measure_weights(geom, grid)
    return np.sum(np.conj(fv) * gv * w)
