"""End-to-end solve: geometry + basis -> spectrum, coefficients, parity labels.

The surface Hamiltonian commutes with the reflection theta -> -theta
whenever the site lattice is reflection symmetric (or absent), so
eigenstates carry a parity label.  Degenerate eigensolver output is free to
mix parity partners; within each degenerate cluster the states are rotated
to diagonalize the reflection operator, which restores pure labels without
changing the spectrum.  A final phase gauge makes the largest real-family
coefficient of every state real and positive, so repeated runs and table
comparisons see identical signs.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .assembly import DeltaSiteLattice, HamiltonianMatrix, assemble
from .basis import BasisSpec, reflection_matrix, to_real_coefficients
from .geometry import TubeGeometry
from .linalg import (SpectralResult, _matmat, _matvec, eigh_hermitian,
                     solve_self_adjoint, with_xi_coefficients)
from .quadrature import QuadratureGrid, build_grid

PARITY_THRESHOLD = 0.999


@dataclass(frozen=True)
class SurfaceSolution:
    """A solved eigenproblem with everything needed for post-processing."""

    geom: TubeGeometry
    spec: BasisSpec
    grid: QuadratureGrid
    lattice: DeltaSiteLattice | None
    hamiltonian: HamiltonianMatrix
    result: SpectralResult

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.result.eigenvalues

    @property
    def xi_coefficients(self) -> np.ndarray:
        return self.result.xi_coefficients


def straight_spectrum(geom: TubeGeometry, spec: BasisSpec) -> np.ndarray:
    """Analytic eigenvalues of the straight tube for the same truncation."""
    out = []
    for idx in spec.indices():
        kin = geom.hb2_2m * (idx.m**2 / geom.a**2 + (idx.n * np.pi / geom.L) ** 2)
        out.append(kin - geom.hb2_2m / (4.0 * geom.a**2))
    return np.sort(np.array(out))


def _degenerate_clusters(eigenvalues: np.ndarray, tol: float) -> list[slice]:
    clusters = []
    start = 0
    n = eigenvalues.size
    for i in range(1, n + 1):
        if i == n or eigenvalues[i] - eigenvalues[i - 1] > tol:
            clusters.append(slice(start, i))
            start = i
    return clusters


def _parity_adapt(result: SpectralResult, S: np.ndarray,
                  R: np.ndarray) -> SpectralResult:
    """Rotate each degenerate cluster onto reflection eigenstates."""
    w = result.eigenvalues
    scale = float(np.max(np.abs(w))) if w.size else 0.0
    tol = 1e-9 * (scale + 1.0)
    C = result.xi_coefficients.copy()
    V = result.eigenvectors.copy()
    SR = _matmat(S, R)
    for cl in _degenerate_clusters(w, tol):
        k = cl.stop - cl.start
        if k < 2:
            continue
        block = C[:, cl]
        rho = _matmat(block.conj().T, _matmat(SR, block))
        rho = 0.5 * (rho + rho.conj().T)
        _, U = eigh_hermitian(rho)
        C[:, cl] = _matmat(block, U)
        V[:, cl] = _matmat(V[:, cl], U)
    return replace(result, xi_coefficients=C, eigenvectors=V)


def _fix_signs(result: SpectralResult, spec: BasisSpec) -> SpectralResult:
    """Phase gauge: largest real-family coefficient real positive per state."""
    C = result.xi_coefficients.copy()
    V = result.eigenvectors.copy()
    for k in range(result.size):
        r = to_real_coefficients(spec, C[:, k])
        lead = r[int(np.argmax(np.abs(r)))]
        if abs(lead) == 0.0:
            continue
        phase = lead / abs(lead)
        C[:, k] /= phase
        V[:, k] /= phase
    return replace(result, xi_coefficients=C, eigenvectors=V)


def _parity_scores(result: SpectralResult, S: np.ndarray,
                   R: np.ndarray) -> SpectralResult:
    C = result.xi_coefficients
    SR = _matmat(S, R)
    signed = np.array([
        float(np.real(np.sum(np.conj(C[:, k]) * _matvec(SR, C[:, k]))))
        for k in range(result.size)
    ])
    labels = tuple(
        "+1" if v > PARITY_THRESHOLD else "-1" if v < -PARITY_THRESHOLD else "mixed"
        for v in signed)
    return replace(result, parities=labels,
                   parity_scores=np.minimum(np.abs(signed), 1.0))


def solve_surface_spectrum(geom: TubeGeometry, spec: BasisSpec,
                           grid: QuadratureGrid | None = None,
                           lattice: DeltaSiteLattice | None = None) -> SurfaceSolution:
    """Assemble, diagonalize, and post-process one tube configuration."""
    if grid is None:
        grid = build_grid(geom)
    ham = assemble(geom, grid, spec, lattice)
    result = solve_self_adjoint(ham.h_phi)
    result = with_xi_coefficients(result, ham.onb)
    S = ham.overlap.matrix
    R = reflection_matrix(spec)
    result = _parity_adapt(result, S, R)
    result = _fix_signs(result, spec)
    result = _parity_scores(result, S, R)
    return SurfaceSolution(geom=geom, spec=spec, grid=grid, lattice=lattice,
                           hamiltonian=ham, result=result)
