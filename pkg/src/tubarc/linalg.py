"""Dense self-adjoint linear algebra for the surface eigenproblem.

Everything here is hand-rolled on top of plain numpy array arithmetic: a
cyclic Jacobi eigensolver for real symmetric matrices (complex Hermitian
input goes through the standard real 2n x 2n embedding with duplicate-pair
deflation), a Cholesky factorization with triangular solves for the
generalized-eigenproblem cross-check, and Gram-Schmidt orthonormalization
of basis coefficients under the surface overlap metric.

No LAPACK/BLAS routines are called, for two reasons: the matrices are tiny
(at most a few hundred rows), and fixed-order numpy reductions make every
result bit-reproducible regardless of how many threads the host process
allows.  The accompanying tests cross-check each factorization against an
independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .basis import BasisSpec, basis_values
from .geometry import TubeGeometry
from .quadrature import QuadratureGrid, grid_mesh, measure_weights

#: Condition-number ceiling for Gram-Schmidt; beyond this the primitive
#: basis is numerically dependent and orthonormalization is refused.
CONDITION_LIMIT = 1e10

#: Orthonormality contract for Gram-Schmidt output.
ORTHONORMALITY_TOL = 1e-10


class IllConditionedBasisError(ValueError):
    """Raised when the overlap matrix is too ill-conditioned to orthonormalize."""


# ----------------------------------------------------------------------
# Jacobi eigensolver
# ----------------------------------------------------------------------

def jacobi_eigh(matrix: np.ndarray, tol: float = 1e-14,
                max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a real symmetric matrix by cyclic Jacobi sweeps.

    Returns (eigenvalues ascending, eigenvectors as columns).  Sorting is
    stable, so degenerate eigenvalues keep the rotation-determined order.
    """
    A = np.array(matrix, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError(f"square matrix required, got shape {A.shape}")
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V
    fro = math.sqrt(np.sum(A * A))
    if fro == 0.0:
        return np.zeros(n), V
    skip = 1e-18 * fro

    for _ in range(max_sweeps):
        # off-diagonal norm measured directly; the Frobenius-minus-diagonal
        # form cancels catastrophically once A is nearly diagonal
        strict = A.copy()
        np.fill_diagonal(strict, 0.0)
        off = math.sqrt(np.sum(strict * strict))
        if off <= tol * fro:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= skip:
                    continue
                theta = 0.5 * (A[q, q] - A[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # similarity transform G^T A G applied as columns then rows
                colp = A[:, p].copy()
                colq = A[:, q].copy()
                A[:, p] = c * colp - s * colq
                A[:, q] = s * colp + c * colq
                rowp = A[p, :].copy()
                rowq = A[q, :].copy()
                A[p, :] = c * rowp - s * rowq
                A[q, :] = s * rowp + c * rowq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq

    w = A.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _split_complex(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    A = np.real(H)
    B = np.imag(H)
    return 0.5 * (A + A.T), 0.5 * (B - B.T)


def eigh_hermitian(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix.

    Real symmetric input is solved directly; complex Hermitian input goes
    through the real embedding [[Re, -Im], [Im, Re]], whose spectrum is the
    complex spectrum doubled.  One complex eigenvector per duplicate pair is
    recovered by pivoted orthogonalization inside each eigenvalue cluster.
    """
    H = np.asarray(matrix)
    n = H.shape[0]
    if H.shape != (n, n):
        raise ValueError(f"square matrix required, got shape {H.shape}")
    if not np.iscomplexobj(H) or np.max(np.abs(np.imag(H))) == 0.0:
        w, V = jacobi_eigh(np.real(H))
        return w, V.astype(complex)

    A, B = _split_complex(H)
    E = np.block([[A, -B], [B, A]])
    w2, V2 = jacobi_eigh(E)

    scale = float(np.max(np.abs(H))) if n else 0.0
    cluster_tol = 1e-9 * (scale + 1.0)
    values: list[float] = []
    vectors: list[np.ndarray] = []

    start = 0
    while start < 2 * n:
        stop = start + 1
        while stop < 2 * n and w2[stop] - w2[stop - 1] <= cluster_tol:
            stop += 1
        block = V2[:, start:stop]
        need = (stop - start) // 2
        candidates = [block[:n, i] + 1j * block[n:, i] for i in range(stop - start)]
        taken = 0
        while taken < need and candidates:
            norms = [math.sqrt(abs(np.sum(np.conj(v) * v).real)) for v in candidates]
            pick = int(np.argmax(norms))
            if norms[pick] < 1e-3:
                break
            v = candidates.pop(pick) / norms[pick]
            candidates = [u - v * np.sum(np.conj(v) * u) for u in candidates]
            # Rayleigh quotient refines the doubled eigenvalue
            values.append(float(np.real(np.sum(np.conj(v) * _matvec(H, v)))))
            vectors.append(v)
            taken += 1
        start = stop

    w = np.array(values)
    V = np.column_stack(vectors)
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]


def _matvec(M: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum("ij,j->i", M, v)


def _matmat(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return np.einsum("ij,jk->ik", A, B)


# ----------------------------------------------------------------------
# Cholesky and triangular solves (generalized-problem route)
# ----------------------------------------------------------------------

def cholesky(matrix: np.ndarray) -> np.ndarray:
    """Lower-triangular factor of a Hermitian positive definite matrix."""
    S = np.asarray(matrix)
    n = S.shape[0]
    L = np.zeros((n, n), dtype=complex if np.iscomplexobj(S) else float)
    for j in range(n):
        d = S[j, j] - np.sum(L[j, :j] * np.conj(L[j, :j]))
        d = float(np.real(d))
        if d <= 0.0:
            raise np.linalg.LinAlgError(
                f"matrix not positive definite at pivot {j} (d={d:.3e})")
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            num = S[j + 1:, j] - np.einsum("ik,k->i", L[j + 1:, :j], np.conj(L[j, :j]))
            L[j + 1:, j] = num / L[j, j]
    return L


def solve_lower(L: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve L X = B for lower-triangular L; B may be a vector or matrix."""
    b = np.asarray(B)
    single = b.ndim == 1
    X = np.array(b if not single else b[:, None],
                 dtype=complex if np.iscomplexobj(L) or np.iscomplexobj(b) else float)
    n = L.shape[0]
    for i in range(n):
        if i:
            X[i] -= np.einsum("k,kj->j", L[i, :i], X[:i])
        X[i] /= L[i, i]
    return X[:, 0] if single else X


def solve_upper(U: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve U X = B for upper-triangular U; B may be a vector or matrix."""
    b = np.asarray(B)
    single = b.ndim == 1
    X = np.array(b if not single else b[:, None],
                 dtype=complex if np.iscomplexobj(U) or np.iscomplexobj(b) else float)
    n = U.shape[0]
    for i in range(n - 1, -1, -1):
        if i + 1 < n:
            X[i] -= np.einsum("k,kj->j", U[i, i + 1:], X[i + 1:])
        X[i] /= U[i, i]
    return X[:, 0] if single else X


def generalized_eigh(H: np.ndarray, S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve H c = eps S c for Hermitian H and positive definite S.

    Reduction through the Cholesky factor S = L L^H; returns eigenvalues
    ascending and coefficient vectors (columns, S-orthonormal).  This is the
    independent cross-check for the Gram-Schmidt route.
    """
    L = cholesky(S)
    Y = solve_lower(L, np.asarray(H))
    M = solve_lower(L, Y.conj().T).conj().T
    M = 0.5 * (M + M.conj().T)
    w, V = eigh_hermitian(M)
    C = solve_upper(L.conj().T, V)
    return w, C


# ----------------------------------------------------------------------
# Overlap matrix and Gram-Schmidt orthonormalization
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class OverlapMatrix:
    """Gram matrix of the primitive basis under the surface inner product."""

    matrix: np.ndarray
    hermiticity_defect: float
    condition_number: float
    eigenvalue_range: tuple[float, float]

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class OrthonormalBasis:
    """Lower-triangular coefficients of the orthonormalized basis.

    Row j of ``T`` expresses the j-th orthonormal function over the
    primitive basis; T S T^H = I to within ``residual``.
    """

    T: np.ndarray
    residual: float
    condition_number: float

    @property
    def size(self) -> int:
        return self.T.shape[0]


@dataclass(frozen=True)
class SpectralResult:
    """Sorted spectrum of a self-adjoint matrix plus per-state diagnostics.

    ``eigenvectors`` are columns in the orthonormalized basis;
    ``xi_coefficients`` (filled by the solve pipeline) express the same
    states over the primitive basis, one column per state.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    asymmetry: float
    xi_coefficients: np.ndarray | None = None
    parities: tuple | None = None
    parity_scores: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.eigenvalues.size


def overlap_matrix(geom: TubeGeometry, grid: QuadratureGrid,
                   spec: BasisSpec) -> OverlapMatrix:
    """Assemble the basis Gram matrix over the surface quadrature."""
    if grid.n_theta < 4 * spec.M + 8:
        raise ValueError(
            f"n_theta={grid.n_theta} too small for M={spec.M}; need >= {4 * spec.M + 8}")
    theta, s = grid_mesh(grid)
    xi = basis_values(spec, theta, s)
    w = measure_weights(geom, grid)
    S = np.einsum("ast,bst->ab", np.conj(xi) * w, xi)
    defect = float(np.max(np.abs(S - S.conj().T)))
    S = 0.5 * (S + S.conj().T)
    evals, _ = eigh_hermitian(S)
    lo, hi = float(evals[0]), float(evals[-1])
    if lo <= 0.0:
        raise np.linalg.LinAlgError(
            f"overlap matrix not positive definite (min eigenvalue {lo:.3e})")
    return OverlapMatrix(matrix=S, hermiticity_defect=defect,
                         condition_number=hi / lo, eigenvalue_range=(lo, hi))


def _name_near_dependency(S: np.ndarray) -> str:
    evals, evecs = eigh_hermitian(S)
    worst = np.abs(evecs[:, 0])
    return f"basis function {int(np.argmax(worst)) + 1}"


def gram_schmidt(overlap: OverlapMatrix | np.ndarray,
                 condition_limit: float = CONDITION_LIMIT) -> OrthonormalBasis:
    """Orthonormalize the primitive basis under the overlap metric.

    Modified Gram-Schmidt on coefficient vectors with one full
    reorthogonalization pass.  The result is lower triangular with a real
    positive diagonal, fixing the sign/phase gauge.
    """
    if isinstance(overlap, OverlapMatrix):
        S = overlap.matrix
        cond = overlap.condition_number
    else:
        S = np.asarray(overlap)
        S = 0.5 * (S + S.conj().T)
        evals, _ = eigh_hermitian(S)
        if evals[0] <= 0.0:
            raise np.linalg.LinAlgError(
                f"overlap not positive definite (min eigenvalue {evals[0]:.3e})")
        cond = float(evals[-1] / evals[0])
    if cond >= condition_limit:
        raise IllConditionedBasisError(
            f"overlap condition number {cond:.3e} >= {condition_limit:.0e}; "
            f"nearest dependency involves {_name_near_dependency(S)}")

    n = S.shape[0]
    W = np.eye(n, dtype=complex if np.iscomplexobj(S) else float)
    for j in range(n):
        v = W[:, j].copy()
        for _ in range(2):  # MGS plus one reorthogonalization pass
            for k in range(j):
                proj = np.sum(np.conj(W[:, k]) * _matvec(S, v))
                v -= proj * W[:, k]
        norm_sq = float(np.real(np.sum(np.conj(v) * _matvec(S, v))))
        if norm_sq <= 0.0:
            raise IllConditionedBasisError(
                f"vanishing norm while orthonormalizing basis function {j + 1}")
        W[:, j] = v / math.sqrt(norm_sq)

    T = W.conj().T
    G = _matmat(_matmat(T, S), T.conj().T)
    residual = float(np.max(np.abs(G - np.eye(n))))
    if residual >= ORTHONORMALITY_TOL:
        raise RuntimeError(
            f"orthonormalization residual {residual:.3e} exceeds {ORTHONORMALITY_TOL:g}")
    return OrthonormalBasis(T=T, residual=residual, condition_number=cond)


# ----------------------------------------------------------------------
# Self-adjoint solve
# ----------------------------------------------------------------------

def solve_self_adjoint(H: np.ndarray) -> SpectralResult:
    """Full spectrum of a Hermitian matrix, ascending, with residual checks.

    The input is symmetrized as (H + H^H)/2; an asymmetry beyond
    1e-8 * max|H| aborts, since it signals an assembly bug rather than
    quadrature noise.
    """
    H = np.asarray(H)
    n = H.shape[0]
    if H.shape != (n, n):
        raise ValueError(f"square matrix required, got shape {H.shape}")
    scale = float(np.max(np.abs(H))) if n else 0.0
    asymmetry = float(np.max(np.abs(H - H.conj().T))) if n else 0.0
    if scale > 0 and asymmetry > 1e-8 * scale:
        raise ValueError(
            f"matrix asymmetry {asymmetry:.3e} exceeds 1e-8 * max|H| = {1e-8 * scale:.3e}")
    Hs = 0.5 * (H + H.conj().T)
    w, V = eigh_hermitian(Hs)
    R = _matmat(Hs, V) - V * w[None, :]
    residuals = np.sqrt(np.sum(np.abs(R) ** 2, axis=0))
    limit = 1e-8 * (scale + 1.0)
    worst = float(residuals.max()) if n else 0.0
    if worst > limit:
        raise RuntimeError(
            f"eigenvector residual {worst:.3e} exceeds contract {limit:.3e}")
    return SpectralResult(eigenvalues=w, eigenvectors=V, residuals=residuals,
                          asymmetry=asymmetry)


def with_xi_coefficients(result: SpectralResult,
                         onb: OrthonormalBasis) -> SpectralResult:
    """Attach primitive-basis coefficients: column k is T^H v_k."""
    C = _matmat(onb.T.conj().T, result.eigenvectors)
    return replace(result, xi_coefficients=C)
