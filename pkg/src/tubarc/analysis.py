"""Post-processing of solved states: densities, parity, peaks, table rows.

States are carried as primitive-basis coefficient vectors normalized under
the surface measure, so |Psi|^2 integrates to one against a*lambda dtheta ds
and densities are in 1/nm^2.  Table formatting mirrors the reference-table
convention: angular factors are reported in the real family (1, cos m theta,
sin m theta), coefficients sorted by magnitude, small admixtures dropped.

Fixed, documented thresholds: a state counts as parity pure when
|<Psi|R Psi>| exceeds 0.999; an angular maximum counts as a peak when its
topographic prominence exceeds 5 percent of the profile range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .basis import BasisSpec, basis_values, reflection_matrix, to_real_coefficients
from .geometry import TWO_PI
from .linalg import _matmat, _matvec
from .solve import PARITY_THRESHOLD, SurfaceSolution

PEAK_PROMINENCE = 0.05
#: Profiles flatter than this (relative to their maximum) count as peakless.
FLATNESS_FLOOR = 1e-9


@dataclass(frozen=True)
class CoefficientTerm:
    """One listed expansion term of a state, in the real angular family."""

    m: int          # 0 for the isotropic term; +m cos, -m sin
    n: int
    value: float

    def label(self) -> str:
        ang = ("" if self.m == 0
               else f"cos({self.m}θ)" if self.m > 0
               else f"sin({-self.m}θ)")
        return f"{ang}sin({self.n}πs/L)"


@dataclass(frozen=True)
class StateReport:
    """Table-ready summary of one eigenstate."""

    energy: float
    parity: str
    parity_score: float
    terms: tuple      # CoefficientTerm, sorted by |value| descending
    profile: tuple | None = None   # optional (s_samples, density) pair


def wavefunction(spec: BasisSpec, coefficients: np.ndarray, theta, s):
    """Psi(theta, s) for a coefficient vector; broadcasts over arrays."""
    xi = basis_values(spec, theta, s)
    return np.einsum("j,j...->...", np.asarray(coefficients), xi)


def density(spec: BasisSpec, coefficients: np.ndarray, theta, s):
    """Probability density |Psi|^2 in 1/nm^2."""
    psi = wavefunction(spec, coefficients, theta, s)
    return np.abs(psi) ** 2


def density_profile_at(spec: BasisSpec, coefficients: np.ndarray, theta: float,
                       s_samples: np.ndarray) -> np.ndarray:
    """Density along s at a fixed angle."""
    return density(spec, coefficients, float(theta), np.asarray(s_samples))


def surface_density_grid(spec: BasisSpec, coefficients: np.ndarray,
                         n_theta: int, n_s: int):
    """Density on a uniform (theta, s) grid; returns (theta, s, rho)."""
    theta = TWO_PI * np.arange(n_theta) / n_theta
    s = np.linspace(0.0, spec.L, n_s)
    rho = density(spec, coefficients, theta[None, :], s[:, None])
    return theta, s, rho


def parity_classify(coefficients: np.ndarray, overlap: np.ndarray,
                    spec: BasisSpec,
                    threshold: float = PARITY_THRESHOLD) -> tuple[str, float]:
    """Classify a normalized state under theta -> -theta.

    Returns (label, score) with score = |<Psi|R Psi>| and label '+1', '-1',
    or 'mixed' against the fixed threshold.
    """
    R = reflection_matrix(spec)
    c = np.asarray(coefficients)
    signed = float(np.real(np.sum(np.conj(c) * _matvec(_matmat(overlap, R), c))))
    score = min(abs(signed), 1.0)
    if signed > threshold:
        return "+1", score
    if signed < -threshold:
        return "-1", score
    return "mixed", score


def angular_peak_count(spec: BasisSpec, coefficients: np.ndarray, s_fixed: float,
                       n_samples: int = 512,
                       prominence: float = PEAK_PROMINENCE) -> int:
    """Count angular density peaks at fixed s.

    Strict local maxima over a periodic theta sampling, kept when their
    topographic prominence (height above the higher of the two flanking
    minima) exceeds ``prominence`` times the profile range.  A flat profile
    has no peaks.
    """
    if n_samples < 256:
        raise ValueError(f"need at least 256 samples, got {n_samples}")
    theta = TWO_PI * np.arange(n_samples) / n_samples
    rho = density(spec, coefficients, theta, float(s_fixed))
    lo, hi = float(rho.min()), float(rho.max())
    rng = hi - lo
    if rng <= FLATNESS_FLOOR * max(hi, 1e-300):
        return 0

    count = 0
    for i in range(n_samples):
        here = rho[i]
        if not (here > rho[i - 1] and here > rho[(i + 1) % n_samples]):
            continue
        # walk downhill to the flanking valleys
        left = i
        while rho[(left - 1) % n_samples] <= rho[left] and (left - 1) % n_samples != i:
            left = (left - 1) % n_samples
        right = i
        while rho[(right + 1) % n_samples] <= rho[right] and (right + 1) % n_samples != i:
            right = (right + 1) % n_samples
        valley = max(rho[left], rho[right])
        if here - valley >= prominence * rng:
            count += 1
    return count


def state_report(solution: SurfaceSolution, k: int,
                 coefficient_threshold: float = 0.1,
                 profile_theta: float | None = None,
                 profile_samples: int = 512) -> StateReport:
    """Summarize eigenstate ``k`` of a solution."""
    res = solution.result
    if not 0 <= k < res.size:
        raise IndexError(f"state index {k} outside 0..{res.size - 1}")
    terms = coefficient_terms(solution.spec, res.xi_coefficients[:, k],
                              coefficient_threshold)
    profile = None
    if profile_theta is not None:
        s = np.linspace(0.0, solution.geom.L, profile_samples)
        rho = density_profile_at(solution.spec, res.xi_coefficients[:, k],
                                 profile_theta, s)
        profile = (s, rho)
    return StateReport(energy=float(res.eigenvalues[k]),
                       parity=res.parities[k],
                       parity_score=float(res.parity_scores[k]),
                       terms=terms, profile=profile)


def coefficient_terms(spec: BasisSpec, coefficients: np.ndarray,
                      threshold: float = 0.1) -> tuple:
    """Dominant real-family expansion terms, sorted by magnitude.

    ``threshold`` is relative to the largest coefficient; 0 lists all
    (2M+1)N terms.  Coefficients of solved states are real up to rounding;
    a genuinely complex residue falls back to the signed real part with the
    magnitude check relaxed.
    """
    r = to_real_coefficients(spec, coefficients)
    vals = np.real(r) if np.max(np.abs(np.imag(r))) < 1e-9 else np.abs(r)
    cut = threshold * float(np.max(np.abs(vals))) if vals.size else 0.0
    terms = []
    for idx in spec.indices():
        v = float(vals[idx.j - 1])
        if threshold == 0.0 or abs(v) >= cut:
            terms.append(CoefficientTerm(m=idx.m, n=idx.n, value=v))
    terms.sort(key=lambda t: (-abs(t.value), t.n, t.m))
    return tuple(terms)


def format_state_table(states: list[StateReport], threshold: float = 0.1) -> list[dict]:
    """Rows of (energy, parity, rendered expansion) for a list of reports."""
    rows = []
    for rep in states:
        kept = [t for t in rep.terms
                if threshold == 0.0 or not rep.terms
                or abs(t.value) >= threshold * abs(rep.terms[0].value)]
        rendered = " ".join(
            f"{t.value:+.4f} {t.label()}" for t in kept)
        rows.append({
            "energy_meV": round(rep.energy, 4),
            "parity": rep.parity,
            "expansion": rendered,
        })
    return rows
