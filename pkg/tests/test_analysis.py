"""Densities, parity classification, peak counting, table formatting."""

import math

import numpy as np
import pytest

from tubarc import (BasisSpec, TubeGeometry, angular_peak_count,
                    armchair_lattice, coefficient_terms, density,
                    density_profile_at, flat_index, format_state_table,
                    parity_classify, solve_surface_spectrum, state_report,
                    surface_inner_product)

A, L = 0.85, 100.0
STRAIGHT = TubeGeometry(a=A, L=L)
SPEC = BasisSpec(M=2, N=4, L=L)


@pytest.fixture(scope="module")
def straight_sol():
    return solve_surface_spectrum(STRAIGHT, SPEC)


@pytest.fixture(scope="module")
def bent_sol():
    return solve_surface_spectrum(TubeGeometry(a=A, L=L, kappa0=1.0, s0=57.45),
                                  SPEC)


class TestDensity:
    def test_straight_ground_state_analytic(self, straight_sol):
        c = straight_sol.xi_coefficients[:, 0]
        s = np.linspace(0, L, 64)
        rho = density(SPEC, c, 0.3, s)
        expect = np.sin(math.pi * s / L) ** 2 / (math.pi * A * L)
        np.testing.assert_allclose(rho, expect, atol=1e-12)
        # flat in theta
        theta = np.linspace(0, 2 * math.pi, 32)
        rho_t = density(SPEC, c, theta, 50.0)
        assert np.ptp(rho_t) < 1e-15

    def test_normalization_under_measure(self, bent_sol):
        from tubarc import wavefunction
        grid = bent_sol.grid
        for k in (0, 1, 5):
            c = bent_sol.xi_coefficients[:, k]
            val = surface_inner_product(
                bent_sol.geom, grid,
                lambda t, s: wavefunction(SPEC, c, t, s),
                lambda t, s: wavefunction(SPEC, c, t, s))
            assert val.real == pytest.approx(1.0, abs=1e-9)

    def test_curved_ground_state_peaks_at_inner_bend(self, bent_sol):
        c = bent_sol.xi_coefficients[:, 0]
        theta = np.linspace(0, 2 * math.pi, 257)[None, :]
        s = np.linspace(0, L, 513)[:, None]
        rho = density(SPEC, c, theta, s)
        i, j = np.unravel_index(np.argmax(rho), rho.shape)
        assert theta[0, j] == pytest.approx(math.pi, abs=0.05)
        assert s[i, 0] == pytest.approx(bent_sol.geom.s0, abs=2.0)

    def test_reflection_symmetric_density(self, bent_sol):
        rng = np.random.default_rng(17)
        theta = rng.uniform(0, 2 * math.pi, 200)
        s = rng.uniform(0, L, 200)
        for k in range(6):
            c = bent_sol.xi_coefficients[:, k]
            np.testing.assert_allclose(density(SPEC, c, theta, s),
                                       density(SPEC, c, -theta, s),
                                       atol=1e-9)

    def test_profile_matches_density(self, bent_sol):
        c = bent_sol.xi_coefficients[:, 0]
        s = np.linspace(0, L, 33)
        np.testing.assert_allclose(density_profile_at(SPEC, c, math.pi, s),
                                   density(SPEC, c, math.pi, s), rtol=1e-14)


class TestParityClassification:
    def test_straight_ground_positive(self, straight_sol):
        S = straight_sol.hamiltonian.overlap.matrix
        label, score = parity_classify(straight_sol.xi_coefficients[:, 0], S, SPEC)
        assert label == "+1"
        assert score > 0.999

    def test_pure_odd_combination(self, straight_sol):
        S = straight_sol.hamiltonian.overlap.matrix
        c = np.zeros(SPEC.size, dtype=complex)
        c[flat_index(SPEC, 1, 1) - 1] = 1.0
        c[flat_index(SPEC, -1, 1) - 1] = -1.0
        c /= math.sqrt(np.real(np.conj(c) @ S @ c))
        label, score = parity_classify(c, S, SPEC)
        assert label == "-1"
        assert score > 0.999

    def test_mixed_state_detected(self, straight_sol):
        S = straight_sol.hamiltonian.overlap.matrix
        c = np.zeros(SPEC.size, dtype=complex)
        c[flat_index(SPEC, 1, 1) - 1] = 1.0   # pure angular momentum, not parity
        c /= math.sqrt(np.real(np.conj(c) @ S @ c))
        label, score = parity_classify(c, S, SPEC)
        assert label == "mixed"
        assert score < 0.1

    def test_doublets_alternate(self, straight_sol):
        # rotated degenerate pairs carry one even and one odd member
        p = straight_sol.result.parities
        for i in (4, 6, 8, 10):
            assert {p[i], p[i + 1]} == {"+1", "-1"}


class TestPeakCounting:
    def test_straight_tube_flat_profile(self, straight_sol):
        c = straight_sol.xi_coefficients[:, 0]
        assert angular_peak_count(SPEC, c, 50.0) == 0

    def test_curved_single_peak(self, bent_sol):
        c = bent_sol.xi_coefficients[:, 0]
        assert angular_peak_count(SPEC, c, bent_sol.geom.s0) == 1

    def test_synthetic_sixfold(self):
        spec = BasisSpec(M=6, N=1, L=L)
        c = np.zeros(spec.size, dtype=complex)
        c[flat_index(spec, 0, 1) - 1] = 1.0
        c[flat_index(spec, 6, 1) - 1] = 0.2
        c[flat_index(spec, -6, 1) - 1] = 0.2
        assert angular_peak_count(spec, c, 50.0) == 6

    def test_prominence_filter_drops_ripple(self):
        spec = BasisSpec(M=6, N=1, L=L)
        c = np.zeros(spec.size, dtype=complex)
        c[flat_index(spec, 0, 1) - 1] = 1.0
        c[flat_index(spec, 1, 1) - 1] = 0.3    # dominant single bump
        c[flat_index(spec, -1, 1) - 1] = 0.3
        c[flat_index(spec, 6, 1) - 1] = 0.003  # sub-prominence ripple
        c[flat_index(spec, -6, 1) - 1] = 0.003
        assert angular_peak_count(spec, c, 50.0) == 1

    def test_sample_floor(self):
        with pytest.raises(ValueError):
            angular_peak_count(SPEC, np.zeros(SPEC.size), 50.0, n_samples=100)

    def test_lattice_ground_state_sixfold(self):
        geom = TubeGeometry(a=A, L=L, kappa0=1.0, s0=52.5)
        lattice = armchair_lattice(6, 195, L, strength=400.0)
        sol = solve_surface_spectrum(geom, BasisSpec(M=6, N=4, L=L),
                                     lattice=lattice)
        c = sol.xi_coefficients[:, 0]
        assert angular_peak_count(sol.spec, c, geom.s0) == 6

    @pytest.mark.parametrize("n_angular", [2, 3, 6])
    def test_peak_count_matches_ring_multiplicity(self, n_angular):
        lattice = armchair_lattice(n_angular, 21, L, strength=400.0)
        sol = solve_surface_spectrum(STRAIGHT, BasisSpec(M=6, N=2, L=L),
                                     lattice=lattice)
        c = sol.xi_coefficients[:, 0]
        assert angular_peak_count(sol.spec, c, 50.0) == n_angular


class TestReportsAndTables:
    def test_straight_ground_report(self, straight_sol):
        rep = state_report(straight_sol, 0)
        assert rep.energy == pytest.approx(-13.1457, abs=1e-3)
        assert rep.parity == "+1"
        assert len(rep.terms) == 1
        t = rep.terms[0]
        assert (t.m, t.n) == (0, 1)
        assert t.value == pytest.approx(0.0612, abs=5e-5)
        assert t.label() == "sin(1πs/L)"

    def test_terms_sorted_and_thresholded(self, bent_sol):
        terms = coefficient_terms(bent_sol.spec, bent_sol.xi_coefficients[:, 0],
                                  threshold=0.1)
        mags = [abs(t.value) for t in terms]
        assert mags == sorted(mags, reverse=True)
        assert min(mags) >= 0.1 * max(mags)

    def test_zero_threshold_lists_all(self, bent_sol):
        terms = coefficient_terms(bent_sol.spec, bent_sol.xi_coefficients[:, 0],
                                  threshold=0.0)
        assert len(terms) == SPEC.size

    def test_format_rows(self, straight_sol):
        reps = [state_report(straight_sol, k) for k in range(2)]
        rows = format_state_table(reps)
        assert rows[0]["energy_meV"] == pytest.approx(-13.1457, abs=1e-3)
        assert "sin(1πs/L)" in rows[0]["expansion"]
        assert rows[1]["parity"] == "+1"

    def test_profile_attachment(self, bent_sol):
        rep = state_report(bent_sol, 0, profile_theta=math.pi, profile_samples=64)
        s, rho = rep.profile
        assert len(s) == 64 and len(rho) == 64
        assert np.argmax(rho) == pytest.approx(
            64 * bent_sol.geom.s0 / L, abs=3)
