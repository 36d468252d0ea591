import cmath
import math

import numpy as np
import pytest

from jostlab.errors import DomainError, PoleSignal, ThresholdError
from jostlab.jost import (
    JostPair,
    jost_batch,
    jost_pair,
    phase_shift,
    phase_shift_scan,
    s_matrix,
)
from jostlab.special_functions import RiemannEnergy, Sheet

from oracles import square_well_delta0


class TestJostPair:
    def test_free_pair(self, free):
        pair = jost_pair(0, 1.0, free, tol=1e-10)
        assert pair.F_in == 0.5 + 0j
        assert pair.F_out == 0.5 + 0j
        assert s_matrix(pair) == 1.0 + 0j

    def test_threshold_rejected(self, well):
        with pytest.raises(ThresholdError):
            jost_pair(0, 0.0, well)

    def test_reduced_combination_invariants(self, well):
        for E in (1.0, 2.5 + 0.5j, -1.0):
            for sheet in (Sheet.I, Sheet.II):
                energy = RiemannEnergy(E, sheet)
                pair = jost_pair(0, energy, well, tol=1e-10)
                k = pair.k_used
                # F_in + F_out recovers the coefficient at the cutoff, and
                # their difference carries the full momentum prefactor
                a = pair.F_in + pair.F_out
                diff = pair.F_out - pair.F_in
                b = diff / (1j * k)
                assert abs((pair.F_in - 0.5 * (a - 1j * k * b))) < 1e-14
                # physical values are the reduced ones up to k**-(l+1)
                assert pair.f_in == pytest.approx(pair.F_in / k, rel=1e-13)
                assert pair.f_in / pair.f_out == pytest.approx(
                    pair.F_in / pair.F_out, rel=1e-13)

    def test_conjugate_pair_on_real_axis(self, well, gauss):
        for spec in (well, gauss):
            pair = jost_pair(0, 2.0, spec, tol=1e-10)
            assert pair.F_out == pytest.approx(pair.F_in.conjugate(),
                                               rel=1e-12)

    def test_sheet_swap_is_exact(self, well):
        E = 1.7
        p1 = jost_pair(0, RiemannEnergy(E, Sheet.I), well, tol=1e-10)
        p2 = jost_pair(0, RiemannEnergy(E, Sheet.II), well, tol=1e-10)
        assert p2.F_in == p1.F_out
        assert p2.F_out == p1.F_in

    def test_normalization_independence(self, well):
        # scaling the initial data rescales F_in and F_out together
        from jostlab.coefficient_ode import integrate_transformed
        from jostlab.jost import _jost_from_coeff
        c = 2.0 - 3.0j
        t1 = integrate_transformed(0, 2.0, well, 1.0, 1e-11)
        t2 = integrate_transformed(0, 2.0, well, 1.0, 1e-11,
                                   init=(c, 0.0))
        k = RiemannEnergy(2.0).momentum
        F1 = _jost_from_coeff(0, k, t1.final.a, t1.final.b)
        F2 = _jost_from_coeff(0, k, t2.final.a, t2.final.b)
        s1 = F1[1] / F1[0]
        s2 = F2[1] / F2[0]
        assert abs(s1 - s2) <= 1e-9
        assert F2[0] == pytest.approx(c * F1[0], rel=1e-9)


class TestSMatrix:
    def test_unit_modulus_on_real_axis(self, well, gauss, expwell, yukawa):
        for spec in (well, gauss, expwell, yukawa):
            for E in (0.25, 1.0, 4.0):
                s = s_matrix(jost_pair(0, E, spec, tol=1e-10))
                assert abs(abs(s) - 1.0) <= 1e-12

    def test_sheet_reciprocity(self, well):
        E = 2.0 + 1.0j
        s1 = s_matrix(jost_pair(0, RiemannEnergy(E, Sheet.I), well, 1e-10))
        s2 = s_matrix(jost_pair(0, RiemannEnergy(E, Sheet.II), well, 1e-10))
        assert abs(s1 * s2 - 1.0) <= 1e-12

    def test_pole_signal(self):
        pair = JostPair(f_in=0j, f_out=1.0, F_in=1e-300 + 0j, F_out=1.0 + 0j,
                        k_used=1.0, l=0, R=1.0, tail_tol=1e-10)
        with pytest.raises(PoleSignal):
            s_matrix(pair)


class TestPhaseShiftScan:
    def test_free_scan_identically_zero(self, free):
        table = phase_shift_scan(0, free, np.linspace(0.1, 5.0, 25), 1e-10)
        assert np.all(table.delta == 0.0)
        assert np.all(table.abs_S == 1.0)
        assert table.flagged == []

    def test_square_well_against_closed_form(self, well):
        k = np.linspace(0.1, 5.0, 100)
        table = phase_shift_scan(0, well, k, tol=1e-10)
        ref = square_well_delta0(k, 4.0, 1.0)
        assert np.max(np.abs(table.delta - ref)) <= 1e-8

    def test_anchor_in_principal_interval(self, well, gauss):
        for spec in (well, gauss):
            table = phase_shift_scan(0, spec, np.linspace(0.1, 1.0, 5), 1e-10)
            assert -math.pi / 2 < table.delta[0] <= math.pi / 2

    def test_unwrap_continuity(self, well):
        k = np.linspace(0.1, 5.0, 200)
        table = phase_shift_scan(0, well, k, tol=1e-10)
        assert np.max(np.abs(np.diff(table.delta))) < 0.5  # no pi jumps

    def test_grid_validation(self, well):
        with pytest.raises(DomainError):
            phase_shift_scan(0, well, [], 1e-10)
        with pytest.raises(DomainError):
            phase_shift_scan(0, well, [0.5, 0.4], 1e-10)
        with pytest.raises(DomainError):
            phase_shift_scan(0, well, [-0.5, 0.4], 1e-10)

    def test_single_point_helper_matches_scan(self, gauss):
        table = phase_shift_scan(0, gauss, np.array([1.0]), 1e-10)
        assert phase_shift(0, gauss, 1.0, 1e-10) == pytest.approx(
            float(table.delta[0]), abs=1e-10)


class TestJostBatch:
    def test_matches_single_evaluations(self, gauss):
        Es = np.array([0.5, 2.0, 1 + 1j, -2.0], dtype=complex)
        F_in, F_out, k = jost_batch(0, Es, Sheet.I, gauss, 1e-10)
        for i, E in enumerate(Es):
            pair = jost_pair(0, RiemannEnergy(complex(E), Sheet.I), gauss,
                             1e-10)
            assert abs(F_in[i] - pair.F_in) <= 1e-9
            assert abs(F_out[i] - pair.F_out) <= 1e-9
            assert k[i] == pair.k_used

    def test_threshold_in_batch_rejected(self, gauss):
        with pytest.raises(ThresholdError):
            jost_batch(0, np.array([1.0, 0.0]), Sheet.I, gauss, 1e-10)

    def test_threshold_law_small_k_slope(self, gauss):
        # log delta vs log k slope tends to 2l+1 near threshold
        k = np.geomspace(0.01, 0.05, 7)
        for l in (1, 2):
            table = phase_shift_scan(l, gauss, k, tol=1e-12)
            slope = np.polyfit(np.log(k), np.log(np.abs(table.delta)), 1)[0]
            assert abs(slope - (2 * l + 1)) <= 0.02 * (2 * l + 1)
