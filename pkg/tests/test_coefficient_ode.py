import math

import numpy as np
import pytest

from jostlab.coefficient_ode import (
    default_r_min,
    integrate_original,
    integrate_transformed,
    integrate_transformed_batch,
    reconstruct_wavefunction,
    schrodinger_residual,
    transformed_rhs,
)
from jostlab.errors import DomainError
from jostlab.potentials import SquareWell, choose_cutoff
from jostlab.special_functions import RiemannEnergy, Sheet
from jostlab._integrate import integrate_fixed


class TestTransformedRhs:
    def test_free_potential_fixed_point(self, free):
        da, db = transformed_rhs(0, 2.0 + 1.0j, 0.7, (0.3 + 1j, -2.0), free)
        assert da == 0 and db == 0

    def test_boxed_equations_hand_value(self, well):
        # l=0, E=0, r=1 inside the well: jt=1, yt=-1, V=-4, state (1,0)
        da, db = transformed_rhs(0, 0.0, 1.0, (1.0, 0.0), well)
        assert da == pytest.approx(-4.0, rel=1e-12)
        assert db == pytest.approx(4.0, rel=1e-12)

    @pytest.mark.parametrize("E", [0.5, -1.0, 2 + 1j])
    @pytest.mark.parametrize("r", [0.3, 0.9])
    def test_proportionality_identity(self, well, E, r):
        # da jt = db yt exactly (shared bracket in the boxed system)
        from jostlab.special_functions import reduced_pair
        state = (0.8 - 0.2j, 0.1 + 0.4j)
        da, db = transformed_rhs(0, E, r, state, well)
        pair = reduced_pair(0, E, r)
        lhs, rhs = da * pair.jt, db * pair.yt
        assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs))


class TestIntegrateTransformed:
    def test_free_trajectory_is_exact(self, free):
        traj = integrate_transformed(0, 1.0, free, R=1.0, tol=1e-10)
        for s in traj.states:
            assert s.a == 1.0 + 0j
            assert s.b == 0.0 + 0j
        assert traj.est_error == 0.0

    def test_sheet_invariance_bit_for_bit(self, well):
        E = 2.0 + 0.5j
        t1 = integrate_transformed(0, RiemannEnergy(E, Sheet.I), well, 1.0)
        t2 = integrate_transformed(0, RiemannEnergy(E, Sheet.II), well, 1.0)
        assert len(t1.states) == len(t2.states)
        for s1, s2 in zip(t1.states, t2.states):
            assert s1.a == s2.a and s1.b == s2.b

    def test_trajectory_contract(self, well):
        traj = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-10)
        rs = [s.r for s in traj.states]
        assert rs == sorted(rs)
        assert rs[-1] == 1.0
        assert traj.rhs_evals > 0
        assert traj.est_error >= 0.0

    def test_interior_matches_closed_form_square_well(self, well):
        # inside the well u solves the free equation at q^2 = E + V0, so
        # u(r)/u(r') = sin(q r)/sin(q r') independent of normalization
        E, q = 1.0, math.sqrt(5.0)
        radii = [0.4, 0.8, 1.0]
        traj = integrate_transformed(0, E, well, R=1.0, tol=1e-11,
                                     r_eval=radii)
        u = {r: reconstruct_wavefunction(traj, r)[0] for r in radii}
        for r in (0.4, 0.8):
            expected = math.sin(q * r) / math.sin(q * 1.0)
            assert abs(u[r] / u[1.0] - expected) <= 1e-8 * abs(expected)

    def test_batch_agrees_with_single(self, gauss):
        R = choose_cutoff(gauss, 1e-10)
        Es = np.array([0.5, 1.0, 2 + 0.5j, -1.5], dtype=complex)
        res = integrate_transformed_batch(0, Es, gauss, R, 1e-10)
        for i, E in enumerate(Es):
            traj = integrate_transformed(0, complex(E), gauss, R, 1e-10)
            assert abs(res.final[0, i] - traj.final.a) <= 1e-9
            assert abs(res.final[1, i] - traj.final.b) <= 1e-9

    def test_est_error_monotone_under_tol_halving(self, well):
        errs = []
        for tol in (1e-8, 5e-9, 2.5e-9, 1.25e-9):
            traj = integrate_transformed(0, 1.0, well, R=1.0, tol=tol)
            errs.append(traj.est_error)
        assert all(b <= a for a, b in zip(errs, errs[1:]))

    def test_fixed_step_order_on_square_well(self, well):
        # propagated order ~5 against a tight-tolerance reference
        from jostlab.coefficient_ode import _make_transformed_rhs
        E_arr = np.array([1.0 + 0j])
        rhs = _make_transformed_rhs(0, E_arr, well, 1e-14)
        y0 = np.array([[1.0 + 0j], [0.0 + 0j]])
        r0 = default_r_min(well, 0)
        ref = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-13).final
        errors = []
        steps = [25, 50, 100, 200]
        for n in steps:
            fin = integrate_fixed(rhs, r0, 1.0, y0, n)
            errors.append(max(abs(fin[0, 0] - ref.a), abs(fin[1, 0] - ref.b)))
        slopes = [math.log(errors[i] / errors[i + 1]) / math.log(2.0)
                  for i in range(len(errors) - 1)]
        slope = sum(slopes) / len(slopes)
        assert abs(slope - 5.0) <= 1.0  # within 20% of the nominal order


class TestIntegrateOriginal:
    def test_free_trajectory(self, free):
        traj = integrate_original(0, 1.0, free, R=1.0, tol=1e-10)
        assert traj.final.a == 1.0 + 0j
        assert traj.final.b == 0.0 + 0j

    def test_k_zero_rejected(self, well):
        with pytest.raises(DomainError):
            integrate_original(0, 0.0, well, R=1.0)

    def test_dual_path_equivalence_at_unit_k(self, well):
        radii = np.linspace(0.1, 0.95, 10)
        tt = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-10,
                                   r_eval=radii)
        to = integrate_original(0, 1.0, well, R=1.0, tol=1e-10, r_eval=radii)
        for r in radii:
            ut, dut = reconstruct_wavefunction(tt, float(r))
            uo, duo = reconstruct_wavefunction(to, float(r))
            assert abs(ut - uo) <= 1e-8 * abs(uo)
            assert abs(dut - duo) <= 1e-8 * abs(duo)

    def test_momentum_sign_flip_bookkeeping(self, well):
        # original-path states are k-odd, but u flips only by (-1)**(l+1)
        radii = [0.5, 0.9]
        tp = integrate_original(0, 1.0, well, R=1.0, tol=1e-10, r_eval=radii)
        tm = integrate_original(0, -1.0, well, R=1.0, tol=1e-10, r_eval=radii)
        assert tp.final.b != tm.final.b  # trajectories differ
        for r in radii:
            up, _ = reconstruct_wavefunction(tp, r)
            um, _ = reconstruct_wavefunction(tm, r)
            assert abs(up + um) <= 1e-9 * abs(up)  # u(-k) = -u(k) for l=0


class TestReconstruction:
    def test_free_wave_is_reduced_bessel(self, free):
        from jostlab.special_functions import reduced_bessel
        traj = integrate_transformed(0, 1.0, free, R=1.0, tol=1e-10,
                                     r_eval=[0.6])
        u, du = reconstruct_wavefunction(traj, 0.6)
        assert u == pytest.approx(reduced_bessel(0, 1.0, 0.6), rel=1e-12)

    def test_initial_data_dominates_near_origin(self, well):
        traj = integrate_transformed(1, 2.0, well, R=1.0, tol=1e-10)
        r0 = traj.states[0].r
        u, _ = reconstruct_wavefunction(traj, r0)
        from jostlab.special_functions import reduced_bessel
        assert u == pytest.approx(reduced_bessel(1, 2.0, r0), rel=1e-10)

    def test_out_of_range_rejected(self, well):
        traj = integrate_transformed(0, 1.0, well, R=1.0)
        with pytest.raises(DomainError):
            reconstruct_wavefunction(traj, 1.5)

    def test_hermite_interpolation_between_nodes(self, well):
        traj = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-10)
        rs = [s.r for s in traj.states]
        mid = 0.5 * (rs[3] + rs[4])  # strictly between nodes
        u_interp, _ = reconstruct_wavefunction(traj, mid)
        exact = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-12,
                                      r_eval=[mid])
        u_exact, _ = reconstruct_wavefunction(exact, mid)
        assert abs(u_interp - u_exact) <= 1e-6 * max(1.0, abs(u_exact))


class TestSchrodingerResidual:
    def test_free_solution_residual_tiny(self, free):
        traj = integrate_transformed(0, 1.0, free, R=1.0, tol=1e-12)
        assert schrodinger_residual(traj, free, 5) <= 1e-8

    def test_square_well_residual(self, well):
        traj = integrate_transformed(0, 1.0, well, R=1.0, tol=1e-10)
        assert schrodinger_residual(traj, well, 7) <= 1e-6

    def test_gaussian_l2_residual(self, gauss):
        R = choose_cutoff(gauss, 1e-10)
        traj = integrate_transformed(2, 1.0, gauss, R, tol=1e-10)
        assert schrodinger_residual(traj, gauss, 7) <= 1e-6

    def test_sample_count_validated(self, well):
        traj = integrate_transformed(0, 1.0, well, R=1.0)
        with pytest.raises(DomainError):
            schrodinger_residual(traj, well, 2)
