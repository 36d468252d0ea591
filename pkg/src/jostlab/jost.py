"""Jost functions, S-matrix elements, and phase shifts.

The coefficient pair at the cutoff radius stands in for its r -> infinity
limit (the neglected tail is bounded by ``potentials.tail_bound``).  With
the working normalization (At, Bt)(r_min) = (1, 0) the reduced Jost
combinations are

    F_in  = (At - i k**(2l+1) Bt) / 2,
    F_out = (At + i k**(2l+1) Bt) / 2,

the coefficients of the incoming and outgoing Ricatti-Hankel waves in the
regular solution; physical Jost values follow as f = k**-(l+1) F up to the
documented overall normalization factor, which cancels in the S-matrix
S = F_out / F_in, in phase shifts, and in zero locations.

Sheet bookkeeping is pure algebra here: only k**(2l+1) changes sign on
sheet II, so F_in and F_out swap and S inverts.  Bound states (sheet I,
E < 0) and resonances (sheet II, Im E < 0) are zeros of F_in; the
``spectral`` module searches for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .coefficient_ode import integrate_transformed, integrate_transformed_batch
from .errors import DomainError, PoleSignal, ThresholdError
from .potentials import PotentialSpec, choose_cutoff
from .special_functions import (
    RiemannEnergy,
    Sheet,
    _check_l,
    _momentum_first_sheet_batch,
)

__all__ = [
    "JostPair",
    "PhaseShiftTable",
    "jost_pair",
    "jost_batch",
    "s_matrix",
    "phase_shift",
    "phase_shift_scan",
]

# Absolute |F_in| underflow guard; below this the S-matrix is reported as a
# pole rather than an overflowing quotient.
POLE_GUARD = 1e-280


@dataclass(frozen=True)
class JostPair:
    """Jost values at one (l, E, sheet) with their reduced building blocks."""

    f_in: complex
    f_out: complex
    F_in: complex
    F_out: complex
    k_used: complex
    l: int
    R: float
    tail_tol: float


def _jost_from_coeff(l: int, k: complex, a: complex, b: complex):
    """(F_in, F_out) from the transformed coefficients and a momentum value."""
    kp = k ** (2 * l + 1)
    return 0.5 * (a - 1j * kp * b), 0.5 * (a + 1j * kp * b)


def jost_pair(l: int, energy, spec: PotentialSpec, tol: float = 1e-10,
              R: float | None = None) -> JostPair:
    """Assemble F_in/F_out (and f_in/f_out) at one energy.

    Integrates the transformed system to R = choose_cutoff(spec, tol) unless
    R is given.  E = 0 is the branch point and is rejected; probe threshold
    behavior through limits along E > 0.
    """
    l = _check_l(l)
    if not isinstance(energy, RiemannEnergy):
        energy = RiemannEnergy(complex(energy), Sheet.I)
    if energy.E == 0:
        raise ThresholdError(
            "E = 0 is the branch point; Jost extraction is undefined there")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if R is None:
        R = choose_cutoff(spec, tol)
    traj = integrate_transformed(l, energy, spec, R, tol, record_all=False)
    k = energy.momentum
    F_in, F_out = _jost_from_coeff(l, k, traj.final.a, traj.final.b)
    norm = k ** (-(l + 1))
    return JostPair(f_in=norm * F_in, f_out=norm * F_out, F_in=F_in,
                    F_out=F_out, k_used=k, l=l, R=R, tail_tol=tol)


def jost_batch(l: int, energies, sheet: Sheet, spec: PotentialSpec,
               tol: float = 1e-10, R: float | None = None):
    """(F_in, F_out, k) arrays for an energy batch on one sheet.

    One shared integration; the workhorse behind scans and searches.
    """
    l = _check_l(l)
    E_arr = np.asarray(energies, dtype=complex).ravel()
    if np.any(E_arr == 0):
        raise ThresholdError("batch contains the branch point E = 0")
    if R is None:
        R = choose_cutoff(spec, tol)
    res = integrate_transformed_batch(l, E_arr, spec, R, tol)
    a, b = res.final[0], res.final[1]
    k = _momentum_first_sheet_batch(E_arr)
    if Sheet(sheet) is Sheet.II:
        k = -k
    kp = k ** (2 * l + 1)
    F_in = 0.5 * (a - 1j * kp * b)
    F_out = 0.5 * (a + 1j * kp * b)
    return F_in, F_out, k


def s_matrix(pair: JostPair) -> complex:
    """S = F_out / F_in (identical to f_out / f_in; the prefactor cancels)."""
    if abs(pair.F_in) < POLE_GUARD:
        raise PoleSignal(
            f"|F_in| = {abs(pair.F_in):.3g} below the underflow guard; "
            f"S-matrix pole at E = {pair.k_used ** 2:.6g}")
    return pair.F_out / pair.F_in


def phase_shift(l: int, spec: PotentialSpec, E: float, tol: float = 1e-10,
                R: float | None = None) -> float:
    """Principal phase shift (half the S-matrix argument) in (-pi/2, pi/2]."""
    if E <= 0:
        raise DomainError("phase shifts are defined for real E > 0")
    pair = jost_pair(l, RiemannEnergy(E, Sheet.I), spec, tol, R=R)
    s = s_matrix(pair)
    return 0.5 * math.atan2(s.imag, s.real)


@dataclass
class PhaseShiftTable:
    """Scan rows (k, E, delta, |S|) plus indices of pole-flagged grid points."""

    k: np.ndarray
    E: np.ndarray
    delta: np.ndarray
    abs_S: np.ndarray
    flagged: list

    def __len__(self):
        return self.k.size


def phase_shift_scan(l: int, spec: PotentialSpec, k_grid,
                     tol: float = 1e-10) -> PhaseShiftTable:
    """Phase shifts over an increasing positive momentum grid.

    delta = arg(S)/2 unwrapped continuously along the grid, anchored so that
    delta(k_min) lies in (-pi/2, pi/2]; |S| is recorded as a unitarity
    diagnostic.  A pole signal at a grid point flags the row and the scan
    continues (flagged rows carry NaN).
    """
    k_arr = np.asarray(k_grid, dtype=float).ravel()
    if k_arr.size == 0:
        raise DomainError("k_grid must be non-empty")
    if np.any(k_arr <= 0) or np.any(np.diff(k_arr) <= 0):
        raise DomainError("k_grid must be strictly increasing and positive")
    E_arr = k_arr.astype(complex) ** 2
    F_in, F_out, _ = jost_batch(l, E_arr, Sheet.I, spec, tol)

    flagged = [int(i) for i in np.nonzero(np.abs(F_in) < POLE_GUARD)[0]]
    good = np.abs(F_in) >= POLE_GUARD
    S = np.where(good, F_out / np.where(good, F_in, 1.0), np.nan + 0j)
    abs_S = np.abs(S)

    delta = np.full(k_arr.size, np.nan)
    prev_s = None
    prev_d = None
    for i in range(k_arr.size):
        if not good[i]:
            continue
        if prev_s is None:
            prev_d = 0.5 * float(np.angle(S[i]))
        else:
            prev_d = prev_d + 0.5 * float(np.angle(S[i] / prev_s))
        prev_s = S[i]
        delta[i] = prev_d
    return PhaseShiftTable(k=k_arr, E=E_arr.real, delta=delta, abs_S=abs_S,
                           flagged=flagged)
