"""First-order coefficient systems for the regular radial solution.

Writing the regular solution as u = A j_l(kr) - B y_l(kr) with the
auxiliary condition A' j - B' y = 0 turns the radial equation into

    A' = -(y_l/k) V (j_l A - y_l B),      B' = -(j_l/k) V (j_l A - y_l B),

the "original" path, which is explicitly k-dependent and therefore
branched in E.  Dividing the momentum powers out (At = k**(l+1) A,
Bt = k**-l B together with jt, yt from ``special_functions``) gives the
transformed system

    At' = -yt V (jt At - yt Bt),          Bt' = -jt V (jt At - yt Bt),

whose right-hand side involves E only through jt, yt: integer powers of E,
no branch.  Integrating the transformed system therefore yields the same
trajectory on both sheets, bit for bit, which is what the verification
module certifies via monodromy loops.

Initial data: (At, Bt)(r_min) = (1, 0).  The printed energy-independent
alternative (0, 0) is the trivial solution; any constant rescaling of the
initial vector cancels in every physical output (S-matrix, phase shifts,
zero locations), so the regular solution is recovered up to an overall
k**(l+1) factor.

The integrator runs over a batch of energies sharing one adaptive step
sequence; scan-type callers exploit this through ``integrate_transformed_batch``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

import numpy as np

from ._integrate import integrate_adaptive
from .errors import DomainError
from .potentials import PotentialSpec, evaluate as eval_potential
from .special_functions import (
    SWITCH_KR,
    THRESHOLD_DISK,
    RiemannEnergy,
    Sheet,
    _check_l,
    _momentum_first_sheet_batch,
    _reduced_jy_batch,
    _reduced_series,
    momentum_first_sheet,
    reduced_pair,
    riccati_closed,
)

__all__ = [
    "CoefficientState",
    "Trajectory",
    "transformed_rhs",
    "integrate_transformed",
    "integrate_transformed_batch",
    "integrate_original",
    "reconstruct_wavefunction",
    "schrodinger_residual",
    "default_r_min",
]

TRANSFORMED = "transformed"
ORIGINAL = "original"


@dataclass(frozen=True)
class CoefficientState:
    """Coefficient pair at one radius: (At, Bt) or (A, B) depending on path."""

    a: complex
    b: complex
    r: float
    path: str = TRANSFORMED


@dataclass
class Trajectory:
    """Recorded integration of a coefficient system for one (l, E)."""

    l: int
    energy: RiemannEnergy
    states: list
    R: float
    est_error: float
    rhs_evals: int
    path: str = TRANSFORMED
    spec: PotentialSpec | None = None
    tol: float = 1e-10
    k: complex | None = None  # original path only

    @property
    def final(self) -> CoefficientState:
        return self.states[-1]

    @property
    def r_min(self) -> float:
        return self.states[0].r


def default_r_min(spec: PotentialSpec, l: int = 0) -> float:
    """Integration start radius: tiny fraction of the potential length scale.

    Larger for high l, where yt ~ r**-l would overflow at 1e-8 while the
    neglected inner mass is O(r_min**(2l+3)).
    """
    base = max(1e-8, 1e-6 * spec.length_scale)
    if l >= 6:
        base = max(base, 1e-4 * spec.length_scale)
    return base


def growth_capped_radius(spec: PotentialSpec, kappa_max: float, R_full: float,
                         cap: float = 100.0) -> float:
    """Largest radius <= R_full with |V(R)| exp(2 kappa R) below ``cap``.

    At energies with |Im k| = kappa the coefficient-matrix entries scale
    like V(r) exp(2 kappa r); once the potential decays only exponentially
    this product can grow without bound and explicit stepping stalls, while
    every structural identity (closure, swap, reciprocity) already holds at
    finite radius.  Compactly supported and Gaussian potentials return
    R_full unchanged.
    """
    if kappa_max <= 0:
        return R_full
    R = R_full
    while R > 1.0:
        try:
            v = abs(spec.evaluate(R))
        except Exception:
            v = math.inf
        if v * math.exp(2.0 * kappa_max * R) <= cap:
            return R
        R -= 0.25
    return max(R, 1.0)


def _sf_tol(tol: float) -> float:
    return min(1e-12, 0.01 * tol)


def _reduced_jy_scalar(l: int, E: complex, k: complex, r: float, tol: float):
    """(jt, yt) values at one (E, r), same regime split as the batch path."""
    if abs(k) * r <= SWITCH_KR or abs(E) <= THRESHOLD_DISK:
        jv, _, _ = _reduced_series(l, E, r, tol, "j")
        yv, _, _ = _reduced_series(l, E, r, tol, "y")
        return jv, yv
    vals = riccati_closed(l, k, r)
    kl = k ** l
    return vals.j / (kl * k), vals.y * kl


def transformed_rhs(l: int, E: complex, r: float, state, spec: PotentialSpec,
                    tol: float = 1e-12):
    """Right-hand side (dAt/dr, dBt/dr) of the transformed system at one point."""
    l = _check_l(l)
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    a, b = complex(state[0]), complex(state[1])
    V = eval_potential(spec, r)
    if V == 0.0:
        return 0j, 0j
    pair = reduced_pair(l, E, r, tol)
    w = V * (pair.jt * a - pair.yt * b)
    return -pair.yt * w, -pair.jt * w


def _make_transformed_rhs(l: int, E_arr: np.ndarray, spec: PotentialSpec,
                          tol: float):
    k_arr = _momentum_first_sheet_batch(E_arr)
    sf_tol = _sf_tol(tol)

    if E_arr.size == 1:
        # Scalar fast path: python complex arithmetic beats size-1 ndarrays.
        E = complex(E_arr[0])
        k = complex(k_arr[0])

        def rhs(r, y):
            V = spec.evaluate(r)
            if V == 0.0:
                return np.zeros_like(y)
            jt, yt = _reduced_jy_scalar(l, E, k, r, sf_tol)
            w = V * (jt * complex(y[0, 0]) - yt * complex(y[1, 0]))
            return np.array([[-yt * w], [-jt * w]])

        return rhs

    def rhs(r, y):
        V = spec.evaluate(r)
        if V == 0.0:
            return np.zeros_like(y)
        jt, yt = _reduced_jy_batch(l, E_arr, k_arr, r, sf_tol)
        w = V * (jt * y[0] - yt * y[1])
        return np.stack((-yt * w, -jt * w))

    return rhs


def _merge_targets(spec: PotentialSpec, r0: float, R: float, r_eval):
    targets = {float(t) for t in r_eval}
    for b in spec.breakpoints():
        if r0 < b < R:
            targets.add(float(b))
    return sorted(targets)


def integrate_transformed_batch(l: int, energies: np.ndarray,
                                spec: PotentialSpec, R: float,
                                tol: float = 1e-10, r_eval=(),
                                record_all: bool = False, init=(1.0, 0.0)):
    """Integrate the transformed system for a whole energy batch at once.

    Returns the raw IntegrationResult with state shape (2, m).  The step
    sequence is shared (error-controlled over the batch), so per-energy
    results agree with single integrations to within the tolerance.
    """
    l = _check_l(l)
    E_arr = np.asarray(energies, dtype=complex).ravel()
    r0 = default_r_min(spec, l)
    if R <= r0:
        raise DomainError(f"cutoff R = {R} must exceed r_min = {r0}")
    rhs = _make_transformed_rhs(l, E_arr, spec, tol)
    y0 = np.zeros((2, E_arr.size), dtype=complex)
    y0[0] = complex(init[0])
    y0[1] = complex(init[1])
    return integrate_adaptive(rhs, r0, R, y0, tol,
                              r_eval=_merge_targets(spec, r0, R, r_eval),
                              record_all=record_all)


def integrate_transformed(l: int, energy, spec: PotentialSpec, R: float,
                          tol: float = 1e-10, r_eval=(),
                          record_all: bool = True,
                          init=(1.0, 0.0)) -> Trajectory:
    """Integrate (At, Bt) from (1, 0) at r_min out to R for one energy.

    The right-hand side is built from the reduced functions only, so the
    result depends on the energy value and not on the sheet.
    """
    if not isinstance(energy, RiemannEnergy):
        energy = RiemannEnergy(complex(energy), Sheet.I)
    res = integrate_transformed_batch(l, [energy.E], spec, R, tol,
                                      r_eval=r_eval, record_all=record_all,
                                      init=init)
    states = [CoefficientState(a=complex(y[0, 0]), b=complex(y[1, 0]), r=r,
                               path=TRANSFORMED)
              for r, y in zip(res.rs, res.ys)]
    return Trajectory(l=l, energy=energy, states=states, R=R,
                      est_error=float(res.est_error[0]), rhs_evals=res.nfev,
                      path=TRANSFORMED, spec=spec, tol=tol)


def integrate_original(l: int, k: complex, spec: PotentialSpec, R: float,
                       tol: float = 1e-10, r_eval=(),
                       record_all: bool = True,
                       init=(1.0, 0.0)) -> Trajectory:
    """Integrate the original (A, B) system at fixed momentum k != 0.

    Cross-check path: its right-hand side uses the momentum-dependent
    Ricatti functions directly, so it is k-odd where the transformed path
    is sheet-blind.  A = k**-(l+1) At and B = k**l Bt relate the two up to
    the shared initial normalization.
    """
    l = _check_l(l)
    k = complex(k)
    if k == 0:
        raise DomainError("k = 0: the original system is undefined at threshold")
    r0 = default_r_min(spec, l)
    if R <= r0:
        raise DomainError(f"cutoff R = {R} must exceed r_min = {r0}")

    def rhs(r, y):
        V = spec.evaluate(float(r))
        if V == 0.0:
            return np.zeros_like(y)
        vals = riccati_closed(l, k, float(r))
        w = (V / k) * (vals.j * y[0] - vals.y * y[1])
        return np.array([-vals.y * w, -vals.j * w])

    y0 = np.array([complex(init[0]), complex(init[1])])
    res = integrate_adaptive(rhs, r0, R, y0, tol,
                             r_eval=_merge_targets(spec, r0, R, r_eval),
                             record_all=record_all)
    states = [CoefficientState(a=complex(y[0]), b=complex(y[1]), r=r,
                               path=ORIGINAL)
              for r, y in zip(res.rs, res.ys)]
    E = k * k
    sheet = Sheet.I if abs(momentum_first_sheet(E) - k) <= 1e-12 * abs(k) \
        else Sheet.II
    return Trajectory(l=l, energy=RiemannEnergy(E, sheet), states=states, R=R,
                      est_error=float(res.est_error[0]), rhs_evals=res.nfev,
                      path=ORIGINAL, spec=spec, tol=tol, k=k)


def _basis_at(traj: Trajectory, r: float):
    """(phi, chi, dphi, dchi): the basis pair u is expanded in at radius r."""
    if traj.path == TRANSFORMED:
        pair = reduced_pair(traj.l, traj.energy.E, r, _sf_tol(traj.tol))
        return pair.jt, pair.yt, pair.djt, pair.dyt
    vals = riccati_closed(traj.l, traj.k, r)
    return vals.j, vals.y, vals.dj * traj.k, vals.dy * traj.k


def _rhs_at(traj: Trajectory, r: float, a: complex, b: complex):
    if traj.path == TRANSFORMED:
        return transformed_rhs(traj.l, traj.energy.E, r, (a, b), traj.spec,
                               _sf_tol(traj.tol))
    V = eval_potential(traj.spec, r)
    if V == 0.0:
        return 0j, 0j
    vals = riccati_closed(traj.l, traj.k, r)
    w = (V / traj.k) * (vals.j * a - vals.y * b)
    return -vals.y * w, -vals.j * w


def reconstruct_wavefunction(traj: Trajectory, r: float):
    """(u, du/dr) at radius r inside the trajectory range.

    u = a*phi - b*chi with the path's basis pair; du uses the auxiliary
    condition, du = a*phi' - b*chi'.  At recorded nodes the coefficients
    carry full integration accuracy; between nodes they are cubic-Hermite
    interpolated.  Pass ``r_eval`` to the integration to place nodes where
    full accuracy is needed.
    """
    rs = [s.r for s in traj.states]
    if r < rs[0] - 1e-12 or r > rs[-1] + 1e-12:
        raise DomainError(f"r = {r} outside trajectory range [{rs[0]}, {rs[-1]}]")
    i = bisect.bisect_left(rs, r)
    eps = 1e-12 * max(1.0, abs(r))
    for j in (i - 1, i, i + 1):
        if 0 <= j < len(rs) and abs(rs[j] - r) <= eps:
            s = traj.states[j]
            a, b = s.a, s.b
            break
    else:
        lo = min(max(i - 1, 0), len(rs) - 2)
        s0, s1 = traj.states[lo], traj.states[lo + 1]
        h = s1.r - s0.r
        t = (r - s0.r) / h
        d0 = _rhs_at(traj, s0.r, s0.a, s0.b)
        d1 = _rhs_at(traj, s1.r, s1.a, s1.b)
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        a = h00 * s0.a + h10 * h * d0[0] + h01 * s1.a + h11 * h * d1[0]
        b = h00 * s0.b + h10 * h * d0[1] + h01 * s1.b + h11 * h * d1[1]
    phi, chi, dphi, dchi = _basis_at(traj, r)
    return a * phi - b * chi, a * dphi - b * dchi


def schrodinger_residual(traj: Trajectory, spec: PotentialSpec,
                         sample_count: int, h_fd: float = 0.005) -> float:
    """Max radial-equation defect |u'' + (E - l(l+1)/r^2 - V) u| / (1 + |u|).

    u'' comes from a 5-point stencil of width ``h_fd`` around each sample
    radius; the stencil values are produced by one fresh integration that
    lands exactly on every stencil point.  Samples keep clear of the origin
    (centrifugal term magnifies stencil truncation error) and of potential
    discontinuities.
    """
    if sample_count < 3:
        raise DomainError("sample_count must be >= 3")
    r0 = traj.states[0].r
    R = traj.R
    h = h_fd
    lo = max(r0 + 2.5 * h, 0.25 * min(R, 1.2), 4 * h)
    hi = R - 2.5 * h
    if hi <= lo:
        raise DomainError("trajectory too short for the requested stencil")
    samples = np.linspace(lo, hi, sample_count)
    for bp in spec.breakpoints():
        near = np.abs(samples - bp) < 3.5 * h
        samples[near] += 7 * h * np.sign(samples[near] - bp + 1e-30)
    samples = samples[(samples > lo - h) & (samples < hi + h)]

    offsets = np.array([-2.0, -1.0, 0.0, 1.0, 2.0]) * h
    stencil = (samples[:, None] + offsets[None, :]).ravel()
    init = (traj.states[0].a, traj.states[0].b)
    if traj.path == TRANSFORMED:
        res = integrate_transformed_batch(traj.l, [traj.energy.E], spec, R,
                                          traj.tol, r_eval=stencil,
                                          record_all=False, init=init)
        coeff = {r: (y[0, 0], y[1, 0]) for r, y in zip(res.rs, res.ys)}
    else:
        t2 = integrate_original(traj.l, traj.k, spec, R, traj.tol,
                                r_eval=stencil, record_all=False, init=init)
        coeff = {s.r: (s.a, s.b) for s in t2.states}

    E = traj.energy.E
    l = traj.l
    worst = 0.0
    for rc in samples:
        u = np.empty(5, dtype=complex)
        for m, off in enumerate(offsets):
            r = rc + off
            a, b = coeff[r]
            phi, chi, _, _ = _basis_at(traj, r)
            u[m] = a * phi - b * chi
        upp = (-u[0] + 16 * u[1] - 30 * u[2] + 16 * u[3] - u[4]) / (12 * h * h)
        w = E - l * (l + 1) / (rc * rc) - eval_potential(spec, rc)
        defect = abs(upp + w * u[2]) / (1.0 + abs(u[2]))
        worst = max(worst, defect)
    return worst
