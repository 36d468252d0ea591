"""Zeros of F_in on the energy surface: bound states, resonances, virtuals.

Poles of S = F_out/F_in are exactly zeros of F_in, so all searches target
F_in itself (factor-free, no spurious pole/zero cancellation.)  Bound
states sit on sheet I at negative real energy, where F_in is real-valued
for a real potential; resonances sit on sheet II at Im E < 0, paired with
conjugate-mirror zeros by Schwarz reflection.

Search strategy is deliberately plain: grid scan, bracket or local-minimum
candidate selection, Newton refinement with a central-difference
derivative, deduplication.  A boundary winding count is available as a
cheap completeness diagnostic, never as a locator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .coefficient_ode import growth_capped_radius
from .errors import DomainError
from .jost import jost_batch
from .potentials import PotentialSpec, choose_cutoff
from .special_functions import RiemannEnergy, Sheet, _check_l

__all__ = [
    "SpectralRoot",
    "GridScan",
    "CoarseGridWarning",
    "complex_zero_refine",
    "find_bound_states",
    "find_resonances",
    "pole_scan_grid",
    "winding_number",
]

# |Im E| below this (scaled by max(1, |E|)) counts as "on the real axis"
# when classifying roots.
IM_TOL = 1e-8
# Newton iterates inside this disk are treated as crossing the branch point.
THRESHOLD_GUARD = 1e-9


class CoarseGridWarning(UserWarning):
    """A scan found no candidates although the boundary winding is nonzero."""


@dataclass(frozen=True)
class SpectralRoot:
    """A located zero of F_in with classification and diagnostics."""

    energy: RiemannEnergy
    k_at_root: complex
    kind: str  # bound | resonance | virtual
    residual: float
    iterations: int
    converged: bool


def _classify(energy: RiemannEnergy) -> str:
    E = energy.E
    scale = max(1.0, abs(E))
    on_axis = abs(E.imag) <= IM_TOL * scale
    if energy.sheet is Sheet.I:
        if on_axis and E.real < 0:
            return "bound"
        return "resonance"  # not expected for real potentials
    if on_axis and E.real < 0:
        return "virtual"
    return "resonance"


def _make_f_batch(l, spec, sheet, tol, R):
    def f_batch(E_arr):
        F_in, _, _ = jost_batch(l, E_arr, sheet, spec, tol, R=R)
        return F_in

    return f_batch


def _refine_newton(f_batch, E0: complex, tol: float, f_tol: float,
                   max_iter: int):
    """Newton iteration with central-difference derivative.

    Evaluates f at (E, E+h, E-h) in one batch per iteration.  Returns
    (E, residual, iterations, converged).
    """
    E = complex(E0)
    nudged = False
    fE = None
    for it in range(1, max_iter + 1):
        h = 1e-6 * max(abs(E), 1.0)
        vals = f_batch(np.array([E, E + h, E - h], dtype=complex))
        fE = complex(vals[0])
        dfE = (complex(vals[1]) - complex(vals[2])) / (2.0 * h)
        if dfE == 0:
            return E, abs(fE), it, False
        step = -fE / dfE
        E_new = E + step
        if abs(E_new) <= THRESHOLD_GUARD:
            if nudged:
                return E, abs(fE), it, False
            nudged = True
            E_new = E + 0.25 * step  # damped retry away from the branch point
        if abs(step) <= tol * max(abs(E_new), 1.0):
            fE = complex(f_batch(np.array([E_new], dtype=complex))[0])
            if abs(fE) <= f_tol:
                return E_new, abs(fE), it, True
            # converged step but residual above f_tol: keep polishing
        E = E_new
    return E, abs(fE) if fE is not None else math.inf, max_iter, False


def complex_zero_refine(l: int, spec: PotentialSpec, sheet, E_start: complex,
                        tol: float = 1e-10, max_iter: int = 50,
                        f=None, f_tol: float | None = None,
                        R: float | None = None) -> SpectralRoot:
    """Refine a single zero of F_in(E) from E_start by Newton iteration.

    ``f`` overrides the target function (oracle/testing hook, called on
    complex-ndarray batches).  Non-convergence is reported on the returned
    root, not raised; an iterate crossing the E = 0 guard disk is retried
    once with a damped step.
    """
    l = _check_l(l)
    sheet = Sheet(sheet)
    E_start = complex(E_start)
    if E_start == 0:
        raise DomainError("E_start must be nonzero")
    if max_iter < 1:
        raise DomainError("max_iter must be >= 1")
    if f is None:
        if R is None:
            R = choose_cutoff(spec, tol)
        f_batch = _make_f_batch(l, spec, sheet, tol, R)
    else:
        f_batch = f
    if f_tol is None:
        f0 = abs(complex(f_batch(np.array([E_start], dtype=complex))[0]))
        f_tol = 1e-9 * max(1.0, f0)
    E, residual, iterations, converged = _refine_newton(
        f_batch, E_start, tol, f_tol, max_iter)
    energy = RiemannEnergy(E, sheet)
    return SpectralRoot(energy=energy, k_at_root=energy.momentum,
                        kind=_classify(energy), residual=residual,
                        iterations=iterations, converged=converged)


def find_bound_states(l: int, spec: PotentialSpec, E_min: float,
                      tol: float = 1e-10, n_grid: int = 160,
                      R: float | None = None) -> list:
    """All zeros of F_in on sheet I along [E_min, 0), sorted ascending in E.

    F_in is real there for a real potential; sign changes on a geometric
    grid are bracketed, bisected, and polished by Newton refinement.  For
    potentials with merely exponential decay the integration radius is
    growth-capped (bound-state zero locations converge exponentially in R,
    so the cap costs nothing at the search tolerance).
    """
    l = _check_l(l)
    if E_min >= 0:
        raise DomainError("E_min must be negative")
    if R is None:
        R = growth_capped_radius(spec, math.sqrt(abs(E_min)),
                                 choose_cutoff(spec, tol))
    E_grid = -np.geomspace(abs(E_min), 1e-8, n_grid)
    f_batch = _make_f_batch(l, spec, Sheet.I, tol, R)
    f_grid = f_batch(E_grid.astype(complex)).real
    f_tol = 1e-9 * float(np.median(np.abs(f_grid)))

    roots = []
    for i in range(n_grid - 1):
        fa, fb = f_grid[i], f_grid[i + 1]
        if fa == 0.0:
            bracket = (E_grid[i], E_grid[i])
        elif fa * fb < 0.0:
            bracket = (E_grid[i], E_grid[i + 1])
        else:
            continue
        a, b = bracket
        va = fa
        for _ in range(40):
            if b - a <= tol * max(abs(a), 1.0):
                break
            mid = 0.5 * (a + b)
            vm = float(f_batch(np.array([mid], dtype=complex))[0].real)
            if vm == 0.0:
                a = b = mid
                break
            if va * vm < 0.0:
                b = mid
            else:
                a, va = mid, vm
        root = complex_zero_refine(l, spec, Sheet.I, 0.5 * (a + b), tol,
                                   f_tol=f_tol, R=R)
        if root.converged:
            roots.append(root)
    return _dedupe(roots, tol)


def _dedupe(roots, tol):
    roots = sorted(roots, key=lambda r: (r.energy.E.real, r.energy.E.imag))
    kept = []
    for root in roots:
        dup = any(
            abs(root.energy.E - other.energy.E)
            <= 100.0 * tol * max(1.0, abs(other.energy.E))
            for other in kept
        )
        if not dup:
            kept.append(root)
    return kept


def find_resonances(l: int, spec: PotentialSpec, region, grid=(24, 16),
                    tol: float = 1e-10, guard: float = 1e-6,
                    R: float | None = None) -> list:
    """Zeros of F_in on sheet II inside a lower-half-plane rectangle.

    ``region`` = (re_min, re_max, im_min, im_max) with im_max <= 0.  |F_in|
    is sampled on the grid; local minima at least 10x below the median are
    refined and deduplicated.  If no candidates emerge while the boundary
    winding count is nonzero, a CoarseGridWarning is issued.
    """
    l = _check_l(l)
    re_min, re_max, im_min, im_max = map(float, region)
    if re_min >= re_max or im_min >= im_max:
        raise DomainError("degenerate resonance search region")
    if im_max > 1e-12:
        raise DomainError("resonance region must lie in Im E <= 0")
    nx, ny = grid
    if nx < 2 or ny < 2:
        raise DomainError("grid must be at least 2x2")
    if R is None:
        corners = [complex(re_min, im_min), complex(re_max, im_min),
                   complex(re_min, im_max), complex(re_max, im_max)]
        kappa = max(abs(RiemannEnergy(c, Sheet.II).momentum.imag)
                    for c in corners)
        R = growth_capped_radius(spec, kappa, choose_cutoff(spec, tol))
    f_batch = _make_f_batch(l, spec, Sheet.II, tol, R)

    re = np.linspace(re_min, re_max, nx)
    im = np.linspace(im_min, im_max, ny)
    EE = re[None, :] + 1j * im[:, None]  # shape (ny, nx)
    mask = np.abs(EE) > guard
    vals = np.full(EE.shape, np.nan)
    flat = EE[mask].ravel()
    if flat.size == 0:
        raise DomainError("search region lies entirely inside the E = 0 guard")
    vals[mask] = np.abs(f_batch(flat))
    median = float(np.nanmedian(vals))

    candidates = []
    for iy in range(EE.shape[0]):
        for ix in range(EE.shape[1]):
            v = vals[iy, ix]
            if not np.isfinite(v) or v > 0.1 * median:
                continue
            neighborhood = vals[max(0, iy - 1):iy + 2, max(0, ix - 1):ix + 2]
            if v <= np.nanmin(neighborhood):
                candidates.append(complex(EE[iy, ix]))

    f_tol = 1e-9 * median
    roots = []
    for E0 in candidates:
        root = complex_zero_refine(l, spec, Sheet.II, E0, tol,
                                   f_tol=f_tol, R=R)
        if not root.converged:
            continue
        E = root.energy.E
        if E.imag > 0:
            # conjugate-mirror zero (real potential); report the lower-half
            # representative once
            energy = RiemannEnergy(E.conjugate(), Sheet.II)
            root = SpectralRoot(energy=energy, k_at_root=energy.momentum,
                                kind=_classify(energy), residual=root.residual,
                                iterations=root.iterations, converged=True)
        roots.append(root)
    roots = _dedupe(roots, tol)

    if not roots:
        w = winding_number(l, spec, region, Sheet.II, tol, R=R)
        if w != 0:
            warnings.warn(
                f"no resonance candidates found but boundary winding = {w}; "
                "the scan grid is too coarse", CoarseGridWarning)
    return roots


@dataclass
class GridScan:
    """Row-major |F_in| and arg F_in samples over a complex-energy rectangle."""

    E: np.ndarray        # (ny, nx) complex
    abs_F_in: np.ndarray
    arg_F_in: np.ndarray
    sheet: Sheet
    l: int

    def rows(self):
        """Deterministic row-major (E, |F_in|, arg F_in) iteration."""
        ny, nx = self.E.shape
        for iy in range(ny):
            for ix in range(nx):
                yield (complex(self.E[iy, ix]),
                       float(self.abs_F_in[iy, ix]),
                       float(self.arg_F_in[iy, ix]))


def pole_scan_grid(l: int, spec: PotentialSpec, region, resolution, sheet,
                   tol: float = 1e-10, guard: float = 1e-6) -> GridScan:
    """Sample F_in on a rectangular grid for export or visualization."""
    l = _check_l(l)
    sheet = Sheet(sheet)
    re_min, re_max, im_min, im_max = map(float, region)
    nx, ny = resolution
    if nx < 2 or ny < 2:
        raise DomainError("resolution must be at least 2x2")
    re = np.linspace(re_min, re_max, nx)
    im = np.linspace(im_min, im_max, ny)
    EE = re[None, :] + 1j * im[:, None]
    if np.any(np.abs(EE) <= guard):
        raise DomainError(
            f"grid point within guard radius {guard:g} of the threshold E = 0")
    R = choose_cutoff(spec, tol)
    F_in, _, _ = jost_batch(l, EE.ravel(), sheet, spec, tol, R=R)
    F_in = F_in.reshape(EE.shape)
    return GridScan(E=EE, abs_F_in=np.abs(F_in), arg_F_in=np.angle(F_in),
                    sheet=sheet, l=l)


def winding_number(l: int, spec: PotentialSpec, region, sheet,
                   tol: float = 1e-10, n_per_edge: int = 64,
                   R: float | None = None) -> int:
    """Zero count of F_in inside a rectangle from the boundary phase winding."""
    l = _check_l(l)
    sheet = Sheet(sheet)
    re_min, re_max, im_min, im_max = map(float, region)
    t = np.linspace(0.0, 1.0, n_per_edge, endpoint=False)
    bottom = re_min + t * (re_max - re_min) + 1j * im_min
    right = re_max + 1j * (im_min + t * (im_max - im_min))
    top = re_max - t * (re_max - re_min) + 1j * im_max
    left = re_min + 1j * (im_max - t * (im_max - im_min))
    path = np.concatenate([bottom, right, top, left, [re_min + 1j * im_min]])
    if R is None:
        R = choose_cutoff(spec, tol)
    F_in, _, _ = jost_batch(l, path, sheet, spec, tol, R=R)
    dphase = np.angle(F_in[1:] / F_in[:-1])
    return int(round(float(np.sum(dphase)) / (2.0 * math.pi)))
