"""Ricatti-Bessel functions and their branch-free reduced variants.

The scattering momentum k = sqrt(E) (scaled units, 2*mu/hbar^2 = 1) lives on
a two-sheeted Riemann surface with branch point E = 0.  The Ricatti-Bessel
and Ricatti-Neumann functions

    j_l(z) = z * (spherical j_l)(z),        j_0(z) = sin(z)
    y_l(z) = z * (spherical n_l)(z),        y_0(z) = -cos(z)

carry odd powers of k through their argument z = k*r, which is what makes
the Jost functions multivalued in E.  Dividing those powers out,

    jt_l(E, r) = k**-(l+1) * j_l(k*r)
    yt_l(E, r) = k**l      * y_l(k*r)

leaves power series in E alone (integer powers only), so jt and yt are
single-valued in the energy and identical on both sheets.  This module
evaluates both representations: the E-power series (valid everywhere,
exact at threshold) and closed-form trigonometric recurrences in z
(preferred for |k*r| above ``SWITCH_KR`` where the alternating series
loses relative accuracy).

Sign convention: fixed by the Wronskian j_l y_l' - y_l j_l' = k (radial
derivatives), equivalently j y' - y j' = 1 in the argument z.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DomainError, EvaluationError

__all__ = [
    "Sheet",
    "RiemannEnergy",
    "ReducedPair",
    "RiccatiValues",
    "momentum_first_sheet",
    "continue_momentum",
    "reduced_bessel",
    "reduced_neumann",
    "riccati_closed",
    "reduced_pair",
    "SWITCH_KR",
    "MAX_TERMS",
    "L_MAX",
]

# Series/closed-form switch: the alternating series keeps >= 12 significant
# digits up to |kr| ~ 10; beyond that the closed forms are exact.
SWITCH_KR = 10.0
# Below this |E| the momentum-dividing closed-form path is ill-conditioned.
THRESHOLD_DISK = 1e-12
MAX_TERMS = 200
MIN_TERMS = 3
L_MAX = 20

_SQRT_PI = math.sqrt(math.pi)


class Sheet(str, Enum):
    """The two branches of k = sqrt(E)."""

    I = "I"
    II = "II"


def momentum_first_sheet(E: complex) -> complex:
    """Momentum on the physical sheet: branch cut on E in [0, inf), Im k >= 0.

    Real E is special-cased so that positive energies give exactly real k and
    negative energies exactly imaginary k.
    """
    E = complex(E)
    if E == 0:
        return 0j
    if E.imag == 0.0:
        if E.real > 0.0:
            return complex(math.sqrt(E.real), 0.0)
        return complex(0.0, math.sqrt(-E.real))
    theta = cmath.phase(E)
    if theta < 0.0:
        theta += 2.0 * math.pi
    return math.sqrt(abs(E)) * cmath.exp(0.5j * theta)


def _momentum_first_sheet_batch(E: np.ndarray) -> np.ndarray:
    """Vectorized ``momentum_first_sheet`` (no exact-real special casing)."""
    E = np.asarray(E, dtype=complex)
    theta = np.angle(E)
    theta = np.where(theta < 0.0, theta + 2.0 * math.pi, theta)
    k = np.sqrt(np.abs(E)) * np.exp(0.5j * theta)
    real = E.imag == 0.0
    if np.any(real):
        pos = real & (E.real > 0.0)
        neg = real & (E.real < 0.0)
        k = np.where(pos, np.sqrt(np.where(pos, E.real, 1.0)) + 0j, k)
        k = np.where(neg, 1j * np.sqrt(np.where(neg, -E.real, 1.0)), k)
    return k


@dataclass(frozen=True)
class RiemannEnergy:
    """A point (E, sheet) on the two-sheeted energy surface.

    ``momentum`` is the principal square root of E (cut along [0, inf),
    Im k >= 0) on sheet I and its exact negative on sheet II, so that
    momentum**2 == E on both sheets.
    """

    E: complex
    sheet: Sheet = Sheet.I

    def __post_init__(self):
        object.__setattr__(self, "E", complex(self.E))
        object.__setattr__(self, "sheet", Sheet(self.sheet))

    @property
    def momentum(self) -> complex:
        k = momentum_first_sheet(self.E)
        return k if self.sheet is Sheet.I else -k

    def on_other_sheet(self) -> "RiemannEnergy":
        other = Sheet.II if self.sheet is Sheet.I else Sheet.I
        return RiemannEnergy(self.E, other)


def continue_momentum(energies) -> np.ndarray:
    """Continue k = sqrt(E) along a path of energies by angle accumulation.

    The phase of E is tracked continuously (half-angle rule), so a path
    winding once around E = 0 returns -k(0) instead of jumping at the cut.
    The first value matches the sheet-I momentum of the first energy.
    """
    E = np.asarray(list(energies), dtype=complex)
    if E.size == 0:
        return np.empty(0, dtype=complex)
    if np.any(E == 0):
        raise DomainError("continuation path passes through the branch point E = 0")
    phi = np.empty(E.size, dtype=float)
    phi0 = cmath.phase(complex(E[0]))
    if phi0 < 0.0:
        phi0 += 2.0 * math.pi
    phi[0] = phi0
    if E.size > 1:
        increments = np.angle(E[1:] / E[:-1])
        phi[1:] = phi0 + np.cumsum(increments)
    return np.sqrt(np.abs(E)) * np.exp(0.5j * phi)


# ---------------------------------------------------------------------------
# Reduced (branch-free) series
# ---------------------------------------------------------------------------

def _check_l(l: int) -> int:
    if not isinstance(l, (int, np.integer)) or isinstance(l, bool):
        raise DomainError(f"l must be a non-negative integer, got {l!r}")
    if l < 0 or l > L_MAX:
        raise DomainError(f"l must lie in [0, {L_MAX}], got {l}")
    return int(l)


def _bessel_seed(l: int, r: float) -> float:
    # sqrt(pi)/Gamma(l + 3/2) * (r/2)**(l+1)
    return _SQRT_PI / math.gamma(l + 1.5) * (0.5 * r) ** (l + 1)


def _neumann_seed(l: int, r: float) -> float:
    # -Gamma(l + 1/2)/sqrt(pi) * (r/2)**(-l)
    return -math.gamma(l + 0.5) / _SQRT_PI * (0.5 * r) ** (-l)


def _reduced_series(l: int, E: complex, r: float, tol: float, kind: str):
    """Sum the reduced power series in E; returns (value, d/dr value, terms).

    ``kind`` selects the Bessel ('j') or Neumann ('y') coefficient ladder.
    Terms are generated by their exact ratio recurrence, which avoids any
    Gamma-function overflow.  Truncation: |term| <= tol*|partial sum| for two
    consecutive terms (guards accidental zeros), at least MIN_TERMS terms.
    """
    E = complex(E)
    x = E * (0.5 * r) ** 2
    if kind == "j":
        term = complex(_bessel_seed(l, r))
        power0 = l + 1
    else:
        term = complex(_neumann_seed(l, r))
        power0 = -l
    total = term
    dtotal = term * power0  # accumulates sum of term*(2n + power0); /r at end
    small_streak = 0
    n = 0
    while True:
        if kind == "j":
            ratio = -x / ((n + 1) * (n + l + 1.5))
        else:
            ratio = -x / ((n + 1) * (n - l + 0.5))
        term = term * ratio
        n += 1
        total += term
        dtotal += term * (2 * n + power0)
        if abs(term) <= tol * abs(total):
            small_streak += 1
            if small_streak >= 2 and n + 1 >= MIN_TERMS:
                break
        else:
            small_streak = 0
        if n >= MAX_TERMS:
            raise EvaluationError(
                f"reduced series for {kind} did not converge in {MAX_TERMS} terms",
                l=l, energy=E, r=r, terms_used=n, last_term=abs(term),
            )
    return total, dtotal / r if r != 0.0 else complex(0.0), n + 1


def _series_term_magnitudes(l: int, E: complex, r: float, kind: str,
                            nmax: int = MAX_TERMS) -> list[float]:
    """Term magnitude history of the reduced series (diagnostic helper)."""
    E = complex(E)
    x = E * (0.5 * r) ** 2
    term = complex(_bessel_seed(l, r) if kind == "j" else _neumann_seed(l, r))
    mags = [abs(term)]
    total = term
    for n in range(nmax):
        if kind == "j":
            term = term * (-x / ((n + 1) * (n + l + 1.5)))
        else:
            term = term * (-x / ((n + 1) * (n - l + 0.5)))
        total += term
        mags.append(abs(term))
        if abs(term) <= 1e-300 or abs(term) <= 1e-18 * abs(total):
            break
    return mags


def reduced_bessel(l: int, E: complex, r: float, tol: float = 1e-12) -> complex:
    """Branch-free Ricatti-Bessel value jt_l(E, r) = k**-(l+1) * j_l(k r).

    Evaluated as a power series in E, so the result depends on E only (never
    on the sheet).  r = 0 is allowed and returns the limit 0.
    """
    l = _check_l(l)
    if r < 0:
        raise DomainError(f"r must be non-negative, got {r}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if r == 0.0:
        return 0j
    value, _, _ = _reduced_series(l, E, r, tol, "j")
    return value


def reduced_neumann(l: int, E: complex, r: float, tol: float = 1e-12) -> complex:
    """Branch-free Ricatti-Neumann value yt_l(E, r) = k**l * y_l(k r).

    Diverges like r**-l at the origin, so r > 0 is required for l >= 1
    (l = 0 tends to the finite limit -1).
    """
    l = _check_l(l)
    if r < 0 or (r == 0.0 and l >= 1):
        raise DomainError(f"r must be positive for l >= 1, got r={r}, l={l}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    if r == 0.0:
        return complex(-1.0)
    value, _, _ = _reduced_series(l, E, r, tol, "y")
    return value


# ---------------------------------------------------------------------------
# Closed forms in z = k*r
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RiccatiValues:
    """Ricatti-Bessel family at one argument z = k*r.

    ``dj`` and ``dy`` are derivatives with respect to z; multiply by k for
    radial derivatives.
    """

    j: complex
    y: complex
    h_plus: complex
    h_minus: complex
    dj: complex
    dy: complex


_RESCALE = 1e250


def _riccati_j_miller(l: int, z: complex) -> tuple[complex, complex]:
    """(j_l, j_{l-1}) by downward recurrence, for the regime l > 0.9|z|."""
    pad = 25
    top = l + pad
    fp = 0j            # f_{n+1}
    fc = 1e-30 + 0j    # f_n, arbitrary seed
    saved = {}
    for n in range(top, 0, -1):
        fm = (2 * n + 1) / z * fc - fp
        fp, fc = fc, fm
        if n - 1 == l:
            saved["l"] = fc
        if n - 1 == l - 1:
            saved["lm1"] = fc
        if abs(fc.real) > _RESCALE or abs(fc.imag) > _RESCALE:
            fp *= 1.0 / _RESCALE
            fc *= 1.0 / _RESCALE
            for key in saved:
                saved[key] *= 1.0 / _RESCALE
    # fc is now the unnormalized j_0, fp the unnormalized j_1
    j0 = cmath.sin(z)
    j1 = j0 / z - cmath.cos(z)
    if abs(j0) >= abs(j1):
        scale = j0 / fc
    else:
        scale = j1 / fp
    jl = saved["l"] * scale
    jlm1 = (saved["lm1"] * scale) if l >= 1 else cmath.cos(z)
    return jl, jlm1


def riccati_closed(l: int, k: complex, r: float) -> RiccatiValues:
    """Ricatti-Bessel j_l, y_l and Hankel combinations h± = j ± i y at z = k r.

    Closed-form recurrences: y ascends from y_0 = -cos z (always stable);
    j ascends when l <= 0.9|z| and otherwise uses normalized downward
    recurrence.  Wronskian normalization j y' - y j' = 1 in z.
    """
    l = _check_l(l)
    k = complex(k)
    if k == 0:
        raise DomainError("k = 0: use the reduced functions at threshold")
    if r <= 0:
        raise DomainError(f"r must be positive, got {r}")
    z = k * r
    sin_z = cmath.sin(z)
    cos_z = cmath.cos(z)

    # Neumann ladder: upward recurrence, dominant solution, stable for all l.
    ym1, y0 = sin_z, -cos_z
    yl, ylm1 = y0, ym1
    for n in range(l):
        ym1, y0 = y0, (2 * n + 1) / z * y0 - ym1
        yl, ylm1 = y0, ym1

    if l <= 0.9 * abs(z):
        jm1, j0 = cos_z, sin_z
        jl, jlm1 = j0, jm1
        for n in range(l):
            jm1, j0 = j0, (2 * n + 1) / z * j0 - jm1
            jl, jlm1 = j0, jm1
    else:
        jl, jlm1 = _riccati_j_miller(l, z)

    dj = jlm1 - (l / z) * jl
    dy = ylm1 - (l / z) * yl
    return RiccatiValues(
        j=jl, y=yl, h_plus=jl + 1j * yl, h_minus=jl - 1j * yl, dj=dj, dy=dy,
    )


def _riccati_jy_batch(l: int, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (j_l, y_l) for arguments with |z| > l/0.9 (upward-safe)."""
    z = np.asarray(z, dtype=complex)
    sin_z = np.sin(z)
    cos_z = np.cos(z)
    ym1, y0 = sin_z, -cos_z
    jm1, j0 = cos_z, sin_z
    for n in range(l):
        fac = (2 * n + 1) / z
        ym1, y0 = y0, fac * y0 - ym1
        jm1, j0 = j0, fac * j0 - jm1
    return j0, y0


# ---------------------------------------------------------------------------
# Regime dispatcher
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReducedPair:
    """jt, yt and their radial derivatives at one (l, E, r) point.

    ``regime`` records which evaluation path produced the values; both paths
    agree within tolerance in the overlap zone and the result is always a
    function of E alone (sheet-independent).
    """

    jt: complex
    yt: complex
    djt: complex
    dyt: complex
    terms_used: int
    regime: str


def reduced_pair(l: int, E: complex, r: float, tol: float = 1e-12) -> ReducedPair:
    """Evaluate (jt, yt, d_r jt, d_r yt), selecting series vs closed form.

    The series is used for |k r| <= SWITCH_KR or |E| inside the threshold
    disk; otherwise the closed forms at k = momentum(E, sheet I) are divided
    by the appropriate momentum powers.
    """
    l = _check_l(l)
    E = complex(E)
    if r < 0:
        raise DomainError(f"r must be non-negative, got {r}")
    k = momentum_first_sheet(E)
    if r == 0.0 or abs(k) * r <= SWITCH_KR or abs(E) <= THRESHOLD_DISK:
        if r == 0.0:
            if l >= 1:
                raise DomainError("r = 0 not allowed for l >= 1 (yt diverges)")
            dj0 = complex(_SQRT_PI / math.gamma(1.5) * 0.5)  # = 1
            return ReducedPair(0j, complex(-1.0), dj0, 0j, 1, "series")
        jv, djv, nj = _reduced_series(l, E, r, tol, "j")
        yv, dyv, ny = _reduced_series(l, E, r, tol, "y")
        return ReducedPair(jv, yv, djv, dyv, max(nj, ny), "series")
    vals = riccati_closed(l, k, r)
    kl = k ** l
    klp1 = kl * k
    return ReducedPair(
        jt=vals.j / klp1,
        yt=vals.y * kl,
        djt=vals.dj / kl,
        dyt=vals.dy * klp1,
        terms_used=0,
        regime="closed_form",
    )


def _reduced_jy_batch(l: int, E: np.ndarray, k: np.ndarray, r: float,
                      tol: float) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (jt, yt) over an energy batch at one radius (values only).

    ``k`` must be the precomputed sheet-I momenta of ``E``.  Used by the
    coefficient-ODE right-hand side, where the same energies are evaluated
    at many radii.
    """
    E = np.asarray(E, dtype=complex)
    m = E.size
    jt = np.empty(m, dtype=complex)
    yt = np.empty(m, dtype=complex)
    series = (np.abs(k) * r <= SWITCH_KR) | (np.abs(E) <= THRESHOLD_DISK)
    if r == 0.0:
        series[:] = True
    idx_s = np.nonzero(series)[0]
    idx_c = np.nonzero(~series)[0]

    if idx_s.size:
        if r == 0.0:
            if l >= 1:
                raise DomainError("r = 0 not allowed for l >= 1 (yt diverges)")
            jt[idx_s] = 0.0
            yt[idx_s] = -1.0
        else:
            x = E[idx_s] * (0.5 * r) ** 2
            tj = np.full(idx_s.size, _bessel_seed(l, r), dtype=complex)
            ty = np.full(idx_s.size, _neumann_seed(l, r), dtype=complex)
            sj = tj.copy()
            sy = ty.copy()
            n = 0
            while True:
                tj *= -x / ((n + 1) * (n + l + 1.5))
                ty *= -x / ((n + 1) * (n - l + 0.5))
                n += 1
                sj += tj
                sy += ty
                if n + 1 >= MIN_TERMS:
                    done = (np.abs(tj) <= tol * np.abs(sj)) & \
                           (np.abs(ty) <= tol * np.abs(sy))
                    if bool(np.all(done)):
                        break
                if n >= MAX_TERMS:
                    raise EvaluationError(
                        "batched reduced series did not converge",
                        l=l, r=r, terms_used=n,
                    )
            jt[idx_s] = sj
            yt[idx_s] = sy

    if idx_c.size:
        kc = k[idx_c]
        z = kc * r
        if l <= 9:
            jv, yv = _riccati_jy_batch(l, z)
        else:
            jv = np.empty(idx_c.size, dtype=complex)
            yv = np.empty(idx_c.size, dtype=complex)
            for i, kk in enumerate(kc):
                vals = riccati_closed(l, kk, r)
                jv[i] = vals.j
                yv[i] = vals.y
        kl = kc ** l
        jt[idx_c] = jv / (kl * kc)
        yt[idx_c] = yv * kl
    return jt, yt
