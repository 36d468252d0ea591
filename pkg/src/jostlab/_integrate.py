"""Embedded Cash-Karp 5(4) integrator for complex states.

Drives first-order systems dy/dr = f(r, y) with y a complex ndarray of
shape (d,) or (d, m); a batch dimension m integrates the same system at m
parameter values with one shared adaptive step sequence (error-controlled
over the whole batch).  Steps land exactly on requested sample radii, so
recorded nodes carry full integration accuracy rather than interpolation
accuracy.  Deterministic: identical inputs produce identical step
sequences and results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import StiffnessError

# Cash-Karp 5(4) tableau.
_C = (0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0)
_A = (
    (),
    (1.0 / 5.0,),
    (3.0 / 40.0, 9.0 / 40.0),
    (3.0 / 10.0, -9.0 / 10.0, 6.0 / 5.0),
    (-11.0 / 54.0, 5.0 / 2.0, -70.0 / 27.0, 35.0 / 27.0),
    (1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0,
     44275.0 / 110592.0, 253.0 / 4096.0),
)
_B5 = (37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0)
# b5 - b4: local truncation error estimate weights
_E = (-277.0 / 64512.0, 0.0, 6925.0 / 370944.0, -6925.0 / 202752.0,
      -277.0 / 14336.0, 277.0 / 7084.0)

ORDER = 5

_SAFETY = 0.9
_MAX_GROW = 5.0
_MIN_SHRINK = 0.2
# PI step controller exponents (integral / proportional)
_K_I = 0.22
_K_P = 0.08


@dataclass
class IntegrationResult:
    """Accepted nodes plus accumulated diagnostics of one integration."""

    rs: list
    ys: list
    est_error: np.ndarray  # per batch member, summed local error estimates
    nfev: int
    n_accepted: int
    n_rejected: int

    @property
    def final(self):
        return self.ys[-1]


def _stages(rhs, r, y, h):
    k0 = rhs(r, y)
    k1 = rhs(r + _C[1] * h, y + h * (_A[1][0] * k0))
    k2 = rhs(r + _C[2] * h, y + h * (_A[2][0] * k0 + _A[2][1] * k1))
    k3 = rhs(r + _C[3] * h, y + h * (_A[3][0] * k0 + _A[3][1] * k1
                                     + _A[3][2] * k2))
    k4 = rhs(r + _C[4] * h, y + h * (_A[4][0] * k0 + _A[4][1] * k1
                                     + _A[4][2] * k2 + _A[4][3] * k3))
    k5 = rhs(r + _C[5] * h, y + h * (_A[5][0] * k0 + _A[5][1] * k1
                                     + _A[5][2] * k2 + _A[5][3] * k3
                                     + _A[5][4] * k4))
    y_new = y + h * (_B5[0] * k0 + _B5[2] * k2 + _B5[3] * k3 + _B5[5] * k5)
    err = h * (_E[0] * k0 + _E[2] * k2 + _E[3] * k3 + _E[4] * k4 + _E[5] * k5)
    return y_new, err


def integrate_adaptive(rhs, r0: float, r1: float, y0: np.ndarray, tol: float,
                       r_eval=(), record_all: bool = True,
                       max_steps: int = 2_000_000) -> IntegrationResult:
    """Integrate from r0 to r1 (r1 > r0) with local error per step <= tol.

    ``r_eval`` radii become exact step endpoints and are always recorded;
    with ``record_all`` every accepted step is recorded as well.  Raises
    StiffnessError if the step size underflows.
    """
    y = np.array(y0, dtype=complex)
    batched = y.ndim == 2
    span = r1 - r0
    if span <= 0:
        raise ValueError("integration span must be positive")

    targets = sorted({float(t) for t in r_eval} | {float(r1)})
    for t in targets:
        if t <= r0 - 1e-15 * span or t > r1 + 1e-15 * span:
            raise ValueError(f"r_eval point {t} outside ({r0}, {r1}]")
    target_set = set(targets)

    m = y.shape[1] if batched else 1
    est = np.zeros(m)
    rs = [r0]
    ys = [y.copy()]
    nfev = 0
    n_acc = 0
    n_rej = 0

    atol = tol
    rtol = tol
    h = min(span * 1e-2, targets[0] - r0 if targets[0] > r0 else span * 1e-2)
    h = max(h, span * 1e-10)
    h_min = max(span * 1e-14, 1e-300)
    err_prev = 1.0

    r = r0
    ti = 0
    while targets[ti] <= r0 + 1e-15 * span:
        ti += 1  # defensive; targets start above r0

    for _ in range(max_steps):
        if ti >= len(targets):
            break
        landing = False
        remaining = targets[ti] - r
        if h >= remaining * (1.0 - 1e-12):
            h = remaining
            landing = True
        y_new, err = _stages(rhs, r, y, h)
        nfev += 6
        finite = bool(np.all(np.isfinite(y_new.view(float))))
        if finite:
            scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
            ratio = float(np.max(np.abs(err) / scale))
        else:
            ratio = np.inf
        if ratio <= 1.0:
            r = targets[ti] if landing else r + h
            y = y_new
            if batched:
                est += np.max(np.abs(err), axis=0)
            else:
                est += float(np.max(np.abs(err)))
            n_acc += 1
            if record_all or (landing and r in target_set):
                rs.append(r)
                ys.append(y.copy())
            if landing:
                ti += 1
            if ratio == 0.0:
                factor = _MAX_GROW
            else:
                factor = _SAFETY * ratio ** (-_K_I) * err_prev ** _K_P
                factor = min(_MAX_GROW, max(_MIN_SHRINK, factor))
            err_prev = max(ratio, 1e-4)
            h = h * factor
        else:
            n_rej += 1
            if not finite:
                h *= 0.25
            else:
                h *= max(0.1, _SAFETY * ratio ** (-1.0 / ORDER))
            err_prev = 1.0
        if h < h_min:
            raise StiffnessError(
                f"step size underflow at r = {r:.6g}", r=r)
    else:
        raise StiffnessError(f"step budget exhausted at r = {r:.6g}", r=r)

    return IntegrationResult(rs=rs, ys=ys, est_error=est, nfev=nfev,
                             n_accepted=n_acc, n_rejected=n_rej)


def integrate_fixed(rhs, r0: float, r1: float, y0: np.ndarray,
                    n_steps: int) -> np.ndarray:
    """Fixed-step Cash-Karp propagation (order studies); returns the final state."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    y = np.array(y0, dtype=complex)
    h = (r1 - r0) / n_steps
    r = r0
    for i in range(n_steps):
        y, _ = _stages(rhs, r, y, h)
        r = r0 + (i + 1) * h
    return y
