"""Short-range central potentials in scaled units.

Potentials enter the radial equation as printed, u'' + (k^2 - l(l+1)/r^2
- V(r)) u = 0, so V carries the 2*mu/hbar^2 factor; the ``scale`` knob is a
plain multiplier for converting user potentials into that convention.
Admissibility (finite first absolute moment of r*V) holds analytically for
every built-in family and is checked numerically for tabulated input.

``tail_bound`` bounds the (1+r)-weighted absolute tail integral, which
controls both the coefficient-ODE truncation and the Jost extraction error,
and ``choose_cutoff`` grid-searches the smallest working radius.
"""

from __future__ import annotations

import csv
import io
import math
import os
from dataclasses import dataclass, field

import numpy as np

try:
    _trapezoid = np.trapezoid
except AttributeError:  # numpy < 2
    _trapezoid = np.trapz
from scipy.interpolate import CubicSpline
from scipy.special import erfc, exp1

from .errors import ConfigError, CutoffError, DomainError

__all__ = [
    "PotentialSpec",
    "SquareWell",
    "Exponential",
    "Gaussian",
    "Yukawa",
    "Tabulated",
    "evaluate",
    "tail_bound",
    "choose_cutoff",
    "parse_spec",
]


class PotentialSpec:
    """Base class for the potential families.

    Subclasses provide ``_raw(r)`` (unscaled form, vectorized), ``_tail(R)``
    (closed-form or numeric bound on the unscaled (1+r)-weighted tail) and a
    characteristic ``length_scale``.
    """

    kind: str = "abstract"
    scale: float = 1.0

    def evaluate(self, r):
        """V(r) in scaled units; accepts a scalar or an ndarray."""
        if np.isscalar(r) or getattr(r, "ndim", 1) == 0:
            r = float(r)
            if r < 0:
                raise DomainError(f"r must be non-negative, got {r}")
            return self.scale * self._raw_scalar(r)
        r = np.asarray(r, dtype=float)
        if np.any(r < 0):
            raise DomainError("r must be non-negative")
        return self.scale * self._raw(r)

    def tail_bound(self, R: float) -> float:
        """Upper bound on integral_R^inf |V(r)| (1+r) dr."""
        if R <= 0:
            raise DomainError(f"R must be positive, got {R}")
        return abs(self.scale) * self._tail(float(R))

    def breakpoints(self) -> list[float]:
        """Radii where V is discontinuous (integration restarts there)."""
        return []

    @property
    def bounded_at_origin(self) -> bool:
        return True

    def _raw_scalar(self, r: float) -> float:
        return float(self._raw(np.asarray([r]))[0])


@dataclass(frozen=True)
class SquareWell(PotentialSpec):
    """V(r) = -depth for r <= radius, 0 beyond (attractive for depth > 0)."""

    depth: float
    radius: float
    scale: float = 1.0
    kind: str = field(default="square_well", init=False)

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("square well radius must be positive")

    def _raw_scalar(self, r):
        return -self.depth if r <= self.radius else 0.0

    def _raw(self, r):
        return np.where(r <= self.radius, -self.depth, 0.0)

    def _tail(self, R):
        if R >= self.radius:
            return 0.0
        a = self.radius
        return abs(self.depth) * ((a - R) + 0.5 * (a * a - R * R))

    def breakpoints(self):
        return [self.radius]

    @property
    def length_scale(self):
        return self.radius


@dataclass(frozen=True)
class Exponential(PotentialSpec):
    """V(r) = strength * exp(-r / range_)."""

    strength: float
    range_: float
    scale: float = 1.0
    kind: str = field(default="exponential", init=False)

    def __post_init__(self):
        if self.range_ <= 0:
            raise DomainError("exponential range must be positive")

    def _raw_scalar(self, r):
        return self.strength * math.exp(-r / self.range_)

    def _raw(self, r):
        return self.strength * np.exp(-r / self.range_)

    def _tail(self, R):
        rho = self.range_
        return abs(self.strength) * rho * math.exp(-R / rho) * (1.0 + rho + R)

    @property
    def length_scale(self):
        return self.range_


@dataclass(frozen=True)
class Gaussian(PotentialSpec):
    """V(r) = strength * exp(-(r / width)**2)."""

    strength: float
    width: float
    scale: float = 1.0
    kind: str = field(default="gaussian", init=False)

    def __post_init__(self):
        if self.width <= 0:
            raise DomainError("gaussian width must be positive")

    def _raw_scalar(self, r):
        return self.strength * math.exp(-((r / self.width) ** 2))

    def _raw(self, r):
        return self.strength * np.exp(-((r / self.width) ** 2))

    def _tail(self, R):
        w = self.width
        x = R / w
        return abs(self.strength) * (
            0.5 * w * math.sqrt(math.pi) * float(erfc(x))
            + 0.5 * w * w * math.exp(-x * x)
        )

    @property
    def length_scale(self):
        return self.width


@dataclass(frozen=True)
class Yukawa(PotentialSpec):
    """V(r) = strength * exp(-screening * r) / r.

    Singular (but integrable against r dr) at the origin; r = 0 is a domain
    error and integrators must start at r > 0.
    """

    strength: float
    screening: float
    scale: float = 1.0
    kind: str = field(default="yukawa", init=False)

    def __post_init__(self):
        if self.screening <= 0:
            raise DomainError("yukawa screening must be positive")

    def _raw_scalar(self, r):
        if r == 0.0:
            raise DomainError("yukawa potential is singular at r = 0")
        return self.strength * math.exp(-self.screening * r) / r

    def _raw(self, r):
        if np.any(r == 0.0):
            raise DomainError("yukawa potential is singular at r = 0")
        return self.strength * np.exp(-self.screening * r) / r

    def _tail(self, R):
        mu = self.screening
        return abs(self.strength) * (float(exp1(mu * R)) + math.exp(-mu * R) / mu)

    @property
    def bounded_at_origin(self):
        return False

    @property
    def length_scale(self):
        return 1.0 / self.screening


class Tabulated(PotentialSpec):
    """Cubic-spline interpolation of (r, V) samples; zero beyond the table."""

    kind = "tabulated"

    def __init__(self, samples, scale: float = 1.0):
        samples = np.asarray(samples, dtype=float)
        if samples.ndim != 2 or samples.shape[1] != 2 or samples.shape[0] < 4:
            raise ConfigError("tabulated potential needs >= 4 (r, V) rows")
        r, v = samples[:, 0], samples[:, 1]
        if not np.all(np.isfinite(samples)):
            raise ConfigError("tabulated potential contains non-finite values")
        if np.any(np.diff(r) <= 0):
            raise ConfigError("tabulated radii must be strictly increasing")
        if r[0] < 0:
            raise ConfigError("tabulated radii must be non-negative")
        self.samples = samples
        self.scale = float(scale)
        self._r0 = float(r[0])
        self._r1 = float(r[-1])
        self._spline = CubicSpline(r, v)
        # finite first absolute moment over the table (always finite here,
        # the check guards NaN propagation from pathological input)
        moment = _trapezoid(np.abs(v) * r, r)
        if not math.isfinite(float(moment)):
            raise ConfigError("tabulated potential has no finite first moment")

    def _raw_scalar(self, r):
        if r > self._r1:
            return 0.0
        if r < self._r0:
            return float(self._spline(self._r0))
        return float(self._spline(r))

    def _raw(self, r):
        out = np.asarray(self._spline(np.clip(r, self._r0, self._r1)), dtype=float)
        return np.where(r > self._r1, 0.0, out)

    def _tail(self, R):
        if R >= self._r1:
            return 0.0
        grid = np.linspace(R, self._r1, 801)
        vals = np.abs(np.asarray(self._spline(grid))) * (1.0 + grid)
        return float(_trapezoid(vals, grid))

    @property
    def length_scale(self):
        return self._r1

    def __repr__(self):
        return (f"Tabulated({self.samples.shape[0]} rows, "
                f"r in [{self._r0}, {self._r1}], scale={self.scale})")


def evaluate(spec: PotentialSpec, r):
    """V(r) in the scaled convention (module-level convenience wrapper)."""
    return spec.evaluate(r)


def tail_bound(spec: PotentialSpec, R: float) -> float:
    """Upper bound on integral_R^inf |V| (1+r) dr."""
    return spec.tail_bound(R)


def choose_cutoff(spec: PotentialSpec, tol: float, *, r_min: float = 0.5,
                  step: float = 0.25, r_max: float = 200.0) -> float:
    """Smallest grid radius R with tail_bound(R) <= tol.

    Candidates are r_min, r_min + step, ... up to r_max; exceeding r_max
    raises CutoffError (the potential is not short-range enough at tol).
    """
    if tol <= 0:
        raise DomainError("tol must be positive")
    n = int(math.floor((r_max - r_min) / step)) + 1
    for i in range(n):
        R = r_min + i * step
        if spec.tail_bound(R) <= tol:
            return R
    raise CutoffError(
        f"tail_bound stays above {tol:g} out to R = {r_max:g} for {spec.kind}"
    )


# ---------------------------------------------------------------------------
# Configuration parsing
# ---------------------------------------------------------------------------

_KIND_KEYS = {
    "square_well": {"depth", "radius"},
    "exponential": {"strength", "range"},
    "gaussian": {"strength", "width"},
    "yukawa": {"strength", "screening"},
    "tabulated": {"file"},
}
_ALL_KEYS = {"kind", "scale"} | set().union(*_KIND_KEYS.values())


def _load_table(path: str) -> np.ndarray:
    try:
        with open(path, "r", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read table file {path!r}: {exc}") from exc
    rows = []
    reader = csv.reader(io.StringIO(text))
    for idx, row in enumerate(reader):
        row = [c.strip() for c in row if c.strip() != ""]
        if not row:
            continue
        try:
            values = [float(c) for c in row]
        except ValueError:
            if idx == 0:
                continue  # header row
            raise ConfigError(f"non-numeric table row {idx + 1} in {path!r}")
        if len(values) != 2:
            raise ConfigError(f"table row {idx + 1} in {path!r} needs 2 columns")
        rows.append(values)
    if len(rows) < 4:
        raise ConfigError(f"table {path!r} needs >= 4 data rows")
    return np.asarray(rows, dtype=float)


def parse_spec(text: str, base_dir: str | None = None) -> PotentialSpec:
    """Parse a line-oriented ``key=value`` potential configuration.

    Keys: kind, depth, radius, strength, range, width, screening, scale,
    file.  Blank lines and ``#`` comments are allowed.  Table file paths are
    resolved relative to ``base_dir``.
    """
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError("expected key=value", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"unknown key: {key}", line=lineno)
        if key in entries:
            raise ConfigError(f"duplicate key: {key}", line=lineno)
        entries[key] = (value, lineno)

    if "kind" not in entries:
        raise ConfigError("missing key: kind")
    kind = entries.pop("kind")[0]
    if kind not in _KIND_KEYS:
        raise ConfigError(f"unknown kind: {kind}")

    def number(key: str) -> float:
        value, lineno = entries[key]
        try:
            return float(value)
        except ValueError:
            raise ConfigError(f"non-numeric value for {key}: {value!r}",
                              line=lineno) from None

    scale = number("scale") if "scale" in entries else 1.0
    entries.pop("scale", None)

    required = _KIND_KEYS[kind]
    for key in required:
        if key not in entries:
            raise ConfigError(f"missing key: {key}")
    for key in entries:
        if key not in required:
            raise ConfigError(f"key {key!r} not valid for kind {kind!r}",
                              line=entries[key][1])

    if kind == "square_well":
        return SquareWell(depth=number("depth"), radius=number("radius"),
                          scale=scale)
    if kind == "exponential":
        return Exponential(strength=number("strength"), range_=number("range"),
                           scale=scale)
    if kind == "gaussian":
        return Gaussian(strength=number("strength"), width=number("width"),
                        scale=scale)
    if kind == "yukawa":
        return Yukawa(strength=number("strength"), screening=number("screening"),
                      scale=scale)
    path = entries["file"][0]
    if base_dir is not None and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return Tabulated(_load_table(path), scale=scale)
