"""Radial potential models and the volume-preserving ellipsoidal deformation.

All energies are in hbar = 2m = 1 units, so the radial equation reads
-u'' + V_eff u = E u and energies carry units of 1/length^2.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import ConfigError

# Sentinel for an impenetrable wall.  Solvers recognize the wall through
# wall_radius and never integrate past it, so no huge finite float enters
# any quadrature.
IMPENETRABLE = math.inf


class RadialPotential:
    """Base class: a pure function V(r) plus the metadata solvers query."""

    kind = "radial"

    def __call__(self, r):
        raise NotImplementedError

    @property
    def scale(self) -> float:
        """Characteristic length of the profile."""
        raise NotImplementedError

    @property
    def floor(self) -> float:
        """Infimum of V over r > 0 (may be -inf)."""
        raise NotImplementedError

    @property
    def wall_radius(self):
        """Radius of an impenetrable wall, or None."""
        return None

    def to_config(self) -> dict:
        raise NotImplementedError

    @staticmethod
    def _check_r(r):
        arr = np.asarray(r, dtype=float)
        if np.any(arr < 0):
            raise ValueError("radius must be non-negative")
        return arr


class PowerLaw(RadialPotential):
    """V(r) = coeff * (r/R)^beta.

    beta > 0 with coeff > 0 is a confining profile, beta in (-2, 0) with
    coeff < 0 an attractive well (beta = -1, coeff = -1, R = 1 is the
    Coulomb potential -1/r).  beta = 0 and beta = -2 are rejected: the
    virial and scaling relations divide by beta and beta + 2.
    """

    kind = "power_law"

    def __init__(self, beta: float, coeff: float, R: float = 1.0):
        if beta == 0:
            raise ValueError("beta = 0 is rejected (virial/scaling degenerate)")
        if beta == -2:
            raise ValueError("beta = -2 is rejected (virial relation singular)")
        if beta <= -2:
            raise ValueError("beta <= -2 is not integrable at the origin")
        if beta > 0 and coeff <= 0:
            raise ValueError("confining power law (beta > 0) requires coeff > 0")
        if beta < 0 and coeff >= 0:
            raise ValueError("attractive power law (beta < 0) requires coeff < 0")
        if R <= 0:
            raise ValueError("scale R must be positive")
        self.beta = float(beta)
        self.coeff = float(coeff)
        self.R = float(R)

    def __call__(self, r):
        arr = self._check_r(r)
        with np.errstate(divide="ignore"):
            out = self.coeff * (arr / self.R) ** self.beta
        if np.isscalar(r) or arr.ndim == 0:
            return float(out)
        return out

    @property
    def scale(self) -> float:
        return self.R

    @property
    def floor(self) -> float:
        return 0.0 if self.beta > 0 else -math.inf

    def to_config(self) -> dict:
        return {"type": "power_law", "beta": self.beta, "coeff": self.coeff, "R": self.R}

    def __repr__(self):
        return f"PowerLaw(beta={self.beta}, coeff={self.coeff}, R={self.R})"


class HardWallCavity(RadialPotential):
    """Empty cavity: V = 0 for r < R, impenetrable for r >= R."""

    kind = "hard_wall"

    def __init__(self, R: float = 1.0):
        if R <= 0:
            raise ValueError("wall radius must be positive")
        self.R = float(R)

    def __call__(self, r):
        arr = self._check_r(r)
        out = np.where(arr < self.R, 0.0, IMPENETRABLE)
        if np.isscalar(r) or arr.ndim == 0:
            return float(out)
        return out

    @property
    def scale(self) -> float:
        return self.R

    @property
    def floor(self) -> float:
        return 0.0

    @property
    def wall_radius(self) -> float:
        return self.R

    def to_config(self) -> dict:
        return {"type": "hard_wall", "R": self.R}

    def __repr__(self):
        return f"HardWallCavity(R={self.R})"


class TabulatedPotential(RadialPotential):
    """Monotone-cubic interpolant through (r, V) samples.

    PCHIP interpolation cannot overshoot the data, so a single-well table
    stays a single well and turning-point search sees no spurious extrema.
    Evaluation outside the sampled range is a range error.
    """

    kind = "tabulated"

    def __init__(self, samples):
        pts = np.asarray(samples, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise ValueError("need at least 4 (r, V) samples")
        r = pts[:, 0]
        if r[0] < 0:
            raise ValueError("first abscissa must be >= 0")
        if np.any(np.diff(r) <= 0):
            raise ValueError("sample abscissae must be strictly increasing")
        self.samples = pts
        self._interp = PchipInterpolator(pts[:, 0], pts[:, 1], extrapolate=False)

    def __call__(self, r):
        arr = self._check_r(r)
        r0, r1 = self.samples[0, 0], self.samples[-1, 0]
        if np.any(arr < r0) or np.any(arr > r1):
            raise ValueError(f"radius outside tabulated range [{r0}, {r1}]")
        out = self._interp(arr)
        if np.isscalar(r) or arr.ndim == 0:
            return float(out)
        return out

    @property
    def domain(self):
        return float(self.samples[0, 0]), float(self.samples[-1, 0])

    @property
    def scale(self) -> float:
        return float(self.samples[-1, 0] - self.samples[0, 0])

    @property
    def floor(self) -> float:
        # PCHIP takes its extrema at the knots
        return float(np.min(self.samples[:, 1]))

    def piecewise(self) -> PchipInterpolator:
        return self._interp

    def to_config(self) -> dict:
        return {"type": "tabulated", "samples": [[float(a), float(b)] for a, b in self.samples]}

    def __repr__(self):
        return f"TabulatedPotential({len(self.samples)} samples on [{self.samples[0, 0]}, {self.samples[-1, 0]}])"


@dataclass(frozen=True)
class Problem:
    """A potential plus the spatial dimension (2 or 3); units hbar = 2m = 1."""

    potential: RadialPotential
    dimension: int = 3

    def __post_init__(self):
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")


@dataclass(frozen=True)
class DeformationSpec:
    """Volume-preserving ellipsoidal stretch of a spherical profile.

    Semi-axes a = R (1 - alpha/3) in-plane and c = R (1 + 2 alpha/3) along z,
    so a^2 c = R^3 up to O(alpha^2).  The first-order formulas are only
    trustworthy for small ellipticity, enforced by max_alpha.
    """

    alpha: float
    R: float = 1.0
    max_alpha: float = 0.2

    def __post_init__(self):
        if self.R <= 0:
            raise ValueError("reference radius must be positive")
        if abs(self.alpha) > self.max_alpha:
            raise ValueError(f"|alpha| = {abs(self.alpha)} exceeds guard {self.max_alpha}")

    @property
    def a(self) -> float:
        return self.R * (1.0 - self.alpha / 3.0)

    @property
    def c(self) -> float:
        return self.R * (1.0 + 2.0 * self.alpha / 3.0)


def deformed_evaluate(potential: RadialPotential, spec: DeformationSpec, x, y, z):
    """Evaluate the ellipsoidally deformed potential at a Cartesian point.

    The spherical profile V(r) is read as a function of r^2/R^2; the deformed
    value is V at the effective radius R * sqrt((x^2+y^2)/a^2 + z^2/c^2).
    With alpha = 0 this is exactly V(sqrt(x^2+y^2+z^2)).
    """
    s = (x * x + y * y) / spec.a ** 2 + z * z / spec.c ** 2
    return potential(spec.R * math.sqrt(s))


def tabulated_from_csv(path) -> TabulatedPotential:
    """Load (r, V) samples from a two-column CSV; a header row is optional."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.reader(fh):
            if not rec or not rec[0].strip():
                continue
            try:
                rows.append((float(rec[0]), float(rec[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ConfigError(f"malformed sample row {rec!r} in {path}")
                # else: header row, skip
    if not rows:
        raise ConfigError(f"no samples found in {path}")
    return TabulatedPotential(rows)


def potential_from_config(cfg) -> RadialPotential:
    """Build a potential from a JSON-compatible mapping.

    Recognized forms:
      {"type": "power_law", "beta": ..., "coeff": ..., "R": ...}
      {"type": "hard_wall", "R": ...}
      {"type": "tabulated", "samples": [[r, V], ...]}
      {"type": "tabulated", "csv": "samples.csv"}
    """
    if not isinstance(cfg, dict):
        raise ConfigError("potential config must be a mapping")
    kind = cfg.get("type")
    try:
        if kind == "power_law":
            return PowerLaw(beta=cfg["beta"], coeff=cfg["coeff"], R=cfg.get("R", 1.0))
        if kind == "hard_wall":
            return HardWallCavity(R=cfg.get("R", 1.0))
        if kind == "tabulated":
            if "samples" in cfg:
                return TabulatedPotential(cfg["samples"])
            if "csv" in cfg:
                return tabulated_from_csv(cfg["csv"])
            raise ConfigError("tabulated potential needs 'samples' or 'csv'")
    except KeyError as exc:
        raise ConfigError(f"potential config missing field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown potential type {kind!r}")


def load_potential(path) -> RadialPotential:
    """Load a potential from a JSON config file, or a CSV of tabulated samples."""
    p = Path(path)
    if p.suffix.lower() == ".csv":
        return tabulated_from_csv(p)
    try:
        cfg = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return potential_from_config(cfg)
