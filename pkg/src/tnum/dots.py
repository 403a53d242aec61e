"""Quantum-dot composite spectra: slab modes along z plus 2D in-plane levels.

The dot potential is an infinite slab 0 < z < d with a radial in-plane
profile v(rho), so every level separates as E(N, n, m) = K(N) + E(n, m) with
K(N) = (pi N / d)^2 the slab mode energy.  In-plane levels come either from
the exact 2D reference solver or from the semiclassical condition with
T = (n + 1/2) + phi |m|.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from . import oracle, semiclassical
from .errors import ConfigError
from .potentials import Problem, RadialPotential, potential_from_config
from .tnumber import SpectrumTable, StateLabel, TParams, effective_t


@dataclass(frozen=True)
class DotSpec:
    """Slab thickness d plus the in-plane radial potential v(rho)."""

    thickness: float
    inplane: RadialPotential

    def __post_init__(self):
        if self.thickness <= 0:
            raise ValueError("dot thickness must be positive")


def dot_spec_from_config(cfg) -> DotSpec:
    """Build a DotSpec from {"d": ..., "inplane": {...}, "R": ...}.

    A top-level "R" fills in the in-plane potential's scale when that config
    omits it.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("dot config must be a mapping")
    if "d" not in cfg:
        raise ConfigError("dot thickness required ('d' missing from config)")
    if "inplane" not in cfg:
        raise ConfigError("dot config needs an 'inplane' potential")
    inner = dict(cfg["inplane"])
    if "R" in cfg and "R" not in inner:
        inner["R"] = cfg["R"]
    return DotSpec(thickness=float(cfg["d"]), inplane=potential_from_config(inner))


def slab_energy(N: int, thickness: float) -> float:
    """K(N) = (pi N / d)^2, the infinite-slab mode energy; slab index starts at 1."""
    if N < 1:
        raise ValueError("slab index starts at 1")
    if thickness <= 0:
        raise ValueError("dot thickness must be positive")
    return (math.pi * N / thickness) ** 2


def dot_t(state: StateLabel, phi: float) -> float:
    """In-plane effective quantum number T = (n + 1/2) + phi |m|.

    The slab index N never enters T: within each fixed N the in-plane
    ordering is the same.
    """
    if state.m is None:
        raise ValueError("dot T needs the in-plane angular number m")
    return effective_t(state, TParams(phi=phi, dimension=2))


def _inplane_energy(spec: DotSpec, n: int, m: int, method: str, phi,
                    config) -> float:
    problem = Problem(spec.inplane, dimension=2)
    if method == "exact":
        return oracle.solve_radial(problem, n, abs(m),
                                   config or oracle.DEFAULT_CONFIG)
    t_val = dot_t(StateLabel(n=n, m=m), phi)
    return semiclassical.solve_energy(problem, t_val)


def _auto_phi(spec: DotSpec) -> float:
    """phi of the in-plane profile, evaluated at the T = 1 energy."""
    problem = Problem(spec.inplane, dimension=2)
    e_ref = semiclassical.solve_energy(problem, 1.0)
    return semiclassical.estimate_phi(problem, e_ref)


def dot_spectrum(spec: DotSpec, N_max: int = 1, n_max: int = 0, m_max: int = 0,
                 method: str = "exact", phi: float | None = None,
                 config=None, e_cut: float | None = None) -> SpectrumTable:
    """Composite spectrum E(N, n, m) = K(N) + E(n, m), sorted by energy.

    With e_cut given, the (N, n, m) box is expanded until every remaining
    state exceeds the cutoff; otherwise the explicit box bounds apply.
    Rows carry m >= 0 only (levels are even in m).
    """
    if method not in ("exact", "semiclassical"):
        raise ValueError("method must be 'exact' or 'semiclassical'")
    if method == "semiclassical" and phi is None:
        phi = _auto_phi(spec)

    cache: dict[tuple[int, int], float] = {}

    def inplane(n, m):
        key = (n, abs(m))
        if key not in cache:
            cache[key] = _inplane_energy(spec, n, abs(m), method, phi, config)
        return cache[key]

    rows = []
    if e_cut is None:
        for N in range(1, N_max + 1):
            for n in range(n_max + 1):
                for m in range(m_max + 1):
                    e = slab_energy(N, spec.thickness) + inplane(n, m)
                    rows.append((StateLabel(n=n, m=m, N=N), e))
    else:
        e0 = inplane(0, 0)
        N = 1
        while slab_energy(N, spec.thickness) + e0 <= e_cut:
            base = slab_energy(N, spec.thickness)
            n = 0
            while base + inplane(n, 0) <= e_cut:
                m = 0
                while base + inplane(n, m) <= e_cut:
                    rows.append((StateLabel(n=n, m=m, N=N), base + inplane(n, m)))
                    m += 1
                n += 1
            N += 1
    provenance = "oracle" if method == "exact" else "semiclassical"
    return SpectrumTable(rows, provenance=provenance).sorted()
