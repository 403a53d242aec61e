"""Modified semiclassical condition: action integral, its inversion, and phi.

In hbar = 2m = 1 units the action is

    Phi(E) = (1/pi) * integral sqrt(E - V(r)) dr

taken over the classically allowed region of V alone (no centrifugal term).
Bound-state energies follow from Phi(E) = T with T the effective quantum
number.  The angular weight phi can be estimated from the potential itself:

    phi^2 = [integral sqrt(E - V) dr]^3 / (2 pi^2 integral r^2 (E - V)^(3/2) dr)

(the mass factors of the raw formula cancel in the ratio).  Both integrands
vanish like sqrt(distance) at turning points; every piece is integrated
after a substitution that absorbs the endpoint singularity, which restores
spectral convergence of the adaptive quadrature.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.optimize import brentq

from .errors import EnergyBracketError, NoClassicalMotion, UnsupportedPotential
from .potentials import HardWallCavity, PowerLaw, Problem, TabulatedPotential

QUAD_RTOL = 1e-12        # relative tolerance passed to the quadrature
SOLVE_RESIDUAL = 1e-9    # default |Phi(E) - T| guarantee of solve_energy

# endpoint kinds for an allowed interval
_TURNING = "turning"     # V(r) = E, sqrt singularity
_CENTER = "center"       # r = 0 end (regular, or integrable-singular V)
_EDGE = "edge"           # wall or tabulated-domain edge, integrand smooth


@dataclass(frozen=True)
class ActionResult:
    phi_of_e: float
    r_in: float
    r_out: float

    @property
    def turning_points(self):
        return (self.r_in, self.r_out)


def _power_law_turning(pot: PowerLaw, energy: float) -> float:
    # V(r) = E  =>  r = R (E/coeff)^(1/beta); valid for both signs of beta
    return pot.R * (energy / pot.coeff) ** (1.0 / pot.beta)


def _intervals_with_kinds(problem: Problem, energy: float):
    """Classically allowed intervals of V (no centrifugal term) at this energy.

    Returns a list of (a, b, kind_a, kind_b).  Raises NoClassicalMotion when
    the allowed set is empty, UnsupportedPotential when it is unbounded or
    leaves a tabulated domain.
    """
    pot = problem.potential

    if isinstance(pot, HardWallCavity):
        if energy <= 0:
            raise NoClassicalMotion(f"no classical motion at E = {energy}")
        return [(0.0, pot.R, _CENTER, _EDGE)]

    if isinstance(pot, PowerLaw):
        if pot.beta > 0:
            if energy <= 0:
                raise NoClassicalMotion(f"no classical motion at E = {energy}")
            return [(0.0, _power_law_turning(pot, energy), _CENTER, _TURNING)]
        # attractive branch: bound regime requires E < 0
        if energy >= 0:
            raise NoClassicalMotion(
                f"E = {energy} is not in the bound regime of an attractive power law"
            )
        return [(0.0, _power_law_turning(pot, energy), _CENTER, _TURNING)]

    if isinstance(pot, TabulatedPotential):
        return _tabulated_intervals(pot, energy)

    raise UnsupportedPotential(f"unsupported potential {pot!r}")


def _tabulated_intervals(pot: TabulatedPotential, energy: float):
    r0, r1 = pot.domain
    roots = np.sort(pot.piecewise().solve(energy, extrapolate=False))
    edges = np.concatenate([[r0], roots, [r1]])
    out = []
    for a, b in zip(edges[:-1], edges[1:]):
        if b - a <= 0:
            continue
        mid = 0.5 * (a + b)
        if pot(mid) >= energy:
            continue
        kind_a = _TURNING if a in roots else (_CENTER if a == 0.0 else _EDGE)
        kind_b = _TURNING if b in roots else _EDGE
        if kind_b == _EDGE:
            raise UnsupportedPotential(
                f"allowed region reaches the tabulated boundary r = {b}; "
                "the outer turning point is outside the data"
            )
        out.append((float(a), float(b), kind_a, kind_b))
    if not out:
        raise NoClassicalMotion(f"no classical motion at E = {energy}")
    return out


def turning_points(problem: Problem, energy: float):
    """Infimum and supremum of the classically allowed region {V < E}."""
    iv = _intervals_with_kinds(problem, energy)
    return (iv[0][0], iv[-1][1])


def _endpoint_exponent(pot, kind: str, at_origin: bool) -> float:
    """Substitution exponent kappa: r = endpoint +/- t^kappa."""
    if kind == _TURNING:
        return 2.0
    if at_origin and isinstance(pot, PowerLaw) and pot.beta < 0:
        # integrand ~ r^(beta/2) at the origin; kappa = 2/(beta+2) makes the
        # transformed integrand bounded (kappa = 2 for the Coulomb case)
        return 2.0 / (pot.beta + 2.0)
    return 1.0


def _quad_interval(f, a, b, ka, kb, rtol, knots=()):
    """Adaptive quadrature of f on [a, b] with endpoint substitutions.

    Each half [a, mid], [mid, b] is mapped by r = a + t^ka (resp. b - t^kb),
    which turns the sqrt-type endpoint behavior into a smooth integrand.
    Interior knots (curvature breaks of tabulated potentials) are passed to
    the integrator as subdivision hints; QUADPACK's roundoff-plateau warning
    is expected at tight tolerances on piecewise data and is suppressed.
    """
    mid = 0.5 * (a + b)
    total = 0.0
    for (lo, hi, kappa, sign, anchor) in (
        (a, mid, ka, +1.0, a),
        (mid, b, kb, -1.0, b),
    ):
        width = hi - lo
        if width <= 0:
            continue
        tmax = width ** (1.0 / kappa)

        def g(t, _k=kappa, _s=sign, _r0=anchor):
            return f(_r0 + _s * t ** _k) * _k * t ** (_k - 1.0)

        pts = sorted(abs(k - anchor) ** (1.0 / kappa)
                     for k in knots if lo < k < hi)
        if not pts or len(pts) > 40:
            # dense tables are effectively smooth; hints only pay off for
            # coarse ones (and QUADPACK rejects more break points than limit)
            pts = None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", IntegrationWarning)
            val, _ = quad(g, 0.0, tmax, epsabs=0.0, epsrel=rtol, limit=200,
                          points=pts)
        total += val
    return total


def _sqrt_integrals(problem: Problem, energy: float, power: float, weight, rtol):
    """Sum over allowed intervals of integral weight(r) * (E - V)^power dr."""
    pot = problem.potential
    knots = tuple(pot.samples[:, 0]) if isinstance(pot, TabulatedPotential) else ()
    total = 0.0
    iv = _intervals_with_kinds(problem, energy)
    for (a, b, kind_a, kind_b) in iv:
        ka = _endpoint_exponent(pot, kind_a, at_origin=(a == 0.0))
        kb = _endpoint_exponent(pot, kind_b, at_origin=False)

        def f(r):
            return weight(r) * max(energy - pot(r), 0.0) ** power

        total += _quad_interval(f, a, b, ka, kb, rtol, knots=knots)
    return total, iv


def action(problem: Problem, energy: float, rtol: float = QUAD_RTOL) -> ActionResult:
    """Action Phi(E) = (1/pi) * integral sqrt(E - V) over the allowed region."""
    val, iv = _sqrt_integrals(problem, energy, 0.5, lambda r: 1.0, rtol)
    return ActionResult(phi_of_e=val / math.pi, r_in=iv[0][0], r_out=iv[-1][1])


def estimate_phi(problem: Problem, energy: float, weight: str = "r2",
                 rtol: float = QUAD_RTOL) -> float:
    """Angular weight phi from the potential at the given energy.

    weight="r2" uses the literal r^2 measure in the denominator for any
    dimension.  weight="dim" switches to r^(D-1), an exploratory variant for
    D = 2; note that choice makes phi scale-dependent, since only the r^2
    measure renders the ratio dimensionless.
    """
    if weight not in ("r2", "dim"):
        raise ValueError("weight must be 'r2' or 'dim'")
    if weight == "dim" and problem.dimension == 2:
        wfun = lambda r: r
    else:
        wfun = lambda r: r * r
    i1, _ = _sqrt_integrals(problem, energy, 0.5, lambda r: 1.0, rtol)
    i2, _ = _sqrt_integrals(problem, energy, 1.5, wfun, rtol)
    return math.sqrt(i1 ** 3 / (2.0 * math.pi ** 2 * i2))


def _energy_window(problem: Problem):
    """Open interval of admissible bound-state energies (lo, hi)."""
    pot = problem.potential
    if isinstance(pot, PowerLaw) and pot.beta < 0:
        return (-math.inf, 0.0)
    if isinstance(pot, TabulatedPotential):
        hi = float(pot(pot.domain[1]))
        return (pot.floor, hi)
    return (pot.floor, math.inf)


def solve_energy(problem: Problem, t_value: float,
                 residual: float = SOLVE_RESIDUAL,
                 rtol: float = QUAD_RTOL) -> float:
    """Invert Phi(E) = T for the bound-state energy.

    Phi is strictly increasing on the admissible window, so the root is
    bracketed by geometric expansion from a hard-wall-style initial guess
    and then polished with Brent's method until |Phi(E) - T| <= residual.
    """
    if t_value <= 0:
        raise ValueError("T must be positive")
    pot = problem.potential
    lo, hi = _energy_window(problem)

    def phi_of(e):
        return action(problem, e, rtol=rtol).phi_of_e

    if isinstance(pot, PowerLaw) and pot.beta < 0:
        # Coulomb-style guess E = -gamma^2/(4 T^2), gamma = |coeff| R
        gamma = abs(pot.coeff) * pot.R
        e_hi = -(gamma ** 2) / (4.0 * t_value ** 2)
        for _ in range(200):
            if phi_of(e_hi) >= t_value:
                break
            e_hi /= 4.0
        else:
            raise EnergyBracketError(f"could not bracket T = {t_value} from above")
        e_lo = e_hi * 4.0
        for _ in range(200):
            if phi_of(e_lo) <= t_value:
                break
            e_lo *= 4.0
        else:
            raise EnergyBracketError(f"could not bracket T = {t_value} from below")
    else:
        span = pot.wall_radius or pot.scale
        guess = lo + (math.pi * t_value / span) ** 2
        e_hi = min(guess, hi - abs(hi) * 1e-12) if math.isfinite(hi) else guess
        for _ in range(200):
            if phi_of(e_hi) >= t_value:
                break
            nxt = lo + (e_hi - lo) * 4.0
            if math.isfinite(hi) and nxt >= hi:
                e_hi = hi - (hi - lo) * 1e-12
                if phi_of(e_hi) >= t_value:
                    break
                raise EnergyBracketError(
                    f"T = {t_value} unreachable: the tabulated well only supports "
                    f"Phi up to {phi_of(e_hi):.6g} below its boundary"
                )
            e_hi = nxt
        else:
            raise EnergyBracketError(f"could not bracket T = {t_value} from above")
        e_lo = lo + (e_hi - lo) / 4.0
        for _ in range(200):
            if phi_of(e_lo) <= t_value:
                break
            e_lo = lo + (e_lo - lo) / 4.0
        else:
            raise EnergyBracketError(f"could not bracket T = {t_value} from below")

    root = brentq(lambda e: phi_of(e) - t_value, e_lo, e_hi,
                  xtol=1e-15 * max(1.0, abs(e_lo)), rtol=1e-15)
    res = abs(phi_of(root) - t_value)
    if res > residual:
        raise EnergyBracketError(
            f"solve_energy residual {res:.3e} exceeds {residual:.1e} at T = {t_value}"
        )
    return float(root)
