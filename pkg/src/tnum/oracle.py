"""Exact numerical reference: radial eigensolver and validation oracles.

The radial equation -u'' + [V(r) + c/r^2] u = E u (c = l(l+1) in 3D,
m^2 - 1/4 in 2D through the u = sqrt(rho) psi reduction) is solved on a
log-radial grid.  With r = e^x and u = e^{x/2} w the equation becomes

    w'' = [ s^2 + e^{2x} (V - E) ] w,    s = l + 1/2 (3D),  |m| (2D),

which removes the coordinate singularity at the origin entirely (in 2D the
attractive -1/(4 rho^2) term of the m = 0 channel cancels exactly) and
resolves Coulomb-type problems whose turning points sit hundreds of length
units out.  Numerov integration runs outward from a small-r series start and
inward from the outer boundary (the wall radius, or a radius padded until
the WKB tail estimate is negligible); eigenvalues are isolated by node
counting plus bisection and polished by Brent iteration on the Wronskian
mismatch of the two sweeps at the outermost classical turning point.  A
step-halving consistency check refines the grid until the Richardson error
estimate meets the configured tolerance.

The module also carries the deformed-oscillator shift oracle (closed-form
separable spectrum plus exact basis-change weights) and the Kendall-tau
ordering metric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite import hermgauss
from numpy.polynomial.laguerre import laggauss
from scipy.optimize import brentq
from scipy.special import eval_genlaguerre, eval_hermite, gammaln, lpmv
from scipy.stats import kendalltau

from .errors import ConvergenceError, EnergyBracketError, UnsupportedPotential
from .potentials import HardWallCavity, PowerLaw, Problem, TabulatedPotential
from .tnumber import ALPHA_GUARD, SpectrumTable, StateLabel

try:
    from numba import njit as _njit

    def _jit(fn):
        return _njit(cache=True)(fn)
except ImportError:  # pragma: no cover - numba is an optional accelerator
    def _jit(fn):
        return fn

_TAIL_ACTION = 30.0  # integrated decay exponent: e^-30 < 1e-13 tail leakage


@dataclass(frozen=True)
class SolverConfig:
    """Grid and iteration controls for the radial solver.

    h is the radial step at the characteristic length of the potential (the
    grid is log-spaced with pitch dx = h / scale, so the local spacing at
    radius r is r * dx).  r_min / r_max override the automatic span.  tol is
    the relative eigenvalue tolerance enforced by the step-refinement check.
    """

    h: float = 1e-3
    r_min: float = 0.0        # 0 means auto (1e-6 of the characteristic length,
                              # 1e-3 for the centrifugal-free 2D m = 0 channel)
    r_max: float = 0.0        # 0 means auto (wall radius, or WKB tail padding)
    tol: float = 1e-10
    max_iter: int = 80
    refine: bool = True


DEFAULT_CONFIG = SolverConfig()


@_jit
def _numerov_sweep(g, dx, w0, w1, out):
    """Propagate w'' = g w with the Numerov scheme; returns the Sturm node count.

    The count includes the final grid pair, so as a function of energy it
    jumps exactly at the eigenvalues of the outer-Dirichlet problem (the
    standard shooting count used for bracketing).  The solution is written
    into `out`; whenever it threatens to overflow the stored prefix is
    rescaled (only ratios, signs and node counts are used).
    """
    n = g.shape[0]
    c = dx * dx / 12.0
    out[0] = w0
    out[1] = w1
    fm = 1.0 - c * g[0]
    fc = 1.0 - c * g[1]
    nodes = 0
    for i in range(2, n):
        fp = 1.0 - c * g[i]
        wp = ((12.0 - 10.0 * fc) * out[i - 1] - fm * out[i - 2]) / fp
        out[i] = wp
        if wp != 0.0 and (wp < 0.0) != (out[i - 1] < 0.0):
            nodes += 1
        if wp > 1e250 or wp < -1e250:
            for j in range(i + 1):
                out[j] *= 1e-250
        fm = fc
        fc = fp
    return nodes


class _Grid:
    """Precomputed log-radial grid for one (potential, angular channel)."""

    __slots__ = ("x", "r", "r2", "v", "dx", "s2", "p", "gamma", "sing_coef",
                 "sing_pow", "v0", "n")

    def __init__(self, problem: Problem, lm: int, r_lo: float, r_hi: float, dx: float):
        pot = problem.potential
        x0, x1 = math.log(r_lo), math.log(r_hi)
        n = int(math.ceil((x1 - x0) / dx)) + 1
        self.x = np.linspace(x0, x1, n)
        self.dx = float(self.x[1] - self.x[0])
        self.r = np.exp(self.x)
        self.r2 = self.r * self.r
        self.n = n
        if isinstance(pot, HardWallCavity):
            self.v = np.zeros(n)  # wall enforced by the boundary condition
        else:
            self.v = np.asarray(pot(self.r), dtype=float)
        if problem.dimension == 3:
            self.s2 = (lm + 0.5) ** 2
            self.p = lm + 1.0
        else:
            self.s2 = float(lm * lm)
            self.p = lm + 0.5
        # small-r structure of V for the series start
        self.gamma = 0.0
        self.sing_coef = 0.0
        self.sing_pow = 0.0
        self.v0 = 0.0
        if isinstance(pot, PowerLaw) and pot.beta < 0:
            amp = pot.coeff * pot.R ** (-pot.beta)  # V = amp * r^beta near 0
            if pot.beta == -1.0:
                self.gamma = -amp
            else:
                self.sing_pow = pot.beta
                self.sing_coef = amp / ((pot.beta + 2.0) * (pot.beta + 2.0 * self.p + 1.0))
        elif isinstance(pot, TabulatedPotential):
            self.v0 = float(pot(pot.domain[0]))

    def g_of(self, energy: float):
        return self.s2 + self.r2 * (self.v - energy)

    def start_pair(self, energy: float):
        """w at the first two grid points from the series u ~ r^p (1 + ...).

        Coefficients follow c_k k (k + 2p - 1) = -gamma c_{k-1} + (V0 - E) c_{k-2};
        four terms keep the start error negligible even when the first grid
        point sits at 1e-3 of the characteristic length.
        """
        p = self.p
        dv = self.v0 - energy
        c = [1.0, 0.0, 0.0, 0.0, 0.0]
        for k in range(1, 5):
            prev2 = c[k - 2] if k >= 2 else 0.0
            c[k] = (-self.gamma * c[k - 1] + dv * prev2) / (k * (k + 2.0 * p - 1.0))

        def w(r):
            val = c[0] + r * (c[1] + r * (c[2] + r * (c[3] + r * c[4])))
            if self.sing_coef:
                val += self.sing_coef * r ** (self.sing_pow + 2.0)
            return r ** (p - 0.5) * val

        w0 = w(self.r[0])
        return 1.0, w(self.r[1]) / w0


def _count_nodes(grid: _Grid, energy: float, buf) -> int:
    w0, w1 = grid.start_pair(energy)
    return int(_numerov_sweep(grid.g_of(energy), grid.dx, w0, w1, buf))


def _wronskian_defect(grid: _Grid, energy: float, im: int, buf_out, buf_in) -> float:
    """Mismatch of outward and inward solutions at index im (zero iff eigenvalue)."""
    g = grid.g_of(energy)
    w0, w1 = grid.start_pair(energy)
    _numerov_sweep(g, grid.dx, w0, w1, buf_out)
    _numerov_sweep(np.ascontiguousarray(g[::-1]), grid.dx, 0.0, 1.0, buf_in)
    wo = buf_out[im - 2: im + 3]
    wi = buf_in[grid.n - 1 - (im + 2): grid.n - 1 - (im - 3)][::-1]
    wo = wo / np.max(np.abs(wo))
    wi = wi / np.max(np.abs(wi))
    d_out = (-wo[4] + 8.0 * wo[3] - 8.0 * wo[1] + wo[0]) / (12.0 * grid.dx)
    d_in = (-wi[4] + 8.0 * wi[3] - 8.0 * wi[1] + wi[0]) / (12.0 * grid.dx)
    return d_out * wi[2] - d_in * wo[2]


def _match_index(grid: _Grid, energy: float) -> int:
    neg = np.nonzero(grid.g_of(energy) < 0.0)[0]
    im = grid.n - 5 if len(neg) == 0 else int(neg[-1])
    return min(max(im, 4), grid.n - 5)


def _outer_turning(pot, energy: float) -> float:
    if isinstance(pot, PowerLaw):
        return pot.R * (energy / pot.coeff) ** (1.0 / pot.beta)
    if isinstance(pot, TabulatedPotential):
        roots = pot.piecewise().solve(energy, extrapolate=False)
        return float(np.max(roots)) if len(roots) else pot.domain[1]
    raise UnsupportedPotential(f"no turning-point rule for {pot!r}")


def _auto_rmax(pot, e_cap: float) -> float:
    """Pad the outer radius until the WKB tail estimate is negligible."""
    cap = pot.domain[1] if isinstance(pot, TabulatedPotential) else math.inf
    rt = min(_outer_turning(pot, e_cap), cap)
    r_hi = min(1.2 * rt, cap)
    for _ in range(200):
        rs = np.geomspace(rt * (1.0 + 1e-9), r_hi, 256)
        kappa = np.sqrt(np.clip(np.asarray(pot(rs), dtype=float) - e_cap, 0.0, None))
        if np.trapezoid(kappa, rs) >= _TAIL_ACTION or r_hi >= cap:
            return min(r_hi, cap)
        r_hi = min(r_hi * 1.4, cap)
    raise ConvergenceError("tail padding did not converge")


def _grid_span(problem: Problem, lm: int, config: SolverConfig, e_cap: float):
    pot = problem.potential
    scale = pot.wall_radius or pot.scale
    if config.r_min > 0:
        r_lo = config.r_min
    elif problem.dimension == 2 and lm == 0:
        # the m = 0 channel has no centrifugal stiffness (s^2 = 0): a deep
        # start only accumulates roundoff over sub-resolution steps
        r_lo = scale * 1e-3
    else:
        r_lo = scale * 1e-6
    if isinstance(pot, TabulatedPotential):
        if pot.domain[0] > 0:
            raise UnsupportedPotential(
                "reference solver needs tabulated samples starting at r = 0"
            )
    if pot.wall_radius is not None:
        r_hi = pot.wall_radius
    elif config.r_max > 0:
        r_hi = config.r_max
    else:
        r_hi = _auto_rmax(pot, e_cap)
    return r_lo, r_hi


def _stable_grid(problem: Problem, lm: int, r_lo: float, r_hi: float,
                 dx: float, e_min: float) -> _Grid:
    """Build a grid whose pitch keeps the Numerov factor 1 - dx^2 g / 12 sane.

    Shallow confining exponents push the turning radius far out during
    bracket expansion; without the clamp dx^2 g / 12 can exceed 1 in the far
    tail and the recursion degenerates.  e_min is the lowest energy the grid
    will be swept at (g is largest there).
    """
    grid = _Grid(problem, lm, r_lo, r_hi, dx)
    g_ceil = float(np.max(np.abs(grid.g_of(e_min))))
    overshoot = g_ceil * grid.dx ** 2 / 12.0
    if overshoot > 0.5:
        grid = _Grid(problem, lm, r_lo, r_hi, dx * math.sqrt(0.5 / overshoot))
    return grid


def _seed_energy(pot, n_target: int, lm: int, floor: float) -> float:
    """Order-of-magnitude upper estimate of the (n, lm) level above the floor."""
    if isinstance(pot, PowerLaw) and pot.beta > 0:
        # dimensional analysis: energy unit (|coeff| / R^beta)^(2/(beta+2))
        unit = (abs(pot.coeff) / pot.R ** pot.beta) ** (2.0 / (pot.beta + 2.0))
        grow = 2.0 * pot.beta / (pot.beta + 2.0)
        return floor + unit * (2.0 * (n_target + lm + 2)) ** grow
    span = pot.wall_radius or pot.scale
    return floor + (math.pi * (n_target + lm + 2) / span) ** 2


def _bracket(problem: Problem, n_target: int, lm: int, config: SolverConfig,
             dx: float):
    """Energy bracket with count(e_lo) <= n_target < count(e_hi), plus its grid."""
    pot = problem.potential
    attractive = isinstance(pot, PowerLaw) and pot.beta < 0

    def fresh_grid(e_cap, e_min):
        r_lo, r_hi = _grid_span(problem, lm, config, e_cap)
        g = _stable_grid(problem, lm, r_lo, r_hi, dx, e_min)
        return g, np.empty(g.n)

    if attractive:
        e_unit = abs(pot.coeff)
        e_hi = -e_unit
        for _ in range(config.max_iter):
            grid, buf = fresh_grid(e_hi, 256.0 * e_hi)
            if _count_nodes(grid, e_hi, buf) >= n_target + 1:
                break
            e_hi /= 4.0
        else:
            raise EnergyBracketError(
                f"no bound state (n={n_target}, lm={lm}) found while raising the energy cap"
            )
        e_lo = e_hi * 4.0
        for _ in range(config.max_iter):
            if _count_nodes(grid, e_lo, buf) <= n_target:
                break
            e_lo *= 4.0
        else:
            raise EnergyBracketError("lower bracket expansion failed")
    else:
        floor = pot.floor
        ceiling = float(pot(pot.domain[1])) if isinstance(pot, TabulatedPotential) else math.inf
        e_hi = _seed_energy(pot, n_target, lm, floor)
        if math.isfinite(ceiling):
            e_hi = min(e_hi, ceiling - (ceiling - floor) * 1e-9)
        for _ in range(config.max_iter):
            grid, buf = fresh_grid(e_hi, floor)
            if _count_nodes(grid, e_hi, buf) >= n_target + 1:
                break
            nxt = floor + 4.0 * (e_hi - floor)
            if math.isfinite(ceiling) and nxt >= ceiling:
                nxt = ceiling - (ceiling - floor) * 1e-9
                if nxt <= e_hi:
                    raise EnergyBracketError(
                        f"no bound state (n={n_target}, lm={lm}) below the well boundary"
                    )
            e_hi = nxt
        else:
            raise EnergyBracketError("upper bracket expansion failed")
        e_lo = floor + (e_hi - floor) * 1e-12

    # bisect on node count until the bracket is narrow
    for _ in range(200):
        if (e_hi - e_lo) <= 2e-2 * max(abs(e_lo), abs(e_hi)):
            break
        mid = 0.5 * (e_lo + e_hi)
        if _count_nodes(grid, mid, buf) >= n_target + 1:
            e_hi = mid
        else:
            e_lo = mid
    return grid, e_lo, e_hi


def _polish(grid: _Grid, n_target: int, e_lo: float, e_hi: float,
            config: SolverConfig) -> float:
    """Brent iteration on the Wronskian defect inside a node-isolated bracket."""
    buf = np.empty(grid.n)
    buf_out = np.empty(grid.n)
    buf_in = np.empty(grid.n)

    # the grid pitch may differ from the bracketing grid: re-validate counts
    for _ in range(config.max_iter):
        if _count_nodes(grid, e_hi, buf) >= n_target + 1:
            break
        e_hi += (e_hi - e_lo)
    for _ in range(config.max_iter):
        if _count_nodes(grid, e_lo, buf) <= n_target:
            break
        e_lo -= (e_hi - e_lo)

    im = _match_index(grid, 0.5 * (e_lo + e_hi))

    def defect(e):
        return _wronskian_defect(grid, e, im, buf_out, buf_in)

    fa, fb = defect(e_lo), defect(e_hi)
    for _ in range(200):
        if fa * fb <= 0:
            break
        mid = 0.5 * (e_lo + e_hi)
        if (e_hi - e_lo) <= 1e-14 * max(abs(e_lo), abs(e_hi)):
            return mid
        if _count_nodes(grid, mid, buf) >= n_target + 1:
            e_hi, fb = mid, defect(mid)
        else:
            e_lo, fa = mid, defect(mid)
    else:
        raise ConvergenceError("defect sign change not found inside the node bracket")
    return float(brentq(defect, e_lo, e_hi,
                        xtol=1e-15 * max(1.0, abs(e_lo), abs(e_hi)), rtol=1e-15))


def solve_radial(problem: Problem, n: int, lm: int,
                 config: SolverConfig = DEFAULT_CONFIG) -> float:
    """Eigenvalue with n interior nodes in angular channel lm (l in 3D, m in 2D).

    The value is refined by re-solving at half the grid pitch and Richardson-
    extrapolating; halving repeats until the error estimate |E_h/2 - E_h| / 15
    meets config.tol (unless refine is off).
    """
    if n < 0 or lm < 0:
        raise ValueError("n and l (or m) must be non-negative")
    pot = problem.potential
    scale = pot.wall_radius or pot.scale
    dx = config.h / scale
    grid, e_lo, e_hi = _bracket(problem, n, lm, config, dx)
    r_lo, r_hi = math.exp(grid.x[0]), math.exp(grid.x[-1])

    e_prev = _polish(grid, n, e_lo, e_hi, config)
    if not config.refine:
        return e_prev
    dx = grid.dx  # the bracket grid may have been stability-clamped
    for _ in range(3):
        finer = _stable_grid(problem, lm, r_lo, r_hi, 0.5 * dx, e_lo)
        e_half = _polish(finer, n, e_lo, e_hi, config)
        err = abs(e_half - e_prev) / 15.0
        if err <= config.tol * max(abs(e_half), 1e-30):
            return e_half + (e_half - e_prev) / 15.0
        e_prev, dx = e_half, finer.dx
    raise ConvergenceError(
        f"step refinement stalled at estimated error {err:.3e} for (n={n}, lm={lm})"
    )


def radial_solution(problem: Problem, n: int, lm: int,
                    config: SolverConfig = DEFAULT_CONFIG):
    """Eigenvalue plus the matched, normalized radial function u(r).

    Returns (energy, r, u) with integral u^2 dr = 1; u has exactly n interior
    sign changes.
    """
    energy = solve_radial(problem, n, lm, config)
    pot = problem.potential
    scale = pot.wall_radius or pot.scale
    dx = config.h / scale
    r_lo, r_hi = _grid_span(problem, lm, config, energy)
    grid = _Grid(problem, lm, r_lo, r_hi, dx)
    im = _match_index(grid, energy)
    g = grid.g_of(energy)
    w0, w1 = grid.start_pair(energy)
    w_out = np.empty(grid.n)
    w_in = np.empty(grid.n)
    _numerov_sweep(g, grid.dx, w0, w1, w_out)
    _numerov_sweep(np.ascontiguousarray(g[::-1]), grid.dx, 0.0, 1.0, w_in)
    w_in = w_in[::-1]
    w = np.empty(grid.n)
    w[: im + 1] = w_out[: im + 1] / w_out[im]
    w[im:] = w_in[im:] / w_in[im]
    u = w * np.sqrt(grid.r)
    u /= math.sqrt(np.trapezoid(u * u, grid.r))
    return energy, grid.r, u


def spectrum(problem: Problem, n_max: int, l_max: int,
             config: SolverConfig = DEFAULT_CONFIG) -> SpectrumTable:
    """Batch solve for n in [0, n_max], angular number in [0, l_max]; sorted by E."""
    rows = []
    for lm in range(l_max + 1):
        for n in range(n_max + 1):
            e = solve_radial(problem, n, lm, config)
            if problem.dimension == 3:
                rows.append((StateLabel(n=n, l=lm), e))
            else:
                rows.append((StateLabel(n=n, m=lm), e))
    return SpectrumTable(rows, provenance="oracle").sorted()


# ---------------------------------------------------------------------------
# deformed-oscillator shift oracle


@lru_cache(maxsize=None)
def _gauss_nodes(order: int):
    t, wt = laggauss(order)
    z, wz = hermgauss(order)
    return t, wt, z, wz


def _osc_radial(n, l, r):
    # 3D isotropic-oscillator radial function for unit length scale
    lognorm = 0.5 * (math.log(2.0) + gammaln(n + 1) - gammaln(n + l + 1.5))
    return math.exp(lognorm) * r ** l * eval_genlaguerre(n, l + 0.5, r * r)


def _theta_legendre(l, m, ct):
    lognorm = 0.5 * (math.log((2 * l + 1) / 2.0) + gammaln(l - m + 1) - gammaln(l + m + 1))
    return math.exp(lognorm) * lpmv(m, l, ct)


def _osc_inplane(nr, m, rho):
    lognorm = 0.5 * (math.log(2.0) + gammaln(nr + 1) - gammaln(nr + m + 1))
    return math.exp(lognorm) * rho ** m * eval_genlaguerre(nr, m, rho * rho)


def _osc_axial(nz, z):
    lognorm = -0.5 * (nz * math.log(2.0) + gammaln(nz + 1) + 0.5 * math.log(math.pi))
    return math.exp(lognorm) * eval_hermite(nz, z)


@lru_cache(maxsize=None)
def _cylindrical_weights(n: int, l: int, am: int):
    """|<n_rho n_z m | n l m>|^2 for every cylindrical partner in the shell.

    The integrand is polynomial times the Gauss weight once the shared
    gaussian factors are pulled out, so Gauss-Laguerre (in t = rho^2) times
    Gauss-Hermite (in z) quadrature is exact.
    """
    shell = 2 * n + l
    order = max(24, shell + 8)
    t, wt, z, wz = _gauss_nodes(order)
    T, Z = np.meshgrid(t, z, indexing="ij")
    W = np.outer(wt, wz)
    rho = np.sqrt(T)
    r = np.sqrt(T + Z * Z)
    f_sph = _osc_radial(n, l, r) * _theta_legendre(l, am, Z / r)
    out = []
    for nr in range(0, (shell - am) // 2 + 1):
        nz = shell - am - 2 * nr
        f_cyl = _osc_inplane(nr, am, rho) * _osc_axial(nz, Z)
        ov = 0.5 * float(np.sum(W * f_sph * f_cyl))
        out.append((nr, nz, ov * ov))
    return tuple(out)


def anisotropic_oscillator_shift(n: int, l: int, m: int, alpha: float,
                                 omega0: float = 2.0) -> float:
    """Exact first-order level shift of the volume-preserving deformed oscillator.

    The deformed oscillator separates in cylindrical coordinates with
    frequencies w_rho = w0 (1 + alpha/3) and w_z = w0 (1 - 2 alpha/3), so its
    spectrum is exactly linear in alpha.  The quadrupole perturbation is
    diagonal in the cylindrical basis within a degenerate shell; the shift of
    the spherical state (n, l, m) is therefore the cylindrical slope averaged
    with the exact basis-change weights.  omega0 = 2 corresponds to V = r^2
    in hbar = 2m = 1 units (levels 4n + 2l + 3).
    """
    if n < 0 or l < 0:
        raise ValueError("n and l must be non-negative")
    if abs(m) > l:
        raise ValueError("|m| must not exceed l")
    if abs(alpha) > ALPHA_GUARD:
        raise ValueError(f"|alpha| exceeds guard {ALPHA_GUARD}")
    total = 0.0
    for nr, nz, w in _cylindrical_weights(n, l, abs(m)):
        slope = (2 * nr + abs(m) + 1) / 3.0 - (2.0 / 3.0) * (nz + 0.5)
        total += w * slope
    return alpha * omega0 * total


def ordering_agreement(a: SpectrumTable, b: SpectrumTable) -> float:
    """Kendall rank correlation (tau-b) between two orderings of one state set."""
    la, lb = set(a.labels()), set(b.labels())
    if la != lb:
        raise ValueError("ordering agreement needs identical state-label sets")
    ea = {lab: e for lab, e in a}
    eb = {lab: e for lab, e in b}
    keys = sorted(la, key=lambda lab: (lab.n,) + lab.sort_key())
    va = [ea[k] for k in keys]
    vb = [eb[k] for k in keys]
    return float(kendalltau(va, vb).statistic)
