"""Effective quantum number T, deformation splitting, fits, level ordering.

T = (n + 1/2) + phi * lambda with lambda = l + (D-2)/2, i.e. l + 1/2 in 3D
and |m| in 2D.  Sorting states by T predicts the level ordering; T also
feeds the semiclassical condition Phi(E) = T.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.stats import kendalltau

SPECTROSCOPIC = "spdfghiklmnoqrtuvwxyz"  # standard sequence, no 'j'

ALPHA_GUARD = 0.2  # default |alpha| bound for first-order deformation formulas

#: T' = (1 + coefficient * alpha * f) * T for the two splitting conventions.
#: "consistent" is the value forced by composing the kinetic-energy shift,
#: the virial relation and the scaling law (and confirmed by the exact
#: deformed-oscillator reference); "literal" keeps the standalone quoted
#: coefficient, exactly 1/4 of the other.
DEFORMED_T_COEFF = {"consistent": 2.0, "literal": 0.5}


@dataclass(frozen=True)
class StateLabel:
    """Quantum numbers (n, l, m) plus the optional slab index N for dots."""

    n: int
    l: int | None = None
    m: int | None = None
    N: int | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("radial number n must be >= 0")
        if self.l is not None and self.l < 0:
            raise ValueError("orbital number l must be >= 0")
        if self.m is not None and self.l is not None and abs(self.m) > self.l:
            raise ValueError("|m| must not exceed l")
        if self.N is not None and self.N < 1:
            raise ValueError("slab index N starts at 1")

    def spectroscopic(self) -> str:
        """Human label like 1s, 2p; requires l."""
        if self.l is None:
            raise ValueError("spectroscopic label needs l")
        letter = SPECTROSCOPIC[self.l] if self.l < len(SPECTROSCOPIC) else f"(l={self.l})"
        return f"{self.n + 1}{letter}"

    def sort_key(self):
        lam = self.l if self.l is not None else abs(self.m or 0)
        return (lam, self.n, self.m if self.m is not None else 0,
                self.N if self.N is not None else 0)


@dataclass(frozen=True)
class TParams:
    """Angular weight phi and the spatial dimension."""

    phi: float
    dimension: int = 3

    def __post_init__(self):
        if not 0.0 < self.phi <= 1.5:
            raise ValueError("phi must lie in (0, 1.5]")
        if self.dimension not in (2, 3):
            raise ValueError("dimension must be 2 or 3")


def _angular_number(state: StateLabel, dimension: int) -> float:
    """lambda = l + (D-2)/2; the role of l is played by |m| in 2D."""
    if dimension == 3:
        if state.l is None:
            raise ValueError("3D state needs l")
        return state.l + 0.5
    if state.m is None:
        raise ValueError("2D state needs m")
    return float(abs(state.m))


def effective_t(state: StateLabel, params: TParams) -> float:
    """T = (n + 1/2) + phi * lambda."""
    return state.n + 0.5 + params.phi * _angular_number(state, params.dimension)


def quadrupole_factor(m: int, l: int) -> Fraction:
    """f(m, l) = [m^2 - l(l+1)/3] / [(2l-1)(2l+3)], exact rational.

    f(m, l=0) is 0 by convention (the numerator vanishes there anyway).
    """
    if l < 0:
        raise ValueError("l must be >= 0")
    if abs(m) > l:
        raise ValueError("|m| must not exceed l")
    if l == 0:
        return Fraction(0)
    return Fraction(3 * m * m - l * (l + 1), 3 * (2 * l - 1) * (2 * l + 3))


def deformed_t_shift(state: StateLabel, params: TParams, alpha: float,
                     mode: str = "consistent", max_alpha: float = ALPHA_GUARD) -> float:
    """Shift dT = coeff * alpha * f(m, l) * T of a multiplet member.

    Evaluated as a plain product so that the two modes differ by an exact
    factor of 4 in floating point (their coefficients are both powers of 2
    times alpha).
    """
    if mode not in DEFORMED_T_COEFF:
        raise ValueError(f"mode must be one of {sorted(DEFORMED_T_COEFF)}")
    if abs(alpha) > max_alpha:
        raise ValueError(f"|alpha| exceeds guard {max_alpha}")
    if params.dimension != 3:
        raise ValueError("deformation splitting is defined for D = 3")
    if state.m is None:
        raise ValueError("deformed T needs the magnetic number m")
    f = float(quadrupole_factor(state.m, state.l))
    return DEFORMED_T_COEFF[mode] * alpha * f * effective_t(state, params)


def deformed_t(state: StateLabel, params: TParams, alpha: float,
               mode: str = "consistent", max_alpha: float = ALPHA_GUARD) -> float:
    """Effective quantum number of an (n, l, m) state under ellipsoidal deformation.

    T' = [1 + coeff * alpha * f(m, l)] * T with coeff per DEFORMED_T_COEFF.
    """
    base = effective_t(state, params)
    return base + deformed_t_shift(state, params, alpha, mode, max_alpha)


def virial_kinetic(energy: float, beta: float) -> float:
    """Mean kinetic energy K = beta E / (beta + 2) in a power-law potential.

    beta = math.inf encodes the hard-wall limit, where K = E.
    """
    if math.isinf(beta):
        return energy
    if beta == 0 or beta == -2:
        raise ValueError("virial relation is singular at beta in {0, -2}")
    return beta * energy / (beta + 2.0)


def deformation_energy_shift(kinetic: float, alpha: float, m: int, l: int,
                             max_alpha: float = ALPHA_GUARD) -> float:
    """First-order level shift 4 alpha K f(m, l) of the |m| multiplet member.

    For the hard-wall cavity pass kinetic = E (the virial limit beta -> inf).
    """
    if abs(alpha) > max_alpha:
        raise ValueError(f"|alpha| exceeds guard {max_alpha}")
    return 4.0 * alpha * kinetic * float(quadrupole_factor(m, l))


@dataclass(frozen=True)
class ScalingFit:
    """E = prefactor * T^exponent with exponent = 2 beta / (2 + beta)."""

    prefactor: float
    exponent: float
    beta: float
    residual_rms: float = 0.0


def energy_from_scaling(t_value: float, fit: ScalingFit) -> float:
    if t_value <= 0:
        raise ValueError("T must be positive")
    return fit.prefactor * t_value ** fit.exponent


@dataclass(frozen=True)
class PhiFit:
    """Calibrated phi with the joint power-law fit and its diagnostics."""

    phi: float
    prefactor: float
    exponent: float
    residual_rms: float
    ordering_tau: float

    def to_doc(self) -> dict:
        return {
            "phi": self.phi,
            "F": self.prefactor,
            "exponent": self.exponent,
            "residual_rms": self.residual_rms,
            "mode": "phi-fit",
        }


class SpectrumTable:
    """Ordered (StateLabel, energy) rows; the interchange format of the package.

    CSV schema (bit-exact): header "n,l,m,N,E", one row per state, empty
    fields for absent quantum numbers, 12 significant digits for energies.
    """

    def __init__(self, rows, provenance: str = "file"):
        rows = [(label, float(e)) for (label, e) in rows]
        labels = [lab for lab, _ in rows]
        if len(set(labels)) != len(labels):
            raise ValueError("duplicate state labels in spectrum table")
        self.rows = rows
        self.provenance = provenance

    def __len__(self):
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def labels(self):
        return [lab for lab, _ in self.rows]

    def energies(self):
        return np.array([e for _, e in self.rows])

    def sorted(self) -> "SpectrumTable":
        rows = sorted(self.rows, key=lambda t: (t[1],) + t[0].sort_key())
        return SpectrumTable(rows, self.provenance)

    def to_csv(self, target=None) -> str:
        buf = io.StringIO()
        buf.write("n,l,m,N,E\n")
        for lab, e in self.rows:
            fields = [str(lab.n),
                      "" if lab.l is None else str(lab.l),
                      "" if lab.m is None else str(lab.m),
                      "" if lab.N is None else str(lab.N),
                      f"{e:.12g}"]
            buf.write(",".join(fields) + "\n")
        text = buf.getvalue()
        if target is not None:
            Path(target).write_text(text, encoding="utf-8")
        return text

    @classmethod
    def from_csv(cls, source, provenance: str = "file") -> "SpectrumTable":
        """Parse a spectrum table from a file path or raw CSV text.

        Accepts the plain schema and the extended comparison schema; the
        energy column is taken from E, E_exact or E_semi, in that order.
        """
        text = str(source) if "\n" in str(source) else Path(source).read_text(encoding="utf-8")
        lines = [ln for ln in text.splitlines() if ln.strip()]
        header = [h.strip() for h in lines[0].split(",")]
        cols = {name: i for i, name in enumerate(header)}
        if "n" not in cols:
            raise ValueError("spectrum CSV needs an 'n' column")
        for ecol in ("E", "E_exact", "E_semi"):
            if ecol in cols:
                break
        else:
            raise ValueError("spectrum CSV needs an energy column (E, E_exact or E_semi)")

        def pick(parts, name):
            i = cols.get(name)
            if i is None or i >= len(parts) or parts[i].strip() == "":
                return None
            return int(parts[i])

        rows = []
        for ln in lines[1:]:
            parts = [p.strip() for p in ln.split(",")]
            etxt = parts[cols[ecol]] if cols[ecol] < len(parts) else ""
            if etxt == "":
                continue
            lab = StateLabel(n=pick(parts, "n") or 0, l=pick(parts, "l"),
                             m=pick(parts, "m"), N=pick(parts, "N"))
            rows.append((lab, float(etxt)))
        return cls(rows, provenance)


def _t_column(table: SpectrumTable, params: TParams):
    return np.array([effective_t(lab, params) for lab in table.labels()])


def _log_power_fit(t_vals, energies):
    """Linear least squares of log|E| on log T; returns (prefactor, exponent, rms)."""
    logE = np.log(np.abs(energies))
    A = np.column_stack([np.ones_like(t_vals), np.log(t_vals)])
    coef, *_ = np.linalg.lstsq(A, logE, rcond=None)
    resid = logE - A @ coef
    rms = float(np.sqrt(resid @ resid / len(logE)))
    sign = 1.0 if energies[0] > 0 else -1.0
    return sign * math.exp(coef[0]), float(coef[1]), rms


def fit_scaling(table: SpectrumTable, params: TParams) -> ScalingFit:
    """Fit E = F T^p to a spectrum with phi given; p identifies beta."""
    energies = table.energies()
    if len(energies) < 3:
        raise ValueError("scaling fit needs at least 3 rows")
    if np.any(energies == 0) or np.any(np.sign(energies) != np.sign(energies[0])):
        raise ValueError("scaling fit needs energies of uniform sign")
    t_vals = _t_column(table, params)
    if np.ptp(t_vals) <= 0:
        raise ValueError("degenerate T values: fit is underdetermined")
    F, p, rms = _log_power_fit(t_vals, energies)
    beta = 2.0 * p / (2.0 - p) if p != 2.0 else math.inf
    return ScalingFit(prefactor=F, exponent=p, beta=beta, residual_rms=rms)


def fit_phi(table: SpectrumTable, dimension: int = 3,
            bounds: tuple = (0.05, 1.5)) -> PhiFit:
    """Calibrate phi from a spectrum by collapsing it onto one power law.

    Joint nonlinear least squares over (F, p, phi) on log energies: for each
    phi the inner (log F, p) problem is linear; a bounded Brent search over
    phi minimizes the residual.  Deterministic for fixed tolerances.
    """
    labels = table.labels()
    if dimension == 3:
        lam_set = {lab.l for lab in labels}
    else:
        lam_set = {abs(lab.m) for lab in labels}
    if len(lam_set) < 2:
        raise ValueError("phi fit needs at least 2 distinct angular numbers")
    energies = table.energies()
    if np.any(energies == 0) or np.any(np.sign(energies) != np.sign(energies[0])):
        raise ValueError("phi fit needs energies of uniform sign")

    def ssr(phi):
        t_vals = _t_column(table, TParams(phi=phi, dimension=dimension))
        _, _, rms = _log_power_fit(t_vals, energies)
        return rms * rms * len(energies)

    res = minimize_scalar(ssr, bounds=bounds, method="bounded",
                          options={"xatol": 1e-12})
    phi_hat = float(res.x)
    params = TParams(phi=phi_hat, dimension=dimension)
    t_vals = _t_column(table, params)
    F, p, rms = _log_power_fit(t_vals, energies)
    tau = float(kendalltau(t_vals, energies).statistic)
    return PhiFit(phi=phi_hat, prefactor=F, exponent=p,
                  residual_rms=rms, ordering_tau=tau)


def enumerate_levels(params: TParams, count: int):
    """The `count` smallest-T states, ascending, ties broken by (lambda, n).

    Returns a list of (StateLabel, T).
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    lam_max = int(math.ceil(count / params.phi)) + 2
    cands = []
    if params.dimension == 3:
        for n in range(count + 1):
            for l in range(lam_max + 1):
                lab = StateLabel(n=n, l=l)
                cands.append((effective_t(lab, params), lab))
    else:
        for n in range(count + 1):
            for m in range(lam_max + 1):
                lab = StateLabel(n=n, m=m)
                cands.append((effective_t(lab, params), lab))
    cands.sort(key=lambda t: (t[0],) + t[1].sort_key())
    return [(lab, t) for (t, lab) in cands[:count]]
