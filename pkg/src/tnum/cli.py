"""Command-line interface.

Subcommands: phi, spectrum, deform, dot, sweep-phi, exact.  Configuration
documents are JSON; tables are CSV with 12-significant-digit numbers so that
identical invocations produce byte-identical files.  Exit codes: 0 success,
1 partial numerical failure (failed rows are marked in the status column),
2 configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import dots, oracle, semiclassical, tnumber
from .errors import (ConfigError, ConvergenceError, EnergyBracketError,
                     NoClassicalMotion, UnsupportedPotential)
from .potentials import (HardWallCavity, PowerLaw, Problem, load_potential,
                         potential_from_config)
from .tnumber import SpectrumTable, StateLabel, TParams

_NUMERIC_ERRORS = (NoClassicalMotion, UnsupportedPotential, EnergyBracketError,
                   ConvergenceError)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(x: float) -> float:
    return float(f"{x:.12g}")


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _env_defaults() -> dict:
    path = os.environ.get("TNUM_CONFIG")
    if not path:
        return {}
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"TNUM_CONFIG: {exc}") from exc


def _resolve_potential(args):
    src = args.potential or _env_defaults().get("potential")
    if src is None:
        raise ConfigError("a potential config is required (--potential)")
    if isinstance(src, dict):
        return potential_from_config(src)
    return load_potential(src)


def _resolve_phi(args, problem) -> float:
    if args.phi is not None:
        return args.phi
    env_phi = _env_defaults().get("phi")
    if env_phi is not None:
        return float(env_phi)
    e_ref = semiclassical.solve_energy(problem, 1.0)
    return semiclassical.estimate_phi(problem, e_ref)


def _virial_beta(potential) -> float:
    if isinstance(potential, PowerLaw):
        return potential.beta
    if isinstance(potential, HardWallCavity):
        return math.inf
    raise ConfigError(
        "deformation shifts need a power-law or hard-wall potential "
        "(the virial exponent is undefined otherwise)"
    )


def _rows_to_json(header, rows) -> str:
    docs = []
    for row in rows:
        doc = {}
        for key, val in zip(header, row):
            if val == "":
                continue
            doc[key] = _round12(val) if isinstance(val, float) else val
        docs.append(doc)
    return json.dumps(docs, sort_keys=True) + "\n"


def _table_text(header, rows, fmt: str) -> str:
    if fmt == "json":
        return _rows_to_json(header, rows)
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for val in row:
            if isinstance(val, float):
                cells.append(_fmt(val))
            else:
                cells.append(str(val))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# phi


def cmd_phi(args) -> int:
    if args.fit is None and args.potential is None and "potential" not in _env_defaults():
        raise ConfigError("phi needs --potential and/or --fit")
    lines = []
    doc = {}
    if args.potential is not None or (args.fit is None):
        pot = _resolve_potential(args)
        problem = Problem(pot, dimension=args.dim)
        if args.state is not None:
            n, lm = _parse_state_pair(args.state)
            energy = oracle.solve_radial(problem, n, lm)
        elif args.energy is not None:
            energy = args.energy
        else:
            energy = semiclassical.solve_energy(problem, 1.0)
        weight = "dim" if args.phi_weight == "dimension" else "r2"
        phi = semiclassical.estimate_phi(problem, energy, weight=weight)
        lines.append(f"phi={phi:.6f}")
        doc.update({"phi": _round12(phi), "energy": _round12(energy), "mode": "integral"})
    if args.fit is not None:
        table = SpectrumTable.from_csv(args.fit)
        fit = tnumber.fit_phi(table, dimension=args.dim)
        lines.append(f"phi_hat={fit.phi:.3f}")
        doc = {k: (_round12(v) if isinstance(v, float) else v)
               for k, v in fit.to_doc().items()}
        doc["ordering_tau"] = _round12(fit.ordering_tau)
    print("\n".join(lines))
    if args.out:
        Path(args.out).write_text(json.dumps(doc, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def _parse_state_pair(text: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ConfigError(f"state must be 'n,l' (got {text!r})")
    return int(parts[0]), int(parts[1])


# ---------------------------------------------------------------------------
# spectrum


def _spectrum_row_task(payload):
    (pot_cfg, dim, n, lm, method, phi, solver_tol) = payload
    pot = potential_from_config(pot_cfg)
    problem = Problem(pot, dimension=dim)
    if dim == 3:
        label = {"n": n, "l": lm, "m": "", "N": ""}
    else:
        label = {"n": n, "l": "", "m": lm, "N": ""}
    t_val = tnumber.effective_t(
        StateLabel(n=n, l=lm) if dim == 3 else StateLabel(n=n, m=lm),
        TParams(phi=phi, dimension=dim),
    )
    e_semi = e_exact = None
    status = "ok"
    try:
        if method in ("semiclassical", "both"):
            e_semi = semiclassical.solve_energy(problem, t_val)
        if method in ("exact", "both"):
            cfg = oracle.SolverConfig(tol=solver_tol) if solver_tol else oracle.DEFAULT_CONFIG
            e_exact = oracle.solve_radial(problem, n, lm, cfg)
    except _NUMERIC_ERRORS as exc:
        status = f"error: {exc}"
    return (label, t_val, e_semi, e_exact, status)


def cmd_spectrum(args) -> int:
    pot = _resolve_potential(args)
    problem = Problem(pot, dimension=args.dim)
    phi = _resolve_phi(args, problem)
    pot_cfg = pot.to_config()
    payloads = [(pot_cfg, args.dim, n, lm, args.method, phi, args.tol)
                for lm in range(args.lmax + 1) for n in range(args.nmax + 1)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_spectrum_row_task, payloads))
    else:
        results = [_spectrum_row_task(p) for p in payloads]

    header = ["n", "l", "m", "N", "T", "E_semi", "E_exact", "rel_err", "status"]
    rows = []
    failed = False
    for (label, t_val, e_semi, e_exact, status) in results:
        rel = ""
        if e_semi is not None and e_exact is not None and e_exact != 0:
            rel = abs(e_semi - e_exact) / abs(e_exact)
        rows.append([label["n"], label["l"], label["m"], label["N"], t_val,
                     "" if e_semi is None else e_semi,
                     "" if e_exact is None else e_exact,
                     rel, status])
        failed = failed or status != "ok"

    sort_col = 6 if args.method in ("exact", "both") else 5
    rows.sort(key=lambda r: (r[sort_col] if r[sort_col] != "" else math.inf, r[4]))
    _emit(_table_text(header, rows, args.format), args.out)
    if args.method == "both":
        ok = [r for r in rows if r[8] == "ok"]
        tau_a = [r[4] for r in ok]          # T ordering
        tau_b = [r[6] for r in ok]          # exact ordering
        if len(ok) >= 2:
            from scipy.stats import kendalltau
            print(f"kendall_tau={kendalltau(tau_a, tau_b).statistic:.6f}")
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# deform


def _parse_deform_states(text: str):
    out = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [int(p) for p in chunk.split(",")]
        if len(parts) == 2:
            out.append((parts[0], parts[1], None))
        elif len(parts) == 3:
            out.append((parts[0], parts[1], parts[2]))
        else:
            raise ConfigError(f"state {chunk!r} must be 'n,l' or 'n,l,m'")
    if not out:
        raise ConfigError("no states given")
    return out


def cmd_deform(args) -> int:
    pot = _resolve_potential(args)
    problem = Problem(pot, dimension=3)
    beta = _virial_beta(pot)
    phi = _resolve_phi(args, problem)
    params = TParams(phi=phi, dimension=3)
    states = _parse_deform_states(args.states)

    header = ["n", "l", "m", "f", "dE", "dT", "T_deformed", "mode"]
    rows = []
    failed = False
    for (n, l, m_sel) in states:
        try:
            if args.method == "exact":
                energy = oracle.solve_radial(problem, n, l)
            else:
                energy = semiclassical.solve_energy(
                    problem, tnumber.effective_t(StateLabel(n=n, l=l), params))
            kinetic = tnumber.virial_kinetic(energy, beta)
        except _NUMERIC_ERRORS as exc:
            rows.append([n, l, "", "", "", "", "", f"error: {exc}"])
            failed = True
            continue
        m_values = [m_sel] if m_sel is not None else list(range(-l, l + 1))
        sums = [0.0, 0.0, 0.0]
        for m in m_values:
            f = float(tnumber.quadrupole_factor(m, l))
            d_e = tnumber.deformation_energy_shift(kinetic, args.alpha, m, l)
            lab = StateLabel(n=n, l=l, m=m)
            d_t = tnumber.deformed_t_shift(lab, params, args.alpha, mode=args.mode)
            t_def = tnumber.effective_t(lab, params) + d_t
            rows.append([n, l, m, f, d_e, d_t, t_def, args.mode])
            sums[0] += f
            sums[1] += d_e
            sums[2] += d_t
        if m_sel is None:
            rows.append([n, l, "sum", sums[0], sums[1], sums[2], "", args.mode])
    _emit(_table_text(header, rows, args.format), args.out)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# dot


def cmd_dot(args) -> int:
    src = args.config or _env_defaults().get("dot")
    if src is None:
        raise ConfigError("a dot config is required (--config)")
    try:
        cfg = json.loads(Path(src).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{src}: not valid JSON ({exc})") from exc
    spec = dots.dot_spec_from_config(cfg)
    table = dots.dot_spectrum(spec, N_max=args.Nmax, n_max=args.nmax,
                              m_max=args.mmax, method=args.method,
                              phi=args.phi, e_cut=args.ecut)
    if args.format == "json":
        header = ["n", "l", "m", "N", "E"]
        rows = [[lab.n, "", lab.m, lab.N, e] for lab, e in table]
        _emit(_rows_to_json(header, rows), args.out)
    else:
        _emit(table.to_csv(), args.out)
    return 0


# ---------------------------------------------------------------------------
# sweep-phi


def cmd_sweep_phi(args) -> int:
    if args.phi_list is not None:
        phis = [float(p) for p in args.phi_list.split(",") if p.strip()]
    else:
        if args.phi_steps < 1:
            raise ConfigError("phi sweep needs at least one step")
        if args.phi_steps == 1:
            phis = [args.phi_start]
        else:
            step = (args.phi_stop - args.phi_start) / (args.phi_steps - 1)
            phis = [args.phi_start + i * step for i in range(args.phi_steps)]
    if not phis:
        raise ConfigError("empty phi range")

    header = ["phi", "rank", "n", "l", "m", "label", "T"]
    rows = []
    for phi in phis:
        params = TParams(phi=phi, dimension=args.dim)
        for rank, (lab, t_val) in enumerate(tnumber.enumerate_levels(params, args.levels), 1):
            rows.append([phi, rank, lab.n,
                         "" if lab.l is None else lab.l,
                         "" if lab.m is None else lab.m,
                         lab.spectroscopic() if lab.l is not None else f"{lab.n}:{lab.m}",
                         t_val])
    _emit(_table_text(header, rows, args.format), args.out)
    return 0


# ---------------------------------------------------------------------------
# exact


def cmd_exact(args) -> int:
    pot = _resolve_potential(args)
    problem = Problem(pot, dimension=args.dim)
    pot_cfg = pot.to_config()
    payloads = [(pot_cfg, args.dim, n, lm, "exact", 0.5, args.tol)
                for lm in range(args.lmax + 1) for n in range(args.nmax + 1)]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_spectrum_row_task, payloads))
    else:
        results = [_spectrum_row_task(p) for p in payloads]
    rows = []
    failed = False
    for (label, _t, _es, e_exact, status) in results:
        if status != "ok":
            failed = True
            continue
        if args.dim == 3:
            rows.append((StateLabel(n=label["n"], l=label["l"]), e_exact))
        else:
            rows.append((StateLabel(n=label["n"], m=label["m"]), e_exact))
    table = SpectrumTable(rows, provenance="oracle").sorted()
    _emit(table.to_csv(), args.out)
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tnum",
        description="Effective-quantum-number spectral toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, potential=True):
        if potential:
            p.add_argument("--potential", help="potential config (JSON file, or CSV of samples)")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--tol", type=float, default=None, help="solver tolerance override")
        p.add_argument("--dim", type=int, choices=(2, 3), default=3)

    p = sub.add_parser("phi", help="angular weight from the potential and/or a spectrum fit")
    common(p)
    p.add_argument("--energy", type=float, help="energy at which the integrals are taken "
                                                "(default: the T = 1 level)")
    p.add_argument("--state", help="'n,l': evaluate at that exact level instead")
    p.add_argument("--phi-weight", choices=("r2", "dimension"), default="r2",
                   help="denominator measure: literal r^2, or r^(D-1)")
    p.add_argument("--fit", help="spectrum CSV to calibrate phi from")
    p.set_defaults(func=cmd_phi)

    p = sub.add_parser("spectrum", help="semiclassical vs exact level table")
    common(p)
    p.add_argument("--phi", type=float, help="angular weight (default: estimated)")
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--lmax", type=int, default=2)
    p.add_argument("--method", choices=("semiclassical", "exact", "both"), default="both")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("deform", help="ellipsoidal splitting report")
    common(p)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--states", required=True, help="semicolon-separated 'n,l' or 'n,l,m'")
    p.add_argument("--phi", type=float, help="angular weight (default: estimated)")
    p.add_argument("--mode", choices=sorted(tnumber.DEFORMED_T_COEFF), default="consistent")
    p.add_argument("--method", choices=("exact", "semiclassical"), default="exact")
    p.set_defaults(func=cmd_deform)

    p = sub.add_parser("dot", help="quantum-dot composite spectrum")
    common(p, potential=False)
    p.add_argument("--config", help="dot config JSON {d, inplane, R}")
    p.add_argument("--Nmax", type=int, default=1)
    p.add_argument("--nmax", type=int, default=0)
    p.add_argument("--mmax", type=int, default=0)
    p.add_argument("--method", choices=("exact", "semiclassical"), default="exact")
    p.add_argument("--phi", type=float)
    p.add_argument("--ecut", type=float, help="keep every state below this energy")
    p.set_defaults(func=cmd_dot)

    p = sub.add_parser("sweep-phi", help="level ordering as a function of phi")
    common(p, potential=False)
    p.add_argument("--phi-list", help="comma-separated phi values")
    p.add_argument("--phi-start", type=float, default=0.3)
    p.add_argument("--phi-stop", type=float, default=1.0)
    p.add_argument("--phi-steps", type=int, default=8)
    p.add_argument("--levels", type=int, default=10)
    p.set_defaults(func=cmd_sweep_phi)

    p = sub.add_parser("exact", help="reference spectrum only")
    common(p)
    p.add_argument("--nmax", type=int, default=2)
    p.add_argument("--lmax", type=int, default=2)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_exact)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"tnum: {exc}", file=sys.stderr)
        return 2
    except _NUMERIC_ERRORS as exc:
        print(f"tnum: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
