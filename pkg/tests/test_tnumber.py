import math
from fractions import Fraction

import numpy as np
import pytest

from conftest import (hard_wall_energy, hydrogen_energy, oscillator_energy,
                      spherical_bessel_zero)
from tnum.tnumber import (SpectrumTable, StateLabel, TParams,
                          deformation_energy_shift, deformed_t,
                          deformed_t_shift, effective_t, energy_from_scaling,
                          enumerate_levels, fit_phi, fit_scaling,
                          quadrupole_factor, virial_kinetic, ScalingFit)


def test_state_label_validation():
    with pytest.raises(ValueError):
        StateLabel(n=-1)
    with pytest.raises(ValueError):
        StateLabel(n=0, l=1, m=2)
    with pytest.raises(ValueError):
        StateLabel(n=0, l=0, N=0)
    assert StateLabel(n=1, l=2).spectroscopic() == "2d"


def test_effective_t_examples():
    assert effective_t(StateLabel(0, 0), TParams(0.5)) == pytest.approx(0.75)
    assert effective_t(StateLabel(1, 2), TParams(1.0)) == pytest.approx(4.0)
    assert effective_t(StateLabel(0, m=3), TParams(0.39, dimension=2)) == pytest.approx(1.67)


def test_effective_t_dimension_mismatch():
    with pytest.raises(ValueError):
        effective_t(StateLabel(0, m=1), TParams(0.5, dimension=3))
    with pytest.raises(ValueError):
        effective_t(StateLabel(0, l=1), TParams(0.5, dimension=2))


def test_tparams_window():
    with pytest.raises(ValueError):
        TParams(0.0)
    with pytest.raises(ValueError):
        TParams(1.6)


def test_quadrupole_values():
    assert quadrupole_factor(0, 1) == Fraction(-2, 15)
    assert quadrupole_factor(1, 1) == Fraction(1, 15)
    assert quadrupole_factor(-1, 1) == Fraction(1, 15)
    assert quadrupole_factor(2, 2) == Fraction(2, 21)
    assert quadrupole_factor(0, 0) == Fraction(0)
    with pytest.raises(ValueError):
        quadrupole_factor(2, 1)


@pytest.mark.parametrize("l", range(1, 11))
def test_quadrupole_sum_rule_exact(l):
    total = sum(quadrupole_factor(m, l) for m in range(-l, l + 1))
    assert total == Fraction(0)  # exact rational zero


@pytest.mark.parametrize("l", range(1, 6))
def test_quadrupole_even_in_m(l):
    for m in range(0, l + 1):
        assert quadrupole_factor(m, l) == quadrupole_factor(-m, l)


def test_deformed_t_examples():
    # state with T = 2 and f = 1/15: (n=1, l=1, m=1) at phi = 1/3
    params = TParams(1.0 / 3.0)
    lab = StateLabel(1, 1, 1)
    assert effective_t(lab, params) == pytest.approx(2.0)
    assert deformed_t(lab, params, 0.1, mode="literal") == pytest.approx(2.0 + 0.1 / 15.0 * 1.0)
    assert deformed_t(lab, params, 0.1, mode="consistent") == pytest.approx(2.0 + 0.4 / 15.0 * 1.0)
    assert deformed_t(lab, params, 0.0) == pytest.approx(2.0)


def test_deformed_t_mode_ratio_is_exactly_four():
    params = TParams(0.39)
    for (n, l, m) in [(0, 1, 0), (1, 2, 1), (2, 3, -2)]:
        lab = StateLabel(n, l, m)
        lit = deformed_t_shift(lab, params, 0.02, mode="literal")
        con = deformed_t_shift(lab, params, 0.02, mode="consistent")
        assert 4.0 * lit == con  # bitwise


@pytest.mark.parametrize("l", [1, 2, 3])
def test_deformed_t_multiplet_center_of_gravity(l):
    # sum over m of (T' - T) vanishes along with sum_m f(m, l)
    params = TParams(0.39)
    total = sum(deformed_t_shift(StateLabel(0, l, m), params, 0.05)
                for m in range(-l, l + 1))
    assert abs(total) < 1e-15


def test_effective_t_strictly_increasing():
    params = TParams(0.39)
    t_grid = [[effective_t(StateLabel(n, l), params) for l in range(4)] for n in range(4)]
    for row in t_grid:
        assert all(b > a for a, b in zip(row, row[1:]))
    for col in zip(*t_grid):
        assert all(b > a for a, b in zip(col, col[1:]))


def test_deformed_t_guards():
    params = TParams(0.5)
    with pytest.raises(ValueError):
        deformed_t(StateLabel(0, 1, 0), params, 0.5)
    with pytest.raises(ValueError):
        deformed_t(StateLabel(0, 1, 0), TParams(0.5, dimension=2), 0.1)
    with pytest.raises(ValueError):
        deformed_t(StateLabel(0, 1), params, 0.1)
    with pytest.raises(ValueError):
        deformed_t(StateLabel(0, 1, 0), params, 0.1, mode="verbatim")


def test_virial_kinetic():
    assert virial_kinetic(5.0, 2.0) == pytest.approx(2.5)
    assert virial_kinetic(-0.25, -1.0) == pytest.approx(0.25)
    assert virial_kinetic(7.0, math.inf) == 7.0
    for beta in (0.0, -2.0):
        with pytest.raises(ValueError):
            virial_kinetic(1.0, beta)


def test_deformation_energy_shift_oscillator_multiplet():
    # l = 1 shell of the oscillator: E = 5, K = E/2
    kin = 2.5
    assert deformation_energy_shift(kin, 0.01, 0, 1) == pytest.approx(-1.0 / 75.0)
    assert deformation_energy_shift(kin, 0.01, 1, 1) == pytest.approx(1.0 / 150.0)
    assert deformation_energy_shift(kin, 0.01, -1, 1) == pytest.approx(1.0 / 150.0)
    total = sum(deformation_energy_shift(kin, 0.01, m, 1) for m in (-1, 0, 1))
    assert abs(total) < 1e-18


def test_deformation_energy_shift_hard_wall_level():
    # 1p cavity level: E = j_{1,1}^2, K = E for the hard wall
    e = spherical_bessel_zero(1, 1) ** 2
    shift = deformation_energy_shift(e, 0.01, 0, 1)
    assert e == pytest.approx(20.1907286, abs=1e-6)
    assert shift == pytest.approx(4 * 0.01 * e * (-2.0 / 15.0), rel=1e-15)
    assert shift == pytest.approx(-0.1076839, abs=1e-6)


@pytest.mark.parametrize("beta", [-1.0, 1.0, 2.0, 4.0])
def test_chain_consistency_beta_disappears(beta):
    # shift -> virial -> scaling-law composition gives dT/T = 2 alpha f
    alpha, m, l = 0.03, 1, 2
    energy = -1.7 if beta < 0 else 1.7
    kin = virial_kinetic(energy, beta)
    d_e = deformation_energy_shift(kin, alpha, m, l)
    exponent = 2.0 * beta / (2.0 + beta)
    dt_over_t = (d_e / energy) / exponent
    want = 2.0 * alpha * float(quadrupole_factor(m, l))
    assert abs(dt_over_t - want) <= 1e-10


def test_energy_from_scaling_examples():
    osc = ScalingFit(prefactor=4.0, exponent=1.0, beta=2.0)
    assert energy_from_scaling(0.75, osc) == pytest.approx(3.0)
    hyd = ScalingFit(prefactor=-0.25, exponent=-2.0, beta=-1.0)
    assert energy_from_scaling(1.0, hyd) == pytest.approx(-0.25)
    assert 2.0 * 2.0 / (2.0 + 2.0) == 1.0  # exponent arithmetic for beta = 2
    with pytest.raises(ValueError):
        energy_from_scaling(-1.0, osc)


def _table(labels, energies, provenance="oracle"):
    return SpectrumTable([(lab, e) for lab, e in zip(labels, energies)], provenance)


def _grid_labels(n_max, l_max):
    return [StateLabel(n, l) for n in range(n_max + 1) for l in range(l_max + 1)]


def test_fit_scaling_oscillator_and_hydrogen():
    labels = _grid_labels(3, 3)
    osc = _table(labels, [oscillator_energy(lab.n, lab.l) for lab in labels])
    fit = fit_scaling(osc, TParams(0.5))
    assert fit.prefactor == pytest.approx(4.0, abs=1e-6)
    assert fit.exponent == pytest.approx(1.0, abs=1e-6)
    assert fit.beta == pytest.approx(2.0, abs=1e-5)

    hyd = _table(labels, [hydrogen_energy(lab.n, lab.l) for lab in labels])
    fit = fit_scaling(hyd, TParams(1.0))
    assert fit.exponent == pytest.approx(-2.0, abs=1e-6)
    assert fit.prefactor == pytest.approx(-0.25, abs=1e-6)


def test_fit_scaling_errors():
    labels = _grid_labels(1, 0)
    with pytest.raises(ValueError):
        fit_scaling(_table(labels, [1.0, 2.0]), TParams(0.5))
    labels = _grid_labels(1, 1)
    with pytest.raises(ValueError):
        fit_scaling(_table(labels, [1.0, -2.0, 3.0, 4.0]), TParams(0.5))
    same_t = [StateLabel(0, 0), StateLabel(0, 0, N=1), StateLabel(0, 0, N=2)]
    with pytest.raises(ValueError):
        fit_scaling(_table(same_t, [1.0, 2.0, 3.0]), TParams(0.5))


def test_fit_phi_recovers_exact_values():
    labels = _grid_labels(3, 3)
    osc = _table(labels, [oscillator_energy(lab.n, lab.l) for lab in labels])
    assert abs(fit_phi(osc).phi - 0.5) <= 1e-3
    hyd = _table(labels, [hydrogen_energy(lab.n, lab.l) for lab in labels])
    assert abs(fit_phi(hyd).phi - 1.0) <= 1e-3


def test_fit_phi_hard_wall_band():
    rows = []
    for l in range(0, 12):
        for k in range(1, 6):
            rows.append((StateLabel(k - 1, l), hard_wall_energy(k - 1, l)))
    rows.sort(key=lambda t: t[1])
    table = SpectrumTable(rows[:20], "oracle")
    fit = fit_phi(table)
    assert 0.36 <= fit.phi <= 0.42
    assert fit.ordering_tau > 0.9


def test_fit_phi_requires_l_diversity():
    labels = [StateLabel(n, 1) for n in range(4)]
    with pytest.raises(ValueError):
        fit_phi(_table(labels, [1.0, 2.0, 3.0, 4.0]))


def test_fits_are_deterministic():
    labels = _grid_labels(3, 3)
    osc = _table(labels, [oscillator_energy(lab.n, lab.l) for lab in labels])
    a, b = fit_phi(osc), fit_phi(osc)
    assert a == b
    fa, fb = fit_scaling(osc, TParams(0.5)), fit_scaling(osc, TParams(0.5))
    assert fa == fb


def test_enumerate_levels_hard_wall_ordering():
    got = [lab.spectroscopic() for lab, _ in enumerate_levels(TParams(0.39), 10)]
    assert got == ["1s", "1p", "1d", "2s", "1f", "2p", "1g", "2d", "1h", "3s"]


def test_enumerate_levels_coulomb_degeneracy():
    levels = enumerate_levels(TParams(1.0), 10)
    # T = n + l + 1 shells; ties broken by ascending l
    assert [round(t, 12) for _, t in levels] == [1.0, 2.0, 2.0, 3.0, 3.0, 3.0, 4.0, 4.0, 4.0, 4.0]
    shell2 = [lab for lab, t in levels if t == 2.0]
    assert [lab.l for lab in shell2] == [0, 1]


def test_enumerate_levels_oscillator_degeneracy():
    # T = (2n + l)/2 + 3/4: degenerate shells per oscillator quantum 2n + l
    levels = enumerate_levels(TParams(0.5), 6)
    want = [0.75, 1.25, 1.75, 1.75, 2.25, 2.25]
    assert [round(t, 12) for _, t in levels] == want


def test_enumerate_levels_properties():
    levels = enumerate_levels(TParams(0.39), 30)
    ts = [t for _, t in levels]
    assert ts == sorted(ts)
    assert len({lab for lab, _ in levels}) == 30
    levels_2d = enumerate_levels(TParams(0.39, dimension=2), 10)
    assert all(lab.m is not None for lab, _ in levels_2d)


def test_spectrum_table_roundtrip(tmp_path):
    rows = [(StateLabel(0, 0), 3.0), (StateLabel(0, 1), 5.0),
            (StateLabel(1, 0, m=0, N=2), 7.123456789012)]
    table = SpectrumTable(rows, "oracle")
    path = tmp_path / "t.csv"
    text = table.to_csv(path)
    assert text.splitlines()[0] == "n,l,m,N,E"
    again = SpectrumTable.from_csv(path)
    assert again.labels() == table.labels()
    assert np.allclose(again.energies(), table.energies())
    assert again.to_csv() == text  # bit-exact round trip


def test_spectrum_table_rejects_duplicates():
    with pytest.raises(ValueError):
        SpectrumTable([(StateLabel(0, 0), 1.0), (StateLabel(0, 0), 2.0)], "oracle")


def test_spectrum_table_sorted_tie_break():
    rows = [(StateLabel(1, 0), 2.0), (StateLabel(0, 1), 2.0), (StateLabel(0, 0), 1.0)]
    table = SpectrumTable(rows, "oracle").sorted()
    assert table.labels()[0] == StateLabel(0, 0)
    # tie at E = 2 broken by smaller lambda first: l=0 state (n=1) precedes l=1
    assert table.labels()[1] == StateLabel(1, 0)
