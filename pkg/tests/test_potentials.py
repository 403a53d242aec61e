import math

import numpy as np
import pytest

from tnum.errors import ConfigError
from tnum.potentials import (IMPENETRABLE, DeformationSpec, HardWallCavity,
                             PowerLaw, Problem, TabulatedPotential,
                             deformed_evaluate, potential_from_config,
                             tabulated_from_csv)


def test_power_law_values():
    assert PowerLaw(2, 1.0, 1.0)(2.0) == 4.0
    assert PowerLaw(-1, -1.0)(2.0) == -0.5


def test_hard_wall_values():
    wall = HardWallCavity(1.0)
    assert wall(0.5) == 0.0
    assert wall(1.2) == IMPENETRABLE
    assert math.isinf(wall(1.0))


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        PowerLaw(2, 1.0)(-0.1)


@pytest.mark.parametrize("beta,coeff", [(0, 1.0), (-2, -1.0), (2, -1.0), (-1, 1.0), (-3, -1.0)])
def test_power_law_validation(beta, coeff):
    with pytest.raises(ValueError):
        PowerLaw(beta, coeff)


@pytest.mark.parametrize("beta", [-1, 1, 2, 4])
def test_power_law_monotone(beta):
    coeff = -1.0 if beta < 0 else 1.0
    pot = PowerLaw(beta, coeff)
    r = np.linspace(0.05, 6.0, 300)
    v = pot(r)
    assert np.all(np.diff(v) > 0)


def test_evaluate_is_pure():
    pot = PowerLaw(2, 1.0)
    assert pot(1.7) == pot(1.7)


def test_tabulated_basics():
    pot = TabulatedPotential([[0, 0], [1, 1], [2, 4], [3, 9], [4, 16]])
    assert pot(2.0) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        pot(5.0)
    with pytest.raises(ValueError):
        TabulatedPotential([[0, 0], [1, 1], [1, 2], [3, 4]])
    with pytest.raises(ValueError):
        TabulatedPotential([[-1, 0], [1, 1], [2, 2], [3, 4]])


def test_tabulated_monotone_interpolation():
    # monotone data stays monotone between knots (no spurious turning points)
    r = np.linspace(0, 3, 10)
    pot = TabulatedPotential(np.column_stack([r, r ** 3]))
    dense = np.linspace(0, 3, 2000)
    assert np.all(np.diff(pot(dense)) >= 0)


def test_problem_dimension():
    with pytest.raises(ValueError):
        Problem(PowerLaw(2, 1.0), dimension=4)


@pytest.mark.parametrize("alpha", [0.01, 0.05, 0.1, 0.2])
def test_volume_preservation(alpha):
    spec = DeformationSpec(alpha=alpha, R=1.0)
    assert abs(spec.a ** 2 * spec.c - 1.0) <= alpha ** 2


def test_deformation_guard():
    with pytest.raises(ValueError):
        DeformationSpec(alpha=0.25)
    DeformationSpec(alpha=0.25, max_alpha=0.3)  # guard is configurable


def test_deformed_identity_at_zero_alpha():
    pot = PowerLaw(4, 2.0, R=1.5)
    spec = DeformationSpec(alpha=0.0, R=1.5)
    rng = np.random.default_rng(7)
    for _ in range(20):
        x, y, z = rng.uniform(-1, 1, 3)
        r = math.sqrt(x * x + y * y + z * z)
        assert deformed_evaluate(pot, spec, x, y, z) == pytest.approx(pot(r), rel=1e-15)


def test_deformed_oscillator_axis_point():
    # on the z axis the oscillator value is z^2/c^2, c = 1.0667 R
    pot = PowerLaw(2, 1.0, R=1.0)
    spec = DeformationSpec(alpha=0.1, R=1.0)
    z = 0.7
    assert spec.c == pytest.approx(1.0 + 0.2 / 3.0)
    assert deformed_evaluate(pot, spec, 0.0, 0.0, z) == pytest.approx(z * z / spec.c ** 2, rel=1e-14)


def test_config_round_trip():
    for pot in (PowerLaw(2, 1.0, 3.0), HardWallCavity(2.5),
                TabulatedPotential([[0, 0], [1, 1], [2, 4], [3, 9]])):
        again = potential_from_config(pot.to_config())
        assert type(again) is type(pot)
        assert again(1.0) == pytest.approx(pot(1.0))


def test_config_errors():
    with pytest.raises(ConfigError):
        potential_from_config({"type": "mystery"})
    with pytest.raises(ConfigError):
        potential_from_config({"type": "power_law", "beta": 2})
    with pytest.raises(ConfigError):
        potential_from_config({"type": "power_law", "beta": 0, "coeff": 1})


def test_tabulated_from_csv(tmp_path):
    path = tmp_path / "well.csv"
    path.write_text("r,V\n0,0\n1,1\n2,4\n3,9\n")
    pot = tabulated_from_csv(path)
    assert pot(2.0) == pytest.approx(4.0)
    # header optional
    path2 = tmp_path / "bare.csv"
    path2.write_text("0,0\n1,1\n2,4\n3,9\n")
    assert tabulated_from_csv(path2)(2.0) == pytest.approx(4.0)
