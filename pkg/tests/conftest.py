"""Shared closed-form oracles for the test suite."""
from scipy.optimize import brentq
from scipy.special import jn_zeros, spherical_jn


def spherical_bessel_zero(l: int, k: int) -> float:
    """k-th positive zero of the spherical Bessel function j_l (k >= 1)."""
    zeros, z, step = [], 0.05, 0.05
    prev = spherical_jn(l, z)
    while len(zeros) < k:
        z2 = z + step
        cur = spherical_jn(l, z2)
        if prev * cur < 0:
            zeros.append(brentq(lambda t: spherical_jn(l, t), z, z2, xtol=1e-14))
        z, prev = z2, cur
    return zeros[k - 1]


def hard_wall_energy(n: int, l: int, R: float = 1.0) -> float:
    return (spherical_bessel_zero(l, n + 1) / R) ** 2


def hard_disk_energy(n: int, m: int, R: float = 1.0) -> float:
    return (jn_zeros(m, n + 1)[n] / R) ** 2


def oscillator_energy(n: int, l: int) -> float:
    """V = r^2 in hbar = 2m = 1 units."""
    return float(4 * n + 2 * l + 3)


def hydrogen_energy(n: int, l: int) -> float:
    """V = -1/r in hbar = 2m = 1 units."""
    return -1.0 / (4.0 * (n + l + 1) ** 2)


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / abs(want)
