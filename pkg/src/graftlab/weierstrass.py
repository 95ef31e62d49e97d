"""Weierstrass elliptic function on the square lattice 2Z + 2iZ.

Evaluation is by reduction to the centered fundamental domain followed by
the Laurent series at the origin, whose coefficients come from the
standard quadratic recursion in g2 and g3.  For the square (lemniscatic)
lattice g3 vanishes and g2 is computed from the weight-4 Eisenstein
q-series at tau = i, where q = e^{-2 pi} makes three terms plenty.

A positive scale c gives the lattice c*(2Z + 2iZ), with the homogeneity
g2(cL) = g2(L)/c^4; this powers the two-scale consistency oracle
wp(cz; cL) = wp(z; L) / c^2.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import PoleAt

_MAX_TERMS = 220


def _eisenstein_e4_tau_i() -> float:
    q = math.exp(-2 * math.pi)
    acc = 1.0
    for n in range(1, 40):
        qn = q ** n
        acc += 240 * n ** 3 * qn / (1 - qn)
    return acc


_G2_UNIT_SQUARE = (2 * math.pi) ** 4 / 12 * _eisenstein_e4_tau_i()  # for Z + iZ


@dataclass(frozen=True)
class RectLattice:
    """The lattice c*(2Z + 2iZ); scale defaults to the paper-scale torus."""

    scale: float = 1.0

    @property
    def half_period(self) -> float:
        return self.scale

    @property
    def g2(self) -> float:
        # g2(Z + iZ) scaled by (2*scale)^-4
        return _G2_UNIT_SQUARE / (2 * self.scale) ** 4

    @property
    def g3(self) -> float:
        return 0.0  # lemniscatic lattice

    def reduce(self, z: complex) -> complex:
        """Translate into the centered fundamental domain."""
        p = 2 * self.scale
        return complex(z.real - p * round(z.real / p),
                       z.imag - p * round(z.imag / p))


def _laurent_coeffs(g2: float, g3: float, count: int) -> list[float]:
    c = [0.0] * (count + 1)
    if count >= 1:
        c[1] = g2 / 20
    if count >= 2:
        c[2] = g3 / 28
    for k in range(3, count + 1):
        s = sum(c[m] * c[k - 1 - m] for m in range(1, k - 1))
        c[k] = 3 * s / ((2 * k + 3) * (k - 2))
    return c


_COEFF_CACHE: dict[float, list[float]] = {}


def _coeffs(lattice: RectLattice) -> list[float]:
    key = lattice.scale
    if key not in _COEFF_CACHE:
        _COEFF_CACHE[key] = _laurent_coeffs(lattice.g2, lattice.g3, 80)
    return _COEFF_CACHE[key]


def wp(z: complex, lattice: RectLattice = RectLattice()) -> complex:
    """Weierstrass P at z, with tail below 1e-12 on the reduced domain."""
    z0 = lattice.reduce(complex(z))
    r = abs(z0)
    if r < 1e-8 * lattice.scale:
        raise PoleAt(f"wp has a pole at lattice point near {z}")
    c = _coeffs(lattice)
    z2 = z0 * z0
    acc = 1 / z2
    term = complex(1.0)
    small = 0
    for k in range(1, len(c)):
        term *= z2
        inc = c[k] * term
        acc += inc
        # half the coefficients vanish on the square lattice, so demand two
        # consecutive negligible terms before trusting the tail
        small = small + 1 if abs(inc) < 1e-17 * max(1.0, abs(acc)) else 0
        if small >= 2 and k > 4:
            break
    return acc


def wp_prime(z: complex, lattice: RectLattice = RectLattice()) -> complex:
    """Derivative of wp, from the term-by-term differentiated series."""
    z0 = lattice.reduce(complex(z))
    if abs(z0) < 1e-8 * lattice.scale:
        raise PoleAt(f"wp' has a pole at lattice point near {z}")
    c = _coeffs(lattice)
    acc = -2 / (z0 * z0 * z0)
    zp = z0
    z2 = z0 * z0
    small = 0
    for k in range(1, len(c)):
        inc = 2 * k * c[k] * zp
        acc += inc
        zp *= z2
        small = small + 1 if abs(inc) < 1e-17 * max(1.0, abs(acc)) else 0
        if small >= 2 and k > 4:
            break
    return acc


def ode_residual(z: complex, lattice: RectLattice = RectLattice()) -> float:
    """|wp'^2 - (4 wp^3 - g2 wp - g3)| at z, relative to the term size."""
    p = wp(z, lattice)
    dp = wp_prime(z, lattice)
    lhs = dp * dp
    rhs = 4 * p ** 3 - lattice.g2 * p - lattice.g3
    scale = max(1.0, abs(lhs), abs(rhs))
    return abs(lhs - rhs) / scale
