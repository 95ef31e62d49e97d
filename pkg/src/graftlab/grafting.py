"""Grafting along weighted pants curves with explicit energy bookkeeping.

A grafted surface is carried as its region inventory: the hyperbolic part
(area 2*pi*|chi|) plus one Euclidean cylinder of circumference l_i and
height t_i per component.  The collapsing map is an isometry off the
cylinders and the orthogonal projection on them, so its energy and the
energy of the leaf-space projection are exact closed forms:

    E(collapse)    = sum(t_i l_i) / 2 + 2 pi |chi|
    E(co-collapse) = sum(t_i l_i) / 2
    L1 norm of the collapse Hopf field = sum(t_i l_i) / 4

The extremal length of a single grafted curve is certified by the interval
[ (t l)^2 / (t l + 2 pi |chi|),  t l ]: the lower bound is length^2/area in
the composite metric (the collapsing map is distance nonincreasing, so no
homotopic curve is shorter than l), the upper bound is weight^2 times the
reciprocal modulus of the embedded cylinder.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import MissingEnergyInput, NonPantsCurve
from .hyperbolic import (
    CurveClass,
    FNCoords,
    HolonomyRep,
    PantsDecomposition,
    WeightedMulticurve,
    geodesic_length,
    holonomy_from_fn,
)

TWO_PI_CHI_GENUS2 = 4 * math.pi


@dataclass
class GraftedSurface:
    """Composite surface: hyperbolic part of Y plus grafted cylinders."""

    base_fn: FNCoords
    lamination: WeightedMulticurve
    rep: HolonomyRep
    circumferences: tuple[float, ...] = field(init=False)
    hyperbolic_area: float = field(init=False)

    def __post_init__(self):
        circs = []
        for label, _w in self.lamination.components:
            c = CurveClass.from_pants_curve(label)
            length = geodesic_length(self.rep, c)
            fn_len = self.base_fn.lengths[label - 1]
            if abs(length - fn_len) > 1e-9 * max(1.0, fn_len):
                raise NonPantsCurve(
                    f"holonomy length {length} disagrees with FN length {fn_len}")
            circs.append(length)
        self.circumferences = tuple(circs)
        genus = self.rep.pants.genus
        self.hyperbolic_area = 2 * math.pi * abs(2 - 2 * genus)

    @property
    def weights(self) -> tuple[float, ...]:
        return tuple(w for _l, w in self.lamination.components)

    @property
    def lamination_length(self) -> float:
        """Hyperbolic length of the lamination on the base surface."""
        return math.fsum(w * l for w, l in zip(self.weights, self.circumferences))

    @property
    def cylinder_areas(self) -> tuple[float, ...]:
        return tuple(w * l for w, l in zip(self.weights, self.circumferences))

    @property
    def thurston_area(self) -> float:
        return self.hyperbolic_area + math.fsum(self.cylinder_areas)


def graft(y: FNCoords, lam: WeightedMulticurve,
          pants: PantsDecomposition | None = None) -> GraftedSurface:
    """Insert a flat cylinder of height t_i along each weighted pants curve."""
    pants = pants or PantsDecomposition.genus2_dumbbell()
    rep = holonomy_from_fn(pants, y)
    return GraftedSurface(y, lam, rep)


def collapsing_energy(g: GraftedSurface) -> float:
    """Energy of the map collapsing the cylinders back to their geodesics."""
    return cocollapsing_energy(g) + g.hyperbolic_area


def cocollapsing_energy(g: GraftedSurface) -> float:
    """Energy of the co-collapsing map to the dual tree: half the cylinder area."""
    return g.lamination_length / 2


def hopf_norm(g: GraftedSurface) -> float:
    """L1 norm of the collapsing map's Hopf field: quarter of the cylinder area."""
    return cocollapsing_energy(g) / 2


@dataclass(frozen=True)
class EnergyReport:
    lamination_length: float
    collapse_energy: float
    cocollapse_energy: float
    hopf_norm: float
    extremal_bounds: tuple[float, float] | None
    area_constant: float

    @classmethod
    def of(cls, g: GraftedSurface) -> "EnergyReport":
        bounds = None
        if len(g.lamination.components) == 1:
            bounds = extremal_length_bounds(g)
        return cls(
            lamination_length=g.lamination_length,
            collapse_energy=collapsing_energy(g),
            cocollapse_energy=cocollapsing_energy(g),
            hopf_norm=hopf_norm(g),
            extremal_bounds=bounds,
            area_constant=g.hyperbolic_area,
        )


def extremal_length_bounds(g: GraftedSurface) -> tuple[float, float]:
    """Certified interval for the extremal length of the grafted curve t*gamma."""
    if len(g.lamination.components) != 1:
        raise NonPantsCurve("extremal bounds need a single-component lamination")
    tl = g.lamination_length
    area = tl + g.hyperbolic_area
    return (tl * tl / area, tl)


def annulus_modulus_upper_bound(g: GraftedSurface) -> float:
    """Independent route to the upper bound: t^2 / modulus of the embedded
    cylinder, with modulus = height / circumference."""
    if len(g.lamination.components) != 1:
        raise NonPantsCurve("single-component lamination required")
    t = g.weights[0]
    ell = g.circumferences[0]
    modulus = t / ell
    return t * t / modulus


@dataclass(frozen=True)
class SandwichReport:
    """The two-sided bound on the discrete harmonic energy of the collapse
    class, checked to a stated mesh tolerance."""

    lamination_length: float
    harmonic_energy: float
    collapse_energy: float
    delta: float
    minsky_lower: float
    checks: tuple[tuple[str, bool, float], ...]

    @property
    def all_pass(self) -> bool:
        return all(ok for _n, ok, _m in self.checks)


def energy_sandwich_check(g: GraftedSurface, harmonic_energy: float,
                          delta: float) -> SandwichReport:
    """Verify the two-sided energy comparison for a discrete harmonic energy.

    The four inequalities, each allowed slack delta from the mesh:
      1. l/2 <= l^2 / (2 E_hi)                (exact algebra, E_hi = t*l)
      2. l^2 / (2 E_hi) <= E_h + delta        (length-distortion lower bound)
      3. E_h <= l/2 + 2 pi |chi| + delta      (collapse energy upper bound)
      4. 0 <= E(cl) - E_h <= 2 pi |chi| + delta
    """
    if harmonic_energy is None or not math.isfinite(harmonic_energy):
        raise MissingEnergyInput("need a finite discrete harmonic energy")
    ell = g.lamination_length
    e_cl = collapsing_energy(g)
    _e_lo, e_hi = extremal_length_bounds(g)
    minsky = ell * ell / (2 * e_hi)
    checks = (
        ("half_length_le_minsky", ell / 2 <= minsky + 1e-12, minsky - ell / 2),
        ("minsky_le_harmonic", minsky <= harmonic_energy + delta,
         harmonic_energy + delta - minsky),
        ("harmonic_le_collapse", harmonic_energy <= e_cl + delta,
         e_cl + delta - harmonic_energy),
        ("collapse_gap_in_area", -delta <= e_cl - harmonic_energy
         <= g.hyperbolic_area + delta,
         g.hyperbolic_area + delta - (e_cl - harmonic_energy)),
    )
    return SandwichReport(ell, harmonic_energy, e_cl, delta, minsky, checks)


@dataclass(frozen=True)
class NormGapReport:
    """Margin data for |4 * hopf_norm - E| <= sqrt(2) A + 2 sqrt(A) sqrt(E)
    quantified over the certified extremal-length interval."""

    bounds: tuple[float, float]
    min_margin: float
    passed: bool


def hopf_norm_gap_check(g: GraftedSurface) -> NormGapReport:
    """Necessary norm consequence of the Hopf-versus-holomorphic comparison,
    checked for every extremal-length value in the certified interval."""
    e_lo, e_hi = extremal_length_bounds(g)
    a = g.hyperbolic_area
    four_hopf = 4 * hopf_norm(g)

    def margin(e: float) -> float:
        lhs = abs(four_hopf - e)
        rhs = math.sqrt(2) * a + 2 * math.sqrt(a) * math.sqrt(e)
        return rhs - lhs

    # lhs is |t*l - E|, decreasing in E on the interval (E <= E_hi = t*l)
    # while rhs increases, so the minimum margin sits at E_lo; scan a grid
    # anyway to report an honest minimum.
    grid = [e_lo + (e_hi - e_lo) * k / 64 for k in range(65)]
    m = min(margin(e) for e in grid)
    return NormGapReport((e_lo, e_hi), m, m >= 0)


def pruning_divergence_scan(y: FNCoords, curve_label: int,
                            t_grid: list[float],
                            pants: PantsDecomposition | None = None
                            ) -> list[tuple[float, float, float]]:
    """Rows (t, l(t*gamma, Y), l/2): the lower bound for the harmonic energy
    of the collapse class diverges along the grid, the finite mechanism
    behind properness of the pruning family."""
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])) or not t_grid:
        raise ValueError("need an increasing positive grid")
    if t_grid[0] <= 0:
        raise ValueError("need an increasing positive grid")
    pants = pants or PantsDecomposition.genus2_dumbbell()
    rep = holonomy_from_fn(pants, y)
    ell = geodesic_length(rep, CurveClass.from_pants_curve(curve_label))
    return [(t, t * ell, t * ell / 2) for t in t_grid]
