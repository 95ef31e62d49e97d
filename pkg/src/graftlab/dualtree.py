"""Dual trees of weighted multicurves on the flat reference model.

The tree itself is carried by its length function: translation lengths of
curve classes are weighted geometric crossing numbers with the multicurve
components.  The quotient graph (complementary components joined along the
curves) is computed from the trapezoid complex of the defining direction.

The co-collapsing map of a grafted surface is recorded per region as
constant quadratic-form data; its conformal part carries half the cylinder
area and its Hopf part is the negative of the collapsing map's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import NonPeriodicDirection, UnresolvedIntersection
from .flatsurf import (
    Curve,
    Direction,
    FlatSurface,
    FoliationClass,
    TRANSLATION,
    _FlowComplex,
    crossing_count,
    cylinder_decomposition,
    directional_foliation,
)
from .grafting import GraftedSurface, cocollapsing_energy


# ---------------------------------------------------------------------------
# dual graph of a cylinder multicurve
# ---------------------------------------------------------------------------

class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _complementary_graph(s: FlatSurface, d: Direction):
    """Components of the surface minus the direction-d cores, and which
    component each cylinder side lands in.  Returns (n_components,
    sides) with sides[cyl_index] = (component above, component below)."""
    fc = _FlowComplex(s, d)
    traps = sorted(fc.live(), key=lambda t: (t.poly, t.ylo, t.left.x_at(t.ymid)))
    index = {id(t): i for i, t in enumerate(traps)}
    # half-regions: 2*i is the lower half of trap i, 2*i + 1 the upper half
    uf = _UnionFind(2 * len(traps))

    def x_interval(t, y):
        a, b = t.left.x_at(y), t.right.x_at(y)
        return (a, b) if a <= b else (b, a)

    # lateral adjacency through the flow successor
    for t in traps:
        for fwd in (True, False):
            seg = t.right if fwd else t.left
            kind = s.partner(seg.edge)[1]
            nxt, _nfwd, _pid = fc.successor(t, fwd)
            i, j = index[id(t)], index[id(nxt)]
            if kind == TRANSLATION:
                uf.union(2 * i + 1, 2 * j + 1)
                uf.union(2 * i, 2 * j)
            else:
                uf.union(2 * i + 1, 2 * j)
                uf.union(2 * i, 2 * j + 1)

    # vertical adjacency across cut lines and horizontal edges
    for t in traps:
        lo, hi = x_interval(t, t.yhi)
        # (a) interior cut: another trap of the same polygon starts at yhi
        for u in traps:
            if u.poly == t.poly and u.ylo == t.yhi:
                ulo, uhi = x_interval(u, u.ylo)
                if min(hi, uhi) > max(lo, ulo):
                    uf.union(2 * index[id(t)] + 1, 2 * index[id(u)])
        # (b) top boundary on a horizontal polygon edge
        verts = fc.tpolys[t.poly]
        n = len(verts)
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            if a[1] != b[1] or a[1] != t.yhi:
                continue
            elo, ehi = min(a[0], b[0]), max(a[0], b[0])
            if min(hi, ehi) <= max(lo, elo):
                continue
            (q, j), kind = s.partner((t.poly, k))
            sign, c, _ = fc._glue_y((t.poly, k))
            y2 = sign * t.yhi + c
            for u in traps:
                if u.poly != q:
                    continue
                if kind == TRANSLATION and u.ylo == y2:
                    uf.union(2 * index[id(t)] + 1, 2 * index[id(u)])
                elif kind != TRANSLATION and u.yhi == y2:
                    uf.union(2 * index[id(t)] + 1, 2 * index[id(u)] + 1)

    comps: dict[int, int] = {}

    def comp(x: int) -> int:
        r = uf.find(x)
        if r not in comps:
            comps[r] = len(comps)
        return comps[r]

    # map each cylinder to the components its two sides belong to
    cyls = cylinder_decomposition(s, d)
    sides = []
    order = sorted(fc.live(), key=lambda t: (t.poly, t.ylo, t.left.x_at(t.ymid)))
    unclaimed = set(id(t) for t in order)
    cycle_sets = []
    for start in order:
        if id(start) not in unclaimed:
            continue
        members = []
        t, fwd = start, True
        while True:
            members.append(t)
            unclaimed.discard(id(t))
            t, fwd, _pid = fc.successor(t, fwd)
            if t is start and fwd:
                break
        cycle_sets.append(members)
    assert len(cycle_sets) == len(cyls)
    for members in cycle_sets:
        t0 = members[0]
        i = index[id(t0)]
        sides.append((comp(2 * i + 1), comp(2 * i)))
    return len(comps), sides


@dataclass
class DualTreeModel:
    """Length-function model of the tree dual to a weighted multicurve.

    The multicurve is the cylinder-core family of one periodic direction on
    the reference surface; edge k of the quotient graph joins the
    complementary components on the two sides of core k and has length
    equal to its weight.
    """

    foliation: FoliationClass
    n_components: int
    edges: list[tuple[int, int, float]]  # (side_a, side_b, weight)

    @classmethod
    def from_direction(cls, s: FlatSurface, d: Direction,
                       weights: list[float] | None = None) -> "DualTreeModel":
        fol = directional_foliation(s, d)
        if weights is not None:
            if len(weights) != len(fol.entries) or any(w <= 0 for w in weights):
                raise ValueError("need one positive weight per component")
            scale = math.sqrt(fol.weight_scale_sq)
            fol = FoliationClass(
                [(cu, Fraction(w) / 1) for (cu, _), w in zip(fol.entries, weights)],
                Fraction(1), d, s)
            del scale
        n, sides = _complementary_graph(s, d)
        ws = fol.weights
        edges = [(a, b, w) for (a, b), w in zip(sides, ws)]
        return cls(fol, n, edges)

    def translation_length(self, c: Curve) -> float:
        """Distance the curve class translates points of the tree:
        the weighted crossing count with the multicurve."""
        if not isinstance(c, Curve) or not c.segments:
            raise UnresolvedIntersection(
                "need a straight closed curve on the reference surface")
        scale = math.sqrt(self.foliation.weight_scale_sq)
        acc = Fraction(0)
        for cu, w in self.foliation.entries:
            acc += w * crossing_count(cu, c)
        return float(acc) * scale


def translation_length(m: DualTreeModel, c: Curve) -> float:
    return m.translation_length(c)


# ---------------------------------------------------------------------------
# co-collapsing pullback descriptors
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Constant quadratic-form data of the collapse and co-collapse pullbacks
    on one region, in the flat coordinate normalized to the region.

    hopf coefficients are per unit dz^2; conf is the (1,1) density relative
    to the region's own area form.
    """

    kind: str  # "hyperbolic" | "cylinder"
    area: float
    collapse_hopf: Fraction
    cocollapse_hopf: Fraction
    collapse_conf: Fraction
    cocollapse_conf: Fraction


@dataclass(frozen=True)
class PullbackDescriptor:
    regions: tuple[Region, ...]

    def collapse_energy(self) -> float:
        return math.fsum(r.area * float(r.collapse_conf) for r in self.regions)

    def cocollapse_energy(self) -> float:
        return math.fsum(r.area * float(r.cocollapse_conf) for r in self.regions)

    def cocollapse_l1(self) -> float:
        """L1 mass of the co-collapse pullback's conformal part."""
        return self.cocollapse_energy()


def cocollapse_descriptor(g: GraftedSurface) -> PullbackDescriptor:
    """Per-region forms: the collapse restricts to dx^2 on each cylinder and
    to the full metric off them; the co-collapse is dy^2 on cylinders and
    zero elsewhere.  Hopf parts are +1/4 and -1/4 per unit dz^2."""
    regions = [Region("hyperbolic", g.hyperbolic_area,
                      Fraction(0), Fraction(0), Fraction(1), Fraction(0))]
    for area in g.cylinder_areas:
        regions.append(Region("cylinder", area,
                              Fraction(1, 4), Fraction(-1, 4),
                              Fraction(1, 2), Fraction(1, 2)))
    desc = PullbackDescriptor(tuple(regions))
    # consistency with the closed-form energy
    want = cocollapsing_energy(g)
    if abs(desc.cocollapse_energy() - want) > 1e-9 * max(1.0, want):
        raise UnresolvedIntersection("descriptor mass disagrees with energy")
    return desc


def projection_energy(s: FlatSurface, d: Direction) -> tuple[float, float]:
    """Energy of the leaf-space projection for the direction-d foliation and
    its constant Hopf coefficient: (area/2, -1/4)."""
    cylinder_decomposition(s, d)  # raises NonPeriodicDirection if not periodic
    return float(s.qd_area()) / 2, -0.25
