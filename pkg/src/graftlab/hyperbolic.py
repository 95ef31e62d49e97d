"""Hyperbolic structures via Fenchel-Nielsen coordinates.

The genus-2 desk surface uses the dumbbell pants decomposition: curve 1 is
the first handle curve, curve 2 the second, curve 3 the separating curve.
Holonomy matrices are assembled from right-angled hexagon data:

  * a one-holed torus with handle length l and boundary length L has
    a = E(l) (translation along the imaginary axis) and b = F(s) E(tau),
    where cosh(s) = (cosh(L/2) + cosh(l/2)^2) / sinh(l/2)^2 is the seam of
    the (l, l, L) pair of pants; the commutator [a, b] then has trace
    exactly -2 cosh(L/2) and is independent of the twist tau;
  * the second one-holed torus is conjugated so that its boundary is the
    inverse of the first one's, with the twist in curve 3 realized by a
    translation along the common boundary axis.

The surface-group relator is the product of the two commutators and closes
up to machine precision by construction.  Matrix arithmetic is done in
extended precision (80-bit long double).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHexagon, NonHyperbolicElement

LD = np.longdouble

GENERATORS = ("a1", "b1", "a2", "b2")
_INVERSE = {"a1": "A1", "b1": "B1", "a2": "A2", "b2": "B2",
            "A1": "a1", "B1": "b1", "A2": "a2", "B2": "b2"}


def _mat(a, b, c, d) -> np.ndarray:
    return np.array([[a, b], [c, d]], dtype=LD)


def _E(length) -> np.ndarray:
    """Translation by `length` along the imaginary axis (0 -> infinity)."""
    h = LD(length) / 2
    return _mat(np.exp(h), 0, 0, np.exp(-h))


def _F(dist) -> np.ndarray:
    """Translation by `dist` along the unit semicircle through i."""
    h = LD(dist) / 2
    return _mat(np.cosh(h), np.sinh(h), np.sinh(h), np.cosh(h))


def _inv(m: np.ndarray) -> np.ndarray:
    return _mat(m[1, 1], -m[0, 1], -m[1, 0], m[0, 0])


def seam_length(l_a: float, l_b: float, l_opp: float) -> float:
    """Seam of a pair of pants between the cuffs of lengths l_a, l_b,
    opposite the cuff of length l_opp (right-angled hexagon relation)."""
    xa, xb, xo = LD(l_a) / 2, LD(l_b) / 2, LD(l_opp) / 2
    with np.errstate(over="ignore"):
        denom = np.sinh(xa) * np.sinh(xb)
        if denom == 0 or not np.isfinite(denom):
            raise DegenerateHexagon(f"cuff lengths {l_a}, {l_b} out of range")
        val = (np.cosh(xo) + np.cosh(xa) * np.cosh(xb)) / denom
    if not np.isfinite(val):
        raise DegenerateHexagon(f"cuff lengths {l_a}, {l_b} out of range")
    if val <= 1:
        raise DegenerateHexagon("hexagon relation has no solution")
    return float(np.arccosh(val))


def _axis_frame(m: np.ndarray) -> np.ndarray:
    """SL2 matrix taking the oriented imaginary axis to the oriented axis of
    the hyperbolic element m (repelling fixed point to 0, attracting to oo)."""
    tr = m[0, 0] + m[1, 1]
    disc = tr * tr - 4
    if disc <= 0:
        raise NonHyperbolicElement("axis requested for a non-hyperbolic element")
    sq = np.sqrt(disc)
    lam_plus = (tr + sq) / 2 if tr > 0 else (tr - sq) / 2  # |lam_plus| > 1
    c = m[1, 0]
    if abs(c) > LD(1e-300):
        z_att = (lam_plus - m[1, 1]) / c
        lam_minus = 1 / lam_plus
        z_rep = (lam_minus - m[1, 1]) / c
        g = _mat(z_att, z_rep, 1, 1)
        det = z_att - z_rep
        if det > 0:
            return g / np.sqrt(det)
        g = _mat(z_att, -z_rep, 1, -1)
        return g / np.sqrt(-det)
    # fixed point at infinity
    z_fin = m[0, 1] / (m[1, 1] - m[0, 0])
    if abs(m[0, 0]) > abs(m[1, 1]):
        # attracting at infinity: map (0, oo) -> (z_fin, oo)
        return _mat(1, z_fin, 0, 1)
    # attracting at z_fin: map (0, oo) -> (oo, z_fin): use z -> z_fin - 1/z
    return _mat(z_fin, -1, 1, 0)


# ---------------------------------------------------------------------------
# types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PantsDecomposition:
    """Trivalent gluing graph; vertices are pants, edges are curves.

    edges[k] = (vertex, vertex); a handle appears as a loop.  The standard
    genus-2 dumbbell is edges = ((0,0), (1,1), (0,1)).
    """

    n_vertices: int
    edges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        deg = [0] * self.n_vertices
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        if any(d != 3 for d in deg):
            raise ValueError("pants graph must be trivalent")
        g = self.genus
        if len(self.edges) != 3 * g - 3 or self.n_vertices != 2 * g - 2:
            raise ValueError("edge/vertex counts inconsistent with a closed surface")
        # connectivity
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for a, b in self.edges:
                for x, y in ((a, b), (b, a)):
                    if x == v and y not in seen:
                        seen.add(y)
                        stack.append(y)
        if len(seen) != self.n_vertices:
            raise ValueError("pants graph must be connected")

    @property
    def genus(self) -> int:
        return len(self.edges) - self.n_vertices + 1

    @classmethod
    def genus2_dumbbell(cls) -> "PantsDecomposition":
        return cls(2, ((0, 0), (1, 1), (0, 1)))


@dataclass(frozen=True)
class FNCoords:
    """Per pants curve: length > 0 and twist (in length units)."""

    lengths: tuple[float, ...]
    twists: tuple[float, ...]

    def __post_init__(self):
        if len(self.lengths) != len(self.twists):
            raise ValueError("need one twist per length")
        if any(l <= 0 for l in self.lengths):
            raise ValueError("pants curve lengths must be positive")


@dataclass(frozen=True)
class CurveClass:
    """Cyclically reduced word in the generators a1, b1, a2, b2 (capital
    letters are inverses), or a pants-curve label via from_pants_curve."""

    letters: tuple[str, ...]

    def __post_init__(self):
        if not self.letters:
            raise ValueError("empty word")
        for x in self.letters:
            if x not in _INVERSE:
                raise ValueError(f"unknown generator {x!r}")
        n = len(self.letters)
        for i in range(n):
            if n > 1 and self.letters[(i + 1) % n] == _INVERSE[self.letters[i]]:
                raise ValueError("word is not cyclically reduced")

    @classmethod
    def parse(cls, text: str) -> "CurveClass":
        return cls(tuple(text.split()))

    @classmethod
    def from_pants_curve(cls, label: int) -> "CurveClass":
        if label == 1:
            return cls(("a1",))
        if label == 2:
            return cls(("a2",))
        if label == 3:
            return cls(("a1", "b1", "A1", "B1"))
        raise ValueError(f"no pants curve labelled {label}")

    def power(self, k: int) -> "CurveClass":
        return CurveClass(self.letters * k)

    def __str__(self) -> str:
        return " ".join(self.letters)


@dataclass
class HolonomyRep:
    """Matrices for the free generators, with the pants data that built them."""

    matrices: dict[str, np.ndarray]
    pants: PantsDecomposition
    fn: FNCoords
    relator_residual: float = field(init=False)

    def __post_init__(self):
        rel = self.word_matrix(CurveClass(("a1", "b1", "A1", "B1")))
        rel = rel @ self.word_matrix(CurveClass(("a2", "b2", "A2", "B2")))
        eye = np.eye(2, dtype=LD)
        res = float(min(np.abs(rel - eye).max(), np.abs(rel + eye).max()))
        self.relator_residual = res

    def word_matrix(self, c: CurveClass) -> np.ndarray:
        m = np.eye(2, dtype=LD)
        for x in c.letters:
            base = x.lower()
            g = self.matrices[base]
            m = m @ (g if x.islower() else _inv(g))
        return m


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def holonomy_from_fn(pants: PantsDecomposition, fn: FNCoords) -> HolonomyRep:
    """Holonomy of the genus-2 dumbbell surface with the given FN data."""
    if pants != PantsDecomposition.genus2_dumbbell():
        raise DegenerateHexagon(
            "explicit holonomy is implemented for the genus-2 dumbbell only")
    if len(fn.lengths) != 3:
        raise ValueError("genus 2 needs three pants curves")
    l1, l2, l3 = fn.lengths
    t1, t2, t3 = fn.twists

    s1 = seam_length(l1, l1, l3)
    s2 = seam_length(l2, l2, l3)

    a1 = _E(l1)
    b1 = _F(s1) @ _E(t1)
    c = a1 @ b1 @ _inv(a1) @ _inv(b1)

    a2t = _E(l2)
    b2t = _F(s2) @ _E(t2)
    ct = a2t @ b2t @ _inv(a2t) @ _inv(b2t)

    want = -2 * np.cosh(LD(l3) / 2)
    for m in (c, ct):
        if abs((m[0, 0] + m[1, 1]) - want) > LD(1e-9) * max(1, abs(want)):
            raise DegenerateHexagon("hexagon matrices lost precision")

    # conjugate the second handle so that [a2, b2] = c^{-1}, twisted along
    # the axis of c by t3
    g_ct = _axis_frame(ct)
    g_cinv = _axis_frame(_inv(c))
    q = g_cinv @ _E(t3) @ _inv(g_ct)
    a2 = q @ a2t @ _inv(q)
    b2 = q @ b2t @ _inv(q)

    rep = HolonomyRep({"a1": a1, "b1": b1, "a2": a2, "b2": b2}, pants, fn)
    if rep.relator_residual > 1e-9:
        raise DegenerateHexagon(
            f"relator residual {rep.relator_residual} out of tolerance")
    return rep


def geodesic_length(rep: HolonomyRep, c: CurveClass) -> float:
    """Translation length 2*arccosh(|trace| / 2) of the word's holonomy."""
    m = rep.word_matrix(c)
    tr = abs(float(m[0, 0] + m[1, 1]))
    if tr <= 2 + 1e-12:
        raise NonHyperbolicElement(f"|trace| = {tr} <= 2 for word {c}")
    return 2 * math.acosh(tr / 2)


@dataclass(frozen=True)
class WeightedMulticurve:
    """Disjoint pants curves with positive weights: components (label, weight)."""

    components: tuple[tuple[int, float], ...]

    def __post_init__(self):
        from .errors import NonDisjointCurves, NonPantsCurve
        labels = [lab for lab, _ in self.components]
        if not labels:
            raise NonPantsCurve("empty multicurve")
        for lab, w in self.components:
            if lab not in (1, 2, 3):
                raise NonPantsCurve(f"label {lab} is not a pants curve")
            if w <= 0:
                raise ValueError("weights must be positive")
        if len(set(labels)) != len(labels):
            raise NonDisjointCurves("repeated component")


def multicurve_length(rep: HolonomyRep, mc: WeightedMulticurve) -> float:
    """Weighted hyperbolic length sum over the components."""
    return math.fsum(
        w * geodesic_length(rep, CurveClass.from_pants_curve(lab))
        for lab, w in mc.components)


DEFAULT_PROBES = tuple(CurveClass.parse(w) for w in
                       ("a1", "a2", "b1", "b2", "a1 b1", "a2 b2"))


def length_ratio_vector(rep: HolonomyRep,
                        probes: tuple[CurveClass, ...] = DEFAULT_PROBES) -> list[float]:
    """Probe lengths normalized to unit sum (projectivized length data)."""
    vals = [geodesic_length(rep, c) for c in probes]
    total = math.fsum(vals)
    return [v / total for v in vals]


def hyperbolic_area(genus: int) -> float:
    """Area of a closed hyperbolic surface: 2*pi*|chi|."""
    return 2 * math.pi * abs(2 - 2 * genus)


# ---------------------------------------------------------------------------
# FN files
# ---------------------------------------------------------------------------

def load_fn(path_or_text: str, *, is_text: bool = False) -> tuple[PantsDecomposition, FNCoords]:
    """Parse an FN file: `curve K length L twist T` lines (genus-2 dumbbell)."""
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as fh:
            text = fh.read()
    lengths: dict[int, float] = {}
    twists: dict[int, float] = {}
    for ln in text.splitlines():
        ln = ln.split("#", 1)[0].strip()
        if not ln:
            continue
        toks = ln.split()
        if toks[0] != "curve":
            raise ValueError(f"unparsable FN line: {ln!r}")
        k = int(toks[1])
        data = dict(zip(toks[2::2], toks[3::2]))
        lengths[k] = float(data["length"])
        twists[k] = float(data.get("twist", 0.0))
    keys = sorted(lengths)
    if keys != [1, 2, 3]:
        raise ValueError("FN file must define curves 1, 2, 3")
    fn = FNCoords(tuple(lengths[k] for k in keys), tuple(twists[k] for k in keys))
    return PantsDecomposition.genus2_dumbbell(), fn
