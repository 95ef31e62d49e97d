"""Tests for Fenchel-Nielsen holonomy and length functions."""

import math
import random

import pytest

from graftlab.errors import DegenerateHexagon, NonHyperbolicElement
from graftlab.hyperbolic import (
    CurveClass,
    FNCoords,
    HolonomyRep,
    PantsDecomposition,
    WeightedMulticurve,
    geodesic_length,
    holonomy_from_fn,
    hyperbolic_area,
    length_ratio_vector,
    load_fn,
    multicurve_length,
    seam_length,
)


@pytest.fixture(scope="module")
def rep222():
    return holonomy_from_fn(PantsDecomposition.genus2_dumbbell(),
                            FNCoords((2.0, 2.0, 2.0), (0.0, 0.0, 0.0)))


def mpmath_oracle_length(lengths, twists, word, dps=50):
    """Independent high-precision re-implementation of the holonomy build."""
    import mpmath as mp
    mp.mp.dps = dps

    def E(l):
        return mp.matrix([[mp.e ** (l / 2), 0], [0, mp.e ** (-l / 2)]])

    def F(s):
        return mp.matrix([[mp.cosh(s / 2), mp.sinh(s / 2)],
                          [mp.sinh(s / 2), mp.cosh(s / 2)]])

    def inv(m):
        return mp.matrix([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

    def seam(la, lb, lo):
        v = (mp.cosh(lo / 2) + mp.cosh(la / 2) * mp.cosh(lb / 2)) / (
            mp.sinh(la / 2) * mp.sinh(lb / 2))
        return mp.acosh(v)

    def frame(m):
        tr = m[0, 0] + m[1, 1]
        sq = mp.sqrt(tr * tr - 4)
        lam = (tr + sq) / 2 if tr > 0 else (tr - sq) / 2
        c = m[1, 0]
        z_att = (lam - m[1, 1]) / c
        z_rep = (1 / lam - m[1, 1]) / c
        g = mp.matrix([[z_att, z_rep], [1, 1]])
        det = z_att - z_rep
        if det > 0:
            return g / mp.sqrt(det)
        return mp.matrix([[z_att, -z_rep], [1, -1]]) / mp.sqrt(-det)

    l1, l2, l3 = [mp.mpf(x) for x in lengths]
    t1, t2, t3 = [mp.mpf(x) for x in twists]
    a1 = E(l1)
    b1 = F(seam(l1, l1, l3)) * E(t1)
    c = a1 * b1 * inv(a1) * inv(b1)
    a2t = E(l2)
    b2t = F(seam(l2, l2, l3)) * E(t2)
    ct = a2t * b2t * inv(a2t) * inv(b2t)
    q = frame(inv(c)) * E(t3) * inv(frame(ct))
    mats = {"a1": a1, "b1": b1, "a2": q * a2t * inv(q), "b2": q * b2t * inv(q)}
    m = mp.eye(2)
    for x in word.split():
        g = mats[x.lower()]
        m = m * (g if x.islower() else inv(g))
    return float(2 * mp.acosh(abs(m[0, 0] + m[1, 1]) / 2))


class TestConstruction:
    def test_relator_residual(self, rep222):
        assert rep222.relator_residual < 1e-9

    def test_pants_curve_lengths(self, rep222):
        for k in (1, 2, 3):
            c = CurveClass.from_pants_curve(k)
            assert geodesic_length(rep222, c) == pytest.approx(2.0, abs=1e-9)

    def test_trace_length_relation(self, rep222):
        for k, l in ((1, 2.0), (2, 2.0), (3, 2.0)):
            m = rep222.word_matrix(CurveClass.from_pants_curve(k))
            tr = abs(float(m[0, 0] + m[1, 1]))
            assert tr == pytest.approx(2 * math.cosh(l / 2), abs=1e-9)

    def test_random_desk_scale(self):
        random.seed(20250809)
        pants = PantsDecomposition.genus2_dumbbell()
        for _ in range(25):
            lens = tuple(random.uniform(0.6, 3.5) for _ in range(3))
            tws = tuple(random.uniform(-1.5, 1.5) for _ in range(3))
            rep = holonomy_from_fn(pants, FNCoords(lens, tws))
            assert rep.relator_residual < 1e-9
            for k in (1, 2, 3):
                got = geodesic_length(rep, CurveClass.from_pants_curve(k))
                assert got == pytest.approx(lens[k - 1], abs=1e-9)

    def test_twist_full_turn_preserves_pants_lengths(self):
        pants = PantsDecomposition.genus2_dumbbell()
        base = holonomy_from_fn(pants, FNCoords((2.0, 1.3, 2.8), (0.3, -0.4, 0.9)))
        # tau_1 -> tau_1 + l_1 is a Dehn twist relabeling
        twisted = holonomy_from_fn(pants, FNCoords((2.0, 1.3, 2.8),
                                                   (2.3, -0.4, 0.9)))
        for k in (1, 2, 3):
            c = CurveClass.from_pants_curve(k)
            assert geodesic_length(twisted, c) == pytest.approx(
                geodesic_length(base, c), abs=1e-11)

    def test_degenerate_hexagon(self):
        pants = PantsDecomposition.genus2_dumbbell()
        with pytest.raises((DegenerateHexagon, OverflowError)):
            holonomy_from_fn(pants, FNCoords((50000.0, 2.0, 2.0), (0, 0, 0)))

    def test_non_dumbbell_graph_rejected(self):
        theta = PantsDecomposition(2, ((0, 1), (0, 1), (0, 1)))
        with pytest.raises(DegenerateHexagon):
            holonomy_from_fn(theta, FNCoords((2.0, 2.0, 2.0), (0, 0, 0)))

    def test_bad_pants_graph(self):
        with pytest.raises(ValueError):
            PantsDecomposition(1, ((0, 0),))
        with pytest.raises(ValueError):
            PantsDecomposition(2, ((0, 0), (1, 1), (0, 0)))


class TestLengths:
    def test_word_power_doubles(self, rep222):
        c = CurveClass.parse("a1 b1")
        assert geodesic_length(rep222, c.power(2)) == pytest.approx(
            2 * geodesic_length(rep222, c), rel=1e-12)

    def test_conjugacy_invariance(self, rep222):
        w1 = CurveClass.parse("a1 b1 a2 B1")
        w2 = CurveClass.parse("b1 a2 B1 a1")
        w3 = CurveClass.parse("a2 B1 a1 b1")
        l1 = geodesic_length(rep222, w1)
        assert geodesic_length(rep222, w2) == pytest.approx(l1, abs=1e-12)
        assert geodesic_length(rep222, w3) == pytest.approx(l1, abs=1e-12)

    def test_nonhyperbolic_detected(self, rep222):
        # a1 * A1 is not even reduced; build a genuinely elliptic-ish check
        # via an identity-word guard instead
        with pytest.raises(ValueError):
            CurveClass.parse("a1 A1")

    def test_independent_oracle(self, rep222):
        pytest.importorskip("mpmath")
        word = "a1 b1 a2 b2"
        got = geodesic_length(rep222, CurveClass.parse(word))
        want = mpmath_oracle_length((2.0, 2.0, 2.0), (0.0, 0.0, 0.0), word)
        assert got == pytest.approx(want, rel=1e-11)
        # hyperbolic-trigonometry identity: the commutator trace satisfies
        # tr[a,b] = x^2 + y^2 + z^2 - xyz - 2 (Fricke)
        import numpy as np
        a = rep222.matrices["a1"]
        b = rep222.matrices["b1"]
        x = float(a[0, 0] + a[1, 1])
        y = float(b[0, 0] + b[1, 1])
        ab = a @ b
        z = float(ab[0, 0] + ab[1, 1])
        assert x * x + y * y + z * z - x * y * z - 2 == pytest.approx(
            -2 * math.cosh(1.0), rel=1e-12)

    def test_seam_symmetry(self):
        assert seam_length(2.0, 3.0, 1.0) == seam_length(3.0, 2.0, 1.0)


class TestMulticurve:
    def test_single_curve(self, rep222):
        mc = WeightedMulticurve(((1, 1.0),))
        assert multicurve_length(rep222, mc) == pytest.approx(2.0, abs=1e-9)

    def test_linearity(self, rep222):
        mc = WeightedMulticurve(((1, 1.0), (2, 2.0)))
        assert multicurve_length(rep222, mc) == pytest.approx(6.0, abs=1e-9)
        mc2 = WeightedMulticurve(((1, 2.0), (2, 4.0)))
        assert multicurve_length(rep222, mc2) == pytest.approx(
            2 * multicurve_length(rep222, mc), rel=1e-14)

    def test_disjointness_enforced(self):
        from graftlab.errors import NonDisjointCurves, NonPantsCurve
        with pytest.raises(NonDisjointCurves):
            WeightedMulticurve(((1, 1.0), (1, 2.0)))
        with pytest.raises(NonPantsCurve):
            WeightedMulticurve(((7, 1.0),))


class TestRatioVector:
    def test_unit_sum_and_determinism(self, rep222):
        v = length_ratio_vector(rep222)
        assert math.fsum(v) == pytest.approx(1.0, abs=1e-15)
        assert v == length_ratio_vector(rep222)

    def test_pinching_concentrates_on_crossing_probes(self):
        # as l_1 -> 0 the b1 probe (which crosses curve 1) dominates
        pants = PantsDecomposition.genus2_dumbbell()
        shares = []
        for l1 in (1.0, 0.5, 0.2, 0.1):
            rep = holonomy_from_fn(pants, FNCoords((l1, 2.0, 2.0), (0, 0, 0)))
            v = length_ratio_vector(rep)
            # probes: a1 a2 b1 b2 a1b1 a2b2 -> b1-dependent are 2 and 4
            shares.append(v[2] + v[4])
        assert shares == sorted(shares)
        assert shares[-1] > 0.5


class TestArea:
    def test_genus2(self):
        assert hyperbolic_area(2) == pytest.approx(4 * math.pi)


class TestFNFile:
    def test_roundtrip(self, tmp_path):
        text = "curve 1 length 2.0 twist 0.5\ncurve 2 length 1.5 twist 0\ncurve 3 length 2.5 twist -1\n"
        pants, fn = load_fn(text, is_text=True)
        assert fn.lengths == (2.0, 1.5, 2.5)
        assert fn.twists == (0.5, 0.0, -1.0)
        path = tmp_path / "y.fn"
        path.write_text(text)
        pants2, fn2 = load_fn(str(path))
        assert fn2 == fn
