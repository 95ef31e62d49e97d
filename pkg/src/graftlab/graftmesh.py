"""Triangulated model of a grafted genus-2 surface.

The hyperbolic part of gr_{t*curve} Y is meshed by geodesic subdivision of
the four right-angled hexagons of the dumbbell pants decomposition, each
pants being a hexagon plus its mirror across one seam.  The grafted
cylinder is a uniform Euclidean grid whose boundary circles share vertices
with the cuff circles of the cut pants.  Every triangle corner carries the
target isometry that reads the vertex's canonical value in the chart of
that triangle, so the assembled mesh is equivariant by construction.

Conventions: every cuff circle develops along its geodesic, parametrized
by arclength through a frame F (the point at arc u is F(i e^u)); circle
vertices whose canonical chart is the mirror hexagon carry a "lambda"
isometry returning their canonical value to the line.  Interface gluings
reverse orientation and shift by half the cuff length plus the twist,
which pins the twist origin to the hexagon seams.  Twists must be
multiples of the grid spacing of their cuff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import uhp
from .errors import DegenerateHexagon, MeshDegeneracy
from .grafting import GraftedSurface
from .harmonic import HYPERBOLIC, EquivariantMap, TriangleMesh
from .hyperbolic import seam_length

ASPECT_BOUND = 20.0


# ---------------------------------------------------------------------------
# isometries of the upper half plane (possibly orientation-reversing)
# ---------------------------------------------------------------------------

def _mat(a, b, c, d):
    return np.array([[a, b], [c, d]], dtype=float)


ID2 = _mat(1, 0, 0, 1)
REF0 = _mat(-1, 0, 0, 1)      # with flip: z -> -conj(z), reflect across i-axis
JFLIP = _mat(0, -1, 1, 0)     # z -> -1/z, half turn about i


@dataclass(frozen=True)
class Iso:
    """Real Mobius map m, applied to conj(z) first when flip is set."""

    m: np.ndarray
    flip: bool = False

    def __matmul__(self, other: "Iso") -> "Iso":
        # real matrices commute with conjugating the argument
        return Iso(self.m @ other.m, self.flip != other.flip)

    def inv(self) -> "Iso":
        m = self.m
        det = m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
        mi = _mat(m[1, 1], -m[0, 1], -m[1, 0], m[0, 0]) / det
        return Iso(mi, self.flip)

    def apply(self, z: complex) -> complex:
        if self.flip:
            z = z.conjugate()
        a, b = self.m[0]
        c, d = self.m[1]
        return (a * z + b) / (c * z + d)


def iso_E(length: float) -> Iso:
    h = length / 2
    return Iso(_mat(math.exp(h), 0, 0, math.exp(-h)))


def iso_R(angle: float) -> Iso:
    h = angle / 2
    return Iso(_mat(math.cos(h), math.sin(h), -math.sin(h), math.cos(h)))


def reflection(frame: Iso) -> Iso:
    """Reflection across the frame image of the imaginary axis."""
    return frame @ Iso(REF0, True) @ frame.inv()


# ---------------------------------------------------------------------------
# right-angled hexagons
# ---------------------------------------------------------------------------

def march_hexagon(sides: list[float]) -> tuple[list[complex], list[Iso]]:
    """Vertices and per-side frames of a right-angled hexagon with the given
    side lengths; raises if the frame path fails to close."""
    best = None
    for turn in (math.pi / 2, -math.pi / 2):
        frames = []
        g = Iso(ID2)
        for length in sides:
            frames.append(g)
            g = g @ iso_E(length) @ iso_R(turn)
        det = g.m[0, 0] * g.m[1, 1] - g.m[0, 1] * g.m[1, 0]
        end = g.m / math.sqrt(abs(det))
        res = min(np.abs(end - ID2).max(), np.abs(end + ID2).max())
        if best is None or res < best[0]:
            best = (res, frames)
        if res < 1e-8:
            return [f.apply(1j) for f in frames], frames
    raise DegenerateHexagon(
        f"hexagon with sides {sides} does not close (residual {best[0]})")


def _karcher_center(points: list[complex]) -> complex:
    qx = np.array([p.real for p in points])
    qy = np.array([p.imag for p in points])
    w = np.ones(len(points))
    cx, cy = points[0].real, points[0].imag
    for _ in range(60):
        nx, ny = uhp.karcher_step(cx, cy, w, qx, qy, 1.0, 1)
        if abs(nx - cx) + abs(ny - cy) < 1e-14:
            break
        cx, cy = nx, ny
    return complex(cx, cy)


class _HexMesh:
    """Geodesic triangulation of one hexagon with tracked boundary chains."""

    def __init__(self, verts6: list[complex], levels: int):
        self.points: list[complex] = list(verts6)
        self.points.append(_karcher_center(verts6))
        self.tris: list[tuple[int, int, int]] = [
            (6, k, (k + 1) % 6) for k in range(6)]
        self.chains: list[list[int]] = [[k, (k + 1) % 6] for k in range(6)]
        for _ in range(levels):
            self._refine()

    def _mid(self, cache, a, b):
        key = (a, b) if a < b else (b, a)
        m = cache.get(key)
        if m is None:
            p, q = self.points[a], self.points[b]
            x, y = uhp.interpolate(p.real, p.imag, q.real, q.imag, 0.5)
            m = len(self.points)
            self.points.append(complex(x, y))
            cache[key] = m
        return m

    def _refine(self):
        cache: dict = {}
        new_tris = []
        for (a, b, c) in self.tris:
            ab = self._mid(cache, a, b)
            bc = self._mid(cache, b, c)
            ca = self._mid(cache, c, a)
            new_tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
        self.tris = new_tris
        new_chains = []
        for ch in self.chains:
            out = []
            for k in range(len(ch) - 1):
                out.append(ch[k])
                out.append(self._mid(cache, ch[k], ch[k + 1]))
            out.append(ch[-1])
            new_chains.append(out)
        self.chains = new_chains


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------

class _Builder:
    def __init__(self):
        self.values: list[complex] = []     # initial (collapse) target values
        self.tris: list[list[int]] = []
        self.sides: list[list[float]] = []
        self.tokens: list[list[np.ndarray]] = []
        self.coords: list[list[tuple[float, float]]] = []

    def new_vertex(self, value: complex) -> int:
        self.values.append(value)
        return len(self.values) - 1

    def add_hyp_tri(self, vids, mats, pos, chart=None):
        """Triangle with hyperbolic corner positions pos; chart coordinates
        for the Hopf frame default to an embedding of the comparison
        triangle, or the given chart points."""
        d01 = uhp.dist(pos[0].real, pos[0].imag, pos[1].real, pos[1].imag)
        d02 = uhp.dist(pos[0].real, pos[0].imag, pos[2].real, pos[2].imag)
        d12 = uhp.dist(pos[1].real, pos[1].imag, pos[2].real, pos[2].imag)
        sides = [d12, d02, d01]
        if chart is None:
            x = (d02 * d02 + d01 * d01 - d12 * d12) / (2 * d01)
            y = math.sqrt(max(d02 * d02 - x * x, 1e-300))
            chart = [complex(0, 0), complex(d01, 0), complex(x, y)]
        self._push(vids, mats, sides, chart)

    def add_flat_tri(self, vids, mats, sides, chart):
        self._push(vids, mats, sides, chart)

    def _push(self, vids, mats, sides, chart):
        self.tris.append(list(vids))
        self.sides.append(list(sides))
        self.tokens.append([np.array(m, dtype=float) for m in mats])
        self.coords.append([(p.real, p.imag) for p in chart])


@dataclass
class CuffCircle:
    ids: list[int]            # k vertex ids in arc order
    frame: Iso                # point at arc u develops to frame(i e^u)
    lams: list[np.ndarray]    # lam(canonical value) = on-line value
    spacing: float
    length: float


def _add_hexagon_pair(builder: _Builder, cuffs: tuple[float, float, float],
                      levels: int) -> list[CuffCircle]:
    """A pair of pants as a hexagon plus its mirror across the first seam.
    Returns the three cuff circles."""
    l1, l2, l3 = cuffs
    s12 = seam_length(l1, l2, l3)
    s23 = seam_length(l2, l3, l1)
    s31 = seam_length(l3, l1, l2)
    sides = [l1 / 2, s12, l2 / 2, s23, l3 / 2, s31]
    verts6, frames = march_hexagon(sides)
    hexmesh = _HexMesh(verts6, levels)

    mirror = reflection(frames[1])
    gam23 = (mirror @ reflection(frames[3])).m
    gam31 = (mirror @ reflection(frames[5])).m

    a_ids = [builder.new_vertex(p) for p in hexmesh.points]
    for (x, y, z) in hexmesh.tris:
        builder.add_hyp_tri([a_ids[x], a_ids[y], a_ids[z]], [ID2, ID2, ID2],
                            [hexmesh.points[v] for v in (x, y, z)])

    shared = set(hexmesh.chains[1])
    on23 = set(hexmesh.chains[3])
    on31 = set(hexmesh.chains[5])
    b_ids: list[int] = []
    b_tok: list[np.ndarray] = []
    for li, p in enumerate(hexmesh.points):
        if li in shared:
            b_ids.append(a_ids[li])
            b_tok.append(ID2)
        elif li in on23:
            b_ids.append(a_ids[li])
            b_tok.append(gam23)
        elif li in on31:
            b_ids.append(a_ids[li])
            b_tok.append(gam31)
        else:
            b_ids.append(builder.new_vertex(mirror.apply(p)))
            b_tok.append(ID2)
    for (x, y, z) in hexmesh.tris:
        pos = [mirror.apply(hexmesh.points[v]) for v in (x, y, z)]
        # conjugated chart keeps the Hopf frame orientation-consistent
        chart = [p.conjugate() for p in pos]
        builder.add_hyp_tri([b_ids[v] for v in (x, y, z)],
                            [b_tok[v] for v in (x, y, z)], pos, chart=chart)

    circles = []
    for side_idx, length in ((0, l1), (2, l2), (4, l3)):
        chain = hexmesh.chains[side_idx]
        k_half = len(chain) - 1
        k = 2 * k_half
        spacing = length / k
        frame = frames[side_idx]
        ids = [a_ids[v] for v in chain]
        ids += [b_ids[v] for v in list(reversed(chain))[1:-1]]
        lams = [ID2] * len(ids)
        dwrap = (frame @ iso_E(length) @ frame.inv()).m
        candidates = [Iso(ID2), Iso(gam23), Iso(gam31), Iso(gam23).inv(),
                      Iso(gam31).inv(), Iso(dwrap), Iso(dwrap).inv()]
        for j, vid in enumerate(ids):
            want = frame.apply(1j * math.exp(j * spacing))
            have = builder.values[vid]
            lams[j] = _match_lambda(have, want, candidates)
        circles.append(CuffCircle(ids, frame, lams, spacing, length))
    return circles


def _match_lambda(have: complex, want: complex, candidates) -> np.ndarray:
    for cand in candidates:
        got = cand.apply(have)
        if abs(got - want) < 1e-7 * max(1.0, abs(want)):
            return cand.m
    raise DegenerateHexagon("no seam transport matches the cuff continuation")


def _interface_tokens(src_frame: Iso, dst: CuffCircle, twist: float,
                      length: float) -> tuple[list[int], list[np.ndarray]]:
    """Identify a circle developed on src_frame's line with the dst circle,
    reversing orientation and twisting.  Returns, per source index j, the
    dst vertex id and the transport T with T(canonical dst value) = the
    src-chart position at arc j*spacing."""
    k = len(dst.ids)
    shift_f = twist / dst.spacing
    shift = round(shift_f)
    if abs(shift_f - shift) > 1e-9:
        raise MeshDegeneracy(
            f"twist {twist} is not a multiple of the grid spacing {dst.spacing}")
    glue = src_frame @ iso_E(length / 2 + twist) @ Iso(JFLIP) @ dst.frame.inv()
    src_wrap = src_frame @ iso_E(length) @ src_frame.inv()
    src_wrap_inv = src_wrap.inv()
    vid = []
    mats = []
    for j in range(k):
        raw = k // 2 + shift - j
        jd = raw % k
        wraps = (raw - jd) // k  # glue lands at arc j*sp + wraps*length
        tok = glue @ Iso(dst.lams[jd])
        correction = src_wrap_inv if wraps > 0 else src_wrap
        for _ in range(abs(wraps)):
            tok = correction @ tok
        vid.append(dst.ids[jd])
        mats.append(tok.m)
    return vid, mats


def _replace_circle(builder: _Builder, src: CuffCircle, dst: CuffCircle,
                    twist: float):
    """Merge the src circle's vertices into the dst circle's: triangles
    referencing a src vertex are repointed through the interface."""
    vid, mats = _interface_tokens(src.frame, dst, twist, src.length)
    repl = {}
    for j, old in enumerate(src.ids):
        # src triangles read old at lam_src^-1 (line position); compose
        lam_inv = np.linalg.inv(src.lams[j])
        repl[old] = (vid[j], lam_inv @ mats[j])
    for t in range(len(builder.tris)):
        for c in range(3):
            v = builder.tris[t][c]
            if v in repl:
                new_v, mat = repl[v]
                builder.tris[t][c] = new_v
                builder.tokens[t][c] = np.asarray(builder.tokens[t][c]) @ mat


def mesh_grafted(g: GraftedSurface, n: int) -> tuple[TriangleMesh, EquivariantMap]:
    """Mesh of gr_{t*curve} Y together with the collapse as initial map.

    The grafted curve must be one of the two handle curves; twists must be
    grid-aligned.  Hexagon sides carry 2^(n+1) segments, cuff circles
    2^(n+2) vertices, and the cylinder gets a square-ish 2^(n+2) x rows
    grid (MeshDegeneracy if the aspect bound fails).
    """
    if len(g.lamination.components) != 1:
        raise MeshDegeneracy("grafted meshes support a single curve")
    label, t = g.lamination.components[0]
    if label not in (1, 2):
        raise MeshDegeneracy("graft one of the two handle curves")
    l1, l2, l3 = g.base_fn.lengths
    t1, t2, t3 = g.base_fn.twists
    if label == 2:
        l1, l2 = l2, l1
        t1, t2 = t2, t1
    ell = l1

    levels = n + 1
    b = _Builder()
    cuffs1 = _add_hexagon_pair(b, (l1, l1, l3), levels)   # grafted pants
    cuffs2 = _add_hexagon_pair(b, (l2, l2, l3), levels)   # other pants

    bottom, top, sep1 = cuffs1
    h2a, h2b, sep2 = cuffs2

    k = len(bottom.ids)
    spacing = ell / k
    if t <= 0:
        raise MeshDegeneracy("grafting weight must be positive")
    rows = max(1, round(t / spacing))
    cell_h = t / rows
    aspect = max(cell_h / spacing, spacing / cell_h)
    if aspect > ASPECT_BOUND:
        raise MeshDegeneracy(
            f"cylinder grid {k}x{rows} has aspect ratio {aspect:.1f} "
            f"(bound {ASPECT_BOUND})")

    # cylinder strip: bottom row shares the bottom circle's vertices; the
    # top row reads the top circle through the interface
    strip = [[0] * k for _ in range(rows + 1)]
    strip[0] = list(bottom.ids)
    for r in range(1, rows):
        for j in range(k):
            strip[r][j] = b.new_vertex(
                bottom.frame.apply(1j * math.exp(j * spacing)))
    top_vid, top_mats = _interface_tokens(bottom.frame, top, t1, ell)
    strip[rows] = top_vid

    wrap = (bottom.frame @ iso_E(ell) @ bottom.frame.inv()).m

    def strip_corner(j: int, r: int):
        wrapped = j == k
        jj = 0 if wrapped else j
        if r == 0:
            tok = bottom.lams[jj]
        elif r == rows:
            tok = top_mats[jj]
        else:
            tok = ID2
        if wrapped:
            tok = wrap @ tok
        return strip[r][jj], tok

    diag = math.hypot(spacing, cell_h)
    for j in range(k):
        for r in range(rows):
            v00 = strip_corner(j, r)
            v10 = strip_corner(j + 1, r)
            v01 = strip_corner(j, r + 1)
            v11 = strip_corner(j + 1, r + 1)
            p00 = complex(j * spacing, r * cell_h)
            p10, p01 = p00 + spacing, p00 + 1j * cell_h
            p11 = p10 + 1j * cell_h
            b.add_flat_tri([v00[0], v10[0], v11[0]], [v00[1], v10[1], v11[1]],
                           [cell_h, diag, spacing], [p00, p10, p11])
            b.add_flat_tri([v00[0], v11[0], v01[0]], [v00[1], v11[1], v01[1]],
                           [spacing, cell_h, diag], [p00, p11, p01])

    # the other handle is glued directly; the separating curves are glued
    # between the two pants charts
    _replace_circle(b, h2b, h2a, t2)
    _replace_circle(b, sep2, sep1, t3)

    # compact ids and package
    used = sorted({v for tri in b.tris for v in tri})
    remap = {v: i for i, v in enumerate(used)}
    tris = np.array([[remap[v] for v in tri] for tri in b.tris], dtype=np.int64)
    mesh = TriangleMesh(len(used), tris, np.array(b.sides, dtype=float),
                        HYPERBOLIC, np.array(b.tokens, dtype=float))
    mesh.meta["corner_coords"] = np.array(b.coords, dtype=float)
    mesh.meta["refinement"] = n
    mesh.meta["grafted"] = g
    vals = np.zeros((len(used), 2))
    for old, newi in remap.items():
        z = b.values[old]
        vals[newi] = (z.real, z.imag)
    return mesh, EquivariantMap(HYPERBOLIC, vals)
