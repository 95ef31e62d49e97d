"""Discrete harmonic-map energies on triangulated domain surfaces.

The discrete energy is the cotangent Dirichlet form

    E(f) = sum_edges (1/2) w_e d(f(u), f(v))^2,
    w_e  = (cot A + cot B) / 2,

with per-triangle weights from the Euclidean comparison triangle of the
domain side lengths, and target distances measured in the target geometry
(Euclidean plane, hyperbolic plane, or the real line for tree targets).
With this normalization the energy of the identity map of a flat torus is
its area, and the energy of a piecewise-linear map of a flat domain equals
its smooth Dirichlet energy exactly.

Equivariance is carried per triangle corner: a corner stores a transport
taking the vertex's canonical target value into the chart the triangle
reads; minimization updates every vertex through the pulled-back star, so
equivariance is preserved by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from . import uhp
from .errors import (
    InvalidTarget,
    IterationBudgetExceeded,
    MeshDegeneracy,
    NonPeriodicDirection,
)
from .flatsurf import FlatSurface, TRANSLATION, polygon_area2

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"
LINE = "line"


# ---------------------------------------------------------------------------
# mesh container
# ---------------------------------------------------------------------------

@dataclass
class TriangleMesh:
    """Triangulated domain with per-corner target transports.

    tris: (T, 3) vertex ids; sides: (T, 3) with sides[t, k] the length of
    the edge opposite corner k; transports: (T, 3, 2, 2) matrices for
    hyperbolic targets or (T, 3, 2) offset vectors for flat/line targets.
    """

    nv: int
    tris: np.ndarray
    sides: np.ndarray
    kind: str
    transports: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self._edges = None

    @property
    def ntri(self) -> int:
        return len(self.tris)

    def corner_cots(self) -> np.ndarray:
        """cot of the comparison-triangle angle at each corner."""
        a2 = self.sides ** 2
        cots = np.empty_like(self.sides)
        for k in range(3):
            b2 = a2[:, (k + 1) % 3]
            c2 = a2[:, (k + 2) % 3]
            area4 = 4 * self.tri_areas()
            cots[:, k] = (b2 + c2 - a2[:, k]) / area4
        return cots

    def tri_areas(self) -> np.ndarray:
        a, b, c = self.sides[:, 0], self.sides[:, 1], self.sides[:, 2]
        s = (a + b + c) / 2
        h = np.maximum(s * (s - a) * (s - b) * (s - c), 0.0)
        return np.sqrt(h)

    # -- edge assembly -------------------------------------------------------

    def edges(self) -> list:
        """Deduplicated edge records (u, v, w, (t, i, j)) where corner pair
        (i, j) of triangle t is one representative occurrence of the edge.

        Edge identity is decided by the domain gluing data: exact vertex
        displacements when the builder provided them, quantized transport
        matrices otherwise.  Every edge of a closed surface must be shared
        by exactly two triangles.
        """
        if self._edges is not None:
            return self._edges
        cots = self.corner_cots()
        table: dict = {}
        for t in range(self.ntri):
            for k in range(3):
                i, j = (k + 1) % 3, (k + 2) % 3
                u, v = int(self.tris[t, i]), int(self.tris[t, j])
                key, flip = self._edge_key(t, i, j)
                rec = table.get(key)
                if rec is None:
                    a, b = (v, u) if flip else (u, v)
                    table[key] = [a, b, cots[t, k] / 2,
                                  (t, j, i) if flip else (t, i, j), 1]
                else:
                    rec[2] += cots[t, k] / 2
                    rec[4] += 1
        edges = []
        for rec in table.values():
            if rec[4] != 2:
                raise MeshDegeneracy(
                    f"edge {(rec[0], rec[1])} is shared by {rec[4]} triangles")
            edges.append((rec[0], rec[1], rec[2], rec[3]))
        self._edges = edges
        return edges

    def _relative(self, t: int, i: int, j: int):
        """Transport of corner j's value into corner i's chart."""
        if self.kind == HYPERBOLIC:
            gi = self.transports[t, i]
            gj = self.transports[t, j]
            # inv(gi) @ gj for det-1 matrices
            inv = np.array([[gi[1, 1], -gi[0, 1]], [-gi[1, 0], gi[0, 0]]])
            return inv @ gj
        return self.transports[t, j] - self.transports[t, i]

    def _domain_rel_key(self, t: int, i: int, j: int):
        """Hashable domain-level relative transport of corner j into corner
        i's chart, and its inverse."""
        exact = self.meta.get("exact_displacements")
        if exact is not None:
            di, dj = exact[t][i], exact[t][j]
            rel = (dj[0] - di[0], dj[1] - di[1])
            return rel, (-rel[0], -rel[1])
        m = np.asarray(self._relative(t, i, j), dtype=float).reshape(2, 2)
        inv = np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]])

        def quant(mm):
            f = mm.flatten()
            for x in f:
                if abs(x) > 1e-9:
                    if x < 0:
                        mm = -mm
                    break
            return tuple(np.round(mm.flatten(), 6))

        return quant(m), quant(inv)

    def _edge_key(self, t: int, i: int, j: int):
        """Canonical (key, flipped) for the unoriented edge at corners i, j."""
        u, v = int(self.tris[t, i]), int(self.tris[t, j])
        rel, inv = self._domain_rel_key(t, i, j)
        if u > v:
            return (v, u, inv), True
        if u < v:
            return (u, v, rel), False
        if inv < rel:
            return (u, u, inv), True
        return (u, u, rel), False


@dataclass
class EquivariantMap:
    """Vertex values in the target: (N, 2) for plane targets, (N,) for line."""

    kind: str
    values: np.ndarray

    def copy(self) -> "EquivariantMap":
        return EquivariantMap(self.kind, self.values.copy())

    def validate(self) -> None:
        if self.kind == HYPERBOLIC and np.any(self.values[:, 1] <= 0):
            raise InvalidTarget("hyperbolic target needs positive height")


@dataclass
class DiscreteEnergyReport:
    energy: float
    hopf: np.ndarray           # (T,) complex per-triangle coefficients
    holomorphy_residual: float
    sweeps: int = 0
    energy_log: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# mesh builders: flat surfaces
# ---------------------------------------------------------------------------

def _is_rectangle(poly) -> bool:
    if len(poly) != 4:
        return False
    for k in range(4):
        a, b = poly[k], poly[(k + 1) % 4]
        if a[0] != b[0] and a[1] != b[1]:
            return False
    return True


def mesh_from_flat(s: FlatSurface, n: int) -> TriangleMesh:
    """Split every rectangle into 2*4^n congruent right triangles.

    Corner transports record the domain deck displacement of each vertex
    occurrence, as exact lattice vectors (also kept in meta); only
    translation-glued surfaces are supported.
    """
    if n < 0:
        raise MeshDegeneracy("refinement level must be >= 0")
    if s.flow_t != 0.0:
        raise MeshDegeneracy("mesh the unstretched surface")
    if any(kind != TRANSLATION for _a, _b, kind in s.pairings):
        raise MeshDegeneracy("flat meshes support translation gluings only")
    for poly in s.polygons:
        if not _is_rectangle(poly):
            raise MeshDegeneracy("flat meshes need rectangular polygons")

    m = 2 ** n
    scale = math.sqrt(s.scale_sq)

    # registry of grid points: (poly, exact position) -> provisional id
    prov: dict = {}
    prov_pos: list = []

    def pid(poly_idx: int, pos) -> int:
        key = (poly_idx, pos)
        if key not in prov:
            prov[key] = len(prov_pos)
            prov_pos.append(key)
        return prov[key]

    grids = []
    for p_idx, poly in enumerate(s.polygons):
        xs = sorted({v[0] for v in poly})
        ys = sorted({v[1] for v in poly})
        x0, x1, y0, y1 = xs[0], xs[-1], ys[0], ys[-1]
        w, h = x1 - x0, y1 - y0
        grid = [[pid(p_idx, (x0 + Fraction(i, m) * w, y0 + Fraction(j, m) * h))
                 for j in range(m + 1)] for i in range(m + 1)]
        grids.append((grid, x0, y0, w, h))

    # union provisional points across gluings, tracking deck displacements:
    # offset[x] = position of x's chart copy minus that of its root's copy
    parent = list(range(len(prov_pos)))
    offset = [(Fraction(0), Fraction(0))] * len(prov_pos)

    def find(x):
        if parent[x] == x:
            return x, (Fraction(0), Fraction(0))
        root, off = find(parent[x])
        total = (offset[x][0] + off[0], offset[x][1] + off[1])
        parent[x] = root
        offset[x] = total
        return root, total

    def union(x, y, disp):
        # chart position of x = chart position of y + disp
        rx, ox = find(x)
        ry, oy = find(y)
        if rx == ry:
            return
        # pos(x) = can(rx) + ox ; pos(y) = can(ry) + oy ; pos(x)=pos(y)+disp
        parent[ry] = rx
        offset[ry] = (ox[0] - oy[0] - disp[0], ox[1] - oy[1] - disp[1])

    for e1, e2, _k in s.pairings:
        (pa, ia), (pb, ib) = e1, e2
        a1, b1 = s.edge_endpoints(e1)
        a2, b2 = s.edge_endpoints(e2)
        c = (b2[0] - a1[0], b2[1] - a1[1])  # gluing z -> z + c
        # sample the m+1 grid points along each edge
        for k in range(m + 1):
            t = Fraction(k, m)
            p = (a1[0] + t * (b1[0] - a1[0]), a1[1] + t * (b1[1] - a1[1]))
            q = (p[0] + c[0], p[1] + c[1])
            union(pid(pb, q), pid(pa, p), c)  # pos(q) = pos(p) + c

    # canonical ids
    roots: dict[int, int] = {}
    for x in range(len(prov_pos)):
        r, _ = find(x)
        if r not in roots:
            roots[r] = len(roots)
    nv = len(roots)

    def resolve(x):
        r, off = find(x)
        return roots[r], off

    tris = []
    sides = []
    disps = []
    exact_disps = []
    coords = []
    for grid, x0, y0, w, h in grids:
        dx = float(w) / m * scale
        dy = float(h) / m * scale
        diag = math.hypot(dx, dy)
        for i in range(m):
            for j in range(m):
                c00, c10 = grid[i][j], grid[i + 1][j]
                c01, c11 = grid[i][j + 1], grid[i + 1][j + 1]
                for corner_ids, side_len in (
                        ((c00, c10, c11), (dy, diag, dx)),
                        ((c00, c11, c01), (dx, dy, diag))):
                    vids = []
                    offs = []
                    cc_pos = []
                    for cc in corner_ids:
                        vid, off = resolve(cc)
                        vids.append(vid)
                        offs.append(off)
                        _p, pos = prov_pos[cc]
                        cc_pos.append([float(pos[0]) * scale,
                                       float(pos[1]) * scale])
                    tris.append(vids)
                    sides.append(side_len)
                    disps.append([[float(o[0]) * scale, float(o[1]) * scale]
                                  for o in offs])
                    exact_disps.append(offs)
                    coords.append(cc_pos)

    mesh = TriangleMesh(nv, np.array(tris, dtype=np.int64),
                        np.array(sides, dtype=float), EUCLIDEAN,
                        np.array(disps, dtype=float))
    mesh.meta["surface"] = s
    mesh.meta["exact_displacements"] = exact_disps
    mesh.meta["refinement"] = n
    mesh.meta["corner_coords"] = np.array(coords, dtype=float)
    # canonical chart positions, for building initial maps
    pos = np.zeros((nv, 2))
    for x, (p_idx, p) in enumerate(prov_pos):
        vid, off = resolve(x)
        pos[vid] = (float(p[0] - off[0]) * scale, float(p[1] - off[1]) * scale)
    mesh.meta["positions"] = pos
    return mesh


def linear_torus_map(mesh: TriangleMesh, a: complex, b: complex) -> EquivariantMap:
    """The map z -> a z + b conj(z) on a flat-torus mesh, as vertex values."""
    pos = mesh.meta["positions"]
    z = pos[:, 0] + 1j * pos[:, 1]
    w = a * z + b * np.conj(z)
    return EquivariantMap(EUCLIDEAN, np.stack([w.real, w.imag], axis=1))


def euclidean_rels(mesh: TriangleMesh, a: complex = 1, b: complex = 0):
    """Resolve domain displacements into target offsets under the marking
    z -> a z + b conj(z)."""
    d = mesh.transports[..., 0] + 1j * mesh.transports[..., 1]
    w = a * d + b * np.conj(d)
    return np.stack([w.real, w.imag], axis=-1)


def line_rels(mesh: TriangleMesh, direction_angle: float = 0.0):
    """Resolve displacements into leaf-space offsets for the foliation in
    the given direction: the transverse coordinate of the displacement."""
    d = mesh.transports
    return (-math.sin(direction_angle) * d[..., 0]
            + math.cos(direction_angle) * d[..., 1])


def retarget(mesh: TriangleMesh, kind: str, transports: np.ndarray) -> TriangleMesh:
    """Same domain mesh, new target resolution of the corner transports."""
    meta = {k: v for k, v in mesh.meta.items() if not k.startswith("_")}
    return TriangleMesh(mesh.nv, mesh.tris, mesh.sides, kind, transports, meta)


# ---------------------------------------------------------------------------
# energy
# ---------------------------------------------------------------------------

def _edge_arrays(mesh: TriangleMesh):
    cached = mesh.meta.get("_edge_arrays")
    if cached is not None:
        return cached
    edges = mesh.edges()
    ne = len(edges)
    eu = np.array([e[0] for e in edges], dtype=np.int64)
    ev = np.array([e[1] for e in edges], dtype=np.int64)
    ew = np.array([e[2] for e in edges], dtype=float)
    rels = [np.asarray(mesh._relative(*e[3]), dtype=float) for e in edges]
    if mesh.kind == HYPERBOLIC:
        rel = np.array(rels).reshape(ne, 2, 2)
    elif mesh.kind == EUCLIDEAN:
        rel = np.array(rels).reshape(ne, 2)
    else:
        rel = np.array(rels).reshape(ne)
    mesh.meta["_edge_arrays"] = (eu, ev, ew, rel)
    return eu, ev, ew, rel


@njit(cache=True)
def _energy_euclidean(vals, eu, ev, ew, rel):
    acc = 0.0
    for k in range(eu.shape[0]):
        dx = vals[eu[k], 0] - (vals[ev[k], 0] + rel[k, 0])
        dy = vals[eu[k], 1] - (vals[ev[k], 1] + rel[k, 1])
        acc += 0.5 * ew[k] * (dx * dx + dy * dy)
    return acc


@njit(cache=True)
def _energy_line(vals, eu, ev, ew, rel):
    acc = 0.0
    for k in range(eu.shape[0]):
        d = vals[eu[k]] - (vals[ev[k]] + rel[k])
        acc += 0.5 * ew[k] * d * d
    return acc


@njit(cache=True)
def _energy_hyperbolic(vals, eu, ev, ew, rel):
    acc = 0.0
    for k in range(eu.shape[0]):
        qx, qy = uhp.mobius(rel[k, 0, 0], rel[k, 0, 1], rel[k, 1, 0],
                            rel[k, 1, 1], vals[ev[k], 0], vals[ev[k], 1])
        d = uhp.dist(vals[eu[k], 0], vals[eu[k], 1], qx, qy)
        acc += 0.5 * ew[k] * d * d
    return acc


def discrete_energy(mesh: TriangleMesh, f: EquivariantMap) -> DiscreteEnergyReport:
    """Energy, per-triangle Hopf coefficients, and the holomorphy residual."""
    f.validate()
    eu, ev, ew, rel = _edge_arrays(mesh)
    if mesh.kind == EUCLIDEAN:
        energy = float(_energy_euclidean(f.values, eu, ev, ew, rel))
    elif mesh.kind == LINE:
        energy = float(_energy_line(f.values, eu, ev, ew, rel))
    else:
        energy = float(_energy_hyperbolic(f.values, eu, ev, ew, rel))
    hopf, residual = discrete_hopf(mesh, f)
    return DiscreteEnergyReport(energy, hopf, residual)


# ---------------------------------------------------------------------------
# Hopf fields
# ---------------------------------------------------------------------------

def _chart_value(mesh: TriangleMesh, f: EquivariantMap, t: int, k: int):
    v = int(mesh.tris[t, k])
    if mesh.kind == HYPERBOLIC:
        g = mesh.transports[t, k]
        return uhp.mobius(g[0, 0], g[0, 1], g[1, 0], g[1, 1],
                          f.values[v, 0], f.values[v, 1])
    if mesh.kind == EUCLIDEAN:
        return (f.values[v, 0] + mesh.transports[t, k, 0],
                f.values[v, 1] + mesh.transports[t, k, 1])
    return (f.values[v] + mesh.transports[t, k],)


def _target_dist2(mesh: TriangleMesh, p, q) -> float:
    if mesh.kind == HYPERBOLIC:
        return uhp.dist(p[0], p[1], q[0], q[1]) ** 2
    if mesh.kind == EUCLIDEAN:
        return (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2
    return (p[0] - q[0]) ** 2


def corner_coords(mesh: TriangleMesh, t: int):
    """Domain coordinates of triangle t's corners.

    Builders store genuine chart coordinates in meta["corner_coords"];
    otherwise a comparison embedding from the side lengths is used (corner 0
    at the origin, corner 1 on +x), which fixes the Hopf phase only up to a
    per-triangle rotation.
    """
    stored = mesh.meta.get("corner_coords")
    if stored is not None:
        return stored[t]
    c = float(mesh.sides[t, 2])
    b = float(mesh.sides[t, 1])
    a = float(mesh.sides[t, 0])
    x = (b * b + c * c - a * a) / (2 * c)
    y = math.sqrt(max(b * b - x * x, 1e-300))
    return np.array([[0.0, 0.0], [c, 0.0], [x, y]])


def triangle_form(mesh: TriangleMesh, f: EquivariantMap, t: int):
    """Pullback quadratic form (A, B, C) of the map on triangle t, solved in
    the triangle's domain chart from the three squared edge stretches."""
    p = corner_coords(mesh, t)
    qs = [_chart_value(mesh, f, t, k) for k in range(3)]
    rows = []
    rhs = []
    for (i, j) in ((0, 1), (0, 2), (1, 2)):
        ex, ey = p[j][0] - p[i][0], p[j][1] - p[i][1]
        rows.append([ex * ex, 2 * ex * ey, ey * ey])
        rhs.append(_target_dist2(mesh, qs[i], qs[j]))
    qa, qb, qc = np.linalg.solve(np.array(rows), np.array(rhs))
    return float(qa), float(qb), float(qc), p


def discrete_hopf(mesh: TriangleMesh, f: EquivariantMap):
    """Per-triangle (2,0) coefficients and the L1 jump residual across edges."""
    ntri = mesh.ntri
    hopf = np.zeros(ntri, dtype=complex)
    corner_local = []
    for t in range(ntri):
        qa, qb, qc, p = triangle_form(mesh, f, t)
        hopf[t] = complex((qa - qc) / 4, -qb / 2)
        corner_local.append(p)
    areas = mesh.tri_areas()

    # cross-edge jumps: rotate each triangle's coefficient into a frame where
    # the shared edge lies along +x (coefficient transforms by e^{2 i theta})
    edge_owner: dict = {}
    residual = 0.0
    for t in range(ntri):
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            key, _flip = mesh._edge_key(t, i, j)
            pi, pj = corner_local[t][i], corner_local[t][j]
            # rotate the coefficient into the frame with the shared edge on
            # the x-axis; the edge's sign does not matter for dz^2
            theta = math.atan2(pj[1] - pi[1], pj[0] - pi[0])
            coeff = hopf[t] * complex(math.cos(2 * theta), math.sin(2 * theta))
            rec = edge_owner.get(key)
            if rec is None:
                edge_owner[key] = (coeff, areas[t])
            else:
                other, oarea = rec
                residual += abs(coeff - other) * (areas[t] + oarea) / 3
    return hopf, float(residual)


def hopf_l1(mesh: TriangleMesh, hopf: np.ndarray) -> float:
    """L1 norm of a per-triangle coefficient field."""
    return float(np.sum(np.abs(hopf) * mesh.tri_areas()))


def energy_from_forms(mesh: TriangleMesh, f: EquivariantMap) -> float:
    """Energy recomputed from per-triangle pullback forms: the (1,1) mass.
    Equals the edge-sum energy by the cotangent identity."""
    acc = 0.0
    areas = mesh.tri_areas()
    for t in range(mesh.ntri):
        qa, qb, qc, _ = triangle_form(mesh, f, t)
        acc += (qa + qc) / 2 * areas[t]
    return acc


def pullback_difference_l1(mesh: TriangleMesh, f: EquivariantMap,
                           h: EquivariantMap) -> float:
    """L1 norm of the conformal part of f*rho - h*rho, triangle by triangle."""
    acc = 0.0
    areas = mesh.tri_areas()
    for t in range(mesh.ntri):
        fa, fb, fc, _ = triangle_form(mesh, f, t)
        ha, hb, hc, _ = triangle_form(mesh, h, t)
        acc += abs((fa - ha) + (fc - hc)) / 2 * areas[t]
    return acc


# ---------------------------------------------------------------------------
# minimization
# ---------------------------------------------------------------------------

def _star_arrays(mesh: TriangleMesh):
    cached = mesh.meta.get("_star_arrays")
    if cached is not None:
        return cached
    eu, ev, ew, rel = _edge_arrays(mesh)
    nv = mesh.nv
    counts = np.zeros(nv + 1, dtype=np.int64)
    for k in range(len(eu)):
        counts[eu[k] + 1] += 1
        counts[ev[k] + 1] += 1
    indptr = np.cumsum(counts)
    nbr = np.zeros(indptr[-1], dtype=np.int64)
    ws = np.zeros(indptr[-1], dtype=float)
    if mesh.kind == HYPERBOLIC:
        rels = np.zeros((indptr[-1], 2, 2))
    elif mesh.kind == EUCLIDEAN:
        rels = np.zeros((indptr[-1], 2))
    else:
        rels = np.zeros(indptr[-1])
    cursor = indptr[:-1].copy()
    for k in range(len(eu)):
        u, v = eu[k], ev[k]
        nbr[cursor[u]] = v
        ws[cursor[u]] = ew[k]
        rels[cursor[u]] = rel[k]
        cursor[u] += 1
        nbr[cursor[v]] = u
        ws[cursor[v]] = ew[k]
        if mesh.kind == HYPERBOLIC:
            m = rel[k]
            rels[cursor[v]] = np.array([[m[1, 1], -m[0, 1]],
                                        [-m[1, 0], m[0, 0]]])
        else:
            rels[cursor[v]] = -rel[k]
        cursor[v] += 1
    mesh.meta["_star_arrays"] = (indptr, nbr, ws, rels)
    return indptr, nbr, ws, rels


@njit(cache=True)
def _sweep_euclidean(vals, indptr, nbr, ws, rels, damping):
    for x in range(vals.shape[0]):
        sw = 0.0
        cx = 0.0
        cy = 0.0
        for k in range(indptr[x], indptr[x + 1]):
            px = vals[nbr[k], 0] + rels[k, 0]
            py = vals[nbr[k], 1] + rels[k, 1]
            sw += ws[k]
            cx += ws[k] * px
            cy += ws[k] * py
        if sw > 0.0:
            vals[x, 0] += damping * (cx / sw - vals[x, 0])
            vals[x, 1] += damping * (cy / sw - vals[x, 1])


@njit(cache=True)
def _sweep_line(vals, indptr, nbr, ws, rels, damping):
    for x in range(vals.shape[0]):
        sw = 0.0
        cx = 0.0
        for k in range(indptr[x], indptr[x + 1]):
            sw += ws[k]
            cx += ws[k] * (vals[nbr[k]] + rels[k])
        if sw > 0.0:
            vals[x] += damping * (cx / sw - vals[x])


@njit(cache=True)
def _sweep_hyperbolic(vals, indptr, nbr, ws, rels, damping):
    for x in range(vals.shape[0]):
        lo, hi = indptr[x], indptr[x + 1]
        deg = hi - lo
        if deg == 0:
            continue
        qx = np.empty(deg)
        qy = np.empty(deg)
        w = np.empty(deg)
        for k in range(deg):
            m = rels[lo + k]
            ax, ay = uhp.mobius(m[0, 0], m[0, 1], m[1, 0], m[1, 1],
                                vals[nbr[lo + k], 0], vals[nbr[lo + k], 1])
            qx[k] = ax
            qy[k] = ay
            w[k] = ws[lo + k]
        px, py = vals[x, 0], vals[x, 1]
        e0 = uhp.local_energy(px, py, w, qx, qy)
        nx, ny = uhp.karcher_step(px, py, w, qx, qy, damping, 2)
        if ny > 0.0 and uhp.local_energy(nx, ny, w, qx, qy) <= e0:
            vals[x, 0] = nx
            vals[x, 1] = ny


def minimize(mesh: TriangleMesh, init: EquivariantMap, *,
             damping: float = 0.5, rel_tol: float = 1e-10,
             max_sweeps: int = 100_000) -> tuple[EquivariantMap, DiscreteEnergyReport]:
    """Block-coordinate energy descent: each vertex moves halfway to the
    weighted geodesic centroid of its pulled-back star, in a fixed sweep
    order, until the relative energy decrease over a sweep drops below
    rel_tol.  The energy never increases."""
    init.validate()
    if init.kind != mesh.kind:
        raise InvalidTarget(f"map kind {init.kind} != mesh kind {mesh.kind}")
    eu, ev, ew, rel = _edge_arrays(mesh)
    indptr, nbr, ws, rels = _star_arrays(mesh)
    f = init.copy()
    if mesh.kind == EUCLIDEAN:
        energy_fn, sweep_fn = _energy_euclidean, _sweep_euclidean
    elif mesh.kind == LINE:
        energy_fn, sweep_fn = _energy_line, _sweep_line
    else:
        energy_fn, sweep_fn = _energy_hyperbolic, _sweep_hyperbolic
    e_prev = float(energy_fn(f.values, eu, ev, ew, rel))
    log = [e_prev]
    sweeps = 0
    while True:
        sweep_fn(f.values, indptr, nbr, ws, rels, damping)
        sweeps += 1
        e_now = float(energy_fn(f.values, eu, ev, ew, rel))
        log.append(e_now)
        if e_now > e_prev + 1e-12 * max(1.0, abs(e_prev)):
            raise IterationBudgetExceeded(
                f"energy increased ({e_prev} -> {e_now}); solver defect")
        if e_prev - e_now < rel_tol * max(1.0, abs(e_now)):
            break
        if sweeps >= max_sweeps:
            raise IterationBudgetExceeded(f"no convergence in {max_sweeps} sweeps")
        e_prev = e_now
    hopf, residual = discrete_hopf(mesh, f)
    report = DiscreteEnergyReport(e_now, hopf, residual, sweeps, log)
    return f, report


# ---------------------------------------------------------------------------
# the minimizer-gap inequality
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    lhs: float
    rhs: float
    hopf_lhs: float
    delta: float

    @property
    def margin(self) -> float:
        return self.rhs + self.delta - self.lhs

    @property
    def hopf_margin(self) -> float:
        return self.rhs + self.delta - self.hopf_lhs

    @property
    def passed(self) -> bool:
        return self.margin >= 0 and self.hopf_margin >= 0


def minimizer_gap_check(mesh: TriangleMesh, f: EquivariantMap,
                        h: EquivariantMap, delta: float = 0.0) -> GapReport:
    """Check the energy-convexity bound for a minimizer h against any
    competitor f on the same mesh:

        || f*rho - h*rho ||_1 <= sqrt(2) (E(f) - E(h))^(1/2)
                                  (E(f)^(1/2) + E(h)^(1/2)) + delta

    and the same bound for the L1 distance of the Hopf parts."""
    eu, ev, ew, rel = _edge_arrays(mesh)
    if mesh.kind == EUCLIDEAN:
        efn = _energy_euclidean
    elif mesh.kind == LINE:
        efn = _energy_line
    else:
        efn = _energy_hyperbolic
    e_f = float(efn(f.values, eu, ev, ew, rel))
    e_h = float(efn(h.values, eu, ev, ew, rel))
    gap = max(e_f - e_h, 0.0)
    rhs = math.sqrt(2 * gap) * (math.sqrt(e_f) + math.sqrt(e_h))
    lhs = pullback_difference_l1(mesh, f, h)
    hopf_f, _ = discrete_hopf(mesh, f)
    hopf_h, _ = discrete_hopf(mesh, h)
    hopf_lhs = hopf_l1(mesh, hopf_f - hopf_h)
    return GapReport(lhs, rhs, hopf_lhs, delta)
