"""Upper half-plane primitives used by the discrete harmonic solver.

Points are (x, y) with y > 0.  Tangent vectors at i are complex numbers in
the chart where the vertical direction is +iy.  Everything is numba-jitted
float64; the same functions run in pure Python when NUMBA_DISABLE_JIT is
set.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def dist(x1: float, y1: float, x2: float, y2: float) -> float:
    dx = x1 - x2
    dy = y1 - y2
    arg = 1.0 + (dx * dx + dy * dy) / (2.0 * y1 * y2)
    if arg < 1.0:
        arg = 1.0
    return math.acosh(arg)


@njit(cache=True)
def mobius(a: float, b: float, c: float, d: float, x: float, y: float):
    """Apply the real Mobius map (az+b)/(cz+d); determinant need not be 1."""
    den = (c * x + d) ** 2 + (c * y) ** 2
    nx = (a * x + b) * (c * x + d) + a * c * y * y
    det = a * d - b * c
    return nx / den, det * y / den


@njit(cache=True)
def log_at_i(qx: float, qy: float):
    """Tangent vector at i pointing toward q, with |v| = dist(i, q)."""
    d = dist(0.0, 1.0, qx, qy)
    if d == 0.0:
        return 0.0, 0.0
    alpha = math.atan2(2.0 * qx, qx * qx + qy * qy - 1.0)
    return d * math.sin(alpha), d * math.cos(alpha)


@njit(cache=True)
def exp_at_i(vx: float, vy: float):
    """Geodesic exponential at i."""
    d = math.hypot(vx, vy)
    if d == 0.0:
        return 0.0, 1.0
    alpha = math.atan2(vx, vy)
    # rotate the vertical geodesic endpoint i*e^d about i by -alpha
    ca = math.cos(alpha / 2.0)
    sa = math.sin(alpha / 2.0)
    return mobius(ca, -sa, sa, ca, 0.0, math.exp(d))


@njit(cache=True)
def interpolate(px: float, py: float, qx: float, qy: float, s: float):
    """Point at parameter s along the geodesic from p to q."""
    # normalize p -> i (z -> (z - px) / py), pull q along, rescale
    ux = (qx - px) / py
    uy = qy / py
    vx, vy = log_at_i(ux, uy)
    ex, ey = exp_at_i(s * vx, s * vy)
    return px + py * ex, py * ey


@njit(cache=True)
def local_energy(px, py, w, qx, qy) -> float:
    acc = 0.0
    for k in range(w.shape[0]):
        d = dist(px, py, qx[k], qy[k])
        acc += 0.5 * w[k] * d * d
    return acc


@njit(cache=True)
def karcher_step(px, py, w, qx, qy, damping: float, iters: int):
    """Damped move toward the weighted geodesic centroid of the q points."""
    cx, cy = px, py
    for _ in range(iters):
        sx = 0.0
        sy = 0.0
        sw = 0.0
        for k in range(w.shape[0]):
            ux = (qx[k] - cx) / cy
            uy = qy[k] / cy
            vx, vy = log_at_i(ux, uy)
            sx += w[k] * vx
            sy += w[k] * vy
            sw += w[k]
        if sw <= 0.0:
            return px, py
        ex, ey = exp_at_i(sx / sw, sy / sw)
        cx, cy = cx + cy * ex, cy * ey
    nx, ny = interpolate(px, py, cx, cy, damping)
    return nx, ny
