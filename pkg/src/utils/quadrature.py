"""
Gauss-Legendre panels and central finite differences shared by the
transform, weight and circle-method code.
"""
import numpy as np
from cachetools import cached
from scipy.special import roots_legendre

from src.utils.cache import legendre_cache, legendre_lock

PANEL_ORDER = 16


@cached(cache=legendre_cache, lock=legendre_lock)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def composite_gauss_legendre(
    lo: float, hi: float, panels: int, order: int = PANEL_ORDER
) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of `panels` equal Gauss-Legendre panels on [lo, hi]."""
    panels = max(1, int(panels))
    base_nodes, base_weights = gauss_legendre(order)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * base_nodes[None, :]).ravel()
    weights = (half[:, None] * base_weights[None, :]).ravel()
    return nodes, weights


# 5-point central stencils for the first and second derivative
_STENCIL_OFFSETS = np.array([-2.0, -1.0, 0.0, 1.0, 2.0])
_STENCILS = {
    0: np.array([0.0, 0.0, 1.0, 0.0, 0.0]),
    1: np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0,
    2: np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0,
}


def derivative_1d(f, x, order: int, h: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    stencil = _STENCILS[order]
    total = np.zeros_like(x)
    for offset, coefficient in zip(_STENCIL_OFFSETS, stencil):
        if coefficient != 0.0:
            total = total + coefficient * f(x + offset * h)
    return total / h**order


def derivative_2d(f, x, y, i: int, j: int, hx: float, hy: float) -> np.ndarray:
    """Mixed partial ∂^i_x ∂^j_y f by the tensor product of 5-point stencils."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = _STENCILS[i], _STENCILS[j]
    total = np.zeros(np.broadcast(x, y).shape)
    for ox, cx in zip(_STENCIL_OFFSETS, sx):
        if cx == 0.0:
            continue
        for oy, cy in zip(_STENCIL_OFFSETS, sy):
            if cy == 0.0:
                continue
            total = total + cx * cy * f(x + ox * hx, y + oy * hy)
    return total / (hx**i * hy**j)
