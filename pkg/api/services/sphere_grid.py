"""
twistorkit Sphere Grid
Finite-difference calculus on the two-chart discretization of the domain sphere.

Chart 0 uses z, chart 1 uses z' = 1/z; both are N×N grids on [−L, L]².
Interior nodes get fourth-order central differences; fringe nodes are
tied to the other chart by bicubic interpolation at 1/z.
"""

import logging
import math
from typing import Tuple

import numpy as np

from models.curves import SphereGrid
from services.errors import GridError

logger = logging.getLogger(__name__)

# f'(0) ≈ (f(−2) − 8f(−1) + 8f(1) − f(2)) / 12h
STENCIL_OFFSETS = (-2, -1, 1, 2)
STENCIL_WEIGHTS = (1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0)
FOURTH_DIFFERENCE = (1.0, -4.0, 6.0, -4.0, 1.0)

# partition of unity on the sphere: chart 0 owns |z| ≤ INNER, chart 1 owns |z| ≥ OUTER
PARTITION_INNER = 0.8
PARTITION_OUTER = 1.25


def _smooth_step(s: float) -> float:
    """1 for s ≤ 0, 0 for s ≥ 1, smooth in between."""
    if s <= 0.0:
        return 1.0
    if s >= 1.0:
        return 0.0
    a = math.exp(-1.0 / (1.0 - s))
    b = math.exp(-1.0 / s)
    return a / (a + b)


def chart0_weight(r: float) -> float:
    return _smooth_step((r - PARTITION_INNER) / (PARTITION_OUTER - PARTITION_INNER))


def lagrange_weights(p: float, start: int) -> np.ndarray:
    """Cubic Lagrange weights at fractional index p for nodes start..start+3."""
    nodes = start + np.arange(4, dtype=float)
    w = np.ones(4)
    for k in range(4):
        for m in range(4):
            if m != k:
                w[k] *= (p - nodes[m]) / (nodes[k] - nodes[m])
    return w


class SphereDiscretization:
    """Node bookkeeping, difference operators, overlap interpolation and quadrature"""

    def __init__(self, grid: SphereGrid):
        self.grid = grid
        n, f = grid.n, grid.fringe
        if n - 2 * f < 5:
            raise GridError("grid too small for the interior stencil", n=n)
        self.interior = np.zeros((n, n), dtype=bool)
        self.interior[f:n - f, f:n - f] = True
        self.fringe_nodes, self.interp_nodes, self.interp_weights = self._interpolation()
        self.weights = self._partition()
        logger.debug("sphere grid N=%d: %d fringe nodes per chart", n, len(self.fringe_nodes) // 2)

    # ─────────────────────────────────────────────────────────
    # Derivatives
    # ─────────────────────────────────────────────────────────

    def derivative(self, values: np.ndarray, direction: int) -> np.ndarray:
        """
        ∂_s (direction 0) or ∂_t (direction 1) of node values shaped
        (2, N, N, ...), valid on interior nodes and zero elsewhere.
        """
        axis = 1 + direction
        n = self.grid.n
        out = np.zeros_like(values)
        acc = 0.0
        for offset, weight in zip(STENCIL_OFFSETS, STENCIL_WEIGHTS):
            acc = acc + weight * np.take(values, np.arange(2 + offset, n - 2 + offset), axis=axis)
        index = [slice(None)] * values.ndim
        index[axis] = slice(2, n - 2)
        out[tuple(index)] = acc / self.grid.h
        return out

    def roughness(self, vectors: np.ndarray) -> np.ndarray:
        """
        Gram matrix of undivided fourth differences along s and t for the
        columns of `vectors` (flattened node fields). Zero on fields that are
        cubic in each chart; about 16² per unit norm on odd–even modes.
        """
        n = self.grid.n
        X = np.asarray(vectors).reshape(2, n, n, 6, -1)
        rows = []
        for axis in (1, 2):
            d4 = sum(w * np.take(X, np.arange(k, n - 4 + k), axis=axis)
                     for k, w in enumerate(FOURTH_DIFFERENCE))
            rows.append(d4.reshape(-1, X.shape[-1]))
        R = np.concatenate(rows)
        return R.T @ R

    # ─────────────────────────────────────────────────────────
    # Overlap interpolation
    # ─────────────────────────────────────────────────────────

    def _stencil_start(self, coordinate: float) -> Tuple[float, int]:
        grid = self.grid
        p = (coordinate + grid.half_width) / grid.h
        start = int(math.floor(p)) - 1
        if start < grid.fringe or start + 3 > grid.n - 1 - grid.fringe:
            raise GridError("overlap point falls outside the other chart's interior",
                            coordinate=coordinate, n=grid.n)
        return p, start

    def _interpolation(self):
        grid = self.grid
        fringe, nodes, weights = [], [], []
        for chart in (0, 1):
            other = 1 - chart
            for i in range(grid.n):
                for j in range(grid.n):
                    if self.interior[i, j]:
                        continue
                    w = 1.0 / grid.z(i, j)
                    ps, si = self._stencil_start(w.real)
                    pt, sj = self._stencil_start(w.imag)
                    ws = lagrange_weights(ps, si)
                    wt = lagrange_weights(pt, sj)
                    fringe.append(grid.node(chart, i, j))
                    nodes.append([grid.node(other, si + a, sj + b) for a in range(4) for b in range(4)])
                    weights.append(np.outer(ws, wt).reshape(-1))
        return np.array(fringe), np.array(nodes), np.array(weights)

    def interpolate(self, flat_values: np.ndarray) -> np.ndarray:
        """Values of the other chart at 1/z for every fringe node, shape (n_fringe, ...)."""
        return np.einsum("fk,fk...->f...", self.interp_weights, flat_values[self.interp_nodes])

    # ─────────────────────────────────────────────────────────
    # Quadrature
    # ─────────────────────────────────────────────────────────

    def _partition(self) -> np.ndarray:
        grid = self.grid
        weights = np.zeros((2, grid.n, grid.n))
        for i in range(grid.n):
            for j in range(grid.n):
                r = abs(grid.z(i, j))
                weights[0, i, j] = chart0_weight(r)
                weights[1, i, j] = 1.0 if r == 0.0 else 1.0 - chart0_weight(1.0 / r)
        return weights

    def integrate(self, density: np.ndarray) -> float:
        """∫ of a 2-form given by its ds∧dt density per node (shape (2, N, N))."""
        return float(np.sum(self.weights * density) * self.grid.h ** 2)
