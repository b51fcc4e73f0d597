"""Pseudo-spectral evaluation of the transport terms u . grad f."""

from __future__ import annotations

import numpy as np

from .spectral import Grid


class Velocity:
    """Physical-space velocity (v1, v2, w) built once per right-hand-side evaluation."""

    def __init__(self, grid: Grid, v1: np.ndarray, v2: np.ndarray, w: np.ndarray):
        self.grid = grid
        self.v1 = grid.inverse(v1)
        self.v2 = grid.inverse(v2)
        self.w = grid.inverse(w)

    def max_speed(self) -> float:
        return float(np.sqrt((self.v1**2 + self.v2**2 + self.w**2).max()))

    def transport(self, f: np.ndarray) -> np.ndarray:
        """Dealiased coefficients of u . grad f for the field with coefficients ``f``."""
        g = self.grid
        product = (
            self.v1 * g.inverse(g.ikx * f)
            + self.v2 * g.inverse(g.iky * f)
            + self.w * g.inverse(g.ikz * f)
        )
        return np.where(g.dealias_mask, g.forward(product), 0.0)


def dealiased_product(grid: Grid, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Coefficients of the dealiased product of two fields given by coefficients."""
    return np.where(grid.dealias_mask, grid.forward(grid.inverse(a) * grid.inverse(b)), 0.0)
