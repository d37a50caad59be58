"""Coordinate rectangles and evaluation grids shared across modules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Rect:
    """Closed coordinate rectangle [t_min, t_max] x [x_min, x_max]."""

    t_min: float
    t_max: float
    x_min: float
    x_max: float

    def __post_init__(self):
        if not (np.isfinite([self.t_min, self.t_max, self.x_min, self.x_max]).all()):
            raise ValueError("rectangle bounds must be finite")
        if self.t_max <= self.t_min or self.x_max <= self.x_min:
            raise ValueError("degenerate rectangle")

    def contains(self, t: float, x: float, tol: float = 1e-12) -> bool:
        return (
            self.t_min - tol <= t <= self.t_max + tol
            and self.x_min - tol <= x <= self.x_max + tol
        )

    def contains_rect(self, other: "Rect", tol: float = 1e-9) -> bool:
        return (
            self.t_min - tol <= other.t_min
            and other.t_max <= self.t_max + tol
            and self.x_min - tol <= other.x_min
            and other.x_max <= self.x_max + tol
        )

    @property
    def t_span(self) -> float:
        return self.t_max - self.t_min

    @property
    def x_span(self) -> float:
        return self.x_max - self.x_min

    def time_reflected(self) -> "Rect":
        return Rect(-self.t_max, -self.t_min, self.x_min, self.x_max)

    def as_tuple(self):
        return (self.t_min, self.t_max, self.x_min, self.x_max)


@dataclass(frozen=True)
class GridSpec:
    """Uniform evaluation grid on a window.

    Rows index t, columns index x.  ``n_t``/``n_x`` count nodes, so steps are
    span/(n-1).
    """

    window: Rect
    n_t: int = 2001
    n_x: int = 2001

    def __post_init__(self):
        if self.n_t < 64 or self.n_x < 64:
            raise ValueError("grid resolution must be at least 64 nodes per axis")

    @property
    def h_t(self) -> float:
        return self.window.t_span / (self.n_t - 1)

    @property
    def h_x(self) -> float:
        return self.window.x_span / (self.n_x - 1)

    @property
    def ts(self) -> np.ndarray:
        return np.linspace(self.window.t_min, self.window.t_max, self.n_t)

    @property
    def xs(self) -> np.ndarray:
        return np.linspace(self.window.x_min, self.window.x_max, self.n_x)

    def row_of(self, t: float) -> int:
        r = int(round((t - self.window.t_min) / self.h_t))
        return min(max(r, 0), self.n_t - 1)

    def col_of(self, x: float) -> int:
        j = int(round((x - self.window.x_min) / self.h_x))
        return min(max(j, 0), self.n_x - 1)

    def mesh(self):
        """(T, X) arrays of shape (n_t, n_x)."""
        return np.meshgrid(self.ts, self.xs, indexing="ij")

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.window, (self.n_t - 1) * factor + 1, (self.n_x - 1) * factor + 1)

    def time_reflected(self) -> "GridSpec":
        return GridSpec(self.window.time_reflected(), self.n_t, self.n_x)

    def cache_key(self):
        return (self.window.as_tuple(), self.n_t, self.n_x)


def aligned_window(t_p: float, t_lo: float, t_hi: float, x_lo: float, x_hi: float,
                   n_t: int = 2001) -> Rect:
    """Window [t_lo, t_hi] x [x_lo, x_hi] nudged so t_p falls on a grid row.

    Front propagation starts exactly on a row; aligning avoids a half-step
    offset of the whole front.  The nudge shifts t_lo by less than one step.
    """
    h_t = (t_hi - t_lo) / (n_t - 1)
    if h_t <= 0:
        raise ValueError("empty time window")
    shift = (t_p - t_lo) - round((t_p - t_lo) / h_t) * h_t
    return Rect(t_lo + shift, t_hi + shift, x_lo, x_hi)
