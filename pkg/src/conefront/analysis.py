"""Cached per-(spacetime, base point, grid) analysis bundles.

Bundling the exact front, the widened/narrowed boundary graphs, and the
membership helpers lets the verdict layer and the CLI share one set of
sweeps; results are deterministic functions of the configuration key.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._grid import GridSpec
from .cone import Point
from .reach import (BAND_CELLS, DEFAULT_EPS, FrontGrid, GraphingFn, Membership,
                    compute_fminus, compute_fplus, front_propagate, in_Icheck, in_J)

_CACHE: dict = {}


@dataclass(frozen=True)
class AnalysisBundle:
    spec: object
    p: Point
    grid: GridSpec
    eps_sequence: tuple
    front_exact: FrontGrid
    f_minus: GraphingFn
    f_plus: GraphingFn

    def j_membership(self, q: Point, band_cells: float = BAND_CELLS) -> Membership:
        return in_J(self.spec, self.p, q, self.grid, self.f_minus,
                    self.front_exact, band_cells)

    def icheck_membership(self, q: Point, band_cells: float = BAND_CELLS) -> Membership:
        return in_Icheck(self.spec, self.p, q, self.grid, self.f_plus, band_cells)

    def fplus_extended(self, reach_cells: float = BAND_CELLS) -> np.ndarray:
        """f_+ with undefined columns resolved for bubble-area purposes.

        A column no narrowed run touches is either adjacent to the narrowed
        domain (the timelike-future boundary closes onto it: copy the edge
        value) or genuinely unreached (+inf: the gap to the causal boundary
        extends to the window top).
        """
        f = self.f_plus.f.copy()
        touch = self.f_plus.meta.get("eps_min_touch")
        defined_idx = np.where(np.isfinite(f))[0]
        if defined_idx.size == 0:
            return np.where(np.isfinite(f), f, np.inf)
        touch_idx = np.where(np.isfinite(touch))[0] if touch is not None else defined_idx
        for j in np.where(~np.isfinite(f))[0]:
            dist = np.min(np.abs(touch_idx - j)) if touch_idx.size else np.inf
            if dist <= reach_cells:
                nearest = defined_idx[np.argmin(np.abs(defined_idx - j))]
                f[j] = f[nearest]
            else:
                f[j] = np.inf
        return f


def analyze(spec, p: Point, grid: GridSpec,
            eps_sequence: Sequence[float] = DEFAULT_EPS,
            moll_ratio: float = 0.5) -> AnalysisBundle:
    """Compute (or fetch) the full front/boundary bundle for (spec, p, grid)."""
    key = (spec.cache_key(), (p.t, p.x), grid.cache_key(),
           tuple(float(e) for e in eps_sequence), moll_ratio)
    hit = _CACHE.get(key)
    if hit is not None:
        return hit
    exact = front_propagate(spec, p, grid, "exact")
    fminus = compute_fminus(spec, p, grid, eps_sequence, exact_front=exact)
    fplus = compute_fplus(spec, p, grid, eps_sequence, fminus=fminus,
                          moll_ratio=moll_ratio)
    bundle = AnalysisBundle(spec=spec, p=p, grid=grid,
                            eps_sequence=tuple(float(e) for e in eps_sequence),
                            front_exact=exact, f_minus=fminus, f_plus=fplus)
    _CACHE[key] = bundle
    return bundle


def clear_cache():
    _CACHE.clear()
