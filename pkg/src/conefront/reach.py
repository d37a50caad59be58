"""Reachable-set computation: null generators, causal fronts, boundary graphs.

Fronts are swept row-by-row in increasing t and stored as per-row interval
unions; this is exact for cone fields whose future sector stays within
[0, pi] (all catalogue fields), and such fields are required.  The lower
boundary of the causal future is extrapolated from runs with widened cones,
the boundary of the uniformly-timelike future from runs with mollified and
narrowed cones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from ._grid import GridSpec, Rect
from ._kernels import front_sweep
from .cone import (GridAngleField, NarrowedField, Point, WidenedField, mollify,
                   narrow_sector, widen_sector)

BAND_CELLS = 2.0
DEFAULT_EPS = (0.08, 0.04, 0.02)


class NumericalInstabilityError(RuntimeError):
    """Boundary extraction failed a convergence or monotonicity post-check."""


class GridTooCoarseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# FrontGrid
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FrontGrid:
    """Per-row reachable x-intervals swept from a base point."""

    grid: GridSpec
    base: Point
    provenance: str
    row_starts: np.ndarray   # (n_t, K) left endpoints
    row_ends: np.ndarray     # (n_t, K) right endpoints
    row_counts: np.ndarray   # (n_t,)
    first_touch: np.ndarray  # (n_x,) earliest reach time, +inf if never

    def intervals(self, r: int) -> list[tuple[float, float]]:
        n = int(self.row_counts[r])
        return [(float(self.row_starts[r, i]), float(self.row_ends[r, i]))
                for i in range(n)]

    def touched_mask(self) -> np.ndarray:
        return np.isfinite(self.first_touch)

    def signed_margin(self, p: Point) -> float:
        """Distance of p to the reachable set in grid cells (>0 inside)."""
        g = self.grid
        r = g.row_of(p.t)
        if abs(p.t - (g.window.t_min + r * g.h_t)) > 0.75 * g.h_t:
            return -math.inf
        n = int(self.row_counts[r])
        if n == 0:
            return -math.inf
        best = -math.inf
        for i in range(n):
            a, b = self.row_starts[r, i], self.row_ends[r, i]
            m = min(p.x - a, b - p.x) / g.h_x
            best = max(best, m)
        return best

    def contains_front(self, other: "FrontGrid", tol: float = 1e-9) -> bool:
        """Row-by-row interval inclusion: every interval of ``other`` is
        contained in one of this front's intervals."""
        if self.grid != other.grid:
            raise ValueError("fronts live on different grids")
        for r in range(self.grid.n_t):
            for a, b in other.intervals(r):
                inside = any(a >= a2 - tol and b <= b2 + tol
                             for a2, b2 in self.intervals(r))
                if not inside:
                    return False
        return True


class MemberValue(Enum):
    IN = "IN"
    OUT = "OUT"
    BOUNDARY_BAND = "BOUNDARY_BAND"


@dataclass(frozen=True)
class Membership:
    value: MemberValue
    margin: float  # signed distance to the boundary, grid cells


@dataclass(frozen=True)
class GraphingFn:
    """Boundary t = f(x) on the grid columns; NaN marks undefined columns."""

    xs: np.ndarray
    f: np.ndarray
    kind: str                  # f_minus | f_plus
    grid: GridSpec
    per_eps: dict = field(default_factory=dict, compare=False)
    meta: dict = field(default_factory=dict, compare=False)

    def defined(self) -> np.ndarray:
        return np.isfinite(self.f)

    def value_at(self, x: float) -> float:
        j = self.grid.col_of(x)
        return float(self.f[j])

    def lipschitz_ok(self, slope_bound_fn=None, slack_cells: float = 4.0) -> bool:
        """Local Lipschitz check |df| <= h_x * local slope bound + slack."""
        f = self.f
        ok = True
        h_x, h_t = self.grid.h_x, self.grid.h_t
        for j in range(len(f) - 1):
            if not (np.isfinite(f[j]) and np.isfinite(f[j + 1])):
                continue
            bound = math.inf if slope_bound_fn is None else slope_bound_fn(
                0.5 * (self.xs[j] + self.xs[j + 1]))
            if not math.isfinite(bound):
                continue
            if abs(f[j + 1] - f[j]) > h_x * bound + slack_cells * h_t:
                ok = False
        return ok


# ---------------------------------------------------------------------------
# Front propagation
# ---------------------------------------------------------------------------

_MODES = ("exact", "widened", "narrowed")


def _sector_grids(fld, grid: GridSpec):
    T, X = grid.mesh()
    low, upp = fld.sector_arrays(T, X)
    low = np.ascontiguousarray(low, dtype=float)
    upp = np.ascontiguousarray(upp, dtype=float)
    if not (np.isfinite(low).all() and np.isfinite(upp).all()):
        raise ValueError("non-finite cone angles on the grid")
    if low.min() < -math.pi / 2 or upp.max() > 1.5 * math.pi:
        raise ValueError("cone sector leaves the supported angular range")
    return low, upp


def _mode_field(spec, mode: str, eps: Optional[float], grid: GridSpec,
                moll_ratio: float = 0.5):
    fld = spec.field
    if mode == "exact":
        return fld
    if mode == "widened":
        return widen_sector(fld, eps)
    if mode == "narrowed":
        if not hasattr(fld, "theta_at"):
            raise ValueError("narrowed mode requires an angle field (mollification)")
        if not (0.0 < moll_ratio <= 0.5):
            raise ValueError("mollification width must be at most eps/2")
        smooth = mollify(fld, eps * moll_ratio, grid)
        return narrow_sector(smooth, eps)
    raise ValueError(f"unknown mode {mode!r}; expected one of {_MODES}")


def front_propagate(spec, p: Point, grid: GridSpec, mode: str = "exact",
                    eps: Optional[float] = None, max_intervals: int = 64,
                    moll_ratio: float = 0.5) -> FrontGrid:
    """Sweep the reachable set of p forward in t on the grid.

    mode 'exact' uses the field's own cones, 'widened'/'narrowed' the
    eps-widened or mollified-and-eps-narrowed cones.  The sweep requires
    every future sector to stay within [0, pi] up to the widening amount
    (time coordinate non-decreasing along causal directions).
    """
    window = grid.window
    if not window.contains(p.t, p.x):
        raise ValueError("base point outside the grid window")
    if mode != "exact" and (eps is None or eps <= 0):
        raise ValueError("widened/narrowed modes need a positive eps")
    fld = _mode_field(spec, mode, eps, grid, moll_ratio)
    low, upp = _sector_grids(fld, grid)
    slack = (eps or 0.0) + 1e-9
    if low.min() < -slack or upp.max() > math.pi + slack:
        raise ValueError("front sweep requires sectors within [0, pi]")

    # cap per-step travel at one window width
    s_cap = window.x_span / grid.h_t
    r0 = grid.row_of(p.t)
    if abs(p.t - (window.t_min + r0 * grid.h_t)) > 0.5 * grid.h_t + 1e-12:
        raise ValueError("base point does not sit on a grid row")

    K = max_intervals
    out_a = np.zeros((grid.n_t, K))
    out_b = np.zeros((grid.n_t, K))
    out_n = np.zeros(grid.n_t, dtype=np.int64)
    first = np.full(grid.n_x, np.inf)
    status = front_sweep(low, upp, window.t_min, grid.h_t, grid.h_x,
                         window.x_min, r0, p.x, p.x, s_cap,
                         out_a, out_b, out_n, first)
    if status != 0:
        raise NumericalInstabilityError("front exceeded the interval budget")
    prov = mode if mode == "exact" else (
        f"widened({eps:g})" if mode == "widened" else f"narrowed({eps:g}, mollified)")
    return FrontGrid(grid=grid, base=p, provenance=prov, row_starts=out_a,
                     row_ends=out_b, row_counts=out_n, first_touch=first)


# ---------------------------------------------------------------------------
# Generators with extremal selection
# ---------------------------------------------------------------------------


def _sector_at(fld, t: float, x: float):
    lo, up = fld.sector_arrays(t, x)
    return float(lo), float(up)


def integrate_generator(spec, start: Point, branch: str = "v1",
                        selector: str = "maximal", step: float = 1e-3,
                        window: Optional[Rect] = None, deltas=(4.0, 2.0, 1.0),
                        max_steps: int = 2_000_000):
    """Extremal null generator through ``start`` at unit Euclidean speed.

    branch 'v1' follows the right-moving cone edge (direction angle = sector
    lower), 'v2' the left-moving edge.  The extremal (funnel-envelope)
    solution is obtained by biasing the edge direction by +-delta into/out of
    the cone for delta in ``deltas``*step and extrapolating delta -> 0 with
    two order-1 Richardson stages; 'maximal' is the upper t(x) envelope.
    Curves are clipped at the window boundary.
    """
    from .curves import CurveSpec

    if branch not in ("v1", "v2"):
        raise ValueError("branch must be 'v1' or 'v2'")
    if selector not in ("maximal", "minimal"):
        raise ValueError("selector must be 'maximal' or 'minimal'")
    window = window or spec.analysis_window
    if not window.contains(start.t, start.x):
        raise ValueError("start point outside window")
    if step <= 0:
        raise ValueError("step must be positive")
    fld = spec.field
    sign = 1.0 if selector == "maximal" else -1.0
    if branch == "v2":
        sign = -sign

    def run(delta_rot: float):
        t, x = start.t, start.x
        ts = [t]
        xs = [x]
        for _ in range(max_steps):
            lo, up = _sector_at(fld, t, x)
            phi = (lo if branch == "v1" else up) + sign * delta_rot
            dt1, dx1 = math.sin(phi), math.cos(phi)
            tm, xm = t + 0.5 * step * dt1, x + 0.5 * step * dx1
            if not window.contains(tm, xm, tol=step):
                break
            lo2, up2 = _sector_at(fld, tm, xm)
            phi2 = (lo2 if branch == "v1" else up2) + sign * delta_rot
            dt, dx = math.sin(phi2), math.cos(phi2)
            t_new, x_new = t + step * dt, x + step * dx
            if not window.contains(t_new, x_new):
                # clip at the boundary along the last segment
                frac = _clip_fraction(t, x, t_new, x_new, window)
                if frac > 1e-9:
                    ts.append(t + frac * (t_new - t))
                    xs.append(x + frac * (x_new - x))
                break
            t, x = t_new, x_new
            ts.append(t)
            xs.append(x)
        return np.asarray(ts), np.asarray(xs)

    runs = [run(d * step) for d in sorted(deltas, reverse=True)]
    n = min(len(t) for t, _ in runs)
    if n < 2:
        raise ValueError("generator exits the window immediately")
    tt = [t[:n] for t, _ in runs]
    xx = [x[:n] for _, x in runs]
    # two-stage order-1 Richardson in delta (ratio 2): 4 f(d) - 4 f(2d) + f(4d)
    t_ext = 4.0 * tt[2] - 4.0 * tt[1] + tt[0]
    x_ext = 4.0 * xx[2] - 4.0 * xx[1] + xx[0]
    s = np.arange(n) * step
    label = f"{spec.name}-{branch}-{selector}"
    meta = {"delta_curves": [(t, x) for t, x in zip(tt, xx)], "step": step}
    return CurveSpec.from_nodes(s, t_ext, x_ext, label=label, meta=meta)


def _clip_fraction(t0, x0, t1, x1, window: Rect) -> float:
    frac = 1.0
    for lo, hi, a, b in ((window.t_min, window.t_max, t0, t1),
                         (window.x_min, window.x_max, x0, x1)):
        d = b - a
        if d > 0 and b > hi:
            frac = min(frac, (hi - a) / d)
        elif d < 0 and b < lo:
            frac = min(frac, (lo - a) / d)
    return max(frac, 0.0)


# ---------------------------------------------------------------------------
# Boundary graphs
# ---------------------------------------------------------------------------


def _ladder(values: list[np.ndarray], eps: list[float], first_order: float,
            ) -> np.ndarray:
    """Two-stage Richardson over three eps levels (coarse to fine).

    The first stage assumes convergence order ``first_order`` (1 for widened
    boundaries, whose leading error is eps and eps*log eps; 1/2 for
    mollified-narrowed boundaries, whose leading error is sqrt(eps)); the
    second stage is order 1 and removes any linear-in-eps remainder either
    way.
    """
    f0, f1, f2 = values[-3], values[-2], values[-1]
    e0, e1, e2 = eps[-3], eps[-2], eps[-1]
    with np.errstate(invalid="ignore"):
        ra = (e1 / e2) ** first_order
        rb = (e0 / e1) ** first_order
        lvl1a = (ra * f2 - f1) / (ra - 1.0)
        lvl1b = (rb * f1 - f0) / (rb - 1.0)
        r2 = e0 / e1
        full = (r2 * lvl1a - lvl1b) / (r2 - 1.0)
    return full


def _extrapolate_columns(per_eps: dict, h_t: float, direction: int,
                         first_order: float,
                         ratio_window: tuple = (0.25, 0.9),
                         noise_cells: float = 2.0) -> np.ndarray:
    """Per-column eps->0 limit with an asymptotic-regime guard.

    Columns whose level differences are below the grid noise floor are taken
    as converged; otherwise the ratio of successive differences must look
    like a fixed-order power law, else the column is marked undefined (NaN):
    near degenerate walls the eps ladder leaves its convergence region and no
    polynomial extrapolation is meaningful there.
    """
    eps_sorted = sorted(per_eps, reverse=True)[-3:]
    f0, f1, f2 = (per_eps[e] for e in eps_sorted)
    full_depth = np.isfinite(f0) & np.isfinite(f1) & np.isfinite(f2)
    out = np.full_like(f2, np.nan)
    if not full_depth.any():
        return out
    ladder = _ladder([f0, f1, f2], list(eps_sorted), first_order)
    with np.errstate(invalid="ignore", divide="ignore"):
        d1 = direction * (f1 - f0)
        d2 = direction * (f2 - f1)
        small = (np.abs(d1) <= noise_cells * h_t) & (np.abs(d2) <= noise_cells * h_t)
        ratio = np.where(np.abs(d1) > 1e-300, d2 / np.abs(d1), 0.0) * np.sign(d1)
        asymptotic = (ratio >= ratio_window[0]) & (ratio <= ratio_window[1])
    ok = full_depth & (small | asymptotic) & np.isfinite(ladder)
    out[ok] = ladder[ok]
    return out


def _check_monotone(per_eps: dict, direction: int, h_t: float,
                    tol_cells: float = 3.0, max_frac: float = 0.05):
    """direction=+1: values must not decrease as eps shrinks (widened fronts
    reach later in the limit); -1 for narrowed."""
    eps_sorted = sorted(per_eps, reverse=True)
    bad = 0
    total = 0
    for e1, e2 in zip(eps_sorted, eps_sorted[1:]):
        a, b = per_eps[e1], per_eps[e2]
        both = np.isfinite(a) & np.isfinite(b)
        total += int(both.sum())
        if direction > 0:
            bad += int(np.sum(b[both] < a[both] - tol_cells * h_t))
        else:
            bad += int(np.sum(b[both] > a[both] + tol_cells * h_t))
    if total and bad / total > max_frac:
        raise NumericalInstabilityError(
            f"boundary sequence not monotone in eps ({bad}/{total} columns)")


def compute_fminus(spec, p: Point, grid: GridSpec,
                   eps_sequence: Sequence[float] = DEFAULT_EPS,
                   exact_front: Optional[FrontGrid] = None) -> GraphingFn:
    """Lower boundary of the causal future as a graph t = f_-(x).

    Runs widened-cone fronts for each eps, extrapolates the per-column first
    reach times to eps -> 0, and restricts the domain to columns touched by
    the exact front (columns beyond a null wall stay undefined).
    """
    eps_sequence = _validate_eps(eps_sequence)
    exact = exact_front or front_propagate(spec, p, grid, "exact")
    per_eps = {}
    for e in eps_sequence:
        fg = front_propagate(spec, p, grid, "widened", e)
        per_eps[e] = fg.first_touch.copy()
    _check_monotone(per_eps, +1, grid.h_t)
    clipped = _monotone_clip(per_eps, +1)
    ladder = _extrapolate_columns(clipped, grid.h_t, +1, first_order=1.0)
    exact_ft = exact.first_touch
    # the exact sweep is the structural backbone: it fixes the domain, and
    # the widened-limit ladder refines it only where the two agree to within
    # the boundary band (disagreement marks the ladder as unconverged)
    with np.errstate(invalid="ignore"):
        refine = np.isfinite(ladder) & (np.abs(ladder - exact_ft) <= 3.0 * grid.h_t)
    f = np.where(np.isfinite(exact_ft), np.where(refine, ladder, exact_ft), np.nan)
    return GraphingFn(xs=grid.xs, f=f, kind="f_minus", grid=grid,
                      per_eps=per_eps, meta={"exact_first_touch": exact_ft})


def compute_fplus(spec, p: Point, grid: GridSpec,
                  eps_sequence: Sequence[float] = DEFAULT_EPS,
                  fminus: Optional[GraphingFn] = None,
                  wall_margin_factor: float = 0.2,
                  moll_ratio: float = 0.5) -> GraphingFn:
    """Lower boundary of the uniformly-timelike future, t = f_+(x).

    Runs mollified-and-narrowed fronts per eps and extrapolates the
    per-column first reach times to eps -> 0 with a {1, sqrt(eps), eps}
    model (mollification biases the boundary by O(sqrt(eps)), narrowing by
    O(eps)).  A column keeps a value only where the ladder is trustworthy:
    all three runs reach it, successive differences look like a power law,
    and the largest eps stays below a fraction of the column's angular
    margin to a null wall (inside that margin the eps-expansion of arrival
    times diverges and no extrapolation is meaningful).  Where both are
    defined the result is clipped to stay >= f_-(x).
    """
    eps_sequence = _validate_eps(eps_sequence)
    per_eps = {}
    domains = []
    for e in eps_sequence:
        if grid.h_t > e * moll_ratio / 2 or grid.h_x > e * moll_ratio / 2:
            raise GridTooCoarseError("grid must resolve the mollification width")
        fg = front_propagate(spec, p, grid, "narrowed", e, moll_ratio=moll_ratio)
        per_eps[e] = fg.first_touch.copy()
        domains.append(np.isfinite(fg.first_touch))
    _check_monotone(per_eps, -1, grid.h_t)
    clipped = _monotone_clip(per_eps, -1)
    eps_sorted = sorted(clipped, reverse=True)[-3:]
    f0, f1, f2 = (clipped[e] for e in eps_sorted)
    fit = _model_fit(list(eps_sorted), [f0, f1, f2])
    with np.errstate(invalid="ignore", divide="ignore"):
        d1 = f1 - f0
        d2 = f2 - f1
        small = (np.abs(d1) <= 2.0 * grid.h_t) & (np.abs(d2) <= 2.0 * grid.h_t)
        ratio = np.where(np.abs(d1) > 1e-300, d2 / d1, 0.0)
        asymptotic = (ratio >= 0.3) & (ratio <= 0.8)
    margin = _wall_margins(spec, p, grid)
    trusted = margin * wall_margin_factor >= max(eps_sorted)
    full = np.isfinite(f0) & np.isfinite(f1) & np.isfinite(f2)
    keep = full & (small | (asymptotic & trusted)) & np.isfinite(fit)
    f = np.where(keep, fit, np.nan)
    if fminus is not None:
        both = np.isfinite(f) & np.isfinite(fminus.f)
        f = np.where(both, np.maximum(f, fminus.f), f)
    meta = {"domains": domains, "eps_min_touch": per_eps[min(per_eps)],
            "margin": margin}
    return GraphingFn(xs=grid.xs, f=f, kind="f_plus", grid=grid,
                      per_eps=per_eps, meta=meta)


def _model_fit(eps: list, values: list) -> np.ndarray:
    """Per-column limit of the three-point fit f(e) = f0 + A sqrt(e) + B e."""
    V = np.array([[1.0, math.sqrt(e), e] for e in eps])
    w = np.linalg.solve(V.T, np.array([1.0, 0.0, 0.0]))
    with np.errstate(invalid="ignore"):
        return w[0] * values[0] + w[1] * values[1] + w[2] * values[2]


def _wall_margins(spec, p: Point, grid: GridSpec) -> np.ndarray:
    """Angular distance of each column's arrival edge from vertical.

    Columns right of the base point are reached by rightward motion governed
    by the lower cone edge; columns to the left by the upper edge.  The
    margin is the column's worst (over time) gap between that edge and the
    vertical direction.
    """
    low, upp = _sector_grids(spec.field, grid)
    j_p = grid.col_of(p.x)
    margin_low = 0.5 * math.pi - low.max(axis=0)
    margin_upp = upp.min(axis=0) - 0.5 * math.pi
    cols = np.arange(grid.n_x)
    return np.where(cols >= j_p, margin_low, margin_upp)


def _validate_eps(eps_sequence):
    eps = tuple(float(e) for e in eps_sequence)
    if len(eps) < 3:
        raise ValueError("eps sequence needs at least 3 entries")
    if not all(a > b > 0 for a, b in zip(eps, eps[1:])):
        raise ValueError("eps sequence must be strictly decreasing and positive")
    return eps


def _monotone_clip(per_eps: dict, direction: int) -> dict:
    """Clip small monotonicity violations before extrapolating."""
    eps_sorted = sorted(per_eps, reverse=True)
    out = {eps_sorted[0]: per_eps[eps_sorted[0]].copy()}
    for prev, cur in zip(eps_sorted, eps_sorted[1:]):
        a, b = out[prev], per_eps[cur].copy()
        both = np.isfinite(a) & np.isfinite(b)
        if direction > 0:
            b[both] = np.maximum(b[both], a[both])
        else:
            b[both] = np.minimum(b[both], a[both])
        out[cur] = b
    return out


# ---------------------------------------------------------------------------
# Membership
# ---------------------------------------------------------------------------


def in_J(spec, p: Point, q: Point, grid: GridSpec, fminus: GraphingFn,
         exact_front: FrontGrid, band_cells: float = BAND_CELLS) -> Membership:
    """Tri-state membership of q in the causal future of p."""
    band = band_cells * grid.h_t
    j = grid.col_of(q.x)
    fv = fminus.f[j]
    if np.isfinite(fv):
        margin = (q.t - fv) / grid.h_t
        if q.t >= fv + band:
            return Membership(MemberValue.IN, margin)
        if q.t <= fv - band:
            return Membership(MemberValue.OUT, margin)
        return Membership(MemberValue.BOUNDARY_BAND, margin)
    m = exact_front.signed_margin(q)
    if m <= -band_cells or m == -math.inf:
        return Membership(MemberValue.OUT, m if math.isfinite(m) else -1e9)
    if m >= band_cells:
        return Membership(MemberValue.IN, m)
    return Membership(MemberValue.BOUNDARY_BAND, m)


def in_Icheck(spec, p: Point, q: Point, grid: GridSpec, fplus: GraphingFn,
              band_cells: float = BAND_CELLS) -> Membership:
    """Tri-state membership of q in the uniformly-timelike future of p."""
    band = band_cells * grid.h_t
    j = grid.col_of(q.x)
    fv = fplus.f[j]
    if np.isfinite(fv):
        margin = (q.t - fv) / grid.h_t
        if q.t > fv + band:
            return Membership(MemberValue.IN, margin)
        if q.t < fv - band:
            return Membership(MemberValue.OUT, margin)
        return Membership(MemberValue.BOUNDARY_BAND, margin)
    # column carries no converged timelike boundary: membership cannot be
    # asserted, so the conservative answer is OUT
    return Membership(MemberValue.OUT, -1e9)
