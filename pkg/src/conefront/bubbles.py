"""Bubble sets and causal-regularity verdicts.

The causal future of a base point is numerically semi-decidable: it is
represented as the narrowed-cone (uniformly timelike) reachable set plus
explicitly certified curves, so every verdict here is tri-state and every
'violated' carries a concrete witness.  Bubble cells are the grid cells
strictly between the causal boundary f_- and the timelike boundary f_+.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._grid import GridSpec, Rect, aligned_window
from .analysis import AnalysisBundle, analyze
from .cone import Point
from .curves import CurveSpec, classify_curve, concat, timelike_measure
from .certify import NotFound, TimelikeCertificate, certify_membership
from .reach import BAND_CELLS, DEFAULT_EPS, MemberValue, integrate_generator

#: bubble areas at or below this many cells count as numerically zero
AREA_CELLS = 4.0
HOLDS, VIOLATED, UNDETERMINED = "holds", "violated", "undetermined"


def grid_for(spec, n_t: int = 2001, n_x: int = 2001,
             window: Optional[Rect] = None, base: Optional[Point] = None) -> GridSpec:
    """Grid over the spec's analysis window with the base point row-aligned."""
    win = window or spec.analysis_window
    p = base or Point(*spec.base_point)
    aligned = aligned_window(p.t, win.t_min, win.t_max, win.x_min, win.x_max, n_t)
    return GridSpec(aligned, n_t, n_x)


@dataclass(frozen=True)
class BubbleReport:
    base: Point
    window: Rect
    past: bool
    area: float
    cell_count: int
    column_span: tuple            # (x_lo, x_hi) of columns with bubble cells
    classified: tuple = ()        # ((point, label, certificate-or-None), ...)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def is_numerically_zero(self) -> bool:
        return self.cell_count <= AREA_CELLS


@dataclass(frozen=True)
class Verdict:
    claim: str
    value: str
    witness: Optional[dict] = None
    detail: str = ""

    def __post_init__(self):
        if self.value == VIOLATED and not self.witness:
            raise ValueError("a violated verdict requires a concrete witness")


def _bundle_for(spec, p, grid, eps, past):
    if past:
        spec = spec.time_reflected()
        p = Point(-p.t, p.x)
        grid = grid.time_reflected()
    return analyze(spec, p, grid, eps), spec, p, grid


def bubble_set(spec, p: Point, grid: GridSpec,
               eps_sequence: Sequence[float] = DEFAULT_EPS,
               past: bool = False, band_cells: float = BAND_CELLS) -> BubbleReport:
    """Collect grid cells strictly between f_- and f_+ (beyond the band).

    Columns the narrowed runs never approach are treated as having f_+ at the
    window top (the gap above the causal boundary extends indefinitely);
    columns they close onto inherit the nearest boundary value.  Past bubbles
    are computed on the time-reflected field.
    """
    bundle, rspec, rp, rgrid = _bundle_for(spec, p, grid, eps_sequence, past)
    h_t, h_x = rgrid.h_t, rgrid.h_x
    band = band_cells * h_t
    fminus = bundle.f_minus.f
    fplus_ext = bundle.fplus_extended()
    ts = rgrid.ts
    t_top = rgrid.window.t_max
    count = 0
    col_lo, col_hi = math.inf, -math.inf
    col_counts = np.zeros(rgrid.n_x, dtype=np.int64)
    for j in range(rgrid.n_x):
        lo = fminus[j]
        if not np.isfinite(lo):
            continue
        hi = min(fplus_ext[j], t_top + h_t)
        lo_lim = lo + band
        hi_lim = hi - band
        if hi_lim <= lo_lim:
            continue
        r_lo = int(math.ceil((lo_lim - ts[0]) / h_t + 1e-9))
        r_hi = int(math.floor((hi_lim - ts[0]) / h_t - 1e-9))
        r_lo = max(r_lo, 0)
        r_hi = min(r_hi, rgrid.n_t - 1)
        n = max(r_hi - r_lo + 1, 0)
        if n > 0:
            col_counts[j] = n
            count += n
            col_lo = min(col_lo, rgrid.xs[j])
            col_hi = max(col_hi, rgrid.xs[j])
    area = count * h_t * h_x
    span = (col_lo, col_hi) if count else (math.nan, math.nan)
    return BubbleReport(base=p, window=grid.window, past=past, area=area,
                        cell_count=count, column_span=span,
                        meta={"col_counts": col_counts, "bundle": bundle,
                              "reflected_spec": rspec if past else None})


def classify_bubble_point(spec, p: Point, r: Point, grid: GridSpec,
                          certify_budget: int = 256,
                          eps_sequence: Sequence[float] = DEFAULT_EPS,
                          past: bool = False) -> tuple[str, object]:
    """Label a point between the boundaries as interior or exterior.

    Requires r inside the causal future but outside the narrowed-cone future.
    'interior' needs a verified timelike certificate; 'exterior' means the
    budgeted certificate search was exhausted while r stays clear of the
    narrowed-cone reach (a semi-decision, falsifiable by a larger budget).
    For past bubbles, the certificate runs from r up to p in the original
    time orientation.
    """
    if past:
        bundle, rspec, rp, rgrid = _bundle_for(spec, p, grid, eps_sequence, True)
        probe = Point(-r.t, r.x)
        mem_j = bundle.j_membership(probe)
        mem_i = bundle.icheck_membership(probe)
    else:
        bundle = analyze(spec, p, grid, eps_sequence)
        mem_j = bundle.j_membership(r)
        mem_i = bundle.icheck_membership(r)
    if mem_j.value is not MemberValue.IN or mem_i.value is not MemberValue.OUT:
        raise ValueError(
            f"classification requires in_J=IN and in_Icheck=OUT, got "
            f"{mem_j.value.value}/{mem_i.value.value}")
    if past:
        result = certify_membership(spec, r, p, grid, certify_budget)
    else:
        result = certify_membership(spec, p, r, grid, certify_budget)
    if isinstance(result, TimelikeCertificate):
        return "interior", result
    if mem_i.margin > -2 * BAND_CELLS and mem_i.margin > -1e8:
        return "undetermined", result
    return "exterior", result


# ---------------------------------------------------------------------------
# Push-up
# ---------------------------------------------------------------------------


def _ride_level(spec, p: Point) -> Optional[float]:
    """Time level along which the cone's lower edge degenerates to horizontal."""
    lo, _ = (float(v) for v in spec.field.sector_arrays(p.t, p.x))
    if lo <= 1e-9:
        return p.t
    probe = spec.probes.get("ride_t")
    return float(probe) if probe is not None else None


def _ride_lift_route(spec, p: Point, x1: float, mu: float, x_target: float,
                     grid: GridSpec, window: Rect) -> Optional[CurveSpec]:
    """Causal route with positive timelike measure: ride the degenerate level,
    lift through a short strictly timelike arc, then follow the outgoing null
    branch to the target column."""
    t_ride = _ride_level(spec, p)
    if t_ride is None:
        return None
    step = min(grid.h_t, grid.h_x)
    pieces = []
    # reach the ride level if p is not already on it
    if abs(p.t - t_ride) > 1e-12:
        if p.t > t_ride:
            return None
        gen0 = integrate_generator(spec, p, "v1", "maximal", step, window)
        near = np.where(gen0.ts >= t_ride - 5 * step)[0]
        if near.size == 0 or near[0] < 1:
            return None
        k = int(near[0])
        # vertical hop (strictly timelike) onto the ride level
        ts0 = np.append(gen0.ts[:k + 1], t_ride)
        xs0 = np.append(gen0.xs[:k + 1], gen0.xs[k])
        ts0 = np.minimum(ts0, t_ride)
        ts0 = np.maximum.accumulate(ts0)
        keep = np.append(True, (np.diff(ts0) + np.abs(np.diff(xs0))) > 1e-14)
        ts0, xs0 = ts0[keep], xs0[keep]
        if len(ts0) < 2:
            return None
        pieces.append(CurveSpec.from_nodes(_arc_params(ts0, xs0), ts0, xs0,
                                           label="to-ride"))
        x_start = float(xs0[-1])
    else:
        x_start = p.x
    if x1 <= x_start + 4 * grid.h_x:
        return None
    # strictly timelike arc gaining measure right before the liftoff
    box_t = np.linspace(t_ride, t_ride + mu, 9)
    box_x = np.linspace(x_start, x1, 9)
    lo, _ = spec.field.sector_arrays(*np.meshgrid(box_t, box_x, indexing="ij"))
    slope_bound = float(np.tan(np.clip(np.max(lo), 0.0, 1.4)))
    w = mu / max(4.0 * slope_bound, 0.5)
    w = min(w, 0.5 * (x1 - x_start))
    ride_nodes_x = np.linspace(x_start, x1 - w, 33)
    ride = CurveSpec.from_nodes(_arc_params(np.full_like(ride_nodes_x, t_ride),
                                            ride_nodes_x),
                                np.full_like(ride_nodes_x, t_ride), ride_nodes_x,
                                label="ride")
    pieces.append(ride)
    arc = CurveSpec.from_nodes([0.0, math.hypot(mu, w)],
                               [t_ride, t_ride + mu], [x1 - w, x1], label="lift-arc")
    pieces.append(arc)
    tail = integrate_generator(spec, Point(t_ride + mu, x1), "v1", "maximal",
                               step, window)
    idx = np.where(tail.xs >= x_target)[0]
    if idx.size == 0:
        return None
    k = max(int(idx[0]), 1)
    tail_cut = CurveSpec.from_nodes(tail.params[:k + 1], tail.ts[:k + 1],
                                    tail.xs[:k + 1], label="out-branch")
    pieces.append(tail_cut)
    route = pieces[0]
    for piece in pieces[1:]:
        route = concat(route, piece, n_nodes=300, tol=5e-6)
    return route


def _arc_params(ts, xs):
    s = np.zeros(len(ts))
    s[1:] = np.cumsum(np.hypot(np.diff(ts), np.diff(xs)))
    # strictly increasing params even across stationary nodes
    for i in range(1, len(s)):
        if s[i] <= s[i - 1]:
            s[i] = s[i - 1] + 1e-12
    return s


def pushup_check(spec, p: Point, grid: GridSpec,
                 eps_sequence: Sequence[float] = DEFAULT_EPS,
                 certify_budget: int = 256, tube_cells: float = 5.0) -> Verdict:
    """Can causal curves of positive timelike measure be traded for timelike
    ones?  Holds when the timelike boundary hugs the causal boundary;
    violated when some causally reached point with positive-timelike-measure
    access is classified exterior.

    The deformation neighbourhood is probed at a single declared tube radius
    (``tube_cells``); reports record it rather than shrinking it to zero.
    """
    bundle = analyze(spec, p, grid, eps_sequence)
    fminus = bundle.f_minus.f
    fplus_ext = bundle.fplus_extended()
    defined = np.isfinite(fminus)
    if not defined.any():
        return Verdict("pushup", UNDETERMINED, detail="no causal boundary found")
    gap = np.where(defined, np.minimum(fplus_ext, grid.window.t_max + grid.h_t)
                   - fminus, -np.inf)
    sup_gap = float(np.max(gap))
    if sup_gap <= AREA_CELLS * grid.h_t:
        return Verdict("pushup", HOLDS,
                       detail=f"sup(f+ - f-) = {sup_gap / grid.h_t:.2f} cells; "
                              f"tube radius {tube_cells} cells")
    # witness hunt inside the widest part of the gap
    order = np.argsort(-gap)
    for j in order[:8]:
        if not np.isfinite(fminus[j]) or gap[j] <= 2 * AREA_CELLS * grid.h_t:
            continue
        x_r = float(grid.xs[j])
        g = min(gap[j], grid.window.t_max - fminus[j])
        for frac in (0.3, 0.15):
            t_r = float(fminus[j] + frac * g)
            r = Point(t_r, x_r)
            try:
                label, result = classify_bubble_point(spec, p, r, grid,
                                                      certify_budget, eps_sequence)
            except ValueError:
                continue
            if label != "exterior":
                continue
            for x1_frac in (0.6, 0.75, 0.45):
                x1 = p.x + x1_frac * (x_r - p.x)
                mu = max(0.1 * t_r, 2 * grid.h_t)
                route = _ride_lift_route(spec, p, x1, mu, x_r, grid, grid.window)
                if route is None:
                    continue
                rep = classify_curve(route, spec, n_samples=600)
                if rep.verdict not in ("causal", "timelike_ae"):
                    continue
                tl = timelike_measure(route, spec, n_samples=600)
                if tl <= 0.0:
                    continue
                end = route.end
                em_j = bundle.j_membership(end)
                em_i = bundle.icheck_membership(end)
                if em_j.value is MemberValue.OUT or em_i.value is not MemberValue.OUT:
                    continue
                witness = {"point": (end.t, end.x), "route_label": route.label,
                           "timelike_measure": tl, "classification": rep.verdict,
                           "classify": "exterior", "tube_cells": tube_cells,
                           "route": route}
                return Verdict("pushup", VIOLATED, witness=witness,
                               detail=f"gap {gap[j] / grid.h_t:.1f} cells at x={x_r:.4f}")
    return Verdict("pushup", UNDETERMINED,
                   detail=f"gap {sup_gap / grid.h_t:.1f} cells but no verified witness")


# ---------------------------------------------------------------------------
# Openness / achronality / plainness
# ---------------------------------------------------------------------------


def openness_check(spec, p: Point, grid: GridSpec,
                   eps_sequence: Sequence[float] = DEFAULT_EPS,
                   targets: Optional[Sequence] = None,
                   certify_budget: int = 256) -> Verdict:
    """Probe whether the chronological future of p is open.

    Violated with witness q when a certified point has causal-exterior points
    within two grid cells; holds when every certified probe point is
    surrounded by causal-future points (a semi-decision).
    """
    bundle = analyze(spec, p, grid, eps_sequence)
    if targets is None:
        targets = spec.probes.get("certify_targets", ())
    certified = []
    for tq in targets:
        q = Point(*tq)
        if not grid.window.contains(q.t, q.x):
            continue
        result = certify_membership(spec, p, q, grid, certify_budget, _analysis=bundle)
        if isinstance(result, TimelikeCertificate):
            certified.append((q, result))
    if not certified:
        return Verdict("i_open", UNDETERMINED, detail="no probe point certified")
    offsets = [(0, 2), (0, -2), (2, 0), (-2, 0), (2, 2), (2, -2), (-2, 2), (-2, -2)]
    for q, cert in certified:
        for dr, dj in offsets:
            nb = Point(q.t + dr * grid.h_t, q.x + dj * grid.h_x)
            if not grid.window.contains(nb.t, nb.x):
                continue
            if bundle.j_membership(nb).value is MemberValue.OUT:
                witness = {"certified_point": (q.t, q.x),
                           "outside_neighbor": (nb.t, nb.x),
                           "construction": cert.construction, "certificate": cert}
                return Verdict("i_open", VIOLATED, witness=witness,
                               detail="certified point lies on the causal boundary")
    return Verdict("i_open", HOLDS,
                   detail=f"{len(certified)} certified points interior to the "
                          f"causal future (semi-decision)")


def achronality_probe(spec, p: Point, grid: GridSpec, n_pairs: int = 6,
                      eps_sequence: Sequence[float] = DEFAULT_EPS,
                      extra_boundary_points: Sequence = (),
                      certify_budget: int = 128) -> Verdict:
    """Try to connect two boundary points of the certified future by a
    timelike curve; success falsifies achronality of the boundary."""
    bundle = analyze(spec, p, grid, eps_sequence)
    f = bundle.f_minus.f
    cols = np.where(np.isfinite(f))[0]
    if cols.size + len(extra_boundary_points) < 2:
        return Verdict("achronal_boundary", UNDETERMINED,
                       detail="fewer than 2 boundary points")
    picks = cols[np.linspace(0, cols.size - 1, min(6, cols.size)).astype(int)]
    boundary = [Point(float(f[j]), float(grid.xs[j])) for j in picks]
    boundary += [Point(*bp) for bp in extra_boundary_points]
    pairs = []
    for i, r1 in enumerate(boundary):
        for r2 in boundary[i + 1:]:
            lo, hi = (r1, r2) if r1.t < r2.t else (r2, r1)
            if hi.t - lo.t > 2 * BAND_CELLS * grid.h_t:
                pairs.append((lo, hi))
    pairs = pairs[:n_pairs]
    for r1, r2 in pairs:
        r1s = Point(grid.window.t_min + grid.row_of(r1.t) * grid.h_t, r1.x)
        if not grid.window.contains(r1s.t, r1s.x):
            continue
        result = certify_membership(spec, r1s, r2, grid, certify_budget)
        if isinstance(result, TimelikeCertificate):
            witness = {"r1": (r1s.t, r1s.x), "r2": (r2.t, r2.x),
                       "construction": result.construction, "certificate": result}
            return Verdict("achronal_boundary", VIOLATED, witness=witness,
                           detail="boundary pair joined by a verified timelike curve")
    return Verdict("achronal_boundary", HOLDS,
                   detail=f"{len(pairs)} boundary pairs, no timelike connection found")


def plainness_report(spec, sample_points: Sequence, grid: GridSpec,
                     eps_sequence: Sequence[float] = DEFAULT_EPS) -> Verdict:
    """Holds when every sampled point has numerically zero future and past
    bubble area; violated with the offending report otherwise."""
    if not sample_points:
        raise ValueError("need at least one sample point")
    reports = []
    for tp in sample_points:
        pt = Point(*tp)
        for past in (False, True):
            rep = bubble_set(spec, pt, grid, eps_sequence, past=past)
            reports.append(rep)
            if not rep.is_numerically_zero:
                witness = {"point": (pt.t, pt.x), "past": past, "area": rep.area,
                           "cells": rep.cell_count, "report": rep}
                return Verdict("causally_plain", VIOLATED, witness=witness,
                               detail=f"bubble of {rep.cell_count} cells "
                                      f"({'past' if past else 'future'})")
    worst = max(r.cell_count for r in reports)
    return Verdict("causally_plain", HOLDS,
                   detail=f"max bubble {worst} cells over {len(reports)} reports")
