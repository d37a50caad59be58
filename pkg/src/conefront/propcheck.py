"""Manifest-driven property harness.

Evaluates every non-unknown flag of a spacetime's expected manifest with the
verdict machinery and reports agreement.  Computed flags are themselves
tri-state; a mismatch requires both sides definite and different.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._grid import Rect
from .analysis import analyze
from .bubbles import (AREA_CELLS, HOLDS, UNDETERMINED, VIOLATED, Verdict,
                      bubble_set, classify_bubble_point, grid_for,
                      openness_check, plainness_report, pushup_check)
from .certify import NotFound, TimelikeCertificate, certify_membership
from .cone import Point
from .reach import DEFAULT_EPS, MemberValue, integrate_generator
from .zoo import NO, UNKNOWN, YES

_VERDICT_TO_FLAG = {HOLDS: YES, VIOLATED: NO, UNDETERMINED: UNKNOWN}


@dataclass(frozen=True)
class FlagResult:
    flag: str
    expected: str
    computed: str
    detail: str = ""

    @property
    def mismatch(self) -> bool:
        return (self.expected != UNKNOWN and self.computed != UNKNOWN
                and self.expected != self.computed)


def _axis_crossing(spec, grid) -> float:
    """Time at which the outgoing extremal generator reaches the wall."""
    p = Point(*spec.base_point)
    step = min(grid.h_t, grid.h_x)
    gen = integrate_generator(spec, p, "v1", "maximal", step, grid.window)
    axis = spec.probes.get("axis_x", 0.0)
    hit = np.where(gen.xs >= axis - 1e-6)[0]
    if hit.size == 0:
        return math.inf
    return float(gen.ts[int(hit[0])])


def evaluate_manifest(spec, n_grid: int = 2001, budget: int = 256,
                      eps=DEFAULT_EPS) -> list[FlagResult]:
    """Run the verdict suite against the spec's expected manifest."""
    manifest = spec.manifest.as_dict()
    p = Point(*spec.base_point)
    grid = grid_for(spec, n_grid, n_grid)
    bundle = analyze(spec, p, grid, eps)
    results = []

    def record(flag, computed, detail=""):
        results.append(FlagResult(flag, manifest[flag], computed, detail))

    # causal plainness: bubbles of the base point, future and past, plus any
    # declared extra sample
    if manifest["causally_plain"] != UNKNOWN:
        samples = [spec.base_point]
        extra = spec.probes.get("past_bubble_point")
        if extra is not None:
            samples.append(extra)
        verdict = plainness_report(spec, samples, grid, eps)
        record("causally_plain", _VERDICT_TO_FLAG[verdict.value], verdict.detail)

    # openness of the chronological future
    openness = None
    if manifest["i_open"] != UNKNOWN:
        openness = openness_check(spec, p, grid, eps, certify_budget=budget)
        record("i_open", _VERDICT_TO_FLAG[openness.value], openness.detail)

    # I = Icheck: boundary gap plus certified escapes
    if manifest["i_equals_icheck"] != UNKNOWN:
        computed, detail = _i_equals_icheck(spec, p, grid, bundle, eps, budget)
        record("i_equals_icheck", computed, detail)

    # interior bubbling
    if manifest["interior_bubbles"] != UNKNOWN:
        computed, detail = _interior_bubbles(spec, p, grid, bundle, eps, budget)
        record("interior_bubbles", computed, detail)

    # exterior bubbling and push-up (dedicated window when declared)
    if manifest["exterior_bubbles"] != UNKNOWN or manifest["pushup_holds"] != UNKNOWN:
        ext_computed, pu_computed, detail = _exterior_and_pushup(
            spec, p, grid, eps, budget, n_grid)
        if manifest["exterior_bubbles"] != UNKNOWN:
            record("exterior_bubbles", ext_computed, detail)
        if manifest["pushup_holds"] != UNKNOWN:
            record("pushup_holds", pu_computed, detail)

    if manifest["icheck_dense_in_i"] != UNKNOWN:
        computed, detail = _icheck_dense(spec, p, grid, bundle, eps, budget)
        record("icheck_dense_in_i", computed, detail)

    return results


def _sup_gap_cells(bundle, grid) -> float:
    f = bundle.f_minus.f
    fpe = bundle.fplus_extended()
    defined = np.isfinite(f)
    if not defined.any():
        return math.inf
    gap = np.where(defined,
                   np.minimum(fpe, grid.window.t_max + grid.h_t) - f, -np.inf)
    return float(np.max(gap)) / grid.h_t


def _i_equals_icheck(spec, p, grid, bundle, eps, budget):
    for tq in spec.probes.get("certify_targets", ()):
        q = Point(*tq)
        if not grid.window.contains(q.t, q.x):
            continue
        if bundle.icheck_membership(q).value is not MemberValue.OUT:
            continue
        result = certify_membership(spec, p, q, grid, budget, _analysis=bundle)
        if isinstance(result, TimelikeCertificate):
            return NO, f"certified point outside the timelike-boundary at {tq}"
    gap = _sup_gap_cells(bundle, grid)
    if gap <= AREA_CELLS:
        return YES, f"boundary gap {gap:.2f} cells"
    return UNKNOWN, f"gap {gap:.1f} cells but no certified witness"


def _interior_bubbles(spec, p, grid, bundle, eps, budget):
    # future-side probe beyond the wall
    target = spec.probes.get("escape_target")
    if target is None and spec.probes.get("axis_x") is not None \
            and spec.params.get("alpha"):
        t_cross = _axis_crossing(spec, grid)
        if math.isfinite(t_cross):
            target = (t_cross + 0.5, 0.02)
    if target is not None and grid.window.contains(*target):
        try:
            label, result = classify_bubble_point(spec, p, Point(*target), grid,
                                                  budget, eps)
            if label == "interior":
                return YES, f"interior point at {target}"
        except ValueError:
            pass
    # past-side probe (wall spacetimes: points on the wall have past bubbles)
    axis_pt = spec.probes.get("past_bubble_point")
    if axis_pt is not None:
        witness = spec.probes.get("past_interior_witness")
        if witness is not None:
            try:
                label, result = classify_bubble_point(
                    spec, Point(*axis_pt), Point(*witness), grid, budget, eps,
                    past=True)
                if label == "interior":
                    return YES, f"past-interior point {witness} below {axis_pt}"
            except ValueError:
                pass
    gap = _sup_gap_cells(bundle, grid)
    if gap <= AREA_CELLS:
        return NO, f"boundary gap {gap:.2f} cells"
    return UNKNOWN, "no interior witness found"


def _exterior_and_pushup(spec, p, grid, eps, budget, n_grid):
    probes = spec.probes
    if "bubble_window" in probes:
        win = Rect(*probes["bubble_window"])
        egrid = grid_for(spec, n_grid, n_grid, window=win, base=p)
    else:
        egrid = grid
    verdict = pushup_check(spec, p, egrid, eps, certify_budget=budget)
    pu = _VERDICT_TO_FLAG[verdict.value]
    if verdict.value == VIOLATED:
        ext = YES
    elif verdict.value == HOLDS:
        ext = NO
    else:
        ext = UNKNOWN
    return ext, pu, verdict.detail


def _icheck_dense(spec, p, grid, bundle, eps, budget):
    target = spec.probes.get("escape_target")
    if target is None:
        gap = _sup_gap_cells(bundle, grid)
        if gap <= AREA_CELLS:
            return YES, "timelike boundary hugs the causal boundary"
        return UNKNOWN, "no density probe declared"
    q0 = Point(*target)
    certified = 0
    total = 0
    for dr in (-2, -1, 0, 1, 2):
        for dj in (-2, -1, 0, 1, 2):
            q = Point(q0.t + dr * grid.h_t, q0.x + dj * grid.h_x)
            if not grid.window.contains(q.t, q.x):
                continue
            if bundle.icheck_membership(q).value is not MemberValue.OUT:
                return UNKNOWN, f"neighborhood of {target} not clear of Icheck"
            total += 1
            result = certify_membership(spec, p, q, grid, budget, _analysis=bundle)
            if isinstance(result, TimelikeCertificate):
                certified += 1
    if total and certified == total:
        return NO, (f"{certified}-cell neighborhood of {target} certified inside "
                    f"I with Icheck out")
    return UNKNOWN, f"certified {certified}/{total} neighborhood points"
