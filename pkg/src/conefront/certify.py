"""Timelike certificates: explicit curve families plus a budgeted search.

A certificate is an explicitly constructed curve from p to q whose
almost-everywhere-timelike classification has been re-verified by sampling;
it is the only mechanism by which chronological membership is asserted
beyond the uniformly-timelike (narrowed-cone) reachable set.  Certificate
acceptance rests solely on numerical verification, never on how the curve
was produced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._grid import GridSpec
from .cone import Point, TangentVector
from .curves import ClassificationReport, CurveSpec, classify_curve, concat
from .reach import MemberValue


class CertificateError(RuntimeError):
    """A constructed curve failed its own verification."""


@dataclass(frozen=True)
class TimelikeCertificate:
    curve: CurveSpec
    source: Point
    target: Point
    report: ClassificationReport
    construction: str

    def __post_init__(self):
        if not self.report.is_timelike_ae:
            raise CertificateError("certificate curve is not timelike a.e.")
        for pt, name in ((self.source, "source"), (self.target, "target")):
            ref = self.curve.start if name == "source" else self.curve.end
            if math.hypot(pt.t - ref.t, pt.x - ref.x) > 1e-9:
                raise CertificateError(f"certificate {name} does not match the curve")


@dataclass(frozen=True)
class NotFound:
    source: Point
    target: Point
    budget: int
    candidates_tried: int
    reason: str = "certificate search exhausted"


def approach_axis_curve(alpha: float, A: float, t_bar: float, s_min: float,
                        ) -> CurveSpec:
    """Curve that reaches the vertical null wall at (t_bar, 0) tangentially.

    gamma(s) = (t_bar + A^(1-alpha) s / (1-alpha), -A |s|^(1/(1-alpha))) on
    [s_min, 0]: strictly timelike for s < 0 in the half-wall cone fields and
    null exactly at s = 0, where the tangent is vertical.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if A <= 0.0:
        raise ValueError("A must be positive")
    if s_min >= 0.0:
        raise ValueError("s_min must be negative")
    p = 1.0 / (1.0 - alpha)
    c_t = A ** (1.0 - alpha) / (1.0 - alpha)

    def pos(s):
        s = np.asarray(s, dtype=float)
        return t_bar + c_t * s, -A * np.abs(s) ** p

    def vel(s):
        s = np.asarray(s, dtype=float)
        mag = np.abs(s)
        dx = A * p * np.where(mag > 0, mag ** (p - 1.0), 0.0)
        return np.full_like(s, c_t), dx

    label = f"approach_axis(alpha={alpha:g}, A={A:g}, t_bar={t_bar:g})"
    return CurveSpec.analytic(pos, vel, (s_min, 0.0), label=label)


def escape_axis_curve(alpha: float, beta: float, t_bar: float, t_max: float,
                      spec=None) -> CurveSpec:
    """Curve leaving the vertical null wall at (t_bar, 0) into x > 0.

    t |-> (t, beta ((1-alpha)(t - t_bar))^(1/(1-alpha))), 0 < beta < 1: its
    slope stays strictly below the local null slope for t > t_bar and the
    tangent is vertical (null) exactly at t_bar.  If ``spec`` is given the
    construction is verified immediately and rejected on failure.
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if not (0.0 < beta < 1.0):
        raise ValueError("beta must lie in (0, 1)")
    if t_max <= t_bar:
        raise ValueError("t_max must exceed t_bar")
    p = 1.0 / (1.0 - alpha)

    def pos(t):
        t = np.asarray(t, dtype=float)
        u = np.maximum((1.0 - alpha) * (t - t_bar), 0.0)
        return t, beta * u ** p

    def vel(t):
        t = np.asarray(t, dtype=float)
        u = np.maximum((1.0 - alpha) * (t - t_bar), 0.0)
        return np.ones_like(t), beta * np.where(u > 0, u ** (p - 1.0), 0.0)

    label = f"escape_axis(alpha={alpha:g}, beta={beta:g}, t_bar={t_bar:g})"
    curve = CurveSpec.analytic(pos, vel, (t_bar, t_max), label=label)
    if spec is not None:
        report = classify_curve(curve, spec, n_samples=400)
        if not report.is_timelike_ae:
            raise CertificateError(f"escape construction failed verification: {report}")
    return curve


def smooth_interior_path(spec, p: Point, q: Point, grid: GridSpec,
                         margin: float = 0.02, n_segments: int = 200,
                         _analysis=None) -> CurveSpec:
    """Strictly timelike polyline from p to q by greedy bisector steering.

    Every segment direction is clamped strictly inside the local cone
    (``margin`` radians off both edges); requires q in the narrowed-cone
    reachable set of p.  Raises on steering failure; the caller re-verifies.
    """
    from .analysis import analyze

    bundle = _analysis or analyze(spec, p, grid)
    member = bundle.icheck_membership(q)
    if member.value is not MemberValue.IN:
        raise ValueError(f"target not inside the narrowed-cone future ({member.value})")
    return _steer(spec, p, q, margin, n_segments)


def _steer(spec, p: Point, q: Point, margin: float, n_segments: int) -> CurveSpec:
    fld = spec.field
    if q.t <= p.t:
        raise ValueError("steering target must lie at a later time")
    step = max(math.hypot(q.t - p.t, q.x - p.x) / n_segments, 1e-9)
    for shrink in (1.0, 0.5, 0.25):
        marg = margin * shrink
        pts_t = [p.t]
        pts_x = [p.x]
        t, x = p.t, p.x
        ok = False
        for _ in range(8 * n_segments):
            rem = math.hypot(q.t - t, q.x - x)
            lo, up = (float(v) for v in fld.sector_arrays(t, x))
            lo_in, up_in = lo + marg, up - marg
            if lo_in >= up_in:
                break
            bearing = math.atan2(q.t - t, q.x - x)
            phi = min(max(bearing, lo_in), up_in)
            if rem <= step * 1.5:
                if lo_in < bearing < up_in:
                    pts_t.append(q.t)
                    pts_x.append(q.x)
                    ok = True
                    break
            h = min(step, max(rem - step, step * 0.5))
            t += h * math.sin(phi)
            x += h * math.cos(phi)
            pts_t.append(t)
            pts_x.append(x)
            if t > q.t + 2 * step:
                break
        if ok:
            s = np.zeros(len(pts_t))
            s[1:] = np.cumsum(np.hypot(np.diff(pts_t), np.diff(pts_x)))
            return CurveSpec.from_nodes(s, pts_t, pts_x,
                                        label=f"steered({p.t:g},{p.x:g})->({q.t:g},{q.x:g})")
    raise CertificateError("bisector steering failed to reach the target")


# ---------------------------------------------------------------------------
# Budgeted search
# ---------------------------------------------------------------------------

_A_GRID = (0.25, 0.5, 1.0, 2.0)
_BETA_GRID = (0.25, 0.5, 0.75)
_SMIN_GRID = (-0.4, -0.25, -0.15, -0.08)


def certify_membership(spec, p: Point, q: Point, grid: GridSpec,
                       budget: int = 256, _analysis=None):
    """Search for a verified timelike curve from p to q.

    Candidate order: (1) direct steering when q lies in the narrowed-cone
    future; (2) for targets on or near a vertical null wall, steering into an
    axis-approach curve truncated at q; (3) for targets beyond the wall,
    additionally an axis-escape curve landing exactly on q.  Every candidate
    is re-verified by curve classification before release; failures are
    discarded.  Returns a TimelikeCertificate or NotFound.
    """
    from .analysis import analyze

    bundle = _analysis or analyze(spec, p, grid)
    state = {"tried": 0}

    def verify(curve, construction, target):
        report = classify_curve(curve, spec, n_samples=600)
        if report.is_timelike_ae:
            try:
                return TimelikeCertificate(curve=curve, source=p, target=target,
                                           report=report, construction=construction)
            except CertificateError:
                return None
        return None

    # route 1: target strictly inside the narrowed-cone future
    if bundle.icheck_membership(q).value is MemberValue.IN:
        state["tried"] += 1
        try:
            path = _steer(spec, p, q, 0.02, 200)
            cert = verify(path, "smooth_interior", q)
            if cert is not None:
                return cert
        except (CertificateError, ValueError):
            pass

    alpha = spec.params.get("alpha")
    axis_x = spec.probes.get("axis_x")
    if alpha is None or axis_x is None or not (0 < alpha < 1):
        return NotFound(p, q, budget, state["tried"], "no wall-curve family applies")

    window = grid.window
    c_exp = 1.0 - alpha

    def wall_route(target: Point):
        """Steer into an approach curve that ends exactly at ``target``
        (on the wall, or just left of it on the curve itself)."""
        dx = axis_x - target.x  # >= 0: distance left of the wall
        if dx < 0:
            return None
        for A in _A_GRID:
            for s_min in _SMIN_GRID:
                if state["tried"] >= budget:
                    return None
                state["tried"] += 1
                s_end = 0.0 if dx == 0.0 else -((dx / A) ** c_exp)
                if s_end <= s_min * 0.75:
                    continue
                t_bar = target.t + (A ** c_exp / c_exp) * (-s_end)
                try:
                    tail_full = approach_axis_curve(alpha, A, t_bar, s_min)
                except ValueError:
                    continue
                tail = tail_full if s_end == 0.0 else tail_full.restricted(s_min, s_end)
                z = tail.start
                if not window.contains(z.t, z.x) or z.t <= p.t:
                    continue
                if bundle.icheck_membership(z).value is not MemberValue.IN:
                    continue
                try:
                    head = _steer(spec, p, z, 0.02, 200)
                    combo = concat(head, tail, n_nodes=400)
                    cert = verify(combo, f"concatenation[steer+{tail_full.label}]",
                                  target)
                    if cert is not None:
                        return cert
                except (CertificateError, ValueError):
                    continue
        return None

    # route 2: target on/near the wall (left side)
    if abs(q.x - axis_x) <= 4 * grid.h_x and q.x <= axis_x + 1e-12:
        cert = wall_route(q)
        if cert is not None:
            return cert

    # route 3: target beyond the wall
    if q.x > axis_x:
        t_lo = p.t + 0.05 * (q.t - p.t)
        for beta in _BETA_GRID:
            if state["tried"] >= budget:
                break
            # wall-leaving time that lands the escape curve exactly on q
            u = (q.x - axis_x) / beta
            t_bar = q.t - u ** c_exp / c_exp
            if not (t_lo < t_bar < q.t):
                continue
            try:
                esc = escape_axis_curve(alpha, beta, t_bar, q.t)
            except ValueError:
                continue
            head = wall_route(Point(t_bar, axis_x))
            if head is None:
                continue
            try:
                combo = concat(head.curve, esc, n_nodes=400)
                cert = verify(combo, f"concatenation[{head.construction}+{esc.label}]", q)
                if cert is not None:
                    return cert
            except (CertificateError, ValueError):
                continue

    return NotFound(p, q, budget, state["tried"])
