"""Parametrized curves, a.e. causal classification, and reparametrization.

Curves are either analytic (closed-form position and derivative) or sampled
(piecewise-linear through strictly increasing parameter nodes).  Every curve
the library manipulates is Lipschitz; absolutely continuous inputs are out of
scope because causal ones always admit a Lipschitz reparametrization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .cone import CausalKind, DomainError, Orientation, Point, TangentVector, classify_vector


@dataclass(frozen=True)
class CurveSpec:
    """A parametrized curve on [s_a, s_b].

    kind 'analytic': ``pos``/``vel`` map parameter arrays to (t, x) arrays.
    kind 'sampled': node arrays (params, ts, xs), linear interpolation, chord
    derivatives.  ``breakpoints`` lists parameters where one-sided tangents
    may differ (e.g. concatenation junctions).
    """

    kind: str
    domain: tuple
    pos: Optional[Callable] = None
    vel: Optional[Callable] = None
    params: Optional[np.ndarray] = None
    ts: Optional[np.ndarray] = None
    xs: Optional[np.ndarray] = None
    breakpoints: tuple = ()
    label: str = ""
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("analytic", "sampled"):
            raise ValueError("kind must be 'analytic' or 'sampled'")
        if self.domain[1] <= self.domain[0]:
            raise ValueError("empty parameter domain")
        if self.kind == "sampled":
            s = np.asarray(self.params, dtype=float)
            if s.ndim != 1 or len(s) < 2:
                raise ValueError("sampled curve needs at least two nodes")
            if not np.all(np.diff(s) > 0):
                raise ValueError("parameter nodes must be strictly increasing")
            pts = np.column_stack([self.ts, self.xs])
            if np.any(np.all(np.abs(np.diff(pts, axis=0)) < 1e-15, axis=1)):
                raise ValueError("sampled curve has repeated points")

    @staticmethod
    def from_nodes(params, ts, xs, breakpoints=(), label="", meta=None) -> "CurveSpec":
        params = np.asarray(params, dtype=float)
        return CurveSpec(kind="sampled", domain=(float(params[0]), float(params[-1])),
                         params=params, ts=np.asarray(ts, dtype=float),
                         xs=np.asarray(xs, dtype=float), breakpoints=tuple(breakpoints),
                         label=label, meta=meta or {})

    @staticmethod
    def analytic(pos, vel, domain, breakpoints=(), label="", meta=None) -> "CurveSpec":
        return CurveSpec(kind="analytic", domain=(float(domain[0]), float(domain[1])),
                         pos=pos, vel=vel, breakpoints=tuple(breakpoints), label=label,
                         meta=meta or {})

    # -- evaluation ---------------------------------------------------------

    def positions(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        if self.kind == "analytic":
            t, x = self.pos(s)
            return np.asarray(t, dtype=float), np.asarray(x, dtype=float)
        return (np.interp(s, self.params, self.ts), np.interp(s, self.params, self.xs))

    def velocities(self, s) -> tuple[np.ndarray, np.ndarray]:
        s = np.asarray(s, dtype=float)
        if self.kind == "analytic":
            dt, dx = self.vel(s)
            return np.asarray(dt, dtype=float), np.asarray(dx, dtype=float)
        # chord slope of the segment containing each parameter
        idx = np.clip(np.searchsorted(self.params, s, side="right") - 1, 0,
                      len(self.params) - 2)
        ds = self.params[idx + 1] - self.params[idx]
        return ((self.ts[idx + 1] - self.ts[idx]) / ds,
                (self.xs[idx + 1] - self.xs[idx]) / ds)

    def point_at(self, s: float) -> Point:
        t, x = self.positions(s)
        return Point(float(t), float(x))

    @property
    def start(self) -> Point:
        return self.point_at(self.domain[0])

    @property
    def end(self) -> Point:
        return self.point_at(self.domain[1])

    def restricted(self, s_a: float, s_b: float) -> "CurveSpec":
        if self.kind == "analytic":
            bps = tuple(b for b in self.breakpoints if s_a < b < s_b)
            return CurveSpec.analytic(self.pos, self.vel, (s_a, s_b), bps, self.label)
        mask = (self.params > s_a) & (self.params < s_b)
        t_a, x_a = self.positions(s_a)
        t_b, x_b = self.positions(s_b)
        params = np.concatenate([[s_a], self.params[mask], [s_b]])
        ts = np.concatenate([[float(t_a)], self.ts[mask], [float(t_b)]])
        xs = np.concatenate([[float(x_a)], self.xs[mask], [float(x_b)]])
        bps = tuple(b for b in self.breakpoints if s_a < b < s_b)
        return CurveSpec.from_nodes(params, ts, xs, bps, self.label)

    def resampled(self, n: int) -> "CurveSpec":
        s = np.linspace(self.domain[0], self.domain[1], n)
        t, x = self.positions(s)
        return CurveSpec.from_nodes(s, t, x, self.breakpoints, self.label)


@dataclass(frozen=True)
class ClassificationReport:
    verdict: str                 # timelike_ae | causal | neither
    direction: str               # future | past | mixed
    violation_params: tuple
    violation_fraction: float
    n_samples: int

    @property
    def is_timelike_ae(self) -> bool:
        return self.verdict == "timelike_ae"


def classify_curve(curve: CurveSpec, spec, n_samples: int = 400,
                   tol_ae: Optional[float] = None, piecewise_c1: bool = False,
                   ) -> ClassificationReport:
    """Classify a curve by sampling its tangent at subinterval midpoints.

    'timelike_ae' requires the non-(future- or past-)timelike samples to be an
    isolated set of fraction at most ``tol_ae`` (default 2/n_samples);
    'causal' requires every sample causal with one consistent orientation.
    Endpoints and declared breakpoints are additionally probed (one-sided for
    breakpoints) and reported, but only midpoint samples enter the fraction.
    In piecewise-C1 mode both one-sided tangents at each breakpoint must be
    strictly timelike for a timelike verdict.
    """
    if n_samples < 100:
        raise ValueError("need at least 100 samples")
    if tol_ae is None:
        tol_ae = 2.0 / n_samples
    fld = spec.field if hasattr(spec, "field") else spec
    s_a, s_b = curve.domain
    edges = np.linspace(s_a, s_b, n_samples + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    t, x = curve.positions(mids)
    dt, dx = curve.velocities(mids)

    timelike = np.zeros(n_samples, dtype=bool)
    causal = np.zeros(n_samples, dtype=bool)
    future = np.zeros(n_samples, dtype=bool)
    past = np.zeros(n_samples, dtype=bool)
    for i in range(n_samples):
        v = TangentVector(float(dt[i]), float(dx[i]))
        if v.norm == 0.0:
            continue
        try:
            cls = classify_vector(fld, Point(float(t[i]), float(x[i])), v)
        except DomainError:
            raise DomainError("curve leaves the field's rectangle") from None
        timelike[i] = cls.kind is CausalKind.TIMELIKE
        causal[i] = cls.kind in (CausalKind.TIMELIKE, CausalKind.NULL)
        future[i] = cls.orientation is Orientation.FUTURE
        past[i] = cls.orientation is Orientation.PAST

    if future.sum() >= past.sum():
        oriented_tl = timelike & future
        oriented_cs = causal & future
        direction = "future"
        n_wrong = int(past.sum())
    else:
        oriented_tl = timelike & past
        oriented_cs = causal & past
        direction = "past"
        n_wrong = int(future.sum())
    if n_wrong > 0:
        direction = "mixed"

    bad = ~oriented_tl
    violations = mids[bad]
    frac = float(bad.sum()) / n_samples
    isolated = not np.any(bad[:-1] & bad[1:])

    # endpoint / breakpoint probes (reported, not counted)
    extra = []
    h = (s_b - s_a) / (4.0 * n_samples)
    probe_sides = [(s_a, +1), (s_b, -1)]
    for b in curve.breakpoints:
        probe_sides += [(b, -1), (b, +1)]
    breakpoint_ok = True
    for s0, side in probe_sides:
        s_probe = min(max(s0 + side * h * 0.5, s_a), s_b)
        tt, xx = curve.positions(s_probe)
        vv = curve.velocities(s_probe)
        v = TangentVector(float(vv[0]), float(vv[1]))
        if v.norm == 0.0:
            continue
        cls = classify_vector(fld, Point(float(tt), float(xx)), v)
        good = cls.kind is CausalKind.TIMELIKE and cls.orientation.value == direction
        if not good:
            extra.append(float(s0))
            if s0 in curve.breakpoints:
                breakpoint_ok = False

    if frac <= tol_ae and isolated and (not piecewise_c1 or breakpoint_ok):
        verdict = "timelike_ae"
    elif np.all(oriented_cs):
        verdict = "causal"
    else:
        verdict = "neither"
    all_viol = tuple(sorted(set(np.round(violations, 12)).union(extra)))
    return ClassificationReport(verdict=verdict, direction=direction,
                                violation_params=all_viol, violation_fraction=frac,
                                n_samples=n_samples)


def reparametrize_tgraph(curve: CurveSpec, spec, n_nodes: int = 801) -> CurveSpec:
    """Reparametrize a future-directed causal curve by its t-coordinate.

    The result is a sampled curve with parameter equal to t and the same
    image.  Fails if the t-component is not strictly increasing.
    """
    if _already_tgraph(curve):
        return curve
    probe = curve.resampled(max(n_nodes, 3))
    t = probe.ts
    if np.any(np.diff(t) <= 0):
        raise ValueError("t-component is not strictly increasing")
    t_nodes = np.linspace(t[0], t[-1], n_nodes)
    x_nodes = np.interp(t_nodes, t, probe.xs)
    return CurveSpec.from_nodes(t_nodes, t_nodes, x_nodes, (), curve.label + "-tgraph")


def _already_tgraph(curve: CurveSpec) -> bool:
    if curve.kind != "sampled":
        return False
    return bool(np.allclose(curve.params, curve.ts, atol=1e-12, rtol=0.0))


def lipschitz_check(curve: CurveSpec, spec, C: float, n_samples: int = 400,
                    tol: float = 1e-6) -> bool:
    """Check the Euclidean speed bound |gamma'| <= sqrt(1 + C) for a
    t-parametrized curve under a cone bound eta_C."""
    if not _already_tgraph(curve) and curve.kind == "sampled":
        if not np.allclose(curve.params, curve.ts, atol=1e-9, rtol=0.0):
            raise ValueError("curve must be t-parametrized")
    s = np.linspace(curve.domain[0], curve.domain[1], n_samples)
    mids = 0.5 * (s[:-1] + s[1:])
    dt, dx = curve.velocities(mids)
    speed = np.hypot(dt, dx)
    return bool(np.all(speed <= math.sqrt(1.0 + C) + tol))


def concat(c1: CurveSpec, c2: CurveSpec, n_nodes: int = 400, tol: float = 1e-9,
           ) -> CurveSpec:
    """Concatenate two curves sharing an endpoint, marking the junction.

    Both pieces are resampled onto their own parameter ranges; the result is
    a sampled curve whose breakpoint list includes the junction parameter.
    """
    p_end, p_start = c1.end, c2.start
    if math.hypot(p_end.t - p_start.t, p_end.x - p_start.x) > tol:
        raise ValueError("curve endpoints do not match at the junction")
    a = c1.resampled(n_nodes)
    b = c2.resampled(n_nodes)
    junction = a.params[-1]
    shift = junction - b.params[0]
    params = np.concatenate([a.params, b.params[1:] + shift])
    ts = np.concatenate([a.ts, b.ts[1:]])
    xs = np.concatenate([a.xs, b.xs[1:]])
    bps = tuple(a.breakpoints) + (float(junction),) + tuple(
        float(x + shift) for x in b.breakpoints)
    return CurveSpec.from_nodes(params, ts, xs, bps,
                                label=f"{c1.label}+{c2.label}")


def timelike_measure(curve: CurveSpec, spec, n_samples: int = 400) -> float:
    """Fraction of sampled parameters with strictly timelike tangent."""
    fld = spec.field if hasattr(spec, "field") else spec
    s_a, s_b = curve.domain
    edges = np.linspace(s_a, s_b, n_samples + 1)
    mids = 0.5 * (edges[:-1] + edges[1:])
    t, x = curve.positions(mids)
    dt, dx = curve.velocities(mids)
    count = 0
    for i in range(n_samples):
        v = TangentVector(float(dt[i]), float(dx[i]))
        if v.norm == 0.0:
            continue
        cls = classify_vector(fld, Point(float(t[i]), float(x[i])), v)
        if cls.kind is CausalKind.TIMELIKE:
            count += 1
    return count / n_samples
