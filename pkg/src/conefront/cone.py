"""Pointwise algebra for continuous 2-D Lorentzian cone fields.

A metric is either an angle field, g = 2[-sin(2*theta) dt^2
- 2*cos(2*theta) dx dt + sin(2*theta) dx^2], whose future cone is the angular
sector [theta, theta + pi/2] measured from the +x axis, or an explicit
symmetric-component field whose sector is recovered from its null directions.

All types are immutable values and all operations are pure functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from ._grid import GridSpec, Rect

SECTOR_TOL = 1e-12
#: relative threshold below which g(v,v) counts as null
NULL_RTOL = 1e-10


class DomainError(ValueError):
    """Point outside the field's rectangle."""


@dataclass(frozen=True)
class Point:
    t: float
    x: float

    def __post_init__(self):
        if not (math.isfinite(self.t) and math.isfinite(self.x)):
            raise ValueError("non-finite point")

    def as_tuple(self):
        return (self.t, self.x)


@dataclass(frozen=True)
class TangentVector:
    dt: float
    dx: float

    @property
    def norm(self) -> float:
        return math.hypot(self.dt, self.dx)

    @property
    def angle(self) -> float:
        """Direction angle from the +x axis, in (-pi, pi]."""
        return math.atan2(self.dt, self.dx)

    def unit(self) -> "TangentVector":
        n = self.norm
        if n == 0.0:
            raise ValueError("zero vector has no direction")
        return TangentVector(self.dt / n, self.dx / n)


@dataclass(frozen=True)
class SymBilinear:
    """Symmetric bilinear form g_tt dt^2 + 2 g_tx dt dx + g_xx dx^2."""

    g_tt: float
    g_tx: float
    g_xx: float

    def apply(self, v: TangentVector, w: TangentVector) -> float:
        return (
            self.g_tt * v.dt * w.dt
            + self.g_tx * (v.dt * w.dx + v.dx * w.dt)
            + self.g_xx * v.dx * w.dx
        )

    def quad(self, v: TangentVector) -> float:
        return self.apply(v, v)

    @property
    def det(self) -> float:
        return self.g_tt * self.g_xx - self.g_tx**2

    @property
    def is_lorentzian(self) -> bool:
        return self.det < 0.0

    @property
    def scale(self) -> float:
        return abs(self.g_tt) + 2 * abs(self.g_tx) + abs(self.g_xx)


@dataclass(frozen=True)
class ConeSector:
    """Future cone as the angle range [lower, upper], width in (0, pi).

    ``lower`` is the right-moving null direction, ``upper`` the left-moving
    one; a nonzero vector is future-causal iff its direction angle lies in the
    closed sector, future-timelike iff strictly inside.
    """

    lower: float
    upper: float

    def __post_init__(self):
        w = self.upper - self.lower
        if not (SECTOR_TOL < w < math.pi - SECTOR_TOL / 2):
            raise ValueError(f"sector width {w} outside (0, pi)")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def bisector(self) -> float:
        return 0.5 * (self.lower + self.upper)

    def _rel(self, phi: float) -> float:
        """Angle measured from ``lower``, wrapped into [-pi, pi)."""
        d = (phi - self.lower) % (2 * math.pi)
        if d >= math.pi:
            d -= 2 * math.pi
        return d

    def contains_angle(self, phi: float, tol: float = SECTOR_TOL) -> bool:
        d = self._rel(phi)
        return -tol <= d <= self.width + tol

    def strictly_contains_angle(self, phi: float, tol: float = SECTOR_TOL) -> bool:
        d = self._rel(phi)
        return tol < d < self.width - tol

    def contains_sector(self, other: "ConeSector", strict: bool = True,
                        tol: float = SECTOR_TOL) -> bool:
        """Closed ``other`` inside this sector (open interior if strict)."""
        if strict:
            return (other.lower > self.lower + tol) and (other.upper < self.upper - tol)
        return (other.lower >= self.lower - tol) and (other.upper <= self.upper + tol)


class CausalKind(Enum):
    TIMELIKE = "timelike"
    NULL = "null"
    SPACELIKE = "spacelike"


class Orientation(Enum):
    FUTURE = "future"
    PAST = "past"
    NEITHER = "neither"


@dataclass(frozen=True)
class VectorClass:
    kind: CausalKind
    orientation: Orientation


# ---------------------------------------------------------------------------
# Cone fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AngleField:
    """Cone field given by an angle function theta(t, x) in [0, pi/2].

    ``theta`` must accept numpy arrays (broadcasting over t and x).  The
    future sector at a point is [theta, theta + pi/2].
    """

    theta: Callable[[np.ndarray, np.ndarray], np.ndarray]
    omega: Rect
    holder_exponent: float = 1.0
    smooth_regions: Sequence[Rect] = field(default_factory=tuple)
    name: str = "angle-field"

    def theta_at(self, t, x):
        return np.asarray(self.theta(np.asarray(t, dtype=float), np.asarray(x, dtype=float)),
                          dtype=float)

    def sector_arrays(self, T, X):
        th = self.theta_at(T, X)
        return th, th + 0.5 * math.pi

    def metric_arrays(self, T, X):
        th = self.theta_at(T, X)
        s = np.sin(2.0 * th)
        c = np.cos(2.0 * th)
        return -2.0 * s, -2.0 * c, 2.0 * s

    def time_reflected(self) -> "AngleField":
        base = self.theta
        refl = lambda T, X: 0.5 * math.pi - base(-np.asarray(T, dtype=float), np.asarray(X, dtype=float))
        return AngleField(refl, self.omega.time_reflected(), self.holder_exponent,
                          tuple(r.time_reflected() for r in self.smooth_regions),
                          self.name + "-reflected")


@dataclass(frozen=True)
class ExplicitMetricField:
    """Cone field given by metric components (g_tt, g_tx, g_xx)(t, x).

    ``orientation`` is a timelike vector fixing the future side (default
    coordinate time).  Null direction angles are solved pointwise.
    """

    components: Callable[[np.ndarray, np.ndarray], tuple]
    omega: Rect
    orientation: TangentVector = TangentVector(1.0, 0.0)
    name: str = "metric-field"

    def metric_arrays(self, T, X):
        T = np.asarray(T, dtype=float)
        X = np.asarray(X, dtype=float)
        gtt, gtx, gxx = self.components(T, X)
        shape = np.broadcast(T, X).shape
        return (np.broadcast_to(np.asarray(gtt, dtype=float), shape),
                np.broadcast_to(np.asarray(gtx, dtype=float), shape),
                np.broadcast_to(np.asarray(gxx, dtype=float), shape))

    def sector_arrays(self, T, X):
        gtt, gtx, gxx = self.metric_arrays(T, X)
        disc = gtx * gtx - gtt * gxx
        if np.any(disc <= 0):
            raise ValueError("metric loses Lorentzian signature on the sampled set")
        root = np.sqrt(disc)
        # Null lines in homogeneous (dt, dx) form; the alternate representation
        # covers g_tt ~ 0 where the primary one degenerates.
        phis = []
        for sign in (+1.0, -1.0):
            vt = -gtx + sign * root
            vx = gtt
            alt = np.abs(vt) + np.abs(vx) < 1e-14 * (np.abs(gtx) + root + 1e-300)
            vt = np.where(alt, gxx, vt)
            vx = np.where(alt, -gtx - sign * root, vx)
            # orient to the future: g(v, xi) < 0
            ot, ox = self.orientation.dt, self.orientation.dx
            pairing = gtt * vt * ot + gtx * (vt * ox + vx * ot) + gxx * vx * ox
            flip = np.where(pairing > 0, -1.0, 1.0)
            phis.append(np.arctan2(flip * vt, flip * vx))
        a, b = phis
        # order so the CCW span from lower to upper is the causal sector (< pi)
        span_ab = np.mod(b - a, 2 * math.pi)
        lower = np.where(span_ab < math.pi, a, b)
        upper_raw = np.where(span_ab < math.pi, b, a)
        width = np.mod(upper_raw - lower, 2 * math.pi)
        return lower, lower + width

    def time_reflected(self) -> "ExplicitMetricField":
        base = self.components

        def refl(T, X):
            gtt, gtx, gxx = base(-np.asarray(T, dtype=float), np.asarray(X, dtype=float))
            return gtt, -np.asarray(gtx, dtype=float), gxx

        return ExplicitMetricField(refl, self.omega.time_reflected(),
                                   TangentVector(self.orientation.dt, -self.orientation.dx),
                                   self.name + "-reflected")


@dataclass(frozen=True)
class EtaC:
    """Flat comparison metric -C dt^2 + dx^2 with cone-width parameter C >= 1."""

    C: float

    def __post_init__(self):
        if self.C < 1.0:
            raise ValueError("C must be >= 1")

    def to_field(self, omega: Rect) -> ExplicitMetricField:
        C = self.C

        def comps(T, X):
            shape = np.broadcast(np.asarray(T), np.asarray(X)).shape
            return (np.full(shape, -C), np.zeros(shape), np.ones(shape))

        return ExplicitMetricField(comps, omega, name=f"eta_{C:g}")


@dataclass(frozen=True)
class GridAngleField:
    """Angle field stored on a grid, evaluated by bilinear interpolation.

    Produced by :func:`mollify`; queries outside the grid clamp to the edge.
    """

    grid: GridSpec
    values: np.ndarray  # (n_t, n_x)
    holder_exponent: float = 1.0
    name: str = "grid-field"

    @property
    def omega(self) -> Rect:
        return self.grid.window

    def theta_at(self, t, x):
        T = np.asarray(t, dtype=float)
        X = np.asarray(x, dtype=float)
        w = self.grid.window
        ft = np.clip((T - w.t_min) / self.grid.h_t, 0, self.grid.n_t - 1)
        fx = np.clip((X - w.x_min) / self.grid.h_x, 0, self.grid.n_x - 1)
        i0 = np.clip(np.floor(ft).astype(int), 0, self.grid.n_t - 2)
        j0 = np.clip(np.floor(fx).astype(int), 0, self.grid.n_x - 2)
        at = ft - i0
        ax = fx - j0
        v = self.values
        return ((1 - at) * (1 - ax) * v[i0, j0] + (1 - at) * ax * v[i0, j0 + 1]
                + at * (1 - ax) * v[i0 + 1, j0] + at * ax * v[i0 + 1, j0 + 1])

    def sector_arrays(self, T, X):
        th = self.theta_at(T, X)
        return th, th + 0.5 * math.pi

    def metric_arrays(self, T, X):
        th = self.theta_at(T, X)
        s = np.sin(2.0 * th)
        c = np.cos(2.0 * th)
        return -2.0 * s, -2.0 * c, 2.0 * s


@dataclass(frozen=True)
class WidenedField:
    """Sector field with both edges rotated outward by eps (width kept < pi)."""

    base: object
    eps: float

    @property
    def omega(self) -> Rect:
        return self.base.omega

    def sector_arrays(self, T, X):
        lo, up = self.base.sector_arrays(T, X)
        lo = lo - self.eps
        up = up + self.eps
        # clamp symmetrically so the width stays below pi
        w = up - lo
        excess = np.maximum(w - (math.pi - 1e-9), 0.0)
        return lo + 0.5 * excess, up - 0.5 * excess


@dataclass(frozen=True)
class NarrowedField:
    """Sector field with both edges rotated inward by eps."""

    base: object
    eps: float

    @property
    def omega(self) -> Rect:
        return self.base.omega

    def sector_arrays(self, T, X):
        lo, up = self.base.sector_arrays(T, X)
        lo = lo + self.eps
        up = up - self.eps
        if np.any(up - lo <= SECTOR_TOL):
            raise ValueError("narrowing exceeds the sector half-width")
        return lo, up


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------


def _check_domain(fld, p: Point):
    omega = getattr(fld, "omega", None)
    if omega is not None and not omega.contains(p.t, p.x, tol=1e-9):
        raise DomainError(f"point ({p.t}, {p.x}) outside rectangle {omega}")


def eval_metric(fld, p: Point) -> SymBilinear:
    """Metric components at p; always Lorentzian (det = -4 for angle fields)."""
    _check_domain(fld, p)
    gtt, gtx, gxx = (float(a) for a in fld.metric_arrays(p.t, p.x))
    g = SymBilinear(gtt, gtx, gxx)
    if not g.is_lorentzian:
        raise ValueError("metric is not Lorentzian at the requested point")
    return g


def null_basis(fld, p: Point) -> tuple[TangentVector, TangentVector]:
    """Unit null vectors (v1, v2) along the future cone edges.

    v1 points along the right-moving edge (direction angle = sector lower),
    v2 along the left-moving one.  For angle fields this is the frame
    (cos th, sin th), (-sin th, cos th) in (dx, dt) components, which pairs
    to g(v1, v2) = -2.
    """
    _check_domain(fld, p)
    lo, up = (float(a) for a in fld.sector_arrays(p.t, p.x))
    v1 = TangentVector(math.sin(lo), math.cos(lo))
    v2 = TangentVector(math.sin(up), math.cos(up))
    return v1, v2


def cone_sector(fld, p: Point) -> ConeSector:
    _check_domain(fld, p)
    lo, up = (float(a) for a in fld.sector_arrays(p.t, p.x))
    return ConeSector(lo, up)


def time_orientation(fld, p: Point) -> TangentVector:
    """A future-pointing timelike vector at p (sum of the null frame)."""
    v1, v2 = null_basis(fld, p)
    return TangentVector(v1.dt + v2.dt, v1.dx + v2.dx)


def classify_vector(fld, p: Point, v: TangentVector) -> VectorClass:
    """Causal type and orientation of v at p.

    Timelike/null/spacelike by the sign of g(v, v) at relative tolerance
    ``NULL_RTOL``; orientation by the sign of g(v, xi) against the canonical
    timelike field xi = v1 + v2.
    """
    if v.norm == 0.0:
        raise ValueError("cannot classify the zero vector")
    g = eval_metric(fld, p)
    q = g.quad(v)
    thr = NULL_RTOL * g.scale * v.norm**2
    if q < -thr:
        kind = CausalKind.TIMELIKE
    elif q > thr:
        kind = CausalKind.SPACELIKE
    else:
        kind = CausalKind.NULL
    if kind is CausalKind.SPACELIKE:
        return VectorClass(kind, Orientation.NEITHER)
    xi = time_orientation(fld, p)
    s = g.apply(v, xi)
    if s < -thr:
        orient = Orientation.FUTURE
    elif s > thr:
        orient = Orientation.PAST
    else:  # pragma: no cover - cannot happen for causal v, timelike xi
        orient = Orientation.NEITHER
    return VectorClass(kind, orient)


def strictly_wider(f1, f2, region: Rect, n_samples: int = 33) -> bool:
    """True iff f2's cones strictly contain f1's on a sampled grid.

    Sector restatement of cone comparison: every f1-causal direction must be
    f2-timelike, i.e. the closed f1 sector lies in the open f2 sector at
    every sampled point.
    """
    ts = np.linspace(region.t_min, region.t_max, n_samples)
    xs = np.linspace(region.x_min, region.x_max, n_samples)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    try:
        l1, u1 = f1.sector_arrays(T, X)
        l2, u2 = f2.sector_arrays(T, X)
    except (ValueError, DomainError) as exc:
        raise ValueError(f"fields not comparable on region: {exc}") from exc
    return bool(np.all(l1 > l2 + SECTOR_TOL) and np.all(u1 < u2 - SECTOR_TOL))


_DH_DIRECTIONS = (
    TangentVector(1.0, 0.0),
    TangentVector(0.0, 1.0),
    TangentVector(math.sqrt(0.5), math.sqrt(0.5)),
    TangentVector(math.sqrt(0.5), -math.sqrt(0.5)),
)


def dh_distance(g1, g2, region: Rect, n_samples: int = 33) -> float:
    """Sampled sup of |g1(X,Y) - g2(X,Y)| / (|X||Y|), Euclidean background.

    Lower bound of the true uniform distance (finite samples, fixed unit
    direction set).
    """
    ts = np.linspace(region.t_min, region.t_max, n_samples)
    xs = np.linspace(region.x_min, region.x_max, n_samples)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    a_tt, a_tx, a_xx = g1.metric_arrays(T, X)
    b_tt, b_tx, b_xx = g2.metric_arrays(T, X)
    d_tt, d_tx, d_xx = a_tt - b_tt, a_tx - b_tx, a_xx - b_xx
    best = 0.0
    for u in _DH_DIRECTIONS:
        for w in _DH_DIRECTIONS:
            val = np.abs(d_tt * u.dt * w.dt + d_tx * (u.dt * w.dx + u.dx * w.dt)
                         + d_xx * u.dx * w.dx)
            best = max(best, float(val.max()))
    return best


def widen_sector(fld, eps: float) -> WidenedField:
    if not (0.0 < eps < math.pi / 4):
        raise ValueError("widening must lie in (0, pi/4)")
    return WidenedField(fld, eps)


def narrow_sector(fld, eps: float) -> NarrowedField:
    if eps <= 0.0:
        raise ValueError("narrowing must be positive")
    out = NarrowedField(fld, eps)
    omega = fld.omega
    out.sector_arrays(0.5 * (omega.t_min + omega.t_max), 0.5 * (omega.x_min + omega.x_max))
    return out


def mollify(fld, eps: float, grid: GridSpec) -> GridAngleField:
    """Smooth an angle field by discrete tent-kernel convolution of width eps.

    The mollified angle is Lipschitz on the grid with constant bounded by
    sup|theta| * 2/eps, and deviates from theta by at most its modulus of
    continuity at scale eps.  Requires grid steps finer than eps/4.  When the
    kernel spans many grid steps the convolution is evaluated by quadrature
    on a coarse lattice and interpolated (the mollified field is eps-smooth,
    so a lattice much finer than eps loses nothing).
    """
    if eps <= 0.0:
        raise ValueError("mollification width must be positive")
    if grid.h_t > eps / 4 or grid.h_x > eps / 4:
        raise ValueError("grid resolution must be finer than eps/4")
    half = eps / 2.0
    k_t = half / grid.h_t
    k_x = half / grid.h_x
    if max(k_t, k_x) <= 48:
        sm = _mollify_direct(fld, grid, half)
    else:
        sm = _mollify_quadrature(fld, grid, half)
    name = getattr(fld, "name", "field")
    return GridAngleField(grid, sm, getattr(fld, "holder_exponent", 1.0),
                          f"{name}-mollified({eps:g})")


def _tent_weights(h: float, half: float) -> np.ndarray:
    k = max(int(math.floor(half / h)), 1)
    offs = np.arange(-k, k + 1) * h
    w = np.maximum(1.0 - np.abs(offs) / half, 0.0)
    return w / w.sum()


def _mollify_direct(fld, grid: GridSpec, half: float) -> np.ndarray:
    T, X = grid.mesh()
    theta = fld.theta_at(T, X)

    def conv_axis(A, w, axis):
        k = (len(w) - 1) // 2
        pad = [(0, 0), (0, 0)]
        pad[axis] = (k, k)
        Ap = np.pad(A, pad, mode="edge")
        out = np.zeros_like(A)
        for i, wi in enumerate(w):
            sl = [slice(None), slice(None)]
            sl[axis] = slice(i, i + A.shape[axis])
            out += wi * Ap[tuple(sl)]
        return out

    sm = conv_axis(theta, _tent_weights(grid.h_t, half), 0)
    return conv_axis(sm, _tent_weights(grid.h_x, half), 1)


def _mollify_quadrature(fld, grid: GridSpec, half: float,
                        n_lattice: int = 65, n_quad: int = 41) -> np.ndarray:
    """Tent-average theta on a coarse lattice over the window, then bilinear
    onto the grid.  Quadrature points may leave the window (the field's own
    rectangle is what bounds them)."""
    omega = getattr(fld, "omega", None)
    w = grid.window
    lat_t = np.linspace(w.t_min, w.t_max, n_lattice)
    lat_x = np.linspace(w.x_min, w.x_max, n_lattice)
    offs = np.linspace(-half, half, n_quad)
    wt = np.maximum(1.0 - np.abs(offs) / half, 0.0)
    wt /= wt.sum()
    vals = np.zeros((n_lattice, n_lattice))
    Tq = lat_t[:, None, None] + offs[None, :, None]
    if omega is not None:
        Tq = np.clip(Tq, omega.t_min, omega.t_max)
    for jx, x0 in enumerate(lat_x):
        xq = x0 + offs
        if omega is not None:
            xq = np.clip(xq, omega.x_min, omega.x_max)
        th = fld.theta_at(Tq, xq[None, None, :])
        vals[:, jx] = np.einsum("ijk,j,k->i", th, wt, wt)
    coarse = GridAngleField(GridSpec(w, n_lattice, n_lattice), vals)
    T, X = grid.mesh()
    return coarse.theta_at(T, X)


@dataclass(frozen=True)
class AffineChart:
    """Linear change of frame x = origin + M y with pulled-back metric eta at origin."""

    origin: Point
    matrix: np.ndarray  # columns are the images of the new (T, X) frame, (t, x) components

    def inverse_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    def to_chart(self, p: Point) -> Point:
        d = np.array([p.t - self.origin.t, p.x - self.origin.x])
        y = self.inverse_matrix() @ d
        return Point(float(y[0]), float(y[1]))

    def pull_vector(self, v: TangentVector) -> TangentVector:
        y = self.inverse_matrix() @ np.array([v.dt, v.dx])
        return TangentVector(float(y[0]), float(y[1]))


def normalize_chart(fld, p: Point) -> AffineChart:
    """Affine chart at p in which the cone is the standard 45-degree one.

    The new time/space frame is built from the null frame: e_T = (v1 + v2)/2,
    e_X = (v1 - v2)/2, which pulls the metric at p back to eta.
    """
    v1, v2 = null_basis(fld, p)
    e_t = TangentVector(0.5 * (v1.dt + v2.dt), 0.5 * (v1.dx + v2.dx))
    e_x = TangentVector(0.5 * (v1.dt - v2.dt), 0.5 * (v1.dx - v2.dx))
    M = np.array([[e_t.dt, e_x.dt], [e_t.dx, e_x.dx]])
    return AffineChart(p, M)


def check_continuity(fld, omega: Optional[Rect] = None, n_samples: int = 2000,
                     l_loc: float = 8.0, seed: int = 0) -> float:
    """Sampled Hoelder-continuity ratio sup |dtheta| / dist^beta.

    Draws nearby point pairs in ``omega`` and returns the max ratio; raises if
    it exceeds ``l_loc``.  Sampling-based only, never symbolic.
    """
    omega = omega or fld.omega
    beta = getattr(fld, "holder_exponent", 1.0)
    rng = np.random.default_rng(seed)
    t0 = rng.uniform(omega.t_min, omega.t_max, n_samples)
    x0 = rng.uniform(omega.x_min, omega.x_max, n_samples)
    scale = 0.01 * min(omega.t_span, omega.x_span)
    dt = rng.uniform(-scale, scale, n_samples)
    dx = rng.uniform(-scale, scale, n_samples)
    t1 = np.clip(t0 + dt, omega.t_min, omega.t_max)
    x1 = np.clip(x0 + dx, omega.x_min, omega.x_max)
    th0 = fld.theta_at(t0, x0)
    th1 = fld.theta_at(t1, x1)
    dist = np.hypot(t1 - t0, x1 - x0)
    ok = dist > 1e-12
    ratio = np.abs(th1 - th0)[ok] / dist[ok] ** beta
    worst = float(ratio.max()) if ratio.size else 0.0
    if worst > l_loc:
        raise ValueError(f"sampled continuity ratio {worst:.3g} exceeds bound {l_loc}")
    return worst
