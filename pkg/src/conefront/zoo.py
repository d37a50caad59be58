"""Catalogue of benchmark spacetimes with expected-property manifests.

Each constructor returns an immutable :class:`SpacetimeSpec` bundling the cone
field, a default analysis window/base point, and a manifest of tri-state
causal-regularity flags.  Manifest consistency (the implication lattice among
the flags) is checked at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np

from ._grid import Rect
from .cone import AngleField, ExplicitMetricField, TangentVector, check_continuity
from .expr import compile_expression

YES, NO, UNKNOWN = "yes", "no", "unknown"
_TRI = (YES, NO, UNKNOWN)

FLAG_NAMES = ("causally_plain", "pushup_holds", "interior_bubbles",
              "exterior_bubbles", "i_open", "i_equals_icheck", "icheck_dense_in_i")


@dataclass(frozen=True)
class ExpectedManifest:
    causally_plain: str = UNKNOWN
    pushup_holds: str = UNKNOWN
    interior_bubbles: str = UNKNOWN
    exterior_bubbles: str = UNKNOWN
    i_open: str = UNKNOWN
    i_equals_icheck: str = UNKNOWN
    icheck_dense_in_i: str = UNKNOWN

    def __post_init__(self):
        for name in FLAG_NAMES:
            if getattr(self, name) not in _TRI:
                raise ValueError(f"flag {name} must be one of {_TRI}")
        self._check_consistency()

    def _check_consistency(self):
        cp, pu = self.causally_plain, self.pushup_holds
        ib, eb = self.interior_bubbles, self.exterior_bubbles
        io, ie = self.i_open, self.i_equals_icheck

        def bad(msg):
            raise ValueError(f"inconsistent manifest: {msg}")

        if cp == YES and (ib == YES or eb == YES or pu == NO or ie == NO or io == NO):
            bad("causally plain forbids any pathology flag")
        if ib == NO and eb == NO and cp == NO:
            bad("no bubbling of either kind forces causal plainness")
        if cp == NO and ib == NO and eb == NO:
            bad("non-plain spacetime needs some bubble flag")
        # interior bubbling <-> I != Icheck
        if ib == NO and ie == NO:
            bad("no interior bubbling forces I = Icheck")
        if ib == YES and ie == YES:
            bad("interior bubbling forbids I = Icheck")
        # exterior bubbling <-> push-up fails
        if eb == NO and pu == NO:
            bad("no exterior bubbling forces push-up")
        if eb == YES and pu == YES:
            bad("exterior bubbling forbids push-up")
        # I = Icheck everywhere implies openness
        if ie == YES and io == NO:
            bad("I = Icheck implies I open")
        if self.icheck_dense_in_i == NO and ib == NO:
            bad("non-dense Icheck requires interior bubbling")

    def as_dict(self) -> dict:
        return {name: getattr(self, name) for name in FLAG_NAMES}


@dataclass(frozen=True)
class SpacetimeSpec:
    name: str
    omega: Rect
    field: object  # AngleField | ExplicitMetricField
    params: dict = dc_field(default_factory=dict)
    manifest: ExpectedManifest = ExpectedManifest()
    window: Optional[Rect] = None      # default analysis window
    base_point: tuple = (0.0, 0.0)     # default base point (t, x)
    probes: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        win = self.window or self.omega
        if not self.omega.contains_rect(win):
            raise ValueError("analysis window must lie inside the domain rectangle")
        if not win.contains(*self.base_point):
            raise ValueError("base point must lie inside the analysis window")

    @property
    def analysis_window(self) -> Rect:
        return self.window or self.omega

    def cache_key(self):
        items = tuple(sorted((k, v) for k, v in self.params.items()
                             if isinstance(v, (int, float, str))))
        return (self.name, items)

    def time_reflected(self) -> "SpacetimeSpec":
        t, x = self.base_point
        return replace(
            self,
            name=self.name + "-reflected",
            omega=self.omega.time_reflected(),
            field=self.field.time_reflected(),
            window=self.analysis_window.time_reflected(),
            base_point=(-t, x),
            probes={},
        )


# ---------------------------------------------------------------------------
# Angle profiles
# ---------------------------------------------------------------------------


def _arccos_pow(u, alpha):
    """arccos(|u|^alpha) with the base clipped into [0, 1]."""
    return np.arccos(np.clip(np.abs(u) ** alpha, 0.0, 1.0))


def _theta_half_wall(alpha):
    """0 for x < -1, arccos|x|^alpha on [-1, 0], pi/2 beyond."""

    def theta(T, X):
        X = np.asarray(X, dtype=float)
        inner = _arccos_pow(np.clip(X, -1.0, 0.0), alpha)
        return np.where(X > 0.0, 0.5 * math.pi, np.where(X < -1.0, 0.0, inner)) \
            * np.ones_like(np.asarray(T, dtype=float))

    return theta


def _theta_ridge(alpha):
    """arccos|x|^alpha on [-1, 1], 0 outside."""

    def theta(T, X):
        X = np.asarray(X, dtype=float)
        inner = _arccos_pow(np.clip(X, -1.0, 1.0), alpha)
        return np.where(np.abs(X) > 1.0, 0.0, inner) * np.ones_like(np.asarray(T, dtype=float))

    return theta


def axis_reach_time(alpha: float, x_from: float = -1.0, x_to: float = 0.0,
                    n: int = 20001) -> float:
    """Time for the right-moving null curve dt/dx = tan(theta(x)) to cross.

    theta = arccos|x|^alpha; integrates with the substitution u = w^(1/(1-alpha))
    which removes the endpoint singularity, then trapezoid.
    """
    p = 1.0 / (1.0 - alpha)
    w_from = abs(x_to) ** (1.0 / p) if x_to != 0 else 0.0
    w_to = abs(x_from) ** (1.0 / p)
    w = np.linspace(w_from, w_to, n)
    vals = p * np.sqrt(np.clip(1.0 - w ** (2 * alpha * p), 0.0, 1.0))
    return float(np.trapezoid(vals, w))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def _check_alpha(alpha):
    if not (0.0 < alpha < 1.0):
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")


def example1(alpha: float = 0.5) -> SpacetimeSpec:
    """Half-plane null wall: cones rotate from horizontal-right to vertical.

    Reachable sets from points left of the axis touch the axis in finite time
    but never cross; the chronological future of such points is not open.
    """
    _check_alpha(alpha)
    fld = AngleField(_theta_half_wall(alpha), Rect(-50.0, 50.0, -50.0, 50.0),
                     holder_exponent=alpha, name=f"example1(alpha={alpha:g})")
    t1 = axis_reach_time(alpha) if alpha < 0.999 else math.inf
    manifest = ExpectedManifest(
        causally_plain=NO, pushup_holds=UNKNOWN, interior_bubbles=YES,
        exterior_bubbles=UNKNOWN, i_open=NO, i_equals_icheck=NO)
    return SpacetimeSpec(
        name="example1", omega=fld.omega, field=fld, params={"alpha": alpha},
        manifest=manifest, window=Rect(-1.0, 4.0, -1.5, 1.5), base_point=(0.0, -1.0),
        probes={"axis_reach_t": t1, "axis_x": 0.0,
                "certify_targets": ((t1 + 0.5, 0.0), (t1, -0.5)),
                "past_bubble_point": (t1 + 1.0, 0.0)})


def example2(alpha: float = 0.5) -> SpacetimeSpec:
    """Symmetric ridge: a null vertical wall at x = 0 that fronts can leak
    through along non-unique axis generators.

    Chronological futures are open, yet the future of a point at x = -1
    reaches beyond the wall while every uniformly-narrowed cone field stays
    left of it: an interior bubble with non-empty interior.
    """
    _check_alpha(alpha)
    fld = AngleField(_theta_ridge(alpha), Rect(-50.0, 50.0, -50.0, 50.0),
                     holder_exponent=alpha, name=f"example2(alpha={alpha:g})")
    t1 = axis_reach_time(alpha)
    manifest = ExpectedManifest(
        causally_plain=NO, pushup_holds=UNKNOWN, interior_bubbles=YES,
        exterior_bubbles=UNKNOWN, i_open=YES, i_equals_icheck=NO,
        icheck_dense_in_i=NO)
    return SpacetimeSpec(
        name="example2", omega=fld.omega, field=fld, params={"alpha": alpha},
        manifest=manifest, window=Rect(-1.0, 6.0, -1.5, 1.5), base_point=(0.0, -1.0),
        probes={"axis_reach_t": t1, "axis_x": 0.0,
                "certify_targets": ((t1 + 0.5, 0.0), (t1, -0.5)),
                "escape_target": (t1 + 1.5, 0.025)})


def example3(alpha: float = 0.5, lam: float = 0.5, rho: float = 0.05) -> SpacetimeSpec:
    """Ridge spacetime with a horizontal degenerate strip glued in.

    Inside the strip A = [-rho, rho] x [-5/6, -2/3] the cone's lower edge has
    angle arctan|t|^lam, so right-moving null curves obey the non-unique
    dt/dx = |t|^lam: fronts from the strip bound an exterior bubble, while the
    wall at x = 0 still produces interior bubbling further up.
    """
    _check_alpha(alpha)
    if not (0.0 < lam < 1.0):
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")
    if not (0.0 < rho < 1.0):
        raise ValueError(f"rho must lie in (0, 1), got {rho}")
    theta0 = math.acos(0.5**alpha)
    if not (math.atan(rho**lam) < theta0):
        raise ValueError(
            f"need arctan(rho^lambda) < arccos(2^-alpha): {math.atan(rho**lam):.4f} "
            f">= {theta0:.4f}")

    outer = _theta_ridge(alpha)

    def blend_profile(tau, X):
        """Piecewise-linear-in-x profile: 0 at -1, plateau m(tau) on
        [-5/6, -2/3], theta0 at -1/2; plateau clamped at theta0 to keep the
        profile non-decreasing for all admissible parameters."""
        m = np.minimum(np.arctan(tau**lam), theta0)
        X = np.asarray(X, dtype=float)
        ramp_in = np.clip((X + 1.0) / (1.0 / 6.0), 0.0, 1.0)       # [-1, -5/6]
        ramp_out = np.clip((X + 2.0 / 3.0) / (1.0 / 6.0), 0.0, 1.0)  # [-2/3, -1/2]
        return m * ramp_in + (theta0 - m) * ramp_out

    def theta(T, X):
        T = np.asarray(T, dtype=float)
        X = np.asarray(X, dtype=float)
        tau = np.abs(T)
        w = np.clip((1.0 - tau) / (1.0 - rho), 0.0, 1.0)
        blended = w * blend_profile(tau, X) + (1.0 - w) * outer(T, X)
        in_b = (np.abs(T) <= 1.0) & (X >= -1.0) & (X <= -0.5)
        return np.where(in_b, blended, outer(T, X)) + 0.0 * T

    fld = AngleField(theta, Rect(-50.0, 50.0, -50.0, 50.0),
                     holder_exponent=min(alpha, lam),
                     name=f"example3(a={alpha:g},l={lam:g},r={rho:g})")
    manifest = ExpectedManifest(
        causally_plain=NO, pushup_holds=NO, interior_bubbles=YES,
        exterior_bubbles=YES, i_open=UNKNOWN, i_equals_icheck=NO)
    strip_q = (0.0, -0.75)
    return SpacetimeSpec(
        name="example3", omega=fld.omega, field=fld,
        params={"alpha": alpha, "lam": lam, "rho": rho},
        manifest=manifest, window=Rect(-1.0, 4.0, -1.2, 1.2), base_point=strip_q,
        probes={"axis_x": 0.0, "strip": (-0.75, -2.0 / 3.0),
                "bubble_window": (-0.002, 0.01, -0.76, -0.64),
                "bubble_probe": (0.0008, -0.69),
                "certify_targets": ()})


def cg_metric(lam: float = 0.5) -> SpacetimeSpec:
    """Shear metric -(dt + (1 - |t|^lam) dx)^2 + dx^2 with a degenerate
    horizontal axis at t = 0; exhibits exterior bubbling globally."""
    if not (0.0 < lam < 1.0):
        raise ValueError(f"lambda must lie in (0, 1), got {lam}")

    def comps(T, X):
        T = np.asarray(T, dtype=float)
        a = 1.0 - np.abs(T) ** lam
        shape = np.broadcast(T, np.asarray(X)).shape
        return (np.full(shape, -1.0), -a * np.ones(shape), (1.0 - a * a) * np.ones(shape))

    fld = ExplicitMetricField(comps, Rect(-50.0, 50.0, -50.0, 50.0),
                              orientation=TangentVector(1.0, 0.0),
                              name=f"cg(lam={lam:g})")
    manifest = ExpectedManifest(
        causally_plain=NO, pushup_holds=NO, interior_bubbles=UNKNOWN,
        exterior_bubbles=YES, i_open=UNKNOWN, i_equals_icheck=UNKNOWN)
    return SpacetimeSpec(
        name="cg", omega=fld.omega, field=fld, params={"lam": lam},
        manifest=manifest, window=Rect(-2.0, 2.0, -2.0, 2.0), base_point=(-0.5, 0.0),
        probes={"ride_t": 0.0})


def const_angle(theta0: float) -> SpacetimeSpec:
    """Constant cone field; every causal-regularity property holds."""
    if not (0.0 <= theta0 <= 0.5 * math.pi):
        raise ValueError("theta0 must lie in [0, pi/2]")

    def theta(T, X):
        return np.full(np.broadcast(np.asarray(T), np.asarray(X)).shape, float(theta0))

    fld = AngleField(theta, Rect(-50.0, 50.0, -50.0, 50.0), holder_exponent=1.0,
                     name=f"const(theta={theta0:g})")
    manifest = ExpectedManifest(
        causally_plain=YES, pushup_holds=YES, interior_bubbles=NO,
        exterior_bubbles=NO, i_open=YES, i_equals_icheck=YES, icheck_dense_in_i=YES)
    return SpacetimeSpec(
        name=f"const{theta0:g}", omega=fld.omega, field=fld, params={"theta0": theta0},
        manifest=manifest, window=Rect(-0.5, 3.0, -2.0, 2.0), base_point=(0.0, 0.0),
        probes={"certify_targets": ((2.0, 0.5), (1.5, -0.2))})


def lipschitz_control() -> SpacetimeSpec:
    """Half-wall profile at the Lipschitz endpoint alpha = 1.

    The metric components are Lipschitz, fronts cannot reach the axis in
    bounded time, and no bubbling of either kind occurs.
    """
    alpha = 1.0

    def theta(T, X):
        X = np.asarray(X, dtype=float)
        inner = np.arccos(np.clip(np.abs(np.clip(X, -1.0, 0.0)), 0.0, 1.0))
        return np.where(X > 0.0, 0.5 * math.pi, np.where(X < -1.0, 0.0, inner)) \
            * np.ones_like(np.asarray(T, dtype=float))

    fld = AngleField(theta, Rect(-50.0, 50.0, -50.0, 50.0), holder_exponent=0.5,
                     name="lipschitz-control")
    manifest = ExpectedManifest(
        causally_plain=YES, pushup_holds=YES, interior_bubbles=NO,
        exterior_bubbles=NO, i_open=YES, i_equals_icheck=YES, icheck_dense_in_i=YES)
    return SpacetimeSpec(
        name="lipschitz_control", omega=fld.omega, field=fld, params={"alpha": alpha},
        manifest=manifest, window=Rect(-1.0, 4.0, -1.5, 1.5), base_point=(0.0, -1.0),
        probes={"certify_targets": ((2.0, -0.9), (3.0, -0.5))})


def load_custom(config: dict) -> SpacetimeSpec:
    """Build a spec from a config mapping with an expression-defined angle.

    Required keys: ``theta`` (expression in t, x), ``omega`` ([t0, t1, x0, x1]).
    Optional: ``name``, ``window``, ``point``, ``holder``, ``manifest``
    (flag-name -> yes/no/unknown).
    """
    try:
        expr_src = config["theta"]
        omega = Rect(*map(float, config["omega"]))
    except KeyError as exc:
        raise ValueError(f"custom spacetime config missing key {exc}") from exc
    fn = compile_expression(expr_src)

    def theta(T, X):
        out = fn(T, X) * np.ones(np.broadcast(np.asarray(T), np.asarray(X)).shape)
        return out

    fld = AngleField(theta, omega, holder_exponent=float(config.get("holder", 1.0)),
                     name=config.get("name", "custom"))
    # reject non-finite or out-of-range angles on a sample grid
    ts = np.linspace(omega.t_min, omega.t_max, 101)
    xs = np.linspace(omega.x_min, omega.x_max, 101)
    sample = fld.theta_at(*np.meshgrid(ts, xs, indexing="ij"))
    if not np.isfinite(sample).all():
        raise ValueError("custom angle expression evaluates to non-finite values")
    if sample.min() < -1e-12 or sample.max() > 0.5 * math.pi + 1e-12:
        raise ValueError("custom angle must stay within [0, pi/2]")
    check_continuity(fld, omega, l_loc=float(config.get("l_loc", 64.0)))
    manifest = ExpectedManifest(**config.get("manifest", {}))
    window = Rect(*map(float, config["window"])) if "window" in config else None
    point = tuple(map(float, config.get("point", ((omega.t_min + omega.t_max) / 2,
                                                  (omega.x_min + omega.x_max) / 2))))
    return SpacetimeSpec(name=config.get("name", "custom"), omega=omega, field=fld,
                         params={k: v for k, v in config.items() if k != "manifest"},
                         manifest=manifest, window=window, base_point=point)


ZOO = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "cg": cg_metric,
    "const_quarter": lambda: const_angle(0.25 * math.pi),
    "const_zero": lambda: const_angle(0.0),
    "lipschitz_control": lipschitz_control,
}


def catalog() -> list[dict]:
    entries = []
    for key, ctor in ZOO.items():
        spec = ctor()
        entries.append({
            "key": key,
            "name": spec.name,
            "params": spec.params,
            "window": spec.analysis_window.as_tuple(),
            "base_point": spec.base_point,
            "manifest": spec.manifest.as_dict(),
        })
    return entries
