"""Smooth plane curves and their decomposition into rotated graph patches.

A patch represents a boundary arc as x2 = gamma(x1) in a local frame
obtained by rotating the global frame, sampled on a uniform x1 grid. Each
grid carries two margin nodes per end so that 5-point interior stencils
apply everywhere a converted quantity is reported. Grids are snapped onto
a dyadic raster, which makes consecutive node differences bitwise equal to
the stored spacing.

Conventions:
  * orientation "below" means the fluid domain lies locally under the
    graph, so the outward normal is (-gamma', 1)/theta; "above" negates it.
  * FrameRotation(a).apply(v) maps local-frame components to the global
    frame; use .inverse() for the opposite direction.
  * for closed curves traversed counterclockwise the interior sits on the
    left of the tangent, which in a tangent-aligned local frame is the
    "above" side.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .traces import MARGIN, VectorTrace

ORIENTATIONS = ("below", "above")
CURVE_KINDS = ("analytic-closed-form", "sampled-periodic", "open")

# fraction of the slope cone the partitioner actually budgets per patch,
# leaving headroom for between-sample tangent excursions
_CONE_SAFETY = 0.95


def theta(gamma_prime):
    """Graph metric factor sqrt(1 + gamma'^2)."""
    return np.hypot(1.0, np.asarray(gamma_prime, dtype=float))


@dataclass(frozen=True)
class FrameRotation:
    """Proper rotation by `angle`, taking local components to the parent frame."""

    angle: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.angle), math.sin(self.angle)
        return np.array([[c, -s], [s, c]])

    def inverse(self) -> "FrameRotation":
        return FrameRotation(-self.angle)

    def apply(self, vectors) -> np.ndarray:
        """Rotate an array of 2-vectors with shape (..., 2)."""
        return np.asarray(vectors, dtype=float) @ self.matrix.T


def rotate_vector_trace(v, rot: FrameRotation):
    """Rotate per-node 2-vectors; accepts a VectorTrace or an (..., 2) array."""
    if isinstance(v, VectorTrace):
        out = rot.apply(v.stacked())
        return VectorTrace.from_arrays(out[..., 0], out[..., 1], v.h)
    return rot.apply(v)


def uniform_grid(lo: float, hi: float, n: int) -> tuple[np.ndarray, float]:
    """Uniform grid of n nodes inside [lo, hi] with exactly equal spacing.

    Spacing and origin are snapped to a dyadic raster (granularity about
    h * 2**-32) so every node is an exact integer multiple of the raster;
    successive floating-point differences then equal h bit for bit. The
    snap moves each endpoint inward by less than one raster step.
    """
    if n < 2:
        raise ValueError("grid needs at least 2 nodes")
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError("grid span is empty")
    want = (hi - lo) / (n - 1)
    _, e = math.frexp(want)
    scale = math.ldexp(1.0, e - 33)
    start = math.ceil(lo / scale) * scale
    h = math.floor((hi - start) / (n - 1) / scale) * scale
    if h <= 0:
        raise ValueError("grid span too small for the requested node count")
    x = start + h * np.arange(n)
    return x, h


@dataclass(frozen=True, eq=False)
class BoundaryPatch:
    """Boundary arc x2 = gamma(x1) sampled in a rotated local frame.

    Arrays are indexed by the uniform x1 grid; `mu` holds the viscosity at
    each node and `orientation` records which side of the graph the fluid
    domain occupies.
    """

    frame_angle: float
    x1: np.ndarray
    gamma: np.ndarray
    gamma_prime: np.ndarray
    mu: np.ndarray
    orientation: str = "below"

    def __post_init__(self):
        for name in ("x1", "gamma", "gamma_prime", "mu"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        object.__setattr__(self, "frame_angle", float(self.frame_angle))
        n = self.x1.shape[0]
        if any(getattr(self, name).shape != (n,) for name in ("gamma", "gamma_prime", "mu")):
            raise ValueError("patch arrays must share the grid length")
        if self.orientation not in ORIENTATIONS:
            raise ValueError(f"orientation must be one of {ORIENTATIONS}")
        if n < 2:
            raise ValueError("patch needs at least 2 nodes")

    @property
    def n(self) -> int:
        return self.x1.shape[0]

    @property
    def h(self) -> float:
        return float(self.x1[1] - self.x1[0])

    @property
    def theta(self) -> np.ndarray:
        return theta(self.gamma_prime)

    @property
    def rotation(self) -> FrameRotation:
        return FrameRotation(self.frame_angle)

    def validate(self, max_slope: float | None = None) -> None:
        """Raise ValueError if a patch invariant is violated."""
        for name in ("x1", "gamma", "gamma_prime", "mu"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"patch field {name} contains non-finite values")
        if np.any(self.mu <= 0):
            raise ValueError("viscosity must be positive at every node")
        h = self.h
        if not h > 0:
            raise ValueError("grid spacing must be positive")
        if np.max(np.abs(np.diff(self.x1) - h)) > 1e-14 * abs(h):
            raise ValueError("grid is not uniform")
        if max_slope is not None and np.max(np.abs(self.gamma_prime)) > max_slope + 1e-10:
            raise ValueError(f"slope bound |gamma'| <= {max_slope} violated")

    def interior(self) -> "BoundaryPatch":
        """Sub-patch on the nodes where stencil-derived quantities live."""
        if self.n < 2 * MARGIN + 1:
            raise ValueError("patch too short to restrict: needs at least 5 nodes")
        return BoundaryPatch(
            self.frame_angle,
            self.x1[MARGIN:-MARGIN],
            self.gamma[MARGIN:-MARGIN],
            self.gamma_prime[MARGIN:-MARGIN],
            self.mu[MARGIN:-MARGIN],
            self.orientation,
        )

    def nodes_global(self) -> np.ndarray:
        """Node positions in the global frame, shape (n, 2)."""
        local = np.stack([self.x1, self.gamma], axis=-1)
        return self.rotation.apply(local)


def normal_at(gamma_prime, orientation: str = "below") -> np.ndarray:
    """Outward unit normal of the graph boundary.

    Returns (-gamma', 1)/theta when the domain is below the graph and its
    negation when above; the last axis of the result has length 2.
    """
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    gp = np.asarray(gamma_prime, dtype=float)
    th = theta(gp)
    nu = np.stack([-gp / th, np.ones_like(gp) / th], axis=-1)
    return -nu if orientation == "above" else nu


@dataclass(frozen=True)
class ParametricCurve:
    """Plane curve given by vectorized position/velocity maps of t in [0, 1).

    For the closed kinds the callables must accept any real t and wrap
    periodically; "open" curves are only evaluated inside [0, 1].
    """

    position: Callable
    velocity: Callable
    kind: str = "analytic-closed-form"

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise ValueError(f"kind must be one of {CURVE_KINDS}")

    @property
    def closed(self) -> bool:
        return self.kind != "open"

    @classmethod
    def from_samples(cls, points) -> "ParametricCurve":
        """Closed curve through sample points via periodic cubic splines."""
        pts = np.asarray(points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 4:
            raise ValueError("need an (m, 2) array with at least 4 sample points")
        knots = np.linspace(0.0, 1.0, pts.shape[0] + 1)
        wrapped = np.vstack([pts, pts[:1]])
        spline = CubicSpline(knots, wrapped, bc_type="periodic")
        dspline = spline.derivative()

        def position(t):
            q = spline(np.asarray(t, dtype=float) % 1.0)
            return q[..., 0], q[..., 1]

        def velocity(t):
            q = dspline(np.asarray(t, dtype=float) % 1.0)
            return q[..., 0], q[..., 1]

        return cls(position, velocity, kind="sampled-periodic")


def circle(radius: float) -> ParametricCurve:
    """Counterclockwise circle of the given radius, centered at the origin."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    r = float(radius)
    two_pi = 2.0 * np.pi

    def position(t):
        a = two_pi * np.asarray(t, dtype=float)
        return r * np.cos(a), r * np.sin(a)

    def velocity(t):
        a = two_pi * np.asarray(t, dtype=float)
        return -two_pi * r * np.sin(a), two_pi * r * np.cos(a)

    return ParametricCurve(position, velocity)


def ellipse(a: float, b: float) -> ParametricCurve:
    """Counterclockwise axis-aligned ellipse with semi-axes a and b."""
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    a, b = float(a), float(b)
    two_pi = 2.0 * np.pi

    def position(t):
        w = two_pi * np.asarray(t, dtype=float)
        return a * np.cos(w), b * np.sin(w)

    def velocity(t):
        w = two_pi * np.asarray(t, dtype=float)
        return -two_pi * a * np.sin(w), two_pi * b * np.cos(w)

    return ParametricCurve(position, velocity)


def graph_curve(f: Callable, fprime: Callable, lo: float, hi: float) -> ParametricCurve:
    """Open arc x2 = f(x1) over [lo, hi], parametrized linearly in x1."""
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError("empty abscissa range")
    span = hi - lo

    def position(t):
        x = lo + span * np.asarray(t, dtype=float)
        return x, np.asarray(f(x), dtype=float)

    def velocity(t):
        x = lo + span * np.asarray(t, dtype=float)
        return np.full_like(x, span), span * np.asarray(fprime(x), dtype=float)

    return ParametricCurve(position, velocity, kind="open")


def polynomial_graph(coeffs: Sequence[float], lo: float, hi: float) -> ParametricCurve:
    """Open polynomial graph with coefficients in increasing-degree order."""
    poly = np.polynomial.Polynomial(list(coeffs))
    return graph_curve(poly, poly.deriv(), lo, hi)


def graph_patch(gamma, gamma_prime, lo: float, hi: float, n: int, *,
                mu=1.0, orientation: str = "below") -> BoundaryPatch:
    """Patch sampled directly from a slope-bounded graph, frame angle zero.

    `gamma` and `gamma_prime` may be callables of x1 or constants; `mu` may
    be a constant or a callable of the global coordinates.
    """
    x, _ = uniform_grid(lo, hi, n)
    g = np.asarray(gamma(x) if callable(gamma) else gamma, dtype=float) * np.ones_like(x)
    gp = np.asarray(gamma_prime(x) if callable(gamma_prime) else gamma_prime, dtype=float) * np.ones_like(x)
    mu_vals = np.asarray(mu(x, g) if callable(mu) else mu, dtype=float) * np.ones_like(x)
    return BoundaryPatch(0.0, x, g, gp, mu_vals, orientation)


def partition_curve(curve: ParametricCurve, max_slope: float = 1.0,
                    overlap_fraction: float = 0.2, nodes_per_patch: int = 64, *,
                    mu=1.0, interior_side: str = "below", samples: int = 4096,
                    corner_tol: float = 0.35) -> list[BoundaryPatch]:
    """Cover a curve with overlapping graph patches of bounded slope.

    Every emitted patch satisfies |gamma'| <= max_slope after rotation to
    its frame, consecutive patches overlap by at least overlap_fraction of
    their arc length, and the patch interiors cover the curve. Closed
    curves get their orientation from the traversal sense; `interior_side`
    applies only to open arcs.

    Raises ValueError for invalid parameters, irregular curves, curves
    with corners, or closed curves that fail the closure check.
    """
    if not max_slope > 0:
        raise ValueError("max_slope must be positive")
    if not 0.0 <= overlap_fraction < 0.5:
        raise ValueError("overlap_fraction must lie in [0, 0.5)")
    if nodes_per_patch < 2 * MARGIN + 1:
        raise ValueError("nodes_per_patch must be at least 5")
    if interior_side not in ORIENTATIONS:
        raise ValueError(f"interior_side must be one of {ORIENTATIONS}")

    tt = np.linspace(0.0, 1.0, samples + 1)
    x, y = (np.asarray(v, dtype=float) for v in curve.position(tt))
    vx, vy = (np.asarray(v, dtype=float) for v in curve.velocity(tt))
    speed = np.hypot(vx, vy)
    if np.min(speed) <= 1e-12 * max(np.max(speed), 1.0):
        raise ValueError("curve is not regular: velocity vanishes at a sample node")
    if curve.closed and math.hypot(x[0] - x[-1], y[0] - y[-1]) > 1e-12:
        raise ValueError("curve marked closed does not close up")

    phi = np.unwrap(np.arctan2(vy, vx))
    if np.max(np.abs(np.diff(phi))) > corner_tol:
        raise ValueError("corner detected: tangent direction jumps between adjacent samples")

    s = np.concatenate(([0.0], np.cumsum(0.5 * (speed[1:] + speed[:-1]) * np.diff(tt))))
    arc_len = float(s[-1])

    cone = math.atan(max_slope)
    budget = 2.0 * _CONE_SAFETY * cone
    ovl = max(float(overlap_fraction), 0.05)

    # windows: (arc start, arc end, frame angle or None for "use phi midrange")
    if curve.closed:
        area = 0.5 * float(np.trapezoid(x * vy - y * vx, tt))
        orientation = "above" if area > 0 else "below"
        s_ext = np.concatenate((s, s[1:] + arc_len))
        phi_ext = np.concatenate((phi, phi[1:] + (phi[-1] - phi[0])))
        tt_ext = np.concatenate((tt, tt[1:] + 1.0))
        feasible = _max_window_lengths(s_ext, phi_ext, budget, samples + 1, arc_len)
        lstar = float(np.min(feasible))
        if lstar <= 0:
            raise ValueError("tangent turns too fast for this sampling; increase samples")
        count = int(math.ceil(arc_len / ((1.0 - ovl) * lstar)))
        stride = arc_len / count
        length = stride / (1.0 - ovl)
        windows = [(k * stride, k * stride + length, None) for k in range(count)]
    else:
        orientation = interior_side
        s_ext, phi_ext, tt_ext = s, phi, tt
        if float(np.max(np.abs(phi))) <= cone:
            windows = [(0.0, arc_len, 0.0)]
        elif float(phi.max() - phi.min()) <= budget:
            windows = [(0.0, arc_len, 0.5 * float(phi.max() + phi.min()))]
        else:
            windows = _greedy_open_windows(s, phi, budget, ovl)

    stencil_slope = curve.kind == "sampled-periodic"
    patches = []
    for sa, sb, frame in windows:
        ja = max(int(np.searchsorted(s_ext, sa, side="right")) - 1, 0)
        jb = min(int(np.searchsorted(s_ext, sb, side="left")) + 1, s_ext.shape[0] - 1)
        if frame is None:
            window_phi = phi_ext[ja:jb + 1]
            frame = 0.5 * float(window_phi.max() + window_phi.min())
        t_a = float(np.interp(sa, s_ext, tt_ext))
        t_b = float(np.interp(sb, s_ext, tt_ext))
        patches.append(_build_patch(curve, frame, t_a, t_b, nodes_per_patch, mu,
                                    orientation, max_slope, stencil_slope))
    return patches


def _max_window_lengths(s, phi, budget, n_starts, cap):
    """Longest arclength window with tangent-angle span <= budget, per start node."""
    hi: deque = deque()
    lo: deque = deque()

    def push(i):
        while hi and phi[hi[-1]] <= phi[i]:
            hi.pop()
        hi.append(i)
        while lo and phi[lo[-1]] >= phi[i]:
            lo.pop()
        lo.append(i)

    out = np.empty(n_starts)
    k = -1
    for j in range(n_starts):
        if k < j:
            k = j
            hi.clear()
            lo.clear()
            push(j)
        while k + 1 < s.shape[0] and s[k + 1] - s[j] <= cap:
            nxt = phi[k + 1]
            if max(phi[hi[0]], nxt) - min(phi[lo[0]], nxt) > budget:
                break
            k += 1
            push(k)
        out[j] = s[k] - s[j]
        if hi[0] == j:
            hi.popleft()
        if lo[0] == j:
            lo.popleft()
    return out


def _greedy_open_windows(s, phi, budget, ovl):
    """Forward cover of an open arc by maximal angle-feasible windows."""
    windows = []
    a_idx = 0
    last = s.shape[0] - 1
    while True:
        top = bot = phi[a_idx]
        k = a_idx
        while k + 1 <= last:
            t2 = max(top, phi[k + 1])
            b2 = min(bot, phi[k + 1])
            if t2 - b2 > budget:
                break
            top, bot, k = t2, b2, k + 1
        if k == a_idx:
            raise ValueError("tangent turns too fast for this sampling; increase samples")
        frame = 0.5 * float(top + bot)
        windows.append((float(s[a_idx]), float(s[k]), frame))
        if k == last:
            return windows
        a_next = s[k] - ovl * (s[k] - s[a_idx])
        nxt = int(np.searchsorted(s, a_next, side="right")) - 1
        a_idx = min(max(nxt, a_idx + 1), last - 1)


def _build_patch(curve, frame, t_a, t_b, n_nodes, mu, orientation, max_slope, stencil_slope):
    c, s_ = math.cos(frame), math.sin(frame)

    def local_x(t):
        px, py = curve.position(t)
        return c * np.asarray(px, dtype=float) + s_ * np.asarray(py, dtype=float)

    def local_y(t):
        px, py = curve.position(t)
        return -s_ * np.asarray(px, dtype=float) + c * np.asarray(py, dtype=float)

    xa, xb = float(local_x(t_a)), float(local_x(t_b))
    x1, h = uniform_grid(xa, xb, n_nodes)

    if stencil_slope:
        # sample two extra dyadic nodes per side so the slope stencil covers
        # the whole stored grid; only closed curves reach this path
        targets = x1[0] + h * np.arange(-MARGIN, n_nodes + MARGIN)
        pad = (t_b - t_a) * (3.0 * MARGIN * h / max(xb - xa, h))
        t_lo, t_hi = t_a - pad, t_b + pad
    else:
        targets = x1
        t_lo, t_hi = t_a, t_b

    t_nodes = _invert_monotone(local_x, t_lo, t_hi, targets)

    if stencil_slope:
        g_ext = local_y(t_nodes)
        gamma = g_ext[MARGIN:-MARGIN]
        gp = (g_ext[:-4] - 8.0 * g_ext[1:-3] + 8.0 * g_ext[3:-1] - g_ext[4:]) / (12.0 * h)
    else:
        gamma = local_y(t_nodes)
        wx, wy = (np.asarray(v, dtype=float) for v in curve.velocity(t_nodes))
        gp = (-s_ * wx + c * wy) / (c * wx + s_ * wy)

    if np.max(np.abs(gp)) > max_slope:
        raise ValueError("patch slope bound exceeded; increase samples or reduce max_slope")

    xg = c * x1 - s_ * gamma
    yg = s_ * x1 + c * gamma
    mu_vals = np.asarray(mu(xg, yg) if callable(mu) else mu, dtype=float) * np.ones_like(x1)
    return BoundaryPatch(frame, x1, gamma, gp, mu_vals, orientation)


def _invert_monotone(fn, t_lo, t_hi, targets):
    """Solve fn(t) = target for each target; fn must be increasing on [t_lo, t_hi]."""
    dense = np.linspace(t_lo, t_hi, max(1024, 8 * len(targets)))
    vals = np.asarray(fn(dense), dtype=float)
    if np.any(np.diff(vals) <= 0):
        raise ValueError("local abscissa is not monotone over the patch window")
    out = np.empty(len(targets))
    for i, g in enumerate(np.asarray(targets, dtype=float)):
        if g <= vals[0]:
            out[i] = dense[0]
        elif g >= vals[-1]:
            out[i] = dense[-1]
        else:
            idx = int(np.searchsorted(vals, g))
            out[i] = brentq(lambda t: float(fn(t)) - g, dense[idx - 1], dense[idx],
                            xtol=1e-15, rtol=8.9e-16)
    return out
