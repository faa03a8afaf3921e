"""Parametric planar paths, their differential geometry and projection.

A :class:`Path` is an immutable sequence of segments glued end to end.  The
path parameter ``gamma`` of a composite is cumulative: segment ``k`` owns
``(offset_k, offset_k + span_k]`` and is evaluated at the local parameter
``gamma - offset_k``.  Junctions are evaluated with the incoming segment.

``gamma`` is not assumed to be arclength; every quantity that needs a
speed along the path carries ``arc_speed = |p_d'(gamma)|`` explicitly.

Examples
--------
>>> lm = make_lawnmower(30.0, 10.0, 20.0, 30.0)
>>> round(lm.domain[1], 6)
142.831853
>>> lm.eval(10.0).pd
(10.0, 0.0)
"""
from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .exceptions import AmbiguousProjection, DegenerateTangent, OutOfDomain

TWO_PI = 2.0 * math.pi
_DEGENERATE = 1e-12
_DOMAIN_TOL = 1e-12
_JUNCTION_TOL = 1e-9


@dataclass(frozen=True, slots=True)
class PathPoint:
    """Geometry of the path at one parameter value.

    Attributes
    ----------
    gamma : float
        Path parameter.
    pd, pd_prime, pd_second : tuple of float
        Position and first/second derivatives with respect to ``gamma``.
    psi_P : float
        Tangent angle ``atan2(y', x')`` in ``(-pi, pi]``.
    kappa : float
        Signed curvature ``(x' y'' - x'' y') / |p'|^3`` (positive = left turn).
    arc_speed : float
        ``|p_d'(gamma)|``.
    """

    gamma: float
    pd: tuple
    pd_prime: tuple
    pd_second: tuple
    psi_P: float
    kappa: float
    arc_speed: float

    @property
    def d_arc_speed(self) -> float:
        """Derivative of ``arc_speed`` with respect to ``gamma``."""
        dx, dy = self.pd_prime
        ddx, ddy = self.pd_second
        return (dx * ddx + dy * ddy) / self.arc_speed


def _point(gamma, x, y, dx, dy, ddx, ddy) -> PathPoint:
    sp = math.hypot(dx, dy)
    if not sp >= _DEGENERATE:
        raise DegenerateTangent(f"|p_d'| = {sp:.3e} at gamma = {gamma!r}")
    kappa = (dx * ddy - ddx * dy) / (sp * sp * sp)
    return PathPoint(gamma, (x, y), (dx, dy), (ddx, ddy), math.atan2(dy, dx), kappa, sp)


# ---------------------------------------------------------------------------
# segments (local parameter s in [0, span])


class _Segment:
    kind = "segment"
    span: float
    analytic = False

    def geom(self, s: float):
        raise NotImplementedError

    def geom_array(self, s: np.ndarray):
        raise NotImplementedError

    def candidates(self, px: float, py: float):
        """Analytic closest-point candidates as ``[(s, dist), ...]``."""
        raise NotImplementedError

    def start(self):
        g = self.geom(0.0)
        return g[0], g[1]

    def end(self):
        g = self.geom(self.span)
        return g[0], g[1]

    def describe(self) -> dict:
        raise NotImplementedError


class _Line(_Segment):
    kind = "line"
    analytic = True

    def __init__(self, origin, heading: float, length: float):
        self.x0, self.y0 = float(origin[0]), float(origin[1])
        self.heading = float(heading)
        self.c, self.s = math.cos(heading), math.sin(heading)
        self.span = float(length)

    def geom(self, s):
        return (self.x0 + s * self.c, self.y0 + s * self.s, self.c, self.s, 0.0, 0.0)

    def geom_array(self, s):
        s = np.asarray(s, dtype=float)
        one = np.ones_like(s)
        zero = np.zeros_like(s)
        return (self.x0 + s * self.c, self.y0 + s * self.s, self.c * one, self.s * one, zero, zero)

    def candidates(self, px, py):
        s = (px - self.x0) * self.c + (py - self.y0) * self.s
        s = min(max(s, 0.0), self.span)
        x, y = self.x0 + s * self.c, self.y0 + s * self.s
        return [(s, math.hypot(px - x, py - y))]

    def describe(self):
        return {"kind": "line", "origin": [self.x0, self.y0], "heading": self.heading,
                "length": self.span}


class _Arc(_Segment):
    """Circular arc ``c + R (cos phi, sin phi)`` with ``phi = theta0 + omega s``."""

    kind = "circle_arc"
    analytic = True

    def __init__(self, center, radius: float, theta0: float, omega: float, span: float):
        self.cx, self.cy = float(center[0]), float(center[1])
        self.R = float(radius)
        self.theta0 = float(theta0)
        self.omega = float(omega)
        self.span = float(span)
        self.full = abs(self.omega) * self.span >= TWO_PI - 1e-12

    def geom(self, s):
        phi = self.theta0 + self.omega * s
        c, sn = math.cos(phi), math.sin(phi)
        R, w = self.R, self.omega
        return (self.cx + R * c, self.cy + R * sn, -R * w * sn, R * w * c,
                -R * w * w * c, -R * w * w * sn)

    def geom_array(self, s):
        phi = self.theta0 + self.omega * np.asarray(s, dtype=float)
        c, sn = np.cos(phi), np.sin(phi)
        R, w = self.R, self.omega
        return (self.cx + R * c, self.cy + R * sn, -R * w * sn, R * w * c,
                -R * w * w * c, -R * w * w * sn)

    def candidates(self, px, py):
        dx, dy = px - self.cx, py - self.cy
        rho = math.hypot(dx, dy)
        if rho < _JUNCTION_TOL:
            raise AmbiguousProjection(
                "query point coincides with the arc center",
                candidates=(0.0, self.span))
        # angle swept from theta0 in the direction of travel, in [0, 2 pi)
        rel = math.copysign(1.0, self.omega) * (math.atan2(dy, dx) - self.theta0)
        rel = math.fmod(rel, TWO_PI)
        if rel < 0.0:
            rel += TWO_PI
        s = rel / abs(self.omega)
        if s <= self.span:
            return [(s, abs(rho - self.R))]
        out = []
        for se in (0.0, self.span):
            x, y, *_ = self.geom(se)
            out.append((se, math.hypot(px - x, py - y)))
        return out

    def describe(self):
        return {"kind": "circle_arc", "center": [self.cx, self.cy], "radius": self.R,
                "start_angle": self.theta0, "omega": self.omega, "span": self.span}


class _Rigid(_Segment):
    """Segment defined in a local frame and placed by a rigid motion."""

    def __init__(self, origin, heading):
        self.ox, self.oy = float(origin[0]), float(origin[1])
        self.heading = float(heading)
        self.c, self.s = math.cos(heading), math.sin(heading)

    def _local(self, s):
        raise NotImplementedError

    def geom(self, s):
        x, y, dx, dy, ddx, ddy = self._local(s)
        c, sn = self.c, self.s
        return (self.ox + c * x - sn * y, self.oy + sn * x + c * y,
                c * dx - sn * dy, sn * dx + c * dy, c * ddx - sn * ddy, sn * ddx + c * ddy)

    def geom_array(self, s):
        x, y, dx, dy, ddx, ddy = self._local_array(np.asarray(s, dtype=float))
        c, sn = self.c, self.s
        return (self.ox + c * x - sn * y, self.oy + sn * x + c * y,
                c * dx - sn * dy, sn * dx + c * dy, c * ddx - sn * ddy, sn * ddx + c * ddy)

    def _local_array(self, s):
        raise NotImplementedError


class _Lemniscate(_Rigid):
    """Bernoulli lemniscate ``c (cos g, sin g cos g) / (1 + sin^2 g)``."""

    kind = "lemniscate"

    def __init__(self, scale: float, center=(0.0, 0.0), heading: float = 0.0):
        super().__init__(center, heading)
        self.scale = float(scale)
        self.span = TWO_PI

    @staticmethod
    def _quotient(n, n1, n2, d, d1, d2):
        q = n / d
        q1 = (n1 * d - n * d1) / (d * d)
        q2 = (n2 - 2.0 * q1 * d1 - q * d2) / d
        return q, q1, q2

    def _local(self, g):
        sg, cg = math.sin(g), math.cos(g)
        s2, c2 = math.sin(2 * g), math.cos(2 * g)
        a = self.scale
        d, d1, d2 = 1.0 + sg * sg, s2, 2.0 * c2
        x, x1, x2 = self._quotient(a * cg, -a * sg, -a * cg, d, d1, d2)
        y, y1, y2 = self._quotient(0.5 * a * s2, a * c2, -2.0 * a * s2, d, d1, d2)
        return x, y, x1, y1, x2, y2

    def _local_array(self, g):
        sg, cg = np.sin(g), np.cos(g)
        s2, c2 = np.sin(2 * g), np.cos(2 * g)
        a = self.scale
        d, d1, d2 = 1.0 + sg * sg, s2, 2.0 * c2
        x, x1, x2 = self._quotient(a * cg, -a * sg, -a * cg, d, d1, d2)
        y, y1, y2 = self._quotient(0.5 * a * s2, a * c2, -2.0 * a * s2, d, d1, d2)
        return x, y, x1, y1, x2, y2

    def describe(self):
        return {"kind": "lemniscate", "scale": self.scale, "center": [self.ox, self.oy],
                "heading": self.heading}


class _Sinusoid(_Rigid):
    """``(s, A sin(2 pi s / wavelength))`` in the local frame, ``s`` = abscissa."""

    kind = "sinusoid"

    def __init__(self, amplitude, wavelength, length, origin=(0.0, 0.0), heading=0.0):
        super().__init__(origin, heading)
        self.A = float(amplitude)
        self.wavelength = float(wavelength)
        self.k = TWO_PI / self.wavelength
        self.span = float(length)

    def _local(self, s):
        A, k = self.A, self.k
        sn, c = math.sin(k * s), math.cos(k * s)
        return s, A * sn, 1.0, A * k * c, 0.0, -A * k * k * sn

    def _local_array(self, s):
        A, k = self.A, self.k
        sn, c = np.sin(k * s), np.cos(k * s)
        return s, A * sn, np.ones_like(s), A * k * c, np.zeros_like(s), -A * k * k * sn

    def describe(self):
        return {"kind": "sinusoid", "amplitude": self.A, "wavelength": self.wavelength,
                "length": self.span, "origin": [self.ox, self.oy], "heading": self.heading}


# ---------------------------------------------------------------------------
# path handle


@dataclass(frozen=True)
class Path:
    """Immutable path handle.

    Attributes
    ----------
    kind : str
        ``line``, ``circle_arc``, ``lemniscate``, ``sinusoid`` or ``composite``.
    segments : tuple
        Segment objects; single-segment paths have exactly one.
    start : float
        Parameter value at the start of the first segment.
    periodic : bool
        Closed curve whose parameter wraps (full circle, lemniscate).  Any real
        ``gamma`` is then in the domain.
    """

    kind: str
    segments: tuple
    start: float = 0.0
    periodic: bool = False
    offsets: tuple = field(init=False)

    def __post_init__(self):
        offs, acc = [], self.start
        for seg in self.segments:
            offs.append(acc)
            acc += seg.span
        object.__setattr__(self, "offsets", tuple(offs))

    # -- domain ----------------------------------------------------------
    @property
    def domain(self) -> tuple[float, float]:
        return self.start, self.offsets[-1] + self.segments[-1].span

    @property
    def period(self) -> float:
        a, b = self.domain
        return b - a

    @property
    def analytic_projection(self) -> bool:
        return all(seg.analytic for seg in self.segments)

    def _locate(self, gamma: float, clamp: bool, extrapolate: bool):
        a, b = self.domain
        if self.periodic:
            g = a + math.fmod(gamma - a, b - a)
            if g < a:
                g += b - a
            return 0, g - a
        if gamma < a - _DOMAIN_TOL or gamma > b + _DOMAIN_TOL:
            if extrapolate:
                if gamma < a:
                    return 0, gamma - a
                k = len(self.segments) - 1
                return k, gamma - self.offsets[k]
            if not clamp:
                raise OutOfDomain(f"gamma = {gamma!r} outside [{a}, {b}]")
        gamma = min(max(gamma, a), b)
        # incoming segment owns the junction
        k = bisect.bisect_left(self.offsets, gamma) - 1
        k = min(max(k, 0), len(self.segments) - 1)
        return k, gamma - self.offsets[k]

    def geom(self, gamma: float, clamp: bool = False, extrapolate: bool = False):
        """Return ``(x, y, x', y', x'', y'')`` as plain floats."""
        k, s = self._locate(float(gamma), clamp, extrapolate)
        return self.segments[k].geom(s)

    def eval(self, gamma: float, clamp: bool = False, extrapolate: bool = False) -> PathPoint:
        """Evaluate position, derivatives, tangent angle and signed curvature.

        Raises
        ------
        OutOfDomain
            ``gamma`` outside the domain with both ``clamp`` and ``extrapolate``
            disabled (never raised for periodic paths).
        DegenerateTangent
            ``|p_d'| < 1e-12``.
        """
        g = float(gamma)
        geom = self.geom(g, clamp, extrapolate)
        if clamp and not extrapolate and not self.periodic:
            g = min(max(g, self.domain[0]), self.domain[1])
        return _point(g, *geom)

    def geom_array(self, gamma, extrapolate: bool = True):
        """Vectorised :meth:`geom`; out-of-domain values extend the end segments."""
        g = np.asarray(gamma, dtype=float)
        a, b = self.domain
        if self.periodic:
            g = a + np.mod(g - a, b - a)
        elif not extrapolate and (np.any(g < a - _DOMAIN_TOL) or np.any(g > b + _DOMAIN_TOL)):
            raise OutOfDomain("gamma array leaves the path domain")
        if len(self.segments) == 1:
            return self.segments[0].geom_array(g - a)
        idx = np.searchsorted(np.asarray(self.offsets), g, side="left") - 1
        idx = np.clip(idx, 0, len(self.segments) - 1)
        out = [np.empty_like(g) for _ in range(6)]
        for k, seg in enumerate(self.segments):
            m = idx == k
            if np.any(m):
                vals = seg.geom_array(g[m] - self.offsets[k])
                for o, v in zip(out, vals):
                    o[m] = v
        return tuple(out)

    def frame_array(self, gamma):
        """Tangent angle, arc speed and signed curvature on an array of parameters.

        Line and arc segments have an affine tangent angle and constant speed and
        curvature, which gives a cheap table lookup; other segments fall back to
        :meth:`geom_array`.  Out-of-domain values extend the end segments.
        """
        g = np.asarray(gamma, dtype=float)
        tab = self._frame_table
        if tab is None:
            _, _, dx, dy, ddx, ddy = self.geom_array(g)
            sp = np.hypot(dx, dy)
            return np.arctan2(dy, dx), sp, (dx * ddy - ddx * dy) / sp**3
        offs, a0, a1, sp, kap = tab
        a = self.start
        if self.periodic:
            g = a + np.mod(g - a, self.period)
        if len(offs) == 1:
            s = g - offs[0]
            return a0[0] + a1[0] * s, np.full_like(s, sp[0]), np.full_like(s, kap[0])
        k = np.clip(np.searchsorted(offs, g, side="left") - 1, 0, len(offs) - 1)
        s = g - offs[k]
        return a0[k] + a1[k] * s, sp[k], kap[k]

    @property
    def _frame_table(self):
        try:
            return self.__dict__["_ftab"]
        except KeyError:
            pass
        tab = None
        if self.analytic_projection:
            a0, a1, sp, kap = [], [], [], []
            for seg in self.segments:
                if isinstance(seg, _Line):
                    a0.append(seg.heading); a1.append(0.0); sp.append(1.0); kap.append(0.0)
                else:
                    sg = math.copysign(1.0, seg.omega)
                    a0.append(seg.theta0 + sg * math.pi / 2)
                    a1.append(seg.omega)
                    sp.append(seg.R * abs(seg.omega))
                    kap.append(sg / seg.R)
            tab = tuple(np.asarray(v, dtype=float) for v in (self.offsets, a0, a1, sp, kap))
        object.__setattr__(self, "_ftab", tab)
        return tab

    def kappa_array(self, gamma):
        """Signed curvature and arc speed on an array of parameters."""
        _, _, dx, dy, ddx, ddy = self.geom_array(gamma)
        sp = np.hypot(dx, dy)
        return (dx * ddy - ddx * dy) / sp**3, sp

    def length(self) -> float:
        """Arclength of the whole path (numeric for non-analytic segments)."""
        from scipy.integrate import quad

        total = 0.0
        for seg in self.segments:
            if isinstance(seg, _Line):
                total += seg.span
            elif isinstance(seg, _Arc):
                total += seg.R * abs(seg.omega) * seg.span
            else:
                def speed(s, seg=seg):
                    g = seg.geom(s)
                    return math.hypot(g[2], g[3])
                total += quad(speed, 0.0, seg.span, limit=200)[0]
        return total

    def describe(self) -> dict:
        return {"kind": self.kind, "segments": [s.describe() for s in self.segments]}

    # -- projection ------------------------------------------------------
    def project(self, p, prev: float | None = None, n_grid: int = 2048) -> float:
        """Parameter of the closest path point to ``p``.

        Parameters
        ----------
        p : sequence of float
            Query position.
        prev : float, optional
            Previous projection.  A local search around it is tried first so
            the projection stays continuous, and ties are resolved towards it.
        n_grid : int
            Samples for the global coarse scan (non-analytic paths).

        Raises
        ------
        AmbiguousProjection
            Without ``prev``, when two path points more than 5 % of the domain
            apart are equally close to within 1e-9 m.
        """
        px, py = float(p[0]), float(p[1])
        if self.analytic_projection:
            return self._project_analytic(px, py, prev)
        if prev is not None:
            g = self._project_local(px, py, float(prev))
            if g is not None:
                return g
        return self._project_global(px, py, prev, n_grid)

    def _separation(self, g1, g2):
        d = abs(g1 - g2)
        if self.periodic:
            d = math.fmod(d, self.period)
            d = min(d, self.period - d)
        return d

    def _pick(self, cands, prev):
        cands = sorted(cands, key=lambda c: c[1])
        best = cands[0]
        tol = 0.05 * self.period
        ties = [c for c in cands if c[1] - best[1] < 1e-9 and self._separation(c[0], best[0]) > tol]
        if ties:
            if prev is None:
                raise AmbiguousProjection(
                    "several path points are equally close to the query",
                    candidates=[best[0]] + [c[0] for c in ties])
            pool = [best] + ties
            best = min(pool, key=lambda c: self._separation(c[0], prev))
        g = best[0]
        if self.periodic and prev is not None:
            g += self.period * round((prev - g) / self.period)
        return g

    def _project_analytic(self, px, py, prev):
        cands = []
        for off, seg in zip(self.offsets, self.segments):
            try:
                local = seg.candidates(px, py)
            except AmbiguousProjection as exc:
                if prev is None:
                    raise
                local = [(s, seg.R) for s in exc.candidates]
                local.append((min(max(prev - off, 0.0), seg.span), seg.R))
            cands.extend((off + s, d) for s, d in local)
        return self._pick(cands, prev)

    def _dist2(self, px, py, g):
        x, y, *_ = self.geom(g, clamp=True)
        return (px - x) ** 2 + (py - y) ** 2

    def _project_local(self, px, py, prev):
        a, b = self.domain
        window = 0.05 * (b - a)
        g = prev
        for _ in range(30):
            x, y, dx, dy, ddx, ddy = self.geom(g, clamp=True)
            ex, ey = px - x, py - y
            f1 = -(ex * dx + ey * dy)
            f2 = dx * dx + dy * dy - (ex * ddx + ey * ddy)
            if f2 <= 0.0:
                return None
            step = -f1 / f2
            g_new = g + step
            if not self.periodic:
                g_new = min(max(g_new, a), b)
            if abs(g_new - prev) > window:
                return None
            if abs(g_new - g) < 1e-11:
                return g_new
            if not self.periodic and g_new == g:
                return g_new
            g = g_new
        return None

    def _project_global(self, px, py, prev, n_grid):
        a, b = self.domain
        grid = np.linspace(a, b, n_grid, endpoint=not self.periodic)
        x, y, *_ = self.geom_array(grid)
        d2 = (x - px) ** 2 + (y - py) ** 2
        n = len(grid)
        if self.periodic:
            left, right = np.roll(d2, 1), np.roll(d2, -1)
        else:
            left = np.concatenate(([np.inf], d2[:-1]))
            right = np.concatenate((d2[1:], [np.inf]))
        idx = np.nonzero((d2 <= left) & (d2 <= right))[0]
        idx = idx[np.argsort(d2[idx])][:8]
        h = grid[1] - grid[0]
        cands = []
        for i in idx:
            lo, hi = grid[i] - h, grid[i] + h
            if not self.periodic:
                lo, hi = max(lo, a), min(hi, b)
            res = minimize_scalar(lambda g: self._dist2(px, py, g), bounds=(lo, hi),
                                  method="bounded", options={"xatol": 1e-10})
            g = float(res.x)
            cands.append((g, math.sqrt(self._dist2(px, py, g))))
            # endpoint minima are not interior stationary points
            for ge in (lo, hi):
                if (not self.periodic) and ge in (a, b):
                    cands.append((ge, math.sqrt(self._dist2(px, py, ge))))
        g = self._pick(cands, prev)
        if self.periodic and prev is None:
            g = a + math.fmod(g - a, self.period)
        return g


# ---------------------------------------------------------------------------
# constructors


def make_line(origin=(0.0, 0.0), heading: float = 0.0, length: float = 100.0) -> Path:
    """Straight line parameterised by arclength from ``origin``."""
    if not length > 0:
        raise ValueError("line length must be positive")
    return Path("line", (_Line(origin, heading, length),))


def make_circle_arc(center=(0.0, 0.0), radius: float = 10.0, start_angle: float = 0.0,
                    sweep: float = TWO_PI, parameterization: str = "angle") -> Path:
    """Circular arc.

    ``sweep`` is signed (negative = clockwise).  With ``parameterization =
    'angle'`` the parameter equals the polar angle for a counterclockwise arc,
    so a full counterclockwise circle satisfies ``eval(g).pd = c + R (cos g,
    sin g)``.  With ``'arclength'`` the parameter runs over ``[0, R |sweep|]``.
    A full circle (``|sweep| = 2 pi``) is periodic.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if sweep == 0:
        raise ValueError("sweep must be nonzero")
    sign = math.copysign(1.0, sweep)
    if parameterization == "angle":
        omega, span = sign, abs(sweep)
        start = start_angle if sign > 0 else 0.0
        theta0 = start_angle
    elif parameterization == "arclength":
        omega, span, start, theta0 = sign / radius, radius * abs(sweep), 0.0, start_angle
    else:
        raise ValueError(f"unknown parameterization {parameterization!r}")
    seg = _Arc(center, radius, theta0, omega, span)
    return Path("circle_arc", (seg,), start=start, periodic=seg.full)


def make_lemniscate(scale: float = 20.0, center=(0.0, 0.0), heading: float = 0.0) -> Path:
    """Bernoulli lemniscate with half-width ``scale``; ``gamma`` in ``[0, 2 pi)``.

    At ``gamma = 0`` the curve is at ``center + (scale, 0)`` moving in the
    ``+y`` direction (before the rigid rotation by ``heading``).
    """
    if not scale > 0:
        raise ValueError("lemniscate scale must be positive")
    return Path("lemniscate", (_Lemniscate(scale, center, heading),), periodic=True)


def make_sinusoid(amplitude: float, wavelength: float, length: float,
                  origin=(0.0, 0.0), heading: float = 0.0) -> Path:
    """Sine wave along the direction ``heading``; parameter = abscissa."""
    if not (wavelength > 0 and length > 0):
        raise ValueError("wavelength and length must be positive")
    return Path("sinusoid", (_Sinusoid(amplitude, wavelength, length, origin, heading),))


def make_composite(parts: Sequence[Path], start: float = 0.0) -> Path:
    """Concatenate non-periodic paths; junctions must match to 1e-9 m."""
    segs = []
    for part in parts:
        if part.periodic:
            raise ValueError("periodic paths cannot be part of a composite")
        segs.extend(part.segments)
    for k in range(len(segs) - 1):
        ex, ey = segs[k].end()
        sx, sy = segs[k + 1].start()
        gap = math.hypot(ex - sx, ey - sy)
        if gap > _JUNCTION_TOL:
            raise ValueError(f"segments {k} and {k + 1} do not meet (gap {gap:.3e} m)")
    return Path("composite", tuple(segs), start=start)


def make_lawnmower(leg1: float = 30.0, radius: float = 10.0, leg2: float = 20.0,
                   leg3: float = 30.0, heading: float = 0.0, origin=(0.0, 0.0)) -> Path:
    """Survey pattern: leg, clockwise half turn, leg back, anticlockwise half turn, leg.

    All segments are arclength-parameterised, so the total parameter range is
    ``leg1 + leg2 + leg3 + 2 pi radius``.
    """
    for name, v in (("leg1", leg1), ("radius", radius), ("leg2", leg2), ("leg3", leg3)):
        if not v > 0:
            raise ValueError(f"{name} must be positive")
    c, s = math.cos(heading), math.sin(heading)
    # right-hand normal of the first leg
    nx, ny = s, -c
    ox, oy = float(origin[0]), float(origin[1])
    p1 = (ox + leg1 * c, oy + leg1 * s)
    c1 = (p1[0] + radius * nx, p1[1] + radius * ny)
    p2 = (p1[0] + 2 * radius * nx, p1[1] + 2 * radius * ny)
    p3 = (p2[0] - leg2 * c, p2[1] - leg2 * s)
    c2 = (p3[0] + radius * nx, p3[1] + radius * ny)
    p4 = (p3[0] + 2 * radius * nx, p3[1] + 2 * radius * ny)
    th = math.atan2(-ny, -nx)
    segs = (
        _Line((ox, oy), heading, leg1),
        _Arc(c1, radius, th, -1.0 / radius, math.pi * radius),
        _Line(p2, heading + math.pi, leg2),
        _Arc(c2, radius, th, 1.0 / radius, math.pi * radius),
        _Line(p4, heading, leg3),
    )
    return make_composite([Path(seg.kind, (seg,)) for seg in segs])


# ---------------------------------------------------------------------------
# speed assignment


@dataclass(frozen=True)
class SpeedProfile:
    """Desired vehicle speed ``Ud`` along the path.

    Parameters
    ----------
    Ud : float or callable
        Constant speed (m/s) or a function ``Ud(gamma, t)``.
    dUd : callable, optional
        Partial derivatives ``(dUd/dgamma, dUd/dt)`` as a function of
        ``(gamma, t)``.  Central differences are used when omitted.
    """

    Ud: float | Callable[[float, float], float] = 0.5
    dUd: Callable[[float, float], tuple] | None = None

    def __post_init__(self):
        if not callable(self.Ud) and not self.Ud > 0:
            raise ValueError("Ud must be positive")

    @property
    def constant(self) -> bool:
        return not callable(self.Ud)

    def speed(self, gamma: float = 0.0, t: float = 0.0) -> float:
        if callable(self.Ud):
            return float(self.Ud(gamma, t))
        return float(self.Ud)

    def partials(self, gamma: float, t: float) -> tuple[float, float]:
        if not callable(self.Ud):
            return 0.0, 0.0
        if self.dUd is not None:
            return tuple(map(float, self.dUd(gamma, t)))
        h = 1e-6
        dg = (self.Ud(gamma + h, t) - self.Ud(gamma - h, t)) / (2 * h)
        dt = (self.Ud(gamma, t + h) - self.Ud(gamma, t - h)) / (2 * h)
        return dg, dt


def vd_of(profile: SpeedProfile, point: PathPoint, t: float = 0.0) -> float:
    """Desired path-parameter rate ``Ud / |p_d'|``."""
    if not point.arc_speed >= _DEGENERATE:
        raise DegenerateTangent("arc speed vanishes")
    return profile.speed(point.gamma, t) / point.arc_speed


def vd_dot(profile: SpeedProfile, point: PathPoint, gamma_dot: float, t: float = 0.0) -> float:
    """Time derivative of ``vd`` along a trajectory with parameter rate ``gamma_dot``."""
    sp = point.arc_speed
    Ud = profile.speed(point.gamma, t)
    dg, dt = profile.partials(point.gamma, t)
    Ud_dot = dg * gamma_dot + dt
    return Ud_dot / sp - Ud * point.d_arc_speed * gamma_dot / (sp * sp)


def vd_star(profile: SpeedProfile, path: Path, t: float = 0.0, n: int = 2048) -> float:
    """Largest desired parameter rate over a grid of the domain."""
    a, b = path.domain
    grid = np.linspace(a, b, n)
    _, sp = path.kappa_array(grid)
    if profile.constant:
        return float(profile.speed() / sp.min())
    ud = np.array([profile.speed(g, t) for g in grid])
    return float(np.max(ud / sp))


def eval(path: Path, gamma: float, clamp: bool = False) -> PathPoint:  # noqa: A001
    """Functional form of :meth:`Path.eval`."""
    return path.eval(gamma, clamp=clamp)


def project(path: Path, p, prev: float | None = None) -> float:
    """Functional form of :meth:`Path.project`."""
    return path.project(p, prev)
