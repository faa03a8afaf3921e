"""Path-following errors in the path (P-T) frame and in the body frame.

The path-frame error of a vehicle at ``p`` with respect to the path point
``p_d(gamma)`` is

    e_P = (s1, y1) = R^P_I(psi_P) (p - p_d),    psi_e = psi - psi_P

where ``s1`` is the along-track and ``y1`` the cross-track error (positive to
the left of the tangent).  The body-frame error used by the offset-point
method is ``e_B = R^B_I(psi) (p - p_d) - epsilon``.

The ``*_rhs`` functions return the analytic time derivatives of these errors
and serve as oracles against finite differences of simulated trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import ProjectionSingularity
from .frames import TWO_PI, rotate
from .paths import PathPoint

SINGULAR_TOL = 1e-6


@dataclass(frozen=True)
class PTError:
    """Path-frame error ``(s1, y1, psi_e)`` and the parameter that produced it."""

    s1: float
    y1: float
    psi_e: float
    gamma: float

    def norm(self) -> float:
        return math.hypot(self.s1, self.y1)


@dataclass(frozen=True)
class BodyError:
    """Body-frame position error with optional parameter-speed error."""

    eB: tuple
    e_gamma: float
    epsilon: tuple

    def norm(self) -> float:
        return math.hypot(*self.eB)


def pt_error(p, psi: float, point: PathPoint, psi_P: float | None = None) -> PTError:
    """Path-frame error of a vehicle at ``p`` with heading ``psi``.

    Parameters
    ----------
    p : sequence of float
        Vehicle position.
    psi : float
        Vehicle heading (continuous).
    point : PathPoint
        Reference point on the path.
    psi_P : float, optional
        Unwrapped tangent angle.  When omitted the branch of ``point.psi_P``
        closest to ``psi`` is used, so ``psi_e`` lies in ``[-pi, pi]``.
    """
    if psi_P is None:
        psi_P = point.psi_P + TWO_PI * round((psi - point.psi_P) / TWO_PI)
    s1, y1 = rotate(psi_P, p[0] - point.pd[0], p[1] - point.pd[1])
    return PTError(s1, y1, psi - psi_P, point.gamma)


def pt_error_rhs(e: PTError, u: float, uP: float, kappa: float, r: float = 0.0,
                 vc=None, psi_P: float = 0.0, v: float = 0.0):
    """Analytic ``(ds1, dy1, dpsi_e)``.

    The reference point moves along the path with speed ``uP`` and the path
    frame rotates at ``kappa * uP``.  ``vc`` is an inertial current that is
    rotated into the path frame at ``psi_P``; ``v`` is an optional sway speed.
    """
    rP = kappa * uP
    ce, se = math.cos(e.psi_e), math.sin(e.psi_e)
    ds1 = rP * e.y1 + u * ce - v * se - uP
    dy1 = -rP * e.s1 + u * se + v * ce
    if vc is not None:
        cx, cy = rotate(psi_P, vc[0], vc[1])
        ds1 += cx
        dy1 += cy
    return ds1, dy1, r - rP


def body_error(p, psi: float, pd, epsilon=(0.0, 0.0), gamma_dot: float | None = None,
               vd: float | None = None) -> BodyError:
    """Body-frame error ``R^B_I(psi) (p - p_d) - epsilon``."""
    bx, by = rotate(psi, p[0] - pd[0], p[1] - pd[1])
    eg = 0.0 if gamma_dot is None or vd is None else gamma_dot - vd
    return BodyError((bx - epsilon[0], by - epsilon[1]), eg, tuple(epsilon))


def body_error_rhs(e: BodyError, u: float, r: float, psi: float, pd_prime, gamma_dot: float,
                   v: float = 0.0, vc=None):
    """Analytic ``d e_B / dt``.

    Equals ``-S(r) (e_B + epsilon) + (u, v) - R^B_I p_d' gamma_dot`` plus the
    rotated current.  For ``v = 0`` this is ``-S(r) e_B + Delta (u, r)`` with
    ``Delta = [[1, eps2], [0, -eps1]]``.
    """
    ex, ey = e.eB[0] + e.epsilon[0], e.eB[1] + e.epsilon[1]
    tx, ty = rotate(psi, pd_prime[0], pd_prime[1])
    dx = r * ey + u - tx * gamma_dot
    dy = -r * ex + v - ty * gamma_dot
    if vc is not None:
        cx, cy = rotate(psi, vc[0], vc[1])
        dx += cx
        dy += cy
    return dx, dy


def uP_of(point: PathPoint, gamma_dot: float) -> float:
    """Speed of the reference point, ``|p_d'| gamma_dot``."""
    return point.arc_speed * gamma_dot


def uP_projection(u: float, psi_e: float, kappa: float, y1: float) -> float:
    """Reference-point speed that keeps it at the orthogonal projection.

    Setting ``ds1 = 0`` with ``s1 = 0`` gives ``u cos(psi_e) / (1 - kappa y1)``.

    Raises
    ------
    ProjectionSingularity
        When ``|1 - kappa y1| < 1e-6`` (vehicle at the centre of curvature).
    """
    den = 1.0 - kappa * y1
    if abs(den) < SINGULAR_TOL:
        raise ProjectionSingularity(f"1 - kappa*y1 = {den:.3e}: projection speed is singular")
    return u * math.cos(psi_e) / den
