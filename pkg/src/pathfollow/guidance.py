"""Closed-form path-following guidance laws.

Every law returns a :class:`GuidanceCommand` holding one actuation variant
(:class:`UR`, :class:`UPsi` or :class:`Full`), an optional path-parameter
command (:class:`GammaDot` or :class:`GammaDdot`) and an ``info`` dictionary
with the errors the law used and the value of its Lyapunov function.

Laws that project the vehicle onto the path (methods 1 and 3 and their
relatives) accept ``prev_gamma`` to keep the projection continuous.  Laws
that carry a virtual reference point receive its parameter (and rate)
explicitly; integrating them is the caller's job.

``psi_P_ref`` is the previous unwrapped tangent angle.  Supplying it makes the
heading error continuous over several turns; without it the branch nearest to
the vehicle heading is used.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SingularDelta
from .frames import TWO_PI, rotate, wrap_angle
from .observer import current_in_pt_frame
from .paths import Path, PathPoint, SpeedProfile, vd_dot, vd_of
from .pf_errors import body_error, pt_error, uP_projection
from .vehicle import VehicleState


@dataclass(frozen=True)
class GuidanceGains:
    """Tuning parameters shared by the closed-form laws.

    ``sat_k1`` and ``sat_ki`` are the proportional and integral gains of the
    saturated law; the remaining names follow the usual notation.
    """

    k1: float = 1.0
    k2: float = 1.0
    k3: float = 0.5
    theta: float = math.pi / 4
    k_delta: float = 1.0
    Delta_h: float = 3.0
    sigma: float = 1.0
    Kp: tuple = ((0.5, 0.0), (0.0, 0.5))
    k_gamma: float = 1.0
    epsilon: tuple = (-1.0, 0.0)
    sat_k1: float = 0.2
    sat_ki: float = 0.0

    def __post_init__(self):
        for name in ("k1", "k2", "k3", "k_delta", "Delta_h", "sigma", "k_gamma", "sat_k1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"gain {name} must be positive")
        if not 0 < self.theta < math.pi / 2:
            raise ValueError("theta must lie in (0, pi/2)")
        if not self.sat_ki >= 0:
            raise ValueError("sat_ki must be non-negative")
        Kp = np.asarray(self.Kp, dtype=float)
        if Kp.shape != (2, 2) or not np.allclose(Kp, Kp.T):
            raise ValueError("Kp must be a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(Kp).min() <= 0:
            raise ValueError("Kp must be positive definite")
        object.__setattr__(self, "Kp", tuple(tuple(map(float, row)) for row in Kp))
        object.__setattr__(self, "epsilon", tuple(map(float, self.epsilon)))

    @property
    def kp_min(self) -> float:
        return float(np.linalg.eigvalsh(np.asarray(self.Kp)).min())


# -- command types ------------------------------------------------------------


@dataclass(frozen=True)
class UR:
    """Surge speed and yaw rate."""

    u: float
    r: float


@dataclass(frozen=True)
class UPsi:
    """Surge speed and heading reference."""

    u: float
    psi_ref: float


@dataclass(frozen=True)
class Full:
    """Surge, sway and heading reference (fully actuated vehicles)."""

    u: float
    v: float
    psi_ref: float


@dataclass(frozen=True)
class GammaDot:
    value: float


@dataclass(frozen=True)
class GammaDdot:
    value: float


@dataclass(frozen=True)
class GuidanceCommand:
    actuation: UR | UPsi | Full
    path_cmd: GammaDot | GammaDdot | None = None
    info: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class IlosState:
    """Integrator of the integral line-of-sight law."""

    y_int: float = 0.0


# -- helpers ------------------------------------------------------------------


def _unwrapped_tangent(point: PathPoint, psi: float, psi_P_ref: float | None) -> float:
    if psi_P_ref is None:
        return point.psi_P + TWO_PI * round((psi - point.psi_P) / TWO_PI)
    return psi_P_ref + wrap_angle(point.psi_P - psi_P_ref)


def _sinc(x: float) -> float:
    if abs(x) < 1e-6:
        return 1.0 - x * x / 6.0
    return math.sin(x) / x


def sin_difference_ratio(psi_e: float, delta: float) -> float:
    """``(sin psi_e - sin delta) / (psi_e - delta)`` without cancellation.

    Uses ``sin a - sin b = 2 cos((a+b)/2) sin((a-b)/2)``; the limit as the
    angles meet is ``cos(delta)``.
    """
    return math.cos(0.5 * (psi_e + delta)) * _sinc(0.5 * (psi_e - delta))


def delta_shape(y1: float, u: float, gains: GuidanceGains, y1_dot: float = 0.0,
                u_dot: float = 0.0) -> tuple[float, float]:
    """Approach angle ``delta = -theta tanh(k_delta y1 u)`` and its time derivative."""
    z = gains.k_delta * y1 * u
    th = math.tanh(z)
    d = -gains.theta * th
    dd = -gains.theta * gains.k_delta * (1.0 - th * th) * (y1_dot * u + y1 * u_dot)
    return d, dd


def _u_dot(profile: SpeedProfile, gamma, t, gamma_dot) -> float:
    dg, dt = profile.partials(gamma, t)
    return dg * gamma_dot + dt


def _heading_rate_law(e, point, u, uP, gains, profile, t, s1_for_ydot):
    """Shared yaw-rate law of methods 1 and 2."""
    kappa = point.kappa
    y1_dot = -kappa * uP * s1_for_ydot + u * math.sin(e.psi_e)
    u_dot = _u_dot(profile, point.gamma, t, uP / point.arc_speed)
    delta, ddelta = delta_shape(e.y1, u, gains, y1_dot, u_dot)
    psi_t = e.psi_e - delta
    r = (kappa * uP + ddelta - gains.k1 * psi_t
         - gains.k2 * e.y1 * u * sin_difference_ratio(e.psi_e, delta))
    return r, delta, psi_t


def _info(e, psi_P, V, **extra):
    d = {"gamma": e.gamma, "s1": e.s1, "y1": e.y1, "psi_e": e.psi_e, "psi_P": psi_P, "V": V}
    d.update(extra)
    return d


def _project(state, path, prev_gamma):
    return path.project((state.x, state.y), prev_gamma)


def _eval(path: Path, gamma: float) -> PathPoint:
    return path.eval(gamma, extrapolate=True)


# -- Lyapunov functions ---------------------------------------------------------


def lyapunov_method1(y1, psi_tilde, gains):
    return 0.5 * y1 * y1 + psi_tilde * psi_tilde / (2.0 * gains.k2)


def lyapunov_method2(s1, y1, psi_tilde, gains):
    return 0.5 * (s1 * s1 + y1 * y1) + psi_tilde * psi_tilde / (2.0 * gains.k2)


def lyapunov_body(eB, e_gamma):
    return 0.5 * (eB[0] ** 2 + eB[1] ** 2 + e_gamma**2)


# -- projection-based laws ------------------------------------------------------


def method1(state: VehicleState, path: Path, gains: GuidanceGains, profile: SpeedProfile,
            t: float = 0.0, prev_gamma: float | None = None,
            psi_P_ref: float | None = None) -> GuidanceCommand:
    """Yaw-rate law on the orthogonal projection.

    ``u = Ud`` and ``r = kappa uP + delta' - k1 psi~ - k2 y1 u (sin psi_e - sin delta) / psi~``
    with ``psi~ = psi_e - delta`` and ``uP = u cos(psi_e) / (1 - kappa y1)``.

    Raises
    ------
    ProjectionSingularity
        Vehicle at the centre of curvature.
    AmbiguousProjection
        Closest point not unique (only without ``prev_gamma``).
    """
    gamma = _project(state, path, prev_gamma)
    point = path.eval(gamma, clamp=True)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    uP = uP_projection(u, e.psi_e, point.kappa, e.y1)
    r, delta, psi_t = _heading_rate_law(e, point, u, uP, gains, profile, t, e.s1)
    return GuidanceCommand(UR(u, r), None,
                           _info(e, psi_P, lyapunov_method1(e.y1, psi_t, gains),
                                 delta=delta, uP=uP, kappa=point.kappa))


def method3_los(state: VehicleState, path: Path, gains: GuidanceGains, profile: SpeedProfile,
                t: float = 0.0, prev_gamma: float | None = None,
                psi_P_ref: float | None = None) -> GuidanceCommand:
    """Line-of-sight heading ``psi_P + atan(-y1 / Delta_h)`` on the projection."""
    gamma = _project(state, path, prev_gamma)
    point = path.eval(gamma, clamp=True)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    psi_ref = psi_P + math.atan(-e.y1 / gains.Delta_h)
    return GuidanceCommand(UPsi(u, psi_ref), None,
                           _info(e, psi_P, 0.5 * e.y1 * e.y1, kappa=point.kappa))


def method3_sat(state: VehicleState, path: Path, gains: GuidanceGains, profile: SpeedProfile,
                vhat=None, t: float = 0.0, prev_gamma: float | None = None,
                psi_P_ref: float | None = None, y_int: float = 0.0) -> GuidanceCommand:
    """Saturated heading law ``psi_P + asin(sat(-k1 y1/u - ki y_int/u - vhat_y^P/u))``.

    ``vhat`` is an estimate of the inertial current; its component along the
    path normal is cancelled.  ``y_int`` is the running integral of ``y1``
    (only used when ``gains.sat_ki > 0``).
    """
    gamma = _project(state, path, prev_gamma)
    point = path.eval(gamma, clamp=True)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    if not u > 0:
        raise ValueError("the saturated law needs a positive surge speed")
    vcy = 0.0 if vhat is None else current_in_pt_frame(vhat, psi_P)
    arg = (-gains.sat_k1 * e.y1 - gains.sat_ki * y_int - vcy) / u
    arg = min(1.0, max(-1.0, arg))
    psi_ref = psi_P + math.asin(arg)
    return GuidanceCommand(UPsi(u, psi_ref), None,
                           _info(e, psi_P, 0.5 * e.y1 * e.y1, kappa=point.kappa, vcy_hat=vcy))


def ilos(state: VehicleState, path: Path, il: IlosState, gains: GuidanceGains,
         profile: SpeedProfile, dt: float, t: float = 0.0, prev_gamma: float | None = None,
         psi_P_ref: float | None = None) -> tuple[GuidanceCommand, IlosState]:
    """Integral line-of-sight law.

    ``psi_e = atan(-(y1 + sigma y_int) / Delta_h)`` with
    ``y_int' = Delta_h y1 / ((y1 + sigma y_int)^2 + Delta_h^2)``, advanced by one
    explicit Euler step of length ``dt``.  The convergence guarantee holds on
    straight lines; curved paths are accepted.
    """
    gamma = _project(state, path, prev_gamma)
    point = path.eval(gamma, clamp=True)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    Dh = gains.Delta_h
    z = e.y1 + gains.sigma * il.y_int
    psi_ref = psi_P + math.atan(-z / Dh)
    rate = Dh * e.y1 / (z * z + Dh * Dh)
    cmd = GuidanceCommand(UPsi(u, psi_ref), None,
                          _info(e, psi_P, 0.5 * e.y1 * e.y1, kappa=point.kappa,
                                y_int=il.y_int, y_int_dot=rate))
    return cmd, IlosState(il.y_int + dt * rate)


# -- virtual-target laws ----------------------------------------------------------


def gamma_rate_virtual_target(point: PathPoint, u: float, psi_e: float, s1: float,
                              gains: GuidanceGains) -> tuple[float, float]:
    """``(uP, gamma_dot)`` with ``uP = u cos(psi_e) + k3 s1``."""
    uP = u * math.cos(psi_e) + gains.k3 * s1
    return uP, uP / point.arc_speed


def method2(state: VehicleState, path: Path, gamma: float, gains: GuidanceGains,
            profile: SpeedProfile, t: float = 0.0,
            psi_P_ref: float | None = None) -> GuidanceCommand:
    """Yaw-rate law on a virtual reference point driven by ``gamma_dot``."""
    point = _eval(path, gamma)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    uP, gdot = gamma_rate_virtual_target(point, u, e.psi_e, e.s1, gains)
    r, delta, psi_t = _heading_rate_law(e, point, u, uP, gains, profile, t, e.s1)
    return GuidanceCommand(UR(u, r), GammaDot(gdot),
                           _info(e, psi_P, lyapunov_method2(e.s1, e.y1, psi_t, gains),
                                 delta=delta, uP=uP, kappa=point.kappa))


def method4(state: VehicleState, path: Path, gamma: float, gains: GuidanceGains,
            profile: SpeedProfile, t: float = 0.0,
            psi_P_ref: float | None = None) -> GuidanceCommand:
    """Line-of-sight heading with the virtual-point parameter rate of method 2."""
    point = _eval(path, gamma)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    u = profile.speed(gamma, t)
    uP, gdot = gamma_rate_virtual_target(point, u, e.psi_e, e.s1, gains)
    psi_ref = psi_P + math.atan(-e.y1 / gains.Delta_h)
    return GuidanceCommand(UPsi(u, psi_ref), GammaDot(gdot),
                           _info(e, psi_P, 0.5 * (e.s1 ** 2 + e.y1 ** 2), uP=uP,
                                 kappa=point.kappa))


def delta_matrix(epsilon) -> np.ndarray:
    """Input matrix ``[[1, eps2], [0, -eps1]]`` of the offset-point error."""
    return np.array([[1.0, epsilon[1]], [0.0, -epsilon[0]]])


def delta_pinv(epsilon) -> np.ndarray:
    """Right inverse ``Delta^T (Delta Delta^T)^-1``.

    Raises
    ------
    SingularDelta
        If ``|eps1| < 1e-9``.
    """
    if abs(epsilon[0]) < 1e-9:
        raise SingularDelta("epsilon_1 must be nonzero")
    D = delta_matrix(epsilon)
    return D.T @ np.linalg.inv(D @ D.T)


def _gamma_ddot(eB, tx, ty, e_gamma, vd_rate, gains):
    return -gains.k_gamma * e_gamma + eB[0] * tx + eB[1] * ty + vd_rate


def gamma_ddot_law(p, psi: float, gamma: float, gamma_dot: float, path: Path,
                   gains: GuidanceGains, profile: SpeedProfile, epsilon=(0.0, 0.0),
                   t: float = 0.0) -> float:
    """Parameter acceleration ``-k_gamma e_gamma + e_B . R^B_I p_d' + vd'``.

    Shared by the offset-point and fully actuated laws (``epsilon = 0`` for the
    latter).  Exposed separately so the parameter dynamics can be integrated
    jointly with the plant.
    """
    point = _eval(path, gamma)
    vd = vd_of(profile, point, t)
    be = body_error(p, psi, point.pd, epsilon, gamma_dot, vd)
    tx, ty = rotate(psi, *point.pd_prime)
    return _gamma_ddot(be.eB, tx, ty, be.e_gamma, vd_dot(profile, point, gamma_dot, t), gains)


def method6(state: VehicleState, path: Path, gamma: float, gamma_dot: float,
            gains: GuidanceGains, profile: SpeedProfile, vhat=None, t: float = 0.0,
            psi_P_ref: float | None = None) -> GuidanceCommand:
    """Offset-point law in the body frame.

    ``(u, r) = Delta^+ (R p_d' vd - Kp e_B - R vhat)`` and
    ``gamma'' = -k_gamma e_gamma + e_B . R p_d' + vd'``.
    """
    eps = gains.epsilon
    if abs(eps[0]) < 1e-9:
        raise SingularDelta("epsilon_1 must be nonzero")
    point = _eval(path, gamma)
    vd = vd_of(profile, point, t)
    be = body_error(state.p, state.psi, point.pd, eps, gamma_dot, vd)
    eB = be.eB
    tx, ty = rotate(state.psi, *point.pd_prime)
    (k11, k12), (k21, k22) = gains.Kp
    wx = tx * vd - (k11 * eB[0] + k12 * eB[1])
    wy = ty * vd - (k21 * eB[0] + k22 * eB[1])
    if vhat is not None:
        cx, cy = rotate(state.psi, vhat[0], vhat[1])
        wx -= cx
        wy -= cy
    # closed-form inverse of [[1, eps2], [0, -eps1]]
    r = -wy / eps[0]
    u = wx - eps[1] * r
    gdd = _gamma_ddot(eB, tx, ty, be.e_gamma, vd_dot(profile, point, gamma_dot, t), gains)
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    e = pt_error(state.p, state.psi, point, psi_P)
    return GuidanceCommand(UR(u, r), GammaDdot(gdd),
                           _info(e, psi_P, lyapunov_body(eB, be.e_gamma), eB=eB,
                                 e_gamma=be.e_gamma, vd=vd, kappa=point.kappa))


def fully_actuated(state: VehicleState, path: Path, gamma: float, gamma_dot: float,
                   psi_d, gains: GuidanceGains, profile: SpeedProfile, vhat=None,
                   t: float = 0.0, psi_P_ref: float | None = None) -> GuidanceCommand:
    """Arbitrary-heading law for a vehicle with independent sway.

    Parameters
    ----------
    psi_d : float or callable
        Desired heading, or ``psi_d(point, psi_P, t)`` where ``psi_P`` is the
        unwrapped tangent angle.
    """
    point = _eval(path, gamma)
    vd = vd_of(profile, point, t)
    be = body_error(state.p, state.psi, point.pd, (0.0, 0.0), gamma_dot, vd)
    eB = be.eB
    tx, ty = rotate(state.psi, *point.pd_prime)
    (k11, k12), (k21, k22) = gains.Kp
    u = tx * vd - (k11 * eB[0] + k12 * eB[1])
    v = ty * vd - (k21 * eB[0] + k22 * eB[1])
    if vhat is not None:
        cx, cy = rotate(state.psi, vhat[0], vhat[1])
        u -= cx
        v -= cy
    psi_P = _unwrapped_tangent(point, state.psi, psi_P_ref)
    psi_ref = float(psi_d(point, psi_P, t)) if callable(psi_d) else float(psi_d)
    gdd = _gamma_ddot(eB, tx, ty, be.e_gamma, vd_dot(profile, point, gamma_dot, t), gains)
    e = pt_error(state.p, state.psi, point, psi_P)
    return GuidanceCommand(Full(u, v, psi_ref), GammaDdot(gdd),
                           _info(e, psi_P, lyapunov_body(eB, be.e_gamma), eB=eB,
                                 e_gamma=be.e_gamma, vd=vd, kappa=point.kappa))
