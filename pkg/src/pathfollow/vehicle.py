"""Planar kinematic vehicle models and thrust allocation.

Three plants are provided, all integrated with classical RK4 under a zero-order
hold on the inputs:

* under-actuated: ``x' = u cos psi``, ``y' = u sin psi``, ``psi' = r``
* under-actuated with a constant ambient current ``(vcx, vcy)`` added to the
  inertial velocity
* fully actuated: an extra sway speed ``v`` enters through the body frame.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .exceptions import NonFinite, RankDeficient

MAX_DT = 0.5


@dataclass(frozen=True)
class VehicleState:
    """Truth state of the plant.

    Attributes
    ----------
    x, y : float
        Inertial position (m).
    psi : float
        Heading (rad), continuous (never wrapped).
    v_sway : float
        Last applied sway speed (m/s); zero for under-actuated plants.
    vc : tuple of float
        Constant ambient current (m/s).
    """

    x: float = 0.0
    y: float = 0.0
    psi: float = 0.0
    v_sway: float = 0.0
    vc: tuple = (0.0, 0.0)

    @property
    def p(self) -> tuple[float, float]:
        return (self.x, self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.psi])


@dataclass(frozen=True)
class ActuationInput:
    """Inputs held over one integration step."""

    u: float = 0.0
    r: float = 0.0
    v: float = 0.0


def kinematics(psi, u, v, r, vcx=0.0, vcy=0.0):
    """Right-hand side ``(x', y', psi')`` of the general planar model."""
    c, s = math.cos(psi), math.sin(psi)
    return (u * c - v * s + vcx, u * s + v * c + vcy, r)


def _rk4(x, y, psi, u, v, r, vcx, vcy, dt):
    k1 = kinematics(psi, u, v, r, vcx, vcy)
    k2 = kinematics(psi + 0.5 * dt * k1[2], u, v, r, vcx, vcy)
    k3 = kinematics(psi + 0.5 * dt * k2[2], u, v, r, vcx, vcy)
    k4 = kinematics(psi + dt * k3[2], u, v, r, vcx, vcy)
    w = dt / 6.0
    return (x + w * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
            y + w * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
            psi + w * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]))


def _check(dt, *vals):
    if not 0.0 < dt <= MAX_DT:
        raise ValueError(f"dt must lie in (0, {MAX_DT}], got {dt!r}")
    for v in vals:
        if not math.isfinite(v):
            raise NonFinite("non-finite value in vehicle step")


def _step(s: VehicleState, u, v, r, vc, dt) -> VehicleState:
    _check(dt, s.x, s.y, s.psi, u, v, r, vc[0], vc[1])
    x, y, psi = _rk4(s.x, s.y, s.psi, u, v, r, vc[0], vc[1], dt)
    if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(psi)):
        raise NonFinite("vehicle state became non-finite")
    return replace(s, x=x, y=y, psi=psi, v_sway=v)


def step_underactuated(s: VehicleState, inp: ActuationInput, dt: float) -> VehicleState:
    """Advance the current-free under-actuated model by ``dt``."""
    return _step(s, inp.u, 0.0, inp.r, (0.0, 0.0), dt)


def step_with_current(s: VehicleState, inp: ActuationInput, dt: float) -> VehicleState:
    """Advance the under-actuated model drifting with ``s.vc``."""
    return _step(s, inp.u, 0.0, inp.r, s.vc, dt)


def step_fully_actuated(s: VehicleState, inp: ActuationInput, dt: float) -> VehicleState:
    """Advance the fully actuated model (surge, sway and yaw rate) with current."""
    return _step(s, inp.u, inp.v, inp.r, s.vc, dt)


def allocate_thrust(tau, K) -> np.ndarray:
    """Distribute a generalised force over ``n`` thrusters.

    Parameters
    ----------
    tau : array_like, shape (3,)
        Desired ``(Fx, Fy, N)``.
    K : array_like, shape (3, n)
        Thrust configuration matrix, ``n >= 3``.

    Returns
    -------
    numpy.ndarray
        Minimum-norm ``f`` with ``K f = tau``.

    Raises
    ------
    RankDeficient
        If the smallest singular value of ``K`` is below ``1e-9`` times the
        largest.
    """
    K = np.asarray(K, dtype=float)
    tau = np.asarray(tau, dtype=float).reshape(3)
    if K.ndim != 2 or K.shape[0] != 3 or K.shape[1] < 3:
        raise ValueError(f"K must be 3 x n with n >= 3, got shape {K.shape}")
    sv = np.linalg.svd(K, compute_uv=False)
    if sv[0] == 0.0 or sv[-1] < 1e-9 * sv[0]:
        raise RankDeficient(f"allocation matrix is rank deficient (sigma_min = {sv[-1]:.3e})")
    if K.shape[1] == 3:
        return np.linalg.solve(K, tau)
    return np.linalg.pinv(K) @ tau
