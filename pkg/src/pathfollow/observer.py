"""Luenberger estimator for a constant ambient current.

Each horizontal axis is modelled as a double chain ``p' = u_I + v_c``,
``v_c' = 0`` with the position measured, i.e. in stacked form

    A = [[0, I], [0, 0]],  B = [[I], [0]],  C = [I, 0]

and the estimator ``xhat' = A xhat + B u_I + L (y - C xhat)``, where
``u_I = (u cos psi, u sin psi)`` is the commanded velocity relative to the
water.  The estimation error obeys ``e' = (A - L C) e`` regardless of the
input, so a gain that places the eigenvalues of ``A - L C`` in the open left
half-plane gives exponential convergence of the current estimate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .exceptions import NonFinite, UnstablePoles

A_C = np.block([[np.zeros((2, 2)), np.eye(2)], [np.zeros((2, 2)), np.zeros((2, 2))]])
B_C = np.vstack([np.eye(2), np.zeros((2, 2))])
C_C = np.hstack([np.eye(2), np.zeros((2, 2))])


@dataclass(frozen=True)
class ObserverState:
    """Estimate ``(px, py, vcx, vcy)``."""

    xhat: tuple = (0.0, 0.0, 0.0, 0.0)

    @property
    def p_hat(self) -> tuple[float, float]:
        return self.xhat[0], self.xhat[1]

    @property
    def vc_hat(self) -> tuple[float, float]:
        return self.xhat[2], self.xhat[3]


@dataclass(frozen=True)
class ObserverGain:
    """Per-axis gains ``(l1, l2)`` and the poles they place."""

    l1: float
    l2: float
    poles: tuple

    @property
    def L(self) -> np.ndarray:
        return np.array([[self.l1, 0.0], [0.0, self.l1], [self.l2, 0.0], [0.0, self.l2]])

    def error_matrix(self) -> np.ndarray:
        return A_C - self.L @ C_C

    @property
    def slowest(self) -> float:
        """Largest real part among the placed poles."""
        return max(complex(p).real for p in self.poles)


def place_gain(poles=(-0.5, -0.5)) -> ObserverGain:
    """Gain placing the per-axis error poles at ``poles``.

    The per-axis error matrix ``[[-l1, 1], [-l2, 0]]`` has characteristic
    polynomial ``s^2 + l1 s + l2``, so ``l1 = -(p1 + p2)`` and ``l2 = p1 p2``.

    Raises
    ------
    UnstablePoles
        If a pole has non-negative real part, or a complex pole lacks its
        conjugate.
    """
    p1, p2 = (complex(p) for p in poles)
    if p1.real >= 0.0 or p2.real >= 0.0:
        raise UnstablePoles(f"poles must have negative real part, got {poles!r}")
    l1, l2 = -(p1 + p2), p1 * p2
    if abs(l1.imag) > 1e-12 or abs(l2.imag) > 1e-12:
        raise UnstablePoles("complex poles must come as a conjugate pair")
    return ObserverGain(l1.real, l2.real, tuple(poles))


def observability_matrix() -> np.ndarray:
    """Stacked ``[C; C A; C A^2; C A^3]``."""
    blocks, M = [], np.eye(4)
    for _ in range(4):
        blocks.append(C_C @ M)
        M = M @ A_C
    return np.vstack(blocks)


def observer_rhs(xhat, gain: ObserverGain, u: float, psi: float, y, v: float = 0.0):
    """Estimator time derivative as a 4-tuple.

    ``v`` is an optional sway speed for fully actuated vehicles.
    """
    px, py, vx, vy = xhat
    ex, ey = y[0] - px, y[1] - py
    c, s = math.cos(psi), math.sin(psi)
    return (u * c - v * s + vx + gain.l1 * ex,
            u * s + v * c + vy + gain.l1 * ey,
            gain.l2 * ex,
            gain.l2 * ey)


def observer_step(obs: ObserverState, gain: ObserverGain, u_body, y_meas, dt: float) -> ObserverState:
    """Advance the estimate by ``dt`` with RK4.

    The innovation ``y_meas - C xhat`` is formed once from the sample at the
    start of the step and held over the step, while the model part
    ``A xhat + B u`` is integrated with RK4.  A correct estimate therefore
    stays exact under any input, and the estimate carries no steady bias.

    Parameters
    ----------
    u_body : tuple
        ``(u, psi)`` held over the step, or ``(u, psi, r)`` to let the heading
        advance linearly inside the step.
    y_meas : sequence of float
        Position measured at the start of the step.
    """
    if not 0.0 < dt <= 0.5:
        raise ValueError(f"dt must lie in (0, 0.5], got {dt!r}")
    u, psi = float(u_body[0]), float(u_body[1])
    r = float(u_body[2]) if len(u_body) > 2 else 0.0
    x = tuple(float(v) for v in obs.xhat)
    ex, ey = float(y_meas[0]) - x[0], float(y_meas[1]) - x[1]
    inj = (gain.l1 * ex, gain.l1 * ey, gain.l2 * ex, gain.l2 * ey)

    def f(xh, heading):
        c, s = math.cos(heading), math.sin(heading)
        return (u * c + xh[2] + inj[0], u * s + xh[3] + inj[1], inj[2], inj[3])

    def add(a, k, h):
        return tuple(ai + h * ki for ai, ki in zip(a, k))

    k1 = f(x, psi)
    k2 = f(add(x, k1, dt / 2), psi + r * dt / 2)
    k3 = f(add(x, k2, dt / 2), psi + r * dt / 2)
    k4 = f(add(x, k3, dt), psi + r * dt)
    out = tuple(xi + dt / 6 * (a + 2 * b + 2 * c + d) for xi, a, b, c, d in zip(x, k1, k2, k3, k4))
    if not all(math.isfinite(v) for v in out):
        raise NonFinite("observer state became non-finite")
    return ObserverState(out)


def error_bound(gain: ObserverGain, t: float) -> float:
    """Induced 2-norm of ``exp((A - L C) t)``."""
    return float(np.linalg.norm(expm(gain.error_matrix() * t), 2))


def settle_time(gain: ObserverGain, e0: float, tol: float = 1e-3, dt: float = 0.05,
                t_max: float = 600.0) -> float:
    """Time after which ``|exp((A-LC)t)| * e0`` stays below ``tol``.

    ``e0`` is the norm of the initial estimation error.
    """
    step = expm(gain.error_matrix() * dt)
    M = np.eye(4)
    last_bad, t = 0.0, 0.0
    while t < t_max:
        if np.linalg.norm(M, 2) * e0 > tol:
            last_bad = t
        elif t - last_bad > 20.0 / max(-gain.slowest, 1e-9):
            break
        M = step @ M
        t += dt
    return last_bad + dt


def current_in_pt_frame(vc_hat, psi_P: float) -> float:
    """Component of the current along the path normal, ``-sin(psi_P) vcx + cos(psi_P) vcy``."""
    return -math.sin(psi_P) * vc_hat[0] + math.cos(psi_P) * vc_hat[1]
