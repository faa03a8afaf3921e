"""Planar rotation algebra and angle bookkeeping.

The path frame convention used throughout the package is

    R^P_I(psi) = [[ cos psi,  sin psi],
                  [-sin psi,  cos psi]]

which maps an inertial vector into a frame rotated by ``psi``.  The body
frame rotation ``R^B_I`` has the same form evaluated at the vehicle heading.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Rot2:
    """Rotation from the inertial frame into a frame at angle ``psi``.

    Parameters
    ----------
    psi : float
        Frame angle in radians.
    """

    psi: float

    @property
    def matrix(self) -> np.ndarray:
        c, s = math.cos(self.psi), math.sin(self.psi)
        return np.array([[c, s], [-s, c]])

    def apply(self, v):
        """Return ``R v`` for a 2-vector ``v``."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        return (c * v[0] + s * v[1], -s * v[0] + c * v[1])

    def apply_inverse(self, v):
        """Return ``R^T v``, i.e. map back to the inertial frame."""
        c, s = math.cos(self.psi), math.sin(self.psi)
        return (c * v[0] - s * v[1], s * v[0] + c * v[1])

    @property
    def T(self) -> "Rot2":
        return Rot2(-self.psi)


def rot_world_to_path(psi_P: float) -> Rot2:
    """Rotation taking inertial vectors into the path frame at ``psi_P``."""
    return Rot2(float(psi_P))


def rotate(psi: float, vx: float, vy: float) -> tuple[float, float]:
    """Scalar fast path for ``Rot2(psi).apply((vx, vy))``."""
    c, s = math.cos(psi), math.sin(psi)
    return c * vx + s * vy, -s * vx + c * vy


def skew_action(r: float, v) -> tuple[float, float]:
    """Apply ``S(omega)`` with ``omega = [r, 0]`` to a planar vector.

    Returns ``r * (-v2, v1)``.  Skew-symmetry gives ``v . S v = 0``.
    """
    return (-r * v[1], r * v[0])


def wrap_angle(a: float) -> float:
    """Reduce an angle to ``(-pi, pi]``."""
    w = math.fmod(a + math.pi, TWO_PI)
    if w <= 0.0:
        w += TWO_PI
    return w - math.pi


class AngleUnwrapper:
    """Track a continuous angle from a stream of wrapped samples.

    Each new sample is shifted by the multiple of ``2 pi`` that places it
    closest to the previous output.

    Parameters
    ----------
    reference : float, optional
        If given, the first sample is unwrapped relative to this value
        instead of passing through unchanged.
    """

    def __init__(self, reference: float | None = None):
        self.last_raw: float | None = None
        self.accumulated: float | None = reference

    def __call__(self, raw: float) -> float:
        return self.update(raw)

    def update(self, raw: float) -> float:
        raw = float(raw)
        if self.accumulated is None:
            out = raw
        else:
            out = self.accumulated + wrap_angle(raw - self.accumulated)
        self.last_raw = raw
        self.accumulated = out
        return out


def unwrap(u: AngleUnwrapper, raw: float) -> float:
    """Functional alias for ``u.update(raw)``."""
    return u.update(raw)
