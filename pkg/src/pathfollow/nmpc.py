"""Sampled-data nonlinear MPC for path following.

Two finite-horizon problems are supported.

``focp=1``
    State ``x = (s1, y1, psi_e, gamma)``, input ``(r, v_gamma)``; the surge
    speed is fixed to ``Ud``.  Stage cost ``|(s1, y1, psi_e)|_Q^2 + |u_a|_R^2``
    with ``u_a = (Ud cos psi_e - |p_d'| v_gamma, r - kappa |p_d'| v_gamma)``.
``focp=2``
    State ``x = (eB1, eB2, psi, gamma)``, input ``(u, r, v_gamma)``.  Stage
    cost ``|e_B|_Q^2 + |u_b|_R^2 + O (v_gamma - vd)^2`` with
    ``u_b = Delta (u, r) - R^B_I p_d' v_gamma``.

Inputs are piecewise constant over ``N = Tp / Ts`` intervals.  The cost is
integrated with the trapezoidal rule on the interval nodes; no terminal cost
or terminal set is used.  The solver is a projected-gradient method on the
single-shooting cost with central finite-difference gradients; all the
perturbed rollouts of one gradient are integrated as a single numpy batch.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .exceptions import NonFinite
from .paths import Path, SpeedProfile, vd_of, vd_star

BIG = 1e6


@dataclass(frozen=True)
class NmpcConfig:
    """Horizon, weights, bounds and solver settings.

    Weights are given as diagonals.  ``Q`` has three entries for ``focp=1``
    (``s1, y1, psi_e``) and two for ``focp=2`` (``e_B``); ``R`` has two entries
    (``u_a`` or ``u_b``); ``O`` weights the parameter-speed error (``focp=2``).
    """

    focp: int = 1
    Tp: float = 5.0
    Ts: float = 0.1
    Q: tuple = (1.0, 1.0, 1.0)
    R: tuple = (0.1, 0.1)
    O: float = 1.0
    r_max: float = 0.6
    v_min: float = 0.0
    v_max: float | None = None
    u_min: float = 0.0
    u_max: float = 1.5
    epsilon: tuple = (-1.0, 0.0)
    substeps: int = 1
    max_iter: int = 40
    tol: float = 1e-6
    fd_step: float = 1e-6

    def __post_init__(self):
        if self.focp not in (1, 2):
            raise ValueError("focp must be 1 or 2")
        if not self.Tp > self.Ts > 0:
            raise ValueError("need Tp > Ts > 0")
        n = self.Tp / self.Ts
        if abs(n - round(n)) > 1e-9:
            raise ValueError("Tp must be an integer multiple of Ts")
        nq = 3 if self.focp == 1 else 2
        if len(self.Q) != nq or len(self.R) != 2:
            raise ValueError(f"Q needs {nq} entries and R needs 2 for focp={self.focp}")
        if min(self.Q) <= 0 or min(self.R) <= 0 or self.O <= 0:
            raise ValueError("weights must be positive definite")
        if self.v_min > 0:
            raise ValueError("v_min must be <= 0")
        if not self.r_max > 0:
            raise ValueError("r_max must be positive")
        if self.focp == 2 and abs(self.epsilon[0]) < 1e-9:
            raise ValueError("epsilon_1 must be nonzero")
        if self.u_min > self.u_max:
            raise ValueError("u_min exceeds u_max")

    @property
    def N(self) -> int:
        return int(round(self.Tp / self.Ts))

    @property
    def m(self) -> int:
        return 2 if self.focp == 1 else 3


@dataclass
class SolveResult:
    """Optimised input trajectory and solver statistics."""

    U: np.ndarray
    cost: float
    iterations: int
    converged: bool
    initial_cost: float
    warm_cost: float | None = None

    @property
    def first(self) -> np.ndarray:
        return self.U[0]


class NmpcSolver:
    """Shooting-based NMPC for one path and speed profile.

    Parameters
    ----------
    cfg : NmpcConfig
    path : Path
    profile : SpeedProfile
        The surge reference ``Ud`` is frozen at its value at solve time.
    """

    def __init__(self, cfg: NmpcConfig, path: Path, profile: SpeedProfile):
        self.cfg = cfg
        self.path = path
        self.profile = profile
        self.vd_star = vd_star(profile, path)
        v_max = cfg.v_max if cfg.v_max is not None else 2.0 * self.vd_star
        if not v_max > self.vd_star:
            raise ValueError("v_max must exceed the largest desired parameter rate")
        if cfg.focp == 1:
            lb = [-cfg.r_max, cfg.v_min]
            ub = [cfg.r_max, v_max]
        else:
            lb = [cfg.u_min, -cfg.r_max, cfg.v_min]
            ub = [cfg.u_max, cfg.r_max, v_max]
        self.lb = np.array(lb, dtype=float)
        self.ub = np.array(ub, dtype=float)
        # preconditioner: typical input magnitudes
        scale = np.minimum(self.ub - self.lb, 1.0)
        if cfg.focp == 1:
            scale[1] = max(self.vd_star, 1e-3)
        else:
            scale[2] = max(self.vd_star, 1e-3)
        self.scale = scale
        self.Ud = profile.speed()

    # -- model ---------------------------------------------------------------
    def _f(self, s1, s2, s3, g, a, b, c3, Ud):
        """Model right-hand side on column arrays; inputs ``(a, b[, c3])``."""
        cfg = self.cfg
        psiP, sp, kappa = self.path.frame_array(g)
        if cfg.focp == 1:
            r, vg = a, b
            uP = sp * vg
            rP = kappa * uP
            return (rP * s2 - uP + Ud * np.cos(s3), -rP * s1 + Ud * np.sin(s3), r - rP, vg)
        u, r, vg = a, b, c3
        rel = psiP - s3
        tx, ty = sp * np.cos(rel), sp * np.sin(rel)
        eps1, eps2 = cfg.epsilon
        return (r * (s2 + eps2) + u - tx * vg, -r * (s1 + eps1) - ty * vg, r, vg)

    def rollout(self, x0, U, Ud: float | None = None) -> np.ndarray:
        """Integrate the prediction model with RK4 under piecewise-constant inputs.

        ``U`` has shape ``(N, m)`` or ``(B, N, m)``; the result has shape
        ``(N + 1, 4)`` or ``(B, N + 1, 4)``.
        """
        Ud = self.Ud if Ud is None else Ud
        U = np.asarray(U, dtype=float)
        single = U.ndim == 2
        if single:
            U = U[None]
        B, N, m = U.shape
        X = np.empty((B, N + 1, 4))
        X[:, 0] = np.asarray(x0, dtype=float)
        x = [X[:, 0, i].copy() for i in range(4)]
        h = self.cfg.Ts / self.cfg.substeps
        f = self._f
        for k in range(N):
            a, b = U[:, k, 0], U[:, k, 1]
            c3 = U[:, k, 2] if m > 2 else None
            for _ in range(self.cfg.substeps):
                k1 = f(*x, a, b, c3, Ud)
                k2 = f(*[xi + 0.5 * h * ki for xi, ki in zip(x, k1)], a, b, c3, Ud)
                k3 = f(*[xi + 0.5 * h * ki for xi, ki in zip(x, k2)], a, b, c3, Ud)
                k4 = f(*[xi + h * ki for xi, ki in zip(x, k3)], a, b, c3, Ud)
                x = [xi + (h / 6.0) * (p1 + 2.0 * p2 + 2.0 * p3 + p4)
                     for xi, p1, p2, p3, p4 in zip(x, k1, k2, k3, k4)]
            for i in range(4):
                X[:, k + 1, i] = x[i]
        if not np.all(np.isfinite(X)):
            raise NonFinite("prediction rollout produced non-finite states")
        return X[0] if single else X

    def stage_cost(self, X, U, Ud: float | None = None):
        """Stage cost at states ``X`` (..., 4) under inputs ``U`` (..., m)."""
        c = self.cfg
        Ud = self.Ud if Ud is None else Ud
        psiP, sp, kappa = self.path.frame_array(X[..., 3])
        Q, R = c.Q, c.R
        if c.focp == 1:
            vg = U[..., 1]
            ua1 = Ud * np.cos(X[..., 2]) - sp * vg
            ua2 = U[..., 0] - kappa * sp * vg
            return (Q[0] * X[..., 0] ** 2 + Q[1] * X[..., 1] ** 2 + Q[2] * X[..., 2] ** 2
                    + R[0] * ua1**2 + R[1] * ua2**2)
        u, r, vg = U[..., 0], U[..., 1], U[..., 2]
        rel = psiP - X[..., 2]
        tx, ty = sp * np.cos(rel), sp * np.sin(rel)
        eps1, eps2 = c.epsilon
        ub1 = u + eps2 * r - tx * vg
        ub2 = -eps1 * r - ty * vg
        return (Q[0] * X[..., 0] ** 2 + Q[1] * X[..., 1] ** 2 + R[0] * ub1**2 + R[1] * ub2**2
                + c.O * (vg - Ud / sp) ** 2)

    def cost(self, X, U, Ud: float | None = None) -> np.ndarray:
        """Trapezoidal cost of trajectories ``X`` under inputs ``U`` (batched or not)."""
        U = np.asarray(U, dtype=float)
        l0 = self.stage_cost(X[..., :-1, :], U, Ud)
        l1 = self.stage_cost(X[..., 1:, :], U, Ud)
        return 0.5 * self.cfg.Ts * np.sum(l0 + l1, axis=-1)

    def evaluate(self, x0, U, Ud: float | None = None):
        return self.cost(self.rollout(x0, U, Ud), U, Ud)

    # -- solver --------------------------------------------------------------
    def clip(self, U):
        return np.clip(U, self.lb, self.ub)

    def feedforward(self, x0, Ud: float | None = None) -> np.ndarray:
        """Inputs that hold the reference point at the desired speed along the nominal path."""
        Ud = self.Ud if Ud is None else Ud
        c = self.cfg
        N = c.N
        g0 = float(x0[3])
        point = self.path.eval(g0, extrapolate=True)
        vd = Ud / point.arc_speed
        gam = g0 + vd * c.Ts * (np.arange(N) + 0.5)
        _, sp, kappa = self.path.frame_array(gam)
        vd_arr = Ud / sp
        if c.focp == 1:
            U = np.stack([kappa * sp * vd_arr, vd_arr], axis=-1)
        else:
            r = kappa * sp * vd_arr
            U = np.stack([np.full(N, Ud), r, vd_arr], axis=-1)
        return self.clip(U)

    def gradient(self, x0, U, Ud):
        """Central finite-difference gradient with respect to scaled inputs."""
        N, m = U.shape
        h = self.cfg.fd_step
        n = N * m
        P = np.repeat(U[None], 2 * n, axis=0)
        idx = np.arange(n)
        rows, cols = np.unravel_index(idx, (N, m))
        step = h * self.scale[cols]
        P[idx, rows, cols] += step
        P[n + idx, rows, cols] -= step
        J = self.evaluate(x0, P, Ud)
        return ((J[:n] - J[n:]) / (2.0 * h)).reshape(N, m)

    def solve(self, x0, warm=None, Ud: float | None = None) -> SolveResult:
        """Projected-gradient descent from the best of several initial guesses.

        Parameters
        ----------
        x0 : array_like, shape (4,)
            Initial state of the prediction model.
        warm : array_like, shape (N, m), optional
            Previous solution; it is shifted by one interval (last sample
            repeated) and used as a candidate initial guess.

        Returns
        -------
        SolveResult
            The returned cost never exceeds the cost of the shifted warm start
            or of the clamped zero input.
        """
        c = self.cfg
        Ud = self.Ud if Ud is None else Ud
        x0 = np.asarray(x0, dtype=float)
        N, m = c.N, c.m
        guesses = [self.clip(np.zeros((N, m))), self.feedforward(x0, Ud)]
        if warm is not None:
            w = np.asarray(warm, dtype=float)
            guesses.append(self.clip(np.concatenate([w[1:], w[-1:]], axis=0)))
        G = np.stack(guesses)
        JG = self.evaluate(x0, G, Ud)
        best = int(np.argmin(JG))
        U, J = G[best].copy(), float(JG[best])
        initial = J
        warm_cost = float(JG[2]) if warm is not None else None
        sc = self.scale
        alpha = 1.0
        g_prev = U_prev = None
        converged = False
        it = 0
        factors = np.array([4.0, 2.0, 1.0, 0.5, 0.25, 0.1, 0.03, 0.01, 1e-3])
        for it in range(1, c.max_iter + 1):
            g = self.gradient(x0, U, Ud) * sc  # d J / d(scaled input)
            # projected-gradient stationarity measure in scaled units
            pg = (U - self.clip(U - g * sc)) / sc
            if np.max(np.abs(pg)) < c.tol:
                converged = True
                break
            if g_prev is not None:
                s = ((U - U_prev) / sc).ravel()
                yv = (g - g_prev).ravel()
                sy = float(s @ yv)
                if sy > 1e-16:
                    alpha = float(s @ s) / sy
            alpha = min(max(alpha, 1e-6), 1e3)
            cands = self.clip(U[None] - (alpha * factors)[:, None, None] * (g * sc)[None])
            JC = self.evaluate(x0, cands, Ud)
            k = int(np.argmin(JC))
            if not JC[k] < J:
                converged = True
                break
            g_prev, U_prev = g, U
            if J - JC[k] < 1e-12 * max(1.0, J):
                U, J = cands[k], float(JC[k])
                converged = True
                break
            U, J = cands[k], float(JC[k])
            alpha *= factors[k]
        return SolveResult(U, J, it, converged, initial, warm_cost)

    # -- state construction --------------------------------------------------
    def state_focp1(self, s1, y1, psi_e, gamma):
        return np.array([s1, y1, psi_e, gamma], dtype=float)

    def state_focp2(self, eB, psi, gamma):
        return np.array([eB[0], eB[1], psi, gamma], dtype=float)


def rollout(x0, U, cfg: NmpcConfig, path: Path, profile: SpeedProfile) -> np.ndarray:
    """Functional wrapper around :meth:`NmpcSolver.rollout`."""
    return NmpcSolver(cfg, path, profile).rollout(x0, U)


def cost_focp1(traj, U, cfg: NmpcConfig, path: Path, profile: SpeedProfile) -> float:
    """Trapezoidal cost of one FOCP-1 trajectory."""
    if cfg.focp != 1:
        raise ValueError("cfg.focp must be 1")
    return float(NmpcSolver(cfg, path, profile).cost(np.asarray(traj), U))


def cost_focp2(traj, U, cfg: NmpcConfig, path: Path, profile: SpeedProfile) -> float:
    """Trapezoidal cost of one FOCP-2 trajectory."""
    if cfg.focp != 2:
        raise ValueError("cfg.focp must be 2")
    return float(NmpcSolver(cfg, path, profile).cost(np.asarray(traj), U))


def solve(x0, cfg: NmpcConfig, path: Path, profile: SpeedProfile, warm=None) -> SolveResult:
    """Functional wrapper around :meth:`NmpcSolver.solve`."""
    return NmpcSolver(cfg, path, profile).solve(x0, warm)


def brute_force_oracle(x0, cfg: NmpcConfig, path: Path, profile: SpeedProfile,
                       n_grid: int = 9, lb=None, ub=None, chunk: int = 200_000):
    """Exhaustive search over a uniform input grid.

    Every input dimension is gridded with ``n_grid`` points between its bounds
    at every interval, and all ``n_grid ** (m N)`` combinations are rolled
    out.  Only meant for tiny horizons (``N <= 3``).

    Returns
    -------
    U : numpy.ndarray, shape (N, m)
    J : float
    """
    solver = NmpcSolver(cfg, path, profile)
    N, m = cfg.N, cfg.m
    if N > 3:
        raise ValueError("the oracle is restricted to N <= 3")
    if not 1 <= n_grid <= 15:
        raise ValueError("grid size must lie in [1, 15]")
    lb = solver.lb if lb is None else np.asarray(lb, dtype=float)
    ub = solver.ub if ub is None else np.asarray(ub, dtype=float)
    axes = [np.linspace(lb[j], ub[j], n_grid) if n_grid > 1 else np.array([0.5 * (lb[j] + ub[j])])
            for j in range(m)]
    step_grid = np.array(list(itertools.product(*axes)))  # (n^m, m)
    n_step = len(step_grid)
    total = n_step**N
    best_J, best_U = math.inf, None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total))
        digits = [(idx // n_step**k) % n_step for k in range(N)]
        U = np.stack([step_grid[d] for d in digits], axis=1)  # (B, N, m)
        J = solver.evaluate(x0, U)
        k = int(np.argmin(J))
        if J[k] < best_J:
            best_J, best_U = float(J[k]), U[k].copy()
    return best_U, best_J
