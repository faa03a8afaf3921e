"""Closed-loop simulation of a scenario.

Each step of length ``dt`` performs, in order: evaluate the guidance law on
the current state (the observer estimate is part of that state), emulate the
inner loops, integrate plant and observer jointly with RK4 under held inputs,
advance the path parameter of virtual-point methods, and record a trace row.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from ..exceptions import NonFinite, PathFollowError
from ..frames import rotate, wrap_angle
from ..guidance import (Full, GammaDdot, GammaDot, IlosState, UPsi, UR, fully_actuated, ilos,
                        gamma_ddot_law, method1, method2, method3_los, method3_sat, method4,
                        method6)
from ..nmpc import NmpcSolver
from ..observer import observer_rhs, place_gain
from ..paths import vd_of
from ..pf_errors import body_error, pt_error
from ..vehicle import VehicleState, _rk4, kinematics
from .scenario import Scenario
from .trace import COLUMNS, Metrics, TraceTable, compute_metrics

log = logging.getLogger("pathfollow")

PROJECTION_METHODS = {"method1", "method3", "method3_sat", "method3_comp", "ilos"}
RATE_METHODS = {"method2", "method4"}
ACCEL_METHODS = {"method6", "method6_comp", "fully_actuated"}
NMPC_METHODS = {"method5", "method7"}
NAN = math.nan


def _joint_rk4(x, y, psi, extra, u, v, r, vc, dt, gain=None, gamma_acc=None):
    """RK4 of the plant together with optional estimator and parameter states.

    ``extra`` holds the estimator state (4 values, if ``gain`` is given)
    followed by ``(gamma, gamma_dot)`` (if ``gamma_acc`` is given).  The
    estimator measures the plant position at every stage and ``gamma_acc``
    evaluates the parameter acceleration law on the stage state.
    """
    n_obs = 4 if gain is not None else 0

    def f(s):
        d = list(kinematics(s[2], u, v, r, vc[0], vc[1]))
        if n_obs:
            d.extend(observer_rhs(s[3:7], gain, u, s[2], (s[0], s[1]), v))
        if gamma_acc is not None:
            g, gd = s[3 + n_obs], s[4 + n_obs]
            d.extend((gd, gamma_acc((s[0], s[1]), s[2], g, gd)))
        return d

    s0 = (x, y, psi) + tuple(extra)
    k1 = f(s0)
    k2 = f([a + 0.5 * dt * b for a, b in zip(s0, k1)])
    k3 = f([a + 0.5 * dt * b for a, b in zip(s0, k2)])
    k4 = f([a + dt * b for a, b in zip(s0, k3)])
    out = tuple(a + dt / 6.0 * (p + 2 * q + 2 * w + z)
                for a, p, q, w, z in zip(s0, k1, k2, k3, k4))
    return out[0], out[1], out[2], out[3:]


class Simulation:
    """Mutable run state for one scenario; use :func:`run` for the usual entry point."""

    def __init__(self, sc: Scenario):
        self.sc = sc
        self.path = sc.path
        self.x, self.y, self.psi = sc.x0
        self.v_sway = 0.0
        self.vc = sc.current
        self.t = 0.0
        self.proj_prev = None
        self.xte_prev = None
        self.psi_P_ref = None
        self.il = IlosState()
        self.sat_int = 0.0
        self.u_act = None
        self.gain = None
        self.xhat = None
        obs = sc.observer
        if obs is not None and obs.source == "observer":
            self.gain = place_gain(obs.poles)
            est = obs.initial_estimate or (self.x, self.y, 0.0, 0.0)
            self.xhat = tuple(float(v) for v in est)
        self.gamma = self.gamma_dot = None
        if sc.method not in PROJECTION_METHODS:
            g0 = sc.gamma0 if sc.gamma0 is not None else self.path.project((self.x, self.y))
            self.gamma = float(g0)
            point = self.path.eval(self.gamma, extrapolate=True)
            self.gamma_dot = float(sc.gamma_dot0 if sc.gamma_dot0 is not None
                                   else vd_of(sc.profile, point))
        self.solver = None
        if sc.method in NMPC_METHODS:
            self.solver = NmpcSolver(sc.nmpc, self.path, sc.profile)
            self.steps_per_solve = int(round(sc.nmpc.Ts / sc.dt))
            self.warm = None
            self.held = None
            self.nmpc_iters = 0
            self.nmpc_unconverged = 0
            self.nmpc_solves = 0

    # -- helpers ----------------------------------------------------------
    @property
    def state(self) -> VehicleState:
        return VehicleState(self.x, self.y, self.psi, self.v_sway, self.vc)

    def vhat(self):
        obs = self.sc.observer
        if obs is None:
            return None
        if obs.source == "oracle":
            return self.vc
        return self.xhat[2], self.xhat[3]

    def psi_d(self, point, psi_P, t):
        hr = self.sc.heading_reference
        if hr.mode == "tangent_offset":
            return psi_P + hr.value
        return hr.value

    def law(self, state, gamma, gamma_dot, t, k):
        """Evaluate the configured guidance law at ``state``."""
        sc, m = self.sc, self.sc.method
        g, prof, path, ref = sc.gains, sc.profile, self.path, self.psi_P_ref
        if m == "method1":
            return method1(state, path, g, prof, t, self.proj_prev, ref)
        if m == "method3":
            return method3_los(state, path, g, prof, t, self.proj_prev, ref)
        if m == "method3_sat":
            return method3_sat(state, path, g, prof, None, t, self.proj_prev, ref, self.sat_int)
        if m == "method3_comp":
            return method3_sat(state, path, g, prof, self.vhat(), t, self.proj_prev, ref,
                               self.sat_int)
        if m == "ilos":
            cmd, self._il_next = ilos(state, path, self.il, g, prof, sc.dt, t, self.proj_prev, ref)
            return cmd
        if m == "method2":
            return method2(state, path, gamma, g, prof, t, ref)
        if m == "method4":
            return method4(state, path, gamma, g, prof, t, ref)
        if m == "method6":
            return method6(state, path, gamma, gamma_dot, g, prof, None, t, ref)
        if m == "method6_comp":
            return method6(state, path, gamma, gamma_dot, g, prof, self.vhat(), t, ref)
        if m == "fully_actuated":
            return fully_actuated(state, path, gamma, gamma_dot, self.psi_d, g, prof, None, t, ref)
        if m in NMPC_METHODS:
            return self._nmpc(state, gamma, t, k)
        raise ValueError(f"unknown method {m!r}")

    def _nmpc(self, state, gamma, t, k):
        from ..guidance import GuidanceCommand, _info, _unwrapped_tangent, lyapunov_body

        sc, solver = self.sc, self.solver
        point = self.path.eval(gamma, extrapolate=True)
        psi_P = _unwrapped_tangent(point, state.psi, self.psi_P_ref)
        e = pt_error(state.p, state.psi, point, psi_P)
        Ud = sc.profile.speed(gamma, t)
        extra = {}
        if sc.method == "method7":
            be = body_error(state.p, state.psi, point.pd, sc.nmpc.epsilon)
            extra["eB"] = be.eB
        if k % self.steps_per_solve == 0:
            if sc.method == "method5":
                x0 = np.array([e.s1, e.y1, e.psi_e, gamma])
            else:
                x0 = np.array([extra["eB"][0], extra["eB"][1], state.psi, gamma])
            res = solver.solve(x0, self.warm, Ud)
            self.warm = res.U
            self.held = tuple(float(v) for v in res.first)
            self.nmpc_iters += res.iterations
            self.nmpc_solves += 1
            self.nmpc_unconverged += int(not res.converged)
        if sc.method == "method5":
            r, vg = self.held
            act = UR(Ud, r)
        else:
            u, r, vg = self.held
            act = UR(u, r)
        V = lyapunov_body(extra["eB"], 0.0) if "eB" in extra else NAN
        return GuidanceCommand(act, GammaDot(vg), _info(e, psi_P, V, **extra))

    def inner_loop(self, cmd):
        """Turn a command into held plant inputs ``(u, v, r)``; may snap the heading."""
        il = self.sc.inner_loop
        act = cmd.actuation
        v = 0.0
        if isinstance(act, UR):
            u, r = act.u, act.r
            if il.mode == "servo":
                r = min(il.r_max, max(-il.r_max, r))
        else:
            u = act.u
            v = act.v if isinstance(act, Full) else 0.0
            err = wrap_angle(act.psi_ref - self.psi)
            if il.mode == "ideal":
                if isinstance(act, Full) and err != 0.0:
                    # keep the commanded inertial velocity after the heading snap
                    u, v = rotate(err, u, v)
                self.psi += err
                r = 0.0
            else:
                r = min(il.r_max, max(-il.r_max, il.k_psi * err))
        if il.tau_u > 0:
            if self.u_act is None:
                self.u_act = u
            u_cmd, u = u, self.u_act
            self.u_act = u_cmd + (self.u_act - u_cmd) * math.exp(-self.sc.dt / il.tau_u)
        return u, v, r

    def xte(self, info, state):
        if self.sc.method in PROJECTION_METHODS:
            return info["y1"]
        g = self.path.project(state.p, self.xte_prev)
        self.xte_prev = g
        point = self.path.eval(g, clamp=True)
        return rotate(point.psi_P, state.x - point.pd[0], state.y - point.pd[1])[1]

    # -- main loop --------------------------------------------------------
    def run(self) -> TraceTable:
        sc = self.sc
        dt, n = sc.dt, sc.n_steps
        a, b = self.path.domain
        rows = []
        meta = {"name": sc.name, "method": sc.method, "path": sc.path.kind, "dt": dt,
                "duration": sc.duration, "threshold": sc.threshold,
                "inner_loop": sc.inner_loop.mode, "seed": sc.seed}
        if sc.method == "ilos" and sc.path.kind != "line":
            meta["ilos_curved_path"] = True
        if sc.method in ("method6", "method6_comp"):
            meta["epsilon"] = list(sc.gains.epsilon)
        try:
            for k in range(n + 1):
                t = k * dt
                self.t = t
                state = self.state
                cmd = self.law(state, self.gamma, self.gamma_dot, t, k)
                info = cmd.info
                if sc.method in PROJECTION_METHODS:
                    self.proj_prev = info["gamma"]
                self.psi_P_ref = info["psi_P"]
                xte = self.xte(info, state)
                last = k == n or (not self.path.periodic and info["gamma"] >= b - 1e-9)
                psi0 = self.psi
                if last:
                    u, v, r = cmd.actuation.u, getattr(cmd.actuation, "v", 0.0), getattr(cmd.actuation, "r", NAN)
                else:
                    u, v, r = self.inner_loop(cmd)
                rows.append(self._row(t, state, cmd, info, xte, u, v, r, psi0))
                if last:
                    break
                self._advance(cmd, u, v, r, t, k)
        except PathFollowError as exc:
            meta["aborted"] = f"{type(exc).__name__}: {exc}"
            log.warning("run %s aborted at t=%.3f: %s", sc.name, self.t, exc)
        if self.solver is not None:
            meta["nmpc_solves"] = self.nmpc_solves
            meta["nmpc_iterations"] = self.nmpc_iters
            meta["nmpc_unconverged"] = self.nmpc_unconverged
        data = np.array(rows, dtype=float).reshape(len(rows), len(COLUMNS))
        return TraceTable(data, COLUMNS, meta)

    def _row(self, t, state, cmd, info, xte, u, v, r, psi0):
        act = cmd.actuation
        psi_ref = getattr(act, "psi_ref", NAN)
        eB = info.get("eB", (NAN, NAN))
        vh = self.vhat() or (NAN, NAN)
        gamma_dot = NAN
        if isinstance(cmd.path_cmd, GammaDot):
            gamma_dot = cmd.path_cmd.value
        elif isinstance(cmd.path_cmd, GammaDdot):
            gamma_dot = self.gamma_dot
        y_int = NAN
        if self.sc.method == "ilos":
            y_int = info["y_int"]
        elif self.sc.method in ("method3_sat", "method3_comp") and self.sc.gains.sat_ki > 0:
            y_int = self.sat_int
        v_col = v if self.sc.plant == "fully_actuated" else NAN
        return (t, state.x, state.y, psi0, info["gamma"], gamma_dot, info["s1"], info["y1"],
                info["psi_e"], xte, u, r, psi_ref, v_col, vh[0], vh[1], info["V"],
                eB[0], eB[1], y_int)

    def _gamma_acc(self, t):
        sc = self.sc
        eps = sc.gains.epsilon if sc.method in ("method6", "method6_comp") else (0.0, 0.0)

        def acc(p, psi, g, gd):
            return gamma_ddot_law(p, psi, g, gd, self.path, sc.gains, sc.profile, eps, t)
        return acc

    def _plant(self, u, v, r, h, gamma_acc=None):
        if self.xhat is None and gamma_acc is None:
            x, y, psi = _rk4(self.x, self.y, self.psi, u, v, r, self.vc[0], self.vc[1], h)
            return x, y, psi, ()
        extra = tuple(self.xhat or ())
        if gamma_acc is not None:
            extra += (self.gamma, self.gamma_dot)
        return _joint_rk4(self.x, self.y, self.psi, extra, u, v, r, self.vc, h, self.gain,
                          gamma_acc)

    def _advance(self, cmd, u, v, r, t, k):
        sc, dt = self.sc, self.sc.dt
        pc = cmd.path_cmd
        gamma_acc = None
        if sc.method in RATE_METHODS:
            # explicit midpoint on gamma with the law re-evaluated at the half step
            xh, yh, psih, _ = self._plant(u, v, r, 0.5 * dt)
            half = VehicleState(xh, yh, psih, v, self.vc)
            g_half = self.gamma + 0.5 * dt * pc.value
            cmd_h = self.law(half, g_half, None, t + 0.5 * dt, k)
            self.gamma += dt * cmd_h.path_cmd.value
            self.gamma_dot = cmd_h.path_cmd.value
        elif isinstance(pc, GammaDdot):
            gamma_acc = self._gamma_acc(t)
        elif isinstance(pc, GammaDot):
            self.gamma += dt * pc.value
            self.gamma_dot = pc.value
        if sc.method == "ilos":
            self.il = self._il_next
        if sc.method in ("method3_sat", "method3_comp") and sc.gains.sat_ki > 0:
            self.sat_int += dt * cmd.info["y1"]
        x, y, psi, extra = self._plant(u, v, r, dt, gamma_acc)
        if not all(math.isfinite(q) for q in (x, y, psi) + tuple(extra)):
            raise NonFinite("plant state became non-finite")
        self.x, self.y, self.psi, self.v_sway = x, y, psi, v
        if self.xhat is not None:
            self.xhat, extra = extra[:4], extra[4:]
        if gamma_acc is not None:
            self.gamma, self.gamma_dot = extra


def run(sc: Scenario) -> tuple[TraceTable, Metrics]:
    """Simulate ``sc`` and return its trace and metrics.

    Errors raised by the guidance law or the plant stop the run; the partial
    trace carries the message in ``trace.meta['aborted']``.
    """
    trace = Simulation(sc).run()
    return trace, compute_metrics(trace, sc.threshold)
