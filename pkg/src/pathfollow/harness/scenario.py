"""Scenario documents: schema validation and construction of runtime objects."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

import jsonschema

from ..exceptions import ParseError, ValidationError
from ..guidance import GuidanceGains
from ..nmpc import NmpcConfig
from ..paths import (Path, SpeedProfile, make_circle_arc, make_composite, make_lawnmower,
                     make_lemniscate, make_line, make_sinusoid)

METHODS = {
    "method1": "yaw-rate law on the orthogonal projection",
    "method2": "yaw-rate law on a virtual point driven by gamma_dot",
    "method3": "line-of-sight heading on the orthogonal projection",
    "method3_sat": "saturated heading law (optional integral term)",
    "method4": "line-of-sight heading with a virtual point driven by gamma_dot",
    "method5": "NMPC on path-frame errors (r, v_gamma)",
    "method6": "offset-point law in the body frame with gamma_ddot",
    "method7": "NMPC on body-frame errors (u, r, v_gamma)",
    "ilos": "integral line-of-sight heading",
    "method3_comp": "saturated heading law with current compensation",
    "method6_comp": "offset-point law with current compensation",
    "fully_actuated": "arbitrary-heading law for a vehicle with sway control",
}
COMPENSATED = {"method3_comp", "method6_comp"}


@lru_cache(maxsize=1)
def schema() -> dict:
    """The JSON schema every scenario document must satisfy."""
    text = resources.files(__package__).joinpath("scenario.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class InnerLoop:
    """Emulation of the heading and surge inner loops.

    ``mode='servo'`` applies ``r = sat(k_psi wrap(psi_ref - psi), r_max)`` and
    saturates commanded yaw rates; ``mode='ideal'`` snaps the heading to its
    reference at the start of each step and applies yaw-rate commands exactly.
    ``tau_u > 0`` adds a first-order lag on surge.
    """

    mode: str = "servo"
    k_psi: float = 2.0
    r_max: float = 0.6
    tau_u: float = 0.0


@dataclass(frozen=True)
class ObserverConfig:
    source: str = "observer"
    poles: tuple = (-0.5, -0.5)
    initial_estimate: tuple | None = None


@dataclass(frozen=True)
class HeadingReference:
    mode: str = "constant"
    value: float = 0.0


@dataclass(frozen=True)
class Scenario:
    """Everything needed for one closed-loop run."""

    name: str
    path: Path
    method: str
    gains: GuidanceGains = field(default_factory=GuidanceGains)
    profile: SpeedProfile = field(default_factory=SpeedProfile)
    x0: tuple = (0.0, 0.0, 0.0)
    gamma0: float | None = None
    gamma_dot0: float | None = None
    current: tuple = (0.0, 0.0)
    observer: ObserverConfig | None = None
    inner_loop: InnerLoop = field(default_factory=InnerLoop)
    heading_reference: HeadingReference = field(default_factory=HeadingReference)
    nmpc: NmpcConfig | None = None
    plant: str = "underactuated"
    dt: float = 0.02
    duration: float = 300.0
    threshold: float = 0.1
    seed: int = 0
    document: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


def build_path(spec: dict, where: str = "path") -> Path:
    """Construct a :class:`Path` from its document form."""
    kind = spec["kind"]
    args = {k: v for k, v in spec.items() if k != "kind"}
    for key in ("origin", "center"):
        if key in args:
            args[key] = tuple(args[key])
    try:
        if kind == "line":
            return make_line(**args)
        if kind == "circle_arc":
            return make_circle_arc(**args)
        if kind == "lemniscate":
            return make_lemniscate(**args)
        if kind == "sinusoid":
            return make_sinusoid(**args)
        if kind == "lawnmower":
            return make_lawnmower(**args)
        if kind == "composite":
            parts = [build_path(s, f"{where}.segments[{i}]") for i, s in enumerate(args["segments"])]
            return make_composite(parts)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc), where) from exc
    raise ValidationError(f"unknown path kind {kind!r}", where)


def _field(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else str(part))
    return out or "<root>"


def parse_document(doc: dict) -> Scenario:
    """Validate a decoded document and build the :class:`Scenario`."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: (len(list(e.absolute_path)), str(e.absolute_path)))
    if errors:
        err = max(errors, key=lambda e: len(list(e.absolute_path)))
        raise ParseError(err.message, _field(err))

    def check(cond, msg, where):
        if not cond:
            raise ValidationError(msg, where)

    method = doc["method"]
    path = build_path(doc["path"])

    speed = doc.get("speed", {})
    Ud = speed.get("Ud", 0.5)
    check(Ud > 0 and math.isfinite(Ud), "Ud must be positive", "speed.Ud")
    profile = SpeedProfile(float(Ud))

    try:
        gdoc = dict(doc.get("gains", {}))
        if "Kp" in gdoc:
            gdoc["Kp"] = tuple(tuple(r) for r in gdoc["Kp"])
        if "epsilon" in gdoc:
            gdoc["epsilon"] = tuple(gdoc["epsilon"])
        gains = GuidanceGains(**gdoc)
    except ValueError as exc:
        raise ValidationError(str(exc), "gains") from exc
    if method in ("method6", "method6_comp"):
        check(abs(gains.epsilon[0]) >= 1e-9, "epsilon_1 must be nonzero", "gains.epsilon")

    init = doc.get("initial", {})
    x0 = (float(init.get("x", 0.0)), float(init.get("y", 0.0)), float(init.get("psi", 0.0)))

    plant = doc.get("plant", "fully_actuated" if method == "fully_actuated" else "underactuated")
    check((plant == "fully_actuated") == (method == "fully_actuated"),
          f"method {method!r} is incompatible with plant {plant!r}", "plant")

    obs = None
    if "observer" in doc:
        o = doc["observer"]
        obs = ObserverConfig(o.get("source", "observer"), tuple(o.get("poles", (-0.5, -0.5))),
                             tuple(o["initial_estimate"]) if "initial_estimate" in o else None)
        check(all(p < 0 for p in obs.poles), "observer poles must be negative", "observer.poles")
    if method in COMPENSATED:
        check(obs is not None, f"{method} needs an observer block (observer or oracle source)",
              "observer")

    il = doc.get("inner_loop", {})
    inner = InnerLoop(il.get("mode", "servo"), float(il.get("k_psi", 2.0)),
                      float(il.get("r_max", 0.6)), float(il.get("tau_u", 0.0)))
    check(inner.k_psi > 0, "k_psi must be positive", "inner_loop.k_psi")
    check(inner.r_max > 0, "r_max must be positive", "inner_loop.r_max")
    check(inner.tau_u >= 0, "tau_u must be non-negative", "inner_loop.tau_u")

    hr = doc.get("heading_reference", {})
    heading = HeadingReference(hr.get("mode", "constant"), float(hr.get("value", 0.0)))

    nm = None
    if method in ("method5", "method7"):
        ndoc = dict(doc.get("nmpc", {}))
        ndoc["focp"] = 1 if method == "method5" else 2
        for key in ("Q", "R", "epsilon"):
            if key in ndoc:
                ndoc[key] = tuple(ndoc[key])
        if ndoc["focp"] == 2 and "Q" not in ndoc:
            ndoc["Q"] = (1.0, 1.0)
        if ndoc["focp"] == 2 and "epsilon" not in ndoc:
            ndoc["epsilon"] = gains.epsilon
        try:
            nm = NmpcConfig(**ndoc)
        except ValueError as exc:
            raise ValidationError(str(exc), "nmpc") from exc
    elif "nmpc" in doc:
        raise ValidationError("nmpc block given for a non-NMPC method", "nmpc")

    dt = float(doc.get("dt", 0.02))
    duration = float(doc.get("duration", 300.0))
    check(0 < dt <= 0.5, "dt must lie in (0, 0.5]", "dt")
    check(duration >= dt, "duration must be at least dt", "duration")
    if nm is not None:
        ratio = nm.Ts / dt
        check(abs(ratio - round(ratio)) < 1e-9 and round(ratio) >= 1,
              "nmpc.Ts must be an integer multiple of dt", "nmpc.Ts")
    threshold = float(doc.get("threshold", 0.1))
    check(threshold > 0, "threshold must be positive", "threshold")

    current = tuple(float(c) for c in doc.get("current", (0.0, 0.0)))
    return Scenario(
        name=doc.get("name", method), path=path, method=method, gains=gains, profile=profile,
        x0=x0, gamma0=init.get("gamma"), gamma_dot0=init.get("gamma_dot"), current=current,
        observer=obs, inner_loop=inner, heading_reference=heading, nmpc=nm, plant=plant,
        dt=dt, duration=duration, threshold=threshold, seed=int(doc.get("seed", 0)),
        document=doc)


def load_scenario(text: str) -> Scenario:
    """Parse a JSON scenario document.

    Raises
    ------
    ParseError
        Malformed JSON or a schema violation (``field`` names the location).
    ValidationError
        Semantically invalid content, e.g. a fully actuated method on an
        under-actuated plant or a non-positive speed.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})") from exc
    if not isinstance(doc, dict):
        raise ParseError("scenario must be a JSON object")
    return parse_document(doc)


def load_scenario_file(path) -> Scenario:
    with open(path, encoding="utf-8") as fh:
        return load_scenario(fh.read())
