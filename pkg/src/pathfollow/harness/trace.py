"""Trace tables, metrics, CSV persistence and cross-run summaries."""
from __future__ import annotations

import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

COLUMNS = (
    "t", "x", "y", "psi", "gamma", "gamma_dot", "s1", "y1", "psi_e", "xte",
    "u_cmd", "r_cmd", "psi_ref", "v_cmd", "vc_hat_x", "vc_hat_y", "V", "eB1", "eB2", "y_int",
)


@dataclass
class TraceTable:
    """Per-step record of a closed-loop run.

    ``y1`` and ``s1`` are measured from the method's own reference point;
    ``xte`` is the signed distance to the closest path point, which equals
    ``y1`` for projection-based methods.  Inapplicable entries are ``nan``.
    """

    data: np.ndarray
    columns: tuple = COLUMNS
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return self.data.shape[0]

    def __getitem__(self, name: str) -> np.ndarray:
        return self.data[:, self.columns.index(name)]

    @property
    def aborted(self) -> str | None:
        return self.meta.get("aborted")


@dataclass
class Metrics:
    """Summary statistics computed from a trace alone.

    Attributes
    ----------
    convergence_time : float
        First time after which ``|xte|`` stays below the threshold (``inf`` if
        it never settles).
    rms_cross_track : float
        RMS of ``xte`` after convergence (``nan`` without convergence).
    steady_state_s1 : float
        Mean ``s1`` over the last 20 % of the run.
    max_abs_r : float
        Largest applied yaw-rate command.
    lyapunov_violations : int
        Steps where ``V`` grew by more than ``1e-4 (1 + V)``.
    """

    convergence_time: float
    rms_cross_track: float
    steady_state_s1: float
    max_abs_r: float
    lyapunov_violations: int
    final_time: float = 0.0
    aborted: bool = False


def convergence_time(t, err, threshold) -> float:
    bad = np.nonzero(~(np.abs(err) < threshold))[0]
    if len(bad) == 0:
        return float(t[0])
    k = bad[-1] + 1
    return float(t[k]) if k < len(t) else math.inf


def lyapunov_violations(V, rel_tol: float = 1e-4) -> int:
    V = np.asarray(V)
    ok = np.isfinite(V[:-1]) & np.isfinite(V[1:])
    return int(np.sum(V[1:][ok] > V[:-1][ok] + rel_tol * (1.0 + V[:-1][ok])))


def compute_metrics(trace: TraceTable, threshold: float = 0.1) -> Metrics:
    if len(trace) == 0:
        return Metrics(math.inf, math.nan, math.nan, math.nan, 0, 0.0, bool(trace.aborted))
    t, xte = trace["t"], trace["xte"]
    tc = convergence_time(t, xte, threshold)
    after = t >= tc
    rms = float(np.sqrt(np.mean(xte[after] ** 2))) if np.any(after) else math.nan
    tail = t >= t[0] + 0.8 * (t[-1] - t[0])
    s1 = float(np.mean(trace["s1"][tail]))
    r = trace["r_cmd"]
    r = r[np.isfinite(r)]
    max_r = float(np.max(np.abs(r))) if len(r) else math.nan
    return Metrics(tc, rms, s1, max_r, lyapunov_violations(trace["V"]), float(t[-1]),
                   bool(trace.aborted))


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


def write_csv(trace: TraceTable, dest) -> None:
    """Write ``trace`` with ``#`` metadata lines, a header and 9-significant-digit rows.

    ``dest`` is a path or a text file object.
    """
    buf = io.StringIO()
    for key in sorted(trace.meta):
        buf.write(f"# {key}: {json.dumps(trace.meta[key], sort_keys=True)}\n")
    buf.write(",".join(trace.columns) + "\n")
    for row in trace.data:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        with open(dest, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def read_csv(src) -> TraceTable:
    """Inverse of :func:`write_csv`."""
    if hasattr(src, "read"):
        lines = src.read().splitlines()
    else:
        with open(src, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    meta, i = {}, 0
    while i < len(lines) and lines[i].startswith("#"):
        key, _, val = lines[i][1:].strip().partition(": ")
        meta[key] = json.loads(val)
        i += 1
    columns = tuple(lines[i].split(","))
    rows = [[float(v) for v in ln.split(",")] for ln in lines[i + 1:] if ln]
    data = np.array(rows, dtype=float).reshape(len(rows), len(columns))
    return TraceTable(data, columns, meta)


def summarize(results: dict) -> tuple[str, str]:
    """Compare runs.

    Parameters
    ----------
    results : dict
        Mapping of run name to :class:`Metrics`.

    Returns
    -------
    text : str
        Aligned table ordered by convergence time.
    js : str
        The same content as JSON.
    """
    order = sorted(results, key=lambda k: (results[k].convergence_time, k))
    head = ("run", "t_conv[s]", "rms_xte[m]", "s1_ss[m]", "max|r|", "V_viol", "aborted")
    rows = []
    for name in order:
        m = results[name]
        rows.append((name, f"{m.convergence_time:.2f}", f"{m.rms_cross_track:.4f}",
                     f"{m.steady_state_s1:.4f}", f"{m.max_abs_r:.3f}",
                     str(m.lyapunov_violations), "yes" if m.aborted else "no"))
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(head, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]

    def clean(v):
        return None if isinstance(v, float) and not math.isfinite(v) else v

    js = json.dumps([{"run": n, **{k: clean(v) for k, v in asdict(results[n]).items()}}
                     for n in order], indent=2)
    return "\n".join(lines) + "\n", js
