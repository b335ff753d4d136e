"""Append-only run logs: events, persistence, summaries, replay checks.

A run is recorded as a header carrying the full configuration followed by
one JSON record per event, newline-delimited, every line tagged with the
schema version.  :func:`verify_run_invariants` replays a log from scratch
and asserts the coordinator's guarantees: ticket lifecycles, the in-flight
bound, snapshot consistency, monotone best-so-far, variance control and
edge avoidance of the recorded choices.
"""

from __future__ import annotations

import csv
import hashlib
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .gp import Dataset, Hypers, fit, predict
from .space import is_edge_point

SCHEMA_VERSION = 1

EVENT_KINDS = (
    "eval_submitted",
    "eval_completed",
    "eval_failed",
    "inference_submitted",
    "inference_completed",
)

SUMMARY_COLUMNS = ["index", "time", "x_raw", "y", "provenance", "best_so_far"]


class LogFormatError(ValueError):
    """A persisted log line could not be parsed or has the wrong schema."""


class InvariantViolation(AssertionError):
    """A replayed log contradicts one of the run invariants."""


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    payload: dict

    def to_record(self) -> dict:
        return {"v": SCHEMA_VERSION, "t": self.time, "kind": self.kind, **self.payload}


@dataclass
class RunLog:
    """Header configuration plus the ordered event sequence of one run."""

    config: dict
    events: list[Event] = field(default_factory=list)

    def append(self, time: float, kind: str, **payload) -> None:
        if kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {kind!r}")
        self.events.append(Event(time, kind, payload))

    def completed_evaluations(self) -> list[Event]:
        return [e for e in self.events if e.kind == "eval_completed"]

    def best_trace(self) -> np.ndarray:
        """Running maximum of observed values, one entry per completion."""
        ys = [e.payload["y"] for e in self.completed_evaluations()]
        return np.maximum.accumulate(np.array(ys)) if ys else np.empty(0)

    def summary_rows(self) -> list[dict]:
        """One row per completed evaluation, in completion order."""
        submitted = {
            e.payload["ticket"]: e.payload
            for e in self.events
            if e.kind == "eval_submitted"
        }
        rows = []
        best = -np.inf
        for i, e in enumerate(self.completed_evaluations()):
            sub = submitted[e.payload["ticket"]]
            best = max(best, e.payload["y"])
            rows.append(
                {
                    "index": i,
                    "time": e.time,
                    "x_raw": sub["x_raw"],
                    "y": e.payload["y"],
                    "provenance": sub["provenance"],
                    "best_so_far": best,
                }
            )
        return rows

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(json.dumps({"v": SCHEMA_VERSION, "kind": "header", "config": self.config}) + "\n")
            for e in self.events:
                fh.write(json.dumps(e.to_record()) + "\n")

    @classmethod
    def load(cls, path) -> "RunLog":
        with open(path) as fh:
            lines = fh.read().splitlines()
        if not lines:
            raise LogFormatError("line 1: empty log file")
        header = _parse_line(lines[0], 1)
        if header.get("kind") != "header":
            raise LogFormatError("line 1: missing header record")
        log = cls(config=header["config"])
        for i, line in enumerate(lines[1:], start=2):
            rec = _parse_line(line, i)
            try:
                t = rec.pop("t")
                kind = rec.pop("kind")
                rec.pop("v")
            except KeyError as exc:
                raise LogFormatError(f"line {i}: missing field {exc}") from None
            if kind not in EVENT_KINDS:
                raise LogFormatError(f"line {i}: unknown event kind {kind!r}")
            log.events.append(Event(t, kind, rec))
        return log

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, RunLog)
            and self.config == other.config
            and self.events == other.events
        )


def _parse_line(line: str, lineno: int) -> dict:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise LogFormatError(f"line {lineno}: not a valid record ({exc.msg})") from None
    if not isinstance(rec, dict):
        raise LogFormatError(f"line {lineno}: record is not an object")
    if rec.get("v") != SCHEMA_VERSION:
        raise LogFormatError(
            f"line {lineno}: schema version {rec.get('v')!r} (expected {SCHEMA_VERSION})"
        )
    return rec


def write_summary_csv(log: RunLog, path) -> None:
    """Comma-separated evaluation table; column order is fixed and documented."""
    rows = log.summary_rows()
    dim = len(rows[0]["x_raw"]) if rows else len(log.config["space"]["lower"])
    header = ["index", "time"] + [f"x{k}" for k in range(dim)] + ["y", "provenance", "best_so_far"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for r in rows:
            writer.writerow(
                [r["index"], repr(r["time"])]
                + [repr(v) for v in r["x_raw"]]
                + [repr(r["y"]), r["provenance"], repr(r["best_so_far"])]
            )


def _floats_bytes(values) -> bytes:
    return b"".join(struct.pack("<d", float(v)) for v in values)


def snapshot_hash(X_obs, y_obs, pending_tickets, pending_X) -> str:
    """Stable digest of an (observations, pending) coordinator snapshot."""
    h = hashlib.sha256()
    X = np.asarray(X_obs, dtype=float)
    h.update(struct.pack("<q", X.shape[0]))
    h.update(_floats_bytes(X.ravel()))
    h.update(_floats_bytes(np.asarray(y_obs, dtype=float)))
    h.update(struct.pack("<q", len(pending_tickets)))
    for t in pending_tickets:
        h.update(struct.pack("<q", int(t)))
    h.update(_floats_bytes(np.asarray(pending_X, dtype=float).ravel()))
    return h.hexdigest()[:16]


def reconstruct_state(log: RunLog):
    """Final coordinator state from a log: observations, pending, warm hypers.

    Returns ``(X_obs, y_obs, pending, warm)`` with unit-cube locations,
    pending as a ticket-to-location dict in submission order, and ``warm``
    the hyper sample of the last completed inference (or ``None``).
    """
    obs_x: list[list[float]] = []
    obs_y: list[float] = []
    pending: dict[int, list[float]] = {}
    warm = None
    for e in log.events:
        p = e.payload
        if e.kind == "eval_submitted":
            pending[p["ticket"]] = p["x_unit"]
        elif e.kind == "eval_completed":
            obs_x.append(pending.pop(p["ticket"]))
            obs_y.append(p["y"])
        elif e.kind == "eval_failed":
            pending.pop(p["ticket"])
        elif e.kind == "inference_completed":
            h = p["choice"]["diagnostics"]["hypers"]
            if h is not None:
                warm = Hypers(h["sigma"], h["mu_bar"], h["amp"], np.array(h["lengths"]))
    return np.array(obs_x) if obs_x else np.empty((0, len(log.config["space"]["lower"]))), \
        np.array(obs_y), pending, warm


@dataclass
class ReplayReport:
    n_completed: int
    n_failed: int
    max_in_flight: int
    n_choices: int
    n_vc_checked: int


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise InvariantViolation(msg)


def verify_run_invariants(log: RunLog) -> ReplayReport:
    """Replay a log and assert every coordinator invariant.

    Variance control is recomputed from scratch: the predictive standard
    deviation at each recorded choice is rebuilt from the observed and
    pending locations at the submission snapshot together with the recorded
    hyper sample (predictive variance is independent of the values, so the
    unlogged fantasy draws do not matter).  The check applies to bayes and
    poll choices of the hard-filter algorithm and to poll choices of the
    barrier algorithm.
    """
    cfg = log.config
    m = cfg["m"]
    algorithm = cfg["algorithm"]
    chooser_cfg = cfg["chooser"]
    edge_tol = chooser_cfg["x_atol"]
    exclude_edges = chooser_cfg["exclude_edge_points"]

    obs_x: list[list[float]] = []
    obs_y: list[float] = []
    pending: dict[int, list[float]] = {}
    eval_state: dict[int, str] = {}
    inf_state: dict[int, str] = {}
    inf_snapshot: dict[int, tuple] = {}
    running_inf = 0
    max_in_flight = 0
    last_t = -np.inf
    best = -np.inf
    n_failed = 0
    n_choices = 0
    n_vc = 0

    for idx, e in enumerate(log.events):
        _require(e.time >= last_t, f"event {idx}: time went backwards")
        last_t = e.time
        p = e.payload
        if e.kind == "eval_submitted":
            t = p["ticket"]
            _require(t not in eval_state, f"eval ticket {t} submitted twice")
            eval_state[t] = "running"
            pending[t] = p["x_unit"]
            if exclude_edges:
                _require(
                    not is_edge_point(np.array(p["x_unit"]), edge_tol),
                    f"eval ticket {t} submitted at an edge point",
                )
        elif e.kind in ("eval_completed", "eval_failed"):
            t = p["ticket"]
            _require(eval_state.get(t) == "running", f"eval ticket {t} completed but not running")
            eval_state[t] = "done"
            x = pending.pop(t)
            if e.kind == "eval_completed":
                obs_x.append(x)
                obs_y.append(p["y"])
                best = max(best, p["y"])
            else:
                n_failed += 1
        elif e.kind == "inference_submitted":
            t = p["ticket"]
            _require(t not in inf_state, f"inference ticket {t} submitted twice")
            inf_state[t] = "running"
            running_inf += 1
            expected = snapshot_hash(obs_x, obs_y, list(pending.keys()), list(pending.values()))
            _require(
                p["snapshot_hash"] == expected,
                f"inference ticket {t}: snapshot hash mismatch",
            )
            _require(p["n_obs"] == len(obs_y), f"inference ticket {t}: wrong n_obs")
            _require(p["n_pending"] == len(pending), f"inference ticket {t}: wrong n_pending")
            inf_snapshot[t] = (
                [list(x) for x in obs_x],
                list(pending.values()),
            )
        elif e.kind == "inference_completed":
            t = p["ticket"]
            _require(inf_state.get(t) == "running", f"inference ticket {t} completed but not running")
            inf_state[t] = "done"
            running_inf -= 1
            n_choices += 1
            choice = p["choice"]
            x = np.array(choice["x_unit"])
            _require(np.all(x >= 0.0) and np.all(x <= 1.0), f"choice {t} left the unit cube")
            if exclude_edges and choice["provenance"] in ("bayes", "poll"):
                _require(
                    not is_edge_point(x, edge_tol),
                    f"choice {t} is an edge point",
                )
            vc_applies = (
                algorithm == "bop" and choice["provenance"] in ("bayes", "poll")
            ) or (algorithm == "fubar" and choice["provenance"] == "poll")
            if vc_applies:
                snap_obs, snap_pend = inf_snapshot[t]
                d = choice["diagnostics"]
                hrec = d["hypers"]
                hyp = Hypers(hrec["sigma"], hrec["mu_bar"], hrec["amp"], np.array(hrec["lengths"]))
                tau = max(chooser_cfg["rho"] * hyp.sigma, chooser_cfg["sem_min"])
                _require(
                    abs(tau - d["tau"]) == 0.0,
                    f"choice {t}: recorded tau disagrees with config",
                )
                locs = np.array(snap_obs + snap_pend) if (snap_obs or snap_pend) else np.empty((0, x.size))
                post = fit(Dataset(locs, np.zeros(len(locs))), hyp)
                sd = float(np.sqrt(predict(post, x)[1]))
                _require(sd > tau, f"choice {t}: sd {sd} <= tau {tau} at selection snapshot")
                n_vc += 1
        in_flight = len(pending) + running_inf
        _require(in_flight <= m, f"event {idx}: in-flight {in_flight} exceeds m={m}")
        max_in_flight = max(max_in_flight, in_flight)

    _require(all(s == "done" for s in eval_state.values()), "eval ticket left running")
    _require(all(s == "done" for s in inf_state.values()), "inference ticket left running")
    trace = log.best_trace()
    _require(bool(np.all(np.diff(trace) >= 0)) if trace.size else True, "best-so-far decreased")
    return ReplayReport(
        n_completed=len(obs_y),
        n_failed=n_failed,
        max_in_flight=max_in_flight,
        n_choices=n_choices,
        n_vc_checked=n_vc,
    )
