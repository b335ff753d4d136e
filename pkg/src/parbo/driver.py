"""The asynchronous m-node optimization loop.

One coordinator owns the observations, the pending set, and the log.  It
submits an initial batch of evaluations on a scrambled low-discrepancy
grid; every finished evaluation triggers one inference job over a snapshot
of the current state, and every finished inference submits one evaluation
at the chosen point.  At most ``m`` jobs of any kind are ever in flight, and
the loop stops submitting once the evaluation or time budget is reached.

Two executors implement the same job interface: a virtual-time
discrete-event simulator with log-normal job durations (deterministic
given the run seed), and a wall-clock executor that evaluates points by
spawning a configured subprocess.
"""

from __future__ import annotations

import heapq
import json
import math
import queue
import subprocess
import threading
import time
from functools import partial

import numpy as np
from scipy.stats import qmc

from .chooser import Choice, ChoiceDiagnostics, PendingSet, bop_choose, default_step, fubar_choose
from .config import RunConfig, config_to_dict
from .gp import Dataset
from .objectives import get_objective
from .runlog import RunLog, snapshot_hash

# Seed-stream tags: one independent substream per purpose.
_STREAM_DESIGN = 0
_STREAM_DURATIONS = 1
_STREAM_NOISE = 2
_STREAM_CHOOSER = 3

# Abort once failures exceed this fraction of finished attempts.
FAILURE_ABORT_FRACTION = 0.25
FAILURE_ABORT_MIN_ATTEMPTS = 4


class RunAbortedError(RuntimeError):
    """Too many evaluation failures; carries the partial log."""

    def __init__(self, msg: str, log: RunLog):
        super().__init__(msg)
        self.log = log


def init_design(m: int, dim: int, seed, edge_tol: float = 0.0) -> np.ndarray:
    """First ``m`` points of a scrambled Sobol sequence, shifted off the edges.

    With ``edge_tol > 0`` the cube is shrunk to
    ``[edge_tol, 1 - edge_tol]^D`` so no design point is an edge point.
    """
    if m < 1:
        return np.empty((0, dim))
    rng = np.random.default_rng(seed)
    sampler = qmc.Sobol(d=dim, scramble=True, seed=rng)
    n = 1 << max(0, (m - 1).bit_length())  # draw a power of two, keep the first m
    pts = sampler.random(n)[:m]
    pts = np.clip(pts, 2.0**-53, 1.0 - 2.0**-53)
    return edge_tol + pts * (1.0 - 2.0 * edge_tol)


def _cluster_design(m: int, dim: int, center, radius: float, seed, edge_tol: float) -> np.ndarray:
    rng = np.random.default_rng(seed)
    pts = np.asarray(center, dtype=float) + radius * (2.0 * rng.random((m, dim)) - 1.0)
    lo = edge_tol + 1e-9 if edge_tol > 0 else 0.0
    return np.clip(pts, lo, 1.0 - lo)


class _SimulatedExecutor:
    """Virtual-time pool: completions ordered by submission time + drawn duration."""

    def __init__(self, duration_rng, median: float, sigma_log: float):
        self._rng = duration_rng
        self._mu = math.log(median)
        self._sigma = sigma_log
        self._heap: list = []
        self._seq = 0
        self.now = 0.0
        self.in_flight = 0

    def submit(self, kind: str, ticket: int, result) -> None:
        duration = math.exp(self._mu + self._sigma * float(self._rng.standard_normal()))
        heapq.heappush(self._heap, (self.now + duration, self._seq, kind, ticket, result))
        self._seq += 1
        self.in_flight += 1

    def next_completion(self):
        t, _, kind, ticket, result = heapq.heappop(self._heap)
        self.now = t
        self.in_flight -= 1
        return t, kind, ticket, result


class _ThreadedExecutor:
    """Wall-clock pool: each job runs in its own thread, completions queue up."""

    def __init__(self):
        self._q: queue.Queue = queue.Queue()
        self._t0 = time.monotonic()
        self.in_flight = 0

    def submit(self, kind: str, ticket: int, fn) -> None:
        self.in_flight += 1

        def work():
            try:
                result = fn()
            except Exception as exc:  # surfaced in the coordinator
                result = ("exc", exc)
            self._q.put((time.monotonic() - self._t0, kind, ticket, result))

        threading.Thread(target=work, daemon=True).start()

    def next_completion(self):
        t, kind, ticket, result = self._q.get()
        self.in_flight -= 1
        if isinstance(result, tuple) and len(result) == 2 and result[0] == "exc":
            raise result[1]
        return t, kind, ticket, result


def _subprocess_eval(command: list[str], x_raw: np.ndarray):
    """Objective plugin protocol: JSON point on stdin, one value on stdout."""
    try:
        proc = subprocess.run(
            command,
            input=json.dumps([float(v) for v in x_raw]) + "\n",
            capture_output=True,
            text=True,
        )
    except OSError as exc:
        return ("failed", f"could not launch evaluator: {exc}")
    if proc.returncode != 0:
        return ("failed", f"evaluator exited with {proc.returncode}: {proc.stderr.strip()[:200]}")
    try:
        return ("ok", float(proc.stdout.strip().splitlines()[-1]))
    except (ValueError, IndexError):
        return ("failed", f"unparseable evaluator output {proc.stdout!r:.200}")


def _make_choice(algorithm: str, chooser_cfg, data: Dataset, pend: PendingSet,
                 warm, seed) -> Choice:
    if data.n == 0 or algorithm == "random":
        # No observations to condition on (or the baseline): uniform point.
        rng = np.random.default_rng(seed)
        x = default_step(pend.dim, chooser_cfg, rng)
        diag = ChoiceDiagnostics(None, None, None, None, data.n, len(pend))
        return Choice(x, "default", diag)
    choose = bop_choose if algorithm == "bop" else fubar_choose
    return choose(data, pend, chooser_cfg, warm, seed)


def run(cfg: RunConfig) -> RunLog:
    """Execute one optimization run and return its event log.

    With the simulated executor the entire run, including every chooser
    decision, is a deterministic function of ``cfg`` (bit-identical logs on
    re-run).  Failed evaluations are logged and excluded from the
    observations; once failures exceed 25% of at least
    ``FAILURE_ABORT_MIN_ATTEMPTS`` finished attempts the run aborts.
    """
    space = cfg.space
    dim = space.dim
    log = RunLog(config=config_to_dict(cfg))

    simulated = cfg.executor.kind == "simulated"
    objective = None
    if cfg.objective is not None:
        objective = get_objective(cfg.objective.id, dim)
        if objective.dim != dim:
            raise ValueError(
                f"objective {objective.name!r} is {objective.dim}-dimensional, space is {dim}"
            )
    if simulated:
        executor = _SimulatedExecutor(
            np.random.default_rng(np.random.SeedSequence([cfg.seed, _STREAM_DURATIONS])),
            cfg.executor.duration_median,
            cfg.executor.duration_sigma_log,
        )
    else:
        executor = _ThreadedExecutor()

    obs_x: list[np.ndarray] = []
    obs_y: list[float] = []
    pending = PendingSet(dim)
    submitted_x: dict[int, np.ndarray] = {}
    warm = None
    eval_ticket = 0
    inf_ticket = 0
    evals_submitted = 0
    attempts = 0
    failures = 0

    def budget_left(t: float) -> bool:
        if cfg.max_evals is not None and evals_submitted >= cfg.max_evals:
            return False
        return cfg.max_time is None or t < cfg.max_time

    def submit_eval(t: float, x_unit: np.ndarray, provenance: str) -> None:
        nonlocal eval_ticket, evals_submitted
        ticket = eval_ticket
        eval_ticket += 1
        evals_submitted += 1
        x_unit = np.asarray(x_unit, dtype=float)
        x_raw = space.from_unit(x_unit)
        pending.add(ticket, x_unit)
        submitted_x[ticket] = x_unit
        log.append(
            t,
            "eval_submitted",
            ticket=ticket,
            x_unit=[float(v) for v in x_unit],
            x_raw=[float(v) for v in x_raw],
            provenance=provenance,
        )
        if simulated:
            y = objective(x_raw)
            if cfg.objective.noise_sd > 0:
                noise_rng = np.random.default_rng(
                    np.random.SeedSequence([cfg.seed, _STREAM_NOISE, ticket])
                )
                y += cfg.objective.noise_sd * float(noise_rng.standard_normal())
            executor.submit("eval", ticket, ("ok", float(y)))
        else:
            executor.submit("eval", ticket, partial(_subprocess_eval, cfg.executor.command, x_raw))

    def submit_inference(t: float) -> None:
        nonlocal inf_ticket
        ticket = inf_ticket
        inf_ticket += 1
        data = Dataset(
            np.array(obs_x) if obs_x else np.empty((0, dim)),
            np.array(obs_y),
        )
        pend = pending.copy()
        log.append(
            t,
            "inference_submitted",
            ticket=ticket,
            n_obs=data.n,
            n_pending=len(pend),
            snapshot_hash=snapshot_hash(
                data.X, data.y, list(pend.entries.keys()), pend.locations()
            ),
        )
        seed = np.random.SeedSequence([cfg.seed, _STREAM_CHOOSER, ticket])
        job = partial(_make_choice, cfg.algorithm, cfg.chooser, data, pend, warm, seed)
        executor.submit("inference", ticket, job() if simulated else job)

    # Step 1: the initial batch on a quasi-random grid.
    k0 = cfg.m if cfg.max_evals is None else min(cfg.m, cfg.max_evals)
    edge = cfg.chooser.edge_tol if cfg.chooser.exclude_edge_points else 0.0
    design_seed = np.random.SeedSequence([cfg.seed, _STREAM_DESIGN])
    if cfg.init.kind == "sobol":
        design = init_design(k0, dim, design_seed, edge)
    else:
        design = _cluster_design(k0, dim, cfg.init.center, cfg.init.radius, design_seed, edge)
    for x in design:
        submit_eval(0.0, x, "init")

    # Steps 2-3: react to completions until the pool drains.
    while executor.in_flight > 0:
        t, kind, ticket, result = executor.next_completion()
        if kind == "eval":
            pending.remove(ticket)
            status, value = result
            attempts += 1
            if status == "ok":
                obs_x.append(submitted_x[ticket])
                obs_y.append(value)
                log.append(t, "eval_completed", ticket=ticket, y=value)
            else:
                failures += 1
                log.append(t, "eval_failed", ticket=ticket, error=value)
                if (
                    attempts >= FAILURE_ABORT_MIN_ATTEMPTS
                    and failures > FAILURE_ABORT_FRACTION * attempts
                ):
                    raise RunAbortedError(
                        f"{failures}/{attempts} evaluations failed", log
                    )
            if budget_left(t):
                submit_inference(t)
        else:
            choice: Choice = result
            log.append(
                t,
                "inference_completed",
                ticket=ticket,
                choice={
                    "x_unit": [float(v) for v in choice.x],
                    "provenance": choice.provenance,
                    "diagnostics": choice.diagnostics.to_payload(),
                },
            )
            if choice.diagnostics.hypers is not None:
                warm = choice.diagnostics.hypers
            if budget_left(t):
                submit_eval(t, choice.x, choice.provenance)
    return log
