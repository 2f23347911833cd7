"""Restarted continuous search with adaptive constraint reweighting.

One restart draws a uniform start point, ascends to a local optimum,
rounds it (one sign rounding plus K randomized roundings), and verifies
every candidate with the BDD-free checker.  If the optimum rounds to a
violating assignment, the violated constraints' weights are multiplied by
r and the ascent restarts from the same local optimum; after T such
trials the outer loop does a fresh random restart.  Reaching the
continuous target F = total weight certifies satisfiability, and the
sign rounding of such a point is a solution.

MaxSAT mode runs the same loop but never stops early at a feasible
point: it keeps the hard-feasible assignment of least soft-violation
cost seen anywhere in the run.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .bdd import MrBdd, build_formula
from .engine import MessageBuffers, top_down, value_and_gradient
from .formula import Formula, WeightMap, check_formula, constraint_length
from .optimizer import OptimizerConfig, ascend

WEIGHT_CAP = 1e12

MODE_SAT = "sat"
MODE_MAXSAT = "maxsat"

STATUS_SAT = "sat_found"
STATUS_UNKNOWN = "unknown"


@dataclass(frozen=True)
class SolverConfig:
    restarts: int = 100
    trials_per_restart: int = 8
    weight_factor: float = 2.0
    seed: int = 0
    timeout: float | None = None
    mode: str = MODE_SAT
    roundings_per_trial: int = 10
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    workers: int = 1

    def __post_init__(self):
        if self.weight_factor <= 1:
            raise ValueError("weight_factor must exceed 1")
        if self.trials_per_restart < 1 or self.roundings_per_trial < 1:
            raise ValueError("trials_per_restart and roundings_per_trial must be >= 1")
        if self.mode not in (MODE_SAT, MODE_MAXSAT):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass
class Solution:
    status: str
    assignment: np.ndarray | None
    best_objective: float
    best_cost: float
    trials_used: int
    restarts_used: int
    wall_time: float
    gradient_calls: int = 0
    trial_log: list = field(default_factory=list)


def init_weights(f: Formula, mode: str = MODE_SAT) -> WeightMap:
    """Starting weights: constraint length (SAT) or soft/hard split (MaxSAT)."""
    if mode == MODE_SAT:
        return WeightMap([float(constraint_length(c)) for c in f.constraints])
    if mode != MODE_MAXSAT:
        raise ValueError(f"unknown mode {mode!r}")
    if not f.has_soft:
        raise ValueError("maxsat mode requires at least one soft constraint")
    soft_total = sum(wt for wt, s in zip(f.soft_weights, f.soft) if s)
    hard_weight = soft_total + 1.0
    return WeightMap([f.soft_weights[i] if f.soft[i] else hard_weight
                      for i in range(f.m)])


def reweight(w: WeightMap, unsatisfied, r: float) -> WeightMap:
    """Multiply violated constraints' weights by r, renormalizing huge scales.

    When the updated maximum exceeds 1e12 every weight is divided by that
    maximum; uniform positive scaling leaves the objective's maximizers
    unchanged.
    """
    if r <= 1:
        raise ValueError("weight factor must exceed 1")
    values = w.values.copy()
    ids = list(unsatisfied)
    if ids:
        values[ids] *= r
    peak = values.max() if values.size else 0.0
    if peak > WEIGHT_CAP:
        values /= peak
    return WeightMap(values)


def round_randomized(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Independently set each bit True with probability (1 - a_i)/2."""
    u = rng.random(a.size)
    return np.where(u < (1.0 - a) * 0.5, -1, 1).astype(np.int8)


def round_sign(a: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Nearest vertex; exact zeros break ties with a fair coin."""
    b = np.sign(a)
    zeros = b == 0
    if zeros.any():
        b[zeros] = rng.integers(0, 2, int(zeros.sum())) * 2 - 1
    return b.astype(np.int8)


class _Budget:
    """Deadline shared by every nested loop of one solve call."""

    def __init__(self, timeout: float | None):
        self.start = time.monotonic()
        self.deadline = None if timeout is None else self.start + timeout

    def expired(self) -> bool:
        return self.deadline is not None and time.monotonic() >= self.deadline

    def elapsed(self) -> float:
        return time.monotonic() - self.start


class _Search:
    """Mutable state of one solve call (one worker)."""

    def __init__(self, f: Formula, cfg: SolverConfig, mrbdd: MrBdd,
                 on_best: Callable[[float], None] | None = None):
        self.f = f
        self.cfg = cfg
        self.mrbdd = mrbdd
        self.on_best = on_best
        self.buffers = MessageBuffers()
        self.score_weights = init_weights(f, cfg.mode)
        self.soft_w = np.asarray(f.soft_weights)
        self.is_soft = np.asarray(f.soft, dtype=bool)
        self.best_b: np.ndarray | None = None
        self.best_objective = -np.inf
        self.best_cost = np.inf
        self.best_feasible = False
        self.gradient_calls = 0
        self.trials_used = 0
        self.restarts_used = 0
        self.trial_log: list[dict] = []
        self.solved: np.ndarray | None = None

    def consider(self, b: np.ndarray) -> bool:
        """Verify one candidate vertex; True means the search can stop."""
        sat_weight, unsat = check_formula(self.f, b, self.score_weights)
        if self.cfg.mode == MODE_SAT:
            if sat_weight > self.best_objective:
                self.best_objective = sat_weight
                self.best_b = b.copy()
            if not unsat:
                self.solved = b.copy()
                return True
            return False
        self.best_objective = max(self.best_objective, sat_weight)
        hard_ok = all(self.is_soft[i] for i in unsat)
        if hard_ok:
            cost = float(sum(self.soft_w[i] for i in unsat))
            if not self.best_feasible or cost < self.best_cost:
                self.best_feasible = True
                self.best_cost = cost
                self.best_b = b.copy()
                if self.on_best is not None:
                    self.on_best(cost)
            if not unsat:
                self.solved = b.copy()
                return True
        elif not self.best_feasible and self.best_b is None:
            self.best_b = b.copy()
        return False


def _run_search(
    search: _Search,
    rng: np.random.Generator,
    budget: _Budget,
    restart_indices: Sequence[int],
    stop_requested: Callable[[], bool] | None = None,
    on_trial: Callable[[dict], None] | None = None,
) -> None:
    f, cfg, mrbdd = search.f, search.cfg, search.mrbdd
    buffers = search.buffers
    n = f.n

    def externally_stopped() -> bool:
        return budget.expired() or (stop_requested is not None and stop_requested())

    for j in restart_indices:
        if externally_stopped() or search.solved is not None:
            return
        w = init_weights(f, cfg.mode)
        x = rng.uniform(-1.0, 1.0, n)
        search.restarts_used += 1
        for t in range(cfg.trials_per_restart):
            if externally_stopped():
                return

            def eval_grad(a, _w=w):
                search.gradient_calls += 1
                return value_and_gradient(mrbdd, a, _w, buffers)

            def eval_value(a, _w=w):
                return top_down(mrbdd, a, _w, buffers)[0]

            trial = ascend(eval_grad, x, target=w.total, cfg=cfg.optimizer,
                           evaluate_value=eval_value, should_stop=externally_stopped)
            search.trials_used += 1
            x_star = trial.x_star
            b_sign = round_sign(x_star, rng)
            candidates = [b_sign] + [round_randomized(x_star, rng)
                                     for _ in range(cfg.roundings_per_trial)]
            done = False
            for b in candidates:
                if search.consider(b):
                    done = True
                    break
            _, unsat_sign = check_formula(f, b_sign, search.score_weights)
            record = {
                "restart": j,
                "trial": t,
                "start": "x0" if t == 0 else "x_star",
                "value": trial.value,
                "target": w.total,
                "reason": trial.converged_reason,
                "iters": trial.iters,
                "sign_rounding_violations": len(unsat_sign),
            }
            search.trial_log.append(record)
            if on_trial is not None:
                on_trial(record)
            if done:
                return
            w = reweight(w, unsat_sign, cfg.weight_factor)
            x = x_star


def _finish(search: _Search, budget: _Budget) -> Solution:
    solved = search.solved is not None
    if search.cfg.mode == MODE_SAT:
        status = STATUS_SAT if solved else STATUS_UNKNOWN
        assignment = search.solved if solved else search.best_b
    else:
        status = STATUS_SAT if search.best_feasible else STATUS_UNKNOWN
        assignment = search.best_b
    best_objective = search.best_objective if np.isfinite(search.best_objective) else 0.0
    return Solution(
        status=status,
        assignment=assignment,
        best_objective=best_objective,
        best_cost=search.best_cost,
        trials_used=search.trials_used,
        restarts_used=search.restarts_used,
        wall_time=budget.elapsed(),
        gradient_calls=search.gradient_calls,
        trial_log=search.trial_log,
    )


def _baselines(search: _Search, n: int) -> None:
    # all-True and all-False cost baselines, checked once up front
    for b in (np.full(n, -1, np.int8), np.full(n, 1, np.int8)):
        if search.consider(b):
            return


def _solve(
    f: Formula, cfg: SolverConfig,
    on_trial: Callable[[dict], None] | None = None,
    on_best: Callable[[float], None] | None = None,
    mrbdd: MrBdd | None = None,
) -> Solution:
    budget = _Budget(cfg.timeout)
    if mrbdd is None:
        mrbdd = build_formula(f)
    if cfg.workers > 1:
        return _solve_parallel(f, cfg, budget, mrbdd, on_trial, on_best)
    search = _Search(f, cfg, mrbdd, on_best)
    if cfg.mode == MODE_MAXSAT:
        _baselines(search, f.n)
    if search.solved is None:
        rng = np.random.default_rng(cfg.seed)
        _run_search(search, rng, budget, range(cfg.restarts), None, on_trial)
    return _finish(search, budget)


def _solve_parallel(f, cfg, budget, mrbdd, on_trial, on_best):
    """Independent restarts on a thread pool; first verified answer wins."""
    import threading
    from concurrent.futures import ThreadPoolExecutor

    lock = threading.Lock()
    found = threading.Event()
    global_best = [np.inf]
    searches: list[_Search] = []

    def shared_on_best(cost: float) -> None:
        with lock:
            if cost < global_best[0]:
                global_best[0] = cost
                if on_best is not None:
                    on_best(cost)

    def shared_on_trial(record: dict) -> None:
        if on_trial is not None:
            with lock:
                on_trial(record)

    def worker(idx: int) -> None:
        search = _Search(f, cfg, mrbdd, shared_on_best)
        with lock:
            searches.append(search)
        if cfg.mode == MODE_MAXSAT and idx == 0:
            _baselines(search, f.n)
        if search.solved is None:
            rng = np.random.default_rng(cfg.seed ^ idx)
            _run_search(search, rng, budget, range(idx, cfg.restarts, cfg.workers),
                        stop_requested=found.is_set, on_trial=shared_on_trial)
        if search.solved is not None and cfg.mode == MODE_SAT:
            found.set()

    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        list(pool.map(worker, range(cfg.workers)))

    merged = _Search(f, cfg, mrbdd)
    for s in searches:
        merged.trials_used += s.trials_used
        merged.restarts_used += s.restarts_used
        merged.gradient_calls += s.gradient_calls
        merged.trial_log.extend(s.trial_log)
        for b in (s.solved, s.best_b):
            if b is not None and merged.solved is None:
                merged.consider(b)
    return _finish(merged, budget)


def solve_sat(
    f: Formula, cfg: SolverConfig,
    on_trial: Callable[[dict], None] | None = None,
    mrbdd: MrBdd | None = None,
) -> Solution:
    """Search for a fully satisfying assignment; incomplete, never proves UNSAT."""
    if cfg.mode != MODE_SAT:
        raise ValueError("solve_sat requires mode 'sat'")
    return _solve(f, cfg, on_trial, mrbdd=mrbdd)


def solve_maxsat(
    f: Formula, cfg: SolverConfig,
    on_trial: Callable[[dict], None] | None = None,
    on_best: Callable[[float], None] | None = None,
    mrbdd: MrBdd | None = None,
) -> Solution:
    """Minimize violated soft weight subject to the hard constraints."""
    if cfg.mode != MODE_MAXSAT:
        raise ValueError("solve_maxsat requires mode 'maxsat'")
    return _solve(f, cfg, on_trial, on_best, mrbdd=mrbdd)


def incomplete_score(found_cost: float, best_known_cost: float) -> float:
    """Quality in [0, 1] relative to the best known cost; 0 when infeasible."""
    if found_cost < 0 or best_known_cost < 0:
        raise ValueError("costs must be nonnegative")
    if not np.isfinite(found_cost):
        return 0.0
    return (best_known_cost + 1.0) / (found_cost + 1.0)
