"""Exact event-driven simulation of the two-type reducible BBM.

Type-1 particles branch at rate beta, emit one type-2 founder at rate alpha
and diffuse with variance sigma2; type-2 particles branch at rate 1 with unit
variance.  Positions are only sampled at events and at the query time, so
there is no discretisation error.  All randomness is a pure function of
``(seed, run index, lineage)``: results do not depend on traversal order or
on how runs are spread across worker threads.
"""

from __future__ import annotations

import enum
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernel
from ._rng import ROOT_LINEAGE, split_seed
from .params import InvalidParameterError, ModelParams

DEFAULT_MAX_POPULATION = 5_000_000
CHUNK_RUNS = 256


class PopulationOverflowError(RuntimeError):
    """A run exceeded ``max_population``; ``run`` and ``seed`` identify it."""

    def __init__(self, seed: int, run: int, max_population: int, completed: int = 0):
        self.seed = seed
        self.run = run
        self.max_population = max_population
        self.completed = completed
        super().__init__(
            f"run {run} (seed {seed}) exceeded max_population={max_population}"
        )


class Kind(enum.IntEnum):
    TYPE1 = _kernel.TYPE1
    TYPE2 = _kernel.TYPE2


@dataclass(frozen=True)
class SimConfig:
    t_end: float
    seed: int
    max_population: int = DEFAULT_MAX_POPULATION
    level_thresholds: tuple[float, ...] = ()

    def __post_init__(self):
        t = self.t_end
        if isinstance(t, bool) or not isinstance(t, (int, float)) or not math.isfinite(t) or t < 0:
            raise InvalidParameterError(f"t_end must be finite and >= 0, got {t!r}")
        object.__setattr__(self, "t_end", float(t))
        split_seed(self.seed)
        if isinstance(self.max_population, bool) or not isinstance(self.max_population, int) \
                or self.max_population < 1:
            raise InvalidParameterError(f"max_population must be a positive integer, got {self.max_population!r}")
        levels = tuple(float(x) for x in self.level_thresholds)
        if any(math.isnan(x) for x in levels):
            raise InvalidParameterError("level thresholds must not be NaN")
        object.__setattr__(self, "level_thresholds", levels)


@dataclass(frozen=True)
class Particle:
    kind: Kind
    position: float
    clock_origin: float


def _opt(x: float) -> Optional[float]:
    return None if x == -math.inf else float(x)


@dataclass(frozen=True)
class SimResult:
    t: float
    m_global: float
    m_type1: Optional[float]
    m_type2: Optional[float]
    n_type1: int
    n_type2: int
    level_counts: tuple[int, ...] = ()
    level_counts_type2: tuple[int, ...] = ()

    def to_dict(self, seed: Optional[int] = None, run: Optional[int] = None) -> dict:
        rec: dict = {}
        if seed is not None:
            rec["seed"] = seed
        if run is not None:
            rec["run"] = run
        rec.update({
            "t": self.t,
            "m_global": self.m_global,
            "m_type1": self.m_type1,
            "m_type2": self.m_type2,
            "n1": self.n_type1,
            "n2": self.n_type2,
            "levels": list(self.level_counts),
            "levels2": list(self.level_counts_type2),
        })
        return rec

    def to_ndjson(self, seed: Optional[int] = None, run: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(seed, run), separators=(",", ":"))


@dataclass(frozen=True)
class _Model:
    beta: float
    alpha: float
    sigma: float

    @classmethod
    def two_type(cls, params: ModelParams) -> "_Model":
        if not isinstance(params, ModelParams):
            raise InvalidParameterError(f"expected ModelParams, got {type(params).__name__}")
        return cls(params.beta, params.alpha, params.sigma)

    @classmethod
    def single(cls, sigma2: float, beta: float) -> "_Model":
        p = ModelParams(beta, sigma2, 0.0)
        return cls(p.beta, 0.0, p.sigma)


@dataclass
class BatchResult:
    """Per-run outputs of :func:`simulate_batch`, indexed by run offset."""

    t: float
    seed: int
    first_run: int
    status: np.ndarray
    max1: np.ndarray
    max2: np.ndarray
    n1: np.ndarray
    n2: np.ndarray
    counts1: np.ndarray
    counts2: np.ndarray

    def __len__(self) -> int:
        return self.status.shape[0]

    @property
    def m_global(self) -> np.ndarray:
        return np.maximum(self.max1, self.max2)

    @property
    def hit(self) -> np.ndarray:
        return self.status == _kernel.STATUS_HIT

    def result(self, i: int) -> SimResult:
        if self.status[i] == _kernel.STATUS_HIT:
            raise ValueError(f"run {self.first_run + i} stopped early at its first hit")
        m1, m2 = float(self.max1[i]), float(self.max2[i])
        return SimResult(
            self.t, max(m1, m2), _opt(m1), _opt(m2), int(self.n1[i]), int(self.n2[i]),
            tuple(int(c) for c in self.counts1[i]), tuple(int(c) for c in self.counts2[i]),
        )


def _thresholds(config: SimConfig) -> np.ndarray:
    return np.asarray(config.level_thresholds, dtype=np.float64)


def _run_chunk(model: _Model, config: SimConfig, runs: np.ndarray, stop_at: float):
    key0, key1 = split_seed(config.seed)
    thr = _thresholds(config)
    stack = _kernel.DEFAULT_STACK
    out = list(_kernel.run_batch(
        runs, key0, key1, ROOT_LINEAGE, model.beta, model.alpha, model.sigma,
        config.t_end, thr, config.max_population, stop_at, stack,
    ))
    # the rare run that outgrows the fixed stack is redone with a bigger one
    redo = np.flatnonzero(out[0] == _kernel.STATUS_STACK)
    while redo.size:
        stack *= 8
        part = _kernel.run_batch(
            runs[redo], key0, key1, ROOT_LINEAGE, model.beta, model.alpha, model.sigma,
            config.t_end, thr, config.max_population, stop_at, stack,
        )
        for arr, new in zip(out, part):
            arr[redo] = new
        redo = redo[part[0] == _kernel.STATUS_STACK]
    return out


def _resolve_workers(workers: Optional[int]) -> int:
    if workers is None:
        return 1
    if workers == 0:
        return os.cpu_count() or 1
    if workers < 0:
        raise ValueError(f"workers must be >= 0, got {workers}")
    return workers


def _batch(model: _Model, config: SimConfig, n_runs: int, first_run: int,
           workers: Optional[int], stop_at: float, allow_overflow: bool) -> BatchResult:
    if isinstance(n_runs, bool) or not isinstance(n_runs, int) or n_runs < 0:
        raise ValueError(f"n_runs must be a non-negative integer, got {n_runs!r}")
    if first_run < 0 or first_run + n_runs > 2**32:
        raise ValueError("run indices must fit in 32 bits")
    runs = np.arange(first_run, first_run + n_runs, dtype=np.uint64)
    # chunk boundaries do not depend on the worker count
    chunks = [runs[i:i + CHUNK_RUNS] for i in range(0, n_runs, CHUNK_RUNS)]
    n_workers = _resolve_workers(workers)
    if n_workers == 1 or len(chunks) <= 1:
        parts = [_run_chunk(model, config, c, stop_at) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(lambda c: _run_chunk(model, config, c, stop_at), chunks))
    n_thr = len(config.level_thresholds)
    if parts:
        cols = [np.concatenate([p[j] for p in parts]) for j in range(7)]
    else:
        cols = [np.zeros(0, np.int8), np.zeros(0), np.zeros(0), np.zeros(0, np.int64),
                np.zeros(0, np.int64), np.zeros((0, n_thr), np.int64), np.zeros((0, n_thr), np.int64)]
    result = BatchResult(config.t_end, config.seed, first_run, *cols)
    if not allow_overflow:
        bad = np.flatnonzero(result.status == _kernel.STATUS_OVERFLOW)
        if bad.size:
            i = int(bad[0])
            raise PopulationOverflowError(config.seed, first_run + i, config.max_population, i)
    return result


def simulate_batch(params: ModelParams, config: SimConfig, n_runs: int, *,
                   first_run: int = 0, workers: Optional[int] = None,
                   stop_at: float = math.inf, allow_overflow: bool = False) -> BatchResult:
    """Independent two-type runs ``first_run .. first_run + n_runs - 1`` under one seed.

    Run ``i`` is the same realisation whatever the batch size or ``workers``
    (``0`` means one thread per CPU).  A finite ``stop_at`` stops each run at
    its first particle at or above that level, which is all a tail estimate
    needs; such runs report ``hit`` and only partial counts.
    """
    return _batch(_Model.two_type(params), config, n_runs, first_run, workers, stop_at, allow_overflow)


def simulate_single_batch(sigma2: float, beta: float, config: SimConfig, n_runs: int, *,
                          first_run: int = 0, workers: Optional[int] = None,
                          stop_at: float = math.inf, allow_overflow: bool = False) -> BatchResult:
    """Batch version of :func:`simulate_single`."""
    return _batch(_Model.single(sigma2, beta), config, n_runs, first_run, workers, stop_at, allow_overflow)


@dataclass
class SimState:
    """Population alive at time ``t`` for one run, resumable with :meth:`advance`.

    Besides the positions, each particle keeps the segment it is part of, so
    advancing replays exactly the realisation a direct longer run would see.
    """

    model: _Model
    seed: int
    run: int
    t: float
    kinds: np.ndarray
    seg_t0: np.ndarray
    seg_y0: np.ndarray
    lineage: np.ndarray
    positions: np.ndarray
    max_population: int = DEFAULT_MAX_POPULATION
    level_thresholds: tuple[float, ...] = field(default=())

    def __len__(self) -> int:
        return self.kinds.shape[0]

    @property
    def particles(self) -> list[Particle]:
        return [Particle(Kind(int(k)), float(y), self.t) for k, y in zip(self.kinds, self.positions)]

    def advance(self, s: float) -> tuple[SimResult, "SimState"]:
        """Continue the same realisation for ``s`` more time units."""
        if not s >= 0 or not math.isfinite(s):
            raise ValueError(f"advance needs a finite s >= 0, got {s}")
        return _walk(self.model, self.seed, self.run, self.t + s, self.max_population,
                     self.level_thresholds, self.kinds, self.seg_t0, self.seg_y0, self.lineage)


def _walk(model: _Model, seed: int, run: int, t_end: float, max_population: int,
          levels: tuple[float, ...], kinds, t0, y0, lin) -> tuple[SimResult, SimState]:
    key0, key1 = split_seed(seed)
    thr = np.asarray(levels, dtype=np.float64)
    stack = _kernel.DEFAULT_STACK

    def call(n_keep: int):
        nonlocal stack
        fk = np.empty(n_keep, np.int8)
        ft, fy, fp = np.empty(n_keep), np.empty(n_keep), np.empty(n_keep)
        fl = np.empty(n_keep, np.uint64)
        while True:
            out = _kernel.run_segments(
                kinds, t0, y0, lin, key0, key1, np.uint64(run),
                model.beta, model.alpha, model.sigma, t_end,
                thr, max_population, math.inf, stack, fk, ft, fy, fl, fp,
            )
            if out[0] != _kernel.STATUS_STACK:
                return out, (fk, ft, fy, fl, fp)
            stack *= 8

    # first pass sizes the frontier, the second fills it
    out, _ = call(0)
    if out[0] == _kernel.STATUS_OVERFLOW:
        raise PopulationOverflowError(seed, run, max_population)
    n = int(out[3] + out[4])
    out, (fk, ft, fy, fl, fp) = call(n)
    status, m1, m2, n1, n2, c1, c2 = out
    result = SimResult(
        t_end, max(m1, m2), _opt(m1), _opt(m2), int(n1), int(n2),
        tuple(int(c) for c in c1), tuple(int(c) for c in c2),
    )
    state = SimState(model, seed, run, t_end, fk, ft, fy, fl, fp, max_population, levels)
    return result, state


def _root():
    return (np.full(1, _kernel.TYPE1, np.int8), np.zeros(1), np.zeros(1),
            np.full(1, ROOT_LINEAGE, np.uint64))


def _start(model: _Model, config: SimConfig, run: int) -> tuple[SimResult, SimState]:
    return _walk(model, config.seed, run, config.t_end, config.max_population,
                 config.level_thresholds, *_root())


def simulate_two_type(params: ModelParams, config: SimConfig, *, run: int = 0) -> SimResult:
    """One two-type run from a single type-1 particle at the origin."""
    return _batch(_Model.two_type(params), config, 1, run, 1, math.inf, False).result(0)


def simulate_single(sigma2: float, beta: float, config: SimConfig, *, run: int = 0) -> SimResult:
    """One binary BBM run with branching rate ``beta`` and variance ``sigma2``."""
    return _batch(_Model.single(sigma2, beta), config, 1, run, 1, math.inf, False).result(0)


def start_two_type(params: ModelParams, config: SimConfig, *, run: int = 0) -> tuple[SimResult, SimState]:
    """Like :func:`simulate_two_type` but also returns the resumable population."""
    return _start(_Model.two_type(params), config, run)


def start_single(sigma2: float, beta: float, config: SimConfig, *, run: int = 0) -> tuple[SimResult, SimState]:
    return _start(_Model.single(sigma2, beta), config, run)


def results_of(batch: BatchResult) -> Sequence[SimResult]:
    return [batch.result(i) for i in range(len(batch))]
