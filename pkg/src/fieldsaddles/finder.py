"""Multistart Newton-Raphson enumeration of stationary points.

Random starts are split into fixed-size shards.  Shard ``k`` draws from
``numpy.random.default_rng(seed ^ k)``, so the start stream does not depend on
how many workers process it and a run with fewer starts sees a prefix of the
stream of a larger run.  Shards are refined and deduplicated independently
and merged in shard order by a single owner.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from . import _kernels
from .model import (
    SINGULAR_DISTANCE,
    ModelParams,
    SingularConfigurationError,
    as_configuration,
    potential_energy,
)
from .records import SaddleRecord
from .stability import analyze, exponents
from .symmetry import aligned_batch, canonicalize, classify, invariants

logger = logging.getLogger(__name__)

STATUS_NAMES = {
    _kernels.CONVERGED: "converged",
    _kernels.DIVERGED: "diverged",
    _kernels.SINGULAR: "singular",
    _kernels.MAX_ITERS: "max_iters",
}

MAX_REDRAWS = 100


@dataclass(frozen=True)
class SearchParams:
    """Budget, sampling box and tolerances of a multistart search."""

    n_starts: int = 100_000
    rng_seed: int = 0
    sample_rho_max: float = 4.0
    sample_z_range: Tuple[float, float] = (0.05, 4.0)
    newton_tol: float = 1e-10
    max_iters: int = 200
    step_clamp: float = 0.5
    dedup_tol: float = 1e-5
    require_downfield: bool = True
    shard_size: int = 10_000
    zero_tol: float = 1e-6

    def __post_init__(self):
        object.__setattr__(self, "sample_z_range", tuple(float(v) for v in self.sample_z_range))
        if self.n_starts < 1:
            raise ValueError("n_starts must be >= 1")
        if self.shard_size < 1:
            raise ValueError("shard_size must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not (0 <= self.rng_seed < 2**64):
            raise ValueError("rng_seed must fit in 64 unsigned bits")
        for name in ("sample_rho_max", "newton_tol", "step_clamp", "dedup_tol", "zero_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        lo, hi = self.sample_z_range
        if len(self.sample_z_range) != 2 or not lo < hi:
            raise ValueError("sample_z_range must be a nonempty interval (lo, hi)")

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["sample_z_range"] = list(self.sample_z_range)
        return d


@dataclass(frozen=True)
class NewtonResult:
    status: str
    config: Optional[np.ndarray]
    iterations: int
    residual: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def _draw(n: int, count: int, params: SearchParams, rng: np.random.Generator) -> np.ndarray:
    u = rng.random((count, n, 3))
    rho = params.sample_rho_max * np.sqrt(u[..., 0])
    phi = 2.0 * np.pi * u[..., 1]
    lo, hi = params.sample_z_range
    z = lo + (hi - lo) * u[..., 2]
    return np.stack([rho * np.cos(phi), rho * np.sin(phi), z], axis=-1)


def random_batch(n: int, count: int, params: SearchParams, rng: np.random.Generator) -> np.ndarray:
    """``count`` random starts, shape ``(count, n, 3)``; singular draws are redrawn."""
    out = _draw(n, count, params, rng)
    for _ in range(MAX_REDRAWS):
        bad = np.array([_kernels.min_separation(x.ravel(), n) < SINGULAR_DISTANCE for x in out])
        if not bad.any():
            return out
        out[bad] = _draw(n, int(bad.sum()), params, rng)
    raise RuntimeError("could not draw a nonsingular configuration")


def random_configuration(n: int, params: SearchParams, rng: np.random.Generator) -> np.ndarray:
    """One start: per electron z uniform, area-uniform radius, uniform azimuth."""
    return random_batch(n, 1, params, rng)[0]


def _model(n, model):
    if model is None:
        return ModelParams(n)
    if model.n_electrons != n:
        raise ValueError(f"model has {model.n_electrons} electrons, expected {n}")
    return model


def refine_batch(starts: np.ndarray, params: SearchParams, model: ModelParams):
    """Refine an array of starts ``(B, N, 3)``; returns ``(configs, status, iters, residual)``."""
    xs = np.ascontiguousarray(starts, dtype=float).reshape(len(starts), -1).copy()
    n = xs.shape[1] // 3
    status, iters, resid = _kernels.newton_batch(
        xs,
        n,
        model.nuclear_charge,
        model.field,
        params.newton_tol,
        params.max_iters,
        params.step_clamp,
        SINGULAR_DISTANCE,
    )
    return xs.reshape(-1, n, 3), status, iters, resid


def newton_refine(start, params: SearchParams = SearchParams(), model: Optional[ModelParams] = None) -> NewtonResult:
    """Clamped Newton-Raphson from one start.

    Numerical failure, including an already singular start, is reported
    through ``status`` (``converged``, ``diverged``, ``singular`` or
    ``max_iters``); only a malformed start raises.
    """
    try:
        pos = as_configuration(start)
    except SingularConfigurationError:
        return NewtonResult(status="singular", config=None, iterations=0, residual=float("nan"))
    model = _model(len(pos), model)
    configs, status, iters, resid = refine_batch(pos[None], params, model)
    name = STATUS_NAMES[int(status[0])]
    return NewtonResult(
        status=name,
        config=configs[0] if name == "converged" else None,
        iterations=int(iters[0]),
        residual=float(resid[0]),
    )


def _cluster(configs: np.ndarray, tol: float, reps=None):
    """Greedy assignment of configurations to representatives.

    Returns ``(reps, hits, labels)``; ``reps`` are configurations.  An
    existing list of representatives can be passed in and is extended.
    """
    reps = [] if reps is None else list(reps)
    hits = [0] * len(reps)
    labels = np.full(len(configs), -1, dtype=np.int64)
    if len(configs) == 0:
        return reps, hits, labels
    inv = invariants(configs)
    for k, rep in enumerate(reps):
        _assign(configs, inv, labels, rep, k, tol, hits)
    while True:
        free = np.flatnonzero(labels < 0)
        if free.size == 0:
            break
        rep = configs[free[0]]
        reps.append(rep)
        hits.append(0)
        _assign(configs, inv, labels, rep, len(reps) - 1, tol, hits)
        if labels[free[0]] < 0:  # pragma: no cover - a config always matches itself
            raise RuntimeError("representative failed to match itself")
    return reps, hits, labels


def match(configs: np.ndarray, reps: Sequence[np.ndarray], tol: float) -> np.ndarray:
    """Index of the representative each configuration is equivalent to, or -1."""
    labels = np.full(len(configs), -1, dtype=np.int64)
    if len(configs) == 0:
        return labels
    inv = invariants(configs)
    hits = [0] * len(reps)
    for k, rep in enumerate(reps):
        _assign(configs, inv, labels, rep, k, tol, hits)
    return labels


def _assign(configs, inv, labels, rep, k, tol, hits):
    free = np.flatnonzero(labels < 0)
    if free.size == 0:
        return
    rep_inv = invariants(rep)
    near = free[np.abs(inv[free] - rep_inv).max(axis=1) <= tol]
    if near.size == 0:
        return
    ok = near[aligned_batch(configs[near], rep, tol)]
    labels[ok] = k
    hits[k] += ok.size


@dataclass
class ShardResult:
    index: int
    reps: list
    hits: list
    status_counts: dict


def run_shard(n: int, index: int, count: int, params: SearchParams, model: ModelParams) -> ShardResult:
    rng = np.random.default_rng(params.rng_seed ^ index)
    starts = random_batch(n, count, params, rng)
    configs, status, _, _ = refine_batch(starts, params, model)
    counts = {name: int(np.sum(status == code)) for code, name in STATUS_NAMES.items()}
    keep = status == _kernels.CONVERGED
    if params.require_downfield:
        downfield = np.all(configs[..., 2] > 0, axis=1)
        counts["rejected_upfield"] = int(np.sum(keep & ~downfield))
        keep &= downfield
    reps, hits, _ = _cluster(configs[keep], params.dedup_tol)
    return ShardResult(index, reps, hits, counts)


def _shard_sizes(params: SearchParams):
    full, rest = divmod(params.n_starts, params.shard_size)
    sizes = [params.shard_size] * full
    if rest:
        sizes.append(rest)
    return sizes


def _run_shard_args(args):
    return run_shard(*args)


def default_workers() -> int:
    return max(1, int(os.environ.get("FIELDSADDLES_WORKERS", "1")))


def run_shards(n: int, params: SearchParams, model: ModelParams, workers: int = 1):
    jobs = [(n, k, size, params, model) for k, size in enumerate(_shard_sizes(params))]
    if workers <= 1 or len(jobs) == 1:
        for job in jobs:
            yield run_shard(*job)
        return
    with ProcessPoolExecutor(max_workers=workers) as pool:
        yield from pool.map(_run_shard_args, jobs)


def merge_shards(shards: Sequence[ShardResult], tol: float):
    """Single-owner merge of shard representatives, in shard order."""
    reps: list = []
    hits: list = []
    counts: dict = {}
    for shard in shards:
        for key, value in shard.status_counts.items():
            counts[key] = counts.get(key, 0) + value
        if not shard.reps:
            continue
        reps, new_hits, labels = _cluster(np.array(shard.reps), tol, reps)
        hits.extend([0] * (len(reps) - len(hits)))
        for label, h in zip(labels, shard.hits):
            hits[label] += h
    return reps, hits, counts


def make_records(
    n: int,
    reps,
    hits,
    params: SearchParams,
    model: ModelParams,
    sym_tol: Optional[float] = None,
    return_order: bool = False,
):
    """Analyse representatives and return records sorted by energy (``nu`` from 1).

    Energy ties are broken by the rounded invariant key.  With
    ``return_order`` also returns the representative index of each record.
    """
    sym_tol = params.dedup_tol if sym_tol is None else sym_tol
    rows = []
    for rep, h in zip(reps, hits):
        canon = canonicalize(rep, params.dedup_tol)
        pos = canon.oriented_config
        spec = analyze(pos, model, params.zero_tol)
        rep_exp = exponents(spec)
        rows.append(
            (
                potential_energy(pos, model),
                canon.invariant_key,
                dict(
                    n_u=rep_exp.n_u,
                    lambda_r=rep_exp.lambda_r,
                    mu=rep_exp.mu,
                    lambdas=rep_exp.lambdas,
                    symmetry=classify(pos, sym_tol),
                    positions=pos,
                    hits=int(h),
                ),
            )
        )
    order = sorted(range(len(rows)), key=lambda i: (rows[i][0], rows[i][1]))
    records = [
        SaddleRecord(n=n, nu=rank + 1, energy=rows[i][0], seed=params.rng_seed, **rows[i][2])
        for rank, i in enumerate(order)
    ]
    return (records, order) if return_order else records


def search(
    n: int,
    params: SearchParams = SearchParams(),
    model: Optional[ModelParams] = None,
    workers: int = 1,
    return_counts: bool = False,
):
    """Enumerate inequivalent stationary points for ``n`` electrons.

    Keeps converged refinements (all electrons downfield unless
    ``params.require_downfield`` is off), merges symmetry-equivalent ones and
    returns :class:`~fieldsaddles.records.SaddleRecord` objects sorted by
    energy with hit counts.  Results depend only on ``params``, never on
    ``workers``.  With ``return_counts`` also returns per-status start counts.
    """
    if n < 2:
        raise ValueError(f"search needs n >= 2, got {n}")
    model = _model(n, model)
    shards = run_shards(n, params, model, workers)
    reps, hits, counts = merge_shards(shards, params.dedup_tol)
    logger.info("n=%d: %d inequivalent stationary points, counts %s", n, len(reps), counts)
    records = make_records(n, reps, hits, params, model)
    return (records, counts) if return_counts else records
