"""Grand coupling: many walkers driven by one noise stream.

All walkers in an ensemble consume the same (coordinate, uniform) pair each
step and pass it through the same quantile transform, which preserves
coordinatewise order between tagged pairs and never lets the sup-norm gap
grow.  There is no bespoke joint sampler: the coupling *is* shared noise,
so a walker's trajectory never depends on which other walkers ride along.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DimensionError, ValidationError
from .gibbs import NoiseStream, SamplerParams, StepNoise, make_noise_stream
from .truncnorm import trunc_quantile

_DEFAULT_BLOCK = 1024


@dataclass(frozen=True)
class CoupledEnsemble:
    """Walkers advanced in lockstep; ``ordered_pairs`` lists (lo, hi) index
    pairs whose coordinatewise order is asserted to hold."""

    positions: np.ndarray  # (walkers, d)
    step: int = 0
    ordered_pairs: tuple[tuple[int, int], ...] = ()


@dataclass(frozen=True)
class CoupledRunResult:
    ensemble: CoupledEnsemble
    record_steps: np.ndarray
    gap_records: np.ndarray  # (records, pairs): sup-norm gap per tagged pair
    order_min: float  # most negative tagged-pair coordinate gap ever seen
    gap_increase_max: float  # largest single-step sup-gap increase
    t_prime: int | None = None
    censored: bool = False


@dataclass(frozen=True)
class SandwichResult:
    """Three-walker record: starts at 0, the probe point, and 1."""

    record_steps: np.ndarray
    sup_gap: np.ndarray  # gap between the two extreme walkers per record
    t_prime: int | None
    censored: bool
    order_min: float
    gap_increase_max: float
    final: np.ndarray


def make_ensemble(states, ordered_pairs=()) -> CoupledEnsemble:
    pos = np.array([np.asarray(s, dtype=np.float64) for s in states])
    if pos.ndim != 2:
        raise DimensionError("all walkers must be vectors of equal length")
    for lo, hi in ordered_pairs:
        if not (0 <= lo < pos.shape[0] and 0 <= hi < pos.shape[0]):
            raise ValidationError(f"ordered pair ({lo},{hi}) out of range")
        if np.any(pos[hi] - pos[lo] < 0):
            raise ValidationError(f"ordered pair ({lo},{hi}) does not hold at start")
    pos.setflags(write=False)
    return CoupledEnsemble(positions=pos, step=0, ordered_pairs=tuple(ordered_pairs))


def coupled_step(ensemble: CoupledEnsemble, params: SamplerParams, noise: StepNoise) -> CoupledEnsemble:
    """One shared-noise update of every walker (reference path)."""
    d = params.network.d
    pos = ensemble.positions
    if pos.shape[1] != d:
        raise DimensionError(f"walker dimension {pos.shape[1]} != network d={d}")
    i = noise.index
    new = np.array(pos)
    for w in range(pos.shape[0]):
        ph = _kernels.row_dot(params.row_weights[i], new[w])
        new[w, i] = trunc_quantile(params.sigmas[i], ph, noise.u)
    new.setflags(write=False)
    return CoupledEnsemble(positions=new, step=ensemble.step + 1, ordered_pairs=ensemble.ordered_pairs)


def _pair_arrays(ensemble: CoupledEnsemble) -> tuple[np.ndarray, np.ndarray]:
    if ensemble.ordered_pairs:
        lo = np.array([p[0] for p in ensemble.ordered_pairs], dtype=np.int64)
        hi = np.array([p[1] for p in ensemble.ordered_pairs], dtype=np.int64)
    else:
        lo = np.empty(0, dtype=np.int64)
        hi = np.empty(0, dtype=np.int64)
    return lo, hi


def run_coupled(
    ensemble: CoupledEnsemble,
    params: SamplerParams,
    k: int,
    stream: NoiseStream,
    record_every: int | None = None,
    watch_zero_delta: float | None = None,
    block: int = _DEFAULT_BLOCK,
) -> CoupledRunResult:
    """Advance the ensemble ``k`` steps through the compiled kernel.

    Tracks order and sup-gap diagnostics for the tagged pairs at every
    step.  If ``watch_zero_delta`` is given, walker 0 is monitored for all
    coordinates reaching ``1 - 2*delta`` (the corner hitting time used by
    the sandwich construction).
    """
    d = params.network.d
    if ensemble.positions.shape[1] != d:
        raise DimensionError(f"walker dimension {ensemble.positions.shape[1]} != network d={d}")
    pos = np.array(ensemble.positions).reshape(1, *ensemble.positions.shape)
    lo, hi = _pair_arrays(ensemble)
    n_pairs = lo.shape[0]
    maxgap = np.empty((1, n_pairs))
    for j in range(n_pairs):
        maxgap[0, j] = float(np.max(pos[0, hi[j]] - pos[0, lo[j]]))
    order_min = np.full(1, np.inf)
    gap_excess = np.full(1, -np.inf)
    tp_thresh = -1.0
    if watch_zero_delta is not None:
        if not 0.0 < watch_zero_delta < 0.5:
            raise ValidationError("delta must lie in (0, 1/2) for corner hitting")
        tp_thresh = 1.0 - 2.0 * watch_zero_delta
    tp_active = np.array([True])
    tp_hit = np.full(1, -1, dtype=np.int64)
    if tp_thresh >= 0.0 and float(np.min(pos[0, 0])) >= tp_thresh:
        tp_active[0] = False
        tp_hit[0] = 0

    rec_every = record_every if record_every else max(1, -(-k // 2000))
    rec_steps: list[int] = []
    rec_gaps: list[np.ndarray] = []
    done = 0
    while done < k:
        b = min(block, k - done, rec_every - (done % rec_every))
        noise = stream.pair_block(b).reshape(1, b, 2)
        _kernels.advance_coupled(
            pos, params.row_weights, params.sigmas, noise, lo, hi,
            maxgap, order_min, gap_excess, tp_active, tp_hit, tp_thresh,
            ensemble.step + done,
        )
        done += b
        if done % rec_every == 0 or done == k:
            rec_steps.append(ensemble.step + done)
            rec_gaps.append(maxgap[0].copy())

    final_pos = pos[0].copy()
    final_pos.setflags(write=False)
    out = CoupledEnsemble(positions=final_pos, step=ensemble.step + k, ordered_pairs=ensemble.ordered_pairs)
    t_prime: int | None = None
    censored = False
    if tp_thresh >= 0.0:
        if tp_hit[0] >= 0:
            t_prime = int(tp_hit[0])
        else:
            censored = True
    return CoupledRunResult(
        ensemble=out,
        record_steps=np.array(rec_steps, dtype=np.int64),
        gap_records=np.array(rec_gaps) if rec_gaps else np.empty((0, n_pairs)),
        order_min=float(order_min[0]),
        gap_increase_max=float(gap_excess[0]),
        t_prime=t_prime,
        censored=censored,
    )


def sandwich_run(
    p0,
    params: SamplerParams,
    k: int,
    stream: NoiseStream,
    delta: float | None = None,
    record_every: int | None = None,
) -> SandwichResult:
    """Couple walkers from 0, from ``p0``, and from 1 on one stream.

    The extreme walkers bound every other start, so their sup-norm gap is a
    computable upper bound for the distance-to-stationarity statistic; the
    0-walker's corner hitting time is reported when ``delta`` is given.
    """
    d = params.network.d
    p0 = np.asarray(p0, dtype=np.float64)
    if p0.shape != (d,):
        raise DimensionError(f"p0 has shape {p0.shape}, expected ({d},)")
    ens = make_ensemble(
        [np.zeros(d), p0, np.ones(d)],
        ordered_pairs=((0, 1), (1, 2), (0, 2)),
    )
    res = run_coupled(ens, params, k, stream, record_every=record_every, watch_zero_delta=delta)
    return SandwichResult(
        record_steps=res.record_steps,
        sup_gap=res.gap_records[:, 2] if res.gap_records.size else np.empty(0),
        t_prime=res.t_prime,
        censored=res.censored,
        order_min=res.order_min,
        gap_increase_max=res.gap_increase_max,
        final=res.ensemble.positions,
    )


@dataclass(frozen=True)
class MixingGapResult:
    """Extreme-pair gap trajectories across replicas (d-infinity bound)."""

    record_steps: np.ndarray
    gaps: np.ndarray  # (replicas, records)
    mean_gap: np.ndarray
    coalesce_step: np.ndarray  # first recorded step with gap <= delta, -1 if none
    delta: float
    order_min: float
    gap_increase_max: float


def mixing_gap_trajectory(
    params: SamplerParams,
    k: int,
    replicas: int,
    seed: int,
    delta: float = 0.05,
    record_every: int | None = None,
    block: int = _DEFAULT_BLOCK,
) -> MixingGapResult:
    """Couple 0-start and 1-start walkers over many replicas.

    The per-step mean of the sup-norm gap upper-bounds the worst-case
    distance to stationarity at that step; replicas differ only by their
    noise stream.
    """
    d = params.network.d
    E = int(replicas)
    if E < 1:
        raise ValidationError("replicas must be >= 1")
    pos = np.empty((E, 2, d))
    pos[:, 0] = 0.0
    pos[:, 1] = 1.0
    lo = np.array([0], dtype=np.int64)
    hi = np.array([1], dtype=np.int64)
    maxgap = np.ones((E, 1))
    order_min = np.full(E, np.inf)
    gap_excess = np.full(E, -np.inf)
    tp_active = np.zeros(E, dtype=np.bool_)
    tp_hit = np.full(E, -1, dtype=np.int64)
    streams = [make_noise_stream(seed, r) for r in range(E)]

    rec_every = record_every if record_every else max(1, -(-k // 2000))
    rec_steps: list[int] = []
    recs: list[np.ndarray] = []
    noise = np.empty((E, block, 2))
    done = 0
    while done < k:
        b = min(block, k - done, rec_every - (done % rec_every))
        for r in range(E):
            noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance_coupled(
            pos, params.row_weights, params.sigmas, noise[:, :b], lo, hi,
            maxgap, order_min, gap_excess, tp_active, tp_hit, -1.0, done,
        )
        done += b
        if done % rec_every == 0 or done == k:
            rec_steps.append(done)
            recs.append(maxgap[:, 0].copy())

    gaps = np.array(recs).T  # (replicas, records)
    steps = np.array(rec_steps, dtype=np.int64)
    coalesce = np.full(E, -1, dtype=np.int64)
    for r in range(E):
        below = np.flatnonzero(gaps[r] <= delta)
        if below.size:
            coalesce[r] = steps[below[0]]
    return MixingGapResult(
        record_steps=steps,
        gaps=gaps,
        mean_gap=gaps.mean(axis=0),
        coalesce_step=coalesce,
        delta=float(delta),
        order_min=float(order_min.min()),
        gap_increase_max=float(gap_excess.max()),
    )
