"""Trajectory statistics: barycenter moments, energies, hitting times.

Batch drivers fan replicas over keyed noise streams and compiled kernels;
per-replica results are deterministic functions of (seed, replica) alone,
so aggregation order and thread count never change the numbers.  Means
over replicas use pairwise summation (numpy's reduce) for accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import HNotPositiveError, ValidationError
from .gibbs import NoiseStream, SamplerParams, make_noise_stream
from .network import Network
from .network import barycenter as _network_barycenter
from .network import spectral_summary

_BLOCK = 1024


def barycenter(n: Network, p) -> float:
    """Degree-weighted coordinate average; the diagonal projection."""
    return _network_barycenter(n, p)


@dataclass(frozen=True)
class HittingTimeResult:
    time: int  # steps until the condition held; k_max if censored
    censored: bool
    k_max: int
    delta: float
    replica: int = 0


@dataclass(frozen=True)
class EnergyTrajectory:
    record_steps: np.ndarray
    energies: np.ndarray
    identity_max_error: float


@dataclass(frozen=True)
class EnergyEnvelope:
    record_steps: np.ndarray
    mean_energy: np.ndarray
    se_energy: np.ndarray
    replicas: int
    bound: float  # steady-state part of the contraction bound


@dataclass(frozen=True)
class DeviationFrequency:
    frequency: float
    exceed_count: int
    replicas: int
    se3: float  # three binomial standard errors
    bound: float  # union-bound tail estimate; can exceed 1 (vacuous)
    delta: float
    k: int


@dataclass(frozen=True)
class BarycenterMoments:
    record_steps: np.ndarray
    mean_sq: np.ndarray  # E (bary - 1/2)^2
    se_sq: np.ndarray
    mean_abs: np.ndarray  # E |bary - 1/2|
    mean_bary: np.ndarray
    se_bary: np.ndarray
    replicas: int


@dataclass(frozen=True)
class DriftDiagnostic:
    increment_mean: float  # mean per-step change of the squared barycenter
    H: float  # analytic drift floor at (A, delta, beta, rho)
    total_increments: int
    replicas: int
    mean_hitting_time: float
    censored: int


@dataclass(frozen=True)
class MixingSummary:
    record_steps: np.ndarray
    mean_max_gap: np.ndarray
    mean_abs_dev: np.ndarray
    mean_sq_dev: np.ndarray
    replicas: int
    censored: int


def default_k_max(params: SamplerParams) -> int:
    """Censoring horizon: 100 * d * A^2, the scale mixing provably beats."""
    return int(math.ceil(100.0 * params.network.d * params.A * params.A))


def _hitting_driver(
    params: SamplerParams,
    use_phat: bool,
    streams: list[NoiseStream],
    k_max: int,
    thresh: float,
) -> np.ndarray:
    """Hit step per replica (-1 while censored), from the all-zeros start."""
    d = params.network.d
    R = len(streams)
    P = np.zeros((R, d))
    PHAT = np.zeros((R, d))
    hit = np.full(R, -1, dtype=np.int64)
    active = np.ones(R, dtype=np.bool_)
    if 0.0 >= thresh:  # condition already true at the start
        return np.zeros(R, dtype=np.int64)
    noise = np.empty((R, _BLOCK, 2))
    done = 0
    while done < k_max and active.any():
        b = min(_BLOCK, k_max - done)
        for r in range(R):
            if active[r]:
                noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance_hitting(
            P, PHAT, params.row_weights, params.sigmas, noise[:, :b],
            active, hit, done, use_phat, thresh,
        )
        done += b
    return hit


def hitting_time_T(params: SamplerParams, delta: float, stream: NoiseStream, k_max: int | None = None) -> HittingTimeResult:
    """First step where every averaged coordinate is within delta of 1."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta}")
    k_max = k_max if k_max is not None else default_k_max(params)
    hit = _hitting_driver(params, True, [stream], k_max, 1.0 - delta)
    censored = hit[0] < 0
    return HittingTimeResult(
        time=int(hit[0]) if not censored else k_max,
        censored=bool(censored), k_max=k_max, delta=delta, replica=stream.replica,
    )


def hitting_time_T_prime(params: SamplerParams, delta: float, stream: NoiseStream, k_max: int | None = None) -> HittingTimeResult:
    """First step where every raw coordinate is within 2*delta of 1."""
    if not 0.0 < delta <= 0.5:
        raise ValidationError(f"delta must lie in (0, 1/2], got {delta}")
    k_max = k_max if k_max is not None else default_k_max(params)
    hit = _hitting_driver(params, False, [stream], k_max, 1.0 - 2.0 * delta)
    censored = hit[0] < 0
    return HittingTimeResult(
        time=int(hit[0]) if not censored else k_max,
        censored=bool(censored), k_max=k_max, delta=delta, replica=stream.replica,
    )


def sample_hitting_times(
    params: SamplerParams,
    delta: float,
    kind: str,
    seed: int,
    replicas: int,
    k_max: int | None = None,
    replica_offset: int = 0,
) -> list[HittingTimeResult]:
    """Replicated hitting times; ``kind`` is ``"T"`` or ``"Tprime"``."""
    if kind == "T":
        if not 0.0 < delta <= 1.0:
            raise ValidationError(f"delta must lie in (0, 1], got {delta}")
        use_phat, thresh = True, 1.0 - delta
    elif kind == "Tprime":
        if not 0.0 < delta <= 0.5:
            raise ValidationError(f"delta must lie in (0, 1/2], got {delta}")
        use_phat, thresh = False, 1.0 - 2.0 * delta
    else:
        raise ValidationError(f"kind must be 'T' or 'Tprime', got {kind!r}")
    k_max = k_max if k_max is not None else default_k_max(params)
    streams = [make_noise_stream(seed, replica_offset + r) for r in range(replicas)]
    hits = _hitting_driver(params, use_phat, streams, k_max, thresh)
    return [
        HittingTimeResult(
            time=int(h) if h >= 0 else k_max,
            censored=bool(h < 0), k_max=k_max, delta=delta, replica=replica_offset + r,
        )
        for r, h in enumerate(hits)
    ]


def mean_hitting_time(results: list[HittingTimeResult]) -> tuple[float, float, int]:
    """(mean, standard error, censored count) over replicas."""
    times = np.array([r.time for r in results], dtype=np.float64)
    censored = sum(r.censored for r in results)
    se = float(times.std(ddof=1) / math.sqrt(len(times))) if len(times) > 1 else 0.0
    return float(times.mean()), se, censored


def energy_trajectory(
    params: SamplerParams,
    start,
    k: int,
    stream: NoiseStream,
    record_every: int | None = None,
) -> EnergyTrajectory:
    """Dirichlet energy along one run, with the per-step update identity
    (energy change = c_I*(noise^2 - residual^2)) checked against a fresh
    recomputation at every single step."""
    d = params.network.d
    p = np.array(start, dtype=np.float64)
    if p.shape != (d,):
        raise ValidationError(f"start has shape {p.shape}, expected ({d},)")
    rec = record_every if record_every else max(1, -(-k // 2000))
    n_rec = k // rec
    energies = np.empty(n_rec)
    noise = stream.pair_block(k)
    err = _kernels.run_energy_identity(
        p, params.row_weights, params.network.weights, params.network.degrees,
        params.sigmas, noise, rec, energies,
    )
    steps = rec * np.arange(1, n_rec + 1, dtype=np.int64)
    return EnergyTrajectory(record_steps=steps, energies=energies, identity_max_error=float(err))


def _batch_record(
    params: SamplerParams,
    start: np.ndarray,
    k: int,
    seed: int,
    replicas: int,
    record_every: int,
    want_energy: bool,
    replica_offset: int = 0,
) -> tuple[np.ndarray, np.ndarray, np.ndarray | None]:
    """Advance replicas in lockstep, recording barycenters (and energies)
    at the cadence.  Returns (steps, bary (R, n_rec), energy or None)."""
    d = params.network.d
    R = replicas
    P = np.tile(np.asarray(start, dtype=np.float64), (R, 1))
    streams = [make_noise_stream(seed, replica_offset + r) for r in range(R)]
    n_rec = k // record_every
    bary = np.empty((R, n_rec))
    energy = np.empty((R, n_rec)) if want_energy else None
    c = params.network.degrees
    w = params.network.weights
    noise = np.empty((R, _BLOCK, 2))
    done = 0
    rec_i = 0
    while done < k:
        b = min(_BLOCK, k - done, record_every - (done % record_every))
        for r in range(R):
            noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance(P, params.row_weights, params.sigmas, noise[:, :b])
        done += b
        if done % record_every == 0 and rec_i < n_rec:
            bary[:, rec_i] = P @ c
            if want_energy:
                diff = P[:, :, None] - P[:, None, :]
                energy[:, rec_i] = 0.5 * np.einsum("ij,rij->r", w, diff * diff)
            rec_i += 1
    steps = record_every * np.arange(1, n_rec + 1, dtype=np.int64)
    return steps, bary, energy


def run_batch(
    params: SamplerParams,
    start,
    k: int,
    seed: int,
    replicas: int,
    replica_offset: int = 0,
) -> np.ndarray:
    """Final states of independent replicas after ``k`` steps, as (R, d)."""
    d = params.network.d
    start = np.asarray(start, dtype=np.float64)
    if start.shape != (d,):
        raise ValidationError(f"start has shape {start.shape}, expected ({d},)")
    P = np.tile(start, (replicas, 1))
    streams = [make_noise_stream(seed, replica_offset + r) for r in range(replicas)]
    noise = np.empty((replicas, _BLOCK, 2))
    done = 0
    while done < k:
        b = min(_BLOCK, k - done)
        for r in range(replicas):
            noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance(P, params.row_weights, params.sigmas, noise[:, :b])
        done += b
    return P


def thinned_samples(
    params: SamplerParams,
    start,
    n_samples: int,
    thin: int,
    burn_in: int,
    seed: int,
    replicas: int = 64,
) -> np.ndarray:
    """Approximately independent draws from the chain's long-run law.

    Replicas burn in independently, then every ``thin``-th state is kept;
    the pool is the concatenation over replicas, shaped (n_samples, d).
    """
    d = params.network.d
    start = np.asarray(start, dtype=np.float64)
    R = min(replicas, n_samples)
    per = -(-n_samples // R)
    P = np.tile(start, (R, 1))
    streams = [make_noise_stream(seed, r) for r in range(R)]
    noise = np.empty((R, max(_BLOCK, thin), 2))
    done = 0
    while done < burn_in:
        b = min(_BLOCK, burn_in - done)
        for r in range(R):
            noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance(P, params.row_weights, params.sigmas, noise[:, :b])
        done += b
    out = np.empty((R * per, d))
    for i in range(per):
        for r in range(R):
            noise[r, :thin] = streams[r].pair_block(thin)
        _kernels.advance(P, params.row_weights, params.sigmas, noise[:, :thin])
        out[i * R:(i + 1) * R] = P
    return out[:n_samples]


def energy_envelope(
    params: SamplerParams,
    k: int,
    seed: int,
    replicas: int,
    record_every: int | None = None,
    start_value: float = 0.5,
) -> EnergyEnvelope:
    """Replica-mean Dirichlet energy from a diagonal start, against the
    steady-state part 5d/(2*lambda*A^2) of the contraction bound."""
    rec = record_every if record_every else max(1, -(-k // 2000))
    start = np.full(params.network.d, float(start_value))
    steps, _, energy = _batch_record(params, start, k, seed, replicas, rec, True)
    spec = spectral_summary(params.network)
    bound = 5.0 * params.network.d / (2.0 * spec.lam * params.A ** 2)
    return EnergyEnvelope(
        record_steps=steps,
        mean_energy=energy.mean(axis=0),
        se_energy=energy.std(axis=0, ddof=1) / math.sqrt(replicas),
        replicas=replicas,
        bound=bound,
    )


def deviation_event_frequency(
    params: SamplerParams,
    delta: float,
    k: int,
    replicas: int,
    seed: int,
    start_value: float = 0.5,
) -> DeviationFrequency:
    """Empirical probability that some coordinate strays delta away from
    some averaged coordinate within k steps, from a diagonal start."""
    if not 0.0 < delta <= 1.0:
        raise ValidationError(f"delta must lie in (0, 1], got {delta}")
    d = params.network.d
    R = replicas
    P = np.full((R, d), float(start_value))
    PHAT = np.zeros((R, d))
    exceeded = np.zeros(R, dtype=np.bool_)
    maxdev = np.zeros(R)
    active = np.ones(R, dtype=np.bool_)
    streams = [make_noise_stream(seed, r) for r in range(R)]
    noise = np.empty((R, _BLOCK, 2))
    done = 0
    while done < k and active.any():
        b = min(_BLOCK, k - done)
        for r in range(R):
            if active[r]:
                noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance_deviation(
            P, PHAT, params.row_weights, params.sigmas, noise[:, :b],
            active, exceeded, maxdev, delta,
        )
        done += b
    count = int(exceeded.sum())
    freq = count / R
    spec = spectral_summary(params.network)
    bound = 13.0 * k * math.exp(-spec.lam * spec.beta * delta * params.A / (2.0 * d))
    se3 = 3.0 * math.sqrt(max(freq * (1.0 - freq), 1.0 / R) / R)
    return DeviationFrequency(
        frequency=freq, exceed_count=count, replicas=R, se3=se3,
        bound=bound, delta=delta, k=k,
    )


def barycenter_moment_trajectory(
    params: SamplerParams,
    k: int,
    replicas: int,
    seed: int,
    record_every: int | None = None,
    replica_offset: int = 0,
) -> BarycenterMoments:
    """Moments of the barycenter around 1/2 from the centered start."""
    rec = record_every if record_every else max(1, -(-k // 2000))
    start = np.full(params.network.d, 0.5)
    steps, bary, _ = _batch_record(params, start, k, seed, replicas, rec, False, replica_offset)
    dev = bary - 0.5
    sq = dev * dev
    R = replicas
    return BarycenterMoments(
        record_steps=steps,
        mean_sq=sq.mean(axis=0),
        se_sq=sq.std(axis=0, ddof=1) / math.sqrt(R),
        mean_abs=np.abs(dev).mean(axis=0),
        mean_bary=bary.mean(axis=0),
        se_bary=bary.std(axis=0, ddof=1) / math.sqrt(R),
        replicas=R,
    )


def variance_growth_bound(params: SamplerParams, k_values: np.ndarray) -> np.ndarray:
    """Linear-in-k envelope 27*k*gamma/(lambda*A^2) for the squared
    barycenter deviation from the centered start."""
    spec = spectral_summary(params.network)
    return 27.0 * np.asarray(k_values, dtype=np.float64) * spec.gamma / (spec.lam * params.A ** 2)


def drift_floor(params: SamplerParams, delta: float, rho: float) -> float:
    """Analytic lower bound for the squared-barycenter drift before the
    hitting time; positive only once A clears the graph-dependent knee."""
    d = params.network.d
    A = params.A
    beta = float(np.min(params.network.degrees))
    if beta <= 0.0:
        raise ValidationError("drift floor needs every degree positive")
    H = rho / (2.0 * d * A * A) - (2.0 * math.sqrt(2.0) / (A * math.sqrt(d))) * math.exp(-delta * delta * beta * A * A)
    if A < 1.0 / (2.0 * beta) or H <= 0.0:
        raise HNotPositiveError(
            f"drift floor is not positive at A={A}, delta={delta}, beta={beta}, rho={rho}: H={H:.3e}"
        )
    return H


def drift_diagnostic(
    params: SamplerParams,
    delta: float,
    stream: NoiseStream,
    k_max: int | None,
    rho: float,
) -> DriftDiagnostic:
    """Single-replica empirical drift of the squared barycenter before the
    averaged-coordinate hitting time, from the all-zeros start."""
    return _drift_batch(params, delta, [stream], k_max, rho)


def drift_diagnostic_batch(
    params: SamplerParams,
    delta: float,
    seed: int,
    replicas: int,
    k_max: int | None,
    rho: float,
) -> DriftDiagnostic:
    streams = [make_noise_stream(seed, r) for r in range(replicas)]
    return _drift_batch(params, delta, streams, k_max, rho)


def _drift_batch(
    params: SamplerParams,
    delta: float,
    streams: list[NoiseStream],
    k_max: int | None,
    rho: float,
) -> DriftDiagnostic:
    if not 0.0 < delta < 1.0:
        raise ValidationError(f"delta must lie in (0, 1), got {delta}")
    H = drift_floor(params, delta, rho)  # raises when non-positive
    k_max = k_max if k_max is not None else default_k_max(params)
    d = params.network.d
    R = len(streams)
    P = np.zeros((R, d))
    PHAT = np.zeros((R, d))
    hit = np.full(R, -1, dtype=np.int64)
    active = np.ones(R, dtype=np.bool_)
    incr_sum = np.zeros(R)
    incr_cnt = np.zeros(R, dtype=np.int64)
    noise = np.empty((R, _BLOCK, 2))
    done = 0
    while done < k_max and active.any():
        b = min(_BLOCK, k_max - done)
        for r in range(R):
            if active[r]:
                noise[r, :b] = streams[r].pair_block(b)
        _kernels.advance_drift(
            P, PHAT, params.row_weights, params.network.degrees, params.sigmas,
            noise[:, :b], active, hit, done, 1.0 - delta, incr_sum, incr_cnt,
        )
        done += b
    total = int(incr_cnt.sum())
    times = np.where(hit >= 0, hit, k_max).astype(np.float64)
    return DriftDiagnostic(
        increment_mean=float(incr_sum.sum() / total) if total else 0.0,
        H=H,
        total_increments=total,
        replicas=R,
        mean_hitting_time=float(times.mean()),
        censored=int((hit < 0).sum()),
    )


def mixing_summary(
    params: SamplerParams,
    k: int,
    replicas: int,
    seed: int,
    delta: float = 0.05,
    record_every: int | None = None,
) -> MixingSummary:
    """Gap and barycenter views of mixing on one recording grid.

    Coupled extreme walkers give the distance upper-bound statistic; an
    independent batch from the centered start gives the barycenter spread.
    The two batches use disjoint replica keys of the same seed.
    """
    from .coupling import mixing_gap_trajectory

    rec = record_every if record_every else max(1, -(-k // 2000))
    gap = mixing_gap_trajectory(params, k, replicas, seed, delta=delta, record_every=rec)
    # disjoint replica keys: the moment batch must not reuse the coupled streams
    moments = barycenter_moment_trajectory(params, k, replicas, seed, record_every=rec, replica_offset=replicas)
    return MixingSummary(
        record_steps=gap.record_steps,
        mean_max_gap=gap.mean_gap,
        mean_abs_dev=moments.mean_abs,
        mean_sq_dev=moments.mean_sq,
        replicas=replicas,
        censored=int((gap.coalesce_step < 0).sum()),
    )
