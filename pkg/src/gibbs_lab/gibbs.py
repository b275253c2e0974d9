"""Single-site Gibbs kernel: one-coordinate updates and reproducible runs.

A step picks a uniform coordinate, replaces it by its neighborhood
average, and perturbs with truncated-normal noise whose scale comes from
the coordinate's degree.  Each step consumes exactly two uniforms from a
counter-based stream, in fixed order (coordinate first, then the noise
quantile), which makes trajectories replayable and lets any family of
chains share one stream as a grand coupling.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import ValidationError
from .network import Network
from .truncnorm import trunc_quantile

_MASK64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class ChainState:
    """Point of the chain plus the step counter for replay."""

    p: np.ndarray
    step: int = 0


@dataclass(frozen=True)
class StepNoise:
    """Shared randomness of one step: coordinate index and one uniform."""

    index: int
    u: float


@dataclass(frozen=True)
class SamplerParams:
    """Network plus scaling constant, with per-coordinate noise scales.

    ``sigmas[i] = 1 / (A * sqrt(2 * c_i))``, infinite exactly when the
    vertex is isolated (that coordinate resamples uniformly).
    ``row_weights`` holds the degree-normalized rows of the weight matrix,
    so a row dot with the state gives the neighborhood average.
    """

    A: float
    network: Network
    sigmas: np.ndarray
    row_weights: np.ndarray


def make_sampler_params(network: Network, A: float) -> SamplerParams:
    if not (math.isfinite(A) and A > 0):
        raise ValidationError(f"A must be a positive real, got {A}")
    c = network.degrees
    with np.errstate(divide="ignore"):
        sigmas = np.where(c > 0, 1.0 / (A * np.sqrt(2.0 * c)), np.inf)
        rows = np.where(c[:, None] > 0, network.weights / np.where(c, c, 1.0)[:, None], 0.0)
    sigmas = np.ascontiguousarray(sigmas)
    rows = np.ascontiguousarray(rows)
    sigmas.setflags(write=False)
    rows.setflags(write=False)
    return SamplerParams(A=float(A), network=network, sigmas=sigmas, row_weights=rows)


class NoiseStream:
    """Counter-based uniform stream, splittable by (seed, replica) key.

    Backed by Philox: streams for distinct keys are statistically
    independent, and the draw sequence depends only on how many uniforms
    have been consumed, never on the sizes of individual requests.
    """

    _FILL = 8192

    def __init__(self, seed: int, replica: int = 0):
        if replica < 0:
            raise ValidationError("replica must be non-negative")
        self.seed = int(seed)
        self.replica = int(replica)
        key = np.array([self.seed & _MASK64, self.replica & _MASK64], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))
        self._cache = np.empty(0, dtype=np.float64)
        self._cursor = 0
        self.position = 0  # uniforms consumed so far

    def take(self, n: int) -> np.ndarray:
        """Next ``n`` uniforms in [0, 1).

        The generator is consumed value by value, so any partitioning of
        requests yields the same overall sequence; small requests are
        served out of a refillable cache to amortize generator calls.
        """
        out = np.empty(n, dtype=np.float64)
        got = min(self._cache.size - self._cursor, n)
        if got:
            out[:got] = self._cache[self._cursor:self._cursor + got]
            self._cursor += got
        rest = n - got
        if rest:
            if rest <= self._FILL // 2:
                self._cache = self._gen.random(self._FILL)
                out[got:] = self._cache[:rest]
                self._cursor = rest
            else:
                out[got:] = self._gen.random(rest)
        self.position += n
        return out

    def next_noise(self, d: int) -> StepNoise:
        """One step's worth of randomness: index uniform, then value uniform."""
        raw = self.take(2)
        return StepNoise(_index_from_uniform(float(raw[0]), d), float(raw[1]))

    def pair_block(self, n: int) -> np.ndarray:
        """``(n, 2)`` array of (index uniform, value uniform) rows."""
        return self.take(2 * n).reshape(n, 2)


def _index_from_uniform(u: float, d: int) -> int:
    i = int(u * d)
    return d - 1 if i >= d else i


def make_noise_stream(seed: int, replica: int = 0) -> NoiseStream:
    return NoiseStream(seed, replica)


def step(state: ChainState, params: SamplerParams, noise: StepNoise) -> ChainState:
    """Apply one Gibbs update; only coordinate ``noise.index`` changes."""
    d = params.network.d
    if not 0 <= noise.index < d:
        raise ValidationError(f"noise index {noise.index} out of range for d={d}")
    p = np.array(state.p, dtype=np.float64)
    if p.shape != (d,):
        raise ValidationError(f"state has shape {p.shape}, expected ({d},)")
    i = noise.index
    ph = _kernels.row_dot(params.row_weights[i], p)
    p[i] = trunc_quantile(params.sigmas[i], ph, noise.u)
    p.setflags(write=False)
    return ChainState(p=p, step=state.step + 1)


def iter_run(initial: ChainState, params: SamplerParams, k: int, stream: NoiseStream):
    """Lazily yield the states after each of ``k`` steps."""
    d = params.network.d
    state = initial
    for _ in range(k):
        state = step(state, params, stream.next_noise(d))
        yield state


def run(
    initial: ChainState,
    params: SamplerParams,
    k: int,
    stream: NoiseStream,
    observer=None,
    block: int = 1024,
) -> ChainState:
    """Advance ``k`` steps and return the final state.

    With an ``observer`` callable the chain goes through the per-step
    reference path and ``observer(state)`` runs after every update; without
    one, updates run through the compiled block kernel (bit-identical
    trajectory, no per-step Python cost).
    """
    if k < 0:
        raise ValidationError("k must be non-negative")
    if k == 0:
        return initial
    if observer is not None:
        state = initial
        for state in iter_run(initial, params, k, stream):
            observer(state)
        return state
    p = np.array(initial.p, dtype=np.float64).reshape(1, -1)
    if p.shape[1] != params.network.d:
        raise ValidationError(f"state length {p.shape[1]} != d={params.network.d}")
    done = 0
    while done < k:
        b = min(block, k - done)
        noise = stream.pair_block(b).reshape(1, b, 2)
        _kernels.advance(p, params.row_weights, params.sigmas, noise)
        done += b
    out = p[0].copy()
    out.setflags(write=False)
    return ChainState(p=out, step=initial.step + k)


def start_vector(kind: str, d: int) -> np.ndarray:
    """Named starting points: ``zero``, ``half``, or ``one``."""
    if kind == "zero":
        return np.zeros(d)
    if kind == "half":
        return np.full(d, 0.5)
    if kind == "one":
        return np.ones(d)
    raise ValidationError(f"unknown start {kind!r}")


def resolve_threads(explicit: int | None = None) -> int:
    """Worker count: explicit flag, then GIBBS_LAB_THREADS, then all cores."""
    import numba

    if explicit is None:
        env = os.environ.get("GIBBS_LAB_THREADS")
        explicit = int(env) if env else None
    n = explicit if explicit else numba.config.NUMBA_DEFAULT_NUM_THREADS
    n = max(1, min(int(n), numba.config.NUMBA_DEFAULT_NUM_THREADS))
    numba.set_num_threads(n)
    return n
