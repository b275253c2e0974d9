"""Compiled inner loops shared by the chain, coupling, and statistics code.

Every kernel advances states with the exact same scalar operations as the
reference ``gibbs.step`` path (same row dot, same quantile), so batched
runs are bit-identical to step-by-step runs.  Noise arrives as ``(..., 2)``
blocks of uniforms: column 0 picks the coordinate, column 1 feeds the
quantile transform.

Where a kernel needs the full neighborhood-average vector per step (hitting
conditions, deviation tracking) it maintains the vector incrementally in
O(d) per step and re-derives it from scratch at every block boundary to
keep rounding drift bounded; the value used for the update itself is always
a fresh row dot.
"""

import numpy as np
from numba import njit, prange

from .truncnorm import trunc_quantile


@njit(cache=True)
def row_dot(row: np.ndarray, p: np.ndarray) -> float:
    s = 0.0
    for j in range(row.shape[0]):
        s += row[j] * p[j]
    return s


@njit(cache=True)
def compute_phat(p: np.ndarray, row_w: np.ndarray, out: np.ndarray) -> None:
    for j in range(p.shape[0]):
        out[j] = row_dot(row_w[j], p)


@njit(cache=True)
def pairwise_energy(p: np.ndarray, weights: np.ndarray) -> float:
    d = p.shape[0]
    e = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            diff = p[i] - p[j]
            e += weights[i, j] * diff * diff
    return e


@njit(cache=True, parallel=True)
def advance(P: np.ndarray, row_w: np.ndarray, sigmas: np.ndarray, noise: np.ndarray) -> None:
    """Plain block advance of independent chains, in place."""
    R, d = P.shape
    B = noise.shape[1]
    for r in prange(R):
        p = P[r]
        for t in range(B):
            i = int(noise[r, t, 0] * d)
            if i >= d:
                i = d - 1
            ph = row_dot(row_w[i], p)
            p[i] = trunc_quantile(sigmas[i], ph, noise[r, t, 1])


@njit(cache=True, parallel=True)
def advance_hitting(
    P: np.ndarray,
    PHAT: np.ndarray,
    row_w: np.ndarray,
    sigmas: np.ndarray,
    noise: np.ndarray,
    active: np.ndarray,
    hit_step: np.ndarray,
    start_step: int,
    use_phat: bool,
    thresh: float,
) -> None:
    """Advance until each replica's min coordinate (or min average) reaches
    ``thresh``; records the absolute step index of the first hit."""
    R, d = P.shape
    B = noise.shape[1]
    for r in prange(R):
        if not active[r]:
            continue
        p = P[r]
        ph = PHAT[r]
        compute_phat(p, row_w, ph)
        for t in range(B):
            i = int(noise[r, t, 0] * d)
            if i >= d:
                i = d - 1
            phi = row_dot(row_w[i], p)
            new = trunc_quantile(sigmas[i], phi, noise[r, t, 1])
            delta = new - p[i]
            p[i] = new
            for j in range(d):
                ph[j] += row_w[j, i] * delta
            ph[i] = phi
            vmin = 1.0e300
            if use_phat:
                for j in range(d):
                    if ph[j] < vmin:
                        vmin = ph[j]
            else:
                for j in range(d):
                    if p[j] < vmin:
                        vmin = p[j]
            if vmin >= thresh:
                hit_step[r] = start_step + t + 1
                active[r] = False
                break


@njit(cache=True, parallel=True)
def advance_drift(
    P: np.ndarray,
    PHAT: np.ndarray,
    row_w: np.ndarray,
    degrees: np.ndarray,
    sigmas: np.ndarray,
    noise: np.ndarray,
    active: np.ndarray,
    hit_step: np.ndarray,
    start_step: int,
    thresh: float,
    incr_sum: np.ndarray,
    incr_cnt: np.ndarray,
) -> None:
    """Hitting run (averaged-coordinate condition) that also accumulates the
    per-step increments of the squared barycenter up to and including the
    hitting step."""
    R, d = P.shape
    B = noise.shape[1]
    for r in prange(R):
        if not active[r]:
            continue
        p = P[r]
        ph = PHAT[r]
        compute_phat(p, row_w, ph)
        b = 0.0
        for j in range(d):
            b += degrees[j] * p[j]
        for t in range(B):
            i = int(noise[r, t, 0] * d)
            if i >= d:
                i = d - 1
            phi = row_dot(row_w[i], p)
            new = trunc_quantile(sigmas[i], phi, noise[r, t, 1])
            delta = new - p[i]
            p[i] = new
            bnew = b + degrees[i] * delta
            incr_sum[r] += bnew * bnew - b * b
            incr_cnt[r] += 1
            b = bnew
            for j in range(d):
                ph[j] += row_w[j, i] * delta
            ph[i] = phi
            vmin = 1.0e300
            for j in range(d):
                if ph[j] < vmin:
                    vmin = ph[j]
            if vmin >= thresh:
                hit_step[r] = start_step + t + 1
                active[r] = False
                break


@njit(cache=True, parallel=True)
def advance_deviation(
    P: np.ndarray,
    PHAT: np.ndarray,
    row_w: np.ndarray,
    sigmas: np.ndarray,
    noise: np.ndarray,
    active: np.ndarray,
    exceeded: np.ndarray,
    maxdev: np.ndarray,
    delta: float,
) -> None:
    """Track the running max of |p_i - phat_j| over all pairs; a replica
    stops as soon as the threshold event has occurred."""
    R, d = P.shape
    B = noise.shape[1]
    for r in prange(R):
        if not active[r]:
            continue
        p = P[r]
        ph = PHAT[r]
        compute_phat(p, row_w, ph)
        for t in range(B):
            i = int(noise[r, t, 0] * d)
            if i >= d:
                i = d - 1
            phi = row_dot(row_w[i], p)
            new = trunc_quantile(sigmas[i], phi, noise[r, t, 1])
            delta_i = new - p[i]
            p[i] = new
            for j in range(d):
                ph[j] += row_w[j, i] * delta_i
            ph[i] = phi
            pmin = 1.0e300
            pmax = -1.0e300
            hmin = 1.0e300
            hmax = -1.0e300
            for j in range(d):
                if p[j] < pmin:
                    pmin = p[j]
                if p[j] > pmax:
                    pmax = p[j]
                if ph[j] < hmin:
                    hmin = ph[j]
                if ph[j] > hmax:
                    hmax = ph[j]
            dev = pmax - hmin
            if hmax - pmin > dev:
                dev = hmax - pmin
            if dev > maxdev[r]:
                maxdev[r] = dev
            if dev >= delta:
                exceeded[r] = True
                active[r] = False
                break


@njit(cache=True)
def run_energy_identity(
    p: np.ndarray,
    row_w: np.ndarray,
    weights: np.ndarray,
    degrees: np.ndarray,
    sigmas: np.ndarray,
    noise: np.ndarray,
    rec_every: int,
    energies: np.ndarray,
) -> float:
    """Single-chain run that checks, at every step, the exact update law of
    the Dirichlet energy (change = c_I * (noise^2 - pre-update residual^2))
    against a from-scratch recomputation.  Returns the worst discrepancy;
    fills ``energies`` with the fresh values at the recording cadence."""
    d = p.shape[0]
    B = noise.shape[0]
    e_prev = pairwise_energy(p, weights)
    max_err = 0.0
    n_rec = 0
    for t in range(B):
        i = int(noise[t, 0] * d)
        if i >= d:
            i = d - 1
        phi = row_dot(row_w[i], p)
        new = trunc_quantile(sigmas[i], phi, noise[t, 1])
        eps = new - phi
        resid = p[i] - phi
        rhs = degrees[i] * (eps * eps - resid * resid)
        p[i] = new
        e_new = pairwise_energy(p, weights)
        err = abs((e_new - e_prev) - rhs)
        if err > max_err:
            max_err = err
        e_prev = e_new
        if rec_every > 0 and (t + 1) % rec_every == 0 and n_rec < energies.shape[0]:
            energies[n_rec] = e_new
            n_rec += 1
    return max_err


@njit(cache=True, parallel=True)
def advance_coupled(
    P: np.ndarray,
    row_w: np.ndarray,
    sigmas: np.ndarray,
    noise: np.ndarray,
    pair_lo: np.ndarray,
    pair_hi: np.ndarray,
    maxgap: np.ndarray,
    order_min: np.ndarray,
    gap_excess: np.ndarray,
    tp_active: np.ndarray,
    tp_hit: np.ndarray,
    tp_thresh: float,
    start_step: int,
) -> None:
    """Advance ensembles of walkers under shared per-step noise.

    ``P`` has shape (ensembles, walkers, d); every walker in an ensemble
    shares the coordinate and quantile uniform of its step.  For each
    order-tagged pair the kernel tracks the most negative coordinate gap
    ever seen (``order_min``, >= 0 means order held throughout) and the
    largest single-step increase of the sup-norm gap (``gap_excess``,
    <= 0 means the gap never grew).  If ``tp_thresh`` >= 0, walker 0 is
    watched for all coordinates reaching the threshold.
    """
    E, W, d = P.shape
    B = noise.shape[1]
    n_pairs = pair_lo.shape[0]
    for e in prange(E):
        ens = P[e]
        for t in range(B):
            i = int(noise[e, t, 0] * d)
            if i >= d:
                i = d - 1
            u = noise[e, t, 1]
            for w in range(W):
                phi = row_dot(row_w[i], ens[w])
                ens[w, i] = trunc_quantile(sigmas[i], phi, u)
            for k in range(n_pairs):
                lo = pair_lo[k]
                hi = pair_hi[k]
                gmin = 1.0e300
                gmax = -1.0e300
                for j in range(d):
                    g = ens[hi, j] - ens[lo, j]
                    if g < gmin:
                        gmin = g
                    if g > gmax:
                        gmax = g
                if gmin < order_min[e]:
                    order_min[e] = gmin
                exc = gmax - maxgap[e, k]
                if exc > gap_excess[e]:
                    gap_excess[e] = exc
                maxgap[e, k] = gmax
            if tp_thresh >= 0.0 and tp_active[e]:
                vmin = 1.0e300
                for j in range(d):
                    if ens[0, j] < vmin:
                        vmin = ens[0, j]
                if vmin >= tp_thresh:
                    tp_hit[e] = start_step + t + 1
                    tp_active[e] = False
