"""Independent brute-force references used to validate the fast paths.

Nothing here shares numerical kernels with the main modules: the normal
density is written out directly, window masses come from the same
quadrature as the moments (never from a CDF routine), and quantiles are
inverted by bisection.  Agreement between these references and the
analytic implementations is therefore evidence, not tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import FeasibilityError, OracleError, ValidationError
from .gibbs import NoiseStream
from .network import Network, symmetrized_laplacian

_RANGE_SIGMAS = 38.0  # density underflows past this many scales
_PILOT = 10_000
_PROPOSAL_BUDGET = 100_000_000
_BATCH = 65_536


@lru_cache(maxsize=None)
def _gl_nodes(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _window(sigma: float, p: float) -> tuple[float, float]:
    return max(-p, -_RANGE_SIGMAS * sigma), min(1.0 - p, _RANGE_SIGMAS * sigma)


def _moment_integrals(sigma: float, p: float, panels: int, order: int = 48):
    """(m0, m1, m2) of exp(-x^2 / 2 sigma^2) over the noise window."""
    lo, hi = _window(sigma, p)
    xi, wi = _gl_nodes(order)
    edges = np.linspace(lo, hi, panels + 1)
    mid = (edges[:-1] + edges[1:]) / 2.0
    half = (edges[1:] - edges[:-1]) / 2.0
    x = mid[:, None] + half[:, None] * xi[None, :]
    w = half[:, None] * wi[None, :]
    dens = np.exp(-0.5 * (x / sigma) ** 2)
    m0 = float(np.sum(w * dens))
    m1 = float(np.sum(w * dens * x))
    m2 = float(np.sum(w * dens * x * x))
    return m0, m1, m2


def quad_moments(sigma: float, p: float) -> tuple[float, float]:
    """(mean, variance) of the conditioned noise by adaptive quadrature.

    Two refinement levels must agree to 1e-12 absolutely, else the result
    is refined once more and a persisting mismatch raises
    :class:`OracleError`.
    """
    if not (0.0 < sigma < math.inf):
        raise ValidationError(f"sigma must be a positive real, got {sigma}")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p must lie in [0, 1], got {p}")

    def stats(panels):
        m0, m1, m2 = _moment_integrals(sigma, p, panels)
        mean = m1 / m0
        return mean, m2 / m0 - mean * mean

    prev = stats(12)
    for panels in (24, 48, 96):
        cur = stats(panels)
        if abs(cur[0] - prev[0]) <= 1e-12 and abs(cur[1] - prev[1]) <= 1e-12:
            return cur
        prev = cur
    raise OracleError(f"moment quadrature did not settle at sigma={sigma}, p={p}")


def quad_cdf(sigma: float, p: float, x: float) -> float:
    """CDF of ``p + noise`` at ``x``, mass and tail from the same quadrature."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"x must lie in [0, 1], got {x}")
    lo, hi = _window(sigma, p)
    z = min(max(x - p, lo), hi)
    xi, wi = _gl_nodes(48)

    def integral(a, b, panels=24):
        if b <= a:
            return 0.0
        edges = np.linspace(a, b, panels + 1)
        mid = (edges[:-1] + edges[1:]) / 2.0
        half = (edges[1:] - edges[:-1]) / 2.0
        xx = mid[:, None] + half[:, None] * xi[None, :]
        ww = half[:, None] * wi[None, :]
        return float(np.sum(ww * np.exp(-0.5 * (xx / sigma) ** 2)))

    total = integral(lo, hi)
    return min(1.0, max(0.0, integral(lo, z) / total))


def quantile_by_bisection(sigma: float, p: float, u: float, tol: float = 1e-12) -> float:
    """Invert the quadrature CDF on [0, 1] by plain bisection."""
    if not 0.0 <= u <= 1.0:
        raise ValidationError(f"u must lie in [0, 1], got {u}")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if quad_cdf(sigma, p, mid) < u:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


@dataclass(frozen=True)
class RhoEstimate:
    """Grid minimum of variance(sigma, p) / sigma^2 over sigma in (0, 1]."""

    value: float
    sigma: float
    p: float
    resolution: float


def estimate_rho(grid: int = 60, refinements: int = 2) -> RhoEstimate:
    """Numerical floor for the noise variance ratio on sigma <= 1.

    Scans the (sigma, p) rectangle, then locally refines around the
    minimizing cell; the exact constant is only known to exist, so callers
    must treat the returned value as an estimate tied to its resolution.
    """

    def ratio_grid(sig_lo, sig_hi, p_lo, p_hi, n):
        sigs = np.linspace(sig_lo, sig_hi, n)
        ps = np.linspace(p_lo, p_hi, n + 1)
        best = (math.inf, sigs[0], ps[0])
        for s in sigs:
            for q in ps:
                m0, m1, m2 = _moment_integrals(s, q, panels=16, order=32)
                mean = m1 / m0
                var = m2 / m0 - mean * mean
                r = var / (s * s)
                if r < best[0]:
                    best = (r, float(s), float(q))
        return best, (sigs[1] - sigs[0], ps[1] - ps[0])

    (val, s_best, p_best), (ds, dp) = ratio_grid(1.0 / grid, 1.0, 0.0, 1.0, grid)
    for _ in range(refinements):
        s_lo = max(1e-4, s_best - ds)
        s_hi = min(1.0, s_best + ds)
        p_lo = max(0.0, p_best - dp)
        p_hi = min(1.0, p_best + dp)
        (val, s_best, p_best), (ds, dp) = ratio_grid(s_lo, s_hi, p_lo, p_hi, grid // 2)
    mean, var = quad_moments(s_best, p_best)
    value = var / (s_best * s_best)
    if not 0.0 < value < 1.0:
        raise OracleError(f"variance-ratio floor {value} escaped (0, 1)")
    return RhoEstimate(value=value, sigma=s_best, p=p_best, resolution=max(ds, dp))


@dataclass(frozen=True)
class StationarySample:
    samples: np.ndarray
    barycenters: np.ndarray
    energies: np.ndarray
    acceptance_rate: float
    proposals: int


def _energies(w: np.ndarray, batch: np.ndarray) -> np.ndarray:
    diff = batch[:, :, None] - batch[:, None, :]
    return 0.5 * np.einsum("ij,rij->r", w, diff * diff)


def rejection_sample_stationary(n: Network, A: float, count: int, stream: NoiseStream) -> StationarySample:
    """Exact i.i.d. draws from the target law by uniform-proposal rejection.

    Valid because the energy is non-negative, so exp(-A^2 * energy) <= 1 is
    a bona fide acceptance probability.  A pilot batch estimates the
    acceptance rate up front and refuses hopeless runs instead of looping
    forever.
    """
    if A < 0:
        raise ValidationError(f"A must be non-negative, got {A}")
    if count < 1:
        raise ValidationError("count must be >= 1")
    d = n.d
    w = n.weights
    a2 = A * A

    def propose(m):
        raw = stream.take(m * (d + 1)).reshape(m, d + 1)
        pts = raw[:, :d]
        acc = raw[:, d] <= np.exp(-a2 * _energies(w, pts))
        return pts[acc]

    kept = [propose(_PILOT)]
    got = kept[0].shape[0]
    proposals = _PILOT
    rate = got / _PILOT
    projected = rate * _PROPOSAL_BUDGET
    if projected < max(10, count):
        raise FeasibilityError(
            f"pilot acceptance rate {rate:.2e} projects {projected:.0f} acceptances "
            f"within the {_PROPOSAL_BUDGET:.0e}-proposal budget; need {max(10, count)}"
        )
    while got < count:
        if proposals >= _PROPOSAL_BUDGET:
            raise FeasibilityError(f"exceeded the proposal budget with {got}/{count} samples")
        batch = propose(_BATCH)
        proposals += _BATCH
        got += batch.shape[0]
        kept.append(batch)
    samples = np.concatenate(kept)[:count]
    return StationarySample(
        samples=samples,
        barycenters=samples @ n.degrees,
        energies=_energies(w, samples),
        acceptance_rate=got / proposals if proposals else 1.0,
        proposals=proposals,
    )


def _det3(m) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def _cubic_roots(b: float, c: float, d: float) -> list[float]:
    """Real roots of x^3 + b x^2 + c x + d (all real for our matrices)."""
    p = c - b * b / 3.0
    q = 2.0 * b ** 3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    if abs(p) < 1e-14:
        t = math.copysign(abs(q) ** (1.0 / 3.0), -q)
        return [t + shift] * 3
    m = 2.0 * math.sqrt(max(-p / 3.0, 0.0))
    arg = 3.0 * q / (p * m) if m > 0 else 0.0
    arg = min(1.0, max(-1.0, arg))
    theta = math.acos(arg) / 3.0
    return [m * math.cos(theta - 2.0 * math.pi * k / 3.0) + shift for k in range(3)]


def _quartic_roots(b: float, c: float, d: float, e: float) -> list[float]:
    """Real roots of x^4 + b x^3 + c x^2 + d x + e via Ferrari's method."""
    p = c - 3.0 * b * b / 8.0
    q = d - b * c / 2.0 + b ** 3 / 8.0
    r = e - b * d / 4.0 + b * b * c / 16.0 - 3.0 * b ** 4 / 256.0
    shift = -b / 4.0
    if abs(q) < 1e-13:
        disc = max(p * p - 4.0 * r, 0.0)
        y2a = (-p + math.sqrt(disc)) / 2.0
        y2b = (-p - math.sqrt(disc)) / 2.0
        roots = []
        for y2 in (y2a, y2b):
            y = math.sqrt(max(y2, 0.0))
            roots.extend([y + shift, -y + shift])
        return roots
    # resolvent cubic in s^2; take the largest root for a stable split
    zs = _cubic_roots(2.0 * p, p * p - 4.0 * r, -q * q)
    s2 = max(zs)
    s = math.sqrt(max(s2, 0.0))
    mlo = (p + s2 - q / s) / 2.0
    mhi = (p + s2 + q / s) / 2.0
    roots = []
    for sgn, m in ((1.0, mlo), (-1.0, mhi)):
        half = math.sqrt(max(s2 / 4.0 - m, 0.0))
        roots.extend([-sgn * s / 2.0 + half + shift, -sgn * s / 2.0 - half + shift])
    return roots


def small_d_eigencheck(n: Network) -> np.ndarray:
    """Laplacian spectrum for d <= 4 from the characteristic polynomial.

    Closed-form quadratic/cubic solutions and Ferrari's quartic; no
    iterative eigensolver or companion matrix anywhere near this path.
    """
    d = n.d
    if d > 4:
        raise ValidationError("closed-form eigencheck only covers d <= 4")
    s = symmetrized_laplacian(n)
    if d == 2:
        t = s[0, 0] + s[1, 1]
        det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
        disc = math.sqrt(max(t * t - 4.0 * det, 0.0))
        return np.sort([(t - disc) / 2.0, (t + disc) / 2.0])
    if d == 3:
        e1 = float(np.trace(s))
        e2 = sum(
            s[i, i] * s[j, j] - s[i, j] ** 2
            for i in range(3) for j in range(i + 1, 3)
        )
        e3 = _det3(s)
        return np.sort(_cubic_roots(-e1, e2, -e3))
    e1 = float(np.trace(s))
    e2 = sum(
        s[i, i] * s[j, j] - s[i, j] ** 2
        for i in range(4) for j in range(i + 1, 4)
    )
    e3 = 0.0
    for rows in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        sub = [[s[i, j] for j in rows] for i in rows]
        e3 += _det3(sub)
    e4 = 0.0  # 4x4 determinant by cofactors along the first row
    for j in range(4):
        cols = [c for c in range(4) if c != j]
        sub = [[s[i, c] for c in cols] for i in range(1, 4)]
        e4 += ((-1.0) ** j) * s[0, j] * _det3(sub)
    return np.sort(_quartic_roots(-e1, e2, -e3, e4))


def edge2_barycenter_pdf(A: float, grid: int = 4001) -> tuple[np.ndarray, np.ndarray]:
    """Density of the barycenter for the single-edge two-vertex network.

    Integrates the difference coordinate out numerically (the window of
    the difference shrinks linearly toward the corners), then normalizes
    on a uniform grid over [0, 1].
    """
    xi, wi = _gl_nodes(64)
    m = np.linspace(0.0, 1.0, grid)
    t = 2.0 * np.minimum(m, 1.0 - m)
    # integral of exp(-A^2 z^2 / 2) over [-t, t] by mapping nodes onto [0, t]
    half = t / 2.0
    z = half[:, None] * (xi[None, :] + 1.0)
    dens = 2.0 * np.sum(half[:, None] * wi[None, :] * np.exp(-0.5 * (A * z) ** 2), axis=1)
    norm = np.trapezoid(dens, m)
    return m, dens / norm


def edge2_barycenter_abs_moment(A: float) -> float:
    """E |barycenter - 1/2| for the single-edge network, by quadrature."""
    m, pdf = edge2_barycenter_pdf(A)
    return float(np.trapezoid(np.abs(m - 0.5) * pdf, m))


def edge2_barycenter_band_mass(A: float, s: float) -> float:
    """P(barycenter in [s, 1-s]) for the single-edge network."""
    if not 0.0 <= s <= 0.5:
        raise ValidationError(f"s must lie in [0, 1/2], got {s}")
    m, pdf = edge2_barycenter_pdf(A)
    inside = (m >= s) & (m <= 1.0 - s)
    return float(np.trapezoid(np.where(inside, pdf, 0.0), m))


def edge2_energy_cdf(A: float, values: np.ndarray) -> np.ndarray:
    """CDF of the Dirichlet energy under the single-edge stationary law.

    The energy is half the squared coordinate difference, whose marginal
    density is the triangular kernel damped by the Gaussian factor.
    """
    xi, wi = _gl_nodes(64)
    vals = np.atleast_1d(np.asarray(values, dtype=np.float64))
    t = np.sqrt(np.clip(2.0 * vals, 0.0, 1.0))

    def mass(upper):
        half = upper / 2.0
        z = half[:, None] * (xi[None, :] + 1.0)
        return 2.0 * np.sum(
            half[:, None] * wi[None, :] * (1.0 - z) * np.exp(-0.5 * (A * z) ** 2), axis=1
        )

    return mass(t) / mass(np.array([1.0]))[0]
