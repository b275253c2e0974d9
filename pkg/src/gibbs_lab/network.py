"""Weighted networks: validation, normalization, Laplacian action and spectra.

A network is a symmetric non-negative weight matrix with zero diagonal,
rescaled so the degrees sum to one.  The degree vector is then the
stationary distribution of the weighted random walk, and the walk
Laplacian ``I - D^-1 C`` is self-adjoint under the degree-weighted inner
product.  All operations here are pure functions of immutable inputs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import (
    DimensionError,
    DisconnectedError,
    IsolatedVertexError,
    ValidationError,
    ZeroNetworkError,
)

MAX_VERTICES = 128
SYMMETRY_TOL = 1e-12
# Post-normalization weights below this count as absent edges for
# connectivity purposes only; they are never zeroed in arithmetic.
EDGE_EPS = 1e-15
JACOBI_TOL = 1e-14


@dataclass(frozen=True)
class Network:
    """Validated, normalized weighted network.

    ``weights`` is symmetric with zero diagonal and ``degrees.sum() == 1``
    up to rounding.  Both arrays are read-only.
    """

    d: int
    weights: np.ndarray
    degrees: np.ndarray
    connected: bool


@dataclass(frozen=True)
class SpectralSummary:
    """Walk-Laplacian spectrum and the three derived scalars.

    ``lam`` is the second-smallest eigenvalue (connectivity), ``gamma`` the
    largest distance of a nonzero-mode eigenvalue from 1 (walk mixing),
    ``beta`` the minimum degree (accessibility).
    """

    eigenvalues: np.ndarray
    lam: float
    gamma: float
    beta: float


@dataclass(frozen=True)
class Component:
    vertices: tuple[int, ...]
    network: Network
    weight_fraction: float


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


def _finish_network(weights: np.ndarray) -> Network:
    """Validate a raw weight matrix, normalize total degree to 1."""
    w = np.array(weights, dtype=np.float64)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValidationError(f"weight matrix must be square, got shape {w.shape}")
    d = w.shape[0]
    if d < 2:
        raise ValidationError(f"need at least 2 vertices, got {d}")
    if d > MAX_VERTICES:
        raise ValidationError(f"d={d} exceeds the supported maximum {MAX_VERTICES}")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        raise ValidationError("weights must be non-negative")
    if np.any(np.diag(w) != 0):
        raise ValidationError("self-loops are not allowed (diagonal must be zero)")
    scale = max(float(np.max(np.abs(w))), 1.0)
    if np.max(np.abs(w - w.T)) > SYMMETRY_TOL * scale:
        raise ValidationError("weight matrix is asymmetric beyond 1e-12")
    w = (w + w.T) / 2.0  # kill rounding-level asymmetry exactly

    total = float(w.sum())  # = sum of degrees
    if total <= 0.0:
        raise ZeroNetworkError("network has no positive weight")
    w = w / total
    degrees = w.sum(axis=1)
    connected = _is_connected(w)
    return Network(d=d, weights=_freeze(w), degrees=_freeze(degrees), connected=connected)


def _edges_to_matrix(d: int, edges) -> np.ndarray:
    w = np.zeros((d, d))
    for entry in edges:
        if len(entry) != 3:
            raise ValidationError(f"edge entries must be [i, j, w], got {entry!r}")
        i, j, wt = int(entry[0]), int(entry[1]), float(entry[2])
        if i == j:
            raise ValidationError(f"self-loop on vertex {i}")
        if not (0 <= i < d and 0 <= j < d):
            raise ValidationError(f"edge ({i},{j}) out of range for d={d}")
        w[i, j] += wt  # duplicate edges are summed
        w[j, i] += wt
    return w


def _parse_text_edges(text: str) -> np.ndarray:
    edges = []
    top = -1
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValidationError(f"line {lineno}: expected 'i j w', got {line!r}")
        i, j, wt = int(parts[0]), int(parts[1]), float(parts[2])
        edges.append((i, j, wt))
        top = max(top, i, j)
    if not edges:
        raise ZeroNetworkError("edge list is empty")
    return _edges_to_matrix(top + 1, edges)


def load_network(source) -> Network:
    """Build a normalized :class:`Network` from a file, document, or matrix.

    Accepted sources: a path to a JSON document ``{"d": n, "edges":
    [[i, j, w], ...]}`` (0-based, duplicates summed) or to a whitespace
    edge-list text file (``i j w`` per line); the already-parsed dict; or a
    square weight matrix.
    """
    if isinstance(source, (str, Path)) and (os.path.exists(source) or str(source).endswith((".json", ".txt"))):
        text = Path(source).read_text()
        stripped = text.lstrip()
        if stripped.startswith("{"):
            source = json.loads(text)
        else:
            return _finish_network(_parse_text_edges(text))
    if isinstance(source, str):
        return _finish_network(_parse_text_edges(source))
    if isinstance(source, dict):
        try:
            d = int(source["d"])
            edges = source["edges"]
        except KeyError as exc:
            raise ValidationError(f"network document missing key {exc}") from None
        return _finish_network(_edges_to_matrix(d, edges))
    return _finish_network(np.asarray(source, dtype=np.float64))


def _is_connected(w: np.ndarray) -> bool:
    roots = _union_find(w)
    return len(set(int(r) for r in roots)) == 1


def _union_find(w: np.ndarray) -> np.ndarray:
    """Root label per vertex, merging across edges above ``EDGE_EPS``."""
    d = w.shape[0]
    parent = np.arange(d)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    ii, jj = np.nonzero(w > EDGE_EPS)
    for i, j in zip(ii, jj):
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    return np.array([find(i) for i in range(d)])


def _check_length(n: Network, p: np.ndarray, name: str = "p") -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (n.d,):
        raise DimensionError(f"{name} has shape {p.shape}, expected ({n.d},)")
    return p


def one_step_average(n: Network, p) -> np.ndarray:
    """Replace each coordinate by the weighted average of its neighbors."""
    p = _check_length(n, p)
    if np.any(n.degrees <= 0):
        bad = int(np.argmin(n.degrees))
        raise IsolatedVertexError(f"vertex {bad} has zero degree; decompose into components first")
    return (n.weights @ p) / n.degrees


def laplacian_apply(n: Network, p) -> np.ndarray:
    """Walk Laplacian ``p - p_hat``; annihilates constants."""
    p = _check_length(n, p)
    return p - one_step_average(n, p)


def weighted_inner(n: Network, p, q) -> float:
    """Degree-weighted inner product ``sum_i c_i p_i q_i``."""
    p = _check_length(n, p)
    q = _check_length(n, q, "q")
    return float(np.dot(n.degrees * p, q))


def barycenter(n: Network, p) -> float:
    """Degree-weighted average of the coordinates (inner product with 1)."""
    p = _check_length(n, p)
    return float(np.dot(n.degrees, p))


def dirichlet_energy(n: Network, p) -> float:
    """Quadratic form ``<p, Lap p>``; zero iff p is constant per component."""
    p = _check_length(n, p)
    return weighted_inner(n, p, laplacian_apply(n, p))


def dirichlet_energy_pairwise(n: Network, p) -> float:
    """Same energy as the explicit pairwise sum over unordered edges."""
    p = _check_length(n, p)
    diff = p[:, None] - p[None, :]
    return 0.5 * float(np.sum(n.weights * diff * diff))


@njit(cache=True)
def _jacobi_eigvals(s: np.ndarray, tol: float, max_sweeps: int) -> np.ndarray:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps row by row until the off-diagonal Frobenius norm drops below
    ``tol``.  The matrix is modified in place (pass a copy).
    """
    d = s.shape[0]
    for _ in range(max_sweeps):
        off = 0.0
        for i in range(d):
            for j in range(i + 1, d):
                off += 2.0 * s[i, j] * s[i, j]
        if np.sqrt(off) < tol:
            break
        for i in range(d):
            for j in range(i + 1, d):
                if s[i, j] == 0.0:
                    continue
                theta = (s[j, j] - s[i, i]) / (2.0 * s[i, j])
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                for k in range(d):
                    ski = s[k, i]
                    skj = s[k, j]
                    s[k, i] = c * ski - sn * skj
                    s[k, j] = sn * ski + c * skj
                for k in range(d):
                    sik = s[i, k]
                    sjk = s[j, k]
                    s[i, k] = c * sik - sn * sjk
                    s[j, k] = sn * sik + c * sjk
    return np.sort(np.diag(s).copy())


def symmetrized_laplacian(n: Network) -> np.ndarray:
    """``I - D^-1/2 C D^-1/2``: symmetric and similar to the walk Laplacian."""
    if np.any(n.degrees <= 0):
        raise IsolatedVertexError("symmetrization needs every degree positive")
    inv_sqrt = 1.0 / np.sqrt(n.degrees)
    s = -n.weights * np.outer(inv_sqrt, inv_sqrt)
    np.fill_diagonal(s, 1.0)
    return (s + s.T) / 2.0


def spectral_summary(n: Network) -> SpectralSummary:
    """Laplacian spectrum plus the (lambda, gamma, beta) scalars."""
    if not n.connected:
        raise DisconnectedError("spectral summary requires a connected network")
    evals = _jacobi_eigvals(symmetrized_laplacian(n), JACOBI_TOL, 100)
    lam = float(evals[1])
    gamma = max(abs(1.0 - float(evals[1])), abs(1.0 - float(evals[-1])))
    beta = float(np.min(n.degrees))
    return SpectralSummary(eigenvalues=_freeze(evals), lam=lam, gamma=gamma, beta=beta)


def connected_components(n: Network) -> tuple[list[Component], list[int]]:
    """Split into renormalized sub-networks plus isolated vertices.

    Each component's sub-network is rescaled back to unit total degree; its
    ``weight_fraction`` records the share of the original weight, which the
    caller absorbs into the scaling constant when studying the component on
    its own.
    """
    if float(n.weights.sum()) <= 0.0:
        raise ZeroNetworkError("network has no positive weight")
    roots = _union_find(n.weights)
    comps: list[Component] = []
    isolated: list[int] = []
    for root in sorted(set(int(r) for r in roots)):
        idx = np.flatnonzero(roots == root)
        if idx.size == 1:
            isolated.append(int(idx[0]))
            continue
        sub = n.weights[np.ix_(idx, idx)]
        fraction = float(n.degrees[idx].sum())
        comps.append(
            Component(
                vertices=tuple(int(i) for i in idx),
                network=_finish_network(sub),
                weight_fraction=fraction,
            )
        )
    return comps, isolated


# Named generators for the standard example networks.

def complete_network(d: int) -> Network:
    w = np.ones((d, d))
    np.fill_diagonal(w, 0.0)
    return _finish_network(w)


def path_network(d: int) -> Network:
    w = np.zeros((d, d))
    for i in range(d - 1):
        w[i, i + 1] = w[i + 1, i] = 1.0
    return _finish_network(w)


def cycle_network(d: int) -> Network:
    if d < 3:
        raise ValidationError("a cycle needs at least 3 vertices")
    w = np.zeros((d, d))
    for i in range(d):
        j = (i + 1) % d
        w[i, j] = w[j, i] = 1.0
    return _finish_network(w)


def random_connected_network(rng: np.random.Generator, d: int, extra_edge_prob: float = 0.3) -> Network:
    """Random spanning tree plus Bernoulli extra edges; always connected."""
    w = np.zeros((d, d))
    for i in range(1, d):
        j = int(rng.integers(0, i))
        w[i, j] = w[j, i] = rng.uniform(0.1, 2.0)
    for i in range(d):
        for j in range(i + 1, d):
            if w[i, j] == 0.0 and rng.random() < extra_edge_prob:
                w[i, j] = w[j, i] = rng.uniform(0.1, 2.0)
    return _finish_network(w)


def two_blocks_network(epsilon: float) -> Network:
    """Two strong pairs (0-1 and 2-3) with weak cross ties of weight epsilon."""
    if not 0.0 < epsilon < 0.125:
        raise ValidationError("two-blocks requires epsilon in (0, 1/8)")
    strong = 0.25 - 2.0 * epsilon
    w = np.full((4, 4), epsilon)
    np.fill_diagonal(w, 0.0)
    w[0, 1] = w[1, 0] = strong
    w[2, 3] = w[3, 2] = strong
    return _finish_network(w)
