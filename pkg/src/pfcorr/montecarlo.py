"""Samplers and empirical validation against the Pfaffian predictions.

Gaussian ensembles are drawn with the variance convention P(X) dX ~
exp(-Tr X^2 / 2): real symmetric matrices get unit-variance diagonal and
half-variance off-diagonal entries, whose eigenvalue density carries the
per-eigenvalue weight e^{-x^2/2}; self-dual quaternion matrices are built in
the doubled complex representation and each Kramers-degenerate eigenvalue is
kept once.  Brownian-motion trajectories follow the eigenvalue SDE

    dx_j = (-x_j + sum_{l != j} 1 / (x_j - x_l)) dt + dW_j

from a symmetric-ensemble start.  Nonintersecting lattice walkers are
simulated by rejection and compared against the exact binomial-determinant
law.  Sampling is chunked over independent child seeds so aggregation is
order-independent.
"""
from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .linalg import determinant

#: Samples per RNG chunk (child seed); fixed so results depend only on seed.
CHUNK = 4096


@dataclass
class SampleBatch:
    """Sorted per-sample eigenvalue (or position) vectors."""

    ensemble: str
    N: int
    samples: np.ndarray
    seed: int

    @property
    def count(self) -> int:
        return self.samples.shape[0]


def _chunked(count: int, seed: int):
    ss = np.random.SeedSequence(seed)
    nchunks = (count + CHUNK - 1) // CHUNK
    for i, child in enumerate(ss.spawn(nchunks)):
        size = min(CHUNK, count - i * CHUNK)
        yield np.random.default_rng(child), size


def _map_chunks(fn, count: int, seed: int) -> np.ndarray:
    """Apply fn(rng, size) per chunk, threaded when PFCORR_THREADS > 1.

    Chunk seeds are fixed by (count, seed) alone, so results are identical
    for any worker count; aggregation preserves chunk order.
    """
    chunks = list(_chunked(count, seed))
    nt = thread_count()
    if nt > 1 and len(chunks) > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=nt) as ex:
            parts = list(ex.map(lambda c: fn(*c), chunks))
    else:
        parts = [fn(*c) for c in chunks]
    return np.concatenate(parts)


def sample_goe(N: int, count: int, seed: int) -> SampleBatch:
    """Eigenvalues of real symmetric matrices with density exp(-Tr X^2 / 2)."""
    if N < 1:
        raise ValueError("N must be >= 1")

    def chunk(rng, size):
        a = rng.standard_normal((size, N, N))
        x = 0.5 * (a + np.transpose(a, (0, 2, 1)))
        return np.linalg.eigvalsh(x)

    return SampleBatch("goe", N, np.sort(_map_chunks(chunk, count, seed), axis=1), seed)


def _quaternion_rep(a0, a1, a2, a3):
    """Map quaternion components to the doubled complex representation."""
    A = a0 + 1j * a1
    B = a2 + 1j * a3
    top = np.concatenate([A, B], axis=-1)
    bot = np.concatenate([-np.conj(B), np.conj(A)], axis=-1)
    return np.concatenate([top, bot], axis=-2)


def sample_gse(N: int, count: int, seed: int) -> SampleBatch:
    """Eigenvalues (each Kramers pair once) of self-dual quaternion matrices.

    Weight convention: the single-eigenvalue density at N = 1 is e^{-x^2},
    matching the quaternion-kernel (Case II) machinery.
    """
    if N < 1:
        raise ValueError("N must be >= 1")

    def chunk(rng, size):
        def sym(m):
            return 0.5 * (m + np.transpose(m, (0, 2, 1)))

        def asym(m):
            return 0.5 * (m - np.transpose(m, (0, 2, 1)))

        g = rng.standard_normal((4, size, N, N))
        a0 = sym(g[0]) / np.sqrt(2.0)          # diag var 1/2, offdiag var 1/4
        a1 = asym(g[1]) / np.sqrt(2.0)         # offdiag var 1/4
        a2 = asym(g[2]) / np.sqrt(2.0)
        a3 = asym(g[3]) / np.sqrt(2.0)
        H = _quaternion_rep(a0, a1, a2, a3)
        w = np.linalg.eigvalsh(H)
        gap = np.abs(w[:, 0::2] - w[:, 1::2])
        if np.max(gap) > 1e-8 * (1.0 + np.max(np.abs(w))):
            raise ValueError("not self-dual")
        return w[:, 0::2]

    return SampleBatch("gse", N, np.sort(_map_chunks(chunk, count, seed), axis=1), seed)


def _drift(x: np.ndarray) -> np.ndarray:
    diff = x[:, :, None] - x[:, None, :]
    eye = np.eye(x.shape[1], dtype=bool)[None, :, :]
    inv = np.where(eye, 0.0, 1.0 / np.where(eye, 1.0, diff))
    return -x + inv.sum(axis=2)


def _advance(x: np.ndarray, dt: float, rng, depth: int = 0) -> np.ndarray:
    """One Euler-Maruyama step; halve the step where paths would cross."""
    if depth > 10:
        raise RuntimeError("step too large")
    noise = rng.standard_normal(x.shape) * np.sqrt(dt)
    prop = x + _drift(x) * dt + noise
    bad = np.any(np.diff(prop, axis=1) <= 0.0, axis=1)
    if np.any(bad):
        xb = x[bad]
        half = _advance(_advance(xb, dt / 2.0, rng, depth + 1), dt / 2.0, rng, depth + 1)
        prop[bad] = half
    return prop


def sample_dyson(N: int, taus, step: float, count: int, seed: int) -> list[SampleBatch]:
    """Eigenvalue Brownian motion from a symmetric-ensemble start.

    Returns one batch per requested time (taus must be nondecreasing, the
    first may be 0).
    """
    taus = np.asarray(taus, dtype=float)
    if np.any(taus < 0.0) or np.any(np.diff(taus) < 0.0):
        raise ValueError("times must be nonnegative and nondecreasing")
    batches = []
    pos = {}
    for rng, size in _chunked(count, seed):
        a = rng.standard_normal((size, N, N))
        x = np.sort(np.linalg.eigvalsh(0.5 * (a + np.transpose(a, (0, 2, 1)))), axis=1)
        t = 0.0
        for si, tau in enumerate(taus):
            while t < tau - 1e-12:
                dt = min(step, tau - t)
                x = _advance(x, dt, rng)
                t += dt
            pos.setdefault(si, []).append(x.copy())
    for si, tau in enumerate(taus):
        batches.append(SampleBatch(f"dyson[{tau}]", N,
                                   np.concatenate(pos[si]), seed))
    return batches


# -- nonintersecting lattice walkers ----------------------------------------

@dataclass(frozen=True)
class WalkerConfig:
    """N walkers on Z with +-1 steps, horizon K (even), starts at 2 X_j."""

    N: int
    K: int
    X: tuple
    L: float = 1.0
    slices: tuple = ()

    def __post_init__(self):
        if self.K % 2:
            raise ValueError("horizon K must be even")
        if list(self.X) != sorted(set(self.X)):
            raise ValueError("start offsets must be strictly increasing")


def _log_binom(K: int, m: np.ndarray) -> np.ndarray:
    out = np.full(m.shape, -np.inf)
    ok = (m >= 0) & (m <= K)
    out[ok] = gammaln(K + 1.0) - gammaln(m[ok] + 1.0) - gammaln(K - m[ok] + 1.0)
    return out


def vicious_count(cfg: WalkerConfig, Y) -> float:
    """Exact probability that the walkers survive to end positions 2 Y_j.

    The binomial determinant (nonintersecting path counting); log-binomials
    keep large horizons stable.  Unreachable (parity or range) endpoints give
    zero entries.
    """
    Y = np.asarray(Y, dtype=int)
    X = np.asarray(cfg.X, dtype=int)
    if Y.shape[0] != cfg.N:
        raise ValueError("need one end position per walker")
    if list(Y) != sorted(set(Y.tolist())):
        return 0.0
    m = cfg.K // 2 + X[None, :] - Y[:, None]
    lb = _log_binom(cfg.K, m)
    scale = np.max(lb[np.isfinite(lb)], initial=-np.inf)
    if not np.isfinite(scale):
        return 0.0
    mat = np.exp(lb - scale)
    mat[~np.isfinite(lb)] = 0.0
    det = determinant(mat)
    return float(det * np.exp(cfg.N * scale - cfg.K * cfg.N * np.log(2.0)))


def enumerate_vicious(cfg: WalkerConfig) -> dict:
    """Brute-force endpoint law by enumerating all +-1 step combinations.

    Returns {tuple(Y): probability}; practical for N <= 2 and small K.
    """
    N, K = cfg.N, cfg.K
    start = 2 * np.asarray(cfg.X, dtype=int)
    total = {}
    nsteps = N * K
    for code in range(2 ** nsteps):
        bits = (code >> np.arange(nsteps)) & 1
        steps = (2 * bits - 1).reshape(K, N)
        pos = start.copy()
        ok = True
        for k in range(K):
            pos = pos + steps[k]
            if np.any(np.diff(pos) <= 0):
                ok = False
                break
        if ok:
            key = tuple((pos // 2).tolist())
            total[key] = total.get(key, 0) + 1
    z = 2.0 ** nsteps
    return {k: v / z for k, v in total.items()}


def simulate_walkers(cfg: WalkerConfig, count: int, seed: int):
    """Rejection-sampled nonintersecting walkers.

    Returns (per-slice scaled positions, end half-positions, acceptance rate).
    Scaled positions are (lattice position) / sqrt(L) recorded at the
    requested step indices ``cfg.slices``.
    """
    N, K = cfg.N, cfg.K
    start = 2 * np.asarray(cfg.X, dtype=int)
    slices = tuple(cfg.slices) if cfg.slices else ()
    kept_slices = {k: [] for k in slices}
    ends = []
    accepted = 0
    attempted = 0
    for rng, size in _chunked(count, seed):
        need = size
        while need > 0:
            batch = max(2 * need, 1024)
            attempted += batch
            if attempted > 2e6 and accepted < 1e-6 * attempted:
                raise RuntimeError("configuration too constrained")
            steps = rng.integers(0, 2, size=(batch, K, N)) * 2 - 1
            pos = np.broadcast_to(start, (batch, N)).copy()
            alive = np.ones(batch, dtype=bool)
            snap = {}
            for k in range(1, K + 1):
                pos = pos + steps[:, k - 1, :]
                alive &= np.all(np.diff(pos, axis=1) > 0, axis=1)
                if k in slices:
                    snap[k] = pos.copy()
            idx = np.flatnonzero(alive)[:need]
            if idx.size:
                accepted += idx.size
                need -= idx.size
                ends.append(pos[idx] // 2)
                for k in slices:
                    kept_slices[k].append(snap[k][idx] / np.sqrt(cfg.L))
    per_slice = {k: np.concatenate(v) for k, v in kept_slices.items()} if slices else {}
    rate = accepted / max(attempted, 1)
    return per_slice, np.concatenate(ends), rate


# -- histogram comparison harness --------------------------------------------

@dataclass
class BinReport:
    edges: np.ndarray
    observed: np.ndarray
    expected: np.ndarray
    zscores: np.ndarray

    def frac_within(self, z: float) -> float:
        return float(np.mean(np.abs(self.zscores) <= z))


def fd_bins(values: np.ndarray, max_bins: int = 200) -> np.ndarray:
    """Freedman-Diaconis bin edges."""
    q75, q25 = np.percentile(values, [75, 25])
    h = 2.0 * (q75 - q25) / len(values) ** (1.0 / 3.0)
    lo, hi = values.min(), values.max()
    nb = min(max_bins, max(int(np.ceil((hi - lo) / h)), 4)) if h > 0 else 20
    return np.linspace(lo, hi, nb + 1)


def lattice_bins(values: np.ndarray, spacing: float, offset: float = 0.0) -> np.ndarray:
    """Bin edges aligned to a value lattice (sites at offset + j * spacing).

    The Freedman-Diaconis width is rounded up to a whole number of lattice
    cells and edges are placed halfway between sites, so every bin covers the
    same number of sites and aliasing against the lattice is avoided.
    """
    q75, q25 = np.percentile(values, [75, 25])
    h = 2.0 * (q75 - q25) / len(values) ** (1.0 / 3.0)
    m = max(1, int(np.ceil(h / spacing)))
    width = m * spacing
    lo = offset + (np.floor((values.min() - offset) / spacing) - 0.5) * spacing
    nb = int(np.ceil((values.max() - lo) / width)) + 1
    return lo + width * np.arange(nb + 1)


def compare_histogram(batch: SampleBatch, density_dx, bins=None,
                      min_expected: float = 5.0) -> BinReport:
    """Per-bin z-scores of sampled values against an analytic dx-density.

    ``density_dx`` integrates to the eigenvalue count N over the line; the
    per-bin variance uses the binomial approximation for count * N draws.
    Bins whose expected count falls below ``min_expected`` are merged into
    their neighbor.
    """
    values = batch.samples.ravel()
    edges = fd_bins(values) if bins is None else np.asarray(bins, dtype=float)
    gl_x, gl_w = np.polynomial.legendre.leggauss(16)
    mids = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    nodes = mids[:, None] + half[:, None] * gl_x[None, :]
    dens = np.asarray(density_dx(nodes.ravel())).reshape(nodes.shape)
    q = (dens * gl_w[None, :]).sum(axis=1) * half          # expected per sample
    # merge thin bins from the outside inward
    keep = batch.count * q >= min_expected
    obs = np.histogram(values, edges)[0].astype(float)
    obs, q, edges2 = _merge_bins(obs, q, edges, keep)
    n_draws = batch.count * batch.N
    p = np.clip(q / batch.N, 1e-15, 1.0)
    expected = batch.count * q
    z = (obs - expected) / np.sqrt(n_draws * p * (1.0 - p))
    return BinReport(edges2, obs, expected, z)


def _merge_bins(obs, q, edges, keep):
    if np.all(keep):
        return obs, q, edges
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        return (np.array([obs.sum()]), np.array([q.sum()]),
                np.array([edges[0], edges[-1]]))
    lo, hi = idx[0], idx[-1]
    obs2 = np.concatenate([[obs[:lo + 1].sum()], obs[lo + 1:hi], [obs[hi:].sum()]])
    q2 = np.concatenate([[q[:lo + 1].sum()], q[lo + 1:hi], [q[hi:].sum()]])
    edges2 = np.concatenate([[edges[0]], edges[lo + 1:hi + 1], [edges[-1]]])
    return obs2, q2, edges2


def thread_count() -> int:
    """Worker count for sampling chunks (PFCORR_THREADS, default 1)."""
    try:
        return max(1, int(os.environ.get("PFCORR_THREADS", "1")))
    except ValueError:
        return 1
