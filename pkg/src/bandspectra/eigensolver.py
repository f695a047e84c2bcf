"""Sturm-sequence counting and bisection for symmetric tridiagonal matrices.

All counts come from the LDL^T pivot recurrence of ``T - x I``::

    q_1 = d_1 - x,    q_i = d_i - x - e_{i-1}^2 / q_{i-1}

whose number of negative pivots equals the number of eigenvalues below ``x``.
Eigenvalues are located by bisecting on that count, so the same kernel serves
both eigenvalue counting in intervals and full eigenvalue lists.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np

EPS = np.finfo(float).eps
# keeps the zero-pivot substitute nonzero when the matrix and x are all zero
TINY = np.finfo(float).tiny


@numba.njit(cache=True, nogil=True)
def _count_below(d, e2, x, maxabs):
    # zero pivot -> -eps*scale: an exact tie at x is counted as below x
    floor = -(EPS * (maxabs + abs(x)) + TINY)
    q = d[0] - x
    if q == 0.0:
        q = floor
    count = 1 if q < 0.0 else 0
    for i in range(1, d.shape[0]):
        q = d[i] - x - e2[i - 1] / q
        if q == 0.0:
            q = floor
        if q < 0.0:
            count += 1
    return count


@numba.njit(cache=True, nogil=True)
def _count_many(d, e2, xs, maxabs, out):
    for j in range(xs.shape[0]):
        out[j] = _count_below(d, e2, xs[j], maxabs)


_BATCH = 16


@numba.njit(cache=True, nogil=True)
def _count_batch(d, e2, xs, maxabs, out):
    # interleaved recurrences: independent divisions pipeline, one chain stalls
    nb = xs.shape[0]
    q = np.empty(nb)
    floor = np.empty(nb)
    for b in range(nb):
        floor[b] = -(EPS * (maxabs + abs(xs[b])) + TINY)
        v = d[0] - xs[b]
        if v == 0.0:
            v = floor[b]
        q[b] = v
        out[b] = 1 if v < 0.0 else 0
    for i in range(1, d.shape[0]):
        di = d[i]
        ei = e2[i - 1]
        for b in range(nb):
            v = di - xs[b] - ei / q[b]
            if v == 0.0:
                v = floor[b]
            q[b] = v
            if v < 0.0:
                out[b] += 1


@numba.njit(cache=True, nogil=True)
def _bisect_range(d, e2, maxabs, lo0, hi0, tol, k0, k1, out):
    lo = np.empty(_BATCH)
    hi = np.empty(_BATCH)
    mid = np.empty(_BATCH)
    cnt = np.empty(_BATCH, dtype=np.int64)
    # every index starts from the same bracket, so results do not depend on
    # how indices are split into batches or threads
    for start in range(k0, k1, _BATCH):
        nb = min(_BATCH, k1 - start)
        for b in range(nb):
            lo[b] = lo0
            hi[b] = hi0
        while True:
            active = False
            for b in range(nb):
                m = 0.5 * (lo[b] + hi[b])
                if hi[b] - lo[b] > tol and lo[b] < m < hi[b]:
                    active = True
                mid[b] = m
            if not active:
                break
            _count_batch(d, e2, mid[:nb], maxabs, cnt[:nb])
            for b in range(nb):
                if hi[b] - lo[b] <= tol or not (lo[b] < mid[b] < hi[b]):
                    continue
                if cnt[b] > start + b:
                    hi[b] = mid[b]
                else:
                    lo[b] = mid[b]
        for b in range(nb):
            out[start - k0 + b] = 0.5 * (lo[b] + hi[b])


@dataclass(frozen=True)
class SymTridiagonal:
    """Symmetric tridiagonal matrix stored as its diagonal and first off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = np.ascontiguousarray(self.diag, dtype=float)
        e = np.ascontiguousarray(self.offdiag, dtype=float)
        if d.ndim != 1 or d.size < 1:
            raise ValueError("diagonal must be a non-empty vector")
        if e.shape != (d.size - 1,):
            raise ValueError(
                f"off-diagonal must have length {d.size - 1}, got {e.shape}"
            )
        if not (np.all(np.isfinite(d)) and np.all(np.isfinite(e))):
            raise ValueError("matrix entries must be finite")
        d.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def n(self) -> int:
        return self.diag.size

    @property
    def _e2(self) -> np.ndarray:
        return self.offdiag * self.offdiag

    @property
    def maxabs(self) -> float:
        m = float(np.max(np.abs(self.diag)))
        if self.offdiag.size:
            m = max(m, float(np.max(np.abs(self.offdiag))))
        return m

    def gershgorin_radius(self) -> float:
        """max_i |d_i| + |e_{i-1}| + |e_i|; every eigenvalue lies in [-R, R]."""
        r = np.abs(self.diag).copy()
        a = np.abs(self.offdiag)
        r[:-1] += a
        r[1:] += a
        return float(r.max())

    def to_dense(self) -> np.ndarray:
        return (
            np.diag(self.diag)
            + np.diag(self.offdiag, 1)
            + np.diag(self.offdiag, -1)
        )


@dataclass(frozen=True)
class EigenvalueList:
    values: np.ndarray
    tol: float

    def __len__(self):
        return self.values.size

    def __iter__(self):
        return iter(self.values)


def sturm_count(m: SymTridiagonal, x: float) -> int:
    """Number of eigenvalues of ``m`` below ``x``.

    A pivot that is exactly zero is replaced by a tiny negative value,
    ``-(eps * (max|entry| + |x|) + tiny)``, so an eigenvalue that coincides
    with ``x`` to working precision is counted as lying below it.
    """
    if not np.isfinite(x):
        raise ValueError("x must be finite")
    return int(_count_below(m.diag, m._e2, float(x), m.maxabs))


def sturm_counts(m: SymTridiagonal, xs, jobs: int = 1) -> np.ndarray:
    """Vectorised :func:`sturm_count` over an array of shifts."""
    xs = np.ascontiguousarray(xs, dtype=float).ravel()
    out = np.empty(xs.size, dtype=np.int64)
    e2 = m._e2
    maxabs = m.maxabs
    chunks = _chunks(xs.size, jobs)
    if len(chunks) <= 1:
        _count_many(m.diag, e2, xs, maxabs, out)
        return out

    def work(bounds):
        a, b = bounds
        _count_many(m.diag, e2, xs[a:b], maxabs, out[a:b])

    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        list(pool.map(work, chunks))
    return out


def count_in_interval(m: SymTridiagonal, a: float, b: float) -> int:
    """N((a, b]): eigenvalues of ``m`` in the half-open interval, with multiplicity.

    Adjacent half-open intervals partition the eigenvalues exactly, because
    the same tie convention is applied at both ends.
    """
    if a > b:
        raise ValueError(f"empty interval: a={a} > b={b}")
    if a == b:
        return 0
    return sturm_count(m, b) - sturm_count(m, a)


def default_tol(m: SymTridiagonal) -> float:
    return 1e-10 * max(1.0, m.gershgorin_radius())


def eigenvalues(m: SymTridiagonal, tol: float | None = None, jobs: int = 1) -> EigenvalueList:
    """All eigenvalues of ``m`` in ascending order, each bisected to width ``tol``.

    The initial bracket is the Gershgorin interval. Distinct eigenvalue
    indices are independent, so ``jobs > 1`` splits them across threads
    without changing the result.
    """
    if tol is None:
        tol = default_tol(m)
    if not tol > 0:
        raise ValueError("tol must be positive")
    n = m.n
    r = m.gershgorin_radius()
    # widen so the endpoints are strictly outside the spectrum
    r = r * (1.0 + 4 * EPS) + 4 * np.finfo(float).tiny + tol
    e2 = m._e2
    maxabs = m.maxabs
    out = np.empty(n, dtype=float)
    chunks = _chunks(n, jobs)
    if len(chunks) <= 1:
        _bisect_range(m.diag, e2, maxabs, -r, r, tol, 0, n, out)
    else:
        def work(bounds):
            a, b = bounds
            _bisect_range(m.diag, e2, maxabs, -r, r, tol, a, b, out[a:b])

        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            list(pool.map(work, chunks))
    return EigenvalueList(out, float(tol))


def _chunks(n: int, jobs: int) -> list[tuple[int, int]]:
    jobs = max(1, min(int(jobs), n))
    edges = np.linspace(0, n, jobs + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]
