"""Asymptotics of section spectra: limit points, essential/transient
classification, eigenvalue distributions and their moments.

All finite-size statistics are eigenvalue counts N_n(U) of sections along a
schedule n_1 < n_2 < ... < n_K of section indices, evaluated with Sturm
counts so that no eigenvalue list is needed unless moments are requested.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .eigensolver import EigenvalueList, sturm_counts
from .operator_model import BandOperatorSpec, Filtration, Section, build_section

ESSENTIAL = "essential"
TRANSIENT = "transient"
INDETERMINATE = "indeterminate"
OUTSIDE = "outside"

# classifier thresholds (finite-data stand-ins for the asymptotic definitions)
C_MAX = 16
MIN_ESSENTIAL_COUNT = 8
GROWTH_PER_DOUBLING = 1.6


class PreconditionError(ValueError):
    """An operation was called outside its documented hypothesis class."""


@dataclass(frozen=True)
class Schedule:
    sizes: tuple[int, ...] = tuple(250 * 2**k for k in range(6))

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        out = []
        if len(self.sizes) < 3:
            out.append("schedule needs at least 3 sizes")
        if any(s < 1 for s in self.sizes):
            out.append("schedule sizes must be positive")
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            out.append("schedule sizes must be strictly increasing")
        return out

    @classmethod
    def check(cls, sizes: Sequence[int]) -> list[str]:
        """Violations for ``sizes`` without raising."""
        try:
            cls(tuple(sizes))
        except ValueError as exc:
            return str(exc).split("; ")
        return []

    def __len__(self):
        return len(self.sizes)

    @property
    def late(self) -> tuple[int, ...]:
        """The last ceil(K/2) sizes."""
        return self.sizes[len(self.sizes) // 2 :]


@dataclass(frozen=True)
class PointVerdict:
    lam: float
    verdict: str
    counts: tuple[tuple[int, int], ...]
    window_width: float
    p: int | None = None
    q: int | None = None

    def to_dict(self):
        return {
            "lambda": self.lam,
            "verdict": self.verdict,
            "p": self.p,
            "q": self.q,
            "window_width": self.window_width,
            "counts": [[n, c] for n, c in self.counts],
        }


@dataclass(frozen=True, eq=False)
class ClassificationReport:
    grid: tuple[PointVerdict, ...]
    spec: BandOperatorSpec
    filtration: Filtration
    schedule: Schedule
    grid_resolution: float
    essential_support: tuple[tuple[float, float], ...]
    # affine map (a, b) already applied to lambdas and intervals, if any
    affine: tuple[float, float] | None = None

    def verdicts(self) -> dict[str, int]:
        tally: dict[str, int] = {}
        for v in self.grid:
            tally[v.verdict] = tally.get(v.verdict, 0) + 1
        return tally


@dataclass(frozen=True)
class SpectralDistribution:
    """Empirical eigenvalue distribution of one section."""

    sample: EigenvalueList
    n: int

    @property
    def values(self) -> np.ndarray:
        return self.sample.values

    def cdf(self, x):
        """#{lambda_i <= x} / n; right-continuous."""
        c = np.searchsorted(self.values, x, side="right") / self.n
        return float(c) if np.ndim(c) == 0 else c

    def moment(self, k: int) -> float:
        return float(np.mean(self.values**k))

    def support_intervals(self, gap: float) -> list[tuple[float, float]]:
        """Group the sorted sample into runs whose consecutive spacing is <= gap."""
        v = self.values
        breaks = np.flatnonzero(np.diff(v) > gap)
        starts = np.concatenate(([0], breaks + 1))
        stops = np.concatenate((breaks, [v.size - 1]))
        return [(float(v[a]), float(v[b])) for a, b in zip(starts, stops)]


@dataclass(frozen=True)
class MomentEstimate:
    k: int
    estimate: float
    values: tuple[float, ...]


@dataclass(frozen=True)
class AccumulationReport:
    alpha: float
    beta: float
    passed: bool
    mass_estimate: float
    counts: tuple[tuple[int, int], ...]


# ---------------------------------------------------------------------------
# counting helpers


def _section_matrix(spec: BandOperatorSpec, filt: Filtration, n: int):
    section = build_section(spec, filt, n)
    if section.bandwidth > 1:
        return section, None
    return section, section.to_tridiagonal()


def _counts_below(section: Section, tri, xs: np.ndarray, jobs: int) -> np.ndarray:
    if tri is not None:
        return sturm_counts(tri, xs, jobs=jobs)
    vals = section.eigenvalues().values
    return np.searchsorted(vals, xs, side="left").astype(np.int64)


def window_counts(
    spec: BandOperatorSpec,
    filt: Filtration,
    sched: Schedule,
    lams: np.ndarray,
    width: float,
    jobs: int = 1,
) -> np.ndarray:
    """N_n((lam - width/2, lam + width/2]) for every schedule size (rows) and lam (columns)."""
    lams = np.asarray(lams, dtype=float)
    lo = lams - 0.5 * width
    hi = lams + 0.5 * width
    edges, inverse = np.unique(np.concatenate((lo, hi)), return_inverse=True)
    out = np.empty((len(sched), lams.size), dtype=np.int64)
    for r, n in enumerate(sched.sizes):
        section, tri = _section_matrix(spec, filt, n)
        c = _counts_below(section, tri, edges, jobs)[inverse]
        out[r] = c[lams.size :] - c[: lams.size]
    return out


def _verdict(
    counts: Sequence[int],
    dims: Sequence[int],
    c_max: int = C_MAX,
    min_count: int = MIN_ESSENTIAL_COUNT,
    growth: float = GROWTH_PER_DOUBLING,
) -> tuple[str, int | None, int | None]:
    counts = list(counts)
    if all(c == 0 for c in counts):
        return OUTSIDE, None, None
    if counts[-1] >= min_count:
        grows = True
        for j in (len(counts) - 2, len(counts) - 3):
            # growth threshold scales with the size ratio; 1.6 per doubling
            need = growth ** math.log2(dims[j + 1] / dims[j])
            if counts[j] > 0 and counts[j + 1] / counts[j] < need:
                grows = False
            if counts[j + 1] == 0:
                grows = False
        if grows:
            return ESSENTIAL, None, None
    late = counts[len(counts) // 2 :]
    if max(late) <= c_max:
        return TRANSIENT, int(min(late)), int(max(late))
    return INDETERMINATE, None, None


def classify_point(
    spec: BandOperatorSpec,
    filt: Filtration,
    lam: float,
    width: float,
    sched: Schedule | None = None,
    jobs: int = 1,
) -> PointVerdict:
    """Classify ``lam`` from the counts N_n(U), U = (lam - width/2, lam + width/2].

    * outside: every count is zero;
    * essential: the final count is at least 8 and the counts grew by a
      factor >= 1.6 per doubling of the section size over the last two steps;
    * transient(p, q): the late counts (last half of the schedule) stay
      within [p, q] with q <= 16;
    * indeterminate: none of the above.

    Essential is tested before transient: a small window on a band edge can
    have late counts under 16 while still growing linearly.
    """
    if not width > 0:
        raise ValueError("window width must be positive")
    sched = sched or Schedule()
    counts = window_counts(spec, filt, sched, np.array([lam]), width, jobs)[:, 0]
    return _point(spec, filt, sched, float(lam), width, counts)


def _point(spec, filt, sched, lam, width, counts) -> PointVerdict:
    dims = [filt.dimension(n) for n in sched.sizes]
    verdict, p, q = _verdict(counts, dims)
    return PointVerdict(
        lam=lam,
        verdict=verdict,
        counts=tuple((int(n), int(c)) for n, c in zip(sched.sizes, counts)),
        window_width=float(width),
        p=p,
        q=q,
    )


def lambda_set_estimate(
    spec: BandOperatorSpec,
    filt: Filtration,
    grid: Sequence[float],
    sched: Schedule | None = None,
    eps: float = 0.05,
) -> list[float]:
    """Grid points within ``eps`` of some eigenvalue of every late section."""
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    sched = sched or Schedule()
    keep = np.ones(grid.size, dtype=bool)
    for n in sched.late:
        vals = build_section(spec, filt, n).eigenvalues().values
        keep &= _nearest_distance(vals, grid) <= eps
    return [float(x) for x in grid[keep]]


def _nearest_distance(sorted_vals: np.ndarray, xs: np.ndarray) -> np.ndarray:
    i = np.searchsorted(sorted_vals, xs)
    left = sorted_vals[np.clip(i - 1, 0, sorted_vals.size - 1)]
    right = sorted_vals[np.clip(i, 0, sorted_vals.size - 1)]
    return np.minimum(np.abs(xs - left), np.abs(xs - right))


def uniform_grid(radius: float, resolution: float) -> np.ndarray:
    """Multiples of ``resolution`` inside [-radius, radius]."""
    lo = math.ceil(-radius / resolution - 1e-9)
    hi = math.floor(radius / resolution + 1e-9)
    # rounding strips the float noise of j * resolution from reported grid points
    return np.round(np.arange(lo, hi + 1) * resolution, 12)


def merge_runs(grid: Sequence[PointVerdict], verdict: str = ESSENTIAL) -> list[tuple[float, float]]:
    """Closed intervals spanned by maximal runs of consecutive grid points with ``verdict``."""
    runs: list[tuple[float, float]] = []
    start = None
    prev = None
    for v in grid:
        if v.verdict == verdict:
            if start is None:
                start = v.lam
            prev = v.lam
        elif start is not None:
            runs.append((start, prev))
            start = None
    if start is not None:
        runs.append((start, prev))
    return runs


def essential_spectrum_estimate(
    spec: BandOperatorSpec,
    filt: Filtration,
    grid_resolution: float = 0.05,
    sched: Schedule | None = None,
    jobs: int = 1,
) -> ClassificationReport:
    """Classify a uniform grid over the Gershgorin interval of the largest section.

    Each grid point gets a window of width ``grid_resolution``; essential runs
    are merged into ``essential_support``.
    """
    if not (spec.is_tridiagonal and spec.has_unit_offdiagonal):
        raise PreconditionError(
            "essential_spectrum_estimate needs a tridiagonal operator with unit off-diagonals"
        )
    if not grid_resolution > 0:
        raise ValueError("grid_resolution must be positive")
    sched = sched or Schedule()
    radius = build_section(spec, filt, sched.sizes[-1]).gershgorin_radius()
    lams = uniform_grid(radius, grid_resolution)
    counts = window_counts(spec, filt, sched, lams, grid_resolution, jobs)
    grid = tuple(
        _point(spec, filt, sched, float(lam), grid_resolution, counts[:, j])
        for j, lam in enumerate(lams)
    )
    return ClassificationReport(
        grid=grid,
        spec=spec,
        filtration=filt,
        schedule=sched,
        grid_resolution=float(grid_resolution),
        essential_support=tuple(merge_runs(grid)),
    )


def map_report(report: ClassificationReport, a: float, b: float) -> ClassificationReport:
    """Push a report through x -> a x + b (a > 0)."""
    grid = tuple(
        replace(v, lam=a * v.lam + b, window_width=a * v.window_width) for v in report.grid
    )
    return replace(
        report,
        grid=grid,
        essential_support=tuple((a * lo + b, a * hi + b) for lo, hi in report.essential_support),
        affine=(a, b),
    )


# ---------------------------------------------------------------------------
# distributions and moments


def empirical_distribution(
    spec: BandOperatorSpec, filt: Filtration, n: int, jobs: int = 1
) -> SpectralDistribution:
    section = build_section(spec, filt, n)
    return SpectralDistribution(section.eigenvalues(jobs=jobs), section.dimension)


def distribution_limit(
    spec: BandOperatorSpec,
    filt: Filtration,
    sched: Schedule | None = None,
    moments_up_to: int = 8,
    jobs: int = 1,
) -> list[MomentEstimate]:
    """Moments (1/n) sum lambda_i^k of each scheduled section, k = 1..moments_up_to.

    The estimate is the value at the largest section; the per-size values are
    kept so convergence can be inspected.
    """
    if not 1 <= moments_up_to <= 12:
        raise PreconditionError("moments_up_to must be in 1..12")
    sched = sched or Schedule()
    table = np.empty((len(sched), moments_up_to))
    for r, n in enumerate(sched.sizes):
        vals = empirical_distribution(spec, filt, n, jobs).values
        power = np.ones_like(vals)
        for k in range(moments_up_to):
            power = power * vals
            table[r, k] = power.mean()
    return [
        MomentEstimate(k + 1, float(table[-1, k]), tuple(float(x) for x in table[:, k]))
        for k in range(moments_up_to)
    ]


def trace_moment_oracle(spec: BandOperatorSpec, k: int, n_window: int = 2000) -> float:
    """Average of <T^k e_j, e_j> over j in [-n_window, n_window].

    Each diagonal matrix element is the weighted sum over closed walks of
    length k on Z starting at j: a step p -> p is weighted by d_p, a step
    between p and p+s (s >= 1) by the band-s entry.  Walks are summed by
    propagating their weights one step at a time; no eigenvalues are used.
    """
    if not 0 <= k <= 16:
        raise PreconditionError("k must be in 0..16")
    if k == 0:
        return 1.0
    w = spec.bandwidth
    reach = k * w
    js = np.arange(-n_window, n_window + 1)
    # absolute positions touched: [-n_window - reach, n_window + reach]
    base = -n_window - reach
    positions = np.arange(base, n_window + reach + 1)
    diag = spec.diagonal.values(positions)
    bands = {s: seq.values(positions) for s, seq in spec.bands.items()}

    offsets = np.arange(-reach, reach + 1)
    pos = js[:, None] + offsets[None, :] - base  # index into the position arrays
    state = np.zeros((js.size, offsets.size))
    state[:, reach] = 1.0
    for _ in range(k):
        new = diag[pos] * state
        for s, b in bands.items():
            # from p - s up to p: weight A[p, p-s] = band_s(p - s)
            new[:, s:] += b[pos[:, s:] - s] * state[:, :-s]
            # from p + s down to p: weight A[p, p+s] = band_s(p)
            new[:, :-s] += b[pos[:, :-s]] * state[:, s:]
        state = new
    return float(state[:, reach].mean())


def accumulation_rate_check(
    spec: BandOperatorSpec,
    filt: Filtration,
    interval: tuple[float, float],
    sched: Schedule | None = None,
    alpha: float | None = None,
    beta: float | None = None,
    jobs: int = 1,
) -> AccumulationReport:
    """Check alpha*n <= N_n(I) <= beta*n for every scheduled size after the first.

    I = (a, b) is open.  By default alpha and beta are 0.9 and 1.1 times the
    mass of I estimated from the largest section.
    """
    a, b = interval
    if not a < b:
        raise ValueError("interval must satisfy a < b")
    sched = sched or Schedule()
    # open interval (a, b): eigenvalues <= a and < b
    edges = np.array([a, np.nextafter(b, -np.inf)])
    counts = []
    dims = []
    for n in sched.sizes:
        section, tri = _section_matrix(spec, filt, n)
        c = _counts_below(section, tri, edges, jobs)
        counts.append(int(c[1] - c[0]))
        dims.append(section.dimension)
    mass = counts[-1] / dims[-1]
    alpha = 0.9 * mass if alpha is None else alpha
    beta = 1.1 * mass if beta is None else beta
    passed = all(alpha * d <= c <= beta * d for c, d in zip(counts[1:], dims[1:]))
    return AccumulationReport(
        alpha=float(alpha),
        beta=float(beta),
        passed=bool(passed),
        mass_estimate=float(mass),
        counts=tuple(zip(sched.sizes, counts)),
    )


# ---------------------------------------------------------------------------
# set distances


def hausdorff_distance(
    a: Sequence[tuple[float, float]], b: Sequence[tuple[float, float]]
) -> float:
    """Hausdorff distance between two finite unions of closed intervals."""
    if not a and not b:
        return 0.0
    if not a or not b:
        return math.inf
    return max(_directed(a, b), _directed(b, a))


def _directed(a, b) -> float:
    # x -> dist(x, B) is piecewise linear, maximal at endpoints of A or at gap midpoints of B
    b = sorted(b)
    candidates = [x for iv in a for x in iv]
    for (_, hi0), (lo1, _) in zip(b, b[1:]):
        mid = 0.5 * (hi0 + lo1)
        if any(lo <= mid <= hi for lo, hi in a):
            candidates.append(mid)
    return max(_dist_to_union(x, b) for x in candidates)


def _dist_to_union(x: float, b) -> float:
    best = math.inf
    for lo, hi in b:
        if lo <= x <= hi:
            return 0.0
        best = min(best, lo - x if x < lo else x - hi)
    return best
