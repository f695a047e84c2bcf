"""Diagonal sequences, band operators, filtrations and finite sections.

A band operator on l^2(Z) is described by generators for its diagonal and for
each positive band offset ``k``; the entry ``(i, i+k)`` is the band-``k``
generator evaluated at the row index ``i`` and the mirrored entry ``(i+k, i)``
is equal to it.  Sections are cut from the operator either over the indices
``1..n`` (unilateral) or ``-n..n`` (bilateral).
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .eigensolver import EigenvalueList, SymTridiagonal, eigenvalues

# ---------------------------------------------------------------------------
# potentials


@dataclass(frozen=True)
class Polynomial:
    """c0 + c1 x + c2 x^2 + ..."""

    coefficients: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coefficients", tuple(float(c) for c in self.coefficients))

    def __call__(self, x):
        # np.polyval wants the highest degree first
        return np.polyval(self.coefficients[::-1], x) if self.coefficients else 0.0 * x


@dataclass(frozen=True)
class CosineTerm:
    amplitude: float
    frequency: float
    phase: float = 0.0

    def __call__(self, x):
        return self.amplitude * np.cos(self.frequency * x + self.phase)


PotentialTerm = Union[Polynomial, CosineTerm]


@dataclass(frozen=True)
class Potential:
    """Continuous real potential written as a sum of polynomial and cosine terms."""

    terms: tuple[PotentialTerm, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros_like(x)
        for term in self.terms:
            total = total + term(x)
        return total if total.ndim else float(total)

    def sup_abs(self, lo: float, hi: float, samples: int = 10_000) -> float:
        """max |phi| over [lo, hi], sampled on an equispaced grid plus endpoints."""
        xs = np.linspace(lo, hi, samples)
        vals = np.abs(self(xs))
        return float(max(vals.max(), abs(self(lo)), abs(self(hi))))

    @classmethod
    def zero(cls) -> "Potential":
        return cls(())

    @classmethod
    def constant(cls, c: float) -> "Potential":
        return cls((Polynomial((c,)),))


# ---------------------------------------------------------------------------
# diagonal sequences


class DiagonalSequence:
    """A bounded real sequence d_n, n in Z."""

    def values(self, indices) -> np.ndarray:
        raise NotImplementedError

    def sup_abs(self) -> float:
        raise NotImplementedError

    def __call__(self, n: int) -> float:
        return float(self.values(np.array([n]))[0])


@dataclass(frozen=True)
class Constant(DiagonalSequence):
    c: float

    def values(self, indices):
        return np.full(np.shape(indices), float(self.c))

    def sup_abs(self):
        return abs(float(self.c))


@dataclass(frozen=True)
class Periodic(DiagonalSequence):
    """Repeats ``pattern`` with its first entry placed at index 1."""

    pattern: tuple[float, ...]

    def __post_init__(self):
        if not self.pattern:
            raise ValueError("periodic sequence needs at least one value")
        object.__setattr__(self, "pattern", tuple(float(v) for v in self.pattern))

    def values(self, indices):
        table = np.asarray(self.pattern)
        return table[(np.asarray(indices, dtype=np.int64) - 1) % table.size]

    def sup_abs(self):
        return max(abs(v) for v in self.pattern)


@dataclass(frozen=True)
class Cosine(DiagonalSequence):
    """d_n = amplitude * cos(frequency * n + phase)."""

    amplitude: float
    frequency: float
    phase: float = 0.0

    def values(self, indices):
        n = np.asarray(indices, dtype=float)
        return self.amplitude * np.cos(self.frequency * n + self.phase)

    def sup_abs(self):
        return abs(float(self.amplitude))


@dataclass(frozen=True)
class Schrodinger(DiagonalSequence):
    """d_n = 8 sigma^2 phi(sin(2 n sigma^2) / sigma)."""

    potential: Potential
    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")

    def values(self, indices):
        s2 = self.sigma * self.sigma
        n = np.asarray(indices, dtype=float)
        arg = np.sin(2.0 * n * s2) / self.sigma
        return 8.0 * s2 * np.asarray(self.potential(arg), dtype=float)

    def sup_abs(self):
        # 1% slack on the sampled maximum keeps this an upper bound in practice
        r = 1.0 / self.sigma
        return 1.01 * 8.0 * self.sigma**2 * self.potential.sup_abs(-r, r)


@dataclass(frozen=True)
class Table(DiagonalSequence):
    """Explicit values laid out at indices start, start+1, ...; ``default`` elsewhere."""

    entries: tuple[float, ...]
    start: int = 1
    default: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(float(v) for v in self.entries))

    def values(self, indices):
        idx = np.asarray(indices, dtype=np.int64) - self.start
        out = np.full(idx.shape, float(self.default))
        inside = (idx >= 0) & (idx < len(self.entries))
        if inside.any():
            out[inside] = np.asarray(self.entries)[idx[inside]]
        return out

    def sup_abs(self):
        return max([abs(self.default)] + [abs(v) for v in self.entries])


def eval_diagonal(seq: DiagonalSequence, n: int) -> float:
    return seq(n)


# ---------------------------------------------------------------------------
# operators, filtrations, sections


def _unit_band() -> dict[int, DiagonalSequence]:
    return {1: Constant(1.0)}


@dataclass(frozen=True, eq=False)
class BandOperatorSpec:
    """Self-adjoint band operator; ``bands[k]`` generates entries (i, i+k) for k >= 1."""

    diagonal: DiagonalSequence
    bands: Mapping[int, DiagonalSequence] = field(default_factory=_unit_band)

    def __post_init__(self):
        bands = {}
        for k, seq in dict(self.bands).items():
            k = int(k)
            if k < 1:
                raise ValueError(f"band offsets must be >= 1, got {k}")
            bands[k] = seq
        object.__setattr__(self, "bands", dict(sorted(bands.items())))

    @property
    def bandwidth(self) -> int:
        return max(self.bands, default=0)

    @property
    def is_tridiagonal(self) -> bool:
        return self.bandwidth <= 1

    @property
    def has_unit_offdiagonal(self) -> bool:
        return self.bands == {1: Constant(1.0)}

    @classmethod
    def tridiagonal(cls, diagonal: DiagonalSequence) -> "BandOperatorSpec":
        """Diagonal ``diagonal`` with unit off-diagonals."""
        return cls(diagonal)

    def __eq__(self, other):
        if not isinstance(other, BandOperatorSpec):
            return NotImplemented
        return self.diagonal == other.diagonal and self.bands == other.bands

    def entries(self, indices) -> tuple[np.ndarray, dict[int, np.ndarray]]:
        """Diagonal and band values for a run of consecutive absolute indices."""
        indices = np.asarray(indices, dtype=np.int64)
        diag = self.diagonal.values(indices)
        bands = {}
        for k, seq in self.bands.items():
            bands[k] = seq.values(indices[: max(indices.size - k, 0)])
        return diag, bands


class Filtration(enum.Enum):
    UNILATERAL = "unilateral"
    BILATERAL = "bilateral"

    def indices(self, n: int) -> np.ndarray:
        if n < 1:
            raise ValueError("section index n must be >= 1")
        if self is Filtration.UNILATERAL:
            return np.arange(1, n + 1)
        return np.arange(-n, n + 1)

    def dimension(self, n: int) -> int:
        return n if self is Filtration.UNILATERAL else 2 * n + 1


@dataclass(frozen=True, eq=False)
class Section:
    """The finite matrix P_n A restricted to H_n."""

    dimension: int
    diagonal: np.ndarray
    bands: dict[int, np.ndarray]
    spec: BandOperatorSpec
    filtration: Filtration
    n: int

    @property
    def bandwidth(self) -> int:
        return max((k for k, v in self.bands.items() if v.size), default=0)

    def to_dense(self) -> np.ndarray:
        a = np.diag(self.diagonal).astype(float)
        for k, v in self.bands.items():
            if v.size:
                a += np.diag(v, k) + np.diag(v, -k)
        return a

    def to_tridiagonal(self) -> SymTridiagonal:
        if self.bandwidth > 1:
            raise ValueError("section has bandwidth > 1; not tridiagonal")
        off = self.bands.get(1, np.zeros(self.dimension - 1))
        if off.size != self.dimension - 1:
            off = np.zeros(self.dimension - 1)
        return SymTridiagonal(self.diagonal, off)

    def eigenvalues(self, tol: float | None = None, jobs: int = 1) -> EigenvalueList:
        if self.bandwidth <= 1:
            return eigenvalues(self.to_tridiagonal(), tol, jobs=jobs)
        # wider bands fall back to LAPACK's banded solver
        from scipy.linalg import eig_banded

        b = self.bandwidth
        ab = np.zeros((b + 1, self.dimension))
        ab[0] = self.diagonal
        for k, v in self.bands.items():
            ab[k, : v.size] = v
        vals = eig_banded(ab, lower=True, eigvals_only=True)
        return EigenvalueList(np.sort(vals), float(np.finfo(float).eps * max(1.0, np.abs(vals).max())))

    def gershgorin_radius(self) -> float:
        r = np.abs(self.diagonal).astype(float)
        for k, v in self.bands.items():
            a = np.abs(v)
            r[: a.size] += a
            r[k : k + a.size] += a
        return float(r.max())


def build_section(spec: BandOperatorSpec, filt: Filtration, n: int) -> Section:
    idx = filt.indices(n)
    diag, bands = spec.entries(idx)
    return Section(idx.size, diag, bands, spec, filt, n)


# ---------------------------------------------------------------------------
# diagnostics


def degree_estimate(
    spec: BandOperatorSpec,
    filt: Filtration,
    n_max: int,
    full_commutator: bool = False,
) -> int:
    """max over n <= n_max of the rank of the coupling block P_n A (1 - P_n).

    The commutator P_n A - A P_n of a self-adjoint A is that block minus its
    adjoint, so its rank is exactly twice the block rank; pass
    ``full_commutator=True`` for the commutator rank itself.  A unilateral
    section lives on the half-line, so only its upper cut couples to the
    outside; a bilateral section has two cuts.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    width = spec.bandwidth
    best = 0
    for n in range(1, n_max + 1):
        inside = filt.indices(n)
        lo, hi = int(inside[0]), int(inside[-1])
        rows = [i for i in range(hi - width + 1, hi + 1) if i >= lo]
        cols = list(range(hi + 1, hi + width + 1))
        if filt is Filtration.BILATERAL:
            rows += [i for i in range(lo, lo + width) if i <= hi and i not in rows]
            cols += list(range(lo - width, lo))
        if not rows or not cols:
            continue
        block = np.array([[_entry(spec, i, j) for j in cols] for i in rows])
        best = max(best, int(np.linalg.matrix_rank(block)))
    return 2 * best if full_commutator else best


def _entry(spec: BandOperatorSpec, i: int, j: int) -> float:
    if i == j:
        return spec.diagonal(i)
    k = abs(i - j)
    seq = spec.bands.get(k)
    return 0.0 if seq is None else seq(min(i, j))


def filtration_norm_bound(spec: BandOperatorSpec) -> float:
    """Sum over diagonals k of (1 + sqrt(2|k|)) * sup|a_{i,i+k}|.

    Bands +k and -k are both counted, so an off-diagonal generator contributes
    twice.
    """
    total = spec.diagonal.sup_abs()
    for k, seq in spec.bands.items():
        total += 2.0 * (1.0 + math.sqrt(2.0 * k)) * seq.sup_abs()
    return float(total)


@dataclass(frozen=True)
class PeriodicityReport:
    kind: str  # "periodic" | "aperiodic" | "inconclusive"
    period: int | None
    best_mismatch: float

    def to_dict(self):
        return {"kind": self.kind, "period": self.period, "best_mismatch": self.best_mismatch}


def periodicity_diagnostic(
    seq: DiagonalSequence, n_window: int = 512, tol: float = 1e-9, margin: float = 10.0
) -> PeriodicityReport:
    """Finite-window period search over p <= n_window // 4.

    Returns the smallest p with max |d_{n+p} - d_n| <= tol on [-n_window, n_window];
    "aperiodic" when every candidate misses by more than ``margin * tol``.
    A heuristic, not a proof.
    """
    if n_window < 16:
        raise ValueError("n_window must be at least 16")
    d = seq.values(np.arange(-n_window, n_window + 1))
    best = math.inf
    for p in range(1, n_window // 4 + 1):
        mismatch = float(np.max(np.abs(d[p:] - d[:-p])))
        if mismatch <= tol:
            return PeriodicityReport("periodic", p, mismatch)
        best = min(best, mismatch)
    if best > margin * tol:
        return PeriodicityReport("aperiodic", None, best)
    return PeriodicityReport("inconclusive", None, best)
