"""Discretized one-dimensional Schrodinger operators as tridiagonal operators.

With step size sigma, momentum and position are replaced by
``sin(sigma P) / sigma`` and ``sin(sigma Q) / sigma``, and the discretized
Hamiltonian ``H = P_sigma^2 / 2 + phi(Q_sigma)`` is realised as

    H = a T + b,    a = 1 / (8 sigma^2),    b = 1 / (4 sigma^2),

where T is tridiagonal with unit off-diagonals and diagonal
``d_n = 8 sigma^2 phi(sin(2 n sigma^2) / sigma)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .operator_model import BandOperatorSpec, Filtration, Potential, Schrodinger
from .spectral_analysis import (
    ClassificationReport,
    Schedule,
    essential_spectrum_estimate,
    map_report,
)

RATIONAL_TOL = 1e-9
MAX_DENOMINATOR = 64


class PeriodicRegimeWarning(UserWarning):
    """sigma^2 / pi is numerically a rational with a small denominator."""


def near_rational_ratio(sigma: float) -> Fraction | None:
    """p/q (q <= 64) within 1e-9 of sigma^2 / pi, or None."""
    ratio = sigma * sigma / math.pi
    frac = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
    if abs(ratio - float(frac)) <= RATIONAL_TOL:
        return frac
    return None


@dataclass(frozen=True)
class DiscretizationParams:
    sigma: float
    potential: Potential

    def __post_init__(self):
        if not (np.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be positive")

    @property
    def irrational(self) -> bool:
        """True when sigma^2 / pi is not close to a small-denominator rational."""
        return near_rational_ratio(self.sigma) is None


@dataclass(frozen=True)
class AffineForm:
    """x -> a x + b with a > 0."""

    a: float
    b: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("affine slope must be positive")

    def __call__(self, x):
        return self.a * x + self.b

    def inverse(self) -> "AffineForm":
        return AffineForm(1.0 / self.a, -self.b / self.a)


def affine_form(sigma: float) -> AffineForm:
    # the proof's representation gives +1/(4 sigma^2); the printed statement has a minus sign
    return AffineForm(1.0 / (8.0 * sigma * sigma), 1.0 / (4.0 * sigma * sigma))


def build_hamiltonian(params: DiscretizationParams) -> tuple[BandOperatorSpec, AffineForm]:
    """Tridiagonal T and the affine form with sigma(H) = a sigma(T) + b."""
    if not params.irrational:
        frac = near_rational_ratio(params.sigma)
        warnings.warn(
            f"sigma^2/pi is within {RATIONAL_TOL:g} of {frac}; "
            "the diagonal is periodic in this regime",
            PeriodicRegimeWarning,
            stacklevel=2,
        )
    spec = BandOperatorSpec(Schrodinger(params.potential, params.sigma))
    return spec, affine_form(params.sigma)


def momentum_symbol(sigma: float, p):
    """sin(sigma p) / sigma."""
    return np.sin(sigma * np.asarray(p, dtype=float)) / sigma


def position_symbol(sigma: float, x):
    """sin(sigma x) / sigma."""
    return np.sin(sigma * np.asarray(x, dtype=float)) / sigma


def kinetic_range(sigma: float) -> tuple[float, float]:
    """Range of p -> (sin(sigma p) / sigma)^2 / 2 over one period: [0, 1/(2 sigma^2)]."""
    return 0.0, 0.5 / (sigma * sigma)


def map_spectrum(form: AffineForm, s):
    """Apply x -> a x + b to a point, an interval (lo, hi), or a list of either.

    The shape of the input is preserved; intervals keep lo <= hi since a > 0.
    """
    if isinstance(s, (int, float, np.floating, np.integer)):
        return float(form(float(s)))
    if isinstance(s, tuple):
        return tuple(map_spectrum(form, x) for x in s)
    if isinstance(s, list):
        return [map_spectrum(form, x) for x in s]
    if isinstance(s, np.ndarray):
        return form(s)
    raise TypeError(f"cannot map {type(s).__name__}")


def hamiltonian_spectrum(
    params: DiscretizationParams,
    grid_resolution: float = 0.05,
    sched: Schedule | None = None,
    filtration: Filtration = Filtration.BILATERAL,
    jobs: int = 1,
) -> ClassificationReport:
    """Essential-spectrum report for H_sigma, in H_sigma coordinates.

    The grid is classified for T at resolution ``grid_resolution`` and then
    mapped by the affine form, so the window width in the returned report is
    ``a * grid_resolution``.
    """
    spec, form = build_hamiltonian(params)
    report = essential_spectrum_estimate(spec, filtration, grid_resolution, sched, jobs=jobs)
    return map_report(report, form.a, form.b)
