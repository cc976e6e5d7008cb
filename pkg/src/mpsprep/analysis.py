"""Spectral decay regression and rank-2 accuracy estimation.

Schmidt spectra of smooth amplitude vectors decay near-exponentially at
every cut. Fitting sigma_k = alpha * exp(-beta * k) (k counted from 1)
per cut and jointly over all cuts gives a decay rate beta from which a
closed-form upper bound on the normalized squared error of a rank-chi
truncation follows by summing the model geometrically. A decay rate of
ln(100)/(2*chi) marks the 99 percent accuracy threshold.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .functions import DistributionSpec, Grid, pdf, pdf_derivative

__all__ = [
    "DecayFit",
    "fit_decay",
    "chi_bound",
    "optimality_ratio",
    "max_derivative",
]

_FLOOR_RATIO = 1e-13


@dataclass(frozen=True)
class DecayFit:
    """Exponential decay parameters per cut and pooled over all cuts.

    ``per_cut[j]`` is an (alpha, beta) pair, or None when that cut kept
    fewer than two values above the noise floor. ``joint`` pools every
    usable (k, log sigma) point with equal weight; ``r_squared`` is the
    pooled fit's coefficient of determination.
    """

    per_cut: tuple[tuple[float, float] | None, ...]
    joint: tuple[float, float]
    r_squared: float

    @property
    def beta(self) -> float:
        return self.joint[1]


def _loglinear(ks: np.ndarray, logs: np.ndarray) -> tuple[float, float]:
    slope, intercept = np.polyfit(ks, logs, 1)
    return float(np.exp(intercept)), float(-slope)


def fit_decay(spectra) -> DecayFit:
    """Fit the exponential decay model to singular spectra.

    Values below 1e-13 of each cut's leading singular value are treated
    as numerical noise and excluded. Cuts left with fewer than two points
    are skipped with a warning; if every cut is skipped this raises.
    """
    per_cut = []
    all_ks: list[np.ndarray] = []
    all_logs: list[np.ndarray] = []
    for j, spectrum in enumerate(spectra):
        s = np.asarray(spectrum, dtype=float)
        if s.size == 0 or s[0] <= 0.0:
            warnings.warn(f"cut {j}: empty or zero spectrum, skipped")
            per_cut.append(None)
            continue
        keep = s > _FLOOR_RATIO * s[0]
        ks = np.arange(1, s.size + 1, dtype=float)[keep]
        vals = s[keep]
        if ks.size < 2:
            warnings.warn(f"cut {j}: fewer than 2 usable singular values, skipped")
            per_cut.append(None)
            continue
        logs = np.log(vals)
        per_cut.append(_loglinear(ks, logs))
        all_ks.append(ks)
        all_logs.append(logs)
    if not all_ks:
        raise ValueError("no cut kept enough singular values to fit")
    ks = np.concatenate(all_ks)
    logs = np.concatenate(all_logs)
    alpha, beta = _loglinear(ks, logs)
    predicted = np.log(alpha) - beta * ks
    ss_res = float(np.sum((logs - predicted) ** 2))
    ss_tot = float(np.sum((logs - logs.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return DecayFit(per_cut=tuple(per_cut), joint=(alpha, beta), r_squared=r2)


def _log_sinh(x: float) -> float:
    # log(sinh(x)) for x > 0 without overflow.
    return x + math.log1p(-math.exp(-2.0 * x)) - math.log(2.0)


def chi_bound(beta: float, chi: int, n: int) -> float:
    """Normalized squared-error bound for a rank-chi truncation.

    Summing the decay model geometrically over singular values k = chi+1
    .. N against the total over k = 1 .. N gives

        exp(-beta*chi) * sinh(beta*(N-chi)) / sinh(beta*N)

    which is ~exp(-2*beta*chi) for moderate beta*N. It equals 1 at
    chi = 0, vanishes at chi >= N, and decreases monotonically in both
    beta and chi.
    """
    if beta <= 0:
        raise ValueError(f"beta must be > 0, got {beta}")
    if chi < 0 or n < 1:
        raise ValueError("need chi >= 0 and n >= 1")
    if chi >= n:
        return 0.0
    if chi == 0:
        return 1.0
    log_bound = -beta * chi + _log_sinh(beta * (n - chi)) - _log_sinh(beta * n)
    return math.exp(log_bound)


def optimality_ratio(circuit_fidelity: float, optimal_fidelity: float) -> float:
    """Circuit fidelity relative to the best rank-2 truncation's fidelity."""
    if optimal_fidelity <= 0.0:
        raise ValueError("optimal fidelity must be positive")
    return circuit_fidelity / optimal_fidelity


def max_derivative(spec: DistributionSpec, n_qubits: int) -> float:
    """Largest |pdf'| over the grid; closed form for the built-in families.

    Custom densities fall back to central differences at grid resolution.
    """
    spec = spec.resolved(n_qubits)
    grid = Grid.for_spec(spec, n_qubits)
    xs = grid.points()
    if spec.kind == "custom":
        derivs = np.gradient(np.asarray(pdf(spec, xs), dtype=float), xs)
    else:
        derivs = np.asarray(pdf_derivative(spec, xs), dtype=float)
    return float(np.max(np.abs(derivs)))
