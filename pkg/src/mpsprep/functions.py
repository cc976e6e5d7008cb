"""Target amplitude functions and their MPS encodings.

A :class:`DistributionSpec` names a probability density on an interval;
the amplitude to prepare is the square root of that density sampled on a
uniform 2^N-point grid and normalized. The grid is split into 2^k
regions addressed by the leading k bits, each region gets an independent
least-squares polynomial fit of the amplitude, and every regional
polynomial is encoded analytically as a small MPS whose leading cores are
masked to the region's bit prefix. Summing the masked pieces yields the
piecewise-polynomial state with bond dimension at most 2^k * (degree+1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from .linalg import polyfit_least_squares
from .mps import Mps, add

__all__ = [
    "DistributionSpec",
    "Grid",
    "Region",
    "PiecewisePoly",
    "pdf",
    "pdf_derivative",
    "target_amplitudes",
    "subdivide",
    "fit_piecewise",
    "poly_mps",
    "mask_region",
    "assemble",
]

_KINDS = ("gaussian", "lognormal", "lorentzian", "custom")


@dataclass(frozen=True)
class DistributionSpec:
    """A target density: one of the built-in families or a custom callable.

    ``domain`` is the closed interval the state discretizes. A lognormal
    with a lower bound of exactly zero is permitted at construction and
    resolved to a small positive cutoff by :meth:`resolved` once the qubit
    count is known.
    """

    kind: str
    mu: float = 0.0
    sigma: float = 1.0
    domain: tuple[float, float] = (0.0, 1.0)
    pdf_fn: Callable[[np.ndarray], np.ndarray] | None = field(
        default=None, compare=False
    )

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        a, b = self.domain
        if not (a < b):
            raise ValueError(f"domain must satisfy a < b, got {self.domain}")
        if self.kind != "custom" and self.sigma <= 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.kind == "custom" and self.pdf_fn is None:
            raise ValueError("custom distributions need a pdf_fn")
        if self.kind == "lognormal" and a < 0:
            raise ValueError("lognormal support starts at 0; domain must not")

    def resolved(self, n_qubits: int) -> "DistributionSpec":
        """Pin the domain before gridding.

        A lognormal whose lower bound is exactly 0 is shifted up by 2.5
        percent of the domain width: enough to clear the singularity and
        the vanishing left tail at any grid resolution, while keeping the
        cutoff independent of the qubit count so targets are comparable
        across system sizes. Other specs are returned unchanged.
        """
        a, b = self.domain
        if self.kind == "lognormal" and a == 0.0:
            return replace(self, domain=((b - a) / 40.0, b))
        return self


@dataclass(frozen=True)
class Grid:
    """Uniform discretization of [a, b] into 2^N points, endpoints included."""

    n_qubits: int
    a: float
    b: float

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError("n_qubits must be >= 1")
        if not (self.a < self.b):
            raise ValueError(f"need a < b, got [{self.a}, {self.b}]")

    @classmethod
    def for_spec(cls, spec: DistributionSpec, n_qubits: int) -> "Grid":
        a, b = spec.resolved(n_qubits).domain
        return cls(n_qubits, a, b)

    @property
    def size(self) -> int:
        return 2**self.n_qubits

    @property
    def width(self) -> float:
        return self.b - self.a

    @property
    def n_intervals(self) -> int:
        return self.size - 1

    @property
    def spacing(self) -> float:
        return self.width / self.n_intervals

    def point(self, k: int) -> float:
        """Coordinate of grid index k: a + k * width / (2^N - 1)."""
        if not 0 <= k < self.size:
            raise ValueError(f"index {k} outside [0, {self.size})")
        return self.a + k * self.width / self.n_intervals

    def points(self) -> np.ndarray:
        return np.linspace(self.a, self.b, self.size)


def pdf(spec: DistributionSpec, x):
    """Evaluate the density at x (scalar or array)."""
    xs = np.asarray(x, dtype=float)
    mu, sigma = spec.mu, spec.sigma
    if spec.kind == "gaussian":
        out = np.exp(-((xs - mu) ** 2) / (2 * sigma**2)) / (np.sqrt(2 * np.pi) * sigma)
    elif spec.kind == "lognormal":
        if np.any(xs <= 0):
            raise ValueError("lognormal density requires x > 0")
        g = np.exp(-((np.log(xs) - mu) ** 2) / (2 * sigma**2)) / (
            np.sqrt(2 * np.pi) * sigma
        )
        out = g / xs
    elif spec.kind == "lorentzian":
        out = (sigma / (2 * np.pi)) / ((xs - mu) ** 2 + sigma**2)
    else:
        out = np.asarray(spec.pdf_fn(xs), dtype=float)
    return out if out.ndim else float(out)


def pdf_derivative(spec: DistributionSpec, x):
    """Closed-form density derivative for the built-ins (array friendly)."""
    xs = np.asarray(x, dtype=float)
    mu, sigma = spec.mu, spec.sigma
    if spec.kind == "gaussian":
        out = -pdf(spec, xs) * (xs - mu) / sigma**2
    elif spec.kind == "lognormal":
        if np.any(xs <= 0):
            raise ValueError("lognormal density requires x > 0")
        g = np.exp(-((np.log(xs) - mu) ** 2) / (2 * sigma**2)) / (
            np.sqrt(2 * np.pi) * sigma
        )
        out = -g * (1.0 + (np.log(xs) - mu) / sigma**2) / xs**2
    elif spec.kind == "lorentzian":
        out = -(sigma / np.pi) * (xs - mu) / ((xs - mu) ** 2 + sigma**2) ** 2
    else:
        raise ValueError("no closed-form derivative for custom distributions")
    return out if out.ndim else float(out)


def target_amplitudes(spec: DistributionSpec, n_qubits: int) -> np.ndarray:
    """Exact normalized amplitude vector: sqrt(pdf) on the grid, unit norm."""
    grid = Grid.for_spec(spec, n_qubits)
    vals = np.asarray(pdf(spec.resolved(n_qubits), grid.points()), dtype=float)
    if np.any(vals < 0):
        raise ValueError("density is negative on the grid")
    amps = np.sqrt(vals)
    nrm = np.linalg.norm(amps)
    if nrm == 0.0:
        raise ValueError("density vanishes on the entire grid")
    return amps / nrm


@dataclass(frozen=True)
class Region:
    """One of the 2^k bit-prefix regions: grid indices [start, stop)."""

    index: int
    start: int
    stop: int
    x_start: float
    x_end: float


def subdivide(grid: Grid, support_bit: int) -> list[Region]:
    """Split the grid into 2^k contiguous regions keyed by the top k bits.

    Region j covers grid indices [j * 2^(N-k), (j+1) * 2^(N-k)); the
    membership of an index is exactly its k-bit big-endian prefix. The
    reported coordinates span the region's first through last grid point.
    """
    if not 0 <= support_bit < grid.n_qubits:
        raise ValueError(
            f"support_bit must be in [0, {grid.n_qubits}), got {support_bit}"
        )
    block = 2 ** (grid.n_qubits - support_bit)
    regions = []
    for j in range(2**support_bit):
        start, stop = j * block, (j + 1) * block
        regions.append(
            Region(j, start, stop, grid.point(start), grid.point(stop - 1))
        )
    return regions


@dataclass(frozen=True)
class PiecewisePoly:
    """Independent degree-p fits of the amplitude, one per bit-prefix region.

    Coefficients are lowest-degree first in the domain coordinate (no
    per-region recentering), so each vector can be fed straight to
    :func:`poly_mps`. No continuity is enforced at region boundaries.
    """

    support_bit: int
    degree: int
    regions: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        if len(self.regions) != 2**self.support_bit:
            raise ValueError(
                f"expected {2**self.support_bit} regions, got {len(self.regions)}"
            )
        for coeffs in self.regions:
            if len(coeffs) != self.degree + 1:
                raise ValueError("every region needs degree+1 coefficients")

    def values(self, grid: Grid) -> np.ndarray:
        """Evaluate the piecewise polynomial at every grid point."""
        out = np.empty(grid.size)
        xs = grid.points()
        for region in subdivide(grid, self.support_bit):
            coeffs = self.regions[region.index]
            out[region.start : region.stop] = np.polynomial.polynomial.polyval(
                xs[region.start : region.stop], coeffs
            )
        return out


def fit_piecewise(
    spec: DistributionSpec,
    grid: Grid,
    support_bit: int,
    degree: int,
    samples_per_region: int = 64,
) -> PiecewisePoly:
    """Least-squares fit of sqrt(pdf) over each region separately.

    Each region is sampled at ``samples_per_region`` uniformly spaced
    points spanning its grid coordinates. Regions are fit independently
    and may be discontinuous at the seams.
    """
    if samples_per_region < degree + 1:
        raise ValueError(
            f"need at least degree+1={degree + 1} samples per region, "
            f"got {samples_per_region}"
        )
    fits = []
    for region in subdivide(grid, support_bit):
        xs = np.linspace(region.x_start, region.x_end, samples_per_region)
        ys = np.sqrt(np.asarray(pdf(spec, xs), dtype=float))
        fits.append(tuple(polyfit_least_squares(xs, ys, degree)))
    return PiecewisePoly(support_bit=support_bit, degree=degree, regions=tuple(fits))


def poly_mps(coeffs, grid: Grid) -> Mps:
    """Encode a polynomial of the grid coordinate as an MPS, exactly.

    Writes x(k) as a sum of per-site contributions t_i (site 0 also
    absorbs the domain offset) and threads the binomial expansion of
    powers of partial sums through bonds of size degree+1: the bond
    carries the monomial basis of the remaining sum. Contraction at every
    grid index reproduces sum_j coeffs[j] * x(k)^j up to round-off.
    """
    a = np.asarray(coeffs, dtype=float).reshape(-1)
    if a.size == 0:
        raise ValueError("need at least one coefficient")
    p = a.size - 1
    n = grid.n_qubits
    step = grid.width / grid.n_intervals

    def contrib(site: int, bit: int) -> float:
        t = bit * 2 ** (n - 1 - site) * step
        if site == 0:
            t += grid.a
        return t

    if n == 1:
        vals = [
            sum(a[j] * contrib(0, s) ** j for j in range(p + 1)) for s in (0, 1)
        ]
        return Mps([np.array(vals).reshape(1, 2, 1)])

    def phi(s: int, t: float) -> float:
        return sum(a[k] * math.comb(k, s) * t ** (k - s) for k in range(s, p + 1))

    first = np.zeros((1, 2, p + 1))
    for bit in (0, 1):
        t = contrib(0, bit)
        first[0, bit, :] = [phi(s, t) for s in range(p + 1)]

    cores = [first]
    for site in range(1, n - 1):
        core = np.zeros((p + 1, 2, p + 1))
        for bit in (0, 1):
            t = contrib(site, bit)
            for i in range(p + 1):
                for j in range(i + 1):
                    core[i, bit, j] = math.comb(i, j) * t ** (i - j)
        cores.append(core)

    last = np.zeros((p + 1, 2, 1))
    for bit in (0, 1):
        t = contrib(n - 1, bit)
        last[:, bit, 0] = [t**i for i in range(p + 1)]
    cores.append(last)
    return Mps(cores)


def mask_region(m: Mps, region_index: int, support_bit: int) -> Mps:
    """Zero all amplitudes outside one bit-prefix region.

    For each of the leading ``support_bit`` sites, the core slice whose
    bit disagrees with the region index is zeroed; amplitudes inside the
    region are untouched.
    """
    if not 0 <= support_bit <= m.n_sites:
        raise ValueError(f"support_bit must be in [0, {m.n_sites}]")
    if not 0 <= region_index < 2**support_bit:
        raise ValueError(
            f"region_index must be in [0, {2**support_bit}), got {region_index}"
        )
    cores = [c.copy() for c in m.cores]
    for i in range(support_bit):
        bit = (region_index >> (support_bit - 1 - i)) & 1
        cores[i][:, 1 - bit, :] = 0.0
    return Mps(cores)


def assemble(pp: PiecewisePoly, grid: Grid) -> Mps:
    """Sum the masked regional polynomial MPS into one piecewise state.

    The result evaluates to the piecewise polynomial at every grid point
    and has bond dimension at most 2^k * (degree+1). It is not
    normalized; normalization happens once, before gate extraction.
    """
    total: Mps | None = None
    for j, coeffs in enumerate(pp.regions):
        piece = poly_mps(coeffs, grid)
        if pp.support_bit > 0:
            piece = mask_region(piece, j, pp.support_bit)
        total = piece if total is None else add(total, piece)
    return total
