"""Dense real linear algebra with fixed sign conventions.

Everything here operates on plain float64 ``numpy`` arrays. Decompositions
are deterministic: left singular vectors have a positive first nonzero
entry, QR factors carry a non-negative R diagonal, and kernel completion
runs Gram-Schmidt against the canonical basis in index order. These
conventions make every downstream artifact (cores, gates, serialized
circuits) reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "SvdConvergenceError",
    "SvdResult",
    "TruncationPolicy",
    "svd",
    "truncated_svd",
    "qr_orthonormalize",
    "polyfit_least_squares",
    "null_space_completion",
]

_SIGN_EPS = 1e-12


class SvdConvergenceError(RuntimeError):
    """Raised when the iterative SVD solver exhausts its iteration budget."""

    def __init__(self, rows: int, cols: int):
        super().__init__(f"SVD failed to converge on a {rows}x{cols} matrix")
        self.rows = rows
        self.cols = cols


@dataclass(frozen=True)
class TruncationPolicy:
    """Which singular triplets a truncated SVD keeps.

    ``max_rank`` keeps at most that many leading triplets; ``threshold``
    drops singular values strictly below it. Both may be combined, in
    which case the stricter rule wins. The default keeps everything.
    """

    max_rank: int | None = None
    threshold: float | None = None

    def __post_init__(self):
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError(f"max_rank must be >= 1, got {self.max_rank}")
        if self.threshold is not None and self.threshold < 0:
            raise ValueError(f"threshold must be >= 0, got {self.threshold}")

    @classmethod
    def exact(cls) -> "TruncationPolicy":
        return cls()

    @classmethod
    def rank(cls, chi: int) -> "TruncationPolicy":
        return cls(max_rank=chi)

    def num_retained(self, singular_values: np.ndarray) -> int:
        """Number of leading triplets this policy keeps for the given spectrum."""
        n = len(singular_values)
        if self.threshold is not None:
            n = int(np.count_nonzero(singular_values >= self.threshold))
        if self.max_rank is not None:
            n = min(n, self.max_rank)
        return n


@dataclass(frozen=True)
class SvdResult:
    """Factors of (a possibly truncated) SVD, A ~= u @ diag(s) @ vt.

    ``truncation_error`` is the Frobenius norm of the discarded part,
    i.e. sqrt of the sum of squared omitted singular values.
    """

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    truncation_error: float

    @property
    def rank(self) -> int:
        return len(self.s)

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.s) @ self.vt


def _as_matrix(a) -> np.ndarray:
    # Contiguous copy-in: identical values give identical results
    # regardless of the caller's memory layout.
    m = np.ascontiguousarray(a, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-d array, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"matrix must be at least 1x1, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix contains non-finite entries")
    return m


def _fix_svd_signs(u: np.ndarray, vt: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # First nonzero entry of each left singular vector made positive,
    # compensated in the matching right singular vector.
    u = u.copy()
    vt = vt.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.nonzero(np.abs(col) > _SIGN_EPS)[0]
        if len(nz) and col[nz[0]] < 0:
            u[:, j] = -col
            vt[j, :] = -vt[j, :]
    return u, vt


def _raw_svd(m: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        return np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        pass
    try:
        # gesvd is slower but converges on matrices that defeat gesdd.
        return scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    except scipy.linalg.LinAlgError as exc:
        raise SvdConvergenceError(m.shape[0], m.shape[1]) from exc


def svd(a) -> SvdResult:
    """Full (thin) SVD with deterministic signs and zero truncation error."""
    m = _as_matrix(a)
    u, s, vt = _raw_svd(m)
    u, vt = _fix_svd_signs(u, vt)
    return SvdResult(u=u, s=s, vt=vt, truncation_error=0.0)


def truncated_svd(a, policy: TruncationPolicy) -> SvdResult:
    """SVD keeping only the triplets allowed by ``policy``.

    The reported ``truncation_error`` equals the Frobenius distance to the
    best approximation of the retained rank, i.e. sqrt(sum of squared
    discarded singular values).
    """
    m = _as_matrix(a)
    full = svd(m)
    keep = policy.num_retained(full.s)
    if keep == 0:
        if np.any(full.s > 0):
            raise ValueError(
                "truncation policy retains no singular values of a nonzero matrix"
            )
        keep = 1  # zero matrix: keep one null triplet so shapes stay valid
    err = float(np.sqrt(np.sum(full.s[keep:] ** 2)))
    return SvdResult(
        u=full.u[:, :keep],
        s=full.s[:keep],
        vt=full.vt[:keep, :],
        truncation_error=err,
    )


def _qr_signed(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Reduced QR with non-negative R diagonal; accepts any shape.
    q, r = np.linalg.qr(m, mode="reduced")
    d = np.diagonal(r).copy()
    flip = d < 0
    if np.any(flip):
        q = q.copy()
        r = r.copy()
        q[:, flip] = -q[:, flip]
        r[flip, :] = -r[flip, :]
    return q, r


def qr_orthonormalize(a) -> tuple[np.ndarray, np.ndarray]:
    """Reduced QR of a tall matrix, with the R diagonal made non-negative.

    Rank-deficient input is allowed; zero diagonal entries simply stay zero.
    """
    m = _as_matrix(a)
    if m.shape[0] < m.shape[1]:
        raise ValueError(f"need rows >= cols, got shape {m.shape}")
    return _qr_signed(m)


def polyfit_least_squares(xs, ys, degree: int) -> np.ndarray:
    """Least-squares polynomial fit, coefficients returned lowest degree first.

    The fit runs in a shifted/scaled coordinate on [-1, 1] to keep the
    Vandermonde system well conditioned, then the result is expanded back
    to the coordinates of ``xs``.
    """
    x = np.asarray(xs, dtype=float)
    y = np.asarray(ys, dtype=float)
    if degree < 0:
        raise ValueError("degree must be >= 0")
    if x.ndim != 1 or y.ndim != 1 or len(x) != len(y):
        raise ValueError("xs and ys must be 1-d sequences of equal length")
    if len(np.unique(x)) < degree + 1:
        raise ValueError(
            f"need at least {degree + 1} distinct sample points for degree {degree}"
        )
    fitted = np.polynomial.Polynomial.fit(x, y, deg=degree)
    coeffs = fitted.convert().coef
    if len(coeffs) < degree + 1:  # trailing zeros dropped by convert()
        coeffs = np.pad(coeffs, (0, degree + 1 - len(coeffs)))
    return coeffs


def null_space_completion(rows) -> np.ndarray:
    """Complete orthonormal rows to a full orthogonal basis.

    Input is an r x c matrix (r < c) with orthonormal rows; the result is
    a (c - r) x c matrix of orthonormal rows spanning the orthogonal
    complement. Stacking input over output gives a c x c orthogonal
    matrix. Deterministic: Gram-Schmidt against the canonical basis in
    index order, each new row's first nonzero entry made positive.
    """
    r = np.atleast_2d(_as_matrix(rows))
    n_rows, n_cols = r.shape
    if n_rows >= n_cols:
        raise ValueError(f"need fewer rows than columns, got shape {r.shape}")
    gram_dev = np.max(np.abs(r @ r.T - np.eye(n_rows)))
    if gram_dev > 1e-8:
        raise ValueError(f"input rows not orthonormal (deviation {gram_dev:.3e})")

    completed: list[np.ndarray] = []
    for i in range(n_cols):
        if len(completed) == n_cols - n_rows:
            break
        v = np.zeros(n_cols)
        v[i] = 1.0
        for _ in range(2):  # second pass removes round-off leakage
            v -= r.T @ (r @ v)
            for w in completed:
                v -= w * (w @ v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            v /= nrm
            nz = np.nonzero(np.abs(v) > _SIGN_EPS)[0]
            if len(nz) and v[nz[0]] < 0:
                v = -v
            completed.append(v)
    if len(completed) != n_cols - n_rows:
        raise ValueError("failed to complete the basis; input rows may be degenerate")
    return np.array(completed)
