"""Numerical primitives shared by the estimators.

Matrix conventions, for a graph with weighted degree matrix D and weighted
adjacency W:

* normalized adjacency  A = D^{-1/2} W D^{-1/2}  (symmetric, eigenvalues in
  [-1, 1], top eigenvector D^{1/2} 1),
* transition matrix     P = W D^{-1}             (column stochastic),
* lazy walk             (I + P) / 2.

All operators work on dense float64 vectors; the push machinery has its own
sparse path built on :class:`SparseVector`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSystemError
from .graph import Graph

__all__ = [
    "SparseVector",
    "TridiagonalMatrix",
    "apply_normalized_adjacency",
    "apply_transition",
    "apply_lazy_walk",
    "tridiag_solve_e1",
    "tridiag_eigen_range",
    "chebyshev_t",
    "chebyshev_walk_norms",
]

_PIVOT_FLOOR = 1e-14


@dataclass
class SparseVector:
    """A sparse vector as a mapping ``index -> value``.

    Entries never store an exact zero; arithmetic helpers drop entries that
    cancel.  ``dim`` is the ambient dimension, kept for shape checks.
    """

    entries: dict = field(default_factory=dict)
    dim: int = 0

    @classmethod
    def from_dense(cls, v: np.ndarray) -> "SparseVector":
        entries = {int(i): float(x) for i, x in enumerate(v) if x != 0.0}
        return cls(entries, len(v))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim)
        for i, x in self.entries.items():
            out[i] = x
        return out

    def get(self, i: int) -> float:
        return self.entries.get(i, 0.0)

    def support(self):
        return self.entries.keys()

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def norm1(self) -> float:
        return float(sum(abs(x) for x in self.entries.values()))

    def norm2(self) -> float:
        return float(np.sqrt(sum(x * x for x in self.entries.values())))


@dataclass
class TridiagonalMatrix:
    """Symmetric tridiagonal matrix T with diagonal ``alpha`` and
    off-diagonal ``beta`` (``len(beta) == len(alpha) - 1``)."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        self.alpha = np.asarray(self.alpha, dtype=np.float64)
        self.beta = np.asarray(self.beta, dtype=np.float64)
        if self.alpha.ndim != 1 or self.beta.ndim != 1:
            raise ValueError("alpha and beta must be 1-d")
        if self.alpha.size == 0:
            raise ValueError("tridiagonal matrix must have order >= 1")
        if len(self.beta) != len(self.alpha) - 1:
            raise ValueError(
                f"off-diagonal length {len(self.beta)} does not match "
                f"order {len(self.alpha)}"
            )

    @property
    def order(self) -> int:
        return len(self.alpha)

    def to_dense(self) -> np.ndarray:
        k = self.order
        t = np.zeros((k, k))
        np.fill_diagonal(t, self.alpha)
        for i, b in enumerate(self.beta):
            t[i, i + 1] = t[i + 1, i] = b
        return t


# ---------------------------------------------------------------------------
# graph operators
# ---------------------------------------------------------------------------


def _check_dim(g: Graph, v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (g.node_count,):
        raise ValueError(
            f"vector of shape {v.shape} does not match graph with n={g.node_count}"
        )
    return v


def apply_normalized_adjacency(g: Graph, v: np.ndarray) -> np.ndarray:
    """Return ``A v`` for the normalized adjacency A = D^{-1/2} W D^{-1/2}."""
    v = _check_dim(g, v)
    scaled = v * g.inv_sqrt_degrees
    contrib = g.weights * scaled[g.neighbors]
    return np.add.reduceat(contrib, g.offsets[:-1]) * g.inv_sqrt_degrees


def apply_transition(g: Graph, v: np.ndarray) -> np.ndarray:
    """Return ``P v`` for the column-stochastic transition P = W D^{-1}."""
    v = _check_dim(g, v)
    scaled = v * g.inv_degrees
    contrib = g.weights * scaled[g.neighbors]
    return np.add.reduceat(contrib, g.offsets[:-1])


def apply_lazy_walk(g: Graph, v: np.ndarray) -> np.ndarray:
    """Return ``(I + P) v / 2``, one step of the lazy random walk."""
    v = _check_dim(g, v)
    return 0.5 * (v + apply_transition(g, v))


# ---------------------------------------------------------------------------
# tridiagonal kernels
# ---------------------------------------------------------------------------


def tridiag_solve_e1(t: TridiagonalMatrix) -> np.ndarray:
    """Solve ``(I - T) x = e_1`` by an LDL^T factorization.

    Runs in O(k) time and memory.  Raises :class:`SingularSystemError`
    when a pivot falls below 1e-14 in magnitude.
    """
    k = t.order
    diag = 1.0 - t.alpha
    off = -t.beta
    d = np.empty(k)
    lower = np.empty(max(k - 1, 0))
    d[0] = diag[0]
    if abs(d[0]) < _PIVOT_FLOOR:
        raise SingularSystemError("(I - T) is numerically singular (zero pivot)")
    for i in range(k - 1):
        lower[i] = off[i] / d[i]
        d[i + 1] = diag[i + 1] - off[i] * lower[i]
        if abs(d[i + 1]) < _PIVOT_FLOOR:
            raise SingularSystemError("(I - T) is numerically singular (zero pivot)")
    # forward substitution L z = e_1, then diagonal scale and back pass
    z = np.empty(k)
    z[0] = 1.0
    for i in range(k - 1):
        z[i + 1] = -lower[i] * z[i]
    z /= d
    x = np.empty(k)
    x[k - 1] = z[k - 1]
    for i in range(k - 2, -1, -1):
        x[i] = z[i] - lower[i] * x[i + 1]
    return x


def _sturm_count_below(alpha: np.ndarray, beta_sq: np.ndarray, x: float) -> int:
    """Number of eigenvalues of the tridiagonal matrix strictly below x."""
    # pivot floor large enough that beta_sq / d cannot overflow
    floor = 1e-154
    count = 0
    d = 1.0
    for i in range(len(alpha)):
        d = alpha[i] - x - (beta_sq[i - 1] / d if i > 0 else 0.0)
        if abs(d) < floor:
            d = -floor if d <= 0.0 else floor
        if d < 0.0:
            count += 1
    return count


def tridiag_eigen_range(t: TridiagonalMatrix, tol: float = 1e-10):
    """Extreme eigenvalues ``(lambda_min, lambda_max)`` of a symmetric
    tridiagonal matrix, via Sturm-sequence bisection.

    O(k) memory; each bisection step costs O(k).  ``tol`` is the absolute
    bracket width at which bisection stops.
    """
    alpha = t.alpha
    beta = t.beta
    k = t.order
    if k == 1:
        a = float(alpha[0])
        return a, a
    beta_sq = beta * beta
    radius = np.zeros(k)
    radius[:-1] += np.abs(beta)
    radius[1:] += np.abs(beta)
    lo = float(np.min(alpha - radius))
    hi = float(np.max(alpha + radius))

    def bisect(target: int) -> float:
        # smallest x with at least `target` eigenvalues strictly below it,
        # located to within tol
        a, b = lo - tol, hi + tol
        while b - a > tol:
            mid = 0.5 * (a + b)
            if _sturm_count_below(alpha, beta_sq, mid) >= target:
                b = mid
            else:
                a = mid
        return 0.5 * (a + b)

    return bisect(1), bisect(k)


# ---------------------------------------------------------------------------
# Chebyshev walk diagnostics
# ---------------------------------------------------------------------------


def chebyshev_t(x: float, l: int) -> float:
    """Chebyshev polynomial T_l(x) by the three-term recurrence.

    Scalar reference for the vector recurrence used in
    :func:`chebyshev_walk_norms`; matches ``cos(l * arccos(x))`` on [-1, 1].
    """
    if l < 0:
        raise ValueError("order must be nonnegative")
    prev, cur = 1.0, x
    if l == 0:
        return prev
    for _ in range(l - 1):
        prev, cur = cur, 2.0 * x * cur - prev
    return cur


def chebyshev_walk_norms(g: Graph, u: int, k: int, weighted: bool = True) -> np.ndarray:
    """The sequence ``||D^{1/2} T_i(P) e_u||_1`` for i = 0..k.

    ``T_i`` is the Chebyshev polynomial applied to the transition matrix P
    through the recurrence T_0 = I, T_1 = P,
    T_{i+1} = 2 P T_i - T_{i-1}.  With ``weighted=False`` the plain norms
    ``||T_i(P) e_u||_1`` are returned instead.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if not 0 <= u < g.node_count:
        raise IndexError(f"vertex {u} out of range for graph with n={g.node_count}")
    sqrt_d = np.sqrt(g.weighted_degrees) if weighted else None

    def measure(vec: np.ndarray) -> float:
        if weighted:
            return float(np.sum(np.abs(vec) * sqrt_d))
        return float(np.sum(np.abs(vec)))

    norms = np.empty(k + 1)
    prev = np.zeros(g.node_count)
    prev[u] = 1.0
    norms[0] = measure(prev)
    if k == 0:
        return norms
    cur = apply_transition(g, prev)
    norms[1] = measure(cur)
    for i in range(2, k + 1):
        prev, cur = cur, 2.0 * apply_transition(g, cur) - prev
        norms[i] = measure(cur)
    return norms
