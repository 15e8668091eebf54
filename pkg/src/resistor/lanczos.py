"""Global Lanczos estimator for single-pair resistance distance.

The resistance distance can be written in the normalized adjacency A as

    r(s, t) = (1/d_s + 1/d_t) * v_1^T (I - A)^+ v_1,

with the unit start vector v_1 proportional to
e_s / sqrt(d_s) - e_t / sqrt(d_t).  Since v_1 is orthogonal to the top
eigenvector of A, k steps of the Lanczos recurrence reduce the quadratic
form to e_1^T (I - T)^{-1} e_1 on the k x k tridiagonal Rayleigh quotient
T, computable in O(k) once T is known.

Only three dense vectors are kept at any time.  The two-pass potential
solver repeats the identical recurrence instead of storing the basis, so
both passes see bit-identical coefficients.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .baselines import RDEstimate, _check_pair
from .graph import Graph
from .kernels import TridiagonalMatrix, apply_normalized_adjacency, tridiag_solve_e1

__all__ = [
    "LanczosRun",
    "lanczos_rd",
    "lanczos_potential",
    "lanczos_iteration_bound",
]

BREAKDOWN_TOL = 1e-14


@dataclass
class LanczosRun:
    """Diagnostics from one Lanczos recurrence.

    ``k_effective`` is the number of completed iterations (equal to the
    order of ``t``); ``breakdown`` is set when the recurrence terminated
    early because the next off-diagonal fell below 1e-14, which means the
    Krylov space is exhausted and the estimate is exact.
    ``v1_scale`` is ||e_s / sqrt(d_s) - e_t / sqrt(d_t)||_2.
    """

    t: TridiagonalMatrix
    k_effective: int
    v1_scale: float
    breakdown: bool


def lanczos_iteration_bound(kappa: float, eps: float) -> int:
    """Iterations sufficient for the Lanczos estimator to reach error
    ``eps``: ``ceil(sqrt(kappa) ln(kappa / eps))``."""
    if kappa < 1.0 or eps <= 0.0:
        raise ValueError("need kappa >= 1 and eps > 0")
    return max(1, math.ceil(math.sqrt(kappa) * math.log(kappa / eps)))


def _recurrence(g: Graph, s: int, t: int, k: int, visit=None, reorthogonalize=False):
    """Run k steps of Lanczos on A from the s,t start vector.

    ``visit(i, v_i)`` is called with every basis vector as it is formed
    (i starting at 1); callers must not mutate ``v_i``.  Returns
    ``(alphas, betas, k_effective, breakdown, v1_scale)`` where ``betas``
    holds the off-diagonals beta_2..beta_{k_effective}.

    The function is deterministic: re-running it with the same arguments
    replays the identical float sequence, which lanczos_potential relies
    on for its store-nothing second pass.

    The top eigenvector of A is known in closed form (u_1 proportional to
    D^{1/2} 1).  The start vector is orthogonal to it, but rounding leaks
    a u_1 component that every normalization by 1/beta amplifies; run
    long enough (k near n, or a few dozen steps on ill-conditioned
    graphs) and T grows a spurious eigenvalue at 1, making (I - T)
    singular.  Projecting u_1 back out after each matvec is exact in real
    arithmetic and suppresses the drift without storing any basis.
    """
    n = g.node_count
    sqrt_d = g.sqrt_degrees
    total_d = float(g.weighted_degrees.sum())
    v = np.zeros(n)
    v[s] = g.inv_sqrt_degrees[s]
    v[t] = -g.inv_sqrt_degrees[t]
    scale = float(np.linalg.norm(v))
    v = v / scale
    if visit is not None:
        visit(1, v)
    basis = [v.copy()] if reorthogonalize else None
    v_prev = np.zeros(n)
    beta = 0.0
    alphas: list = []
    betas: list = []
    breakdown = False
    for i in range(1, k + 1):
        w = apply_normalized_adjacency(g, v)
        w -= (float(sqrt_d @ w) / total_d) * sqrt_d
        if beta != 0.0:
            w -= beta * v_prev
        alpha = float(w @ v)
        w -= alpha * v
        alphas.append(alpha)
        if reorthogonalize:
            for b in basis:
                w -= (w @ b) * b
        beta_next = float(np.linalg.norm(w))
        if i == k:
            break
        if beta_next < BREAKDOWN_TOL:
            breakdown = True
            break
        betas.append(beta_next)
        v_prev = v
        v = w / beta_next
        beta = beta_next
        if reorthogonalize:
            basis.append(v.copy())
        if visit is not None:
            visit(i + 1, v)
    return alphas, betas, len(alphas), breakdown, scale


def lanczos_rd(
    g: Graph, s: int, t: int, k: int, reorthogonalize: bool = False
) -> tuple:
    """Estimate the resistance distance with k Lanczos iterations.

    Returns ``(RDEstimate, LanczosRun)``.  ``reorthogonalize`` is a debug
    flag that orthogonalizes each new vector against the full stored
    basis; the production path keeps only three vectors and does not
    reorthogonalize.
    """
    _check_pair(g, s, t)
    if k < 1:
        raise ValueError("iteration count k must be >= 1")
    start = time.perf_counter()
    if s == t:
        run = LanczosRun(TridiagonalMatrix([0.0], []), 0, 0.0, False)
        return RDEstimate(0.0, 0, 0, time.perf_counter() - start, "lz"), run
    alphas, betas, k_eff, breakdown, scale = _recurrence(
        g, s, t, k, reorthogonalize=reorthogonalize
    )
    tmat = TridiagonalMatrix(alphas, betas)
    x = tridiag_solve_e1(tmat)
    value = (1.0 / g.weighted_degrees[s] + 1.0 / g.weighted_degrees[t]) * x[0]
    est = RDEstimate(
        value=float(value),
        iterations=k_eff,
        touched_edges=k_eff * 2 * g.edge_count,
        wall_time=time.perf_counter() - start,
        method="lz",
    )
    return est, LanczosRun(tmat, k_eff, scale, breakdown)


def lanczos_potential(g: Graph, s: int, t: int, k: int) -> np.ndarray:
    """Approximate electric potential phi with L phi = e_s - e_t.

    Computed as sqrt(1/d_s + 1/d_t) * D^{-1/2} V (I - T)^{-1} e_1 with two
    passes over the Lanczos recurrence: the first builds T, the second
    replays the identical recurrence and accumulates V y on the fly, so
    the basis is never stored.  Memory stays at O(n) regardless of k.

    The result is a genuine potential (its Laplacian image is e_s - e_t
    up to the recurrence truncation error); it is normalized against the
    degree vector rather than the all-ones vector, so compare potentials
    through differences only.
    """
    _check_pair(g, s, t)
    if k < 1:
        raise ValueError("iteration count k must be >= 1")
    if s == t:
        return np.zeros(g.node_count)
    alphas, betas, k_eff, _, _ = _recurrence(g, s, t, k)
    y = tridiag_solve_e1(TridiagonalMatrix(alphas, betas))

    acc = np.zeros(g.node_count)

    def visit(i: int, v: np.ndarray) -> None:
        acc[:] += y[i - 1] * v

    _recurrence(g, s, t, k, visit=visit)
    scale = math.sqrt(
        1.0 / g.weighted_degrees[s] + 1.0 / g.weighted_degrees[t]
    )
    return scale * (g.inv_sqrt_degrees * acc)
