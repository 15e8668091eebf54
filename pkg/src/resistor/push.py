"""Local Lanczos estimator: the recurrence restricted to significant entries.

This is the only estimator whose per-iteration cost depends on the local
neighborhood of s and t instead of the whole graph.  It runs the same
three-term recurrence as the global Lanczos method but

* multiplies through a pruned operator that relaxes an arc (u, x) only
  when |v(u)| > eps * sqrt(d_u d_x)  (see :func:`amv`), and
* applies the alpha/beta subtractions only on the significant set
  S_i = {u : |v_i(u)| > eps * d_u}, with S_{i-1} cached from the previous
  iteration.

Degree-scaled thresholds make the pruning error at a vertex proportional
to its degree, which is what keeps the recurrence residual controlled:
with unit coefficient bounds the per-entry deviation from the exact
recurrence is at most 3 * eps * d_u per iteration (recorded per run when
``collect_stats`` is set).

The resulting perturbed tridiagonal matrix T changes the estimate formula:
the perturbed basis is no longer orthogonal, so the output uses the full
first-row products v_1^T V instead of e_1^T, i.e.

    r = (1/d_s + 1/d_t) * (v_1^T V) (I - T)^{-1} e_1.

Since v_1 is supported on {s, t}, each product v_1^T v_j costs O(1) and is
accumulated online; no second pass and no stored basis.

Everything here assumes the spectrum-containment property of the perturbed
matrix: eigenvalues of T must stay within [lambda_min(A), lambda_2(A)], in
particular below 1 so that (I - T) is positive definite.
:func:`check_assumption` verifies this for a finished run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import RDEstimate, _check_pair
from .errors import SingularSystemError
from .graph import Graph
from .kernels import (
    SparseVector,
    TridiagonalMatrix,
    chebyshev_walk_norms,
    tridiag_eigen_range,
    tridiag_solve_e1,
)
from .lanczos import BREAKDOWN_TOL

__all__ = [
    "PushConfig",
    "PushStats",
    "PushTrace",
    "AssumptionReport",
    "amv",
    "restrict",
    "lanczos_push_rd",
    "subset_recurrence_trace",
    "check_assumption",
    "measure_c1",
    "measure_c1_plain",
    "measure_c2",
]


@dataclass
class PushConfig:
    """Parameters of a push run.

    ``epsilon = 0`` disables all pruning and reproduces the global Lanczos
    recurrence exactly (up to summation order).  ``collect_stats`` turns on
    the expensive diagnostics (exact matvecs per iteration) used by the
    locality studies; leave it off for production runs.
    """

    k: int
    epsilon: float
    collect_stats: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("iteration count k must be >= 1")
        if not (math.isfinite(self.epsilon) and self.epsilon >= 0.0):
            raise ValueError("epsilon must be finite and >= 0")


@dataclass
class PushStats:
    """Per-iteration and aggregate work counters for one push run.

    ``edges_relaxed[i]`` counts arc relaxations in the pruned matvec of
    iteration i + 1; ``touched_edges`` is their total.  ``extra_ops``
    counts the O(support) bookkeeping (subtractions and inner products),
    kept separate from edge work.  ``c2_terms`` and
    ``delta_degree_ratios`` are filled only when stats collection is on:
    the former holds ||v_i||_1 + ||A v_i^+||_1 + ||A v_i^-||_1 per
    iteration, the latter max_u |delta_i(u)| / d_u for the recurrence
    residual delta_i.
    """

    n: int = 0
    subset_sizes: list = field(default_factory=list)
    support_sizes: list = field(default_factory=list)
    edges_relaxed: list = field(default_factory=list)
    c2_terms: list = field(default_factory=list)
    delta_degree_ratios: list = field(default_factory=list)
    touched_edges: int = 0
    extra_ops: int = 0
    peak_support: int = 0


@dataclass
class PushTrace:
    """Full record of a subset recurrence, for replay and diagnostics."""

    alphas: np.ndarray
    betas: np.ndarray
    vectors: list
    first_row: np.ndarray
    k_effective: int
    breakdown: bool
    estimate: float
    stats: PushStats


@dataclass
class AssumptionReport:
    """Outcome of the eigenvalue-containment check for a perturbed T.

    ``lower_slack`` is lambda_min(T) - lambda_min(A) and ``upper_slack``
    is lambda_2(A) - lambda_max(T); the check passes when both are above
    ``-tol``.
    """

    passed: bool
    lambda_min_t: float
    lambda_max_t: float
    lambda_min_a: float
    lambda_2_a: float
    lower_slack: float
    upper_slack: float
    tol: float


def _entries_of(v) -> dict:
    if isinstance(v, SparseVector):
        return v.entries
    return v


def _amv_entries(g: Graph, entries: dict, eps: float):
    """Pruned normalized-adjacency matvec on a sparse entry dict.

    Returns ``(out_entries, relaxed)`` where ``relaxed`` counts relaxed
    arcs.  Deterministic: sources in insertion order, targets in CSR
    (ascending) order.
    """
    offsets, neighbors, weights = g.offsets, g.neighbors, g.weights
    inv_sqrt = g.inv_sqrt_degrees
    sqrt_d = g.sqrt_degrees
    out: dict = {}
    relaxed = 0
    for u, val in entries.items():
        lo, hi = offsets[u], offsets[u + 1]
        nb = neighbors[lo:hi]
        wt = weights[lo:hi]
        if eps > 0.0:
            mask = abs(val) > eps * sqrt_d[u] * sqrt_d[nb]
            if not mask.any():
                continue
            nb = nb[mask]
            wt = wt[mask]
        adds = (val * inv_sqrt[u]) * (wt * inv_sqrt[nb])
        for x, a in zip(nb.tolist(), adds.tolist()):
            out[x] = out.get(x, 0.0) + a
        relaxed += len(nb)
    return out, relaxed


def amv(g: Graph, v: SparseVector, eps: float) -> SparseVector:
    """Approximate matrix-vector product with the normalized adjacency.

    Relaxes an arc (u, x) iff |v(u)| > eps * sqrt(d_u * d_x) (strict),
    adding v(u) * w(u, x) / sqrt(d_u * d_x) at x.  With ``eps = 0`` this
    is the exact product over the support of ``v``.
    """
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    out, _ = _amv_entries(g, _entries_of(v), eps)
    out = {u: x for u, x in out.items() if x != 0.0}
    return SparseVector(out, g.node_count)


def restrict(v: SparseVector, g: Graph, eps: float) -> SparseVector:
    """Keep only the significant entries: those with |v(u)| > eps * d_u."""
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    deg = g.weighted_degrees
    kept = {u: x for u, x in _entries_of(v).items() if abs(x) > eps * deg[u]}
    return SparseVector(kept, g.node_count)


def _dot_entries(a: dict, b: dict) -> float:
    if len(a) > len(b):
        a, b = b, a
    total = 0.0
    for u, x in a.items():
        y = b.get(u)
        if y is not None:
            total += x * y
    return total


def _split_exact_matvec(g: Graph, entries: dict):
    """Exact A v together with ||A v^+||_1 and ||A v^-||_1 (stats only)."""
    pos = {u: x for u, x in entries.items() if x > 0.0}
    neg = {u: -x for u, x in entries.items() if x < 0.0}
    apos, _ = _amv_entries(g, pos, 0.0)
    aneg, _ = _amv_entries(g, neg, 0.0)
    exact = dict(apos)
    for u, x in aneg.items():
        exact[u] = exact.get(u, 0.0) - x
    pos_l1 = sum(abs(x) for x in apos.values())
    neg_l1 = sum(abs(x) for x in aneg.values())
    return exact, float(pos_l1), float(neg_l1)


def _run_subset_recurrence(
    g: Graph,
    s: int,
    t: int,
    k: int,
    eps: float,
    v1_entries: dict,
    s_overrides=None,
    collect_stats: bool = False,
    keep_vectors: bool = False,
):
    deg = g.weighted_degrees
    stats = PushStats(n=g.node_count)
    v_prev: dict = {}
    v_cur = {u: x for u, x in v1_entries.items() if x != 0.0}
    s_prev: list = []  # S_0 is empty
    beta = 0.0
    alphas: list = []
    betas: list = []
    first_row = [_dot_entries(v1_entries, v_cur)]
    vectors = [dict(v_cur)] if keep_vectors else None
    stats.peak_support = len(v_cur)
    breakdown = False

    for i in range(1, k + 1):
        stats.support_sizes.append(len(v_cur))
        if s_overrides is not None and i in s_overrides:
            s_cur = list(s_overrides[i])
        else:
            s_cur = [u for u, x in v_cur.items() if abs(x) > eps * deg[u]]
        stats.subset_sizes.append(len(s_cur))

        out, relaxed = _amv_entries(g, v_cur, eps)
        stats.edges_relaxed.append(relaxed)
        stats.touched_edges += relaxed
        if collect_stats:
            pruned_av = dict(out)
            exact_av, pos_l1, neg_l1 = _split_exact_matvec(g, v_cur)
            norm1 = sum(abs(x) for x in v_cur.values())
            stats.c2_terms.append(norm1 + pos_l1 + neg_l1)

        if beta != 0.0:
            for u in s_prev:
                pv = v_prev.get(u, 0.0)
                if pv != 0.0:
                    out[u] = out.get(u, 0.0) - beta * pv
            stats.extra_ops += len(s_prev)

        alpha = _dot_entries(out, v_cur)
        stats.extra_ops += min(len(out), len(v_cur))
        alphas.append(alpha)
        for u in s_cur:
            cv = v_cur.get(u, 0.0)
            if cv != 0.0:
                out[u] = out.get(u, 0.0) - alpha * cv
        stats.extra_ops += len(s_cur)

        if collect_stats:
            # residual against the exact recurrence:
            #   delta = (pruned - exact matvec)
            #         + alpha * v_i off S_i + beta * v_{i-1} off S_{i-1}
            s_cur_set = set(s_cur)
            s_prev_set = set(s_prev)
            keys = set(pruned_av) | set(exact_av) | set(v_cur) | set(v_prev)
            worst = 0.0
            for u in keys:
                d_val = pruned_av.get(u, 0.0) - exact_av.get(u, 0.0)
                if u not in s_cur_set:
                    d_val += alpha * v_cur.get(u, 0.0)
                if u not in s_prev_set:
                    d_val += beta * v_prev.get(u, 0.0)
                worst = max(worst, abs(d_val) / deg[u])
            stats.delta_degree_ratios.append(worst)

        beta_next = math.sqrt(sum(x * x for x in out.values()))
        if i == k:
            break
        if beta_next < BREAKDOWN_TOL:
            breakdown = True
            break
        betas.append(beta_next)
        v_prev = v_cur
        s_prev = s_cur
        v_cur = {u: x / beta_next for u, x in out.items() if x != 0.0}
        stats.peak_support = max(stats.peak_support, len(v_cur))
        beta = beta_next
        first_row.append(_dot_entries(v1_entries, v_cur))
        if keep_vectors:
            vectors.append(dict(v_cur))

    return (
        np.asarray(alphas),
        np.asarray(betas),
        np.asarray(first_row),
        vectors,
        breakdown,
        stats,
    )


def _solve_perturbed(tmat: TridiagonalMatrix) -> np.ndarray:
    try:
        return tridiag_solve_e1(tmat)
    except SingularSystemError:
        raise SingularSystemError(
            "(I - T) is numerically singular for the pruned recurrence; the "
            "eigenvalue-containment assumption (eigenvalues of T inside "
            "[lambda_min(A), lambda_2(A)]) appears violated at this epsilon"
        ) from None


def _definitional_start(g: Graph, s: int, t: int) -> dict:
    scale = math.sqrt(1.0 / g.weighted_degrees[s] + 1.0 / g.weighted_degrees[t])
    return {
        s: g.inv_sqrt_degrees[s] / scale,
        t: -g.inv_sqrt_degrees[t] / scale,
    }


def lanczos_push_rd(g: Graph, s: int, t: int, cfg: PushConfig):
    """Resistance distance through the pruned local recurrence.

    Returns ``(RDEstimate, TridiagonalMatrix, PushStats)``.  Work scales
    with the sizes of the significant sets, not with the graph, for
    epsilon large enough to prune; breakdown before ``cfg.k`` iterations
    is benign (the reachable Krylov space was exhausted).
    """
    _check_pair(g, s, t)
    start = time.perf_counter()
    if s == t:
        return (
            RDEstimate(0.0, 0, 0, time.perf_counter() - start, "lzpush"),
            TridiagonalMatrix([0.0], []),
            PushStats(n=g.node_count),
        )
    alphas, betas, first_row, _, breakdown, stats = _run_subset_recurrence(
        g,
        s,
        t,
        cfg.k,
        cfg.epsilon,
        _definitional_start(g, s, t),
        collect_stats=cfg.collect_stats,
    )
    tmat = TridiagonalMatrix(alphas, betas)
    y = _solve_perturbed(tmat)
    scale_sq = 1.0 / g.weighted_degrees[s] + 1.0 / g.weighted_degrees[t]
    value = scale_sq * float(first_row @ y)
    est = RDEstimate(
        value=value,
        iterations=len(alphas),
        touched_edges=stats.touched_edges,
        wall_time=time.perf_counter() - start,
        method="lzpush",
    )
    return est, tmat, stats


def subset_recurrence_trace(
    g: Graph,
    s: int,
    t: int,
    k: int,
    eps: float,
    v1=None,
    s_overrides=None,
    collect_stats: bool = False,
) -> PushTrace:
    """Run the subset recurrence and keep every intermediate vector.

    Diagnostic harness: ``v1`` (a SparseVector or entry dict) replaces the
    definitional start vector and is used exactly as given, and
    ``s_overrides`` maps an iteration number (1-based) to the significant
    set to use at that iteration instead of the threshold rule.  Together
    they allow replaying a recurrence from any recorded intermediate
    state.
    """
    _check_pair(g, s, t)
    if k < 1:
        raise ValueError("iteration count k must be >= 1")
    if eps < 0.0:
        raise ValueError("eps must be >= 0")
    v1_entries = dict(_entries_of(v1)) if v1 is not None else _definitional_start(
        g, s, t
    )
    alphas, betas, first_row, vectors, breakdown, stats = _run_subset_recurrence(
        g,
        s,
        t,
        k,
        eps,
        v1_entries,
        s_overrides=s_overrides,
        collect_stats=collect_stats,
        keep_vectors=True,
    )
    tmat = TridiagonalMatrix(alphas, betas)
    y = _solve_perturbed(tmat)
    scale_sq = 1.0 / g.weighted_degrees[s] + 1.0 / g.weighted_degrees[t]
    estimate = scale_sq * float(first_row @ y)
    return PushTrace(
        alphas=alphas,
        betas=betas,
        vectors=vectors,
        first_row=first_row,
        k_effective=len(alphas),
        breakdown=breakdown,
        estimate=estimate,
        stats=stats,
    )


def check_assumption(
    t: TridiagonalMatrix,
    lambda_min_a: float,
    lambda_2_a: float,
    tol: float = 1e-9,
) -> AssumptionReport:
    """Verify eigenvalue containment for a perturbed tridiagonal matrix.

    The pruned recurrence is trustworthy only while the eigenvalues of its
    T stay inside [lambda_min(A), lambda_2(A)]; in particular the upper
    bound keeps (I - T) positive definite.  ``tol`` is the slack allowed
    on both sides.
    """
    lo, hi = tridiag_eigen_range(t)
    lower_slack = lo - lambda_min_a
    upper_slack = lambda_2_a - hi
    return AssumptionReport(
        passed=bool(lower_slack >= -tol and upper_slack >= -tol),
        lambda_min_t=float(lo),
        lambda_max_t=float(hi),
        lambda_min_a=float(lambda_min_a),
        lambda_2_a=float(lambda_2_a),
        lower_slack=float(lower_slack),
        upper_slack=float(upper_slack),
        tol=float(tol),
    )


_CAP_SLACK = 1e-9


def measure_c1(g: Graph, s: int, t: int, k: int) -> float:
    """Largest degree-scaled Chebyshev walk norm from s or t up to order k.

    This is the quantity that controls how much mass the first k
    iterations can spread from the endpoints.  Asserts the theoretical
    cap sqrt(m).
    """
    _check_pair(g, s, t)
    c1 = float(
        max(
            chebyshev_walk_norms(g, s, k).max(),
            chebyshev_walk_norms(g, t, k).max(),
        )
    )
    cap = math.sqrt(g.edge_count)
    if c1 > cap + _CAP_SLACK * (1.0 + cap):
        raise AssertionError(f"walk-norm cap violated: C1 = {c1} > sqrt(m) = {cap}")
    return c1


def measure_c1_plain(g: Graph, s: int, t: int, k: int) -> float:
    """Companion statistic to :func:`measure_c1` without the degree
    scaling (no cap applies)."""
    _check_pair(g, s, t)
    return float(
        max(
            chebyshev_walk_norms(g, s, k, weighted=False).max(),
            chebyshev_walk_norms(g, t, k, weighted=False).max(),
        )
    )


def measure_c2(stats: PushStats) -> float:
    """Largest per-iteration 1-norm term over a stats-collecting run.

    Requires a run made with ``collect_stats=True``.  Asserts the
    theoretical cap 3 * sqrt(n).
    """
    if not stats.c2_terms:
        raise ValueError(
            "stats carry no 1-norm terms; run with collect_stats enabled"
        )
    c2 = float(max(stats.c2_terms))
    cap = 3.0 * math.sqrt(stats.n)
    if c2 > cap + _CAP_SLACK * (1.0 + cap):
        raise AssertionError(
            f"1-norm cap violated: C2 = {c2} > 3 sqrt(n) = {cap}"
        )
    return c2
