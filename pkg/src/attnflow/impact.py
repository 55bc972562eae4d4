"""Fundamental matrix, traffic/through-flow/impact per site, and a Monte Carlo check.

For a balanced network with transition matrix ``M`` the fundamental matrix
``U = (I - M)^-1`` counts expected visits: ``u[i, j]`` is the expected number
of times a unit of flow starting at ``i`` passes through ``j`` before it
leaves through the sink. From it, per site ``i``:

* traffic ``A_i`` is the balanced outflow (including flow to the sink),
* through-flow ``G_i = sum_j f'_0j u[j, i] / u[i, i]`` is the source flow that
  ever reaches ``i``, with re-visits through ``i``'s own cycles divided out,
* impact ``C_i = G_i * sum_k u[i, k]`` is the flow ``i`` keeps circulating
  among sites.
"""
import csv
import logging
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.linalg.lapack import dgecon
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from . import _walk
from .balance import balance, transition_matrix
from .errors import NonDissipativeError, NumericalError, ValidationError, WalkLimitError

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
NEG_TOL = 1e-9
RESIDUAL_TOL = 1e-8
MAX_HOPS = 10**6


@dataclass(frozen=True, eq=False)
class FundamentalMatrix:
    u: np.ndarray
    nodes: tuple
    residual: float
    condition: float


def _site_graph(m):
    sites = m[1:, 1:]
    return csr_matrix(sites > 0)


def _trapped_components(m, nodes):
    """Strongly connected groups of sites from which no path reaches the sink."""
    n = m.shape[0] - 1
    g = _site_graph(m)
    leak = 1.0 - m[1:, :].sum(axis=1)
    leaking = np.flatnonzero(leak > 1e-12)
    reach = np.zeros(n, dtype=bool)
    if leaking.size:
        rev = g.T.tocsr()
        for i in leaking:
            if not reach[i]:
                order = breadth_first_order(rev, i, directed=True, return_predecessors=False)
                reach[order] = True
    if reach.all():
        return []
    _, comp = connected_components(g, directed=True, connection="strong")
    groups = {}
    for i in np.flatnonzero(~reach):
        groups.setdefault(comp[i], []).append(nodes[i])
    return sorted(groups.values(), key=lambda c: (-len(c), c))


def _weakest_component(m, nodes):
    """The strongly connected group whose escape probability is smallest."""
    g = _site_graph(m)
    _, comp = connected_components(g, directed=True, connection="strong")
    sites = m[1:, 1:]
    best, best_esc = None, np.inf
    for c in np.unique(comp):
        idx = np.flatnonzero(comp == c)
        esc = 1.0 - sites[np.ix_(idx, idx)].sum(axis=1).mean()
        if esc < best_esc:
            best, best_esc = idx, esc
    return [[nodes[i] for i in best]]


def compute_U(tm):
    """Invert ``I - M`` by dense LU; reject networks whose flow cannot drain.

    Raises :class:`NonDissipativeError` when some sites cannot reach the sink
    or when the 1-norm condition estimate of ``I - M`` exceeds ``1e12``.
    """
    m = tm.m
    nodes = tm.nodes
    trapped = _trapped_components(m, nodes)
    if trapped:
        raise NonDissipativeError(
            f"{len(trapped)} group(s) of sites never reach the sink, e.g. {trapped[0][:5]}",
            trapped)
    k = m.shape[0]
    a = np.eye(k) - m
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(a, check_finite=False)
    rcond, info = dgecon(lu, np.linalg.norm(a, 1), norm="1")
    cond = np.inf if rcond == 0 else 1.0 / rcond
    if info != 0 or not cond <= COND_LIMIT:
        comps = _weakest_component(m, nodes)
        raise NonDissipativeError(
            f"I - M is numerically singular (condition ~{cond:.3g}); weakest group {comps[0][:5]}",
            comps)
    u = sla.lu_solve((lu, piv), np.eye(k), check_finite=False)
    scale = max(1.0, float(np.abs(u).max()))
    low = u.min()
    if low < -NEG_TOL * scale:
        raise NumericalError(f"fundamental matrix has entry {low:.3g} < 0")
    np.maximum(u, 0.0, out=u)
    residual = float(np.abs(u @ a - np.eye(k)).max())
    if residual > RESIDUAL_TOL * scale:
        raise NumericalError(f"U (I - M) deviates from I by {residual:.3g}")
    u.setflags(write=False)
    return FundamentalMatrix(u, nodes, residual, cond)


@dataclass(frozen=True, eq=False)
class ImpactTable:
    """Per-site traffic ``A``, through-flow ``G`` and impact ``C`` (arrays in node order)."""

    nodes: tuple
    A: np.ndarray
    G: np.ndarray
    C: np.ndarray

    def __len__(self):
        return len(self.nodes)

    def row(self, node):
        i = self.nodes.index(node)
        return float(self.A[i]), float(self.G[i]), float(self.C[i])

    def as_dict(self):
        return {v: self.row(v) for v in self.nodes}

    def to_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("node", "A", "G", "C"))
            for i, v in enumerate(self.nodes):
                w.writerow((v, f"{self.A[i]:.12g}", f"{self.G[i]:.12g}", f"{self.C[i]:.12g}"))


def impact_table(bn, u):
    if u.nodes != bn.nodes or u.u.shape != (bn.n + 1, bn.n + 1):
        raise ValidationError("fundamental matrix does not belong to this balanced network")
    uu = u.u[1:, 1:]
    A = bn.throughput
    reach = bn.source_out @ uu
    diag = np.diag(uu)
    G = reach / diag
    C = G * uu.sum(axis=1)
    return ImpactTable(bn.nodes, A, G, C)


def analyze(net):
    """Run balance -> transition matrix -> ``U`` -> impact table on ``net``."""
    bn = balance(net)
    tm = transition_matrix(bn)
    u = compute_U(tm)
    return impact_table(bn, u)


@dataclass(frozen=True, eq=False)
class SurferEstimate:
    """Monte Carlo estimates with standard errors, arrays in node order.

    ``visits`` estimates ``sum_j f'_0j u[j, i]``; ``g_hat`` estimates the
    through-flow from the fraction of walkers that ever reach a site;
    ``path_len`` estimates ``sum_k u[i, k]`` from separate walks started at
    each site; ``c_hat = g_hat * path_len``.
    """

    nodes: tuple
    visits: np.ndarray
    visits_se: np.ndarray
    g_hat: np.ndarray
    g_se: np.ndarray
    path_len: np.ndarray
    path_len_se: np.ndarray
    c_hat: np.ndarray
    c_se: np.ndarray
    walkers: int
    node_walkers: int
    seed: int

    def to_csv(self, path):
        cols = ("visits", "visits_se", "g_hat", "g_se", "path_len", "path_len_se", "c_hat", "c_se")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("node",) + cols)
            for i, v in enumerate(self.nodes):
                w.writerow((v,) + tuple(f"{getattr(self, c)[i]:.12g}" for c in cols))


def _csr_rows(m):
    """Sites-only rows of ``M`` as (indptr, indices, cumulative probs)."""
    sites = m[1:, 1:]
    n = sites.shape[0]
    indptr = np.zeros(n + 1, np.int64)
    indices, cum = [], []
    for i in range(n):
        nz = np.flatnonzero(sites[i])
        indices.append(nz)
        cum.append(np.cumsum(sites[i, nz]))
        indptr[i + 1] = indptr[i] + nz.size
    cat = (lambda xs, dt: np.concatenate(xs).astype(dt) if xs else np.zeros(0, dt))
    return indptr, cat(indices, np.int64), cat(cum, np.float64)


def surfer_oracle(bn, walkers, seed, node_walkers=None, n_streams=64, max_hops=MAX_HOPS):
    """Estimate traffic reach and impact by simulating individual surfers.

    ``walkers`` surfers enter from the source (first hop proportional to the
    source flows) and move along rows of ``M`` until they drop to the sink.
    Site impact is estimated without touching ``U``: reach probability times
    mean path length of ``node_walkers`` separate walks started at the site.
    """
    if walkers < 1:
        raise ValidationError("walkers must be >= 1")
    node_walkers = walkers if node_walkers is None else node_walkers
    if node_walkers < 1:
        raise ValidationError("node_walkers must be >= 1")
    if seed < 0:
        raise ValidationError("seed must be non-negative")
    tm = transition_matrix(bn)
    compute_U(tm)  # rejects non-dissipative networks: walkers would never halt
    n = bn.n
    S = bn.boundary_flow
    indptr, indices, cum = _csr_rows(tm.m)
    src_idx = np.flatnonzero(bn.source_out > 0).astype(np.int64)
    if src_idx.size == 0:
        raise ValidationError("source injects no flow")
    src_cum = np.cumsum(bn.source_out[src_idx]) / S
    src_cum[-1] = 1.0

    visits, visits_sq, hits, status, bad_w, bad_x = _walk.source_walks(
        indptr, indices, cum, src_idx, src_cum, n, walkers, n_streams, seed, max_hops)
    _check(status, bad_w, bad_x, bn.nodes, max_hops)
    total, total_sq, status, bad_w, bad_x = _walk.path_lengths(
        indptr, indices, cum, n, node_walkers, n_streams, seed, max_hops)
    _check(status, bad_w, bad_x, bn.nodes, max_hops)

    W, Wn = float(walkers), float(node_walkers)
    mean_v = visits / W
    var_v = np.maximum(visits_sq / W - mean_v**2, 0.0) * (W / max(W - 1, 1))
    p = hits / W
    L = total / Wn
    var_L = np.maximum(total_sq / Wn - L**2, 0.0) * (Wn / max(Wn - 1, 1))
    g_hat = S * p
    g_se = S * np.sqrt(p * (1 - p) / W)
    L_se = np.sqrt(var_L / Wn)
    c_hat = g_hat * L
    c_se = np.sqrt((L * g_se) ** 2 + (g_hat * L_se) ** 2 + (g_se * L_se) ** 2)
    return SurferEstimate(bn.nodes, S * mean_v, S * np.sqrt(var_v / W), g_hat, g_se, L, L_se,
                          c_hat, c_se, walkers, node_walkers, seed)


def _check(status, walker, node, nodes, max_hops):
    if status == _walk.HOP_LIMIT:
        raise WalkLimitError(
            f"walker {walker} exceeded {max_hops} hops (last at site {nodes[node]!r}); "
            "flow escapes to the sink too slowly to simulate")
