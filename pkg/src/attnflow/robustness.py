"""Backbone thinning sweeps and reshuffled null models.

Reshuffle modes cross a link treatment with a weight treatment::

                      original   shuffled   uniform   (weights)
    original links       --         a          b
    shuffled links       c          d          e
    random links         f          g          h

*shuffled links* keep every node's in- and out-degree (directed double-edge
swaps); *random links* draw ``|E|`` ordered pairs uniformly with replacement.
*shuffled weights* permute the original weights; *uniform weights* are drawn
from ``U[min w, max w]``.
"""
import csv
import json
import logging
import math
import os
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .errors import AttnflowError, DegenerateTopologyError, ValidationError
from .impact import analyze
from .scaling import fit_scaling

log = logging.getLogger(__name__)

LINK_MODES = ("original", "shuffled", "random")
WEIGHT_MODES = ("original", "shuffled", "uniform")
STATS = ("gamma", "r2", "rho", "d")


@dataclass(frozen=True)
class ReshuffleMode:
    link_mode: str
    weight_mode: str

    def __post_init__(self):
        if self.link_mode not in LINK_MODES or self.weight_mode not in WEIGHT_MODES:
            raise ValidationError(f"unknown reshuffle mode {self.link_mode}/{self.weight_mode}")
        if self.link_mode == "original" and self.weight_mode == "original":
            raise ValidationError("original links with original weights is not a null model")

    @property
    def label(self):
        return "abcdefgh"[LINK_MODES.index(self.link_mode) * 3 + WEIGHT_MODES.index(self.weight_mode) - 1]

    @classmethod
    def from_label(cls, label):
        k = "abcdefgh".index(label) + 1
        return cls(LINK_MODES[k // 3], WEIGHT_MODES[k % 3])


ALL_MODES = tuple(ReshuffleMode.from_label(c) for c in "abcdefgh")


# --------------------------------------------------------------------------
# backbone


def _removal_count(k, alpha, rounding):
    x = (1.0 - alpha) * k
    if rounding == "floor":
        return np.floor(x + 1e-9).astype(np.int64)
    if rounding == "ceil":
        return np.ceil(x - 1e-9).astype(np.int64)
    raise ValidationError(f"rounding must be 'floor' or 'ceil', not {rounding!r}")


def _flag_weakest(owner, other, weight, n, alpha, rounding):
    """Mark, per owner node, its lowest-ranked ``(1 - alpha)`` share of edges.

    Rank is by weight descending, ties by the other endpoint's id (node
    indices follow lexicographic id order).
    """
    order = np.lexsort((other, -weight, owner))
    k = np.bincount(owner, minlength=n)
    starts = np.concatenate([[0], np.cumsum(k)[:-1]])
    rank = np.arange(order.size) - starts[owner[order]]
    drop = _removal_count(k, alpha, rounding)
    flagged = np.zeros(owner.size, dtype=bool)
    flagged[order] = rank >= (k - drop)[owner[order]]
    return flagged


def backbone_flags(net, alpha, rounding="floor"):
    """``(flagged_by_source, flagged_by_target)`` boolean masks over edges."""
    if not 0 < alpha <= 1:
        raise ValidationError(f"alpha must lie in (0, 1], got {alpha}")
    n = net.n_nodes
    by_src = _flag_weakest(net.src, net.dst, net.weight, n, alpha, rounding)
    by_dst = _flag_weakest(net.dst, net.src, net.weight, n, alpha, rounding)
    return by_src, by_dst


def backbone(net, alpha, rule="union", rounding="floor"):
    """Keep each node's strongest ``alpha`` share of in- and out-edges.

    With ``rule="union"`` an edge is dropped if either endpoint ranks it
    among its weakest; ``"intersection"`` requires both. Nodes left without
    edges are dropped.
    """
    by_src, by_dst = backbone_flags(net, alpha, rounding)
    if rule == "union":
        remove = by_src | by_dst
    elif rule == "intersection":
        remove = by_src & by_dst
    else:
        raise ValidationError(f"rule must be 'union' or 'intersection', not {rule!r}")
    return net.subnetwork(~remove)


@dataclass(frozen=True)
class BackbonePoint:
    alpha: float
    n_nodes: int
    n_edges: int
    fit: object = None
    error: str = ""


def _fit_network(net, **fit_kw):
    return fit_scaling(analyze(net), **fit_kw)


def backbone_sweep(net, alphas, rule="union", rounding="floor", **fit_kw):
    points = []
    for alpha in alphas:
        thin = backbone(net, alpha, rule, rounding)
        try:
            fit = _fit_network(thin, **fit_kw)
            points.append(BackbonePoint(alpha, thin.n_nodes, thin.n_edges, fit))
        except AttnflowError as exc:
            points.append(BackbonePoint(alpha, thin.n_nodes, thin.n_edges, None,
                                        f"{type(exc).__name__}: {exc}"))
    return points


def _fmt(x):
    return "" if x is None else f"{x:.12g}"


def write_backbone_csv(points, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("alpha", "nodes", "edges", "gamma", "r2", "rho", "d", "error"))
        for p in points:
            f = p.fit
            stats = [_fmt(getattr(f, s)) if f else "" for s in STATS]
            w.writerow([repr(p.alpha), p.n_nodes, p.n_edges, *stats, p.error])


# --------------------------------------------------------------------------
# reshuffling


@nb.njit(cache=True)
def _swap_edges(src, dst, n, picks, target, accepted):
    """Apply double-edge swaps ``(a->b, c->d) -> (a->d, c->b)`` in place.

    ``picks`` is a ``(k, 2)`` array of candidate edge positions. Swaps that
    are no-ops or would duplicate an existing ordered pair are rejected.
    Returns ``(accepted, attempts_used)``.
    """
    # numba's typed dict, not set: set lookups can spin after many add/discard cycles
    present = dict()
    for e in range(src.size):
        present[src[e] * n + dst[e]] = True
    used = 0
    for t in range(picks.shape[0]):
        if accepted >= target:
            break
        used += 1
        i = picks[t, 0]
        j = picks[t, 1]
        a, b = src[i], dst[i]
        c, d = src[j], dst[j]
        if a == c or b == d:
            continue
        k1 = a * n + d
        k2 = c * n + b
        if k1 in present or k2 in present:
            continue
        del present[a * n + b]
        del present[c * n + d]
        present[k1] = True
        present[k2] = True
        dst[i] = d
        dst[j] = b
        accepted += 1
    return accepted, used


def degree_preserving_swaps(src, dst, n, rng, swaps_per_edge=10, tries_per_edge=100):
    """Rewire ``(src, dst)`` by directed double-edge swaps; returns new arrays.

    Performs ``swaps_per_edge * |E|`` accepted swaps, giving up with
    :class:`DegenerateTopologyError` after ``tries_per_edge * |E|`` attempts.
    """
    src = np.array(src, dtype=np.int64)
    dst = np.array(dst, dtype=np.int64)
    m = src.size
    target = swaps_per_edge * m
    limit = tries_per_edge * m
    if m < 2:
        raise DegenerateTopologyError("need at least two edges to swap")
    accepted = attempts = 0
    chunk = max(1024, 2 * target)
    while accepted < target:
        if attempts >= limit:
            raise DegenerateTopologyError(
                f"only {accepted} of {target} swaps accepted in {attempts} attempts")
        picks = rng.integers(0, m, size=(min(chunk, limit - attempts), 2))
        accepted, used = _swap_edges(src, dst, n, picks, target, accepted)
        attempts += used
    return src, dst


def reshuffle(net, mode, seed, swaps_per_edge=10):
    """Null-model copy of ``net`` under ``mode`` (a label ``"a".."h"`` or :class:`ReshuffleMode`)."""
    if isinstance(mode, str):
        mode = ReshuffleMode.from_label(mode)
    n, m = net.n_nodes, net.n_edges
    if n < 2 or m < 1:
        raise ValidationError("reshuffling needs >= 2 nodes and >= 1 edge")
    rng = np.random.default_rng(seed)
    if mode.link_mode == "original":
        src, dst = net.src, net.dst
    elif mode.link_mode == "shuffled":
        src, dst = degree_preserving_swaps(net.src, net.dst, n, rng, swaps_per_edge)
    else:
        src = rng.integers(0, n, size=m)
        dst = rng.integers(0, n, size=m)
    w = net.weight
    if mode.weight_mode == "shuffled":
        w = rng.permutation(w)
    elif mode.weight_mode == "uniform":
        w = rng.uniform(w.min(), w.max(), size=m)
    out = type(net).from_arrays(net.nodes, src, dst, w)
    if out.n_edges < m:
        log.debug("mode %s seed %s: %d duplicate pairs merged", mode.label, seed, m - out.n_edges)
    return out.subnetwork(np.ones(out.n_edges, dtype=bool))


def run_seed(master_seed, mode, run):
    """Per-run seed derived from ``(master_seed, mode, run)``."""
    k = "abcdefgh".index(mode.label)
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, k, int(run)])
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass
class ModeSummary:
    mode: ReshuffleMode
    runs_ok: int
    runs_failed: int
    mean: dict
    std: dict
    failures: list = field(default_factory=list)

    @property
    def label(self):
        return self.mode.label

    @property
    def failed(self):
        return self.runs_ok == 0

    def to_dict(self):
        d = {"label": self.label, "link_mode": self.mode.link_mode,
             "weight_mode": self.mode.weight_mode,
             "runs_ok": self.runs_ok, "runs_failed": self.runs_failed}
        for s in STATS:
            d[s] = {"mean": _num(self.mean.get(s)), "std": _num(self.std.get(s))}
        if self.failures:
            d["failures"] = self.failures[:10]
        return d


def _num(x):
    return None if x is None or not math.isfinite(x) else x


@dataclass
class ReshuffleReport:
    modes: list
    runs: int
    master_seed: int
    original: object = None

    def __getitem__(self, label):
        for m in self.modes:
            if m.label == label:
                return m
        raise KeyError(label)

    def to_dict(self):
        d = {"runs": self.runs, "master_seed": self.master_seed,
             "modes": [m.to_dict() for m in self.modes]}
        if self.original is not None:
            d["original"] = self.original.to_dict()
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _one_run(net, mode, seed, fit_kw):
    try:
        fit = _fit_network(reshuffle(net, mode, seed), **fit_kw)
        return tuple(getattr(fit, s) for s in STATS)
    except AttnflowError as exc:
        return f"{type(exc).__name__}: {exc}"


def worker_count(n_jobs=None):
    """Parallel workers: explicit ``n_jobs``, else ``ATTNFLOW_THREADS`` (0 = all cores)."""
    if n_jobs is None:
        n_jobs = int(os.environ.get("ATTNFLOW_THREADS", "0") or 0)
    if n_jobs <= 0:
        n_jobs = os.cpu_count() or 1
    return n_jobs


def reshuffle_battery(net, runs, master_seed, modes=ALL_MODES, n_jobs=None, **fit_kw):
    """Fit ``runs`` reshuffled copies per mode and aggregate the four statistics.

    Runs whose network cannot be analysed are excluded and counted. Output
    depends only on ``(net, runs, master_seed, modes)``.
    """
    if runs < 1:
        raise ValidationError("runs must be >= 1")
    modes = [ReshuffleMode.from_label(m) if isinstance(m, str) else m for m in modes]
    tasks = [(mode, r, run_seed(master_seed, mode, r)) for mode in modes for r in range(runs)]
    jobs = worker_count(n_jobs)
    if jobs == 1:
        results = [_one_run(net, mode, seed, fit_kw) for mode, _, seed in tasks]
    else:
        from joblib import Parallel, delayed
        results = Parallel(n_jobs=jobs)(delayed(_one_run)(net, mode, seed, fit_kw)
                                        for mode, _, seed in tasks)
    try:
        original = _fit_network(net, **fit_kw)
    except AttnflowError:
        original = None
    summaries = []
    for mode in modes:
        rows = [(r, res) for (md, r, _), res in zip(tasks, results) if md == mode]
        good = np.array([res for _, res in rows if not isinstance(res, str)], dtype=float)
        bad = [f"run {r}: {res}" for r, res in rows if isinstance(res, str)]
        if good.size:
            mean = dict(zip(STATS, good.mean(axis=0).tolist()))
            std = dict(zip(STATS, good.std(axis=0).tolist()))
        else:
            mean, std = {}, {}
        summaries.append(ModeSummary(mode, len(good), len(bad), mean, std, bad))
    return ReshuffleReport(summaries, runs, master_seed, original)
