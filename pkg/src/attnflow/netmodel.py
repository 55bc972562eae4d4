"""Flow network data model, edge-list / label ingestion and fixture generators.

A :class:`FlowNetwork` is a weighted directed graph with at most one edge per
ordered node pair. Nodes are kept in lexicographic order so every matrix built
downstream has reproducible row/column indices.
"""
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

import numpy as np

from .errors import EmptyNetworkError, ParseError, ValidationError

EDGE_HEADER = ("src", "dst", "weight")
LABEL_HEADER = ("node", "label")


def _frozen(a, dtype):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FlowNetwork:
    """Weighted directed network of sites.

    ``src``, ``dst`` index into ``nodes``; edges are sorted by ``(src, dst)``.
    Build instances with :meth:`from_edges`, which validates and merges.
    """

    nodes: tuple
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "src", _frozen(self.src, np.int64))
        object.__setattr__(self, "dst", _frozen(self.dst, np.int64))
        object.__setattr__(self, "weight", _frozen(self.weight, np.float64))
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.nodes)})

    @classmethod
    def from_edges(cls, edges, nodes=None):
        """Build a network from ``(src, dst, weight)`` triples.

        Duplicate ordered pairs are merged by summing their weights. When
        ``nodes`` is omitted the node set is the union of edge endpoints.
        Returns ``(network, n_merged)`` where ``n_merged`` counts the rows
        folded into an earlier row.
        """
        edges = list(edges)
        ids = set()
        for s, d, w in edges:
            if not s or not d:
                raise ValidationError("node ids must be non-empty")
            if not (w > 0) or not math.isfinite(w):
                raise ValidationError(f"edge ({s}, {d}) has non-positive weight {w!r}")
            ids.add(s)
            ids.add(d)
        if nodes is None:
            node_list = sorted(ids)
        else:
            node_list = sorted(set(nodes))
            if len(node_list) != len(list(nodes)):
                raise ValidationError("duplicate node ids")
            missing = ids.difference(node_list)
            if missing:
                raise ValidationError(f"edge endpoints not in node set: {sorted(missing)[:5]}")
            if any(not v for v in node_list):
                raise ValidationError("node ids must be non-empty")
        index = {v: i for i, v in enumerate(node_list)}
        n = len(node_list)
        if not edges:
            return cls(node_list, [], [], []), 0
        s = np.array([index[e[0]] for e in edges], dtype=np.int64)
        d = np.array([index[e[1]] for e in edges], dtype=np.int64)
        w = np.array([e[2] for e in edges], dtype=np.float64)
        net, merged = cls._merge(node_list, s, d, w, n)
        return net, merged

    @classmethod
    def from_arrays(cls, nodes, src, dst, weight):
        """Like :meth:`from_edges` but with index arrays; returns the network only."""
        nodes = tuple(nodes)
        weight = np.asarray(weight, dtype=np.float64)
        if weight.size and (not np.all(weight > 0) or not np.all(np.isfinite(weight))):
            raise ValidationError("edge weights must be positive and finite")
        net, _ = cls._merge(nodes, np.asarray(src, np.int64), np.asarray(dst, np.int64),
                            weight, len(nodes))
        return net

    @classmethod
    def _merge(cls, nodes, s, d, w, n):
        if s.size == 0:
            return cls(nodes, [], [], []), 0
        key = s * n + d
        uniq, inv = np.unique(key, return_inverse=True)
        if uniq.size == key.size:
            order = np.argsort(key, kind="stable")
            return cls(nodes, s[order], d[order], w[order]), 0
        # summation in row order keeps merged weights reproducible
        merged_w = np.zeros(uniq.size)
        np.add.at(merged_w, inv, w)
        return cls(nodes, uniq // n, uniq % n, merged_w), int(key.size - uniq.size)

    @property
    def n_nodes(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return int(self.weight.size)

    @property
    def total_weight(self):
        return float(self.weight.sum())

    def index(self, node):
        return self._index[node]

    def __contains__(self, node):
        return node in self._index

    def edges(self):
        """Yield ``(src_id, dst_id, weight)`` in canonical order."""
        for s, d, w in zip(self.src.tolist(), self.dst.tolist(), self.weight.tolist()):
            yield self.nodes[s], self.nodes[d], w

    def out_strength(self):
        return np.bincount(self.src, weights=self.weight, minlength=self.n_nodes)

    def in_strength(self):
        return np.bincount(self.dst, weights=self.weight, minlength=self.n_nodes)

    def out_degree(self):
        return np.bincount(self.src, minlength=self.n_nodes)

    def in_degree(self):
        return np.bincount(self.dst, minlength=self.n_nodes)

    def dense(self):
        """Weighted adjacency matrix ``f[i, j]``."""
        f = np.zeros((self.n_nodes, self.n_nodes))
        f[self.src, self.dst] = self.weight
        return f

    def subnetwork(self, keep_edges, drop_isolated=True):
        """Network restricted to edges where the boolean mask ``keep_edges`` holds."""
        keep_edges = np.asarray(keep_edges, dtype=bool)
        s, d, w = self.src[keep_edges], self.dst[keep_edges], self.weight[keep_edges]
        if not drop_isolated:
            return FlowNetwork(self.nodes, s, d, w)
        used = np.unique(np.concatenate([s, d]))
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[used] = np.arange(used.size)
        return FlowNetwork([self.nodes[i] for i in used], remap[s], remap[d], w)

    def induced(self, node_ids):
        """Subnetwork on ``node_ids`` keeping only edges with both endpoints inside.

        Every requested node is retained, even if it ends up without edges.
        """
        idx = np.array(sorted(self._index[v] for v in node_ids), dtype=np.int64)
        member = np.zeros(self.n_nodes, dtype=bool)
        member[idx] = True
        mask = member[self.src] & member[self.dst]
        remap = np.full(self.n_nodes, -1, dtype=np.int64)
        remap[idx] = np.arange(idx.size)
        return FlowNetwork([self.nodes[i] for i in idx], remap[self.src[mask]],
                           remap[self.dst[mask]], self.weight[mask])

    def scaled(self, c):
        return FlowNetwork(self.nodes, self.src, self.dst, self.weight * c)

    def same_edges(self, other):
        return (self.nodes == other.nodes and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.weight, other.weight))


@dataclass(frozen=True)
class IngestReport:
    rows_read: int
    edges_merged: int
    rows_dropped: int
    nodes: int
    edges: int

    def to_json(self):
        return json.dumps(self.__dict__, sort_keys=True)


def _rows(path):
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            yield lineno, row


def _is_blank(row):
    return not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#")


def load_network(path, with_report=False):
    """Read an edge-list CSV (``src,dst,weight``) into a :class:`FlowNetwork`.

    Blank and ``#`` comment lines are dropped and counted. A malformed row
    raises :class:`ParseError` naming its line; a non-positive weight raises
    :class:`ValidationError`.
    """
    edges = []
    rows_read = dropped = 0
    first = True
    for lineno, row in _rows(path):
        if _is_blank(row):
            dropped += 1
            continue
        cells = [c.strip() for c in row]
        if first:
            first = False
            if tuple(c.lower() for c in cells) == EDGE_HEADER:
                continue
        rows_read += 1
        if len(cells) != 3:
            raise ParseError(f"expected 3 fields (src,dst,weight), got {len(cells)}", lineno, path)
        s, d, raw = cells
        if not s or not d:
            raise ParseError("empty node id", lineno, path)
        try:
            w = float(raw)
        except ValueError:
            raise ParseError(f"non-numeric weight {raw!r}", lineno, path) from None
        if not math.isfinite(w):
            raise ParseError(f"non-finite weight {raw!r}", lineno, path)
        if w <= 0:
            raise ValidationError(f"{path}: line {lineno}: weight must be positive, got {raw}")
        edges.append((s, d, w))
    if not edges:
        raise EmptyNetworkError(f"{path}: no edges")
    net, merged = FlowNetwork.from_edges(edges)
    if with_report:
        return net, IngestReport(rows_read, merged, dropped, net.n_nodes, net.n_edges)
    return net


def save_network(net, path):
    """Write ``net`` as an edge-list CSV; weights use the shortest round-trip repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for s, d, x in net.edges():
            w.writerow((s, d, repr(x)))


@dataclass(frozen=True)
class LabelMap:
    """Node -> label assignment restricted to one network.

    ``unknown`` lists ids from the label file that are absent from the
    network; ``unlabeled`` lists network nodes the file did not mention.
    """

    labels: MappingProxyType
    unknown: tuple = ()
    unlabeled: tuple = ()

    @classmethod
    def from_dict(cls, mapping, network=None):
        mapping = dict(mapping)
        unknown = ()
        unlabeled = ()
        if network is not None:
            unknown = tuple(sorted(k for k in mapping if k not in network))
            mapping = {k: v for k, v in mapping.items() if k in network}
            unlabeled = tuple(v for v in network.nodes if v not in mapping)
        return cls(MappingProxyType(dict(sorted(mapping.items()))), unknown, unlabeled)

    def __len__(self):
        return len(self.labels)

    def __getitem__(self, node):
        return self.labels[node]

    def get(self, node, default=None):
        return self.labels.get(node, default)

    def groups(self):
        """``{label: [node, ...]}`` with labels and members sorted."""
        out = {}
        for node, lab in self.labels.items():
            out.setdefault(lab, []).append(node)
        return {k: sorted(v) for k, v in sorted(out.items())}


def load_labels(path, network):
    """Read a ``node,label`` CSV and restrict it to nodes present in ``network``."""
    mapping = {}
    first = True
    for lineno, row in _rows(path):
        if _is_blank(row):
            continue
        cells = [c.strip() for c in row]
        if first:
            first = False
            if tuple(c.lower() for c in cells) == LABEL_HEADER:
                continue
        if len(cells) != 2 or not cells[0] or not cells[1]:
            raise ParseError("expected 2 non-empty fields (node,label)", lineno, path)
        node, lab = cells
        if node in mapping and mapping[node] != lab:
            raise ValidationError(
                f"{path}: line {lineno}: node {node!r} labeled both {mapping[node]!r} and {lab!r}")
        mapping[node] = lab
    return LabelMap.from_dict(mapping, network)


def save_labels(labels, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LABEL_HEADER)
        for node, lab in labels.labels.items():
            w.writerow((node, lab))


def _node_names(n, prefix="n"):
    width = len(str(n - 1))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def synth_network(n, m, seed, reciprocity=0.5, sigma=2.0):
    """Directed preferential-attachment network with log-normal weights.

    Starts from ``m`` isolated seed nodes; every later node links to ``m``
    distinct existing nodes picked with probability proportional to degree
    (plus one, so seed nodes are reachable). Each link gets a random
    direction and, with probability ``reciprocity``, a reverse link too.
    Weights are ``lognormal(0, sigma)``. The result has ``m * (n - m)``
    primary edges and is weakly connected.
    """
    if not isinstance(n, (int, np.integer)) or not isinstance(m, (int, np.integer)):
        raise ValidationError("n and m must be integers")
    if n < 2 or m < 1 or m >= n:
        raise ValidationError(f"need n >= 2 and 1 <= m < n, got n={n}, m={m}")
    if not 0 <= reciprocity <= 1:
        raise ValidationError("reciprocity must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    # repeated-nodes list: each node appears once plus once per incident link
    pool = list(range(m))
    src, dst = [], []
    for new in range(m, n):
        targets = set()
        while len(targets) < m:
            targets.add(pool[rng.integers(len(pool))])
        targets = sorted(targets)
        flips = rng.random(m) < 0.5
        recip = rng.random(m) < reciprocity
        for t, flip, rec in zip(targets, flips, recip):
            a, b = (new, t) if flip else (t, new)
            src.append(a)
            dst.append(b)
            if rec:
                src.append(b)
                dst.append(a)
            pool.append(t)
        pool.extend([new] * (m + 1))
    weight = rng.lognormal(0.0, sigma, size=len(src))
    return FlowNetwork.from_arrays(_node_names(n), src, dst, weight)


def planted_network(traffic, gamma, prefix="p", terminal_share=None):
    """Network whose computed impacts follow ``C = c * A**gamma`` exactly.

    Each site ``i`` carries a self-loop and one edge into a shared terminal
    node that keeps all of its inflow. Weights are solved so the traffic of
    site ``i`` equals ``traffic[i]`` and the terminal's traffic ``K`` makes
    impact/traffic ratios ``(K / A_i)**(1 - gamma)``. Requires ``gamma < 1``
    and enough sites for the terminal traffic equation to have a root.
    ``terminal_share`` is the fraction of ``K`` that arrives via site edges;
    by default half the largest share that keeps every self-loop non-negative.
    """
    from scipy.optimize import brentq

    a = np.asarray(traffic, dtype=float)
    if a.ndim != 1 or a.size < 2 or np.any(a <= 0):
        raise ValidationError("traffic must be a list of >= 2 positive values")
    if not 0 < gamma < 1:
        raise ValidationError("planted gamma must lie in (0, 1)")
    e = 1.0 - gamma

    def excess(k):
        return np.sum(a * ((k / a) ** e - 1.0)) - k

    lo = a.max() * (1 + 1e-12)
    hi = lo * 2
    if excess(lo) <= 0:
        raise ValidationError("too few sites to plant this law; add sites or spread traffic")
    while excess(hi) > 0:
        hi *= 2
    k = brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
    if terminal_share is None:
        terminal_share = min(0.5, 0.5 / float(np.max((k / a) ** e - 1.0)))
    if not 0 < terminal_share <= 1:
        raise ValidationError("terminal_share must lie in (0, 1]")
    inflow = terminal_share * k
    w = a * (inflow / k) * ((k / a) ** e - 1.0)
    # rescale so the edge weights sum exactly to the terminal inflow used
    inflow = float(w.sum())
    s = a - w
    if np.any(s < 0):
        raise ValidationError("terminal_share too large for the requested traffic")
    names = _node_names(a.size + 1, prefix)
    terminal = a.size
    src, dst, wt = [], [], []
    for i in range(a.size):
        if s[i] > 0:
            src.append(i)
            dst.append(i)
            wt.append(s[i])
        src.append(i)
        dst.append(terminal)
        wt.append(w[i])
    loop = k - inflow
    if loop > 0:
        src.append(terminal)
        dst.append(terminal)
        wt.append(loop)
    return FlowNetwork.from_arrays(names, src, dst, wt)
