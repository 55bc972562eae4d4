"""Source/sink balancing and the row-normalised transition matrix.

Index convention for every matrix in this package: row/column 0 is the
artificial source, rows/columns ``1..n`` are the sites in network order. The
sink has no row or column; its share of a row is ``1 - row_sum``.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError, EmptyNetworkError
from .netmodel import EDGE_HEADER

SOURCE_ID = "__source__"
SINK_ID = "__sink__"


@dataclass(frozen=True, eq=False)
class BalancedNetwork:
    """A :class:`~attnflow.netmodel.FlowNetwork` plus per-site boundary flows.

    ``source_out[i]`` is the flow injected into site ``i`` by the source and
    ``sink_in[i]`` the flow site ``i`` hands to the sink, both as arrays in
    network node order (zero where no boundary edge exists).
    """

    base: object
    source_out: np.ndarray
    sink_in: np.ndarray

    @property
    def n(self):
        return self.base.n_nodes

    @property
    def nodes(self):
        return self.base.nodes

    def index(self, node):
        """Matrix row of ``node``; row 0 is the source."""
        return self.base.index(node) + 1

    @property
    def throughput(self):
        """Balanced outflow per site, including flow to the sink."""
        return self.base.out_strength() + self.sink_in

    @property
    def boundary_flow(self):
        return float(self.source_out.sum())

    def source_map(self):
        return {self.nodes[i]: float(v) for i, v in enumerate(self.source_out) if v > 0}

    def sink_map(self):
        return {self.nodes[i]: float(v) for i, v in enumerate(self.sink_in) if v > 0}


def balance(net):
    """Add the least source/sink flow that makes every site's inflow equal its outflow."""
    if net.n_nodes == 0:
        raise EmptyNetworkError("cannot balance an empty network")
    out = net.out_strength()
    inn = net.in_strength()
    diff = out - inn
    # |diff| below float noise of the node's own flows is treated as balanced
    noise = 1e-12 * np.maximum(out, inn)
    source_out = np.where(diff > noise, diff, 0.0)
    sink_in = np.where(-diff > noise, -diff, 0.0)
    for a in (source_out, sink_in):
        a.setflags(write=False)
    return BalancedNetwork(net, source_out, sink_in)


def balance_residual(bn):
    """Per-site ``|inflow - outflow|`` in the balanced network."""
    net = bn.base
    return np.abs(net.in_strength() + bn.source_out - net.out_strength() - bn.sink_in)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """``m[i, j]``: probability a unit of flow at ``i`` moves next to ``j``.

    Shape ``(n + 1, n + 1)``; row 0 is the source. ``row_totals[i]`` is the
    un-normalised balanced outflow of row ``i`` including flow to the sink.
    """

    m: np.ndarray
    row_totals: np.ndarray
    nodes: tuple

    @property
    def sink_prob(self):
        return np.clip(1.0 - self.m.sum(axis=1), 0.0, 1.0)


def transition_matrix(bn):
    net = bn.base
    n = net.n_nodes
    f = np.zeros((n + 1, n + 1))
    f[0, 1:] = bn.source_out
    np.add.at(f, (net.src + 1, net.dst + 1), net.weight)
    totals = f.sum(axis=1)
    totals[1:] += bn.sink_in
    m = np.zeros_like(f)
    nz = totals > 0
    m[nz] = f[nz] / totals[nz, None]
    m.setflags(write=False)
    totals.setflags(write=False)
    return TransitionMatrix(m, totals, net.nodes)


def save_balanced(bn, path):
    """Edge-list CSV of the balanced network with reserved source/sink ids."""
    clash = {SOURCE_ID, SINK_ID}.intersection(bn.nodes)
    if clash:
        raise ValidationError(f"reserved node id(s) present in network: {sorted(clash)}")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(EDGE_HEADER)
        for i, v in enumerate(bn.source_out.tolist()):
            if v > 0:
                w.writerow((SOURCE_ID, bn.nodes[i], repr(v)))
        for s, d, x in bn.base.edges():
            w.writerow((s, d, repr(x)))
        for i, v in enumerate(bn.sink_in.tolist()):
            if v > 0:
                w.writerow((bn.nodes[i], SINK_ID, repr(v)))
