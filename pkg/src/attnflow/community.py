"""Per-community scaling fits over label-induced subnetworks."""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import AttnflowError, ValidationError
from .impact import analyze
from .scaling import fit_scaling

BELOW_MIN = "below minimum size"


@dataclass(frozen=True)
class Partition:
    """Label-induced subnetworks plus what the split left out.

    Every edge of the parent network is exactly one of: inside a community,
    between two labelled communities (``cross_edges``), or touching an
    unlabelled node (``unlabeled_edges``).
    """

    subnetworks: list
    cross_edges: int
    cross_weight: float
    unlabeled_edges: int
    unlabeled_nodes: tuple

    def __iter__(self):
        return iter(self.subnetworks)

    def __len__(self):
        return len(self.subnetworks)


def _edge_classes(net, labels):
    codes = {lab: k for k, lab in enumerate(labels.groups())}
    node_code = np.array([codes.get(labels.get(v), -1) for v in net.nodes], dtype=np.int64)
    cs, cd = node_code[net.src], node_code[net.dst]
    unlabeled = (cs < 0) | (cd < 0)
    intra = ~unlabeled & (cs == cd)
    cross = ~unlabeled & (cs != cd)
    return intra, cross, unlabeled


def induce_subnetworks(net, labels):
    """One subnetwork per label holding its nodes and the edges among them."""
    if len(labels) == 0:
        raise ValidationError("label map is empty")
    _, cross, unlabeled = _edge_classes(net, labels)
    subs = [(lab, net.induced(members)) for lab, members in labels.groups().items()]
    missing = tuple(v for v in net.nodes if labels.get(v) is None)
    return Partition(subs, int(cross.sum()), float(net.weight[cross].sum()),
                     int(unlabeled.sum()), missing)


@dataclass(frozen=True)
class CommunityStats:
    label: str
    n_sites: int
    n_edges: int
    daily_flow: float
    fit: object = None
    skip_reason: str = ""


def community_report(net, labels, min_sites=3, **fit_kw):
    """Fit every community with at least ``min_sites`` sites; others carry a skip reason.

    Each community is balanced on its own, so cross-community flow plays no
    part. Sorted by size (largest first), then label.
    """
    if min_sites < 3:
        raise ValidationError("min_sites must be >= 3")
    rows = []
    for lab, sub in induce_subnetworks(net, labels):
        base = dict(label=lab, n_sites=sub.n_nodes, n_edges=sub.n_edges,
                    daily_flow=sub.total_weight)
        if sub.n_nodes < min_sites:
            rows.append(CommunityStats(**base, skip_reason=BELOW_MIN))
            continue
        if sub.n_edges == 0:
            rows.append(CommunityStats(**base, skip_reason="no internal edges"))
            continue
        try:
            rows.append(CommunityStats(**base, fit=fit_scaling(analyze(sub), **fit_kw)))
        except AttnflowError as exc:
            rows.append(CommunityStats(**base, skip_reason=f"{type(exc).__name__}: {exc}"))
    rows.sort(key=lambda r: (-r.n_sites, r.label))
    return rows


def write_community_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("label", "n_sites", "n_edges", "daily_flow", "gamma", "r2", "skip_reason"))
        for r in rows:
            g = f"{r.fit.gamma:.12g}" if r.fit else ""
            r2 = f"{r.fit.r2:.12g}" if r.fit else ""
            w.writerow((r.label, r.n_sites, r.n_edges, f"{r.daily_flow:.12g}", g, r2, r.skip_reason))


def write_size_gamma_csv(rows, path):
    """``label,n_sites,gamma`` for fitted communities: gamma against community size."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("label", "n_sites", "gamma"))
        for r in rows:
            if r.fit:
                w.writerow((r.label, r.n_sites, f"{r.fit.gamma:.12g}"))
