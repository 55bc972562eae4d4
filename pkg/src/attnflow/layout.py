"""Two-level force-directed layout: communities first, then sites inside their circles."""
import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .balance import balance
from .netmodel import FlowNetwork

OTHER = "__other__"


@dataclass(frozen=True)
class AggregateNetwork:
    """Community-level network: nodes are labels, edges carry cross-community flow."""

    network: FlowNetwork
    intra_flow: dict
    members: dict


def aggregate_communities(net, labels, other_label=None):
    """Collapse sites into their labels, summing flow per ordered label pair.

    Unlabelled sites are ignored unless ``other_label`` names a bucket for
    them. Flow within a label is kept in ``intra_flow`` instead of as a loop.
    """
    groups = labels.groups()
    site_label = [labels.get(v, other_label) for v in net.nodes]
    if other_label is not None and other_label in site_label and other_label not in groups:
        groups[other_label] = [v for v, lab in zip(net.nodes, site_label) if lab == other_label]
    intra = {lab: 0.0 for lab in groups}
    pairs = {}
    for s, d, w in zip(net.src.tolist(), net.dst.tolist(), net.weight.tolist()):
        a, b = site_label[s], site_label[d]
        if a is None or b is None:
            continue
        if a == b:
            intra[a] += w
        else:
            pairs[(a, b)] = pairs.get((a, b), 0.0) + w
    agg, _ = FlowNetwork.from_edges([(a, b, w) for (a, b), w in sorted(pairs.items())],
                                    nodes=list(groups))
    return AggregateNetwork(agg, intra, groups)


def spring_layout(net, iterations=500, seed=0, pos=None, temperature=0.1):
    """Fruchterman-Reingold layout in the unit square.

    Repulsion ``k**2 / d`` between every pair, attraction ``d**2 / k`` along
    edges (direction and weight ignored), ``k = sqrt(1 / n)``. Each step's
    displacement is capped by a temperature that cools linearly to zero.
    ``pos`` optionally gives the ``(n, 2)`` starting coordinates.
    Returns ``{node: (x, y)}``.
    """
    n = net.n_nodes
    if n == 0:
        return {}
    if n == 1:
        return {net.nodes[0]: (0.5, 0.5)}
    if pos is None:
        p = np.random.default_rng(seed).random((n, 2))
    else:
        p = np.array(pos, dtype=float).reshape(n, 2)
    keep = net.src != net.dst
    ei, ej = net.src[keep], net.dst[keep]
    k = np.sqrt(1.0 / n)
    t = temperature
    dt = temperature / iterations
    for _ in range(iterations):
        delta = p[:, None, :] - p[None, :, :]
        dist = np.sqrt((delta**2).sum(axis=-1))
        np.fill_diagonal(dist, 1.0)
        np.maximum(dist, 1e-9, out=dist)
        disp = (delta * (k * k / dist**2)[:, :, None]).sum(axis=1)
        d = p[ei] - p[ej]
        dl = np.maximum(np.sqrt((d**2).sum(axis=1)), 1e-9)
        f = d * (dl / k)[:, None]
        np.subtract.at(disp, ei, f)
        np.add.at(disp, ej, f)
        length = np.maximum(np.sqrt((disp**2).sum(axis=1)), 1e-12)
        p += disp * (np.minimum(length, t) / length)[:, None]
        np.clip(p, 0.0, 1.0, out=p)
        t -= dt
    return {v: (float(p[i, 0]), float(p[i, 1])) for i, v in enumerate(net.nodes)}


def label_seed(seed, label):
    h = hashlib.sha256(f"{seed}\x00{label}".encode()).digest()
    return int.from_bytes(h[:8], "little")


@dataclass(frozen=True)
class LayoutResult:
    node_pos: dict
    node_label: dict
    community_circles: dict
    traffic: dict
    seed: int

    def to_dict(self):
        circles = [{"label": lab, "cx": cx, "cy": cy, "r": r}
                   for lab, (cx, cy, r) in self.community_circles.items()]
        nodes = [{"id": v, "label": self.node_label[v], "x": x, "y": y, "traffic": self.traffic[v]}
                 for v, (x, y) in self.node_pos.items()]
        return {"circles": circles, "nodes": nodes}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def circle_radii(flows, r_max=0.15, rule="sqrt"):
    """Radius per community from its internal flow; the largest gets ``r_max``."""
    f = np.asarray(flows, dtype=float)
    top = f.max() if f.size else 0.0
    if top <= 0:
        return np.full(f.size, r_max)
    if rule == "sqrt":
        return r_max * np.sqrt(f / top)
    if rule == "linear":
        return r_max * f / top
    raise ValueError(f"radius rule must be 'sqrt' or 'linear', not {rule!r}")


def _shrink_to_fit(centers, radii):
    """Uniform shrink factor (<= 1) making every pair of circles disjoint."""
    scale = 1.0
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            s = radii[i] + radii[j]
            if s > 0:
                scale = min(scale, float(np.hypot(*(centers[i] - centers[j]))) / s)
    return scale


def two_level_layout(net, labels, seed=0, iterations=500, r_max=0.15, radius_rule="sqrt"):
    """Place community circles with one spring layout, then sites inside each circle.

    Circle radii follow intra-community flow and are shrunk together until
    no two circles overlap. Unlabelled sites go to a circle named
    ``"__other__"``.
    """
    agg = aggregate_communities(net, labels, other_label=OTHER)
    labs = list(agg.network.nodes)
    center_map = spring_layout(agg.network, iterations, seed)
    centers = np.array([center_map[lab] for lab in labs])
    radii = circle_radii([agg.intra_flow[lab] for lab in labs], r_max, radius_rule)
    radii = radii * _shrink_to_fit(centers, radii)

    traffic = dict(zip(net.nodes, balance(net).throughput.tolist()))
    node_pos, node_label, circles = {}, {}, {}
    for lab, (cx, cy), r in zip(labs, centers, radii):
        circles[lab] = (float(cx), float(cy), float(r))
        sub = net.induced(agg.members[lab])
        inner = spring_layout(sub, iterations, label_seed(seed, lab))
        pts = np.array([inner[v] for v in sub.nodes])
        mid = (pts.min(axis=0) + pts.max(axis=0)) / 2
        reach = np.sqrt(((pts - mid) ** 2).sum(axis=1)).max()
        scale = r * (1 - 1e-9) / reach if reach > 0 else 0.0
        for v, q in zip(sub.nodes, pts):
            node_pos[v] = (float(cx + (q[0] - mid[0]) * scale), float(cy + (q[1] - mid[1]) * scale))
            node_label[v] = lab
    node_pos = dict(sorted(node_pos.items()))
    return LayoutResult(node_pos, node_label, circles, traffic, seed)
