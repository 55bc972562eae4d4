import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from attnflow import FlowNetwork, LabelMap, community_report, induce_subnetworks
from attnflow.community import BELOW_MIN, write_community_csv, write_size_gamma_csv
from attnflow.errors import ValidationError
from attnflow.netmodel import planted_network

from conftest import networks


@st.composite
def labelled(draw):
    net = draw(networks(max_nodes=10, max_edges=40))
    labs = draw(st.lists(st.sampled_from(["x", "y", "z", None]), min_size=net.n_nodes,
                         max_size=net.n_nodes))
    mapping = {v: lab for v, lab in zip(net.nodes, labs) if lab is not None}
    return net, LabelMap.from_dict(mapping, net)


def planted_union(gamma=0.7):
    rng = np.random.default_rng(3)
    rows, mapping = [], {}
    for prefix, size in (("big", 60), ("mid", 25)):
        sub = planted_network(np.sort(rng.lognormal(2, 0.6, size)), gamma, prefix=prefix)
        rows += list(sub.edges())
        mapping.update({v: prefix for v in sub.nodes})
    rows.append(("tiny0", "tiny1", 3.0))
    mapping.update(tiny0="tiny", tiny1="tiny")
    # a little cross-community flow, which the per-community fits must ignore
    rows += [("big00", "mid00", 0.5), ("mid01", "big01", 0.25)]
    net, _ = FlowNetwork.from_edges(rows)
    return net, LabelMap.from_dict(mapping, net)


@given(labelled())
def test_edge_accounting(case):
    net, labels = case
    if len(labels) == 0:
        with pytest.raises(ValidationError):
            induce_subnetworks(net, labels)
        return
    part = induce_subnetworks(net, labels)
    inside = sum(sub.n_edges for _, sub in part)
    assert inside + part.cross_edges + part.unlabeled_edges == net.n_edges
    assert set(part.unlabeled_nodes) == set(labels.unlabeled)


@given(labelled(), st.permutations(["p", "q", "r"]))
def test_report_ignores_label_names(case, names):
    net, labels = case
    if len(labels) == 0:
        return
    rename = dict(zip(["x", "y", "z"], names))
    other = LabelMap.from_dict({v: rename[lab] for v, lab in labels.labels.items()}, net)

    def key(rows, f=lambda s: s):
        out = {}
        for r in rows:
            fit = None if r.fit is None else (r.fit.gamma, r.fit.r2)
            out[f(r.label)] = (r.n_sites, r.n_edges, r.daily_flow, fit, r.skip_reason)
        return out

    assert key(community_report(net, labels), rename.get) == key(community_report(net, other))


def test_planted_communities_recover_gamma():
    net, labels = planted_union(0.7)
    rows = community_report(net, labels, min_sites=3)
    assert [r.label for r in rows] == ["big", "mid", "tiny"]
    for r in rows[:2]:
        assert r.fit.gamma == pytest.approx(0.7, abs=1e-9)
        assert r.fit.r2 == pytest.approx(1.0, abs=1e-12)
    assert rows[2].fit is None and rows[2].skip_reason == BELOW_MIN


def test_skip_reasons():
    net, _ = FlowNetwork.from_edges([("a", "b", 1.0), ("b", "a", 1.0), ("c", "d", 1.0),
                                     ("e", "f", 1.0), ("g", "h", 2.0), ("i", "j", 1.0)])
    labels = LabelMap.from_dict({"a": "loop", "b": "loop", "c": "loop",
                                 "e": "none", "g": "none", "i": "none", "h": "other"}, net)
    rows = {r.label: r for r in community_report(net, labels)}
    assert rows["loop"].skip_reason.startswith("NonDissipativeError")
    assert rows["none"].skip_reason == "no internal edges"
    assert rows["other"].skip_reason == BELOW_MIN
    with pytest.raises(ValidationError):
        community_report(net, labels, min_sites=2)


def test_csv_outputs(tmp_path):
    net, labels = planted_union(0.5)
    rows = community_report(net, labels)
    write_community_csv(rows, tmp_path / "c.csv")
    write_size_gamma_csv(rows, tmp_path / "s.csv")
    table = (tmp_path / "c.csv").read_text().splitlines()
    assert table[0] == "label,n_sites,n_edges,daily_flow,gamma,r2,skip_reason"
    assert table[1].startswith("big,61,")
    assert table[3].endswith(",,," + BELOW_MIN)
    sizes = (tmp_path / "s.csv").read_text().splitlines()
    assert sizes[0] == "label,n_sites,gamma" and len(sizes) == 3
