import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.stats import norm

from attnflow import (FlowNetwork, analyze, balance, compute_U, impact_table, surfer_oracle,
                      transition_matrix)
from attnflow.balance import TransitionMatrix
from attnflow.errors import NonDissipativeError, ValidationError, WalkLimitError
from attnflow.netmodel import planted_network, synth_network
from attnflow.scaling import fit_scaling

from conftest import dissipative_networks


def test_chain_fixture(chain):
    t = analyze(chain)
    assert np.allclose(t.A, [10, 10], atol=1e-10)
    assert np.allclose(t.G, [10, 10], atol=1e-10)
    assert np.allclose(t.C, [20, 10], atol=1e-10)


def test_feedback_fixture(feedback):
    bn = balance(feedback)
    u = compute_U(transition_matrix(bn))
    assert np.allclose(u.u[1:, 1:], [[2, 2], [1, 2]], atol=1e-10)
    t = impact_table(bn, u)
    assert np.allclose(t.A, [10, 10], atol=1e-10)
    assert np.allclose(t.C, [20, 15], atol=1e-10)
    assert t.row("b") == pytest.approx((10.0, 5.0, 15.0), abs=1e-10)
    assert u.residual < 1e-12


def test_self_loop_is_divided_out():
    # a loops on itself with probability 1/2 before passing everything to b
    net, _ = FlowNetwork.from_edges([("a", "a", 10.0), ("a", "b", 10.0)])
    t = analyze(net)
    assert t.row("a")[1] == pytest.approx(10.0)
    assert t.row("a")[2] == pytest.approx(10.0 * 3)


def test_closed_cycle_is_not_dissipative():
    net, _ = FlowNetwork.from_edges([("a", "b", 1.0), ("b", "a", 1.0), ("c", "d", 1.0)])
    with pytest.raises(NonDissipativeError) as err:
        analyze(net)
    assert err.value.components == [["a", "b"]]


def test_near_singular_is_not_dissipative():
    # the a/b cycle reaches the sink only through a 1e-13 trickle to c
    net, _ = FlowNetwork.from_edges([("a", "b", 1.0), ("b", "a", 1.0), ("b", "c", 1e-13)])
    with pytest.raises(NonDissipativeError, match="singular"):
        analyze(net)


def test_impact_table_checks_alignment(chain, feedback):
    u = compute_U(transition_matrix(balance(feedback)))
    other, _ = FlowNetwork.from_edges([("x", "y", 1.0)])
    with pytest.raises(ValidationError):
        impact_table(balance(other), u)


def test_csv_format(tmp_path, feedback):
    analyze(feedback).to_csv(tmp_path / "i.csv")
    assert (tmp_path / "i.csv").read_text() == "node,A,G,C\na,10,5,20\nb,10,5,15\n"


@st.composite
def substochastic(draw):
    n = draw(st.integers(1, 8))
    raw = draw(arrays(np.float64, (n + 1, n + 1),
                      elements=st.floats(0, 1, allow_subnormal=False)))
    mask = draw(arrays(np.bool_, (n + 1, n + 1)))
    raw = raw * mask
    raw[:, 0] = 0
    caps = draw(arrays(np.float64, n + 1, elements=st.floats(0, 0.9)))
    sums = raw.sum(axis=1)
    scale = np.divide(caps, sums, out=np.zeros(n + 1), where=sums > 1e-12)
    m = raw * scale[:, None]
    return TransitionMatrix(m, np.ones(n + 1), tuple(f"s{i}" for i in range(n)))


@given(substochastic())
def test_neumann_series(tm):
    u = compute_U(tm).u
    acc = np.eye(tm.m.shape[0])
    term = acc.copy()
    for _ in range(200):
        term = term @ tm.m
        acc += term
    assert np.allclose(u, acc, rtol=0, atol=1e-6)


@given(dissipative_networks(), st.randoms(use_true_random=False))
def test_permutation_equivariance(net, rnd):
    names = list(net.nodes)
    new = names[:]
    rnd.shuffle(new)
    rename = dict(zip(names, new))
    other, _ = FlowNetwork.from_edges([(rename[s], rename[d], w) for s, d, w in net.edges()])
    t, t2 = analyze(net), analyze(other)
    pos = [other.index(rename[v]) for v in names]
    for a, b in ((t.A, t2.A), (t.G, t2.G), (t.C, t2.C)):
        assert np.allclose(a, b[pos], rtol=1e-9, atol=1e-12)


@given(dissipative_networks(), st.floats(1e-3, 1e3))
def test_scale_covariance(net, c):
    t, t2 = analyze(net), analyze(net.scaled(c))
    for a, b in ((t.A, t2.A), (t.G, t2.G), (t.C, t2.C)):
        assert np.allclose(a * c, b, rtol=1e-9, atol=1e-12)


@given(dissipative_networks())
def test_impact_bounds(net):
    bn = balance(net)
    u = compute_U(transition_matrix(bn))
    t = impact_table(bn, u)
    uu = u.u[1:, 1:]
    assert np.all(np.diag(uu) >= 1 - 1e-9)
    assert np.all(t.G >= 0)
    # a site never receives more first visits than the source emits
    assert np.all(t.G <= bn.boundary_flow * (1 + 1e-9))
    assert np.all(t.C >= t.G * (1 - 1e-9))


def test_planted_law_is_exact():
    traffic = np.geomspace(1, 20, 200)
    for g in (0.3, 0.5, 0.92):
        t = analyze(planted_network(traffic, g))
        fit = fit_scaling(t)
        assert fit.gamma == pytest.approx(g, abs=1e-10)
        assert fit.r2 == pytest.approx(1.0, abs=1e-12)


def test_oracle_feedback_fixture(feedback):
    est = surfer_oracle(balance(feedback), 200_000, seed=1)
    assert np.allclose(est.c_hat, [20, 15], rtol=0.01)
    assert np.allclose(est.g_hat, [5, 5])
    assert np.allclose(est.path_len, [4, 3], rtol=0.01)


def test_oracle_visit_identity_and_impact():
    net = synth_network(30, 2, seed=4)
    bn = balance(net)
    u = compute_U(transition_matrix(bn))
    t = impact_table(bn, u)
    est = surfer_oracle(bn, 200_000, seed=2)
    visits = bn.source_out @ u.u[1:, 1:]
    # 60 simultaneous checks: Bonferroni bound for a 1e-3 family-wise false alarm rate
    z = norm.isf(1e-3 / 2 / 60)
    assert np.all(np.abs(est.visits - visits) <= z * est.visits_se + 1e-12)
    assert np.all(np.abs(est.c_hat - t.C) <= z * est.c_se + 1e-12)


def test_oracle_is_seeded(feedback):
    bn = balance(feedback)
    a = surfer_oracle(bn, 5000, seed=7)
    b = surfer_oracle(bn, 5000, seed=7)
    c = surfer_oracle(bn, 5000, seed=8)
    assert np.array_equal(a.c_hat, b.c_hat)
    assert not np.array_equal(a.path_len, c.path_len)


def test_oracle_stream_count_does_not_change_totals(feedback):
    bn = balance(feedback)
    a = surfer_oracle(bn, 640, seed=3, n_streams=64)
    assert a.walkers == 640 and a.node_walkers == 640


def test_oracle_hop_limit():
    # sticky self-loop: expected stay 1e4 hops
    net, _ = FlowNetwork.from_edges([("a", "a", 9999.0), ("a", "b", 1.0)])
    with pytest.raises(WalkLimitError):
        surfer_oracle(balance(net), 100, seed=0, max_hops=10)


def test_oracle_rejects_bad_arguments(feedback):
    bn = balance(feedback)
    with pytest.raises(ValidationError):
        surfer_oracle(bn, 0, seed=0)
    with pytest.raises(ValidationError):
        surfer_oracle(bn, 10, seed=-1)
    closed, _ = FlowNetwork.from_edges([("a", "b", 1.0), ("b", "a", 1.0), ("c", "d", 1.0)])
    with pytest.raises(NonDissipativeError):
        surfer_oracle(balance(closed), 10, seed=0)


def test_surfer_csv(tmp_path, feedback):
    surfer_oracle(balance(feedback), 1000, seed=0).to_csv(tmp_path / "s.csv")
    head = (tmp_path / "s.csv").read_text().splitlines()[0]
    assert head == "node,visits,visits_se,g_hat,g_se,path_len,path_len_se,c_hat,c_se"
