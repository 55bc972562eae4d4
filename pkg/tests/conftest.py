import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from attnflow import FlowNetwork

# every property runs at least this many generated cases
PROPERTY_EXAMPLES = 1000

settings.register_profile(
    "attnflow",
    max_examples=PROPERTY_EXAMPLES,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
    derandomize=True,
)
settings.load_profile("attnflow")

weights = st.floats(min_value=1e-3, max_value=1e3, allow_nan=False, allow_infinity=False)


def _name(i):
    return f"v{i:02d}"


@st.composite
def networks(draw, min_nodes=2, max_nodes=9, max_edges=30):
    """Arbitrary weighted directed networks (self-loops allowed, no isolated nodes)."""
    n = draw(st.integers(min_nodes, max_nodes))
    pairs = st.tuples(st.integers(0, n - 1), st.integers(0, n - 1), weights)
    rows = draw(st.lists(pairs, min_size=1, max_size=max_edges))
    net, _ = FlowNetwork.from_edges([(_name(s), _name(d), w) for s, d, w in rows])
    return net


@st.composite
def dissipative_networks(draw, min_nodes=2, max_nodes=9, max_edges=30):
    """Networks in which every site has a path to a pure-dissipator node ``zz``."""
    net = draw(networks(min_nodes, max_nodes, max_edges))
    leak = [(v, "zz", draw(weights)) for v in net.nodes]
    out, _ = FlowNetwork.from_edges(list(net.edges()) + leak)
    return out


def edge_set(net):
    return {(s, d): w for s, d, w in net.edges()}


CHAIN = [("a", "b", 10.0)]
FEEDBACK = [("a", "b", 10.0), ("b", "a", 5.0)]


@pytest.fixture
def chain():
    return FlowNetwork.from_edges(CHAIN)[0]


@pytest.fixture
def feedback():
    return FlowNetwork.from_edges(FEEDBACK)[0]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# --------------------------------------------------------------------------
# bookkeeping for the acceptance summary

PROPERTY_RUNS = {}  # nodeid -> (passed, generated examples)
ACCEPTANCE_LINES = []


def _generated(stats):
    m = re.search(r"during generate phase.*?\n.*?\n\s*- (\d+) passing examples", stats, re.S)
    return int(m.group(1)) if m else 0


def pytest_collection_modifyitems(session, config, items):
    # acceptance checks go last so they can see how the property suites ran
    items.sort(key=lambda it: it.module.__name__.endswith("test_acceptance"))
    for it in items:
        if getattr(it.obj, "is_hypothesis_test", False):
            it.add_marker(pytest.mark.property)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    report = (yield).get_result()
    if call.when == "call" and getattr(item.obj, "is_hypothesis_test", False):
        stats = getattr(item, "hypothesis_statistics", "")
        PROPERTY_RUNS[item.nodeid] = (report.passed, _generated(stats))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
