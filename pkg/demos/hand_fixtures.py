"""Two tiny networks whose impacts can be worked out by hand.

A chain a -> b (10 units) and a feedback loop a <-> b (10 one way, 5 back).
The analytic numbers are compared with a random-surfer simulation.
"""
import numpy as np

from attnflow import FlowNetwork, balance, compute_U, impact_table, surfer_oracle, transition_matrix


def show(title, rows):
    net, _ = FlowNetwork.from_edges(rows)
    bn = balance(net)
    u = compute_U(transition_matrix(bn))
    table = impact_table(bn, u)
    est = surfer_oracle(bn, 200_000, seed=1)
    print(f"\n{title}")
    print("fundamental matrix (sites only):")
    print(np.array2string(u.u[1:, 1:], precision=3))
    print(f"{'node':>5} {'A':>7} {'G':>7} {'C':>7} {'C_hat':>8} {'se':>6}")
    for i, v in enumerate(table.nodes):
        print(f"{v:>5} {table.A[i]:7.2f} {table.G[i]:7.2f} {table.C[i]:7.2f} "
              f"{est.c_hat[i]:8.2f} {est.c_se[i]:6.3f}")


if __name__ == "__main__":
    # every user reaching b leaves, so a carries 10 users for two hops
    show("chain", [("a", "b", 10.0)])
    # half of b's visitors go back to a, which doubles their stay
    show("feedback", [("a", "b", 10.0), ("b", "a", 5.0)])
