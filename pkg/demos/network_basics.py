"""
Mixing weights and connectivity
===============================

Build a few small topologies and look at their mixing matrices and the
second-smallest Laplacian eigenvalue, which controls how fast gossip
averaging forgets disagreement.
"""

# %%
# A five-node ring with Metropolis weights
# ----------------------------------------

import numpy as np

from privdsgd import build_network

np.set_printoptions(precision=4, suppress=True)

ring = build_network(5, "ring", "metropolis")
print(ring.weights)
print("rho_L =", ring.rho_L)

# %%
# Denser graphs mix faster
# ------------------------

for topology in ("ring", "star", "complete"):
    net = build_network(8, topology, "metropolis")
    print(f"{topology:>8}: rho_L = {net.rho_L:.4f}")

# %%
# Any explicit edge list works as long as the graph is connected.

path = build_network(4, "edges", edges=[[0, 1], [1, 2], [2, 3]])
print("path spectrum:", path.eigenvalues)
