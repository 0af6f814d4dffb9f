"""Compiled inner loops for subset enumeration."""

import numpy as np
from numba import njit


@njit(cache=True)
def all_subset_components(adj, present, n):
    """Component count of the induced subgraph on every vertex subset.

    ``adj[v]`` is the neighbour bitmask of v; vertices outside ``present``
    are not in the complex and contribute nothing.
    """
    total = 1 << n
    out = np.zeros(total, dtype=np.int64)
    for w in range(total):
        rem = w & present
        count = 0
        while rem:
            comp = rem & -rem
            frontier = comp
            while frontier:
                low = frontier & -frontier
                frontier ^= low
                v = 0
                while (low >> v) != 1:
                    v += 1
                new = adj[v] & rem & ~comp
                comp |= new
                frontier |= new
            rem &= ~comp
            count += 1
        out[w] = count
    return out
