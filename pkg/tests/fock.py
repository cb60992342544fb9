"""Independent Fock-space oracle for momentum-space bosons.

Builds truncated ladder operators b_k as explicit matrices on the full
Fock space with at most N bosons per mode, forms the two-body operator by
matrix products and projects onto a (N, P) sector.
"""

import itertools

import numpy as np


def fock_basis(d, nmax):
    return list(itertools.product(range(nmax + 1), repeat=d))


def annihilators(d, nmax):
    states = fock_basis(d, nmax)
    index = {s: i for i, s in enumerate(states)}
    ops = []
    for k in range(d):
        b = np.zeros((len(states), len(states)))
        for s, j in index.items():
            if s[k] > 0:
                t = list(s)
                t[k] -= 1
                b[index[tuple(t)], j] = np.sqrt(s[k])
        ops.append(b)
    return states, ops


def hubbard_fock(d, nmax):
    states, b = annihilators(d, nmax)
    bd = [x.T for x in b]
    w = np.zeros((len(states), len(states)))
    for k1, k2, k3, k4 in itertools.product(range(d), repeat=4):
        if (k1 + k2 - k3 - k4) % d == 0:
            w += bd[k1] @ bd[k2] @ b[k3] @ b[k4] / d
    return states, w


def sector_block(d, n, p, perms):
    """Hubbard matrix on the sector, rows and columns ordered like ``perms``."""
    states, w = hubbard_fock(d, n)
    index = {s: i for i, s in enumerate(states)}
    idx = [index[tuple(m)] for m in perms]
    return w[np.ix_(idx, idx)], states, w
