"""Deterministic density grids on polytopes.

Points are barycentric lattice points of the simplices of a Delaunay
triangulation of the polytope in tangent coordinates.  They are returned
in sorted order so that output files do not depend on the triangulation
order.
"""

from __future__ import annotations

import itertools

import numpy as np
from scipy.spatial import Delaunay

from .abelian import Polytope


def barycentric_lattice(dim: int, steps: int):
    """All (dim+1)-tuples of nonnegative integers summing to steps, divided by steps."""
    for head in itertools.product(range(steps + 1), repeat=dim):
        rest = steps - sum(head)
        if rest >= 0:
            yield np.array(head + (rest,), dtype=float) / steps


def tangent_coordinates(poly: Polytope, points) -> np.ndarray:
    return (np.atleast_2d(points) - poly.offset) @ poly.tangent


def from_tangent(poly: Polytope, coords) -> np.ndarray:
    return poly.offset + np.atleast_2d(coords) @ poly.tangent.T


def polytope_grid(poly: Polytope, steps: int, margin: float = 0.0) -> np.ndarray:
    """Grid points of the polytope whose facet slack is at least ``margin``."""
    if steps < 1:
        raise ValueError("steps must be positive")
    if poly.dim == 0:
        return np.array(poly.vertices[:1], dtype=float)
    coords = tangent_coordinates(poly, poly.vertices)
    if poly.dim == 1:
        simplices = [np.array([coords[:, 0].argmin(), coords[:, 0].argmax()])]
    else:
        simplices = Delaunay(coords).simplices
    found = {}
    lattice = list(barycentric_lattice(poly.dim, steps))
    for simplex in simplices:
        corners = coords[simplex]
        for lam in lattice:
            p = lam @ corners
            found.setdefault(tuple(np.round(p, 9)), p)
    pts = from_tangent(poly, np.array([found[k] for k in sorted(found)]))
    pts = np.where(np.abs(pts - np.round(pts)) < 1e-12, np.round(pts), pts)
    if margin > 0:
        pts = np.array([p for p in pts if poly.margin(p) >= margin]).reshape(-1, poly.ambient_dim)
    return pts
