"""Optional PNG figures for CLI artifacts.

matplotlib is imported lazily with the Agg backend, so the rest of the
package never needs it.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import Unsupported


def _pyplot():
    try:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise Unsupported("figures need matplotlib; install the 'plot' extra") from exc
    return plt


def figure_path(out: str | Path) -> Path:
    return Path(out).with_suffix(".png")


def _save(fig, path: Path):
    tmp = path.with_name(path.name + ".tmp.png")
    fig.savefig(tmp, dpi=120, bbox_inches="tight", metadata={"Software": None})
    tmp.replace(path)


def _outline(ax, poly, coords_of):
    """Draw the polytope boundary in 1 or 2 tangent coordinates."""
    from scipy.spatial import ConvexHull

    pts = coords_of(poly.vertices)
    if pts.shape[1] == 1:
        ax.plot([pts.min(), pts.max()], [0, 0], "k-", lw=2)
        ax.plot(pts[:, 0], np.zeros(len(pts)), "ko")
        ax.set_yticks([])
        return
    hull = ConvexHull(pts)
    ring = list(hull.vertices) + [hull.vertices[0]]
    ax.plot(pts[ring, 0], pts[ring, 1], "k-", lw=1.5)
    ax.plot(pts[:, 0], pts[:, 1], "ko", ms=4)
    ax.set_aspect("equal")


def _coords(poly):
    from .grid import tangent_coordinates

    return lambda pts: tangent_coordinates(poly, pts)


def plot_domain(poly, weights, path: Path, title: str = ""):
    if poly.dim not in (1, 2):
        raise Unsupported(f"cannot draw a {poly.dim}-dimensional domain")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5 if poly.dim == 2 else 1.5))
    coords = _coords(poly)
    _outline(ax, poly, coords)
    w = coords(weights)
    if w.shape[1] == 1:
        ax.plot(w[:, 0], np.zeros(len(w)), "r.", ms=6)
    else:
        ax.plot(w[:, 0], w[:, 1], "r.", ms=6)
    ax.set_title(title)
    _save(fig, path)
    plt.close(fig)


def plot_grid(poly, points, values, path: Path, label: str, title: str = ""):
    """Scatter or line plot of grid values over a 1- or 2-dimensional domain."""
    if poly.dim not in (1, 2):
        raise Unsupported(f"cannot draw a {poly.dim}-dimensional grid")
    plt = _pyplot()
    coords = _coords(poly)
    pts = coords(points)
    values = np.asarray(values, dtype=float)
    fig, ax = plt.subplots(figsize=(6, 5 if poly.dim == 2 else 4))
    if poly.dim == 1:
        order = np.argsort(pts[:, 0])
        ax.plot(pts[order, 0], values[order], "o-", ms=3)
        ax.set_xlabel("tangent coordinate")
        ax.set_ylabel(label)
    else:
        _outline(ax, poly, coords)
        sc = ax.scatter(pts[:, 0], pts[:, 1], c=values, cmap="viridis", s=40)
        fig.colorbar(sc, ax=ax, label=label)
    ax.set_title(title)
    _save(fig, path)
    plt.close(fig)


def plot_force(fit, g_formula: float, path: Path, title: str = ""):
    """F against sqrt(eps) with the fitted law and the formula slope."""
    plt = _pyplot()
    s = np.sqrt(np.asarray(fit.eps))
    vals = np.asarray(fit.values)
    fine = np.linspace(0, s.max(), 100)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(s, vals, "ko", label="constrained search")
    ax.plot(fine, fit.intercept - fit.G_fit * fine + fit.linear * fine**2, "b-", label=f"fit, G = {fit.G_fit:.4g}")
    ax.plot(fine, fit.intercept - g_formula * fine, "r--", label=f"formula, G = {g_formula:.4g}")
    ax.set_xlabel("sqrt(eps)")
    ax.set_ylabel("F_p")
    ax.legend()
    ax.set_title(title)
    _save(fig, path)
    plt.close(fig)


def plot_kirwan(poly, inequalities, path: Path, title: str = ""):
    """Kirwan polytope in Cartan coordinates with the reported inequalities."""
    if poly.ambient_dim not in (1, 2):
        raise Unsupported(f"cannot draw a rank-{poly.ambient_dim} polytope")
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5, 5 if poly.ambient_dim == 2 else 1.5))
    verts = np.asarray(poly.vertices, dtype=float)
    if poly.ambient_dim == 1:
        ax.plot([verts.min(), verts.max()], [0, 0], "k-", lw=2)
        ax.set_yticks([])
    else:
        from scipy.spatial import ConvexHull

        hull = ConvexHull(verts)
        ring = list(hull.vertices) + [hull.vertices[0]]
        ax.fill(verts[ring, 0], verts[ring, 1], alpha=0.3)
        ax.plot(verts[ring, 0], verts[ring, 1], "k-")
        span = np.linspace(verts[:, 0].min() - 0.5, verts[:, 0].max() + 0.5, 2)
        for ineq in inequalities:
            s, c = np.asarray(ineq.sigma, dtype=float), ineq.c
            if abs(s[1]) > 1e-12:
                ax.plot(span, (c - s[0] * span) / s[1], "--", lw=0.8, label=f"{tuple(ineq.sigma)} >= {c}")
            else:
                ax.axvline(c / s[0], ls="--", lw=0.8, label=f"{tuple(ineq.sigma)} >= {c}")
        ax.set_xlim(verts[:, 0].min() - 0.5, verts[:, 0].max() + 0.5)
        ax.set_ylim(verts[:, 1].min() - 0.5, verts[:, 1].max() + 0.5)
        ax.set_aspect("equal")
        ax.legend(fontsize=7)
    ax.set_title(title)
    _save(fig, path)
    plt.close(fig)
