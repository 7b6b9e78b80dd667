"""Grid specifications and one-dimensional finite-difference blocks.

All discretized operators act on amplitudes rescaled by the square root of the
integration weight, with Dirichlet values at the box boundary; grids are open
(no node on the boundary) and an optional fractional offset keeps nodes off
singular hyperplanes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class GridSpec:
    """Product grid over one axis per deformation invariant.

    ``axes`` holds (min, max, points) triples; nodes on axis a sit at
    min + (i + 1 + offset) * h with h = (max - min)/(points + 1), so offset 0
    gives the usual interior Dirichlet grid and a fractional offset shifts
    every node by the same fraction of the spacing.
    """

    axes: tuple[tuple[float, float, int], ...]
    offset: float = 0.0

    def __post_init__(self) -> None:
        axes = tuple((float(a), float(b), int(n)) for a, b, n in self.axes)
        object.__setattr__(self, "axes", axes)
        for lo, hi, n in axes:
            if n < 5:
                raise ValueError(f"need at least 5 points per axis, got {n}")
            if hi <= lo:
                raise ValueError(f"empty axis range ({lo}, {hi})")
        if not (-0.5 <= self.offset < 1.0):
            raise ValueError("offset must lie in [-0.5, 1)")

    @property
    def ndim(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(n for _, _, n in self.axes)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def spacing(self, axis: int) -> float:
        lo, hi, n = self.axes[axis]
        return (hi - lo) / (n + 1)

    def nodes(self, axis: int) -> np.ndarray:
        lo, hi, n = self.axes[axis]
        h = self.spacing(axis)
        return lo + (np.arange(n) + 1.0 + self.offset) * h

    def meshgrid(self) -> list[np.ndarray]:
        return np.meshgrid(*[self.nodes(a) for a in range(self.ndim)], indexing="ij")

    def points(self) -> np.ndarray:
        """All nodes as an array of shape (size, ndim), C-order."""
        mesh = self.meshgrid()
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_volume(self) -> float:
        return float(np.prod([self.spacing(a) for a in range(self.ndim)]))

    def with_points(self, points_per_axis) -> "GridSpec":
        if np.isscalar(points_per_axis):
            points_per_axis = [points_per_axis] * self.ndim
        axes = tuple((lo, hi, int(p)) for (lo, hi, _), p in zip(self.axes, points_per_axis))
        return GridSpec(axes=axes, offset=self.offset)

    def scaled_box(self, factor: float, keep_spacing: bool = True) -> "GridSpec":
        """Grow every axis box about its centre; by default the point count
        grows too so that the spacing stays (nearly) fixed."""
        axes = []
        for lo, hi, n in self.axes:
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * factor
            pts = int(round((n + 1) * factor)) - 1 if keep_spacing else n
            axes.append((mid - half, mid + half, pts))
        return GridSpec(axes=tuple(axes), offset=self.offset)


def dirichlet_second_difference(n: int, h: float) -> sp.csr_matrix:
    """Matrix of -d^2/dx^2 on n interior nodes with zero boundary values."""
    main = np.full(n, 2.0 / h**2)
    off = np.full(n - 1, -1.0 / h**2)
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def centered_first_difference(n: int, h: float) -> sp.csr_matrix:
    """Antisymmetric matrix of d/dx (centered, zero boundary values)."""
    off = np.full(n - 1, 0.5 / h)
    return sp.diags([-off, off], [-1, 1], format="csr")


def weighted_divergence_block(
    nodes: np.ndarray, h: float, weight_fn, coefficient: float
) -> sp.csr_matrix:
    """Symmetric form of -c (1/P) d/dx (P d/dx .) on a uniform 1-D grid.

    Half-point weights P(x +- h/2); the matrix is the divergence-form operator
    conjugated by sqrt(P) at the nodes, hence symmetric with the plain inner
    product and isospectral to the weighted form.  A vanishing half-point
    weight at the first or last half-point produces the natural (no-flux)
    boundary there; otherwise the boundary is Dirichlet.
    """
    p = weight_fn(nodes)
    pp = weight_fn(nodes + 0.5 * h)
    pm = weight_fn(nodes - 0.5 * h)
    main = coefficient * (pp + pm) / (p * h**2)
    off = -coefficient * pp[:-1] / (h**2 * np.sqrt(p[:-1] * p[1:]))
    return sp.diags([off, main, off], [-1, 0, 1], format="csr")


def kron_chain(blocks_1d, fiber_dim: int = 1) -> sp.csr_matrix:
    """Kronecker sum over axes of per-axis matrices, tensored with the fiber.

    ``blocks_1d`` is a list with one (n_a x n_a) matrix per axis; the result
    acts on vectors indexed C-order by (node..., fiber).
    """
    shape = [b.shape[0] for b in blocks_1d]
    total = None
    for axis, block in enumerate(blocks_1d):
        factors = [sp.identity(n, format="csr") for n in shape]
        factors[axis] = block
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        total = term if total is None else total + term
    if fiber_dim > 1:
        total = sp.kron(total, sp.identity(fiber_dim, format="csr"), format="csr")
    return total.tocsr()


def kron_factors(blocks_1d, fiber_dim: int = 1) -> sp.csr_matrix:
    """Kronecker product over axes (used for mixed derivative terms)."""
    term = blocks_1d[0]
    for b in blocks_1d[1:]:
        term = sp.kron(term, b, format="csr")
    if fiber_dim > 1:
        term = sp.kron(term, sp.identity(fiber_dim, format="csr"), format="csr")
    return term.tocsr()
