"""Reduced Hamiltonians on deformation invariants.

Five model families act on matrix-valued amplitudes f(q^1, ..., q^n) over the
invariant grid: two hyperbolic families with pair couplings 1/sh^2, 1/ch^2
(fully affine, and the two mixed metric/affine variants), the rational family
with couplings 1/(Q_a -+ Q_b)^2 on the raw invariants, and the trigonometric
family on compact invariants with 1/sin^2, 1/cos^2 couplings.

Every assembled operator acts on amplitudes rescaled by the square root of the
integration weight P (so the flat second-difference Laplacian replaces the
weighted divergence form, at the price of the artificial potential returned by
:func:`artificial_potential`), is real symmetric by construction, and carries
Dirichlet boundary values on the rescaled amplitude.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .grids import (
    GridSpec,
    centered_first_difference,
    dirichlet_second_difference,
    kron_chain,
    weighted_divergence_block,
)
from .spin import SpinLabel, build_spin_matrices


class AssemblyError(ValueError):
    """Raised when a model precondition is violated at assembly time."""


class ModelKind(enum.Enum):
    AffAff = "aff-aff"
    MetAff = "met-aff"
    AffMet = "aff-met"
    DAlembert = "dalembert"
    UnitaryGroup = "unitary"

    @property
    def hyperbolic(self) -> bool:
        return self in (ModelKind.AffAff, ModelKind.MetAff, ModelKind.AffMet)


@dataclass(frozen=True)
class InertialParams:
    """Inertia constants I, A, B and the dimension n; alpha, beta, mu derived."""

    A: float
    B: float = 0.0
    I: float = 0.0
    n: int = 2

    @property
    def alpha(self) -> float:
        return self.I + self.A

    @property
    def beta(self) -> float:
        if self.B == 0.0:
            raise ZeroDivisionError("beta undefined for B = 0")
        return -(self.I + self.A) * (self.I + self.A + self.n * self.B) / self.B

    @property
    def mu(self) -> float:
        if self.I == 0.0:
            raise ZeroDivisionError("mu undefined for I = 0")
        return (self.I**2 - self.A**2) / self.I

    def validate(self, kind: ModelKind) -> None:
        if self.A == 0.0:
            raise AssemblyError("A must be nonzero")
        if kind in (ModelKind.MetAff, ModelKind.AffMet):
            if self.I == 0.0 or self.I**2 == self.A**2:
                raise AssemblyError("mixed kinds need I != 0 and I^2 != A^2")
            if self.B != 0.0 and self.alpha + self.n * self.B == 0.0:
                raise AssemblyError("I + A + nB must be nonzero")
        if kind in (ModelKind.AffAff, ModelKind.UnitaryGroup):
            if self.A + self.n * self.B == 0.0:
                raise AssemblyError("A + nB must be nonzero")
        if kind is ModelKind.DAlembert and self.I <= 0.0:
            raise AssemblyError("rational kind needs I > 0")


@dataclass(frozen=True)
class SectorLabel:
    """Representation pair attached to the two rotation factors.

    For n = 3 the fields hold doubled spins (2s, 2j); for n = 2 they are the
    signed integer Fourier labels (m, n) of the two angles.  Scalar sectors
    (0, 0) exist for every n.
    """

    n: int
    left: int
    right: int

    @classmethod
    def spins(cls, s, j) -> "SectorLabel":
        return cls(3, SpinLabel.from_spin(s).twice, SpinLabel.from_spin(j).twice)

    @classmethod
    def fourier(cls, m: int, n: int) -> "SectorLabel":
        return cls(2, int(m), int(n))

    @classmethod
    def scalar(cls, n: int) -> "SectorLabel":
        return cls(n, 0, 0)

    @property
    def fiber_shape(self) -> tuple[int, int]:
        if self.n == 3:
            return (self.left + 1, self.right + 1)
        return (1, 1)

    @property
    def fiber_dim(self) -> int:
        a, b = self.fiber_shape
        return a * b

    @property
    def halfness_ok(self) -> bool:
        """Whether the pair can carry a nonzero amplitude (n = 3: 2s - 2j even)."""
        if self.n == 3:
            return (self.left - self.right) % 2 == 0
        return True

    @property
    def fermionic(self) -> bool:
        return self.n == 3 and self.left % 2 == 1

    def __str__(self) -> str:
        if self.n == 3:
            return f"(s={SpinLabel(self.left)}, j={SpinLabel(self.right)})"
        return f"(m={self.left}, n={self.right})"


@dataclass
class ReducedAmplitude:
    """Matrix-valued amplitude on the invariant grid, shape nodes x fiber.

    Construction fails for n = 3 sectors whose spin labels differ by a
    half-integer: such amplitudes are identically zero on the covering
    manifold and must not be stored.
    """

    sector: SectorLabel
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self) -> None:
        if not self.sector.halfness_ok:
            raise ValueError(
                f"sector {self.sector} carries half-integer label difference; "
                "its amplitude is identically zero"
            )
        expected = self.grid.shape + self.sector.fiber_shape
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != expected:
            raise ValueError(f"values shape {self.values.shape} != {expected}")

    def flat(self) -> np.ndarray:
        return self.values.reshape(self.grid.size, *self.sector.fiber_shape)


def fiber_generators(sector: SectorLabel) -> tuple[np.ndarray, np.ndarray]:
    """Generator stacks acting on the two fiber indices.

    n = 3: the standard spin matrix triples for 2s and 2j; n = 2: the 1x1
    "matrices" (m) and (n); scalar sectors of higher n get zero generators.
    """
    if sector.n == 3:
        return (
            build_spin_matrices(SpinLabel(sector.left)).stack,
            build_spin_matrices(SpinLabel(sector.right)).stack,
        )
    if sector.n == 2:
        return (
            np.array([[[sector.left]]], dtype=complex),
            np.array([[[sector.right]]], dtype=complex),
        )
    if sector.left == 0 and sector.right == 0:
        return np.zeros((1, 1, 1), dtype=complex), np.zeros((1, 1, 1), dtype=complex)
    raise AssemblyError(f"only scalar sectors are supported for n = {sector.n}")


def apply_left_spin(axis: int, amp: ReducedAmplitude) -> ReducedAmplitude:
    """Pointwise left multiplication of the amplitude by the axis generator."""
    left, _ = fiber_generators(amp.sector)
    values = np.einsum("ab,...bc->...ac", left[axis], amp.values)
    return ReducedAmplitude(amp.sector, amp.grid, values)


def apply_right_spin(axis: int, amp: ReducedAmplitude) -> ReducedAmplitude:
    """Pointwise right multiplication of the amplitude by the axis generator."""
    _, right = fiber_generators(amp.sector)
    values = np.einsum("...ab,bc->...ac", amp.values, right[axis])
    return ReducedAmplitude(amp.sector, amp.grid, values)


# ---------------------------------------------------------------------------
# weight factors and the artificial potential of the sqrt(P) rescaling
# ---------------------------------------------------------------------------


def _pair_factor(kind: ModelKind, diff: np.ndarray, total: np.ndarray) -> np.ndarray:
    if kind.hyperbolic:
        return np.abs(np.sinh(diff))
    if kind is ModelKind.UnitaryGroup:
        return np.abs(np.sin(diff))
    if kind is ModelKind.DAlembert:
        return np.abs(diff * total)  # |Qa - Qb| * |Qa + Qb|
    raise AssemblyError(f"unknown kind {kind}")


def weight_factor(q, kind: ModelKind) -> np.ndarray:
    """Integration weight P(q) as an unordered-pair product; zero at coincidences.

    Hyperbolic kinds use |sh(q_a - q_b)|, the rational kind |Q_a^2 - Q_b^2| on
    the raw invariants, the trigonometric kind |sin(q_a - q_b)|.
    """
    q = np.atleast_2d(np.asarray(q, dtype=float))
    n = q.shape[-1]
    out = np.ones(q.shape[:-1])
    for a in range(n):
        for b in range(a + 1, n):
            out = out * _pair_factor(kind, q[..., a] - q[..., b], q[..., a] + q[..., b])
    return out if out.shape else float(out)


def log_weight_derivatives(q, kind: ModelKind) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis d(ln P)/dq_a and d^2(ln P)/dq_a^2 at the given points."""
    q = np.atleast_2d(np.asarray(q, dtype=float))
    n = q.shape[-1]
    grad = np.zeros_like(q)
    lap = np.zeros_like(q)
    for a in range(n):
        for b in range(n):
            if b == a:
                continue
            d = q[..., a] - q[..., b]
            if kind.hyperbolic:
                grad[..., a] += 1.0 / np.tanh(d)
                lap[..., a] += -1.0 / np.sinh(d) ** 2
            elif kind is ModelKind.UnitaryGroup:
                grad[..., a] += 1.0 / np.tan(d)
                lap[..., a] += -1.0 / np.sin(d) ** 2
            elif kind is ModelKind.DAlembert:
                tot = q[..., a] + q[..., b]
                grad[..., a] += 1.0 / d + 1.0 / tot
                lap[..., a] += -1.0 / d**2 - 1.0 / tot**2
    return grad, lap


def artificial_potential(q, kind: ModelKind, mass_coeff: float) -> np.ndarray:
    """Potential of the sqrt(P) rescaling, mass_coeff * sum_a (d^2_a sqrt(P))/sqrt(P).

    This is the unique potential U with sqrt(P) D (P^{-1/2} g) = Lap g - U g,
    where D is the weighted divergence operator; it is evaluated analytically
    from the closed-form weight as sum_a [ (1/2) d^2_a ln P + (1/4)(d_a ln P)^2 ].
    ``mass_coeff`` is the coefficient multiplying -D in the Hamiltonian.
    """
    with np.errstate(divide="ignore", invalid="ignore"):
        grad, lap = log_weight_derivatives(q, kind)
        u = np.sum(0.5 * lap + 0.25 * grad**2, axis=-1)
    if not np.all(np.isfinite(u)):
        raise AssemblyError("artificial potential evaluated at a coincidence point")
    return mass_coeff * u


# ---------------------------------------------------------------------------
# fiber couplings
# ---------------------------------------------------------------------------


def _pair_weights(kind: ModelKind, params: InertialParams, qa, qb):
    """(w_minus, w_plus, eps) for the invariant pair (qa, qb)."""
    if kind.hyperbolic:
        c = params.A if kind is ModelKind.AffAff else params.alpha
        half = 0.5 * (qa - qb)
        return 1.0 / (16.0 * c * np.sinh(half) ** 2), 1.0 / (16.0 * c * np.cosh(half) ** 2), -1.0
    if kind is ModelKind.UnitaryGroup:
        half = 0.5 * (qa - qb)
        return (
            1.0 / (16.0 * params.A * np.sin(half) ** 2),
            1.0 / (16.0 * params.A * np.cos(half) ** 2),
            1.0,
        )
    if kind is ModelKind.DAlembert:
        return (
            1.0 / (4.0 * params.I * (qa - qb) ** 2),
            1.0 / (4.0 * params.I * (qa + qb) ** 2),
            1.0,
        )
    raise AssemblyError(f"unknown kind {kind}")


def _pair_to_generator(n: int) -> list[tuple[int, tuple[int, int]]]:
    """Which generator couples to which invariant pair.

    n = 3: generator a pairs with the complementary axes (b, c); n = 2: the
    single generator pairs with (0, 1); scalar higher n: generator index 0
    (zero matrix) for every pair.
    """
    if n == 3:
        return [(0, (1, 2)), (1, (0, 2)), (2, (0, 1))]
    if n == 2:
        return [(0, (0, 1))]
    return [(0, (a, b)) for a in range(n) for b in range(a + 1, n)]


def _fiber_action_matrices(sector: SectorLabel) -> tuple[np.ndarray, np.ndarray]:
    """Left/right fiber actions as matrices on the row-major flattened fiber."""
    left, right = fiber_generators(sector)
    dl, dr = sector.fiber_shape
    il, ir = np.eye(dl), np.eye(dr)
    lmat = np.stack([np.kron(s, ir) for s in left])
    rmat = np.stack([np.kron(il, s.T) for s in right])
    return lmat, rmat


def fiber_coupling(
    kind: ModelKind, sector: SectorLabel, q, params: InertialParams
) -> np.ndarray:
    """Hermitian pair-coupling matrix on the flattened fiber at one point q.

    sum over pairs of (right - left)^2 * w_minus + eps * (right + left)^2 *
    w_plus, with w and eps per family (hyperbolic: eps = -1 and 1/sh^2, 1/ch^2
    half-difference weights; rational: +1 and inverse squared sums/differences;
    trigonometric: +1 and 1/sin^2, 1/cos^2).  Real symmetric in the ladder
    basis.
    """
    q = np.asarray(q, dtype=float).ravel()
    lmat, rmat = _fiber_action_matrices(sector)
    dim = lmat.shape[1]
    out = np.zeros((dim, dim), dtype=complex)
    for gen, (a, b) in _pair_to_generator(sector.n):
        with np.errstate(divide="ignore"):
            wm, wp, eps = _pair_weights(kind, params, q[a], q[b])
        if not (np.isfinite(wm) and np.isfinite(wp)):
            raise AssemblyError(f"fiber coupling at a coincidence point, pair ({a},{b})")
        minus = rmat[gen] - lmat[gen]
        plus = rmat[gen] + lmat[gen]
        out += (minus @ minus) * wm + eps * (plus @ plus) * wp
    if np.max(np.abs(out.imag)) > 1e-12 * max(1.0, np.max(np.abs(out.real))):
        raise AssemblyError("fiber coupling unexpectedly non-real")
    return out.real


def casimir_constant(kind: ModelKind, sector: SectorLabel, params: InertialParams) -> float:
    """Additive rotational constant of the mixed kinds; 0 for the others.

    n = 3: s(s+1)/(2 mu) for the metric-affine kind (spin label) and
    j(j+1)/(2 mu) for the affine-metric kind (vorticity label); n = 2 the
    printed planar constants m^2/mu resp. n^2/mu.
    """
    if kind not in (ModelKind.MetAff, ModelKind.AffMet):
        return 0.0
    label = sector.left if kind is ModelKind.MetAff else sector.right
    if sector.n == 3:
        return SpinLabel(label).casimir() / (2.0 * params.mu)
    return float(label**2) / params.mu


# ---------------------------------------------------------------------------
# operator assembly
# ---------------------------------------------------------------------------


_LAP_COEFF = {
    ModelKind.AffAff: lambda p: 0.5 / p.A,
    ModelKind.MetAff: lambda p: 0.5 / p.alpha,
    ModelKind.AffMet: lambda p: 0.5 / p.alpha,
    ModelKind.DAlembert: lambda p: 0.5 / p.I,
    ModelKind.UnitaryGroup: lambda p: 0.5 / p.A,
}


def _dilatation_coefficient(kind: ModelKind, params: InertialParams) -> float:
    """Coefficient t of the +t (sum_a d_a)^2 term in the Hamiltonian."""
    if kind in (ModelKind.AffAff, ModelKind.UnitaryGroup):
        if params.B == 0.0:
            return 0.0
        return 0.5 * params.B / (params.A * (params.A + params.n * params.B))
    if kind in (ModelKind.MetAff, ModelKind.AffMet):
        if params.B == 0.0:
            return 0.0
        return -0.5 / params.beta
    return 0.0


@dataclass
class ReducedOperator:
    """Discrete symmetric reduced Hamiltonian on rescaled amplitudes g = sqrt(P) f."""

    kind: ModelKind
    params: InertialParams
    sector: SectorLabel
    grid: GridSpec
    matrix: sp.csr_matrix
    weight: np.ndarray  # P at the grid nodes, C-order
    meta: dict = field(default_factory=dict)

    @property
    def fiber_shape(self) -> tuple[int, int]:
        return self.sector.fiber_shape

    @property
    def fiber_dim(self) -> int:
        return self.sector.fiber_dim

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def symmetry_defect(self) -> float:
        diff = (self.matrix - self.matrix.T).tocoo()
        num = np.sqrt(np.sum(diff.data**2)) if diff.nnz else 0.0
        den = np.sqrt(np.sum(self.matrix.tocoo().data ** 2))
        return float(num / den) if den else 0.0

    def amplitude_from_vector(self, gvec: np.ndarray) -> ReducedAmplitude:
        """Undo the sqrt(P) rescaling and reshape an eigenvector to f-values."""
        g = np.asarray(gvec).reshape(self.grid.size, self.fiber_dim)
        f = g / np.sqrt(self.weight)[:, None]
        values = f.reshape(self.grid.shape + self.fiber_shape)
        return ReducedAmplitude(self.sector, self.grid, values)

    def export_coo(self, path) -> None:
        """Write the materialized matrix as 'row col value' text lines."""
        coo = self.matrix.tocoo()
        with open(path, "w") as fh:
            fh.write(f"# {self.dim} x {self.dim}, nnz = {coo.nnz}\n")
            for r, c, v in zip(coo.row, coo.col, coo.data):
                fh.write(f"{r} {c} {v:.17g}\n")


def _validate_nodes(kind: ModelKind, grid: GridSpec, pts: np.ndarray) -> None:
    if kind is ModelKind.UnitaryGroup:
        for lo, hi, _ in grid.axes:
            if lo < 0.0 or hi > 2.0 * np.pi:
                raise AssemblyError("compact invariants must lie within (0, 2*pi)")
    n = pts.shape[1]
    if n < 2:
        return
    # the grid must stay inside one chamber: a singular hyperplane crossing
    # the box interior would silently split the operator domain
    for a in range(n):
        for b in range(a + 1, n):
            diff = pts[:, a] - pts[:, b]
            if kind is ModelKind.UnitaryGroup:
                diff = np.sin(diff)
            if np.min(np.abs(diff)) < 1e-12 or (np.min(diff) < 0.0 < np.max(diff)):
                raise AssemblyError(
                    f"grid touches or crosses the coincidence wall of axes ({a},{b})"
                )
            if kind is ModelKind.DAlembert:
                tot = pts[:, a] + pts[:, b]
                if np.min(np.abs(tot)) < 1e-12 or (np.min(tot) < 0.0 < np.max(tot)):
                    raise AssemblyError(
                        f"grid touches or crosses the Q_a + Q_b = 0 line, axes ({a},{b})"
                    )
    if np.min(np.abs(weight_factor(pts, kind))) < 1e-14:
        raise AssemblyError("grid node lies on a coincidence hyperplane")


def assemble(
    kind: ModelKind,
    params: InertialParams,
    sector: SectorLabel,
    grid: GridSpec,
    potential=None,
    coordinates: str = "invariants",
) -> ReducedOperator:
    """Assemble the discrete reduced Hamiltonian for one sector.

    ``potential`` is an optional callable on invariant points of shape
    (npoints, n) returning per-node values.  ``coordinates`` selects the grid
    meaning: "invariants" (default; one axis per q^a) or, for the hyperbolic
    and trigonometric n = 2 families, "split" with axes (dilatation q,
    shear x) in which the operator is an exact tensor sum.
    """
    if not isinstance(kind, ModelKind):
        kind = ModelKind(kind)
    params.validate(kind)
    if not sector.halfness_ok:
        raise AssemblyError(
            f"sector {sector}: the spin labels differ by a half-integer, the "
            "amplitude is identically zero"
        )
    if sector.n != params.n:
        raise AssemblyError(f"sector dimension {sector.n} != params dimension {params.n}")
    if coordinates == "split":
        return _assemble_split(kind, params, sector, grid, potential)
    if coordinates != "invariants":
        raise AssemblyError(f"unknown coordinate mode {coordinates!r}")
    if grid.ndim != params.n:
        raise AssemblyError(f"grid has {grid.ndim} axes, model has n = {params.n}")

    pts = grid.points()
    _validate_nodes(kind, grid, pts)
    fdim = sector.fiber_dim
    lap_c = _LAP_COEFF[kind](params)

    t_blocks = [
        dirichlet_second_difference(n, grid.spacing(a))
        for a, (_, _, n) in enumerate(grid.axes)
    ]
    h = lap_c * kron_chain(t_blocks, fiber_dim=1)

    t_dil = _dilatation_coefficient(kind, params)
    if t_dil != 0.0:
        c_blocks = [
            centered_first_difference(n, grid.spacing(a))
            for a, (_, _, n) in enumerate(grid.axes)
        ]
        cfull = kron_chain(c_blocks, fiber_dim=1)
        h = h + t_dil * (cfull @ cfull)  # + t * (sum_a d_a)^2

    diag = artificial_potential(pts, kind, lap_c)
    diag = diag + casimir_constant(kind, sector, params)
    if potential is not None:
        diag = diag + np.asarray(potential(pts), dtype=float).ravel()
    h = h + sp.diags(diag, format="csr")

    if fdim > 1:
        h = sp.kron(h, sp.identity(fdim, format="csr"), format="csr")
        blocks = np.stack([fiber_coupling(kind, sector, p, params) for p in pts])
        coupling = sp.bsr_matrix(
            (blocks, np.arange(len(pts)), np.arange(len(pts) + 1)),
            shape=(len(pts) * fdim, len(pts) * fdim),
        )
        h = (h + coupling.tocsr()).tocsr()
    else:
        coup = np.array(
            [fiber_coupling(kind, sector, p, params)[0, 0] for p in pts]
        )
        h = (h + sp.diags(coup)).tocsr()

    weight = weight_factor(pts, kind) if pts.shape[1] > 1 else np.ones(len(pts))
    return ReducedOperator(
        kind=kind,
        params=params,
        sector=sector,
        grid=grid,
        matrix=h,
        weight=np.asarray(weight).ravel(),
        meta={"coordinates": "invariants"},
    )


# -- split (q, x) assembly for the separable n = 2 families ------------------


def shear_weight_1d(kind: ModelKind) -> callable:
    if kind.hyperbolic:
        return lambda x: np.abs(np.sinh(x))
    if kind is ModelKind.UnitaryGroup:
        return lambda x: np.abs(np.sin(x))
    raise AssemblyError("1-D shear weight only for hyperbolic/trigonometric kinds")


def shear_flat_potential(kind: ModelKind, x: np.ndarray) -> np.ndarray:
    """(d^2 sqrt(P)/dx^2)/sqrt(P) for the 1-D shear weight (P = |sh x| or |sin x|)."""
    if kind.hyperbolic:
        return 0.25 - 0.25 / np.sinh(x) ** 2
    if kind is ModelKind.UnitaryGroup:
        return -0.25 - 0.25 / np.sin(x) ** 2
    raise AssemblyError("1-D shear potential only for hyperbolic/trigonometric kinds")


def shear_coupling_1d(
    kind: ModelKind, params: InertialParams, sector: SectorLabel, x: np.ndarray
) -> np.ndarray:
    """Scalar sector couplings of the n = 2 shear coordinate (fiber is 1x1)."""
    m, n = sector.left, sector.right
    wm, wp, eps = _pair_weights(kind, params, x, np.zeros_like(x))
    return (n - m) ** 2 * wm + eps * (n + m) ** 2 * wp


def dilatation_mass_coefficient(kind: ModelKind, params: InertialParams) -> float:
    """Coefficient of -d^2/dq^2 of the separated n = 2 dilatation operator."""
    if kind in (ModelKind.AffAff, ModelKind.UnitaryGroup):
        return 0.25 / (params.A + 2.0 * params.B)
    if kind in (ModelKind.MetAff, ModelKind.AffMet):
        return 0.25 / (params.I + params.A + 2.0 * params.B)
    raise AssemblyError("no separated dilatation block for this kind")


def shear_mass_coefficient(kind: ModelKind, params: InertialParams) -> float:
    """Coefficient of the weighted shear operator -D_x of the n = 2 models."""
    if kind in (ModelKind.AffAff, ModelKind.UnitaryGroup):
        return 1.0 / params.A
    if kind in (ModelKind.MetAff, ModelKind.AffMet):
        return 1.0 / params.alpha
    raise AssemblyError("no separated shear block for this kind")


def shear_block_1d(
    kind: ModelKind,
    params: InertialParams,
    sector: SectorLabel,
    nodes: np.ndarray,
    h: float,
    form: str = "flat",
    extra_potential: np.ndarray | None = None,
) -> sp.csr_matrix:
    """1-D shear operator: c_x (-D_x) + sector couplings + additive constant.

    ``form`` = "flat" uses the sqrt(P)-rescaled second-difference Laplacian
    plus the analytic artificial potential; "divergence" discretizes the
    weighted divergence form with half-point weights (symmetrized by the
    discrete sqrt(P) conjugation).  Both are symmetric and isospectral in the
    continuum limit; they may select different behaviour at weight-vanishing
    walls, see the planar module notes.
    """
    cx = shear_mass_coefficient(kind, params)
    with np.errstate(divide="ignore", invalid="ignore"):
        diag = shear_coupling_1d(kind, params, sector, nodes)
        diag = diag + casimir_constant(kind, sector, params)
        if extra_potential is not None:
            diag = diag + extra_potential
        if form == "flat":
            block = cx * dirichlet_second_difference(len(nodes), h)
            diag = diag + cx * shear_flat_potential(kind, nodes)
        elif form == "divergence":
            block = weighted_divergence_block(nodes, h, shear_weight_1d(kind), cx)
        else:
            raise AssemblyError(f"unknown shear form {form!r}")
    if not np.all(np.isfinite(diag)):
        raise AssemblyError("shear grid touches a weight zero; offset the nodes")
    return (block + sp.diags(diag)).tocsr()


def _assemble_split(kind, params, sector, grid, potential) -> ReducedOperator:
    if params.n != 2 or grid.ndim != 2:
        raise AssemblyError("split coordinates exist only for n = 2")
    if kind is ModelKind.DAlembert:
        raise AssemblyError("the rational kind has no (q, x) splitting")
    qn, xn = grid.nodes(0), grid.nodes(1)
    hq, hx = grid.spacing(0), grid.spacing(1)
    bq = dilatation_mass_coefficient(kind, params) * dirichlet_second_difference(len(qn), hq)
    bx = shear_block_1d(kind, params, sector, xn, hx, form="flat")
    h = sp.kron(bq, sp.identity(len(xn)), format="csr") + sp.kron(
        sp.identity(len(qn)), bx, format="csr"
    )
    qq, xx = np.meshgrid(qn, xn, indexing="ij")
    invariants = np.stack([(qq - 0.5 * xx).ravel(), (qq + 0.5 * xx).ravel()], axis=1)
    if potential is not None:
        h = h + sp.diags(np.asarray(potential(invariants), dtype=float).ravel())
    weight = weight_factor(invariants, kind)
    return ReducedOperator(
        kind=kind,
        params=params,
        sector=sector,
        grid=grid,
        matrix=h.tocsr(),
        weight=np.asarray(weight).ravel(),
        meta={"coordinates": "split"},
    )


# ---------------------------------------------------------------------------
# incompressible (unit-determinant) restriction and chamber helpers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SLGrid:
    """Shear-coordinate grid for the zero-trace hyperplane sum_a q^a = 0."""

    grid: GridSpec

    def embed(self, pts: np.ndarray) -> np.ndarray:
        """Map shear points (m, n-1) to invariant points (m, n) with zero sum."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        m, k = pts.shape
        q = np.zeros((m, k + 1))
        for a in range(k):
            q[:, a + 1] = q[:, a] - pts[:, a]
        return q - q.mean(axis=1, keepdims=True)


def sl_constraint_project(grid: GridSpec, n: int) -> SLGrid:
    """Reduced (n-1)-axis grid for the traceless hyperplane.

    Axis a of the result parameterizes the consecutive difference
    q^a - q^{a+1}; the embedding restores invariant points with zero sum, so
    the pair-product weight restricted to the hyperplane equals the weight
    evaluated on the embedded points.
    """
    if n < 2:
        raise AssemblyError("need n >= 2")
    if grid.ndim != n:
        raise AssemblyError("grid dimension must equal n")
    axes = []
    for a in range(n - 1):
        lo_a, hi_a, pts_a = grid.axes[a]
        lo_b, hi_b, _ = grid.axes[a + 1]
        axes.append((lo_a - hi_b, hi_a - lo_b, pts_a))
    return SLGrid(GridSpec(axes=tuple(axes), offset=grid.offset))


def weyl_chamber_grid(n: int, span: float, points: int, gap: float = 0.1) -> GridSpec:
    """Ordered disjoint per-axis boxes inside the chamber q^1 > q^2 > ... > q^n."""
    width = (2.0 * span - (n - 1) * gap) / n
    if width <= 0:
        raise AssemblyError("span too small for the requested gap")
    axes = []
    hi = span
    for _ in range(n):
        axes.append((hi - width, hi, points))
        hi = hi - width - gap
    return GridSpec(axes=tuple(axes), offset=0.0)


def dilatational_harmonic(kappa: float, n: int):
    """Potential (kappa/2) * qbar^2 with qbar the mean of the invariants."""

    def potential(pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(pts)
        qbar = pts.mean(axis=1)
        return 0.5 * kappa * qbar**2

    return potential
